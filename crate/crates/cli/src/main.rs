use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cftg::grammars::{Bounds, Cftg};
use cftg::lifting::{beta, beta_term, check_diagram, lift_grammar, lift_term, parse_derived};
use cftg::mso::{
    apply_interpretation, holds, models_of, parse_formula, Formula, Interpretation, ModelKind,
};
use cftg::sample;
use cftg::terms::{
    canonical_order, string_to_structure, term_to_structure_over, Structure, Term, Word,
};
use cftg::{parse_term_inferred, RankedAlphabet};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use rand::Rng;

/// Context-free tree grammar workbench.
#[derive(Parser)]
#[command(name = "cftg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print grammar diagnostics; exit 0 iff there are none.
    Validate { grammar: PathBuf },
    /// List the bounded language of a grammar, one item per line.
    Enumerate {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Io)]
        mode: Mode,
        #[arg(long, default_value_t = 6)]
        max_steps: usize,
        #[arg(long, default_value_t = 60)]
        max_nodes: usize,
        /// Print yields instead of trees.
        #[arg(long = "yield")]
        yields: bool,
        /// Constants that contribute nothing to a yield.
        #[arg(long, value_delimiter = ',')]
        empty: Vec<String>,
    },
    /// Print the lifted regular grammar.
    Lift { grammar: PathBuf },
    /// Evaluate the derived term in a file.
    Beta { file: PathBuf },
    /// Lift a term to a derived term of sort K.
    LiftTerm {
        term: String,
        #[arg(short, default_value_t = 0)]
        k: usize,
    },
    /// Shortest inside-out derivation of a terminal tree.
    Trace {
        grammar: PathBuf,
        target: String,
        #[arg(long, default_value_t = 6)]
        max_steps: usize,
        #[arg(long, default_value_t = 60)]
        max_nodes: usize,
    },
    /// Seeded checks of beta after LIFT, diagram commutation and the
    /// bounded language correspondence.
    LemmaCheck {
        grammar: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_steps: usize,
        #[arg(long, default_value_t = 10_000)]
        max_nodes: usize,
    },
    #[command(subcommand)]
    Mso(MsoCommand),
    /// Apply an interpretation to a tree.
    Transduce {
        interpretation: PathBuf,
        term: String,
    },
}

#[derive(Subcommand)]
enum MsoCommand {
    /// Decide whether a structure satisfies a closed formula.
    Eval {
        #[arg(long, conflicts_with = "tree")]
        word: Option<String>,
        #[arg(long)]
        tree: Option<String>,
        /// `<structure-file> <formula-file>`, or only the formula file with
        /// `--word` or `--tree`.
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
    },
    /// List all models up to a size bound.
    Models {
        formula: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Letters (`a,b`) for words, ranked symbols (`f/2,a/0`) for trees.
        #[arg(long, value_delimiter = ',', required = true)]
        alphabet: Vec<String>,
        #[arg(long, default_value_t = 10)]
        bound: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Io,
    Regular,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Word,
    Tree,
}

enum Failure {
    /// Bad input to the tool itself: unreadable files, wrong argument shape.
    Usage(String),
    /// The input was read but the operation failed.
    Domain(String),
}

fn domain(e: impl Display) -> Failure {
    Failure::Domain(e.to_string())
}

type Run = Result<Vec<String>, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("IoError: {}: {e}", path.display())))
}

fn load_grammar(path: &Path) -> Result<Cftg, Failure> {
    Cftg::parse(&read(path)?).map_err(domain)
}

fn load_formula(path: &Path) -> Result<Formula, Failure> {
    parse_formula(&read(path)?, None).map_err(domain)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Run {
    match command {
        Command::Validate { grammar } => {
            let g = load_grammar(&grammar)?;
            let diagnostics = g.validate();
            if diagnostics.is_empty() {
                Ok(vec!["ok".into()])
            } else {
                let lines: Vec<String> = diagnostics.iter().map(ToString::to_string).collect();
                Err(Failure::Domain(lines.join("\n")))
            }
        }
        Command::Enumerate {
            grammar,
            mode,
            max_steps,
            max_nodes,
            yields,
            empty,
        } => {
            let g = load_grammar(&grammar)?;
            let bounds = Bounds::new(max_steps, max_nodes);
            let en = match mode {
                Mode::Io => g.enumerate_io(bounds),
                Mode::Regular => g.enumerate_regular(bounds),
            }
            .map_err(domain)?;
            if !yields {
                return Ok(en.terms.iter().map(Term::to_string).collect());
            }
            let empty: BTreeSet<String> = empty.into_iter().collect();
            let words = en
                .terms
                .iter()
                .map(|t| t.yield_word(&empty))
                .collect::<Result<BTreeSet<Word>, _>>()
                .map_err(domain)?;
            Ok(words.iter().map(Word::to_string).collect())
        }
        Command::Lift { grammar } => {
            let gd = lift_grammar(&load_grammar(&grammar)?).map_err(domain)?;
            Ok(gd.to_string().lines().map(String::from).collect())
        }
        Command::Beta { file } => {
            let d = parse_derived(read(&file)?.trim(), None).map_err(domain)?;
            Ok(vec![beta(&d).map_err(domain)?.to_string()])
        }
        Command::LiftTerm { term, k } => {
            let (t, _) = parse_term_inferred(&term).map_err(domain)?;
            Ok(vec![lift_term(&t, k).map_err(domain)?.to_string()])
        }
        Command::Trace {
            grammar,
            target,
            max_steps,
            max_nodes,
        } => {
            let g = load_grammar(&grammar)?;
            let target = g.parse_term(&target, 0).map_err(domain)?;
            let steps = g
                .derivation_trace(&target, Bounds::new(max_steps, max_nodes))
                .map_err(domain)?;
            let mut lines = vec![format!("0  {}", g.start_term())];
            for (i, s) in steps.iter().enumerate() {
                lines.push(format!(
                    "{}  {}    [{} at {}]",
                    i + 1,
                    s.after,
                    g.productions()[s.production],
                    s.address
                ));
            }
            Ok(lines)
        }
        Command::LemmaCheck {
            grammar,
            samples,
            seed,
            max_steps,
            max_nodes,
        } => lemma_check(
            &load_grammar(&grammar)?,
            samples,
            seed,
            Bounds::new(max_steps, max_nodes),
        ),
        Command::Mso(MsoCommand::Eval { word, tree, files }) => {
            let expected = if word.is_some() || tree.is_some() {
                1
            } else {
                2
            };
            if files.len() != expected {
                let msg = if expected == 1 {
                    "with --word or --tree give only the formula file"
                } else {
                    "give a structure file and a formula file, or use --word/--tree"
                };
                Cli::command()
                    .error(clap::error::ErrorKind::WrongNumberOfValues, msg)
                    .exit();
            }
            let f = load_formula(files.last().expect("at least one file"))?;
            let m = if let Some(w) = word {
                let w = Word::parse(&w);
                let mut letters: BTreeSet<String> = w.0.iter().map(|l| l.to_string()).collect();
                letters.extend(predicates(&f));
                let letters: Vec<String> = letters.into_iter().collect();
                string_to_structure(&w, &letters).map_err(domain)?
            } else if let Some(t) = tree {
                let (t, sig) = parse_term_inferred(&t).map_err(domain)?;
                term_to_structure_over(&t, &sig).map_err(domain)?
            } else {
                Structure::parse(&read(&files[0])?).map_err(domain)?
            };
            Ok(vec![holds(&m, &f).map_err(domain)?.to_string()])
        }
        Command::Mso(MsoCommand::Models {
            formula,
            kind,
            alphabet,
            bound,
        }) => {
            let f = load_formula(&formula)?;
            let kind = match kind {
                Kind::Word => ModelKind::Words(alphabet),
                Kind::Tree => ModelKind::Trees(ranked(&alphabet)?),
            };
            Ok(models_of(&f, &kind, bound).map_err(domain)?.lines())
        }
        Command::Transduce {
            interpretation,
            term,
        } => {
            let i = Interpretation::parse(&read(&interpretation)?).map_err(domain)?;
            let t = cftg::parse_term(&term, &i.source, 0).map_err(domain)?;
            Ok(vec![apply_interpretation(&i, &t)
                .map_err(domain)?
                .term
                .to_string()])
        }
    }
}

fn ranked(entries: &[String]) -> Result<RankedAlphabet, Failure> {
    let mut symbols = Vec::new();
    for e in entries.iter().flat_map(|e| e.split_whitespace()) {
        let parsed = e
            .rsplit_once('/')
            .and_then(|(n, r)| Some((n.to_string(), r.parse::<usize>().ok()?)));
        match parsed {
            Some(s) => symbols.push(s),
            None => {
                return Err(Failure::Usage(format!(
                    "`{e}` is not of the form name/rank"
                )))
            }
        }
    }
    RankedAlphabet::terminals(symbols).map_err(domain)
}

fn predicates(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![f];
    while let Some(f) = stack.pop() {
        match f {
            Formula::Pred(p, _) => {
                out.insert(p.clone());
            }
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => stack.push(g),
            Formula::And(gs) | Formula::Or(gs) => stack.extend(gs),
            Formula::Implies(a, b) | Formula::Iff(a, b) => stack.extend([&**a, &**b]),
            _ => {}
        }
    }
    out
}

fn lemma_check(g: &Cftg, samples: usize, seed: u64, bounds: Bounds) -> Run {
    let mut rng = sample::rng(seed);
    let sig = g.alphabet();

    let mut identity = 0;
    for _ in 0..samples {
        let k = rng.gen_range(0..=4);
        let Some(t) = sample::random_term(&mut rng, sig, k, 30) else {
            return Err(Failure::Domain(
                "SampleError: the alphabet has no constants".into(),
            ));
        };
        let ok = lift_term(&t, k)
            .and_then(|d| beta(&d))
            .is_ok_and(|b| b == t);
        identity += usize::from(ok);
    }

    let mut diagram = 0;
    let mut squares = 0;
    for p in g.productions() {
        for _ in 0..samples {
            let sort = rng.gen_range(0..=3);
            let Some(d) = sample::random_derived(&mut rng, sig, sort, 3, 3) else {
                continue;
            };
            squares += 1;
            diagram += usize::from(check_diagram(p, sig, &d).map_err(domain)?);
        }
    }

    let io: BTreeSet<Term> = g
        .enumerate_io(bounds)
        .map_err(domain)?
        .terms
        .into_iter()
        .collect();
    let gd = lift_grammar(g).map_err(domain)?;
    let lifted = gd
        .enumerate_regular(bounds)
        .map_err(domain)?
        .terms
        .iter()
        .map(|d| beta_term(d, 0))
        .collect::<Result<BTreeSet<Term>, _>>()
        .map_err(domain)?;
    let agree = io.intersection(&lifted).count();
    let union = io.union(&lifted).count();

    let verdict = |good: usize, total: usize| if good == total { "pass" } else { "FAIL" };
    let mut lines = vec![format!(
        "identity: {identity}/{samples} {}; diagram: {diagram}/{squares} {}; language: {agree}/{union} {}",
        verdict(identity, samples),
        verdict(diagram, squares),
        verdict(agree, union)
    )];
    if identity != samples || diagram != squares || agree != union {
        for t in canonical_order(io.symmetric_difference(&lifted).cloned()) {
            let side = if io.contains(&t) {
                "only in L(G)"
            } else {
                "only in beta(L(G_D))"
            };
            lines.push(format!("{side}: {t}"));
        }
        return Err(Failure::Domain(format!(
            "LemmaFailure: {}",
            lines.join("\n")
        )));
    }
    Ok(lines)
}
