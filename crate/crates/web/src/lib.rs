//! Browser bindings for the static demo page in `www/`. Every export takes
//! and returns plain text; errors come back as the error's display string.

use std::collections::BTreeSet;

use cftg::grammars::{Bounds, Cftg};
use cftg::lifting::{beta, lift_grammar, lift_term, parse_derived};
use cftg::mso::{models_of, parse_formula, ModelKind};
use cftg::terms::{Term, Word};
use cftg::{parse_term_inferred, RankedAlphabet};
use wasm_bindgen::prelude::*;

const EXAMPLES: [(&str, &str); 6] = [
    ("anbncn", include_str!("../../core/grammars/anbncn.grammar")),
    (
        "cross_serial",
        include_str!("../../core/grammars/cross_serial.grammar"),
    ),
    (
        "anbn_monadic",
        include_str!("../../core/grammars/anbn_monadic.grammar"),
    ),
    (
        "copying",
        include_str!("../../core/grammars/copying.grammar"),
    ),
    ("a_star", include_str!("../../core/grammars/a_star.grammar")),
    ("root_f", include_str!("../../core/grammars/root_f.grammar")),
];

fn text(e: impl ToString) -> String {
    e.to_string()
}

/// Names of the bundled grammars, one per line.
#[wasm_bindgen]
pub fn example_names() -> String {
    EXAMPLES.map(|(n, _)| n).join("\n")
}

#[wasm_bindgen]
pub fn example(name: &str) -> Result<String, String> {
    EXAMPLES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, g)| g.to_string())
        .ok_or_else(|| format!("no example named `{name}`"))
}

/// Bounded inside-out language of a grammar. With `yields` set, the words
/// are listed instead of the trees; `empty` is a comma-separated list of
/// constants read as the empty word.
#[wasm_bindgen]
pub fn enumerate(
    grammar: &str,
    max_steps: usize,
    max_nodes: usize,
    yields: bool,
    empty: &str,
) -> Result<String, String> {
    let g = Cftg::parse(grammar).map_err(text)?;
    let en = g
        .enumerate_io(Bounds::new(max_steps, max_nodes))
        .map_err(text)?;
    let mut lines: Vec<String> = if yields {
        let empty: BTreeSet<String> = empty
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        let words = en
            .terms
            .iter()
            .map(|t| t.yield_word(&empty))
            .collect::<Result<BTreeSet<Word>, _>>()
            .map_err(text)?;
        words
            .iter()
            .map(|w| {
                if w.is_empty() {
                    "ε".into()
                } else {
                    w.to_string()
                }
            })
            .collect()
    } else {
        en.terms.iter().map(Term::to_string).collect()
    };
    if en.exhausted {
        lines.push("… (bounds reached; the list may be incomplete)".into());
    }
    Ok(lines.join("\n"))
}

/// The lifted regular grammar, in grammar file syntax.
#[wasm_bindgen]
pub fn lift(grammar: &str) -> Result<String, String> {
    let g = Cftg::parse(grammar).map_err(text)?;
    Ok(lift_grammar(&g).map_err(text)?.to_string())
}

#[wasm_bindgen]
pub fn lift_one(term: &str, k: usize) -> Result<String, String> {
    let (t, _) = parse_term_inferred(term).map_err(text)?;
    Ok(lift_term(&t, k).map_err(text)?.to_string())
}

#[wasm_bindgen]
pub fn evaluate(derived: &str) -> Result<String, String> {
    let d = parse_derived(derived.trim(), None).map_err(text)?;
    Ok(beta(&d).map_err(text)?.to_string())
}

/// Models of a closed formula. `kind` is `word` (alphabet `a,b`) or `tree`
/// (alphabet `f/2,a/0`).
#[wasm_bindgen]
pub fn mso_models(
    formula: &str,
    kind: &str,
    alphabet: &str,
    bound: usize,
) -> Result<String, String> {
    let f = parse_formula(formula, None).map_err(text)?;
    let entries = alphabet
        .split([',', ' '])
        .map(str::trim)
        .filter(|s| !s.is_empty());
    let kind = match kind {
        "word" => ModelKind::Words(entries.map(String::from).collect()),
        "tree" => {
            let mut symbols = Vec::new();
            for e in entries {
                let (name, rank) = e
                    .rsplit_once('/')
                    .and_then(|(n, r)| Some((n.to_string(), r.parse::<usize>().ok()?)))
                    .ok_or_else(|| format!("`{e}` is not of the form name/rank"))?;
                symbols.push((name, rank));
            }
            ModelKind::Trees(RankedAlphabet::terminals(symbols).map_err(text)?)
        }
        other => return Err(format!("unknown kind `{other}`")),
    };
    let models = models_of(&f, &kind, bound).map_err(text)?;
    if models.is_empty() {
        return Ok("(no models)".into());
    }
    Ok(models
        .lines()
        .into_iter()
        .map(|l| if l.is_empty() { "ε".into() } else { l })
        .collect::<Vec<_>>()
        .join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_examples_parse() {
        for name in example_names().lines() {
            Cftg::parse(&example(name).unwrap()).unwrap();
        }
        assert!(example("nope").is_err());
    }

    #[test]
    fn demo_operations() {
        let g = example("anbncn").unwrap();
        assert_eq!(
            enumerate(&g, 3, 60, true, "").unwrap(),
            "abc\naabbcc\n… (bounds reached; the list may be incomplete)"
        );
        assert!(lift(&g)
            .unwrap()
            .contains("S:0 -> S{3,0}(F:3,S{0,0}(a),S{0,0}(b),S{0,0}(c))"));
        assert_eq!(evaluate("S{2,0}(f,S{0,0}(a),S{0,0}(b))").unwrap(), "f(a,b)");
        assert_eq!(
            lift_one("f(a,b)", 0).unwrap(),
            "S{2,0}(f,S{0,0}(a),S{0,0}(b))"
        );
        assert_eq!(
            mso_models("(forall x (P a x))", "word", "a,b", 2).unwrap(),
            "ε\na\naa"
        );
        assert!(mso_models("(P a x)", "word", "a", 2)
            .unwrap_err()
            .starts_with("UnboundVariable"));
    }
}
