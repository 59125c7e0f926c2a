//! Context-free tree grammars under inside-out (call-by-value) derivation,
//! regular tree grammars as the rank-0 special case, and bounded
//! enumeration of their languages.
//!
//! Grammar files look like this:
//!
//! ```text
//! # a^n b^n c^n
//! terminals: cat/2 a/0 b/0 c/0
//! nonterminals: S/0 F/3
//! start: S
//! S -> F(a,b,c)
//! F(x1,x2,x3) -> F(cat(x1,a),cat(x2,b),cat(x3,c))
//!              | cat(cat(x1,x2),x3)
//! ```

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::alphabets::{AlphabetError, RankedAlphabet, SymbolKind};
use crate::syntax::{self, Pos, SyntaxError};
use crate::terms::{canonical_order, Address, Label, Term, TermError, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("InvalidGrammar: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("NotRegular: nonterminal `{0}` has nonzero rank")]
    NotRegular(String),
    #[error("NotFound: no derivation of the target within the bounds")]
    NotFound,
}

/// `lhs(x1,...,x_arity) -> rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Production {
    pub lhs: Arc<str>,
    pub arity: usize,
    pub rhs: Term,
}

impl Production {
    pub fn new(lhs: impl AsRef<str>, arity: usize, rhs: Term) -> Self {
        Production {
            lhs: Arc::from(lhs.as_ref()),
            arity,
            rhs,
        }
    }

    /// The left-hand side as a term, `F(x1,...,xm)`.
    pub fn lhs_term(&self) -> Term {
        Term::generic(self.lhs.clone(), self.arity)
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs_term(), self.rhs)
    }
}

/// A well-formedness problem found by [`Cftg::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    StartNotNonterminal(String),
    StartRank {
        start: String,
        rank: usize,
    },
    LhsNotNonterminal {
        production: usize,
        name: String,
    },
    LhsRankMismatch {
        production: usize,
        name: String,
        declared: usize,
        used: usize,
    },
    VariableOutOfRange {
        production: usize,
        index: usize,
        max: usize,
    },
    IllFormedRhs {
        production: usize,
        message: String,
    },
}

impl Diagnostic {
    pub fn name(&self) -> &'static str {
        match self {
            Diagnostic::StartNotNonterminal(_) => "StartNotNonterminal",
            Diagnostic::StartRank { .. } => "StartRank",
            Diagnostic::LhsNotNonterminal { .. } => "LhsNotNonterminal",
            Diagnostic::LhsRankMismatch { .. } => "LhsRankMismatch",
            Diagnostic::VariableOutOfRange { .. } => "VariableOutOfRange",
            Diagnostic::IllFormedRhs { .. } => "IllFormedRhs",
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name())?;
        match self {
            Diagnostic::StartNotNonterminal(s) => write!(f, "start symbol `{s}` is not a nonterminal"),
            Diagnostic::StartRank { start, rank } => {
                write!(f, "start symbol `{start}` has rank {rank}, expected 0")
            }
            Diagnostic::LhsNotNonterminal { production, name } => {
                write!(f, "production {production}: `{name}` is not a nonterminal")
            }
            Diagnostic::LhsRankMismatch {
                production,
                name,
                declared,
                used,
            } => write!(
                f,
                "production {production}: `{name}` has rank {declared} but the left-hand side binds {used} variables"
            ),
            Diagnostic::VariableOutOfRange {
                production,
                index,
                max,
            } => write!(
                f,
                "production {production}: x{index} used but only x1..x{max} are bound"
            ),
            Diagnostic::IllFormedRhs {
                production,
                message,
            } => write!(f, "production {production}: {message}"),
        }
    }
}

/// Truncation limits for enumeration. A derivation is admitted when it has
/// at most `max_steps` steps and every sentential form along it has at most
/// `max_nodes` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_steps: usize,
    pub max_nodes: usize,
}

impl Bounds {
    pub fn new(max_steps: usize, max_nodes: usize) -> Self {
        Bounds {
            max_steps,
            max_nodes,
        }
    }

    pub fn steps(max_steps: usize) -> Self {
        Bounds {
            max_steps,
            ..Bounds::default()
        }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_steps: 6,
            max_nodes: 60,
        }
    }
}

/// Result of a bounded enumeration. `exhausted` is set when some sentential
/// form was cut off by the bounds, so the list may be incomplete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub terms: Vec<Term>,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub production: usize,
    pub address: Address,
    pub before: Term,
    pub after: Term,
}

/// A context-free tree grammar `⟨Σ, F, S, P⟩`. The alphabet holds both
/// terminals and nonterminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cftg {
    alphabet: RankedAlphabet,
    start: Arc<str>,
    productions: Vec<Production>,
}

impl Cftg {
    /// Assembles a grammar without checking it; see [`Cftg::validate`].
    pub fn new(
        alphabet: RankedAlphabet,
        start: impl AsRef<str>,
        productions: Vec<Production>,
    ) -> Self {
        let start = alphabet
            .intern(start.as_ref())
            .unwrap_or_else(|| Arc::from(start.as_ref()));
        Cftg {
            alphabet,
            start,
            productions,
        }
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        match self.alphabet.get(&self.start) {
            Some((sym, SymbolKind::Nonterminal)) => {
                if sym.rank != 0 {
                    out.push(Diagnostic::StartRank {
                        start: self.start.to_string(),
                        rank: sym.rank,
                    });
                }
            }
            _ => out.push(Diagnostic::StartNotNonterminal(self.start.to_string())),
        }
        for (i, p) in self.productions.iter().enumerate() {
            match self.alphabet.get(&p.lhs) {
                Some((sym, SymbolKind::Nonterminal)) => {
                    if sym.rank != p.arity {
                        out.push(Diagnostic::LhsRankMismatch {
                            production: i,
                            name: p.lhs.to_string(),
                            declared: sym.rank,
                            used: p.arity,
                        });
                    }
                }
                _ => out.push(Diagnostic::LhsNotNonterminal {
                    production: i,
                    name: p.lhs.to_string(),
                }),
            }
            if p.rhs.max_var() > p.arity {
                out.push(Diagnostic::VariableOutOfRange {
                    production: i,
                    index: p.rhs.max_var(),
                    max: p.arity,
                });
            } else if let Err(e) = p.rhs.check(&self.alphabet, p.arity) {
                out.push(Diagnostic::IllFormedRhs {
                    production: i,
                    message: e.to_string(),
                });
            }
        }
        out
    }

    fn require_valid(&self) -> Result<(), GrammarError> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(GrammarError::Invalid(diags))
        }
    }

    /// True iff every nonterminal has rank 0.
    pub fn is_regular(&self) -> bool {
        self.alphabet.nonterminal_symbols().all(|s| s.rank == 0)
    }

    pub fn start_term(&self) -> Term {
        Term::with_symbol(self.start.clone(), Vec::new())
    }

    pub fn is_terminal_tree(&self, t: &Term) -> bool {
        t.is_terminal_in(&self.alphabet)
    }

    /// Parses a term over this grammar's symbols and `x1..xk`.
    pub fn parse_term(&self, text: &str, k: usize) -> Result<Term, TermError> {
        crate::terms::parse_term(text, &self.alphabet, k)
    }

    /// All inside-out steps from the sentential form `t`: one per occurrence
    /// of a nonterminal whose arguments are all terminal trees, and per
    /// production for that nonterminal.
    pub fn io_successors(&self, t: &Term) -> Vec<DerivationStep> {
        let mut out = Vec::new();
        for (addr, node) in t.preorder() {
            let Label::Symbol(name) = &node.label else {
                continue;
            };
            if !self.alphabet.is_nonterminal(name) {
                continue;
            }
            if !node.children.iter().all(|c| self.is_terminal_tree(c)) {
                continue;
            }
            self.rewrite_at(t, &addr, node, &mut out);
        }
        out
    }

    fn rewrite_at(&self, t: &Term, addr: &Address, node: &Term, out: &mut Vec<DerivationStep>) {
        let name = node.symbol().expect("redex is a symbol");
        for (i, p) in self.productions.iter().enumerate() {
            if *p.lhs == *name && p.arity == node.children.len() {
                let replacement = p.rhs.instantiate(&node.children);
                out.push(DerivationStep {
                    production: i,
                    address: addr.clone(),
                    before: t.clone(),
                    after: t.replace_at(addr, replacement),
                });
            }
        }
    }

    /// Steps rewriting the leftmost (first in preorder) nonterminal.
    fn leftmost_successors(&self, t: &Term) -> Vec<DerivationStep> {
        let mut out = Vec::new();
        if let Some((addr, node)) = t
            .preorder()
            .into_iter()
            .find(|(_, n)| n.symbol().is_some_and(|s| self.alphabet.is_nonterminal(s)))
        {
            self.rewrite_at(t, &addr, node, &mut out);
        }
        out
    }

    fn bounded_search(
        &self,
        bounds: Bounds,
        successors: impl Fn(&Term) -> Vec<DerivationStep>,
    ) -> Enumeration {
        let start = self.start_term();
        let mut results = Vec::new();
        let mut exhausted = false;
        if start.size() > bounds.max_nodes {
            return Enumeration {
                terms: results,
                exhausted: true,
            };
        }
        let mut seen: HashSet<Term> = HashSet::from([start.clone()]);
        let mut frontier = vec![start];
        for depth in 0..=bounds.max_steps {
            let mut next = Vec::new();
            for form in frontier {
                if self.is_terminal_tree(&form) {
                    results.push(form);
                    continue;
                }
                if depth == bounds.max_steps {
                    exhausted = true;
                    continue;
                }
                for step in successors(&form) {
                    if step.after.size() > bounds.max_nodes {
                        exhausted = true;
                    } else if seen.insert(step.after.clone()) {
                        next.push(step.after);
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        Enumeration {
            terms: canonical_order(results),
            exhausted,
        }
    }

    /// Terminal trees derivable from the start symbol by inside-out steps
    /// within `bounds`, in canonical order.
    pub fn enumerate_io(&self, bounds: Bounds) -> Result<Enumeration, GrammarError> {
        self.require_valid()?;
        Ok(self.bounded_search(bounds, |t| self.io_successors(t)))
    }

    /// Same contract as [`Cftg::enumerate_io`] for regular grammars.
    ///
    /// Only the leftmost nonterminal is rewritten. At rank 0 every derivation
    /// can be reordered into a leftmost one with the same step count, and
    /// sentential forms only grow, so the admitted terminal trees coincide.
    pub fn enumerate_regular(&self, bounds: Bounds) -> Result<Enumeration, GrammarError> {
        self.require_valid()?;
        if let Some(s) = self.alphabet.nonterminal_symbols().find(|s| s.rank != 0) {
            return Err(GrammarError::NotRegular(s.name.to_string()));
        }
        Ok(self.bounded_search(bounds, |t| self.leftmost_successors(t)))
    }

    /// Yields of the inside-out language within `bounds`, deduplicated and
    /// sorted shortest first. The flag mirrors [`Enumeration::exhausted`].
    pub fn yield_language(
        &self,
        bounds: Bounds,
        empty: &BTreeSet<String>,
    ) -> Result<(Vec<Word>, bool), GrammarError> {
        let en = self.enumerate_io(bounds)?;
        let words = en
            .terms
            .iter()
            .map(|t| t.yield_word(empty))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok((words.into_iter().collect(), en.exhausted))
    }

    /// A shortest inside-out derivation from the start symbol to the
    /// terminal tree `target`.
    pub fn derivation_trace(
        &self,
        target: &Term,
        bounds: Bounds,
    ) -> Result<Vec<DerivationStep>, GrammarError> {
        self.require_valid()?;
        let start = self.start_term();
        if !self.is_terminal_tree(target) || start.size() > bounds.max_nodes {
            return Err(GrammarError::NotFound);
        }
        let mut parent: HashMap<Term, Option<DerivationStep>> = HashMap::new();
        parent.insert(start.clone(), None);
        let mut queue = VecDeque::from([(start, 0usize)]);
        let mut found = false;
        while let Some((form, depth)) = queue.pop_front() {
            if found || depth == bounds.max_steps {
                continue;
            }
            for step in self.io_successors(&form) {
                if step.after.size() > bounds.max_nodes || parent.contains_key(&step.after) {
                    continue;
                }
                let after = step.after.clone();
                parent.insert(after.clone(), Some(step));
                if after == *target {
                    found = true;
                    break;
                }
                queue.push_back((after, depth + 1));
            }
        }
        if !found {
            return Err(GrammarError::NotFound);
        }
        let mut steps = Vec::new();
        let mut cur = target.clone();
        while let Some(Some(step)) = parent.get(&cur) {
            cur = step.before.clone();
            steps.push(step.clone());
        }
        steps.reverse();
        Ok(steps)
    }

    /// Parses the grammar file format described in the module docs.
    pub fn parse(text: &str) -> Result<Cftg, GrammarError> {
        let mut terminals: Option<Vec<(String, usize)>> = None;
        let mut nonterminals: Option<Vec<(String, usize)>> = None;
        let mut start: Option<String> = None;
        // (lhs text, lhs pos, rhs text, rhs pos)
        let mut pending: Vec<(String, Pos, String, Pos)> = Vec::new();

        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw_line.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let indent = line.len() - line.trim_start().len();
            let trimmed = line.trim();
            let at = |offset: usize| {
                syntax::advance(
                    Pos {
                        line: line_no,
                        col: 1,
                    },
                    line,
                    offset,
                )
            };

            if let Some(rest) = trimmed.strip_prefix('|') {
                let Some(last) = pending.last() else {
                    return Err(SyntaxError::new(
                        at(indent),
                        "`|` continuation without a production",
                    )
                    .into());
                };
                let (lhs, lhs_pos) = (last.0.clone(), last.1);
                let offset = indent + 1;
                for (alt, alt_off) in split_alternatives(rest, offset) {
                    pending.push((lhs.clone(), lhs_pos, alt, at(alt_off)));
                }
                continue;
            }
            if let Some((lhs, rhs)) = trimmed.split_once("->") {
                let lhs_off = indent;
                let rhs_off = indent + lhs.len() + 2;
                for (alt, alt_off) in split_alternatives(rhs, rhs_off) {
                    pending.push((lhs.trim().to_string(), at(lhs_off), alt, at(alt_off)));
                }
                continue;
            }
            let Some((key, value)) = trimmed.split_once(':') else {
                return Err(
                    SyntaxError::new(at(indent), "expected a header line or a production").into(),
                );
            };
            let value_pos = at(indent + key.len() + 1);
            match key.trim() {
                "terminals" => terminals = Some(parse_symbol_list(value, value_pos)?),
                "nonterminals" => nonterminals = Some(parse_symbol_list(value, value_pos)?),
                "start" => start = Some(value.trim().to_string()),
                other => {
                    return Err(
                        SyntaxError::new(at(indent), format!("unknown header `{other}`")).into(),
                    )
                }
            }
        }

        let terminals =
            terminals.ok_or_else(|| SyntaxError::new(Pos::start(), "missing `terminals:` line"))?;
        let nonterminals = nonterminals
            .ok_or_else(|| SyntaxError::new(Pos::start(), "missing `nonterminals:` line"))?;
        let start = start.ok_or_else(|| SyntaxError::new(Pos::start(), "missing `start:` line"))?;
        let alphabet = RankedAlphabet::new(
            terminals
                .into_iter()
                .map(|(n, r)| (n, r, SymbolKind::Terminal))
                .chain(
                    nonterminals
                        .into_iter()
                        .map(|(n, r)| (n, r, SymbolKind::Nonterminal)),
                ),
        )?;

        let mut productions = Vec::new();
        for (lhs, lhs_pos, rhs, rhs_pos) in pending {
            let lhs_raw = syntax::parse_raw(&lhs, lhs_pos)?;
            for (j, c) in lhs_raw.children.iter().enumerate() {
                if c.name != format!("x{}", j + 1) || !c.children.is_empty() {
                    return Err(SyntaxError::new(
                        c.pos,
                        format!(
                            "left-hand side arguments must be x1..x{}",
                            lhs_raw.children.len()
                        ),
                    )
                    .into());
                }
            }
            let rhs_raw = syntax::parse_raw(&rhs, rhs_pos)?;
            let rhs = Term::from_raw(&rhs_raw, &alphabet, None)?;
            let name = alphabet
                .intern(&lhs_raw.name)
                .unwrap_or_else(|| Arc::from(lhs_raw.name.as_str()));
            productions.push(Production {
                lhs: name,
                arity: lhs_raw.children.len(),
                rhs,
            });
        }
        Ok(Cftg::new(alphabet, start, productions))
    }
}

fn split_alternatives(text: &str, base_offset: usize) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut offset = base_offset;
    for part in text.split('|') {
        let lead = part.len() - part.trim_start().len();
        if !part.trim().is_empty() {
            out.push((part.trim().to_string(), offset + lead));
        }
        offset += part.len() + 1;
    }
    out
}

fn parse_symbol_list(text: &str, pos: Pos) -> Result<Vec<(String, usize)>, SyntaxError> {
    text.split_whitespace()
        .map(|entry| {
            let (name, rank) = entry.rsplit_once('/').ok_or_else(|| {
                SyntaxError::new(pos, format!("`{entry}` is not of the form name/rank"))
            })?;
            let rank = rank
                .parse()
                .map_err(|_| SyntaxError::new(pos, format!("`{rank}` is not a rank")))?;
            Ok((name.to_string(), rank))
        })
        .collect()
}

impl fmt::Display for Cftg {
    /// Grammar file syntax; consecutive productions for the same left-hand
    /// side are joined with `|`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |kind: SymbolKind| {
            self.alphabet
                .iter()
                .filter(|(_, k)| *k == kind)
                .map(|(s, _)| s.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "terminals: {}", list(SymbolKind::Terminal))?;
        writeln!(f, "nonterminals: {}", list(SymbolKind::Nonterminal))?;
        writeln!(f, "start: {}", self.start)?;
        let mut i = 0;
        while i < self.productions.len() {
            let p = &self.productions[i];
            write!(f, "{} -> {}", p.lhs_term(), p.rhs)?;
            let mut j = i + 1;
            while j < self.productions.len()
                && self.productions[j].lhs == p.lhs
                && self.productions[j].arity == p.arity
            {
                write!(f, " | {}", self.productions[j].rhs)?;
                j += 1;
            }
            writeln!(f)?;
            i = j;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ANBNCN: &str = include_str!("../grammars/anbncn.grammar");
    const G_MONADIC: &str = include_str!("../grammars/monadic.grammar");
    const G_PRIME: &str = include_str!("../grammars/anbn_binary.grammar");
    const G_DOUBLE_PRIME: &str = include_str!("../grammars/anbn_monadic.grammar");

    fn strings(ts: &[Term]) -> Vec<String> {
        ts.iter().map(Term::to_string).collect()
    }

    #[test]
    fn parses_and_prints_round_trip() {
        let g = Cftg::parse(ANBNCN).unwrap();
        assert_eq!(g.productions().len(), 3);
        assert_eq!(g.start(), "S");
        let printed = g.to_string();
        assert_eq!(Cftg::parse(&printed).unwrap(), g);
        assert!(printed
            .contains("F(x1,x2,x3) -> F(cat(x1,a),cat(x2,b),cat(x3,c)) | cat(cat(x1,x2),x3)"));
    }

    #[test]
    fn parse_errors_cite_positions() {
        let text = "terminals: a/0\nnonterminals: S/0\nstart: S\nS -> b\n";
        match Cftg::parse(text) {
            Err(GrammarError::Term(TermError::UnknownSymbol { pos, .. })) => {
                assert_eq!(pos, Pos { line: 4, col: 6 })
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "terminals: a/0\nnonterminals: S/0 F/1\nstart: S\nS -> a\nF(x2) -> a\n";
        assert!(matches!(Cftg::parse(text), Err(GrammarError::Syntax(_))));
        assert!(matches!(
            Cftg::parse("terminals: a/0\nstart: S\n"),
            Err(GrammarError::Syntax(_))
        ));
    }

    #[test]
    fn validation_diagnostics() {
        assert!(Cftg::parse(ANBNCN).unwrap().validate().is_empty());

        let bad_var = "terminals: a/0 g/4\nnonterminals: S/0 F/3\nstart: S\nS -> F(a,a,a)\nF(x1,x2,x3) -> g(x1,x2,x3,x4)\n";
        let d = Cftg::parse(bad_var).unwrap().validate();
        assert_eq!(d.len(), 1);
        assert!(matches!(
            d[0],
            Diagnostic::VariableOutOfRange {
                index: 4,
                max: 3,
                ..
            }
        ));

        let bad_start = "terminals: a/0\nnonterminals: S/1\nstart: S\nS(x1) -> a\n";
        let d = Cftg::parse(bad_start).unwrap().validate();
        assert!(matches!(d[0], Diagnostic::StartRank { rank: 1, .. }));

        let bad_lhs = "terminals: a/0\nnonterminals: S/0\nstart: S\nS -> a\na -> a\n";
        let d = Cftg::parse(bad_lhs).unwrap().validate();
        assert!(matches!(
            d[0],
            Diagnostic::LhsNotNonterminal { production: 1, .. }
        ));
    }

    #[test]
    fn regularity() {
        assert!(Cftg::parse(G_MONADIC).unwrap().is_regular());
        assert!(Cftg::parse(G_PRIME).unwrap().is_regular());
        assert!(!Cftg::parse(G_DOUBLE_PRIME).unwrap().is_regular());
        assert!(!Cftg::parse(ANBNCN).unwrap().is_regular());
    }

    #[test]
    fn io_steps_from_fig1() {
        let g = Cftg::parse(ANBNCN).unwrap();
        let s = g.io_successors(&g.start_term());
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].after.to_string(), "F(a,b,c)");

        let t = g.parse_term("F(a,b,c)", 0).unwrap();
        let after: BTreeSet<String> = g
            .io_successors(&t)
            .iter()
            .map(|s| s.after.to_string())
            .collect();
        assert_eq!(
            after,
            BTreeSet::from([
                "F(cat(a,a),cat(b,b),cat(c,c))".to_string(),
                "cat(cat(a,b),c)".to_string()
            ])
        );
    }

    #[test]
    fn io_blocks_nonterminal_arguments() {
        let g = Cftg::parse(include_str!("../grammars/copying.grammar")).unwrap();
        let t = g.parse_term("F(N)", 0).unwrap();
        let steps = g.io_successors(&t);
        // only N may be rewritten, F waits for a terminal argument
        assert!(!steps.is_empty());
        assert!(steps
            .iter()
            .all(|s| s.address == Address::from_one_based(&[1])));
        let after: BTreeSet<String> = steps.iter().map(|s| s.after.to_string()).collect();
        assert_eq!(
            after,
            BTreeSet::from(["F(a)".to_string(), "F(b)".to_string()])
        );
    }

    #[test]
    fn step_shape_invariant() {
        let g = Cftg::parse(ANBNCN).unwrap();
        let t = g.parse_term("cat(F(a,b,c),F(cat(a,a),b,c))", 0);
        // cat is rank 2; the form has two independent redexes
        let t = t.unwrap();
        for step in g.io_successors(&t) {
            let redex = step.before.subterm(&step.address).unwrap();
            assert!(redex.children.iter().all(|c| g.is_terminal_tree(c)));
            let p = &g.productions()[step.production];
            assert_eq!(redex.symbol(), Some(&*p.lhs));
            let rebuilt = step
                .before
                .replace_at(&step.address, p.rhs.substitute(&redex.children).unwrap());
            assert_eq!(rebuilt, step.after);
        }
        assert_eq!(g.io_successors(&t).len(), 4);
    }

    #[test]
    fn enumerates_g_double_prime() {
        let g = Cftg::parse(G_DOUBLE_PRIME).unwrap();
        let en = g.enumerate_io(Bounds::steps(8)).unwrap();
        let got = strings(&en.terms);
        assert_eq!(got[0], "ε");
        assert_eq!(got[1], "a(b(ε))");
        assert_eq!(got[2], "a(a(b(b(ε))))");
        assert!(en.exhausted);
    }

    #[test]
    fn enumerates_anbncn_to_three_steps() {
        let g = Cftg::parse(ANBNCN).unwrap();
        let en = g.enumerate_io(Bounds::steps(3)).unwrap();
        let got = strings(&en.terms);
        assert!(got.contains(&"cat(cat(a,b),c)".to_string()));
        assert!(got.contains(&"cat(cat(cat(a,a),cat(b,b)),cat(c,c))".to_string()));
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn nonterminating_grammar_is_empty_and_exhausted() {
        let g =
            Cftg::parse("terminals: f/1 a/0\nnonterminals: S/0\nstart: S\nS -> f(S)\n").unwrap();
        let en = g.enumerate_io(Bounds::steps(5)).unwrap();
        assert!(en.terms.is_empty());
        assert!(en.exhausted);
        // a self-loop is detected as a closed search space
        let g = Cftg::parse("terminals: a/0\nnonterminals: S/0\nstart: S\nS -> S\n").unwrap();
        let en = g.enumerate_io(Bounds::steps(5)).unwrap();
        assert!(en.terms.is_empty());
        assert!(!en.exhausted);
    }

    #[test]
    fn regular_enumeration_examples() {
        let g = Cftg::parse(G_MONADIC).unwrap();
        let en = g.enumerate_regular(Bounds::new(100, 3)).unwrap();
        // hand enumeration of monadic trees with at most two letters
        let mut expected = vec!["ε".to_string()];
        for x in ["a", "b"] {
            expected.push(format!("{x}(ε)"));
        }
        for x in ["a", "b"] {
            for y in ["a", "b"] {
                expected.push(format!("{x}({y}(ε))"));
            }
        }
        let got: BTreeSet<String> = strings(&en.terms).into_iter().collect();
        assert_eq!(got, expected.into_iter().collect());

        let g = Cftg::parse(G_PRIME).unwrap();
        let en = g.enumerate_regular(Bounds::steps(2)).unwrap();
        assert_eq!(strings(&en.terms), vec!["ε", "cat(a,cat(ε,b))"]);

        assert!(matches!(
            Cftg::parse(ANBNCN)
                .unwrap()
                .enumerate_regular(Bounds::steps(2)),
            Err(GrammarError::NotRegular(_))
        ));
    }

    #[test]
    fn regular_and_io_agree_on_regular_grammars() {
        for text in [G_MONADIC, G_PRIME] {
            let g = Cftg::parse(text).unwrap();
            for steps in 0..6 {
                for nodes in [3, 7, 60] {
                    let b = Bounds::new(steps, nodes);
                    assert_eq!(
                        g.enumerate_io(b).unwrap().terms,
                        g.enumerate_regular(b).unwrap().terms
                    );
                }
            }
        }
    }

    #[test]
    fn enumeration_is_monotone() {
        let g = Cftg::parse(ANBNCN).unwrap();
        let mut prev: BTreeSet<Term> = BTreeSet::new();
        for steps in 0..6 {
            let cur: BTreeSet<Term> = g
                .enumerate_io(Bounds::steps(steps))
                .unwrap()
                .terms
                .into_iter()
                .collect();
            assert!(prev.is_subset(&cur));
            prev = cur;
        }
    }

    #[test]
    fn yield_languages() {
        let g = Cftg::parse(ANBNCN).unwrap();
        let (words, _) = g
            .yield_language(Bounds::steps(4), &BTreeSet::new())
            .unwrap();
        let got: Vec<String> = words.iter().map(Word::to_string).collect();
        assert_eq!(got, vec!["abc", "aabbcc", "aaabbbccc"]);

        let g = Cftg::parse(G_PRIME).unwrap();
        let eps = BTreeSet::from(["ε".to_string()]);
        let (words, _) = g.yield_language(Bounds::steps(3), &eps).unwrap();
        let got: Vec<String> = words.iter().map(Word::to_string).collect();
        assert_eq!(got, vec!["", "ab", "aabb"]);
    }

    #[test]
    fn copying_grammar_copies_values() {
        let g = Cftg::parse(include_str!("../grammars/copying.grammar")).unwrap();
        let en = g.enumerate_io(Bounds::steps(6)).unwrap();
        assert!(!en.terms.is_empty());
        for t in &en.terms {
            assert_eq!(t.symbol(), Some("cat"));
            assert_eq!(t.children[0], t.children[1]);
        }
    }

    #[test]
    fn traces() {
        let g = Cftg::parse(ANBNCN).unwrap();
        let target = g.parse_term("cat(cat(a,b),c)", 0).unwrap();
        let steps = g.derivation_trace(&target, Bounds::steps(6)).unwrap();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].production, 0);
        assert_eq!(steps[1].production, 2);
        assert_eq!(steps[1].after, target);

        let loop_g = Cftg::parse("terminals: a/0\nnonterminals: S/0\nstart: S\nS -> S\n").unwrap();
        let target = loop_g.parse_term("a", 0).unwrap();
        assert_eq!(
            loop_g.derivation_trace(&target, Bounds::steps(4)),
            Err(GrammarError::NotFound)
        );
        let start = loop_g.start_term();
        assert_eq!(
            loop_g.derivation_trace(&start, Bounds::steps(4)),
            Err(GrammarError::NotFound)
        );

        let n2 = g
            .parse_term("cat(cat(cat(a,a),cat(b,b)),cat(c,c))", 0)
            .unwrap();
        let steps = g.derivation_trace(&n2, Bounds::steps(6)).unwrap();
        assert_eq!(steps.len(), 3);
    }
}
