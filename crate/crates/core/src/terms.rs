//! Ranked trees with variables, substitution, yields, tree domains and
//! relational structures (word and tree models).
//!
//! Addresses are stored 0-based and printed 1-based: the root is `ε`, its
//! second child `2`, that child's first child `2.1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::alphabets::{is_variable_name, RankedAlphabet};
use crate::syntax::{self, Pos, RawTree, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("UnknownSymbol at {pos}: `{name}` is not in the alphabet")]
    UnknownSymbol { name: String, pos: Pos },
    #[error(
        "RankMismatch at {pos}: `{name}` has rank {expected} but is applied to {found} arguments"
    )]
    RankMismatch {
        name: String,
        expected: usize,
        found: usize,
        pos: Pos,
    },
    #[error("VariableOutOfRange: x{index} used where only x1..x{max} are available")]
    VariableOutOfRange { index: usize, max: usize },
    #[error("ArityMismatch: term uses x{needed} but {given} arguments were supplied")]
    ArityMismatch { needed: usize, given: usize },
    #[error("NonTerminalLeaf: `{0}` is not a terminal symbol")]
    NonTerminalLeaf(String),
    #[error("UnknownLetter: `{0}` is not in the alphabet")]
    UnknownLetter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Symbol(Arc<str>),
    /// `x_i`, 1-based.
    Var(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Symbol(s) => f.write_str(s),
            Label::Var(i) => write!(f, "x{i}"),
        }
    }
}

/// A finite ordered ranked tree. Rank consistency is checked when terms are
/// parsed or validated against an alphabet, not on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub label: Label,
    pub children: Vec<Term>,
}

impl Term {
    pub fn new(name: impl AsRef<str>, children: Vec<Term>) -> Self {
        Term {
            label: Label::Symbol(Arc::from(name.as_ref())),
            children,
        }
    }

    pub fn with_symbol(name: Arc<str>, children: Vec<Term>) -> Self {
        Term {
            label: Label::Symbol(name),
            children,
        }
    }

    pub fn constant(name: impl AsRef<str>) -> Self {
        Term::new(name, Vec::new())
    }

    pub fn var(index: usize) -> Self {
        assert!(index >= 1, "variables are 1-based");
        Term {
            label: Label::Var(index),
            children: Vec::new(),
        }
    }

    /// `name(x1,...,xn)`.
    pub fn generic(name: Arc<str>, rank: usize) -> Self {
        Term::with_symbol(name, (1..=rank).map(Term::var).collect())
    }

    pub fn symbol(&self) -> Option<&str> {
        match &self.label {
            Label::Symbol(s) => Some(s),
            Label::Var(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self.label, Label::Var(_))
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Term::depth).max().unwrap_or(0)
    }

    /// Largest variable index, 0 when the term is closed.
    pub fn max_var(&self) -> usize {
        match self.label {
            Label::Var(i) => i,
            Label::Symbol(_) => self.children.iter().map(Term::max_var).max().unwrap_or(0),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.max_var() == 0
    }

    /// Largest number of children of any node.
    pub fn max_arity(&self) -> usize {
        self.children
            .iter()
            .map(Term::max_arity)
            .max()
            .unwrap_or(0)
            .max(self.children.len())
    }

    /// True iff every label is a symbol satisfying `pred`.
    pub fn all_symbols(&self, pred: &impl Fn(&str) -> bool) -> bool {
        match &self.label {
            Label::Var(_) => false,
            Label::Symbol(s) => pred(s) && self.children.iter().all(|c| c.all_symbols(pred)),
        }
    }

    /// True iff the term contains no variables and only terminals of `alphabet`.
    pub fn is_terminal_in(&self, alphabet: &RankedAlphabet) -> bool {
        self.all_symbols(&|s| alphabet.is_terminal(s))
    }

    /// Checks well-rankedness against `alphabet` and that variables are
    /// within `x1..x{max_var}`.
    pub fn check(&self, alphabet: &RankedAlphabet, max_var: usize) -> Result<(), TermError> {
        match &self.label {
            Label::Var(i) => {
                if *i > max_var {
                    return Err(TermError::VariableOutOfRange {
                        index: *i,
                        max: max_var,
                    });
                }
                if !self.children.is_empty() {
                    return Err(TermError::RankMismatch {
                        name: format!("x{i}"),
                        expected: 0,
                        found: self.children.len(),
                        pos: Pos::default(),
                    });
                }
                Ok(())
            }
            Label::Symbol(s) => {
                let rank = alphabet.rank(s).ok_or_else(|| TermError::UnknownSymbol {
                    name: s.to_string(),
                    pos: Pos::default(),
                })?;
                if rank != self.children.len() {
                    return Err(TermError::RankMismatch {
                        name: s.to_string(),
                        expected: rank,
                        found: self.children.len(),
                        pos: Pos::default(),
                    });
                }
                self.children
                    .iter()
                    .try_for_each(|c| c.check(alphabet, max_var))
            }
        }
    }

    /// Resolves a raw tree; `max_var = None` admits any variable index.
    pub fn from_raw(
        raw: &RawTree,
        alphabet: &RankedAlphabet,
        max_var: Option<usize>,
    ) -> Result<Term, TermError> {
        if is_variable_name(&raw.name) {
            let index: usize = raw.name[1..]
                .parse()
                .map_err(|_| SyntaxError::new(raw.pos, "variable index too large"))?;
            if index == 0 {
                return Err(SyntaxError::new(raw.pos, "variables are numbered from x1").into());
            }
            if let Some(max) = max_var {
                if index > max {
                    return Err(TermError::VariableOutOfRange { index, max });
                }
            }
            if !raw.children.is_empty() {
                return Err(TermError::RankMismatch {
                    name: raw.name.clone(),
                    expected: 0,
                    found: raw.children.len(),
                    pos: raw.pos,
                });
            }
            return Ok(Term::var(index));
        }
        let (sym, _) = alphabet
            .get(&raw.name)
            .ok_or_else(|| TermError::UnknownSymbol {
                name: raw.name.clone(),
                pos: raw.pos,
            })?;
        if sym.rank != raw.children.len() {
            return Err(TermError::RankMismatch {
                name: raw.name.clone(),
                expected: sym.rank,
                found: raw.children.len(),
                pos: raw.pos,
            });
        }
        let children = raw
            .children
            .iter()
            .map(|c| Term::from_raw(c, alphabet, max_var))
            .collect::<Result<_, _>>()?;
        Ok(Term::with_symbol(sym.name.clone(), children))
    }

    /// `t[t1,...,tm]`: replaces every `x_i` by `args[i-1]`.
    pub fn substitute(&self, args: &[Term]) -> Result<Term, TermError> {
        let needed = self.max_var();
        if needed > args.len() {
            return Err(TermError::ArityMismatch {
                needed,
                given: args.len(),
            });
        }
        Ok(self.instantiate(args))
    }

    /// Substitution without the arity check; callers guarantee every
    /// variable index is within `args`.
    pub(crate) fn instantiate(&self, args: &[Term]) -> Term {
        match &self.label {
            Label::Var(i) => args[*i - 1].clone(),
            Label::Symbol(s) => Term::with_symbol(
                s.clone(),
                self.children.iter().map(|c| c.instantiate(args)).collect(),
            ),
        }
    }

    /// The yield as a word of leaf letters.
    ///
    /// Constants contribute their own name unless listed in `empty`. Unary
    /// symbols are read as left concatenation with their own name, so a
    /// monadic tree `a(b(ε))` yields `ab`. Symbols of rank two or more
    /// concatenate the yields of their children and contribute nothing
    /// themselves.
    pub fn yield_word(&self, empty: &BTreeSet<String>) -> Result<Word, TermError> {
        let mut out = Vec::new();
        self.collect_yield(&|s: &str| empty.contains(s), &mut out)?;
        Ok(Word(out))
    }

    fn collect_yield(
        &self,
        is_empty: &impl Fn(&str) -> bool,
        out: &mut Vec<Arc<str>>,
    ) -> Result<(), TermError> {
        let Label::Symbol(s) = &self.label else {
            return Err(TermError::NonTerminalLeaf(self.label.to_string()));
        };
        match self.children.len() {
            0 => {
                if !is_empty(s) {
                    out.push(s.clone());
                }
            }
            1 => {
                out.push(s.clone());
                self.children[0].collect_yield(is_empty, out)?;
            }
            _ => {
                for c in &self.children {
                    c.collect_yield(is_empty, out)?;
                }
            }
        }
        Ok(())
    }

    /// The tree domain `dom(t)`.
    pub fn addresses(&self) -> BTreeSet<Address> {
        let mut out = BTreeSet::new();
        let mut path = Vec::new();
        self.collect_addresses(&mut path, &mut out);
        out
    }

    fn collect_addresses(&self, path: &mut Vec<usize>, out: &mut BTreeSet<Address>) {
        out.insert(Address(path.clone()));
        for (i, c) in self.children.iter().enumerate() {
            path.push(i);
            c.collect_addresses(path, out);
            path.pop();
        }
    }

    /// Nodes in preorder, paired with their addresses.
    pub fn preorder(&self) -> Vec<(Address, &Term)> {
        let mut out = Vec::new();
        let mut stack = vec![(Address::root(), self)];
        while let Some((addr, t)) = stack.pop() {
            for (i, c) in t.children.iter().enumerate().rev() {
                stack.push((addr.child(i), c));
            }
            out.push((addr, t));
        }
        out
    }

    pub fn subterm(&self, addr: &Address) -> Option<&Term> {
        addr.0.iter().try_fold(self, |t, &i| t.children.get(i))
    }

    /// Copy of `self` with the subtree at `addr` replaced by `by`.
    pub fn replace_at(&self, addr: &Address, by: Term) -> Term {
        fn go(t: &Term, path: &[usize], by: Term) -> Term {
            match path.split_first() {
                None => by,
                Some((&i, rest)) => {
                    let mut children = t.children.clone();
                    children[i] = go(&t.children[i], rest, by);
                    Term {
                        label: t.label.clone(),
                        children,
                    }
                }
            }
        }
        go(self, &addr.0, by)
    }

    /// Indented multi-line rendering, one node per line.
    pub fn pretty(&self) -> String {
        fn go(t: &Term, indent: usize, out: &mut String) {
            for _ in 0..indent {
                out.push_str("  ");
            }
            out.push_str(&t.label.to_string());
            out.push('\n');
            for c in &t.children {
                go(c, indent + 1, out);
            }
        }
        let mut out = String::new();
        go(self, 0, &mut out);
        out
    }
}

impl fmt::Display for Term {
    /// Canonical form: no whitespace, `name(arg,...)`, constants bare.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Parses `text` as a term over `alphabet` with variables `x1..xk`.
pub fn parse_term(text: &str, alphabet: &RankedAlphabet, k: usize) -> Result<Term, TermError> {
    let raw = syntax::parse_raw(text, Pos::start())?;
    Term::from_raw(&raw, alphabet, Some(k))
}

/// Parses a term without a declared alphabet. Every symbol is taken as a
/// terminal with the rank of its first use; later uses must agree.
pub fn parse_term_inferred(text: &str) -> Result<(Term, RankedAlphabet), TermError> {
    fn collect(raw: &RawTree, ranks: &mut Vec<(String, usize)>) -> Result<(), TermError> {
        if !is_variable_name(&raw.name) {
            match ranks.iter().find(|(n, _)| *n == raw.name) {
                Some(&(_, r)) if r != raw.children.len() => {
                    return Err(TermError::RankMismatch {
                        name: raw.name.clone(),
                        expected: r,
                        found: raw.children.len(),
                        pos: raw.pos,
                    })
                }
                Some(_) => {}
                None => ranks.push((raw.name.clone(), raw.children.len())),
            }
        }
        raw.children.iter().try_for_each(|c| collect(c, ranks))
    }
    let raw = syntax::parse_raw(text, Pos::start())?;
    let mut ranks = Vec::new();
    collect(&raw, &mut ranks)?;
    let alphabet =
        RankedAlphabet::terminals(ranks).map_err(|e| SyntaxError::new(raw.pos, e.to_string()))?;
    let t = Term::from_raw(&raw, &alphabet, None)?;
    Ok((t, alphabet))
}

/// Sorts terms by size, then by canonical text, and removes duplicates.
pub fn canonical_order(terms: impl IntoIterator<Item = Term>) -> Vec<Term> {
    let mut keyed: Vec<(usize, String, Term)> = terms
        .into_iter()
        .map(|t| (t.size(), t.to_string(), t))
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    keyed.dedup_by(|a, b| a.1 == b.1);
    keyed.into_iter().map(|(_, _, t)| t).collect()
}

/// A node address, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub Vec<usize>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    /// Builds an address from 1-based child indices.
    pub fn from_one_based(path: &[usize]) -> Self {
        Address(path.iter().map(|i| i - 1).collect())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        Address(p)
    }

    pub fn parent(&self) -> Option<Address> {
        let (_, init) = self.0.split_last()?;
        Some(Address(init.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", c + 1)?;
        }
        Ok(())
    }
}

/// True iff `domain` is nonempty, prefix-closed, closed under left
/// siblings and uses branch indices below `max_branch`.
pub fn validate_tree_domain(domain: &BTreeSet<Address>, max_branch: usize) -> bool {
    if !domain.contains(&Address::root()) {
        return false;
    }
    domain.iter().all(|addr| {
        let Some((&last, init)) = addr.0.split_last() else {
            return true;
        };
        if last >= max_branch {
            return false;
        }
        let parent = Address(init.to_vec());
        domain.contains(&parent) && (last == 0 || domain.contains(&parent.child(last - 1)))
    })
}

/// A word over an alphabet of (possibly multi-character) letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Arc<str>>);

impl Word {
    /// Whitespace-separated letters, or one letter per character when the
    /// text has no whitespace.
    pub fn parse(text: &str) -> Word {
        let text = text.trim();
        if text.chars().any(char::is_whitespace) {
            Word(text.split_whitespace().map(Arc::from).collect())
        } else {
            Word(
                text.chars()
                    .map(|c| Arc::from(c.to_string().as_str()))
                    .collect(),
            )
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for Word {
    /// Shorter words first, then letter by letter.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    /// Letters are juxtaposed when all are single characters and
    /// space-separated otherwise. The empty word prints as nothing.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.0.iter().all(|l| l.chars().count() == 1) {
            ""
        } else {
            " "
        };
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            f.write_str(l)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("StructureError: element {0} is not in the domain")]
    UnknownElement(usize),
    #[error("StructureError at line {line}: {message}")]
    Format { line: usize, message: String },
}

/// A finite relational structure with binary relations and unary
/// predicates, keyed by name.
///
/// Word models use `<`; tree models use `<_1`, `<_2`, ... Elements of word
/// models are positions `1..=n`; elements of tree models are preorder
/// indices `0..n` and [`Structure::addresses`] maps them back to nodes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Structure {
    pub domain: BTreeSet<usize>,
    pub binary: BTreeMap<String, BTreeSet<(usize, usize)>>,
    pub unary: BTreeMap<String, BTreeSet<usize>>,
    pub addresses: Option<Vec<Address>>,
}

impl Structure {
    pub fn new(
        domain: BTreeSet<usize>,
        binary: BTreeMap<String, BTreeSet<(usize, usize)>>,
        unary: BTreeMap<String, BTreeSet<usize>>,
    ) -> Result<Self, StructureError> {
        let s = Structure {
            domain,
            binary,
            unary,
            addresses: None,
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<(), StructureError> {
        let pairs = self.binary.values().flatten().flat_map(|&(a, b)| [a, b]);
        let singles = self.unary.values().flatten().copied();
        match pairs.chain(singles).find(|e| !self.domain.contains(e)) {
            Some(e) => Err(StructureError::UnknownElement(e)),
            None => Ok(()),
        }
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<(usize, usize)>> {
        self.binary.get(name)
    }

    pub fn predicate(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.unary.get(name)
    }

    /// Line-based text dump, parseable by [`Structure::parse`].
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("domain");
        for e in &self.domain {
            out.push_str(&format!(" {e}"));
        }
        out.push('\n');
        if let Some(addrs) = &self.addresses {
            for (i, a) in addrs.iter().enumerate() {
                out.push_str(&format!("# {i} = {a}\n"));
            }
        }
        for (name, pairs) in &self.binary {
            out.push_str(&format!("rel {name}"));
            for (a, b) in pairs {
                out.push_str(&format!(" {a},{b}"));
            }
            out.push('\n');
        }
        for (name, elems) in &self.unary {
            out.push_str(&format!("pred {name}"));
            for e in elems {
                out.push_str(&format!(" {e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Structure, StructureError> {
        let mut domain = None;
        let mut binary = BTreeMap::new();
        let mut unary = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |message: String| StructureError::Format {
                line: line_no,
                message,
            };
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap_or("");
            let num = |w: &str| {
                w.parse::<usize>()
                    .map_err(|_| err(format!("`{w}` is not an element id")))
            };
            match keyword {
                "domain" => {
                    let elems = words.map(num).collect::<Result<BTreeSet<_>, _>>()?;
                    domain = Some(elems);
                }
                "rel" => {
                    let name = words
                        .next()
                        .ok_or_else(|| err("relation name missing".into()))?;
                    let mut pairs = BTreeSet::new();
                    for w in words {
                        let (a, b) = w
                            .split_once(',')
                            .ok_or_else(|| err(format!("`{w}` is not a pair a,b")))?;
                        pairs.insert((num(a)?, num(b)?));
                    }
                    binary.insert(name.to_string(), pairs);
                }
                "pred" => {
                    let name = words
                        .next()
                        .ok_or_else(|| err("predicate name missing".into()))?;
                    let elems = words.map(num).collect::<Result<BTreeSet<_>, _>>()?;
                    unary.insert(name.to_string(), elems);
                }
                other => return Err(err(format!("unknown line kind `{other}`"))),
            }
        }
        let domain = domain.ok_or(StructureError::Format {
            line: 0,
            message: "missing `domain` line".into(),
        })?;
        Structure::new(domain, binary, unary)
    }
}

/// Name of the `i`-th successor relation (1-based) in tree models.
pub fn successor_name(i: usize) -> String {
    format!("<_{i}")
}

/// Labeled tree model of a closed term. Successor relations `<_1..<_n` are
/// present for `n` the largest arity in the term.
pub fn term_to_structure(t: &Term) -> Result<Structure, TermError> {
    tree_model(t, t.max_arity(), std::iter::empty::<&str>())
}

/// Labeled tree model over a declared alphabet: every successor relation up
/// to the alphabet's maximal terminal rank and every terminal predicate is
/// present, empty or not.
pub fn term_to_structure_over(t: &Term, alphabet: &RankedAlphabet) -> Result<Structure, TermError> {
    if !t.is_terminal_in(alphabet) {
        let bad = t
            .preorder()
            .into_iter()
            .find(|(_, n)| !n.symbol().is_some_and(|s| alphabet.is_terminal(s)))
            .map(|(_, n)| n.label.to_string())
            .unwrap_or_default();
        return Err(TermError::NonTerminalLeaf(bad));
    }
    tree_model(
        t,
        alphabet.max_terminal_rank(),
        alphabet.terminal_symbols().map(|s| &*s.name),
    )
}

fn tree_model<'a>(
    t: &Term,
    max_rank: usize,
    labels: impl Iterator<Item = &'a str>,
) -> Result<Structure, TermError> {
    let nodes = t.preorder();
    let index: BTreeMap<&Address, usize> =
        nodes.iter().enumerate().map(|(i, (a, _))| (a, i)).collect();
    let mut binary: BTreeMap<String, BTreeSet<(usize, usize)>> = (1..=max_rank.max(t.max_arity()))
        .map(|i| (successor_name(i), BTreeSet::new()))
        .collect();
    let mut unary: BTreeMap<String, BTreeSet<usize>> =
        labels.map(|l| (l.to_string(), BTreeSet::new())).collect();
    for (id, (addr, node)) in nodes.iter().enumerate() {
        let Some(sym) = node.symbol() else {
            return Err(TermError::NonTerminalLeaf(node.label.to_string()));
        };
        unary.entry(sym.to_string()).or_default().insert(id);
        for i in 0..node.children.len() {
            let child = index[&addr.child(i)];
            binary
                .get_mut(&successor_name(i + 1))
                .expect("relation allocated up to max arity")
                .insert((id, child));
        }
    }
    Ok(Structure {
        domain: (0..nodes.len()).collect(),
        binary,
        unary,
        addresses: Some(nodes.into_iter().map(|(a, _)| a).collect()),
    })
}

/// Word model `(B, <, P_a)` with `B = {1..|u|}`. Every letter of the
/// alphabet gets a predicate, possibly empty.
pub fn string_to_structure<S: AsRef<str>>(
    word: &Word,
    alphabet: &[S],
) -> Result<Structure, TermError> {
    let mut unary: BTreeMap<String, BTreeSet<usize>> = alphabet
        .iter()
        .map(|a| (a.as_ref().to_string(), BTreeSet::new()))
        .collect();
    for (i, letter) in word.0.iter().enumerate() {
        unary
            .get_mut(&**letter)
            .ok_or_else(|| TermError::UnknownLetter(letter.to_string()))?
            .insert(i + 1);
    }
    let n = word.len();
    let order = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect();
    Ok(Structure {
        domain: (1..=n).collect(),
        binary: BTreeMap::from([("<".to_string(), order)]),
        unary,
        addresses: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabets::SymbolKind::*;

    fn anbncn() -> RankedAlphabet {
        RankedAlphabet::new([
            ("cat", 2, Terminal),
            ("a", 0, Terminal),
            ("b", 0, Terminal),
            ("c", 0, Terminal),
            ("S", 0, Nonterminal),
            ("F", 3, Nonterminal),
        ])
        .unwrap()
    }

    fn addrs(list: &[&[usize]]) -> BTreeSet<Address> {
        list.iter().map(|p| Address::from_one_based(p)).collect()
    }

    #[test]
    fn inferred_ranks() {
        let (t, sig) = parse_term_inferred("f(g(x2),a)").unwrap();
        assert_eq!(t.to_string(), "f(g(x2),a)");
        assert_eq!(sig.rank("g"), Some(1));
        assert!(matches!(
            parse_term_inferred("f(f(a),a)"),
            Err(TermError::RankMismatch { .. })
        ));
    }

    #[test]
    fn parse_and_print() {
        let sigma = anbncn();
        let t = parse_term("cat(cat(a,b),c)", &sigma, 0).unwrap();
        assert_eq!(
            t,
            Term::new(
                "cat",
                vec![
                    Term::new("cat", vec![Term::constant("a"), Term::constant("b")]),
                    Term::constant("c")
                ]
            )
        );
        assert_eq!(t.to_string(), "cat(cat(a,b),c)");
        assert_eq!(parse_term("x1", &sigma, 1).unwrap(), Term::var(1));
    }

    #[test]
    fn parse_errors() {
        let sigma = anbncn();
        assert!(matches!(
            parse_term("F(a,b)", &sigma, 0),
            Err(TermError::RankMismatch {
                expected: 3,
                found: 2,
                ..
            })
        ));
        assert!(matches!(
            parse_term("cat(a,q)", &sigma, 0),
            Err(TermError::UnknownSymbol {
                pos: Pos { line: 1, col: 7 },
                ..
            })
        ));
        assert!(matches!(
            parse_term("cat(x1,x3)", &sigma, 2),
            Err(TermError::VariableOutOfRange { index: 3, max: 2 })
        ));
        assert!(matches!(
            parse_term("x0", &sigma, 2),
            Err(TermError::Syntax(_))
        ));
    }

    #[test]
    fn substitution_examples() {
        let f = Term::new("f", vec![Term::var(1), Term::var(2)]);
        let ab = [Term::constant("a"), Term::constant("b")];
        assert_eq!(f.substitute(&ab).unwrap(), Term::new("f", ab.to_vec()));
        assert_eq!(
            Term::var(1).substitute(&[Term::var(1)]).unwrap(),
            Term::var(1)
        );
        let sigma = anbncn();
        let rhs = parse_term("cat(cat(x1,x2),x3)", &sigma, 3).unwrap();
        let abc = ["a", "b", "c"].map(Term::constant);
        assert_eq!(rhs.substitute(&abc).unwrap().to_string(), "cat(cat(a,b),c)");
        assert_eq!(
            rhs.substitute(&abc[..2]),
            Err(TermError::ArityMismatch {
                needed: 3,
                given: 2
            })
        );
    }

    #[test]
    fn yields() {
        let sigma = anbncn();
        let none: BTreeSet<String> = BTreeSet::new();
        let t = parse_term("cat(cat(a,b),c)", &sigma, 0).unwrap();
        assert_eq!(t.yield_word(&none).unwrap().to_string(), "abc");
        let eps: BTreeSet<String> = ["ε".to_string()].into();
        let mono = Term::new(
            "a",
            vec![Term::new(
                "a",
                vec![Term::new(
                    "b",
                    vec![Term::new("b", vec![Term::constant("ε")])],
                )],
            )],
        );
        assert_eq!(mono.yield_word(&eps).unwrap().to_string(), "aabb");
        assert_eq!(
            Term::constant("a").yield_word(&none).unwrap().to_string(),
            "a"
        );
        assert!(matches!(
            Term::new("f", vec![Term::var(1)]).yield_word(&none),
            Err(TermError::NonTerminalLeaf(_))
        ));
    }

    #[test]
    fn multi_character_letters_print_spaced() {
        let w = Word::parse("em_Hans es_huus");
        assert_eq!(w.len(), 2);
        assert_eq!(w.to_string(), "em_Hans es_huus");
        assert_eq!(Word::parse("aab").len(), 3);
        assert!(Word::parse("").is_empty());
    }

    #[test]
    fn address_examples() {
        let fab = Term::new("f", vec![Term::constant("a"), Term::constant("b")]);
        assert_eq!(fab.addresses(), addrs(&[&[], &[1], &[2]]));
        assert_eq!(Term::constant("a").addresses(), addrs(&[&[]]));
        assert_eq!(Address::from_one_based(&[1, 2]).to_string(), "1.2");
        assert_eq!(Address::root().to_string(), "ε");
    }

    #[test]
    fn addresses_of_fig2_tree_match_traversal() {
        // independent oracle: walk the term by hand
        let sigma = anbncn();
        let t = parse_term("cat(cat(a,b),c)", &sigma, 0).unwrap();
        let mut expected = BTreeSet::new();
        let mut stack = vec![(Vec::<usize>::new(), &t)];
        while let Some((path, node)) = stack.pop() {
            for (i, c) in node.children.iter().enumerate() {
                let mut p = path.clone();
                p.push(i + 1);
                stack.push((p, c));
            }
            expected.insert(Address::from_one_based(&path));
        }
        assert_eq!(t.addresses(), expected);
        assert_eq!(t.addresses(), addrs(&[&[], &[1], &[2], &[1, 1], &[1, 2]]));
    }

    #[test]
    fn tree_domain_conditions() {
        assert!(validate_tree_domain(&addrs(&[&[], &[1], &[2]]), 2));
        assert!(!validate_tree_domain(&addrs(&[&[], &[2]]), 2));
        assert!(!validate_tree_domain(&addrs(&[&[1]]), 2));
        assert!(!validate_tree_domain(&addrs(&[&[], &[1], &[2]]), 1));
        assert!(!validate_tree_domain(&BTreeSet::new(), 3));
    }

    #[test]
    fn subterm_and_replace() {
        let sigma = anbncn();
        let t = parse_term("cat(cat(a,b),c)", &sigma, 0).unwrap();
        let a12 = Address::from_one_based(&[1, 2]);
        assert_eq!(t.subterm(&a12), Some(&Term::constant("b")));
        assert_eq!(t.subterm(&Address::from_one_based(&[3])), None);
        let r = t.replace_at(&a12, Term::constant("c"));
        assert_eq!(r.to_string(), "cat(cat(a,c),c)");
    }

    #[test]
    fn tree_models() {
        let fab = Term::new("f", vec![Term::constant("a"), Term::constant("b")]);
        let m = term_to_structure(&fab).unwrap();
        assert_eq!(m.domain, (0..3).collect());
        assert_eq!(m.relation("<_1").unwrap(), &BTreeSet::from([(0, 1)]));
        assert_eq!(m.relation("<_2").unwrap(), &BTreeSet::from([(0, 2)]));
        assert_eq!(m.predicate("f").unwrap(), &BTreeSet::from([0]));
        assert_eq!(m.predicate("a").unwrap(), &BTreeSet::from([1]));
        assert_eq!(m.predicate("b").unwrap(), &BTreeSet::from([2]));

        let a = term_to_structure(&Term::constant("a")).unwrap();
        assert_eq!(a.size(), 1);
        assert!(a.binary.values().all(BTreeSet::is_empty));

        let sigma = anbncn();
        let t = parse_term("cat(cat(a,b),c)", &sigma, 0).unwrap();
        let m = term_to_structure_over(&t, &sigma).unwrap();
        assert_eq!(m.size(), 5);
        assert_eq!(m.predicate("cat").unwrap().len(), 2);
        assert!(m.predicate("c").is_some());
        assert!(
            term_to_structure_over(&parse_term("F(a,b,c)", &sigma, 0).unwrap(), &sigma).is_err()
        );
    }

    #[test]
    fn word_models() {
        let m = string_to_structure(&Word::parse("ab"), &["a", "b"]).unwrap();
        assert_eq!(m.domain, BTreeSet::from([1, 2]));
        assert_eq!(m.relation("<").unwrap(), &BTreeSet::from([(1, 2)]));
        assert_eq!(m.predicate("a").unwrap(), &BTreeSet::from([1]));
        assert_eq!(m.predicate("b").unwrap(), &BTreeSet::from([2]));

        let e = string_to_structure(&Word::parse(""), &["a"]).unwrap();
        assert!(e.domain.is_empty());
        assert!(e.relation("<").unwrap().is_empty());

        let m = string_to_structure(&Word::parse("aab"), &["a", "b"]).unwrap();
        assert_eq!(m.predicate("a").unwrap(), &BTreeSet::from([1, 2]));
        assert_eq!(m.predicate("b").unwrap(), &BTreeSet::from([3]));
        // oracle: pairs i<j over 1..=3
        let mut order = BTreeSet::new();
        for i in 1..=3 {
            for j in 1..=3 {
                if i < j {
                    order.insert((i, j));
                }
            }
        }
        assert_eq!(m.relation("<").unwrap(), &order);
        assert_eq!(order.len(), 3);

        assert_eq!(
            string_to_structure(&Word::parse("ac"), &["a", "b"]),
            Err(TermError::UnknownLetter("c".into()))
        );
    }

    #[test]
    fn structure_dump_round_trip() {
        let fab = Term::new("f", vec![Term::constant("a"), Term::constant("b")]);
        let m = term_to_structure(&fab).unwrap();
        let text = m.dump();
        let back = Structure::parse(&text).unwrap();
        assert_eq!(back.domain, m.domain);
        assert_eq!(back.binary, m.binary);
        assert_eq!(back.unary, m.unary);
        assert!(matches!(
            Structure::parse("domain 1 2\npred a 3\n"),
            Err(StructureError::UnknownElement(3))
        ));
        assert!(Structure::parse("pred a 1\n").is_err());
    }

    #[test]
    fn pretty_indents() {
        let fab = Term::new("f", vec![Term::constant("a"), Term::constant("b")]);
        assert_eq!(fab.pretty(), "f\n  a\n  b\n");
    }
}
