//! Monadic second-order logic over word and tree models: formulas, a
//! brute-force evaluator, bounded `Mod(φ)` enumeration, and tree
//! transductions defined by MSO interpretations.
//!
//! Formulas use a prefix syntax:
//!
//! ```text
//! (forall x (-> (P a x) (exists y (< x y))))
//! (exists X (and (in x X) (succ 2 x y)))
//! ```
//!
//! Lowercase variables range over elements, capitalised ones over sets of
//! elements. `(succ i x y)` is the same atom as `(<_i x y)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::alphabets::RankedAlphabet;
use crate::grammars::{Bounds, Cftg, GrammarError};
use crate::syntax::{Pos, SyntaxError};
use crate::terms::{
    canonical_order, string_to_structure, successor_name, term_to_structure_over, Address,
    Structure, Term, TermError, Word,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MsoError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("UnknownRelation: `{0}` is not in the vocabulary")]
    UnknownRelation(String),
    #[error("UnboundVariable: `{0}`")]
    UnboundVariable(String),
    #[error("AssignmentOutOfDomain: element {0}")]
    AssignmentOutOfDomain(usize),
    #[error("GuardExceeded: {0}")]
    GuardExceeded(String),
    #[error("BoundTooLarge: {candidates} candidate models exceed the limit of {limit}")]
    BoundTooLarge { candidates: u128, limit: u128 },
    #[error("DomainSentenceFails: the input does not satisfy the domain sentence")]
    DomainSentenceFails,
    #[error("EmptyDomain: the domain formula selects no element")]
    EmptyDomain,
    #[error("NotATreeDomain: {0}")]
    NotATreeDomain(String),
    #[error("LabelClash: element {element} has labels {labels:?}")]
    LabelClash { element: usize, labels: Vec<String> },
    #[error("RankMismatch: element {element} labelled `{label}` of rank {rank} has {children} successors")]
    RankMismatch {
        element: usize,
        label: String,
        rank: usize,
        children: usize,
    },
    #[error("NotRegular: {0}")]
    NotRegular(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(String, String),
    /// A binary relation such as `<` or `<_2`.
    Rel(String, String, String),
    /// `P_a(x)`.
    Pred(String, String),
    /// `x ∈ X`.
    In(String, String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

/// Set variables are the capitalised ones.
pub fn is_set_variable(name: &str) -> bool {
    name.chars().next().is_some_and(char::is_uppercase)
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(f))
    }

    pub fn rel(name: impl Into<String>, x: impl Into<String>, y: impl Into<String>) -> Formula {
        Formula::Rel(name.into(), x.into(), y.into())
    }

    pub fn pred(name: impl Into<String>, x: impl Into<String>) -> Formula {
        Formula::Pred(name.into(), x.into())
    }

    /// Free element and set variables.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut use_var = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(x, y) | Formula::Rel(_, x, y) | Formula::In(x, y) => {
                use_var(x, bound);
                use_var(y, bound);
            }
            Formula::Pred(_, x) => use_var(x, bound),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Deepest nesting of set quantifiers.
    pub fn set_quantifier_depth(&self) -> usize {
        match self {
            Formula::Not(f) => f.set_quantifier_depth(),
            Formula::And(fs) | Formula::Or(fs) => fs
                .iter()
                .map(Formula::set_quantifier_depth)
                .max()
                .unwrap_or(0),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.set_quantifier_depth().max(b.set_quantifier_depth())
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                f.set_quantifier_depth() + usize::from(is_set_variable(v))
            }
            _ => 0,
        }
    }

    fn mentions_sets(&self) -> bool {
        self.set_quantifier_depth() > 0 || self.free_variables().iter().any(|v| is_set_variable(v))
    }

    /// Checks relation and predicate names against `vocab`.
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<(), MsoError> {
        match self {
            Formula::Rel(r, _, _) if !vocab.binary.contains(r) => {
                Err(MsoError::UnknownRelation(r.clone()))
            }
            Formula::Pred(p, _) if !vocab.unary.contains(p) => {
                Err(MsoError::UnknownRelation(p.clone()))
            }
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => {
                f.check_vocabulary(vocab)
            }
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().try_for_each(|f| f.check_vocabulary(vocab))
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.check_vocabulary(vocab)?;
                b.check_vocabulary(vocab)
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, fs: &[Formula]| {
            write!(f, "({head}")?;
            for g in fs {
                write!(f, " {g}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Eq(x, y) => write!(f, "(= {x} {y})"),
            Formula::Rel(r, x, y) => write!(f, "({r} {x} {y})"),
            Formula::Pred(p, x) => write!(f, "(P {p} {x})"),
            Formula::In(x, s) => write!(f, "(in {x} {s})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(fs) => list(f, "and", fs),
            Formula::Or(fs) => list(f, "or", fs),
            Formula::Implies(a, b) => write!(f, "(-> {a} {b})"),
            Formula::Iff(a, b) => write!(f, "(<-> {a} {b})"),
            Formula::Exists(v, g) => write!(f, "(exists {v} {g})"),
            Formula::Forall(v, g) => write!(f, "(forall {v} {g})"),
        }
    }
}

/// Relation and predicate names a formula may use.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    pub binary: BTreeSet<String>,
    pub unary: BTreeSet<String>,
}

impl Vocabulary {
    /// `<` and one predicate per letter.
    pub fn words<S: AsRef<str>>(letters: &[S]) -> Self {
        Vocabulary {
            binary: BTreeSet::from(["<".to_string()]),
            unary: letters.iter().map(|l| l.as_ref().to_string()).collect(),
        }
    }

    /// `<_1 .. <_n` for `n` the largest terminal rank, and one predicate per
    /// terminal.
    pub fn trees(alphabet: &RankedAlphabet) -> Self {
        Vocabulary {
            binary: (1..=alphabet.max_terminal_rank())
                .map(successor_name)
                .collect(),
            unary: alphabet
                .terminal_symbols()
                .map(|s| s.name.to_string())
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Debug, Clone, PartialEq)]
enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }
}

fn tokenize(text: &str, origin: Pos) -> Vec<(String, Pos)> {
    let mut out = Vec::new();
    let mut pos = origin;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let start = pos;
        let mut bump = |c: char| {
            if c == '\n' {
                pos.line += 1;
                pos.col = 1;
            } else {
                pos.col += 1;
            }
        };
        if c == '#' || c == ';' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(c);
                chars.next();
            }
        } else if c.is_whitespace() {
            bump(c);
            chars.next();
        } else if c == '(' || c == ')' {
            bump(c);
            chars.next();
            out.push((c.to_string(), start));
        } else {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '(' || c == ')' || c == '#' || c == ';' {
                    break;
                }
                bump(c);
                word.push(c);
                chars.next();
            }
            out.push((word, start));
        }
    }
    out
}

fn read_sexpr(tokens: &[(String, Pos)], i: &mut usize, end: Pos) -> Result<SExpr, SyntaxError> {
    let Some((tok, pos)) = tokens.get(*i) else {
        return Err(SyntaxError::new(end, "unexpected end of formula"));
    };
    *i += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*i) {
                    None => return Err(SyntaxError::new(*pos, "unclosed `(`")),
                    Some((t, _)) if t == ")" => {
                        *i += 1;
                        return Ok(SExpr::List(items, *pos));
                    }
                    Some(_) => items.push(read_sexpr(tokens, i, end)?),
                }
            }
        }
        ")" => Err(SyntaxError::new(*pos, "unexpected `)`")),
        _ => Ok(SExpr::Atom(tok.clone(), *pos)),
    }
}

/// Parses one formula. With a vocabulary, unknown relation or predicate
/// names are rejected.
pub fn parse_formula(text: &str, vocab: Option<&Vocabulary>) -> Result<Formula, MsoError> {
    parse_formula_at(text, Pos::start(), vocab)
}

fn parse_formula_at(
    text: &str,
    origin: Pos,
    vocab: Option<&Vocabulary>,
) -> Result<Formula, MsoError> {
    let tokens = tokenize(text, origin);
    let end = crate::syntax::advance(origin, text, text.len());
    let mut i = 0;
    let sexpr = read_sexpr(&tokens, &mut i, end)?;
    if let Some((_, pos)) = tokens.get(i) {
        return Err(SyntaxError::new(*pos, "trailing input after formula").into());
    }
    let f = to_formula(&sexpr)?;
    if let Some(v) = vocab {
        f.check_vocabulary(v)?;
    }
    Ok(f)
}

fn to_formula(e: &SExpr) -> Result<Formula, SyntaxError> {
    let items = match e {
        SExpr::Atom(a, pos) => {
            return match a.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                _ => Err(SyntaxError::new(*pos, format!("`{a}` is not a formula"))),
            }
        }
        SExpr::List(items, _) => items,
    };
    let pos = e.pos();
    let Some(SExpr::Atom(head, _)) = items.first() else {
        return Err(SyntaxError::new(pos, "expected an operator after `(`"));
    };
    let args = &items[1..];
    let atom = |k: usize| -> Result<&str, SyntaxError> {
        match args.get(k) {
            Some(SExpr::Atom(a, _)) => Ok(a),
            Some(other) => Err(SyntaxError::new(other.pos(), "expected a name")),
            None => Err(SyntaxError::new(
                pos,
                format!("`{head}` is missing arguments"),
            )),
        }
    };
    let arity = |n: usize| -> Result<(), SyntaxError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(SyntaxError::new(
                pos,
                format!("`{head}` takes {n} arguments, got {}", args.len()),
            ))
        }
    };
    let element = |k: usize| -> Result<String, SyntaxError> {
        let v = atom(k)?;
        if is_set_variable(v) {
            return Err(SyntaxError::new(
                args[k].pos(),
                format!("`{v}` is a set variable"),
            ));
        }
        Ok(v.to_string())
    };
    let sub = |k: usize| to_formula(&args[k]);
    Ok(match head.as_str() {
        "=" => {
            arity(2)?;
            Formula::Eq(element(0)?, element(1)?)
        }
        "P" => {
            arity(2)?;
            Formula::Pred(atom(0)?.to_string(), element(1)?)
        }
        "succ" => {
            arity(3)?;
            let i: usize = atom(0)?.parse().ok().filter(|&i| i >= 1).ok_or_else(|| {
                SyntaxError::new(args[0].pos(), "successor index must be 1, 2, ...")
            })?;
            Formula::Rel(successor_name(i), element(1)?, element(2)?)
        }
        "in" => {
            arity(2)?;
            let set = atom(1)?;
            if !is_set_variable(set) {
                return Err(SyntaxError::new(
                    args[1].pos(),
                    format!("`{set}` is not a set variable"),
                ));
            }
            Formula::In(element(0)?, set.to_string())
        }
        "not" => {
            arity(1)?;
            Formula::not(sub(0)?)
        }
        "and" | "or" => {
            let fs = (0..args.len()).map(sub).collect::<Result<Vec<_>, _>>()?;
            if head == "and" {
                Formula::And(fs)
            } else {
                Formula::Or(fs)
            }
        }
        "->" => {
            arity(2)?;
            Formula::implies(sub(0)?, sub(1)?)
        }
        "<->" => {
            arity(2)?;
            Formula::iff(sub(0)?, sub(1)?)
        }
        "exists" | "forall" => {
            arity(2)?;
            let v = atom(0)?.to_string();
            let body = sub(1)?;
            if head == "exists" {
                Formula::exists(v, body)
            } else {
                Formula::forall(v, body)
            }
        }
        r if r.starts_with('<') => {
            arity(2)?;
            Formula::Rel(r.to_string(), element(0)?, element(1)?)
        }
        other => return Err(SyntaxError::new(pos, format!("unknown operator `{other}`"))),
    })
}

// ---------------------------------------------------------------------------
// evaluation

/// Values of free variables: element ids and sets of element ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    pub elements: BTreeMap<String, usize>,
    pub sets: BTreeMap<String, BTreeSet<usize>>,
}

/// Limits on brute-force set quantification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Largest domain over which set variables are allowed (at most 63).
    pub max_set_domain: usize,
    pub max_set_nesting: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_set_domain: 14,
            max_set_nesting: 3,
        }
    }
}

struct Model<'s> {
    ids: Vec<usize>,
    binary: HashMap<&'s str, Vec<bool>>,
    unary: HashMap<&'s str, Vec<bool>>,
}

impl<'s> Model<'s> {
    fn new(m: &'s Structure) -> Self {
        let ids: Vec<usize> = m.domain.iter().copied().collect();
        let index: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let n = ids.len();
        let binary = m
            .binary
            .iter()
            .map(|(name, pairs)| {
                let mut mat = vec![false; n * n];
                for (a, b) in pairs {
                    mat[index[a] * n + index[b]] = true;
                }
                (name.as_str(), mat)
            })
            .collect();
        let unary = m
            .unary
            .iter()
            .map(|(name, elems)| {
                let mut v = vec![false; n];
                for e in elems {
                    v[index[e]] = true;
                }
                (name.as_str(), v)
            })
            .collect();
        Model { ids, binary, unary }
    }

    fn len(&self) -> usize {
        self.ids.len()
    }
}

#[derive(Default)]
struct Env<'f> {
    elements: Vec<(&'f str, usize)>,
    sets: Vec<(&'f str, u64)>,
}

impl<'f> Env<'f> {
    fn element(&self, v: &str) -> Result<usize, MsoError> {
        self.elements
            .iter()
            .rev()
            .find(|(n, _)| *n == v)
            .map(|&(_, e)| e)
            .ok_or_else(|| MsoError::UnboundVariable(v.to_string()))
    }

    fn set(&self, v: &str) -> Result<u64, MsoError> {
        self.sets
            .iter()
            .rev()
            .find(|(n, _)| *n == v)
            .map(|&(_, s)| s)
            .ok_or_else(|| MsoError::UnboundVariable(v.to_string()))
    }
}

/// `M ⊨ φ[g]` with the default guards.
pub fn eval(m: &Structure, f: &Formula, g: &Assignment) -> Result<bool, MsoError> {
    eval_with(m, f, g, EvalOptions::default())
}

/// `M ⊨ φ` for a closed formula.
pub fn holds(m: &Structure, f: &Formula) -> Result<bool, MsoError> {
    eval(m, f, &Assignment::default())
}

pub fn eval_with(
    m: &Structure,
    f: &Formula,
    g: &Assignment,
    opts: EvalOptions,
) -> Result<bool, MsoError> {
    let model = Model::new(m);
    if f.mentions_sets() || !g.sets.is_empty() {
        let limit = opts.max_set_domain.min(63);
        if model.len() > limit {
            return Err(MsoError::GuardExceeded(format!(
                "set quantification over {} elements (limit {limit})",
                model.len()
            )));
        }
        let depth = f.set_quantifier_depth();
        if depth > opts.max_set_nesting {
            return Err(MsoError::GuardExceeded(format!(
                "{depth} nested set quantifiers (limit {})",
                opts.max_set_nesting
            )));
        }
    }
    let index: HashMap<usize, usize> = model.ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut env = Env::default();
    for (v, e) in &g.elements {
        let i = *index.get(e).ok_or(MsoError::AssignmentOutOfDomain(*e))?;
        env.elements.push((v, i));
    }
    for (v, set) in &g.sets {
        let mut mask = 0u64;
        for e in set {
            mask |= 1 << *index.get(e).ok_or(MsoError::AssignmentOutOfDomain(*e))?;
        }
        env.sets.push((v, mask));
    }
    sat(&model, f, &mut env)
}

fn sat<'f>(m: &Model<'_>, f: &'f Formula, env: &mut Env<'f>) -> Result<bool, MsoError> {
    let n = m.len();
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(x, y) => env.element(x)? == env.element(y)?,
        Formula::Rel(r, x, y) => {
            let (a, b) = (env.element(x)?, env.element(y)?);
            m.binary.get(r.as_str()).is_some_and(|mat| mat[a * n + b])
        }
        Formula::Pred(p, x) => {
            let a = env.element(x)?;
            m.unary.get(p.as_str()).is_some_and(|v| v[a])
        }
        Formula::In(x, s) => {
            let a = env.element(x)?;
            env.set(s)? >> a & 1 == 1
        }
        Formula::Not(g) => !sat(m, g, env)?,
        Formula::And(fs) => {
            for g in fs {
                if !sat(m, g, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if sat(m, g, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(a, b) => !sat(m, a, env)? || sat(m, b, env)?,
        Formula::Iff(a, b) => sat(m, a, env)? == sat(m, b, env)?,
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let want = matches!(f, Formula::Exists(..));
            let mut result = !want;
            if is_set_variable(v) {
                for mask in 0..(1u64 << n) {
                    env.sets.push((v, mask));
                    let r = sat(m, g, env);
                    env.sets.pop();
                    if r? == want {
                        result = want;
                        break;
                    }
                }
            } else {
                for e in 0..n {
                    env.elements.push((v, e));
                    let r = sat(m, g, env);
                    env.elements.pop();
                    if r? == want {
                        result = want;
                        break;
                    }
                }
            }
            result
        }
    })
}

// ---------------------------------------------------------------------------
// Mod(φ)

/// Largest number of candidate structures [`models_of`] will examine.
pub const MAX_CANDIDATES: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    Words(Vec<String>),
    Trees(RankedAlphabet),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Models {
    Words(Vec<Word>),
    Trees(Vec<Term>),
}

impl Models {
    pub fn lines(&self) -> Vec<String> {
        match self {
            Models::Words(ws) => ws.iter().map(Word::to_string).collect(),
            Models::Trees(ts) => ts.iter().map(Term::to_string).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Models::Words(ws) => ws.len(),
            Models::Trees(ts) => ts.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All words (length ≤ `bound`) or terminal trees (≤ `bound` nodes) over
/// the alphabet whose model satisfies the closed formula `f`.
pub fn models_of(f: &Formula, kind: &ModelKind, bound: usize) -> Result<Models, MsoError> {
    Ok(match kind {
        ModelKind::Words(letters) => Models::Words(word_models(f, letters, bound)?),
        ModelKind::Trees(alphabet) => Models::Trees(tree_models(f, alphabet, bound)?),
    })
}

fn closed(f: &Formula) -> Result<(), MsoError> {
    match f.free_variables().into_iter().next() {
        Some(v) => Err(MsoError::UnboundVariable(v)),
        None => Ok(()),
    }
}

pub fn word_models<S: AsRef<str>>(
    f: &Formula,
    letters: &[S],
    max_len: usize,
) -> Result<Vec<Word>, MsoError> {
    closed(f)?;
    f.check_vocabulary(&Vocabulary::words(letters))?;
    let k = letters.len() as u128;
    let candidates = (0..=max_len as u32)
        .map(|l| k.saturating_pow(l))
        .fold(0u128, u128::saturating_add);
    if candidates > MAX_CANDIDATES {
        return Err(MsoError::BoundTooLarge {
            candidates,
            limit: MAX_CANDIDATES,
        });
    }
    let letters: Vec<&str> = letters.iter().map(AsRef::as_ref).collect();
    let mut out = Vec::new();
    let mut layer = vec![Vec::<&str>::new()];
    for len in 0..=max_len {
        for w in &layer {
            let word = Word(w.iter().map(|s| (*s).into()).collect());
            if holds(&string_to_structure(&word, &letters)?, f)? {
                out.push(word);
            }
        }
        if len < max_len {
            layer = layer
                .iter()
                .flat_map(|w| {
                    letters.iter().map(move |l| {
                        let mut w = w.clone();
                        w.push(l);
                        w
                    })
                })
                .collect();
        }
    }
    out.sort();
    Ok(out)
}

/// Number of terminal trees with exactly `n` nodes, for `n` in `0..=max`.
pub fn count_trees(alphabet: &RankedAlphabet, max: usize) -> Vec<u128> {
    let ranks: Vec<usize> = alphabet.terminal_symbols().map(|s| s.rank).collect();
    let mut count = vec![0u128; max + 1];
    for n in 1..=max {
        let mut total = 0u128;
        for &r in &ranks {
            total = total.saturating_add(compositions(&count, n - 1, r));
        }
        count[n] = total;
    }
    count
}

// Number of r-tuples of trees whose sizes sum to `total`.
fn compositions(count: &[u128], total: usize, r: usize) -> u128 {
    if r == 0 {
        return u128::from(total == 0);
    }
    let mut sum = 0u128;
    for first in 1..=total {
        let rest = compositions(count, total - first, r - 1);
        sum = sum.saturating_add(count[first].saturating_mul(rest));
    }
    sum
}

/// All terminal trees over `alphabet` with exactly `n` nodes, indexed by
/// `n` up to `max`.
pub fn trees_by_size(alphabet: &RankedAlphabet, max: usize) -> Vec<Vec<Term>> {
    let symbols: Vec<_> = alphabet.terminal_symbols().cloned().collect();
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max + 1];
    for n in 1..=max {
        let mut here = Vec::new();
        for s in &symbols {
            for children in tuples(&by_size, n - 1, s.rank) {
                here.push(Term::with_symbol(s.name.clone(), children));
            }
        }
        by_size[n] = canonical_order(here);
    }
    by_size
}

fn tuples(by_size: &[Vec<Term>], total: usize, r: usize) -> Vec<Vec<Term>> {
    if r == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    for first in 1..=total {
        if by_size[first].is_empty() {
            continue;
        }
        let rests = tuples(by_size, total - first, r - 1);
        for t in &by_size[first] {
            for rest in &rests {
                let mut v = Vec::with_capacity(r);
                v.push(t.clone());
                v.extend(rest.iter().cloned());
                out.push(v);
            }
        }
    }
    out
}

pub fn tree_models(
    f: &Formula,
    alphabet: &RankedAlphabet,
    max_nodes: usize,
) -> Result<Vec<Term>, MsoError> {
    closed(f)?;
    f.check_vocabulary(&Vocabulary::trees(alphabet))?;
    let candidates = count_trees(alphabet, max_nodes)
        .into_iter()
        .fold(0u128, u128::saturating_add);
    if candidates > MAX_CANDIDATES {
        return Err(MsoError::BoundTooLarge {
            candidates,
            limit: MAX_CANDIDATES,
        });
    }
    let mut out = Vec::new();
    for t in trees_by_size(alphabet, max_nodes).into_iter().flatten() {
        if holds(&term_to_structure_over(&t, alphabet)?, f)? {
            out.push(t);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// interpretations

/// `I = (A, A_Ω(x), A_{<_i}(x,y), A_{P_a}(x))`. Domain and label formulas
/// have `x` free, successor formulas `x` and `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    pub source: RankedAlphabet,
    pub target: RankedAlphabet,
    pub domain_sentence: Formula,
    pub domain: Formula,
    /// `successors[i-1]` defines `<_i`.
    pub successors: Vec<Formula>,
    pub labels: BTreeMap<String, Formula>,
}

fn only_free(f: &Formula, allowed: &[&str]) -> Result<(), MsoError> {
    match f
        .free_variables()
        .into_iter()
        .find(|v| !allowed.contains(&v.as_str()))
    {
        Some(v) => Err(MsoError::UnboundVariable(v)),
        None => Ok(()),
    }
}

impl Interpretation {
    /// Checks free variables and vocabulary; missing successor and label
    /// formulas default to `false`.
    pub fn new(
        source: RankedAlphabet,
        target: RankedAlphabet,
        domain_sentence: Formula,
        domain: Formula,
        mut successors: Vec<Formula>,
        mut labels: BTreeMap<String, Formula>,
    ) -> Result<Self, MsoError> {
        let vocab = Vocabulary::trees(&source);
        let n = target.max_terminal_rank();
        if successors.len() > n {
            return Err(MsoError::UnknownRelation(successor_name(successors.len())));
        }
        successors.resize(n, Formula::False);
        for name in labels.keys() {
            if !target.is_terminal(name) {
                return Err(MsoError::UnknownRelation(name.clone()));
            }
        }
        for s in target.terminal_symbols() {
            labels.entry(s.name.to_string()).or_insert(Formula::False);
        }
        only_free(&domain_sentence, &[])?;
        only_free(&domain, &["x"])?;
        for f in &successors {
            only_free(f, &["x", "y"])?;
        }
        for f in labels.values() {
            only_free(f, &["x"])?;
        }
        for f in std::iter::once(&domain_sentence)
            .chain(std::iter::once(&domain))
            .chain(&successors)
            .chain(labels.values())
        {
            f.check_vocabulary(&vocab)?;
        }
        Ok(Interpretation {
            source,
            target,
            domain_sentence,
            domain,
            successors,
            labels,
        })
    }

    /// The interpretation that copies every tree over `alphabet`.
    pub fn identity(alphabet: &RankedAlphabet) -> Result<Self, MsoError> {
        let n = alphabet.max_terminal_rank();
        let successors = (1..=n)
            .map(|i| Formula::rel(successor_name(i), "x", "y"))
            .collect();
        let labels = alphabet
            .terminal_symbols()
            .map(|s| (s.name.to_string(), Formula::pred(s.name.to_string(), "x")))
            .collect();
        Self::new(
            alphabet.clone(),
            alphabet.clone(),
            Formula::True,
            Formula::True,
            successors,
            labels,
        )
    }

    /// Reads the sectioned file format:
    ///
    /// ```text
    /// source: f/2 a/0 b/0
    /// target: f/2 a/0 b/0
    /// domain-sentence: true
    /// domain: true
    /// succ 1: (<_1 x y)
    /// label b: (or (P a x) (P b x))
    /// ```
    ///
    /// A formula may continue over several lines until the next header.
    pub fn parse(text: &str) -> Result<Self, MsoError> {
        let mut source = None;
        let mut target = None;
        let mut sections: Vec<(String, Pos, String)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let pos = Pos {
                line: lineno + 1,
                col: 1,
            };
            let trimmed = line.trim_start();
            let header = trimmed
                .split_once(':')
                .filter(|(h, _)| !h.is_empty() && !h.contains('(') && !h.starts_with('#'));
            match header {
                Some((h, rest)) => {
                    let h = h.trim().to_string();
                    let col = line.len() - rest.len() + 1;
                    let body_pos = Pos {
                        line: lineno + 1,
                        col,
                    };
                    match h.as_str() {
                        "source" | "target" => {
                            let alphabet = parse_alphabet(rest, pos)?;
                            if h == "source" {
                                source = Some(alphabet);
                            } else {
                                target = Some(alphabet);
                            }
                        }
                        _ => sections.push((h, body_pos, rest.to_string())),
                    }
                }
                None => match sections.last_mut() {
                    Some((_, _, body)) => {
                        body.push('\n');
                        body.push_str(line);
                    }
                    None if trimmed.is_empty() || trimmed.starts_with('#') => {}
                    None => {
                        return Err(
                            SyntaxError::new(pos, "text before the first section header").into(),
                        )
                    }
                },
            }
        }
        let source =
            source.ok_or_else(|| SyntaxError::new(Pos::start(), "missing `source:` section"))?;
        let target = target.unwrap_or_else(|| source.clone());
        let mut domain_sentence = Formula::True;
        let mut domain = Formula::True;
        let mut successors: BTreeMap<usize, Formula> = BTreeMap::new();
        let mut labels = BTreeMap::new();
        for (h, pos, body) in sections {
            let f = parse_formula_at(&body, pos, None)?;
            let words: Vec<&str> = h.split_whitespace().collect();
            match words.as_slice() {
                ["domain-sentence"] => domain_sentence = f,
                ["domain"] => domain = f,
                ["succ", i] => {
                    let i: usize = i.parse().ok().filter(|&i| i >= 1).ok_or_else(|| {
                        SyntaxError::new(pos, format!("bad successor index `{i}`"))
                    })?;
                    successors.insert(i, f);
                }
                ["label", a] => {
                    labels.insert(a.to_string(), f);
                }
                _ => return Err(SyntaxError::new(pos, format!("unknown section `{h}`")).into()),
            }
        }
        let n = successors.keys().next_back().copied().unwrap_or(0);
        let successors = (1..=n)
            .map(|i| successors.remove(&i).unwrap_or(Formula::False))
            .collect();
        Self::new(source, target, domain_sentence, domain, successors, labels)
    }
}

fn parse_alphabet(text: &str, pos: Pos) -> Result<RankedAlphabet, MsoError> {
    let mut entries = Vec::new();
    for item in text.split_whitespace() {
        let (name, rank) = item
            .rsplit_once('/')
            .and_then(|(n, r)| Some((n, r.parse::<usize>().ok()?)))
            .ok_or_else(|| SyntaxError::new(pos, format!("expected name/rank, got `{item}`")))?;
        entries.push((name.to_string(), rank));
    }
    RankedAlphabet::terminals(entries).map_err(|e| SyntaxError::new(pos, e.to_string()).into())
}

/// Output of [`apply_interpretation`]: the term and, for each node, the
/// input element (preorder index) it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transduction {
    pub term: Term,
    pub nodes: Vec<(usize, Address)>,
}

/// `def_I(t)`.
pub fn apply_interpretation(i: &Interpretation, t: &Term) -> Result<Transduction, MsoError> {
    let m = term_to_structure_over(t, &i.source)?;
    apply_to_structure(i, &m)
}

fn apply_to_structure(i: &Interpretation, m: &Structure) -> Result<Transduction, MsoError> {
    if !holds(m, &i.domain_sentence)? {
        return Err(MsoError::DomainSentenceFails);
    }
    let at = |f: &Formula, x: usize| {
        let mut g = Assignment::default();
        g.elements.insert("x".into(), x);
        eval(m, f, &g)
    };
    let mut domain = Vec::new();
    for &e in &m.domain {
        if at(&i.domain, e)? {
            domain.push(e);
        }
    }
    if domain.is_empty() {
        return Err(MsoError::EmptyDomain);
    }
    // children[u][k] = the (k+1)-th successor of u
    let mut children: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, f) in i.successors.iter().enumerate() {
        for &u in &domain {
            for &v in &domain {
                let mut g = Assignment::default();
                g.elements.insert("x".into(), u);
                g.elements.insert("y".into(), v);
                if !eval(m, f, &g)? {
                    continue;
                }
                if children.entry(u).or_default().insert(k, v).is_some() {
                    return Err(MsoError::NotATreeDomain(format!(
                        "element {u} has two successors for <_{}",
                        k + 1
                    )));
                }
                if parent.insert(v, u).is_some() {
                    return Err(MsoError::NotATreeDomain(format!(
                        "element {v} has two predecessors"
                    )));
                }
            }
        }
    }
    let roots: Vec<usize> = domain
        .iter()
        .copied()
        .filter(|e| !parent.contains_key(e))
        .collect();
    let [root] = roots.as_slice() else {
        return Err(MsoError::NotATreeDomain(format!(
            "expected one root, found {}",
            roots.len()
        )));
    };
    for (u, kids) in &children {
        if kids.keys().copied().ne(0..kids.len()) {
            let held: Vec<String> = kids.keys().map(|k| successor_name(k + 1)).collect();
            return Err(MsoError::NotATreeDomain(format!(
                "element {u} has successors {} but not a contiguous prefix of <_1, <_2, ...",
                held.join(", ")
            )));
        }
    }
    let mut label = BTreeMap::new();
    for &u in &domain {
        let mut found = Vec::new();
        for (a, f) in &i.labels {
            if at(f, u)? {
                found.push(a.clone());
            }
        }
        if found.len() != 1 {
            return Err(MsoError::LabelClash {
                element: u,
                labels: found,
            });
        }
        label.insert(u, found.pop().unwrap());
    }
    let mut nodes = Vec::new();
    let empty = BTreeMap::new();
    let term = build(
        *root,
        Address::root(),
        &children,
        &empty,
        &label,
        &i.target,
        &mut nodes,
    )?;
    if nodes.len() != domain.len() {
        return Err(MsoError::NotATreeDomain(
            "the successor relations contain a cycle".into(),
        ));
    }
    Ok(Transduction { term, nodes })
}

fn build(
    u: usize,
    addr: Address,
    children: &BTreeMap<usize, BTreeMap<usize, usize>>,
    empty: &BTreeMap<usize, usize>,
    label: &BTreeMap<usize, String>,
    target: &RankedAlphabet,
    nodes: &mut Vec<(usize, Address)>,
) -> Result<Term, MsoError> {
    let kids = children.get(&u).unwrap_or(empty);
    let name = &label[&u];
    let rank = target.rank(name).unwrap_or(0);
    if rank != kids.len() {
        return Err(MsoError::RankMismatch {
            element: u,
            label: name.clone(),
            rank,
            children: kids.len(),
        });
    }
    nodes.push((u, addr.clone()));
    let mut sub = Vec::with_capacity(kids.len());
    for (k, &v) in kids.values().enumerate() {
        sub.push(build(
            v,
            addr.child(k),
            children,
            empty,
            label,
            target,
            nodes,
        )?);
    }
    Ok(Term::new(name, sub))
}

// ---------------------------------------------------------------------------
// definability at desk scale

/// How [`check_definability_equiv`] compares a grammar with a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivMode {
    /// Terminal trees with at most `bound` nodes.
    Trees,
    /// Yields of at most `bound` letters, taken from derivation trees with
    /// at most `max_nodes` nodes.
    Words {
        letters: Vec<String>,
        empty: BTreeSet<String>,
        max_nodes: usize,
    },
}

/// Symmetric difference between a grammar's bounded language and the
/// bounded models of a formula.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EquivReport {
    pub only_grammar: Vec<String>,
    pub only_formula: Vec<String>,
    pub compared: usize,
}

impl EquivReport {
    pub fn agrees(&self) -> bool {
        self.only_grammar.is_empty() && self.only_formula.is_empty()
    }
}

pub fn check_definability_equiv(
    g: &Cftg,
    f: &Formula,
    mode: &EquivMode,
    bound: usize,
) -> Result<EquivReport, MsoError> {
    if !g.is_regular() {
        return Err(MsoError::NotRegular(format!(
            "grammar with start `{}` has nonterminals of nonzero rank",
            g.start()
        )));
    }
    let diff = |left: BTreeSet<String>, right: BTreeSet<String>| EquivReport {
        only_grammar: left.difference(&right).cloned().collect(),
        only_formula: right.difference(&left).cloned().collect(),
        compared: left.union(&right).count(),
    };
    match mode {
        EquivMode::Trees => {
            let terminal = g
                .alphabet()
                .terminal_alphabet()
                .map_err(GrammarError::from)?;
            let en = g.enumerate_regular(Bounds::new(usize::MAX, bound))?;
            let left = en.terms.iter().map(Term::to_string).collect();
            let right = tree_models(f, &terminal, bound)?
                .iter()
                .map(Term::to_string)
                .collect();
            Ok(diff(left, right))
        }
        EquivMode::Words {
            letters,
            empty,
            max_nodes,
        } => {
            let en = g.enumerate_regular(Bounds::new(usize::MAX, *max_nodes))?;
            let mut left = BTreeSet::new();
            for t in &en.terms {
                let w = t.yield_word(empty)?;
                if w.len() <= bound {
                    left.insert(w.to_string());
                }
            }
            let right = word_models(f, letters, bound)?
                .iter()
                .map(Word::to_string)
                .collect();
            Ok(diff(left, right))
        }
    }
}
