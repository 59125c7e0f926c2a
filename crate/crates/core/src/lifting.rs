//! LIFT into the derived alphabet, β-conversion back out of it, tree
//! homomorphisms, and the lifted regular grammar `G_D` of a CFTG.
//!
//! Derived terms are written with these symbols:
//!
//! * `S{n,k}(head,arg1,...,argn)`: substitution, head of sort `n`, arguments
//!   and result of sort `k`;
//! * `pi{i,n}`: the `i`-th projection of sort `n`;
//! * `F:m`: the nonterminal `F` as a constant of sort `m`;
//! * a bare base symbol in head position, e.g. the `cat` in
//!   `S{2,0}(cat,...)`, is that symbol lifted to a constant;
//! * `lift(name/n)` is the same constant anywhere else.
//!
//! When parsing, a bare name in an argument slot of sort `k` abbreviates
//! `S{0,k}(name)`, so `S{3,0}(F:3,a,b,c)` reads as
//! `S{3,0}(F:3,S{0,0}(a),S{0,0}(b),S{0,0}(c))`.
//!
//! A derived term is also an ordinary [`Term`] over encoded names (see
//! [`DerivedTerm::to_term`]); that is how `G_D` is represented as a
//! [`Cftg`] and enumerated.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::alphabets::{DerivedSymbol, RankedAlphabet, SymbolKind};
use crate::grammars::{Cftg, GrammarError, Production};
use crate::syntax::{self, Pos, RawTree, SyntaxError};
use crate::terms::{Label, Term, TermError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("VariableOutOfRange: x{index} does not occur in X_{max}")]
    VariableOutOfRange { index: usize, max: usize },
    #[error("UnevaluatedNonterminal: `{0}` has no value under beta")]
    UnevaluatedNonterminal(String),
    #[error("SortError: {0}")]
    SortError(String),
    #[error("UnknownSymbol: `{0}`")]
    UnknownSymbol(String),
    #[error("RankMismatch: `{name}` has rank {expected}, applied to {found} arguments")]
    RankMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("ReservedName: `{0}` collides with the derived-symbol encoding")]
    ReservedName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DerivedLabel {
    Symbol(DerivedSymbol),
    /// A nonterminal of rank `sort`, used as a constant of that sort.
    Nonterminal {
        name: Arc<str>,
        sort: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivedTerm {
    pub label: DerivedLabel,
    pub children: Vec<DerivedTerm>,
}

/// What an encoded symbol name stands for.
enum Encoded<'a> {
    Substitution(usize, usize),
    Projection(usize, usize),
    Nonterminal(&'a str, usize),
    Base(&'a str),
}

fn braced_pair(s: &str) -> Option<(usize, usize)> {
    let inner = s.strip_prefix('{')?.strip_suffix('}')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn decode(name: &str) -> Encoded<'_> {
    if let Some((n, k)) = name.strip_prefix('S').and_then(braced_pair) {
        return Encoded::Substitution(n, k);
    }
    if let Some((i, n)) = name.strip_prefix("pi").and_then(braced_pair) {
        return Encoded::Projection(i, n);
    }
    if let Some((base, sort)) = name.rsplit_once(':') {
        if let Ok(sort) = sort.parse() {
            if !base.is_empty() {
                return Encoded::Nonterminal(base, sort);
            }
        }
    }
    Encoded::Base(name)
}

/// True if `name` would be read back as something other than a lifted base
/// symbol.
pub fn is_reserved_name(name: &str) -> bool {
    !matches!(decode(name), Encoded::Base(_)) || name.contains(':') || name.contains('/')
}

fn nonterminal_name(name: &str, sort: usize) -> String {
    format!("{name}:{sort}")
}

impl DerivedTerm {
    pub fn symbol(sym: DerivedSymbol, children: Vec<DerivedTerm>) -> Self {
        DerivedTerm {
            label: DerivedLabel::Symbol(sym),
            children,
        }
    }

    pub fn projection(index: usize, arity: usize) -> Self {
        Self::symbol(DerivedSymbol::projection(index, arity), Vec::new())
    }

    pub fn lifted(name: impl AsRef<str>, rank: usize) -> Self {
        Self::symbol(DerivedSymbol::lifted(name, rank), Vec::new())
    }

    pub fn nonterminal(name: impl AsRef<str>, sort: usize) -> Self {
        DerivedTerm {
            label: DerivedLabel::Nonterminal {
                name: Arc::from(name.as_ref()),
                sort,
            },
            children: Vec::new(),
        }
    }

    /// `S{n,k}(head, args...)` with `n = args.len()`.
    pub fn subst(target: usize, head: DerivedTerm, args: Vec<DerivedTerm>) -> Self {
        let mut children = Vec::with_capacity(args.len() + 1);
        children.push(head);
        children.extend(args);
        Self::symbol(
            DerivedSymbol::substitution(children.len() - 1, target),
            children,
        )
    }

    /// The declared sort of the root label.
    pub fn sort(&self) -> usize {
        match &self.label {
            DerivedLabel::Symbol(s) => s.sort().result,
            DerivedLabel::Nonterminal { sort, .. } => *sort,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(DerivedTerm::size).sum::<usize>()
    }

    pub fn has_nonterminals(&self) -> bool {
        matches!(self.label, DerivedLabel::Nonterminal { .. })
            || self.children.iter().any(DerivedTerm::has_nonterminals)
    }

    /// Checks well-sortedness and returns the root sort.
    pub fn check_sorts(&self) -> Result<usize, LiftError> {
        match &self.label {
            DerivedLabel::Nonterminal { name, .. } => {
                if !self.children.is_empty() {
                    return Err(LiftError::SortError(format!(
                        "nonterminal leaf `{name}` has children"
                    )));
                }
            }
            DerivedLabel::Symbol(sym) => {
                if !sym.is_well_formed() {
                    return Err(LiftError::SortError(format!("`{sym}` is not well formed")));
                }
                let sort = sym.sort();
                if sort.args.len() != self.children.len() {
                    return Err(LiftError::SortError(format!(
                        "`{sym}` needs {} arguments, has {}",
                        sort.args.len(),
                        self.children.len()
                    )));
                }
                for (i, (want, child)) in sort.args.iter().zip(&self.children).enumerate() {
                    let got = child.check_sorts()?;
                    if got != *want {
                        return Err(LiftError::SortError(format!(
                            "argument {} of `{sym}` has sort {got}, expected {want}",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(self.sort())
    }

    /// Checks that lifted symbols and nonterminals exist in `signature`
    /// with the ranks their sorts claim.
    pub fn check_over(&self, signature: &RankedAlphabet) -> Result<(), LiftError> {
        let (name, rank) = match &self.label {
            DerivedLabel::Symbol(DerivedSymbol::Lifted { name, rank }) => (name, *rank),
            DerivedLabel::Nonterminal { name, sort } => {
                if !signature.is_nonterminal(name) {
                    return Err(LiftError::UnknownSymbol(nonterminal_name(name, *sort)));
                }
                (name, *sort)
            }
            DerivedLabel::Symbol(_) => {
                for c in &self.children {
                    c.check_over(signature)?;
                }
                return Ok(());
            }
        };
        match signature.rank(name) {
            None => Err(LiftError::UnknownSymbol(name.to_string())),
            Some(r) if r != rank => Err(LiftError::RankMismatch {
                name: name.to_string(),
                expected: r,
                found: rank,
            }),
            Some(_) => Ok(()),
        }
    }

    /// Encodes as an ordinary term: `S{n,k}` has rank `n+1`, `pi{i,n}` and
    /// `F:m` are constants, a lifted symbol is a constant under its own name.
    pub fn to_term(&self) -> Term {
        let name = match &self.label {
            DerivedLabel::Symbol(DerivedSymbol::Lifted { name, .. }) => {
                return Term::with_symbol(name.clone(), Vec::new())
            }
            DerivedLabel::Symbol(sym) => sym.to_string(),
            DerivedLabel::Nonterminal { name, sort } => nonterminal_name(name, *sort),
        };
        Term::new(
            name,
            self.children.iter().map(DerivedTerm::to_term).collect(),
        )
    }

    /// Inverse of [`DerivedTerm::to_term`]. A lifted symbol takes the sort
    /// of the slot it sits in; `sort` is the slot sort of the root.
    pub fn from_term(t: &Term, sort: usize) -> Result<DerivedTerm, LiftError> {
        let name = match &t.label {
            Label::Var(i) => {
                return Err(LiftError::SortError(format!(
                    "variable x{i} inside a derived term"
                )))
            }
            Label::Symbol(s) => s,
        };
        let leaf = |label: DerivedLabel| -> Result<DerivedTerm, LiftError> {
            if !t.children.is_empty() {
                return Err(LiftError::SortError(format!(
                    "`{name}` is a constant of the derived alphabet but has arguments"
                )));
            }
            Ok(DerivedTerm {
                label,
                children: Vec::new(),
            })
        };
        let d = match decode(name) {
            Encoded::Substitution(n, k) => {
                if t.children.len() != n + 1 {
                    return Err(LiftError::SortError(format!(
                        "`{name}` needs {} arguments, has {}",
                        n + 1,
                        t.children.len()
                    )));
                }
                let mut children = Vec::with_capacity(n + 1);
                children.push(DerivedTerm::from_term(&t.children[0], n)?);
                for c in &t.children[1..] {
                    children.push(DerivedTerm::from_term(c, k)?);
                }
                DerivedTerm::symbol(DerivedSymbol::substitution(n, k), children)
            }
            Encoded::Projection(i, n) => {
                leaf(DerivedLabel::Symbol(DerivedSymbol::projection(i, n)))?
            }
            Encoded::Nonterminal(base, m) => leaf(DerivedLabel::Nonterminal {
                name: Arc::from(base),
                sort: m,
            })?,
            Encoded::Base(base) => leaf(DerivedLabel::Symbol(DerivedSymbol::lifted(base, sort)))?,
        };
        if d.sort() != sort {
            return Err(LiftError::SortError(format!(
                "`{name}` has sort {}, expected {sort}",
                d.sort()
            )));
        }
        Ok(d)
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, head: bool) -> fmt::Result {
        match &self.label {
            DerivedLabel::Symbol(DerivedSymbol::Lifted { name, rank }) => {
                if head {
                    write!(f, "{name}")
                } else {
                    write!(f, "lift({name}/{rank})")
                }
            }
            DerivedLabel::Symbol(sym) => {
                write!(f, "{sym}")?;
                if !self.children.is_empty() {
                    f.write_str("(")?;
                    for (i, c) in self.children.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        c.write(f, i == 0)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            DerivedLabel::Nonterminal { name, sort } => write!(f, "{name}:{sort}"),
        }
    }
}

impl fmt::Display for DerivedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}

/// Parses the derived-term syntax described in the module docs. With
/// `sort = None` the root sort is taken from the root symbol (0 for a bare
/// name).
pub fn parse_derived(text: &str, sort: Option<usize>) -> Result<DerivedTerm, LiftError> {
    let raw = syntax::parse_raw(text, Pos::start())?;
    let d = from_raw(&raw, sort.unwrap_or(0), false, sort.is_none())?;
    d.check_sorts()?;
    Ok(d)
}

fn from_raw(raw: &RawTree, sort: usize, head: bool, infer: bool) -> Result<DerivedTerm, LiftError> {
    let err = |message: String| LiftError::Syntax(SyntaxError::new(raw.pos, message));
    let leaf = |label: DerivedLabel| -> Result<DerivedTerm, LiftError> {
        if !raw.children.is_empty() {
            return Err(err(format!("`{}` takes no arguments", raw.name)));
        }
        Ok(DerivedTerm {
            label,
            children: Vec::new(),
        })
    };
    let d = match decode(&raw.name) {
        Encoded::Substitution(n, k) => {
            if raw.children.len() != n + 1 {
                return Err(err(format!(
                    "`{}` needs {} arguments, has {}",
                    raw.name,
                    n + 1,
                    raw.children.len()
                )));
            }
            let mut children = Vec::with_capacity(n + 1);
            children.push(from_raw(&raw.children[0], n, true, false)?);
            for c in &raw.children[1..] {
                children.push(from_raw(c, k, false, false)?);
            }
            DerivedTerm::symbol(DerivedSymbol::substitution(n, k), children)
        }
        Encoded::Projection(i, n) => {
            if i == 0 || i > n {
                return Err(err(format!("projection `{}` needs 1 <= i <= n", raw.name)));
            }
            leaf(DerivedLabel::Symbol(DerivedSymbol::projection(i, n)))?
        }
        Encoded::Nonterminal(name, m) => leaf(DerivedLabel::Nonterminal {
            name: Arc::from(name),
            sort: m,
        })?,
        Encoded::Base("lift") => {
            let [inner] = raw.children.as_slice() else {
                return Err(err("`lift` takes exactly one symbol".into()));
            };
            if !inner.children.is_empty() {
                return Err(err("`lift` takes a symbol name, not a term".into()));
            }
            let (name, rank) = match inner.name.rsplit_once('/') {
                Some((name, rank)) => (
                    name,
                    rank.parse::<usize>()
                        .map_err(|_| err(format!("bad rank in `{}`", inner.name)))?,
                ),
                None => (inner.name.as_str(), sort),
            };
            DerivedTerm::lifted(name, rank)
        }
        Encoded::Base(name) => {
            if !raw.children.is_empty() {
                return Err(err(format!(
                    "base symbol `{name}` applied to arguments; write S{{n,k}}({name},...)"
                )));
            }
            if head {
                DerivedTerm::lifted(name, sort)
            } else {
                DerivedTerm::subst(sort, DerivedTerm::lifted(name, 0), Vec::new())
            }
        }
    };
    if !infer && d.sort() != sort {
        return Err(LiftError::SortError(format!(
            "`{}` at {} has sort {}, expected {sort}",
            raw.name,
            raw.pos,
            d.sort()
        )));
    }
    Ok(d)
}

/// `LIFT_k`: every symbol becomes a lifted constant.
pub fn lift_term(t: &Term, k: usize) -> Result<DerivedTerm, LiftError> {
    lift_term_with(t, k, &|_| false)
}

/// `LIFT_k` where symbols satisfying `is_nonterminal` become
/// [`DerivedLabel::Nonterminal`] leaves instead of lifted constants.
pub fn lift_term_with(
    t: &Term,
    k: usize,
    is_nonterminal: &dyn Fn(&str) -> bool,
) -> Result<DerivedTerm, LiftError> {
    match &t.label {
        Label::Var(i) => {
            if *i == 0 || *i > k {
                return Err(LiftError::VariableOutOfRange { index: *i, max: k });
            }
            Ok(DerivedTerm::projection(*i, k))
        }
        Label::Symbol(name) => {
            if is_reserved_name(name) {
                return Err(LiftError::ReservedName(name.to_string()));
            }
            let n = t.children.len();
            let head = if is_nonterminal(name) {
                DerivedTerm::nonterminal(name, n)
            } else {
                DerivedTerm::lifted(name, n)
            };
            let args = t
                .children
                .iter()
                .map(|c| lift_term_with(c, k, is_nonterminal))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(DerivedTerm::subst(k, head, args))
        }
    }
}

/// β: evaluates a derived term of sort `k` in the tree substitution
/// algebra, giving a term over `X_k`.
pub fn beta(d: &DerivedTerm) -> Result<Term, LiftError> {
    d.check_sorts()?;
    eval(d, false)
}

/// β extended to nonterminal leaves by `F:m ↦ F(x1,...,xm)`.
pub fn beta_open(d: &DerivedTerm) -> Result<Term, LiftError> {
    d.check_sorts()?;
    eval(d, true)
}

fn eval(d: &DerivedTerm, open: bool) -> Result<Term, LiftError> {
    match &d.label {
        DerivedLabel::Symbol(DerivedSymbol::Lifted { name, rank }) => {
            Ok(Term::generic(name.clone(), *rank))
        }
        DerivedLabel::Symbol(DerivedSymbol::Projection { index, .. }) => Ok(Term::var(*index)),
        DerivedLabel::Symbol(DerivedSymbol::Substitution { .. }) => {
            let head = eval(&d.children[0], open)?;
            let args = d.children[1..]
                .iter()
                .map(|c| eval(c, open))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(head.substitute(&args)?)
        }
        DerivedLabel::Nonterminal { name, sort } => {
            if open {
                Ok(Term::generic(name.clone(), *sort))
            } else {
                Err(LiftError::UnevaluatedNonterminal(nonterminal_name(
                    name, *sort,
                )))
            }
        }
    }
}

/// β applied to an encoded derived term of sort `sort`.
pub fn beta_term(t: &Term, sort: usize) -> Result<Term, LiftError> {
    beta(&DerivedTerm::from_term(t, sort)?)
}

/// The derived regular grammar `G_D`: each nonterminal `F/m` becomes the
/// rank-0 nonterminal `F:m` and each production `F(x1..xm) -> t` becomes
/// `F:m -> LIFT_m(t)`, encoded via [`DerivedTerm::to_term`].
pub fn lift_grammar(g: &Cftg) -> Result<Cftg, LiftError> {
    let diagnostics = g.validate();
    if !diagnostics.is_empty() {
        return Err(GrammarError::Invalid(diagnostics).into());
    }
    let alphabet = g.alphabet();
    let is_nt = |s: &str| alphabet.is_nonterminal(s);
    let mut productions = Vec::new();
    let mut terminals: Vec<(String, usize)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for p in g.productions() {
        let rhs = lift_term_with(&p.rhs, p.arity, &is_nt)?.to_term();
        collect_terminals(&rhs, &mut terminals, &mut seen);
        productions.push(Production::new(nonterminal_name(&p.lhs, p.arity), 0, rhs));
    }
    let nonterminals = alphabet.nonterminal_symbols().map(|s| {
        (
            nonterminal_name(&s.name, s.rank),
            0,
            SymbolKind::Nonterminal,
        )
    });
    let entries: Vec<(String, usize, SymbolKind)> = terminals
        .into_iter()
        .map(|(n, r)| (n, r, SymbolKind::Terminal))
        .chain(nonterminals)
        .collect();
    let start_rank = alphabet.rank(g.start()).unwrap_or(0);
    let lifted = RankedAlphabet::new(entries).map_err(GrammarError::from)?;
    Ok(Cftg::new(
        lifted,
        nonterminal_name(g.start(), start_rank),
        productions,
    ))
}

fn collect_terminals(t: &Term, out: &mut Vec<(String, usize)>, seen: &mut HashMap<String, usize>) {
    if let Some(name) = t.symbol() {
        if !matches!(decode(name), Encoded::Nonterminal(..)) && !seen.contains_key(name) {
            seen.insert(name.to_string(), t.children.len());
            out.push((name.to_string(), t.children.len()));
        }
    }
    for c in &t.children {
        collect_terminals(c, out, seen);
    }
}

/// What a [`HomFamily`] does with symbols it has no image for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    /// `g ↦ g(x1,...,xn)`.
    Identity,
    /// Report [`LiftError::UnknownSymbol`].
    Reject,
}

/// A family `h_n : Σ_n → T(Ω, X_n)`, applied as the tree homomorphism `ĥ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomFamily {
    images: BTreeMap<Arc<str>, (usize, Term)>,
    fallback: Fallback,
}

impl HomFamily {
    pub fn new(fallback: Fallback) -> Self {
        HomFamily {
            images: BTreeMap::new(),
            fallback,
        }
    }

    pub fn identity() -> Self {
        Self::new(Fallback::Identity)
    }

    /// Sets `h(name) = image` for `name` of rank `rank`.
    pub fn insert(
        &mut self,
        name: impl AsRef<str>,
        rank: usize,
        image: Term,
    ) -> Result<(), LiftError> {
        let max = image.max_var();
        if max > rank {
            return Err(LiftError::VariableOutOfRange {
                index: max,
                max: rank,
            });
        }
        self.images.insert(Arc::from(name.as_ref()), (rank, image));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&(usize, Term)> {
        self.images.get(name)
    }

    pub fn fallback(&self) -> Fallback {
        self.fallback
    }
}

/// `ĥ(σ(t1,...,tn)) = h(σ)[ĥ(t1),...,ĥ(tn)]`; variables are fixed.
pub fn hom_apply(h: &HomFamily, t: &Term) -> Result<Term, LiftError> {
    let name = match &t.label {
        Label::Var(_) => return Ok(t.clone()),
        Label::Symbol(s) => s,
    };
    let children = t
        .children
        .iter()
        .map(|c| hom_apply(h, c))
        .collect::<Result<Vec<_>, _>>()?;
    match h.images.get(name) {
        Some((rank, image)) => {
            if *rank != children.len() {
                return Err(LiftError::RankMismatch {
                    name: name.to_string(),
                    expected: *rank,
                    found: children.len(),
                });
            }
            Ok(image.substitute(&children)?)
        }
        None => match h.fallback {
            Fallback::Identity => Ok(Term::with_symbol(name.clone(), children)),
            Fallback::Reject => Err(LiftError::UnknownSymbol(name.to_string())),
        },
    }
}

/// `p̂`: the production's left-hand nonterminal goes to its right-hand
/// side, every other symbol of `signature` to itself.
pub fn production_hom(p: &Production, signature: &RankedAlphabet) -> Result<HomFamily, LiftError> {
    let mut h = HomFamily::new(Fallback::Reject);
    for (sym, _) in signature.iter() {
        h.insert(
            &sym.name,
            sym.rank,
            Term::generic(sym.name.clone(), sym.rank),
        )?;
    }
    match signature.rank(&p.lhs) {
        Some(r) if r == p.arity => {}
        Some(r) => {
            return Err(LiftError::RankMismatch {
                name: p.lhs.to_string(),
                expected: r,
                found: p.arity,
            })
        }
        None => return Err(LiftError::UnknownSymbol(p.lhs.to_string())),
    }
    h.insert(&p.lhs, p.arity, p.rhs.clone())?;
    Ok(h)
}

/// `p̂_D` on encoded derived terms: `F:m ↦ LIFT_m(rhs)`; every other derived
/// symbol is fixed. Nonterminals of the right-hand side are recognised
/// through `signature`.
pub fn lifted_production_hom(
    p: &Production,
    signature: &RankedAlphabet,
) -> Result<HomFamily, LiftError> {
    let image = lift_term_with(&p.rhs, p.arity, &|s| signature.is_nonterminal(s))?;
    let mut h = HomFamily::identity();
    h.insert(nonterminal_name(&p.lhs, p.arity), 0, image.to_term())?;
    Ok(h)
}

/// The commuting square of the lifting lemma at `d`:
/// `β(p̂_D(d)) = p̂(β(d))`, with β extended to nonterminal leaves.
pub fn check_diagram(
    p: &Production,
    signature: &RankedAlphabet,
    d: &DerivedTerm,
) -> Result<bool, LiftError> {
    let sort = d.check_sorts()?;
    let p_d = lifted_production_hom(p, signature)?;
    let rewritten = DerivedTerm::from_term(&hom_apply(&p_d, &d.to_term())?, sort)?;
    let left = beta_open(&rewritten)?;
    let right = hom_apply(&production_hom(p, signature)?, &beta_open(d)?)?;
    Ok(left == right)
}
