//! Ranked alphabets and the schematic derived alphabet `D(Σ)`.
//!
//! A [`RankedAlphabet`] holds both terminals and nonterminals, tagged by
//! [`SymbolKind`]. The derived alphabet is never enumerated: the projection
//! family `pi{i,n}` and the substitution family `S{n,k}` exist for every
//! `n` and `k`, so [`DerivedAlphabet`] is only a membership predicate over a
//! base alphabet.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("EmptyAlphabet: an alphabet needs at least one symbol")]
    EmptyAlphabet,
    #[error("EmptyName: symbol names must be nonempty")]
    EmptyName,
    #[error("InvalidName: `{0}` is not a usable symbol name")]
    InvalidName(String),
    #[error("DuplicateName: `{0}` is declared more than once")]
    DuplicateName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankedSymbol {
    pub name: Arc<str>,
    pub rank: usize,
}

impl fmt::Display for RankedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.rank)
    }
}

/// Returns true for names of the form `x1`, `x2`, ... which the term
/// syntax reserves for variables.
pub fn is_variable_name(name: &str) -> bool {
    let Some(digits) = name.strip_prefix('x') else {
        return false;
    };
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Checks that a name survives a print/parse round trip in the term syntax.
///
/// Commas are allowed only inside a `{...}` group so that derived symbol
/// names such as `S{2,3}` are representable.
pub fn is_valid_name(name: &str) -> bool {
    if name.is_empty() || is_variable_name(name) || name.contains("->") || name == "lift" {
        return false;
    }
    let mut depth = 0usize;
    for c in name.chars() {
        match c {
            '{' => depth += 1,
            '}' => {
                if depth == 0 {
                    return false;
                }
                depth -= 1;
            }
            ',' if depth > 0 => {}
            '(' | ')' | ',' | '|' | '#' => return false,
            c if c.is_whitespace() => return false,
            _ => {}
        }
    }
    depth == 0
}

/// A finite ranked alphabet of terminals and nonterminals.
///
/// Symbols keep their declaration order, which is the order used when the
/// alphabet is printed back out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedAlphabet {
    symbols: Vec<(RankedSymbol, SymbolKind)>,
    index: BTreeMap<Arc<str>, usize>,
}

impl RankedAlphabet {
    pub fn new<I, S>(entries: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = (S, usize, SymbolKind)>,
        S: AsRef<str>,
    {
        let mut symbols = Vec::new();
        let mut index = BTreeMap::new();
        for (name, rank, kind) in entries {
            let name = name.as_ref();
            if name.is_empty() {
                return Err(AlphabetError::EmptyName);
            }
            if !is_valid_name(name) {
                return Err(AlphabetError::InvalidName(name.to_string()));
            }
            let name: Arc<str> = Arc::from(name);
            if index.contains_key(&name) {
                return Err(AlphabetError::DuplicateName(name.to_string()));
            }
            index.insert(name.clone(), symbols.len());
            symbols.push((RankedSymbol { name, rank }, kind));
        }
        if symbols.is_empty() {
            return Err(AlphabetError::EmptyAlphabet);
        }
        Ok(RankedAlphabet { symbols, index })
    }

    /// Convenience constructor for a terminal-only alphabet.
    pub fn terminals<I, S>(entries: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: AsRef<str>,
    {
        Self::new(
            entries
                .into_iter()
                .map(|(n, r)| (n, r, SymbolKind::Terminal)),
        )
    }

    pub fn get(&self, name: &str) -> Option<(&RankedSymbol, SymbolKind)> {
        self.index
            .get(name)
            .map(|&i| (&self.symbols[i].0, self.symbols[i].1))
    }

    pub fn rank(&self, name: &str) -> Option<usize> {
        self.get(name).map(|(s, _)| s.rank)
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        self.get(name).map(|(_, k)| k)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn is_terminal(&self, name: &str) -> bool {
        self.kind(name) == Some(SymbolKind::Terminal)
    }

    pub fn is_nonterminal(&self, name: &str) -> bool {
        self.kind(name) == Some(SymbolKind::Nonterminal)
    }

    /// Interned name, so terms built against this alphabet share storage.
    pub fn intern(&self, name: &str) -> Option<Arc<str>> {
        self.get(name).map(|(s, _)| s.name.clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RankedSymbol, SymbolKind)> {
        self.symbols.iter().map(|(s, k)| (s, *k))
    }

    pub fn terminal_symbols(&self) -> impl Iterator<Item = &RankedSymbol> {
        self.iter()
            .filter(|(_, k)| *k == SymbolKind::Terminal)
            .map(|(s, _)| s)
    }

    pub fn nonterminal_symbols(&self) -> impl Iterator<Item = &RankedSymbol> {
        self.iter()
            .filter(|(_, k)| *k == SymbolKind::Nonterminal)
            .map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Largest rank over all symbols, terminals and nonterminals alike.
    pub fn max_rank(&self) -> usize {
        self.symbols.iter().map(|(s, _)| s.rank).max().unwrap_or(0)
    }

    pub fn max_terminal_rank(&self) -> usize {
        self.terminal_symbols().map(|s| s.rank).max().unwrap_or(0)
    }

    /// Non-fatal observations about the alphabet.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.terminal_symbols().any(|s| s.rank == 0) {
            out.push("no terminal of rank 0: the terminal tree language is empty".to_string());
        }
        out
    }

    /// The sub-alphabet of terminals only.
    pub fn terminal_alphabet(&self) -> Result<RankedAlphabet, AlphabetError> {
        RankedAlphabet::terminals(self.terminal_symbols().map(|s| (s.name.clone(), s.rank)))
    }
}

/// A symbol of the derived alphabet `D(Σ)` over a single-sorted base.
///
/// Sorts are naturals: the arity of the operation a derived term denotes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DerivedSymbol {
    /// A base symbol of rank `rank`, demoted to a constant of sort `rank`.
    Lifted { name: Arc<str>, rank: usize },
    /// `pi{index,arity}`: the `index`-th projection of arity `arity` (1-based).
    Projection { index: usize, arity: usize },
    /// `S{arity,target}`: substitutes `arity` terms of sort `target` into a
    /// head of sort `arity`.
    Substitution { arity: usize, target: usize },
}

/// Argument sorts and result sort of a derived symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedSort {
    pub args: Vec<usize>,
    pub result: usize,
}

impl DerivedSymbol {
    pub fn lifted(name: impl AsRef<str>, rank: usize) -> Self {
        DerivedSymbol::Lifted {
            name: Arc::from(name.as_ref()),
            rank,
        }
    }

    pub fn projection(index: usize, arity: usize) -> Self {
        DerivedSymbol::Projection { index, arity }
    }

    pub fn substitution(arity: usize, target: usize) -> Self {
        DerivedSymbol::Substitution { arity, target }
    }

    pub fn is_well_formed(&self) -> bool {
        match self {
            DerivedSymbol::Projection { index, arity } => *index >= 1 && index <= arity,
            _ => true,
        }
    }

    pub fn sort(&self) -> DerivedSort {
        match self {
            DerivedSymbol::Lifted { rank, .. } => DerivedSort {
                args: Vec::new(),
                result: *rank,
            },
            DerivedSymbol::Projection { arity, .. } => DerivedSort {
                args: Vec::new(),
                result: *arity,
            },
            DerivedSymbol::Substitution { arity, target } => {
                let mut args = Vec::with_capacity(arity + 1);
                args.push(*arity);
                args.extend(std::iter::repeat_n(*target, *arity));
                DerivedSort {
                    args,
                    result: *target,
                }
            }
        }
    }

    /// Number of children a node labelled with this symbol carries.
    pub fn arity(&self) -> usize {
        match self {
            DerivedSymbol::Substitution { arity, .. } => arity + 1,
            _ => 0,
        }
    }
}

impl fmt::Display for DerivedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivedSymbol::Lifted { name, .. } => write!(f, "{name}"),
            DerivedSymbol::Projection { index, arity } => write!(f, "pi{{{index},{arity}}}"),
            DerivedSymbol::Substitution { arity, target } => write!(f, "S{{{arity},{target}}}"),
        }
    }
}

/// `D(Σ)` as a membership predicate over its base alphabet.
#[derive(Debug, Clone, Copy)]
pub struct DerivedAlphabet<'a> {
    base: &'a RankedAlphabet,
}

impl<'a> DerivedAlphabet<'a> {
    pub fn new(base: &'a RankedAlphabet) -> Self {
        DerivedAlphabet { base }
    }

    pub fn base(&self) -> &'a RankedAlphabet {
        self.base
    }

    pub fn contains(&self, sym: &DerivedSymbol) -> bool {
        match sym {
            DerivedSymbol::Lifted { name, rank } => self.base.rank(name) == Some(*rank),
            DerivedSymbol::Projection { .. } => sym.is_well_formed(),
            DerivedSymbol::Substitution { .. } => true,
        }
    }
}
