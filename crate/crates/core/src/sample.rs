//! Seeded random terms, derived terms, words and formulas for property
//! checks. Everything is driven by a [`ChaCha8Rng`] so runs are
//! reproducible from a seed.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabets::RankedAlphabet;
use crate::lifting::DerivedTerm;
use crate::mso::{Formula, Vocabulary};
use crate::terms::{Term, Word};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random term over every symbol of `alphabet` (terminal or not) and
/// `X_k`, with at most `max_nodes` nodes. `None` if the alphabet has no
/// constant and `k = 0`.
pub fn random_term(
    rng: &mut impl Rng,
    alphabet: &RankedAlphabet,
    k: usize,
    max_nodes: usize,
) -> Option<Term> {
    let symbols: Vec<(Arc<str>, usize)> = alphabet
        .iter()
        .map(|(s, _)| (s.name.clone(), s.rank))
        .collect();
    gen_term(rng, &symbols, k, max_nodes.max(1))
}

/// A random closed term over the terminals of `alphabet`.
pub fn random_terminal_term(
    rng: &mut impl Rng,
    alphabet: &RankedAlphabet,
    max_nodes: usize,
) -> Option<Term> {
    let symbols: Vec<(Arc<str>, usize)> = alphabet
        .terminal_symbols()
        .map(|s| (s.name.clone(), s.rank))
        .collect();
    gen_term(rng, &symbols, 0, max_nodes.max(1))
}

fn gen_term(
    rng: &mut impl Rng,
    symbols: &[(Arc<str>, usize)],
    k: usize,
    budget: usize,
) -> Option<Term> {
    let constants: Vec<&Arc<str>> = symbols
        .iter()
        .filter(|(_, r)| *r == 0)
        .map(|(n, _)| n)
        .collect();
    let leaf_count = constants.len() + k;
    let inner: Vec<&(Arc<str>, usize)> = symbols
        .iter()
        .filter(|(_, r)| *r >= 1 && *r < budget)
        .collect();
    let want_leaf = budget <= 1 || inner.is_empty() || rng.gen_bool(0.3);
    if want_leaf {
        if leaf_count == 0 {
            return None;
        }
        let i = rng.gen_range(0..leaf_count);
        return Some(match constants.get(i) {
            Some(c) => Term::with_symbol((*c).clone(), Vec::new()),
            None => Term::var(i - constants.len() + 1),
        });
    }
    let (name, rank) = inner.choose(rng)?;
    // every child gets one node, the rest of the budget is spread at random
    let mut shares = vec![1usize; *rank];
    for _ in 0..(budget - 1 - rank) {
        if rng.gen_bool(0.5) {
            shares[rng.gen_range(0..*rank)] += 1;
        }
    }
    let children = shares
        .into_iter()
        .map(|b| gen_term(rng, symbols, k, b))
        .collect::<Option<Vec<_>>>()?;
    Some(Term::with_symbol(name.clone(), children))
}

/// A random well-sorted derived term of sort `sort` over `D(signature)`,
/// with nonterminals of `signature` as [`DerivedTerm::nonterminal`] leaves.
/// Substitution heads have arity at most `max_arity`.
pub fn random_derived(
    rng: &mut impl Rng,
    signature: &RankedAlphabet,
    sort: usize,
    depth: usize,
    max_arity: usize,
) -> Option<DerivedTerm> {
    if depth > 0 && rng.gen_bool(0.6) {
        let n = rng.gen_range(0..=max_arity);
        let head = random_derived(rng, signature, n, depth - 1, max_arity)?;
        let args = (0..n)
            .map(|_| random_derived(rng, signature, sort, depth - 1, max_arity))
            .collect::<Option<Vec<_>>>()?;
        return Some(DerivedTerm::subst(sort, head, args));
    }
    let mut leaves: Vec<DerivedTerm> = (1..=sort)
        .map(|i| DerivedTerm::projection(i, sort))
        .collect();
    for (s, _) in signature.iter() {
        let leaf = if signature.is_nonterminal(&s.name) {
            DerivedTerm::nonterminal(&s.name, s.rank)
        } else {
            DerivedTerm::lifted(&s.name, s.rank)
        };
        if s.rank == sort {
            leaves.push(leaf.clone());
        }
        if s.rank == 0 {
            leaves.push(DerivedTerm::subst(sort, leaf, Vec::new()));
        }
    }
    leaves.choose(rng).cloned()
}

pub fn random_word<S: AsRef<str>>(rng: &mut impl Rng, letters: &[S], max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word(
        (0..len)
            .map(|_| Arc::from(letters[rng.gen_range(0..letters.len())].as_ref()))
            .collect(),
    )
}

/// A random closed formula of nesting depth at most `depth` over `vocab`,
/// with at most `max_sets` set quantifiers.
pub fn random_formula(
    rng: &mut impl Rng,
    vocab: &Vocabulary,
    depth: usize,
    max_sets: usize,
) -> Formula {
    let mut g = FormulaGen {
        binary: vocab.binary.iter().cloned().collect(),
        unary: vocab.unary.iter().cloned().collect(),
        elements: Vec::new(),
        sets: Vec::new(),
        sets_left: max_sets,
        fresh: 0,
    };
    g.formula(rng, depth)
}

struct FormulaGen {
    binary: Vec<String>,
    unary: Vec<String>,
    elements: Vec<String>,
    sets: Vec<String>,
    sets_left: usize,
    fresh: usize,
}

impl FormulaGen {
    fn formula(&mut self, rng: &mut impl Rng, depth: usize) -> Formula {
        if depth == 0 {
            return self.atom(rng);
        }
        // an unscoped formula would only be able to say true or false
        let choice = if self.elements.is_empty() {
            rng.gen_range(6..9)
        } else {
            rng.gen_range(0..9)
        };
        match choice {
            0 => self.atom(rng),
            1 => Formula::not(self.formula(rng, depth - 1)),
            2 => Formula::And(vec![
                self.formula(rng, depth - 1),
                self.formula(rng, depth - 1),
            ]),
            3 => Formula::Or(vec![
                self.formula(rng, depth - 1),
                self.formula(rng, depth - 1),
            ]),
            4 => Formula::implies(self.formula(rng, depth - 1), self.formula(rng, depth - 1)),
            5 => Formula::iff(self.formula(rng, depth - 1), self.formula(rng, depth - 1)),
            8 if self.sets_left > 0 => {
                self.sets_left -= 1;
                self.fresh += 1;
                let v = format!("X{}", self.fresh);
                self.sets.push(v.clone());
                let body = self.formula(rng, depth - 1);
                self.sets.pop();
                if rng.gen_bool(0.5) {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
            _ => {
                self.fresh += 1;
                let v = format!("x{}", self.fresh);
                self.elements.push(v.clone());
                let body = self.formula(rng, depth - 1);
                self.elements.pop();
                if rng.gen_bool(0.5) {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
        }
    }

    fn atom(&mut self, rng: &mut impl Rng) -> Formula {
        if self.elements.is_empty() {
            return if rng.gen_bool(0.5) {
                Formula::True
            } else {
                Formula::False
            };
        }
        let x = self.elements.choose(rng).unwrap().clone();
        let y = self.elements.choose(rng).unwrap().clone();
        let mut kinds = vec![0, 1];
        if !self.binary.is_empty() {
            kinds.push(2);
            kinds.push(2);
        }
        if !self.unary.is_empty() {
            kinds.push(3);
            kinds.push(3);
        }
        if !self.sets.is_empty() {
            kinds.push(4);
            kinds.push(4);
        }
        match *kinds.choose(rng).unwrap() {
            0 => Formula::Eq(x, y),
            1 => {
                if rng.gen_bool(0.5) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            2 => Formula::Rel(self.binary.choose(rng).unwrap().clone(), x, y),
            3 => Formula::Pred(self.unary.choose(rng).unwrap().clone(), x),
            _ => Formula::In(x, self.sets.choose(rng).unwrap().clone()),
        }
    }
}
