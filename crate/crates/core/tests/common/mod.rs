//! Oracles shared by the integration tests. None of them call into the
//! code they are used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cftg::grammars::Cftg;
use cftg::mso::{is_set_variable, Formula};
use cftg::terms::{Label, Structure, Term};

pub const ANBNCN: &str = include_str!("../../grammars/anbncn.grammar");
pub const CROSS_SERIAL: &str = include_str!("../../grammars/cross_serial.grammar");
pub const MONADIC: &str = include_str!("../../grammars/monadic.grammar");
pub const ANBN_BINARY: &str = include_str!("../../grammars/anbn_binary.grammar");
pub const ANBN_MONADIC: &str = include_str!("../../grammars/anbn_monadic.grammar");
pub const COPYING: &str = include_str!("../../grammars/copying.grammar");
pub const A_STAR: &str = include_str!("../../grammars/a_star.grammar");
pub const ROOT_F: &str = include_str!("../../grammars/root_f.grammar");

pub fn grammar(text: &str) -> Cftg {
    Cftg::parse(text).expect("fixture grammar parses")
}

// ---------------------------------------------------------------------------
// string languages

pub fn anbn(max_n: usize) -> BTreeSet<String> {
    (0..=max_n)
        .map(|n| "a".repeat(n) + &"b".repeat(n))
        .collect()
}

pub fn anbncn(min_n: usize, max_n: usize) -> BTreeSet<String> {
    (min_n..=max_n)
        .map(|n| "a".repeat(n) + &"b".repeat(n) + &"c".repeat(n))
        .collect()
}

pub fn anbmcndm(max_sum: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for n in 0..=max_sum {
        for m in 0..=max_sum - n {
            out.insert(format!(
                "{}{}{}{}",
                "a".repeat(n),
                "b".repeat(m),
                "c".repeat(n),
                "d".repeat(m)
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// inside-out semantics, evaluated bottom-up

/// Terminal trees of `g` with an inside-out derivation of at most
/// `max_steps` steps. Every nonterminal occurrence is evaluated to a value
/// before its own production fires, costing one step per rewrite.
pub fn io_language(g: &Cftg, max_steps: usize) -> BTreeSet<Term> {
    let start = Term::new(g.start(), vec![]);
    eval_io(g, &start, &[], max_steps).into_keys().collect()
}

fn eval_io(g: &Cftg, t: &Term, args: &[Term], budget: usize) -> BTreeMap<Term, usize> {
    let name = match &t.label {
        Label::Var(i) => return BTreeMap::from([(args[i - 1].clone(), 0)]),
        Label::Symbol(s) => s.clone(),
    };
    // all combinations of child values within the budget
    let mut combos: Vec<(Vec<Term>, usize)> = vec![(vec![], 0)];
    for c in &t.children {
        let values = eval_io(g, c, args, budget);
        let mut next = Vec::new();
        for (prefix, cost) in &combos {
            for (v, c) in &values {
                if cost + c <= budget {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    next.push((p, cost + c));
                }
            }
        }
        combos = next;
    }
    let mut out: BTreeMap<Term, usize> = BTreeMap::new();
    let mut keep = |t: Term, c: usize| {
        let e = out.entry(t).or_insert(c);
        *e = (*e).min(c);
    };
    if !g.alphabet().is_nonterminal(&name) {
        for (children, cost) in combos {
            keep(Term::new(&*name, children), cost);
        }
        return out;
    }
    for (values, cost) in combos {
        if cost + 1 > budget {
            continue;
        }
        for p in g.productions().iter().filter(|p| p.lhs == name) {
            for (v, c) in eval_io(g, &p.rhs, &values, budget - cost - 1) {
                keep(v, cost + 1 + c);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// trees

/// Every tree with exactly `n` nodes over `symbols`, by plain recursion.
pub fn trees_exactly(symbols: &[(&str, usize)], n: usize) -> Vec<Term> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for &(name, rank) in symbols {
        for children in forests(symbols, n - 1, rank) {
            out.push(Term::new(name, children));
        }
    }
    out
}

fn forests(symbols: &[(&str, usize)], nodes: usize, len: usize) -> Vec<Vec<Term>> {
    if len == 0 {
        return if nodes == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=nodes {
        for t in trees_exactly(symbols, first) {
            for mut rest in forests(symbols, nodes - first, len - 1) {
                rest.insert(0, t.clone());
                out.push(rest);
            }
        }
    }
    out
}

pub fn trees_up_to(symbols: &[(&str, usize)], max: usize) -> Vec<Term> {
    (1..=max).flat_map(|n| trees_exactly(symbols, n)).collect()
}

pub fn relabel(t: &Term, from: &str, to: &str) -> Term {
    let label = match &t.label {
        Label::Symbol(s) if &**s == from => Label::Symbol(to.into()),
        other => other.clone(),
    };
    Term {
        label,
        children: t.children.iter().map(|c| relabel(c, from, to)).collect(),
    }
}

// ---------------------------------------------------------------------------
// MSO

/// Textbook satisfaction with explicit sets, straight off the relations.
pub fn naive_holds(m: &Structure, f: &Formula) -> bool {
    naive(m, f, &BTreeMap::new(), &BTreeMap::new())
}

fn naive(
    m: &Structure,
    f: &Formula,
    el: &BTreeMap<String, usize>,
    sets: &BTreeMap<String, BTreeSet<usize>>,
) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(x, y) => el[x] == el[y],
        Formula::Rel(r, x, y) => m.binary.get(r).is_some_and(|s| s.contains(&(el[x], el[y]))),
        Formula::Pred(p, x) => m.unary.get(p).is_some_and(|s| s.contains(&el[x])),
        Formula::In(x, s) => sets[s].contains(&el[x]),
        Formula::Not(g) => !naive(m, g, el, sets),
        Formula::And(gs) => gs.iter().all(|g| naive(m, g, el, sets)),
        Formula::Or(gs) => gs.iter().any(|g| naive(m, g, el, sets)),
        Formula::Implies(a, b) => !naive(m, a, el, sets) || naive(m, b, el, sets),
        Formula::Iff(a, b) => naive(m, a, el, sets) == naive(m, b, el, sets),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let existential = matches!(f, Formula::Exists(..));
            let mut results = Vec::new();
            if is_set_variable(v) {
                for subset in powerset(&m.domain) {
                    let mut s = sets.clone();
                    s.insert(v.clone(), subset);
                    results.push(naive(m, g, el, &s));
                }
            } else {
                for &e in &m.domain {
                    let mut a = el.clone();
                    a.insert(v.clone(), e);
                    results.push(naive(m, g, &a, sets));
                }
            }
            if existential {
                results.into_iter().any(|b| b)
            } else {
                results.into_iter().all(|b| b)
            }
        }
    }
}

fn powerset(domain: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    let mut out = vec![BTreeSet::new()];
    for &e in domain {
        let with: Vec<_> = out
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.insert(e);
                s
            })
            .collect();
        out.extend(with);
    }
    out
}

fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

/// Negation normal form: negations pushed to atoms by De Morgan and
/// quantifier duality.
pub fn nnf(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => negated(g),
        Formula::And(gs) => Formula::And(gs.iter().map(nnf).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(nnf).collect()),
        Formula::Implies(a, b) => Formula::Or(vec![negated(a), nnf(b)]),
        Formula::Iff(a, b) => Formula::Or(vec![
            Formula::And(vec![nnf(a), nnf(b)]),
            Formula::And(vec![negated(a), negated(b)]),
        ]),
        Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(nnf(g))),
        Formula::Forall(v, g) => Formula::Forall(v.clone(), Box::new(nnf(g))),
        atom => atom.clone(),
    }
}

fn negated(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => nnf(g),
        Formula::And(gs) => Formula::Or(gs.iter().map(negated).collect()),
        Formula::Or(gs) => Formula::And(gs.iter().map(negated).collect()),
        Formula::Implies(a, b) => Formula::And(vec![nnf(a), negated(b)]),
        Formula::Iff(a, b) => Formula::Or(vec![
            Formula::And(vec![nnf(a), negated(b)]),
            Formula::And(vec![negated(a), nnf(b)]),
        ]),
        Formula::Exists(v, g) => Formula::Forall(v.clone(), Box::new(negated(g))),
        Formula::Forall(v, g) => Formula::Exists(v.clone(), Box::new(negated(g))),
        atom => not(atom.clone()),
    }
}

/// Rewrites every `and` and `forall` through its dual:
/// `φ ∧ ψ ↦ ¬(¬φ ∨ ¬ψ)`, `∀v φ ↦ ¬∃v ¬φ`.
pub fn dualize(f: &Formula) -> Formula {
    match f {
        Formula::And(gs) => not(Formula::Or(gs.iter().map(|g| not(dualize(g))).collect())),
        Formula::Forall(v, g) => not(Formula::Exists(v.clone(), Box::new(not(dualize(g))))),
        Formula::Or(gs) => Formula::Or(gs.iter().map(dualize).collect()),
        Formula::Not(g) => not(dualize(g)),
        Formula::Implies(a, b) => Formula::Implies(Box::new(dualize(a)), Box::new(dualize(b))),
        Formula::Iff(a, b) => Formula::Iff(Box::new(dualize(a)), Box::new(dualize(b))),
        Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(dualize(g))),
        atom => atom.clone(),
    }
}
