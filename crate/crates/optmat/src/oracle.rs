//! Naive, obviously-correct evaluator over raw term triples. Ground truth
//! for every equivalence and minimality test; no indexes, no pruning.

use std::collections::BTreeSet;

use crate::ntriples::TermTriple;
use crate::query::{Node, PatTerm, Query, TriplePattern, VarId};
use crate::term::Term;

/// How joins treat missing values. The SQL-style convention never matches a
/// NULL with anything; the SPARQL convention treats an unbound slot as
/// compatible with everything. Well-designed queries produce identical
/// results under both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    NullIntolerant,
    NullTolerant,
}

/// One mapping over the full variable universe of the query. `Unbound`
/// means the variable is outside the subtree evaluated so far; `Null` is an
/// explicit NULL produced by a left join under the intolerant convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OVal {
    Unbound,
    Null,
    Bound(Term),
}

/// A mapping plus, per triple pattern, the graph triple it matched on the
/// way into this row (None while the pattern's group is unevaluated or was
/// left unmatched by an OPTIONAL). The contribution record is what defines
/// a pattern's needed triples: a projection of the row alone cannot tell a
/// matched OPTIONAL group from an unmatched one when the group has no
/// variables of its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    pub vals: Vec<OVal>,
    pub contrib: Vec<Option<TermTriple>>,
}

/// Bag of result rows, fixed arity, `None` for NULL/unbound.
pub type MappingSet = Vec<Vec<Option<Term>>>;

fn tp_match(tp: &TriplePattern, triple: &TermTriple, row: &Mapping) -> Option<Mapping> {
    let mut next = row.clone();
    for (pat, val) in [(&tp.s, &triple.0), (&tp.p, &triple.1), (&tp.o, &triple.2)] {
        match pat {
            PatTerm::Const(t) => {
                if t != val {
                    return None;
                }
            }
            PatTerm::Var(v) => match &next.vals[*v as usize] {
                OVal::Unbound => next.vals[*v as usize] = OVal::Bound(val.clone()),
                OVal::Bound(t) if t == val => {}
                _ => return None,
            },
        }
    }
    next.contrib[tp.id] = Some(triple.clone());
    Some(next)
}

/// All satisfying assignments of a basic graph pattern by exhaustive
/// nested-loop extension.
pub fn eval_bgp(
    graph: &BTreeSet<TermTriple>,
    tps: &[&TriplePattern],
    nvars: usize,
    ntps: usize,
) -> Vec<Mapping> {
    let mut rows = vec![Mapping { vals: vec![OVal::Unbound; nvars], contrib: vec![None; ntps] }];
    for tp in tps {
        let mut next = Vec::new();
        for row in &rows {
            for triple in graph {
                if let Some(r) = tp_match(tp, triple, row) {
                    next.push(r);
                }
            }
        }
        rows = next;
    }
    rows
}

fn compatible(a: &Mapping, b: &Mapping, conv: Convention) -> bool {
    a.vals.iter().zip(&b.vals).all(|(x, y)| match (x, y) {
        (OVal::Unbound, _) | (_, OVal::Unbound) => true,
        (OVal::Bound(t), OVal::Bound(u)) => t == u,
        // a shared variable that is NULL on either side kills the match
        (OVal::Null, _) | (_, OVal::Null) => conv == Convention::NullTolerant,
    })
}

fn merge(a: &Mapping, b: &Mapping) -> Mapping {
    let vals = a
        .vals
        .iter()
        .zip(&b.vals)
        .map(|(x, y)| match (x, y) {
            (OVal::Unbound, other) => other.clone(),
            (other, _) => other.clone(),
        })
        .collect();
    let contrib = a
        .contrib
        .iter()
        .zip(&b.contrib)
        .map(|(x, y)| x.clone().or_else(|| y.clone()))
        .collect();
    Mapping { vals, contrib }
}

pub fn eval_join(left: &[Mapping], right: &[Mapping], conv: Convention) -> Vec<Mapping> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            if compatible(l, r, conv) {
                out.push(merge(l, r));
            }
        }
    }
    out
}

/// Left join: compatible pairs merged, plus every left row with no partner,
/// padded with NULL over the right side's variables (union compatibility).
/// The tolerant convention leaves them unbound instead.
pub fn eval_left_join(
    left: &[Mapping],
    right: &[Mapping],
    right_vars: &BTreeSet<VarId>,
    conv: Convention,
) -> Vec<Mapping> {
    let mut out = Vec::new();
    for l in left {
        let mut matched = false;
        for r in right {
            if compatible(l, r, conv) {
                matched = true;
                out.push(merge(l, r));
            }
        }
        if !matched {
            let mut padded = l.clone();
            if conv == Convention::NullIntolerant {
                for v in right_vars {
                    if padded.vals[*v as usize] == OVal::Unbound {
                        padded.vals[*v as usize] = OVal::Null;
                    }
                }
            }
            out.push(padded);
        }
    }
    out
}

fn eval_node(graph: &BTreeSet<TermTriple>, query: &Query, node: usize, conv: Convention) -> Vec<Mapping> {
    match query.node(node) {
        Node::Bgp(tps) => {
            let pats: Vec<&TriplePattern> = tps.iter().map(|i| &query.patterns[*i]).collect();
            eval_bgp(graph, &pats, query.var_count(), query.patterns.len())
        }
        Node::Join(l, r) => {
            let lv = eval_node(graph, query, *l, conv);
            let rv = eval_node(graph, query, *r, conv);
            eval_join(&lv, &rv, conv)
        }
        Node::LeftJoin(l, r) => {
            let lv = eval_node(graph, query, *l, conv);
            let rv = eval_node(graph, query, *r, conv);
            eval_left_join(&lv, &rv, &query.subtree_vars(*r), conv)
        }
    }
}

pub fn row_values(m: &Mapping) -> Vec<Option<Term>> {
    m.vals
        .iter()
        .map(|v| match v {
            OVal::Bound(t) => Some(t.clone()),
            OVal::Null | OVal::Unbound => None,
        })
        .collect()
}

/// Full evaluation keeping the per-pattern contribution records.
pub fn eval_query_full(graph: &BTreeSet<TermTriple>, query: &Query, conv: Convention) -> Vec<Mapping> {
    eval_node(graph, query, query.root, conv)
}

/// Structural recursion over the unreordered tree; rows normalized to fixed
/// arity with explicit NULLs.
pub fn eval_query(graph: &BTreeSet<TermTriple>, query: &Query, conv: Convention) -> MappingSet {
    eval_query_full(graph, query, conv).iter().map(row_values).collect()
}

/// Distinct (s, p, o) triples a pattern contributes to the final results:
/// the minimality reference for the pattern's surviving triples. Where the
/// pattern's positions carry NULL the row contributes nothing, and an
/// OPTIONAL group left unmatched contributes nothing even when all its
/// positions are bound from outside.
pub fn projection_r_tp(
    results: &[Mapping],
    tp: &TriplePattern,
) -> BTreeSet<(Term, Term, Term)> {
    results.iter().filter_map(|m| m.contrib[tp.id].clone()).collect()
}

/// Multiset equality with NULL-aware slots.
pub fn bag_equal(a: &MappingSet, b: &MappingSet) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut x = a.clone();
    let mut y = b.clone();
    x.sort();
    y.sort();
    x == y
}

pub fn graph_from_triples(triples: &[TermTriple]) -> BTreeSet<TermTriple> {
    triples.iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntriples::parse_ntriples;
    use crate::query::parse_query;

    fn sitcom_graph() -> BTreeSet<TermTriple> {
        graph_from_triples(&parse_ntriples(include_str!("../tests/data/sitcoms.nt")).unwrap())
    }

    const Q2: &str = "SELECT * WHERE { <http://ex/Jerry> <http://ex/hasFriend> ?friend . \
        OPTIONAL { ?friend <http://ex/actedIn> ?sitcom . ?sitcom <http://ex/location> <http://ex/NewYorkCity> . } }";

    #[test]
    fn friend_pattern_has_two_bindings() {
        let g = sitcom_graph();
        let q = parse_query("SELECT * WHERE { <http://ex/Jerry> <http://ex/hasFriend> ?friend }").unwrap();
        let rows = eval_query(&g, &q, Convention::NullIntolerant);
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn optional_query_pads_with_null() {
        let g = sitcom_graph();
        let q = parse_query(Q2).unwrap();
        let mut rows = eval_query(&g, &q, Convention::NullIntolerant);
        rows.sort();
        assert_eq!(
            rows,
            vec![
                vec![Some(Term::iri("http://ex/Julia")), Some(Term::iri("http://ex/Seinfeld"))],
                vec![Some(Term::iri("http://ex/Larry")), None],
            ]
        );
    }

    #[test]
    fn empty_graph_yields_empty_set() {
        let g = BTreeSet::new();
        let q = parse_query("SELECT * WHERE { ?a <p> ?b }").unwrap();
        assert!(eval_query(&g, &q, Convention::NullIntolerant).is_empty());
    }

    #[test]
    fn unsatisfiable_constant_yields_empty_set() {
        let g = sitcom_graph();
        let q = parse_query("SELECT * WHERE { <http://ex/Nobody> <http://ex/hasFriend> ?f }").unwrap();
        assert!(eval_query(&g, &q, Convention::NullIntolerant).is_empty());
    }

    #[test]
    fn left_join_with_empty_right_preserves_cardinality() {
        let m = |v: OVal| Mapping { vals: vec![v, OVal::Unbound], contrib: vec![None] };
        let left = vec![m(OVal::Bound(Term::iri("a"))), m(OVal::Bound(Term::iri("b")))];
        let right: Vec<Mapping> = Vec::new();
        let rv: BTreeSet<VarId> = [1].into_iter().collect();
        let out = eval_left_join(&left, &right, &rv, Convention::NullIntolerant);
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|r| r.vals[1] == OVal::Null));
    }

    #[test]
    fn minimality_projection_on_the_running_example() {
        let g = sitcom_graph();
        let q = parse_query(Q2).unwrap();
        let rows = eval_query_full(&g, &q, Convention::NullIntolerant);
        let r_tp2 = projection_r_tp(&rows, &q.patterns[1]);
        assert_eq!(r_tp2.len(), 1);
        assert!(r_tp2.contains(&(
            Term::iri("http://ex/Julia"),
            Term::iri("http://ex/actedIn"),
            Term::iri("http://ex/Seinfeld")
        )));
        let r_tp1 = projection_r_tp(&rows, &q.patterns[0]);
        assert_eq!(r_tp1.len(), 2);
    }

    #[test]
    fn bag_equal_is_order_insensitive_and_multiplicity_aware() {
        let a = vec![vec![Some(Term::iri("x"))], vec![Some(Term::iri("y"))]];
        let b = vec![vec![Some(Term::iri("y"))], vec![Some(Term::iri("x"))]];
        assert!(bag_equal(&a, &b));
        let c = vec![vec![Some(Term::iri("x"))], vec![Some(Term::iri("x"))]];
        assert!(!bag_equal(&a, &c));
        let d = vec![vec![Some(Term::iri("x"))], vec![None]];
        assert!(!bag_equal(&a, &d));
    }

    #[test]
    fn conventions_agree_on_well_designed_queries() {
        let g = sitcom_graph();
        let q = parse_query(Q2).unwrap();
        let a = eval_query(&g, &q, Convention::NullIntolerant);
        let b = eval_query(&g, &q, Convention::NullTolerant);
        assert!(bag_equal(&a, &b));
    }
}
