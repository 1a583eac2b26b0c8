//! Differential harness: run the engine and the reference evaluator on the
//! same case and compare bags. On divergence, greedily shrink the graph to a
//! small reproducer.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::exec::{run_query, RunOptions};
use crate::gen::triples_to_ntriples;
use crate::index::{build_index_dir, IndexStore};
use crate::ntriples::TermTriple;
use crate::oracle::{bag_equal, eval_query, graph_from_triples, Convention, MappingSet};
use crate::plan::effective_query;
use crate::query::parse_query;

pub struct Divergence {
    pub engine: MappingSet,
    pub oracle: MappingSet,
    pub minimized_triples: Vec<TermTriple>,
    pub query_text: String,
}

impl Divergence {
    pub fn dump(&self) -> String {
        let mut s = String::new();
        s.push_str("=== divergence ===\nquery:\n");
        s.push_str(&self.query_text);
        s.push_str("\nminimized graph:\n");
        s.push_str(&triples_to_ntriples(&self.minimized_triples));
        s.push_str(&format!("engine rows ({}):\n", self.engine.len()));
        for r in &self.engine {
            s.push_str(&format!("  {r:?}\n"));
        }
        s.push_str(&format!("oracle rows ({}):\n", self.oracle.len()));
        for r in &self.oracle {
            s.push_str(&format!("  {r:?}\n"));
        }
        s
    }
}

pub fn engine_rows(triples: &[TermTriple], query_text: &str) -> Result<MappingSet> {
    let dir = tempfile::tempdir().map_err(|e| crate::error::Error::io("create temp dir", e))?;
    build_index_dir(triples, dir.path())?;
    let store = IndexStore::open(dir.path())?;
    let out = run_query(&store, query_text, RunOptions::default())?;
    Ok(out.rows)
}

/// Engine against an existing (possibly stale or damaged) index, oracle
/// against the raw data. No shrinking: the divergence may live in the index
/// files rather than the graph.
pub fn verify_with_store(
    store: &IndexStore,
    triples: &[TermTriple],
    query_text: &str,
    convention: Convention,
) -> Result<Option<Divergence>> {
    let engine = run_query(store, query_text, RunOptions::default())?.rows;
    let oracle = oracle_rows(triples, query_text, convention)?;
    if bag_equal(&engine, &oracle) {
        return Ok(None);
    }
    Ok(Some(Divergence {
        engine,
        oracle,
        minimized_triples: triples.to_vec(),
        query_text: query_text.to_string(),
    }))
}

pub fn oracle_rows(
    triples: &[TermTriple],
    query_text: &str,
    convention: Convention,
) -> Result<MappingSet> {
    let query = parse_query(query_text)?;
    let effective = effective_query(&query);
    let graph = graph_from_triples(triples);
    Ok(eval_query(&graph, &effective, convention))
}

/// Compares engine and oracle on one case. `Ok(None)` means agreement.
pub fn verify_case(
    triples: &[TermTriple],
    query_text: &str,
    convention: Convention,
) -> Result<Option<Divergence>> {
    let engine = engine_rows(triples, query_text)?;
    let oracle = oracle_rows(triples, query_text, convention)?;
    if bag_equal(&engine, &oracle) {
        return Ok(None);
    }
    let minimized = shrink(triples, query_text, convention);
    Ok(Some(Divergence { engine, oracle, minimized_triples: minimized, query_text: query_text.to_string() }))
}

/// Drops triples one at a time while the divergence persists.
fn shrink(triples: &[TermTriple], query_text: &str, convention: Convention) -> Vec<TermTriple> {
    let diverges = |subset: &[TermTriple]| -> bool {
        match (engine_rows(subset, query_text), oracle_rows(subset, query_text, convention)) {
            (Ok(e), Ok(o)) => !bag_equal(&e, &o),
            _ => false,
        }
    };
    let mut current: Vec<TermTriple> = triples.to_vec();
    let mut i = 0;
    while i < current.len() {
        let mut candidate = current.clone();
        candidate.remove(i);
        if diverges(&candidate) {
            current = candidate;
        } else {
            i += 1;
        }
    }
    current
}

/// True when the engine's surviving per-pattern triples are exactly the
/// oracle's result projections (triple minimality).
pub fn check_minimality(
    triples: &[TermTriple],
    query_text: &str,
) -> Result<(bool, String)> {
    let dir = tempfile::tempdir().map_err(|e| crate::error::Error::io("create temp dir", e))?;
    build_index_dir(triples, dir.path())?;
    let store = IndexStore::open(dir.path())?;
    let out = run_query(&store, query_text, RunOptions::default())?;

    let query = parse_query(query_text)?;
    let effective = effective_query(&query);
    let graph = graph_from_triples(triples);
    let oracle = crate::oracle::eval_query_full(&graph, &effective, Convention::NullIntolerant);

    if out.stats.early_abort {
        let ok = oracle.is_empty();
        return Ok((ok, if ok { "early abort, oracle empty".into() } else { "early abort but oracle non-empty".into() }));
    }

    for tp in &effective.patterns {
        let want = crate::oracle::projection_r_tp(&oracle, tp);
        let got: BTreeSet<(crate::term::Term, crate::term::Term, crate::term::Term)> =
            out.per_tp_triples[tp.id].iter().cloned().collect();
        if got != want {
            return Ok((
                false,
                format!(
                    "pattern {} keeps {} triples, result projection has {}",
                    tp.id,
                    got.len(),
                    want.len()
                ),
            ));
        }
    }
    Ok((true, String::new()))
}
