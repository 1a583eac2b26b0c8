//! Query planning: the supernode graph over OPT-free BGPs, well-designedness
//! checking and repair, join-variable graphs, and pruning orders.

mod jgraph;
mod order;
mod sngraph;

pub use jgraph::{cartesian_check, JoinVarGraph, PatternGraph};
pub use order::{rank_jvar_selectivity, JvarOrders, OrderKind, Selectivity};
pub use sngraph::{
    check_well_designed, transform_non_well_designed, Relation, Supernode, SupernodeGraph,
    Violation,
};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::index::IndexManifest;
use crate::query::Query;
use crate::term::Space;

/// Fully planned query: effective tree (non-well-designed left joins already
/// converted), graphs, selectivity and orders.
pub struct Plan {
    pub query: Query,
    pub gosn: SupernodeGraph,
    pub goj: JoinVarGraph,
    pub violations: Vec<Violation>,
    pub selectivity: Selectivity,
    pub orders: JvarOrders,
    pub cyclic: bool,
}

pub fn plan_query(query: &Query, dict: &Dictionary, manifest: &IndexManifest) -> Result<Plan> {
    join_space_check(query)?;
    cartesian_check(query)?;
    let gosn = SupernodeGraph::build(query);
    let violations = check_well_designed(query);
    let (gosn, query) = if violations.is_empty() {
        (gosn, query.clone())
    } else {
        transform_non_well_designed(&gosn, &violations, query)
    };
    let goj = JoinVarGraph::build(&query);
    let cyclic = goj.is_cyclic();
    let selectivity = rank_jvar_selectivity(&query, &goj, dict, manifest);
    let orders = order::get_jvar_order(&gosn, &goj, &selectivity, &query, cyclic);
    Ok(Plan { query, gosn, goj, violations, selectivity, orders, cyclic })
}

/// The tree the engine actually evaluates: non-well-designed left joins are
/// converted to inner joins along each violation path. Well-designed queries
/// come back unchanged. Needs no index data, so the oracle can share it.
pub fn effective_query(query: &Query) -> Query {
    let violations = check_well_designed(query);
    if violations.is_empty() {
        return query.clone();
    }
    let gosn = SupernodeGraph::build(query);
    transform_non_well_designed(&gosn, &violations, query).1
}

/// Nullification and best-match are only needed for a cyclic query in which
/// some non-absolute-master supernode holds two or more join variables.
pub fn decide_best_match_reqd(gosn: &SupernodeGraph, goj: &JoinVarGraph, query: &Query, cyclic: bool) -> bool {
    if !cyclic {
        return false;
    }
    gosn.supernodes.iter().enumerate().any(|(sn, node)| {
        if gosn.is_absolute_master(sn) {
            return false;
        }
        let jvars: std::collections::BTreeSet<_> = node
            .tps
            .iter()
            .flat_map(|tp| query.patterns[*tp].vars())
            .filter(|v| goj.is_jvar(*v))
            .collect();
        jvars.len() >= 2
    })
}

/// The engine only joins along matching coordinate spaces: a variable used in
/// the predicate position of one pattern and a subject/object position of
/// another has no shared space.
fn join_space_check(query: &Query) -> Result<()> {
    use std::collections::BTreeMap;
    let mut spaces: BTreeMap<u32, Vec<Space>> = BTreeMap::new();
    for tp in &query.patterns {
        for (term, space) in
            [(&tp.s, Space::Subject), (&tp.p, Space::Predicate), (&tp.o, Space::Object)]
        {
            if let Some(v) = term.var() {
                spaces.entry(v).or_default().push(space);
            }
        }
    }
    for (v, occ) in spaces {
        let pred = occ.contains(&Space::Predicate);
        let val = occ.iter().any(|s| *s != Space::Predicate);
        if pred && val {
            return Err(Error::UnsupportedPattern(format!(
                "variable ?{} joins a predicate position with a subject/object position",
                query.var_names[v as usize]
            )));
        }
    }
    Ok(())
}
