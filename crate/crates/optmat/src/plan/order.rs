//! Join-variable selectivity ranking and the pruning orders driving the
//! bottom-up and top-down semi-join passes.

use std::collections::{BTreeMap, BTreeSet};

use crate::dictionary::Dictionary;
use crate::index::IndexManifest;
use crate::bitmat::Family;
use crate::query::{PatTerm, Query, TriplePattern, VarId};
use crate::term::Space;

use super::jgraph::JoinVarGraph;
use super::sngraph::{Relation, SupernodeGraph};

#[derive(Debug, Clone)]
pub struct Selectivity {
    /// Manifest-based estimate of matching triples per pattern, no index
    /// slice is ever loaded for ranking.
    pub tp_counts: Vec<u64>,
    /// Join variables, most selective first.
    pub ranked: Vec<VarId>,
    rank: BTreeMap<VarId, usize>,
}

impl Selectivity {
    pub fn rank(&self, v: VarId) -> usize {
        self.rank.get(&v).copied().unwrap_or(usize::MAX)
    }
}

pub fn estimate_tp_count(tp: &TriplePattern, dict: &Dictionary, manifest: &IndexManifest) -> u64 {
    let enc = |t: &PatTerm, space: Space| -> Option<Option<u32>> {
        match t {
            PatTerm::Var(_) => Some(None),
            PatTerm::Const(term) => dict.encode(term, space).map(Some),
        }
    };
    let (Some(s), Some(p), Some(o)) = (
        enc(&tp.s, Space::Subject),
        enc(&tp.p, Space::Predicate),
        enc(&tp.o, Space::Object),
    ) else {
        return 0; // a constant absent from the graph matches nothing
    };
    let mut bounds = Vec::new();
    if let Some(p) = p {
        bounds.push(manifest.count(Family::So, p));
    }
    if let Some(s) = s {
        bounds.push(manifest.count(Family::Po, s));
    }
    if let Some(o) = o {
        bounds.push(manifest.count(Family::Ps, o));
    }
    bounds.into_iter().min().unwrap_or(0)
}

/// Ranks join variables: compare the ascending vectors of their patterns'
/// triple counts lexicographically, break full ties by variable name.
pub fn rank_jvar_selectivity(
    query: &Query,
    goj: &JoinVarGraph,
    dict: &Dictionary,
    manifest: &IndexManifest,
) -> Selectivity {
    let tp_counts: Vec<u64> =
        query.patterns.iter().map(|tp| estimate_tp_count(tp, dict, manifest)).collect();
    let mut keyed: Vec<(Vec<u64>, String, VarId)> = goj
        .jvars
        .iter()
        .map(|v| {
            let mut counts: Vec<u64> =
                goj.tps_of(*v).iter().map(|tp| tp_counts[*tp]).collect();
            counts.sort_unstable();
            (counts, query.var_names[*v as usize].clone(), *v)
        })
        .collect();
    keyed.sort();
    let ranked: Vec<VarId> = keyed.into_iter().map(|(_, _, v)| v).collect();
    let rank = ranked.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    Selectivity { tp_counts, ranked, rank }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    /// Acyclic: bottom-up and top-down passes over induced subtrees.
    Tree,
    /// Cyclic: one greedy most-selective-first order used for both passes.
    Greedy,
}

#[derive(Debug, Clone)]
pub struct JvarOrders {
    pub kind: OrderKind,
    /// Segments: the absolute-master subtree first, then one per slave
    /// supernode. A variable may reappear across segments and is processed
    /// each time.
    pub bottom_up: Vec<Vec<VarId>>,
    pub top_down: Vec<Vec<VarId>>,
}

impl JvarOrders {
    pub fn flat_bottom_up(&self) -> Vec<VarId> {
        self.bottom_up.iter().flatten().copied().collect()
    }

    pub fn flat_top_down(&self) -> Vec<VarId> {
        self.top_down.iter().flatten().copied().collect()
    }

    /// First position of a variable in the flattened bottom-up order.
    pub fn first_position(&self, v: VarId) -> Option<usize> {
        self.flat_bottom_up().iter().position(|x| *x == v)
    }
}

struct Tree {
    var: VarId,
    children: Vec<Tree>,
}

fn build_tree(
    adj: &BTreeMap<VarId, BTreeSet<VarId>>,
    set: &BTreeSet<VarId>,
    root: VarId,
    sel: &Selectivity,
    visited: &mut BTreeSet<VarId>,
) -> Tree {
    visited.insert(root);
    let mut kids: Vec<VarId> = adj
        .get(&root)
        .map(|ns| {
            ns.iter().copied().filter(|n| set.contains(n) && !visited.contains(n)).collect()
        })
        .unwrap_or_default();
    kids.sort_by_key(|v| (sel.rank(*v), *v));
    let mut children = Vec::new();
    for k in kids {
        if !visited.contains(&k) {
            children.push(build_tree(adj, set, k, sel, visited));
        }
    }
    Tree { var: root, children }
}

/// Spanning forest of the induced subgraph over `set`, first tree rooted at
/// `root`. The graph is acyclic whenever this is called, so the forest is
/// exactly the induced subgraph.
fn induced_forest(
    adj: &BTreeMap<VarId, BTreeSet<VarId>>,
    set: &BTreeSet<VarId>,
    root: VarId,
    sel: &Selectivity,
) -> Vec<Tree> {
    let mut visited = BTreeSet::new();
    let mut forest = vec![build_tree(adj, set, root, sel, &mut visited)];
    // leftover components: least selective member roots each
    while let Some(next) = set
        .iter()
        .copied()
        .filter(|v| !visited.contains(v))
        .max_by_key(|v| (sel.rank(*v), std::cmp::Reverse(*v)))
    {
        forest.push(build_tree(adj, set, next, sel, &mut visited));
    }
    forest
}

fn post_order(tree: &Tree, out: &mut Vec<VarId>) {
    for c in &tree.children {
        post_order(c, out);
    }
    out.push(tree.var);
}

fn pre_order(tree: &Tree, out: &mut Vec<VarId>) {
    out.push(tree.var);
    for c in &tree.children {
        pre_order(c, out);
    }
}

fn forest_order(forest: &[Tree], f: fn(&Tree, &mut Vec<VarId>)) -> Vec<VarId> {
    let mut out = Vec::new();
    for t in forest {
        f(t, &mut out);
    }
    out
}

fn jvars_of_sn(sn: usize, gosn: &SupernodeGraph, goj: &JoinVarGraph, query: &Query) -> BTreeSet<VarId> {
    gosn.supernodes[sn]
        .tps
        .iter()
        .flat_map(|tp| query.patterns[*tp].vars())
        .filter(|v| goj.is_jvar(*v))
        .collect()
}

pub fn get_jvar_order(
    gosn: &SupernodeGraph,
    goj: &JoinVarGraph,
    sel: &Selectivity,
    query: &Query,
    cyclic: bool,
) -> JvarOrders {
    if cyclic {
        let greedy = sel.ranked.clone();
        return JvarOrders {
            kind: OrderKind::Greedy,
            bottom_up: vec![greedy.clone()],
            top_down: vec![greedy],
        };
    }

    let adj = goj.adjacency();
    let mut bottom_up = Vec::new();
    let mut top_down = Vec::new();

    let master_jvars: BTreeSet<VarId> = gosn
        .absolute_masters()
        .into_iter()
        .flat_map(|sn| jvars_of_sn(sn, gosn, goj, query))
        .collect();
    if let Some(root) = master_jvars
        .iter()
        .copied()
        .max_by_key(|v| (sel.rank(*v), std::cmp::Reverse(*v)))
    {
        // least selective root is processed last in the bottom-up pass
        let forest = induced_forest(&adj, &master_jvars, root, sel);
        bottom_up.push(forest_order(&forest, post_order));
        top_down.push(forest_order(&forest, pre_order));
    }

    // Remaining supernodes: masters before their slaves, then by their most
    // selective pattern, then by id.
    let depth = gosn.hierarchy_depth();
    let mut slaves: Vec<usize> =
        (0..gosn.sn_count()).filter(|sn| !gosn.is_absolute_master(*sn)).collect();
    slaves.sort_by_key(|sn| {
        let min_count = gosn.supernodes[*sn]
            .tps
            .iter()
            .map(|tp| sel.tp_counts[*tp])
            .min()
            .unwrap_or(u64::MAX);
        (depth[*sn], min_count, *sn)
    });

    let mut seen: BTreeSet<VarId> = master_jvars.clone();
    for sn in slaves {
        let j_s = jvars_of_sn(sn, gosn, goj, query);
        if j_s.is_empty() {
            continue;
        }
        // root: a variable shared with a master of this supernode, most
        // selective first; connected queries always have one, the fallbacks
        // keep odd shapes deterministic
        let shared_with_master: BTreeSet<VarId> = (0..gosn.sn_count())
            .filter(|m| gosn.classify(*m, sn) == Relation::Master)
            .flat_map(|m| jvars_of_sn(m, gosn, goj, query))
            .collect();
        let root = j_s
            .iter()
            .copied()
            .filter(|v| shared_with_master.contains(v))
            .min_by_key(|v| (sel.rank(*v), *v))
            .or_else(|| {
                j_s.iter().copied().filter(|v| seen.contains(v)).min_by_key(|v| (sel.rank(*v), *v))
            })
            .or_else(|| j_s.iter().copied().min_by_key(|v| (sel.rank(*v), *v)))
            .unwrap();
        let forest = induced_forest(&adj, &j_s, root, sel);
        bottom_up.push(forest_order(&forest, post_order));
        top_down.push(forest_order(&forest, pre_order));
        seen.extend(j_s);
    }

    JvarOrders { kind: OrderKind::Tree, bottom_up, top_down }
}
