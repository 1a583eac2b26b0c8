//! Join-variable graph and pattern graph: cyclicity decides which pruning
//! order is sound, connectivity rejects Cartesian products.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::query::{Node, Query, VarId};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    /// Returns false when the two were already connected (a cycle-closing edge).
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Graph of join variables: one node per variable occurring in two or more
/// patterns, one edge per pattern holding two join variables. Parallel edges
/// count as cycles.
#[derive(Debug, Clone)]
pub struct JoinVarGraph {
    pub jvars: Vec<VarId>,
    pub occurrences: BTreeMap<VarId, Vec<usize>>,
    pub edges: Vec<(VarId, VarId, usize)>,
}

impl JoinVarGraph {
    pub fn build(query: &Query) -> JoinVarGraph {
        let mut occ: BTreeMap<VarId, BTreeSet<usize>> = BTreeMap::new();
        for tp in &query.patterns {
            for v in tp.vars() {
                occ.entry(v).or_default().insert(tp.id);
            }
        }
        let occurrences: BTreeMap<VarId, Vec<usize>> = occ
            .into_iter()
            .filter(|(_, tps)| tps.len() >= 2)
            .map(|(v, tps)| (v, tps.into_iter().collect()))
            .collect();
        let jvars: Vec<VarId> = occurrences.keys().copied().collect();
        let mut edges = Vec::new();
        for tp in &query.patterns {
            let jv: Vec<VarId> =
                tp.vars().into_iter().filter(|v| occurrences.contains_key(v)).collect();
            if jv.len() == 2 {
                edges.push((jv[0].min(jv[1]), jv[0].max(jv[1]), tp.id));
            }
        }
        JoinVarGraph { jvars, occurrences, edges }
    }

    pub fn is_jvar(&self, v: VarId) -> bool {
        self.occurrences.contains_key(&v)
    }

    pub fn tps_of(&self, v: VarId) -> &[usize] {
        self.occurrences.get(&v).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn is_cyclic(&self) -> bool {
        let index: BTreeMap<VarId, usize> =
            self.jvars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut uf = UnionFind::new(self.jvars.len());
        for (a, b, _) in &self.edges {
            if !uf.union(index[a], index[b]) {
                return true;
            }
        }
        false
    }

    /// Simple-graph adjacency (parallel edges collapsed).
    pub fn adjacency(&self) -> BTreeMap<VarId, BTreeSet<VarId>> {
        let mut adj: BTreeMap<VarId, BTreeSet<VarId>> =
            self.jvars.iter().map(|v| (*v, BTreeSet::new())).collect();
        for (a, b, _) in &self.edges {
            adj.get_mut(a).unwrap().insert(*b);
            adj.get_mut(b).unwrap().insert(*a);
        }
        adj
    }
}

/// Graph of triple patterns. Patterns sharing a join variable are connected;
/// the clique each shared variable would induce is collapsed to a spanning
/// star so that same-variable multi-way joins do not read as cycles.
#[derive(Debug, Clone)]
pub struct PatternGraph {
    pub n_tps: usize,
    pub edges: Vec<(usize, usize, VarId)>,
}

impl PatternGraph {
    pub fn build(query: &Query) -> PatternGraph {
        let goj = JoinVarGraph::build(query);
        let mut edges = Vec::new();
        for (v, tps) in &goj.occurrences {
            for other in &tps[1..] {
                edges.push((tps[0], *other, *v));
            }
        }
        PatternGraph { n_tps: query.patterns.len(), edges }
    }

    pub fn has_cycle(&self) -> bool {
        let mut uf = UnionFind::new(self.n_tps);
        for (a, b, _) in &self.edges {
            if !uf.union(*a, *b) {
                return true;
            }
        }
        false
    }

    pub fn is_connected(&self) -> bool {
        if self.n_tps <= 1 {
            return true;
        }
        let mut uf = UnionFind::new(self.n_tps);
        for (a, b, _) in &self.edges {
            uf.union(*a, *b);
        }
        let root = uf.find(0);
        (1..self.n_tps).all(|i| uf.find(i) == root)
    }
}

/// Rejects Cartesian products. Connectivity of the pattern graph alone is
/// not enough: a join whose two sides only share variables through an
/// OPTIONAL group still multiplies unrelated bindings, so every BGP must be
/// internally connected and both sides of every operator must share a
/// variable directly.
pub fn cartesian_check(query: &Query) -> Result<()> {
    for node in &query.nodes {
        match node {
            Node::Bgp(tps) => {
                if tps.len() > 1 {
                    let mut uf = UnionFind::new(tps.len());
                    for (i, a) in tps.iter().enumerate() {
                        for (j, b) in tps.iter().enumerate().skip(i + 1) {
                            let pa = &query.patterns[*a];
                            let pb = &query.patterns[*b];
                            if pa.vars().iter().any(|v| pb.has_var(*v)) {
                                uf.union(i, j);
                            }
                        }
                    }
                    let root = uf.find(0);
                    if !(1..tps.len()).all(|i| uf.find(i) == root) {
                        return Err(Error::CartesianProduct(
                            "a basic graph pattern has patterns sharing no variable".into(),
                        ));
                    }
                }
            }
            Node::Join(l, r) | Node::LeftJoin(l, r) => {
                let lv = query.subtree_vars(*l);
                let rv = query.subtree_vars(*r);
                if lv.intersection(&rv).next().is_none() {
                    return Err(Error::CartesianProduct(
                        "join operands share no variable".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    #[test]
    fn two_pattern_chain_is_acyclic() {
        let q = parse_query(
            "SELECT * WHERE { <j> <f> ?friend OPTIONAL { ?friend <a> ?sitcom . ?sitcom <l> <nyc> } }",
        )
        .unwrap();
        let goj = JoinVarGraph::build(&q);
        assert_eq!(goj.jvars.len(), 2);
        assert_eq!(goj.edges.len(), 1);
        assert!(!goj.is_cyclic());
        assert!(!PatternGraph::build(&q).has_cycle());
    }

    #[test]
    fn triangle_is_cyclic() {
        let q = parse_query("SELECT * WHERE { ?a <p> ?b . ?b <q> ?c . ?a <r> ?c }").unwrap();
        let goj = JoinVarGraph::build(&q);
        assert!(goj.is_cyclic());
        assert!(PatternGraph::build(&q).has_cycle());
    }

    #[test]
    fn star_over_one_variable_is_acyclic() {
        let q = parse_query("SELECT * WHERE { ?a <p> <x> . ?a <q> <y> . ?a <r> <z> . ?a <s> ?b }")
            .unwrap();
        let goj = JoinVarGraph::build(&q);
        assert!(!goj.is_cyclic());
        assert!(!PatternGraph::build(&q).has_cycle(), "clique over ?a must collapse");
    }

    #[test]
    fn parallel_double_join_is_cyclic() {
        // two patterns joining over both variables cannot be reduced variable-wise
        let q = parse_query("SELECT * WHERE { ?a <p> ?b . ?a <q> ?b }").unwrap();
        let goj = JoinVarGraph::build(&q);
        assert!(goj.is_cyclic());
        assert!(PatternGraph::build(&q).has_cycle());
    }

    #[test]
    fn zero_jvar_query_is_acyclic() {
        let q = parse_query("SELECT * WHERE { ?a <p> ?b }").unwrap();
        let goj = JoinVarGraph::build(&q);
        assert!(goj.jvars.is_empty());
        assert!(!goj.is_cyclic());
    }

    #[test]
    fn cartesian_bgp_rejected() {
        let q = parse_query("SELECT * WHERE { ?a <p> ?b . ?c <q> ?d }").unwrap();
        assert!(matches!(cartesian_check(&q), Err(Error::CartesianProduct(_))));
    }

    #[test]
    fn cartesian_operator_rejected() {
        let q = parse_query("SELECT * WHERE { ?a <p> ?b OPTIONAL { ?c <q> ?d } }").unwrap();
        assert!(matches!(cartesian_check(&q), Err(Error::CartesianProduct(_))));
    }

    #[test]
    fn connected_query_passes() {
        let q = parse_query(
            "SELECT * WHERE { ?a <p> ?b . ?b <q> ?c OPTIONAL { ?c <r> ?d . ?d <s> ?e } }",
        )
        .unwrap();
        assert!(cartesian_check(&q).is_ok());
    }
}
