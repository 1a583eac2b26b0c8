//! Graph of supernodes: one node per OPT-free BGP, a directed edge per
//! left-outer join (master to slave), an undirected edge per inner join.

use std::collections::{BTreeSet, VecDeque};

use crate::query::{Node, Query, VarId};

#[derive(Debug, Clone)]
pub struct Supernode {
    /// Triple patterns encapsulated by this supernode, in query order.
    pub tps: Vec<usize>,
    /// Arena id of the BGP leaf.
    pub bgp_node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniEdge {
    pub from: usize,
    pub to: usize,
    /// The LeftJoin node this edge was created for.
    pub ast_node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Master,
    Slave,
    Peer,
    Unrelated,
}

#[derive(Debug, Clone)]
pub struct SupernodeGraph {
    pub supernodes: Vec<Supernode>,
    pub uni_edges: Vec<UniEdge>,
    pub bi_edges: Vec<(usize, usize)>,
    pub sn_of_tp: Vec<usize>,
    absolute: Vec<bool>,
}

impl SupernodeGraph {
    pub fn build(query: &Query) -> SupernodeGraph {
        let mut supernodes = Vec::new();
        let mut sn_of_node = vec![usize::MAX; query.nodes.len()];
        collect_leaves(query, query.root, &mut supernodes, &mut sn_of_node);

        let mut sn_of_tp = vec![usize::MAX; query.patterns.len()];
        for (i, sn) in supernodes.iter().enumerate() {
            for tp in &sn.tps {
                sn_of_tp[*tp] = i;
            }
        }

        let mut g = SupernodeGraph {
            supernodes,
            uni_edges: Vec::new(),
            bi_edges: Vec::new(),
            sn_of_tp,
            absolute: Vec::new(),
        };
        // Operators innermost-first: children before their parent.
        add_edges(query, query.root, &sn_of_node, &mut g);
        g.recompute_absolute();
        g
    }

    pub fn sn_count(&self) -> usize {
        self.supernodes.len()
    }

    /// Master relation: `to` is reachable from `from` along edges (directed
    /// ones forward, undirected ones both ways) using at least one directed
    /// edge.
    pub fn master_of(&self, from: usize, to: usize) -> bool {
        if from == to {
            return false;
        }
        // BFS over (node, used-a-directed-edge) states.
        let n = self.sn_count();
        let mut seen = vec![[false; 2]; n];
        let mut queue = VecDeque::new();
        seen[from][0] = true;
        queue.push_back((from, false));
        while let Some((at, used)) = queue.pop_front() {
            if at == to && used {
                return true;
            }
            for e in &self.uni_edges {
                if e.from == at && !seen[e.to][1] {
                    seen[e.to][1] = true;
                    queue.push_back((e.to, true));
                }
            }
            for (a, b) in &self.bi_edges {
                for (x, y) in [(a, b), (b, a)] {
                    if *x == at && !seen[*y][used as usize] {
                        seen[*y][used as usize] = true;
                        queue.push_back((*y, used));
                    }
                }
            }
        }
        false
    }

    /// Peer relation: mutually reachable along undirected edges only. A
    /// supernode is trivially a peer of itself.
    pub fn peer_of(&self, a: usize, b: usize) -> bool {
        self.peer_classes()[a] == self.peer_classes()[b]
    }

    pub fn peer_classes(&self) -> Vec<usize> {
        let n = self.sn_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        for (a, b) in &self.bi_edges {
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..n).map(|i| find(&mut parent, i)).collect()
    }

    pub fn classify(&self, x: usize, y: usize) -> Relation {
        if self.master_of(x, y) {
            Relation::Master
        } else if self.master_of(y, x) {
            Relation::Slave
        } else if self.peer_of(x, y) {
            Relation::Peer
        } else {
            Relation::Unrelated
        }
    }

    pub fn classify_tps(&self, tp_x: usize, tp_y: usize) -> Relation {
        self.classify(self.sn_of_tp[tp_x], self.sn_of_tp[tp_y])
    }

    fn recompute_absolute(&mut self) {
        let n = self.sn_count();
        self.absolute = (0..n)
            .map(|y| (0..n).all(|x| x == y || !self.master_of(x, y)))
            .collect();
    }

    pub fn is_absolute_master(&self, sn: usize) -> bool {
        self.absolute[sn]
    }

    pub fn absolute_masters(&self) -> Vec<usize> {
        (0..self.sn_count()).filter(|i| self.absolute[*i]).collect()
    }

    /// Depth of each supernode's peer class in the hierarchy: absolute-master
    /// classes sit at 0, every directed edge pushes its target at least one
    /// level further down (longest path).
    pub fn hierarchy_depth(&self) -> Vec<usize> {
        let classes = self.peer_classes();
        let n = self.sn_count();
        let mut depth = vec![0usize; n];
        // Longest-path relaxation; the class DAG is acyclic, n+1 passes suffice.
        for _ in 0..=n {
            let mut changed = false;
            for e in &self.uni_edges {
                for y in 0..n {
                    if classes[y] == classes[e.to] && depth[y] < depth[e.from] + 1 {
                        depth[y] = depth[e.from] + 1;
                        changed = true;
                    }
                }
            }
            // peers share a level
            for a in 0..n {
                for b in 0..n {
                    if classes[a] == classes[b] && depth[b] < depth[a] {
                        depth[b] = depth[a];
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        depth
    }

    /// Unique undirected path between two supernodes (the graph is a tree).
    fn undirected_path(&self, from: usize, to: usize) -> Vec<(usize, usize)> {
        let n = self.sn_count();
        let mut prev = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        prev[from] = from;
        queue.push_back(from);
        while let Some(at) = queue.pop_front() {
            if at == to {
                break;
            }
            let mut neighbors = Vec::new();
            for e in &self.uni_edges {
                if e.from == at {
                    neighbors.push(e.to);
                }
                if e.to == at {
                    neighbors.push(e.from);
                }
            }
            for (a, b) in &self.bi_edges {
                if *a == at {
                    neighbors.push(*b);
                }
                if *b == at {
                    neighbors.push(*a);
                }
            }
            for nb in neighbors {
                if prev[nb] == usize::MAX {
                    prev[nb] = at;
                    queue.push_back(nb);
                }
            }
        }
        let mut path = Vec::new();
        let mut at = to;
        while at != from {
            let p = prev[at];
            debug_assert_ne!(p, usize::MAX, "supernode graph must be connected");
            path.push((p, at));
            at = p;
        }
        path.reverse();
        path
    }
}

fn collect_leaves(
    query: &Query,
    node: usize,
    supernodes: &mut Vec<Supernode>,
    sn_of_node: &mut [usize],
) {
    match query.node(node) {
        Node::Bgp(tps) => {
            sn_of_node[node] = supernodes.len();
            supernodes.push(Supernode { tps: tps.clone(), bgp_node: node });
        }
        Node::Join(l, r) | Node::LeftJoin(l, r) => {
            collect_leaves(query, *l, supernodes, sn_of_node);
            collect_leaves(query, *r, supernodes, sn_of_node);
        }
    }
}

fn leftmost_leaf(query: &Query, node: usize, sn_of_node: &[usize]) -> usize {
    match query.node(node) {
        Node::Bgp(_) => sn_of_node[node],
        Node::Join(l, _) | Node::LeftJoin(l, _) => leftmost_leaf(query, *l, sn_of_node),
    }
}

fn add_edges(query: &Query, node: usize, sn_of_node: &[usize], g: &mut SupernodeGraph) {
    match query.node(node) {
        Node::Bgp(_) => {}
        Node::Join(l, r) => {
            add_edges(query, *l, sn_of_node, g);
            add_edges(query, *r, sn_of_node, g);
            g.bi_edges.push((leftmost_leaf(query, *l, sn_of_node), leftmost_leaf(query, *r, sn_of_node)));
        }
        Node::LeftJoin(l, r) => {
            add_edges(query, *l, sn_of_node, g);
            add_edges(query, *r, sn_of_node, g);
            g.uni_edges.push(UniEdge {
                from: leftmost_leaf(query, *l, sn_of_node),
                to: leftmost_leaf(query, *r, sn_of_node),
                ast_node: node,
            });
        }
    }
}

/// A well-designedness violation: the supernode in an OPTIONAL right side
/// whose variable leaks outside without appearing on the left side, and the
/// outside supernode it leaks into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub inner_sn: usize,
    pub outer_sn: usize,
    pub var: VarId,
}

pub fn check_well_designed(query: &Query) -> Vec<Violation> {
    let gosn_leaves = {
        let mut supernodes = Vec::new();
        let mut sn_of_node = vec![usize::MAX; query.nodes.len()];
        collect_leaves(query, query.root, &mut supernodes, &mut sn_of_node);
        let mut sn_of_tp = vec![usize::MAX; query.patterns.len()];
        for (i, sn) in supernodes.iter().enumerate() {
            for tp in &sn.tps {
                sn_of_tp[*tp] = i;
            }
        }
        sn_of_tp
    };

    let mut violations = BTreeSet::new();
    for (node_id, node) in query.nodes.iter().enumerate() {
        let (l, r) = match node {
            Node::LeftJoin(l, r) => (*l, *r),
            _ => continue,
        };
        let inside: BTreeSet<usize> = query.subtree_tps(node_id).into_iter().collect();
        let left_vars = query.subtree_vars(l);
        let right_tps = query.subtree_tps(r);
        for v in query.subtree_vars(r) {
            if left_vars.contains(&v) {
                continue;
            }
            let outside_tps: Vec<usize> = (0..query.patterns.len())
                .filter(|tp| !inside.contains(tp) && query.patterns[*tp].has_var(v))
                .collect();
            if outside_tps.is_empty() {
                continue;
            }
            for rt in right_tps.iter().filter(|tp| query.patterns[**tp].has_var(v)) {
                for ot in &outside_tps {
                    violations.insert(Violation {
                        inner_sn: gosn_leaves[*rt],
                        outer_sn: gosn_leaves[*ot],
                        var: v,
                    });
                }
            }
        }
    }
    violations.into_iter().collect()
}

/// Repairs a non-well-designed query: along the unique undirected path
/// between each violation pair, every directed edge becomes undirected, and
/// the left joins those edges stood for become inner joins in the returned
/// query. Converting never goes the other way, so reapplication is a no-op.
pub fn transform_non_well_designed(
    gosn: &SupernodeGraph,
    violations: &[Violation],
    query: &Query,
) -> (SupernodeGraph, Query) {
    let mut g = gosn.clone();
    let mut converted_nodes = BTreeSet::new();
    for v in violations {
        let path = g.undirected_path(v.inner_sn, v.outer_sn);
        let mut i = 0;
        while i < g.uni_edges.len() {
            let e = g.uni_edges[i];
            let on_path = path
                .iter()
                .any(|(a, b)| (e.from == *a && e.to == *b) || (e.from == *b && e.to == *a));
            if on_path {
                converted_nodes.insert(e.ast_node);
                g.bi_edges.push((e.from, e.to));
                g.uni_edges.remove(i);
            } else {
                i += 1;
            }
        }
    }
    g.recompute_absolute();
    (g, query.with_leftjoins_converted(&converted_nodes))
}
