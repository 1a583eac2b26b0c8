//! Deterministic generator of random graphs and queries with declared class
//! labels. Queries are grown well-designed by construction (fresh variables
//! inside an OPTIONAL group never escape it) and classified after the fact;
//! class constraints are met by rejection sampling over a seeded stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

use crate::ntriples::TermTriple;
use crate::plan::{check_well_designed, JoinVarGraph, SupernodeGraph};
use crate::query::{parse_query, Query};
use crate::term::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryClass {
    /// Well-designed, acyclic join-variable graph.
    AcyclicWd,
    /// Well-designed, cyclic join-variable graph.
    CyclicWd,
    /// Cyclic and every non-absolute-master supernode has exactly one join
    /// variable.
    CyclicSingleJvarSlave,
    /// Well-designed, any cyclicity.
    MixedWd,
    /// At least one well-designedness violation.
    Nwd,
    /// Well-designed with an unsatisfiable pattern in an absolute master.
    EmptyMaster,
}

impl QueryClass {
    pub fn parse(s: &str) -> Option<QueryClass> {
        Some(match s {
            "acyclic-wd" => QueryClass::AcyclicWd,
            "cyclic-wd" => QueryClass::CyclicWd,
            "cyclic-single-jvar-slave" => QueryClass::CyclicSingleJvarSlave,
            "mixed-wd" => QueryClass::MixedWd,
            "nwd" => QueryClass::Nwd,
            "empty-master" => QueryClass::EmptyMaster,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            QueryClass::AcyclicWd => "acyclic-wd",
            QueryClass::CyclicWd => "cyclic-wd",
            QueryClass::CyclicSingleJvarSlave => "cyclic-single-jvar-slave",
            QueryClass::MixedWd => "mixed-wd",
            QueryClass::Nwd => "nwd",
            QueryClass::EmptyMaster => "empty-master",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub n_triples: usize,
    pub n_terms: usize,
    pub n_preds: usize,
    pub max_tps: usize,
    pub max_opt_depth: usize,
    pub class: QueryClass,
}

impl GenParams {
    pub fn class(class: QueryClass) -> GenParams {
        GenParams { n_triples: 50, n_terms: 9, n_preds: 3, max_tps: 8, max_opt_depth: 3, class }
    }
}

pub struct GenCase {
    pub triples: Vec<TermTriple>,
    pub query_text: String,
    pub query: Query,
    pub class: QueryClass,
}

// -------------------------------------------------------------------------
// graph

fn gen_graph(rng: &mut ChaCha8Rng, p: &GenParams) -> Vec<TermTriple> {
    let node = |i: usize| Term::iri(format!("http://g/n{i}"));
    let pred = |i: usize| Term::iri(format!("http://g/p{i}"));
    let mut set: BTreeSet<TermTriple> = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..p.n_triples * 3 {
        if out.len() >= p.n_triples {
            break;
        }
        let s = node(rng.gen_range(0..p.n_terms));
        let pr = pred(rng.gen_range(0..p.n_preds));
        let o = if rng.gen_bool(0.12) {
            Term::literal(format!("\"lit{}\"", rng.gen_range(0..6)))
        } else {
            node(rng.gen_range(0..p.n_terms))
        };
        let t = (s, pr, o);
        if set.insert(t.clone()) {
            out.push(t);
        }
    }
    out
}

// -------------------------------------------------------------------------
// query tree

#[derive(Debug, Clone)]
enum Shape {
    Leaf(usize),
    Op { left_join: bool, l: Box<Shape>, r: Box<Shape> },
}

fn gen_shape(rng: &mut ChaCha8Rng, budget: usize, opt_left: usize, force_leaf_slaves: bool, in_slave: bool) -> Shape {
    let must_split = budget > 3;
    let leaf_limit = if in_slave && force_leaf_slaves { 2 } else { 3 };
    if (!must_split && (budget < 2 || rng.gen_bool(0.45))) || (in_slave && force_leaf_slaves) {
        return Shape::Leaf(budget.min(rng.gen_range(1..=leaf_limit)).max(1));
    }
    let left_join = opt_left > 0 && rng.gen_bool(0.55);
    let bl = rng.gen_range(1..budget);
    let next_opt = if left_join { opt_left - 1 } else { opt_left };
    let l = gen_shape(rng, bl, next_opt, force_leaf_slaves, in_slave);
    let r = gen_shape(rng, budget - bl, next_opt, force_leaf_slaves, in_slave || left_join);
    Shape::Op { left_join, l: Box::new(l), r: Box::new(r) }
}

#[derive(Debug, Clone)]
enum GTerm {
    Var(usize),
    Const(Term),
}

#[derive(Debug, Clone)]
struct GTp {
    s: GTerm,
    p: Term,
    o: GTerm,
}

#[derive(Debug, Clone)]
enum FillNode {
    Bgp(Vec<GTp>),
    Op { left_join: bool, l: Box<FillNode>, r: Box<FillNode> },
}

struct Filler<'a> {
    rng: &'a mut ChaCha8Rng,
    graph: &'a [TermTriple],
    var_scope: Vec<usize>,
    scope_stack: Vec<usize>,
    next_scope: usize,
    reuse_p: f64,
    single_jvar_slaves: bool,
}

impl<'a> Filler<'a> {
    fn new_var(&mut self) -> usize {
        let scope = *self.scope_stack.last().unwrap();
        self.var_scope.push(scope);
        self.var_scope.len() - 1
    }

    fn visible(&self) -> Vec<usize> {
        self.var_scope
            .iter()
            .enumerate()
            .filter(|(_, sc)| self.scope_stack.contains(sc))
            .map(|(v, _)| v)
            .collect()
    }

    fn template(&mut self) -> TermTriple {
        self.graph[self.rng.gen_range(0..self.graph.len())].clone()
    }

    /// Constant for one position, usually taken from the same template
    /// triple as the predicate so the pattern matches something.
    fn position_const(&mut self, template: &TermTriple, subject: bool) -> Term {
        let roll: f64 = self.rng.gen();
        if roll < 0.05 {
            return Term::iri("http://g/absent");
        }
        if roll < 0.15 {
            let t = self.template();
            return if subject { t.0 } else { t.2 };
        }
        if subject {
            template.0.clone()
        } else {
            template.2.clone()
        }
    }

    fn other_position(&mut self, template: &TermTriple, in_slave_leaf: bool, subject: bool) -> GTerm {
        if in_slave_leaf && self.single_jvar_slaves {
            // only non-join material next to the anchor
            return if self.rng.gen_bool(0.5) {
                GTerm::Var(self.new_var())
            } else {
                GTerm::Const(self.position_const(template, subject))
            };
        }
        let visible = self.visible();
        let roll: f64 = self.rng.gen();
        if roll < self.reuse_p && !visible.is_empty() {
            GTerm::Var(visible[self.rng.gen_range(0..visible.len())])
        } else if roll < self.reuse_p + 0.42 {
            GTerm::Var(self.new_var())
        } else {
            GTerm::Const(self.position_const(template, subject))
        }
    }

    fn fill(&mut self, shape: &Shape, link: Option<usize>, in_slave: bool) -> (FillNode, Vec<usize>) {
        match shape {
            Shape::Leaf(k) => {
                let mut tps = Vec::new();
                let mut bgp_vars: Vec<usize> = Vec::new();
                for i in 0..*k {
                    let anchor: usize = if i == 0 {
                        match link {
                            Some(v) => v,
                            None => self.new_var(),
                        }
                    } else if in_slave && self.single_jvar_slaves {
                        link.unwrap_or(bgp_vars[0])
                    } else {
                        bgp_vars[self.rng.gen_range(0..bgp_vars.len())]
                    };
                    let anchor_subject = self.rng.gen_bool(0.5);
                    let template = self.template();
                    let p = template.1.clone();
                    let (s, o) = if anchor_subject {
                        let o = self.other_position(&template, in_slave, false);
                        (GTerm::Var(anchor), o)
                    } else {
                        let s = self.other_position(&template, in_slave, true);
                        (s, GTerm::Var(anchor))
                    };
                    for t in [&s, &o] {
                        if let GTerm::Var(v) = t {
                            if !bgp_vars.contains(v) {
                                bgp_vars.push(*v);
                            }
                        }
                    }
                    tps.push(GTp { s, p, o });
                }
                (FillNode::Bgp(tps), bgp_vars)
            }
            Shape::Op { left_join, l, r } => {
                let (fl, vl) = self.fill(l, link, in_slave);
                let link_r = vl[self.rng.gen_range(0..vl.len())];
                let (fr, vr) = if *left_join {
                    self.next_scope += 1;
                    let sc = self.next_scope;
                    self.scope_stack.push(sc);
                    let out = self.fill(r, Some(link_r), true);
                    self.scope_stack.pop();
                    out
                } else {
                    self.fill(r, Some(link_r), in_slave)
                };
                let mut vars = vl;
                for v in vr {
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
                (FillNode::Op { left_join: *left_join, l: Box::new(fl), r: Box::new(fr) }, vars)
            }
        }
    }
}

fn gterm_text(t: &GTerm) -> String {
    match t {
        GTerm::Var(v) => format!("?v{v}"),
        GTerm::Const(c) => c.to_string(),
    }
}

fn tp_text(tp: &GTp) -> String {
    format!("{} <{}> {}", gterm_text(&tp.s), tp.p.lexical, gterm_text(&tp.o))
}

fn emit(node: &FillNode) -> String {
    match node {
        FillNode::Bgp(tps) => tps.iter().map(tp_text).collect::<Vec<_>>().join(" . "),
        FillNode::Op { left_join, l, r } => {
            let op = if *left_join { "OPTIONAL " } else { "" };
            format!("{} {}{{ {} }}", emit(l), op, emit(r))
        }
    }
}

fn leftmost_bgp_mut(node: &mut FillNode) -> &mut Vec<GTp> {
    match node {
        FillNode::Bgp(tps) => tps,
        FillNode::Op { l, .. } => leftmost_bgp_mut(l),
    }
}

/// Collects variables whose home scope is an OPTIONAL right side, together
/// with a mutable handle location path; used for breaking well-designedness.
fn scoped_var(filler_scopes: &[usize], vars_in_root: &BTreeSet<usize>) -> Option<usize> {
    filler_scopes
        .iter()
        .enumerate()
        .find(|(v, sc)| **sc != 0 && !vars_in_root.contains(v))
        .map(|(v, _)| v)
}

fn classify_case(text: &str) -> Option<(Query, bool, bool, bool)> {
    let query = parse_query(text).ok()?;
    crate::plan::cartesian_check(&query).ok()?;
    let wd = check_well_designed(&query).is_empty();
    let goj = JoinVarGraph::build(&query);
    let cyclic = goj.is_cyclic();
    let gosn = SupernodeGraph::build(&query);
    let single_jvar_slaves = (0..gosn.sn_count()).all(|sn| {
        if gosn.is_absolute_master(sn) {
            return true;
        }
        let jv: BTreeSet<u32> = gosn.supernodes[sn]
            .tps
            .iter()
            .flat_map(|tp| query.patterns[*tp].vars())
            .filter(|v| goj.is_jvar(*v))
            .collect();
        jv.len() == 1
    });
    Some((query, wd, cyclic, single_jvar_slaves))
}

/// Deterministically generates one (graph, query) case of the requested
/// class. The same seed and parameters always yield the same case.
pub fn generate_case(seed: u64, params: &GenParams) -> GenCase {
    for attempt in 0..4000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(attempt));
        let graph = gen_graph(&mut rng, params);
        if graph.is_empty() {
            continue;
        }
        let wants_cycles = matches!(
            params.class,
            QueryClass::CyclicWd | QueryClass::CyclicSingleJvarSlave
        );
        let reuse_p = match params.class {
            QueryClass::CyclicWd | QueryClass::CyclicSingleJvarSlave => 0.30 + 0.1 * ((attempt % 4) as f64) / 4.0,
            QueryClass::AcyclicWd => 0.10,
            _ => 0.18,
        };
        let single = params.class == QueryClass::CyclicSingleJvarSlave;
        let budget = rng.gen_range(2..=params.max_tps.max(2));
        let shape = gen_shape(&mut rng, budget, params.max_opt_depth, single, false);
        let mut filler = Filler {
            rng: &mut rng,
            graph: &graph,
            var_scope: Vec::new(),
            scope_stack: vec![0],
            next_scope: 0,
            reuse_p,
            single_jvar_slaves: single,
        };
        let (mut filled, _vars) = filler.fill(&shape, None, false);
        let var_scopes = filler.var_scope.clone();

        if wants_cycles {
            // bias: close a cycle through the root-scope variables
            let root_vars: Vec<usize> =
                var_scopes.iter().enumerate().filter(|(_, s)| **s == 0).map(|(v, _)| v).collect();
            if root_vars.len() >= 2 {
                let a = root_vars[rng.gen_range(0..root_vars.len())];
                let b = root_vars[rng.gen_range(0..root_vars.len())];
                if a != b {
                    let p = filler_pred(&graph, &mut rng);
                    leftmost_bgp_mut(&mut filled).push(GTp {
                        s: GTerm::Var(a),
                        p,
                        o: GTerm::Var(b),
                    });
                }
            }
        }

        match params.class {
            QueryClass::Nwd => {
                // leak a scoped variable into the leftmost (master) group
                let root_vars: BTreeSet<usize> = var_scopes
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| **s == 0)
                    .map(|(v, _)| v)
                    .collect();
                let Some(leak) = scoped_var(&var_scopes, &root_vars) else { continue };
                let p = filler_pred(&graph, &mut rng);
                let anchor = {
                    let bgp = leftmost_bgp_mut(&mut filled);
                    let Some(a) = bgp.iter().find_map(|tp| match (&tp.s, &tp.o) {
                        (GTerm::Var(v), _) => Some(*v),
                        (_, GTerm::Var(v)) => Some(*v),
                        _ => None,
                    }) else {
                        continue;
                    };
                    a
                };
                leftmost_bgp_mut(&mut filled).push(GTp {
                    s: GTerm::Var(leak),
                    p,
                    o: GTerm::Var(anchor),
                });
            }
            QueryClass::EmptyMaster => {
                let p = filler_pred(&graph, &mut rng);
                let anchor = leftmost_bgp_mut(&mut filled).iter().find_map(|tp| match (&tp.s, &tp.o) {
                    (GTerm::Var(v), _) => Some(*v),
                    (_, GTerm::Var(v)) => Some(*v),
                    _ => None,
                });
                let Some(anchor) = anchor else { continue };
                leftmost_bgp_mut(&mut filled).push(GTp {
                    s: GTerm::Const(Term::iri("http://g/never-present")),
                    p,
                    o: GTerm::Var(anchor),
                });
            }
            _ => {}
        }

        let text = format!("SELECT * WHERE {{ {} }}", emit(&filled));
        let Some((query, wd, cyclic, single_ok)) = classify_case(&text) else { continue };
        let ok = match params.class {
            QueryClass::AcyclicWd => wd && !cyclic,
            QueryClass::CyclicWd => wd && cyclic,
            QueryClass::CyclicSingleJvarSlave => wd && cyclic && single_ok && has_slave(&query),
            QueryClass::MixedWd => wd,
            QueryClass::Nwd => !wd,
            QueryClass::EmptyMaster => wd,
        };
        if ok {
            return GenCase { triples: graph, query_text: text, query, class: params.class };
        }
    }
    panic!("generator could not produce class {:?} for seed {seed}", params.class)
}

fn has_slave(query: &Query) -> bool {
    let gosn = SupernodeGraph::build(query);
    (0..gosn.sn_count()).any(|sn| !gosn.is_absolute_master(sn))
}

fn filler_pred(graph: &[TermTriple], rng: &mut ChaCha8Rng) -> Term {
    graph[rng.gen_range(0..graph.len())].1.clone()
}

pub fn triples_to_ntriples(triples: &[TermTriple]) -> String {
    let mut out = String::new();
    for (s, p, o) in triples {
        out.push_str(&format!("{s} {p} {o} .\n"));
    }
    out
}
