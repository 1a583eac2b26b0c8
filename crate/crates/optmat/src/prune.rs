//! Matrix loading and semi-join pruning.
//!
//! Each triple pattern gets one loaded matrix. While loading, bindings of
//! shared variables from already-loaded masters and peers are applied as
//! unfold masks (active pruning). The prune pass then walks the join
//! variables bottom-up and top-down, doing master-to-slave semi-joins and
//! per-peer-group clustered semi-joins, all through fold/unfold.

use std::collections::BTreeMap;

use crate::bitmat::{BitMat, Dim, Family};
use crate::bits::BitArray;
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::index::IndexStore;
use crate::plan::{JvarOrders, Plan, Relation, SupernodeGraph};
use crate::query::{PatTerm, Query, TriplePattern, VarId};
use crate::term::{Space, TermId};

/// Where each triple position of a loaded pattern lives: fixed by a
/// constant, on the row dimension, or on the column dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosSource {
    Fixed(TermId),
    Row,
    Col,
}

#[derive(Debug, Clone)]
pub struct LoadedTp {
    pub tp: usize,
    pub bm: BitMat,
    /// (variable, dimension it occupies, coordinate space of that dimension)
    pub var_dims: Vec<(VarId, Dim, Space)>,
    /// Sources for the s, p, o coordinates of a matching triple.
    pub pos: [PosSource; 3],
    /// Matching triples before any active pruning was applied.
    pub initial_count: u64,
}

impl LoadedTp {
    pub fn dim_of_var(&self, v: VarId) -> Option<(Dim, Space)> {
        self.var_dims.iter().find(|(var, _, _)| *var == v).map(|(_, d, s)| (*d, *s))
    }

    pub fn has_var(&self, v: VarId) -> bool {
        self.var_dims.iter().any(|(var, _, _)| *var == v)
    }

    /// Binding set of a variable as a bit array in its own dimension space.
    pub fn binding_mask(&self, v: VarId) -> Option<(BitArray, Space)> {
        let (dim, space) = self.dim_of_var(v)?;
        Some((self.bm.fold(dim), space))
    }

    /// Unfolds every dimension carrying `v` by the mask (converted into the
    /// dimension's space first).
    pub fn apply_binding(&mut self, v: VarId, mask: &BitArray, from: Space, dict: &Dictionary) -> Result<()> {
        let dims: Vec<(Dim, Space)> = self
            .var_dims
            .iter()
            .filter(|(var, _, _)| *var == v)
            .map(|(_, d, s)| (*d, *s))
            .collect();
        for (dim, to) in dims {
            let m = convert_mask(mask, from, to, dict)?;
            self.bm.unfold(&m, dim)?;
        }
        Ok(())
    }

    /// Decodes the remaining triples.
    pub fn triples(&self) -> Vec<crate::term::EncodedTriple> {
        self.bm
            .iter_cells()
            .map(|(r, c)| {
                let coord = |src: PosSource| match src {
                    PosSource::Fixed(id) => id,
                    PosSource::Row => r,
                    PosSource::Col => c,
                };
                crate::term::EncodedTriple {
                    s: coord(self.pos[0]),
                    p: coord(self.pos[1]),
                    o: coord(self.pos[2]),
                }
            })
            .collect()
    }
}

/// Rewrites a binding mask from one coordinate space into another. Crossing
/// between subject and object keeps only the shared low range.
pub fn convert_mask(mask: &BitArray, from: Space, to: Space, dict: &Dictionary) -> Result<BitArray> {
    if from == to {
        return Ok(mask.clone());
    }
    match (from, to) {
        (Space::Subject, Space::Object) | (Space::Object, Space::Subject) => {
            Ok(mask.reproject(dict.space_width(to), dict.so_count()))
        }
        _ => Err(Error::UnsupportedPattern(
            "join between predicate and subject/object coordinate spaces".into(),
        )),
    }
}

fn family_spaces(family: Family) -> (Space, Space) {
    match family {
        Family::So => (Space::Subject, Space::Object),
        Family::Os => (Space::Object, Space::Subject),
        Family::Ps => (Space::Predicate, Space::Subject),
        Family::Po => (Space::Predicate, Space::Object),
    }
}

/// Picks the index slice for a pattern per its constant positions and, for
/// two-variable patterns, which variable should sit on the row dimension
/// (the join variable, or the one appearing first in the bottom-up order).
pub fn load_bitmat_for_tp(
    store: &IndexStore,
    tp: &TriplePattern,
    orders: &JvarOrders,
    is_jvar: impl Fn(VarId) -> bool,
) -> Result<LoadedTp> {
    let dict = &store.dict;
    let enc = |t: &PatTerm, space: Space| -> Option<Option<TermId>> {
        match t {
            PatTerm::Var(_) => Some(None),
            // None: constant absent from the graph
            PatTerm::Const(term) => dict.encode(term, space).map(Some),
        }
    };

    let s = enc(&tp.s, Space::Subject);
    let p = enc(&tp.p, Space::Predicate);
    let o = enc(&tp.o, Space::Object);

    let sv = tp.s.var();
    let pv = tp.p.var();
    let ov = tp.o.var();

    // An absent constant yields an empty matrix shaped like the load that
    // would have happened.
    let absent = s.is_none() || p.is_none() || o.is_none();
    let (s, p, o) = (s.flatten(), p.flatten(), o.flatten());

    let single_row_empty = |family: Family, col_space: Space| {
        BitMat::empty(family, 0, 1, dict.space_width(col_space))
    };
    let full_empty = |family: Family| {
        let (rs, cs) = family_spaces(family);
        BitMat::empty(family, 0, dict.space_width(rs), dict.space_width(cs))
    };

    let built: (BitMat, Vec<(VarId, Dim, Space)>, [PosSource; 3]) = match (sv, pv, ov) {
        // (?v :p :o) -> the :p row of the P-S slice of :o
        (Some(v), None, None) => {
            let bm = if absent {
                single_row_empty(Family::Ps, Space::Subject)
            } else {
                store.load_single_row(Family::Ps, o.unwrap(), p.unwrap())?
            };
            let pos = [PosSource::Col, PosSource::Fixed(p.unwrap_or(0)), PosSource::Fixed(o.unwrap_or(0))];
            (bm, vec![(v, Dim::Col, Space::Subject)], pos)
        }
        // (:s :p ?v) -> the :p row of the P-O slice of :s
        (None, None, Some(v)) => {
            let bm = if absent {
                single_row_empty(Family::Po, Space::Object)
            } else {
                store.load_single_row(Family::Po, s.unwrap(), p.unwrap())?
            };
            let pos = [PosSource::Fixed(s.unwrap_or(0)), PosSource::Fixed(p.unwrap_or(0)), PosSource::Col];
            (bm, vec![(v, Dim::Col, Space::Object)], pos)
        }
        // (?v1 :p ?v2) -> S-O or O-S slice of :p
        (Some(v1), None, Some(v2)) => {
            let v1_first = match (is_jvar(v1), is_jvar(v2)) {
                (true, false) => true,
                (false, true) => false,
                _ => {
                    let p1 = orders.first_position(v1);
                    let p2 = orders.first_position(v2);
                    match (p1, p2) {
                        (Some(a), Some(b)) => a <= b,
                        _ => true,
                    }
                }
            };
            if v1 == v2 {
                // same variable on both ends: only the diagonal matches
                let bm = if absent { full_empty(Family::So) } else { store.load(Family::So, p.unwrap())? };
                let cells: Vec<(u32, u32)> = bm
                    .iter_cells()
                    .filter(|(r, c)| r == c && *r <= dict.so_count())
                    .collect();
                let diag = BitMat::from_sorted_cells(Family::So, bm.slice, bm.row_dim, bm.col_dim, &cells);
                let pos = [PosSource::Row, PosSource::Fixed(p.unwrap_or(0)), PosSource::Col];
                (diag, vec![(v1, Dim::Row, Space::Subject)], pos)
            } else if v1_first {
                let bm = if absent { full_empty(Family::So) } else { store.load(Family::So, p.unwrap())? };
                let pos = [PosSource::Row, PosSource::Fixed(p.unwrap_or(0)), PosSource::Col];
                (bm, vec![(v1, Dim::Row, Space::Subject), (v2, Dim::Col, Space::Object)], pos)
            } else {
                let bm = if absent { full_empty(Family::Os) } else { store.load(Family::Os, p.unwrap())? };
                let pos = [PosSource::Col, PosSource::Fixed(p.unwrap_or(0)), PosSource::Row];
                (bm, vec![(v2, Dim::Row, Space::Object), (v1, Dim::Col, Space::Subject)], pos)
            }
        }
        // (:s ?p ?o) -> full P-O slice of :s
        (None, Some(vp), Some(vo)) => {
            let bm = if absent { full_empty(Family::Po) } else { store.load(Family::Po, s.unwrap())? };
            let pos = [PosSource::Fixed(s.unwrap_or(0)), PosSource::Row, PosSource::Col];
            (bm, vec![(vp, Dim::Row, Space::Predicate), (vo, Dim::Col, Space::Object)], pos)
        }
        // (?s ?p :o) -> full P-S slice of :o
        (Some(vs), Some(vp), None) => {
            let bm = if absent { full_empty(Family::Ps) } else { store.load(Family::Ps, o.unwrap())? };
            let pos = [PosSource::Col, PosSource::Row, PosSource::Fixed(o.unwrap_or(0))];
            (bm, vec![(vp, Dim::Row, Space::Predicate), (vs, Dim::Col, Space::Subject)], pos)
        }
        // (:s ?p :o) -> P-O slice of :s restricted to column :o
        (None, Some(vp), None) => {
            let bm = if absent {
                full_empty(Family::Po)
            } else {
                let mut bm = store.load(Family::Po, s.unwrap())?;
                let mut mask = BitArray::zeros(bm.col_dim);
                mask.set(o.unwrap());
                bm.unfold(&mask, Dim::Col)?;
                bm
            };
            let pos = [PosSource::Fixed(s.unwrap_or(0)), PosSource::Row, PosSource::Fixed(o.unwrap_or(0))];
            (bm, vec![(vp, Dim::Row, Space::Predicate)], pos)
        }
        // (:s :p :o) -> existence of a single cell
        (None, None, None) => {
            let bm = if absent {
                single_row_empty(Family::Po, Space::Object)
            } else {
                let mut bm = store.load_single_row(Family::Po, s.unwrap(), p.unwrap())?;
                let mut mask = BitArray::zeros(bm.col_dim);
                mask.set(o.unwrap());
                bm.unfold(&mask, Dim::Col)?;
                bm
            };
            let pos = [
                PosSource::Fixed(s.unwrap_or(0)),
                PosSource::Fixed(p.unwrap_or(0)),
                PosSource::Fixed(o.unwrap_or(0)),
            ];
            (bm, vec![], pos)
        }
        (Some(_), Some(_), Some(_)) => {
            return Err(Error::UnsupportedPattern(
                "triple patterns with three variable positions are not supported".into(),
            ))
        }
    };

    let (bm, var_dims, pos) = built;
    let initial_count = bm.triple_count;
    Ok(LoadedTp { tp: tp.id, bm, var_dims, pos, initial_count })
}

/// Per-phase counters mirroring the evaluation-table columns.
#[derive(Debug, Clone, Default)]
pub struct PruneStats {
    pub initial_triples: u64,
    pub triples_after_pruning: u64,
}

pub struct PruneContext<'a> {
    pub dict: &'a Dictionary,
    pub gosn: &'a SupernodeGraph,
    pub query: &'a Query,
    pub tps: Vec<LoadedTp>,
    pub early_abort: bool,
    pub stats: PruneStats,
}

impl<'a> PruneContext<'a> {
    fn check_abort(&mut self) {
        if self.early_abort {
            return;
        }
        for lt in &self.tps {
            let sn = self.gosn.sn_of_tp[lt.tp];
            if self.gosn.is_absolute_master(sn) && lt.bm.is_empty() {
                self.early_abort = true;
                return;
            }
        }
    }

    pub fn total_triples(&self) -> u64 {
        self.tps.iter().map(|lt| lt.bm.triple_count).sum()
    }
}

/// Loads one matrix per pattern in query order with active pruning: bindings
/// of shared variables flow from already-loaded masters and peers into every
/// new load. An emptied absolute-master pattern raises the early-abort flag.
pub fn init<'a>(store: &IndexStore, plan: &'a Plan, dict: &'a Dictionary) -> Result<PruneContext<'a>> {
    let query = &plan.query;
    let gosn = &plan.gosn;
    let mut ctx = PruneContext {
        dict,
        gosn,
        query,
        tps: Vec::with_capacity(query.patterns.len()),
        early_abort: false,
        stats: PruneStats::default(),
    };
    for tp in &query.patterns {
        let mut lt = load_bitmat_for_tp(store, tp, &plan.orders, |v| plan.goj.is_jvar(v))?;
        ctx.stats.initial_triples += lt.initial_count;
        if !ctx.early_abort {
            for prev in &ctx.tps {
                let rel = gosn.classify_tps(prev.tp, lt.tp);
                if !(rel == Relation::Master || rel == Relation::Peer) {
                    continue;
                }
                let shared: Vec<VarId> = prev
                    .var_dims
                    .iter()
                    .map(|(v, _, _)| *v)
                    .filter(|v| lt.has_var(*v))
                    .collect();
                for v in shared {
                    if let Some((mask, space)) = prev.binding_mask(v) {
                        lt.apply_binding(v, &mask, space, dict)?;
                    }
                }
            }
        }
        ctx.tps.push(lt);
        ctx.check_abort();
    }
    Ok(ctx)
}

/// One master-to-slave semi-join over a shared variable: the slave keeps the
/// triples whose binding survives the intersection, the master is untouched.
pub fn semi_join(ctx: &mut PruneContext, jvar: VarId, slave: usize, master: usize) -> Result<()> {
    let (m_mask, m_space) = match ctx.tps[master].binding_mask(jvar) {
        Some(x) => x,
        None => return Ok(()),
    };
    let (s_mask, s_space) = match ctx.tps[slave].binding_mask(jvar) {
        Some(x) => x,
        None => return Ok(()),
    };
    let mut beta = convert_mask(&m_mask, m_space, s_space, ctx.dict)?;
    beta.and_assign(&s_mask);
    ctx.tps[slave].apply_binding(jvar, &beta, s_space, ctx.dict)?;
    Ok(())
}

/// Simultaneous semi-join of peer patterns sharing a variable: every pattern
/// is unfolded by the intersection of all their binding sets.
pub fn clustered_semi_join(ctx: &mut PruneContext, jvar: VarId, tps: &[usize]) -> Result<()> {
    if tps.len() < 2 {
        return Ok(());
    }
    let mut masks: Vec<(BitArray, Space)> = Vec::with_capacity(tps.len());
    for t in tps {
        match ctx.tps[*t].binding_mask(jvar) {
            Some(x) => masks.push(x),
            None => return Ok(()),
        }
    }
    let uniform = masks.iter().all(|(_, s)| *s == masks[0].1);
    let (beta, space) = if uniform {
        let mut beta = masks[0].0.clone();
        for (m, _) in &masks[1..] {
            beta.and_assign(m);
        }
        (beta, masks[0].1)
    } else {
        // subject/object mix: only the shared low range can survive
        let so = ctx.dict.so_count();
        let mut beta = BitArray::ones(so);
        for (m, _) in &masks {
            beta.and_assign(&m.reproject(so, so));
        }
        (beta.reproject(ctx.dict.space_width(Space::Subject), so), Space::Subject)
    };
    for t in tps {
        ctx.tps[*t].apply_binding(jvar, &beta, space, ctx.dict)?;
    }
    Ok(())
}

/// The bottom-up then top-down pruning pass: per join variable, first every
/// master/slave semi-join, then one clustered semi-join per peer group.
pub fn prune_triples(ctx: &mut PruneContext, orders: &JvarOrders) -> Result<()> {
    let passes = [orders.flat_bottom_up(), orders.flat_top_down()];
    'outer: for pass in &passes {
        for jvar in pass {
            if ctx.early_abort {
                break 'outer;
            }
            prune_one_jvar(ctx, *jvar)?;
        }
    }
    ctx.stats.triples_after_pruning = ctx.total_triples();
    Ok(())
}

fn prune_one_jvar(ctx: &mut PruneContext, jvar: VarId) -> Result<()> {
    let holders: Vec<usize> =
        (0..ctx.tps.len()).filter(|t| ctx.tps[*t].has_var(jvar)).collect();

    // master/slave pairs, masters in selectivity order
    let mut pairs: Vec<(u64, usize, usize)> = Vec::new();
    for &m in &holders {
        for &s in &holders {
            if m != s && ctx.gosn.classify_tps(m, s) == Relation::Master {
                pairs.push((ctx.tps[m].bm.triple_count, m, s));
            }
        }
    }
    pairs.sort_unstable();
    for (_, m, s) in pairs {
        semi_join(ctx, jvar, s, m)?;
        ctx.check_abort();
        if ctx.early_abort {
            return Ok(());
        }
    }

    // one clustered semi-join per peer group holding the variable
    let classes = ctx.gosn.peer_classes();
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &t in &holders {
        groups.entry(classes[ctx.gosn.sn_of_tp[t]]).or_default().push(t);
    }
    for (_, tps) in groups {
        clustered_semi_join(ctx, jvar, &tps)?;
        ctx.check_abort();
        if ctx.early_abort {
            return Ok(());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index_dir;
    use crate::ntriples::parse_ntriples;
    use crate::plan::plan_query;
    use crate::query::parse_query;
    use crate::term::Term;

    const Q2: &str = "SELECT * WHERE { <http://ex/Jerry> <http://ex/hasFriend> ?friend . \
        OPTIONAL { ?friend <http://ex/actedIn> ?sitcom . ?sitcom <http://ex/location> <http://ex/NewYorkCity> . } }";

    struct Fixture {
        _dir: tempfile::TempDir,
        store: IndexStore,
    }

    fn fixture(nt: &str) -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let triples = parse_ntriples(nt).unwrap();
        build_index_dir(&triples, dir.path()).unwrap();
        let store = IndexStore::open(dir.path()).unwrap();
        Fixture { _dir: dir, store }
    }

    fn sitcoms() -> Fixture {
        fixture(include_str!("../tests/data/sitcoms.nt"))
    }

    #[test]
    fn two_constant_pattern_loads_one_row() {
        let f = sitcoms();
        let q = parse_query(Q2).unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let lt = load_bitmat_for_tp(&f.store, &q.patterns[2], &plan.orders, |v| plan.goj.is_jvar(v)).unwrap();
        assert_eq!(lt.bm.row_dim, 1);
        assert_eq!(lt.bm.triple_count, 3, "three sitcoms are located in the city");
        let (dim, space) = lt.dim_of_var(1).unwrap();
        assert_eq!((dim, space), (Dim::Col, Space::Subject));
    }

    #[test]
    fn friend_row_projects_to_two_bindings() {
        let f = sitcoms();
        let p = f.store.dict.encode(&Term::iri("http://ex/hasFriend"), Space::Predicate).unwrap();
        let jerry = f.store.dict.encode(&Term::iri("http://ex/Jerry"), Space::Subject).unwrap();
        let so = f.store.load(Family::So, p).unwrap();
        let friends: Vec<&Term> = so
            .row_positions(jerry)
            .into_iter()
            .map(|o| f.store.dict.decode(o, Space::Object).unwrap())
            .collect();
        assert_eq!(friends, vec![&Term::iri("http://ex/Larry"), &Term::iri("http://ex/Julia")]);
    }

    #[test]
    fn row_dimension_follows_bottom_up_order() {
        let f = sitcoms();
        let q = parse_query(Q2).unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        // ?friend precedes ?sitcom bottom-up, so it takes the row dimension
        let lt = load_bitmat_for_tp(&f.store, &q.patterns[1], &plan.orders, |v| plan.goj.is_jvar(v)).unwrap();
        assert_eq!(lt.bm.family, Family::So);
        assert_eq!(lt.dim_of_var(0).unwrap().0, Dim::Row);
    }

    #[test]
    fn absent_constant_loads_empty_matrix() {
        let f = sitcoms();
        let q = parse_query("SELECT * WHERE { <http://ex/NoSuchTerm> <http://ex/hasFriend> ?x }").unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let lt = load_bitmat_for_tp(&f.store, &q.patterns[0], &plan.orders, |v| plan.goj.is_jvar(v)).unwrap();
        assert!(lt.bm.is_empty());
    }

    #[test]
    fn active_pruning_restricts_later_loads() {
        let f = sitcoms();
        let q = parse_query(Q2).unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let ctx = init(&f.store, &plan, &f.store.dict).unwrap();
        // acting triples outside Jerry's friends are pruned on load
        assert_eq!(ctx.tps[0].bm.triple_count, 2);
        assert_eq!(ctx.tps[1].initial_count, 7);
        assert_eq!(ctx.tps[1].bm.triple_count, 5);
        // the sitcom bindings of tp2 cut the city row to one sitcom
        assert_eq!(ctx.tps[2].initial_count, 3);
        assert_eq!(ctx.tps[2].bm.triple_count, 1);
        assert!(!ctx.early_abort);
        assert_eq!(ctx.stats.initial_triples, 12);
    }

    #[test]
    fn first_load_sees_no_masks() {
        let f = sitcoms();
        let q = parse_query(Q2).unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let ctx = init(&f.store, &plan, &f.store.dict).unwrap();
        assert_eq!(ctx.tps[0].initial_count, ctx.tps[0].bm.triple_count);
    }

    #[test]
    fn empty_absolute_master_raises_early_abort() {
        let f = sitcoms();
        let q = parse_query(
            "SELECT * WHERE { <http://ex/NoSuchTerm> <http://ex/hasFriend> ?friend . \
             OPTIONAL { ?friend <http://ex/actedIn> ?sitcom } }",
        )
        .unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let ctx = init(&f.store, &plan, &f.store.dict).unwrap();
        assert!(ctx.early_abort);
    }

    #[test]
    fn running_example_prunes_to_minimal_counts() {
        let f = sitcoms();
        let q = parse_query(Q2).unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let mut ctx = init(&f.store, &plan, &f.store.dict).unwrap();
        prune_triples(&mut ctx, &plan.orders).unwrap();
        let counts: Vec<u64> = ctx.tps.iter().map(|lt| lt.bm.triple_count).collect();
        assert_eq!(counts, vec![2, 1, 1]);
        // the one surviving acting triple is Julia in Seinfeld
        let t = &ctx.tps[1].triples()[0];
        let s = f.store.dict.decode(t.s, Space::Subject).unwrap();
        let o = f.store.dict.decode(t.o, Space::Object).unwrap();
        assert_eq!(s, &Term::iri("http://ex/Julia"));
        assert_eq!(o, &Term::iri("http://ex/Seinfeld"));
    }

    #[test]
    fn semi_join_is_idempotent_and_one_sided() {
        let f = sitcoms();
        let q = parse_query(Q2).unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let mut ctx = init(&f.store, &plan, &f.store.dict).unwrap();
        let master_before = ctx.tps[0].bm.clone();
        semi_join(&mut ctx, 0, 1, 0).unwrap();
        let slave_after = ctx.tps[1].bm.clone();
        semi_join(&mut ctx, 0, 1, 0).unwrap();
        assert_eq!(ctx.tps[1].bm, slave_after);
        assert_eq!(ctx.tps[0].bm, master_before);
    }

    #[test]
    fn clustered_semi_join_empties_all_on_disjoint_bindings() {
        let f = fixture("<a> <p> <b> .\n<c> <q> <d> .\n<b> <r> <c> .\n");
        // ?x bindings of the two patterns are disjoint
        let q = parse_query("SELECT * WHERE { ?x <p> ?y . ?x <q> ?z }").unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let mut ctx = init(&f.store, &plan, &f.store.dict).unwrap();
        clustered_semi_join(&mut ctx, 0, &[0, 1]).unwrap();
        assert!(ctx.tps[0].bm.is_empty());
        assert!(ctx.tps[1].bm.is_empty());
    }

    #[test]
    fn same_variable_twice_keeps_only_diagonal() {
        let f = fixture("<a> <p> <a> .\n<a> <p> <b> .\n<b> <p> <a> .\n");
        let q = parse_query("SELECT * WHERE { ?x <p> ?x }").unwrap();
        let plan = plan_query(&q, &f.store.dict, &f.store.manifest).unwrap();
        let ctx = init(&f.store, &plan, &f.store.dict).unwrap();
        assert_eq!(ctx.tps[0].bm.triple_count, 1);
        let t = &ctx.tps[0].triples()[0];
        assert_eq!(
            f.store.dict.decode(t.s, Space::Subject).unwrap(),
            &Term::iri("a")
        );
    }
}
