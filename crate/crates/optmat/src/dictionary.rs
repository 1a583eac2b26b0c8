//! Bidirectional term/coordinate mapping.
//!
//! Terms occurring as both subject and object get ids `1..=so_count` shared
//! by the subject and object spaces. Subject-only terms continue the subject
//! space, object-only terms continue the object space, predicates get an
//! independent space. Within each partition ids follow first occurrence in
//! the input stream.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ntriples::TermTriple;
use crate::term::{EncodedTriple, Space, Term, TermId, TermKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    so_count: u32,
    subj_terms: Vec<Term>,
    obj_terms: Vec<Term>,
    pred_terms: Vec<Term>,
    subj_ids: HashMap<Term, u32>,
    obj_ids: HashMap<Term, u32>,
    pred_ids: HashMap<Term, u32>,
}

impl Dictionary {
    pub fn so_count(&self) -> u32 {
        self.so_count
    }

    pub fn s_count(&self) -> u32 {
        self.subj_terms.len() as u32
    }

    pub fn o_count(&self) -> u32 {
        self.obj_terms.len() as u32
    }

    pub fn p_count(&self) -> u32 {
        self.pred_terms.len() as u32
    }

    pub fn space_width(&self, space: Space) -> u32 {
        match space {
            Space::Subject => self.s_count(),
            Space::Object => self.o_count(),
            Space::Predicate => self.p_count(),
        }
    }

    pub fn encode(&self, term: &Term, space: Space) -> Option<TermId> {
        let map = match space {
            Space::Subject => &self.subj_ids,
            Space::Object => &self.obj_ids,
            Space::Predicate => &self.pred_ids,
        };
        map.get(term).copied()
    }

    pub fn decode(&self, id: TermId, space: Space) -> Option<&Term> {
        let v = match space {
            Space::Subject => &self.subj_terms,
            Space::Object => &self.obj_terms,
            Space::Predicate => &self.pred_terms,
        };
        v.get(id.checked_sub(1)? as usize)
    }

    /// Re-expresses an id from one coordinate space in another. Subject and
    /// object ids translate 1:1 inside the shared `1..=so_count` range and
    /// not at all beyond it; predicate ids never cross spaces.
    pub fn convert(&self, id: TermId, from: Space, to: Space) -> Option<TermId> {
        if from == to {
            return Some(id);
        }
        match (from, to) {
            (Space::Subject, Space::Object) | (Space::Object, Space::Subject) => {
                (id <= self.so_count).then_some(id)
            }
            _ => None,
        }
    }
}

/// Assigns ids over a stream of term triples and encodes the (deduplicated)
/// triple set.
pub fn build_dictionary(triples: &[TermTriple]) -> (Dictionary, BTreeSet<EncodedTriple>) {
    // First-occurrence rank of every term over subject/object positions.
    let mut order: Vec<&Term> = Vec::new();
    let mut first_seen: HashMap<&Term, usize> = HashMap::new();
    let mut as_subj: HashMap<&Term, bool> = HashMap::new();
    let mut as_obj: HashMap<&Term, bool> = HashMap::new();
    let mut pred_order: Vec<&Term> = Vec::new();
    let mut pred_seen: HashMap<&Term, ()> = HashMap::new();
    for (s, p, o) in triples {
        for (t, subj) in [(s, true), (o, false)] {
            if !first_seen.contains_key(t) {
                first_seen.insert(t, order.len());
                order.push(t);
            }
            if subj {
                as_subj.insert(t, true);
            } else {
                as_obj.insert(t, true);
            }
        }
        if pred_seen.insert(p, ()).is_none() {
            pred_order.push(p);
        }
    }

    let mut so: Vec<&Term> = Vec::new();
    let mut s_only: Vec<&Term> = Vec::new();
    let mut o_only: Vec<&Term> = Vec::new();
    for t in &order {
        match (as_subj.contains_key(t), as_obj.contains_key(t)) {
            (true, true) => so.push(t),
            (true, false) => s_only.push(t),
            (false, true) => o_only.push(t),
            (false, false) => unreachable!(),
        }
    }

    let mut subj_terms: Vec<Term> = so.iter().map(|t| (*t).clone()).collect();
    subj_terms.extend(s_only.iter().map(|t| (*t).clone()));
    let mut obj_terms: Vec<Term> = so.iter().map(|t| (*t).clone()).collect();
    obj_terms.extend(o_only.iter().map(|t| (*t).clone()));
    let pred_terms: Vec<Term> = pred_order.iter().map(|t| (*t).clone()).collect();

    let index = |v: &[Term]| -> HashMap<Term, u32> {
        v.iter().enumerate().map(|(i, t)| (t.clone(), i as u32 + 1)).collect()
    };
    let dict = Dictionary {
        so_count: so.len() as u32,
        subj_ids: index(&subj_terms),
        obj_ids: index(&obj_terms),
        pred_ids: index(&pred_terms),
        subj_terms,
        obj_terms,
        pred_terms,
    };

    let encoded = triples
        .iter()
        .map(|(s, p, o)| EncodedTriple {
            s: dict.subj_ids[s],
            p: dict.pred_ids[p],
            o: dict.obj_ids[o],
        })
        .collect();
    (dict, encoded)
}

const MAGIC: &[u8; 8] = b"OPTMDIC\0";
const VERSION: u32 = 1;

pub fn persist_dictionary(dict: &Dictionary, path: &Path) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for n in [dict.so_count as u64, dict.s_count() as u64, dict.o_count() as u64, dict.p_count() as u64] {
        buf.extend_from_slice(&n.to_le_bytes());
    }
    let so = dict.so_count as usize;
    let blocks: [&[Term]; 4] = [
        &dict.subj_terms[..so],
        &dict.subj_terms[so..],
        &dict.obj_terms[so..],
        &dict.pred_terms,
    ];
    for block in blocks {
        for t in block {
            buf.push(match t.kind {
                TermKind::Iri => 0,
                TermKind::BlankNode => 1,
                TermKind::Literal => 2,
            });
            let bytes = t.lexical.as_bytes();
            buf.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            buf.extend_from_slice(bytes);
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    f.write_all(&buf).map_err(|e| Error::io(format!("write {}", path.display()), e))?;
    Ok(())
}

pub fn load_dictionary(path: &Path) -> Result<Dictionary> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| Error::io(format!("read {}", path.display()), e))?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > data.len() {
            return Err(Error::DictFormat("truncated file".into()));
        }
        let s = &data[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 8)? != MAGIC {
        return Err(Error::DictFormat("bad magic".into()));
    }
    let ver = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if ver != VERSION {
        return Err(Error::DictFormat(format!("unsupported version {ver}")));
    }
    let mut counts = [0u64; 4];
    for c in counts.iter_mut() {
        *c = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    }
    let [so, s, o, p] = counts.map(|c| c as usize);
    if so > s || so > o {
        return Err(Error::DictFormat("inconsistent counts".into()));
    }
    let read_term = |pos: &mut usize| -> Result<Term> {
        let kind = match take(pos, 1)?[0] {
            0 => TermKind::Iri,
            1 => TermKind::BlankNode,
            2 => TermKind::Literal,
            k => return Err(Error::DictFormat(format!("bad term kind {k}"))),
        };
        let len = u32::from_le_bytes(take(pos, 4)?.try_into().unwrap()) as usize;
        let lexical = std::str::from_utf8(take(pos, len)?)
            .map_err(|_| Error::DictFormat("term is not UTF-8".into()))?
            .to_string();
        if lexical.is_empty() {
            return Err(Error::DictFormat("empty lexical form".into()));
        }
        Ok(Term { kind, lexical })
    };
    let read_block = |pos: &mut usize, n: usize| -> Result<Vec<Term>> {
        (0..n).map(|_| read_term(pos)).collect()
    };
    let so_terms = read_block(&mut pos, so)?;
    let s_only = read_block(&mut pos, s - so)?;
    let o_only = read_block(&mut pos, o - so)?;
    let preds = read_block(&mut pos, p)?;
    if pos != data.len() {
        return Err(Error::DictFormat("trailing bytes".into()));
    }

    let mut subj_terms = so_terms.clone();
    subj_terms.extend(s_only);
    let mut obj_terms = so_terms;
    obj_terms.extend(o_only);
    let index = |v: &[Term]| -> HashMap<Term, u32> {
        v.iter().enumerate().map(|(i, t)| (t.clone(), i as u32 + 1)).collect()
    };
    Ok(Dictionary {
        so_count: so as u32,
        subj_ids: index(&subj_terms),
        obj_ids: index(&obj_terms),
        pred_ids: index(&preds),
        subj_terms,
        obj_terms,
        pred_terms: preds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(s: &str, p: &str, o: &str) -> TermTriple {
        (Term::iri(s), Term::iri(p), Term::iri(o))
    }

    #[test]
    fn shared_subject_object_term_gets_lowest_shared_id() {
        // U appears as object (second triple) and subject (third): it is the
        // only member of the shared partition, so it takes id 1 in both spaces.
        let triples = vec![tri("J", "f", "L"), tri("J", "f", "U"), tri("U", "a", "S")];
        let (d, enc) = build_dictionary(&triples);
        assert_eq!(d.so_count(), 1);
        assert_eq!(d.encode(&Term::iri("U"), Space::Subject), Some(1));
        assert_eq!(d.encode(&Term::iri("U"), Space::Object), Some(1));
        assert_eq!(d.encode(&Term::iri("J"), Space::Subject), Some(2));
        assert_eq!(d.encode(&Term::iri("L"), Space::Object), Some(2));
        assert_eq!(d.encode(&Term::iri("S"), Space::Object), Some(3));
        assert_eq!(d.encode(&Term::iri("f"), Space::Predicate), Some(1));
        assert_eq!(d.encode(&Term::iri("a"), Space::Predicate), Some(2));
        assert_eq!((d.s_count(), d.o_count(), d.p_count()), (2, 3, 2));
        assert_eq!(enc.len(), 3);
    }

    #[test]
    fn empty_input() {
        let (d, enc) = build_dictionary(&[]);
        assert_eq!((d.so_count(), d.s_count(), d.o_count(), d.p_count()), (0, 0, 0, 0));
        assert!(enc.is_empty());
    }

    #[test]
    fn duplicate_triples_collapse() {
        let (_, enc) = build_dictionary(&[tri("a", "p", "b"), tri("a", "p", "b")]);
        assert_eq!(enc.len(), 1);
    }

    #[test]
    fn encode_decode_roundtrip_all_ids() {
        let triples = vec![tri("J", "f", "L"), tri("J", "f", "U"), tri("U", "a", "S")];
        let (d, _) = build_dictionary(&triples);
        for space in [Space::Subject, Space::Object, Space::Predicate] {
            for id in 1..=d.space_width(space) {
                let t = d.decode(id, space).unwrap();
                assert_eq!(d.encode(t, space), Some(id));
            }
        }
    }

    #[test]
    fn persist_load_roundtrip() {
        let triples = vec![
            tri("J", "f", "L"),
            tri("U", "a", "S"),
            (Term::iri("J"), Term::iri("p"), Term::literal("\"x\"@en")),
            (Term::blank("b1"), Term::iri("p"), Term::iri("J")),
        ];
        let (d, _) = build_dictionary(&triples);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dict.bin");
        persist_dictionary(&d, &path).unwrap();
        let loaded = load_dictionary(&path).unwrap();
        assert_eq!(d, loaded);
    }

    #[test]
    fn persist_load_empty() {
        let (d, _) = build_dictionary(&[]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dict.bin");
        persist_dictionary(&d, &path).unwrap();
        let loaded = load_dictionary(&path).unwrap();
        assert_eq!(loaded.s_count(), 0);
        assert_eq!(loaded.p_count(), 0);
    }

    #[test]
    fn truncated_file_is_format_error() {
        let triples = vec![tri("J", "f", "L")];
        let (d, _) = build_dictionary(&triples);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dict.bin");
        persist_dictionary(&d, &path).unwrap();
        let data = std::fs::read(&path).unwrap();
        std::fs::write(&path, &data[..data.len() - 3]).unwrap();
        assert!(matches!(load_dictionary(&path), Err(Error::DictFormat(_))));
    }
}
