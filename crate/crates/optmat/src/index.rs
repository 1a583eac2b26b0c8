//! On-disk index: one file per bitmatrix under a directory tree keyed by
//! family and slice id, plus a manifest of per-matrix triple counts and the
//! persisted dictionary.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::bitmat::{BitMat, Family};
use crate::bitrow::{BitRow, RowEncoding};
use crate::bits::BitArray;
use crate::dictionary::{load_dictionary, persist_dictionary, Dictionary};
use crate::error::{Error, Result};
use crate::term::EncodedTriple;

const MAGIC: u32 = 0x4F50_544D; // "OPTM"
const VERSION: u32 = 1;

#[derive(Debug, Clone, Default)]
pub struct IndexManifest {
    pub entries: Vec<(Family, u32, u64)>,
    counts: HashMap<(Family, u32), u64>,
}

impl IndexManifest {
    pub fn count(&self, family: Family, slice: u32) -> u64 {
        self.counts.get(&(family, slice)).copied().unwrap_or(0)
    }

    fn push(&mut self, family: Family, slice: u32, count: u64) {
        self.entries.push((family, slice, count));
        self.counts.insert((family, slice), count);
    }
}

pub fn bitmat_path(dir: &Path, family: Family, slice: u32) -> PathBuf {
    dir.join(family.dir_name()).join(format!("{slice}.bm"))
}

fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.tsv")
}

pub fn dictionary_path(dir: &Path) -> PathBuf {
    dir.join("dictionary.bin")
}

/// Builds every index slice for the graph: an S-O and O-S matrix per
/// predicate, a P-O matrix per subject, a P-S matrix per object.
pub fn build_indexes(
    dict: &Dictionary,
    triples: &BTreeSet<EncodedTriple>,
    out_dir: &Path,
) -> Result<IndexManifest> {
    for family in [Family::So, Family::Os, Family::Ps, Family::Po] {
        std::fs::create_dir_all(out_dir.join(family.dir_name()))
            .map_err(|e| Error::io(format!("create {}", out_dir.display()), e))?;
    }

    let mut so: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    let mut os: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    let mut po: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    let mut ps: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for t in triples {
        so.entry(t.p).or_default().push((t.s, t.o));
        os.entry(t.p).or_default().push((t.o, t.s));
        po.entry(t.s).or_default().push((t.p, t.o));
        ps.entry(t.o).or_default().push((t.p, t.s));
    }

    let mut manifest = IndexManifest::default();
    let (s_n, o_n, p_n) = (dict.s_count(), dict.o_count(), dict.p_count());
    type SliceCells = BTreeMap<u32, Vec<(u32, u32)>>;
    let groups: [(Family, &mut SliceCells, u32, u32); 4] = [
        (Family::So, &mut so, s_n, o_n),
        (Family::Os, &mut os, o_n, s_n),
        (Family::Ps, &mut ps, p_n, s_n),
        (Family::Po, &mut po, p_n, o_n),
    ];
    for (family, cells_by_slice, row_dim, col_dim) in groups {
        for (slice, cells) in cells_by_slice.iter_mut() {
            cells.sort_unstable();
            let bm = BitMat::from_sorted_cells(family, *slice, row_dim, col_dim, cells);
            write_bitmat(&bitmat_path(out_dir, family, *slice), &bm)?;
            manifest.push(family, *slice, bm.triple_count);
        }
    }

    persist_dictionary(dict, &dictionary_path(out_dir))?;
    write_manifest(&manifest, &manifest_path(out_dir))?;
    Ok(manifest)
}

fn write_manifest(manifest: &IndexManifest, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (family, slice, count) in &manifest.entries {
        out.push_str(&format!("{}\t{}\t{}\n", family.dir_name(), slice, count));
    }
    std::fs::write(path, out).map_err(|e| Error::io(format!("write {}", path.display()), e))
}

pub fn load_manifest(path: &Path) -> Result<IndexManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("read {}", path.display()), e))?;
    let mut manifest = IndexManifest::default();
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split('\t');
        let parse = || Error::IndexFormat {
            path: path.display().to_string(),
            msg: format!("bad manifest line {}", i + 1),
        };
        let family = match parts.next() {
            Some("so") => Family::So,
            Some("os") => Family::Os,
            Some("ps") => Family::Ps,
            Some("po") => Family::Po,
            _ => return Err(parse()),
        };
        let slice: u32 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(parse)?;
        let count: u64 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(parse)?;
        manifest.push(family, slice, count);
    }
    Ok(manifest)
}

fn push_mask(buf: &mut Vec<u8>, mask: &BitArray) {
    let positions: Vec<u32> = mask.iter_ones().collect();
    buf.extend_from_slice(&(positions.len() as u32).to_le_bytes());
    for p in positions {
        buf.extend_from_slice(&p.to_le_bytes());
    }
}

pub fn write_bitmat(path: &Path, bm: &BitMat) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    for v in [MAGIC, VERSION, bm.family.tag(), bm.slice, bm.row_dim, bm.col_dim] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&bm.triple_count.to_le_bytes());
    push_mask(&mut buf, &bm.row_mask);
    push_mask(&mut buf, &bm.col_mask);
    buf.extend_from_slice(&(bm.rows.len() as u32).to_le_bytes());
    for (r, row) in &bm.rows {
        buf.extend_from_slice(&r.to_le_bytes());
        let tag: u32 = match row.encoding {
            RowEncoding::RunLength => 0,
            RowEncoding::SetPositions => 1,
        };
        buf.extend_from_slice(&tag.to_le_bytes());
        buf.extend_from_slice(&(row.payload.len() as u32).to_le_bytes());
        for v in &row.payload {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    f.write_all(&buf).map_err(|e| Error::io(format!("write {}", path.display()), e))
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn fail(&self, msg: impl Into<String>) -> Error {
        Error::IndexFormat { path: self.path.display().to_string(), msg: msg.into() }
    }

    fn u32(&mut self) -> Result<u32> {
        if self.pos + 4 > self.data.len() {
            return Err(self.fail("truncated"));
        }
        let v = u32::from_le_bytes(self.data[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn u64(&mut self) -> Result<u64> {
        if self.pos + 8 > self.data.len() {
            return Err(self.fail("truncated"));
        }
        let v = u64::from_le_bytes(self.data[self.pos..self.pos + 8].try_into().unwrap());
        self.pos += 8;
        Ok(v)
    }
}

pub fn read_bitmat(path: &Path) -> Result<BitMat> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| Error::io(format!("read {}", path.display()), e))?;
    let mut r = Reader { data: &data, pos: 0, path };
    if r.u32()? != MAGIC {
        return Err(r.fail("bad magic"));
    }
    let ver = r.u32()?;
    if ver != VERSION {
        return Err(r.fail(format!("unsupported version {ver}")));
    }
    let family = Family::from_tag(r.u32()?).ok_or_else(|| r.fail("bad family tag"))?;
    let slice = r.u32()?;
    let row_dim = r.u32()?;
    let col_dim = r.u32()?;
    let triple_count = r.u64()?;
    let read_mask = |r: &mut Reader, width: u32| -> Result<BitArray> {
        let n = r.u32()?;
        let mut mask = BitArray::zeros(width);
        for _ in 0..n {
            let p = r.u32()?;
            if p == 0 || p > width {
                return Err(r.fail("mask position out of range"));
            }
            mask.set(p);
        }
        Ok(mask)
    };
    let row_mask = read_mask(&mut r, row_dim)?;
    let col_mask = read_mask(&mut r, col_dim)?;
    let n_rows = r.u32()?;
    let mut rows = BTreeMap::new();
    for _ in 0..n_rows {
        let row_id = r.u32()?;
        let tag = r.u32()?;
        let encoding = match tag {
            0 => RowEncoding::RunLength,
            1 => RowEncoding::SetPositions,
            _ => return Err(r.fail("bad row encoding tag")),
        };
        let len = r.u32()?;
        let mut payload = Vec::with_capacity(len as usize);
        for _ in 0..len {
            payload.push(r.u32()?);
        }
        let row = BitRow { width: col_dim, encoding, payload };
        row.validate()?;
        rows.insert(row_id, row);
    }
    if r.pos != data.len() {
        return Err(r.fail("trailing bytes"));
    }
    let bm = BitMat { family, slice, row_dim, col_dim, rows, row_mask, col_mask, triple_count };
    Ok(bm)
}

/// An opened index directory: dictionary, manifest, and matrix loading.
pub struct IndexStore {
    pub dir: PathBuf,
    pub dict: Dictionary,
    pub manifest: IndexManifest,
}

impl IndexStore {
    pub fn open(dir: &Path) -> Result<IndexStore> {
        let dict = load_dictionary(&dictionary_path(dir))?;
        let manifest = load_manifest(&manifest_path(dir))?;
        Ok(IndexStore { dir: dir.to_path_buf(), dict, manifest })
    }

    pub fn load(&self, family: Family, slice: u32) -> Result<BitMat> {
        read_bitmat(&bitmat_path(&self.dir, family, slice))
    }

    /// Loads one row of a slice as a standalone 1xN matrix. Row id 1 of the
    /// result carries the requested row; an absent row yields an empty matrix.
    pub fn load_single_row(&self, family: Family, slice: u32, row_id: u32) -> Result<BitMat> {
        let full = self.load(family, slice)?;
        let mut bm = BitMat::empty(family, slice, 1, full.col_dim);
        if let Some(row) = full.row(row_id) {
            let positions = row.positions();
            if !positions.is_empty() {
                let cells: Vec<(u32, u32)> = positions.into_iter().map(|c| (1, c)).collect();
                bm = BitMat::from_sorted_cells(family, slice, 1, full.col_dim, &cells);
            }
        }
        Ok(bm)
    }
}

/// Builds a full index directory from raw term triples; the in-memory pieces
/// are returned for callers that keep working on the same data.
pub fn build_index_dir(
    triples: &[crate::ntriples::TermTriple],
    out_dir: &Path,
) -> Result<(Dictionary, BTreeSet<EncodedTriple>, IndexManifest)> {
    let (dict, encoded) = crate::dictionary::build_dictionary(triples);
    let manifest = build_indexes(&dict, &encoded, out_dir)?;
    Ok((dict, encoded, manifest))
}
