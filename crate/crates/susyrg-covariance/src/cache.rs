//! Binary kernel cache.
//!
//! Layout (little-endian): b"FRDC", u32 version, u32 L, u32 n, u32 strategy id,
//! f64 ε, u32 extent, then the canonical-octant values as f64 in lexicographic
//! key order.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::CovError;
use crate::table::{octant_len, KernelTable, Strategy, TableMeta};
use susyrg_core::{Parameters, ScaleIndex};

pub const MAGIC: &[u8; 4] = b"FRDC";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheHeader {
    pub version: u32,
    pub l: u32,
    pub n: u32,
    pub strategy: u32,
    pub eps: f64,
    pub extent: u32,
}

pub fn encode(table: &KernelTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(28 + 8 * table.values().len());
    out.extend_from_slice(MAGIC);
    for v in [
        FORMAT_VERSION,
        table.scale.l,
        table.scale.n,
        table.meta.strategy.id(),
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&table.meta.eps.to_le_bytes());
    out.extend_from_slice(&table.extent.to_le_bytes());
    for v in table.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<const N: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; N], CovError> {
    let s = bytes
        .get(*pos..*pos + N)
        .ok_or_else(|| CovError::CacheFormat("truncated file".into()))?;
    *pos += N;
    Ok(s.try_into().expect("slice length"))
}

pub fn decode_header(bytes: &[u8]) -> Result<(CacheHeader, usize), CovError> {
    let mut pos = 0;
    if &take::<4>(bytes, &mut pos)? != MAGIC {
        return Err(CovError::CacheFormat("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, &mut pos)?);
    if version != FORMAT_VERSION {
        return Err(CovError::CacheFormat(format!(
            "version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let l = u32::from_le_bytes(take(bytes, &mut pos)?);
    let n = u32::from_le_bytes(take(bytes, &mut pos)?);
    let strategy = u32::from_le_bytes(take(bytes, &mut pos)?);
    let eps = f64::from_le_bytes(take(bytes, &mut pos)?);
    let extent = u32::from_le_bytes(take(bytes, &mut pos)?);
    Ok((
        CacheHeader {
            version,
            l,
            n,
            strategy,
            eps,
            extent,
        },
        pos,
    ))
}

/// Decodes a table; `support` and `params_hash` are not part of the file.
pub fn decode(
    bytes: &[u8],
    support: Option<u32>,
    params_hash: &str,
) -> Result<KernelTable, CovError> {
    let (h, mut pos) = decode_header(bytes)?;
    let strategy = Strategy::from_id(h.strategy)
        .ok_or_else(|| CovError::CacheFormat(format!("strategy id {}", h.strategy)))?;
    let len = octant_len(h.extent);
    if bytes.len() != pos + 8 * len {
        return Err(CovError::CacheFormat(format!("expected {len} values")));
    }
    let mut values = Vec::with_capacity(len);
    for _ in 0..len {
        values.push(f64::from_le_bytes(take(bytes, &mut pos)?));
    }
    let meta = TableMeta {
        params_hash: params_hash.to_string(),
        eps: h.eps,
        strategy,
        tail_mass: 0.0,
    };
    KernelTable::from_values(ScaleIndex::new(h.l, h.n), h.extent, support, values, meta)
}

/// Directory of cached tables keyed by kind, parameters, scale and extent.
#[derive(Debug, Clone)]
pub struct TableCache {
    pub dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CovError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(TableCache { dir })
    }

    pub fn path(
        &self,
        kind: &str,
        params: &Parameters,
        strategy: Strategy,
        n: u32,
        extent: u32,
    ) -> PathBuf {
        let hash = crate::table::params_hash(params, strategy);
        self.dir
            .join(format!("{kind}-{}-n{n}-e{extent}.frdc", &hash[..16]))
    }

    pub fn load(
        &self,
        path: &Path,
        support: Option<u32>,
        params_hash: &str,
    ) -> Result<Option<KernelTable>, CovError> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let mut bytes = Vec::new();
        BufReader::new(file).read_to_end(&mut bytes)?;
        decode(&bytes, support, params_hash).map(Some)
    }

    /// Writes through a private temporary file and publishes it with an
    /// exclusive hard link; returns false when another writer got there first.
    pub fn store(&self, path: &Path, table: &KernelTable) -> Result<bool, CovError> {
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let f = OpenOptions::new().write(true).create_new(true).open(&tmp)?;
            let mut w = BufWriter::new(f);
            w.write_all(&encode(table))?;
            w.flush()?;
        }
        let res = fs::hard_link(&tmp, path);
        fs::remove_file(&tmp)?;
        match res {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Ok(false),
            Err(e) => Err(e.into()),
        }
    }

    pub fn load_or_compute<F>(
        &self,
        path: &Path,
        support: Option<u32>,
        params_hash: &str,
        compute: F,
    ) -> Result<KernelTable, CovError>
    where
        F: FnOnce() -> Result<KernelTable, CovError>,
    {
        if let Some(t) = self.load(path, support, params_hash)? {
            return Ok(t);
        }
        let t = compute()?;
        self.store(path, &t)?;
        Ok(t)
    }
}
