//! On-disk cache for characteristic and τ tables.
//!
//! Envelope (little-endian): magic (4 bytes), format version (u32),
//! SHA-256 of the key (32 bytes), N (u64), then the payload: packed u64
//! words for χ tables, u32 residues for τ tables. A file whose key digest
//! or N does not match is treated as a miss and overwritten.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::setspec::SetDescriptor;
use crate::sieve::{self, BuildStats, CharTable};
use crate::tau::{self, TauTable};

pub const FORMAT_VERSION: u32 = 1;
const CHAR_MAGIC: &[u8; 4] = b"MSCT";
const TAU_MAGIC: &[u8; 4] = b"MSTT";
const HEADER_LEN: usize = 4 + 4 + 32 + 8;

#[derive(Clone, Debug)]
pub struct CacheDir {
    root: PathBuf,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn tau_key(q: u64) -> [u8; 32] {
    Sha256::digest(format!("tau-mod:{q}").as_bytes()).into()
}

fn header(magic: &[u8; 4], key: &[u8; 32], n: u64) -> Vec<u8> {
    let mut h = Vec::with_capacity(HEADER_LEN);
    h.extend_from_slice(magic);
    h.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    h.extend_from_slice(key);
    h.extend_from_slice(&n.to_le_bytes());
    h
}

/// The payload after a matching header, or None on any mismatch.
fn read_payload(path: &Path, magic: &[u8; 4], key: &[u8; 32], n: u64) -> Result<Option<Vec<u8>>> {
    let mut f = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN || bytes[..HEADER_LEN] != header(magic, key, n)[..] {
        return Ok(None);
    }
    bytes.drain(..HEADER_LEN);
    Ok(Some(bytes))
}

fn write_atomic(path: &Path, head: &[u8], body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(head)?;
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl CacheDir {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn char_path(&self, desc: &SetDescriptor, n: u64) -> PathBuf {
        let slug: String =
            desc.name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
        self.root.join(format!("chi-{slug}-{}-{n}.bin", &hex(&desc.digest())[..16]))
    }

    fn tau_path(&self, q: u64, n: u64) -> PathBuf {
        self.root.join(format!("tau-{q}-{n}.bin"))
    }

    pub fn store_char_table(&self, desc: &SetDescriptor, table: &CharTable) -> Result<PathBuf> {
        let path = self.char_path(desc, table.bound());
        write_atomic(&path, &header(CHAR_MAGIC, &desc.digest(), table.bound()), |w| {
            for word in table.words() {
                w.write_all(&word.to_le_bytes())?;
            }
            Ok(())
        })?;
        Ok(path)
    }

    pub fn load_char_table(&self, desc: &SetDescriptor, n: u64) -> Result<Option<CharTable>> {
        let Some(body) = read_payload(&self.char_path(desc, n), CHAR_MAGIC, &desc.digest(), n)? else {
            return Ok(None);
        };
        if body.len() != (n / 64 + 1) as usize * 8 {
            return Ok(None);
        }
        let words = body.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Some(CharTable::from_words(&desc.name, n, words, BuildStats::default())))
    }

    pub fn store_tau(&self, table: &TauTable) -> Result<PathBuf> {
        let path = self.tau_path(table.modulus(), table.bound());
        write_atomic(&path, &header(TAU_MAGIC, &tau_key(table.modulus()), table.bound()), |w| {
            for v in table.values() {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        })?;
        Ok(path)
    }

    pub fn load_tau(&self, q: u64, n: u64) -> Result<Option<TauTable>> {
        let Some(body) = read_payload(&self.tau_path(q, n), TAU_MAGIC, &tau_key(q), n)? else {
            return Ok(None);
        };
        if body.len() != n as usize * 4 {
            return Ok(None);
        }
        let mut values = Vec::with_capacity(n as usize + 1);
        values.push(0);
        for c in body.chunks_exact(4) {
            let v = u32::from_le_bytes(c.try_into().expect("4 bytes"));
            if u64::from(v) >= q {
                return Err(Error::Cache(format!("residue {v} out of range mod {q}")));
            }
            values.push(v);
        }
        Ok(Some(TauTable::from_raw(q, values)))
    }
}

/// χ table from the cache when present, otherwise built (and stored).
pub fn char_table_cached(cache: Option<&CacheDir>, desc: &SetDescriptor, n: u64, exec: Exec) -> Result<CharTable> {
    if let Some(c) = cache {
        if let Some(t) = c.load_char_table(desc, n)? {
            return Ok(t);
        }
    }
    let t = sieve::build_char_table_with(desc, n, exec, sieve::DEFAULT_SEGMENT)?;
    if let Some(c) = cache {
        c.store_char_table(desc, &t)?;
    }
    Ok(t)
}

/// τ tables for several moduli, from the cache where possible; the missing
/// ones are computed in a single pass.
pub fn tau_tables_cached(cache: Option<&CacheDir>, moduli: &[u64], n: u64, exec: Exec) -> Result<Vec<Arc<TauTable>>> {
    let mut out: Vec<Option<Arc<TauTable>>> = vec![None; moduli.len()];
    if let Some(c) = cache {
        for (slot, &q) in out.iter_mut().zip(moduli) {
            *slot = c.load_tau(q, n)?.map(Arc::new);
        }
    }
    let missing: Vec<u64> = moduli.iter().zip(&out).filter(|(_, t)| t.is_none()).map(|(&q, _)| q).collect();
    if !missing.is_empty() {
        let built = tau::tau_mod_many(&missing, n, exec)?;
        let mut it = built.into_iter();
        for slot in out.iter_mut().filter(|t| t.is_none()) {
            let t = it.next().expect("one table per missing modulus");
            if let Some(c) = cache {
                c.store_tau(&t)?;
            }
            *slot = Some(Arc::new(t));
        }
    }
    Ok(out.into_iter().map(|t| t.expect("filled")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setspec::builtin;

    #[test]
    fn char_round_trip_and_invalidation() {
        let dir = tempfile::tempdir().unwrap();
        let c = CacheDir::new(dir.path()).unwrap();
        let d = builtin("sum2sq", None).unwrap();
        let t = char_table_cached(Some(&c), &d, 10_000, Exec::Sequential).unwrap();
        let back = c.load_char_table(&d, 10_000).unwrap().unwrap();
        assert_eq!(t, back);
        assert!(c.load_char_table(&d, 9_999).unwrap().is_none());
        // a different descriptor never reads this file, and a tampered digest is a miss
        let path = c.char_path(&d, 10_000);
        let mut bytes = fs::read(&path).unwrap();
        bytes[8] ^= 0xff;
        fs::write(&path, &bytes).unwrap();
        assert!(c.load_char_table(&d, 10_000).unwrap().is_none());
        let t2 = char_table_cached(Some(&c), &d, 10_000, Exec::Sequential).unwrap();
        assert_eq!(t, t2);
        assert!(c.load_char_table(&d, 10_000).unwrap().is_some());
    }

    #[test]
    fn tau_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = CacheDir::new(dir.path()).unwrap();
        let a = tau_tables_cached(Some(&c), &[5, 691], 2000, Exec::Sequential).unwrap();
        let b = tau_tables_cached(Some(&c), &[691, 5], 2000, Exec::Sequential).unwrap();
        assert_eq!(*a[0], *b[1]);
        assert_eq!(*a[1], *b[0]);
        assert_eq!(a[1].get(2).unwrap(), 691 - 24);
        let bytes = fs::read(c.tau_path(5, 2000)).unwrap();
        assert_eq!(&bytes[..4], b"MSTT");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), FORMAT_VERSION);
        assert_eq!(bytes.len(), HEADER_LEN + 2000 * 4);
    }
}
