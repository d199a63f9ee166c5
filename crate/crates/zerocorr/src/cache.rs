//! Binary prime cache.
//!
//! Layout, all little-endian: magic `b"PTAB"`, `u32` version, `u64` cutoff,
//! `u64` count, then `count` × `u64` primes. Logs and amplitudes are
//! recomputed on load.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use zerocorr_core::primes::PrimeTable;

use crate::error::{CliError, CliResult};

pub const MAGIC: [u8; 4] = *b"PTAB";
pub const VERSION: u32 = 1;

pub fn write_table<W: Write>(table: &PrimeTable, mut w: W) -> io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&table.p_star().to_le_bytes())?;
    w.write_all(&(table.len() as u64).to_le_bytes())?;
    for p in table.primes() {
        w.write_all(&p.to_le_bytes())?;
    }
    w.flush()
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_table<R: Read>(mut r: R) -> CliResult<PrimeTable> {
    let bad = |m: &str| CliError::Cache(m.to_string());
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v).map_err(|_| bad("truncated header"))?;
    let version = u32::from_le_bytes(v);
    if version != VERSION {
        return Err(CliError::Cache(format!("unsupported version {version}")));
    }
    let p_star = read_u64(&mut r).map_err(|_| bad("truncated header"))?;
    let count = read_u64(&mut r).map_err(|_| bad("truncated header"))?;
    // every prime is below p_star, so the count can't exceed it
    if count > p_star {
        return Err(bad("count larger than cutoff"));
    }
    let mut primes = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        primes.push(read_u64(&mut r).map_err(|_| bad("truncated prime list"))?);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok(PrimeTable::from_primes(p_star, &primes)?)
}

pub fn save(table: &PrimeTable, path: &Path) -> CliResult<()> {
    write_table(table, BufWriter::new(File::create(path)?))?;
    Ok(())
}

pub fn load(path: &Path) -> CliResult<PrimeTable> {
    read_table(BufReader::new(File::open(path)?))
}

/// The table below `p_star`, cut from a cached table when the cache reaches far
/// enough, built from scratch otherwise.
pub fn table_for(p_star: u64, cache: Option<&Path>) -> CliResult<PrimeTable> {
    if let Some(path) = cache {
        if path.exists() {
            let t = load(path)?;
            if t.p_star() >= p_star {
                return Ok(t.truncated(p_star)?);
            }
        }
    }
    Ok(PrimeTable::build(p_star)?)
}
