//! Binary cache for [`ArithTable`].
//!
//! Layout, all integers little-endian:
//!
//! | bytes              | content                                      |
//! |--------------------|----------------------------------------------|
//! | 8                  | magic `MOMOARTH`                             |
//! | 4                  | version (`u32`)                              |
//! | 8                  | `n_max` (`u64`)                              |
//! | `ceil(n_max / 4)`  | μ codes, 2 bits each, `n = 1` in the low bits |
//! | `8 * n_max`        | Λ values as IEEE-754 `f64` bit patterns      |
//!
//! μ codes: `00 → 0`, `01 → +1`, `10 → -1`; `11` is rejected on read.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::ArithTable;
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 8] = b"MOMOARTH";
pub const CACHE_VERSION: u32 = 1;

fn encode_mu(m: i8) -> u8 {
    match m {
        0 => 0b00,
        1 => 0b01,
        _ => 0b10,
    }
}

fn decode_mu(code: u8) -> Result<i8> {
    match code {
        0b00 => Ok(0),
        0b01 => Ok(1),
        0b10 => Ok(-1),
        _ => Err(Error::CacheFormat("invalid μ code 0b11".into())),
    }
}

pub fn write_cache<W: Write>(table: &ArithTable, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&table.n_max.to_le_bytes())?;
    for chunk in table.mu_values().chunks(4) {
        let mut byte = 0u8;
        for (i, &m) in chunk.iter().enumerate() {
            byte |= encode_mu(m) << (2 * i);
        }
        w.write_all(&[byte])?;
    }
    for &l in table.lambda_values() {
        w.write_all(&l.to_bits().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cache<R: Read>(reader: R) -> Result<ArithTable> {
    let mut r = BufReader::new(reader);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != CACHE_VERSION {
        return Err(Error::CacheFormat(format!("unsupported version {version}")));
    }
    let mut long = [0u8; 8];
    r.read_exact(&mut long)?;
    let n_max = u64::from_le_bytes(long);
    if n_max == 0 || n_max > i32::MAX as u64 {
        return Err(Error::CacheFormat(format!("n_max {n_max} out of range")));
    }
    let n = n_max as usize;

    let mut packed = vec![0u8; n.div_ceil(4)];
    r.read_exact(&mut packed)?;
    let mut mu = Vec::with_capacity(n + 1);
    mu.push(0i8);
    for i in 0..n {
        mu.push(decode_mu((packed[i / 4] >> (2 * (i % 4))) & 0b11)?);
    }

    let mut raw = vec![0u8; 8 * n];
    r.read_exact(&mut raw)?;
    let mut lambda = Vec::with_capacity(n + 1);
    lambda.push(0.0);
    lambda.extend(raw.chunks_exact(8).map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().unwrap()))));

    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::CacheFormat("trailing bytes".into()));
    }
    Ok(ArithTable::from_parts(n_max, mu, lambda))
}

impl ArithTable {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_cache(self, File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ArithTable> {
        read_cache(File::open(path)?)
    }
}
