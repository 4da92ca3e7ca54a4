//! Binary checkpoint container.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                          |
//! |--------|------|----------------------------------|
//! | 0      | 8    | magic `CRWVCKPT`                 |
//! | 8      | 4    | format version (`u32`, = 1)      |
//! | 12     | 4    | reserved, zero                   |
//! | 16     | 8    | `n` (`u64`)                      |
//! | 24     | 8    | period `L` (`f64`)               |
//! | 32     | 8    | dealias cutoff (`f64`)           |
//! | 40     | 8    | σ (`f64`)                        |
//! | 48     | 8    | time (`f64`)                     |
//! | 56     | 16n  | `Z − α'` as `(re, im)` `f64` pairs |
//! | ...    | 16n  | `Z_{,α'}`                        |
//! | ...    | 16n  | `Z_t`                            |

use std::io::{Read, Write};

use num_complex::Complex64;

use super::state::WaveState;
use crate::error::{Error, Result};
use crate::spectral::{Field, SpectralGrid};

const MAGIC: &[u8; 8] = b"CRWVCKPT";
const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(state: &WaveState, mut out: W) -> Result<()> {
    let grid = state.grid();
    let mut buf = Vec::with_capacity(56 + 48 * grid.n_points());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&(grid.n_points() as u64).to_le_bytes());
    for x in [
        grid.length(),
        grid.dealias_cutoff(),
        state.sigma,
        state.time,
    ] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for f in [&state.zdev, &state.zp, &state.zt] {
        for z in f.values() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<WaveState> {
    let mut buf = Vec::new();
    input.read_to_end(&mut buf)?;
    if buf.len() < 56 || &buf[..8] != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(buf[16..24].try_into().unwrap()) as usize;
    let expected = 56 + 48 * n;
    if buf.len() != expected {
        return Err(Error::Checkpoint(format!(
            "expected {expected} bytes for n = {n}, found {}",
            buf.len()
        )));
    }
    let grid = SpectralGrid::new(n, f64_at(24), f64_at(32))?;
    let (sigma, time) = (f64_at(40), f64_at(48));
    let field = |k: usize| {
        let base = 56 + 16 * n * k;
        let vals = (0..n)
            .map(|j| Complex64::new(f64_at(base + 16 * j), f64_at(base + 16 * j + 8)))
            .collect();
        Field::new(&grid, vals)
    };
    WaveState::new(field(0)?, field(1)?, field(2)?, sigma, time)
}
