//! Flat binary trajectory records.
//!
//! Each sample is 32 little-endian bytes: realization `u32`, time `f64`,
//! oscillator `u32`, `Re α` `f64`, `Im α` `f64`. Mean-field recordings use
//! oscillator id `u32::MAX`.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::langevin::{Recording, TrajectoryEnsemble};
use crate::error::Result;

pub const RECORD_BYTES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub realization: u32,
    pub time: f64,
    pub oscillator: u32,
    pub alpha: Complex64,
}

impl TrajectoryRecord {
    fn to_bytes(self) -> [u8; RECORD_BYTES] {
        let mut b = [0u8; RECORD_BYTES];
        b[0..4].copy_from_slice(&self.realization.to_le_bytes());
        b[4..12].copy_from_slice(&self.time.to_le_bytes());
        b[12..16].copy_from_slice(&self.oscillator.to_le_bytes());
        b[16..24].copy_from_slice(&self.alpha.re.to_le_bytes());
        b[24..32].copy_from_slice(&self.alpha.im.to_le_bytes());
        b
    }

    fn from_bytes(b: &[u8; RECORD_BYTES]) -> Self {
        let f = |r: std::ops::Range<usize>| f64::from_le_bytes(b[r].try_into().unwrap());
        let u = |r: std::ops::Range<usize>| u32::from_le_bytes(b[r].try_into().unwrap());
        Self {
            realization: u(0..4),
            time: f(4..12),
            oscillator: u(12..16),
            alpha: Complex64::new(f(16..24), f(24..32)),
        }
    }
}

/// Streams every stored sample of `ens` to `path`; returns the record count.
pub fn write_records(path: &Path, ens: &TrajectoryEnsemble) -> Result<usize> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let mut count = 0;
    for r in 0..ens.n_realizations {
        for (t, &time) in ens.times.iter().enumerate() {
            for (o, &alpha) in ens.sample(r, t).iter().enumerate() {
                let oscillator = match ens.recording {
                    Recording::Oscillators => o as u32,
                    Recording::MeanField => u32::MAX,
                };
                let rec = TrajectoryRecord {
                    realization: r as u32,
                    time,
                    oscillator,
                    alpha,
                };
                w.write_all(&rec.to_bytes())?;
                count += 1;
            }
        }
    }
    w.flush()?;
    Ok(count)
}

pub fn read_records(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    let mut buf = [0u8; RECORD_BYTES];
    loop {
        match r.read_exact(&mut buf) {
            Ok(()) => out.push(TrajectoryRecord::from_bytes(&buf)),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{simulate_langevin, LangevinParams, SampleOptions};

    #[test]
    fn records_round_trip() {
        let p = LangevinParams::new(1.0, 1.0).unwrap().with_pair_coupling(0.5);
        let ens = simulate_langevin(&p, 3, 1.0, 0.002, 8, &SampleOptions { sample_interval: 0.25, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.bin");
        let n = write_records(&path, &ens).unwrap();
        assert_eq!(n, 3 * 5 * 2);
        assert_eq!(std::fs::metadata(&path).unwrap().len() as usize, n * RECORD_BYTES);
        let back = read_records(&path).unwrap();
        let rec = back[2 * 5 * 2 + 3 * 2 + 1];
        assert_eq!(rec.realization, 2);
        assert_eq!(rec.oscillator, 1);
        assert_eq!(rec.time, ens.times[3]);
        assert_eq!(rec.alpha, ens.sample(2, 3)[1]);
    }
}
