//! CSV and JSON output.
//!
//! Every CSV starts with a comment line `# qvdp <kind> v<version>` naming the
//! table schema, followed by a header row. JSON files carry the same
//! `kind`/`version` pair.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VdpError};
use crate::meanfield::{BoundaryPoint, PhasePoint};
use crate::wigner::{PhaseDistribution, WignerGrid};

pub const SCHEMA_VERSION: u32 = 1;

pub const WIGNER_COLUMNS: [&str; 3] = ["re_alpha", "im_alpha", "w"];
pub const PHASE_COLUMNS: [&str; 2] = ["phi", "p"];
pub const RADIAL_COLUMNS: [&str; 2] = ["r", "w"];
pub const PHASE_DIAGRAM_COLUMNS: [&str; 5] = ["kappa2", "v", "branch", "r", "converged"];
pub const BOUNDARY_COLUMNS: [&str; 3] = ["kappa2", "v_critical", "tolerance"];

fn csv_error(e: csv::Error) -> VdpError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => VdpError::Io(io),
        other => VdpError::InvalidParameter(format!("csv: {other:?}")),
    }
}

fn write_table<I, R>(path: &Path, kind: &str, columns: &[&str], rows: I) -> Result<usize>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# qvdp {kind} v{SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns).map_err(csv_error)?;
    let mut count = 0;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
        count += 1;
    }
    w.flush()?;
    Ok(count)
}

fn num(x: f64) -> String {
    // shortest representation that round-trips
    format!("{x:?}")
}

/// Numeric table with arbitrary columns, e.g. populations or trajectories.
pub fn write_columns(path: &Path, kind: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<usize> {
    if let Some(bad) = rows.iter().find(|r| r.len() != columns.len()) {
        return Err(VdpError::DimensionMismatch { expected: columns.len(), found: bad.len() });
    }
    write_table(path, kind, columns, rows.iter().map(|r| r.iter().map(|&x| num(x)).collect::<Vec<_>>()))
}

/// Parsed CSV: schema kind and version from the comment line, header, rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: String,
    pub version: u32,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Column `name` parsed as numbers.
    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .column(name)
            .ok_or_else(|| VdpError::InvalidParameter(format!("missing column {name}")))?;
        self.rows
            .iter()
            .map(|r| {
                r[k].parse::<f64>()
                    .map_err(|_| VdpError::InvalidParameter(format!("non-numeric {name}: {}", r[k])))
            })
            .collect()
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    let bad = || VdpError::InvalidParameter(format!("{}: missing schema line", path.display()));
    let mut parts = first.trim().strip_prefix("# qvdp ").ok_or_else(bad)?.split_whitespace();
    let kind = parts.next().ok_or_else(bad)?.to_string();
    let version = parts
        .next()
        .and_then(|v| v.strip_prefix('v'))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(csv_error)?;
    let columns = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()).map_err(csv_error))
        .collect::<Result<_>>()?;
    Ok(Table { kind, version, columns, rows })
}

pub fn write_wigner_csv(path: &Path, grid: &WignerGrid) -> Result<usize> {
    let rows = grid
        .points()
        .zip(&grid.values)
        .map(|(a, &w)| [num(a.re), num(a.im), num(w)]);
    write_table(path, "wigner", &WIGNER_COLUMNS, rows)
}

/// Reads a grid written by [`write_wigner_csv`].
pub fn read_wigner_csv(path: &Path) -> Result<WignerGrid> {
    let t = read_table(path)?;
    let x = t.numbers("re_alpha")?;
    let values = t.numbers("w")?;
    let resolution = (values.len() as f64).sqrt().round() as usize;
    if resolution < 2 || resolution * resolution != values.len() {
        return Err(VdpError::InvalidParameter(format!("{} points do not form a square grid", values.len())));
    }
    Ok(WignerGrid { extent: -x[0], resolution, values, warnings: Vec::new() })
}

/// Density sampled at `points` equally spaced angles.
pub fn write_phase_csv(path: &Path, dist: &PhaseDistribution, points: usize) -> Result<usize> {
    let (phi, p) = dist.sample(points);
    write_table(path, "phase", &PHASE_COLUMNS, phi.iter().zip(&p).map(|(a, d)| [num(*a), num(*d)]))
}

/// Tabulated `(angle, density)` pairs, e.g. a histogram.
pub fn write_phase_samples_csv(path: &Path, phi: &[f64], p: &[f64]) -> Result<usize> {
    write_table(path, "phase", &PHASE_COLUMNS, phi.iter().zip(p).map(|(a, d)| [num(*a), num(*d)]))
}

pub fn write_radial_csv(path: &Path, r: &[f64], w: &[f64]) -> Result<usize> {
    write_table(path, "radial", &RADIAL_COLUMNS, r.iter().zip(w).map(|(a, b)| [num(*a), num(*b)]))
}

pub fn write_phase_diagram_csv(path: &Path, points: &[PhasePoint]) -> Result<usize> {
    let rows = points.iter().map(|p| {
        [
            num(p.kappa2),
            num(p.v),
            p.branch.as_str().to_string(),
            num(p.r),
            p.converged.to_string(),
        ]
    });
    write_table(path, "phase_diagram", &PHASE_DIAGRAM_COLUMNS, rows)
}

pub fn write_boundary_csv(path: &Path, points: &[BoundaryPoint]) -> Result<usize> {
    let rows = points.iter().map(|p| [num(p.kappa2), num(p.v_critical), num(p.tolerance)]);
    write_table(path, "boundary", &BOUNDARY_COLUMNS, rows)
}

/// JSON form of a [`PhaseDistribution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseJson {
    pub kind: String,
    pub version: u32,
    /// `c_k` for `k = 0..=k_max` as `[re, im]`.
    pub harmonics: Vec<[f64; 2]>,
    /// Amplitudes `2 Re c_k` of `cos kφ`.
    pub cosine_amplitudes: Vec<f64>,
}

impl PhaseJson {
    pub fn new(dist: &PhaseDistribution) -> Self {
        Self {
            kind: "phase".into(),
            version: SCHEMA_VERSION,
            harmonics: dist.harmonics.iter().map(|c| [c.re, c.im]).collect(),
            cosine_amplitudes: (0..=dist.k_max()).map(|k| dist.cosine_amplitude(k)).collect(),
        }
    }

    pub fn distribution(&self) -> PhaseDistribution {
        PhaseDistribution {
            harmonics: self.harmonics.iter().map(|&[re, im]| crate::Complex64::new(re, im)).collect(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::Branch;
    use crate::Complex64;

    #[test]
    fn wigner_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let grid = crate::wigner::grid_from_fn(2.0, 5, 1, |a| (-a.norm_sqr()).exp());
        assert_eq!(write_wigner_csv(&path, &grid).unwrap(), 25);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# qvdp wigner v1\nre_alpha,im_alpha,w\n"));
        let back = read_wigner_csv(&path).unwrap();
        assert_eq!(back.resolution, 5);
        assert_eq!(back.extent, 2.0);
        assert_eq!(back.values, grid.values);
    }

    #[test]
    fn phase_tables_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let dist = PhaseDistribution {
            harmonics: vec![Complex64::new(1.0 / std::f64::consts::TAU, 0.0), Complex64::new(0.01, -0.02)],
        };
        let csv_path = dir.path().join("p.csv");
        write_phase_csv(&csv_path, &dist, 8).unwrap();
        let t = read_table(&csv_path).unwrap();
        assert_eq!((t.kind.as_str(), t.version), ("phase", SCHEMA_VERSION));
        assert_eq!(t.numbers("p").unwrap()[3], dist.density(t.numbers("phi").unwrap()[3]));

        let json_path = dir.path().join("p.json");
        write_json(&json_path, &PhaseJson::new(&dist)).unwrap();
        let back: PhaseJson = read_json(&json_path).unwrap();
        assert_eq!(back.distribution().harmonics, dist.harmonics);
        assert_eq!(back.cosine_amplitudes[1], 0.02);
    }

    #[test]
    fn phase_diagram_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let p = PhasePoint {
            v: 2.0,
            kappa2: 0.005,
            seed: Branch::Synchronized,
            branch: Branch::Synchronized,
            r: 9.87,
            converged: true,
        };
        write_phase_diagram_csv(&path, &[p]).unwrap();
        let t = read_table(&path).unwrap();
        assert_eq!(t.columns, PHASE_DIAGRAM_COLUMNS);
        assert_eq!(t.rows[0], ["0.005", "2.0", "synchronized", "9.87", "true"]);
    }
}
