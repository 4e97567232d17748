//! CSV persistence and atomic file writes.

use std::fs;
use std::path::Path;

use super::run::{MeanCi, SummaryRow, TrajectoryRecord};
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 9] =
    ["seed", "iter", "f_val", "grad_norm_sq", "step_min", "step_mean", "step_max", "update_linf", "oracle_calls"];

pub const SUMMARY_HEADER: [&str; 16] = [
    "fingerprint",
    "label",
    "hyperparameters",
    "seeds",
    "diverged",
    "converged",
    "final_f_mean",
    "final_f_ci",
    "tail_grad_mean",
    "tail_grad_ci",
    "tail_step_mean",
    "tail_step_ci",
    "val_f_mean",
    "val_f_ci",
    "rank",
    "warning",
];

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Shortest representation that parses back to the same `f64` (at most 17
/// significant digits); NaN is written as `inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "inf".into()
    } else {
        format!("{v:?}")
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

pub fn trajectory_csv(records: &[TrajectoryRecord]) -> Result<String> {
    let mut w = writer();
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.iter.to_string(),
            fmt_f64(r.f_val),
            fmt_f64(r.grad_norm_sq),
            fmt_f64(r.step_min),
            fmt_f64(r.step_mean),
            fmt_f64(r.step_max),
            fmt_f64(r.update_linf),
            r.oracle_calls.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn write_csv(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    write_atomic(path, trajectory_csv(records)?.as_bytes())
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut rows = rdr.records();
    let header = rows.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?.map_err(csv_err)?;
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::Parse { line: 1, msg: format!("expected header {}", TRAJECTORY_HEADER.join(",")) });
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != TRAJECTORY_HEADER.len() {
            return Err(Error::Parse { line, msg: format!("expected {} fields, got {}", TRAJECTORY_HEADER.len(), row.len()) });
        }
        let int = |k: usize| {
            row[k].parse::<u64>().map_err(|e| Error::Parse { line, msg: format!("{}: {e}", TRAJECTORY_HEADER[k]) })
        };
        let float = |k: usize| {
            let v = row[k]
                .parse::<f64>()
                .map_err(|e| Error::Parse { line, msg: format!("{}: {e}", TRAJECTORY_HEADER[k]) })?;
            if v.is_nan() {
                return Err(Error::Parse { line, msg: format!("{}: NaN is not allowed", TRAJECTORY_HEADER[k]) });
            }
            Ok(v)
        };
        out.push(TrajectoryRecord {
            seed: int(0)?,
            iter: int(1)?,
            f_val: float(2)?,
            grad_norm_sq: float(3)?,
            step_min: float(4)?,
            step_mean: float(5)?,
            step_max: float(6)?,
            update_linf: float(7)?,
            oracle_calls: int(8)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    parse_trajectory_csv(&fs::read_to_string(path)?)
}

/// Summary rows with optional rank and warning columns.
pub fn summary_csv(rows: &[(SummaryRow, Option<usize>, String)]) -> Result<String> {
    let mut w = writer();
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    let pair = |m: Option<MeanCi>| m.map_or((String::new(), String::new()), |m| (fmt_f64(m.mean), fmt_f64(m.ci)));
    for (s, rank, warning) in rows {
        let (vf, vc) = pair(s.val_f);
        w.write_record([
            s.fingerprint.clone(),
            s.label.clone(),
            s.hyperparameters.clone(),
            s.seeds.to_string(),
            s.diverged.to_string(),
            s.converged.to_string(),
            fmt_f64(s.final_f.mean),
            fmt_f64(s.final_f.ci),
            fmt_f64(s.tail_grad.mean),
            fmt_f64(s.tail_grad.ci),
            fmt_f64(s.tail_step.mean),
            fmt_f64(s.tail_step.ci),
            vf,
            vc,
            rank.map_or(String::new(), |r| r.to_string()),
            warning.clone(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Wall-clock timings, kept apart from the deterministic outputs.
pub fn timing_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = writer();
    w.write_record(["fingerprint", "label", "wall_ms"]).map_err(csv_err)?;
    for s in rows {
        w.write_record([s.fingerprint.clone(), s.label.clone(), format!("{:.3}", s.wall_ms)]).map_err(csv_err)?;
    }
    finish(w)
}

/// Rows of a generic CSV with a header, as strings.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
        let mut it = rdr.records();
        let header: Vec<String> = it
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing header".into() })?
            .map_err(csv_err)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for r in it {
            let r = r.map_err(csv_err)?;
            let line = r.position().map_or(0, |p| p.line() as usize);
            rows.push((line, r.iter().map(str::to_string).collect()));
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column `{name}` not in header {}", self.header.join(","))))
    }

    pub fn float(&self, row: usize, col: usize) -> Result<f64> {
        let (line, r) = &self.rows[row];
        r[col].parse::<f64>().map_err(|e| Error::Parse { line: *line, msg: format!("{}: {e}", self.header[col]) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn sample(n: usize) -> Vec<TrajectoryRecord> {
        let mut rng = Rng::new(1);
        (0..n)
            .map(|i| TrajectoryRecord {
                seed: (i / 100) as u64,
                iter: (i % 100) as u64,
                f_val: rng.gauss(0.0, 1e3) * 1e-7,
                grad_norm_sq: rng.next_f64().powi(7),
                step_min: 1.0 / 3.0,
                step_mean: rng.uniform(0.0, 1e-300),
                step_max: if i == 3 { f64::INFINITY } else { 0.1 },
                update_linf: 0.0,
                oracle_calls: 2 * i as u64,
            })
            .collect()
    }

    #[test]
    fn empty_is_header_only() {
        assert_eq!(trajectory_csv(&[]).unwrap(), format!("{}\n", TRAJECTORY_HEADER.join(",")));
        assert!(parse_trajectory_csv(&trajectory_csv(&[]).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn round_trip_is_lossless() {
        let recs = sample(1000);
        let text = trajectory_csv(&recs).unwrap();
        assert_eq!(parse_trajectory_csv(&text).unwrap(), recs);
        assert_eq!(trajectory_csv(&recs).unwrap(), text);
    }

    #[test]
    fn nan_becomes_inf() {
        let mut r = sample(1);
        r[0].f_val = f64::NAN;
        let text = trajectory_csv(&r).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",inf,"));
        assert!(!text.contains("NaN"));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let head = TRAJECTORY_HEADER.join(",");
        let bad = format!("{head}\n0,1,1.0,1.0,1,1,1,1,1\n0,2,x,1.0,1,1,1,1,2\n");
        match parse_trajectory_csv(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_trajectory_csv("a,b\n"), Err(Error::Parse { line: 1, .. })));
        let nan = format!("{head}\n0,1,NaN,1.0,1,1,1,1,1\n");
        assert!(matches!(parse_trajectory_csv(&nan), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
