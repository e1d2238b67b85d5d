use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{InterfaceSeries, Result, SeriesRow, SimError, SimState};

const SERIES_HEADER: &str = "t,h,hdot,front_flux,max_flux";
const SNAPSHOT_HEADER: &str = "r,u,v";

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `snap_t<time>.csv`, with the time printed in shortest round-trip form.
pub fn snapshot_file_name(t: f64) -> String {
    format!("snap_t{t}.csv")
}

pub fn write_series(path: &Path, series: &InterfaceSeries) -> Result<()> {
    let mut out = String::with_capacity(96 * (series.rows.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in &series.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(r.t),
            num(r.h),
            num(r.hdot),
            num(r.front_flux),
            num(r.max_flux)
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write `state` into `dir` under its snapshot name; returns the path.
pub fn write_snapshot(dir: &Path, state: &SimState) -> Result<PathBuf> {
    let path = dir.join(snapshot_file_name(state.t));
    let mut out = String::with_capacity(72 * (state.u.len() + 1));
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for i in 0..state.u.len() {
        let _ = writeln!(out, "{},{},{}", num(state.r(i)), num(state.u[i]), num(state.pressure(i)));
    }
    fs::write(&path, out)?;
    Ok(path)
}

fn parse_table(text: &str, header: &str, what: &'static str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate();
    let Some((_, first)) = lines.next() else {
        return Err(SimError::Parse {
            what,
            line: 1,
            detail: "empty file".into(),
        });
    };
    if first.trim() != header {
        return Err(SimError::Parse {
            what,
            line: 1,
            detail: format!("expected header `{header}`"),
        });
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| SimError::Parse {
            what,
            line: n + 1,
            detail: e.to_string(),
        })?;
        if row.len() != width {
            return Err(SimError::Parse {
                what,
                line: n + 1,
                detail: format!("expected {width} fields, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_series(path: &Path) -> Result<InterfaceSeries> {
    let text = fs::read_to_string(path)?;
    let rows = parse_table(&text, SERIES_HEADER, "series")?;
    Ok(InterfaceSeries {
        rows: rows
            .into_iter()
            .map(|r| SeriesRow {
                t: r[0],
                h: r[1],
                hdot: r[2],
                front_flux: r[3],
                max_flux: r[4],
            })
            .collect(),
    })
}

/// Read a snapshot written by [`write_snapshot`]. `m` and `dim` are not
/// stored in the file and must be supplied; the grid spacing is taken from
/// the first two radii.
pub fn read_snapshot(path: &Path, t: f64, m: f64, dim: u32) -> Result<SimState> {
    let text = fs::read_to_string(path)?;
    let rows = parse_table(&text, SNAPSHOT_HEADER, "snapshot")?;
    if rows.len() < 2 {
        return Err(SimError::Parse {
            what: "snapshot",
            line: 2,
            detail: "needs at least two grid points".into(),
        });
    }
    Ok(SimState {
        t,
        m,
        dim,
        dr: rows[1][0] - rows[0][0],
        u: rows.iter().map(|r| r[1]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let series = InterfaceSeries {
            rows: vec![
                SeriesRow {
                    t: 10.0,
                    h: 11.234_567_890_123_456,
                    hdot: 0.1 + 0.2,
                    front_flux: -1.0 / 3.0,
                    max_flux: f64::NAN,
                },
                SeriesRow {
                    t: 10.1,
                    h: 1e-300,
                    hdot: -0.0,
                    front_flux: 2.5,
                    max_flux: 7.0,
                },
            ],
        };
        write_series(&path, &series).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,h,hdot,front_flux,max_flux\n"));
        let back = read_series(&path).unwrap();
        for (a, b) in series.rows.iter().zip(&back.rows) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.h.to_bits(), b.h.to_bits());
            assert_eq!(a.hdot.to_bits(), b.hdot.to_bits());
            assert_eq!(a.front_flux.to_bits(), b.front_flux.to_bits());
            assert!(b.max_flux.is_nan() || a.max_flux == b.max_flux);
        }
    }

    #[test]
    fn snapshot_name_and_header() {
        assert_eq!(snapshot_file_name(50.0), "snap_t50.csv");
        assert_eq!(snapshot_file_name(12.5), "snap_t12.5.csv");
        let dir = tempfile::tempdir().unwrap();
        let state = SimState {
            t: 50.0,
            m: 2.0,
            dim: 2,
            dr: 0.05,
            u: vec![1.0, 0.5, 0.0],
        };
        let path = write_snapshot(dir.path(), &state).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,u,v"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,1.0000000000000000e0,2.0000000000000000e0"));
        let back = read_snapshot(&path, 50.0, 2.0, 2).unwrap();
        assert_eq!(back.u, state.u);
        assert!((back.dr - 0.05).abs() < 1e-15);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,h\n1,2\n").unwrap();
        assert!(matches!(read_series(&path), Err(SimError::Parse { line: 1, .. })));
        std::fs::write(&path, "t,h,hdot,front_flux,max_flux\n1,2,3\n").unwrap();
        assert!(matches!(read_series(&path), Err(SimError::Parse { line: 2, .. })));
    }
}
