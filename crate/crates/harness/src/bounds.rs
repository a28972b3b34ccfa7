//! Witness bounds for externally measured correlations.
//!
//! Input CSV columns: `i, j, a, b, value` with 1-based sites and axes
//! `x`, `y`, `z`. Every pair needs all nine entries.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Matrix3;
use qchain_core::linalg::Axis;
use qchain_core::witness::{bound_c1, bound_c2, bound_c2_optimized, CorrelationMatrix};
use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;
use crate::error::{HarnessError, Result};
use crate::output::{build_id, fmt_f64, Manifest, RunDir, MANIFEST};

#[derive(Debug, Deserialize)]
struct Row {
    i: usize,
    j: usize,
    a: String,
    b: String,
    value: f64,
}

fn axis(s: &str) -> Result<Axis> {
    match s.trim().to_ascii_lowercase().as_str() {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        other => Err(HarnessError::Input(format!("unknown axis {other:?}"))),
    }
}

/// Parses correlation rows into one matrix per pair, in order of (i, j).
pub fn read_correlations<R: std::io::Read>(reader: R) -> Result<Vec<CorrelationMatrix>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut pairs: BTreeMap<(usize, usize), [[Option<f64>; 3]; 3]> = BTreeMap::new();
    for (line, rec) in rdr.deserialize::<Row>().enumerate() {
        let row = rec.map_err(|e| HarnessError::Input(format!("row {}: {e}", line + 2)))?;
        if row.i == 0 || row.j == 0 || row.i == row.j {
            return Err(HarnessError::Input(format!("row {}: sites ({}, {}) must be distinct and 1-based", line + 2, row.i, row.j)));
        }
        let (a, b) = (axis(&row.a)?, axis(&row.b)?);
        let slot = &mut pairs.entry((row.i, row.j)).or_default()[a.index()][b.index()];
        if slot.is_some() {
            return Err(HarnessError::Input(format!("row {}: duplicate entry ({}, {}, {}, {})", line + 2, row.i, row.j, row.a, row.b)));
        }
        *slot = Some(row.value);
    }
    if pairs.is_empty() {
        return Err(HarnessError::Input("no correlation rows".into()));
    }
    pairs
        .into_iter()
        .map(|((i, j), m)| {
            let mut x = Matrix3::zeros();
            for a in 0..3 {
                for b in 0..3 {
                    x[(a, b)] = m[a][b].ok_or_else(|| HarnessError::Input(format!("pair ({i}, {j}) is missing entry {a}{b}")))?;
                }
            }
            Ok(CorrelationMatrix::from_entries(i, j, x)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairBounds {
    pub i: usize,
    pub j: usize,
    pub c1: f64,
    pub c2: f64,
    pub c2_opt: Option<f64>,
    pub axes: Option<Matrix3<f64>>,
    pub asymmetry: f64,
}

pub fn evaluate(x: &CorrelationMatrix) -> PairBounds {
    let (i, j) = x.sites();
    let opt = bound_c2_optimized(x).ok();
    PairBounds { i, j, c1: bound_c1(x), c2: bound_c2(x), c2_opt: opt.map(|o| o.value), axes: opt.map(|o| o.axes), asymmetry: x.asymmetry() }
}

/// Reads `input`, writes `bounds.csv` and the manifest into `dir`.
pub fn run_bounds(input: &Path, dir: &Path) -> Result<Vec<PairBounds>> {
    let text = std::fs::read(input).map_err(|source| HarnessError::Io { path: input.to_path_buf(), source })?;
    let results: Vec<PairBounds> = read_correlations(text.as_slice())?.iter().map(evaluate).collect();
    let mut run = RunDir::create(dir)?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|p| {
            let axes = p.axes.map_or(String::new(), |a| a.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "));
            vec![
                p.i.to_string(),
                p.j.to_string(),
                fmt_f64(p.c1),
                fmt_f64(p.c2),
                p.c2_opt.map_or("NaN".into(), fmt_f64),
                fmt_f64(p.asymmetry),
                axes,
            ]
        })
        .collect();
    run.write_csv("bounds.csv", &["pair_i", "pair_j", "c1", "c2", "c2_opt", "asymmetry", "axes_column_major"], &rows)?;
    let refused = results.iter().filter(|p| p.c2_opt.is_none()).count();
    let flags = if refused > 0 { vec![format!("c2_opt_refused_asymmetric: {refused} pair(s)")] } else { Vec::new() };
    let m = Manifest {
        status: "ok",
        build: build_id(),
        command: "bounds".into(),
        config: serde_json::json!({ "correlations": input.display().to_string() }),
        config_sha256: sha256_hex(&text),
        seed: None,
        threads: None,
        noise: None,
        flags,
        outputs: run.checksums().clone(),
        error: None,
    };
    run.write_json(MANIFEST, &m)?;
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_csv() -> String {
        let mut s = String::from("i,j,a,b,value\n");
        for (a, b, v) in [("x", "x", 1.0), ("y", "y", 1.0), ("z", "z", -1.0)] {
            s += &format!("1,2,{a},{b},{v}\n");
        }
        for (a, b) in [("x", "y"), ("x", "z"), ("y", "x"), ("y", "z"), ("z", "x"), ("z", "y")] {
            s += &format!("1,2,{a},{b},0\n");
        }
        s
    }

    #[test]
    fn bell_correlations() {
        let xs = read_correlations(bell_csv().as_bytes()).unwrap();
        let b = evaluate(&xs[0]);
        assert!((b.c1 - 1.0).abs() < 1e-12 && (b.c2 - 1.0).abs() < 1e-12);
        assert!((b.c2_opt.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_input_is_rejected() {
        let missing: String = bell_csv().lines().take(9).map(|l| format!("{l}\n")).collect();
        assert!(read_correlations(missing.as_bytes()).is_err());
        let dup = bell_csv() + "1,2,x,x,0.5\n";
        assert!(read_correlations(dup.as_bytes()).is_err());
        let bad_axis = bell_csv().replace("1,2,z,z", "1,2,w,z");
        assert!(read_correlations(bad_axis.as_bytes()).is_err());
        let out_of_range = bell_csv().replace("1,2,x,x,1", "1,2,x,x,1.5");
        assert!(read_correlations(out_of_range.as_bytes()).is_err());
        assert!(read_correlations("i,j,a,b,value\n".as_bytes()).is_err());
    }
}
