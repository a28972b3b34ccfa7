//! Run directories: CSV tables, SVG charts and the manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::{sha256_hex, ScenarioConfig};
use crate::error::{HarnessError, Result};
use crate::scenario::RunResult;

pub const MANIFEST: &str = "manifest.json";

pub fn build_id() -> String {
    format!("qchain-harness {} ({})", env!("CARGO_PKG_VERSION"), if cfg!(debug_assertions) { "debug" } else { "release" })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

/// Collects the files of one output directory and their checksums.
pub struct RunDir {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(RunDir { root: root.to_path_buf(), written: BTreeMap::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        self.written.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let path = self.root.join(name);
        let csv_err = |e: csv::Error| HarnessError::Io { path: path.clone(), source: e.into() };
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io { path: path.clone(), source: e.into_error() })?;
        self.write(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("results serialise");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn checksums(&self) -> &BTreeMap<String, String> {
        &self.written
    }
}

/// Full-precision decimal; NaN when undefined.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

fn cell(v: f64, enabled: bool) -> String {
    if enabled {
        fmt_f64(v)
    } else {
        String::new()
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub status: &'static str,
    pub build: String,
    pub command: String,
    pub config: Value,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<Value>,
    pub flags: Vec<String>,
    pub outputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

/// Writes a failure manifest into `dir`, creating it if needed.
pub fn write_error_manifest(dir: &Path, command: &str, config_path: Option<&Path>, err: &HarnessError) -> Result<()> {
    let mut run = RunDir::create(dir)?;
    let config = config_path
        .and_then(|p| std::fs::read_to_string(p).ok())
        .map(|text| (serde_json::from_str(&text).unwrap_or(Value::String(text.clone())), sha256_hex(text.as_bytes())));
    let (config, config_sha256) = config.unwrap_or((Value::Null, String::new()));
    let m = Manifest {
        status: "error",
        build: build_id(),
        command: command.into(),
        config,
        config_sha256,
        seed: None,
        threads: None,
        noise: None,
        flags: Vec::new(),
        outputs: BTreeMap::new(),
        error: Some(ErrorReport { kind: err.kind().into(), message: err.to_string() }),
    };
    run.write_json(MANIFEST, &m)
}

const TIMESERIES_HEADER: [&str; 8] = ["time", "pair_i", "pair_j", "e_n", "c1", "c2", "c2_opt", "ensemble_mean_flag"];

/// Writes every output of a finished run and its manifest.
pub fn emit_outputs(dir: &Path, cfg: &ScenarioConfig, result: &RunResult, threads: Option<usize>) -> Result<RunDir> {
    let mut run = RunDir::create(dir)?;
    let obs = &cfg.observables;
    let flag = if result.is_ensemble() { "1" } else { "0" };
    if !result.pairs.is_empty() {
        let mut rows = Vec::new();
        let mut std_rows = Vec::new();
        for p in &result.pairs {
            for (k, &t) in result.times.iter().enumerate() {
                let (m, s) = (&p.mean, &p.std);
                let row = |x: &crate::scenario::PairSeries| {
                    vec![
                        fmt_f64(t),
                        p.sites[0].to_string(),
                        p.sites[1].to_string(),
                        cell(x.e_n[k], obs.e_n),
                        cell(x.c1[k], obs.c1),
                        cell(x.c2[k], obs.c2),
                        cell(x.c2_opt[k], obs.c2_opt),
                    ]
                };
                let mut r = row(m);
                r.push(flag.into());
                rows.push(r);
                if result.is_ensemble() {
                    std_rows.push(row(s));
                }
            }
        }
        run.write_csv("timeseries.csv", &TIMESERIES_HEADER, &rows)?;
        if result.is_ensemble() {
            run.write_csv("ensemble_std.csv", &TIMESERIES_HEADER[..7], &std_rows)?;
        }
        if obs.frozen_axes.is_some() {
            let mut rows = Vec::new();
            for p in &result.pairs {
                for (k, &t) in result.times.iter().enumerate() {
                    rows.push(vec![
                        fmt_f64(t),
                        p.sites[0].to_string(),
                        p.sites[1].to_string(),
                        fmt_f64(p.mean.c2_frozen[k]),
                        fmt_f64(p.mean.c2_opt[k]),
                        cell(p.mean.e_n[k], obs.e_n),
                    ]);
                }
            }
            run.write_csv("frozen_axes.csv", &["time", "pair_i", "pair_j", "c2_frozen", "c2_opt", "e_n"], &rows)?;
        }
        for p in &result.pairs {
            let mut series = Vec::new();
            if obs.e_n {
                series.push(("E_N", p.mean.e_n.as_slice()));
            }
            if obs.c1 {
                series.push(("C1", p.mean.c1.as_slice()));
            }
            if obs.c2 {
                series.push(("C2", p.mean.c2.as_slice()));
            }
            if obs.c2_opt {
                series.push(("C2'", p.mean.c2_opt.as_slice()));
            }
            let title = format!("pair ({}, {})", p.sites[0], p.sites[1]);
            let svg = line_chart(&title, &result.times, &series);
            run.write(&format!("pair_{}_{}.svg", p.sites[0], p.sites[1]), svg.as_bytes())?;
        }
    }
    if !result.blocks.is_empty() {
        let mut rows = Vec::new();
        for b in &result.blocks {
            for (k, &t) in result.times.iter().enumerate() {
                let mut r = vec![fmt_f64(t)];
                r.extend(b.sites.iter().map(|s| s.to_string()));
                r.push(fmt_f64(b.mean[k]));
                r.push(fmt_f64(b.std[k]));
                r.push(flag.into());
                rows.push(r);
            }
        }
        let header = ["time", "a1", "a2", "b1", "b2", "e_n", "e_n_std", "ensemble_mean_flag"];
        run.write_csv("blocks.csv", &header, &rows)?;
    }
    if !result.pairs.is_empty() || !result.blocks.is_empty() {
        run.write_json("summary.json", &summary(result))?;
    }
    let noise = serde_json::to_value(result.noise).expect("noise serialises");
    let m = Manifest {
        status: "ok",
        build: build_id(),
        command: "run".into(),
        config: serde_json::to_value(cfg).expect("config serialises"),
        config_sha256: cfg.hash(),
        seed: Some(cfg.seed),
        threads,
        noise: Some(noise),
        flags: result.flags.clone(),
        outputs: run.checksums().clone(),
        error: None,
    };
    run.write_json(MANIFEST, &m)?;
    Ok(run)
}

fn summary(result: &RunResult) -> Value {
    let pairs: Vec<Value> = result
        .pairs
        .iter()
        .zip(result.frozen_axes.iter().chain(std::iter::repeat(&None)))
        .map(|(p, axes)| {
            let fm = &p.first_max;
            serde_json::json!({
                "pair": p.sites,
                "first_maximum": {
                    "found": fm.found,
                    "members": fm.members,
                    "mean_value": finite(fm.mean_value),
                    "std_value": finite(fm.std_value),
                    "mean_time": finite(fm.mean_time),
                    "relative_fluctuation": fm.relative_fluctuation,
                },
                "frozen_axes": axes.map(|a| (0..3).map(|c| [a[(0, c)], a[(1, c)], a[(2, c)]]).collect::<Vec<_>>()),
            })
        })
        .collect();
    let blocks: Vec<Value> = result
        .blocks
        .iter()
        .map(|b| {
            let fm = &b.first_max;
            serde_json::json!({
                "blocks": b.sites,
                "first_maximum": {
                    "found": fm.found,
                    "mean_value": finite(fm.mean_value),
                    "mean_time": finite(fm.mean_time),
                    "relative_fluctuation": fm.relative_fluctuation,
                },
            })
        })
        .collect();
    serde_json::json!({
        "members": result.members,
        "samples": result.times.len(),
        "pairs": pairs,
        "blocks": blocks,
        "diagnostics": result.diagnostics,
    })
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Minimal SVG line chart; NaN samples break the line.
pub fn line_chart(title: &str, x: &[f64], series: &[(&str, &[f64])]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 400.0, 60.0, 110.0, 30.0, 40.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let x0 = x.first().copied().unwrap_or(0.0);
    let x1 = x.last().copied().filter(|v| *v > x0).unwrap_or(x0 + 1.0);
    let ymax = series
        .iter()
        .flat_map(|(_, ys)| ys.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let sx = |v: f64| ml + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| mt + ph - v / ymax * ph;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, ml + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (tx, ty) = (x0 + f * (x1 - x0), f * ymax);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            sx(tx),
            mt + ph + 15.0,
            tick(tx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            ml - 5.0,
            sy(ty) + 4.0,
            tick(ty)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">t</text>"#, ml + pw / 2.0, h - 5.0);
    for (n, (label, ys)) in series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (xv, yv) in x.iter().zip(ys.iter()) {
            if !yv.is_finite() {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(*xv), sy(*yv));
            pen_down = true;
        }
        if !d.is_empty() {
            let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        }
        let ly = mt + 15.0 + 18.0 * n as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - mr + 10.0, w - mr + 30.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#, w - mr + 35.0, ly + 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('\'', "&apos;")
}
