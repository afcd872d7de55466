//! Deterministic CSV/JSON serialization of run results.
//!
//! Every byte written here is a pure function of the resolved config:
//! numbers are printed at a fixed precision in a fixed notation, rows follow
//! grid order, JSON objects are emitted with sorted keys. Repeating a run
//! must reproduce the files exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use pwscat::scattering::ScatteringResult;
use pwscat::{AmplitudeSet, C64};

use crate::config::RunConfig;

/// Fixed-notation float: scientific, `precision` fractional digits.
pub fn num(x: f64, precision: usize) -> String {
    format!("{x:.precision$e}")
}

/// The `# `-prefixed provenance block at the top of every CSV.
pub fn header_block(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# pwscat {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# resolved config:");
    for line in cfg.header_echo().lines() {
        let _ = writeln!(out, "#   {line}");
    }
    out
}

/// Amplitude table: one row per outgoing direction.
pub fn amplitude_csv(cfg: &RunConfig, set: &AmplitudeSet) -> String {
    let prec = cfg.output.precision;
    let mut out = header_block(cfg);
    let _ = writeln!(out, "theta_deg,re_f,im_f,abs2_f,flag");
    for s in &set.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(s.theta.to_degrees(), prec),
            num(s.f.re, prec),
            num(s.f.im, prec),
            num(s.f.norm_sqr(), prec),
            if s.delta_excluded { 1 } else { 0 },
        );
    }
    out
}

fn complex_pair(z: C64) -> Value {
    json!([z.re, z.im])
}

fn coefficient_list(v: &ndarray::Array1<C64>) -> Value {
    Value::Array(v.iter().map(|&z| complex_pair(z)).collect())
}

/// JSON mirror of one scattering solution.
pub fn result_json(cfg: &RunConfig, res: &ScatteringResult, set: &AmplitudeSet) -> Value {
    let samples: Vec<Value> = set
        .samples
        .iter()
        .map(|s| {
            json!({
                "theta_deg": s.theta.to_degrees(),
                "re_f": s.f.re,
                "im_f": s.f.im,
                "abs2_f": s.f.norm_sqr(),
                "weight": s.weight,
                "delta_excluded": s.delta_excluded,
            })
        })
        .collect();
    let inc = res.incidence();
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "k": set.k,
        "mode": if res.mode() == pwscat::Mode::Full { "full" } else { "propagating" },
        "method": cfg.numerics.method,
        "incidence": {
            "side": if inc.side == pwscat::Side::Left { "left" } else { "right" },
            "theta0_deg": inc.theta0.to_degrees(),
            "grid_angle": inc.grid_angle,
            "p0": inc.p0,
            "node": inc.node,
        },
        "residual": res.residual(),
        "cond_m22": res.cond_m22(),
        "total_cross_section": set.total_cross_section(),
        "coefficients": {
            "transmitted_side": coefficient_list(res.transmitted_side()),
            "reflected_side": coefficient_list(res.reflected_side()),
            "left_tail": res.left_tail().map(coefficient_list).unwrap_or(Value::Null),
            "right_tail": res.right_tail().map(coefficient_list).unwrap_or(Value::Null),
        },
        "samples": samples,
    })
}

/// Per-direction comparison of two amplitude sets solved on the same grid.
pub fn compare_csv(
    cfg: &RunConfig,
    columns: &[(&str, &AmplitudeSet)],
) -> String {
    let prec = cfg.output.precision;
    let mut out = header_block(cfg);
    let mut header = String::from("theta_deg");
    for (name, _) in columns {
        let _ = write!(header, ",re_f_{name},im_f_{name}");
    }
    for (name, _) in &columns[1..] {
        let _ = write!(header, ",dev_{name}");
    }
    let _ = writeln!(out, "{header}");
    let base = &columns[0].1.samples;
    for (i, s) in base.iter().enumerate() {
        let mut row = num(s.theta.to_degrees(), prec);
        for (_, set) in columns {
            let f = set.samples[i].f;
            let _ = write!(row, ",{},{}", num(f.re, prec), num(f.im, prec));
        }
        for (_, set) in &columns[1..] {
            let dev = (set.samples[i].f - s.f).norm();
            let _ = write!(row, ",{}", num(dev, prec));
        }
        let _ = writeln!(out, "{row}");
    }
    out
}

/// Writes `contents` under `dir`, creating the directory on first use.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

/// Pretty JSON with a trailing newline (so files end like text files do).
pub fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json serializes");
    s.push('\n');
    s
}
