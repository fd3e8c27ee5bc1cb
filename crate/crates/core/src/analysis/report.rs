// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use serde_json::json;

use super::coupling::ErrorReport;
use crate::table::{fmt_f64, write_csv};
use crate::Result;

/// `factor,delta,rmse,stderr`, one row per mesh.
pub fn write_errors_csv<W: Write>(report: &ErrorReport, out: W) -> Result<()> {
    let rows = report.records.iter().map(|r| {
        vec![
            r.factor.to_string(),
            fmt_f64(r.delta),
            fmt_f64(r.rmse),
            fmt_f64(r.stderr),
        ]
    });
    Ok(write_csv(out, &["factor", "delta", "rmse", "stderr"], rows)?)
}

/// Run metadata (fit, theory, seed, plan) as pretty-printed JSON.
pub fn write_metadata<W: Write>(report: &ErrorReport, mut out: W) -> Result<()> {
    let value = json!({
        "model": report.model,
        "h": report.hurst,
        "horizon": report.horizon,
        "fine_n": report.fine_steps,
        "factors": report.records.iter().map(|r| r.factor).collect::<Vec<_>>(),
        "paths": report.paths_used + report.paths_aborted,
        "paths_used": report.paths_used,
        "paths_aborted": report.paths_aborted,
        "aborted": report.aborted,
        "base_seed": report.base_seed,
        "sampler": report.sampler,
        "reference": report.reference,
        "exact": report.exact(),
        "slope": report.fit.map(|f| f.slope),
        "intercept": report.fit.map(|f| f.intercept),
        "slope_stderr": report.fit.map(|f| f.slope_stderr),
        "slope_ci": report.fit.map(|f| [f.ci.0, f.ci.1]),
        "residual_slope_ci": report.residual_ci.map(|c| [c.0, c.1]),
        "theoretical_slope": report.theoretical_slope,
    });
    serde_json::to_writer_pretty(&mut out, &value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(out.flush()?)
}
