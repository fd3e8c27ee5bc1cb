// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use mixfbm::analysis::{
    derivative_moment_check, exp_moment_check, fgn_autocovariance_check, moment_sweep,
    relative_spread, strong_error, write_errors_csv, write_metadata, CouplingPlan, ErrorReport,
};
use mixfbm::model::{builtin_models, check_hypotheses, ModelSpec};
use mixfbm::noise::{sample_noise_path, GridSpec, HurstIndex};
use mixfbm::scheme::euler_path;
use mixfbm::table::{fmt_f64, write_csv};
use mixfbm::Error;

use crate::config::{Command, ExperimentConfig};
use crate::{CliError, Verdict};

/// Largest tolerated `|z|` in the covariance table.
const Z_LIMIT: f64 = 4.0;
/// Largest tolerated `max/min - 1` of a moment across the grid sweep.
const SPREAD_LIMIT: f64 = 0.3;
/// Tolerated distance of the grid-continuity slope from 1.
const CONTINUITY_TOLERANCE: f64 = 0.15;
/// Standard errors allowed in the exponential-moment checks.
const EXP_SIGMAS: f64 = 3.0;

pub fn run(command: Command, cfg: &ExperimentConfig, degenerate: bool) -> Result<Verdict, CliError> {
    let ctx = Context::new(cfg, degenerate)?;
    fs::create_dir_all(&ctx.out)?;
    fs::write(ctx.out.join("config.toml"), cfg.to_toml())?;
    let (verdict, report) = match command {
        Command::Convergence => convergence(&ctx)?,
        Command::Simulate => simulate(&ctx)?,
        Command::NoiseTest => noise_test(&ctx)?,
        Command::Diagnostics => diagnostics(&ctx)?,
    };
    fs::write(ctx.out.join("report.txt"), &report)?;
    print!("{report}");
    Ok(verdict)
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    hurst: HurstIndex,
    model: ModelSpec,
    out: &'a Path,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig, degenerate: bool) -> Result<Self, CliError> {
        let e = &cfg.experiment;
        let hurst = HurstIndex::with_degenerate(e.hurst, degenerate)
            .map_err(|err| CliError::Config(format!("experiment.hurst: {err}")))?;
        if !(e.horizon > 0.0 && e.horizon.is_finite()) {
            return Err(CliError::Config(format!(
                "experiment.horizon: must be positive, got {}",
                e.horizon
            )));
        }
        let entry = builtin_models()
            .iter()
            .find(|m| m.name == e.model)
            .ok_or_else(|| {
                let names: Vec<_> = builtin_models().iter().map(|m| m.name).collect();
                CliError::Config(format!(
                    "experiment.model: unknown model `{}` (available: {})",
                    e.model,
                    names.join(", ")
                ))
            })?;
        let model = entry.build(hurst);
        let hypotheses = check_hypotheses(&model, hurst, &entry.probe_domain(e.horizon))?;
        if !hypotheses.all_passed() {
            return Err(CliError::Config(format!(
                "model `{}` violates the coefficient hypotheses at H = {}: {hypotheses:?}",
                e.model, e.hurst
            )));
        }
        Ok(Self {
            cfg,
            hurst,
            model,
            out: &e.output_dir,
        })
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn header(&self) -> String {
        let e = &self.cfg.experiment;
        format!(
            "model {}, H = {}, T = {}, seed {}, sampler {}\n",
            e.model, e.hurst, e.horizon, e.seed, e.sampler
        )
    }
}

fn config_grid(horizon: f64, steps: usize, field: &str) -> Result<GridSpec, CliError> {
    GridSpec::new(horizon, steps).map_err(|e| CliError::Config(format!("{field}: {e}")))
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn convergence(ctx: &Context<'_>) -> Result<(Verdict, String), CliError> {
    let c = &ctx.cfg.convergence;
    let e = &ctx.cfg.experiment;
    let plan = CouplingPlan {
        model: ctx.model.clone(),
        hurst: ctx.hurst,
        horizon: e.horizon,
        fine_steps: c.fine_n,
        factors: c.factors.clone(),
        paths: c.paths,
        base_seed: e.seed,
        sampler: e.sampler,
        reference: c.reference,
    };
    plan.validate()
        .map_err(|err| CliError::Config(format!("convergence: {err}")))?;
    let report = strong_error(&plan)?;
    write_errors_csv(&report, ctx.create("errors.csv")?)?;
    write_metadata(&report, ctx.create("metadata.json")?)?;
    Ok(convergence_summary(ctx, &report))
}

fn convergence_summary(ctx: &Context<'_>, report: &ErrorReport) -> (Verdict, String) {
    let mut s = ctx.header();
    let _ = writeln!(
        s,
        "fine_n {}, paths {} ({} aborted), reference {}",
        report.fine_steps,
        report.paths_used + report.paths_aborted,
        report.paths_aborted,
        report.reference
    );
    for a in &report.aborted {
        let _ = writeln!(s, "aborted path {}: {}", a.index, a.error);
    }
    let _ = writeln!(s, "factor  delta       rmse        stderr");
    for r in &report.records {
        let _ = writeln!(s, "{:<7} {:<11.5e} {:<11.5e} {:.3e}", r.factor, r.delta, r.rmse, r.stderr);
    }
    if report.exact() {
        let _ = writeln!(
            s,
            "exact coincidence: rmse < 1e-12 at every mesh, regression skipped\nresult: PASS"
        );
        return (Verdict::Pass, s);
    }
    let fit = report.fit.expect("non-exact report has a fit");
    let _ = writeln!(
        s,
        "slope {:.4}, 95% CI [{:.4}, {:.4}]",
        fit.slope, fit.ci.0, fit.ci.1
    );
    if let Some(ci) = report.residual_ci {
        let _ = writeln!(s, "residual-only CI [{:.4}, {:.4}]", ci.0, ci.1);
    }
    match report.theoretical_slope {
        Some(theory) => {
            let pass = fit.ci_contains(theory);
            let _ = writeln!(
                s,
                "theoretical slope {theory:.4}\nresult: {} (CI {} the theoretical slope)",
                status(pass),
                if pass { "contains" } else { "misses" }
            );
            (if pass { Verdict::Pass } else { Verdict::Fail }, s)
        }
        None => {
            let _ = writeln!(s, "no theoretical slope at H = 0.5\nresult: PASS");
            (Verdict::Pass, s)
        }
    }
}

fn simulate(ctx: &Context<'_>) -> Result<(Verdict, String), CliError> {
    let e = &ctx.cfg.experiment;
    let grid = config_grid(e.horizon, ctx.cfg.simulate.steps, "simulate.steps")?;
    let noise = sample_noise_path(grid, ctx.hurst, e.seed, e.sampler)?;
    let traj = euler_path(&ctx.model, &noise)?;
    traj.write_csv(ctx.create("trajectory.csv")?)?;
    noise.write_csv(ctx.create("noise.csv")?)?;
    let mut s = ctx.header();
    let _ = writeln!(
        s,
        "steps {}, X_0 = {}, X_T = {}",
        grid.steps(),
        fmt_f64(traj.values[0]),
        fmt_f64(traj.terminal())
    );
    Ok((Verdict::Pass, s))
}

fn noise_test(ctx: &Context<'_>) -> Result<(Verdict, String), CliError> {
    let e = &ctx.cfg.experiment;
    let n = &ctx.cfg.noise_test;
    let grid = config_grid(e.horizon, n.steps, "noise-test.steps")?;
    if n.paths < 2 {
        return Err(CliError::Config("noise-test.paths: need at least 2 paths".into()));
    }
    let stats = fgn_autocovariance_check(grid, ctx.hurst, e.sampler, n.paths, e.seed)?;
    let rows = stats.iter().map(|s| {
        vec![
            s.lag.to_string(),
            fmt_f64(s.empirical),
            fmt_f64(s.analytic),
            fmt_f64(s.z),
        ]
    });
    write_csv(ctx.create("cov.csv")?, &["lag", "empirical", "analytic", "z"], rows)?;
    let worst = stats
        .iter()
        .max_by(|a, b| a.z.abs().total_cmp(&b.z.abs()))
        .expect("at least one lag");
    let pass = worst.z.abs() < Z_LIMIT;
    let mut s = ctx.header();
    let _ = writeln!(
        s,
        "steps {}, paths {}, largest |z| = {:.3} at lag {}\nresult: {}",
        n.steps,
        n.paths,
        worst.z.abs(),
        worst.lag,
        status(pass)
    );
    Ok((if pass { Verdict::Pass } else { Verdict::Fail }, s))
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: String,
    status: &'static str,
    detail: String,
}

fn diagnostics(ctx: &Context<'_>) -> Result<(Verdict, String), CliError> {
    let e = &ctx.cfg.experiment;
    let d = &ctx.cfg.diagnostics;
    let mut checks = Vec::new();

    let exp_grid = config_grid(e.horizon, d.exp_steps, "diagnostics.exp_steps")?;
    match exp_moment_check(d.exp_coefficient, exp_grid, ctx.hurst, d.exp_paths, e.seed, e.sampler) {
        Ok(r) => {
            checks.push(Check {
                name: "exp_moment_bound",
                value: r.estimate.mean,
                threshold: fmt_f64(r.bound),
                status: status(r.within_bound(EXP_SIGMAS)),
                detail: format!("stderr {:.3e}", r.estimate.stderr),
            });
            checks.push(Check {
                name: "exp_moment_brownian",
                value: r.brownian_estimate.mean,
                threshold: fmt_f64(r.brownian_closed_form),
                status: status(r.brownian_matches(EXP_SIGMAS)),
                detail: format!("stderr {:.3e}", r.brownian_estimate.stderr),
            });
        }
        Err(Error::BoundInapplicable(reason)) => {
            for name in ["exp_moment_bound", "exp_moment_brownian"] {
                checks.push(Check {
                    name,
                    value: f64::NAN,
                    threshold: String::new(),
                    status: "SKIPPED",
                    detail: reason.clone(),
                });
            }
        }
        Err(err) => return Err(err.into()),
    }

    let mut derivative = Vec::new();
    for &n in &d.steps {
        let grid = config_grid(e.horizon, n, "diagnostics.steps")?;
        derivative.push(derivative_moment_check(
            &ctx.model, ctx.hurst, grid, &[2, 4], d.paths, e.seed, e.sampler,
        )?);
    }
    let sweep = moment_sweep(&ctx.model, ctx.hurst, e.horizon, &d.steps, d.paths, e.seed, e.sampler)
        .map_err(|err| match err {
            Error::Plan(msg) => CliError::Config(format!("diagnostics.steps: {msg}")),
            other => other.into(),
        })?;

    let derivative_spread = relative_spread(derivative.iter().map(|r| r.moment_estimates[0].1.mean));
    checks.push(Check {
        name: "derivative_moment_spread",
        value: derivative_spread,
        threshold: fmt_f64(SPREAD_LIMIT),
        status: status(derivative_spread < SPREAD_LIMIT),
        detail: "max/min - 1 of E|D_s X_T|^2 across grids".into(),
    });
    let terminal_spread = sweep.terminal_spread();
    checks.push(Check {
        name: "terminal_moment_spread",
        value: terminal_spread,
        threshold: fmt_f64(SPREAD_LIMIT),
        status: status(terminal_spread < SPREAD_LIMIT),
        detail: "max/min - 1 of E[X_T^4] across grids".into(),
    });
    let slope = sweep.continuity_fit.slope;
    checks.push(Check {
        name: "continuity_slope",
        value: slope,
        threshold: format!("1 +- {CONTINUITY_TOLERANCE}"),
        status: status((slope - 1.0).abs() <= CONTINUITY_TOLERANCE),
        detail: "log-log slope of E|X_u - X_t_u|^2 against the mesh".into(),
    });

    let rows = checks.iter().map(|c| {
        vec![
            c.name.to_string(),
            fmt_f64(c.value),
            c.threshold.clone(),
            c.status.to_string(),
            c.detail.replace(',', ";"),
        ]
    });
    write_csv(
        ctx.create("diagnostics.csv")?,
        &["check", "value", "threshold", "status", "detail"],
        rows,
    )?;
    let rows = sweep.rows.iter().zip(&derivative).map(|(r, dr)| {
        let (d2, d4) = (dr.moment_estimates[0].1, dr.moment_estimates[1].1);
        vec![
            r.steps.to_string(),
            fmt_f64(r.delta),
            fmt_f64(r.terminal_fourth.mean),
            fmt_f64(r.terminal_fourth.stderr),
            fmt_f64(d2.mean),
            fmt_f64(d2.stderr),
            fmt_f64(d4.mean),
            fmt_f64(d4.stderr),
            fmt_f64(r.continuity.mean),
            fmt_f64(r.continuity.stderr),
        ]
    });
    write_csv(
        ctx.create("moments.csv")?,
        &[
            "steps",
            "delta",
            "terminal_fourth",
            "terminal_fourth_stderr",
            "derivative_second",
            "derivative_second_stderr",
            "derivative_fourth",
            "derivative_fourth_stderr",
            "continuity",
            "continuity_stderr",
        ],
        rows,
    )?;

    let failed = checks.iter().any(|c| c.status == "FAIL");
    let mut s = ctx.header();
    for c in &checks {
        let _ = writeln!(s, "{:<26} {:<8} {:.6} {}", c.name, c.status, c.value, c.detail);
    }
    let _ = writeln!(s, "result: {}", status(!failed));
    Ok((if failed { Verdict::Fail } else { Verdict::Pass }, s))
}
