//! The reproduction subcommands. Each computes its rows in the library and
//! renders them separately, so tests can check values without re-parsing.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use optoweak_core::C64;
use optoweak_core::hilbert::{expectation, StateVector};
use optoweak_core::modes::{photon_difference, PhotonMode, PHOTON_DIM};
use optoweak_core::params::SystemParams;
use optoweak_core::validation::{run_validation, ValidationReport};
use optoweak_core::weak::{
    amplification_and_position, dark_port_postselection, dark_port_state, evolved_state, meter_state_exact,
    post_exchange_state, probability_closed_form, probability_formula, weak_value, weak_value_closed_form, Method,
    Regime,
};
use optoweak_core::wigner::{wigner_grid, WignerGrid};
use rayon::prelude::*;

use crate::config::{CustomState, RunConfig, Scenario};
use crate::error::CliError;
use crate::output::{emit, fmt_f64, Csv, LinePlot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Weak value and post-selection probability for the published table.
    Table1,
    /// Weak value, probability and meter displacement over a δ grid.
    Sweep,
    /// Wigner function of the meter state on a quadrature grid.
    Wigner,
    /// Invariant suite; exits 1 on any failed check.
    Validate,
    /// Joint-state amplitudes from the numeric and the branch constructions.
    Evolve,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub abs_delta: f64,
    pub abs_n_w: f64,
    pub p_percent: f64,
    pub abs_n_w_pipeline: f64,
    pub p_percent_pipeline: f64,
}

/// `|N_w|` at the table's one-decimal precision.
pub fn display_weak_value(x: f64) -> String {
    format!("{x:.1}")
}

/// Percentages at two significant digits, trailing zeros dropped, as in the
/// published table (25, 16, 9, …, 0.81).
pub fn display_percent(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let decimals = (1 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn table1(cfg: &RunConfig) -> Result<Vec<Table1Row>, CliError> {
    let p = cfg.params;
    let phi = p.derived().scaled_strength;
    let rows: Result<Vec<_>, optoweak_core::Error> = cfg
        .table1
        .deltas
        .par_iter()
        .map(|&d| {
            let delta = d.abs();
            let matrix_element = weak_value(&photon_difference(), &post_exchange_state(), &dark_port_state(delta))?;
            let pipeline = dark_port_postselection(&p.with_delta(delta)?, Method::DirectExponential)?;
            Ok(Table1Row {
                abs_delta: delta,
                abs_n_w: weak_value_closed_form(delta)?.abs(),
                p_percent: 100.0 * probability_formula(delta, phi),
                abs_n_w_pipeline: matrix_element.re.abs(),
                p_percent_pipeline: 100.0 * pipeline.probability_exact,
            })
        })
        .collect();
    Ok(rows?)
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut csv = Csv::new(&[
        "abs_delta",
        "abs_N_w",
        "P_percent",
        "abs_N_w_pipeline",
        "P_percent_pipeline",
        "abs_N_w_display",
        "P_percent_display",
    ]);
    for r in rows {
        csv.row(&[
            fmt_f64(r.abs_delta),
            fmt_f64(r.abs_n_w),
            fmt_f64(r.p_percent),
            fmt_f64(r.abs_n_w_pipeline),
            fmt_f64(r.p_percent_pipeline),
            display_weak_value(r.abs_n_w),
            display_percent(r.p_percent),
        ]);
    }
    csv.into_string()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub phi: f64,
    pub n_w: f64,
    pub p_formula: f64,
    pub p_exact: f64,
    pub f: f64,
    pub mean_q_over_x0: f64,
    /// `⟨c† + c⟩` in the exact projected meter state.
    pub mean_q_exact: f64,
    pub regime: Regime,
}

pub const SWEEP_HEADER: [&str; 9] =
    ["delta", "phi", "N_w", "P_formula", "P_exact", "f", "mean_q_over_x0", "mean_q_exact", "regime"];

fn sweep_row(delta: f64, phi: f64, p: &SystemParams) -> Result<SweepRow, optoweak_core::Error> {
    let (f, mean_q_over_x0) = amplification_and_position(delta, phi)?;
    let mech = p.mech();
    let meter = meter_state_exact(delta, phi, mech)?;
    Ok(SweepRow {
        delta,
        phi,
        n_w: weak_value_closed_form(delta)?,
        p_formula: probability_formula(delta, phi),
        p_exact: probability_closed_form(delta, phi),
        f,
        mean_q_over_x0,
        mean_q_exact: expectation(&mech.position(), &meter)?.re,
        regime: Regime::classify(delta, phi),
    })
}

/// One row per `(ϕ, δ)`, ordered by `ϕ` then `δ` as configured.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let pairs: Vec<(f64, f64)> =
        cfg.sweep.phis.iter().flat_map(|&phi| cfg.sweep.deltas.iter().map(move |&d| (d, phi))).collect();
    let rows: Result<Vec<_>, _> = pairs.par_iter().map(|&(d, phi)| sweep_row(d, phi, &cfg.params)).collect();
    Ok(rows?)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = Csv::new(&SWEEP_HEADER);
    for r in rows {
        csv.row(&[
            fmt_f64(r.delta),
            fmt_f64(r.phi),
            fmt_f64(r.n_w),
            fmt_f64(r.p_formula),
            fmt_f64(r.p_exact),
            fmt_f64(r.f),
            fmt_f64(r.mean_q_over_x0),
            fmt_f64(r.mean_q_exact),
            r.regime.label().to_string(),
        ]);
    }
    csv.into_string()
}

/// Log-log plots of `|N_w|`, `P` and `|⟨q⟩|/x₀` against `δ > 0`, one curve
/// per `ϕ`, keyed by file suffix.
pub fn sweep_plots(rows: &[SweepRow]) -> Vec<(&'static str, LinePlot)> {
    let mut phis: Vec<f64> = Vec::new();
    for r in rows {
        if !phis.contains(&r.phi) {
            phis.push(r.phi);
        }
    }
    let curves = |value: fn(&SweepRow) -> f64| -> Vec<Series> {
        phis.iter()
            .map(|&phi| Series {
                label: format!("phi = {phi:e}"),
                points: rows.iter().filter(|r| r.phi == phi && r.delta > 0.0).map(|r| (r.delta, value(r))).collect(),
            })
            .collect()
    };
    let plot = |title: &str, y: &str, series| LinePlot {
        title: title.into(),
        x_label: "delta".into(),
        y_label: y.into(),
        log_x: true,
        log_y: true,
        series,
    };
    vec![
        ("weak_value", plot("Photon-difference weak value", "|N_w|", curves(|r| r.n_w.abs()))),
        ("probability", plot("Post-selection probability", "P", curves(|r| r.p_exact))),
        ("position", plot("Meter displacement", "|<q>|/x0", curves(|r| r.mean_q_over_x0.abs()))),
    ]
}

/// Meter state shown by a Wigner scenario.
pub fn wigner_state(cfg: &RunConfig, scenario: Scenario) -> Result<StateVector, CliError> {
    let phi = 1e-3;
    let p = &cfg.params;
    let state = match scenario {
        Scenario::Fig5 => dark_port_postselection(&p.with_phi(phi)?.with_delta(5e-2)?, Method::Propagator)?.meter_state,
        Scenario::Fig6 => {
            dark_port_postselection(&p.with_phi(phi)?.with_delta(phi / 2.0)?, Method::Propagator)?.meter_state
        }
        Scenario::Custom => match cfg.wigner.state {
            CustomState::Meter => dark_port_postselection(p, Method::Propagator)?.meter_state,
            CustomState::Ground => p.mech().fock(0)?,
            CustomState::OnePhonon => p.mech().fock(1)?,
        },
    };
    Ok(state)
}

pub fn wigner(cfg: &RunConfig, scenario: Scenario) -> Result<WignerGrid, CliError> {
    Ok(wigner_grid(&wigner_state(cfg, scenario)?, &cfg.wigner.grid)?)
}

pub fn wigner_csv(grid: &WignerGrid) -> String {
    let mut csv = Csv::new(&["X", "Y", "W"]);
    for (ix, &x) in grid.xs.iter().enumerate() {
        for (iy, &y) in grid.ys.iter().enumerate() {
            csv.row(&[fmt_f64(x), fmt_f64(y), fmt_f64(grid.value(ix, iy))]);
        }
    }
    csv.into_string()
}

pub fn wigner_summary(grid: &WignerGrid) -> String {
    format!(
        "min_W={} max_W={} normalization_residual={}",
        fmt_f64(grid.min()),
        fmt_f64(grid.max()),
        fmt_f64(grid.normalization_residual)
    )
}

pub fn validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    Ok(run_validation(&cfg.params)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveRow {
    pub mode: PhotonMode,
    pub fock: usize,
    pub numeric: C64,
    pub analytic: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOutput {
    pub rows: Vec<EvolveRow>,
    /// Total weight in the two cavity modes.
    pub cavity_weight: f64,
    pub total_weight: f64,
    pub max_abs_diff: f64,
}

/// Joint amplitudes from the direct exponential next to the branch assembly.
pub fn evolve(cfg: &RunConfig) -> Result<EvolveOutput, CliError> {
    let p = &cfg.params;
    let numeric = evolved_state(p, Method::DirectExponential)?;
    let analytic = evolved_state(p, Method::AnalyticBranches)?;
    let dim = p.mech().dim();
    let mut rows = Vec::with_capacity(PHOTON_DIM * dim);
    for (k, &mode) in PhotonMode::TRAVELLING.iter().enumerate() {
        for n in 0..dim {
            let i = k * dim + n;
            rows.push(EvolveRow { mode, fock: n, numeric: numeric.amplitude(i), analytic: analytic.amplitude(i) });
        }
    }
    let cavity_weight = rows
        .iter()
        .filter(|r| matches!(r.mode, PhotonMode::A1 | PhotonMode::A2))
        .map(|r| r.numeric.norm_sqr())
        .sum();
    Ok(EvolveOutput {
        cavity_weight,
        total_weight: numeric.norm().powi(2),
        max_abs_diff: numeric.max_abs_diff(&analytic)?,
        rows,
    })
}

pub fn evolve_csv(out: &EvolveOutput) -> String {
    let mut csv = Csv::new(&["mode", "fock", "re", "im", "re_analytic", "im_analytic", "abs_diff"]);
    for r in &out.rows {
        csv.row(&[
            r.mode.label().to_string(),
            r.fock.to_string(),
            fmt_f64(r.numeric.re),
            fmt_f64(r.numeric.im),
            fmt_f64(r.analytic.re),
            fmt_f64(r.analytic.im),
            fmt_f64((r.numeric - r.analytic).norm()),
        ]);
    }
    csv.into_string()
}

pub fn evolve_summary(out: &EvolveOutput) -> String {
    format!(
        "cavity_weight={} total_weight={} max_abs_diff={}",
        fmt_f64(out.cavity_weight),
        fmt_f64(out.total_weight),
        fmt_f64(out.max_abs_diff)
    )
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    out.with_file_name(format!("{stem}_{suffix}.svg"))
}

/// Run one command, writing its artifact to `out` or stdout. Returns the
/// human-readable summary line(s).
pub fn run(command: Command, cfg: &RunConfig, out: Option<&Path>, scenario: Option<Scenario>) -> Result<String, CliError> {
    // The validation report lists regime warnings itself.
    if command != Command::Validate {
        for w in cfg.params.regime_warnings() {
            log::warn!("{w}");
        }
    }
    match command {
        Command::Table1 => {
            let rows = table1(cfg)?;
            emit(out, &table1_csv(&rows))?;
            Ok(format!("{} rows", rows.len()))
        }
        Command::Sweep => {
            let rows = sweep(cfg)?;
            emit(out, &sweep_csv(&rows))?;
            if cfg.sweep.svg {
                match out {
                    Some(path) => {
                        for (suffix, plot) in sweep_plots(&rows) {
                            emit(Some(&sibling(path, suffix)), &plot.render())?;
                        }
                    }
                    None => log::warn!("sweep.svg needs --out; plots skipped"),
                }
            }
            Ok(format!("{} rows", rows.len()))
        }
        Command::Wigner => {
            let grid = wigner(cfg, scenario.unwrap_or(cfg.wigner.scenario))?;
            emit(out, &wigner_csv(&grid))?;
            Ok(wigner_summary(&grid))
        }
        Command::Validate => {
            let report = validate(cfg)?;
            emit(out, &format!("{report}\n"))?;
            if report.passed() {
                Ok(format!("{} checks passed", report.checks.len()))
            } else {
                let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
                Err(CliError::Validation(names.join(", ")))
            }
        }
        Command::Evolve => {
            let result = evolve(cfg)?;
            emit(out, &evolve_csv(&result))?;
            Ok(evolve_summary(&result))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_display_matches_table_precision() {
        let shown: Vec<String> = [25.0, 16.0, 9.0, 4.0, 1.0, 0.81].iter().map(|&x| display_percent(x)).collect();
        assert_eq!(shown, ["25", "16", "9", "4", "1", "0.81"]);
        assert_eq!(display_percent(25.000025), "25");
        assert_eq!(display_percent(0.810025), "0.81");
    }

    #[test]
    fn svg_siblings() {
        assert_eq!(sibling(Path::new("/tmp/out/sweep.csv"), "probability"), Path::new("/tmp/out/sweep_probability.svg"));
    }
}
