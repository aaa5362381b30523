//! Invariant suite run by the `validate` command and the acceptance tests.
//!
//! Every check carries its measured value and the bound it is held to.
//! Regime violations are warnings; only failed checks make a report fail.

use std::f64::consts::PI;
use std::fmt;

use crate::dynamics::{
    approximation_error, dyson_coefficient, dyson_coefficient_as_printed, dyson_quadrature, hamiltonian_approx,
    propagator_analytic, propagator_numeric, DysonCoefficient,
};
use crate::error::Result;
use crate::hilbert::fidelity;
use crate::params::{ParamsSpec, SystemParams};
use crate::weak::{dark_port_postselection, evolved_state, initial_state, Method};

pub const UNITARITY_TOL: f64 = 1e-10;
pub const PROPAGATOR_FIDELITY_TOL: f64 = 1e-9;
pub const METER_FIDELITY_TOL: f64 = 1e-8;
pub const DYSON_TOL: f64 = 1e-9;
pub const DECOUPLED_ERROR_TOL: f64 = 1e-10;
/// Absolute slack on the probability gap, which is pure rounding at ϕ = 0.
pub const GAP_ROUNDING_FLOOR: f64 = 1e-12;
pub const SCALING_RATIO: (f64, f64) = (1.4, 2.8);
pub const HALVING_RATIO: (f64, f64) = (3.0, 5.0);
/// Exchange rates of the approximation-error scaling ladder.
pub const SCALING_XIS: [f64; 3] = [21.0, 41.0, 81.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Measured and reported, not held to a bound.
    Info,
    Skipped,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
            Status::Skipped => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub bound: String,
    pub detail: String,
}

impl Check {
    fn bounded(name: &str, value: f64, ok: bool, bound: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            bound: bound.into(),
            detail: String::new(),
        }
    }

    fn info(name: &str, value: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status: Status::Info, value, bound: String::new(), detail: detail.into() }
    }

    fn skipped(name: &str, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status: Status::Skipped, value: f64::NAN, bound: String::new(), detail: detail.into() }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:<40} {:>14.6e}", self.status.label(), self.name, self.value)?;
        if !self.bound.is_empty() {
            write!(f, "  ({})", self.bound)?;
        }
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn timed(g0: f64, xi: f64, tau: f64, n_max: usize) -> Result<SystemParams> {
    ParamsSpec { g0, xi: Some(xi), tau: Some(tau), sideband_index: None, n_max, ..Default::default() }.build()
}

/// Worst unitarity residual of the product and direct propagators.
pub fn unitarity_residual(p: &SystemParams) -> Result<f64> {
    let analytic = propagator_analytic(p)?.unitarity_residual();
    let direct = propagator_numeric(&hamiltonian_approx(p), p.tau())?.unitarity_residual();
    Ok(analytic.max(direct))
}

/// Fidelity between the product propagator and the direct exponential,
/// both applied to the initial state.
pub fn propagator_fidelity(p: &SystemParams) -> Result<f64> {
    fidelity(&evolved_state(p, Method::Propagator)?, &evolved_state(p, Method::DirectExponential)?)
}

/// Approximation errors along [`SCALING_XIS`] at `ω_mτ = π`.
pub fn error_ladder(g0: f64) -> Result<Vec<(f64, f64)>> {
    SCALING_XIS
        .iter()
        .map(|&xi| {
            let p = timed(g0, xi, PI, 16)?;
            Ok((xi, approximation_error(&p, &initial_state(&p))?))
        })
        .collect()
}

/// Parameter sets and times of the Dyson closed-form grid.
pub fn dyson_grid() -> Result<Vec<(SystemParams, f64)>> {
    let sets = [(1e-2, 10.0), (1e-3, 21.0), (5e-3, 51.0)];
    let taus = [0.3, 1.0, PI];
    let mut out = Vec::new();
    for (g0, xi) in sets {
        for tau in taus {
            out.push((timed(g0, xi, tau, 16)?, tau));
        }
    }
    Ok(out)
}

/// Largest `|closed form − quadrature|` over the grid, for the corrected and
/// the published forms.
pub fn dyson_discrepancy() -> Result<(f64, f64)> {
    let mut corrected: f64 = 0.0;
    let mut printed: f64 = 0.0;
    for (p, tau) in dyson_grid()? {
        for which in DysonCoefficient::ALL {
            let q = dyson_quadrature(which, &p, tau);
            corrected = corrected.max((dyson_coefficient(which, &p, tau)? - q).norm());
            printed = printed.max((dyson_coefficient_as_printed(which, &p, tau)? - q).norm());
        }
    }
    Ok((corrected, printed))
}

/// `gap(ϕ)/gap(ϕ/2)` of the relative probability-formula gap from the full
/// pipeline.
pub fn halving_ratio(p: &SystemParams) -> Result<f64> {
    let phi = p.derived().scaled_strength;
    let gap = |phi: f64| -> Result<f64> {
        Ok(dark_port_postselection(&p.with_phi(phi)?, Method::DirectExponential)?.probability_gap())
    };
    Ok(gap(phi)? / gap(phi / 2.0)?)
}

/// Parameter-independent checks on canonical settings.
pub fn canonical_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let ladder = error_ladder(1e-3)?;
    let ratios: Vec<f64> = ladder.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let monotone = ladder.windows(2).all(|w| w[1].1 < w[0].1);
    let in_band = ratios.iter().all(|r| (SCALING_RATIO.0..=SCALING_RATIO.1).contains(r));
    let mut detail = ladder.iter().map(|(xi, e)| format!("xi={xi}: {e:.3e}")).collect::<Vec<_>>().join(", ");
    detail += &format!("; ratios {ratios:.3?}");
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(
        Check::bounded(
            "approximation error scaling in xi",
            min_ratio,
            monotone && in_band,
            format!("monotone, ratio in [{}, {}]", SCALING_RATIO.0, SCALING_RATIO.1),
        )
        .with_detail(detail),
    );

    let decoupled = timed(0.0, 21.0, PI, 16)?;
    let e0 = approximation_error(&decoupled, &initial_state(&decoupled))?;
    checks.push(Check::bounded("approximation error at g0 = 0", e0, e0 <= DECOUPLED_ERROR_TOL, "<= 1e-10"));

    let (corrected, printed) = dyson_discrepancy()?;
    checks.push(Check::bounded("Dyson closed forms vs quadrature", corrected, corrected <= DYSON_TOL, "<= 1e-9"));
    checks.push(Check::info(
        "published gbar vs quadrature",
        printed,
        "leading term printed as sin^2(2 xi tau); the integral gives sin^2(xi tau)",
    ));

    let preset = SystemParams::preset();
    let ratio = halving_ratio(&preset)?;
    checks.push(Check::bounded(
        "probability gap ratio under phi halving",
        ratio,
        (HALVING_RATIO.0..=HALVING_RATIO.1).contains(&ratio),
        format!("in [{}, {}]", HALVING_RATIO.0, HALVING_RATIO.1),
    ));
    Ok(checks)
}

/// Checks evaluated at the given parameters.
pub fn parameter_checks(p: &SystemParams) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let u = unitarity_residual(p)?;
    checks.push(Check::bounded("propagator unitarity", u, u <= UNITARITY_TOL, "<= 1e-10"));

    let f = propagator_fidelity(p)?;
    checks.push(Check::bounded(
        "product vs direct propagator fidelity",
        f,
        f >= 1.0 - PROPAGATOR_FIDELITY_TOL,
        ">= 1 - 1e-9",
    ));

    let err = approximation_error(p, &initial_state(p))?;
    if p.g0() == 0.0 {
        checks.push(Check::bounded("approximation error", err, err <= DECOUPLED_ERROR_TOL, "<= 1e-10 at g0 = 0"));
    } else {
        let detail = if p.in_regime() { "in regime" } else { "out of regime" };
        checks.push(Check::info("approximation error", err, detail));
    }

    if !p.timing_constraints_hold() {
        checks.push(Check::skipped("meter state fidelity", "timing constraints do not hold"));
        checks.push(Check::skipped("probability formula gap", "timing constraints do not hold"));
        return Ok(checks);
    }
    match dark_port_postselection(p, Method::DirectExponential) {
        // The closed forms drop the N̂² phase, which is only negligible in regime.
        Ok(r) if p.in_regime() => {
            let fid = r.fidelity_vs_closed_form.unwrap_or(f64::NAN);
            checks.push(Check::bounded("meter state fidelity", fid, fid >= 1.0 - METER_FIDELITY_TOL, ">= 1 - 1e-8"));
            let phi = p.derived().scaled_strength;
            let gap = r.probability_gap();
            let ok = gap <= 5.0 * phi * phi + GAP_ROUNDING_FLOOR;
            checks.push(Check::bounded("probability formula gap", gap, ok, "<= 5 phi^2 + 1e-12"));
        }
        Ok(r) => {
            let fid = r.fidelity_vs_closed_form.unwrap_or(f64::NAN);
            checks.push(Check::info("meter state fidelity", fid, "out of regime"));
            checks.push(Check::info("probability formula gap", r.probability_gap(), "out of regime"));
        }
        Err(e) => checks.push(Check::skipped("meter state fidelity", e.to_string())),
    }
    Ok(checks)
}

/// Canonical checks followed by checks at `p`, with regime warnings.
pub fn run_validation(p: &SystemParams) -> Result<ValidationReport> {
    let mut checks = canonical_checks()?;
    checks.extend(parameter_checks(p)?);
    Ok(ValidationReport { checks, warnings: p.regime_warnings() })
}
