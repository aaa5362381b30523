//! Physical and numerical parameters in units of the mechanical frequency.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::modes::{MechMode, MIN_N_MAX};

/// Which closed form to use for the photon-number-squared phase of the
/// disentangled propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KerrConvention {
    /// `(g₀/2ω_m)²(ω_mτ − sin ω_mτ)`, vanishing at `τ = 0`.
    #[default]
    Disentangled,
    /// `(g₀/2ω_m)²(1 − sin ω_mτ)`, kept for side-by-side comparison.
    AsPrinted,
}

/// Tolerance used when checking the post-selection timing conditions.
pub const TIMING_TOL: f64 = 1e-9;
/// Half-width of the admissible `delta` interval.
pub const DELTA_MAX: f64 = FRAC_1_SQRT_2;

/// Unvalidated parameter input. `build` resolves and checks it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsSpec {
    pub g0: f64,
    pub omega_m: f64,
    /// Exchange rate; ignored in favour of the sideband relation when
    /// `sideband_index` is set (then it must agree if given).
    pub xi: Option<f64>,
    pub tau: Option<f64>,
    pub delta: f64,
    pub n_max: usize,
    pub sideband_index: Option<u32>,
    /// `xi` is given before absorbing the √2 even-mode enhancement.
    pub raw_xi: bool,
    pub kerr: KerrConvention,
}

impl Default for ParamsSpec {
    /// ω_m = 1, ω_mτ = π, ξ = 101 (n = 50), g₀ = 10⁻³, δ = 0.05, n_max = 16.
    fn default() -> Self {
        Self {
            g0: 1e-3,
            omega_m: 1.0,
            xi: None,
            tau: None,
            delta: 5e-2,
            n_max: 16,
            sideband_index: Some(50),
            raw_xi: false,
            kerr: KerrConvention::Disentangled,
        }
    }
}

impl ParamsSpec {
    pub fn build(self) -> Result<SystemParams> {
        let mut errors = Vec::new();
        let finite = |name: &str, v: f64, errors: &mut Vec<String>| {
            if !v.is_finite() {
                errors.push(format!("{name} must be finite, got {v}"));
                false
            } else {
                true
            }
        };
        if finite("g0", self.g0, &mut errors) && self.g0 < 0.0 {
            errors.push(format!("g0 must be >= 0, got {}", self.g0));
        }
        if finite("omega_m", self.omega_m, &mut errors) && self.omega_m <= 0.0 {
            errors.push(format!("omega_m must be > 0, got {}", self.omega_m));
        }
        if finite("delta", self.delta, &mut errors) && self.delta.abs() > DELTA_MAX + 1e-15 {
            errors.push(format!("delta must lie in [-1/sqrt(2), 1/sqrt(2)], got {}", self.delta));
        }
        if self.n_max < MIN_N_MAX {
            errors.push(format!("n_max must be >= {MIN_N_MAX}, got {}", self.n_max));
        }
        let scale = if self.raw_xi { SQRT_2 } else { 1.0 };
        let given_xi = self.xi.map(|x| x * scale);

        let (xi, tau) = match self.sideband_index {
            Some(n) => {
                let xi = f64::from(2 * n + 1) * self.omega_m;
                let tau = PI / self.omega_m;
                if let Some(x) = given_xi {
                    if (x - xi).abs() > 1e-12 * xi.abs().max(1.0) {
                        errors.push(format!("xi = {x} contradicts sideband_index = {n} (needs {xi})"));
                    }
                }
                if let Some(t) = self.tau {
                    if (t - tau).abs() > 1e-12 * tau.max(1.0) {
                        errors.push(format!("tau = {t} contradicts sideband_index = {n} (needs pi/omega_m)"));
                    }
                }
                (xi, tau)
            }
            None => {
                let xi = given_xi.unwrap_or_else(|| {
                    errors.push("xi is required when sideband_index is not set".into());
                    f64::NAN
                });
                let tau = self.tau.unwrap_or_else(|| {
                    errors.push("tau is required when sideband_index is not set".into());
                    f64::NAN
                });
                (xi, tau)
            }
        };
        if !xi.is_nan() && finite("xi", xi, &mut errors) && xi < 0.0 {
            errors.push(format!("xi must be >= 0, got {xi}"));
        }
        if !tau.is_nan() && finite("tau", tau, &mut errors) && tau < 0.0 {
            errors.push(format!("tau must be >= 0, got {tau}"));
        }
        if !errors.is_empty() {
            return Err(Error::InvalidParams(errors));
        }
        Ok(SystemParams {
            g0: self.g0,
            omega_m: self.omega_m,
            xi,
            tau,
            delta: self.delta.clamp(-DELTA_MAX, DELTA_MAX),
            n_max: self.n_max,
            sideband_index: self.sideband_index,
            kerr: self.kerr,
        })
    }
}

/// Validated parameter record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    g0: f64,
    omega_m: f64,
    xi: f64,
    tau: f64,
    delta: f64,
    n_max: usize,
    sideband_index: Option<u32>,
    kerr: KerrConvention,
}

impl Default for SystemParams {
    fn default() -> Self {
        ParamsSpec::default().build().expect("preset is valid")
    }
}

impl SystemParams {
    pub fn preset() -> Self {
        Self::default()
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn n_max(&self) -> usize {
        self.n_max
    }
    pub fn sideband_index(&self) -> Option<u32> {
        self.sideband_index
    }
    pub fn kerr(&self) -> KerrConvention {
        self.kerr
    }

    pub fn mech(&self) -> MechMode {
        MechMode::new(self.n_max).expect("validated n_max")
    }

    pub fn to_spec(&self) -> ParamsSpec {
        ParamsSpec {
            g0: self.g0,
            omega_m: self.omega_m,
            xi: Some(self.xi),
            tau: Some(self.tau),
            delta: self.delta,
            n_max: self.n_max,
            sideband_index: self.sideband_index,
            raw_xi: false,
            kerr: self.kerr,
        }
    }

    pub fn with_g0(&self, g0: f64) -> Result<Self> {
        ParamsSpec { g0, ..self.to_spec() }.build()
    }

    /// Set `g0` so that `g0/omega_m = phi`.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        self.with_g0(phi * self.omega_m)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        ParamsSpec { delta, ..self.to_spec() }.build()
    }

    /// Override `xi`, dropping the sideband relation.
    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        ParamsSpec { xi: Some(xi), sideband_index: None, ..self.to_spec() }.build()
    }

    /// Override `tau`, dropping the sideband relation.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        ParamsSpec { tau: Some(tau), sideband_index: None, ..self.to_spec() }.build()
    }

    pub fn with_n_max(&self, n_max: usize) -> Result<Self> {
        ParamsSpec { n_max, ..self.to_spec() }.build()
    }

    pub fn with_kerr(&self, kerr: KerrConvention) -> Self {
        Self { kerr, ..*self }
    }

    /// Warnings for `g0 ≪ ω_m ≪ ξ`, read as `g0 ≤ ω_m/10` and `ω_m ≤ ξ/10`.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.g0 > self.omega_m / 10.0 {
            out.push(format!("g0 = {} exceeds omega_m/10 = {}", self.g0, self.omega_m / 10.0));
        }
        if self.omega_m > self.xi / 10.0 {
            out.push(format!("omega_m = {} exceeds xi/10 = {}", self.omega_m, self.xi / 10.0));
        }
        out
    }

    pub fn in_regime(&self) -> bool {
        self.regime_warnings().is_empty()
    }

    /// `cos(ξτ) = −1` and `ω_mτ = π`: no photon left in the cavity and the
    /// mechanical displacement is maximal and real.
    pub fn timing_constraints_hold(&self) -> bool {
        ((self.xi * self.tau).cos() + 1.0).abs() <= TIMING_TOL
            && (self.omega_m * self.tau - PI).abs() <= TIMING_TOL
    }

    pub fn derived(&self) -> DerivedQuantities {
        DerivedQuantities::new(self)
    }
}

/// Dimensionless quantities derived from the parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// `ϕ = g₀/ω_m`.
    pub scaled_strength: f64,
    /// `ϕ(τ) = (g₀/2ω_m)(1 − e^{−iω_mτ})`.
    pub mech_displacement: C64,
    pub kerr_phase: f64,
    pub r: f64,
    pub t: f64,
}

impl DerivedQuantities {
    pub fn new(p: &SystemParams) -> Self {
        let half = p.g0 / (2.0 * p.omega_m);
        let wt = p.omega_m * p.tau;
        let mech_displacement = if (wt - PI).abs() == 0.0 {
            C64::new(p.g0 / p.omega_m, 0.0)
        } else {
            half * (C64::new(1.0, 0.0) - C64::new(0.0, -wt).exp())
        };
        let (r, t) = beam_splitter(p.delta);
        Self {
            scaled_strength: p.g0 / p.omega_m,
            mech_displacement,
            kerr_phase: kerr_phase(p.kerr, p.g0, p.omega_m, p.tau),
            r,
            t,
        }
    }
}

pub fn kerr_phase(kerr: KerrConvention, g0: f64, omega_m: f64, tau: f64) -> f64 {
    let pref = (g0 / (2.0 * omega_m)).powi(2);
    let wt = omega_m * tau;
    match kerr {
        KerrConvention::Disentangled => pref * (wt - wt.sin()),
        KerrConvention::AsPrinted => pref * (1.0 - wt.sin()),
    }
}

/// Real reflection and transmission coefficients for imbalance `delta`.
pub fn beam_splitter(delta: f64) -> (f64, f64) {
    let root = (1.0 - delta * delta).max(0.0).sqrt();
    ((root - delta) / SQRT_2, (root + delta) / SQRT_2)
}
