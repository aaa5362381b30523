//! Pre-selection, interferometer evolution, dark-port post-selection and the
//! weak-value observables read off the mechanical meter.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64 as C64;

use crate::dynamics::{hamiltonian_approx, propagator_analytic};
use crate::error::{Error, Result};
use crate::hilbert::{expectation, fidelity, inner, LinearOp, Spectral, StateVector};
use crate::modes::{
    coherent_state, photon_difference, photon_ket, photon_space, MechMode, PhotonMode, MECH, PHOTON,
};
use crate::params::{beam_splitter, SystemParams};

/// Below this `|⟨f|i⟩|` pre- and post-selection count as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Below this probability a projection is reported as failed.
pub const MIN_PROBABILITY: f64 = 1e-300;
/// Largest `ϕ` for which the first-order meter state is offered.
pub const FIRST_ORDER_MAX_PHI: f64 = 0.1;
/// `|δ| ≥ WEAK_REGIME_RATIO · ϕ` is flagged as the weak regime.
pub const WEAK_REGIME_RATIO: f64 = 10.0;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `(|r₁⟩ + |l₂⟩)/√2 ⊗ |0⟩`.
pub fn initial_state(p: &SystemParams) -> StateVector {
    let photon = StateVector::combine(&[
        (c(FRAC_1_SQRT_2), &photon_ket(PhotonMode::R1)),
        (c(FRAC_1_SQRT_2), &photon_ket(PhotonMode::L2)),
    ])
    .expect("same space");
    photon.tensor(&p.mech().fock(0).expect("vacuum")).expect("distinct labels")
}

/// Photonic state after a full exchange cycle with the cavity at `cos ξτ = −1`:
/// `−(|l₁⟩ + |r₂⟩)/√2`.
pub fn post_exchange_state() -> StateVector {
    StateVector::combine(&[
        (c(-FRAC_1_SQRT_2), &photon_ket(PhotonMode::L1)),
        (c(-FRAC_1_SQRT_2), &photon_ket(PhotonMode::R2)),
    ])
    .expect("same space")
}

/// Dark-port state `r|l₁⟩ − t|r₂⟩`.
pub fn dark_port_state(delta: f64) -> StateVector {
    let (r, t) = beam_splitter(delta);
    StateVector::combine(&[(c(r), &photon_ket(PhotonMode::L1)), (c(-t), &photon_ket(PhotonMode::R2))])
        .expect("same space")
}

/// Bright-port state `t|l₁⟩ + r|r₂⟩`, orthogonal to the dark port.
pub fn bright_port_state(delta: f64) -> StateVector {
    let (r, t) = beam_splitter(delta);
    StateVector::combine(&[(c(t), &photon_ket(PhotonMode::L1)), (c(r), &photon_ket(PhotonMode::R2))])
        .expect("same space")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Branch-by-branch assembly from coherent states `|±ϕ(τ)⟩`.
    AnalyticBranches,
    /// Disentangled product propagator applied to the initial state.
    Propagator,
    /// Spectral exponential of the photon-difference Hamiltonian.
    DirectExponential,
}

/// Joint state after evolving [`initial_state`] for `τ`.
pub fn evolved_state(p: &SystemParams, method: Method) -> Result<StateVector> {
    match method {
        Method::AnalyticBranches => analytic_branches(p),
        Method::Propagator => propagator_analytic(p)?.apply(&initial_state(p)),
        Method::DirectExponential => Spectral::new(&hamiltonian_approx(p))?.evolve(&initial_state(p), p.tau()),
    }
}

fn analytic_branches(p: &SystemParams) -> Result<StateVector> {
    let mech = p.mech();
    let d = p.derived();
    let (s, cs) = (p.xi() * p.tau()).sin_cos();
    // The N̂² phase is 1 on the odd modes and e^{iφ} on everything else.
    let kappa = C64::new(0.0, d.kerr_phase).exp();
    let plus = coherent_state(d.mech_displacement, mech)?;
    let minus = coherent_state(-d.mech_displacement, mech)?;
    let vac = mech.fock(0)?;
    let h = 0.5 * FRAC_1_SQRT_2;
    let branch = |kc: C64, coh: &StateVector, vac_sign: f64| {
        StateVector::combine(&[(kc * h, coh), (c(vac_sign * h), &vac)]).expect("same space")
    };
    let kc = kappa * cs;
    let ks = -C64::i() * kappa * s * 0.5;
    let terms = [
        (PhotonMode::R1, branch(kc, &plus, 1.0)),
        (PhotonMode::L1, branch(kc, &plus, -1.0)),
        (PhotonMode::R2, branch(kc, &minus, -1.0)),
        (PhotonMode::L2, branch(kc, &minus, 1.0)),
        (PhotonMode::A1, plus.scaled(ks)),
        (PhotonMode::A2, minus.scaled(ks)),
    ];
    let parts: Vec<StateVector> =
        terms.iter().map(|(m, v)| photon_ket(*m).tensor(v)).collect::<Result<_>>()?;
    let weighted: Vec<(C64, &StateVector)> = parts.iter().map(|v| (c(1.0), v)).collect();
    StateVector::combine(&weighted)
}

/// Outcome of projecting the photon onto a post-selected state.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Normalized mechanical state.
    pub meter_state: StateVector,
    /// Squared norm of the projected state before normalization.
    pub probability: f64,
    /// `⟨c† + c⟩` in the meter state, i.e. `⟨q̂⟩/x₀`.
    pub mean_position_x0: f64,
}

/// `(⟨f| ⊗ I)|state⟩`, normalized.
pub fn postselect(state: &StateVector, f: &StateVector) -> Result<Projection> {
    if !state.is_normalized(crate::hilbert::NORM_TOL_PROPAGATED) {
        return Err(Error::NotNormalized { norm: state.norm() });
    }
    if !f.is_normalized(crate::hilbert::NORM_TOL_CONSTRUCTION) {
        return Err(Error::NotNormalized { norm: f.norm() });
    }
    let projected = state.contract_factor(PHOTON, f)?;
    let probability = projected.norm().powi(2);
    if probability < MIN_PROBABILITY {
        return Err(Error::PostSelectionFailed { probability });
    }
    let meter_state = projected.normalized()?;
    let n_max = meter_state.space().factor_dim(MECH).ok_or_else(|| Error::UnknownFactor(MECH.into()))? - 1;
    let mean_position_x0 = expectation(&MechMode::new(n_max)?.position(), &meter_state)?.re;
    Ok(Projection { meter_state, probability, mean_position_x0 })
}

/// Dark-port post-selection of the full pipeline, compared with closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelectionResult {
    pub meter_state: StateVector,
    pub probability_exact: f64,
    /// Leading-order `δ² + ϕ²/4`.
    pub probability_formula: f64,
    pub mean_position_x0: f64,
    /// Fidelity with the closed-form meter state; only defined when the
    /// timing constraints hold.
    pub fidelity_vs_closed_form: Option<f64>,
}

impl PostSelectionResult {
    /// `|P_exact − P_formula| / P_exact`.
    pub fn probability_gap(&self) -> f64 {
        (self.probability_exact - self.probability_formula).abs() / self.probability_exact
    }
}

pub fn dark_port_postselection(p: &SystemParams, method: Method) -> Result<PostSelectionResult> {
    let state = evolved_state(p, method)?;
    let proj = postselect(&state, &dark_port_state(p.delta()))?;
    let phi = p.derived().scaled_strength;
    let fidelity_vs_closed_form = if p.timing_constraints_hold() {
        Some(fidelity(&proj.meter_state, &meter_state_exact(p.delta(), phi, p.mech())?)?)
    } else {
        None
    };
    Ok(PostSelectionResult {
        meter_state: proj.meter_state,
        probability_exact: proj.probability,
        probability_formula: probability_formula(p.delta(), phi),
        mean_position_x0: proj.mean_position_x0,
        fidelity_vs_closed_form,
    })
}

/// Normalized meter state `δ|0⟩ − (r/√2)|ϕ⟩ + (t/√2)|−ϕ⟩` after dark-port
/// detection at `cos ξτ = −1`, `ω_mτ = π`.
pub fn meter_state_exact(delta: f64, phi: f64, mech: MechMode) -> Result<StateVector> {
    let (r, t) = beam_splitter(delta);
    let plus = coherent_state(c(phi), mech)?;
    let minus = coherent_state(c(-phi), mech)?;
    let unnormalized = StateVector::combine(&[
        (c(delta), &mech.fock(0)?),
        (c(-r / SQRT_2), &plus),
        (c(t / SQRT_2), &minus),
    ])?;
    if unnormalized.norm() == 0.0 {
        return Err(Error::DegenerateProbability);
    }
    unnormalized.normalized()
}

/// `δ² + ϕ²/4`.
pub fn probability_formula(delta: f64, phi: f64) -> f64 {
    delta * delta + phi * phi / 4.0
}

/// Exact dark-port probability at the timing point from the coherent
/// overlaps `e^{−ϕ²/2}` and `e^{−2ϕ²}`.
pub fn probability_closed_form(delta: f64, phi: f64) -> f64 {
    let e = (-phi * phi / 2.0).exp();
    let cc = (-2.0 * phi * phi).exp();
    // (1 − e^{−2ϕ²})/2 via exp_m1 keeps precision at small ϕ
    (delta * delta * (1.0 + 2.0 * e + cc) - 0.5 * (-2.0 * phi * phi).exp_m1()) / 4.0
}

/// `⟨f|op|i⟩ / ⟨f|i⟩`.
pub fn weak_value(op: &LinearOp, i: &StateVector, f: &StateVector) -> Result<C64> {
    let overlap = inner(f, i)?;
    if overlap.norm() < ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalSelection { overlap: overlap.norm() });
    }
    Ok(op.matrix_element(f, i)? / overlap)
}

fn nonzero(delta: f64, what: &'static str) -> Result<()> {
    if delta == 0.0 {
        return Err(Error::ZeroDelta(what));
    }
    Ok(())
}

/// `N_w = −√(1−δ²)/(2δ)`.
pub fn weak_value_closed_form(delta: f64) -> Result<f64> {
    nonzero(delta, "photon-difference weak value")?;
    Ok(-(1.0 - delta * delta).sqrt() / (2.0 * delta))
}

/// Side-resolved weak values as published, `(1/2 − 1/4δ, 1/2 + 1/4δ)`.
///
/// These are [`side_weak_values_exact`] with `√(1−δ²)` replaced by 1, so they
/// agree with the matrix elements only to `O(δ)`.
pub fn side_weak_values(delta: f64) -> Result<(f64, f64)> {
    nonzero(delta, "side weak values")?;
    Ok((0.5 - 0.25 / delta, 0.5 + 0.25 / delta))
}

/// Total photon number on the single-excitation sector.
pub fn total_number() -> LinearOp {
    LinearOp::identity(photon_space())
}

/// `(N_tot ± N̂)/2`: photon number on side 1 or 2, with each uncoupled odd
/// mode shared equally between the two sides.
pub fn side_operator(side: u8) -> LinearOp {
    let sign = if side == 1 { 1.0 } else { -1.0 };
    total_number()
        .plus(&photon_difference().scaled_real(sign))
        .expect("same space")
        .scaled_real(0.5)
        .into_hermitian()
        .expect("Hermitian")
}

/// Matrix-element weak values of [`side_operator`] 1 and 2 for the
/// post-exchange and dark-port states: `(1 ± N_w)/2`.
pub fn side_weak_values_exact(delta: f64) -> Result<(f64, f64)> {
    nonzero(delta, "side weak values")?;
    let i = post_exchange_state();
    let f = dark_port_state(delta);
    Ok((weak_value(&side_operator(1), &i, &f)?.re, weak_value(&side_operator(2), &i, &f)?.re))
}

/// Amplification factor `f = −δ√(1−δ²)/(2P)` and `⟨q̂⟩/x₀ = 2ϕf`.
pub fn amplification_and_position(delta: f64, phi: f64) -> Result<(f64, f64)> {
    let p = probability_formula(delta, phi);
    if p == 0.0 {
        return Err(Error::DegenerateProbability);
    }
    let f = -delta * (1.0 - delta * delta).sqrt() / (2.0 * p);
    Ok((f, 2.0 * phi * f))
}

/// First-order expansion `(2δ|0⟩ − ϕ√(1−δ²)|1⟩)/(2√P)` of the meter state.
pub fn meter_state_first_order(delta: f64, phi: f64, mech: MechMode) -> Result<StateVector> {
    if phi.abs() > FIRST_ORDER_MAX_PHI {
        return Err(Error::ExpansionGuard(phi));
    }
    let p = probability_formula(delta, phi);
    if p == 0.0 {
        return Err(Error::DegenerateProbability);
    }
    let norm = 2.0 * p.sqrt();
    StateVector::combine(&[
        (c(2.0 * delta / norm), &mech.fock(0)?),
        (c(-phi * (1.0 - delta * delta).sqrt() / norm), &mech.fock(1)?),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Weak,
    Strong,
}

impl Regime {
    pub fn classify(delta: f64, phi: f64) -> Self {
        if delta.abs() >= WEAK_REGIME_RATIO * phi.abs() {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Weak => "weak",
            Regime::Strong => "strong",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValueReport {
    pub n_w: f64,
    pub n1_w: f64,
    pub n2_w: f64,
    pub amplification_f: f64,
    pub regime: Regime,
}

impl WeakValueReport {
    pub fn new(delta: f64, phi: f64) -> Result<Self> {
        let n_w = weak_value_closed_form(delta)?;
        let (amplification_f, _) = amplification_and_position(delta, phi)?;
        Ok(Self {
            n_w,
            n1_w: 0.5 * (1.0 + n_w),
            n2_w: 0.5 * (1.0 - n_w),
            amplification_f,
            regime: Regime::classify(delta, phi),
        })
    }
}

/// The `|δ|` below which `|N_w| > 1`, located by bisection.
pub fn anomaly_threshold() -> f64 {
    let excess = |d: f64| (1.0 - d * d).sqrt() / (2.0 * d) - 1.0;
    let (mut lo, mut hi) = (0.1, FRAC_1_SQRT_2);
    while hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{side_number, PHOTON_DIM};
    use crate::params::ParamsSpec;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn preset_with(delta: f64, phi: f64) -> SystemParams {
        SystemParams::preset().with_delta(delta).unwrap().with_phi(phi).unwrap()
    }

    #[test]
    fn initial_state_populations() {
        let p = SystemParams::preset();
        let psi = initial_state(&p);
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        let pops = psi.factor_populations(PHOTON).unwrap();
        assert!((pops[0] - 0.5).abs() < 1e-15 && (pops[1] - 0.5).abs() < 1e-15);
        assert!(pops[2..].iter().all(|&x| x == 0.0));
        let n = crate::dynamics::photon_difference_joint(p.mech());
        assert!(expectation(&n, &psi).unwrap().norm() < 1e-15);
    }

    #[test]
    fn dark_port_geometry() {
        let d0 = dark_port_state(0.0);
        let expect = StateVector::combine(&[
            (c(FRAC_1_SQRT_2), &photon_ket(PhotonMode::L1)),
            (c(-FRAC_1_SQRT_2), &photon_ket(PhotonMode::R2)),
        ])
        .unwrap();
        assert!(d0.max_abs_diff(&expect).unwrap() < 1e-15);
        for delta in [-0.5, -0.1, 0.0, 0.05, 0.3] {
            let f = dark_port_state(delta);
            assert!((f.norm() - 1.0).abs() < 1e-14);
            assert!((inner(&f, &post_exchange_state()).unwrap() - c(delta)).norm() < 1e-15);
            assert!(inner(&f, &bright_port_state(delta)).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn evolution_methods_agree() {
        for (g0, tau) in [(1e-3, PI), (1e-2, 1.3), (5e-3, 0.4)] {
            let p = ParamsSpec { g0, xi: Some(101.0), tau: Some(tau), sideband_index: None, ..Default::default() }
                .build()
                .unwrap();
            let a = evolved_state(&p, Method::AnalyticBranches).unwrap();
            let b = evolved_state(&p, Method::Propagator).unwrap();
            let d = evolved_state(&p, Method::DirectExponential).unwrap();
            assert!(fidelity(&a, &b).unwrap() >= 1.0 - 1e-9);
            assert!(fidelity(&a, &d).unwrap() >= 1.0 - 1e-9);
            assert!(a.max_abs_diff(&b).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn no_photon_left_in_cavity_at_timing_point() {
        let p = SystemParams::preset();
        for method in [Method::AnalyticBranches, Method::Propagator] {
            let pops = evolved_state(&p, method).unwrap().factor_populations(PHOTON).unwrap();
            assert!(pops[4] + pops[5] <= 1e-20, "{method:?}: {}", pops[4] + pops[5]);
        }
    }

    #[test]
    fn decoupled_meter_stays_in_vacuum() {
        let p = SystemParams::preset().with_g0(0.0).unwrap();
        let psi = evolved_state(&p, Method::Propagator).unwrap();
        let pops = psi.factor_populations(MECH).unwrap();
        assert!((pops[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branch_weights_at_general_time() {
        let p = ParamsSpec { g0: 0.05, xi: Some(101.0), tau: Some(1.1), sideband_index: None, ..Default::default() }
            .build()
            .unwrap();
        let psi = evolved_state(&p, Method::Propagator).unwrap();
        let pops = psi.factor_populations(PHOTON).unwrap();
        let d = p.derived();
        let cs = (p.xi() * p.tau()).cos();
        let kappa = C64::new(0.0, d.kerr_phase).exp();
        let overlap = (kappa * (-d.mech_displacement.norm_sqr() / 2.0).exp()).re;
        let plus = (1.0 + cs * cs + 2.0 * cs * overlap) / 8.0;
        let minus = (1.0 + cs * cs - 2.0 * cs * overlap) / 8.0;
        for (k, w) in [(0, plus), (1, plus), (2, minus), (3, minus)] {
            assert!((pops[k] - w).abs() < 1e-12, "branch {k}: {} vs {w}", pops[k]);
        }
        let total: f64 = pops.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let cavity = (p.xi() * p.tau()).sin().powi(2) / 2.0;
        assert!((pops[4] + pops[5] - cavity).abs() < 1e-12);
    }

    #[test]
    fn postselection_reproduces_closed_form_meter() {
        for (delta, phi) in [(5e-2, 1e-3), (0.3, 1e-3), (5e-4, 1e-3)] {
            let r = dark_port_postselection(&preset_with(delta, phi), Method::DirectExponential).unwrap();
            assert!(r.fidelity_vs_closed_form.unwrap() >= 1.0 - 1e-8);
            assert!(r.probability_gap() <= 5.0 * phi * phi);
            assert!((r.probability_exact - probability_closed_form(delta, phi)).abs() <= 1e-9 * r.probability_exact);
        }
    }

    #[test]
    fn balanced_postselection_probability() {
        let phi = 1e-3;
        let r = dark_port_postselection(&preset_with(0.0, phi), Method::Propagator).unwrap();
        assert!((r.probability_exact - 2.5e-7).abs() / r.probability_exact <= 5.0 * phi * phi);
    }

    #[test]
    fn bright_port_takes_the_rest() {
        let p = preset_with(0.2, 1e-3);
        let state = evolved_state(&p, Method::Propagator).unwrap();
        let bright = postselect(&state, &bright_port_state(0.2)).unwrap();
        let dark = postselect(&state, &dark_port_state(0.2)).unwrap();
        // the two ports exhaust l₁ and r₂; r₁ and l₂ keep only O(ϕ²) weight
        assert!((bright.probability + dark.probability - 1.0).abs() < 1e-6);
        assert!(bright.probability > 0.9);
    }

    #[test]
    fn orthogonal_postselection_is_reported() {
        let state = initial_state(&SystemParams::preset());
        let absent = photon_ket(PhotonMode::L1);
        assert!(matches!(postselect(&state, &absent), Err(Error::PostSelectionFailed { .. })));
    }

    #[test]
    fn weak_value_examples() {
        let i = post_exchange_state();
        let n = photon_difference();
        let w = weak_value(&n, &i, &dark_port_state(0.1)).unwrap();
        assert!((w.re + 0.99f64.sqrt() / 0.2).abs() < 1e-12);
        assert!(w.im.abs() <= 1e-12);
        // eigenvector in, eigenvalue out
        let b1 = photon_ket(PhotonMode::B1);
        assert!((weak_value(&n, &b1, &b1).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(matches!(
            weak_value(&n, &i, &photon_ket(PhotonMode::A1)),
            Err(Error::OrthogonalSelection { .. })
        ));
    }

    #[test]
    fn closed_form_matches_matrix_element() {
        for delta in [-0.5, -0.3, -0.1, -0.05, 0.05, 0.1, 0.3, 0.5, 0.7] {
            let cf = weak_value_closed_form(delta).unwrap();
            let me = weak_value(&photon_difference(), &post_exchange_state(), &dark_port_state(delta)).unwrap();
            assert!((cf - me.re).abs() <= 1e-10 * cf.abs().max(1.0));
        }
        assert_eq!(weak_value_closed_form(0.0), Err(Error::ZeroDelta("photon-difference weak value")));
    }

    #[test]
    fn table_magnitudes() {
        for (delta, nw) in [(0.5, 0.866), (0.2, 2.449), (0.09, 5.533)] {
            assert!((weak_value_closed_form(delta).unwrap().abs() - nw).abs() < 5e-4);
        }
    }

    #[test]
    fn published_side_values() {
        assert_eq!(side_weak_values(0.25).unwrap(), (-0.5, 1.5));
        assert_eq!(side_weak_values(-0.25).unwrap(), (1.5, -0.5));
        assert!(side_weak_values(0.0).is_err());
    }

    #[test]
    fn side_values_from_matrix_elements() {
        for delta in [-0.4, -0.05, 0.01, 0.25, 0.6] {
            let (n1, n2) = side_weak_values_exact(delta).unwrap();
            let nw = weak_value_closed_form(delta).unwrap();
            assert!((n1 + n2 - 1.0).abs() <= 1e-12);
            assert!((n1 - n2 - nw).abs() <= 1e-12 * nw.abs().max(1.0));
            let (p1, p2) = side_weak_values(delta).unwrap();
            assert!((p1 - n1).abs() <= delta.abs() / 4.0 && (p2 - n2).abs() <= delta.abs() / 4.0);
            let report = WeakValueReport::new(delta, 1e-3).unwrap();
            assert!((report.n1_w - n1).abs() <= 1e-12 && (report.n2_w - n2).abs() <= 1e-12);
        }
    }

    #[test]
    fn coupled_modes_carry_half_the_total() {
        // only the even modes feel the membrane; their weak value sums to 1/2
        let i = post_exchange_state();
        let f = dark_port_state(0.2);
        let even = weak_value(&side_number(crate::modes::Arm::Both), &i, &f).unwrap();
        assert!((even.re - 0.5).abs() < 1e-12);
        assert!((weak_value(&total_number(), &i, &f).unwrap() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn amplification_landmarks() {
        let phi = 1e-3;
        let (_, q) = amplification_and_position(phi / 2.0, phi).unwrap();
        assert!((q + 1.0).abs() <= 1e-3);
        let (f, _) = amplification_and_position(1e-2, 1e-4).unwrap();
        assert!((f + 50.0).abs() <= 0.1);
        assert_eq!(amplification_and_position(0.0, phi).unwrap(), (0.0, 0.0));
        assert!(matches!(amplification_and_position(0.0, 0.0), Err(Error::DegenerateProbability)));
        let nw = weak_value_closed_form(-0.15).unwrap();
        assert!((nw - 3.30).abs() <= 0.01);
        assert!((100.0 * probability_formula(-0.15, phi) - 2.25).abs() <= 0.01);
    }

    #[test]
    fn mean_position_matches_pipeline() {
        for (delta, phi) in [(5e-2, 1e-3), (5e-4, 1e-3), (-0.2, 1e-3), (1e-2, 1e-2)] {
            let r = dark_port_postselection(&preset_with(delta, phi), Method::Propagator).unwrap();
            let (_, q) = amplification_and_position(delta, phi).unwrap();
            assert!((q - r.mean_position_x0).abs() <= 10.0 * phi * phi * q.abs(), "{delta} {phi}");
        }
    }

    #[test]
    fn first_order_meter_state() {
        let mech = MechMode::new(16).unwrap();
        let phi = 1e-3;
        let delta = phi / 2.0;
        let m = meter_state_first_order(delta, phi, mech).unwrap();
        let half = StateVector::combine(&[(c(FRAC_1_SQRT_2), &mech.fock(0).unwrap()), (c(-FRAC_1_SQRT_2), &mech.fock(1).unwrap())])
            .unwrap();
        assert!(fidelity(&m, &half).unwrap() >= 1.0 - 1e-6);
        for (delta, phi) in [(phi / 2.0, phi), (5e-2, 1e-3), (0.3, 1e-2), (1e-3, 1e-2)] {
            let m = meter_state_first_order(delta, phi, mech).unwrap();
            let exact = meter_state_exact(delta, phi, mech).unwrap();
            assert!(fidelity(&m, &exact).unwrap() >= 1.0 - 10.0 * phi * phi);
        }
        // weak regime: a coherent state displaced by ϕN_w
        let delta = 50.0 * phi;
        let amp = phi * weak_value_closed_form(delta).unwrap();
        let m = meter_state_first_order(delta, phi, mech).unwrap();
        let coh = coherent_state(c(amp), mech).unwrap();
        assert!(fidelity(&m, &coh).unwrap() >= 1.0 - 10.0 * amp * amp);
        let m = meter_state_first_order(0.2, 0.0, mech).unwrap();
        assert!((fidelity(&m, &mech.fock(0).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(meter_state_first_order(0.2, 0.2, mech), Err(Error::ExpansionGuard(_))));
    }

    #[test]
    fn regime_flag() {
        assert_eq!(WeakValueReport::new(1e-2, 1e-3).unwrap().regime, Regime::Weak);
        assert_eq!(WeakValueReport::new(9e-3, 1e-3).unwrap().regime, Regime::Strong);
    }

    #[test]
    fn anomaly_threshold_value() {
        let t = anomaly_threshold();
        assert!((t - 1.0 / 5f64.sqrt()).abs() <= 1e-12);
        assert!(weak_value_closed_form(t * (1.0 - 1e-9)).unwrap().abs() > 1.0);
        assert!(weak_value_closed_form(t * (1.0 + 1e-9)).unwrap().abs() < 1.0);
    }

    #[test]
    fn amplification_is_largest_at_half_phi() {
        let phi = 1e-3;
        let best = (1..=20_000)
            .map(|k| k as f64 * 1e-7)
            .max_by(|a, b| {
                let fa = amplification_and_position(*a, phi).unwrap().0.abs();
                let fb = amplification_and_position(*b, phi).unwrap().0.abs();
                fa.total_cmp(&fb)
            })
            .unwrap();
        assert!((best - phi / 2.0).abs() <= 1e-7);
    }

    #[test]
    fn amplification_tends_to_weak_value() {
        // f = N_w δ²/P exactly, so the relative gap is ϕ²/(4δ²) to leading order
        let phi = 1e-3;
        for delta in [-0.5, -0.3, -0.1, -0.05, 0.05, 0.1, 0.3, 0.5] {
            let nw = weak_value_closed_form(delta).unwrap();
            let (f, _) = amplification_and_position(delta, phi).unwrap();
            let gap = (f - nw).abs() / nw.abs();
            assert!(gap <= phi * phi / (4.0 * delta * delta));
        }
    }

    fn unit_photon(parts: &[(f64, f64)]) -> StateVector {
        let amps: Vec<C64> = parts.iter().map(|&(re, im)| C64::new(re, im)).collect();
        StateVector::from_slice(photon_space(), &amps).unwrap().normalized().unwrap()
    }

    fn hermitian(parts: &[(f64, f64)]) -> LinearOp {
        LinearOp::from_fn(photon_space(), true, |r, col| {
            let (re, im) = parts[r * PHOTON_DIM + col];
            let (re2, im2) = parts[col * PHOTON_DIM + r];
            C64::new(re + re2, im - im2) * 0.5
        })
        .unwrap()
    }

    fn amp() -> impl Strategy<Value = (f64, f64)> {
        (-1.0..1.0f64, -1.0..1.0f64)
    }

    proptest! {
        #[test]
        fn weak_value_is_linear(
            i in prop::collection::vec(amp(), PHOTON_DIM),
            f in prop::collection::vec(amp(), PHOTON_DIM),
            a in prop::collection::vec(amp(), PHOTON_DIM * PHOTON_DIM),
            b in prop::collection::vec(amp(), PHOTON_DIM * PHOTON_DIM),
        ) {
            let (i, f) = (unit_photon(&i), unit_photon(&f));
            prop_assume!(inner(&f, &i).unwrap().norm() > 0.1);
            let (a, b) = (hermitian(&a), hermitian(&b));
            let sum = weak_value(&a.plus(&b).unwrap(), &i, &f).unwrap();
            let parts = weak_value(&a, &i, &f).unwrap() + weak_value(&b, &i, &f).unwrap();
            prop_assert!((sum - parts).norm() <= 1e-12 * sum.norm().max(1.0));
        }

        #[test]
        fn weak_value_ignores_global_phases(
            delta in prop_oneof![-0.7..-0.01f64, 0.01..0.7f64],
            theta_i in 0.0..(2.0 * PI),
            theta_f in 0.0..(2.0 * PI),
        ) {
            let op = photon_difference();
            let i = post_exchange_state();
            let f = dark_port_state(delta);
            let base = weak_value(&op, &i, &f).unwrap();
            let rotated = weak_value(
                &op,
                &i.scaled(C64::from_polar(1.0, theta_i)),
                &f.scaled(C64::from_polar(1.0, theta_f)),
            ).unwrap();
            prop_assert!((base - rotated).norm() <= 1e-12 * base.norm().max(1.0));
            prop_assert!(base.im.abs() <= 1e-12);
        }

        #[test]
        fn probability_formula_gap(delta in -0.7..0.7f64, phi in 1e-5..1e-2f64) {
            let exact = probability_closed_form(delta, phi);
            let gap = (exact - probability_formula(delta, phi)).abs() / exact;
            prop_assert!(gap <= 5.0 * phi * phi);
        }

        #[test]
        fn displacement_sign_law(delta in prop_oneof![-0.7..-1e-6f64, 1e-6..0.7f64], phi in 1e-5..1e-2f64) {
            let (_, q) = amplification_and_position(delta, phi).unwrap();
            prop_assert!(q * delta < 0.0);
        }

        #[test]
        fn side_values_sum_to_one(delta in prop_oneof![-0.7..-1e-4f64, 1e-4..0.7f64]) {
            let (a, b) = side_weak_values(delta).unwrap();
            prop_assert!((a + b - 1.0).abs() <= 1e-12);
            let r = WeakValueReport::new(delta, 1e-3).unwrap();
            prop_assert!((r.n1_w + r.n2_w - 1.0).abs() <= 1e-12);
            prop_assert!((r.n1_w - r.n2_w - r.n_w).abs() <= 1e-12 * r.n_w.abs().max(1.0));
        }
    }
}
