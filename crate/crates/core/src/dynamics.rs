//! Hamiltonians, propagators and the perturbative certificate that licenses
//! replacing the full radiation-pressure coupling with the photon-difference
//! coupling.
//!
//! All operators act on `photon(6) ⊗ mech(n_max + 1)` in the interaction
//! picture with respect to the free optical energy (ħ = 1, frequencies in
//! units of `omega_m` unless configured otherwise).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{bures_distance, expm_hermitian, CompositeSpace, LinearOp, Spectral, StateVector};
use crate::modes::{
    angular_momentum, displacement, mode_number, photon_difference, photon_space, side_number, Arm,
    Component, MechMode, PhotonMode,
};
use crate::params::SystemParams;
use crate::quadrature::{adaptive_simpson_complex, DEFAULT_ABS_TOL};

pub fn joint_space(mech: MechMode) -> CompositeSpace {
    photon_space().product(&mech.space()).expect("distinct labels")
}

/// `photon_op ⊗ mech_op`.
pub fn product_op(photon_op: &LinearOp, mech_op: &LinearOp) -> LinearOp {
    photon_op.kron(mech_op).expect("distinct labels")
}

fn photonic(op: &LinearOp, mech: MechMode) -> LinearOp {
    product_op(op, &LinearOp::identity(mech.space()))
}

fn mechanical(op: &LinearOp) -> LinearOp {
    product_op(&LinearOp::identity(photon_space()), op)
}

fn sum_hermitian(terms: &[LinearOp]) -> LinearOp {
    let (first, rest) = terms.split_first().expect("at least one term");
    rest.iter()
        .fold(first.clone(), |acc, t| acc.plus(t).expect("same space"))
        .into_hermitian()
        .expect("Hermitian by construction")
}

/// Full interaction-picture Hamiltonian:
/// `ξ Σᵢ(aᵢ†bᵢ + h.c.) + ω_m c†c − g₀(a₁†a₁ − a₂†a₂)(c† + c)`.
pub fn hamiltonian_full_interaction(p: &SystemParams) -> LinearOp {
    let mech = p.mech();
    let exchange = angular_momentum(Component::Jx, Arm::Both).scaled_real(2.0 * p.xi());
    let cavity_imbalance = mode_number(PhotonMode::A1).minus(&mode_number(PhotonMode::A2)).expect("same space");
    sum_hermitian(&[
        photonic(&exchange, mech),
        mechanical(&mech.number().scaled_real(p.omega_m())),
        product_op(&cavity_imbalance, &mech.position()).scaled_real(-p.g0()),
    ])
}

/// Photon-difference Hamiltonian `2ξJ_x + ω_m c†c − (g₀/2) N̂ (c† + c)`.
pub fn hamiltonian_approx(p: &SystemParams) -> LinearOp {
    let mech = p.mech();
    let exchange = angular_momentum(Component::Jx, Arm::Both).scaled_real(2.0 * p.xi());
    sum_hermitian(&[
        photonic(&exchange, mech),
        mechanical(&mech.number().scaled_real(p.omega_m())),
        product_op(&photon_difference(), &mech.position()).scaled_real(-p.g0() / 2.0),
    ])
}

/// `N̂ ⊗ I` on the joint space.
pub fn photon_difference_joint(mech: MechMode) -> LinearOp {
    photonic(&photon_difference(), mech)
}

/// Conditional displacement `exp{N̂[ϕ c† − ϕ* c]}`: `D(±ϕ)` on the `N̂ = ±1`
/// eigenspaces and the identity on `N̂ = 0`.
pub fn conditional_displacement(phi: C64, mech: MechMode) -> Result<LinearOp> {
    let plus = side_number(Arm::One);
    let minus = side_number(Arm::Two);
    let zero = LinearOp::identity(photon_space()).minus(&side_number(Arm::Both))?;
    product_op(&plus, &displacement(phi, mech)?)
        .plus(&product_op(&minus, &displacement(-phi, mech)?))?
        .plus(&product_op(&zero, &LinearOp::identity(mech.space())))
}

/// The four factors of the disentangled propagator, in application order
/// reversed: `[Kerr, conditional displacement, exchange, free mechanics]`.
#[derive(Debug, Clone)]
pub struct PropagatorFactors {
    pub kerr: LinearOp,
    pub optomechanical: LinearOp,
    pub exchange: LinearOp,
    pub free: LinearOp,
}

impl PropagatorFactors {
    pub fn new(p: &SystemParams) -> Result<Self> {
        let mech = p.mech();
        let d = p.derived();
        let n = photon_difference();
        let n_sq = n.compose(&n)?.into_hermitian()?;
        // exp(iφN̂²) = exp(−i N̂² t) at t = −φ
        let kerr = photonic(&expm_hermitian(&n_sq, -d.kerr_phase)?, mech);
        let optomechanical = conditional_displacement(d.mech_displacement, mech)?;
        let jx = angular_momentum(Component::Jx, Arm::Both);
        let exchange = photonic(&expm_hermitian(&jx, 2.0 * p.xi() * p.tau())?, mech);
        let free = mechanical(&expm_hermitian(&mech.number(), p.omega_m() * p.tau())?);
        Ok(Self { kerr, optomechanical, exchange, free })
    }

    pub fn product(&self) -> LinearOp {
        self.kerr
            .compose(&self.optomechanical)
            .and_then(|u| u.compose(&self.exchange))
            .and_then(|u| u.compose(&self.free))
            .expect("same space")
    }
}

/// Disentangled propagator `e^{iφN̂²} e^{N̂(ϕc† − ϕ*c)} e^{−i2ξτJ_x} e^{−iω_mτc†c}`.
pub fn propagator_analytic(p: &SystemParams) -> Result<LinearOp> {
    Ok(PropagatorFactors::new(p)?.product())
}

/// `exp(−i H τ)` by direct spectral exponential.
pub fn propagator_numeric(h: &LinearOp, tau: f64) -> Result<LinearOp> {
    expm_hermitian(h, tau)
}

/// Bures distance between `psi0` evolved for `τ` under the full and the
/// photon-difference Hamiltonians.
pub fn approximation_error(p: &SystemParams, psi0: &StateVector) -> Result<f64> {
    let full = Spectral::new(&hamiltonian_full_interaction(p))?.evolve(psi0, p.tau())?;
    let approx = Spectral::new(&hamiltonian_approx(p))?.evolve(psi0, p.tau())?;
    bures_distance(&full, &approx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DysonCoefficient {
    Abar,
    Bbar,
    Fbar,
    Gbar,
}

impl DysonCoefficient {
    pub const ALL: [DysonCoefficient; 4] =
        [DysonCoefficient::Abar, DysonCoefficient::Bbar, DysonCoefficient::Fbar, DysonCoefficient::Gbar];

    pub fn label(self) -> &'static str {
        match self {
            DysonCoefficient::Abar => "Abar",
            DysonCoefficient::Bbar => "Bbar",
            DysonCoefficient::Fbar => "fbar",
            DysonCoefficient::Gbar => "gbar",
        }
    }
}

/// Relative gap below which `2ξ = ω_m` counts as the resonance pole.
pub const POLE_TOL: f64 = 1e-6;

fn pole_check(p: &SystemParams) -> Result<()> {
    let gap = (2.0 * p.xi() - p.omega_m()).abs();
    if gap < POLE_TOL * p.omega_m() {
        return Err(Error::ResonancePole { gap });
    }
    Ok(())
}

/// Rotating-frame coefficients `A(t)`, `B(t)`, `f(t)`, `g(t)` before time
/// integration.
pub fn dyson_integrand(which: DysonCoefficient, p: &SystemParams, t: f64) -> C64 {
    let (g0, w, xi) = (p.g0(), p.omega_m(), p.xi());
    let rot = C64::new(0.0, w * t).exp();
    match which {
        DysonCoefficient::Abar => g0 * (2.0 * xi * t).cos() * rot,
        DysonCoefficient::Bbar => g0 * (2.0 * xi * t).sin() * rot,
        DysonCoefficient::Fbar => C64::new(g0 * g0 / w * (2.0 * xi * t).cos() * (1.0 - (w * t).cos()), 0.0),
        DysonCoefficient::Gbar => C64::new(g0 * g0 / w * (2.0 * xi * t).sin() * (1.0 - (w * t).cos()), 0.0),
    }
}

fn closed_form(which: DysonCoefficient, p: &SystemParams, tau: f64, printed_gbar: bool) -> Result<C64> {
    pole_check(p)?;
    let (g0, w, xi) = (p.g0(), p.omega_m(), p.xi());
    let a = g0 / (2.0 * xi);
    let ratio = w / (2.0 * xi);
    let k = 1.0 / (1.0 - ratio * ratio);
    let (s2, c2) = (2.0 * xi * tau).sin_cos();
    let (sw, cw) = (w * tau).sin_cos();
    let rot = C64::new(0.0, w * tau).exp();
    let one = C64::new(1.0, 0.0);
    let i = C64::i();
    let phi = g0 / w;
    Ok(match which {
        DysonCoefficient::Abar => -i * a * ratio * k * (one - c2 * rot) + a * k * s2 * rot,
        DysonCoefficient::Bbar => a * k * (one - c2 * rot) + i * a * ratio * k * s2 * rot,
        DysonCoefficient::Fbar => C64::new(phi * a * s2 - a * phi * k * cw * s2 + a * a * k * c2 * sw, 0.0),
        DysonCoefficient::Gbar => {
            // ∫₀^τ sin(2ξz) dz = sin²(ξτ)/ξ; the printed leading term carries sin²(2ξτ).
            let lead = if printed_gbar { s2 * s2 } else { (xi * tau).sin().powi(2) };
            C64::new(phi * (g0 / xi) * lead - a * phi * k + phi * a * k * cw * c2 + a * a * k * s2 * sw, 0.0)
        }
    })
}

/// Time-integrated rotating-frame coefficient `∫₀^τ X(z) dz` in closed form.
///
/// `Gbar` uses the integrated leading term `(g₀/ω_m)(g₀/ξ) sin²(ξτ)`; see
/// [`dyson_coefficient_as_printed`] for the variant with `sin²(2ξτ)`.
pub fn dyson_coefficient(which: DysonCoefficient, p: &SystemParams, tau: f64) -> Result<C64> {
    closed_form(which, p, tau, false)
}

/// Closed forms exactly as published, including the `sin²(2ξτ)` leading term
/// of `Gbar`, which disagrees with quadrature whenever `sin(2ξτ) ≠ 0`.
pub fn dyson_coefficient_as_printed(which: DysonCoefficient, p: &SystemParams, tau: f64) -> Result<C64> {
    closed_form(which, p, tau, true)
}

/// Quadrature oracle for the closed forms.
pub fn dyson_quadrature(which: DysonCoefficient, p: &SystemParams, tau: f64) -> C64 {
    adaptive_simpson_complex(|t| dyson_integrand(which, p, t), 0.0, tau, DEFAULT_ABS_TOL).0
}

/// First-order Dyson term of the rotating-frame propagator,
/// `i J_z[c†Ā + cĀ* + N̂f̄] + i J_y[c†B̄ + cB̄* + N̂ḡ]`.
pub fn first_order_dyson_operator(p: &SystemParams, tau: f64) -> Result<LinearOp> {
    let mech = p.mech();
    let abar = dyson_coefficient(DysonCoefficient::Abar, p, tau)?;
    let bbar = dyson_coefficient(DysonCoefficient::Bbar, p, tau)?;
    let fbar = dyson_coefficient(DysonCoefficient::Fbar, p, tau)?;
    let gbar = dyson_coefficient(DysonCoefficient::Gbar, p, tau)?;
    let c = mech.annihilation();
    let cd = c.adjoint();
    let n = photon_difference();
    let id_m = LinearOp::identity(mech.space());
    let bracket = |coef: C64, coef_n: C64| -> Result<(LinearOp, LinearOp)> {
        let ladder = cd.scaled(coef).plus(&c.scaled(coef.conj()))?;
        let number = n.scaled(coef_n);
        Ok((ladder, number))
    };
    let jz = angular_momentum(Component::Jz, Arm::Both);
    let jy = angular_momentum(Component::Jy, Arm::Both);
    let (lz, nz) = bracket(abar, fbar)?;
    let (ly, ny) = bracket(bbar, gbar)?;
    let term_z = product_op(&jz, &lz).plus(&product_op(&jz.compose(&nz)?, &id_m))?;
    let term_y = product_op(&jy, &ly).plus(&product_op(&jy.compose(&ny)?, &id_m))?;
    Ok(term_z.plus(&term_y)?.scaled(C64::i()))
}

/// Operator norm of the first-order Dyson term.
pub fn first_order_dyson_norm(p: &SystemParams, tau: f64) -> Result<f64> {
    first_order_dyson_operator(p, tau)?.operator_norm()
}
