//! Mode operators and special states.
//!
//! The photonic factor is the six-dimensional single-excitation sector. Its
//! canonical coordinates are the travelling-wave basis
//! `[r₁, l₂, l₁, r₂, a₁, a₂]`; the standing-wave modes
//! `b = (r + l)/√2`, `d = (r − l)/√2` are expressed in those coordinates.
//! Inside the single-excitation sector a bilinear `x†y` is the transition
//! `|x⟩⟨y|`, which is how every photonic operator here is assembled.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{expm_hermitian, CompositeSpace, LinearOp, StateVector};

pub const PHOTON: &str = "photon";
pub const MECH: &str = "mech";
pub const PHOTON_DIM: usize = 6;
pub const MIN_N_MAX: usize = 8;
/// Largest tolerated tail weight dropped by the coherent-state truncation.
pub const COHERENT_RESIDUAL_TOL: f64 = 1e-10;

/// Single-excitation photonic modes, travelling and standing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhotonMode {
    R1,
    L2,
    L1,
    R2,
    A1,
    A2,
    B1,
    D1,
    B2,
    D2,
}

impl PhotonMode {
    pub const TRAVELLING: [PhotonMode; 6] =
        [PhotonMode::R1, PhotonMode::L2, PhotonMode::L1, PhotonMode::R2, PhotonMode::A1, PhotonMode::A2];
    pub const STANDING: [PhotonMode; 6] =
        [PhotonMode::B1, PhotonMode::D1, PhotonMode::B2, PhotonMode::D2, PhotonMode::A1, PhotonMode::A2];
    pub const ALL: [PhotonMode; 10] = [
        PhotonMode::R1,
        PhotonMode::L2,
        PhotonMode::L1,
        PhotonMode::R2,
        PhotonMode::A1,
        PhotonMode::A2,
        PhotonMode::B1,
        PhotonMode::D1,
        PhotonMode::B2,
        PhotonMode::D2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PhotonMode::R1 => "r1",
            PhotonMode::L2 => "l2",
            PhotonMode::L1 => "l1",
            PhotonMode::R2 => "r2",
            PhotonMode::A1 => "a1",
            PhotonMode::A2 => "a2",
            PhotonMode::B1 => "b1",
            PhotonMode::D1 => "d1",
            PhotonMode::B2 => "b2",
            PhotonMode::D2 => "d2",
        }
    }

    /// Coordinates of `|mode⟩` in the canonical travelling basis.
    pub fn coordinates(self) -> [f64; PHOTON_DIM] {
        let s = FRAC_1_SQRT_2;
        let mut v = [0.0; PHOTON_DIM];
        match self {
            PhotonMode::R1 => v[0] = 1.0,
            PhotonMode::L2 => v[1] = 1.0,
            PhotonMode::L1 => v[2] = 1.0,
            PhotonMode::R2 => v[3] = 1.0,
            PhotonMode::A1 => v[4] = 1.0,
            PhotonMode::A2 => v[5] = 1.0,
            PhotonMode::B1 => (v[0], v[2]) = (s, s),
            PhotonMode::D1 => (v[0], v[2]) = (s, -s),
            PhotonMode::B2 => (v[3], v[1]) = (s, s),
            PhotonMode::D2 => (v[3], v[1]) = (s, -s),
        }
        v
    }
}

impl fmt::Display for PhotonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PhotonMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['₁'], "1").replace(['₂'], "2");
        PhotonMode::ALL
            .into_iter()
            .find(|m| m.label() == key)
            .ok_or_else(|| Error::UnknownMode(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Travelling,
    Standing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveDirection {
    ToStanding,
    ToTravelling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Jx,
    Jy,
    Jz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    One,
    Two,
    Both,
}

pub fn photon_space() -> CompositeSpace {
    CompositeSpace::single(PHOTON, PHOTON_DIM).expect("nonzero dimension")
}

/// Single-photon state of `mode`, in canonical coordinates.
pub fn photon_ket(mode: PhotonMode) -> StateVector {
    let amps: Vec<C64> = mode.coordinates().iter().map(|&x| C64::new(x, 0.0)).collect();
    StateVector::from_slice(photon_space(), &amps).expect("six coordinates")
}

/// Unit single-photon state by label (`r1`, `l2`, ..., `d2`).
pub fn named_photon_state(label: &str) -> Result<StateVector> {
    Ok(photon_ket(label.parse()?))
}

/// Coordinates of a canonical state in the requested convention.
pub fn coordinates_in(psi: &StateVector, convention: Convention) -> Result<StateVector> {
    match convention {
        Convention::Travelling => Ok(psi.clone()),
        Convention::Standing => standing_wave_transform(WaveDirection::ToStanding).apply(psi),
    }
}

/// `|x⟩⟨y|`, the single-excitation form of `x† y`.
pub fn transition(x: PhotonMode, y: PhotonMode) -> LinearOp {
    LinearOp::outer(&photon_ket(x), &photon_ket(y)).expect("same space")
}

pub fn mode_number(mode: PhotonMode) -> LinearOp {
    transition(mode, mode).into_hermitian().expect("projector is Hermitian")
}

/// Change of coordinates between travelling and standing conventions.
///
/// `ToStanding` maps travelling coordinates onto `[b₁, d₁, b₂, d₂, a₁, a₂]`
/// coordinates; `ToTravelling` is its adjoint.
pub fn standing_wave_transform(direction: WaveDirection) -> LinearOp {
    let rows: Vec<[f64; PHOTON_DIM]> = PhotonMode::STANDING.iter().map(|m| m.coordinates()).collect();
    let to_standing =
        LinearOp::from_fn(photon_space(), false, |k, j| C64::new(rows[k][j], 0.0)).expect("6x6");
    match direction {
        WaveDirection::ToStanding => to_standing,
        WaveDirection::ToTravelling => to_standing.adjoint(),
    }
}

fn hermitian_sum(terms: &[(C64, LinearOp)]) -> LinearOp {
    terms
        .iter()
        .fold(LinearOp::zeros(photon_space()), |acc, (c, op)| acc.plus(&op.scaled(*c)).expect("same space"))
        .into_hermitian()
        .expect("Hermitian by construction")
}

fn angular_single(which: Component, arm: Arm) -> LinearOp {
    use PhotonMode::*;
    let (a, b) = match arm {
        Arm::One => (A1, B1),
        Arm::Two => (A2, B2),
        Arm::Both => unreachable!(),
    };
    let half = C64::new(0.5, 0.0);
    let i_half = C64::new(0.0, 0.5);
    match (which, arm) {
        // (1/2)(a b† + a† b)
        (Component::Jx, _) => hermitian_sum(&[(half, transition(b, a)), (half, transition(a, b))]),
        // (i/2)(a₁ b₁† − a₁† b₁)
        (Component::Jy, Arm::One) => hermitian_sum(&[(i_half, transition(b, a)), (-i_half, transition(a, b))]),
        // (i/2)(a₂† b₂ − a₂ b₂†), opposite ordering to arm one
        (Component::Jy, _) => hermitian_sum(&[(i_half, transition(a, b)), (-i_half, transition(b, a))]),
        // (1/2)(a₁†a₁ − b₁†b₁)
        (Component::Jz, Arm::One) => hermitian_sum(&[(half, transition(a, a)), (-half, transition(b, b))]),
        // (1/2)(b₂†b₂ − a₂†a₂)
        (Component::Jz, _) => hermitian_sum(&[(half, transition(b, b)), (-half, transition(a, a))]),
    }
}

/// Angular-momentum bilinears of the cavity/even-mode exchange (ħ = 1).
pub fn angular_momentum(which: Component, arm: Arm) -> LinearOp {
    match arm {
        Arm::Both => angular_single(which, Arm::One)
            .plus(&angular_single(which, Arm::Two))
            .expect("same space"),
        _ => angular_single(which, arm),
    }
}

/// Interacting photons on one side, `N̂ᵢ = aᵢ†aᵢ + bᵢ†bᵢ`.
pub fn side_number(arm: Arm) -> LinearOp {
    use PhotonMode::*;
    match arm {
        Arm::One => mode_number(A1).plus(&mode_number(B1)).expect("same space"),
        Arm::Two => mode_number(A2).plus(&mode_number(B2)).expect("same space"),
        Arm::Both => side_number(Arm::One).plus(&side_number(Arm::Two)).expect("same space"),
    }
}

/// Photons in the odd modes `d₁, d₂`, which never reach the cavity.
pub fn odd_number() -> LinearOp {
    mode_number(PhotonMode::D1).plus(&mode_number(PhotonMode::D2)).expect("same space")
}

/// Difference of interacting photons, `N̂ = N̂₁ − N̂₂`.
pub fn photon_difference() -> LinearOp {
    side_number(Arm::One).minus(&side_number(Arm::Two)).expect("same space")
}

fn ladder_space(label: &str, dim: usize) -> Result<CompositeSpace> {
    if dim < 2 {
        return Err(Error::LadderTooSmall(dim));
    }
    CompositeSpace::single(label, dim)
}

fn annihilation_on(label: &str, dim: usize) -> Result<LinearOp> {
    let space = ladder_space(label, dim)?;
    LinearOp::from_fn(space, false, |i, j| {
        if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
    })
}

/// Truncated boson annihilation operator, `⟨n−1|a|n⟩ = √n`.
pub fn annihilation(dim: usize) -> Result<LinearOp> {
    annihilation_on("mode", dim)
}

/// Mechanical Fock truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MechMode {
    n_max: usize,
}

impl MechMode {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < MIN_N_MAX {
            return Err(Error::InvalidParams(vec![format!("n_max must be >= {MIN_N_MAX}, got {n_max}")]));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(self) -> usize {
        self.n_max
    }

    pub fn dim(self) -> usize {
        self.n_max + 1
    }

    pub fn space(self) -> CompositeSpace {
        CompositeSpace::single(MECH, self.dim()).expect("nonzero dimension")
    }

    pub fn fock(self, n: usize) -> Result<StateVector> {
        StateVector::basis(self.space(), n)
    }

    pub fn annihilation(self) -> LinearOp {
        annihilation_on(MECH, self.dim()).expect("dim >= 2")
    }

    pub fn creation(self) -> LinearOp {
        self.annihilation().adjoint()
    }

    pub fn number(self) -> LinearOp {
        LinearOp::diagonal(self.space(), |n| n as f64)
    }

    /// `q̂/x₀ = c + c†`.
    pub fn position(self) -> LinearOp {
        let c = self.annihilation();
        c.plus(&c.adjoint()).expect("same space").into_hermitian().expect("Hermitian")
    }

    /// `X̂ = (c + c†)/√2`.
    pub fn quadrature_x(self) -> LinearOp {
        self.position().scaled_real(FRAC_1_SQRT_2)
    }

    /// `Ŷ = i(c† − c)/√2`.
    pub fn quadrature_y(self) -> LinearOp {
        let c = self.annihilation();
        c.adjoint()
            .minus(&c)
            .expect("same space")
            .scaled(C64::new(0.0, FRAC_1_SQRT_2))
            .into_hermitian()
            .expect("Hermitian")
    }

    fn guard(self, alpha: C64) -> Result<()> {
        let alpha_sq = alpha.norm_sqr();
        let limit = self.n_max as f64 / 4.0;
        if alpha_sq > limit {
            return Err(Error::TruncationGuard { alpha_sq, limit, residual: f64::NAN });
        }
        Ok(())
    }
}

/// Coherent state `e^{−|α|²/2} Σ αⁿ/√n! |n⟩`, renormalized on the truncation.
pub fn coherent_state(alpha: C64, mech: MechMode) -> Result<StateVector> {
    mech.guard(alpha)?;
    let mut amps = Vec::with_capacity(mech.dim());
    let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(term);
    for n in 1..mech.dim() {
        term = term * alpha / (n as f64).sqrt();
        amps.push(term);
    }
    let kept: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let residual = (1.0 - kept).abs();
    if residual > COHERENT_RESIDUAL_TOL {
        return Err(Error::TruncationGuard {
            alpha_sq: alpha.norm_sqr(),
            limit: mech.n_max as f64 / 4.0,
            residual,
        });
    }
    StateVector::from_slice(mech.space(), &amps)?.normalized()
}

/// Hermitian generator `i(α c† − α* c)`, so that `D(α) = exp(−i · generator)`.
pub(crate) fn displacement_generator(alpha: C64, mech: MechMode) -> LinearOp {
    let c = mech.annihilation();
    c.adjoint()
        .scaled(C64::i() * alpha)
        .minus(&c.scaled(C64::i() * alpha.conj()))
        .expect("same space")
        .into_hermitian()
        .expect("Hermitian by construction")
}

/// Displacement `D(α) = exp(α c† − α* c)` via spectral exponential.
pub fn displacement(alpha: C64, mech: MechMode) -> Result<LinearOp> {
    mech.guard(alpha)?;
    expm_hermitian(&displacement_generator(alpha, mech), 1.0)
}

/// Parity `(−1)ⁿ`.
pub fn parity(mech: MechMode) -> LinearOp {
    LinearOp::diagonal(mech.space(), |n| if n % 2 == 0 { 1.0 } else { -1.0 })
}
