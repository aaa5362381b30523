//! Wigner functions of mechanical states by displaced parity,
//! `W(X, Y) = (1/π)⟨ψ|D(α)ΠD(α)†|ψ⟩` with `α = (X + iY)/√2`.
//!
//! A displacement factors as `D(α) = R(θ)D(|α|)R(θ)†` with the phase rotation
//! `R(θ) = e^{iθc†c}`. Parity commutes with `R`, so every grid point needs one
//! diagonal phase and one real displacement. The real displacements share a
//! single spectral decomposition of `i(c† − c)` on an enlarged work space that
//! keeps the displaced state away from the truncation edge.

use std::f64::consts::{FRAC_1_PI, FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{expectation, Spectral, StateVector, NORM_TOL_PROPAGATED};
use crate::modes::{MechMode, MECH};

/// Extra work-space levels beyond the displaced support.
const WORK_MARGIN: usize = 16;
/// Top work-space levels whose population must stay below [`EDGE_TOL`].
const EDGE_LEVELS: usize = 8;
pub const EDGE_TOL: f64 = 1e-10;
/// Half-width, in quadrature units, the grid must cover around `(⟨X⟩, ⟨Y⟩)`.
pub const SUPPORT_HALF_WIDTH: f64 = 4.0;

/// Evaluates displaced-parity Wigner values for states of a fixed dimension
/// up to a maximum `|α|`.
#[derive(Debug, Clone)]
pub struct WignerEvaluator {
    dim: usize,
    alpha_max: f64,
    values: DVector<f64>,
    vectors: DMatrix<C64>,
    vectors_adj: DMatrix<C64>,
}

impl WignerEvaluator {
    pub fn new(dim: usize, alpha_max: f64) -> Result<Self> {
        let n_work = dim.max((4.0 * alpha_max * alpha_max).ceil() as usize) + WORK_MARGIN;
        let work = MechMode::new(n_work - 1)?;
        let c = work.annihilation();
        let generator = c
            .adjoint()
            .minus(&c)?
            .scaled(C64::i())
            .into_hermitian()?;
        let spectral = Spectral::new(&generator)?;
        let vectors = spectral.eigenvectors().clone();
        Ok(Self {
            dim,
            alpha_max,
            values: spectral.eigenvalues().clone(),
            vectors_adj: vectors.adjoint(),
            vectors,
        })
    }

    pub fn work_dim(&self) -> usize {
        self.values.len()
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: state.dim() });
        }
        if !state.is_normalized(NORM_TOL_PROPAGATED) {
            return Err(Error::NotNormalized { norm: state.norm() });
        }
        Ok(())
    }

    pub fn point(&self, state: &StateVector, x: f64, y: f64) -> Result<f64> {
        self.check(state)?;
        self.point_unchecked(state, x, y)
    }

    fn point_unchecked(&self, state: &StateVector, x: f64, y: f64) -> Result<f64> {
        let alpha = C64::new(x, y) * FRAC_1_SQRT_2;
        let (s, theta) = alpha.to_polar();
        if s > self.alpha_max * (1.0 + 1e-12) {
            return Err(Error::TruncationGuard {
                alpha_sq: s * s,
                limit: self.alpha_max * self.alpha_max,
                residual: f64::NAN,
            });
        }
        // D(α)†|ψ⟩ = R(θ) D(−s) R(θ)†|ψ⟩; the outer R drops out of the parity.
        let rotated = DVector::from_iterator(
            self.dim,
            state.amplitudes().iter().enumerate().map(|(n, a)| a * C64::from_polar(1.0, -theta * n as f64)),
        );
        let mut coeffs = self.vectors_adj.columns(0, self.dim) * rotated;
        // D(−s) = exp(−i(−s)·i(c† − c))
        for (c, &lambda) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= C64::from_polar(1.0, s * lambda);
        }
        let displaced = &self.vectors * coeffs;
        let n_work = displaced.len();
        let edge: f64 = displaced.iter().skip(n_work - EDGE_LEVELS).map(|z| z.norm_sqr()).sum();
        if edge > EDGE_TOL {
            return Err(Error::TruncationGuard {
                alpha_sq: s * s,
                limit: self.alpha_max * self.alpha_max,
                residual: edge,
            });
        }
        let parity: f64 = displaced
            .iter()
            .enumerate()
            .map(|(k, z)| if k % 2 == 0 { z.norm_sqr() } else { -z.norm_sqr() })
            .sum();
        Ok(FRAC_1_PI * parity)
    }
}

/// Single-point Wigner value.
pub fn wigner_point(state: &StateVector, x: f64, y: f64) -> Result<f64> {
    let alpha = (0.5 * (x * x + y * y)).sqrt();
    WignerEvaluator::new(state.dim(), alpha)?.point(state, x, y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Points per axis, endpoints included.
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_range: (-5.0, 5.0), y_range: (-5.0, 5.0), resolution: 201 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if self.resolution < 2 || !ok(self.x_range) || !ok(self.y_range) {
            return Err(Error::BadGrid);
        }
        Ok(())
    }

    /// Same grid translated by `(dx, dy)`.
    pub fn shifted(&self, dx: f64, dy: f64) -> Self {
        Self {
            x_range: (self.x_range.0 + dx, self.x_range.1 + dx),
            y_range: (self.y_range.0 + dy, self.y_range.1 + dy),
            resolution: self.resolution,
        }
    }

    fn axis((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
        let step = (hi - lo) / (n - 1) as f64;
        (0..n).map(|k| if k + 1 == n { hi } else { lo + step * k as f64 }).collect()
    }

    pub fn x_axis(&self) -> Vec<f64> {
        Self::axis(self.x_range, self.resolution)
    }

    pub fn y_axis(&self) -> Vec<f64> {
        Self::axis(self.y_range, self.resolution)
    }

    fn max_alpha(&self) -> f64 {
        let x = self.x_range.0.abs().max(self.x_range.1.abs());
        let y = self.y_range.0.abs().max(self.y_range.1.abs());
        (0.5 * (x * x + y * y)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Wigner values on a rectangular grid, stored row-major with `X` as the
/// outer index: `values[ix * ny + iy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
    /// `|Σ W ΔX ΔY − 1|`.
    pub normalization_residual: f64,
}

impl WignerGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.ys.len() + iy]
    }

    fn dx(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    fn dy(&self) -> f64 {
        self.ys[1] - self.ys[0]
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Integrates out the other axis.
    pub fn marginal(&self, axis: Axis) -> Vec<f64> {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        match axis {
            Axis::X => (0..nx).map(|ix| (0..ny).map(|iy| self.value(ix, iy)).sum::<f64>() * self.dy()).collect(),
            Axis::Y => (0..ny).map(|iy| (0..nx).map(|ix| self.value(ix, iy)).sum::<f64>() * self.dx()).collect(),
        }
    }

    /// Mean of the marginal along `axis`.
    pub fn marginal_mean(&self, axis: Axis) -> f64 {
        let (coords, step) = match axis {
            Axis::X => (&self.xs, self.dx()),
            Axis::Y => (&self.ys, self.dy()),
        };
        self.marginal(axis).iter().zip(coords).map(|(m, x)| m * x).sum::<f64>() * step
    }

    /// Purity `Tr ρ² = 2π ∬ W² dX dY` under the `1/π`-peak convention.
    pub fn purity(&self) -> f64 {
        2.0 * PI * self.values.iter().map(|w| w * w).sum::<f64>() * self.cell_area()
    }
}

/// `(⟨X⟩, ⟨Y⟩)` with `X = (c + c†)/√2`, `Y = i(c† − c)/√2`.
pub fn quadrature_means(state: &StateVector) -> Result<(f64, f64)> {
    let n_max = state.space().factor_dim(MECH).ok_or_else(|| Error::UnknownFactor(MECH.into()))? - 1;
    let mech = MechMode::new(n_max)?;
    Ok((
        expectation(&mech.quadrature_x(), state)?.re,
        expectation(&mech.quadrature_y(), state)?.re,
    ))
}

fn support_guard(state: &StateVector, spec: &GridSpec) -> Result<()> {
    let (mx, my) = quadrature_means(state)?;
    let covers = |(lo, hi): (f64, f64), m: f64| lo <= m - SUPPORT_HALF_WIDTH && hi >= m + SUPPORT_HALF_WIDTH;
    if !covers(spec.x_range, mx) || !covers(spec.y_range, my) {
        return Err(Error::GridGuard(format!(
            "grid {:?} x {:?} does not cover ±{SUPPORT_HALF_WIDTH} around (<X>, <Y>) = ({mx:.3}, {my:.3})",
            spec.x_range, spec.y_range
        )));
    }
    Ok(())
}

/// Dense evaluation of [`wigner_point`] on `spec`, parallel over grid rows.
pub fn wigner_grid(state: &StateVector, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    let evaluator = WignerEvaluator::new(state.dim(), spec.max_alpha())?;
    log::debug!(
        "wigner grid {0}x{0}, state dim {1}, work dim {2}",
        spec.resolution,
        state.dim(),
        evaluator.work_dim()
    );
    evaluator.check(state)?;
    support_guard(state, spec)?;
    let (xs, ys) = (spec.x_axis(), spec.y_axis());
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ys.iter().map(|&y| evaluator.point_unchecked(state, x, y)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let mut grid = WignerGrid { xs, ys, values, normalization_residual: 0.0 };
    grid.normalization_residual = (grid.integral() - 1.0).abs();
    Ok(grid)
}
