//! Dense linear algebra over labeled composite Hilbert spaces.
//!
//! A [`CompositeSpace`] is an ordered tensor product of named factors. The flat
//! index of a product basis state is row-major in factor order, so for
//! `photon(6) ⊗ mech(17)` the state `|p⟩|n⟩` sits at `17 p + n`.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Entrywise tolerance for the Hermitian hint.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Norm tolerance for freshly constructed states.
pub const NORM_TOL_CONSTRUCTION: f64 = 1e-12;
/// Norm tolerance after propagation (accumulated eigen-solver error).
pub const NORM_TOL_PROPAGATED: f64 = 1e-10;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompositeSpace {
    factors: Vec<Factor>,
    total_dim: usize,
}

impl CompositeSpace {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Factor> = Vec::new();
        for (label, dim) in factors {
            let label = label.into();
            if dim == 0 {
                return Err(Error::EmptyFactor(label));
            }
            if out.iter().any(|f| f.label == label) {
                return Err(Error::DuplicateFactor(label));
            }
            out.push(Factor { label, dim });
        }
        if out.is_empty() {
            return Err(Error::EmptyFactor(String::new()));
        }
        let total_dim = out.iter().map(|f| f.dim).product();
        Ok(Self { factors: out, total_dim })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn factor_index(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn factor_dim(&self, label: &str) -> Option<usize> {
        self.factor_index(label).map(|k| self.factors[k].dim)
    }

    /// Tensor product `self ⊗ other`; labels must stay unique.
    pub fn product(&self, other: &CompositeSpace) -> Result<Self> {
        Self::new(
            self.factors
                .iter()
                .chain(other.factors.iter())
                .map(|f| (f.label.clone(), f.dim)),
        )
    }

    /// Space left after removing one factor. `None` when it is the only one.
    pub fn without(&self, label: &str) -> Result<Option<Self>> {
        let k = self
            .factor_index(label)
            .ok_or_else(|| Error::UnknownFactor(label.to_string()))?;
        if self.factors.len() == 1 {
            return Ok(None);
        }
        let rest = self
            .factors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, f)| (f.label.clone(), f.dim));
        Self::new(rest).map(Some)
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.factors.len());
        multi
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&i, f)| acc * f.dim + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = flat % f.dim;
            flat /= f.dim;
        }
        out
    }

    fn ensure_same(&self, other: &CompositeSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { left: self.to_string(), right: other.to_string() })
        }
    }
}

impl fmt::Display for CompositeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, factor) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{}({})", factor.label, factor.dim)?;
        }
        Ok(())
    }
}

/// Complex amplitude vector over a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: CompositeSpace,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(space: CompositeSpace, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn from_slice(space: CompositeSpace, amplitudes: &[C64]) -> Result<Self> {
        Self::new(space, DVector::from_column_slice(amplitudes))
    }

    pub fn zeros(space: CompositeSpace) -> Self {
        let n = space.total_dim();
        Self { space, amplitudes: DVector::zeros(n) }
    }

    /// Unit vector `e_index`.
    pub fn basis(space: CompositeSpace, index: usize) -> Result<Self> {
        let n = space.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, found: index + 1 });
        }
        let mut amplitudes = DVector::zeros(n);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { space: self.space.clone(), amplitudes: &self.amplitudes * c }
    }

    /// `self + c · other`.
    pub fn plus(&self, c: C64, other: &StateVector) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        Ok(Self {
            space: self.space.clone(),
            amplitudes: &self.amplitudes + &other.amplitudes * c,
        })
    }

    /// Linear combination `Σ cₖ ψₖ` over a common space.
    pub fn combine(terms: &[(C64, &StateVector)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
        let mut acc = StateVector::zeros(first.space.clone());
        for &(c, psi) in terms {
            acc = acc.plus(c, psi)?;
        }
        Ok(acc)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let space = self.space.product(&other.space)?;
        let m = other.dim();
        let amplitudes =
            DVector::from_fn(space.total_dim(), |k, _| self.amplitudes[k / m] * other.amplitudes[k % m]);
        Ok(Self { space, amplitudes })
    }

    /// Copy into the same single-factor space with a different dimension,
    /// zero-padding or truncating the tail.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        if self.space.factors().len() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.space.factors().len() });
        }
        let space = CompositeSpace::single(self.space.factors()[0].label.clone(), dim)?;
        let amplitudes = DVector::from_fn(dim, |k, _| {
            self.amplitudes.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
        });
        Ok(Self { space, amplitudes })
    }

    /// Contract the factor `label` against `bra` (an un-conjugated ket on that
    /// factor), i.e. return `(⟨bra| ⊗ I)|self⟩` on the remaining factors.
    pub fn contract_factor(&self, label: &str, bra: &StateVector) -> Result<StateVector> {
        let k = self
            .space
            .factor_index(label)
            .ok_or_else(|| Error::UnknownFactor(label.to_string()))?;
        let dim = self.space.factors()[k].dim;
        if bra.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: bra.dim() });
        }
        let rest = self
            .space
            .without(label)?
            .ok_or(Error::DimensionMismatch { expected: 2, found: 1 })?;
        let mut out = DVector::zeros(rest.total_dim());
        for flat in 0..self.dim() {
            let mut multi = self.space.multi_index(flat);
            let i = multi.remove(k);
            out[rest.flat_index(&multi)] += bra.amplitudes[i].conj() * self.amplitudes[flat];
        }
        Ok(StateVector { space: rest, amplitudes: out })
    }

    /// Populations of each basis level of one factor, traced over the rest.
    pub fn factor_populations(&self, label: &str) -> Result<Vec<f64>> {
        let k = self
            .space
            .factor_index(label)
            .ok_or_else(|| Error::UnknownFactor(label.to_string()))?;
        let mut pops = vec![0.0; self.space.factors()[k].dim];
        for (flat, a) in self.amplitudes.iter().enumerate() {
            pops[self.space.multi_index(flat)[k]] += a.norm_sqr();
        }
        Ok(pops)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.space.ensure_same(&b.space)?;
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// Pure-state fidelity `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr())
}

/// Bures-style distance `√(1 − |⟨a|b⟩|²)` for normalized inputs.
///
/// Evaluated as `‖b − ⟨a|b⟩ a‖`, which stays accurate when the states are
/// nearly identical and the difference `1 − |⟨a|b⟩|²` would round to zero.
pub fn bures_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = inner(a, b)?;
    Ok((&b.amplitudes - &a.amplitudes * overlap).norm())
}

/// Dense complex square matrix tagged with its space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOp {
    space: CompositeSpace,
    matrix: DMatrix<C64>,
    hermitian: bool,
}

impl LinearOp {
    /// Wrap a matrix. When `hermitian_hint` is set the matrix is checked.
    pub fn new(space: CompositeSpace, matrix: DMatrix<C64>, hermitian_hint: bool) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        let op = Self { space, matrix, hermitian: hermitian_hint };
        if hermitian_hint {
            let residual = op.hermitian_residual();
            if residual > HERMITIAN_TOL {
                return Err(Error::NotHermitian { residual });
            }
        }
        Ok(op)
    }

    pub fn from_fn(
        space: CompositeSpace,
        hermitian_hint: bool,
        f: impl FnMut(usize, usize) -> C64,
    ) -> Result<Self> {
        let n = space.total_dim();
        Self::new(space, DMatrix::from_fn(n, n, f), hermitian_hint)
    }

    pub fn identity(space: CompositeSpace) -> Self {
        let n = space.total_dim();
        Self { space, matrix: DMatrix::identity(n, n), hermitian: true }
    }

    pub fn zeros(space: CompositeSpace) -> Self {
        let n = space.total_dim();
        Self { space, matrix: DMatrix::zeros(n, n), hermitian: true }
    }

    /// Real diagonal operator.
    pub fn diagonal(space: CompositeSpace, diag: impl Fn(usize) -> f64) -> Self {
        let n = space.total_dim();
        let matrix = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag(i), 0.0) } else { C64::new(0.0, 0.0) });
        Self { space, matrix, hermitian: true }
    }

    /// `|ket⟩⟨bra|` on a shared space.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        ket.space.ensure_same(&bra.space)?;
        let matrix = &ket.amplitudes * bra.amplitudes.adjoint();
        Ok(Self { space: ket.space.clone(), matrix, hermitian: false })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Re-check hermiticity and set the hint.
    pub fn into_hermitian(self) -> Result<Self> {
        Self::new(self.space, self.matrix, true)
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint(), hermitian: self.hermitian }
    }

    pub fn scaled(&self, c: C64) -> Self {
        let hermitian = self.hermitian && c.im == 0.0;
        Self { space: self.space.clone(), matrix: &self.matrix * c, hermitian }
    }

    pub fn scaled_real(&self, c: f64) -> Self {
        self.scaled(C64::new(c, 0.0))
    }

    pub fn plus(&self, other: &LinearOp) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn minus(&self, other: &LinearOp) -> Result<Self> {
        self.plus(&other.scaled_real(-1.0))
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &LinearOp) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix, hermitian: false })
    }

    /// Kronecker product `self ⊗ other` on the product space.
    pub fn kron(&self, other: &LinearOp) -> Result<Self> {
        let space = self.space.product(&other.space)?;
        Ok(Self {
            space,
            matrix: self.matrix.kronecker(&other.matrix),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.space.ensure_same(&psi.space)?;
        Ok(StateVector { space: self.space.clone(), amplitudes: &self.matrix * &psi.amplitudes })
    }

    /// `⟨a|self|b⟩`.
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> Result<C64> {
        inner(a, &self.apply(b)?)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn max_abs_diff(&self, other: &LinearOp) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    /// Max entrywise distance from the identity.
    pub fn identity_residual(&self) -> f64 {
        let n = self.dim();
        max_abs(&(&self.matrix - DMatrix::<C64>::identity(n, n)))
    }

    /// Max entrywise deviation of `U†U` from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(n, n)))
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<f64> {
        let gram = self.matrix.adjoint() * &self.matrix;
        let eig = hermitian_eigen(gram)?;
        Ok(eig.eigenvalues.iter().copied().fold(0.0, f64::max).max(0.0).sqrt())
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `[a, b] = ab − ba`.
pub fn commutator(a: &LinearOp, b: &LinearOp) -> Result<LinearOp> {
    a.compose(b)?.minus(&b.compose(a)?)
}

/// Embed a single-factor operator as `op ⊗ I` acting on `factor_label`.
pub fn tensor_embed(op: &LinearOp, target: &CompositeSpace, factor_label: &str) -> Result<LinearOp> {
    let k = target
        .factor_index(factor_label)
        .ok_or_else(|| Error::UnknownFactor(factor_label.to_string()))?;
    let dim = target.factors()[k].dim;
    if op.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
    }
    let inner_dim: usize = target.factors()[k + 1..].iter().map(|f| f.dim).product();
    let outer_dim: usize = target.factors()[..k].iter().map(|f| f.dim).product();
    let left = DMatrix::<C64>::identity(outer_dim, outer_dim);
    let right = DMatrix::<C64>::identity(inner_dim, inner_dim);
    let matrix = left.kronecker(&op.matrix).kronecker(&right);
    Ok(LinearOp { space: target.clone(), matrix, hermitian: op.hermitian })
}

/// `⟨ψ|op|ψ⟩` for a normalized state.
pub fn expectation(op: &LinearOp, psi: &StateVector) -> Result<C64> {
    if !psi.is_normalized(NORM_TOL_PROPAGATED) {
        return Err(Error::NotNormalized { norm: psi.norm() });
    }
    let value = op.matrix_element(psi, psi)?;
    if op.hermitian {
        Ok(C64::new(value.re, 0.0))
    } else {
        Ok(value)
    }
}

fn hermitian_eigen(matrix: DMatrix<C64>) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(matrix, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Eigen("Hermitian eigen-solver did not converge".into()))
}

/// Spectral decomposition `H = V diag(λ) V†` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectral {
    space: CompositeSpace,
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl Spectral {
    pub fn new(h: &LinearOp) -> Result<Self> {
        if !h.hermitian {
            return Err(Error::NotHermitian { residual: h.hermitian_residual() });
        }
        let residual = h.hermitian_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let eig = hermitian_eigen(h.matrix.clone())?;
        Ok(Self { space: h.space.clone(), values: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    /// Eigenvalues in ascending order.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `V g(λ) V†` for a complex spectral function `g`.
    pub fn map(&self, g: impl Fn(f64) -> C64) -> LinearOp {
        let mut scaled = self.vectors.clone();
        for (mut col, &lambda) in scaled.column_iter_mut().zip(self.values.iter()) {
            col *= g(lambda);
        }
        LinearOp { space: self.space.clone(), matrix: scaled * self.vectors.adjoint(), hermitian: false }
    }

    pub fn reconstruct(&self) -> LinearOp {
        let mut op = self.map(|l| C64::new(l, 0.0));
        op.hermitian = false;
        op
    }

    /// `exp(−i H t)`.
    pub fn propagator(&self, t: f64) -> LinearOp {
        self.map(|l| C64::new(0.0, -l * t).exp())
    }

    /// `exp(−i H t)|ψ⟩` without forming the full propagator.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        self.space.ensure_same(&psi.space)?;
        let mut coeffs = self.vectors.adjoint() * &psi.amplitudes;
        for (c, &lambda) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= C64::new(0.0, -lambda * t).exp();
        }
        Ok(StateVector { space: self.space.clone(), amplitudes: &self.vectors * coeffs })
    }
}

/// `exp(−i h t)` by spectral decomposition of a Hermitian `h`.
pub fn expm_hermitian(h: &LinearOp, t: f64) -> Result<LinearOp> {
    Ok(Spectral::new(h)?.propagator(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn space(dims: &[(&str, usize)]) -> CompositeSpace {
        CompositeSpace::new(dims.iter().map(|&(l, d)| (l, d))).unwrap()
    }

    /// Deterministic pseudo-random Hermitian matrix (LCG, test-only).
    fn pseudo_hermitian(n: usize, seed: u64) -> LinearOp {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(next(), 0.0);
            for j in i + 1..n {
                let z = c(next(), next());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        LinearOp::new(CompositeSpace::single("x", n).unwrap(), m, true).unwrap()
    }

    #[test]
    fn space_rejects_duplicates_and_zero_dims() {
        assert!(matches!(
            CompositeSpace::new([("a", 2), ("a", 3)]),
            Err(Error::DuplicateFactor(_))
        ));
        assert!(matches!(CompositeSpace::new([("a", 0)]), Err(Error::EmptyFactor(_))));
        let s = space(&[("a", 2), ("b", 3), ("c", 4)]);
        assert_eq!(s.total_dim(), 24);
        for flat in 0..24 {
            assert_eq!(s.flat_index(&s.multi_index(flat)), flat);
        }
    }

    #[test]
    fn embed_identity_gives_identity() {
        let target = space(&[("a", 2), ("b", 3)]);
        let id2 = LinearOp::identity(CompositeSpace::single("q", 2).unwrap());
        let e = tensor_embed(&id2, &target, "a").unwrap();
        assert_eq!(e.identity_residual(), 0.0);
    }

    #[test]
    fn embed_errors() {
        let target = space(&[("a", 2), ("b", 3)]);
        let id2 = LinearOp::identity(CompositeSpace::single("q", 2).unwrap());
        assert!(matches!(tensor_embed(&id2, &target, "z"), Err(Error::UnknownFactor(_))));
        assert!(matches!(
            tensor_embed(&id2, &target, "b"),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn embed_acts_on_targeted_factor_only() {
        let target = space(&[("a", 2), ("b", 3), ("c", 2)]);
        // cyclic shift on b
        let shift = LinearOp::from_fn(CompositeSpace::single("b", 3).unwrap(), false, |i, j| {
            if i == (j + 1) % 3 { c(1.0, 0.0) } else { c(0.0, 0.0) }
        })
        .unwrap();
        let e = tensor_embed(&shift, &target, "b").unwrap();
        for flat in 0..target.total_dim() {
            let psi = StateVector::basis(target.clone(), flat).unwrap();
            let out = e.apply(&psi).unwrap();
            let mut m = target.multi_index(flat);
            m[1] = (m[1] + 1) % 3;
            let expect = StateVector::basis(target.clone(), target.flat_index(&m)).unwrap();
            assert_eq!(out, expect);
        }
    }

    #[test]
    fn embed_commuting_factors_commute() {
        let target = space(&[("a", 3), ("b", 4)]);
        let a = pseudo_hermitian(3, 1);
        let b = pseudo_hermitian(4, 2);
        let ea = tensor_embed(&a, &target, "a").unwrap();
        let eb = tensor_embed(&b, &target, "b").unwrap();
        let comm = commutator(&ea, &eb).unwrap();
        assert!(max_abs(comm.matrix()) <= 1e-12);
    }

    #[test]
    fn inner_basics() {
        let s = CompositeSpace::single("x", 3).unwrap();
        let e0 = StateVector::basis(s.clone(), 0).unwrap();
        let e1 = StateVector::basis(s.clone(), 1).unwrap();
        assert_eq!(inner(&e0, &e0).unwrap(), c(1.0, 0.0));
        assert_eq!(inner(&e0, &e1).unwrap(), c(0.0, 0.0));
        // conjugate-linear in the first slot
        let a = e0.scaled(c(0.0, 2.0));
        assert_eq!(inner(&a, &e0).unwrap(), c(0.0, -2.0));
        assert_eq!(inner(&e0, &a).unwrap(), c(0.0, 2.0));
        let other = StateVector::basis(CompositeSpace::single("y", 3).unwrap(), 0).unwrap();
        assert!(matches!(inner(&e0, &other), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn expm_zero_is_identity() {
        let h = pseudo_hermitian(5, 9);
        let u = expm_hermitian(&h, 0.0).unwrap();
        assert!(u.identity_residual() < 1e-13);
    }

    #[test]
    fn expm_pauli_x() {
        let s = CompositeSpace::single("q", 2).unwrap();
        let x = LinearOp::from_fn(s, true, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let u = expm_hermitian(&x, std::f64::consts::FRAC_PI_2).unwrap();
        let expect = x.scaled(c(0.0, -1.0));
        assert!(u.max_abs_diff(&expect).unwrap() <= 1e-12);
    }

    #[test]
    fn expm_group_property() {
        let h = pseudo_hermitian(8, 42);
        let sp = Spectral::new(&h).unwrap();
        let (t1, t2) = (0.37, 1.91);
        let lhs = sp.propagator(t1).compose(&sp.propagator(t2)).unwrap();
        let rhs = sp.propagator(t1 + t2);
        assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10);
        assert!(rhs.unitarity_residual() <= 1e-10);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let s = CompositeSpace::single("q", 2).unwrap();
        let m = LinearOp::from_fn(s, false, |i, j| if i < j { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
        assert!(matches!(expm_hermitian(&m, 1.0), Err(Error::NotHermitian { .. })));
        let s = CompositeSpace::single("q", 2).unwrap();
        assert!(matches!(
            LinearOp::from_fn(s, true, |i, j| if i < j { c(1.0, 0.0) } else { c(0.0, 0.0) }),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigen_reconstruction_up_to_256() {
        for (n, seed) in [(16, 3), (64, 4), (198, 5), (256, 6)] {
            let h = pseudo_hermitian(n, seed);
            let sp = Spectral::new(&h).unwrap();
            let err = sp.reconstruct().max_abs_diff(&h).unwrap();
            assert!(err <= 1e-10, "n = {n}: reconstruction error {err:e}");
            let u = sp.propagator(2.3);
            assert!(u.unitarity_residual() <= 1e-10);
        }
    }

    #[test]
    fn evolve_matches_propagator() {
        let h = pseudo_hermitian(10, 77);
        let sp = Spectral::new(&h).unwrap();
        let psi = StateVector::basis(h.space().clone(), 3).unwrap();
        let a = sp.evolve(&psi, 1.3).unwrap();
        let b = sp.propagator(1.3).apply(&psi).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        assert!((a.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expectation_requires_normalized_state() {
        let s = CompositeSpace::single("x", 2).unwrap();
        let psi = StateVector::basis(s.clone(), 0).unwrap().scaled(c(2.0, 0.0));
        let id = LinearOp::identity(s);
        assert!(matches!(expectation(&id, &psi), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn contraction_and_populations() {
        let s = space(&[("p", 2), ("m", 3)]);
        let p = StateVector::from_slice(
            CompositeSpace::single("p", 2).unwrap(),
            &[c(0.6, 0.0), c(0.0, 0.8)],
        )
        .unwrap();
        let m = StateVector::basis(CompositeSpace::single("m", 3).unwrap(), 2).unwrap();
        let joint = p.tensor(&m).unwrap();
        assert_eq!(joint.space(), &s);
        let pops = joint.factor_populations("p").unwrap();
        assert!((pops[0] - 0.36).abs() < 1e-15 && (pops[1] - 0.64).abs() < 1e-15);
        let bra = StateVector::basis(CompositeSpace::single("p", 2).unwrap(), 1).unwrap();
        let meter = joint.contract_factor("p", &bra).unwrap();
        assert_eq!(meter.amplitude(2), c(0.0, 0.8));
    }

    #[test]
    fn bures_of_identical_states_is_zero() {
        let h = pseudo_hermitian(6, 8);
        let psi = Spectral::new(&h)
            .unwrap()
            .evolve(&StateVector::basis(h.space().clone(), 0).unwrap(), 0.7)
            .unwrap();
        assert!(bures_distance(&psi, &psi).unwrap() < 1e-14);
        let e1 = StateVector::basis(h.space().clone(), 1).unwrap();
        let e0 = StateVector::basis(h.space().clone(), 0).unwrap();
        assert!((bures_distance(&e0, &e1).unwrap() - 1.0).abs() < 1e-15);
    }
}
