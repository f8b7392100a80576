//! Dense complex linear algebra: operators, states, tensor products, the
//! Hermitian matrix exponential, partial traces and operator norms.
//!
//! Tensor-product convention: the first factor is the most significant index,
//! so `kron(a, b)[(i*db + k, j*db + l)] = a[(i, j)] * b[(k, l)]`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Entrywise tolerance for Hermiticity checks, scaled by `max(1, max|a_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for unitarity and trace checks.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on the Euclidean norm of a state vector.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    /// Panics if `m` is not square.
    pub fn from_matrix(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator matrix must be square");
        Operator(m)
    }

    /// Builds a `dim x dim` operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Operator(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Self {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn zeros(dim: usize) -> Self {
        Operator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Operator(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let c: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&c)
    }

    /// `|a><b|`
    pub fn outer(a: &StateVector, b: &StateVector) -> Self {
        Operator(a.as_vector() * b.as_vector().adjoint())
    }

    /// `|k><l|` in dimension `dim`.
    pub fn unit(dim: usize, k: usize, l: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, l)] = ONE;
        Operator(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }

    /// `Tr(A^dagger B)`
    pub fn inner(&self, other: &Operator) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |A - A^dagger|` entrywise.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL * self.max_abs().max(1.0)
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                deviation: self.hermitian_deviation(),
            })
        }
    }

    /// `||U^dagger U - I||_F`
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        (self.0.adjoint() * &self.0 - DMatrix::<C64>::identity(n, n)).norm()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() <= UNITARY_TOL
    }

    pub fn apply(&self, v: &StateVector) -> DVector<C64> {
        &self.0 * v.as_vector()
    }

    /// Places `self` on factor `index` of a product space with the given
    /// factor dimensions, identity elsewhere.
    pub fn embed(&self, index: usize, dims: &[usize]) -> Result<Operator> {
        if index >= dims.len() {
            return Err(Error::IndexOutOfRange {
                index,
                dim: dims.len(),
            });
        }
        if dims[index] != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: dims[index],
                found: self.dim(),
            });
        }
        let left: usize = dims[..index].iter().product();
        let right: usize = dims[index + 1..].iter().product();
        Ok(kron(
            &kron(&Operator::identity(left), self),
            &Operator::identity(right),
        ))
    }

    /// `self ⊗ I_extra`
    pub fn extend(&self, extra: usize) -> Operator {
        kron(self, &Operator::identity(extra))
    }

    pub fn eigh(&self) -> Result<HermitianEigen> {
        self.ensure_hermitian()?;
        Ok(HermitianEigen::of_unchecked(self))
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(other.0.iter())
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator(self.0 + rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator(self.0 - rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale_real(rhs)
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale_real(rhs)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-self.0)
    }
}

/// Spectral decomposition `A = V diag(values) V^dagger` of a Hermitian
/// operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    fn of_unchecked(a: &Operator) -> Self {
        // symmetric_eigen reads the lower triangle; symmetrize first so both
        // halves contribute equally.
        let sym = (&a.0 + a.0.adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let n = order.len();
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(lambda)) V^dagger`
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Operator {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (c, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        Operator(scaled * self.vectors.adjoint())
    }

    /// `exp(-i A t)`
    pub fn evolution(&self, t: f64) -> Operator {
        self.map(|lambda| C64::from_polar(1.0, -lambda * t))
    }
}

/// Tensor product with the first factor most significant.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator(a.0.kronecker(&b.0))
}

/// Tensor product of a list of operators, left to right.
pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a Operator>) -> Operator {
    ops.into_iter()
        .fold(Operator::identity(1), |acc, op| kron(&acc, op))
}

/// `exp(-i h t)` via Hermitian eigendecomposition.
pub fn expm_unitary(h: &Operator, t: f64) -> Result<Operator> {
    Ok(h.eigh()?.evolution(t))
}

/// `ab - ba`, or `ab + ba` when `anti` is set.
pub fn bracket(a: &Operator, b: &Operator, anti: bool) -> Result<Operator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ab = &a.0 * &b.0;
    let ba = &b.0 * &a.0;
    Ok(Operator(if anti { ab + ba } else { ab - ba }))
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    bracket(a, b, false)
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    bracket(a, b, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Frobenius,
    Trace,
    Spectral,
}

/// Singular values, descending.
///
/// Hermitian inputs use `|eigenvalues|`; general inputs use the eigenvalues of
/// the Hermitian dilation `[[0, A], [A^dagger, 0]]`, which are `±sigma_i`.
pub fn singular_values(a: &Operator) -> Vec<f64> {
    let n = a.dim();
    let mut sv: Vec<f64> = if a.is_hermitian() {
        HermitianEigen::of_unchecked(a)
            .values
            .iter()
            .map(|v| v.abs())
            .collect()
    } else {
        let mut dil = DMatrix::<C64>::zeros(2 * n, 2 * n);
        dil.view_mut((0, n), (n, n)).copy_from(&a.0);
        dil.view_mut((n, 0), (n, n)).copy_from(&a.0.adjoint());
        let eig = HermitianEigen::of_unchecked(&Operator(dil));
        // Largest n of the 2n eigenvalues are the singular values.
        eig.values[n..].iter().map(|v| v.max(0.0)).collect()
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn norm(a: &Operator, kind: NormKind) -> f64 {
    match kind {
        NormKind::Frobenius => a.0.norm(),
        NormKind::Trace => singular_values(a).iter().sum(),
        NormKind::Spectral => singular_values(a).first().copied().unwrap_or(0.0),
    }
}

/// Normalized complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector(v))
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector(v.unscale(norm)))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(StateVector(v))
    }

    pub fn product(factors: &[StateVector]) -> StateVector {
        let v = factors
            .iter()
            .fold(DVector::from_element(1, ONE), |acc, f| acc.kronecker(&f.0));
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    pub fn new(op: Operator) -> Result<Self> {
        op.ensure_hermitian()?;
        let tr = op.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace = {tr}")));
        }
        let min_eig = HermitianEigen::of_unchecked(&op).values[0];
        if min_eig < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "minimum eigenvalue {min_eig:e}"
            )));
        }
        Ok(DensityMatrix(op))
    }

    pub fn pure(psi: &StateVector) -> Self {
        DensityMatrix(Operator::outer(psi, psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(Operator::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn product(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(kron(&self.0, &other.0))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    /// `Re Tr(rho A)`
    pub fn expectation(&self, a: &Operator) -> Result<f64> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.dim(),
            });
        }
        // Tr(rho A) = sum_ij rho_ij A_ji = Tr(rho^dagger A) for Hermitian rho.
        Ok(self.0.inner(a).re)
    }

    /// Decomposition into weighted orthonormal pure states, dropping weights
    /// at or below `1e-14`.
    pub fn ensemble(&self) -> Vec<(f64, DVector<C64>)> {
        let eig = HermitianEigen::of_unchecked(&self.0);
        eig.values
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 1e-14)
            .map(|(k, &w)| (w, eig.vectors.column(k).into_owned()))
            .collect()
    }
}

/// Reduced density matrix over the factors listed in `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidFactors(format!(
            "bad factor dimensions {dims:?}"
        )));
    }
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: rho.dim(),
        });
    }
    if keep.is_empty() {
        return Err(Error::InvalidFactors("keep set is empty".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            dim: dims.len(),
        });
    }

    let keep_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let trace_dim = total / keep_dim;

    // groups[t][k] = full index whose traced sub-index is t and kept sub-index k.
    let mut groups = vec![vec![0usize; keep_dim]; trace_dim];
    let mut digits = vec![0usize; dims.len()];
    for full in 0..total {
        let mut rem = full;
        for f in (0..dims.len()).rev() {
            digits[f] = rem % dims[f];
            rem /= dims[f];
        }
        let (mut k_idx, mut t_idx) = (0usize, 0usize);
        for (f, &d) in digits.iter().enumerate() {
            if kept.binary_search(&f).is_ok() {
                k_idx = k_idx * dims[f] + d;
            } else {
                t_idx = t_idx * dims[f] + d;
            }
        }
        groups[t_idx][k_idx] = full;
    }

    let m = rho.operator().matrix();
    let mut out = DMatrix::<C64>::zeros(keep_dim, keep_dim);
    for group in &groups {
        for (a, &ra) in group.iter().enumerate() {
            for (b, &rb) in group.iter().enumerate() {
                out[(a, b)] += m[(ra, rb)];
            }
        }
    }
    Ok(DensityMatrix(Operator(out)))
}

/// Reduced state on the leading `sys_dim` block for a weighted ensemble of
/// pure states on `sys_dim * bath_dim`: `sum_k w_k M_k M_k^dagger` with
/// `M_k` the `sys_dim x bath_dim` reshaping of state `k`.
pub(crate) fn reduce_pure_ensemble(
    columns: &DMatrix<C64>,
    weights: &[f64],
    sys_dim: usize,
    bath_dim: usize,
) -> DensityMatrix {
    let mut out = DMatrix::<C64>::zeros(sys_dim, sys_dim);
    for (k, &w) in weights.iter().enumerate() {
        let col = columns.column(k);
        // Row-major reshape: psi[(s * bath_dim) + b] = M[s, b].
        let m = DMatrix::from_fn(sys_dim, bath_dim, |s, b| col[s * bath_dim + b]);
        out += (&m * m.adjoint()) * C64::new(w, 0.0);
    }
    DensityMatrix(Operator(out))
}

/// Pauli matrices and spin-1 angular momentum matrices.
pub mod spin {
    use super::*;

    pub fn id2() -> Operator {
        Operator::identity(2)
    }

    pub fn sigma_x() -> Operator {
        Operator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn sigma_y() -> Operator {
        Operator::from_rows(2, &[ZERO, -I, I, ZERO])
    }

    pub fn sigma_z() -> Operator {
        Operator::from_real_diagonal(&[1.0, -1.0])
    }

    /// `[I, sigma_x, sigma_y, sigma_z]`
    pub fn paulis() -> [Operator; 4] {
        [id2(), sigma_x(), sigma_y(), sigma_z()]
    }

    /// Spin-1 `[j_x, j_y, j_z]` in the `j_z` eigenbasis ordered `m = 1, 0, -1`.
    pub fn spin1() -> [Operator; 3] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let jx = Operator::from_real_rows(3, &[0.0, r, 0.0, r, 0.0, r, 0.0, r, 0.0]);
        let mi = C64::new(0.0, -r);
        let pi = C64::new(0.0, r);
        let jy = Operator::from_rows(3, &[ZERO, mi, ZERO, pi, ZERO, mi, ZERO, pi, ZERO]);
        let jz = Operator::from_real_diagonal(&[1.0, 0.0, -1.0]);
        [jx, jy, jz]
    }
}

#[cfg(test)]
mod tests {
    use super::spin::*;
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_of_sigma_z_and_identity() {
        let k = kron(&sigma_z(), &id2());
        assert!(k.approx_eq(&Operator::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]), 0.0));
        assert!(kron(&id2(), &id2()).approx_eq(&Operator::identity(4), 0.0));
    }

    #[test]
    fn expm_examples() {
        let u = expm_unitary(&sigma_z(), PI / 2.0).unwrap();
        assert!(u.approx_eq(
            &Operator::from_diagonal(&[c(0.0, -1.0), c(0.0, 1.0)]),
            1e-14
        ));
        let h = &sigma_x() + &sigma_z();
        assert!(expm_unitary(&h, 0.0)
            .unwrap()
            .approx_eq(&Operator::identity(2), 1e-14));
        let u = expm_unitary(&sigma_x(), PI).unwrap();
        assert!(u.approx_eq(&-Operator::identity(2), 1e-14));
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let a = Operator::unit(2, 0, 1);
        assert!(matches!(
            expm_unitary(&a, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let up = StateVector::basis(2, 0).unwrap();
        let upup = StateVector::product(&[up.clone(), up.clone()]);
        let r = partial_trace(&DensityMatrix::pure(&upup), &[2, 2], &[0]).unwrap();
        assert!(r
            .operator()
            .approx_eq(DensityMatrix::pure(&up).operator(), 1e-15));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_real(&[0.0, h, h, 0.0]).unwrap();
        let r = partial_trace(&DensityMatrix::pure(&bell), &[2, 2], &[0]).unwrap();
        assert!(r
            .operator()
            .approx_eq(&Operator::identity(2).scale_real(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            partial_trace(&rho, &[2, 3], &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            partial_trace(&rho, &[2, 2], &[]),
            Err(Error::InvalidFactors(_))
        ));
        assert!(matches!(
            partial_trace(&rho, &[2, 2], &[2]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn norm_examples() {
        assert!((norm(&sigma_z(), NormKind::Trace) - 2.0).abs() < 1e-14);
        assert!((norm(&sigma_z(), NormKind::Spectral) - 1.0).abs() < 1e-14);
        assert!((norm(&sigma_z(), NormKind::Frobenius) - 2f64.sqrt()).abs() < 1e-14);
        for kind in [NormKind::Frobenius, NormKind::Trace, NormKind::Spectral] {
            assert_eq!(norm(&Operator::zeros(3), kind), 0.0);
        }
        // Non-Hermitian: |0><1| has a single unit singular value.
        let a = Operator::unit(3, 0, 1).scale_real(2.5);
        assert!((norm(&a, NormKind::Trace) - 2.5).abs() < 1e-13);
    }

    #[test]
    fn bracket_examples() {
        let comm = bracket(&sigma_x(), &sigma_y(), false).unwrap();
        assert!(comm.approx_eq(&sigma_z().scale(c(0.0, 2.0)), 1e-15));
        let anti = bracket(&sigma_x(), &sigma_x(), true).unwrap();
        assert!(anti.approx_eq(&Operator::identity(2).scale_real(2.0), 1e-15));
        let h = &sigma_x() * 0.3 + &sigma_z() * 1.7;
        assert!(bracket(&h, &h, false)
            .unwrap()
            .approx_eq(&Operator::zeros(2), 1e-15));
        assert!(matches!(
            bracket(&sigma_x(), &Operator::identity(3), false),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn embed_places_factor() {
        let z2 = sigma_z().embed(1, &[2, 2, 2]).unwrap();
        let expected = kron_all([&id2(), &sigma_z(), &id2()]);
        assert!(z2.approx_eq(&expected, 0.0));
        assert!(sigma_z().embed(0, &[3, 2]).is_err());
    }

    #[test]
    fn state_vector_validation() {
        assert!(StateVector::from_real(&[1.0, 1.0]).is_err());
        assert!(StateVector::normalized(vec![ZERO, ZERO]).is_err());
        let s = StateVector::normalized(vec![ONE, ONE]).unwrap();
        assert!((s.as_vector().norm() - 1.0).abs() < 1e-15);
        assert!(StateVector::basis(2, 2).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Operator::identity(2)).is_err());
        assert!(DensityMatrix::new(Operator::from_real_diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(Operator::from_real_diagonal(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn spin1_commutation() {
        let [jx, jy, jz] = spin1();
        let lhs = commutator(&jx, &jy).unwrap();
        assert!(lhs.approx_eq(&jz.scale(I), 1e-15));
        let casimir = &(&(&jx * &jx) + &(&jy * &jy)) + &(&jz * &jz);
        assert!(casimir.approx_eq(&Operator::identity(3).scale_real(2.0), 1e-14));
    }
}
