//! Polarization operators, the flagged operator bases built around them, and
//! the commuting / anticommuting Hamiltonian split.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::spin::{id2, paulis, sigma_x, sigma_y, sigma_z, spin1};
use crate::linalg::{
    anticommutator, commutator, kron, norm, singular_values, NormKind, Operator, StateVector, C64,
    I, STATE_NORM_TOL,
};

/// Relative singular-value threshold for the Gram-matrix rank test.
pub const GRAM_RANK_TOL: f64 = 1e-8;
/// Tolerance on commutation / anticommutation identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// `2|psi><psi| - I`: +1 on `|psi>`, -1 on its orthogonal complement.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationOperator {
    op: Operator,
    target: StateVector,
}

impl PolarizationOperator {
    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn target(&self) -> &StateVector {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

pub fn polarization_from_state(psi: &StateVector) -> Result<PolarizationOperator> {
    let norm = psi.as_vector().norm();
    if (norm - 1.0).abs() > STATE_NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let projector = Operator::outer(psi, psi);
    let op = &projector.scale_real(2.0) - &Operator::identity(psi.dim());
    Ok(PolarizationOperator {
        op,
        target: psi.clone(),
    })
}

/// A complete set of `M^2` Hermitian operators, each flagged as commuting
/// (`true`) or anticommuting (`false`) with a reference polarization operator.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    pub names: Vec<String>,
    pub elements: Vec<Operator>,
    pub commutes: Vec<bool>,
    pub polarization: PolarizationOperator,
}

impl OperatorBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.polarization.dim()
    }

    pub fn get(&self, name: &str) -> Option<&Operator> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.elements[i])
    }

    /// `G_jk = Tr(E_j^dagger E_k)`
    pub fn gram(&self) -> DMatrix<C64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |j, k| self.elements[j].inner(&self.elements[k]))
    }

    /// Number of Gram singular values above `GRAM_RANK_TOL * sigma_max`.
    pub fn gram_rank(&self) -> usize {
        let sv = singular_values(&Operator::from_matrix(self.gram()));
        let top = sv.first().copied().unwrap_or(0.0);
        sv.iter().filter(|&&s| s > GRAM_RANK_TOL * top).count()
    }

    pub fn is_linearly_independent(&self) -> bool {
        self.gram_rank() == self.len()
    }

    pub fn is_complete(&self) -> bool {
        self.len() == self.dim() * self.dim() && self.is_linearly_independent()
    }

    /// Largest violation of the flag relations: `||[E, P]||_max` for commuting
    /// elements, `||{E, P}||_max` for anticommuting ones.
    pub fn flag_violation(&self) -> f64 {
        let p = self.polarization.op();
        self.elements
            .iter()
            .zip(&self.commutes)
            .map(|(e, &c)| {
                let r = if c {
                    commutator(e, p)
                } else {
                    anticommutator(e, p)
                };
                r.map(|r| r.max_abs()).unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }

    /// Expansion coefficients `w` with `op = sum_j w_j E_j`, from the Gram
    /// system. Complex in general; real for Hermitian `op`.
    pub fn coefficients(&self, op: &Operator) -> Result<Vec<C64>> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        let rhs = DVector::from_iterator(self.len(), self.elements.iter().map(|e| e.inner(op)));
        let w = self
            .gram()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidFactors("basis Gram matrix is singular".into()))?;
        Ok(w.iter().copied().collect())
    }

    /// `sum_j w_j E_j` over elements whose flag equals `commuting`.
    pub fn partial_sum(&self, coeffs: &[C64], commuting: bool) -> Operator {
        self.elements
            .iter()
            .zip(&self.commutes)
            .zip(coeffs)
            .filter(|((_, &c), _)| c == commuting)
            .fold(Operator::zeros(self.dim()), |acc, ((e, _), &w)| {
                &acc + &e.scale(w)
            })
    }

    /// Split by grouping expansion coefficients on their flags.
    pub fn split(&self, op: &Operator) -> Result<(Operator, Operator)> {
        let w = self.coefficients(op)?;
        Ok((self.partial_sum(&w, true), self.partial_sum(&w, false)))
    }

    /// Frobenius norm of the part of `op` lying outside the span of the
    /// elements flagged `commuting`.
    pub fn residual_outside(&self, op: &Operator, commuting: bool) -> Result<f64> {
        let w = self.coefficients(op)?;
        Ok(norm(&self.partial_sum(&w, !commuting), NormKind::Frobenius))
    }
}

/// `H = h0 + hp` with `[h0, P] = 0` and `{hp, P} = 0`.
#[derive(Clone, Debug)]
pub struct SplitHamiltonian {
    pub h0: Operator,
    pub hp: Operator,
    pub p: PolarizationOperator,
}

/// Projection split `h0 = (h + PhP)/2`, `hp = (h - PhP)/2`.
///
/// `P` may act on a leading subsystem; it is extended with an identity on the
/// remaining dimensions when `h` is larger.
pub fn split_hamiltonian(h: &Operator, p: &PolarizationOperator) -> Result<SplitHamiltonian> {
    h.ensure_hermitian()?;
    if !h.dim().is_multiple_of(p.dim()) {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: h.dim(),
        });
    }
    let full = p.op().extend(h.dim() / p.dim());
    let php = &(&full * h) * &full;
    Ok(SplitHamiltonian {
        h0: (h + &php).scale_real(0.5),
        hp: (h - &php).scale_real(0.5),
        p: p.clone(),
    })
}

fn basis_state(dim: usize, k: usize) -> StateVector {
    StateVector::basis(dim, k).expect("index within dimension")
}

fn sym_pair(dim: usize, k: usize, l: usize) -> Operator {
    &Operator::unit(dim, k, l) + &Operator::unit(dim, l, k)
}

/// `-i|k><l| + i|l><k|`
fn antisym_pair(dim: usize, k: usize, l: usize) -> Operator {
    &Operator::unit(dim, k, l).scale(-I) + &Operator::unit(dim, l, k).scale(I)
}

fn two(a: &Operator, b: &Operator) -> Operator {
    kron(a, b)
}

/// The 16 Pauli products `sigma_k ⊗ sigma_l`, `k` major over `(I, x, y, z)`.
/// `Tr(X_j X_k) = 4 delta_jk`.
pub fn two_qubit_pauli_basis() -> Vec<(String, Operator)> {
    const LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];
    let p = paulis();
    let mut out = Vec::with_capacity(16);
    for (a, pa) in p.iter().enumerate() {
        for (b, pb) in p.iter().enumerate() {
            out.push((format!("{}{}", LABELS[a], LABELS[b]), two(pa, pb)));
        }
    }
    out
}

/// `Y_1 ... Y_16` around `|0> = |↑↑>`; two-qubit basis states
/// `|0> = ↑↑, |1> = ↑↓, |2> = ↓↑, |3> = ↓↓`.
pub fn two_qubit_y_basis() -> OperatorBasis {
    let d = 4;
    let p = |k: usize| Operator::unit(d, k, k);
    let id = Operator::identity(d);
    let y1 = &p(0).scale_real(2.0) - &id;
    let y2 = &p(0) + &p(1);
    let y3 = &(&p(0) - &p(1)) + &p(2).scale_real(2.0);
    let y4 = &(&(&p(0) - &p(1)) - &p(2)) + &p(3).scale_real(3.0);
    let elements = vec![
        y1,
        y2,
        y3,
        y4,
        sym_pair(d, 1, 3),
        antisym_pair(d, 1, 3),
        sym_pair(d, 2, 3),
        antisym_pair(d, 2, 3),
        sym_pair(d, 1, 2),
        antisym_pair(d, 1, 2),
        sym_pair(d, 0, 1),
        antisym_pair(d, 0, 1),
        sym_pair(d, 0, 2),
        antisym_pair(d, 0, 2),
        sym_pair(d, 0, 3),
        antisym_pair(d, 0, 3),
    ];
    let polarization =
        polarization_from_state(&basis_state(d, 0)).expect("basis state is normalized");
    OperatorBasis {
        names: (1..=16).map(|j| format!("Y{j}")).collect(),
        commutes: (1..=16).map(|j| j <= 10).collect(),
        elements,
        polarization,
    }
}

/// `(|↑↓> + |↓↑>)/sqrt(2)`
pub fn bell_plus_state() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_real(&[0.0, h, h, 0.0]).expect("normalized")
}

/// `(|↑↓> - |↓↑>)/sqrt(2)`
pub fn singlet_state() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_real(&[0.0, h, -h, 0.0]).expect("normalized")
}

/// `Ỹ_1 ... Ỹ_16` around the Bell state `(|↑↓> + |↓↑>)/sqrt(2)`.
pub fn two_qubit_bell_basis() -> OperatorBasis {
    let [id, x, y, z] = paulis();
    let ii = two(&id, &id);
    let xx = two(&x, &x);
    let yy = two(&y, &y);
    let zz = two(&z, &z);
    let (x1, x2) = (two(&x, &id), two(&id, &x));
    let (y1, y2) = (two(&y, &id), two(&id, &y));
    let (z1, z2) = (two(&z, &id), two(&id, &z));
    let (xy, yx) = (two(&x, &y), two(&y, &x));
    let (xz, zx) = (two(&x, &z), two(&z, &x));
    let (yz, zy) = (two(&y, &z), two(&z, &y));
    let half = |o: Operator| o.scale_real(0.5);

    let elements = vec![
        half(&(&(&(-&ii) + &xx) + &yy) - &zz),
        half(&ii + &xx),
        half(&(&ii - &xx) + &yy.scale_real(2.0)),
        half(&(&(&ii - &xx) - &yy) - &zz.scale_real(3.0)),
        half(&zx - &xz),
        half(&y2 - &y1),
        half(&x2 - &x1),
        half(&yz - &zy).scale_real(-1.0),
        half(&z1 + &z2),
        half(&xy + &yx).scale_real(-1.0),
        half(&x1 + &x2),
        half(&yz + &zy).scale_real(-1.0),
        half(&xz + &zx),
        half(&y1 + &y2).scale_real(-1.0),
        half(&z1 - &z2),
        half(&xy - &yx),
    ];
    let polarization = polarization_from_state(&bell_plus_state()).expect("normalized");
    OperatorBasis {
        names: (1..=16).map(|j| format!("Yt{j}")).collect(),
        commutes: (1..=16).map(|j| j <= 10).collect(),
        elements,
        polarization,
    }
}

/// `V_1 ... V_{M^2}` around the basis state `|target>` of an `M`-level system.
///
/// Levels are relabelled so that `target` plays the role of level 0 and the
/// remaining levels keep their ascending order. Element layout:
/// `V_1 = 2P_0 - I`; `V_2 .. V_M` diagonal (`P_0 - P_1 - .. - P_{k-1} + k P_k`);
/// then, for each pair `0 < k < l` of non-target levels, the symmetric and
/// antisymmetric off-diagonal operators; finally, for each `l`, the pair
/// `|0><l| + h.c.` and `-i|0><l| + h.c.` which anticommute with `V_1`.
pub fn mlevel_v_basis(m: usize, target: usize) -> Result<OperatorBasis> {
    if m < 2 {
        return Err(Error::InvalidFactors(format!(
            "M-level basis needs M >= 2, got {m}"
        )));
    }
    if target >= m {
        return Err(Error::IndexOutOfRange {
            index: target,
            dim: m,
        });
    }
    let level: Vec<usize> = std::iter::once(target)
        .chain((0..m).filter(|&k| k != target))
        .collect();
    let p = |k: usize| Operator::unit(m, level[k], level[k]);

    let mut elements = Vec::with_capacity(m * m);
    let mut commutes = Vec::with_capacity(m * m);
    elements.push(&p(0).scale_real(2.0) - &Operator::identity(m));
    commutes.push(true);

    for k in 1..m {
        let mut v = p(0);
        for i in 1..k {
            v = &v - &p(i);
        }
        v = &v + &p(k).scale_real(k as f64);
        elements.push(v);
        commutes.push(true);
    }
    for k in 1..m {
        for l in k + 1..m {
            elements.push(sym_pair(m, level[k], level[l]));
            elements.push(antisym_pair(m, level[k], level[l]));
            commutes.extend([true, true]);
        }
    }
    for l in 1..m {
        elements.push(sym_pair(m, level[0], level[l]));
        elements.push(antisym_pair(m, level[0], level[l]));
        commutes.extend([false, false]);
    }
    let polarization = polarization_from_state(&basis_state(m, target))?;
    Ok(OperatorBasis {
        names: (1..=elements.len()).map(|j| format!("V{j}")).collect(),
        elements,
        commutes,
        polarization,
    })
}

/// Spin-1 operators and the `V_1 .. V_9` basis written in angular-momentum form.
#[derive(Clone, Debug)]
pub struct Spin1Operators {
    pub jx: Operator,
    pub jy: Operator,
    pub jz: Operator,
    pub j_plus: Operator,
    pub j_minus: Operator,
    /// `v[0]` is `V_1`.
    pub v: Vec<Operator>,
}

impl Spin1Operators {
    /// `V_2 .. V_5` commute with `V_1`, `V_6 .. V_9` anticommute.
    pub fn commutes(index: usize) -> bool {
        index < 5
    }
}

pub fn spin1_operators() -> Spin1Operators {
    let [jx, jy, jz] = spin1();
    let id = Operator::identity(3);
    let jp = &jx + &jy.scale(I);
    let jm = &jx - &jy.scale(I);
    let jz2 = &jz * &jz;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let i_r = C64::new(0.0, r);

    let v1 = &(&jz + &jz2) - &id;
    let v2 = &(&id + &jz.scale_real(0.5)) - &jz2.scale_real(0.5);
    let v3 = &(&(-&id) - &jz.scale_real(0.5)) + &jz2.scale_real(2.5);
    let v4 = (&(&jp * &jz) + &(&jz * &jm)).scale_real(-r);
    let v5 = (&(&jp * &jz) - &(&jz * &jm)).scale(i_r);
    let v6 = (&(&jz * &jp) + &(&jm * &jz)).scale_real(r);
    let v7 = (&(&jm * &jz) - &(&jz * &jp)).scale(i_r);
    let v8 = (&(&jp * &jp) + &(&jm * &jm)).scale_real(0.5);
    let v9 = (&(&jm * &jm) - &(&jp * &jp)).scale(C64::new(0.0, 0.5));

    Spin1Operators {
        jx,
        jy,
        jz,
        j_plus: jp,
        j_minus: jm,
        v: vec![v1, v2, v3, v4, v5, v6, v7, v8, v9],
    }
}

/// Intuitive product-of-single-qubit control generator `sigma_z^1 + sigma_z^2`.
pub fn single_qubit_z_sum() -> Operator {
    &kron(&sigma_z(), &id2()) + &kron(&id2(), &sigma_z())
}

/// Heisenberg form `-(I + XX + YY + ZZ)/2`, equal to `2|s><s| - I` for the singlet.
pub fn heisenberg_singlet_control() -> Operator {
    let ii = Operator::identity(4);
    let xx = kron(&sigma_x(), &sigma_x());
    let yy = kron(&sigma_y(), &sigma_y());
    let zz = kron(&sigma_z(), &sigma_z());
    (&(&(&ii + &xx) + &yy) + &zz).scale_real(-0.5)
}
