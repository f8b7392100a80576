//! Randomized system + bath Hamiltonians and the named control operators.
//!
//! Factor layout: system factors occupy the most significant tensor positions,
//! bath factors follow. Factor indices in the coefficient log are 0-based.
//!
//! Draw order (one SplitMix64 stream per seed):
//! 1. single-body bath terms, by factor `m` then axis `x, y, z`;
//! 2. pair terms, by `(n, m, axis_n, axis_m)` for factors `n < m`.
//!
//! With [`CouplingMode::Shared`] step 2 draws only nine values, by
//! `(axis_n, axis_m)`, reused for every pair.

use std::fmt;
use std::str::FromStr;

use crate::algebra::{
    bell_plus_state, heisenberg_singlet_control, polarization_from_state, single_qubit_z_sum,
    singlet_state, two_qubit_pauli_basis, PolarizationOperator,
};
use crate::error::{Error, Result};
use crate::linalg::spin::{sigma_x, sigma_y, sigma_z, spin1};
use crate::linalg::{kron_all, DensityMatrix, Operator, StateVector};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    Single,
    Pair,
    /// Pair coupling shared by every factor pair.
    SharedPair,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermKind::Single => "single",
            TermKind::Pair => "pair",
            TermKind::SharedPair => "shared_pair",
        })
    }
}

/// One sampled coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientRecord {
    pub kind: TermKind,
    pub factors: (Option<usize>, Option<usize>),
    pub axes: (Axis, Option<Axis>),
    pub value: f64,
}

/// Whether pair couplings are drawn per factor pair or once for all pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CouplingMode {
    #[default]
    Independent,
    Shared,
}

impl FromStr for CouplingMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "independent" => Ok(CouplingMode::Independent),
            "shared" => Ok(CouplingMode::Shared),
            other => Err(format!("unknown coupling mode '{other}'")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelInstance {
    h_total: Operator,
    factor_dims: Vec<usize>,
    system_factor_count: usize,
    seed: u64,
    coefficient_log: Vec<CoefficientRecord>,
}

impl ModelInstance {
    /// Wraps an explicit Hamiltonian; used for hand-built test models.
    pub fn from_hamiltonian(
        h_total: Operator,
        factor_dims: Vec<usize>,
        system_factor_count: usize,
    ) -> Result<Self> {
        h_total.ensure_hermitian()?;
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::InvalidFactors(format!(
                "bad factor dimensions {factor_dims:?}"
            )));
        }
        if system_factor_count == 0 || system_factor_count > factor_dims.len() {
            return Err(Error::InvalidFactors(format!(
                "system factor count {system_factor_count} for {} factors",
                factor_dims.len()
            )));
        }
        let dim: usize = factor_dims.iter().product();
        if dim != h_total.dim() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: h_total.dim(),
            });
        }
        Ok(ModelInstance {
            h_total,
            factor_dims,
            system_factor_count,
            seed: 0,
            coefficient_log: Vec::new(),
        })
    }

    pub fn h_total(&self) -> &Operator {
        &self.h_total
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn system_factor_count(&self) -> usize {
        self.system_factor_count
    }

    pub fn system_dims(&self) -> &[usize] {
        &self.factor_dims[..self.system_factor_count]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coefficient_log(&self) -> &[CoefficientRecord] {
        &self.coefficient_log
    }

    pub fn dim(&self) -> usize {
        self.h_total.dim()
    }

    pub fn system_dim(&self) -> usize {
        self.system_dims().iter().product()
    }

    pub fn bath_dim(&self) -> usize {
        self.dim() / self.system_dim()
    }

    /// `op ⊗ I_bath`
    pub fn embed_system(&self, op: &Operator) -> Result<Operator> {
        if op.dim() != self.system_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.system_dim(),
                found: op.dim(),
            });
        }
        Ok(op.extend(self.bath_dim()))
    }

    /// `|psi><psi| ⊗ rho_bath`
    pub fn initial_state(&self, system: &StateVector, bath: BathState) -> Result<DensityMatrix> {
        if system.dim() != self.system_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.system_dim(),
                found: system.dim(),
            });
        }
        let rho_bath = match bath {
            BathState::FirstBasisState => {
                DensityMatrix::pure(&StateVector::basis(self.bath_dim(), 0)?)
            }
            BathState::MaximallyMixed => DensityMatrix::maximally_mixed(self.bath_dim()),
        };
        Ok(DensityMatrix::pure(system).product(&rho_bath))
    }

    /// CSV with header `term_kind,factor_a,factor_b,axis_a,axis_b,value`.
    pub fn coefficient_log_csv(&self) -> String {
        let mut out = String::from("term_kind,factor_a,factor_b,axis_a,axis_b,value\n");
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.coefficient_log {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.kind,
                opt(r.factors.0),
                opt(r.factors.1),
                r.axes.0,
                r.axes.1.map(|a| a.to_string()).unwrap_or_default(),
                r.value
            ));
        }
        out
    }
}

/// Initial bath state paired with a pure system state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BathState {
    /// Every bath factor in its first basis state (spin up, or `m = +1`).
    #[default]
    FirstBasisState,
    MaximallyMixed,
}

impl FromStr for BathState {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "first" => Ok(BathState::FirstBasisState),
            "mixed" => Ok(BathState::MaximallyMixed),
            other => Err(format!("unknown bath state '{other}'")),
        }
    }
}

fn local_product(dims: &[usize], terms: &[(usize, &Operator)]) -> Operator {
    let ids: Vec<Operator> = dims.iter().map(|&d| Operator::identity(d)).collect();
    let mut factors: Vec<&Operator> = ids.iter().collect();
    for &(idx, op) in terms {
        factors[idx] = op;
    }
    kron_all(factors)
}

/// Random network of `n_factors` identical sites with local operators
/// `[o_x, o_y, o_z]`: single-body terms on bath sites only, pair terms on every
/// pair, all coefficients uniform in `[0, 1)`.
fn build_network(
    local: &[Operator; 3],
    n_factors: usize,
    system_factor_count: usize,
    seed: u64,
    coupling: CouplingMode,
) -> ModelInstance {
    let d = local[0].dim();
    let dims = vec![d; n_factors];
    let total: usize = dims.iter().product();
    let mut rng = SplitMix64::new(seed);
    let mut log = Vec::new();
    let mut h = Operator::zeros(total);

    for m in system_factor_count..n_factors {
        for axis in Axis::ALL {
            let b = rng.next_f64();
            log.push(CoefficientRecord {
                kind: TermKind::Single,
                factors: (Some(m), None),
                axes: (axis, None),
                value: b,
            });
            h = &h + &local_product(&dims, &[(m, &local[axis.index()])]).scale_real(b);
        }
    }

    let shared: Option<[[f64; 3]; 3]> = match coupling {
        CouplingMode::Independent => None,
        CouplingMode::Shared => {
            let mut c = [[0.0; 3]; 3];
            for an in Axis::ALL {
                for am in Axis::ALL {
                    let v = rng.next_f64();
                    c[an.index()][am.index()] = v;
                    log.push(CoefficientRecord {
                        kind: TermKind::SharedPair,
                        factors: (None, None),
                        axes: (an, Some(am)),
                        value: v,
                    });
                }
            }
            Some(c)
        }
    };

    for n in 0..n_factors {
        for m in n + 1..n_factors {
            for an in Axis::ALL {
                for am in Axis::ALL {
                    let c = match shared {
                        Some(table) => table[an.index()][am.index()],
                        None => {
                            let v = rng.next_f64();
                            log.push(CoefficientRecord {
                                kind: TermKind::Pair,
                                factors: (Some(n), Some(m)),
                                axes: (an, Some(am)),
                                value: v,
                            });
                            v
                        }
                    };
                    let term =
                        local_product(&dims, &[(n, &local[an.index()]), (m, &local[am.index()])]);
                    h = &h + &term.scale_real(c);
                }
            }
        }
    }

    ModelInstance {
        h_total: h,
        factor_dims: dims,
        system_factor_count,
        seed,
        coefficient_log: log,
    }
}

/// Two qubits plus three bath spins (dimension 32).
pub fn build_two_qubit_spin_bath(seed: u64) -> ModelInstance {
    build_two_qubit_spin_bath_with(seed, CouplingMode::Independent)
}

pub fn build_two_qubit_spin_bath_with(seed: u64, coupling: CouplingMode) -> ModelInstance {
    build_network(&[sigma_x(), sigma_y(), sigma_z()], 5, 2, seed, coupling)
}

/// One spin-1 system plus four spin-1 bath sites (dimension 243).
pub fn build_three_level_bath(seed: u64) -> ModelInstance {
    build_three_level_bath_with(seed, CouplingMode::Independent)
}

pub fn build_three_level_bath_with(seed: u64, coupling: CouplingMode) -> ModelInstance {
    build_network(&spin1(), 5, 1, seed, coupling)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlKind {
    /// `Y_1 = 2|↑↑><↑↑| - I`
    Y1Product,
    /// Polarization of `(|↑↓> + |↓↑>)/sqrt(2)`.
    BellPlus,
    /// Heisenberg pulse `-(I + XX + YY + ZZ)/2`.
    BellSinglet,
    /// `sigma_z^1 + sigma_z^2`, not a polarization operator.
    SingleIntuitive,
    /// `V_1 = 2|target><target| - I` on an `M`-level system.
    MlevelV1 {
        target: usize,
    },
    None,
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlKind::Y1Product => "y1_product",
            ControlKind::BellPlus => "bell_plus",
            ControlKind::BellSinglet => "bell_singlet",
            ControlKind::SingleIntuitive => "single_intuitive",
            ControlKind::MlevelV1 { .. } => "mlevel_v1",
            ControlKind::None => "none",
        })
    }
}

impl FromStr for ControlKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "y1_product" => Ok(ControlKind::Y1Product),
            "bell_plus" => Ok(ControlKind::BellPlus),
            "bell_singlet" => Ok(ControlKind::BellSinglet),
            "single_intuitive" => Ok(ControlKind::SingleIntuitive),
            "mlevel_v1" => Ok(ControlKind::MlevelV1 { target: 0 }),
            "none" => Ok(ControlKind::None),
            other => Err(format!("unknown control '{other}'")),
        }
    }
}

/// A resolved control: pulses are `exp(-i (pi/2) G)` for generator `G`.
#[derive(Clone, Debug)]
pub enum Control {
    Polarization(PolarizationOperator),
    Generator(Operator),
    None,
}

impl Control {
    pub fn generator(&self) -> Option<&Operator> {
        match self {
            Control::Polarization(p) => Some(p.op()),
            Control::Generator(g) => Some(g),
            Control::None => None,
        }
    }

    pub fn polarization(&self) -> Option<&PolarizationOperator> {
        match self {
            Control::Polarization(p) => Some(p),
            _ => None,
        }
    }
}

pub fn control_operator(kind: ControlKind, system_dims: &[usize]) -> Result<Control> {
    let mismatch = || Error::IncompatibleControl {
        control: kind.to_string(),
        dims: system_dims.to_vec(),
    };
    let two_qubits = system_dims == [2, 2];
    match kind {
        ControlKind::None => Ok(Control::None),
        ControlKind::Y1Product if two_qubits => Ok(Control::Polarization(polarization_from_state(
            &StateVector::basis(4, 0)?,
        )?)),
        ControlKind::BellPlus if two_qubits => Ok(Control::Polarization(polarization_from_state(
            &bell_plus_state(),
        )?)),
        ControlKind::BellSinglet if two_qubits => {
            let p = polarization_from_state(&singlet_state())?;
            debug_assert!(p.op().approx_eq(&heisenberg_singlet_control(), 1e-12));
            Ok(Control::Polarization(p))
        }
        ControlKind::SingleIntuitive if two_qubits => Ok(Control::Generator(single_qubit_z_sum())),
        ControlKind::MlevelV1 { target } => {
            let m: usize = system_dims.iter().product();
            if system_dims.is_empty() || m < 2 || target >= m {
                return Err(mismatch());
            }
            Ok(Control::Polarization(polarization_from_state(
                &StateVector::basis(m, target)?,
            )?))
        }
        _ => Err(mismatch()),
    }
}

/// `sum_i c_i X_i` over the Pauli products in [`two_qubit_pauli_basis`] order
/// (`c[0]` multiplies the identity).
pub fn generic_two_qubit_hamiltonian(coeffs: &[f64; 16]) -> Operator {
    two_qubit_pauli_basis()
        .iter()
        .zip(coeffs)
        .fold(Operator::zeros(4), |acc, ((_, x), &c)| {
            &acc + &x.scale_real(c)
        })
}
