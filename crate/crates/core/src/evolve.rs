//! Time evolution of system + bath under free dynamics plus pulsed control,
//! and the coherence / distance measurements taken along the way.
//!
//! Two propagation paths:
//!
//! * delta pulses: the free Hamiltonian is diagonalized once and states are
//!   carried in its eigenbasis, so every free segment is an exact phase
//!   rotation and every pulse a single matrix-vector product;
//! * Gaussian pulses: midpoint-exponential stepping
//!   `U = exp(-i H(t_mid) dt)` with steps refined near each pulse centre.
//!
//! Initial density matrices are decomposed into weighted pure states and each
//! column is propagated. Samples falling exactly on a pulse time see the state
//! after the pulse.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::algebra::PolarizationOperator;
use crate::error::{Error, Result};
use crate::linalg::{
    norm, reduce_pure_ensemble, DensityMatrix, HermitianEigen, NormKind, Operator, C64,
};
use crate::models::{Control, ModelInstance};
use crate::pulses::{kick_unitary, pulse_envelope, PulseSchedule, PulseShape};

/// Default number of uniformly spaced samples, endpoints included.
pub const DEFAULT_SAMPLES: usize = 1000;

/// Sampled coherence trace `F(t) = Tr[rho(t) (P ⊗ I)]`.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub f_values: Vec<f64>,
    /// System marginals at each sample, when requested.
    pub reduced_states: Option<Vec<DensityMatrix>>,
}

impl TimeSeries {
    pub fn final_f(&self) -> f64 {
        *self.f_values.last().expect("series has samples")
    }

    pub fn min_f(&self) -> f64 {
        self.f_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Population variance of the sampled `F` values.
    pub fn f_variance(&self) -> f64 {
        let n = self.f_values.len() as f64;
        let mean = self.f_values.iter().sum::<f64>() / n;
        self.f_values
            .iter()
            .map(|f| (f - mean).powi(2))
            .sum::<f64>()
            / n
    }

    pub fn max_jump(&self) -> f64 {
        self.f_values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    }
}

/// Step-size control for Gaussian pulses: inside `window_widths * c` of a pulse
/// centre the step is at most `c / steps_per_width`; elsewhere at most
/// `T / base_steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPolicy {
    pub window_widths: f64,
    pub steps_per_width: f64,
    pub base_steps: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            window_widths: 8.0,
            steps_per_width: 10.0,
            base_steps: 1000,
        }
    }
}

impl StepPolicy {
    /// Minimum number of steps across one pulse window.
    pub fn steps_per_pulse(&self) -> f64 {
        2.0 * self.window_widths * self.steps_per_width
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_widths > 0.0 && self.steps_per_width > 0.0) || self.base_steps == 0 {
            return Err(Error::InvalidStepPolicy(format!("{self:?}")));
        }
        if self.steps_per_pulse() < 2.0 {
            return Err(Error::InvalidStepPolicy(format!(
                "{:.3} steps per pulse, need at least 2",
                self.steps_per_pulse()
            )));
        }
        Ok(())
    }
}

/// A configured evolution run.
#[derive(Clone, Debug)]
pub struct Evolution<'a> {
    model: &'a ModelInstance,
    observable: Operator,
    generator: Option<Operator>,
    schedule: PulseSchedule,
    shape: PulseShape,
    samples: usize,
    record_states: bool,
    step_policy: StepPolicy,
}

impl<'a> Evolution<'a> {
    /// Measures `observable ⊗ I_bath`; no control until one is attached.
    pub fn new(
        model: &'a ModelInstance,
        observable: &PolarizationOperator,
        schedule: PulseSchedule,
    ) -> Result<Self> {
        let observable = model.embed_system(observable.op())?;
        Ok(Evolution {
            model,
            observable,
            generator: None,
            schedule,
            shape: PulseShape::Delta,
            samples: DEFAULT_SAMPLES,
            record_states: false,
            step_policy: StepPolicy::default(),
        })
    }

    /// Pulses are `exp(-i (pi/2) G ⊗ I)` for the control's generator `G`.
    pub fn with_control(mut self, control: &Control) -> Result<Self> {
        self.generator = match control.generator() {
            Some(g) => Some(self.model.embed_system(g)?),
            None => None,
        };
        Ok(self)
    }

    pub fn with_shape(mut self, shape: PulseShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_states(mut self, record: bool) -> Self {
        self.record_states = record;
        self
    }

    pub fn with_step_policy(mut self, policy: StepPolicy) -> Self {
        self.step_policy = policy;
        self
    }

    pub fn total_time(&self) -> f64 {
        self.schedule.total_time()
    }

    fn sample_times(&self) -> Vec<f64> {
        let t = self.total_time();
        let n = self.samples;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    t
                } else {
                    t * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        if let PulseShape::Gaussian { .. } = self.shape {
            self.step_policy.validate()?;
        }
        Ok(())
    }

    pub fn run(&self, rho0: &DensityMatrix) -> Result<TimeSeries> {
        self.check()?;
        if self.samples < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples, got {}",
                self.samples
            )));
        }
        if rho0.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                found: rho0.dim(),
            });
        }
        let ensemble = rho0.ensemble();
        let weights: Vec<f64> = ensemble.iter().map(|(w, _)| *w).collect();
        let d = self.model.dim();
        let columns = DMatrix::from_fn(d, ensemble.len(), |r, c| ensemble[c].1[r]);

        let mut recorder = Recorder {
            weights: &weights,
            sys_dim: self.model.system_dim(),
            bath_dim: self.model.bath_dim(),
            record_states: self.record_states,
            f_values: Vec::with_capacity(self.samples),
            states: Vec::new(),
        };
        let times = self.sample_times();
        self.propagate(columns, &times, &mut recorder)?;
        Ok(TimeSeries {
            times,
            f_values: recorder.f_values,
            reduced_states: self.record_states.then_some(recorder.states),
        })
    }

    /// Full propagator `U(T)` on system + bath.
    pub fn propagator(&self) -> Result<Operator> {
        self.check()?;
        let d = self.model.dim();
        let mut recorder = Recorder {
            weights: &[],
            sys_dim: self.model.system_dim(),
            bath_dim: self.model.bath_dim(),
            record_states: false,
            f_values: Vec::new(),
            states: Vec::new(),
        };
        let u = self.propagate(DMatrix::identity(d, d), &[], &mut recorder)?;
        Ok(Operator::from_matrix(u))
    }

    fn propagate(
        &self,
        columns: DMatrix<C64>,
        sample_times: &[f64],
        rec: &mut Recorder<'_>,
    ) -> Result<DMatrix<C64>> {
        let eig = self.model.h_total().eigh()?;
        let pulses: &[f64] = match self.generator {
            Some(_) => self.schedule.times(),
            None => &[],
        };
        match (self.shape, &self.generator) {
            (PulseShape::Gaussian { width }, Some(g)) if !pulses.is_empty() => {
                self.propagate_gaussian(&eig, g, width, columns, sample_times, rec)
            }
            _ => self.propagate_delta(&eig, pulses, columns, sample_times, rec),
        }
    }

    fn propagate_delta(
        &self,
        eig: &HermitianEigen,
        pulses: &[f64],
        columns: DMatrix<C64>,
        sample_times: &[f64],
        rec: &mut Recorder<'_>,
    ) -> Result<DMatrix<C64>> {
        let v = &eig.vectors;
        let v_adj = v.adjoint();
        let obs_eig = &v_adj * self.observable.matrix() * v;
        let kick_eig = match &self.generator {
            Some(g) if !pulses.is_empty() => Some(&v_adj * kick_unitary(g)?.matrix() * v),
            _ => None,
        };

        let mut phi = &v_adj * columns;
        let mut now = 0.0;
        let advance = |phi: &mut DMatrix<C64>, dt: f64| {
            if dt == 0.0 {
                return;
            }
            for (j, &lambda) in eig.values.iter().enumerate() {
                let ph = C64::from_polar(1.0, -lambda * dt);
                for c in 0..phi.ncols() {
                    phi[(j, c)] *= ph;
                }
            }
        };

        let (mut ip, mut is) = (0, 0);
        while ip < pulses.len() || is < sample_times.len() {
            // Pulses win ties with samples.
            let pulse_next =
                ip < pulses.len() && (is >= sample_times.len() || pulses[ip] <= sample_times[is]);
            let t = if pulse_next {
                pulses[ip]
            } else {
                sample_times[is]
            };
            advance(&mut phi, t - now);
            now = t;
            if pulse_next {
                if let Some(k) = &kick_eig {
                    phi = k * &phi;
                }
                ip += 1;
            } else {
                let states = rec.record_states.then(|| v * &phi);
                rec.record(&phi, &obs_eig, states.as_ref());
                is += 1;
            }
        }
        advance(&mut phi, self.total_time() - now);
        Ok(v * phi)
    }

    fn propagate_gaussian(
        &self,
        eig: &HermitianEigen,
        generator: &Operator,
        width: f64,
        mut psi: DMatrix<C64>,
        sample_times: &[f64],
        rec: &mut Recorder<'_>,
    ) -> Result<DMatrix<C64>> {
        let total = self.total_time();
        let policy = self.step_policy;
        let reach = policy.window_widths * width;
        let centres = self.schedule.times();

        let mut breaks: Vec<f64> = vec![0.0, total];
        breaks.extend_from_slice(sample_times);
        for &tc in centres {
            breaks.push((tc - reach).max(0.0));
            breaks.push((tc + reach).min(total));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let h = self.model.h_total();
        let h_scale = h.max_abs().max(1.0);
        let g_scale = generator.max_abs();
        let mut free_cache: HashMap<u64, DMatrix<C64>> = HashMap::new();

        let mut is = 0;
        let mut sample_here = |t: f64, psi: &DMatrix<C64>, is: &mut usize| {
            while *is < sample_times.len() && sample_times[*is] == t {
                rec.record(
                    psi,
                    self.observable.matrix(),
                    rec.record_states.then_some(psi),
                );
                *is += 1;
            }
        };
        sample_here(0.0, &psi, &mut is);

        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let near = centres.iter().any(|&tc| (mid - tc).abs() < reach);
            let max_step = if near {
                width / policy.steps_per_width
            } else {
                total / policy.base_steps as f64
            };
            let n = ((b - a) / max_step).ceil().max(1.0) as usize;
            let dt = (b - a) / n as f64;
            for k in 0..n {
                let t_mid = a + (k as f64 + 0.5) * dt;
                let amp = pulse_envelope(&self.schedule, width, t_mid);
                let step = if amp * g_scale <= 1e-16 * h_scale {
                    free_cache
                        .entry(dt.to_bits())
                        .or_insert_with(|| eig.evolution(dt).into_matrix())
                        .clone()
                } else {
                    let h_t = h + &generator.scale_real(amp);
                    h_t.eigh()?.evolution(dt).into_matrix()
                };
                psi = step * psi;
            }
            sample_here(b, &psi, &mut is);
        }
        Ok(psi)
    }
}

struct Recorder<'w> {
    weights: &'w [f64],
    sys_dim: usize,
    bath_dim: usize,
    record_states: bool,
    f_values: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Recorder<'_> {
    /// `columns` and `observable` share a basis; `computational` holds the
    /// same columns in the product basis when states are recorded.
    fn record(
        &mut self,
        columns: &DMatrix<C64>,
        observable: &DMatrix<C64>,
        computational: Option<&DMatrix<C64>>,
    ) {
        let f = self
            .weights
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let col = columns.column(k);
                w * col.dotc(&(observable * col)).re
            })
            .sum();
        self.f_values.push(f);
        if let Some(psi) = computational {
            self.states.push(reduce_pure_ensemble(
                psi,
                self.weights,
                self.sys_dim,
                self.bath_dim,
            ));
        }
    }
}

/// Delta-pulse run where `p` is both the pulse generator and the measured
/// polarization.
pub fn evolve_delta(
    model: &ModelInstance,
    p: &PolarizationOperator,
    schedule: &PulseSchedule,
    rho0: &DensityMatrix,
    samples: usize,
) -> Result<TimeSeries> {
    Evolution::new(model, p, schedule.clone())?
        .with_control(&Control::Polarization(p.clone()))?
        .with_samples(samples)
        .run(rho0)
}

/// Gaussian-pulse run where `p` is both the pulse generator and the measured
/// polarization.
pub fn evolve_gaussian(
    model: &ModelInstance,
    p: &PolarizationOperator,
    schedule: &PulseSchedule,
    width: f64,
    rho0: &DensityMatrix,
    samples: usize,
    policy: StepPolicy,
) -> Result<TimeSeries> {
    Evolution::new(model, p, schedule.clone())?
        .with_control(&Control::Polarization(p.clone()))?
        .with_shape(PulseShape::gaussian(width)?)
        .with_step_policy(policy)
        .with_samples(samples)
        .run(rho0)
}

/// `Tr[rho (P ⊗ I)]`
pub fn coherence_expectation(rho: &DensityMatrix, p: &PolarizationOperator) -> Result<f64> {
    if !rho.dim().is_multiple_of(p.dim()) {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: rho.dim(),
        });
    }
    rho.expectation(&p.op().extend(rho.dim() / p.dim()))
}

/// `||rho(t) - rho_ref||_trace / 2` at each sample.
pub fn distance_integrand(states: &[DensityMatrix], rho_ref: &DensityMatrix) -> Result<Vec<f64>> {
    states
        .iter()
        .map(|rho| {
            if rho.dim() != rho_ref.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rho_ref.dim(),
                    found: rho.dim(),
                });
            }
            Ok(0.5 * norm(&(rho.operator() - rho_ref.operator()), NormKind::Trace))
        })
        .collect()
}

/// `(1/2T) int_0^T ||rho(t) - rho_ref||_trace dt` by the trapezoid rule over
/// the sample grid.
pub fn avg_distance_from(
    times: &[f64],
    states: &[DensityMatrix],
    rho_ref: &DensityMatrix,
    total_time: f64,
) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::EmptySeries);
    }
    if times.len() != states.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: states.len(),
        });
    }
    let y = distance_integrand(states, rho_ref)?;
    if y.len() == 1 {
        return Ok(y[0]);
    }
    let integral: f64 = times
        .windows(2)
        .zip(y.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum();
    Ok(integral / total_time)
}

/// Time-averaged trace distance of a series recorded with states.
pub fn avg_distance(series: &TimeSeries, rho_ref: &DensityMatrix, total_time: f64) -> Result<f64> {
    let states = series.reduced_states.as_deref().ok_or(Error::EmptySeries)?;
    avg_distance_from(&series.times, states, rho_ref, total_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{bell_plus_state, polarization_from_state, two_qubit_y_basis};
    use crate::linalg::{kron, partial_trace, spin::*, StateVector};
    use crate::models::{build_two_qubit_spin_bath, BathState, ControlKind};
    use crate::pulses::udd_times;

    fn y1() -> PolarizationOperator {
        two_qubit_y_basis().polarization
    }

    fn up_up() -> StateVector {
        StateVector::basis(4, 0).unwrap()
    }

    #[test]
    fn frozen_without_dynamics() {
        let m = ModelInstance::from_hamiltonian(Operator::zeros(8), vec![2, 2, 2], 2).unwrap();
        let psi = StateVector::normalized(vec![
            C64::new(1.0, 0.0),
            C64::new(0.3, 0.2),
            C64::new(0.0, 0.0),
            C64::new(0.5, 0.0),
        ])
        .unwrap();
        let rho = m.initial_state(&psi, BathState::default()).unwrap();
        let s = evolve_delta(&m, &y1(), &PulseSchedule::empty(1.0).unwrap(), &rho, 50).unwrap();
        let f0 = s.f_values[0];
        assert!(s.f_values.iter().all(|f| (f - f0).abs() < 1e-14));
    }

    #[test]
    fn eigenstate_starts_at_one() {
        let m = build_two_qubit_spin_bath(42);
        let rho = m.initial_state(&up_up(), BathState::default()).unwrap();
        let s = evolve_delta(&m, &y1(), &udd_times(3, 0.1).unwrap(), &rho, 20).unwrap();
        assert!((s.f_values[0] - 1.0).abs() < 1e-13);
        assert_eq!(s.times.len(), 20);
        assert_eq!(*s.times.last().unwrap(), 0.1);
    }

    #[test]
    fn commuting_hamiltonian_preserves_f() {
        // H = Y1 ⊗ B + I ⊗ B' commutes with Y1 ⊗ I.
        let p = y1();
        let h =
            &kron(p.op(), &sigma_x()) + &kron(&Operator::identity(4), &sigma_z()).scale_real(0.7);
        let m = ModelInstance::from_hamiltonian(h, vec![2, 2, 2], 2).unwrap();
        let psi = StateVector::normalized(vec![
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let rho = m.initial_state(&psi, BathState::default()).unwrap();
        let s = evolve_delta(&m, &p, &udd_times(1, 1.0).unwrap(), &rho, 11).unwrap();
        assert!((s.final_f() - s.f_values[0]).abs() < 1e-13);
    }

    #[test]
    fn coherence_expectation_examples() {
        let p = y1();
        let bath = DensityMatrix::maximally_mixed(2);
        let on = DensityMatrix::pure(&up_up()).product(&bath);
        assert!((coherence_expectation(&on, &p).unwrap() - 1.0).abs() < 1e-15);
        let off = DensityMatrix::pure(&StateVector::basis(4, 3).unwrap()).product(&bath);
        assert!((coherence_expectation(&off, &p).unwrap() + 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(8);
        assert!((coherence_expectation(&mixed, &p).unwrap() - (2.0 - 4.0) / 4.0).abs() < 1e-15);
        assert!(coherence_expectation(&DensityMatrix::maximally_mixed(3), &p).is_err());
    }

    #[test]
    fn avg_distance_examples() {
        let up = DensityMatrix::pure(&StateVector::basis(2, 0).unwrap());
        let down = DensityMatrix::pure(&StateVector::basis(2, 1).unwrap());
        let times: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let same = vec![up.clone(); 11];
        assert_eq!(avg_distance_from(&times, &same, &up, 1.0).unwrap(), 0.0);
        let flipped = vec![down; 11];
        assert!((avg_distance_from(&times, &flipped, &up, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            avg_distance_from(&[], &[], &up, 1.0),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn recorded_states_match_partial_trace() {
        let m = build_two_qubit_spin_bath(42);
        let rho = m
            .initial_state(&bell_plus_state(), BathState::default())
            .unwrap();
        let p = polarization_from_state(&bell_plus_state()).unwrap();
        let sched = udd_times(2, 0.05).unwrap();
        let evo = Evolution::new(&m, &p, sched.clone())
            .unwrap()
            .with_control(&Control::Polarization(p.clone()))
            .unwrap()
            .with_samples(5)
            .with_states(true);
        let s = evo.run(&rho).unwrap();
        let u = evo.propagator().unwrap();
        let rho_t = DensityMatrix::new(&(&u * rho.operator()) * &u.adjoint()).unwrap();
        let direct = partial_trace(&rho_t, m.factor_dims(), &[0, 1]).unwrap();
        let last = s.reduced_states.as_ref().unwrap().last().unwrap().clone();
        assert!(last.operator().approx_eq(direct.operator(), 1e-12));
        assert!((coherence_expectation(&rho_t, &p).unwrap() - s.final_f()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_pulse_alone_is_minus_i_p() {
        let p = y1();
        let m = ModelInstance::from_hamiltonian(Operator::zeros(8), vec![2, 2, 2], 2).unwrap();
        let u = Evolution::new(&m, &p, udd_times(1, 1.0).unwrap())
            .unwrap()
            .with_control(&Control::Polarization(p.clone()))
            .unwrap()
            .with_shape(PulseShape::gaussian(0.01).unwrap())
            .propagator()
            .unwrap();
        let expected = p.op().extend(2).scale(C64::new(0.0, -1.0));
        assert!(norm(&(&u - &expected), NormKind::Spectral) <= 1e-6);
    }

    #[test]
    fn step_policy_rejects_coarse_windows() {
        let bad = StepPolicy {
            window_widths: 0.5,
            steps_per_width: 1.0,
            base_steps: 100,
        };
        assert!(bad.validate().is_err());
        let m = build_two_qubit_spin_bath(1);
        let rho = m.initial_state(&up_up(), BathState::default()).unwrap();
        let r = evolve_gaussian(&m, &y1(), &udd_times(2, 0.1).unwrap(), 1e-3, &rho, 10, bad);
        assert!(matches!(r, Err(Error::InvalidStepPolicy(_))));
        assert!(StepPolicy::default().validate().is_ok());
    }

    #[test]
    fn single_intuitive_kick_is_zz() {
        let m = ModelInstance::from_hamiltonian(Operator::zeros(4), vec![2, 2], 2).unwrap();
        let c = crate::models::control_operator(ControlKind::SingleIntuitive, &[2, 2]).unwrap();
        let u = Evolution::new(&m, &y1(), udd_times(1, 1.0).unwrap())
            .unwrap()
            .with_control(&c)
            .unwrap()
            .propagator()
            .unwrap();
        assert!(u.approx_eq(&-kron(&sigma_z(), &sigma_z()), 1e-14));
    }
}
