//! Pulse timing (UDD and equidistant), the toggling sign, pulse shapes and
//! pulse propagators.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::algebra::PolarizationOperator;
use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, Operator, I};

/// Ordered pulse times strictly inside `(0, total_time)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    total_time: f64,
    times: Vec<f64>,
}

impl PulseSchedule {
    pub fn new(times: Vec<f64>, total_time: f64) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        if let Some(&t) = times.iter().find(|&&t| !(t > 0.0 && t < total_time)) {
            return Err(Error::TimeOutOfRange {
                t,
                total: total_time,
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSchedule(
                "pulse times must be strictly increasing".into(),
            ));
        }
        Ok(PulseSchedule { total_time, times })
    }

    /// No pulses.
    pub fn empty(total_time: f64) -> Result<Self> {
        Self::new(Vec::new(), total_time)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Segment boundaries `0, T_1, ..., T_N, T`.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.times.len() + 2);
        b.push(0.0);
        b.extend_from_slice(&self.times);
        b.push(self.total_time);
        b
    }

    /// `int_0^T F_N(t) dt`
    pub fn switching_integral(&self) -> f64 {
        self.boundaries()
            .windows(2)
            .enumerate()
            .map(|(j, w)| sign(j) * (w[1] - w[0]))
            .sum()
    }
}

fn sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `T_j = T sin^2(j pi / (2N + 2))`, `j = 1..N`.
pub fn udd_times(n: usize, total_time: f64) -> Result<PulseSchedule> {
    let denom = (2 * n + 2) as f64;
    let times = (1..=n)
        .map(|j| {
            let s = (j as f64 * PI / denom).sin();
            total_time * s * s
        })
        .collect();
    PulseSchedule::new(times, total_time)
}

/// Equidistant centres `T (2j - 1) / (2N)`.
pub fn periodic_times(n: usize, total_time: f64) -> Result<PulseSchedule> {
    let times = (1..=n)
        .map(|j| total_time * (2 * j - 1) as f64 / (2 * n) as f64)
        .collect();
    PulseSchedule::new(times, total_time)
}

/// `F_N(t) = (-1)^j` on `(T_j, T_{j+1})`. At a pulse time the value after the
/// pulse is returned.
pub fn switching_function(s: &PulseSchedule, t: f64) -> Result<f64> {
    if !(0.0..=s.total_time).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            total: s.total_time,
        });
    }
    let flips = s.times.partition_point(|&tj| tj <= t);
    Ok(sign(flips))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseShape {
    Delta,
    /// Envelope `exp(-(t - T_j)^2 / c^2) / (c sqrt(pi))`.
    Gaussian {
        width: f64,
    },
}

impl PulseShape {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidShape(format!(
                "gaussian width must be positive, got {width}"
            )));
        }
        Ok(PulseShape::Gaussian { width })
    }

    /// Width `c = total_time / ratio`.
    pub fn gaussian_ratio(total_time: f64, ratio: f64) -> Result<Self> {
        Self::gaussian(total_time / ratio)
    }
}

/// Default `T / c`.
pub const DEFAULT_WIDTH_RATIO: f64 = 100.0;

/// Unit-area Gaussian `exp(-x^2/c^2) / (c sqrt(pi))`.
pub fn gaussian_kernel(x: f64, width: f64) -> f64 {
    let u = x / width;
    (-u * u).exp() / (width * PI.sqrt())
}

/// Scalar amplitude `sum_j (pi/2) g_c(t - T_j)`, zero outside `[0, T]`.
pub fn pulse_envelope(s: &PulseSchedule, width: f64, t: f64) -> f64 {
    if !(0.0..=s.total_time).contains(&t) {
        return 0.0;
    }
    s.times
        .iter()
        .map(|&tj| FRAC_PI_2 * gaussian_kernel(t - tj, width))
        .sum()
}

/// `H_c(t) = sum_j (pi/2) g_c(t - T_j) G` for a Gaussian shape and control
/// generator `G`.
pub fn control_field(
    generator: &Operator,
    s: &PulseSchedule,
    shape: PulseShape,
    t: f64,
) -> Result<Operator> {
    match shape {
        PulseShape::Delta => Err(Error::InvalidShape(
            "delta pulses have no field representation; use the delta propagator".into(),
        )),
        PulseShape::Gaussian { width } => {
            if !(0.0..=s.total_time).contains(&t) {
                return Err(Error::TimeOutOfRange {
                    t,
                    total: s.total_time,
                });
            }
            Ok(generator.scale_real(pulse_envelope(s, width, t)))
        }
    }
}

/// `exp(-i (pi/2) P) = -i P`, exact because `P^2 = I`.
pub fn pulse_unitary(p: &PolarizationOperator) -> Operator {
    p.op().scale(-I)
}

/// `exp(-i (pi/2) G)` for a general Hermitian generator.
pub fn kick_unitary(generator: &Operator) -> Result<Operator> {
    expm_unitary(generator, FRAC_PI_2)
}
