//! Brute-force check of the UDD product identity
//! `(U_-)^dagger U_+ = 1 + O(T^{N+1})` for arbitrary Hermitian `C`, `Z`, and
//! log-log exponent fits. Independent of the system + bath simulator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::linalg::{expm_unitary, norm, NormKind, Operator, C64};
use crate::pulses::{switching_function, udd_times, PulseSchedule};
use crate::rng::SplitMix64;

/// Deviations at or below this are treated as numerically zero.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Deviations at or above this are outside the small-`T` regime.
pub const SATURATION_CAP: f64 = 0.5;

/// Fewest time steps accepted by [`interaction_picture_check`].
pub const MIN_IP_STEPS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Hermitian matrix with entries drawn uniformly from `[-1, 1) + i[-1, 1)`
/// (row-major, real part first), symmetrized and scaled to unit spectral norm.
pub fn random_hermitian(dim: usize, rng: &mut SplitMix64) -> Operator {
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let re = rng.uniform(-1.0, 1.0);
            let im = rng.uniform(-1.0, 1.0);
            a[(r, c)] = C64::new(re, im);
        }
    }
    let h = Operator::from_matrix((&a + a.adjoint()) * C64::new(0.5, 0.0));
    let s = norm(&h, NormKind::Spectral);
    h.scale_real(1.0 / s)
}

/// `(C, Z)` drawn in that order from `SplitMix64(seed)`.
pub fn random_pair(dim: usize, seed: u64) -> (Operator, Operator) {
    let mut rng = SplitMix64::new(seed);
    let c = random_hermitian(dim, &mut rng);
    let z = random_hermitian(dim, &mut rng);
    (c, z)
}

/// `C` random, `Z` a polynomial in `C` (so `[C, Z] = 0`), unit spectral norm.
pub fn commuting_pair(dim: usize, seed: u64) -> (Operator, Operator) {
    let mut rng = SplitMix64::new(seed);
    let c = random_hermitian(dim, &mut rng);
    let z = &(&c * &c) - &c.scale_real(0.3);
    let s = norm(&z, NormKind::Spectral);
    (c, z.scale_real(1.0 / s))
}

/// `prod_j exp(-i [C ± (-1)^j Z] (T_{j+1} - T_j))`, latest segment leftmost.
pub fn build_u_pm_schedule(
    c: &Operator,
    z: &Operator,
    schedule: &PulseSchedule,
    sign: Sign,
) -> Result<Operator> {
    if c.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: z.dim(),
        });
    }
    let plus = c + z;
    let minus = c - z;
    let (even, odd) = match sign {
        Sign::Plus => (&plus, &minus),
        Sign::Minus => (&minus, &plus),
    };
    let mut u = Operator::identity(c.dim());
    for (j, w) in schedule.boundaries().windows(2).enumerate() {
        let gen = if j % 2 == 0 { even } else { odd };
        u = &expm_unitary(gen, w[1] - w[0])? * &u;
    }
    Ok(u)
}

/// UDD product with `n` pulses over `[0, total_time]`.
pub fn build_u_pm(
    c: &Operator,
    z: &Operator,
    n: usize,
    total_time: f64,
    sign: Sign,
) -> Result<Operator> {
    build_u_pm_schedule(c, z, &udd_times(n, total_time)?, sign)
}

/// `||(U_-)^dagger U_+ - I||_2` for an arbitrary schedule.
pub fn deviation_for_schedule(c: &Operator, z: &Operator, schedule: &PulseSchedule) -> Result<f64> {
    let up = build_u_pm_schedule(c, z, schedule, Sign::Plus)?;
    let um = build_u_pm_schedule(c, z, schedule, Sign::Minus)?;
    let prod = &um.adjoint() * &up;
    Ok(norm(
        &(&prod - &Operator::identity(c.dim())),
        NormKind::Spectral,
    ))
}

pub fn yangliu_deviation(c: &Operator, z: &Operator, n: usize, total_time: f64) -> Result<f64> {
    deviation_for_schedule(c, z, &udd_times(n, total_time)?)
}

/// Least-squares fit of `log(deviation) = slope * log(T) + intercept` over the
/// points strictly inside `(NOISE_FLOOR, SATURATION_CAP)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub t_grid: Vec<f64>,
    pub deviations: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
}

pub fn fit_power_law(t_grid: &[f64], deviations: &[f64]) -> Result<ScalingFit> {
    if t_grid.len() != deviations.len() {
        return Err(Error::DimensionMismatch {
            expected: t_grid.len(),
            found: deviations.len(),
        });
    }
    let pts: Vec<(f64, f64)> = t_grid
        .iter()
        .zip(deviations)
        .filter(|(_, &d)| d > NOISE_FLOOR && d < SATURATION_CAP)
        .map(|(&t, &d)| (t.ln(), d.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientFitPoints { usable: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit {
        t_grid: t_grid.to_vec(),
        deviations: deviations.to_vec(),
        slope,
        intercept: my - slope * mx,
        points_used: pts.len(),
    })
}

pub fn scaling_slope(deviation_fn: impl Fn(f64) -> f64, t_grid: &[f64]) -> Result<ScalingFit> {
    if t_grid.len() < 4 {
        return Err(Error::InvalidGrid(format!(
            "need at least 4 grid points, got {}",
            t_grid.len()
        )));
    }
    let devs: Vec<f64> = t_grid.iter().map(|&t| deviation_fn(t)).collect();
    fit_power_law(t_grid, &devs)
}

/// `points` values from `t_max` down to `t_min`, geometrically spaced.
pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::InvalidGrid(format!(
            "need 0 < t_min < t_max and at least 2 points (t_min={t_min}, t_max={t_max}, points={points})"
        )));
    }
    let ratio = (t_min / t_max).powf(1.0 / (points - 1) as f64);
    Ok((0..points)
        .map(|k| {
            if k + 1 == points {
                t_min
            } else {
                t_max * ratio.powi(k as i32)
            }
        })
        .collect())
}

/// The grid `{0.2, 0.1, 0.05, 0.025, 0.0125}`.
pub fn default_grid() -> Vec<f64> {
    log_grid(0.0125, 0.2, 5).expect("valid grid")
}

/// Distance between the segment product and the interaction-picture form
/// `e^{-iCT} prod_k exp(∓i F_N(t_k) Z_I(t_k) dt)` with left-point sampling,
/// `Z_I(t) = e^{iCt} Z e^{-iCt}`; the larger of the two signs.
pub fn interaction_picture_check(
    c: &Operator,
    z: &Operator,
    n: usize,
    total_time: f64,
    steps: usize,
) -> Result<f64> {
    if steps < MIN_IP_STEPS {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_IP_STEPS} steps, got {steps}"
        )));
    }
    let schedule = udd_times(n, total_time)?;
    let c_eig = c.eigh()?;
    let dt = total_time / steps as f64;
    // exp(-i s Z_I(t)) = e^{iCt} exp(-i s Z) e^{-iCt}
    let kick_pos = expm_unitary(z, dt)?;
    let kick_neg = expm_unitary(z, -dt)?;
    let free_t = c_eig.evolution(total_time);

    let mut worst: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        let mut ordered = Operator::identity(c.dim());
        for k in 0..steps {
            let t = k as f64 * dt;
            let f = switching_function(&schedule, t)? * sign.value();
            let kick = if f > 0.0 { &kick_pos } else { &kick_neg };
            let rot_fwd = c_eig.evolution(-t);
            let rot_back = c_eig.evolution(t);
            let step = &(&rot_fwd * kick) * &rot_back;
            ordered = &step * &ordered;
        }
        let via_ip = &free_t * &ordered;
        let direct = build_u_pm_schedule(c, z, &schedule, sign)?;
        worst = worst.max(norm(&(&direct - &via_ip), NormKind::Spectral));
    }
    Ok(worst)
}

/// Exponent fit for one random `(C, Z)` pair per seed, in seed order.
pub fn exponent_sweep(
    dim: usize,
    n: usize,
    seeds: &[u64],
    t_grid: &[f64],
    exec: Execution,
) -> Vec<(u64, Result<ScalingFit>)> {
    map_ordered(seeds, exec, |&seed| {
        let (c, z) = random_pair(dim, seed);
        let fit = scaling_slope(
            |t| yangliu_deviation(&c, &z, n, t).unwrap_or(f64::NAN),
            t_grid,
        );
        (seed, fit)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::periodic_times;

    #[test]
    fn zero_z_collapses_to_free_evolution() {
        let (c, _) = random_pair(4, 1);
        let z = Operator::zeros(4);
        let free = expm_unitary(&c, 0.3).unwrap();
        for n in [0, 1, 4] {
            for s in [Sign::Plus, Sign::Minus] {
                assert!(build_u_pm(&c, &z, n, 0.3, s)
                    .unwrap()
                    .approx_eq(&free, 1e-13));
            }
            assert!(yangliu_deviation(&c, &z, n, 0.3).unwrap() < 1e-13);
        }
    }

    #[test]
    fn no_pulses_is_single_segment() {
        let (c, z) = random_pair(3, 2);
        let u = build_u_pm(&c, &z, 0, 0.7, Sign::Plus).unwrap();
        assert!(u.approx_eq(&expm_unitary(&(&c + &z), 0.7).unwrap(), 1e-13));
        let u = build_u_pm(&c, &z, 0, 0.7, Sign::Minus).unwrap();
        assert!(u.approx_eq(&expm_unitary(&(&c - &z), 0.7).unwrap(), 1e-13));
    }

    #[test]
    fn commuting_pair_has_zero_deviation() {
        let (c, z) = commuting_pair(4, 3);
        let free = expm_unitary(&c, 0.4).unwrap();
        let up = build_u_pm(&c, &z, 1, 0.4, Sign::Plus).unwrap();
        assert!(up.approx_eq(&free, 1e-13));
        for n in 1..=8 {
            assert!(udd_times(n, 1.0).unwrap().switching_integral().abs() < 1e-14);
            assert!(yangliu_deviation(&c, &z, n, 0.4).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let c = Operator::identity(2);
        let z = Operator::identity(3);
        assert!(build_u_pm(&c, &z, 1, 1.0, Sign::Plus).is_err());
    }

    #[test]
    fn synthetic_power_law() {
        let fit = scaling_slope(|t| t * t, &default_grid()).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-6);
        assert_eq!(fit.points_used, 5);
        let err = scaling_slope(|_| 1e-15, &default_grid()).unwrap_err();
        assert_eq!(err, Error::InsufficientFitPoints { usable: 0 });
        assert!(scaling_slope(|t| t, &[0.1, 0.05, 0.025]).is_err());
    }

    #[test]
    fn default_grid_values() {
        let g = default_grid();
        let expected = [0.2, 0.1, 0.05, 0.025, 0.0125];
        assert!(g.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(log_grid(0.1, 0.05, 4).is_err());
        assert!(log_grid(0.01, 0.1, 1).is_err());
    }

    #[test]
    fn single_pulse_slope_near_two() {
        let (c, z) = random_pair(4, 0);
        let fit = scaling_slope(
            |t| yangliu_deviation(&c, &z, 1, t).unwrap(),
            &[0.2, 0.1, 0.05, 0.025],
        )
        .unwrap();
        assert!((1.7..=2.5).contains(&fit.slope), "slope {}", fit.slope);
    }

    #[test]
    fn two_pulse_ratio_stabilizes() {
        let (c, z) = random_pair(4, 4);
        let ratios: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&t| yangliu_deviation(&c, &z, 2, t).unwrap() / t.powi(3))
            .collect();
        let (a, b) = (ratios[2], ratios[3]);
        assert!((a - b).abs() / b < 0.25, "{ratios:?}");
    }

    #[test]
    fn interaction_picture_limits() {
        let (c, _) = random_pair(2, 5);
        assert!(interaction_picture_check(&c, &Operator::zeros(2), 2, 1.0, 1000).unwrap() < 1e-11);
        let (_, z) = random_pair(2, 6);
        assert!(interaction_picture_check(&Operator::zeros(2), &z, 2, 1.0, 1000).unwrap() < 1e-10);
        assert!(interaction_picture_check(&c, &z, 2, 1.0, 999).is_err());
    }

    #[test]
    fn interaction_picture_first_order_convergence() {
        let (c, z) = random_pair(2, 7);
        let coarse = interaction_picture_check(&c, &z, 2, 1.0, 1000).unwrap();
        let fine = interaction_picture_check(&c, &z, 2, 1.0, 10_000).unwrap();
        let ratio = coarse / fine;
        assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn periodic_three_pulses_fit_lower_exponent() {
        for seed in 0..3 {
            let (c, z) = random_pair(4, seed);
            let grid = default_grid();
            let udd = scaling_slope(|t| yangliu_deviation(&c, &z, 3, t).unwrap(), &grid).unwrap();
            let per = scaling_slope(
                |t| deviation_for_schedule(&c, &z, &periodic_times(3, t).unwrap()).unwrap(),
                &grid,
            )
            .unwrap();
            assert!(
                per.slope < udd.slope,
                "seed {seed}: {} vs {}",
                per.slope,
                udd.slope
            );
        }
    }
}
