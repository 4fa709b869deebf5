//! Sine-load users and their phase-shift decision.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::time::{advance, HOURS_PER_DAY, MINUTES_PER_DAY, MINUTES_PER_HOUR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineConsumer {
    /// MW.
    pub mean_load: f64,
    /// MW, below `mean_load`.
    pub amplitude: f64,
    /// Hours.
    pub base_phase: f64,
    pub flexible: bool,
    /// Today's shift in hours; 0 for inflexible users.
    pub chosen_shift: usize,
}

impl SineConsumer {
    /// Noise-free minute curve (MW) at zero shift.
    pub fn base_curve(&self) -> Vec<f64> {
        let phase = TAU * self.base_phase / HOURS_PER_DAY as f64;
        (0..MINUTES_PER_DAY)
            .map(|m| {
                self.mean_load
                    + self.amplitude * (TAU * m as f64 / MINUTES_PER_DAY as f64 + phase).sin()
            })
            .collect()
    }

    /// Noise-free minute curve for a shift of `shift` hours: the zero-shift
    /// curve advanced by `60 * shift` minutes.
    pub fn curve(&self, shift: usize) -> Vec<f64> {
        advance(&self.base_curve(), shift * MINUTES_PER_HOUR)
    }
}

/// Shift `s` in `0..24` minimizing `sum_h u((h + s) mod 24) * p(h)` over
/// mean-centred usage and prices. Ties (up to rounding) go to the smallest
/// shift.
pub fn optimal_phase_shift(usage: &[f64; HOURS_PER_DAY], prices: &[f64; HOURS_PER_DAY]) -> usize {
    let centre = |x: &[f64; HOURS_PER_DAY]| {
        let mean = x.iter().sum::<f64>() / HOURS_PER_DAY as f64;
        x.map(|v| v - mean)
    };
    let u = centre(usage);
    let p = centre(prices);
    let correlation: Vec<f64> = (0..HOURS_PER_DAY)
        .map(|s| {
            (0..HOURS_PER_DAY)
                .map(|h| u[(h + s) % HOURS_PER_DAY] * p[h])
                .sum()
        })
        .collect();
    let scale: f64 =
        u.iter().map(|v| v.abs()).sum::<f64>() * p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = 1e-12 * scale;
    let min = correlation.iter().copied().fold(f64::INFINITY, f64::min);
    correlation
        .iter()
        .position(|&c| c <= min + tolerance)
        .unwrap_or(0)
}

/// Multiplies every minute by `1 + sigma * z`, `z` standard normal,
/// floored at zero. `sigma == 0` draws nothing.
pub fn apply_noise<R: Rng + ?Sized>(curve: &mut [f64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for v in curve.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v *= (1.0 + sigma * z).max(0.0);
    }
}

/// Realized minute demand (MW) of a sine user for today's shift.
pub fn realize_minute_demand<R: Rng + ?Sized>(
    consumer: &SineConsumer,
    shift: usize,
    sigma: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut curve = consumer.curve(shift);
    apply_noise(&mut curve, sigma, rng);
    curve
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::hourly_energy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn user(amplitude: f64) -> SineConsumer {
        SineConsumer {
            mean_load: 10.0,
            amplitude,
            base_phase: 12.0,
            flexible: true,
            chosen_shift: 0,
        }
    }

    #[test]
    fn flat_user_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = realize_minute_demand(&user(0.0), 7, 0.0, &mut rng);
        assert!(c.iter().all(|&v| v == 10.0));
    }

    #[test]
    fn shift_rotates_by_hours() {
        let u = user(2.0);
        let base = u.curve(0);
        let shifted = u.curve(5);
        for m in 0..MINUTES_PER_DAY {
            assert_eq!(shifted[m], base[(m + 300) % MINUTES_PER_DAY]);
        }
    }

    #[test]
    fn daily_energy_is_shift_invariant() {
        let u = user(3.0);
        for s in 0..HOURS_PER_DAY {
            let e: f64 = u.curve(s).iter().sum::<f64>() / 60.0;
            assert!((e - 240.0).abs() <= 1e-9 * 240.0, "shift {s}: {e}");
        }
    }

    #[test]
    fn peak_at_six_pm() {
        let c = user(1.0).base_curve();
        let peak = (0..MINUTES_PER_DAY)
            .max_by(|&a, &b| c[a].total_cmp(&c[b]))
            .unwrap();
        assert_eq!(peak, 18 * 60);
    }

    #[test]
    fn constant_prices_pick_zero() {
        let usage = hourly_energy(&user(1.0).base_curve());
        assert_eq!(optimal_phase_shift(&usage, &[0.1; HOURS_PER_DAY]), 0);
        assert_eq!(optimal_phase_shift(&usage, &[37.0; HOURS_PER_DAY]), 0);
    }

    #[test]
    fn same_sinusoid_goes_anti_phase() {
        let usage: [f64; HOURS_PER_DAY] =
            std::array::from_fn(|h| 5.0 + (TAU * h as f64 / 24.0).sin());
        let prices: [f64; HOURS_PER_DAY] =
            std::array::from_fn(|h| 40.0 + 10.0 * (TAU * h as f64 / 24.0).sin());
        assert_eq!(optimal_phase_shift(&usage, &prices), 12);
    }

    #[test]
    fn noise_changes_values_reproducibly() {
        let u = user(1.0);
        let a = realize_minute_demand(&u, 0, 0.01, &mut ChaCha8Rng::seed_from_u64(3));
        let b = realize_minute_demand(&u, 0, 0.01, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert_ne!(a, u.base_curve());
    }
}
