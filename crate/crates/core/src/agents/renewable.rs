//! Intermittent producer: random production windows with a per-window
//! forecast error.

use std::f64::consts::PI;

use rand::{Rng, RngExt};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::scenario::RenewableConfig;
use crate::time::{MINUTES_PER_DAY, MINUTES_PER_HOUR};

/// Forecast and realized output (MW per minute) of one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewableDay {
    pub forecast: Vec<f64>,
    pub realized: Vec<f64>,
}

impl RenewableDay {
    pub fn none() -> Self {
        Self {
            forecast: vec![0.0; MINUTES_PER_DAY],
            realized: vec![0.0; MINUTES_PER_DAY],
        }
    }
}

pub fn generate_renewable_day<R: Rng + ?Sized>(
    config: &RenewableConfig,
    rng: &mut R,
) -> RenewableDay {
    let peak = config.peak_capacity;
    let mut forecast = vec![0.0; MINUTES_PER_DAY];
    let mut realized = vec![0.0; MINUTES_PER_DAY];
    let windows = rng.random_range(1..=config.max_windows);
    let error = Normal::new(0.0, config.forecast_error_sigma).expect("sigma validated");
    for _ in 0..windows {
        let hours = rng.random_range(config.min_duration_hours..=config.max_duration_hours);
        let duration =
            ((hours * MINUTES_PER_HOUR as f64).round() as usize).clamp(1, MINUTES_PER_DAY);
        let start = rng.random_range(0..=MINUTES_PER_DAY - duration);
        let amplitude = peak * rng.random_range(0.25..=1.0);
        let eta: f64 = if config.forecast_error_sigma > 0.0 {
            error.sample(rng)
        } else {
            0.0
        };
        for k in 0..duration {
            let shape = amplitude * (PI * (k as f64 + 0.5) / duration as f64).sin().powi(2);
            forecast[start + k] += shape;
            realized[start + k] += shape * (1.0 + eta);
        }
    }
    for v in forecast.iter_mut().chain(realized.iter_mut()) {
        *v = v.clamp(0.0, peak);
    }
    RenewableDay { forecast, realized }
}
