//! Appliance fleet: a two-peak base-load agent per utility plus
//! once-a-day appliances, some of which chase the cheapest hour.

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::scenario::Regime;
use crate::time::{hourly_energy, HOURS_PER_DAY, MINUTES_PER_DAY, MINUTES_PER_HOUR};

/// Inflexible base load following a morning and an evening peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseLoadAgent {
    /// MW.
    pub peak: f64,
    /// (max - min) / max.
    pub peak_to_peak: f64,
    pub morning_peak_hour: f64,
    pub evening_peak_hour: f64,
}

impl BaseLoadAgent {
    pub fn curve(&self) -> Vec<f64> {
        let bump = |t: f64, centre: f64, width: f64| {
            let mut d = (t - centre).abs();
            d = d.min(HOURS_PER_DAY as f64 - d);
            (-0.5 * (d / width).powi(2)).exp()
        };
        let shape: Vec<f64> = (0..MINUTES_PER_DAY)
            .map(|m| {
                let t = m as f64 / MINUTES_PER_HOUR as f64;
                0.75 * bump(t, self.morning_peak_hour, 2.0) + bump(t, self.evening_peak_hour, 2.5)
            })
            .collect();
        let lo = shape.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = shape.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let floor = self.peak * (1.0 - self.peak_to_peak);
        let swing = self.peak * self.peak_to_peak;
        shape
            .iter()
            .map(|s| floor + swing * (s - lo) / (hi - lo))
            .collect()
    }

    /// Start-hour weights of normal appliances, proportional to the hourly
    /// base load.
    pub fn start_weights(&self) -> [f64; HOURS_PER_DAY] {
        let hourly = hourly_energy(&self.curve());
        let total: f64 = hourly.iter().sum();
        hourly.map(|e| e / total)
    }
}

/// One appliance object standing for `multiplicity` identical devices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Appliance {
    pub power_kw: f64,
    pub duration_minutes: usize,
    pub optimizing: bool,
    pub multiplicity: f64,
}

impl Appliance {
    /// Aggregate draw of all represented devices, MW.
    pub fn power_mw(&self) -> f64 {
        self.power_kw * self.multiplicity / 1000.0
    }

    /// MWh per day, independent of when the devices run.
    pub fn daily_energy(&self) -> f64 {
        self.power_mw() * self.duration_minutes as f64 / MINUTES_PER_HOUR as f64
    }

    /// Minute curve (MW) for a run starting at `start_minute`; runs past
    /// midnight wrap into the same day.
    pub fn curve_from(&self, start_minute: usize) -> Vec<f64> {
        let mut out = vec![0.0; MINUTES_PER_DAY];
        let p = self.power_mw();
        for k in 0..self.duration_minutes {
            out[(start_minute + k) % MINUTES_PER_DAY] = p;
        }
        out
    }

    /// Expected curve when the start is drawn from `weights` (per hour,
    /// uniform minute within the hour).
    pub fn expected_curve(&self, weights: &[f64; HOURS_PER_DAY]) -> Vec<f64> {
        let mut start_prob = vec![0.0; MINUTES_PER_DAY];
        for (m, p) in start_prob.iter_mut().enumerate() {
            *p = weights[m / MINUTES_PER_HOUR] / MINUTES_PER_HOUR as f64;
        }
        let power = self.power_mw();
        let mut out = vec![0.0; MINUTES_PER_DAY];
        for (start, &p) in start_prob.iter().enumerate() {
            for k in 0..self.duration_minutes {
                out[(start + k) % MINUTES_PER_DAY] += p * power;
            }
        }
        out
    }
}

/// Earliest hour with the lowest price.
pub fn cheapest_hour(prices: &[f64; HOURS_PER_DAY]) -> usize {
    let mut best = 0;
    for h in 1..HOURS_PER_DAY {
        if prices[h] < prices[best] {
            best = h;
        }
    }
    best
}

/// Start minute of every appliance for one day.
///
/// Normal appliances draw a start hour from `weights` and a uniform
/// minute within it. Optimizing appliances start at the top of the
/// cheapest hour under real-time pricing, and at the market-selected
/// `integrated_start_hour` otherwise.
pub fn schedule_appliances<R: Rng + ?Sized>(
    fleet: &[Appliance],
    prices: &[f64; HOURS_PER_DAY],
    regime: Regime,
    integrated_start_hour: Option<usize>,
    weights: &[f64; HOURS_PER_DAY],
    rng: &mut R,
) -> Vec<usize> {
    let optimizing_hour = match regime {
        Regime::Rtp => cheapest_hour(prices),
        Regime::Integrated => integrated_start_hour.unwrap_or(0),
    };
    fleet
        .iter()
        .map(|a| {
            if a.optimizing {
                optimizing_hour * MINUTES_PER_HOUR
            } else {
                draw_start_minute(weights, rng)
            }
        })
        .collect()
}

fn draw_start_minute<R: Rng + ?Sized>(weights: &[f64; HOURS_PER_DAY], rng: &mut R) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    let mut hour = HOURS_PER_DAY - 1;
    for (h, w) in weights.iter().enumerate() {
        acc += w;
        if x < acc {
            hour = h;
            break;
        }
    }
    hour * MINUTES_PER_HOUR + rng.random_range(0..MINUTES_PER_HOUR)
}

/// Advance (in hours) that moves a run starting at midnight to start at
/// `hour`.
pub fn shift_for_start_hour(hour: usize) -> usize {
    (HOURS_PER_DAY - hour % HOURS_PER_DAY) % HOURS_PER_DAY
}

pub fn start_hour_for_shift(shift: usize) -> usize {
    shift_for_start_hour(shift)
}
