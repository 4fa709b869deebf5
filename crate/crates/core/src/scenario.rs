//! Scenario description: market participants, regime and run knobs.
//!
//! Every field has a default so that a scenario file only needs to name
//! what it changes. [`Scenario::validate`] reports the first offending key
//! by its path in the file.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::HOURS_PER_DAY;
use crate::PRICE_CAP;

/// How flexible demand reaches the market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Flexible users react individually to published day-ahead prices.
    Rtp,
    /// Utilities bid flexibility as exclusive groups and follow the
    /// profile the market selects.
    #[serde(alias = "exg")]
    Integrated,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Rtp => "rtp",
            Regime::Integrated => "exg",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rtp" => Ok(Regime::Rtp),
            "exg" | "integrated" => Ok(Regime::Integrated),
            other => Err(Error::validation(
                "regime",
                format!("expected 'rtp' or 'exg', got '{other}'"),
            )),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub initial_temp: f64,
    pub iterations: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_temp: 1000.0,
            iterations: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalancingConfig {
    /// Dead-band per 15-minute slot, MWh.
    pub activation_limit: f64,
    /// Offers consumed in one slot are available again in the next.
    pub restore_books_each_slot: bool,
    /// Capacity of the plant terminating the up-regulation book, MW.
    pub buffer_capacity: f64,
    pub buffer_price: f64,
}

impl Default for BalancingConfig {
    fn default() -> Self {
        Self {
            activation_limit: 10.0,
            restore_books_each_slot: true,
            buffer_capacity: 1000.0,
            buffer_price: PRICE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Relative standard deviation of the per-user, per-minute
    /// multiplicative demand noise.
    pub relative_sigma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            relative_sigma: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProducerConfig {
    pub name: String,
    /// MW.
    pub capacity: f64,
    /// EUR/MWh.
    pub marginal_cost: f64,
    /// Only dispatched hours may offer balancing.
    pub min_run_required: bool,
    /// Share of capacity available for regulation in either direction.
    pub regulation_factor: f64,
    /// Up offers at `cost * (1 + markup)`, down offers at `cost * (1 - markup)`.
    pub balancing_markup: f64,
}

impl Default for ProducerConfig {
    fn default() -> Self {
        Self {
            name: String::new(),
            capacity: 0.0,
            marginal_cost: 0.0,
            min_run_required: false,
            regulation_factor: 0.0,
            balancing_markup: 0.15,
        }
    }
}

/// Relative spread of per-user parameters within a utility. Each user
/// draws `x * (1 + spread * u)` with `u` uniform in [-1, 1]; phase spread
/// is absolute, in hours.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub mean_load: f64,
    pub amplitude: f64,
    pub base_phase_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UtilityConfig {
    pub name: String,
    /// Number of sine users (each a user-equivalent aggregate).
    pub users: usize,
    /// Mean load per user, MW.
    pub mean_load: f64,
    /// Sine amplitude per user, MW.
    pub amplitude: f64,
    /// Phase offset in hours; 12 puts the daily peak at 18:00.
    pub base_phase: f64,
    /// EWMA weight of the newest day.
    pub alpha: f64,
    /// Candidate shifts (hours) bid as exclusive-group profiles.
    pub exg_shifts: Vec<usize>,
    pub dispersion: DispersionConfig,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        // 10 x 100 of these peak at 12.6 GW with a 14 % peak-to-peak swing.
        Self {
            name: String::new(),
            users: 100,
            mean_load: 11.718,
            amplitude: 0.882,
            base_phase: 12.0,
            alpha: 0.3,
            exg_shifts: (0..8).map(|k| 3 * k).collect(),
            dispersion: DispersionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenewableConfig {
    /// MW.
    pub peak_capacity: f64,
    /// Relative standard deviation of the realized-vs-forecast error,
    /// drawn once per production window.
    pub forecast_error_sigma: f64,
    pub max_windows: usize,
    pub min_duration_hours: f64,
    pub max_duration_hours: f64,
}

impl Default for RenewableConfig {
    fn default() -> Self {
        Self {
            peak_capacity: 2000.0,
            forecast_error_sigma: 0.1,
            max_windows: 2,
            min_duration_hours: 2.0,
            max_duration_hours: 10.0,
        }
    }
}

/// Appliance-fleet variant of the demand side: every utility has one
/// two-peak base-load agent plus equal numbers of normal and optimizing
/// appliance objects. `flexible_ratio` is the optimizing share of the
/// fleet's devices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApplianceConfig {
    /// Devices represented by the whole fleet (all utilities).
    pub total_devices: f64,
    /// kW per device.
    pub power_kw: f64,
    /// Relative per-object spread of device power.
    pub power_spread: f64,
    pub duration_minutes: usize,
    /// Absolute per-object spread of run duration, minutes.
    pub duration_spread_minutes: usize,
    /// Appliance objects per group (normal / optimizing) per utility.
    pub objects_per_group: usize,
    /// System-wide peak of the base-load agents, MW.
    pub base_peak_mw: f64,
    /// (max - min) / max of the base-load curve.
    pub base_peak_to_peak: f64,
    pub morning_peak_hour: f64,
    pub evening_peak_hour: f64,
    /// Start hours offered as exclusive-group profiles.
    pub candidate_hours: Vec<usize>,
}

impl Default for ApplianceConfig {
    fn default() -> Self {
        Self {
            total_devices: 250_000.0,
            power_kw: 3.0,
            power_spread: 0.1,
            duration_minutes: 60,
            duration_spread_minutes: 10,
            objects_per_group: 24,
            base_peak_mw: 12_000.0,
            base_peak_to_peak: 0.14,
            morning_peak_hour: 8.0,
            evening_peak_hour: 19.0,
            candidate_hours: (0..HOURS_PER_DAY).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    /// Simulated days, warm-up included.
    pub n_days: usize,
    /// Leading days excluded from cost metrics.
    pub warmup_days: usize,
    pub regime: Regime,
    pub flexible_ratio: f64,
    pub seed: u64,
    pub anneal: AnnealConfig,
    pub balancing: BalancingConfig,
    pub noise: NoiseConfig,
    pub renewable: Option<RenewableConfig>,
    pub appliance_mode: Option<ApplianceConfig>,
    pub producers: Vec<ProducerConfig>,
    pub utilities: Vec<UtilityConfig>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n_days: 35,
            warmup_days: 5,
            regime: Regime::Rtp,
            flexible_ratio: 0.0,
            seed: 42,
            anneal: AnnealConfig::default(),
            balancing: BalancingConfig::default(),
            noise: NoiseConfig::default(),
            renewable: None,
            appliance_mode: None,
            producers: Vec::new(),
            utilities: Vec::new(),
        }
    }
}

fn producer(
    name: &str,
    capacity: f64,
    marginal_cost: f64,
    min_run_required: bool,
    regulation_factor: f64,
    balancing_markup: f64,
) -> ProducerConfig {
    ProducerConfig {
        name: name.to_string(),
        capacity,
        marginal_cost,
        min_run_required,
        regulation_factor,
        balancing_markup,
    }
}

/// Merit order of the desk-scale system, 14.4 GW before the buffer plant.
pub fn default_producers() -> Vec<ProducerConfig> {
    vec![
        producer("nuclear", 2800.0, 6.0, true, 0.05, 0.15),
        producer("hydro", 3200.0, 12.0, false, 0.5, 0.15),
        producer("chp_district", 2500.0, 22.0, true, 0.1, 0.15),
        producer("imports", 1500.0, 28.0, false, 0.1, 0.15),
        producer("coal", 1000.0, 33.0, false, 0.15, 0.15),
        producer("chp_industry", 600.0, 36.0, true, 0.1, 0.15),
        producer("ccgt_baseload", 600.0, 41.0, false, 0.2, 0.15),
        producer("ccgt", 500.0, 55.0, false, 0.3, 0.15),
        producer("gas_peaker", 600.0, 90.0, false, 0.5, 0.2),
        producer("oil_condensing", 500.0, 160.0, false, 0.5, 0.2),
        producer("tso_reserve", 600.0, 400.0, false, 1.0, 0.0),
    ]
}

impl Scenario {
    /// Ten utilities of 100 user-equivalents each on the default merit
    /// order.
    pub fn desk() -> Self {
        Self {
            producers: default_producers(),
            utilities: (0..10)
                .map(|i| UtilityConfig {
                    name: format!("utility_{i}"),
                    ..UtilityConfig::default()
                })
                .collect(),
            ..Self::default()
        }
    }

    /// The desk system with the appliance fleet replacing the sine users.
    pub fn desk_appliances() -> Self {
        Self {
            appliance_mode: Some(ApplianceConfig::default()),
            flexible_ratio: 1.0,
            ..Self::desk()
        }
    }

    pub fn measured_days(&self) -> usize {
        self.n_days.saturating_sub(self.warmup_days)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_days < 1 {
            return Err(Error::validation("n_days", "must be at least 1"));
        }
        check_fraction("flexible_ratio", self.flexible_ratio)?;
        if !(self.anneal.initial_temp.is_finite() && self.anneal.initial_temp > 0.0) {
            return Err(Error::validation("anneal.initial_temp", "must be > 0"));
        }
        if self.anneal.iterations < 1 {
            return Err(Error::validation("anneal.iterations", "must be at least 1"));
        }
        let b = &self.balancing;
        check_non_negative("balancing.activation_limit", b.activation_limit)?;
        check_positive("balancing.buffer_capacity", b.buffer_capacity)?;
        check_price("balancing.buffer_price", b.buffer_price)?;
        check_non_negative("noise.relative_sigma", self.noise.relative_sigma)?;

        if self.producers.is_empty() {
            return Err(Error::validation(
                "producers",
                "at least one producer is required",
            ));
        }
        for (i, p) in self.producers.iter().enumerate() {
            let key = |field: &str| format!("producers[{i}].{field}");
            check_positive(&key("capacity"), p.capacity)?;
            check_price(&key("marginal_cost"), p.marginal_cost)?;
            check_fraction(&key("regulation_factor"), p.regulation_factor)?;
            check_non_negative(&key("balancing_markup"), p.balancing_markup)?;
        }

        if self.utilities.is_empty() {
            return Err(Error::validation(
                "utilities",
                "at least one utility is required",
            ));
        }
        for (i, u) in self.utilities.iter().enumerate() {
            let key = |field: &str| format!("utilities[{i}].{field}");
            if self.appliance_mode.is_none() && u.users == 0 {
                return Err(Error::validation(key("users"), "must be at least 1"));
            }
            check_positive(&key("mean_load"), u.mean_load)?;
            check_non_negative(&key("amplitude"), u.amplitude)?;
            let d = &u.dispersion;
            check_fraction(&key("dispersion.mean_load"), d.mean_load)?;
            check_fraction(&key("dispersion.amplitude"), d.amplitude)?;
            check_non_negative(&key("dispersion.base_phase_hours"), d.base_phase_hours)?;
            // the lowest possible amplitude must stay below the lowest mean
            let max_amp = u.amplitude * (1.0 + d.amplitude);
            let min_mean = u.mean_load * (1.0 - d.mean_load);
            if max_amp >= min_mean {
                return Err(Error::validation(
                    key("amplitude"),
                    "must stay below mean_load so that load is never negative",
                ));
            }
            if !u.base_phase.is_finite() {
                return Err(Error::validation(key("base_phase"), "must be finite"));
            }
            if !(u.alpha > 0.0 && u.alpha <= 1.0) {
                return Err(Error::validation(key("alpha"), "must be in (0, 1]"));
            }
            check_shift_set(&key("exg_shifts"), &u.exg_shifts)?;
        }

        if let Some(r) = &self.renewable {
            check_positive("renewable.peak_capacity", r.peak_capacity)?;
            check_non_negative("renewable.forecast_error_sigma", r.forecast_error_sigma)?;
            if r.max_windows < 1 {
                return Err(Error::validation(
                    "renewable.max_windows",
                    "must be at least 1",
                ));
            }
            check_positive("renewable.min_duration_hours", r.min_duration_hours)?;
            if !(r.max_duration_hours >= r.min_duration_hours && r.max_duration_hours <= 24.0) {
                return Err(Error::validation(
                    "renewable.max_duration_hours",
                    "must be within [min_duration_hours, 24]",
                ));
            }
        }

        if let Some(a) = &self.appliance_mode {
            check_positive("appliance_mode.total_devices", a.total_devices)?;
            check_positive("appliance_mode.power_kw", a.power_kw)?;
            check_fraction("appliance_mode.power_spread", a.power_spread)?;
            if a.power_spread >= 1.0 {
                return Err(Error::validation(
                    "appliance_mode.power_spread",
                    "must be < 1",
                ));
            }
            if a.duration_minutes == 0 || a.duration_minutes > 6 * 60 {
                return Err(Error::validation(
                    "appliance_mode.duration_minutes",
                    "must be within 1..=360",
                ));
            }
            if a.duration_spread_minutes >= a.duration_minutes {
                return Err(Error::validation(
                    "appliance_mode.duration_spread_minutes",
                    "must be below duration_minutes",
                ));
            }
            if a.objects_per_group < 1 {
                return Err(Error::validation(
                    "appliance_mode.objects_per_group",
                    "must be at least 1",
                ));
            }
            check_positive("appliance_mode.base_peak_mw", a.base_peak_mw)?;
            check_fraction("appliance_mode.base_peak_to_peak", a.base_peak_to_peak)?;
            for (key, hour) in [
                ("appliance_mode.morning_peak_hour", a.morning_peak_hour),
                ("appliance_mode.evening_peak_hour", a.evening_peak_hour),
            ] {
                if !(0.0..24.0).contains(&hour) {
                    return Err(Error::validation(key, "must be within [0, 24)"));
                }
            }
            check_shift_set("appliance_mode.candidate_hours", &a.candidate_hours)?;
        }
        Ok(())
    }
}

fn check_fraction(key: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(key, format!("{v} is outside [0, 1]")))
    }
}

fn check_non_negative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            key,
            format!("{v} must be finite and >= 0"),
        ))
    }
}

fn check_positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            key,
            format!("{v} must be finite and > 0"),
        ))
    }
}

fn check_price(key: &str, v: f64) -> Result<()> {
    if (0.0..=PRICE_CAP).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(
            key,
            format!("{v} is outside [0, {PRICE_CAP}]"),
        ))
    }
}

fn check_shift_set(key: &str, shifts: &[usize]) -> Result<()> {
    if shifts.is_empty() {
        return Err(Error::validation(key, "must not be empty"));
    }
    if shifts[0] != 0 {
        return Err(Error::validation(
            key,
            "must start with 0 (the unshifted profile)",
        ));
    }
    let mut seen = [false; HOURS_PER_DAY];
    for &s in shifts {
        if s >= HOURS_PER_DAY {
            return Err(Error::validation(
                key,
                format!("{s} is not an hour of the day"),
            ));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::validation(key, format!("{s} appears twice")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scenario_is_valid() {
        Scenario::desk().validate().unwrap();
        Scenario::desk_appliances().validate().unwrap();
    }

    #[test]
    fn desk_peak_matches_calibration() {
        let s = Scenario::desk();
        let mean: f64 = s
            .utilities
            .iter()
            .map(|u| u.users as f64 * u.mean_load)
            .sum();
        let amp: f64 = s
            .utilities
            .iter()
            .map(|u| u.users as f64 * u.amplitude)
            .sum();
        assert!((mean + amp - 12_600.0).abs() < 1e-6);
        assert!(((2.0 * amp) / (mean + amp) - 0.14).abs() < 1e-3);
    }

    #[test]
    fn out_of_range_ratio_names_the_key() {
        let s = Scenario {
            flexible_ratio: 1.4,
            ..Scenario::desk()
        };
        match s.validate() {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "flexible_ratio"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn producer_errors_carry_index() {
        let mut s = Scenario::desk();
        s.producers[3].capacity = -1.0;
        match s.validate() {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "producers[3].capacity"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shift_set_rules() {
        assert!(check_shift_set("k", &[0, 6, 12]).is_ok());
        assert!(check_shift_set("k", &[]).is_err());
        assert!(check_shift_set("k", &[3, 0]).is_err());
        assert!(check_shift_set("k", &[0, 24]).is_err());
        assert!(check_shift_set("k", &[0, 6, 6]).is_err());
    }

    #[test]
    fn regime_parsing() {
        assert_eq!("RTP".parse::<Regime>().unwrap(), Regime::Rtp);
        assert_eq!("exg".parse::<Regime>().unwrap(), Regime::Integrated);
        assert_eq!("integrated".parse::<Regime>().unwrap(), Regime::Integrated);
        assert!("spot".parse::<Regime>().is_err());
    }
}
