//! Utilities: user populations, EWMA demand forecasts and the profiles
//! they bid into the day-ahead market.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::appliance::{Appliance, BaseLoadAgent};
use super::consumer::{apply_noise, SineConsumer};
use crate::scenario::Regime;
use crate::time::{
    advance, advance_hours, delay, hourly_energy, HOURS_PER_DAY, MINUTES_PER_DAY, MINUTES_PER_HOUR,
};

/// What a user physically is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Load {
    Sine(SineConsumer),
    BaseLoad(BaseLoadAgent),
    Appliance(Appliance),
}

#[derive(Debug, Clone, PartialEq)]
pub struct User {
    pub id: usize,
    pub load: Load,
    /// Noise-free curve (MW) at zero offset.
    base: Vec<f64>,
    /// Expected curve at zero offset; differs from `base` only for
    /// appliances with a random daily start.
    expected: Vec<f64>,
    /// Today's placement: realized minute `m` reads `base[m + offset]`.
    offset_minutes: usize,
}

impl User {
    pub fn sine(id: usize, consumer: SineConsumer) -> Self {
        let base = consumer.base_curve();
        Self {
            id,
            expected: base.clone(),
            base,
            load: Load::Sine(consumer),
            offset_minutes: 0,
        }
    }

    pub fn base_load(id: usize, agent: BaseLoadAgent) -> Self {
        let base = agent.curve();
        Self {
            id,
            expected: base.clone(),
            base,
            load: Load::BaseLoad(agent),
            offset_minutes: 0,
        }
    }

    /// `start_weights` describes the random daily start of normal
    /// appliances; optimizing ones are placed by the market or by price.
    pub fn appliance(
        id: usize,
        appliance: Appliance,
        start_weights: &[f64; HOURS_PER_DAY],
    ) -> Self {
        let base = appliance.curve_from(0);
        let expected = if appliance.optimizing {
            base.clone()
        } else {
            appliance.expected_curve(start_weights)
        };
        Self {
            id,
            base,
            expected,
            load: Load::Appliance(appliance),
            offset_minutes: 0,
        }
    }

    pub fn flexible(&self) -> bool {
        match &self.load {
            Load::Sine(c) => c.flexible,
            Load::BaseLoad(_) => false,
            Load::Appliance(a) => a.optimizing,
        }
    }

    /// Noise-free hourly usage at zero shift, MWh.
    pub fn nominal_usage(&self) -> [f64; HOURS_PER_DAY] {
        hourly_energy(&self.base)
    }

    pub fn expected_curve(&self) -> &[f64] {
        &self.expected
    }

    /// Places today's curve `shift` hours ahead (see [`crate::time::advance`]).
    pub fn set_shift(&mut self, shift: usize) {
        self.offset_minutes = (shift % HOURS_PER_DAY) * MINUTES_PER_HOUR;
        if let Load::Sine(c) = &mut self.load {
            c.chosen_shift = shift % HOURS_PER_DAY;
        }
    }

    /// Places today's run to start at `start_minute`.
    pub fn set_start_minute(&mut self, start_minute: usize) {
        self.offset_minutes = (MINUTES_PER_DAY - start_minute % MINUTES_PER_DAY) % MINUTES_PER_DAY;
    }

    pub fn offset_minutes(&self) -> usize {
        self.offset_minutes
    }

    pub fn reset_day(&mut self) {
        self.set_shift(0);
    }

    /// Today's realized minute curve, MW.
    pub fn realize<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Vec<f64> {
        let mut curve = advance(&self.base, self.offset_minutes);
        apply_noise(&mut curve, sigma, rng);
        curve
    }
}

/// `f <- alpha * realized + (1 - alpha) * f`, element-wise. Written as
/// `f + alpha * (realized - f)` so a perfect forecast stays bit-identical.
pub fn ewma_update(forecast: &mut [f64], realized: &[f64], alpha: f64) {
    for (f, r) in forecast.iter_mut().zip(realized) {
        *f += alpha * (r - *f);
    }
}

/// Next hourly forecast from yesterday's realization.
pub fn ewma_forecast(
    realized: &[f64; HOURS_PER_DAY],
    previous: &[f64; HOURS_PER_DAY],
    alpha: f64,
) -> [f64; HOURS_PER_DAY] {
    let mut next = *previous;
    ewma_update(&mut next, realized, alpha);
    next
}

/// One profile per shift: the inflexible forecast plus the flexible one
/// advanced by that shift.
pub fn exg_profiles(
    inflexible: &[f64; HOURS_PER_DAY],
    flexible: &[f64; HOURS_PER_DAY],
    shifts: &[usize],
) -> Vec<[f64; HOURS_PER_DAY]> {
    shifts
        .iter()
        .map(|&s| {
            let moved = advance_hours(flexible, s);
            std::array::from_fn(|h| inflexible[h] + moved[h])
        })
        .collect()
}

/// Exclusive-group profiles of a utility from its current forecasts.
pub fn generate_exg_profiles(utility: &Utility) -> Vec<[f64; HOURS_PER_DAY]> {
    utility.bid(Regime::Integrated).profiles
}

/// Profiles a utility bids for one day together with the shift behind
/// each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityBid {
    pub profiles: Vec<[f64; HOURS_PER_DAY]>,
    pub shifts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Utility {
    pub id: usize,
    pub name: String,
    pub alpha: f64,
    /// Candidate shifts for exclusive-group bids; starts with 0.
    pub shifts: Vec<usize>,
    pub users: Vec<User>,
    /// Minute forecasts, MW. `flexible` is kept at zero shift.
    forecast_total: Vec<f64>,
    forecast_inflexible: Vec<f64>,
    forecast_flexible: Vec<f64>,
}

impl Utility {
    /// Forecasts start from the users' expected zero-shift curves.
    pub fn new(id: usize, name: String, alpha: f64, shifts: Vec<usize>, users: Vec<User>) -> Self {
        let mut inflexible = vec![0.0; MINUTES_PER_DAY];
        let mut flexible = vec![0.0; MINUTES_PER_DAY];
        for u in &users {
            let target = if u.flexible() {
                &mut flexible
            } else {
                &mut inflexible
            };
            for (t, v) in target.iter_mut().zip(u.expected_curve()) {
                *t += v;
            }
        }
        let total = inflexible
            .iter()
            .zip(&flexible)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            id,
            name,
            alpha,
            shifts,
            users,
            forecast_total: total,
            forecast_inflexible: inflexible,
            forecast_flexible: flexible,
        }
    }

    pub fn has_flexible(&self) -> bool {
        self.users.iter().any(User::flexible)
    }

    pub fn forecast_total(&self) -> &[f64] {
        &self.forecast_total
    }

    pub fn forecast_inflexible(&self) -> &[f64] {
        &self.forecast_inflexible
    }

    pub fn forecast_flexible(&self) -> &[f64] {
        &self.forecast_flexible
    }

    /// A single forecast profile under real-time pricing (or without
    /// flexible users); one profile per candidate shift otherwise.
    pub fn bid(&self, regime: Regime) -> UtilityBid {
        if regime == Regime::Rtp {
            return UtilityBid {
                profiles: vec![hourly_energy(&self.forecast_total)],
                shifts: vec![0],
            };
        }
        let inflexible = hourly_energy(&self.forecast_inflexible);
        if !self.has_flexible() {
            return UtilityBid {
                profiles: vec![inflexible],
                shifts: vec![0],
            };
        }
        let flexible = hourly_energy(&self.forecast_flexible);
        UtilityBid {
            profiles: exg_profiles(&inflexible, &flexible, &self.shifts),
            shifts: self.shifts.clone(),
        }
    }

    /// Minute shape (MW) behind the profile bid for `shift`; its hourly
    /// energy equals the bid profile.
    pub fn planned_curve(&self, regime: Regime, shift: usize) -> Vec<f64> {
        if regime == Regime::Rtp {
            return self.forecast_total.clone();
        }
        let moved = advance(&self.forecast_flexible, shift * MINUTES_PER_HOUR);
        self.forecast_inflexible
            .iter()
            .zip(&moved)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Folds one realized day into the forecasts. `flexible_at_zero` is the
    /// flexible users' realized demand moved back to zero shift.
    pub fn update_forecasts(
        &mut self,
        total: &[f64],
        inflexible: &[f64],
        flexible_at_zero: &[f64],
    ) {
        ewma_update(&mut self.forecast_total, total, self.alpha);
        ewma_update(&mut self.forecast_inflexible, inflexible, self.alpha);
        ewma_update(&mut self.forecast_flexible, flexible_at_zero, self.alpha);
    }

    pub fn reset_day(&mut self) {
        for u in &mut self.users {
            u.reset_day();
        }
    }
}

/// Realized curve of a user moved back to zero shift.
pub fn undo_offset(curve: &[f64], offset_minutes: usize) -> Vec<f64> {
    delay(curve, offset_minutes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_user(id: usize, flexible: bool) -> User {
        User::sine(
            id,
            SineConsumer {
                mean_load: 10.0,
                amplitude: 2.0,
                base_phase: 12.0,
                flexible,
                chosen_shift: 0,
            },
        )
    }

    #[test]
    fn constant_history_is_a_fixed_point() {
        let f = ewma_forecast(&[100.0; HOURS_PER_DAY], &[100.0; HOURS_PER_DAY], 0.3);
        assert_eq!(f, [100.0; HOURS_PER_DAY]);
    }

    #[test]
    fn alpha_one_copies_realization() {
        let realized: [f64; HOURS_PER_DAY] = std::array::from_fn(|h| h as f64);
        assert_eq!(
            ewma_forecast(&realized, &[5.0; HOURS_PER_DAY], 1.0),
            realized
        );
    }

    #[test]
    fn half_weight_update() {
        let f = ewma_forecast(&[120.0; HOURS_PER_DAY], &[80.0; HOURS_PER_DAY], 0.5);
        assert_eq!(f, [100.0; HOURS_PER_DAY]);
    }

    #[test]
    fn no_flexible_users_single_profile() {
        let u = Utility::new(
            0,
            "u".into(),
            0.3,
            vec![0, 6, 12, 18],
            (0..3).map(|i| sine_user(i, false)).collect(),
        );
        let bid = u.bid(Regime::Integrated);
        assert_eq!(bid.profiles.len(), 1);
        assert_eq!(bid.shifts, vec![0]);
    }

    #[test]
    fn exg_profiles_conserve_energy() {
        let users = (0..4).map(|i| sine_user(i, i % 2 == 0)).collect();
        let u = Utility::new(0, "u".into(), 0.3, vec![0, 6, 12, 18], users);
        let bid = u.bid(Regime::Integrated);
        assert_eq!(bid.profiles.len(), 4);
        let sums: Vec<f64> = bid.profiles.iter().map(|p| p.iter().sum()).collect();
        for s in &sums {
            assert!((s - sums[0]).abs() <= 1e-9 * sums[0]);
        }
        // hour-wise recomputation
        let inflex = hourly_energy(u.forecast_inflexible());
        let flex = hourly_energy(u.forecast_flexible());
        for (k, &s) in bid.shifts.iter().enumerate() {
            for h in 0..HOURS_PER_DAY {
                let expected = inflex[h] + flex[(h + s) % HOURS_PER_DAY];
                assert!((bid.profiles[k][h] - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn planned_curve_matches_bid() {
        let users = (0..4).map(|i| sine_user(i, i < 3)).collect();
        let u = Utility::new(0, "u".into(), 0.3, vec![0, 3, 9], users);
        let bid = u.bid(Regime::Integrated);
        for (k, &s) in bid.shifts.iter().enumerate() {
            let hourly = hourly_energy(&u.planned_curve(Regime::Integrated, s));
            for (got, want) in hourly.iter().zip(&bid.profiles[k]) {
                assert!((got - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn realization_matches_forecast_without_noise() {
        let users: Vec<User> = (0..3).map(|i| sine_user(i, false)).collect();
        let u = Utility::new(0, "u".into(), 0.3, vec![0], users);
        let mut rng = rand::rngs::SmallRng::seed_from_u64(0);
        let mut total = vec![0.0; MINUTES_PER_DAY];
        for user in &u.users {
            for (t, v) in total.iter_mut().zip(user.realize(0.0, &mut rng)) {
                *t += v;
            }
        }
        for (a, b) in total.iter().zip(u.forecast_total()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn start_minute_placement() {
        let mut u = User::appliance(
            0,
            Appliance {
                power_kw: 3.0,
                duration_minutes: 60,
                optimizing: false,
                multiplicity: 1000.0,
            },
            &[1.0 / 24.0; HOURS_PER_DAY],
        );
        u.set_start_minute(125);
        let mut rng = rand::rngs::SmallRng::seed_from_u64(0);
        let c = u.realize(0.0, &mut rng);
        assert_eq!(c[124], 0.0);
        assert_eq!(c[125], 3.0);
        assert_eq!(c[184], 3.0);
        assert_eq!(c[185], 0.0);
        assert_eq!(undo_offset(&c, u.offset_minutes())[0], 3.0);
    }

    use rand::SeedableRng;
}
