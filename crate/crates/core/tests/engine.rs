use flexmarket::agents::{optimal_phase_shift, Load};
use flexmarket::engine::Simulation;
use flexmarket::settlement::{Party, ZERO_SUM_TOLERANCE};
use flexmarket::time::{advance, hourly_energy, MINUTES_PER_HOUR};
use flexmarket::{run_simulation, Regime, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(regime: Regime, ratio: f64, days: usize) -> Scenario {
    let mut s = Scenario::desk();
    s.utilities.truncate(3);
    for u in &mut s.utilities {
        u.users = 20;
        // same system load as the desk scenario
        u.mean_load *= 1000.0 / 60.0;
        u.amplitude *= 1000.0 / 60.0;
    }
    s.n_days = days;
    s.warmup_days = 1;
    s.regime = regime;
    s.flexible_ratio = ratio;
    s.anneal.iterations = 300;
    s
}

fn null(regime: Regime) -> Scenario {
    let mut s = small(regime, 0.0, 1);
    s.warmup_days = 0;
    s.noise.relative_sigma = 0.0;
    s
}

#[test]
fn equal_seeds_give_identical_reports() {
    let s = small(Regime::Rtp, 0.4, 4);
    let a = serde_json::to_string(&run_simulation(&s, 9).unwrap()).unwrap();
    let b = serde_json::to_string(&run_simulation(&s, 9).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&run_simulation(&s, 10).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn seed_argument_overrides_scenario_seed() {
    let mut s = small(Regime::Integrated, 0.4, 3);
    let a = run_simulation(&s, 5).unwrap();
    s.seed = 1234;
    let b = run_simulation(&s, 5).unwrap();
    assert_eq!(a.days, b.days);
}

#[test]
fn one_day_null_has_no_balancing() {
    for regime in [Regime::Rtp, Regime::Integrated] {
        let r = run_simulation(&null(regime), 42).unwrap();
        assert_eq!(r.metrics.balancing_energy_mwh, 0.0);
        assert_eq!(r.metrics.balancing_cost_eur, 0.0);
        assert_eq!(r.metrics.costs.balancing, 0.0);
        assert_eq!(r.metrics.costs.combined, r.metrics.costs.usage);
    }
}

#[test]
fn null_cost_is_spot_times_demand() {
    let mut s = null(Regime::Rtp);
    s.n_days = 3;
    for d in run_simulation(&s, 42).unwrap().days {
        let billed: f64 = d
            .group_costs
            .iter()
            .map(|g| g.usage_eur + g.balancing_eur)
            .sum();
        let market: f64 = d
            .spot_prices
            .iter()
            .zip(&d.cleared_demand)
            .map(|(p, q)| p * q)
            .sum();
        assert!(
            (billed - market).abs() <= 1e-9 * market,
            "{billed} vs {market}"
        );
    }
}

#[test]
fn forecasts_move_only_when_realization_differs() {
    let mut quiet = Simulation::new(&null(Regime::Rtp), 1).unwrap();
    let before: Vec<Vec<f64>> = quiet
        .utilities()
        .iter()
        .map(|u| u.forecast_total().to_vec())
        .collect();
    quiet.step().unwrap();
    let after: Vec<Vec<f64>> = quiet
        .utilities()
        .iter()
        .map(|u| u.forecast_total().to_vec())
        .collect();
    assert_eq!(before, after);

    let mut noisy = Simulation::new(&small(Regime::Rtp, 0.0, 2), 1).unwrap();
    let before: Vec<Vec<f64>> = noisy
        .utilities()
        .iter()
        .map(|u| u.forecast_total().to_vec())
        .collect();
    noisy.step().unwrap();
    for (u, b) in noisy.utilities().iter().zip(&before) {
        assert_ne!(u.forecast_total(), &b[..]);
    }
}

#[test]
fn day_counter_increments() {
    let mut sim = Simulation::new(&small(Regime::Rtp, 0.2, 3), 1).unwrap();
    for d in 0..3 {
        assert_eq!(sim.day(), d);
        assert_eq!(sim.step().unwrap().day, d);
    }
    assert_eq!(sim.day(), 3);
}

#[test]
fn rtp_users_shift_against_todays_prices() {
    let mut s = small(Regime::Rtp, 0.5, 4);
    s.noise.relative_sigma = 0.0;
    let mut sim = Simulation::new(&s, 2).unwrap();
    for _ in 0..4 {
        let users: Vec<_> = sim
            .utilities()
            .iter()
            .flat_map(|u| u.users.clone())
            .collect();
        let day = sim.step().unwrap();
        let mut expected = vec![0.0; day.realized_demand.len()];
        for user in &users {
            let shift = if user.flexible() {
                optimal_phase_shift(&user.nominal_usage(), &day.spot_prices)
            } else {
                0
            };
            for (e, v) in expected
                .iter_mut()
                .zip(advance(user.expected_curve(), shift * MINUTES_PER_HOUR))
            {
                *e += v;
            }
        }
        for (e, r) in expected.iter().zip(&day.realized_demand) {
            assert!((e - r).abs() <= 1e-9 * e);
        }
        for u in sim.utilities().iter().flat_map(|u| &u.users) {
            assert_eq!(u.offset_minutes(), 0, "choices are cleared between days");
        }
    }
}

#[test]
fn every_day_conserves_money_and_energy() {
    let mut s = small(Regime::Rtp, 0.8, 5);
    s.renewable = Some(Default::default());
    let r = run_simulation(&s, 3).unwrap();
    let limit = s.balancing.activation_limit;
    for d in &r.days {
        d.ledger.check_zero_sum().unwrap();
        assert!(d.ledger.total().abs() <= ZERO_SUM_TOLERANCE * d.ledger.gross());
        let net = d.balancing.net_activated();
        for (diff, act) in d.imbalance.diff15.iter().zip(&net) {
            assert!((diff - act).abs() <= limit + 1e-9);
        }
        // the system operator only passes money through
        let so = d.ledger.party_total(Party::SystemOperator);
        assert!(so.is_finite());
    }
}

#[test]
fn shared_balancing_charge_is_equal_within_a_utility() {
    let r = run_simulation(&small(Regime::Rtp, 0.8, 4), 4).unwrap();
    for u in 0..3 {
        let shares: Vec<f64> = r
            .user_totals
            .iter()
            .filter(|b| b.utility == u)
            .map(|b| b.shared_balancing_cost)
            .collect();
        assert!(shares.windows(2).all(|w| w[0] == w[1]), "{shares:?}");
    }
}

#[test]
fn shifting_never_changes_daily_energy() {
    for scenario in [small(Regime::Rtp, 1.0, 1), Scenario::desk_appliances()] {
        let sim = Simulation::new(&scenario, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for u in sim.utilities() {
            for user in &u.users {
                let mut user = user.clone();
                let base: f64 = hourly_energy(&user.realize(0.0, &mut rng)).iter().sum();
                for step in 0..24 {
                    match user.load {
                        Load::Appliance(_) => user.set_start_minute(step * MINUTES_PER_HOUR + 17),
                        _ => user.set_shift(step),
                    }
                    let moved: f64 = hourly_energy(&user.realize(0.0, &mut rng)).iter().sum();
                    assert!((moved - base).abs() <= 1e-9 * base);
                }
            }
        }
    }
}

#[test]
fn appliance_rtp_optimizers_start_in_cheapest_hour() {
    let mut s = Scenario::desk_appliances();
    s.n_days = 2;
    s.warmup_days = 1;
    s.anneal.iterations = 200;
    let r = run_simulation(&s, 6).unwrap();
    for d in &r.days {
        let cheapest = flexmarket::agents::appliance::cheapest_hour(&d.spot_prices);
        assert!(!d.optimizing_starts.is_empty());
        assert!(d
            .optimizing_starts
            .iter()
            .all(|m| m / MINUTES_PER_HOUR == cheapest));
    }
}

#[test]
fn invalid_scenarios_are_rejected() {
    let mut s = small(Regime::Rtp, 0.0, 1);
    s.flexible_ratio = 1.5;
    assert!(Simulation::new(&s, 0).is_err());
    let mut s = small(Regime::Rtp, 0.0, 1);
    s.producers.clear();
    s.balancing.buffer_capacity = 0.0;
    assert!(run_simulation(&s, 0).is_err());
}
