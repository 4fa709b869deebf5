//! The daily loop: day-ahead clearing, balancing, settlement, forecast
//! update.

use rand::RngExt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::appliance::{schedule_appliances, shift_for_start_hour, start_hour_for_shift};
use crate::agents::utility::undo_offset;
use crate::agents::Producer;
use crate::agents::{
    generate_renewable_day, optimal_phase_shift, producer_balancing_offers, Appliance,
    BaseLoadAgent, RenewableDay, SineConsumer, User, Utility,
};
use crate::balancing::{
    activate_balancing, compute_imbalance, hourly_balancing_price, BalancingOffer,
    BalancingOutcome, HourBooks, ImbalanceSeries,
};
use crate::day_ahead::{
    run_market, DayAheadBook, ExclusiveGroupBid, ScheduleItem, SelectionVector, SupplyOffer,
};
use crate::error::Result;
use crate::rng::{stream, RunStreams, Stream};
use crate::scenario::{ApplianceConfig, Regime, Scenario};
use crate::settlement::{
    accumulate_bills, bill_users, book_user_bills, cost_metrics_from_groups, group_advantage,
    group_day_costs, settle_day, utility_balancing_cost, CostMetrics, DayInputs, GroupDayCost,
    ProducerDelivery, SettlementLedger, UserBill, UserConsumption, UserGroup, UtilityPosition,
};
use crate::time::{
    hourly_energy, HOURS_PER_DAY, MINUTES_PER_DAY, MINUTES_PER_HOUR, MINUTES_PER_SLOT,
};

/// Everything that happened on one simulated day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayResult {
    pub day: usize,
    /// False for warm-up days.
    pub measured: bool,
    pub spot_prices: [f64; HOURS_PER_DAY],
    pub imbalance_prices: [f64; HOURS_PER_DAY],
    /// Cleared demand, MWh per hour.
    pub cleared_demand: [f64; HOURS_PER_DAY],
    pub schedule: Vec<Vec<ScheduleItem>>,
    /// Shift (hours) each utility's flexible load follows; always 0
    /// under real-time pricing.
    pub utility_shifts: Vec<usize>,
    pub welfare: f64,
    /// Planned system demand, MW per minute.
    pub forecast_demand: Vec<f64>,
    /// Realized system demand, MW per minute.
    pub realized_demand: Vec<f64>,
    /// Realized production before balancing, MW per minute.
    pub production: Vec<f64>,
    pub imbalance: ImbalanceSeries,
    pub balancing: BalancingOutcome,
    pub ledger: SettlementLedger,
    pub group_costs: Vec<GroupDayCost>,
    /// Start minutes of optimizing appliances (appliance mode only).
    pub optimizing_starts: Vec<usize>,
}

impl DayResult {
    pub fn balancing_energy(&self) -> f64 {
        self.balancing.total_energy()
    }

    pub fn mean_spot(&self) -> f64 {
        self.spot_prices.iter().sum::<f64>() / HOURS_PER_DAY as f64
    }
}

/// Aggregates over the measured days.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub measured_days: usize,
    /// EUR/MWh paid by users.
    pub costs: CostMetrics,
    /// MWh consumed by users.
    pub energy_mwh: f64,
    /// Activated balancing energy, MWh, both directions.
    pub balancing_energy_mwh: f64,
    /// Balancing cost passed on to users, EUR.
    pub balancing_cost_eur: f64,
    pub mean_spot: f64,
    /// `None` when one of the user groups is empty.
    pub group_advantage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: Scenario,
    pub seed: u64,
    /// Hex SHA-256 of the scenario's JSON form.
    pub scenario_hash: String,
    pub days: Vec<DayResult>,
    pub metrics: RunMetrics,
    /// Per-user totals over the measured days.
    pub user_totals: Vec<UserBill>,
}

pub fn scenario_hash(scenario: &Scenario) -> String {
    let json = serde_json::to_vec(scenario).expect("scenario serializes");
    hex::encode(Sha256::digest(&json))
}

/// Runs every day of `scenario` with `seed` (which takes precedence over
/// `scenario.seed`).
pub fn run_simulation(scenario: &Scenario, seed: u64) -> Result<SimulationReport> {
    let mut sim = Simulation::new(scenario, seed)?;
    let mut days = Vec::with_capacity(scenario.n_days);
    while sim.day() < scenario.n_days {
        days.push(sim.step()?);
    }
    Ok(sim.finish(days))
}

/// Appliance-mode bookkeeping shared by all utilities.
#[derive(Debug, Clone)]
struct ApplianceContext {
    weights: [f64; HOURS_PER_DAY],
}

/// State of one run between days.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    seed: u64,
    day: usize,
    producers: Vec<Producer>,
    renewable_id: Option<usize>,
    utilities: Vec<Utility>,
    streams: RunStreams,
    last_selection: Option<SelectionVector>,
    appliances: Option<ApplianceContext>,
    user_totals: Vec<UserBill>,
}

impl Simulation {
    pub fn new(scenario: &Scenario, seed: u64) -> Result<Self> {
        scenario.validate()?;
        let mut producers: Vec<Producer> = scenario
            .producers
            .iter()
            .enumerate()
            .map(|(i, c)| Producer::from_config(i, c))
            .collect();
        producers.push(Producer::buffer(
            producers.len(),
            scenario.balancing.buffer_capacity,
            scenario.balancing.buffer_price,
        ));
        let renewable_id = scenario.renewable.as_ref().map(|_| producers.len());

        let mut population = stream(seed, Stream::Population);
        let (utilities, appliances) = match &scenario.appliance_mode {
            None => (build_sine_utilities(scenario, &mut population), None),
            Some(cfg) => {
                let (u, ctx) = build_appliance_utilities(scenario, cfg, &mut population);
                (u, Some(ctx))
            }
        };

        Ok(Self {
            scenario: scenario.clone(),
            seed,
            day: 0,
            producers,
            renewable_id,
            utilities,
            streams: RunStreams::new(seed),
            last_selection: None,
            appliances,
            user_totals: Vec::new(),
        })
    }

    pub fn day(&self) -> usize {
        self.day
    }

    pub fn utilities(&self) -> &[Utility] {
        &self.utilities
    }

    pub fn producers(&self) -> &[Producer] {
        &self.producers
    }

    /// Simulates the current day and advances to the next.
    pub fn step(&mut self) -> Result<DayResult> {
        let day = self.day;
        let regime = self.scenario.regime;
        let sigma = self.scenario.noise.relative_sigma;

        let renewable = match &self.scenario.renewable {
            Some(cfg) => generate_renewable_day(cfg, &mut self.streams.renewable),
            None => RenewableDay::none(),
        };
        let renewable_hourly = hourly_energy(&renewable.forecast);

        // day-ahead
        let supply: Vec<Vec<SupplyOffer>> = (0..HOURS_PER_DAY)
            .map(|h| {
                let mut offers: Vec<SupplyOffer> = self
                    .producers
                    .iter()
                    .map(|p| p.day_ahead_offer(h))
                    .collect();
                if let Some(id) = self.renewable_id {
                    offers.push(SupplyOffer {
                        producer: id,
                        hour: h,
                        power: renewable_hourly[h],
                        price: 0.0,
                    });
                }
                offers
            })
            .collect();
        let book = DayAheadBook::new(&supply)?;
        let utility_bids: Vec<_> = self.utilities.iter().map(|u| u.bid(regime)).collect();
        let bids: Vec<ExclusiveGroupBid> = utility_bids
            .iter()
            .enumerate()
            .map(|(i, b)| ExclusiveGroupBid {
                owner: i,
                profiles: b.profiles.clone(),
            })
            .collect();
        let market = run_market(
            &book,
            &bids,
            &self.scenario.anneal,
            self.last_selection.as_ref(),
            &mut self.streams.anneal,
        )?;
        let utility_shifts: Vec<usize> = utility_bids
            .iter()
            .zip(&market.selection.0)
            .map(|(b, &k)| b.shifts[k])
            .collect();

        // planned production follows the minute shape behind the bids
        let mut forecast_demand = vec![0.0; MINUTES_PER_DAY];
        for (u, &s) in self.utilities.iter().zip(&utility_shifts) {
            for (t, v) in forecast_demand.iter_mut().zip(u.planned_curve(regime, s)) {
                *t += v;
            }
        }
        let renewable_scheduled: [f64; HOURS_PER_DAY] = std::array::from_fn(|h| {
            self.renewable_id
                .map_or(0.0, |id| accepted_of(&market.schedule[h], id))
        });
        let mut production = vec![0.0; MINUTES_PER_DAY];
        let mut renewable_delivered = vec![0.0; MINUTES_PER_DAY];
        for m in 0..MINUTES_PER_DAY {
            let h = m / MINUTES_PER_HOUR;
            let take = if renewable_hourly[h] > 0.0 {
                renewable_scheduled[h] / renewable_hourly[h]
            } else {
                0.0
            };
            let conventional = forecast_demand[m] - renewable.forecast[m] * take;
            renewable_delivered[m] = renewable.realized[m] * take;
            production[m] = conventional + renewable_delivered[m];
        }

        // consumers decide and realize
        let mut optimizing_starts = Vec::new();
        for (u, &shift) in self.utilities.iter_mut().zip(&utility_shifts) {
            if let Some(ctx) = &self.appliances {
                place_appliances(
                    u,
                    regime,
                    shift,
                    &market.prices,
                    ctx,
                    &mut self.streams.appliances,
                    &mut optimizing_starts,
                );
            } else {
                for user in &mut u.users {
                    if !user.flexible() {
                        continue;
                    }
                    let s = match regime {
                        Regime::Rtp => optimal_phase_shift(&user.nominal_usage(), &market.prices),
                        Regime::Integrated => shift,
                    };
                    user.set_shift(s);
                }
            }
        }

        let mut realized_demand = vec![0.0; MINUTES_PER_DAY];
        let mut realizations = Vec::with_capacity(self.utilities.len());
        for u in &self.utilities {
            let r = realize_utility(u, sigma, &mut self.streams.demand_noise);
            for (t, v) in realized_demand.iter_mut().zip(&r.total) {
                *t += v;
            }
            realizations.push(r);
        }

        // balancing
        let imbalance = compute_imbalance(&realized_demand, &production)?;
        let books = self.balancing_books(&market.schedule);
        let balancing = activate_balancing(&imbalance, &books, &self.scenario.balancing, day)?;
        let limit = self.scenario.balancing.activation_limit;
        let imbalance_prices = hourly_balancing_price(
            &balancing.slot_prices,
            &imbalance.diff60,
            &market.prices,
            limit,
        );

        // settlement
        let positions: Vec<UtilityPosition> = utility_bids
            .iter()
            .zip(&market.selection.0)
            .zip(&realizations)
            .enumerate()
            .map(|(i, ((b, &k), r))| UtilityPosition {
                utility: i,
                scheduled: b.profiles[k],
                realized: hourly_energy(&r.total),
            })
            .collect();
        let deliveries: Vec<ProducerDelivery> = self
            .renewable_id
            .map(|id| ProducerDelivery {
                producer: id,
                scheduled: renewable_scheduled,
                delivered: hourly_energy(&renewable_delivered),
            })
            .into_iter()
            .collect();
        let mut ledger = settle_day(&DayInputs {
            day,
            spot: &market.prices,
            schedule: &market.schedule,
            activations: &balancing.activations,
            imbalance_prices: &imbalance_prices,
            diff60: &imbalance.diff60,
            activation_limit: limit,
            deliveries: &deliveries,
            utilities: &positions,
        })?;
        let mut bills = Vec::new();
        for (i, (pos, r)) in positions.iter().zip(&realizations).enumerate() {
            let cost = utility_balancing_cost(pos, &market.prices, &imbalance_prices);
            let utility_bills = bill_users(i, &market.prices, &r.users, cost);
            book_user_bills(&mut ledger, i, &utility_bills);
            bills.extend(utility_bills);
        }
        ledger.check_zero_sum()?;

        let measured = day >= self.scenario.warmup_days;
        if measured {
            accumulate_bills(&mut self.user_totals, &bills);
        }
        let group_costs = group_day_costs(day, &bills);

        self.advance_day(&realizations, market.selection.clone());

        Ok(DayResult {
            day,
            measured,
            spot_prices: market.prices,
            imbalance_prices,
            cleared_demand: market.demand,
            schedule: market.schedule,
            utility_shifts,
            welfare: market.welfare,
            forecast_demand,
            realized_demand,
            production,
            imbalance,
            balancing,
            ledger,
            group_costs,
            optimizing_starts,
        })
    }

    /// Folds the day's realization into the forecasts, clears daily
    /// choices and moves the clock.
    fn advance_day(&mut self, realizations: &[UtilityRealization], selection: SelectionVector) {
        for (u, r) in self.utilities.iter_mut().zip(realizations) {
            u.update_forecasts(&r.total, &r.inflexible, &r.flexible_at_zero);
            u.reset_day();
        }
        self.last_selection = Some(selection);
        self.day += 1;
    }

    /// Up and down books of every hour, built from the day-ahead schedule.
    fn balancing_books(&self, schedule: &[Vec<ScheduleItem>]) -> Vec<HourBooks> {
        let slot_fraction = MINUTES_PER_SLOT as f64 / MINUTES_PER_HOUR as f64;
        schedule
            .iter()
            .map(|items| {
                let mut books = HourBooks::default();
                for p in &self.producers {
                    let offers = producer_balancing_offers(p, accepted_of(items, p.id));
                    if let Some((mw, price)) = offers.up {
                        books.up.push(BalancingOffer {
                            producer: p.id,
                            energy: mw * slot_fraction,
                            price,
                        });
                    }
                    if let Some((mw, price)) = offers.down {
                        books.down.push(BalancingOffer {
                            producer: p.id,
                            energy: mw * slot_fraction,
                            price,
                        });
                    }
                }
                books.sorted()
            })
            .collect()
    }

    pub fn finish(self, days: Vec<DayResult>) -> SimulationReport {
        let measured: Vec<&DayResult> = days.iter().filter(|d| d.measured).collect();
        let rows: Vec<GroupDayCost> = measured
            .iter()
            .flat_map(|d| d.group_costs.iter().copied())
            .collect();
        let costs = cost_metrics_from_groups(&rows);
        let metrics = RunMetrics {
            measured_days: measured.len(),
            costs,
            energy_mwh: rows.iter().map(|r| r.energy_mwh).fold(0.0, |a, b| a + b),
            balancing_energy_mwh: measured
                .iter()
                .map(|d| d.balancing_energy())
                .fold(0.0, |a, b| a + b),
            balancing_cost_eur: rows.iter().map(|r| r.balancing_eur).fold(0.0, |a, b| a + b),
            mean_spot: if measured.is_empty() {
                0.0
            } else {
                measured.iter().map(|d| d.mean_spot()).sum::<f64>() / measured.len() as f64
            },
            group_advantage: group_advantage(&self.user_totals).ok(),
        };
        SimulationReport {
            scenario_hash: scenario_hash(&self.scenario),
            scenario: self.scenario,
            seed: self.seed,
            days,
            metrics,
            user_totals: self.user_totals,
        }
    }
}

fn accepted_of(items: &[ScheduleItem], producer: usize) -> f64 {
    items
        .iter()
        .filter(|i| i.offer.producer == producer)
        .map(|i| i.accepted)
        .sum()
}

/// One utility's realized day.
struct UtilityRealization {
    total: Vec<f64>,
    inflexible: Vec<f64>,
    flexible_at_zero: Vec<f64>,
    users: Vec<UserConsumption>,
}

fn realize_utility(
    u: &Utility,
    sigma: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> UtilityRealization {
    let mut total = vec![0.0; MINUTES_PER_DAY];
    let mut inflexible = vec![0.0; MINUTES_PER_DAY];
    let mut flexible_at_zero = vec![0.0; MINUTES_PER_DAY];
    let mut users = Vec::with_capacity(u.users.len());
    for user in &u.users {
        let curve = user.realize(sigma, rng);
        for (t, v) in total.iter_mut().zip(&curve) {
            *t += v;
        }
        if user.flexible() {
            let back = undo_offset(&curve, user.offset_minutes());
            for (t, v) in flexible_at_zero.iter_mut().zip(&back) {
                *t += v;
            }
        } else {
            for (t, v) in inflexible.iter_mut().zip(&curve) {
                *t += v;
            }
        }
        users.push(UserConsumption {
            user: user.id,
            group: if user.flexible() {
                UserGroup::Flexible
            } else {
                UserGroup::Normal
            },
            hourly: hourly_energy(&curve),
        });
    }
    UtilityRealization {
        total,
        inflexible,
        flexible_at_zero,
        users,
    }
}

/// Number of flexible users out of `n` at `ratio`.
pub fn flexible_count(n: usize, ratio: f64) -> usize {
    ((n as f64 * ratio).round() as usize).min(n)
}

fn spread<R: rand::Rng + ?Sized>(rng: &mut R, value: f64, relative: f64) -> f64 {
    let u: f64 = rng.random_range(-1.0..=1.0);
    value * (1.0 + relative * u)
}

fn build_sine_utilities<R: rand::Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Vec<Utility> {
    let mut next_id = 0;
    scenario
        .utilities
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let flexible = flexible_count(cfg.users, scenario.flexible_ratio);
            let users = (0..cfg.users)
                .map(|k| {
                    let d = &cfg.dispersion;
                    let mean_load = spread(rng, cfg.mean_load, d.mean_load);
                    let amplitude = spread(rng, cfg.amplitude, d.amplitude);
                    let phase_offset: f64 = rng.random_range(-1.0..=1.0);
                    let user = User::sine(
                        next_id,
                        SineConsumer {
                            mean_load,
                            amplitude,
                            base_phase: cfg.base_phase + d.base_phase_hours * phase_offset,
                            flexible: k < flexible,
                            chosen_shift: 0,
                        },
                    );
                    next_id += 1;
                    user
                })
                .collect();
            Utility::new(
                i,
                cfg.name.clone(),
                cfg.alpha,
                cfg.exg_shifts.clone(),
                users,
            )
        })
        .collect()
}

/// Each utility gets one base-load user and two groups of appliance
/// objects whose multiplicities split its share of the fleet by
/// `flexible_ratio`.
fn build_appliance_utilities<R: rand::Rng + ?Sized>(
    scenario: &Scenario,
    cfg: &ApplianceConfig,
    rng: &mut R,
) -> (Vec<Utility>, ApplianceContext) {
    let n = scenario.utilities.len() as f64;
    let base = BaseLoadAgent {
        peak: cfg.base_peak_mw / n,
        peak_to_peak: cfg.base_peak_to_peak,
        morning_peak_hour: cfg.morning_peak_hour,
        evening_peak_hour: cfg.evening_peak_hour,
    };
    let weights = base.start_weights();
    let devices = cfg.total_devices / n;
    let shifts: Vec<usize> = cfg
        .candidate_hours
        .iter()
        .map(|&h| shift_for_start_hour(h))
        .collect();
    let mut next_id = 0;
    let utilities = scenario
        .utilities
        .iter()
        .enumerate()
        .map(|(i, ucfg)| {
            let mut users = vec![User::base_load(next_id, base.clone())];
            next_id += 1;
            for optimizing in [false, true] {
                let share = if optimizing {
                    scenario.flexible_ratio
                } else {
                    1.0 - scenario.flexible_ratio
                };
                let group_devices = devices * share;
                if group_devices <= 0.0 {
                    continue;
                }
                for _ in 0..cfg.objects_per_group {
                    let power_kw = spread(rng, cfg.power_kw, cfg.power_spread);
                    let lo = cfg
                        .duration_minutes
                        .saturating_sub(cfg.duration_spread_minutes)
                        .max(1);
                    let hi =
                        (cfg.duration_minutes + cfg.duration_spread_minutes).min(MINUTES_PER_DAY);
                    let duration_minutes = rng.random_range(lo..=hi);
                    let appliance = Appliance {
                        power_kw,
                        duration_minutes,
                        optimizing,
                        multiplicity: group_devices / cfg.objects_per_group as f64,
                    };
                    users.push(User::appliance(next_id, appliance, &weights));
                    next_id += 1;
                }
            }
            Utility::new(i, ucfg.name.clone(), ucfg.alpha, shifts.clone(), users)
        })
        .collect();
    (utilities, ApplianceContext { weights })
}

fn place_appliances<R: rand::Rng + ?Sized>(
    u: &mut Utility,
    regime: Regime,
    shift: usize,
    prices: &[f64; HOURS_PER_DAY],
    ctx: &ApplianceContext,
    rng: &mut R,
    optimizing_starts: &mut Vec<usize>,
) {
    let fleet: Vec<Appliance> = u
        .users
        .iter()
        .filter_map(|user| match &user.load {
            crate::agents::Load::Appliance(a) => Some(a.clone()),
            _ => None,
        })
        .collect();
    let starts = schedule_appliances(
        &fleet,
        prices,
        regime,
        Some(start_hour_for_shift(shift)),
        &ctx.weights,
        rng,
    );
    let mut starts = starts.into_iter();
    for user in &mut u.users {
        if matches!(user.load, crate::agents::Load::Appliance(_)) {
            let start = starts.next().expect("one start per appliance");
            user.set_start_minute(start);
            if user.flexible() {
                optimizing_starts.push(start);
            }
        }
    }
}
