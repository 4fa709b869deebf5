//! Monetary settlement of a day: spot energy, balancing activations,
//! imbalance charges and the pass-through to users.
//!
//! Every flow is booked twice, once per side, so the ledger of a day sums
//! to zero. The system operator doubles as the exchange counterparty and
//! absorbs whatever residual the imbalance charges leave over the cost of
//! activations.

use serde::{Deserialize, Serialize};

use crate::balancing::{system_direction, BalancingActivation, Direction};
use crate::day_ahead::ScheduleItem;
use crate::error::{Error, Result};
use crate::time::HOURS_PER_DAY;

/// Relative tolerance of the zero-sum check.
pub const ZERO_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Producer(usize),
    Utility(usize),
    /// All users of one utility.
    Users(usize),
    SystemOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    SpotEnergy,
    BalancingActivation,
    ImbalanceCharge,
    SocializedBalancing,
    UserTariff,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::SpotEnergy => "spot_energy",
            Tag::BalancingActivation => "balancing_activation",
            Tag::ImbalanceCharge => "imbalance_charge",
            Tag::SocializedBalancing => "socialized_balancing",
            Tag::UserTariff => "user_tariff",
        }
    }
}

/// One side of a flow. Positive amounts are received, negative paid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub party: Party,
    pub tag: Tag,
    pub hour: Option<usize>,
    /// EUR.
    pub amount: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SettlementLedger {
    pub day: usize,
    pub entries: Vec<LedgerEntry>,
}

impl SettlementLedger {
    pub fn new(day: usize) -> Self {
        Self {
            day,
            entries: Vec::new(),
        }
    }

    /// Books `amount` EUR from `payer` to `payee`. Negative amounts flow
    /// the other way.
    pub fn transfer(
        &mut self,
        payer: Party,
        payee: Party,
        tag: Tag,
        hour: Option<usize>,
        amount: f64,
    ) {
        if amount == 0.0 {
            return;
        }
        self.entries.push(LedgerEntry {
            party: payer,
            tag,
            hour,
            amount: -amount,
        });
        self.entries.push(LedgerEntry {
            party: payee,
            tag,
            hour,
            amount,
        });
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.amount).sum()
    }

    pub fn gross(&self) -> f64 {
        self.entries.iter().map(|e| e.amount.abs()).sum()
    }

    /// Net amount received by `party`.
    pub fn party_total(&self, party: Party) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.party == party)
            .map(|e| e.amount)
            .sum()
    }

    pub fn party_tag_total(&self, party: Party, tag: Tag) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.party == party && e.tag == tag)
            .map(|e| e.amount)
            .sum()
    }

    pub fn check_zero_sum(&self) -> Result<()> {
        let residual = self.total();
        let ok =
            residual.is_finite() && residual.abs() <= ZERO_SUM_TOLERANCE * self.gross().max(1.0);
        if ok {
            Ok(())
        } else {
            Err(Error::LedgerImbalance {
                day: self.day,
                residual,
            })
        }
    }
}

/// Hourly schedule and delivery (MWh) of a producer whose output may
/// deviate from its schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ProducerDelivery {
    pub producer: usize,
    pub scheduled: [f64; HOURS_PER_DAY],
    pub delivered: [f64; HOURS_PER_DAY],
}

/// Scheduled and realized consumption (MWh) of one utility.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityPosition {
    pub utility: usize,
    pub scheduled: [f64; HOURS_PER_DAY],
    pub realized: [f64; HOURS_PER_DAY],
}

/// Everything a day's settlement needs.
#[derive(Debug, Clone, Copy)]
pub struct DayInputs<'a> {
    pub day: usize,
    pub spot: &'a [f64; HOURS_PER_DAY],
    /// Accepted day-ahead blocks per hour.
    pub schedule: &'a [Vec<ScheduleItem>],
    pub activations: &'a [BalancingActivation],
    pub imbalance_prices: &'a [f64; HOURS_PER_DAY],
    /// Hourly system imbalance (MWh), demand minus production.
    pub diff60: &'a [f64],
    pub activation_limit: f64,
    pub deliveries: &'a [ProducerDelivery],
    pub utilities: &'a [UtilityPosition],
}

/// Price a producer deviation of `deviation` MWh settles at: the
/// imbalance price when it worsens the system imbalance, spot otherwise.
pub fn two_price(deviation: f64, direction: Option<Direction>, spot: f64, imbalance: f64) -> f64 {
    let aggravating = match direction {
        Some(Direction::Up) => deviation < 0.0,
        Some(Direction::Down) => deviation > 0.0,
        None => false,
    };
    if aggravating {
        imbalance
    } else {
        spot
    }
}

/// Books all producer and utility flows of a day. Users are billed
/// separately by [`bill_users`] and [`book_user_bills`].
pub fn settle_day(inputs: &DayInputs<'_>) -> Result<SettlementLedger> {
    let mut ledger = SettlementLedger::new(inputs.day);
    let so = Party::SystemOperator;

    for (h, items) in inputs.schedule.iter().enumerate() {
        for item in items {
            ledger.transfer(
                so,
                Party::Producer(item.offer.producer),
                Tag::SpotEnergy,
                Some(h),
                item.accepted * inputs.spot[h],
            );
        }
    }
    for u in inputs.utilities {
        for h in 0..HOURS_PER_DAY {
            ledger.transfer(
                Party::Utility(u.utility),
                so,
                Tag::SpotEnergy,
                Some(h),
                u.scheduled[h] * inputs.spot[h],
            );
        }
    }

    for a in inputs.activations {
        let hour = a.slot / crate::time::SLOTS_PER_HOUR;
        let amount = a.energy * a.price;
        match a.direction {
            Direction::Up => ledger.transfer(
                so,
                Party::Producer(a.producer),
                Tag::BalancingActivation,
                Some(hour),
                amount,
            ),
            Direction::Down => ledger.transfer(
                Party::Producer(a.producer),
                so,
                Tag::BalancingActivation,
                Some(hour),
                amount,
            ),
        }
    }

    for d in inputs.deliveries {
        for h in 0..HOURS_PER_DAY {
            let deviation = d.delivered[h] - d.scheduled[h];
            let direction = system_direction(inputs.diff60[h], inputs.activation_limit);
            let price = two_price(
                deviation,
                direction,
                inputs.spot[h],
                inputs.imbalance_prices[h],
            );
            ledger.transfer(
                so,
                Party::Producer(d.producer),
                Tag::ImbalanceCharge,
                Some(h),
                deviation * price,
            );
        }
    }

    for u in inputs.utilities {
        for h in 0..HOURS_PER_DAY {
            let excess = u.realized[h] - u.scheduled[h];
            ledger.transfer(
                Party::Utility(u.utility),
                so,
                Tag::ImbalanceCharge,
                Some(h),
                excess * inputs.imbalance_prices[h],
            );
        }
    }

    ledger.check_zero_sum()?;
    Ok(ledger)
}

/// Balancing cost a utility passes on to its users: what its one-price
/// imbalance charge costs beyond the spot value of the same energy.
pub fn utility_balancing_cost(
    position: &UtilityPosition,
    spot: &[f64; HOURS_PER_DAY],
    imbalance_prices: &[f64; HOURS_PER_DAY],
) -> f64 {
    (0..HOURS_PER_DAY)
        .map(|h| (imbalance_prices[h] - spot[h]) * (position.realized[h] - position.scheduled[h]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserGroup {
    Normal,
    Flexible,
}

impl UserGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            UserGroup::Normal => "normal",
            UserGroup::Flexible => "flexible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserBill {
    pub user: usize,
    pub utility: usize,
    pub group: UserGroup,
    /// MWh consumed.
    pub energy: f64,
    /// EUR, spot price times hourly consumption.
    pub usage_cost: f64,
    /// EUR, the user's equal share of the utility's balancing cost.
    pub shared_balancing_cost: f64,
}

impl UserBill {
    pub fn total(&self) -> f64 {
        self.usage_cost + self.shared_balancing_cost
    }
}

/// Consumption of one user over a day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserConsumption {
    pub user: usize,
    pub group: UserGroup,
    /// MWh per hour.
    pub hourly: [f64; HOURS_PER_DAY],
}

pub fn bill_users(
    utility: usize,
    spot: &[f64; HOURS_PER_DAY],
    consumption: &[UserConsumption],
    utility_balancing_cost: f64,
) -> Vec<UserBill> {
    let share = if consumption.is_empty() {
        0.0
    } else {
        utility_balancing_cost / consumption.len() as f64
    };
    consumption
        .iter()
        .map(|c| UserBill {
            user: c.user,
            utility,
            group: c.group,
            energy: c.hourly.iter().sum(),
            usage_cost: c.hourly.iter().zip(spot).map(|(e, p)| e * p).sum(),
            shared_balancing_cost: share,
        })
        .collect()
}

/// Books the bills of one utility's users into the ledger.
pub fn book_user_bills(ledger: &mut SettlementLedger, utility: usize, bills: &[UserBill]) {
    let usage: f64 = bills.iter().map(|b| b.usage_cost).sum();
    let shared: f64 = bills.iter().map(|b| b.shared_balancing_cost).sum();
    ledger.transfer(
        Party::Users(utility),
        Party::Utility(utility),
        Tag::UserTariff,
        None,
        usage,
    );
    ledger.transfer(
        Party::Users(utility),
        Party::Utility(utility),
        Tag::SocializedBalancing,
        None,
        shared,
    );
}

/// Cost of one user group on one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupDayCost {
    pub day: usize,
    pub group: UserGroup,
    pub users: usize,
    pub energy_mwh: f64,
    pub usage_eur: f64,
    pub balancing_eur: f64,
}

/// Normal and flexible totals of a day's bills, in that order.
pub fn group_day_costs(day: usize, bills: &[UserBill]) -> Vec<GroupDayCost> {
    [UserGroup::Normal, UserGroup::Flexible]
        .into_iter()
        .map(|group| {
            let mut row = GroupDayCost {
                day,
                group,
                users: 0,
                energy_mwh: 0.0,
                usage_eur: 0.0,
                balancing_eur: 0.0,
            };
            for b in bills.iter().filter(|b| b.group == group) {
                row.users += 1;
                row.energy_mwh += b.energy;
                row.usage_eur += b.usage_cost;
                row.balancing_eur += b.shared_balancing_cost;
            }
            row
        })
        .collect()
}

/// Per-MWh cost figures; `combined == usage + balancing`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostMetrics {
    pub combined: f64,
    pub usage: f64,
    pub balancing: f64,
}

impl CostMetrics {
    fn from_totals(usage_eur: f64, balancing_eur: f64, energy: f64) -> Self {
        if energy <= 0.0 {
            return Self::default();
        }
        let usage = usage_eur / energy;
        let balancing = balancing_eur / energy;
        Self {
            combined: usage + balancing,
            usage,
            balancing,
        }
    }
}

pub fn cost_metrics(bills: &[UserBill], total_energy: f64) -> CostMetrics {
    let usage: f64 = bills.iter().map(|b| b.usage_cost).sum();
    let balancing: f64 = bills.iter().map(|b| b.shared_balancing_cost).sum();
    CostMetrics::from_totals(usage, balancing, total_energy)
}

/// Same figures from per-group daily rows, summed in row order.
pub fn cost_metrics_from_groups(rows: &[GroupDayCost]) -> CostMetrics {
    let mut usage = 0.0;
    let mut balancing = 0.0;
    let mut energy = 0.0;
    for r in rows {
        usage += r.usage_eur;
        balancing += r.balancing_eur;
        energy += r.energy_mwh;
    }
    CostMetrics::from_totals(usage, balancing, energy)
}

/// `(normal - flexible) / normal` over the mean per-MWh cost of each
/// group's users.
pub fn group_advantage(bills: &[UserBill]) -> Result<f64> {
    let mean = |group: UserGroup| -> Result<f64> {
        let per_mwh: Vec<f64> = bills
            .iter()
            .filter(|b| b.group == group && b.energy > 0.0)
            .map(|b| b.total() / b.energy)
            .collect();
        if per_mwh.is_empty() {
            return Err(Error::DegenerateGroup(group.as_str()));
        }
        Ok(per_mwh.iter().sum::<f64>() / per_mwh.len() as f64)
    };
    let normal = mean(UserGroup::Normal)?;
    let flexible = mean(UserGroup::Flexible)?;
    Ok((normal - flexible) / normal)
}

/// Adds `day` onto running per-user totals, matching bills by position.
pub fn accumulate_bills(totals: &mut Vec<UserBill>, day: &[UserBill]) {
    if totals.is_empty() {
        totals.extend_from_slice(day);
        return;
    }
    for (t, b) in totals.iter_mut().zip(day) {
        debug_assert_eq!(t.user, b.user);
        t.energy += b.energy;
        t.usage_cost += b.usage_cost;
        t.shared_balancing_cost += b.shared_balancing_cost;
    }
}
