//! Day-ahead clearing: hourly merit-order dispatch and exclusive-group
//! profile selection by simulated annealing.

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::AnnealConfig;
use crate::time::HOURS_PER_DAY;
use crate::PRICE_CAP;

/// Default cap on the number of selections [`brute_force_select`] enumerates.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupplyOffer {
    pub producer: usize,
    pub hour: usize,
    /// MWh.
    pub power: f64,
    /// EUR/MWh.
    pub price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleItem {
    pub offer: SupplyOffer,
    /// MWh, `0 < accepted <= offer.power`.
    pub accepted: f64,
}

/// Price-sorted offers of one hour.
#[derive(Debug, Clone)]
pub struct MeritOrder {
    offers: Vec<SupplyOffer>,
    total: f64,
}

impl MeritOrder {
    pub fn new(mut offers: Vec<SupplyOffer>) -> Self {
        offers.retain(|o| o.power > 0.0);
        offers.sort_by(|a, b| {
            a.price
                .total_cmp(&b.price)
                .then(a.producer.cmp(&b.producer))
        });
        let total = offers.iter().map(|o| o.power).sum();
        Self { offers, total }
    }

    pub fn offers(&self) -> &[SupplyOffer] {
        &self.offers
    }

    pub fn total_power(&self) -> f64 {
        self.total
    }

    /// Walks the book cheapest first until `demand` is covered. Calls
    /// `accept(offer, accepted)` for every accepted block and returns the
    /// clearing price.
    fn walk(&self, demand: f64, mut accept: impl FnMut(&SupplyOffer, f64)) -> Result<f64> {
        if !(demand.is_finite() && demand >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "demand must be finite and >= 0, got {demand}"
            )));
        }
        if demand == 0.0 {
            return Ok(0.0);
        }
        if self.total < demand {
            return Err(Error::InsufficientSupply {
                demand,
                offered: self.total,
            });
        }
        let last = self.offers.len() - 1;
        let mut served = 0.0;
        let mut price = 0.0;
        for (i, offer) in self.offers.iter().enumerate() {
            let remaining = demand - served;
            if remaining <= 0.0 {
                break;
            }
            price = offer.price;
            if offer.power >= remaining || i == last {
                accept(offer, remaining);
                break;
            }
            accept(offer, offer.power);
            served += offer.power;
        }
        Ok(price)
    }

    /// Clearing price and accepted blocks; the marginal block is pro-rated.
    pub fn clear(&self, demand: f64) -> Result<(f64, Vec<ScheduleItem>)> {
        let mut items = Vec::new();
        let price = self.walk(demand, |offer, accepted| {
            items.push(ScheduleItem {
                offer: *offer,
                accepted,
            })
        })?;
        Ok((price, items))
    }

    /// Producer surplus of the accepted blocks plus the value of served
    /// demand at the price cap.
    pub fn welfare(&self, demand: f64) -> Result<f64> {
        let mut accepted = Vec::with_capacity(8);
        let price = self.walk(demand, |offer, amount| accepted.push((offer.price, amount)))?;
        Ok(welfare_of(price, demand, accepted.iter().copied()))
    }
}

fn welfare_of(price: f64, demand: f64, items: impl Iterator<Item = (f64, f64)>) -> f64 {
    let producer: f64 = items
        .map(|(offer_price, amount)| amount * (price - offer_price))
        .sum();
    producer + demand * (PRICE_CAP - price)
}

/// Merit-order clearing of a single hour.
pub fn price_for_demand(demand: f64, offers: &[SupplyOffer]) -> Result<(f64, Vec<ScheduleItem>)> {
    if offers.is_empty() {
        return Err(Error::InsufficientSupply {
            demand,
            offered: 0.0,
        });
    }
    MeritOrder::new(offers.to_vec()).clear(demand)
}

/// The 24 hourly books of one day.
#[derive(Debug, Clone)]
pub struct DayAheadBook {
    hours: Vec<MeritOrder>,
}

impl DayAheadBook {
    pub fn new(supply: &[Vec<SupplyOffer>]) -> Result<Self> {
        if supply.len() != HOURS_PER_DAY {
            return Err(Error::InvalidInput(format!(
                "expected {HOURS_PER_DAY} hourly books, got {}",
                supply.len()
            )));
        }
        Ok(Self {
            hours: supply.iter().map(|o| MeritOrder::new(o.clone())).collect(),
        })
    }

    pub fn hour(&self, h: usize) -> &MeritOrder {
        &self.hours[h]
    }

    pub fn create_schedule(
        &self,
        profile: &[f64; HOURS_PER_DAY],
    ) -> Result<([f64; HOURS_PER_DAY], Vec<Vec<ScheduleItem>>)> {
        let mut prices = [0.0; HOURS_PER_DAY];
        let mut schedule = Vec::with_capacity(HOURS_PER_DAY);
        for (h, book) in self.hours.iter().enumerate() {
            let (price, items) = book.clear(profile[h])?;
            prices[h] = price;
            schedule.push(items);
        }
        Ok((prices, schedule))
    }

    pub fn welfare(&self, profile: &[f64; HOURS_PER_DAY]) -> Result<f64> {
        let mut total = 0.0;
        for (h, book) in self.hours.iter().enumerate() {
            total += book.welfare(profile[h])?;
        }
        Ok(total)
    }

    pub fn evaluate(&self, selection: &SelectionVector, bids: &[ExclusiveGroupBid]) -> Result<f64> {
        self.welfare(&selection.aggregate(bids)?)
    }
}

/// Clears every hour of `profile` independently against its own book.
pub fn create_schedule(
    profile: &[f64; HOURS_PER_DAY],
    supply: &[Vec<SupplyOffer>],
) -> Result<([f64; HOURS_PER_DAY], Vec<Vec<ScheduleItem>>)> {
    DayAheadBook::new(supply)?.create_schedule(profile)
}

/// Alternative 24-hour demand profiles of one utility; the market accepts
/// exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusiveGroupBid {
    pub owner: usize,
    /// MWh per hour.
    pub profiles: Vec<[f64; HOURS_PER_DAY]>,
}

/// One profile index per exclusive group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SelectionVector(pub Vec<usize>);

impl SelectionVector {
    pub fn zeros(groups: usize) -> Self {
        Self(vec![0; groups])
    }

    pub fn validate(&self, bids: &[ExclusiveGroupBid]) -> Result<()> {
        if self.0.len() != bids.len() {
            return Err(Error::InvalidInput(format!(
                "selection has {} entries for {} groups",
                self.0.len(),
                bids.len()
            )));
        }
        for (g, (&idx, bid)) in self.0.iter().zip(bids).enumerate() {
            if idx >= bid.profiles.len() {
                return Err(Error::InvalidInput(format!(
                    "group {g} has {} profiles, selected {idx}",
                    bid.profiles.len()
                )));
            }
        }
        Ok(())
    }

    /// Hourly sum of the selected profiles.
    pub fn aggregate(&self, bids: &[ExclusiveGroupBid]) -> Result<[f64; HOURS_PER_DAY]> {
        self.validate(bids)?;
        let mut total = [0.0; HOURS_PER_DAY];
        for (&idx, bid) in self.0.iter().zip(bids) {
            for (t, v) in total.iter_mut().zip(bid.profiles[idx].iter()) {
                *t += v;
            }
        }
        Ok(total)
    }
}

/// Welfare of the demand a selection puts into the market.
pub fn evaluate_selection(
    selection: &SelectionVector,
    supply: &[Vec<SupplyOffer>],
    bids: &[ExclusiveGroupBid],
) -> Result<f64> {
    DayAheadBook::new(supply)?.evaluate(selection, bids)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketResult {
    pub prices: [f64; HOURS_PER_DAY],
    /// Cleared demand, MWh per hour.
    pub demand: [f64; HOURS_PER_DAY],
    pub schedule: Vec<Vec<ScheduleItem>>,
    pub selection: SelectionVector,
    pub welfare: f64,
}

/// Selects one profile per group by simulated annealing and clears the
/// market for the best selection found.
///
/// Temperature follows `initial_temp / (i + 1)`. A move reassigns one
/// randomly chosen group to a different profile; improving moves are
/// always taken, others with probability `exp(delta / T)`.
pub fn run_market<R: Rng + ?Sized>(
    book: &DayAheadBook,
    bids: &[ExclusiveGroupBid],
    config: &AnnealConfig,
    initial: Option<&SelectionVector>,
    rng: &mut R,
) -> Result<MarketResult> {
    if bids.iter().any(|b| b.profiles.is_empty()) {
        return Err(Error::InvalidInput(
            "every group needs at least one profile".into(),
        ));
    }
    let mut selection = match initial {
        Some(s) if s.validate(bids).is_ok() => s.clone(),
        _ => SelectionVector::zeros(bids.len()),
    };
    let mut value = book.evaluate(&selection, bids)?;
    let mut best_selection = selection.clone();
    let mut best = value;

    let movable: Vec<usize> = (0..bids.len())
        .filter(|&g| bids[g].profiles.len() > 1)
        .collect();
    if !movable.is_empty() {
        for i in 0..config.iterations {
            let temperature = config.initial_temp / (i as f64 + 1.0);
            let group = movable[rng.random_range(0..movable.len())];
            let current = selection.0[group];
            let mut next = rng.random_range(0..bids[group].profiles.len() - 1);
            if next >= current {
                next += 1;
            }
            let mut candidate = selection.clone();
            candidate.0[group] = next;
            let candidate_value = book.evaluate(&candidate, bids)?;
            let accept = candidate_value > value
                || rng.random::<f64>() < ((candidate_value - value) / temperature).exp();
            if accept {
                selection = candidate;
                value = candidate_value;
                if value > best {
                    best = value;
                    best_selection = selection.clone();
                }
            }
        }
    }

    let demand = best_selection.aggregate(bids)?;
    let (prices, schedule) = book.create_schedule(&demand)?;
    Ok(MarketResult {
        prices,
        demand,
        schedule,
        selection: best_selection,
        welfare: best,
    })
}

/// Exact arg-max over every selection; ties go to the lexicographically
/// smallest selection.
pub fn brute_force_select(
    book: &DayAheadBook,
    bids: &[ExclusiveGroupBid],
    cap: u128,
) -> Result<(f64, SelectionVector)> {
    let size = bids
        .iter()
        .try_fold(1u128, |acc, b| acc.checked_mul(b.profiles.len() as u128))
        .unwrap_or(u128::MAX);
    if size == 0 {
        return Err(Error::InvalidInput(
            "every group needs at least one profile".into(),
        ));
    }
    if size > cap {
        return Err(Error::TooLarge { size, cap });
    }
    let mut current = SelectionVector::zeros(bids.len());
    let mut best = (f64::NEG_INFINITY, current.clone());
    loop {
        let value = book.evaluate(&current, bids)?;
        if value > best.0 {
            best = (value, current.clone());
        }
        // odometer, last group fastest: lexicographic order
        let mut g = bids.len();
        loop {
            if g == 0 {
                return Ok(best);
            }
            g -= 1;
            current.0[g] += 1;
            if current.0[g] < bids[g].profiles.len() {
                break;
            }
            current.0[g] = 0;
        }
    }
}
