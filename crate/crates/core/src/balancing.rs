//! Real-time balancing: minute imbalance, 15-minute activation against a
//! dead-band, and hourly imbalance prices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::BalancingConfig;
use crate::time::{
    block_energy, HOURS_PER_DAY, MINUTES_PER_DAY, MINUTES_PER_HOUR, MINUTES_PER_SLOT,
    SLOTS_PER_DAY, SLOTS_PER_HOUR,
};

/// Demand minus production.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceSeries {
    /// MW, 1440 values.
    pub diff_minute: Vec<f64>,
    /// MWh per 15-minute slot, 96 values.
    pub diff15: Vec<f64>,
    /// MWh per hour, 24 values.
    pub diff60: Vec<f64>,
}

pub fn compute_imbalance(demand: &[f64], production: &[f64]) -> Result<ImbalanceSeries> {
    if demand.len() != MINUTES_PER_DAY || production.len() != MINUTES_PER_DAY {
        return Err(Error::InvalidInput(format!(
            "imbalance needs {MINUTES_PER_DAY} minutes, got {} and {}",
            demand.len(),
            production.len()
        )));
    }
    let diff_minute: Vec<f64> = demand.iter().zip(production).map(|(d, p)| d - p).collect();
    let diff15 = block_energy(&diff_minute, MINUTES_PER_SLOT);
    let diff60 = block_energy(&diff_minute, MINUTES_PER_HOUR);
    Ok(ImbalanceSeries {
        diff_minute,
        diff15,
        diff60,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

/// Energy a producer can deliver (up) or withdraw (down) within one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancingOffer {
    pub producer: usize,
    /// MWh per slot.
    pub energy: f64,
    /// EUR/MWh.
    pub price: f64,
}

/// Up and down books of one hour.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HourBooks {
    pub up: Vec<BalancingOffer>,
    pub down: Vec<BalancingOffer>,
}

impl HourBooks {
    /// Up book cheapest first, down book highest repurchase price first;
    /// ties by producer.
    pub fn sorted(mut self) -> Self {
        self.up.retain(|o| o.energy > 0.0);
        self.down.retain(|o| o.energy > 0.0);
        self.up.sort_by(|a, b| {
            a.price
                .total_cmp(&b.price)
                .then(a.producer.cmp(&b.producer))
        });
        self.down.sort_by(|a, b| {
            b.price
                .total_cmp(&a.price)
                .then(a.producer.cmp(&b.producer))
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancingActivation {
    pub slot: usize,
    pub producer: usize,
    pub direction: Direction,
    /// MWh, always positive.
    pub energy: f64,
    pub price: f64,
}

impl BalancingActivation {
    /// Up counts positive, down negative.
    pub fn signed_energy(&self) -> f64 {
        match self.direction {
            Direction::Up => self.energy,
            Direction::Down => -self.energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancingOutcome {
    pub activations: Vec<BalancingActivation>,
    /// Price of the marginal activation per slot; `None` without activation.
    pub slot_prices: Vec<Option<f64>>,
}

impl BalancingOutcome {
    pub fn net_activated(&self) -> Vec<f64> {
        let mut net = vec![0.0; SLOTS_PER_DAY];
        for a in &self.activations {
            net[a.slot] += a.signed_energy();
        }
        net
    }

    pub fn total_energy(&self) -> f64 {
        self.activations
            .iter()
            .map(|a| a.energy)
            .fold(0.0, |a, b| a + b)
    }
}

/// Covers every slot whose imbalance leaves the dead-band from the hour's
/// books. `books` holds one entry per hour and must already be sorted.
pub fn activate_balancing(
    series: &ImbalanceSeries,
    books: &[HourBooks],
    config: &BalancingConfig,
    day: usize,
) -> Result<BalancingOutcome> {
    if books.len() != HOURS_PER_DAY || series.diff15.len() != SLOTS_PER_DAY {
        return Err(Error::InvalidInput(
            "balancing needs 24 books and 96 slots".into(),
        ));
    }
    let limit = config.activation_limit;
    let mut activations = Vec::new();
    let mut slot_prices = vec![None; SLOTS_PER_DAY];
    // energy already drawn from each offer in the current hour
    let mut used_up: Vec<f64> = Vec::new();
    let mut used_down: Vec<f64> = Vec::new();

    for (slot, &diff) in series.diff15.iter().enumerate() {
        let hour = slot / SLOTS_PER_HOUR;
        let book = &books[hour];
        if config.restore_books_each_slot || slot % SLOTS_PER_HOUR == 0 {
            used_up.clear();
            used_up.resize(book.up.len(), 0.0);
            used_down.clear();
            used_down.resize(book.down.len(), 0.0);
        }
        let (direction, offers, used) = if diff > limit {
            (Direction::Up, &book.up, &mut used_up)
        } else if diff < -limit {
            (Direction::Down, &book.down, &mut used_down)
        } else {
            continue;
        };
        let mut remaining = diff.abs();
        for (k, offer) in offers.iter().enumerate() {
            let available = offer.energy - used[k];
            if available <= 0.0 {
                continue;
            }
            let take = available.min(remaining);
            used[k] += take;
            remaining -= take;
            slot_prices[slot] = Some(offer.price);
            activations.push(BalancingActivation {
                slot,
                producer: offer.producer,
                direction,
                energy: take,
                price: offer.price,
            });
            if remaining <= 0.0 {
                break;
            }
        }
        if remaining > 1e-9 {
            return Err(match direction {
                Direction::Up => Error::UpBalancingExhausted {
                    day,
                    slot,
                    uncovered: remaining,
                },
                Direction::Down => Error::DownBalancingExhausted {
                    day,
                    slot,
                    uncovered: remaining,
                },
            });
        }
    }
    Ok(BalancingOutcome {
        activations,
        slot_prices,
    })
}

/// Net-up hours take the highest slot price, net-down hours the lowest;
/// hours inside the dead-band (or without any activated slot) settle at
/// spot.
pub fn hourly_balancing_price(
    slot_prices: &[Option<f64>],
    diff60: &[f64],
    spot: &[f64; HOURS_PER_DAY],
    activation_limit: f64,
) -> [f64; HOURS_PER_DAY] {
    let mut out = *spot;
    for (h, price) in out.iter_mut().enumerate() {
        let slots = slot_prices[h * SLOTS_PER_HOUR..(h + 1) * SLOTS_PER_HOUR]
            .iter()
            .flatten()
            .copied();
        let picked = if diff60[h] > activation_limit {
            slots.reduce(f64::max)
        } else if diff60[h] < -activation_limit {
            slots.reduce(f64::min)
        } else {
            None
        };
        if let Some(p) = picked {
            *price = p;
        }
    }
    out
}

/// System direction of an hour, as used by two-price settlement.
pub fn system_direction(diff60: f64, activation_limit: f64) -> Option<Direction> {
    if diff60 > activation_limit {
        Some(Direction::Up)
    } else if diff60 < -activation_limit {
        Some(Direction::Down)
    } else {
        None
    }
}
