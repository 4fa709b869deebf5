use serde::{Deserialize, Serialize};

use crate::day_ahead::SupplyOffer;
use crate::scenario::ProducerConfig;
use crate::PRICE_CAP;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Producer {
    pub id: usize,
    pub name: String,
    /// MW.
    pub capacity: f64,
    /// EUR/MWh.
    pub marginal_cost: f64,
    pub min_run_required: bool,
    pub regulation_factor: f64,
    pub balancing_markup: f64,
}

impl Producer {
    pub fn from_config(id: usize, c: &ProducerConfig) -> Self {
        Self {
            id,
            name: c.name.clone(),
            capacity: c.capacity,
            marginal_cost: c.marginal_cost,
            min_run_required: c.min_run_required,
            regulation_factor: c.regulation_factor,
            balancing_markup: c.balancing_markup,
        }
    }

    /// Peak plant at the top of the balancing merit order. Always free to
    /// regulate its whole capacity upwards.
    pub fn buffer(id: usize, capacity: f64, price: f64) -> Self {
        Self {
            id,
            name: "buffer".into(),
            capacity,
            marginal_cost: price,
            min_run_required: false,
            regulation_factor: 1.0,
            balancing_markup: 0.0,
        }
    }

    /// Whole capacity at marginal cost.
    pub fn day_ahead_offer(&self, hour: usize) -> SupplyOffer {
        SupplyOffer {
            producer: self.id,
            hour,
            power: self.capacity,
            price: self.marginal_cost,
        }
    }
}

/// A producer's regulation offers for one hour, MW and EUR/MWh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BalancingOffers {
    pub up: Option<(f64, f64)>,
    pub down: Option<(f64, f64)>,
}

pub fn producer_balancing_offers(producer: &Producer, scheduled_mw: f64) -> BalancingOffers {
    if producer.min_run_required && scheduled_mw <= 0.0 {
        return BalancingOffers::default();
    }
    let band = producer.regulation_factor * producer.capacity;
    let up = band.min(producer.capacity - scheduled_mw).max(0.0);
    let down = band.min(scheduled_mw).max(0.0);
    let up_price = (producer.marginal_cost * (1.0 + producer.balancing_markup)).min(PRICE_CAP);
    let down_price = (producer.marginal_cost * (1.0 - producer.balancing_markup)).max(0.0);
    BalancingOffers {
        up: (up > 0.0).then_some((up, up_price)),
        down: (down > 0.0).then_some((down, down_price)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(capacity: f64, rf: f64, min_run: bool) -> Producer {
        Producer {
            id: 0,
            name: "p".into(),
            capacity,
            marginal_cost: 40.0,
            min_run_required: min_run,
            regulation_factor: rf,
            balancing_markup: 0.25,
        }
    }

    #[test]
    fn no_regulation_factor_no_offers() {
        assert_eq!(
            producer_balancing_offers(&p(100.0, 0.0, false), 50.0),
            BalancingOffers::default()
        );
    }

    #[test]
    fn min_run_gates_undispatched() {
        assert_eq!(
            producer_balancing_offers(&p(100.0, 0.5, true), 0.0),
            BalancingOffers::default()
        );
        let free = producer_balancing_offers(&p(100.0, 0.5, false), 0.0);
        assert_eq!(free.up, Some((50.0, 50.0)));
        assert_eq!(free.down, None);
    }

    #[test]
    fn band_and_prices() {
        let o = producer_balancing_offers(&p(100.0, 0.3, false), 50.0);
        assert_eq!(o.up, Some((30.0, 50.0)));
        assert_eq!(o.down, Some((30.0, 30.0)));
    }

    #[test]
    fn headroom_limits_up() {
        let o = producer_balancing_offers(&p(100.0, 0.3, false), 90.0);
        assert!((o.up.unwrap().0 - 10.0).abs() < 1e-12);
        assert_eq!(
            producer_balancing_offers(&p(100.0, 0.3, false), 100.0).up,
            None
        );
    }

    #[test]
    fn buffer_offers_everything_up() {
        let b = Producer::buffer(9, 1000.0, PRICE_CAP);
        let o = producer_balancing_offers(&b, 0.0);
        assert_eq!(o.up, Some((1000.0, PRICE_CAP)));
    }
}
