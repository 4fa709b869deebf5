//! Oracles shared by the integration tests.

use flexmarket::day_ahead::SupplyOffer;

/// Cheapest price level whose cumulative supply covers the demand; blocks
/// below it are taken whole, blocks at it in producer order.
pub fn merit_oracle(demand: f64, offers: &[SupplyOffer]) -> Option<(f64, Vec<(usize, f64)>)> {
    if demand == 0.0 {
        return Some((0.0, Vec::new()));
    }
    let live: Vec<&SupplyOffer> = offers.iter().filter(|o| o.power > 0.0).collect();
    let mut levels: Vec<f64> = live.iter().map(|o| o.price).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    for &p in &levels {
        let covered: f64 = live.iter().filter(|o| o.price <= p).map(|o| o.power).sum();
        if covered < demand {
            continue;
        }
        let mut accepted = Vec::new();
        let mut below: Vec<&&SupplyOffer> = live.iter().filter(|o| o.price < p).collect();
        below.sort_by(|a, b| {
            a.price
                .total_cmp(&b.price)
                .then(a.producer.cmp(&b.producer))
        });
        let mut served = 0.0;
        for o in below {
            accepted.push((o.producer, o.power));
            served += o.power;
        }
        let mut at: Vec<&&SupplyOffer> = live.iter().filter(|o| o.price == p).collect();
        at.sort_by_key(|o| o.producer);
        for o in at {
            let rest = demand - served;
            if rest <= 0.0 {
                break;
            }
            let take = o.power.min(rest);
            accepted.push((o.producer, take));
            served += take;
        }
        return Some((p, accepted));
    }
    None
}
