//! Market participants.

pub mod appliance;
pub mod consumer;
pub mod producer;
pub mod renewable;
pub mod utility;

pub use appliance::{schedule_appliances, Appliance, BaseLoadAgent};
pub use consumer::{optimal_phase_shift, realize_minute_demand, SineConsumer};
pub use producer::{producer_balancing_offers, BalancingOffers, Producer};
pub use renewable::{generate_renewable_day, RenewableDay};
pub use utility::{
    ewma_forecast, exg_profiles, generate_exg_profiles, Load, User, Utility, UtilityBid,
};
