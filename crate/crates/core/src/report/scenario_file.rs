//! TOML scenario files.
//!
//! Every section is optional and falls back to the built-in defaults;
//! unknown keys are rejected. A minimal file:
//!
//! ```toml
//! [[producers]]
//! name = "base"
//! capacity = 20000.0
//! marginal_cost = 30.0
//! regulation_factor = 0.2
//!
//! [[utilities]]
//! name = "city"
//! ```
//!
//! Top-level keys: `n_days` (35, warm-up included), `warmup_days` (5),
//! `regime` (`"rtp"` or `"exg"`), `flexible_ratio` (0), `seed` (42).
//! Sections: `[anneal]` (`initial_temp` 1000, `iterations` 2000),
//! `[balancing]` (`activation_limit` 10 MWh, `restore_books_each_slot`
//! true, `buffer_capacity` 1000 MW, `buffer_price` 3000), `[noise]`
//! (`relative_sigma` 0.01), `[renewable]` (present = enabled;
//! `peak_capacity` 2000 MW, `forecast_error_sigma` 0.1, `max_windows` 2,
//! `min_duration_hours` 2, `max_duration_hours` 10), `[appliance_mode]`
//! (present = enabled), `[[producers]]` (`name`, `capacity`,
//! `marginal_cost`, `min_run_required` false, `regulation_factor` 0,
//! `balancing_markup` 0.15) and `[[utilities]]` (`name`, `users` 100,
//! `mean_load` 11.718 MW, `amplitude` 0.882 MW, `base_phase` 12 h, `alpha`
//! 0.3, `exg_shifts` [0, 3, ..., 21], `[utilities.dispersion]`).

use std::path::Path;

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Parse {
        key: "<document>".into(),
        message: e.message().to_string(),
    })?;
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        Error::Parse {
            key: if key == "." { "<document>".into() } else { key },
            message: e.into_inner().message().to_string(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

pub fn scenario_to_toml(scenario: &Scenario) -> Result<String> {
    toml::to_string_pretty(scenario)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize scenario: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[[producers]]
name = "base"
capacity = 20000.0
marginal_cost = 30.0
regulation_factor = 0.2

[[utilities]]
name = "city"
"#;

    #[test]
    fn minimal_file_takes_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.n_days, 35);
        assert_eq!(s.utilities[0].users, 100);
        assert_eq!(s.producers[0].balancing_markup, 0.15);
        assert!(s.renewable.is_none());
    }

    #[test]
    fn ratio_out_of_range_names_key() {
        let text = format!("flexible_ratio = 1.4\n{MINIMAL}");
        match parse_scenario(&text) {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "flexible_ratio"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected_with_path() {
        let text = MINIMAL.replace(
            "regulation_factor = 0.2",
            "regulation_factor = 0.2\ncolour = 1",
        );
        match parse_scenario(&text) {
            Err(Error::Parse { key, message }) => {
                assert!(key.starts_with("producers"), "{key}");
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_type_names_nested_key() {
        let text = MINIMAL.replace("capacity = 20000.0", "capacity = \"big\"");
        match parse_scenario(&text) {
            Err(Error::Parse { key, .. }) => assert_eq!(key, "producers[0].capacity"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_is_parse_error() {
        assert!(matches!(
            parse_scenario("n_days = = 3"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn round_trip() {
        for s in [Scenario::desk(), Scenario::desk_appliances()] {
            let text = scenario_to_toml(&s).unwrap();
            assert_eq!(parse_scenario(&text).unwrap(), s);
        }
        let mut with_renewable = Scenario::desk();
        with_renewable.renewable = Some(Default::default());
        let text = scenario_to_toml(&with_renewable).unwrap();
        assert_eq!(parse_scenario(&text).unwrap(), with_renewable);
    }
}
