//! Scenario files: TOML sections of `key = value` pairs.

use std::path::Path;

use crate::config::ScenarioConfig;
use crate::error::{OscError, Result};
use crate::presets::Preset;
use crate::rng::RNG_ALGORITHM;

pub const FORMAT_VERSION: u32 = 1;

pub fn header() -> String {
    format!("# opportunistic supply-chain scenario\n# format: {FORMAT_VERSION}\n# rng: {RNG_ALGORITHM}\n")
}

pub fn to_toml(cfg: &ScenarioConfig) -> Result<String> {
    let body = toml::to_string(cfg).map_err(|e| OscError::Parse(e.to_string()))?;
    Ok(format!("{}\n{body}", header()))
}

pub fn from_toml(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| OscError::Parse(e.to_string()))
}

pub fn save_config(cfg: &ScenarioConfig, path: &Path) -> Result<()> {
    std::fs::write(path, to_toml(cfg)?)?;
    Ok(())
}

/// Preset name or path to a scenario file, then `key=value` overrides,
/// then validation.
pub fn load_config(source: &str, overrides: &[String]) -> Result<ScenarioConfig> {
    let base = match source.parse::<Preset>() {
        Ok(p) => p.config(),
        Err(preset_err) => {
            let path = Path::new(source);
            if !path.exists() {
                return Err(preset_err);
            }
            from_toml(&std::fs::read_to_string(path)?)?
        }
    };
    let cfg = apply_overrides(&base, overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies overrides such as `sigma=0.9` or `pricing.sigma=0.9`. A bare key
/// must name exactly one field across all sections.
pub fn apply_overrides(cfg: &ScenarioConfig, overrides: &[String]) -> Result<ScenarioConfig> {
    if overrides.is_empty() {
        return Ok(cfg.clone());
    }
    let mut root = toml::Table::try_from(cfg).map_err(|e| OscError::Parse(e.to_string()))?;
    for item in overrides {
        let (key, raw) = item.split_once('=').ok_or_else(|| OscError::Config {
            key: item.clone(),
            message: "override must look like key=value".into(),
        })?;
        let key = key.trim();
        let (section, field) = resolve_key(&root, key)?;
        let table = root.get_mut(&section).and_then(|v| v.as_table_mut()).expect("resolved section exists");
        let value = parse_value(raw.trim());
        let old = &table[&field];
        let value = match (old, value) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, v) => v,
        };
        if std::mem::discriminant(old) != std::mem::discriminant(&value) {
            return Err(OscError::Config {
                key: key.to_string(),
                message: format!("expected a {}, got `{}`", old.type_str(), raw.trim()),
            });
        }
        table.insert(field, value);
    }
    toml::Value::Table(root).try_into().map_err(|e: toml::de::Error| OscError::Parse(e.to_string()))
}

fn resolve_key(root: &toml::Table, key: &str) -> Result<(String, String)> {
    let unknown = || OscError::Config { key: key.to_string(), message: "unknown configuration key".into() };
    if let Some((section, field)) = key.split_once('.') {
        let known = root.get(section).and_then(|v| v.as_table()).is_some_and(|t| t.contains_key(field));
        return if known { Ok((section.to_string(), field.to_string())) } else { Err(unknown()) };
    }
    let hits: Vec<&String> =
        root.iter().filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(key))).map(|(s, _)| s).collect();
    match hits.as_slice() {
        [one] => Ok(((*one).clone(), key.to_string())),
        [] => Err(unknown()),
        many => Err(OscError::Config {
            key: key.to_string(),
            message: format!(
                "ambiguous key; qualify it with one of: {}",
                many.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn preset_lookup() {
        let cfg = load_config("electronics", &[]).unwrap();
        assert_eq!((cfg.pricing.sigma, cfg.lolog.theta_p), (0.70, 3.5));
        let err = load_config("retail", &[]).unwrap_err().to_string();
        assert!(err.contains("fast_fashion") && err.contains("electronics") && err.contains("perishables"));
    }

    #[test]
    fn overrides_apply_last() {
        let cfg = load_config("fast_fashion", &["sigma=0.9".into()]).unwrap();
        let mut expected = Preset::FastFashion.config();
        expected.pricing.sigma = 0.9;
        assert_eq!(cfg, expected);
        let cfg = load_config("fast_fashion", &["shocks.enabled=true".into(), "horizon=20".into()]).unwrap();
        assert!(cfg.shocks.enabled);
        assert_eq!(cfg.scenario.horizon, 20);
        let cfg = load_config("fast_fashion", &["theta_p=3".into()]).unwrap();
        assert_eq!(cfg.lolog.theta_p, 3.0);
        let cfg = load_config("fast_fashion", &["update_rule=bayes".into()]).unwrap();
        assert_eq!(cfg.trust.update_rule, crate::config::TrustRule::Bayes);
    }

    #[test]
    fn override_errors_name_key() {
        let err = load_config("fast_fashion", &["volatility=0.3".into()]).unwrap_err().to_string();
        assert!(err.contains("volatility"));
        let err = load_config("fast_fashion", &["sigma=high".into()]).unwrap_err().to_string();
        assert!(err.contains("sigma"));
        let err = load_config("fast_fashion", &["sigma=-0.5".into()]).unwrap_err().to_string();
        assert!(err.contains("sigma must be ≥ 0"));
        let err = load_config("fast_fashion", &["enabled".into()]).unwrap_err().to_string();
        assert!(err.contains("key=value"));
    }

    #[test]
    fn unknown_file_key_rejected() {
        let text = to_toml(&Preset::Perishables.config()).unwrap().replace("[shocks]", "[shocks]\nbogus = 1");
        assert!(from_toml(&text).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.toml");
        let cfg = Preset::Perishables.config();
        save_config(&cfg, &path).unwrap();
        assert_eq!(load_config(path.to_str().unwrap(), &[]).unwrap(), cfg);
        assert!(std::fs::read_to_string(&path).unwrap().contains(RNG_ALGORITHM));
    }

    #[test]
    fn shipped_presets_match() {
        let shipped = [
            (Preset::FastFashion, include_str!("../../presets/fast_fashion.toml")),
            (Preset::Electronics, include_str!("../../presets/electronics.toml")),
            (Preset::Perishables, include_str!("../../presets/perishables.toml")),
        ];
        for (p, text) in shipped {
            assert_eq!(from_toml(text).unwrap(), p.config(), "{}", p.name());
        }
    }

    proptest! {
        #[test]
        fn roundtrip_random_configs(
            sigma in 0.0f64..2.0, mu in -0.1f64..0.1, trust in 0.01f64..0.99,
            tp in -5.0f64..5.0, seed in 0..=i64::MAX as u64, horizon in 1usize..500,
            w in proptest::collection::vec(0.01f64..1.0, 4), perishable in any::<bool>(),
        ) {
            let mut cfg = Preset::FastFashion.config();
            cfg.pricing.sigma = sigma;
            cfg.pricing.mu = mu;
            cfg.pricing.perishable = perishable;
            cfg.trust.baseline_trust = trust;
            cfg.lolog.theta_p = tp;
            cfg.scenario.seed = seed;
            cfg.scenario.horizon = horizon;
            let total: f64 = w.iter().sum();
            cfg.trust.agent_type_weights = [w[0] / total, w[1] / total, w[2] / total, w[3] / total];
            let back = from_toml(&to_toml(&cfg).unwrap()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
