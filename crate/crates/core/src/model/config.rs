//! JSON configuration documents and their validation.
//!
//! A document has a mandatory `capacity` section and optional `game`,
//! `classes`, `simulation` and `corridor` sections. Validation reports the
//! first violated invariant with its field path.

use serde::{Deserialize, Serialize};

use super::{Capacity, GameConfig, UpdateOrder, VmClassSpec, VmGameParams, DEFAULT_FLOOR_FRACTION};
use crate::error::ConfigError;
use crate::sim::{CorridorConfig, LossSimParams, Rsu};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub capacity: CapacityDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ClassDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corridor: Option<CorridorDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityDoc {
    #[serde(alias = "C")]
    pub compute_total: f64,
    #[serde(alias = "M")]
    pub storage_total: f64,
    #[serde(default, alias = "C_r")]
    pub compute_reserved: f64,
    #[serde(default, alias = "M_r")]
    pub storage_reserved: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDoc {
    pub players: Vec<PlayerDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_order: Option<UpdateOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_compute: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_storage: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vrc: Option<VrcDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerDoc {
    pub alpha: f64,
    pub beta: f64,
    #[serde(alias = "lambda")]
    pub price_compute: f64,
    #[serde(alias = "gamma")]
    pub price_storage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VrcDoc {
    pub cap_compute: f64,
    pub cap_storage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDoc {
    #[serde(alias = "c")]
    pub compute_req: f64,
    #[serde(alias = "m")]
    pub storage_req: f64,
    #[serde(alias = "lambda_l")]
    pub local_arrival_rate: f64,
    #[serde(alias = "mu_l")]
    pub local_departure_rate: f64,
    #[serde(default, alias = "lambda_g")]
    pub migrated_arrival_rate: f64,
    #[serde(default, alias = "mu_g")]
    pub migrated_departure_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDoc {
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_replications() -> usize {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorridorDoc {
    pub rsus: Vec<RsuDoc>,
    pub road_length: f64,
    pub vehicle_arrival_rate: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    #[serde(default)]
    pub vehicular_cloud_probability: f64,
    #[serde(default)]
    pub vm_class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsuDoc {
    pub start: f64,
    pub end: f64,
    pub cloudlet: usize,
}

/// Game section after validation, including optional initial requests.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSetup {
    pub config: GameConfig,
    pub initial_compute: Option<Vec<f64>>,
    pub initial_storage: Option<Vec<f64>>,
    pub vrc_caps: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    pub capacity: Capacity,
    pub game: Option<GameSetup>,
    pub classes: Option<Vec<VmClassSpec>>,
    pub simulation: Option<LossSimParams>,
    pub corridor: Option<CorridorConfig>,
    pub corridor_vm_class: usize,
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config documents always serialize")
    }
}

/// Validate a parsed configuration document into typed, invariant-checked
/// values.
pub fn validate_config(raw: &ConfigDocument) -> Result<ValidatedConfig, ConfigError> {
    let c = raw.capacity;
    let capacity = Capacity::validate_at(
        "capacity",
        c.compute_total,
        c.storage_total,
        c.compute_reserved,
        c.storage_reserved,
    )?;

    let game = raw.game.as_ref().map(|g| validate_game(g, &capacity)).transpose()?;

    let classes = raw
        .classes
        .as_ref()
        .map(|docs| {
            if docs.is_empty() {
                return Err(ConfigError::new("classes", "must contain at least one class"));
            }
            docs.iter()
                .enumerate()
                .map(|(k, d)| {
                    let spec = VmClassSpec {
                        compute_req: d.compute_req,
                        storage_req: d.storage_req,
                        local_arrival_rate: d.local_arrival_rate,
                        local_departure_rate: d.local_departure_rate,
                        migrated_arrival_rate: d.migrated_arrival_rate,
                        migrated_departure_rate: d.migrated_departure_rate,
                    };
                    spec.validate_at(&format!("classes[{k}]"))?;
                    Ok(spec)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;

    let simulation = raw
        .simulation
        .map(|s| {
            LossSimParams::new(
                s.horizon,
                s.warmup.unwrap_or(0.1 * s.horizon),
                s.replications,
                s.seed,
            )
        })
        .transpose()?;

    let (corridor, corridor_vm_class) = match &raw.corridor {
        None => (None, 0),
        Some(doc) => {
            let rsus = doc
                .rsus
                .iter()
                .map(|r| Rsu {
                    start: r.start,
                    end: r.end,
                    cloudlet: r.cloudlet,
                })
                .collect();
            let corridor = CorridorConfig::new(
                rsus,
                doc.road_length,
                doc.vehicle_arrival_rate,
                (doc.speed_min, doc.speed_max),
                doc.vehicular_cloud_probability,
            )?;
            match &classes {
                Some(cls) if doc.vm_class < cls.len() => {}
                Some(_) => {
                    return Err(ConfigError::new(
                        "corridor.vm_class",
                        "must index an entry of classes",
                    ))
                }
                None => {
                    return Err(ConfigError::new(
                        "classes",
                        "required when a corridor section is present",
                    ))
                }
            }
            (Some(corridor), doc.vm_class)
        }
    };

    Ok(ValidatedConfig {
        capacity,
        game,
        classes,
        simulation,
        corridor,
        corridor_vm_class,
    })
}

fn validate_game(g: &GameDoc, capacity: &Capacity) -> Result<GameSetup, ConfigError> {
    let players = g
        .players
        .iter()
        .map(|p| VmGameParams {
            alpha: p.alpha,
            beta: p.beta,
            price_compute: p.price_compute,
            price_storage: p.price_storage,
        })
        .collect::<Vec<_>>();
    let floor = g.request_floor.unwrap_or(
        capacity.compute_total().min(capacity.storage_total()) * DEFAULT_FLOOR_FRACTION,
    );
    let config = GameConfig::with_options(
        *capacity,
        players,
        floor,
        g.tolerance.unwrap_or(super::DEFAULT_TOLERANCE),
        g.max_iterations.unwrap_or(super::DEFAULT_MAX_ITERATIONS),
        g.update_order.unwrap_or_default(),
    )?;
    let n = config.num_players();
    let check_initial = |field: &str, v: &Option<Vec<f64>>, limit: f64| -> Result<(), ConfigError> {
        if let Some(v) = v {
            if v.len() != n {
                return Err(ConfigError::new(
                    format!("game.{field}"),
                    format!("must have one entry per player ({n})"),
                ));
            }
            for (i, &x) in v.iter().enumerate() {
                if !(x > 0.0 && x <= limit) {
                    return Err(ConfigError::new(
                        format!("game.{field}[{i}]"),
                        format!("must be in (0, {limit}]"),
                    ));
                }
            }
        }
        Ok(())
    };
    check_initial("initial_compute", &g.initial_compute, capacity.compute_total())?;
    check_initial("initial_storage", &g.initial_storage, capacity.storage_total())?;
    if let Some(vrc) = g.vrc {
        super::positive("game.vrc.cap_compute", vrc.cap_compute)?;
        super::positive("game.vrc.cap_storage", vrc.cap_storage)?;
    }
    Ok(GameSetup {
        config,
        initial_compute: g.initial_compute.clone(),
        initial_storage: g.initial_storage.clone(),
        vrc_caps: g.vrc.map(|v| (v.cap_compute, v.cap_storage)),
    })
}

impl From<&ValidatedConfig> for ConfigDocument {
    /// Fully explicit document; re-validating it yields the same config.
    fn from(v: &ValidatedConfig) -> Self {
        let cap = &v.capacity;
        Self {
            capacity: CapacityDoc {
                compute_total: cap.compute_total(),
                storage_total: cap.storage_total(),
                compute_reserved: cap.compute_reserved(),
                storage_reserved: cap.storage_reserved(),
            },
            game: v.game.as_ref().map(|g| GameDoc {
                players: g
                    .config
                    .players()
                    .iter()
                    .map(|p| PlayerDoc {
                        alpha: p.alpha,
                        beta: p.beta,
                        price_compute: p.price_compute,
                        price_storage: p.price_storage,
                    })
                    .collect(),
                request_floor: Some(g.config.request_floor()),
                tolerance: Some(g.config.tolerance()),
                max_iterations: Some(g.config.max_iterations()),
                update_order: Some(g.config.update_order()),
                initial_compute: g.initial_compute.clone(),
                initial_storage: g.initial_storage.clone(),
                vrc: g.vrc_caps.map(|(cap_compute, cap_storage)| VrcDoc {
                    cap_compute,
                    cap_storage,
                }),
            }),
            classes: v.classes.as_ref().map(|cls| {
                cls.iter()
                    .map(|c| ClassDoc {
                        compute_req: c.compute_req,
                        storage_req: c.storage_req,
                        local_arrival_rate: c.local_arrival_rate,
                        local_departure_rate: c.local_departure_rate,
                        migrated_arrival_rate: c.migrated_arrival_rate,
                        migrated_departure_rate: c.migrated_departure_rate,
                    })
                    .collect()
            }),
            simulation: v.simulation.map(|s| SimulationDoc {
                horizon: s.horizon,
                warmup: Some(s.warmup),
                replications: s.replications,
                seed: s.seed,
            }),
            corridor: v.corridor.as_ref().map(|c| CorridorDoc {
                rsus: c
                    .rsus()
                    .iter()
                    .map(|r| RsuDoc {
                        start: r.start,
                        end: r.end,
                        cloudlet: r.cloudlet,
                    })
                    .collect(),
                road_length: c.road_length(),
                vehicle_arrival_rate: c.vehicle_arrival_rate(),
                speed_min: c.speed_range().0,
                speed_max: c.speed_range().1,
                vehicular_cloud_probability: c.vehicular_cloud_probability(),
                vm_class: v.corridor_vm_class,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> ConfigDocument {
        ConfigDocument::from_json(text).unwrap()
    }

    #[test]
    fn short_keys_are_accepted() {
        let d = doc(r#"{"capacity": {"C": 50, "M": 100, "C_r": 0, "M_r": 0}}"#);
        let v = validate_config(&d).unwrap();
        assert_eq!(v.capacity.compute_total(), 50.0);
        assert!(v.game.is_none());
    }

    #[test]
    fn reports_player_path() {
        let d = doc(
            r#"{"capacity": {"C": 50, "M": 100},
                "game": {"players": [
                    {"alpha": 1, "beta": 1, "lambda": 1, "gamma": 1},
                    {"alpha": 1, "beta": 1, "lambda": 1, "gamma": 1},
                    {"alpha": -1, "beta": 1, "lambda": 1, "gamma": 1}]}}"#,
        );
        let err = validate_config(&d).unwrap_err();
        assert_eq!(err.to_string(), "game.players[2].alpha must be > 0");
    }

    #[test]
    fn reports_class_path() {
        let d = doc(
            r#"{"capacity": {"C": 50, "M": 100},
                "classes": [{"c": 20, "m": 15, "lambda_l": 0.1, "mu_l": 2.0, "lambda_g": 0.05, "mu_g": 0.1},
                            {"c": 10, "m": 40, "lambda_l": 0.1, "mu_l": 0.0}]}"#,
        );
        let err = validate_config(&d).unwrap_err();
        assert_eq!(err.path, "classes[1].local_departure_rate");
    }

    #[test]
    fn initial_requests_must_match_players() {
        let d = doc(
            r#"{"capacity": {"C": 50, "M": 100},
                "game": {"players": [{"alpha": 1, "beta": 1, "lambda": 1, "gamma": 1}],
                         "initial_compute": [10, 5]}}"#,
        );
        assert_eq!(validate_config(&d).unwrap_err().path, "game.initial_compute");
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ConfigDocument::from_json(r#"{"capacity": {"C": 1, "M": 1, "X": 2}}"#).is_err());
    }

    #[test]
    fn simulation_defaults() {
        let d = doc(r#"{"capacity": {"C": 2, "M": 1}, "simulation": {"horizon": 1000}}"#);
        let s = validate_config(&d).unwrap().simulation.unwrap();
        assert_eq!(s.warmup, 100.0);
        assert_eq!(s.replications, 30);
        let d = doc(r#"{"capacity": {"C": 2, "M": 1}, "simulation": {"horizon": 10, "warmup": 10}}"#);
        assert_eq!(validate_config(&d).unwrap_err().path, "simulation.warmup");
    }

    #[test]
    fn corridor_requires_classes() {
        let d = doc(
            r#"{"capacity": {"C": 50, "M": 100},
                "corridor": {"rsus": [{"start": 0, "end": 400, "cloudlet": 0}], "road_length": 400,
                             "vehicle_arrival_rate": 0.1, "speed_min": 20, "speed_max": 20}}"#,
        );
        assert_eq!(validate_config(&d).unwrap_err().path, "classes");
    }
}
