use std::collections::BTreeMap;

use crate::lang::Atom;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// Reading model: `tp = p(reading true | fluent true)`,
/// `fp = p(reading true | fluent false)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SensorModel {
    pub tp: f64,
    pub fp: f64,
}

/// Where an action's failed attempt leaves things.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slip {
    /// Nothing changes.
    Stay,
    /// Spread evenly over the values adjacent to the current one.
    Adjacent,
    /// Explicit weights over named values; leftover mass is spread evenly.
    Dist(Vec<(String, f64)>),
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MotionModel {
    pub success: f64,
    pub slip: Slip,
}

/// Per-predicate sensor models and per-action motion models, each with a
/// fallback for unnamed symbols.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct NoiseConfig {
    pub default_sensor: SensorModel,
    pub sensors: BTreeMap<String, SensorModel>,
    pub default_motion: MotionModel,
    pub motions: BTreeMap<String, MotionModel>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            default_sensor: SensorModel { tp: 0.8, fp: 0.1 },
            sensors: BTreeMap::new(),
            default_motion: MotionModel {
                success: 0.9,
                slip: Slip::Stay,
            },
            motions: BTreeMap::new(),
        }
    }
}

impl NoiseConfig {
    /// Noise-free sensing and acting.
    pub fn perfect() -> Self {
        NoiseConfig {
            default_sensor: SensorModel { tp: 1.0, fp: 0.0 },
            sensors: BTreeMap::new(),
            default_motion: MotionModel {
                success: 1.0,
                slip: Slip::Stay,
            },
            motions: BTreeMap::new(),
        }
    }

    pub fn sensor(&self, fluent: &Atom) -> SensorModel {
        self.sensors.get(&fluent.pred).copied().unwrap_or(self.default_sensor)
    }

    pub fn motion(&self, action: &str) -> MotionModel {
        self.motions.get(action).cloned().unwrap_or_else(|| self.default_motion.clone())
    }

    /// Parses lines of the form
    ///
    /// ```text
    /// sensor has_location tp=0.8 fp=0.1
    /// sensor * tp=0.9 fp=0.05
    /// motion move success=0.9 slip=stay
    /// motion move success=0.8 slip=a2:0.5,a6:0.5
    /// ```
    ///
    /// on top of the defaults. `%` starts a comment.
    pub fn parse(text: &str) -> Result<Self, NoiseError> {
        let mut cfg = NoiseConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |msg: String| NoiseError::Format { line, msg };
            let body = raw.split('%').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut words = body.split_whitespace();
            let kind = words.next().unwrap_or("");
            let name = words.next().ok_or_else(|| err("missing symbol".into()))?.to_string();
            let mut kv = BTreeMap::new();
            for w in words {
                let (key, val) = w.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{w}`")))?;
                kv.insert(key, val);
            }
            let prob = |key: &str| -> Result<Option<f64>, NoiseError> {
                match kv.get(key) {
                    None => Ok(None),
                    Some(v) => {
                        let p: f64 = v.parse().map_err(|_| err(format!("bad number `{v}`")))?;
                        if !(0.0..=1.0).contains(&p) {
                            return Err(err(format!("{key}={p} is not a probability")));
                        }
                        Ok(Some(p))
                    }
                }
            };
            match kind {
                "sensor" => {
                    let base = cfg.default_sensor;
                    let m = SensorModel {
                        tp: prob("tp")?.unwrap_or(base.tp),
                        fp: prob("fp")?.unwrap_or(base.fp),
                    };
                    if name == "*" {
                        cfg.default_sensor = m;
                    } else {
                        cfg.sensors.insert(name, m);
                    }
                }
                "motion" => {
                    let base = cfg.default_motion.clone();
                    let slip = match kv.get("slip").copied() {
                        None => base.slip,
                        Some("stay") => Slip::Stay,
                        Some("adjacent") => Slip::Adjacent,
                        Some(spec) => {
                            let mut d = Vec::new();
                            for part in spec.split(',') {
                                let (v, w) = part.split_once(':').ok_or_else(|| err(format!("bad slip entry `{part}`")))?;
                                let w: f64 = w.parse().map_err(|_| err(format!("bad number `{w}`")))?;
                                d.push((v.to_string(), w));
                            }
                            let total: f64 = d.iter().map(|(_, w)| w).sum();
                            if d.iter().any(|(_, w)| *w < 0.0) || total > 1.0 + 1e-9 {
                                return Err(err("slip weights must be non-negative and sum to at most 1".into()));
                            }
                            Slip::Dist(d)
                        }
                    };
                    let m = MotionModel {
                        success: prob("success")?.unwrap_or(base.success),
                        slip,
                    };
                    if name == "*" {
                        cfg.default_motion = m;
                    } else {
                        cfg.motions.insert(name, m);
                    }
                }
                other => return Err(err(format!("unknown entry `{other}`"))),
            }
        }
        Ok(cfg)
    }
}
