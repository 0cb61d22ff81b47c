//! Flat `key = value` run configuration.
//!
//! One key per line, `#` starts a comment, decimal numbers with optional
//! exponent. Unknown and duplicate keys are rejected with the offending
//! line number; the nine physical keys are required, everything else takes
//! the library defaults. `lambda` is optional because the search commands
//! identify it.

use linstroke::dynamics::IntegratorConfig;
use linstroke::error::EngineError;
use linstroke::model::EngineParams;
use linstroke::optimizer::SearchConfig;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required keys: {}", keys.join(", "))]
    MissingKeys { keys: Vec<&'static str> },
    #[error("key `{key}`: {message}")]
    Invariant { key: String, message: String },
}

/// All engine, integrator and search settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p1_left_pa: f64,
    pub p1_right_pa: f64,
    pub q_in_joule: f64,
    pub x_s_m: f64,
    pub x_m_m: f64,
    pub bore_left_m: f64,
    pub lambda: Option<f64>,
    pub friction_n: f64,
    pub polytropic_n: f64,
    pub mass_kg: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_init: f64,
    pub step_init: f64,
    pub tol_j_m: f64,
    pub tol_s: f64,
    pub max_iter: usize,
    pub dt_init_s: f64,
    pub t_max_s: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub guard_eps_m: f64,
    pub event_tol_m: f64,
}

const REQUIRED_KEYS: [&str; 9] = [
    "p1_left_pa",
    "p1_right_pa",
    "q_in_joule",
    "x_s_m",
    "x_m_m",
    "bore_left_m",
    "friction_n",
    "polytropic_n",
    "mass_kg",
];

const FLOAT_KEYS: [&str; 22] = [
    "p1_left_pa",
    "p1_right_pa",
    "q_in_joule",
    "x_s_m",
    "x_m_m",
    "bore_left_m",
    "lambda",
    "friction_n",
    "polytropic_n",
    "mass_kg",
    "lambda_min",
    "lambda_max",
    "lambda_init",
    "step_init",
    "tol_j_m",
    "tol_s",
    "dt_init_s",
    "t_max_s",
    "rel_tol",
    "abs_tol",
    "guard_eps_m",
    "event_tol_m",
];

/// Maps a library field name to its config key for diagnostics.
pub fn config_key_for(field: &str) -> &str {
    match field {
        "p1_left" => "p1_left_pa",
        "p1_right" => "p1_right_pa",
        "q_in" => "q_in_joule",
        "x_s" => "x_s_m",
        "x_m" => "x_m_m",
        "bore_left" => "bore_left_m",
        "n_poly" => "polytropic_n",
        "mass" => "mass_kg",
        "friction" => "friction_n",
        "tol_j" => "tol_j_m",
        "dt_init" => "dt_init_s",
        "t_max" => "t_max_s",
        "guard_eps" => "guard_eps_m",
        "event_tol" => "event_tol_m",
        other => other,
    }
}

fn invariant_from(err: EngineError) -> ConfigError {
    match err {
        EngineError::InvalidParam { name, reason, .. } => ConfigError::Invariant {
            key: config_key_for(name).to_string(),
            message: reason.to_string(),
        },
        other => ConfigError::Invariant {
            key: String::new(),
            message: other.to_string(),
        },
    }
}

impl RunConfig {
    /// Parses and fully validates a config text; the first error wins.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut floats: Vec<(&'static str, f64)> = Vec::new();
        let mut max_iter: Option<usize> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key_raw, value_raw)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key_raw.trim();
            let value = value_raw.trim();

            if key == "max_iter" {
                if max_iter.is_some() {
                    return Err(ConfigError::Syntax {
                        line,
                        message: "duplicate key `max_iter`".into(),
                    });
                }
                let parsed: usize = value.parse().map_err(|_| ConfigError::Syntax {
                    line,
                    message: format!("key `max_iter`: `{value}` is not a non-negative integer"),
                })?;
                max_iter = Some(parsed);
                continue;
            }

            let Some(canonical) = FLOAT_KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            };
            if floats.iter().any(|(k, _)| k == canonical) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            let parsed: f64 = value.parse().map_err(|_| ConfigError::Syntax {
                line,
                message: format!("key `{key}`: `{value}` is not a number"),
            })?;
            if !parsed.is_finite() {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("key `{key}`: value must be finite"),
                });
            }
            floats.push((canonical, parsed));
        }

        let missing: Vec<&'static str> = REQUIRED_KEYS
            .iter()
            .filter(|k| !floats.iter().any(|(key, _)| key == *k))
            .copied()
            .collect();
        if !missing.is_empty() {
            return Err(ConfigError::MissingKeys { keys: missing });
        }

        let get = |key: &str| floats.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let search_defaults = SearchConfig::default();
        let integ_defaults = IntegratorConfig::default();
        let cfg = RunConfig {
            p1_left_pa: get("p1_left_pa").unwrap(),
            p1_right_pa: get("p1_right_pa").unwrap(),
            q_in_joule: get("q_in_joule").unwrap(),
            x_s_m: get("x_s_m").unwrap(),
            x_m_m: get("x_m_m").unwrap(),
            bore_left_m: get("bore_left_m").unwrap(),
            lambda: get("lambda"),
            friction_n: get("friction_n").unwrap(),
            polytropic_n: get("polytropic_n").unwrap(),
            mass_kg: get("mass_kg").unwrap(),
            lambda_min: get("lambda_min").unwrap_or(search_defaults.lambda_min),
            lambda_max: get("lambda_max").unwrap_or(search_defaults.lambda_max),
            lambda_init: get("lambda_init").unwrap_or(search_defaults.lambda_init),
            step_init: get("step_init").unwrap_or(search_defaults.step_init),
            tol_j_m: get("tol_j_m").unwrap_or(search_defaults.tol_j),
            tol_s: get("tol_s").unwrap_or(search_defaults.tol_s),
            max_iter: max_iter.unwrap_or(search_defaults.max_iter),
            dt_init_s: get("dt_init_s").unwrap_or(integ_defaults.dt_init),
            t_max_s: get("t_max_s").unwrap_or(integ_defaults.t_max),
            rel_tol: get("rel_tol").unwrap_or(integ_defaults.rel_tol),
            abs_tol: get("abs_tol").unwrap_or(integ_defaults.abs_tol),
            guard_eps_m: get("guard_eps_m").unwrap_or(integ_defaults.guard_eps),
            event_tol_m: get("event_tol_m").unwrap_or(integ_defaults.event_tol),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-validates every invariant of the underlying types, naming the
    /// config key in diagnostics.
    pub fn validate(&self) -> Result<(), ConfigError> {
        // λ is identified by the search commands; validate with a neutral
        // placeholder when absent.
        self.engine_params(self.lambda.unwrap_or(1.0))
            .validate()
            .map_err(invariant_from)?;
        self.search_config().validate().map_err(invariant_from)?;
        self.integrator_config()
            .validate_for(&self.engine_params(self.lambda.unwrap_or(1.0)))
            .map_err(invariant_from)?;
        Ok(())
    }

    pub fn engine_params(&self, lambda: f64) -> EngineParams {
        EngineParams {
            p1_left: self.p1_left_pa,
            p1_right: self.p1_right_pa,
            q_in: self.q_in_joule,
            x_s: self.x_s_m,
            x_m: self.x_m_m,
            bore_left: self.bore_left_m,
            lambda,
            n_poly: self.polytropic_n,
            mass: self.mass_kg,
            friction: self.friction_n,
        }
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            lambda_init: self.lambda_init,
            step_init: self.step_init,
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            tol_j: self.tol_j_m,
            tol_s: self.tol_s,
            max_iter: self.max_iter,
        }
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt_init: self.dt_init_s,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_max: self.t_max_s,
            guard_eps: self.guard_eps_m,
            event_tol: self.event_tol_m,
        }
    }

    /// Canonical `key = value` serialization; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut push = |key: &str, value: String| {
            s.push_str(key);
            s.push_str(" = ");
            s.push_str(&value);
            s.push('\n');
        };
        push("p1_left_pa", self.p1_left_pa.to_string());
        push("p1_right_pa", self.p1_right_pa.to_string());
        push("q_in_joule", self.q_in_joule.to_string());
        push("x_s_m", self.x_s_m.to_string());
        push("x_m_m", self.x_m_m.to_string());
        push("bore_left_m", self.bore_left_m.to_string());
        if let Some(lambda) = self.lambda {
            push("lambda", lambda.to_string());
        }
        push("friction_n", self.friction_n.to_string());
        push("polytropic_n", self.polytropic_n.to_string());
        push("mass_kg", self.mass_kg.to_string());
        push("lambda_min", self.lambda_min.to_string());
        push("lambda_max", self.lambda_max.to_string());
        push("lambda_init", self.lambda_init.to_string());
        push("step_init", self.step_init.to_string());
        push("tol_j_m", self.tol_j_m.to_string());
        push("tol_s", self.tol_s.to_string());
        push("max_iter", self.max_iter.to_string());
        push("dt_init_s", self.dt_init_s.to_string());
        push("t_max_s", self.t_max_s.to_string());
        push("rel_tol", self.rel_tol.to_string());
        push("abs_tol", self.abs_tol.to_string());
        push("guard_eps_m", self.guard_eps_m.to_string());
        push("event_tol_m", self.event_tol_m.to_string());
        s
    }
}
