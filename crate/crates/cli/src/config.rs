//! JSON model files.

use std::path::Path;

use glom_core::exactmath::ParamKind;
use glom_core::glom::{builtin_model, Glom, Gyrostat, ParamSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub modes: usize,
    pub gyrostats: Vec<GyrostatConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GyrostatConfig {
    pub modes: [usize; 3],
    #[serde(default)]
    pub params: ParamsConfig,
}

/// Missing coefficients are free (`"generic"`); `r` defaults to `-p-q`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
}

fn spec(text: &Option<String>) -> Result<ParamSpec, CliError> {
    match text {
        None => Ok(ParamSpec::Generic),
        Some(t) => t.parse().map_err(CliError::from),
    }
}

impl ModelConfig {
    pub fn to_glom(&self) -> Result<Glom, CliError> {
        let gs = self
            .gyrostats
            .iter()
            .map(|g| {
                let p = &g.params;
                Ok(Gyrostat {
                    modes: g.modes,
                    a: spec(&p.a)?,
                    b: spec(&p.b)?,
                    c: spec(&p.c)?,
                    p: spec(&p.p)?,
                    q: spec(&p.q)?,
                    r: p.r.as_ref().map(|t| t.parse()).transpose()?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Glom::new(self.modes, gs)?)
    }

    pub fn from_glom(g: &Glom) -> Self {
        let text = |s: Option<&ParamSpec>| s.map(|s| s.to_string());
        ModelConfig {
            modes: g.modes(),
            gyrostats: g
                .gyrostats()
                .iter()
                .map(|gy| GyrostatConfig {
                    modes: gy.modes,
                    params: ParamsConfig {
                        a: text(gy.spec(ParamKind::A)),
                        b: text(gy.spec(ParamKind::B)),
                        c: text(gy.spec(ParamKind::C)),
                        p: text(gy.spec(ParamKind::P)),
                        q: text(gy.spec(ParamKind::Q)),
                        r: gy.r.as_ref().map(|s| s.to_string()),
                    },
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Failure(format!("parse error: {e}")))
    }
}

/// Reads a model from a JSON file, or falls back to a built-in name such
/// as `model2` or `sparse(3)` when no such file exists.
pub fn load_model(arg: &str) -> Result<Glom, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Failure(format!("cannot read {arg}: {e}")))?;
        return ModelConfig::parse(&text)?.to_glom();
    }
    builtin_model(arg).map_err(|_| {
        CliError::Usage(format!(
            "{arg:?} is neither a readable file nor a built-in model"
        ))
    })
}
