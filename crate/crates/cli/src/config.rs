//! Scenario files for the `expand` command and shared input parsing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use slspec::angle::parse_angle;
use slspec::expansion::{Subinterval, TargetFunction};
use slspec::{BoundaryParams, Potential};

/// An angle written either as a number or as a token such as `"3pi/4"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Value(f64),
    Token(String),
}

impl Angle {
    pub fn radians(&self) -> Result<f64, String> {
        match self {
            Angle::Value(v) => Ok(*v),
            Angle::Token(t) => parse_angle(t).map_err(|e| e.to_string()),
        }
    }
}

/// The forcing or target function in a scenario: a tagged function or the
/// named sawtooth.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Named(String),
    Explicit(TargetFunction),
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TargetFunction, String> {
        let f = match self {
            FunctionSpec::Named(name) if name == "sawtooth" => slspec::corpus::sawtooth().map_err(|e| e.to_string())?,
            FunctionSpec::Named(name) => return Err(format!("unknown function {name:?}")),
            FunctionSpec::Explicit(f) => f.clone(),
        };
        f.validate().map_err(|e| e.to_string())?;
        Ok(f)
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Right,
    Left,
}

/// `{potential, alpha, beta, f, N_list, a}`; `potential` is relative to the
/// scenario file. `side = "left"` measures on `[0, a]` instead of `[a, pi]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub potential: PathBuf,
    pub alpha: Angle,
    pub beta: Angle,
    pub f: FunctionSpec,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub a: f64,
    #[serde(default)]
    pub side: Side,
}

/// A scenario with every reference resolved and checked.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub q: Potential,
    pub bp: BoundaryParams,
    pub f: TargetFunction,
    pub n_list: Vec<usize>,
    pub interval: Subinterval,
}

pub fn load_potential(path: &Path) -> Result<Potential, String> {
    Potential::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg: ScenarioConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let q = load_potential(&base.join(&cfg.potential))?;
    let bp = BoundaryParams::new(cfg.alpha.radians()?, cfg.beta.radians()?).map_err(|e| e.to_string())?;
    let f = cfg.f.build()?;
    if cfg.n_list.is_empty() || cfg.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err("N_list must be non-empty and strictly increasing".into());
    }
    let interval = match cfg.side {
        Side::Right => Subinterval::Right(cfg.a),
        Side::Left => Subinterval::Left(cfg.a),
    };
    Ok(Scenario {
        q,
        bp,
        f,
        n_list: cfg.n_list,
        interval,
    })
}

/// `--f` values: `sawtooth`, a number (constant forcing) or a JSON file
/// holding a tagged function.
pub fn parse_forcing(text: &str) -> Result<TargetFunction, String> {
    if let Ok(v) = text.parse::<f64>() {
        let f = TargetFunction::Constant { value: v };
        f.validate().map_err(|e| e.to_string())?;
        return Ok(f);
    }
    if text == "sawtooth" {
        return FunctionSpec::Named(text.into()).build();
    }
    let body = fs::read_to_string(text).map_err(|e| format!("{text}: {e}"))?;
    let spec: FunctionSpec = serde_json::from_str(&body).map_err(|e| format!("{text}: {e}"))?;
    spec.build()
}
