//! `key = value` run configuration with dotted section prefixes.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use quoter_core::hjb::{required_full_n_t, Grid};
use quoter_core::model::ModelParams;
use quoter_core::oracle::{SweepBox, SweepConfig};
use quoter_core::sim::{FillModel, PathConfig};

use crate::error::{CliError, CliResult};

/// Every key the configuration understands.
pub const KNOWN_KEYS: &[&str] = &[
    "model.sigma",
    "model.gamma",
    "model.A",
    "model.kappa",
    "model.T",
    "model.w",
    "grid.s_min",
    "grid.s_max",
    "grid.n_s",
    "grid.n_t",
    "grid.q_min",
    "grid.q_max",
    "grid.clamp",
    "grid.levels",
    "sim.n_paths",
    "sim.dt",
    "sim.seed",
    "sim.s0",
    "sim.x0",
    "sim.q0",
    "sim.q_cap",
    "sim.clamp",
    "sim.fill_model",
    "sim.arms",
    "sim.half_spread",
    "state.s",
    "state.q",
    "state.t",
    "state.x",
    "verify.draws",
    "verify.seed",
    "verify.mc_samples",
    "verify.fk_samples",
    "verify.gamma",
    "verify.sigma",
    "verify.kappa",
    "verify.A",
    "verify.tau",
    "verify.q_abs_max",
    "verify.s",
    "verify.x",
];

#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut map = ConfigMap::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected `key = value`, got `{raw}`", n + 1)));
            };
            map.set(key.trim(), value.trim())?;
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult {
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> CliResult {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{pair}` is not `key=value`")))?;
        self.set(k.trim(), v.trim())
    }

    fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.parsed(key)
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.parsed(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn range(&self, key: &str, default: (f64, f64)) -> CliResult<(f64, f64)> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => parse_range(v).map_err(|m| CliError::Config(format!("`{key}`: {m}"))),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Parses `lo..hi`.
pub fn parse_range<T: FromStr>(text: &str) -> Result<(T, T), String> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| format!("expected `lo..hi`, got `{text}`"))?;
    let parse = |s: &str| s.trim().parse::<T>().map_err(|_| format!("cannot parse `{s}` in `{text}`"));
    Ok((parse(lo)?, parse(hi)?))
}

/// Strategy arm named in `sim.arms` / `--arms`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Asymptotic,
    Symmetric,
    Frozen,
    Grid,
}

impl FromStr for Arm {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "asymptotic" => Ok(Arm::Asymptotic),
            "symmetric" => Ok(Arm::Symmetric),
            "frozen" => Ok(Arm::Frozen),
            "grid" => Ok(Arm::Grid),
            other => Err(CliError::Config(format!(
                "unknown arm `{other}` (expected asymptotic, symmetric, frozen or grid)"
            ))),
        }
    }
}

pub fn parse_arms(list: &str) -> CliResult<Vec<Arm>> {
    let arms = list.split(',').map(str::parse).collect::<CliResult<Vec<Arm>>>()?;
    if arms.is_empty() {
        return Err(CliError::Config("no strategy arms given".into()));
    }
    Ok(arms)
}

/// Market state used by `quotes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateConfig {
    pub s: f64,
    pub q: i64,
    pub t: f64,
    pub x: f64,
}

/// Fully parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams<f64>,
    pub grid: Grid<f64>,
    pub grid_clamp: bool,
    pub levels: usize,
    pub path: PathConfig,
    pub arms: Vec<Arm>,
    /// Symmetric arm half-spread; `None` matches the average optimal spread.
    pub half_spread: Option<f64>,
    pub state: StateConfig,
    pub sweep: SweepConfig,
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> CliResult<Self> {
        let mut params = ModelParams::new(
            map.require("model.sigma")?,
            map.require("model.gamma")?,
            map.require("model.A")?,
            map.require("model.kappa")?,
            map.require("model.T")?,
        )?;
        if let Some(w) = map.opt("model.w")? {
            params = params.with_discount(w)?;
        }

        let mut grid = Grid {
            s_min: map.get("grid.s_min", 50.0)?,
            s_max: map.get("grid.s_max", 150.0)?,
            n_s: map.get("grid.n_s", 200)?,
            n_t: 1,
            q_min: map.get("grid.q_min", -10)?,
            q_max: map.get("grid.q_max", 10)?,
        };
        grid.validate()?;
        // absent n_t means the smallest step count the full solver accepts
        grid.n_t = match map.opt("grid.n_t")? {
            Some(n) => n,
            None => required_full_n_t(&params, &grid),
        };
        grid.validate()?;

        let defaults = PathConfig::default();
        let fill_model = match map.raw("sim.fill_model").unwrap_or("mean-matched") {
            "mean-matched" => FillModel::MeanMatched,
            "first-arrival" => FillModel::FirstArrival,
            other => {
                return Err(CliError::Config(format!(
                    "`sim.fill_model`: expected mean-matched or first-arrival, got `{other}`"
                )))
            }
        };
        let path = PathConfig {
            n_paths: map.get("sim.n_paths", defaults.n_paths)?,
            dt: map.get("sim.dt", defaults.dt)?,
            seed: map.get("sim.seed", defaults.seed)?,
            s0: map.get("sim.s0", defaults.s0)?,
            x0: map.get("sim.x0", defaults.x0)?,
            q0: map.get("sim.q0", defaults.q0)?,
            q_cap: map.opt("sim.q_cap")?,
            clamp: map.get("sim.clamp", defaults.clamp)?,
            fill_model,
        };
        path.n_steps(params.horizon_t)?;

        let state = StateConfig {
            s: map.get("state.s", 100.0)?,
            q: map.get("state.q", 0)?,
            t: map.get("state.t", 0.0)?,
            x: map.get("state.x", 0.0)?,
        };

        let base = SweepConfig::default();
        let b = base.bounds;
        let sweep = SweepConfig {
            bounds: SweepBox {
                gamma: map.range("verify.gamma", b.gamma)?,
                sigma: map.range("verify.sigma", b.sigma)?,
                kappa: map.range("verify.kappa", b.kappa)?,
                big_a: map.range("verify.A", b.big_a)?,
                tau: map.range("verify.tau", b.tau)?,
                q_abs_max: map.get("verify.q_abs_max", b.q_abs_max)?,
                s: map.range("verify.s", b.s)?,
                x: map.range("verify.x", b.x)?,
            },
            draws: map.get("verify.draws", base.draws)?,
            seed: map.get("verify.seed", base.seed)?,
            mc_samples: map.get("verify.mc_samples", base.mc_samples)?,
            fk_samples: map.get("verify.fk_samples", base.fk_samples)?,
            perturbation: None,
        };

        let half_spread = map.opt("sim.half_spread")?;
        let arms = parse_arms(map.raw("sim.arms").unwrap_or("asymptotic,symmetric"))?;
        Ok(RunConfig {
            params,
            grid,
            grid_clamp: map.get("grid.clamp", true)?,
            levels: map.get("grid.levels", 3)?,
            path,
            arms,
            half_spread,
            state,
            sweep,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "
        # market
        model.sigma = 2
        model.gamma = 0.1
        model.A = 140
        model.kappa = 1.5
        model.T = 1   # horizon
    ";

    #[test]
    fn parses_and_defaults() {
        let cfg = RunConfig::from_map(&ConfigMap::parse(BASE).unwrap()).unwrap();
        assert_eq!(cfg.params.big_a, 140.0);
        assert_eq!(cfg.grid.n_s, 200);
        assert!(cfg.grid.check_cfl(2.0, 1.0).is_ok());
        assert_eq!(cfg.arms, vec![Arm::Asymptotic, Arm::Symmetric]);
        assert_eq!(cfg.path.n_paths, 10_000);
    }

    #[test]
    fn missing_key_is_named() {
        let text = BASE.replace("model.sigma = 2", "");
        let err = RunConfig::from_map(&ConfigMap::parse(&text).unwrap()).unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(err.to_string().contains("model.sigma"), "{err}");
    }

    #[test]
    fn rejects_junk() {
        assert!(ConfigMap::parse("model.sigma 2").is_err());
        assert!(ConfigMap::parse("model.sgima = 2").is_err());
        let mut map = ConfigMap::parse(BASE).unwrap();
        map.set_pair("model.kappa=abc").unwrap();
        assert!(RunConfig::from_map(&map).is_err());
        assert!(parse_arms("asymptotic,bogus").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range::<i64>("-3..4").unwrap(), (-3, 4));
        assert_eq!(parse_range::<f64>("0.5..2").unwrap(), (0.5, 2.0));
        assert!(parse_range::<f64>("0.5").is_err());
    }
}
