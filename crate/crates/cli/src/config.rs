//! Scenario configuration file.
//!
//! Every key is optional and falls back to the reference community. Unknown
//! keys are rejected. Parse errors name the offending key path, and
//! semantic validation errors are prefixed with it by hand.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use prosumer_core::{
    Behavior, ContractTerms, GenerationModel, LotteryConfig, LotteryScale, MarketScenario,
    Mechanism, ProsumerProfile, QuadraticCost, Theory, UniformRange, ValueFunctionParams,
    WeightFunctionParams,
};

use crate::grid::{GridSpec, GRID_NAMES};

/// A configuration problem located at a dotted key path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub population: PopulationConfig,
    pub prices: PriceConfig,
    pub cost: CostConfig,
    pub behavior: BehaviorConfig,
    pub contract: ContractConfig,
    pub lottery: LotteryConfigFile,
    pub prosumer: SingleProsumerConfig,
    /// Sweep grids keyed by parameter name.
    pub grids: BTreeMap<String, GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    pub n_consumers: usize,
    pub n_prosumers: usize,
    pub consumer_omega: [f64; 2],
    pub prosumer_omega: [f64; 2],
    pub alpha: f64,
    pub generation_noise: [f64; 2],
}

impl Default for PopulationConfig {
    fn default() -> Self {
        let d = MarketScenario::default();
        Self {
            n_consumers: d.n_consumers,
            n_prosumers: d.n_prosumers,
            consumer_omega: [d.consumer_omega.lo(), d.consumer_omega.hi()],
            prosumer_omega: [d.prosumer_omega.lo(), d.prosumer_omega.hi()],
            alpha: d.alpha,
            generation_noise: [d.generation_noise.lo(), d.generation_noise.hi()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceConfig {
    pub retail: f64,
}

impl Default for PriceConfig {
    fn default() -> Self {
        Self {
            retail: MarketScenario::default().retail_price,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub a: f64,
    pub b: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        let c = QuadraticCost::default();
        Self { a: c.a, b: c.b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoryName {
    Prospect,
    ExpectedUtility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingName {
    Prelec,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorConfig {
    pub theory: TheoryName,
    pub lambda: f64,
    pub eta: f64,
    pub beta: f64,
    pub weighting: WeightingName,
    pub gamma: f64,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        let v = ValueFunctionParams::default();
        Self {
            theory: TheoryName::Prospect,
            lambda: v.lambda(),
            eta: v.eta(),
            beta: v.beta(),
            weighting: WeightingName::Prelec,
            gamma: WeightFunctionParams::default().gamma().unwrap_or(0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractConfig {
    pub sellback_price: f64,
    pub penalty_price: f64,
}

impl Default for ContractConfig {
    fn default() -> Self {
        Self {
            sellback_price: 1.0,
            penalty_price: 3.5,
        }
    }
}

/// `budget` sets the winning scale to `budget / n_prosumers`; `scale` fixes
/// it directly. At most one of the two may be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LotteryConfigFile {
    pub prize: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl Default for LotteryConfigFile {
    fn default() -> Self {
        Self {
            prize: 1000.0,
            budget: None,
            scale: None,
        }
    }
}

/// The prosumer examined by `single-prosumer`. Its curvature is the
/// population's `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleProsumerConfig {
    pub omega: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl Default for SingleProsumerConfig {
    fn default() -> Self {
        Self {
            omega: 5.0,
            s_min: 5.0,
            s_max: 5.5,
        }
    }
}

/// Parses configuration text. Omitted keys take their defaults.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| ConfigError::at("", e.to_string().trim_end()))?;
    let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        ConfigError::at(path, e.into_inner().message())
    })?;
    config.validate()?;
    Ok(config)
}

fn range(path: &str, r: [f64; 2]) -> Result<UniformRange, ConfigError> {
    UniformRange::new(r[0], r[1]).map_err(|e| ConfigError::at(path, e))
}

impl Config {
    /// Checks every section except `prosumer`, which only `single-prosumer`
    /// reads and which is checked there.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario(None)?;
        self.contract_terms()?;
        self.lottery_config()?;
        for (name, grid) in &self.grids {
            if !GRID_NAMES.contains(&name.as_str()) {
                return Err(ConfigError::at(
                    format!("grids.{name}"),
                    format!("unknown grid; expected one of {}", GRID_NAMES.join(", ")),
                ));
            }
            grid.validate()
                .map_err(|m| ConfigError::at(format!("grids.{name}"), m))?;
        }
        Ok(())
    }

    pub fn behavior(&self) -> Result<Behavior, ConfigError> {
        let b = &self.behavior;
        let value = ValueFunctionParams::new(b.lambda, b.eta, b.beta)
            .map_err(|e| ConfigError::at("behavior", e))?;
        let weight = match b.weighting {
            WeightingName::Prelec => WeightFunctionParams::prelec(b.gamma)
                .map_err(|e| ConfigError::at("behavior.gamma", e))?,
            WeightingName::Identity => WeightFunctionParams::Identity,
        };
        let theory = match b.theory {
            TheoryName::Prospect => Theory::Prospect,
            TheoryName::ExpectedUtility => Theory::ExpectedUtility,
        };
        Ok(Behavior {
            theory,
            value,
            weight,
        })
    }

    pub fn contract_terms(&self) -> Result<ContractTerms, ConfigError> {
        ContractTerms::new(self.contract.sellback_price, self.contract.penalty_price)
            .map_err(|e| ConfigError::at("contract", e))
    }

    pub fn lottery_config(&self) -> Result<LotteryConfig, ConfigError> {
        let l = &self.lottery;
        if !(l.prize >= 0.0 && l.prize.is_finite()) {
            return Err(ConfigError::at(
                "lottery.prize",
                "must be a non-negative number",
            ));
        }
        let scale = match (l.budget, l.scale) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::at(
                    "lottery",
                    "set either budget or scale, not both",
                ))
            }
            (None, None) => LotteryScale::default(),
            (Some(b), None) if b > 0.0 && b.is_finite() => LotteryScale::PerProsumer(b),
            (None, Some(m)) if m > 0.0 && m.is_finite() => LotteryScale::Fixed(m),
            (Some(_), None) => return Err(ConfigError::at("lottery.budget", "must be positive")),
            (None, Some(_)) => return Err(ConfigError::at("lottery.scale", "must be positive")),
        };
        Ok(LotteryConfig {
            prize: l.prize,
            scale,
        })
    }

    pub fn single_prosumer(&self) -> Result<ProsumerProfile, ConfigError> {
        let p = &self.prosumer;
        let generation = GenerationModel::uniform(p.s_min, p.s_max)
            .map_err(|e| ConfigError::at("prosumer", e))?;
        ProsumerProfile::new(p.omega, self.population.alpha, generation)
            .map_err(|e| ConfigError::at("prosumer", e))
    }

    /// The community scenario. Without a mechanism the contract terms are
    /// used as a placeholder.
    pub fn scenario(&self, mechanism: Option<Mechanism>) -> Result<MarketScenario, ConfigError> {
        let p = &self.population;
        let mechanism = match mechanism {
            Some(m) => m,
            None => Mechanism::Contract(self.contract_terms()?),
        };
        let scenario = MarketScenario {
            n_consumers: p.n_consumers,
            n_prosumers: p.n_prosumers,
            consumer_omega: range("population.consumer_omega", p.consumer_omega)?,
            prosumer_omega: range("population.prosumer_omega", p.prosumer_omega)?,
            alpha: p.alpha,
            retail_price: self.prices.retail,
            generation_noise: range("population.generation_noise", p.generation_noise)?,
            cost: QuadraticCost {
                a: self.cost.a,
                b: self.cost.b,
            },
            mechanism,
            behavior: self.behavior()?,
            seed: self.seed,
        };
        scenario
            .validate()
            .map_err(|e| ConfigError::at(scenario_key(&e), e))?;
        Ok(scenario)
    }

    /// The same configuration with implicit choices written out.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if c.lottery.budget.is_none() && c.lottery.scale.is_none() {
            if let LotteryScale::PerProsumer(b) = LotteryScale::default() {
                c.lottery.budget = Some(b);
            }
        }
        c
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

/// Maps a scenario validation error back to its configuration key.
fn scenario_key(e: &prosumer_core::Error) -> String {
    let name = match e {
        prosumer_core::Error::InvalidParameter { name, .. } => *name,
        _ => return "population".into(),
    };
    match name {
        "alpha" => "population.alpha".into(),
        "retail_price" => "prices.retail".into(),
        "cost.a" | "cost.b" => name.into(),
        other => format!("population.{other}"),
    }
    .replace(".lo", "")
}
