//! Community-level simulation: draw consumers and prosumers, let every
//! prosumer respond to an incentive mechanism, and account for the
//! retailer's procurement savings.
//!
//! Randomness is split per entity: consumer `i` draws from ChaCha8 stream
//! `i` of a generator keyed by `seed ^ CONSUMER_KEY`, prosumer `j` from
//! stream `j` keyed by `seed ^ PROSUMER_KEY`. Population `j` therefore has
//! the same draws whatever the population size, which keeps sweeps over the
//! number of prosumers on common random numbers.
//!
//! All aggregates are summed over per-entity records in index order, so
//! sequential and parallel runs agree bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contract::{
    optimal_contract_eut, optimal_contract_pt, realtime_sellback, ContractTerms,
};
use crate::cpt::{ValueFunctionParams, WeightFunctionParams};
use crate::error::{ensure_finite, Error, Result};
use crate::lottery::{optimal_lottery_sellback, LotterySpec};
use crate::prosumer::{consumer_demand, GenerationModel, ProsumerProfile};

const CONSUMER_KEY: u64 = 0x636f_6e73_756d_6572;
const PROSUMER_KEY: u64 = 0x7072_6f73_756d_6572;

/// Closed interval sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformRange {
    lo: f64,
    hi: f64,
}

impl UniformRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        ensure_finite("lo", lo)?;
        ensure_finite("hi", hi)?;
        if hi < lo {
            return Err(Error::InvalidParameter {
                name: "hi",
                value: hi,
                reason: "range upper bound below lower bound",
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.lo + (self.hi - self.lo) * u
    }
}

/// Retailer's procurement cost `Q(x) = a x + b x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCost {
    pub a: f64,
    pub b: f64,
}

impl QuadraticCost {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * x + self.b * x * x
    }
}

impl Default for QuadraticCost {
    fn default() -> Self {
        Self { a: 1.0, b: 2e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Theory {
    /// Loss aversion and probability weighting as configured.
    #[default]
    Prospect,
    /// Risk-neutral expected payoff: `lambda = 1`, identity weights.
    ExpectedUtility,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Behavior {
    pub theory: Theory,
    pub value: ValueFunctionParams,
    pub weight: WeightFunctionParams,
}

impl Behavior {
    /// Value and weighting functions in effect under the configured theory.
    pub fn effective(&self) -> (ValueFunctionParams, WeightFunctionParams) {
        match self.theory {
            Theory::Prospect => (self.value, self.weight),
            Theory::ExpectedUtility => (
                ValueFunctionParams::risk_neutral(),
                WeightFunctionParams::Identity,
            ),
        }
    }
}

/// How the per-unit winning probability `m` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LotteryScale {
    Fixed(f64),
    /// `m = budget / n_prosumers`.
    PerProsumer(f64),
}

impl Default for LotteryScale {
    fn default() -> Self {
        LotteryScale::PerProsumer(0.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LotteryConfig {
    pub prize: f64,
    pub scale: LotteryScale,
}

impl LotteryConfig {
    pub fn resolve(&self, n_prosumers: usize) -> Result<LotterySpec> {
        let m = match self.scale {
            LotteryScale::Fixed(m) => m,
            LotteryScale::PerProsumer(_) if n_prosumers == 0 => return Err(Error::NoProsumers),
            LotteryScale::PerProsumer(budget) => budget / n_prosumers as f64,
        };
        LotterySpec::new(self.prize, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mechanism {
    Contract(ContractTerms),
    Lottery(LotteryConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketScenario {
    pub n_consumers: usize,
    pub n_prosumers: usize,
    pub consumer_omega: UniformRange,
    pub prosumer_omega: UniformRange,
    pub alpha: f64,
    pub retail_price: f64,
    /// Uncertain generation above the prosumer's satiation demand.
    pub generation_noise: UniformRange,
    pub cost: QuadraticCost,
    pub mechanism: Mechanism,
    pub behavior: Behavior,
    pub seed: u64,
}

impl Default for MarketScenario {
    fn default() -> Self {
        Self {
            n_consumers: 7500,
            n_prosumers: 2500,
            consumer_omega: UniformRange { lo: 3.0, hi: 7.0 },
            prosumer_omega: UniformRange { lo: 4.0, hi: 7.0 },
            alpha: 1.0,
            retail_price: 1.5,
            generation_noise: UniformRange { lo: 0.0, hi: 0.5 },
            cost: QuadraticCost::default(),
            mechanism: Mechanism::Contract(
                ContractTerms::new(1.0, 3.5).expect("valid default terms"),
            ),
            behavior: Behavior::default(),
            seed: 0,
        }
    }
}

impl MarketScenario {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("alpha", self.alpha)?;
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                reason: "must be positive",
            });
        }
        if !(self.retail_price >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "retail_price",
                value: self.retail_price,
                reason: "must be non-negative",
            });
        }
        if !(self.prosumer_omega.lo > 0.0) {
            return Err(Error::InvalidParameter {
                name: "prosumer_omega.lo",
                value: self.prosumer_omega.lo,
                reason: "willingness for demand must be positive",
            });
        }
        if !(self.consumer_omega.lo >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "consumer_omega.lo",
                value: self.consumer_omega.lo,
                reason: "willingness for demand must be non-negative",
            });
        }
        if !(self.generation_noise.lo >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "generation_noise.lo",
                value: self.generation_noise.lo,
                reason: "generation never falls below own satiation demand",
            });
        }
        for (name, v) in [("cost.a", self.cost.a), ("cost.b", self.cost.b)] {
            ensure_finite(name, v)?;
        }
        Ok(())
    }

    pub fn with_mechanism(&self, mechanism: Mechanism) -> Self {
        Self {
            mechanism,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prosumer {
    pub omega: f64,
    /// Realised generation above satiation demand.
    pub noise: f64,
    /// Realised generation.
    pub generation: f64,
    pub profile: ProsumerProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// Willingness for demand of each pure consumer.
    pub consumers: Vec<f64>,
    pub prosumers: Vec<Prosumer>,
}

fn entity_rng(seed: u64, key: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ key);
    rng.set_stream(index as u64);
    rng
}

/// Draws the community. Each prosumer's generation model is uniform on
/// `omega/alpha + generation_noise` and its realised output is one draw
/// from it.
pub fn draw_population(scenario: &MarketScenario) -> Result<Population> {
    scenario.validate()?;
    let consumers = (0..scenario.n_consumers)
        .map(|i| {
            scenario
                .consumer_omega
                .sample(&mut entity_rng(scenario.seed, CONSUMER_KEY, i))
        })
        .collect();
    let prosumers = (0..scenario.n_prosumers)
        .map(|j| {
            let mut rng = entity_rng(scenario.seed, PROSUMER_KEY, j);
            let omega = scenario.prosumer_omega.sample(&mut rng);
            let noise = scenario.generation_noise.sample(&mut rng);
            let satiation = omega / scenario.alpha;
            let model = GenerationModel::uniform(
                satiation + scenario.generation_noise.lo,
                satiation + scenario.generation_noise.hi,
            )?;
            Ok(Prosumer {
                omega,
                noise,
                generation: satiation + noise,
                profile: ProsumerProfile::new(omega, scenario.alpha, model)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Population {
        consumers,
        prosumers,
    })
}

/// Total consumption of the pure consumers at the retail price.
pub fn base_demand(scenario: &MarketScenario, population: &Population) -> f64 {
    population
        .consumers
        .iter()
        .map(|&omega| consumer_demand(omega, scenario.alpha, scenario.retail_price))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProsumerRecord {
    pub omega: f64,
    pub generation: f64,
    /// Signed day-ahead contract, for the contract mechanism.
    pub contract: Option<f64>,
    pub sellback: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub base_demand: f64,
    pub total_sellback: f64,
    /// `base_demand - total_sellback`; negative when prosumers oversupply.
    pub net_demand: f64,
    pub incentive_cost: f64,
    /// `Q(B) - Q(D) - I`.
    pub savings: f64,
    pub records: Vec<ProsumerRecord>,
}

impl SimulationResult {
    fn assemble(
        scenario: &MarketScenario,
        base_demand: f64,
        incentive_cost: f64,
        records: Vec<ProsumerRecord>,
    ) -> Self {
        let total_sellback: f64 = records.iter().map(|r| r.sellback).sum();
        let net_demand = base_demand - total_sellback;
        let savings =
            scenario.cost.eval(base_demand) - scenario.cost.eval(net_demand) - incentive_cost;
        Self {
            base_demand,
            total_sellback,
            net_demand,
            incentive_cost,
            savings,
            records,
        }
    }

    /// The retailer ends up with more energy than its consumers use.
    pub fn negative_net_demand(&self) -> bool {
        self.net_demand < 0.0
    }

    pub fn total_contract(&self) -> Option<f64> {
        self.records.iter().map(|r| r.contract).sum()
    }

    pub fn mean_contract(&self) -> Option<f64> {
        match self.records.len() {
            0 => None,
            n => self.total_contract().map(|t| t / n as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

pub fn run_simulation(scenario: &MarketScenario) -> Result<SimulationResult> {
    match scenario.mechanism {
        Mechanism::Contract(_) => run_contract_simulation(scenario),
        Mechanism::Lottery(_) => run_lottery_simulation(scenario),
    }
}

pub fn run_contract_simulation(scenario: &MarketScenario) -> Result<SimulationResult> {
    run_contract_simulation_with(scenario, Execution::default())
}

/// Every prosumer signs its optimal contract and then sells back optimally
/// at its realised generation. The retailer pays
/// `I = sum_j p_s C_j - p_e (C_j - z_j)⁺`.
pub fn run_contract_simulation_with(
    scenario: &MarketScenario,
    exec: Execution,
) -> Result<SimulationResult> {
    let Mechanism::Contract(terms) = scenario.mechanism else {
        return Err(Error::Precondition(
            "contract simulation needs contract terms".into(),
        ));
    };
    let population = draw_population(scenario)?;
    let (v, w) = scenario.behavior.effective();
    let records = map_indexed(population.prosumers.len(), exec, |j| {
        let p = &population.prosumers[j];
        let contract = match scenario.behavior.theory {
            Theory::Prospect => optimal_contract_pt(&p.profile, &terms, &v, &w)?,
            Theory::ExpectedUtility => optimal_contract_eut(&p.profile, &terms)?,
        }
        .amount;
        Ok(ProsumerRecord {
            omega: p.omega,
            generation: p.generation,
            contract: Some(contract),
            sellback: realtime_sellback(&p.profile, &terms, p.generation, contract)?,
        })
    })?;
    let incentive_cost = records
        .iter()
        .map(|r| {
            let c = r.contract.unwrap_or(0.0);
            terms.sellback_price() * c - terms.penalty_price() * (c - r.sellback).max(0.0)
        })
        .sum();
    Ok(SimulationResult::assemble(
        scenario,
        base_demand(scenario, &population),
        incentive_cost,
        records,
    ))
}

pub fn run_lottery_simulation(scenario: &MarketScenario) -> Result<SimulationResult> {
    run_lottery_simulation_with(scenario, Execution::default())
}

/// Every prosumer sells back its utility-maximising amount given the prize.
/// The retailer's outlay is the prize itself.
pub fn run_lottery_simulation_with(
    scenario: &MarketScenario,
    exec: Execution,
) -> Result<SimulationResult> {
    let Mechanism::Lottery(config) = scenario.mechanism else {
        return Err(Error::Precondition(
            "lottery simulation needs a lottery configuration".into(),
        ));
    };
    let spec = config.resolve(scenario.n_prosumers)?;
    let population = draw_population(scenario)?;
    let capacity: f64 = population
        .prosumers
        .iter()
        .map(|p| p.profile.generation().s_max())
        .sum();
    spec.check_feasible(capacity)?;
    let (_, w) = scenario.behavior.effective();
    let records = map_indexed(population.prosumers.len(), exec, |j| {
        let p = &population.prosumers[j];
        Ok(ProsumerRecord {
            omega: p.omega,
            generation: p.generation,
            contract: None,
            sellback: optimal_lottery_sellback(&p.profile, &spec, &w, p.generation)?,
        })
    })?;
    Ok(SimulationResult::assemble(
        scenario,
        base_demand(scenario, &population),
        spec.prize(),
        records,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenetrationLevel {
    pub n_prosumers: usize,
    pub n_consumers: usize,
    pub result: SimulationResult,
}

impl PenetrationLevel {
    pub fn penetration(&self) -> f64 {
        self.n_prosumers as f64 / (self.n_prosumers + self.n_consumers) as f64
    }
}

/// Lottery simulations at several prosumer counts with the community size
/// held at the base scenario's `n_consumers + n_prosumers`. The winning
/// scale is re-derived per level as `budget / n`, where the budget is the
/// base scenario's (0.1 by default).
pub fn penetration_sweep(base: &MarketScenario, levels: &[usize]) -> Result<Vec<PenetrationLevel>> {
    let Mechanism::Lottery(config) = base.mechanism else {
        return Err(Error::Precondition(
            "penetration sweep runs the lottery mechanism".into(),
        ));
    };
    let total = base.n_consumers + base.n_prosumers;
    let budget = match config.scale {
        LotteryScale::PerProsumer(b) => b,
        LotteryScale::Fixed(m) => m * base.n_prosumers as f64,
    };
    levels
        .iter()
        .map(|&n| {
            if n > total {
                return Err(Error::Precondition(format!(
                    "{n} prosumers exceed the community size {total}"
                )));
            }
            let scenario = MarketScenario {
                n_prosumers: n,
                n_consumers: total - n,
                mechanism: Mechanism::Lottery(LotteryConfig {
                    prize: config.prize,
                    scale: LotteryScale::PerProsumer(budget),
                }),
                ..base.clone()
            };
            Ok(PenetrationLevel {
                n_prosumers: n,
                n_consumers: total - n,
                result: run_lottery_simulation(&scenario)?,
            })
        })
        .collect()
}

/// Mean optimal contracts of the drawn prosumers under prospect theory (with
/// the scenario's behaviour) and under expected utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractMeans {
    pub prospect: f64,
    pub expected_utility: f64,
}

impl ContractMeans {
    pub fn ratio(&self) -> f64 {
        self.prospect / self.expected_utility
    }
}

pub fn mean_contracts(
    population: &Population,
    terms: &ContractTerms,
    v: &ValueFunctionParams,
    w: &WeightFunctionParams,
) -> Result<ContractMeans> {
    let n = population.prosumers.len();
    if n == 0 {
        return Err(Error::NoProsumers);
    }
    let mut pt = 0.0;
    let mut eut = 0.0;
    for p in &population.prosumers {
        pt += optimal_contract_pt(&p.profile, terms, v, w)?.amount;
        eut += optimal_contract_eut(&p.profile, terms)?.amount;
    }
    Ok(ContractMeans {
        prospect: pt / n as f64,
        expected_utility: eut / n as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonCell {
    pub sellback_price: f64,
    pub lambda: f64,
    pub means: ContractMeans,
}

/// Mean prospect-theory and expected-utility contracts for every
/// `(p_s, lambda)` pair at the scenario's penalty price.
pub fn contract_comparison_sweep(
    scenario: &MarketScenario,
    sellback_prices: &[f64],
    lambdas: &[f64],
) -> Result<Vec<ComparisonCell>> {
    let Mechanism::Contract(base) = scenario.mechanism else {
        return Err(Error::Precondition(
            "contract comparison needs contract terms".into(),
        ));
    };
    let population = draw_population(scenario)?;
    let v0 = scenario.behavior.value;
    let w = scenario.behavior.weight;
    let mut cells = Vec::with_capacity(sellback_prices.len() * lambdas.len());
    for &p_s in sellback_prices {
        let terms = ContractTerms::new(p_s, base.penalty_price())?;
        for &lambda in lambdas {
            let v = ValueFunctionParams::new(lambda, v0.eta(), v0.beta())?;
            cells.push(ComparisonCell {
                sellback_price: p_s,
                lambda,
                means: mean_contracts(&population, &terms, &v, &w)?,
            });
        }
    }
    Ok(cells)
}
