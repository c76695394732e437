//! Prosumer energy sell-back under prospect theory.
//!
//! The crate models how prosumers with loss aversion and probability
//! weighting respond to two retailer incentives, a day-ahead sell-back
//! contract with a shortfall penalty and a fixed-prize lottery, and
//! simulates the retailer's procurement savings in a community of
//! consumers and prosumers. Expected utility is the special case with
//! `lambda = 1` and identity weights.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contract;
pub mod cpt;
pub mod error;
pub mod lottery;
pub mod market;
pub mod numerics;
pub mod prosumer;

pub use contract::{
    contract_payment_value, contract_range, optimal_contract_eut, optimal_contract_pt,
    pt_commits_less, realtime_sellback, sellback_order_preserved, ContractTerms, OptimalContract,
    RealTimeBounds, SolutionMethod,
};
pub use cpt::{
    cpt_value, edit_prospect, prospect_value, DiscreteDistribution, DiscreteProspect, Distribution,
    EditedProspect, Outcome, PointMass, Uniform, ValueFunctionParams, WeightFunctionParams,
};
pub use error::{Error, Result};
pub use lottery::{
    lottery_marginal_utility, lottery_utility, optimal_lottery_sellback, winning_probabilities,
    LotterySpec, WinningProbabilities,
};
pub use market::{
    base_demand, contract_comparison_sweep, draw_population, mean_contracts, penetration_sweep,
    run_contract_simulation, run_contract_simulation_with, run_lottery_simulation,
    run_lottery_simulation_with, run_simulation, Behavior, ComparisonCell, ContractMeans,
    Execution, LotteryConfig, LotteryScale, MarketScenario, Mechanism, PenetrationLevel,
    Population, Prosumer, ProsumerRecord, QuadraticCost, SimulationResult, Theory, UniformRange,
};
pub use prosumer::{
    consumer_demand, convenience, sellback_convenience, GenerationModel, ProsumerProfile,
};
