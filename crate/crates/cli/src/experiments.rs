//! One driver per subcommand. Each turns a validated configuration into a
//! table; nothing here touches the filesystem.

use anyhow::{anyhow, bail, Context, Result};

use prosumer_core::{
    contract_comparison_sweep, draw_population, mean_contracts, optimal_contract_eut,
    optimal_contract_pt, penetration_sweep, run_simulation, ContractTerms, LotteryConfig,
    MarketScenario, Mechanism, SimulationResult, SolutionMethod,
};

use crate::config::Config;
use crate::grid::GridSpec;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    /// Mean optimal contracts under prospect theory and expected utility
    /// over sell-back price and loss aversion.
    ContractCompare,
    /// Contract mechanism with the penalty price swept.
    PenaltySweep,
    /// Contract mechanism with the sell-back price swept.
    SellbackSweep,
    /// Lottery mechanism with the prize swept.
    LotterySweep,
    /// Lottery mechanism at several prosumer counts, community size fixed.
    PenetrationSweep,
    /// Optimal contracts of one prosumer.
    SingleProsumer,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ContractCompare => "contract-compare",
            Experiment::PenaltySweep => "penalty-sweep",
            Experiment::SellbackSweep => "sellback-sweep",
            Experiment::LotterySweep => "lottery-sweep",
            Experiment::PenetrationSweep => "penetration-sweep",
            Experiment::SingleProsumer => "single-prosumer",
        }
    }

    /// The grids this experiment sweeps, with their defaults.
    pub fn default_grids(self) -> &'static [(&'static str, GridSpec)] {
        const COMPARE: [(&str, GridSpec); 2] = [
            ("sellback_price", GridSpec::new(0.25, 1.25, 5)),
            ("lambda", GridSpec::new(1.0, 3.0, 5)),
        ];
        const PENALTY: [(&str, GridSpec); 1] = [("penalty_price", GridSpec::new(2.05, 3.5, 30))];
        const SELLBACK: [(&str, GridSpec); 1] = [("sellback_price", GridSpec::new(0.25, 3.25, 13))];
        const PRIZE: [(&str, GridSpec); 1] = [("prize", GridSpec::new(0.0, 5000.0, 11))];
        const PENETRATION: [(&str, GridSpec); 1] =
            [("n_prosumers", GridSpec::new(1000.0, 4000.0, 4))];
        match self {
            Experiment::ContractCompare => &COMPARE,
            Experiment::PenaltySweep => &PENALTY,
            Experiment::SellbackSweep => &SELLBACK,
            Experiment::LotterySweep => &PRIZE,
            Experiment::PenetrationSweep => &PENETRATION,
            Experiment::SingleProsumer => &[],
        }
    }

    pub fn uses_grid(self, name: &str) -> bool {
        self.default_grids().iter().any(|(n, _)| *n == name)
    }
}

/// Fills in the default grid for every parameter the experiment sweeps.
pub fn with_default_grids(config: &Config, experiment: Experiment) -> Config {
    let mut c = config.clone();
    for (name, grid) in experiment.default_grids() {
        c.grids.entry((*name).to_string()).or_insert(*grid);
    }
    c
}

fn grid(config: &Config, name: &str) -> Result<Vec<f64>> {
    config
        .grids
        .get(name)
        .map(GridSpec::values)
        .ok_or_else(|| anyhow!("missing grid `{name}`"))
}

pub fn execute(experiment: Experiment, config: &Config) -> Result<Table> {
    let config = with_default_grids(config, experiment);
    match experiment {
        Experiment::ContractCompare => contract_compare(&config),
        Experiment::PenaltySweep => contract_sweep(&config, "penalty_price"),
        Experiment::SellbackSweep => contract_sweep(&config, "sellback_price"),
        Experiment::LotterySweep => lottery_sweep(&config),
        Experiment::PenetrationSweep => penetration(&config),
        Experiment::SingleProsumer => single_prosumer(&config),
    }
}

fn contract_compare(config: &Config) -> Result<Table> {
    let scenario = config.scenario(None)?;
    let prices = grid(config, "sellback_price")?;
    let lambdas = grid(config, "lambda")?;
    let cells = contract_comparison_sweep(&scenario, &prices, &lambdas)
        .context("grids.sellback_price/lambda")?;
    let mut t = Table::new(
        Experiment::ContractCompare.name(),
        vec![
            "sellback_price",
            "lambda",
            "mean_contract_pt",
            "mean_contract_eut",
            "pt_eut_ratio",
        ],
    );
    for c in cells {
        t.push(vec![
            c.sellback_price.into(),
            c.lambda.into(),
            c.means.prospect.into(),
            c.means.expected_utility.into(),
            c.means.ratio().into(),
        ]);
    }
    Ok(t)
}

const SIMULATION_COLUMNS: [&str; 5] = [
    "base_demand",
    "total_sellback",
    "net_demand",
    "incentive_cost",
    "savings",
];

fn simulation_cells(r: &SimulationResult) -> Vec<Cell> {
    vec![
        r.base_demand.into(),
        r.total_sellback.into(),
        r.net_demand.into(),
        r.incentive_cost.into(),
        r.savings.into(),
    ]
}

fn contract_sweep(config: &Config, swept: &'static str) -> Result<Table> {
    let base = config.contract_terms()?;
    let scenario = config.scenario(None)?;
    let population = draw_population(&scenario)?;
    let behavior = scenario.behavior;
    let name = if swept == "penalty_price" {
        Experiment::PenaltySweep.name()
    } else {
        Experiment::SellbackSweep.name()
    };
    let mut columns = vec![swept];
    columns.extend(["mean_contract_pt", "mean_contract_eut", "total_contract"]);
    columns.extend(SIMULATION_COLUMNS);
    columns.push("negative_net_demand");
    let mut t = Table::new(name, columns);
    for x in grid(config, swept)? {
        let terms = if swept == "penalty_price" {
            ContractTerms::new(base.sellback_price(), x)
        } else {
            ContractTerms::new(x, base.penalty_price())
        }
        .with_context(|| format!("grids.{swept} = {x}"))?;
        let means = if population.prosumers.is_empty() {
            None
        } else {
            Some(mean_contracts(
                &population,
                &terms,
                &behavior.value,
                &behavior.weight,
            )?)
        };
        let r = run_simulation(&scenario.with_mechanism(Mechanism::Contract(terms)))?;
        let mut row: Vec<Cell> = vec![x.into()];
        row.push(means.map_or(f64::NAN, |m| m.prospect).into());
        row.push(means.map_or(f64::NAN, |m| m.expected_utility).into());
        row.push(r.total_contract().unwrap_or(0.0).into());
        row.extend(simulation_cells(&r));
        row.push(r.negative_net_demand().into());
        t.push(row);
    }
    Ok(t)
}

fn lottery_scenario(config: &Config, prize: f64) -> Result<MarketScenario> {
    let lottery = LotteryConfig {
        prize,
        ..config.lottery_config()?
    };
    Ok(config.scenario(Some(Mechanism::Lottery(lottery)))?)
}

fn lottery_sweep(config: &Config) -> Result<Table> {
    let mut columns = vec!["prize", "scale"];
    columns.extend(SIMULATION_COLUMNS);
    columns.push("negative_net_demand");
    let mut t = Table::new(Experiment::LotterySweep.name(), columns);
    for prize in grid(config, "prize")? {
        let scenario = lottery_scenario(config, prize)?;
        let Mechanism::Lottery(lottery) = scenario.mechanism else {
            unreachable!("lottery scenario")
        };
        let spec = lottery.resolve(scenario.n_prosumers).context("lottery")?;
        let r = run_simulation(&scenario).with_context(|| format!("grids.prize = {prize}"))?;
        let mut row: Vec<Cell> = vec![prize.into(), spec.scale().into()];
        row.extend(simulation_cells(&r));
        row.push(r.negative_net_demand().into());
        t.push(row);
    }
    Ok(t)
}

fn penetration(config: &Config) -> Result<Table> {
    let scenario = lottery_scenario(config, config.lottery.prize)?;
    let Mechanism::Lottery(lottery) = scenario.mechanism else {
        unreachable!("lottery scenario")
    };
    let levels = grid(config, "n_prosumers")?
        .into_iter()
        .map(|x| {
            if x.fract() != 0.0 || x < 0.0 {
                bail!("grids.n_prosumers: {x} is not a whole number of prosumers");
            }
            Ok(x as usize)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["n_prosumers", "n_consumers", "penetration", "scale"];
    columns.extend(SIMULATION_COLUMNS);
    columns.push("negative_net_demand");
    let mut t = Table::new(Experiment::PenetrationSweep.name(), columns);
    for level in penetration_sweep(&scenario, &levels).context("grids.n_prosumers")? {
        let scale = match lottery.scale {
            prosumer_core::LotteryScale::Fixed(m) => {
                m * scenario.n_prosumers as f64 / level.n_prosumers as f64
            }
            prosumer_core::LotteryScale::PerProsumer(b) => b / level.n_prosumers as f64,
        };
        let mut row: Vec<Cell> = vec![
            level.n_prosumers.into(),
            level.n_consumers.into(),
            level.penetration().into(),
            scale.into(),
        ];
        row.extend(simulation_cells(&level.result));
        row.push(level.result.negative_net_demand().into());
        t.push(row);
    }
    Ok(t)
}

fn single_prosumer(config: &Config) -> Result<Table> {
    let profile = config.single_prosumer()?;
    let terms = config.contract_terms()?;
    let behavior = config.behavior()?;
    let pt = optimal_contract_pt(&profile, &terms, &behavior.value, &behavior.weight)?;
    let eut = optimal_contract_eut(&profile, &terms)?;
    let method = match pt.method {
        SolutionMethod::ClosedForm => "closed-form",
        SolutionMethod::Numeric => "numeric",
    };
    let gen = profile.generation();
    let mut t = Table::new(
        Experiment::SingleProsumer.name(),
        vec![
            "omega",
            "alpha",
            "s_min",
            "s_max",
            "sellback_price",
            "penalty_price",
            "contract_pt",
            "contract_eut",
            "method_pt",
        ],
    );
    t.push(vec![
        profile.omega().into(),
        profile.alpha().into(),
        gen.s_min().into(),
        gen.s_max().into(),
        terms.sellback_price().into(),
        terms.penalty_price().into(),
        pt.amount.into(),
        eut.amount.into(),
        Cell::Text(method.into()),
    ]);
    Ok(t)
}
