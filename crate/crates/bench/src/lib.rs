//! Fixtures shared by the benchmarks.

use prosumer_core::{
    ContractTerms, GenerationModel, LotteryConfig, LotteryScale, MarketScenario, Mechanism,
    ProsumerProfile,
};

/// A prosumer with `omega = 5`, `alpha = 1` and generation uniform on `[5, 5.5]`.
pub fn reference_profile() -> ProsumerProfile {
    ProsumerProfile::new(
        5.0,
        1.0,
        GenerationModel::uniform(5.0, 5.5).expect("valid range"),
    )
    .expect("valid profile")
}

pub fn reference_terms() -> ContractTerms {
    ContractTerms::new(1.0, 3.5).expect("valid terms")
}

/// The reference community scaled to `n_prosumers` prosumers and three
/// times as many consumers.
pub fn community(n_prosumers: usize, mechanism: Mechanism) -> MarketScenario {
    MarketScenario {
        n_consumers: 3 * n_prosumers,
        n_prosumers,
        mechanism,
        ..MarketScenario::default()
    }
}

pub fn lottery(prize: f64) -> Mechanism {
    Mechanism::Lottery(LotteryConfig {
        prize,
        scale: LotteryScale::PerProsumer(0.1),
    })
}
