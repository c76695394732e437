//! Day-ahead contract mechanism.
//!
//! A prosumer commits a sell-back amount `C` a day ahead at price `p_s` and
//! pays `p_e` per unit of shortfall `(C - z)⁺` once generation `s` is
//! realised. In real time the prosumer picks `z` given `C`; a day ahead it
//! picks `C` by valuing the random shortfall penalty with prospect theory.

use crate::cpt::{Distribution, ValueFunctionParams, WeightFunctionParams};
use crate::error::{ensure_finite, Error, Result};
use crate::numerics::{grid_then_golden_max, integrate, QuadOptions};
use crate::prosumer::ProsumerProfile;

/// Relative slack when checking that a contract lies in `[z2_min, z2_max]`.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractTerms {
    sellback_price: f64,
    penalty_price: f64,
}

impl ContractTerms {
    /// Requires `penalty_price > sellback_price > 0`; otherwise a prosumer
    /// could sign an unbounded contract and profit from never delivering.
    pub fn new(sellback_price: f64, penalty_price: f64) -> Result<Self> {
        ensure_finite("sellback_price", sellback_price)?;
        ensure_finite("penalty_price", penalty_price)?;
        if sellback_price > 0.0 && penalty_price > sellback_price {
            Ok(Self {
                sellback_price,
                penalty_price,
            })
        } else {
            Err(Error::InvalidContractTerms {
                sellback_price,
                penalty_price,
            })
        }
    }

    pub fn sellback_price(&self) -> f64 {
        self.sellback_price
    }

    pub fn penalty_price(&self) -> f64 {
        self.penalty_price
    }

    /// `p_s / p_e`, the critical ratio of the risk-neutral prosumer.
    pub fn price_ratio(&self) -> f64 {
        self.sellback_price / self.penalty_price
    }
}

/// Real-time thresholds for one prosumer at realised generation `s`.
///
/// Selling back `z1` leaves exactly the satiation demand for own use; `z2`
/// is where the marginal convenience of consumption equals the penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealTimeBounds {
    pub z1: f64,
    pub z2: f64,
    pub z2_min: f64,
    pub z2_max: f64,
}

impl RealTimeBounds {
    pub fn new(profile: &ProsumerProfile, terms: &ContractTerms, s: f64) -> Self {
        let alpha = profile.alpha();
        let omega = profile.omega();
        let shift = penalty_shift(profile, terms);
        Self {
            z1: s - omega / alpha,
            z2: s - shift,
            z2_min: profile.generation().s_min() - shift,
            z2_max: profile.generation().s_max() - shift,
        }
    }
}

/// `(omega - p_e) / alpha`, the offset between generation and `z2`.
fn penalty_shift(profile: &ProsumerProfile, terms: &ContractTerms) -> f64 {
    (profile.omega() - terms.penalty_price) / profile.alpha()
}

/// Optimal real-time sell-back given a signed contract: `C` clamped to
/// `[z1, z2]`.
pub fn realtime_sellback(
    profile: &ProsumerProfile,
    terms: &ContractTerms,
    s: f64,
    contract: f64,
) -> Result<f64> {
    if !profile.generation().contains(s) {
        let (lo, hi) = profile.generation().support();
        return Err(Error::OutOfRange {
            name: "generation",
            value: s,
            lo,
            hi,
        });
    }
    if !(contract >= 0.0) {
        return Err(Error::OutOfRange {
            name: "contract",
            value: contract,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let b = RealTimeBounds::new(profile, terms, s);
    Ok(if contract < b.z1 {
        b.z1
    } else if contract > b.z2 {
        b.z2
    } else {
        contract
    })
}

/// Contract bounds `[z2_min, z2_max]` over which the payment valuation is
/// defined.
pub fn contract_range(profile: &ProsumerProfile, terms: &ContractTerms) -> (f64, f64) {
    let shift = penalty_shift(profile, terms);
    let (s_min, s_max) = profile.generation().support();
    (s_min - shift, s_max - shift)
}

/// Prospect-theory valuation of the payment from contract `C`:
///
/// `E_p(C) = p_s C + p_e ∫_{z2_min}^{C} v(z - C) d pi(F_z(z))`
///
/// where `z = s - (omega - p_e)/alpha` is the penalty-regime sell-back. The
/// certain component `p_s C` is edited out, leaving only losses. The
/// Stieltjes integral is integrated by parts and rewritten in the generation
/// variable `s` via `F_z(z) = F_s(z + (omega - p_e)/alpha)`.
pub fn contract_payment_value(
    profile: &ProsumerProfile,
    terms: &ContractTerms,
    v: &ValueFunctionParams,
    w: &WeightFunctionParams,
    contract: f64,
) -> Result<f64> {
    let (z2_min, z2_max) = contract_range(profile, terms);
    let slack = RANGE_SLACK * z2_max.abs().max(1.0);
    if !(contract >= z2_min - slack && contract <= z2_max + slack) {
        return Err(Error::OutOfRange {
            name: "contract",
            value: contract,
            lo: z2_min,
            hi: z2_max,
        });
    }
    let contract = contract.clamp(z2_min, z2_max);
    let generation = profile.generation();
    let s_min = generation.s_min();
    // generation level at which z equals the contract
    let s_contract = contract + penalty_shift(profile, terms);
    let opts = QuadOptions::default();

    let penalty = if v.is_linear() {
        // ∫ (z - C) lambda d pi(F_z) = -lambda ∫_{s_min}^{C + shift} pi(F_s(s)) ds
        let r = integrate(
            |s| w.weight_unchecked(generation.cdf(s)),
            s_min,
            s_contract,
            opts,
        )?;
        -v.lambda() * r.value
    } else {
        // u = -v(z - C) turns the integral into -∫_0^{-v(z2_min - C)} pi(F_s(s(u))) du
        let beta_inv = v.beta().recip();
        let s_of = |u: f64| s_contract - (u / v.lambda()).powf(beta_inv);
        let upper = -v.value(z2_min - contract);
        let r = integrate(
            |u| w.weight_unchecked(generation.cdf(s_of(u))),
            0.0,
            upper,
            opts,
        )?;
        -r.value
    };
    Ok(terms.sellback_price * contract + terms.penalty_price * penalty)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionMethod {
    ClosedForm,
    /// Maximised numerically; used when the value function is curved.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalContract {
    pub amount: f64,
    pub method: SolutionMethod,
}

/// Optimal day-ahead contract of a prospect-theory prosumer,
///
/// `C* = F_s⁻¹(pi⁻¹(p_s / (lambda p_e))) + (p_e - omega)/alpha`,
///
/// clamped to `[max(0, z2_min), z2_max]`. The closed form needs a linear
/// value function; otherwise `E_p` is maximised numerically.
pub fn optimal_contract_pt(
    profile: &ProsumerProfile,
    terms: &ContractTerms,
    v: &ValueFunctionParams,
    w: &WeightFunctionParams,
) -> Result<OptimalContract> {
    let (z2_min, z2_max) = contract_range(profile, terms);
    let lo = z2_min.max(0.0);
    if z2_max < lo {
        return Err(Error::Precondition(format!(
            "no admissible contract: z2_max = {z2_max} < 0"
        )));
    }
    if v.is_linear() {
        let critical = terms.sellback_price / (v.lambda() * terms.penalty_price);
        let q = w.weight_inverse(critical)?;
        let amount = profile.generation().quantile(q)
            + (terms.penalty_price - profile.omega()) / profile.alpha();
        Ok(OptimalContract {
            amount: amount.clamp(lo, z2_max),
            method: SolutionMethod::ClosedForm,
        })
    } else {
        let objective =
            |c: f64| contract_payment_value(profile, terms, v, w, c).unwrap_or(f64::NEG_INFINITY);
        let amount = grid_then_golden_max(objective, lo, z2_max, 201, 1e-10);
        Ok(OptimalContract {
            amount,
            method: SolutionMethod::Numeric,
        })
    }
}

/// Optimal contract of a risk-neutral prosumer: the prospect-theory solution
/// with `lambda = 1` and identity weights, `F_s⁻¹(p_s / p_e) + (p_e - omega)/alpha`.
pub fn optimal_contract_eut(
    profile: &ProsumerProfile,
    terms: &ContractTerms,
) -> Result<OptimalContract> {
    optimal_contract_pt(
        profile,
        terms,
        &ValueFunctionParams::risk_neutral(),
        &WeightFunctionParams::Identity,
    )
}

/// Whether the prospect-theory quantile level `pi⁻¹(p_s / (lambda p_e))`
/// lies strictly below the risk-neutral level `p_s / p_e`, i.e. whether the
/// prospect-theory prosumer commits less. Guaranteed when `p_s < p_e / e`
/// and `lambda > 1`.
pub fn pt_commits_less(
    terms: &ContractTerms,
    v: &ValueFunctionParams,
    w: &WeightFunctionParams,
) -> Result<bool> {
    let pt = w.weight_inverse(terms.sellback_price / (v.lambda() * terms.penalty_price))?;
    Ok(pt < terms.price_ratio())
}

/// Checks that the larger contract never yields the smaller real-time
/// sell-back. Requires `contract_eut >= contract_pt`.
pub fn sellback_order_preserved(
    profile: &ProsumerProfile,
    terms: &ContractTerms,
    s: f64,
    contract_eut: f64,
    contract_pt: f64,
) -> Result<bool> {
    if !(contract_eut >= contract_pt) {
        return Err(Error::Precondition(format!(
            "expected contract_eut >= contract_pt, got {contract_eut} < {contract_pt}"
        )));
    }
    let eut = realtime_sellback(profile, terms, s, contract_eut)?;
    let pt = realtime_sellback(profile, terms, s, contract_pt)?;
    Ok(eut >= pt)
}
