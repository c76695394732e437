//! Prospect-theory primitives: the perceived value function, the Prelec
//! probability weighting function, valuation of discrete prospects (with the
//! editing phase) and the cumulative valuation of a continuous random payoff.

use std::f64::consts::E;

use crate::error::{ensure_finite, Error, Result};
use crate::numerics::{integrate_pieces, QuadOptions};

/// Tolerance used when deciding that outcome probabilities sum to one.
const COMPLETE_TOL: f64 = 1e-9;

/// Loss aversion and curvature of the perceived value function.
///
/// Gains are valued `y^eta`, losses `-lambda * (-y)^beta`. With
/// `lambda = 1` and `eta = beta = 1` the value function is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueFunctionParams {
    lambda: f64,
    eta: f64,
    beta: f64,
}

impl ValueFunctionParams {
    pub fn new(lambda: f64, eta: f64, beta: f64) -> Result<Self> {
        ensure_finite("lambda", lambda)?;
        if lambda < 1.0 {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "loss aversion must be at least 1",
            });
        }
        for (name, value) in [("eta", eta), ("beta", beta)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "curvature exponent must lie in (0, 1]",
                });
            }
        }
        Ok(Self { lambda, eta, beta })
    }

    /// Linear value function with loss aversion `lambda`.
    pub fn linear(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0, 1.0)
    }

    /// Risk-neutral valuation (`lambda = eta = beta = 1`).
    pub fn risk_neutral() -> Self {
        Self {
            lambda: 1.0,
            eta: 1.0,
            beta: 1.0,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when both exponents are 1, i.e. the value function is piecewise linear.
    pub fn is_linear(&self) -> bool {
        self.eta == 1.0 && self.beta == 1.0
    }

    /// Perceived value of a gain (`y >= 0`) or loss (`y < 0`).
    pub fn value(&self, y: f64) -> f64 {
        if y >= 0.0 {
            if self.eta == 1.0 {
                y
            } else {
                y.powf(self.eta)
            }
        } else if self.beta == 1.0 {
            self.lambda * y
        } else {
            -self.lambda * (-y).powf(self.beta)
        }
    }
}

impl Default for ValueFunctionParams {
    /// `lambda = 2`, `eta = beta = 1`.
    fn default() -> Self {
        Self {
            lambda: 2.0,
            eta: 1.0,
            beta: 1.0,
        }
    }
}

/// Probability weighting function.
///
/// `Prelec` is `pi(q) = exp(-(-ln q)^gamma)`, which overweights probabilities
/// below `1/e` and underweights those above. `Identity` leaves probabilities
/// untouched, so expected-utility behaviour is just another configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFunctionParams {
    Prelec { gamma: f64 },
    Identity,
}

impl Default for WeightFunctionParams {
    fn default() -> Self {
        WeightFunctionParams::Prelec { gamma: 0.5 }
    }
}

impl WeightFunctionParams {
    pub fn prelec(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma < 1.0 {
            Ok(WeightFunctionParams::Prelec { gamma })
        } else {
            Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "distortion exponent must lie in (0, 1)",
            })
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            WeightFunctionParams::Prelec { gamma } => Some(gamma),
            WeightFunctionParams::Identity => None,
        }
    }

    /// Probability at which the weighting function switches from concave to
    /// convex; `None` for the identity.
    pub fn inflection(&self) -> Option<f64> {
        match self {
            WeightFunctionParams::Prelec { .. } => Some(1.0 / E),
            WeightFunctionParams::Identity => None,
        }
    }

    /// Decision weight of probability `q`.
    pub fn weight(&self, q: f64) -> Result<f64> {
        check_unit("q", q)?;
        Ok(self.weight_unchecked(q))
    }

    /// Probability whose decision weight is `w`.
    pub fn weight_inverse(&self, w: f64) -> Result<f64> {
        check_unit("w", w)?;
        Ok(match *self {
            WeightFunctionParams::Identity => w,
            WeightFunctionParams::Prelec { gamma } => {
                if w <= 0.0 {
                    0.0
                } else if w >= 1.0 {
                    1.0
                } else {
                    (-(-w.ln()).powf(gamma.recip())).exp()
                }
            }
        })
    }

    /// Derivative of the weighting function. Diverges as `q -> 0+` for Prelec.
    pub fn derivative(&self, q: f64) -> Result<f64> {
        check_unit("q", q)?;
        Ok(match *self {
            WeightFunctionParams::Identity => 1.0,
            WeightFunctionParams::Prelec { gamma } => {
                if q <= 0.0 {
                    f64::INFINITY
                } else if q >= 1.0 {
                    // (-ln q)^(gamma-1) -> inf as q -> 1, times pi(1)/1
                    f64::INFINITY
                } else {
                    let t = -q.ln();
                    (-t.powf(gamma)).exp() * gamma * t.powf(gamma - 1.0) / q
                }
            }
        })
    }

    /// Weight of a probability already known to lie in [0, 1] up to rounding.
    pub(crate) fn weight_unchecked(&self, q: f64) -> f64 {
        match *self {
            WeightFunctionParams::Identity => q.clamp(0.0, 1.0),
            WeightFunctionParams::Prelec { gamma } => {
                if q <= 0.0 {
                    0.0
                } else if q >= 1.0 {
                    1.0
                } else {
                    (-(-q.ln()).powf(gamma)).exp()
                }
            }
        }
    }
}

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: x,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub payoff: f64,
    pub probability: f64,
}

/// A finite list of outcomes. Probabilities may sum to less than one, in
/// which case the remainder is an omitted null (zero-payoff) outcome.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteProspect {
    outcomes: Vec<Outcome>,
}

impl DiscreteProspect {
    pub fn new(outcomes: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let outcomes: Vec<Outcome> = outcomes
            .into_iter()
            .map(|(payoff, probability)| Outcome {
                payoff,
                probability,
            })
            .collect();
        for o in &outcomes {
            ensure_finite("payoff", o.payoff)?;
            check_unit("probability", o.probability)?;
        }
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        if total > 1.0 + COMPLETE_TOL {
            return Err(Error::OutOfRange {
                name: "total probability",
                value: total,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn is_complete(&self) -> bool {
        (self.total_probability() - 1.0).abs() <= COMPLETE_TOL
    }

    /// Riskless component removed by editing: the outcome nearest zero when
    /// all outcomes share a sign, zero otherwise. An incomplete prospect
    /// carries an implicit null outcome and therefore never edits.
    fn riskless_component(&self) -> f64 {
        if self.outcomes.is_empty() || !self.is_complete() {
            return 0.0;
        }
        let payoffs = self.outcomes.iter().map(|o| o.payoff);
        let min = payoffs.clone().fold(f64::INFINITY, f64::min);
        let max = payoffs.fold(f64::NEG_INFINITY, f64::max);
        if min >= 0.0 {
            min
        } else if max <= 0.0 {
            max
        } else {
            0.0
        }
    }

    fn shifted(&self, c: f64) -> Self {
        Self {
            outcomes: self
                .outcomes
                .iter()
                .map(|o| Outcome {
                    payoff: o.payoff - c,
                    probability: o.probability,
                })
                .collect(),
        }
    }
}

/// Result of the editing phase: a certain amount plus the risky remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct EditedProspect {
    pub constant: f64,
    pub residual: DiscreteProspect,
}

/// Removes the common deterministic component of a complete prospect.
///
/// For outcomes `{y1 + c, y2 + c}` with `c` the outcome nearest zero the
/// residual is `{y1, y2}` and contains a zero outcome. Mixed gain/loss
/// prospects have no common component and come back unchanged.
pub fn edit_prospect(p: &DiscreteProspect) -> Result<EditedProspect> {
    if !p.is_complete() {
        return Err(Error::IncompleteProspect {
            total: p.total_probability(),
        });
    }
    let constant = p.riskless_component();
    Ok(EditedProspect {
        constant,
        residual: p.shifted(constant),
    })
}

/// Prospect-theory valuation `sum_i v(y_i) pi(q_i)`, applied after editing:
/// a complete prospect is valued as its riskless component plus the
/// valuation of the residual.
pub fn prospect_value(
    v: &ValueFunctionParams,
    w: &WeightFunctionParams,
    p: &DiscreteProspect,
) -> f64 {
    let c = p.riskless_component();
    let weighted = |outcomes: &[Outcome]| -> f64 {
        outcomes
            .iter()
            .map(|o| v.value(o.payoff - c) * w.weight_unchecked(o.probability))
            .sum()
    };
    c + weighted(&p.outcomes)
}

/// A real-valued random variable with bounded support.
pub trait Distribution: Send + Sync {
    fn cdf(&self, x: f64) -> f64;
    /// Generalised inverse `inf { x : cdf(x) >= u }`.
    fn quantile(&self, u: f64) -> f64;
    /// Density with respect to Lebesgue measure; zero for purely atomic laws.
    fn density(&self, x: f64) -> f64;
    fn support(&self) -> (f64, f64);
    /// Points where the cdf or density is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        vec![lo, hi]
    }
    fn mean(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    lo: f64,
    hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        ensure_finite("lo", lo)?;
        ensure_finite("hi", hi)?;
        if lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidParameter {
                name: "hi",
                value: hi,
                reason: "uniform upper bound must exceed lower bound",
            })
        }
    }
}

impl Distribution for Uniform {
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u == 1.0 {
            self.hi
        } else {
            self.lo + u * (self.hi - self.lo)
        }
    }

    fn density(&self, x: f64) -> f64 {
        if (self.lo..=self.hi).contains(&x) {
            (self.hi - self.lo).recip()
        } else {
            0.0
        }
    }

    fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn mean(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// A degenerate law concentrated on one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass(pub f64);

impl Distribution for PointMass {
    fn cdf(&self, x: f64) -> f64 {
        if x < self.0 {
            0.0
        } else {
            1.0
        }
    }

    fn quantile(&self, _u: f64) -> f64 {
        self.0
    }

    fn density(&self, _x: f64) -> f64 {
        0.0
    }

    fn support(&self) -> (f64, f64) {
        (self.0, self.0)
    }

    fn mean(&self) -> f64 {
        self.0
    }
}

/// Finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    // sorted by value, strictly increasing
    atoms: Vec<(f64, f64)>,
    // cdf at each atom; the last entry is exactly 1 because the weighting
    // function is steep enough near 1 to amplify a rounding residue
    cumulative: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::Precondition(
                "discrete distribution needs at least one atom".into(),
            ));
        }
        for &(x, p) in &atoms {
            ensure_finite("atom", x)?;
            check_unit("probability", p)?;
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > COMPLETE_TOL {
            return Err(Error::IncompleteProspect { total });
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = merged
            .iter()
            .map(|a| {
                acc += a.1;
                acc.min(1.0)
            })
            .collect();
        *cumulative.last_mut().expect("nonempty") = 1.0;
        Ok(Self {
            atoms: merged,
            cumulative,
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

impl Distribution for DiscreteDistribution {
    fn cdf(&self, x: f64) -> f64 {
        match self.atoms.partition_point(|a| a.0 <= x) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < u);
        self.atoms[k.min(self.atoms.len() - 1)].0
    }

    fn density(&self, _x: f64) -> f64 {
        0.0
    }

    fn support(&self) -> (f64, f64) {
        (self.atoms[0].0, self.atoms[self.atoms.len() - 1].0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    fn mean(&self) -> f64 {
        self.atoms.iter().map(|(x, p)| x * p).sum()
    }
}

/// Cumulative prospect-theory valuation of a random payoff `Y ~ dist`:
///
/// `U = ∫_{y<0} v(y) d pi(F(y)) + ∫_{y>0} v(y) d(-pi(1 - F(y)))`.
///
/// After integrating by parts and substituting `u = |v(y)|` each half becomes
/// a Lebesgue integral of a bounded integrand,
/// `∫_0^{v(hi)} pi(P(Y > v⁻¹(u))) du - ∫_0^{-v(lo)} pi(P(Y <= v⁻¹(-u))) du`,
/// which is evaluated by adaptive quadrature split at the law's breakpoints.
/// Point masses and atoms need no density.
pub fn cpt_value(
    v: &ValueFunctionParams,
    w: &WeightFunctionParams,
    dist: &dyn Distribution,
) -> Result<f64> {
    let (lo, hi) = dist.support();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Precondition(format!(
            "cumulative valuation needs finite support, got [{lo}, {hi}]"
        )));
    }
    let opts = QuadOptions {
        abs_tol: 0.5e-8,
        ..QuadOptions::default()
    };
    let breaks = dist.breakpoints();

    let mut total = 0.0;
    if hi > 0.0 {
        let gain_of = |u: f64| {
            if v.eta == 1.0 {
                u
            } else {
                u.powf(v.eta.recip())
            }
        };
        let knots: Vec<f64> = breaks
            .iter()
            .filter(|&&b| b > 0.0)
            .map(|&b| v.value(b))
            .collect();
        let r = integrate_pieces(
            |u| w.weight_unchecked(1.0 - dist.cdf(gain_of(u))),
            0.0,
            v.value(hi),
            &knots,
            opts,
        )?;
        total += r.value;
    }
    if lo < 0.0 {
        let loss_of = |u: f64| {
            let scaled = u / v.lambda;
            -(if v.beta == 1.0 {
                scaled
            } else {
                scaled.powf(v.beta.recip())
            })
        };
        let knots: Vec<f64> = breaks
            .iter()
            .filter(|&&b| b < 0.0)
            .map(|&b| -v.value(b))
            .collect();
        let r = integrate_pieces(
            |u| w.weight_unchecked(dist.cdf(loss_of(u))),
            0.0,
            -v.value(lo),
            &knots,
            opts,
        )?;
        total -= r.value;
    }
    Ok(total)
}
