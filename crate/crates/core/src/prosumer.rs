//! Consumer and prosumer primitives: the saturating quadratic convenience
//! function, price response, and the renewable generation model.

use crate::cpt::{Distribution, PointMass, Uniform};
use crate::error::{ensure_finite, Error, Result};

/// Monetised comfort of consuming `x` units: `omega x - alpha x^2 / 2` up to
/// the satiation point `omega / alpha`, constant `omega^2 / (2 alpha)` beyond.
pub fn convenience(omega: f64, alpha: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::OutOfRange {
            name: "consumption",
            value: x,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if x >= omega / alpha {
        return Ok(omega * omega / (2.0 * alpha));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(quadratic_convenience(omega, alpha, x))
}

/// The unsaturated quadratic branch, valid for any `x`.
pub(crate) fn quadratic_convenience(omega: f64, alpha: f64, x: f64) -> f64 {
    omega * x - 0.5 * alpha * x * x
}

/// Consumption that maximises `convenience(x) - price * x`, floored at zero.
pub fn consumer_demand(omega: f64, alpha: f64, price: f64) -> f64 {
    ((omega - price) / alpha).max(0.0)
}

/// Distribution of a prosumer's renewable output over `[s_min, s_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenerationModel {
    Uniform(Uniform),
    /// Known output (`s_min == s_max`).
    Fixed(PointMass),
}

impl GenerationModel {
    /// Uniform output on `[s_min, s_max]`; collapses to a point mass when the
    /// bounds coincide.
    pub fn uniform(s_min: f64, s_max: f64) -> Result<Self> {
        ensure_finite("s_min", s_min)?;
        ensure_finite("s_max", s_max)?;
        if s_min < 0.0 {
            return Err(Error::InvalidParameter {
                name: "s_min",
                value: s_min,
                reason: "generation cannot be negative",
            });
        }
        if s_max < s_min {
            return Err(Error::InvalidParameter {
                name: "s_max",
                value: s_max,
                reason: "must be at least s_min",
            });
        }
        if s_min == s_max {
            Ok(GenerationModel::Fixed(PointMass(s_min)))
        } else {
            Ok(GenerationModel::Uniform(Uniform::new(s_min, s_max)?))
        }
    }

    pub fn s_min(&self) -> f64 {
        self.support().0
    }

    pub fn s_max(&self) -> f64 {
        self.support().1
    }

    pub fn contains(&self, s: f64) -> bool {
        let (lo, hi) = self.support();
        (lo..=hi).contains(&s)
    }

    fn inner(&self) -> &dyn Distribution {
        match self {
            GenerationModel::Uniform(u) => u,
            GenerationModel::Fixed(p) => p,
        }
    }
}

impl Distribution for GenerationModel {
    fn cdf(&self, x: f64) -> f64 {
        self.inner().cdf(x)
    }

    fn quantile(&self, u: f64) -> f64 {
        self.inner().quantile(u)
    }

    fn density(&self, x: f64) -> f64 {
        self.inner().density(x)
    }

    fn support(&self) -> (f64, f64) {
        self.inner().support()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner().breakpoints()
    }

    fn mean(&self) -> f64 {
        self.inner().mean()
    }
}

/// A prosumer's preferences and generation uncertainty for one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProsumerProfile {
    omega: f64,
    alpha: f64,
    generation: GenerationModel,
}

impl ProsumerProfile {
    /// Requires `omega, alpha > 0` and generation that always covers the
    /// prosumer's own satiation demand `omega / alpha`.
    pub fn new(omega: f64, alpha: f64, generation: GenerationModel) -> Result<Self> {
        for (name, value) in [("omega", omega), ("alpha", alpha)] {
            ensure_finite(name, value)?;
            if value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        // relative slack for s = omega / alpha + 0 computed in floating point
        let satiation = omega / alpha;
        if generation.s_min() < satiation * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter {
                name: "s_min",
                value: generation.s_min(),
                reason: "generation support must lie at or above omega / alpha",
            });
        }
        Ok(Self {
            omega,
            alpha,
            generation,
        })
    }

    /// A distributed generator: no own demand, so everything generated is
    /// available for sale. Modelled as `omega = 0` with an infinitely steep
    /// convenience curve, which removes the consumption offsets `omega/alpha`
    /// and `p_e/alpha` from the contract formulas.
    pub fn generator(generation: GenerationModel) -> Self {
        Self {
            omega: 0.0,
            alpha: f64::INFINITY,
            generation,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn generation(&self) -> &GenerationModel {
        &self.generation
    }

    /// Consumption at which convenience saturates.
    pub fn satiation(&self) -> f64 {
        self.omega / self.alpha
    }

    pub fn convenience(&self, x: f64) -> Result<f64> {
        convenience(self.omega, self.alpha, x)
    }
}

/// Convenience left after selling back `z` of a realised generation `s`.
pub fn sellback_convenience(profile: &ProsumerProfile, s: f64, z: f64) -> Result<f64> {
    if !(0.0..=s).contains(&z) {
        return Err(Error::OutOfRange {
            name: "sell-back",
            value: z,
            lo: 0.0,
            hi: s,
        });
    }
    profile.convenience(s - z)
}
