//! Fixed-prize lottery mechanism.
//!
//! The retailer announces a prize `R`; a prosumer selling back `z` wins with
//! probability `q = m z`. There is no contract and no penalty, and the
//! prosumer trades consumption against the weighted chance of winning.

use crate::cpt::{Distribution, WeightFunctionParams};
use crate::error::{ensure_finite, Error, Result};
use crate::numerics::{brent, golden_section_max, RootOptions};
use crate::prosumer::{quadratic_convenience, ProsumerProfile};

/// Slack when summing winning probabilities that should total at most one.
const PROBABILITY_SLACK: f64 = 1e-9;

/// Sub-intervals scanned for extra stationary points where the weighting
/// function is convex.
const CONVEX_SCAN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LotterySpec {
    prize: f64,
    scale: f64,
}

impl LotterySpec {
    pub fn new(prize: f64, scale: f64) -> Result<Self> {
        ensure_finite("prize", prize)?;
        ensure_finite("scale", scale)?;
        if prize < 0.0 {
            return Err(Error::InvalidParameter {
                name: "prize",
                value: prize,
                reason: "must be non-negative",
            });
        }
        if scale <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale,
                reason: "must be positive",
            });
        }
        Ok(Self { prize, scale })
    }

    pub fn prize(&self) -> f64 {
        self.prize
    }

    /// Winning probability per unit sold back (`m`).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Rejects a scale under which the winning probabilities could sum past
    /// one when every prosumer sells `max_aggregate_sellback` in total.
    pub fn check_feasible(&self, max_aggregate_sellback: f64) -> Result<()> {
        let total = self.scale * max_aggregate_sellback;
        if total > 1.0 + PROBABILITY_SLACK {
            Err(Error::InfeasibleLottery {
                total,
                scale: self.scale,
            })
        } else {
            Ok(())
        }
    }
}

fn check_sellback(s: f64, z: f64, spec: &LotterySpec) -> Result<()> {
    if !(0.0..=s).contains(&z) {
        return Err(Error::OutOfRange {
            name: "sell-back",
            value: z,
            lo: 0.0,
            hi: s,
        });
    }
    if spec.scale * z > 1.0 + PROBABILITY_SLACK {
        return Err(Error::InfeasibleLottery {
            total: spec.scale * z,
            scale: spec.scale,
        });
    }
    Ok(())
}

/// `U(z) = omega (s - z) - alpha/2 (s - z)^2 + R pi(m z)`.
///
/// The quadratic convenience is used as is, without saturation.
pub fn lottery_utility(
    profile: &ProsumerProfile,
    spec: &LotterySpec,
    w: &WeightFunctionParams,
    s: f64,
    z: f64,
) -> Result<f64> {
    check_sellback(s, z, spec)?;
    Ok(utility(profile, spec, w, s, z))
}

fn utility(
    profile: &ProsumerProfile,
    spec: &LotterySpec,
    w: &WeightFunctionParams,
    s: f64,
    z: f64,
) -> f64 {
    let lottery = if spec.prize == 0.0 {
        0.0
    } else {
        spec.prize * w.weight_unchecked(spec.scale * z)
    };
    quadratic_convenience(profile.omega(), profile.alpha(), s - z) + lottery
}

/// `U'(z) = -omega + alpha (s - z) + R m pi'(m z)`, for `z` in `(0, s]`.
pub fn lottery_marginal_utility(
    profile: &ProsumerProfile,
    spec: &LotterySpec,
    w: &WeightFunctionParams,
    s: f64,
    z: f64,
) -> Result<f64> {
    check_sellback(s, z, spec)?;
    Ok(marginal(profile, spec, w, s, z))
}

fn marginal(
    profile: &ProsumerProfile,
    spec: &LotterySpec,
    w: &WeightFunctionParams,
    s: f64,
    z: f64,
) -> f64 {
    let base = -profile.omega() + profile.alpha() * (s - z);
    if spec.prize == 0.0 {
        return base;
    }
    let q = (spec.scale * z).clamp(0.0, 1.0);
    // m pi'(m z)
    let slope = match *w {
        WeightFunctionParams::Identity => spec.scale,
        WeightFunctionParams::Prelec { gamma } if q > 0.0 && q < 1.0 => {
            // written as gamma pi(mz) (-ln mz)^(gamma-1) / z to avoid dividing by m z
            let t = -q.ln();
            gamma * (-t.powf(gamma)).exp() * t.powf(gamma - 1.0) / z
        }
        WeightFunctionParams::Prelec { .. } => f64::INFINITY,
    };
    base + spec.prize * slope
}

/// Utility-maximising sell-back over `[0, s]`.
///
/// On the stretch where `pi` is concave (`m z < 1/e` for Prelec) the
/// marginal utility is strictly decreasing and, for `R > 0`, diverges at
/// `0+`; its unique root there is found with Brent's method on
/// `[1e-12 s, min(s, (1/e)/m)]`. Beyond the inflection the remaining range
/// is scanned for further stationary points. The best of these candidates
/// and the endpoints `0` and `s` is returned.
pub fn optimal_lottery_sellback(
    profile: &ProsumerProfile,
    spec: &LotterySpec,
    w: &WeightFunctionParams,
    s: f64,
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
    if spec.scale * s > 1.0 + PROBABILITY_SLACK {
        return Err(Error::InfeasibleLottery {
            total: spec.scale * s,
            scale: spec.scale,
        });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    if spec.prize == 0.0 {
        return Ok((s - profile.satiation()).clamp(0.0, s));
    }

    let u = |z: f64| utility(profile, spec, w, s, z);
    let g = |z: f64| marginal(profile, spec, w, s, z);
    let opts = RootOptions::default();

    let concave_end = match w.inflection() {
        Some(q) => s.min(q / spec.scale),
        None => s,
    };
    let z_lo = 1e-12 * s;

    let mut candidates = vec![0.0, s];
    let (g_lo, g_hi) = (g(z_lo), g(concave_end));
    if g_lo > 0.0 && g_hi < 0.0 {
        let z = brent(g, z_lo, concave_end, opts)
            .unwrap_or_else(|_| golden_section_max(u, 0.0, concave_end, opts.x_tol));
        candidates.push(z);
    } else if g_lo > 0.0 {
        candidates.push(concave_end);
    }

    if concave_end < s {
        let step = (s - concave_end) / CONVEX_SCAN as f64;
        let mut a = concave_end;
        let mut ga = g_hi;
        for i in 1..=CONVEX_SCAN {
            let b = if i == CONVEX_SCAN {
                s
            } else {
                concave_end + step * i as f64
            };
            let gb = g(b);
            if ga > 0.0 && gb <= 0.0 {
                candidates.push(brent(g, a, b, opts)?);
            }
            a = b;
            ga = gb;
        }
    }

    let best =
        candidates
            .into_iter()
            .map(|z| (z, u(z)))
            .fold((f64::NAN, f64::NEG_INFINITY), |best, c| {
                if c.1 > best.1 {
                    c
                } else {
                    best
                }
            });
    Ok(best.0)
}

/// Per-prosumer winning probabilities and the probability nobody wins.
#[derive(Debug, Clone, PartialEq)]
pub struct WinningProbabilities {
    pub per_prosumer: Vec<f64>,
    pub no_winner: f64,
}

pub fn winning_probabilities(sellbacks: &[f64], scale: f64) -> Result<WinningProbabilities> {
    ensure_finite("scale", scale)?;
    if let Some(&z) = sellbacks.iter().find(|z| !(**z >= 0.0)) {
        return Err(Error::OutOfRange {
            name: "sell-back",
            value: z,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let per_prosumer: Vec<f64> = sellbacks.iter().map(|z| scale * z).collect();
    let total: f64 = per_prosumer.iter().sum();
    if total > 1.0 + PROBABILITY_SLACK {
        return Err(Error::InfeasibleLottery { total, scale });
    }
    Ok(WinningProbabilities {
        per_prosumer,
        no_winner: (1.0 - total).max(0.0),
    })
}
