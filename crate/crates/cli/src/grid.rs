use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Parameters that can be swept.
pub const GRID_NAMES: [&str; 5] = [
    "sellback_price",
    "penalty_price",
    "lambda",
    "prize",
    "n_prosumers",
];

/// Evenly spaced sweep values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl GridSpec {
    pub const fn new(start: f64, stop: f64, steps: usize) -> Self {
        Self { start, stop, steps }
    }

    /// A sweep needs at least two points; a single point is accepted only
    /// when `start == stop`.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if self.stop < self.start {
            return Err(format!("stop {} is below start {}", self.stop, self.start));
        }
        match self.steps {
            0 => Err("a grid needs at least one step".into()),
            1 if self.start != self.stop => Err("a sweep needs at least 2 steps".into()),
            _ => Ok(()),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * (i as f64 / last)
                }
            })
            .collect()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
    }
}

/// A `name=start:stop:steps` override from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOverride {
    pub name: String,
    pub grid: GridSpec,
}

impl FromStr for GridOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, spec) = s
            .split_once('=')
            .ok_or_else(|| format!("expected name=start:stop:steps, got `{s}`"))?;
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, steps] = parts[..] else {
            return Err(format!("expected start:stop:steps, got `{spec}`"));
        };
        let number = |text: &str, what: &str| {
            text.trim()
                .parse::<f64>()
                .map_err(|e| format!("grid {name}: bad {what} `{text}`: {e}"))
        };
        let grid = GridSpec {
            start: number(start, "start")?,
            stop: number(stop, "stop")?,
            steps: steps
                .trim()
                .parse()
                .map_err(|e| format!("grid {name}: bad steps `{steps}`: {e}"))?,
        };
        grid.validate().map_err(|e| format!("grid {name}: {e}"))?;
        let name = name.trim();
        if name.is_empty() {
            return Err("grid name is empty".into());
        }
        Ok(Self {
            name: name.to_string(),
            grid,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_hit_both_ends() {
        let v = GridSpec::new(2.05, 3.5, 30).values();
        assert_eq!(v.len(), 30);
        assert_eq!(v[0], 2.05);
        assert_eq!(v[29], 3.5);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(GridSpec::new(1.0, 1.0, 1).values(), vec![1.0]);
    }

    #[test]
    fn parse_override() {
        let g: GridOverride = "prize=0:5000:11".parse().unwrap();
        assert_eq!(g.name, "prize");
        assert_eq!(g.grid, GridSpec::new(0.0, 5000.0, 11));
        assert!("prize=0:5000".parse::<GridOverride>().is_err());
        assert!("prize".parse::<GridOverride>().is_err());
        assert!("prize=5:1:3".parse::<GridOverride>().is_err());
        assert!("prize=0:1:1".parse::<GridOverride>().is_err());
        assert!("prize=0:x:3".parse::<GridOverride>().is_err());
        assert!("=0:1:3".parse::<GridOverride>().is_err());
    }
}
