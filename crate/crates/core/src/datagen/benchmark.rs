use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Grid;

/// The four benchmark families with their desk-scale defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    AdvDiff,
    Combined,
    GrayScott,
    NavierStokes,
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::AdvDiff,
        Benchmark::Combined,
        Benchmark::GrayScott,
        Benchmark::NavierStokes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::AdvDiff => "advdiff",
            Benchmark::Combined => "combined",
            Benchmark::GrayScott => "grayscott",
            Benchmark::NavierStokes => "navierstokes",
        }
    }

    pub fn grid(self) -> Grid {
        let g = match self {
            Benchmark::AdvDiff | Benchmark::Combined => Grid::line(256, 16.0),
            Benchmark::GrayScott => Grid::square(64, 2.0),
            Benchmark::NavierStokes => Grid::square(64, 2.0 * std::f64::consts::PI),
        };
        g.expect("preset grids are valid")
    }

    /// Final time of a generated trajectory.
    pub fn horizon_time(self) -> f64 {
        match self {
            Benchmark::AdvDiff => 10.0,
            Benchmark::Combined => 4.0,
            Benchmark::GrayScott => 50.0,
            Benchmark::NavierStokes => 4.0,
        }
    }

    pub fn frames(self) -> usize {
        match self {
            Benchmark::AdvDiff => 100,
            Benchmark::Combined => 250,
            Benchmark::GrayScott | Benchmark::NavierStokes => 50,
        }
    }

    /// Spacing between stored frames, `T / (frames - 1)`.
    pub fn frame_dt(self) -> f64 {
        self.horizon_time() / (self.frames() - 1) as f64
    }

    /// Rollout length used for evaluation.
    pub fn default_horizon(self) -> usize {
        match self {
            Benchmark::AdvDiff => 34,
            Benchmark::Combined => 50,
            Benchmark::GrayScott => 32,
            Benchmark::NavierStokes => 16,
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Benchmark::GrayScott => 200,
            _ => 100,
        }
    }

    pub fn default_beam_width(self) -> usize {
        match self {
            Benchmark::GrayScott => 8,
            _ => 4,
        }
    }
}

impl FromStr for Benchmark {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "advdiff" | "advectiondiffusion" => Benchmark::AdvDiff,
            "combined" | "combinedequation" => Benchmark::Combined,
            "grayscott" | "gs" => Benchmark::GrayScott,
            "navierstokes" | "ns" => Benchmark::NavierStokes,
            _ => return Err(Error::Config(format!("unknown benchmark `{s}`"))),
        })
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for b in Benchmark::ALL {
            assert_eq!(b.name().parse::<Benchmark>().unwrap(), b);
        }
        assert!("heat".parse::<Benchmark>().is_err());
    }

    #[test]
    fn frame_spacing() {
        assert!((Benchmark::AdvDiff.frame_dt() - 10.0 / 99.0).abs() < 1e-15);
        assert_eq!(Benchmark::NavierStokes.frames(), 50);
    }
}
