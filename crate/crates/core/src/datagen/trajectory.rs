use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::physics::Coefficients;

/// Time-ordered fields with a uniform step and the parameters that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    frames: Vec<Field>,
    dt: f64,
    pub mu: Coefficients,
    pub seed: u64,
    pub generator: String,
    /// Free-form solver settings recorded alongside the data.
    pub solver: BTreeMap<String, serde_json::Value>,
}

impl Trajectory {
    pub fn new(frames: Vec<Field>, dt: f64) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::invalid(format!(
                "a trajectory needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("frame step must be positive, got {dt}")));
        }
        let (g, c) = (*frames[0].grid(), frames[0].channels());
        if frames.iter().any(|f| *f.grid() != g || f.channels() != c) {
            return Err(Error::ShapeMismatch("trajectory frames must share grid and channels".into()));
        }
        Ok(Trajectory {
            frames,
            dt,
            mu: Coefficients::new(),
            seed: 0,
            generator: String::new(),
            solver: BTreeMap::new(),
        })
    }

    pub fn with_metadata(mut self, mu: Coefficients, seed: u64, generator: impl Into<String>) -> Self {
        self.mu = mu;
        self.seed = seed;
        self.generator = generator.into();
        self
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Field> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        self.frames[0].grid()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels()
    }

    /// Frames `start..end` as a new trajectory sharing metadata.
    pub fn slice(&self, start: usize, end: usize) -> Result<Trajectory> {
        if end > self.frames.len() || start >= end {
            return Err(Error::invalid(format!(
                "frame range {start}..{end} outside 0..{}",
                self.frames.len()
            )));
        }
        let mut t = Trajectory::new(self.frames[start..end].to_vec(), self.dt)?;
        t.mu = self.mu.clone();
        t.seed = self.seed;
        t.generator = self.generator.clone();
        t.solver = self.solver.clone();
        Ok(t)
    }
}
