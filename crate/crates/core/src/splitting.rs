//! Lie and Strang compositions of dictionary flows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datagen::Trajectory;
use crate::dictionary::{Dictionary, OperatorEntry};
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Lie,
    #[default]
    Strang,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lie" => Ok(Scheme::Lie),
            "strang" => Ok(Scheme::Strang),
            _ => Err(Error::Config(format!("unknown splitting scheme `{s}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Lie => "lie",
            Scheme::Strang => "strang",
        })
    }
}

/// An ordered selection of distinct dictionary entries.
#[derive(Clone, Debug)]
pub struct OperatorSubset {
    entries: Vec<OperatorEntry>,
    scheme: Scheme,
}

impl OperatorSubset {
    pub fn new(entries: Vec<OperatorEntry>, scheme: Scheme) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("operator subset must not be empty"));
        }
        let mut ids: Vec<usize> = entries.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("operator subset repeats an entry"));
        }
        Ok(OperatorSubset { entries, scheme })
    }

    /// Look up `ids` in `dict`, keeping the given order.
    pub fn from_ids(dict: &Dictionary, ids: &[usize], scheme: Scheme) -> Result<Self> {
        let entries = ids
            .iter()
            .map(|&id| dict.get(id).cloned().ok_or_else(|| Error::invalid(format!("no operator with id {id}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries, scheme)
    }

    pub fn entries(&self) -> &[OperatorEntry] {
        &self.entries
    }

    pub fn ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.id).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Same entries ordered by id.
    pub fn canonical(mut self) -> Self {
        self.entries.sort_by_key(|e| e.id);
        self
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label()).collect()
    }

    /// Flow applications per split step: `m` for Lie, `2m - 1` for Strang.
    pub fn applications_per_step(&self) -> usize {
        match self.scheme {
            Scheme::Lie => self.len(),
            Scheme::Strang => 2 * self.len() - 1,
        }
    }

    /// One split step with the subset's scheme.
    pub fn step(&self, u: &Field, dt: f64) -> Result<Field> {
        match self.scheme {
            Scheme::Lie => lie_step(self, u, dt),
            Scheme::Strang => strang_step(self, u, dt),
        }
    }
}

fn apply(e: &OperatorEntry, u: &Field, t: f64) -> Result<Field> {
    e.flow.advance(u, t).map_err(|err| err.with_operator(e.id))
}

/// `f_m(dt) o ... o f_1(dt)`: the first entry acts first.
pub fn lie_step(s: &OperatorSubset, u: &Field, dt: f64) -> Result<Field> {
    let mut v = apply(&s.entries[0], u, dt)?;
    for e in &s.entries[1..] {
        v = apply(e, &v, dt)?;
    }
    Ok(v)
}

/// Palindrome `f_1(dt/2) .. f_{m-1}(dt/2) f_m(dt) f_{m-1}(dt/2) .. f_1(dt/2)`.
pub fn strang_step(s: &OperatorSubset, u: &Field, dt: f64) -> Result<Field> {
    let (last, outer) = s.entries.split_last().expect("subset is nonempty");
    let mut v = u.clone();
    for e in outer {
        v = apply(e, &v, 0.5 * dt)?;
    }
    v = apply(last, &v, dt)?;
    for e in outer.iter().rev() {
        v = apply(e, &v, 0.5 * dt)?;
    }
    Ok(v)
}

/// A blow-up during a rollout.
#[derive(Debug)]
pub struct RolloutFailure {
    /// 1-based index of the step that failed.
    pub step: usize,
    pub error: Error,
}

/// Frames produced by [`rollout`]; shorter than requested on failure.
#[derive(Debug)]
pub struct Rollout {
    /// The initial field followed by one frame per completed step.
    pub frames: Vec<Field>,
    pub dt: f64,
    pub failure: Option<RolloutFailure>,
}

impl Rollout {
    pub fn completed_steps(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn into_trajectory(self) -> Result<Trajectory> {
        if let Some(f) = self.failure {
            return Err(f.error);
        }
        Trajectory::new(self.frames, self.dt)
    }
}

/// Autoregressive split steps from `u0`. A failing step ends the rollout and
/// is recorded; frames computed so far are kept.
pub fn rollout(s: &OperatorSubset, u0: &Field, dt: f64, steps: usize) -> Result<Rollout> {
    if steps == 0 {
        return Err(Error::invalid("rollout needs at least one step"));
    }
    let mut frames = Vec::with_capacity(steps + 1);
    frames.push(u0.clone());
    for step in 1..=steps {
        match s.step(&frames[step - 1], dt) {
            Ok(next) if next.is_finite() => frames.push(next),
            Ok(_) => {
                let error = Error::stability("split step produced non-finite values");
                return Ok(Rollout { frames, dt, failure: Some(RolloutFailure { step, error }) });
            }
            Err(error) if error.is_numerical() => {
                return Ok(Rollout { frames, dt, failure: Some(RolloutFailure { step, error }) });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Rollout { frames, dt, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::physics::{advdiff_exact_flow, FlowOperator, PhysicsParams, SolverConfig};

    fn entry(id: usize, p: PhysicsParams, g: Grid) -> OperatorEntry {
        OperatorEntry::from_operator(id, FlowOperator::new(p, 0.1, g, SolverConfig::default()).unwrap(), "test")
    }

    fn bump(g: Grid) -> Field {
        Field::from_fn_1d(g, |x| (-(x - 8.0).powi(2)).exp()).unwrap()
    }

    fn max_err(a: &Field, b: &Field) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn singleton_is_the_flow() {
        let g = Grid::line(64, 16.0).unwrap();
        let u = bump(g);
        let e = entry(0, PhysicsParams::advection(0.7).unwrap(), g);
        let direct = e.flow.advance(&u, 0.3).unwrap();
        for scheme in [Scheme::Lie, Scheme::Strang] {
            let s = OperatorSubset::new(vec![e.clone()], scheme).unwrap();
            assert_eq!(s.step(&u, 0.3).unwrap(), direct);
        }
    }

    #[test]
    fn commuting_pair_is_exact() {
        let g = Grid::line(128, 16.0).unwrap();
        let u = bump(g);
        let pair = vec![entry(0, PhysicsParams::advection(0.5).unwrap(), g), entry(1, PhysicsParams::diffusion(0.3).unwrap(), g)];
        let exact = advdiff_exact_flow(&u, 0.5, 0.3, 0.2).unwrap();
        for scheme in [Scheme::Lie, Scheme::Strang] {
            let s = OperatorSubset::new(pair.clone(), scheme).unwrap();
            assert!(max_err(&s.step(&u, 0.2).unwrap(), &exact) < 1e-10);
        }
    }

    #[test]
    fn advections_add() {
        let g = Grid::line(128, 16.0).unwrap();
        let u = bump(g);
        let s = OperatorSubset::new(
            vec![entry(0, PhysicsParams::advection(0.3).unwrap(), g), entry(1, PhysicsParams::advection(0.45).unwrap(), g)],
            Scheme::Lie,
        )
        .unwrap();
        assert!(max_err(&s.step(&u, 0.4).unwrap(), &advdiff_exact_flow(&u, 0.75, 0.0, 0.4).unwrap()) < 1e-12);
    }

    #[test]
    fn subset_validation_and_costs() {
        let g = Grid::line(16, 16.0).unwrap();
        let a = entry(3, PhysicsParams::advection(0.3).unwrap(), g);
        assert!(OperatorSubset::new(vec![], Scheme::Lie).is_err());
        assert!(OperatorSubset::new(vec![a.clone(), a.clone()], Scheme::Lie).is_err());
        let b = entry(1, PhysicsParams::diffusion(0.3).unwrap(), g);
        let c = entry(2, PhysicsParams::dispersion(0.3).unwrap(), g);
        let s = OperatorSubset::new(vec![a, b, c], Scheme::Lie).unwrap();
        assert_eq!(s.applications_per_step(), 3);
        assert_eq!(s.clone().with_scheme(Scheme::Strang).applications_per_step(), 5);
        assert_eq!(s.canonical().ids(), vec![1, 2, 3]);
    }

    #[test]
    fn failure_carries_operator_id() {
        let g = Grid::line(32, 16.0).unwrap();
        let u = bump(g).scaled(1e200);
        let cfg = SolverConfig { advective_cfl: 1e300, ..Default::default() };
        let op = FlowOperator::new(PhysicsParams::nonlinear_advection(1.0).unwrap(), 1.0, g, cfg).unwrap();
        let s = OperatorSubset::new(vec![OperatorEntry::from_operator(7, op, "x")], Scheme::Strang).unwrap();
        match s.step(&u, 1.0).unwrap_err() {
            Error::Stability { operator, .. } => assert_eq!(operator, Some(7)),
            other => panic!("{other}"),
        }
        let r = rollout(&s, &u, 1.0, 5).unwrap();
        assert_eq!(r.failure.as_ref().unwrap().step, 1);
        assert_eq!(r.completed_steps(), 0);
        assert!(r.into_trajectory().is_err());
    }

    #[test]
    fn rollout_records_every_frame() {
        let g = Grid::line(64, 16.0).unwrap();
        let u = bump(g);
        let s = OperatorSubset::new(vec![entry(0, PhysicsParams::diffusion(0.0).unwrap(), g)], Scheme::Strang).unwrap();
        let r = rollout(&s, &u, 0.1, 4).unwrap();
        assert_eq!(r.frames.len(), 5);
        assert!(r.frames.iter().all(|f| f == &u));
        assert!(rollout(&s, &u, 0.1, 0).is_err());
    }
}
