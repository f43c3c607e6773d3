//! Error metrics, rollout evaluation and zero-shot coefficient estimates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datagen::Trajectory;
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::physics::{Coeff, Coefficients};
use crate::splitting::{rollout, OperatorSubset};

/// `||pred - truth||_2 / ||truth||_2`.
///
/// ```
/// # use opsplit::{Field, Grid, identify::nrmse};
/// let g = Grid::line(8, 1.0).unwrap();
/// let u = Field::from_fn_1d(g, |x| 1.0 + x).unwrap();
/// assert_eq!(nrmse(&u, &u).unwrap(), 0.0);
/// assert!((nrmse(&Field::zeros(g, 1), &u).unwrap() - 1.0).abs() < 1e-15);
/// ```
pub fn nrmse(pred: &Field, truth: &Field) -> Result<f64> {
    nrmse_frames(std::slice::from_ref(pred), std::slice::from_ref(truth))
}

/// NRMSE over a space-time block: one norm over every frame.
pub fn nrmse_frames(pred: &[Field], truth: &[Field]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::ShapeMismatch(format!("{} predicted vs {} true frames", pred.len(), truth.len())));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (p, t) in pred.iter().zip(truth) {
        p.check_same_shape(t)?;
        for (a, b) in p.values().iter().zip(t.values()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
    }
    if den == 0.0 {
        return Err(Error::invalid("NRMSE undefined: reference field is identically zero"));
    }
    Ok((num / den).sqrt())
}

/// Summed coefficients of a selected subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub mu_hat: Coefficients,
    /// Absolute error per coefficient, filled by [`ParameterEstimate::with_truth`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<Coefficients>,
}

impl ParameterEstimate {
    /// Compare with known coefficients; names missing on either side count as zero.
    pub fn with_truth(mut self, truth: &Coefficients) -> Self {
        let mut err = Coefficients::new();
        for &c in self.mu_hat.keys().chain(truth.keys().filter(|c| c.identifiable())) {
            let a = self.mu_hat.get(&c).copied().unwrap_or(0.0);
            let b = truth.get(&c).copied().unwrap_or(0.0);
            err.insert(c, (a - b).abs());
        }
        self.abs_error = Some(err);
        self
    }

    /// Mean absolute error over the compared coefficients.
    pub fn mae(&self) -> Option<f64> {
        let e = self.abs_error.as_ref()?;
        (!e.is_empty()).then(|| e.values().sum::<f64>() / e.len() as f64)
    }
}

/// Componentwise sum of the subset's coefficients.
///
/// Every identifiable coefficient used anywhere in `dict` is reported, as
/// zero when no selected entry carries it. The reaction strength is fixed per
/// kind and is not estimated.
pub fn identify_parameters(s: &OperatorSubset, dict: &Dictionary) -> ParameterEstimate {
    let mut mu_hat: Coefficients = dict
        .entries()
        .iter()
        .flat_map(|e| e.mu.keys().copied())
        .filter(|c| c.identifiable())
        .map(|c| (c, 0.0))
        .collect();
    // summing in id order makes the estimate independent of selection order
    let mut entries: Vec<_> = s.entries().iter().collect();
    entries.sort_by_key(|e| e.id);
    for e in entries {
        for (&c, &v) in e.mu.iter().filter(|(c, _)| c.identifiable()) {
            *mu_hat.entry(c).or_insert(0.0) += v;
        }
    }
    ParameterEstimate { mu_hat, abs_error: None }
}

/// Result of rolling a subset forward against held-out frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutEvaluation {
    /// NRMSE of each predicted frame.
    pub per_step: Vec<f64>,
    /// Mean of `per_step`, or infinity after a blow-up.
    pub mean: f64,
    /// One NRMSE over the whole predicted block, or infinity after a blow-up.
    pub block: f64,
    /// 1-based step at which the rollout failed.
    pub failed_at: Option<usize>,
}

impl RolloutEvaluation {
    /// The reported metric: the per-step mean, or the block norm when `block` is set.
    pub fn metric(&self, block: bool) -> f64 {
        if block {
            self.block
        } else {
            self.mean
        }
    }
}

/// Roll out `h` steps from frame `l` (1-based, the last context frame) and
/// score against frames `l + 1 ..= l + h`.
pub fn evaluate_rollout(s: &OperatorSubset, truth: &Trajectory, l: usize, h: usize) -> Result<RolloutEvaluation> {
    if h == 0 {
        return Err(Error::invalid("horizon must be at least one step"));
    }
    if l == 0 || truth.len() < l + h {
        return Err(Error::invalid(format!("need {} frames for L = {l}, H = {h}; have {}", l + h, truth.len())));
    }
    let frames = truth.frames();
    let r = rollout(s, &frames[l - 1], truth.dt(), h)?;
    let pred = &r.frames[1..];
    let target = &frames[l..l + pred.len()];
    let per_step = pred.iter().zip(target).map(|(p, t)| nrmse(p, t)).collect::<Result<Vec<_>>>()?;
    let failed_at = r.failure.map(|f| f.step);
    let (mean, block) = if failed_at.is_some() {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (per_step.iter().sum::<f64>() / h as f64, nrmse_frames(pred, target)?)
    };
    Ok(RolloutEvaluation { per_step, mean, block, failed_at })
}

/// Mean absolute error of an estimate on the named coefficients.
pub fn coefficient_mae(estimate: &Coefficients, truth: &Coefficients, names: &[Coeff]) -> f64 {
    let errs: BTreeMap<Coeff, f64> = names
        .iter()
        .map(|c| (*c, (estimate.get(c).copied().unwrap_or(0.0) - truth.get(c).copied().unwrap_or(0.0)).abs()))
        .collect();
    errs.values().sum::<f64>() / errs.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_dictionary, DictionarySpec, KindSpec};
    use crate::field::Grid;
    use crate::physics::{advdiff_exact_flow, PhysicsKind, SolverConfig};
    use crate::splitting::Scheme;
    use std::f64::consts::PI;

    fn dict() -> Dictionary {
        build_dictionary(&DictionarySpec {
            dt: 0.1,
            grid: Grid::line(64, 16.0).unwrap(),
            solver: SolverConfig::default(),
            kinds: vec![
                KindSpec::values(PhysicsKind::Advection1D, Coeff::C, vec![0.0, 0.2, 0.3, 0.5]),
                KindSpec::values(PhysicsKind::Diffusion1D, Coeff::D, vec![0.3]),
            ],
        })
        .unwrap()
    }

    #[test]
    fn nrmse_basics() {
        let g = Grid::line(16, 16.0).unwrap();
        let u = Field::from_fn_1d(g, |x| (x * 0.4).sin() + 0.3).unwrap();
        assert_eq!(nrmse(&u, &u).unwrap(), 0.0);
        assert!((nrmse(&u.scaled(2.0), &u).unwrap() - 1.0).abs() < 1e-15);
        assert!(nrmse(&u, &Field::zeros(g, 1)).is_err());
        assert!(nrmse(&u, &Field::zeros(Grid::line(8, 16.0).unwrap(), 1)).is_err());
    }

    #[test]
    fn identification_sums() {
        let d = dict();
        // ids: c=0 -> 0, c=0.2 -> 1, c=0.3 -> 2, c=0.5 -> 3, D=0.3 -> 4
        let one = identify_parameters(&OperatorSubset::from_ids(&d, &[3], Scheme::Lie).unwrap(), &d);
        assert_eq!(one.mu_hat, [(Coeff::C, 0.5), (Coeff::D, 0.0)].into());
        let s = OperatorSubset::from_ids(&d, &[2, 1, 4], Scheme::Lie).unwrap();
        let est = identify_parameters(&s, &d);
        assert!((est.mu_hat[&Coeff::C] - 0.5).abs() < 1e-15);
        assert_eq!(est.mu_hat[&Coeff::D], 0.3);
        let permuted = identify_parameters(&OperatorSubset::from_ids(&d, &[4, 1, 2], Scheme::Lie).unwrap(), &d);
        let truth = [(Coeff::C, 0.5), (Coeff::D, 0.3)].into();
        let est = est.with_truth(&truth);
        assert!(est.mae().unwrap() < 1e-15);
        assert_eq!(permuted.mu_hat[&Coeff::D], 0.3);
    }

    #[test]
    fn rollout_evaluation_exact_and_frozen() {
        let d = dict();
        let g = d.grid();
        let k = 2.0 * PI / 16.0;
        let u0 = Field::from_fn_1d(g, |x| (k * x).sin()).unwrap();
        let dt = 0.1;
        let frames: Vec<Field> = (0..12).map(|n| advdiff_exact_flow(&u0, 0.0, 0.3, n as f64 * dt).unwrap()).collect();
        let truth = Trajectory::new(frames, dt).unwrap();
        let exact = OperatorSubset::from_ids(&d, &[4], Scheme::Strang).unwrap();
        let ev = evaluate_rollout(&exact, &truth, 4, 8).unwrap();
        assert!(ev.mean < 1e-12 && ev.block < 1e-12);
        // an identity operator freezes frame L; the truth decays by exp(-D k^2 t)
        let frozen = OperatorSubset::from_ids(&d, &[0], Scheme::Strang).unwrap();
        let ev = evaluate_rollout(&frozen, &truth, 4, 8).unwrap();
        let expected: f64 = (1..=8).map(|j| (0.3 * k * k * dt * j as f64).exp() - 1.0).sum::<f64>() / 8.0;
        assert!((ev.mean - expected).abs() < 1e-12, "{} vs {expected}", ev.mean);
        assert!(evaluate_rollout(&frozen, &truth, 4, 0).is_err());
        assert!(evaluate_rollout(&frozen, &truth, 4, 9).is_err());
    }
}
