use std::fmt::Debug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::combined::combined_eq_flow;
use super::grayscott::{grayscott_flow, GrayScott};
use super::linear::{diffusion2d_flow, linear_1d_flow};
use super::params::{Coeff, PhysicsKind, PhysicsParams, SolverConfig};
use super::vorticity::euler_flow;
use crate::error::{Error, Result};
use crate::field::{Field, Grid};

/// Anything that can advance a field by a given time.
///
/// Splitting and search only see this trait, so a learned operator can stand
/// in for the parametric flows below.
pub trait Flow: Send + Sync + Debug {
    fn advance(&self, u: &Field, t: f64) -> Result<Field>;
    fn grid(&self) -> Grid;
    /// The step the operator was built for.
    fn native_dt(&self) -> f64;
}

/// A single-physics flow with fixed coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowOperator {
    params: PhysicsParams,
    dt: f64,
    grid: Grid,
    config: SolverConfig,
}

impl FlowOperator {
    pub fn new(params: PhysicsParams, dt: f64, grid: Grid, config: SolverConfig) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("native step must be positive, got {dt}")));
        }
        if grid.dims() != params.kind.dims() {
            return Err(Error::ShapeMismatch(format!(
                "{} needs a {}D grid",
                params.kind,
                params.kind.dims()
            )));
        }
        config.validate()?;
        let params = PhysicsParams::new(params.kind, params.coeffs)?;
        Ok(FlowOperator { params, dt, grid, config })
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn kind(&self) -> PhysicsKind {
        self.params.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Advance by the native step.
    pub fn step(&self, u: &Field) -> Result<Field> {
        self.advance(u, self.dt)
    }
}

impl Flow for FlowOperator {
    fn advance(&self, u: &Field, t: f64) -> Result<Field> {
        if u.grid() != &self.grid {
            return Err(Error::ShapeMismatch("field grid differs from the operator grid".into()));
        }
        let p = &self.params;
        let cfg = &self.config;
        match p.kind {
            PhysicsKind::Advection1D => linear_1d_flow(u, p.get(Coeff::C), 0.0, 0.0, t),
            PhysicsKind::Diffusion1D => linear_1d_flow(u, 0.0, p.get(Coeff::D), 0.0, t),
            PhysicsKind::Dispersion1D => linear_1d_flow(u, 0.0, 0.0, p.get(Coeff::Gamma), t),
            PhysicsKind::NonlinAdvection1D => combined_eq_flow(u, p.get(Coeff::Alpha), 0.0, 0.0, t, cfg),
            PhysicsKind::ReactionGS => {
                let gs = GrayScott { delta: p.get(Coeff::Delta), feed: p.get(Coeff::F), ..Default::default() };
                grayscott_flow(u, &gs, t, cfg)
            }
            PhysicsKind::DiffusionKillGS => {
                let gs = GrayScott {
                    d_a: p.get(Coeff::DA),
                    d_b: p.get(Coeff::DB),
                    kill: p.get(Coeff::K),
                    ..Default::default()
                };
                grayscott_flow(u, &gs, t, cfg)
            }
            PhysicsKind::Euler2D => euler_flow(u, t, cfg),
            PhysicsKind::Diffusion2D => diffusion2d_flow(u, p.get(Coeff::Nu), t),
        }
    }

    fn grid(&self) -> Grid {
        self.grid
    }

    fn native_dt(&self) -> f64 {
        self.dt
    }
}

/// Multiply every coefficient by `1 + eps`, `eps = relative_error * (2U - 1)`
/// with one uniform `U` per coefficient in name order.
///
/// The draws depend only on `seed`, so sweeping `relative_error` with a fixed
/// seed scales the same perturbation direction. Coefficients that must be
/// nonnegative are clamped at zero.
pub fn perturb_operator(op: &FlowOperator, relative_error: f64, seed: u64) -> Result<FlowOperator> {
    if !(relative_error.is_finite() && relative_error >= 0.0) {
        return Err(Error::invalid(format!("relative error must be >= 0, got {relative_error}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = op.params.clone();
    for (c, v) in params.coeffs.iter_mut() {
        let u: f64 = rng.random();
        let eps = relative_error * (2.0 * u - 1.0);
        *v *= 1.0 + eps;
        if c.nonnegative() {
            *v = v.max(0.0);
        }
    }
    FlowOperator::new(params, op.dt, op.grid, op.config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::advdiff_exact_flow;
    use std::f64::consts::PI;

    fn line() -> Grid {
        Grid::line(128, 16.0).unwrap()
    }

    fn bump(g: Grid) -> Field {
        Field::from_fn_1d(g, |x| (-(x - 8.0).powi(2)).exp() + 0.2 * (2.0 * PI * x / 16.0).sin()).unwrap()
    }

    #[test]
    fn dispatch_matches_direct_flows() {
        let g = line();
        let u = bump(g);
        let op = FlowOperator::new(PhysicsParams::advection(0.5).unwrap(), 0.1, g, SolverConfig::default()).unwrap();
        assert_eq!(op.step(&u).unwrap(), advdiff_exact_flow(&u, 0.5, 0.0, 0.1).unwrap());
        let op = FlowOperator::new(PhysicsParams::diffusion(0.3).unwrap(), 0.1, g, SolverConfig::default()).unwrap();
        assert_eq!(op.advance(&u, 0.05).unwrap(), advdiff_exact_flow(&u, 0.0, 0.3, 0.05).unwrap());
    }

    #[test]
    fn rejects_mismatched_grid() {
        let g = line();
        let op = FlowOperator::new(PhysicsParams::advection(0.5).unwrap(), 0.1, g, SolverConfig::default()).unwrap();
        let other = Field::zeros(Grid::line(64, 16.0).unwrap(), 1);
        assert!(op.step(&other).is_err());
        assert!(FlowOperator::new(PhysicsParams::euler(), 0.1, g, SolverConfig::default()).is_err());
        assert!(FlowOperator::new(PhysicsParams::advection(0.5).unwrap(), 0.0, g, SolverConfig::default()).is_err());
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let op = FlowOperator::new(PhysicsParams::advection(1.0).unwrap(), 0.1, line(), SolverConfig::default()).unwrap();
        assert_eq!(perturb_operator(&op, 0.0, 7).unwrap(), op);
        assert!(perturb_operator(&op, -0.1, 7).is_err());
    }

    #[test]
    fn perturbation_is_seeded_and_in_range() {
        let op = FlowOperator::new(PhysicsParams::advection(1.0).unwrap(), 0.1, line(), SolverConfig::default()).unwrap();
        for seed in 0..50 {
            let a = perturb_operator(&op, 0.1, seed).unwrap();
            let c = a.params().get(Coeff::C);
            assert!((0.9..=1.1).contains(&c), "{c}");
            assert_eq!(a, perturb_operator(&op, 0.1, seed).unwrap());
        }
        let d = FlowOperator::new(PhysicsParams::diffusion(0.01).unwrap(), 0.1, line(), SolverConfig::default()).unwrap();
        for seed in 0..50 {
            assert!(perturb_operator(&d, 3.0, seed).unwrap().params().get(Coeff::D) >= 0.0);
        }
    }

    #[test]
    fn one_step_error_is_linear_in_perturbation() {
        let g = line();
        let u = bump(g);
        let op = FlowOperator::new(PhysicsParams::advection(1.0).unwrap(), 0.5, g, SolverConfig::default()).unwrap();
        let exact = op.step(&u).unwrap();
        let eps = [1e-3, 1e-2, 1e-1];
        let errs: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let p = perturb_operator(&op, e, 3).unwrap().step(&u).unwrap();
                p.lin_comb(1.0, &exact, -1.0).unwrap().l2_norm() / exact.l2_norm()
            })
            .collect();
        // least-squares slope in log-log space
        let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}, errors {errs:?}");
    }
}
