//! `u_t + (alpha u^2 - beta u_x + gamma u_xx)_x = 0` on a periodic line.

use num_complex::Complex64;

use super::linear::{check_field, check_time, linear_1d_flow, linear_1d_rates};
use super::stepper::IntegratingFactor;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::field::{dealiased_product, forward_transform, inverse_transform, wavenumbers, Field, Spectrum};

/// Advance the combined nonlinear-advection / diffusion / dispersion equation by `dt`.
///
/// Diffusion and dispersion are integrated exactly; the dealiased
/// `-alpha (u^2)_x` term uses integrating-factor RK4 with
/// `max|2 alpha u| h / dx <= advective_cfl`.
pub fn combined_eq_flow(u: &Field, alpha: f64, beta: f64, gamma: f64, dt: f64, cfg: &SolverConfig) -> Result<Field> {
    check_field(u, 1, 1, "combined equation")?;
    check_time(dt)?;
    if !alpha.is_finite() {
        return Err(Error::invalid("alpha must be finite"));
    }
    if alpha == 0.0 || dt == 0.0 {
        return linear_1d_flow(u, 0.0, beta, gamma, dt);
    }
    let grid = *u.grid();
    let speed = 2.0 * alpha.abs() * u.max_abs();
    let n = cfg.substeps(dt * speed / (cfg.advective_cfl * grid.spacing()));
    let h = dt / n as f64;

    let k = wavenumbers(&grid);
    let ik: Vec<Complex64> = (0..k.len()).map(|i| Complex64::new(0.0, -alpha * k.odd_mode(i).0)).collect();
    let nonlinear = |v: &Spectrum| -> Result<Spectrum> {
        let mut sq = dealiased_product(&[v], |a| a[0] * a[0])?;
        sq.apply_table(&ik);
        Ok(sq)
    };
    let stepper = IntegratingFactor::new(&linear_1d_rates(&grid, 0.0, beta, gamma), h);

    let mut v = forward_transform(u)?;
    for _ in 0..n {
        v = stepper.step(&v, &nonlinear)?;
    }
    let out = inverse_transform(&v)?;
    if !out.is_finite() {
        return Err(Error::stability("combined equation blew up"));
    }
    Ok(out)
}
