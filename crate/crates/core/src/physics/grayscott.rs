//! Two-species Gray-Scott reaction-diffusion.
//!
//! ```text
//! A_t = D_A lap(A) - delta A B^2 + F (1 - A)
//! B_t = D_B lap(B) + delta A B^2 - (F + k) B
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linear::{check_field, check_time};
use super::stepper::IntegratingFactor;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, wavenumbers, Field, Spectrum};

/// Diffusivities used by the diffusion-kill operators.
pub const GS_DIFFUSION_A: f64 = 2e-5;
pub const GS_DIFFUSION_B: f64 = 1e-5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrayScott {
    pub d_a: f64,
    pub d_b: f64,
    pub delta: f64,
    pub feed: f64,
    pub kill: f64,
}

impl GrayScott {
    pub fn validate(&self) -> Result<()> {
        let all = [self.d_a, self.d_b, self.delta, self.feed, self.kill];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("Gray-Scott coefficients must be finite"));
        }
        if self.d_a < 0.0 || self.d_b < 0.0 {
            return Err(Error::invalid("Gray-Scott diffusivities must be nonnegative"));
        }
        Ok(())
    }

    fn reactive(&self) -> bool {
        self.delta != 0.0 || self.feed != 0.0 || self.kill != 0.0
    }

    /// Upper bound on the reaction Jacobian's magnitude over the field; at
    /// least `max(delta B^2, F + k)`.
    fn reaction_rate(&self, u: &Field) -> f64 {
        let (a, b) = (u.channel(0), u.channel(1));
        let cubic = a
            .iter()
            .zip(b)
            .map(|(a, b)| b * b + 2.0 * (a * b).abs())
            .fold(0.0, f64::max);
        self.delta.abs() * cubic + (self.feed + self.kill).abs()
    }
}

/// Advance `(A, B)` by `dt`: diffusion exact in Fourier space, reaction terms
/// by integrating-factor RK4 in physical space.
pub fn grayscott_flow(u: &Field, p: &GrayScott, dt: f64, cfg: &SolverConfig) -> Result<Field> {
    check_field(u, 2, 2, "Gray-Scott")?;
    check_time(dt)?;
    p.validate()?;
    let grid = *u.grid();
    let k = wavenumbers(&grid);
    let modes = k.len();
    let mut rates = Vec::with_capacity(2 * modes);
    // with delta = F = 0 the kill term is linear and joins the exact part
    let linear_kill = if p.delta == 0.0 && p.feed == 0.0 { p.kill } else { 0.0 };
    for (d, sink) in [(p.d_a, 0.0), (p.d_b, linear_kill)] {
        rates.extend((0..modes).map(|i| Complex64::new(-d * k.k_squared(i) - sink, 0.0)));
    }
    if dt == 0.0 || (!p.reactive() && p.d_a == 0.0 && p.d_b == 0.0) {
        return Ok(u.clone());
    }
    let mut v = forward_transform(u)?;
    if linear_kill != 0.0 || !p.reactive() {
        v.apply_table(&rates.iter().map(|r| (r * dt).exp()).collect::<Vec<_>>());
        return inverse_transform(&v);
    }

    let n = cfg.substeps(dt * p.reaction_rate(u) / cfg.reaction_limit);
    let h = dt / n as f64;
    let len = grid.len();
    let nonlinear = |s: &Spectrum| -> Result<Spectrum> {
        let f = inverse_transform(s)?;
        let (a, b) = (f.channel(0), f.channel(1));
        let mut out = vec![0.0; 2 * len];
        for i in 0..len {
            let abb = p.delta * a[i] * b[i] * b[i];
            out[i] = -abb + p.feed * (1.0 - a[i]);
            out[len + i] = abb - (p.feed + p.kill) * b[i];
        }
        forward_transform(&Field::from_parts_unchecked(grid, 2, out))
            .map_err(|_| Error::stability("Gray-Scott reaction produced non-finite values"))
    };
    let stepper = IntegratingFactor::new(&rates, h);
    for _ in 0..n {
        v = stepper.step(&v, &nonlinear)?;
    }
    let out = inverse_transform(&v)?;
    if !out.is_finite() {
        return Err(Error::stability("Gray-Scott flow blew up"));
    }
    Ok(out)
}
