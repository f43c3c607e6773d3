//! Flows that are exact in Fourier space.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, wavenumbers, Field, Grid};

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("flow time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

pub(crate) fn check_field(u: &Field, dims: usize, channels: usize, what: &str) -> Result<()> {
    if u.grid().dims() != dims || u.channels() != channels {
        return Err(Error::ShapeMismatch(format!(
            "{what} needs a {dims}D field with {channels} channel(s), got {}D x {}",
            u.grid().dims(),
            u.channels()
        )));
    }
    Ok(())
}

/// Growth rate `-D k^2 - i c k + i gamma k^3` of the linear 1D operator
/// `u_t = -c u_x + D u_xx - gamma u_xxx`, per half-spectrum mode.
pub(crate) fn linear_1d_rates(grid: &Grid, c: f64, d: f64, gamma: f64) -> Vec<Complex64> {
    let k = wavenumbers(grid);
    (0..k.len())
        .map(|i| {
            let k2 = k.k_squared(i);
            let (ko, _) = k.odd_mode(i);
            Complex64::new(-d * k2, -c * ko + gamma * ko * ko * ko)
        })
        .collect()
}

pub(crate) fn exp_table(rates: &[Complex64], t: f64) -> Vec<Complex64> {
    rates.iter().map(|r| (r * t).exp()).collect()
}

/// Exact solution of `u_t + c u_x = D u_xx` advanced by time `t`.
///
/// ```
/// # use opsplit::{Field, Grid};
/// # use opsplit::physics::advdiff_exact_flow;
/// let g = Grid::line(64, 16.0).unwrap();
/// let u = Field::from_fn_1d(g, |x| (2.0 * std::f64::consts::PI * x / 16.0).sin()).unwrap();
/// // one full transit across the periodic domain
/// let v = advdiff_exact_flow(&u, 1.0, 0.0, 16.0).unwrap();
/// assert!(v.values().iter().zip(u.values()).all(|(a, b)| (a - b).abs() < 1e-12));
/// ```
pub fn advdiff_exact_flow(u: &Field, c: f64, d: f64, t: f64) -> Result<Field> {
    linear_1d_flow(u, c, d, 0.0, t)
}

/// Exact flow of `u_t = -c u_x + D u_xx - gamma u_xxx`.
pub fn linear_1d_flow(u: &Field, c: f64, d: f64, gamma: f64, t: f64) -> Result<Field> {
    check_field(u, 1, 1, "1D linear flow")?;
    check_time(t)?;
    if !(c.is_finite() && gamma.is_finite() && d.is_finite()) {
        return Err(Error::invalid("non-finite coefficient"));
    }
    if d < 0.0 {
        return Err(Error::invalid(format!("diffusion must be nonnegative, got {d}")));
    }
    if t == 0.0 || (c == 0.0 && d == 0.0 && gamma == 0.0) {
        return Ok(u.clone());
    }
    let mut s = forward_transform(u)?;
    s.apply_table(&exp_table(&linear_1d_rates(u.grid(), c, d, gamma), t));
    inverse_transform(&s)
}

/// Exact heat flow `w_t = nu * laplacian(w)` for every channel.
pub fn diffusion2d_flow(w: &Field, nu: f64, t: f64) -> Result<Field> {
    if w.grid().dims() != 2 {
        return Err(Error::ShapeMismatch("diffusion2d_flow needs a 2D field".into()));
    }
    check_time(t)?;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!("viscosity must be nonnegative, got {nu}")));
    }
    if nu == 0.0 || t == 0.0 {
        return Ok(w.clone());
    }
    let k = wavenumbers(w.grid());
    let mut s = forward_transform(w)?;
    s.apply(|i| Complex64::new((-nu * k.k_squared(i) * t).exp(), 0.0));
    inverse_transform(&s)
}
