//! Incompressible 2D flow in vorticity-streamfunction form on a periodic box:
//! `w_t + u . grad(w) = nu lap(w)`, `u = (-psi_y, psi_x)`, `-lap(psi) = w`.
//!
//! Time stepping is the implicit midpoint rule solved by fixed-point
//! iteration in spectral space. The viscous part of the midpoint equation is
//! linear and diagonal, so each iterate solves it exactly; only the
//! advection term is iterated.

use num_complex::Complex64;

use super::linear::{check_field, check_time};
use super::SolverConfig;
use crate::datagen::Trajectory;
use crate::error::{Error, Result};
use crate::field::{dealiased_product, forward_transform, inverse_transform, wavenumbers, Field, Spectrum, Wavenumbers};

struct Vorticity {
    k: Wavenumbers,
    inv_lap: Vec<f64>,
}

impl Vorticity {
    fn new(w: &Spectrum) -> Self {
        let k = wavenumbers(w.grid());
        let inv_lap = (0..k.len())
            .map(|i| {
                let k2 = k.k_squared(i);
                if k2 == 0.0 {
                    0.0
                } else {
                    1.0 / k2
                }
            })
            .collect();
        Vorticity { k, inv_lap }
    }

    /// Velocity spectra `(u, v)` with `u = -psi_y`, `v = psi_x`.
    fn velocity(&self, w: &Spectrum) -> (Spectrum, Spectrum) {
        let mut u = w.clone();
        let mut v = w.clone();
        for (i, (a, b)) in u.coeffs_mut().iter_mut().zip(v.coeffs_mut()).enumerate() {
            let psi = *a * self.inv_lap[i];
            let (kx, ky) = self.k.odd_mode(i);
            *a = -Complex64::new(0.0, ky) * psi;
            *b = Complex64::new(0.0, kx) * psi;
        }
        (u, v)
    }

    /// `-(u . grad w)`, dealiased, with Nyquist modes of the input ignored.
    fn advection(&self, w: &Spectrum) -> Result<Spectrum> {
        let mut w = w.clone();
        w.zero_nyquist();
        let (u, v) = self.velocity(&w);
        let mut wx = w.clone();
        let mut wy = w;
        for (i, (a, b)) in wx.coeffs_mut().iter_mut().zip(wy.coeffs_mut()).enumerate() {
            let (kx, ky) = self.k.odd_mode(i);
            *a *= Complex64::new(0.0, kx);
            *b *= Complex64::new(0.0, ky);
        }
        let mut n = dealiased_product(&[&u, &v, &wx, &wy], |f| f[0] * f[2] + f[1] * f[3])?;
        n.scale(-1.0);
        Ok(n)
    }

    fn max_speed(&self, w: &Spectrum) -> Result<f64> {
        let (u, v) = self.velocity(w);
        Ok(inverse_transform(&u)?.max_abs() + inverse_transform(&v)?.max_abs())
    }

    /// One implicit-midpoint step of size `h`.
    fn midpoint_step(&self, w0: &Spectrum, nu: f64, h: f64, cfg: &SolverConfig) -> Result<Spectrum> {
        let a: Vec<f64> = (0..self.k.len()).map(|i| 0.5 * h * nu * self.k.k_squared(i)).collect();
        let modes = a.len();
        let mut guess = w0.clone();
        for _ in 0..cfg.fixed_point_max_iter {
            let mut mid = w0.clone();
            mid.axpy(Complex64::new(1.0, 0.0), &guess);
            mid.scale(0.5);
            let n = self.advection(&mid)?;
            let mut next = w0.clone();
            for (i, (x, y)) in next.coeffs_mut().iter_mut().zip(n.coeffs()).enumerate() {
                let ai = a[i % modes];
                *x = ((1.0 - ai) * *x + h * y) / (1.0 + ai);
            }
            let mut diff = next.clone();
            diff.axpy(Complex64::new(-1.0, 0.0), &guess);
            let (dn, nn) = (diff.l2_norm(), next.l2_norm());
            if !nn.is_finite() {
                return Err(Error::stability("implicit midpoint iterate is non-finite"));
            }
            guess = next;
            if dn <= cfg.fixed_point_tol * nn || dn == 0.0 {
                return Ok(guess);
            }
        }
        Err(Error::stability(format!(
            "implicit midpoint fixed point did not reach {:e} in {} iterations",
            cfg.fixed_point_tol, cfg.fixed_point_max_iter
        )))
    }

    /// Advance by `dt` using as many equal substeps as the CFL and viscous limits require.
    fn advance(&self, w: &Spectrum, nu: f64, dt: f64, cfg: &SolverConfig) -> Result<Spectrum> {
        let dx = w.grid().spacing();
        let speed = self.max_speed(w)?;
        let demand = (dt * speed / (cfg.euler_cfl * dx)).max(dt * nu * self.k.max_k_squared() / cfg.diffusion_limit);
        let n = cfg.substeps(demand);
        let h = dt / n as f64;
        let mut w = w.clone();
        for _ in 0..n {
            w = self.midpoint_step(&w, nu, h, cfg)?;
        }
        Ok(w)
    }
}

/// One implicit-midpoint advance of the inviscid vorticity equation by `dt`.
pub fn euler_flow(w: &Field, dt: f64, cfg: &SolverConfig) -> Result<Field> {
    vorticity_flow(w, 0.0, dt, cfg)
}

/// Implicit-midpoint advance of the viscous vorticity equation by `dt`.
pub fn vorticity_flow(w: &Field, nu: f64, dt: f64, cfg: &SolverConfig) -> Result<Field> {
    check_field(w, 2, 1, "vorticity flow")?;
    check_time(dt)?;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!("viscosity must be nonnegative, got {nu}")));
    }
    if dt == 0.0 {
        return Ok(w.clone());
    }
    let s = forward_transform(w)?;
    let solver = Vorticity::new(&s);
    inverse_transform(&solver.advance(&s, nu, dt, cfg)?)
}

/// Coupled Navier-Stokes reference trajectory with `n_snap` frames spanning
/// `[0, horizon]`.
///
/// When `internal_points` exceeds the resolution of `w0`, the solve runs on
/// the finer grid and every frame is brought back by spectral truncation.
pub fn navier_stokes_reference(
    w0: &Field,
    nu: f64,
    horizon: f64,
    n_snap: usize,
    cfg: &SolverConfig,
    internal_points: Option<usize>,
) -> Result<Trajectory> {
    check_field(w0, 2, 1, "Navier-Stokes reference")?;
    if n_snap < 2 {
        return Err(Error::invalid("need at least two snapshots"));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid("horizon must be positive"));
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!("viscosity must be nonnegative, got {nu}")));
    }
    let out_points = w0.grid().points_per_axis();
    let inner = internal_points.unwrap_or(out_points).max(out_points);
    let mut s = forward_transform(w0)?.resample(inner)?;
    if inner == out_points {
        s = forward_transform(w0)?;
    }
    let solver = Vorticity::new(&s);
    let dt = horizon / (n_snap - 1) as f64;
    let mut frames = Vec::with_capacity(n_snap);
    frames.push(w0.clone());
    for _ in 1..n_snap {
        s = solver.advance(&s, nu, dt, cfg)?;
        let frame = if inner == out_points {
            inverse_transform(&s)?
        } else {
            inverse_transform(&s.resample(out_points)?)?
        };
        frames.push(frame);
    }
    let mut traj = Trajectory::new(frames, dt)?;
    traj.solver.insert("scheme".into(), "implicit_midpoint".into());
    traj.solver.insert("internal_points".into(), inner.into());
    Ok(traj)
}

/// Kinetic energy `1/2 * integral |u|^2`.
pub fn kinetic_energy(w: &Field) -> Result<f64> {
    check_field(w, 2, 1, "kinetic energy")?;
    let s = forward_transform(w)?;
    let solver = Vorticity::new(&s);
    let (u, v) = solver.velocity(&s);
    let area = w.grid().spacing().powi(2);
    Ok(0.5 * area * (u.parseval_sum(0) + v.parseval_sum(0)))
}

/// Enstrophy `1/2 * integral w^2`.
pub fn enstrophy(w: &Field) -> f64 {
    let area = w.grid().spacing().powi(2);
    0.5 * area * w.values().iter().map(|v| v * v).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::physics::diffusion2d_flow;
    use std::f64::consts::PI;

    fn smooth(g: Grid) -> Field {
        Field::from_fn_2d(g, |x, y| {
            (x + 0.3).sin() * (2.0 * y).sin() + 0.6 * (2.0 * x + y + 1.0).cos() + 0.4 * (3.0 * y - x).sin()
        })
        .unwrap()
    }

    fn nrmse(a: &Field, b: &Field) -> f64 {
        a.lin_comb(1.0, b, -1.0).unwrap().l2_norm() / b.l2_norm()
    }

    #[test]
    fn constant_vorticity_is_steady() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let w = Field::from_fn_2d(g, |_, _| 0.7).unwrap();
        let v = euler_flow(&w, 0.5, &SolverConfig::default()).unwrap();
        assert!(nrmse(&v, &w) < 1e-14);
    }

    #[test]
    fn laplacian_eigenmode_is_steady() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let w = Field::from_fn_2d(g, |x, y| x.sin() * y.sin()).unwrap();
        // psi = w / 2, so u . grad(w) = J(psi, w) = 0 analytically
        let s = forward_transform(&w).unwrap();
        let n = Vorticity::new(&s).advection(&s).unwrap();
        assert!(n.l2_norm() < 1e-10 * s.l2_norm());
        let mut v = w.clone();
        for _ in 0..4 {
            v = euler_flow(&v, 0.25, &SolverConfig::default()).unwrap();
        }
        let err = v.lin_comb(1.0, &w, -1.0).unwrap().max_abs();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn euler_preserves_quadratic_invariants() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let w = smooth(g);
        let v = euler_flow(&w, 0.2, &SolverConfig::default()).unwrap();
        assert!(nrmse(&v, &w) > 1e-3, "flow should move the field");
        let (e0, e1) = (kinetic_energy(&w).unwrap(), kinetic_energy(&v).unwrap());
        let (z0, z1) = (enstrophy(&w), enstrophy(&v));
        assert!(((e1 - e0) / e0).abs() < 1e-6, "energy drift {}", (e1 - e0) / e0);
        assert!(((z1 - z0) / z0).abs() < 1e-6, "enstrophy drift {}", (z1 - z0) / z0);
    }

    #[test]
    fn midpoint_is_second_order() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let w = smooth(g);
        let run = |n| euler_flow(&w, 0.4, &SolverConfig { min_substeps: n, euler_cfl: 1e6, ..Default::default() }).unwrap();
        let reference = run(256);
        let ratio = nrmse(&run(8), &reference) / nrmse(&run(16), &reference);
        assert!((ratio - 4.0).abs() < 0.2 * 4.0, "ratio {ratio}");
    }

    #[test]
    fn strong_viscosity_damps_to_mean() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let w = smooth(g).scaled(0.1);
        let traj = navier_stokes_reference(&w, 1.0, 4.0, 5, &SolverConfig::default(), None).unwrap();
        let last = traj.frames().last().unwrap();
        assert!(enstrophy(last) < 1e-3 * enstrophy(&w));
        // Poincare: zero-mean enstrophy decays at least as fast as the heat
        // flow of a |k|^2 = 1 mode
        let mode = Field::from_fn_2d(g, |x, _| x.sin()).unwrap();
        let heat = diffusion2d_flow(&mode, 1.0, 4.0).unwrap();
        let bound = enstrophy(&w) * enstrophy(&heat) / enstrophy(&mode);
        assert!(enstrophy(last) <= bound * (1.0 + 1e-6));
    }

    #[test]
    fn inviscid_reference_matches_repeated_euler() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let w = smooth(g);
        let cfg = SolverConfig::default();
        let traj = navier_stokes_reference(&w, 0.0, 1.0, 11, &cfg, None).unwrap();
        let mut v = w.clone();
        for frame in &traj.frames()[1..] {
            v = euler_flow(&v, traj.dt(), &cfg).unwrap();
            assert!(nrmse(&v, frame) < 1e-8);
        }
    }

    #[test]
    fn viscous_energy_never_increases() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let w = smooth(g);
        let traj = navier_stokes_reference(&w, 1e-2, 1.0, 11, &SolverConfig::default(), None).unwrap();
        let energies: Vec<f64> = traj.frames().iter().map(|f| kinetic_energy(f).unwrap()).collect();
        for pair in energies.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-8), "{pair:?}");
        }
    }

    #[test]
    fn internal_resolution_is_truncated_back() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let w = smooth(g);
        let traj = navier_stokes_reference(&w, 1e-2, 0.2, 3, &SolverConfig::default(), Some(32)).unwrap();
        assert_eq!(traj.grid().points_per_axis(), 16);
        let coarse = navier_stokes_reference(&w, 1e-2, 0.2, 3, &SolverConfig::default(), None).unwrap();
        assert!(nrmse(&traj.frames()[2], &coarse.frames()[2]) < 1e-2);
    }

    #[test]
    fn non_convergent_fixed_point_is_reported() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let w = smooth(g);
        let cfg = SolverConfig { fixed_point_max_iter: 1, ..Default::default() };
        assert!(euler_flow(&w, 0.2, &cfg).unwrap_err().is_numerical());
    }
}
