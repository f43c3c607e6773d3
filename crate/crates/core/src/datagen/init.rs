//! Random initial conditions.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)` on stream 0,
//! in the order the parameters are listed in each function's docs. Gray-Scott
//! warm-up durations use stream 1 of the same seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::physics::{grayscott_flow, GrayScott, SolverConfig, GS_DIFFUSION_A, GS_DIFFUSION_B};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn require_dims(g: &Grid, dims: usize, what: &str) -> Result<()> {
    if g.dims() != dims {
        return Err(Error::ShapeMismatch(format!("{what} needs a {dims}D grid")));
    }
    Ok(())
}

/// `sum_{k=1}^{degree} a_k k^-power sin(k theta + phi_k)` with `theta = 2 pi x / L`,
/// normalized to zero mean and unit variance.
///
/// Draws `(a_k, phi_k)` for `k = 1..=degree`, `a_k` standard normal and
/// `phi_k` uniform on `[0, 2 pi)`.
pub fn init_fractaloid(g: Grid, degree: usize, power: f64, seed: u64) -> Result<Field> {
    require_dims(&g, 1, "fractaloid")?;
    if degree == 0 {
        return Err(Error::invalid("fractaloid degree must be >= 1"));
    }
    if degree > g.points_per_axis() / 2 {
        return Err(Error::invalid(format!("degree {degree} exceeds the Nyquist mode {}", g.points_per_axis() / 2)));
    }
    if !power.is_finite() {
        return Err(Error::invalid("fractaloid power must be finite"));
    }
    let mut r = rng(seed);
    let terms: Vec<(f64, f64, f64)> = (1..=degree)
        .map(|k| {
            let a: f64 = StandardNormal.sample(&mut r);
            let phi = r.random_range(0.0..2.0 * PI);
            (k as f64, a * (k as f64).powf(-power), phi)
        })
        .collect();
    let l = g.length();
    let mut u: Vec<f64> = (0..g.points_per_axis())
        .map(|i| {
            let theta = 2.0 * PI * g.coordinate(i) / l;
            terms.iter().map(|(k, a, phi)| a * (k * theta + phi).sin()).sum()
        })
        .collect();
    normalize(&mut u)?;
    Field::new(g, 1, u)
}

fn normalize(u: &mut [f64]) -> Result<()> {
    let n = u.len() as f64;
    let mean = u.iter().sum::<f64>() / n;
    u.iter_mut().for_each(|v| *v -= mean);
    let mean = u.iter().sum::<f64>() / n;
    u.iter_mut().for_each(|v| *v -= mean);
    let std = (u.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    if std == 0.0 || !std.is_finite() {
        return Err(Error::invalid("cannot normalize a constant field"));
    }
    u.iter_mut().for_each(|v| *v /= std);
    Ok(())
}

/// `sum_{j=1}^{J} A_j sin(2 pi l_j x / L + phi_j)`.
///
/// Draws `(A_j, l_j, phi_j)` per term: `A_j` uniform on `[-0.5, 0.5]`,
/// `l_j` uniform on `{1, .., 5}`, `phi_j` uniform on `[0, 2 pi)`.
pub fn init_fourier_mix(g: Grid, modes: usize, seed: u64) -> Result<Field> {
    require_dims(&g, 1, "Fourier mix")?;
    if modes == 0 {
        return Err(Error::invalid("Fourier mix needs at least one mode"));
    }
    let mut r = rng(seed);
    let terms: Vec<(f64, f64, f64)> = (0..modes)
        .map(|_| {
            let a = r.random_range(-0.5..=0.5);
            let ell = r.random_range(1..=5u32) as f64;
            let phi = r.random_range(0.0..2.0 * PI);
            (a, ell, phi)
        })
        .collect();
    let l = g.length();
    Field::from_fn_1d(g, |x| terms.iter().map(|(a, ell, phi)| a * (2.0 * PI * ell * x / l + phi).sin()).sum())
}

/// Two-species field `(A, B) = (1 - b, b)` where `b` is a sum of periodic
/// Gaussian bumps grouped around `clusters` centers, clipped to `[0, 1]`.
///
/// Per cluster draws a center uniform over the domain and a bump count in
/// `3..=6`; per bump an offset `N(0, (0.05 L)^2)` per axis, a width uniform
/// on `[0.02 L, 0.05 L]` and a height uniform on `[0.5, 1]`.
pub fn init_clustered_gaussians(g: Grid, clusters: usize, seed: u64) -> Result<Field> {
    require_dims(&g, 2, "clustered Gaussians")?;
    let l = g.length();
    let mut r = rng(seed);
    let offset = Normal::new(0.0, 0.05 * l).expect("positive spread");
    let mut bumps = Vec::new();
    for _ in 0..clusters {
        let (cx, cy) = (r.random_range(0.0..l), r.random_range(0.0..l));
        let count = r.random_range(3..=6usize);
        for _ in 0..count {
            let x = (cx + offset.sample(&mut r)).rem_euclid(l);
            let y = (cy + offset.sample(&mut r)).rem_euclid(l);
            let width = r.random_range(0.02 * l..=0.05 * l);
            let height = r.random_range(0.5..=1.0);
            bumps.push((x, y, width, height));
        }
    }
    let wrap = |d: f64| {
        let d = d.rem_euclid(l);
        d.min(l - d)
    };
    let b = Field::from_fn_2d(g, |x, y| {
        let s: f64 = bumps
            .iter()
            .map(|(bx, by, w, h)| {
                let (dx, dy) = (wrap(x - bx), wrap(y - by));
                h * (-(dx * dx + dy * dy) / (2.0 * w * w)).exp()
            })
            .sum();
        s.clamp(0.0, 1.0)
    })?;
    let a = Field::new(g, 1, b.values().iter().map(|v| 1.0 - v).collect())?;
    Field::stack(&[a, b])
}

/// Evolve a Gray-Scott state under the full dynamics with `D_A = 2e-5`,
/// `D_B = 1e-5`, `delta = 1` and the given feed and kill rates.
pub fn warm_start_grayscott(u: &Field, feed: f64, kill: f64, duration: f64, cfg: &SolverConfig) -> Result<Field> {
    let p = GrayScott { d_a: GS_DIFFUSION_A, d_b: GS_DIFFUSION_B, delta: 1.0, feed, kill };
    grayscott_flow(u, &p, duration, cfg)
}

/// Warm-up duration uniform on `[0, max_duration]`, drawn from stream 1 of `seed`.
pub fn warm_start_duration(seed: u64, max_duration: f64) -> f64 {
    let mut r = rng(seed);
    r.set_stream(1);
    r.random::<f64>() * max_duration
}

/// Gaussian amplitudes `a_nm ~ N(0, 10 / (n + m))` for `n, m = 1..=N_m`, row-major in `n`.
fn lowfreq_amplitudes(modes: usize, r: &mut ChaCha8Rng) -> Vec<(usize, usize, f64, f64, f64)> {
    let mut out = Vec::with_capacity(modes * modes);
    for n in 1..=modes {
        for m in 1..=modes {
            let sd = (10.0 / (n + m) as f64).sqrt();
            let z: f64 = StandardNormal.sample(r);
            let phi = r.random_range(0.0..2.0 * PI);
            let psi = r.random_range(0.0..2.0 * PI);
            out.push((n, m, sd * z, phi, psi));
        }
    }
    out
}

/// `sum_{n,m=1}^{N_m} a_nm sin(2 pi n x / L + phi_nm) sin(2 pi m y / L + psi_nm)`.
///
/// Draws `(a_nm, phi_nm, psi_nm)` for `n` then `m` ascending, with
/// `a_nm ~ N(0, 10 / (n + m))` and uniform phases on `[0, 2 pi)`.
pub fn init_lowfreq_modes_2d(g: Grid, modes: usize, seed: u64) -> Result<Field> {
    require_dims(&g, 2, "low-frequency modes")?;
    if modes == 0 || modes >= g.points_per_axis() / 2 {
        return Err(Error::invalid(format!("mode count {modes} must lie in 1..{}", g.points_per_axis() / 2)));
    }
    let terms = lowfreq_amplitudes(modes, &mut rng(seed));
    let w = 2.0 * PI / g.length();
    Field::from_fn_2d(g, |x, y| {
        terms
            .iter()
            .map(|(n, m, a, phi, psi)| a * (w * *n as f64 * x + phi).sin() * (w * *m as f64 * y + psi).sin())
            .sum()
    })
}

/// Which generator to use and its shape parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitKind {
    /// `degree = None` uses the highest mode below Nyquist.
    Fractaloid { degree: Option<usize>, power: f64 },
    FourierMix { modes: usize },
    /// Warm-up length is uniform on `[0, warm_up]`; zero disables it.
    ClusteredGaussians { clusters: usize, warm_up: f64 },
    LowFreqModes2d { modes: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    #[serde(flatten)]
    pub kind: InitKind,
    pub seed: u64,
}

impl InitSpec {
    pub fn new(kind: InitKind, seed: u64) -> Self {
        InitSpec { kind, seed }
    }

    /// Sample the initial field. Gray-Scott warm-up uses `feed` and `kill`.
    pub fn sample(&self, g: Grid, feed: f64, kill: f64, cfg: &SolverConfig) -> Result<Field> {
        match &self.kind {
            InitKind::Fractaloid { degree, power } => {
                let degree = degree.unwrap_or(g.points_per_axis() / 2 - 1);
                init_fractaloid(g, degree, *power, self.seed)
            }
            InitKind::FourierMix { modes } => init_fourier_mix(g, *modes, self.seed),
            InitKind::ClusteredGaussians { clusters, warm_up } => {
                let u = init_clustered_gaussians(g, *clusters, self.seed)?;
                let t = warm_start_duration(self.seed, *warm_up);
                if t > 0.0 {
                    warm_start_grayscott(&u, feed, kill, t, cfg)
                } else {
                    Ok(u)
                }
            }
            InitKind::LowFreqModes2d { modes } => init_lowfreq_modes_2d(g, *modes, self.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::forward_transform;

    fn line() -> Grid {
        Grid::line(256, 16.0).unwrap()
    }

    #[test]
    fn fractaloid_is_normalized() {
        for seed in 0..10 {
            let u = init_fractaloid(line(), 127, 3.0, seed).unwrap();
            assert!(u.mean(0).abs() < 1e-12);
            assert!((u.variance(0) - 1.0).abs() < 1e-12);
        }
        assert!(init_fractaloid(line(), 0, 3.0, 0).is_err());
        assert!(init_fractaloid(line(), 129, 3.0, 0).is_err());
    }

    #[test]
    fn fractaloid_power_controls_high_modes() {
        let energy_above = |power: f64| -> f64 {
            (0..20)
                .map(|seed| {
                    let s = forward_transform(&init_fractaloid(line(), 127, power, seed).unwrap()).unwrap();
                    s.coeffs()[33..].iter().map(|z| z.norm_sqr()).sum::<f64>()
                })
                .sum()
        };
        assert!(energy_above(1.0) > 10.0 * energy_above(4.0));
    }

    #[test]
    fn fourier_mix_bounds() {
        for seed in 0..50 {
            let u = init_fourier_mix(line(), 5, seed).unwrap();
            assert!(u.max_abs() <= 2.5);
            let s = forward_transform(&u).unwrap();
            let active = s.coeffs().iter().filter(|z| z.norm() > 1e-9).count();
            assert!((1..=5).contains(&active));
            assert!(s.coeffs()[6..].iter().all(|z| z.norm() < 1e-9));
        }
        let one = init_fourier_mix(line(), 1, 3).unwrap();
        assert!(one.max_abs() <= 0.5 + 1e-12);
    }

    #[test]
    fn clustered_gaussians_range() {
        let g = Grid::square(32, 2.0).unwrap();
        let quiet = init_clustered_gaussians(g, 0, 1).unwrap();
        assert!(quiet.channel(0).iter().all(|&a| a == 1.0));
        assert!(quiet.channel(1).iter().all(|&b| b == 0.0));
        for seed in 0..20 {
            let u = init_clustered_gaussians(g, 3, seed).unwrap();
            assert!(u.values().iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(u.channel(1).iter().any(|&b| b > 0.1));
        }
    }

    #[test]
    fn warm_start_is_seeded() {
        let g = Grid::square(16, 2.0).unwrap();
        let spec = InitSpec::new(InitKind::ClusteredGaussians { clusters: 2, warm_up: 5.0 }, 4);
        let cfg = SolverConfig::default();
        let a = spec.sample(g, 0.04, 0.06, &cfg).unwrap();
        assert_eq!(a, spec.sample(g, 0.04, 0.06, &cfg).unwrap());
        assert_ne!(a, init_clustered_gaussians(g, 2, 4).unwrap());
        let t = warm_start_duration(4, 5.0);
        assert!((0.0..=5.0).contains(&t));
    }

    #[test]
    fn lowfreq_variance_ratio() {
        let n = 200;
        let (mut v11, mut v13) = (0.0, 0.0);
        for seed in 0..n {
            let terms = lowfreq_amplitudes(5, &mut rng(seed));
            v11 += terms[0].2.powi(2);
            v13 += terms[2].2.powi(2);
        }
        let ratio = v11 / v13;
        assert!((ratio - 2.0).abs() < 0.2 * 2.0, "ratio {ratio}");
    }

    #[test]
    fn lowfreq_support() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let w = init_lowfreq_modes_2d(g, 5, 11).unwrap();
        let s = forward_transform(&w).unwrap();
        let peak = s.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let k = crate::field::wavenumbers(&g);
        for (i, z) in s.coeffs().iter().enumerate() {
            let (kx, ky) = k.mode(i);
            if kx.abs() > 5.0 || ky.abs() > 5.0 {
                assert!(z.norm() < 1e-12 * peak);
            }
        }
        let single = init_lowfreq_modes_2d(g, 1, 2).unwrap();
        let s = forward_transform(&single).unwrap();
        let active = s.coeffs().iter().filter(|z| z.norm() > 1e-9 * peak).count();
        assert!(active <= 2, "{active}");
    }
}
