//! Periodic grids, sampled fields and their Fourier spectra.
//!
//! # Layout
//!
//! Field values are stored channel-major, then row-major over space. In 2D a
//! channel is `n` rows of `n` samples with `x` as the fast axis, so sample
//! `(ix, iy)` lives at `iy * n + ix`.
//!
//! Spectra use the half-spectrum layout of a real-to-complex transform along
//! `x`. A 1D channel holds modes `0..=n/2`. A 2D channel holds `n` rows (all
//! `ky`, in FFT order `0, 1, .., n/2, -n/2+1, .., -1`) of `n/2 + 1` columns
//! (`kx = 0..=n/2`), so mode `(kx, ky)` lives at `ky_index * (n/2 + 1) + kx`.
//!
//! The forward transform is unnormalized; the inverse divides by the number
//! of grid points `n^dims`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Uniform periodic grid with the same resolution and extent on every axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid {
    dims: usize,
    points: usize,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    dims: usize,
    points: usize,
    length: f64,
}

impl TryFrom<GridRepr> for Grid {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        Grid::new(r.dims, r.points, r.length)
    }
}

impl From<Grid> for GridRepr {
    fn from(g: Grid) -> Self {
        GridRepr {
            dims: g.dims,
            points: g.points,
            length: g.length,
        }
    }
}

impl Grid {
    pub fn new(dims: usize, points: usize, length: f64) -> Result<Self> {
        if dims != 1 && dims != 2 {
            return Err(Error::invalid(format!("grid dims must be 1 or 2, got {dims}")));
        }
        if points < 2 || !points.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "points per axis must be even and >= 2, got {points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(format!("domain length must be positive, got {length}")));
        }
        Ok(Grid { dims, points, length })
    }

    pub fn line(points: usize, length: f64) -> Result<Self> {
        Grid::new(1, points, length)
    }

    pub fn square(points: usize, length: f64) -> Result<Self> {
        Grid::new(2, points, length)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.points.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of complex coefficients per channel in the half spectrum.
    pub fn spectral_len(&self) -> usize {
        let h = self.points / 2 + 1;
        if self.dims == 1 {
            h
        } else {
            self.points * h
        }
    }

    /// Coordinate of sample `i` along an axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Same extent and dimension at a different resolution.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        Grid::new(self.dims, points, self.length)
    }
}

/// Real samples of one or two channels on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    channels: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, channels: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || channels > 2 {
            return Err(Error::invalid(format!("channels must be 1 or 2, got {channels}")));
        }
        if values.len() != channels * grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for {channels} channel(s), got {}",
                channels * grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "field", index });
        }
        Ok(Field { grid, channels, values })
    }

    pub fn zeros(grid: Grid, channels: usize) -> Self {
        Field {
            grid,
            channels,
            values: vec![0.0; channels * grid.len()],
        }
    }

    /// Sample a function of position on a 1D grid.
    pub fn from_fn_1d(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        if grid.dims() != 1 {
            return Err(Error::invalid("from_fn_1d needs a 1D grid"));
        }
        let values = (0..grid.points).map(|i| f(grid.coordinate(i))).collect();
        Field::new(grid, 1, values)
    }

    /// Sample a function of `(x, y)` on a 2D grid.
    pub fn from_fn_2d(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if grid.dims() != 2 {
            return Err(Error::invalid("from_fn_2d needs a 2D grid"));
        }
        let n = grid.points;
        let mut values = Vec::with_capacity(n * n);
        for iy in 0..n {
            let y = grid.coordinate(iy);
            for ix in 0..n {
                values.push(f(grid.coordinate(ix), y));
            }
        }
        Field::new(grid, 1, values)
    }

    /// Stack single-channel fields into one multi-channel field.
    pub fn stack(parts: &[Field]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("cannot stack zero fields"))?;
        let mut values = Vec::with_capacity(parts.len() * first.grid.len());
        for p in parts {
            if p.grid != first.grid || p.channels != 1 {
                return Err(Error::ShapeMismatch("stacked fields must be single-channel on one grid".into()));
            }
            values.extend_from_slice(&p.values);
        }
        Field::new(first.grid, parts.len(), values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, channels: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), channels * grid.len());
        Field { grid, channels, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self, channel: usize) -> f64 {
        let ch = self.channel(channel);
        ch.iter().sum::<f64>() / ch.len() as f64
    }

    /// Population variance of one channel.
    pub fn variance(&self, channel: usize) -> f64 {
        let mean = self.mean(channel);
        let ch = self.channel(channel);
        ch.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / ch.len() as f64
    }

    /// `a * self + b * other`
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.check_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Field::from_parts_unchecked(self.grid, self.channels, values))
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field::from_parts_unchecked(self.grid, self.channels, self.values.iter().map(|v| a * v).collect())
    }

    pub(crate) fn check_same_shape(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid || self.channels != other.channels {
            return Err(Error::ShapeMismatch(format!(
                "fields differ: {:?}x{} vs {:?}x{}",
                self.grid, self.channels, other.grid, other.channels
            )));
        }
        Ok(())
    }

    /// Change resolution by spectral zero-padding or truncation.
    pub fn resample_spectral(&self, points: usize) -> Result<Field> {
        let s = forward_transform(self)?;
        inverse_transform(&s.resample(points)?)
    }
}

/// Half-spectrum Fourier coefficients of a [`Field`].
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    channels: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, channels: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != channels * grid.spectral_len() {
            return Err(Error::ShapeMismatch(format!(
                "spectrum needs {} coefficients, got {}",
                channels * grid.spectral_len(),
                coeffs.len()
            )));
        }
        Ok(Spectrum { grid, channels, coeffs })
    }

    pub fn zeros(grid: Grid, channels: usize) -> Self {
        Spectrum {
            grid,
            channels,
            coeffs: vec![Complex64::new(0.0, 0.0); channels * grid.spectral_len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        let len = self.grid.spectral_len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.spectral_len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Single-channel spectrum holding channel `c`.
    pub fn channel_spectrum(&self, c: usize) -> Spectrum {
        Spectrum {
            grid: self.grid,
            channels: 1,
            coeffs: self.channel(c).to_vec(),
        }
    }

    /// Index of mode `(kx, ky)` given as signed integer mode numbers.
    pub fn index_of(&self, kx: usize, ky: isize) -> usize {
        let n = self.grid.points;
        if self.grid.dims == 1 {
            kx
        } else {
            let row = ky.rem_euclid(n as isize) as usize;
            row * (n / 2 + 1) + kx
        }
    }

    /// Multiply every channel by the same mode-wise factor.
    pub fn apply(&mut self, mut factor: impl FnMut(usize) -> Complex64) {
        let len = self.grid.spectral_len();
        let factors: Vec<Complex64> = (0..len).map(&mut factor).collect();
        for ch in self.coeffs.chunks_mut(len) {
            for (c, f) in ch.iter_mut().zip(&factors) {
                *c *= f;
            }
        }
    }

    /// Multiply by a precomputed per-mode factor table (length = channels x modes or modes).
    pub(crate) fn apply_table(&mut self, table: &[Complex64]) {
        if table.len() == self.coeffs.len() {
            for (c, f) in self.coeffs.iter_mut().zip(table) {
                *c *= f;
            }
        } else {
            let len = self.grid.spectral_len();
            debug_assert_eq!(table.len(), len);
            for ch in self.coeffs.chunks_mut(len) {
                for (c, f) in ch.iter_mut().zip(table) {
                    *c *= f;
                }
            }
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: Complex64, other: &Spectrum) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sum of squared physical values of `channel`, evaluated from the coefficients.
    pub fn parseval_sum(&self, channel: usize) -> f64 {
        let n = self.grid.points;
        let h = n / 2 + 1;
        let total: f64 = self
            .channel(channel)
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let kx = i % h;
                let w = if kx == 0 || kx == n / 2 { 1.0 } else { 2.0 };
                w * c.norm_sqr()
            })
            .sum();
        total / self.grid.len() as f64
    }

    /// Zero every mode on a Nyquist row or column.
    pub fn zero_nyquist(&mut self) {
        let n = self.grid.points;
        let h = n / 2 + 1;
        let dims = self.grid.dims;
        let len = self.grid.spectral_len();
        for ch in self.coeffs.chunks_mut(len) {
            for (i, c) in ch.iter_mut().enumerate() {
                let kx = i % h;
                let row = i / h;
                if kx == n / 2 || (dims == 2 && row == n / 2) {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Re-express on a grid with `points` samples per axis, keeping every
    /// mode strictly below both Nyquist frequencies and rescaling so that
    /// physical values are preserved.
    pub fn resample(&self, points: usize) -> Result<Spectrum> {
        let target = self.grid.with_points(points)?;
        let n = self.grid.points;
        let m = points;
        let keep = n.min(m) / 2; // |k| < keep
        let (hn, hm) = (n / 2 + 1, m / 2 + 1);
        let scale = (m as f64 / n as f64).powi(self.grid.dims as i32);
        let mut out = Spectrum::zeros(target, self.channels);
        for c in 0..self.channels {
            let src = self.channel(c);
            let dst = out.channel_mut(c);
            if self.grid.dims == 1 {
                for k in 0..keep {
                    dst[k] = src[k] * scale;
                }
            } else {
                for ky in -(keep as isize - 1)..(keep as isize) {
                    let rs = ky.rem_euclid(n as isize) as usize;
                    let rd = ky.rem_euclid(m as isize) as usize;
                    for kx in 0..keep {
                        dst[rd * hm + kx] = src[rs * hn + kx] * scale;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Discrete Fourier transform of every channel (unnormalized).
pub fn forward_transform(f: &Field) -> Result<Spectrum> {
    if let Some(index) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "transform input", index });
    }
    let grid = f.grid;
    let n = grid.points;
    let h = n / 2 + 1;
    let mut coeffs = Vec::with_capacity(f.channels * grid.spectral_len());
    let fft = plan(n, false);
    for c in 0..f.channels {
        let mut buf: Vec<Complex64> = f.channel(c).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.process(&mut buf);
        if grid.dims == 1 {
            coeffs.extend_from_slice(&buf[..h]);
        } else {
            // rows are now x-spectra; keep the half and transform along y
            let mut cols = vec![Complex64::new(0.0, 0.0); h * n];
            for iy in 0..n {
                for kx in 0..h {
                    cols[kx * n + iy] = buf[iy * n + kx];
                }
            }
            fft.process(&mut cols);
            let start = coeffs.len();
            coeffs.resize(start + n * h, Complex64::new(0.0, 0.0));
            let out = &mut coeffs[start..];
            for kx in 0..h {
                for ky in 0..n {
                    out[ky * h + kx] = cols[kx * n + ky];
                }
            }
        }
    }
    Ok(Spectrum {
        grid,
        channels: f.channels,
        coeffs,
    })
}

/// Inverse of [`forward_transform`]; divides by the number of grid points.
pub fn inverse_transform(s: &Spectrum) -> Result<Field> {
    let grid = s.grid;
    if s.coeffs.len() != s.channels * grid.spectral_len() {
        return Err(Error::ShapeMismatch(format!(
            "spectrum layout has {} coefficients, grid needs {}",
            s.coeffs.len(),
            s.channels * grid.spectral_len()
        )));
    }
    let n = grid.points;
    let h = n / 2 + 1;
    let norm = 1.0 / grid.len() as f64;
    let ifft = plan(n, true);
    let mut values = Vec::with_capacity(s.channels * grid.len());
    let zero = Complex64::new(0.0, 0.0);
    for c in 0..s.channels {
        let src = s.channel(c);
        let rows: usize = if grid.dims == 1 { 1 } else { n };
        let mut half_rows = vec![zero; rows * h];
        if grid.dims == 1 {
            half_rows.copy_from_slice(src);
        } else {
            let mut cols = vec![zero; h * n];
            for ky in 0..n {
                for kx in 0..h {
                    cols[kx * n + ky] = src[ky * h + kx];
                }
            }
            ifft.process(&mut cols);
            for iy in 0..n {
                for kx in 0..h {
                    half_rows[iy * h + kx] = cols[kx * n + iy];
                }
            }
        }
        let mut full = vec![zero; rows * n];
        for r in 0..rows {
            let hr = &half_rows[r * h..(r + 1) * h];
            let fr = &mut full[r * n..(r + 1) * n];
            fr[..h].copy_from_slice(hr);
            for k in 1..n / 2 {
                fr[n - k] = hr[k].conj();
            }
        }
        ifft.process(&mut full);
        values.extend(full.iter().map(|z| z.re * norm));
    }
    Ok(Field::from_parts_unchecked(grid, s.channels, values))
}

/// Angular wavenumbers `2*pi*n/L` for every coefficient of the half spectrum.
#[derive(Clone, Debug)]
pub struct Wavenumbers {
    /// `kx` for `n = 0..=N/2`.
    pub half: Vec<f64>,
    /// `k` along a fully stored axis in FFT order (Nyquist carries `-N/2`).
    pub full: Vec<f64>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    nyquist: Vec<bool>,
}

pub fn wavenumbers(g: &Grid) -> Wavenumbers {
    let n = g.points;
    let h = n / 2 + 1;
    let base = 2.0 * PI / g.length;
    let half: Vec<f64> = (0..h).map(|i| base * i as f64).collect();
    let full: Vec<f64> = (0..n)
        .map(|i| {
            let m = if i < n / 2 { i as isize } else { i as isize - n as isize };
            base * m as f64
        })
        .collect();
    let len = g.spectral_len();
    let mut kx = Vec::with_capacity(len);
    let mut ky = Vec::with_capacity(len);
    let mut nyquist = Vec::with_capacity(len);
    for i in 0..len {
        let (ix, iy) = (i % h, i / h);
        kx.push(half[ix]);
        if g.dims == 1 {
            ky.push(0.0);
            nyquist.push(ix == n / 2);
        } else {
            ky.push(full[iy]);
            nyquist.push(ix == n / 2 || iy == n / 2);
        }
    }
    Wavenumbers { half, full, kx, ky, nyquist }
}

impl Wavenumbers {
    pub fn len(&self) -> usize {
        self.kx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kx.is_empty()
    }

    /// `(kx, ky)` of coefficient `i`; `ky = 0` in 1D.
    pub fn mode(&self, i: usize) -> (f64, f64) {
        (self.kx[i], self.ky[i])
    }

    /// `(kx, ky)` for odd-order operators: Nyquist coefficients are real and
    /// carry no odd derivative, so both components vanish there.
    pub fn odd_mode(&self, i: usize) -> (f64, f64) {
        if self.nyquist[i] {
            (0.0, 0.0)
        } else {
            (self.kx[i], self.ky[i])
        }
    }

    pub fn k_squared(&self, i: usize) -> f64 {
        self.kx[i] * self.kx[i] + self.ky[i] * self.ky[i]
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        self.nyquist[i]
    }

    pub fn max_k_squared(&self) -> f64 {
        (0..self.len()).map(|i| self.k_squared(i)).fold(0.0, f64::max)
    }
}

/// Spectral derivative along `axis` (0 = x, 1 = y).
pub fn derivative(s: &Spectrum, axis: usize) -> Spectrum {
    let k = wavenumbers(&s.grid);
    let mut out = s.clone();
    out.apply(|i| {
        let (kx, ky) = k.odd_mode(i);
        Complex64::new(0.0, if axis == 0 { kx } else { ky })
    });
    out
}

/// Evaluate a pointwise function of several single-channel spectra without
/// aliasing: pad to 3/2 resolution, transform, apply `product`, transform
/// back and truncate. Nyquist modes of the result are zeroed.
pub fn dealiased_product<F>(inputs: &[&Spectrum], product: F) -> Result<Spectrum>
where
    F: Fn(&[f64]) -> f64,
{
    let first = inputs
        .first()
        .ok_or_else(|| Error::invalid("dealiased product needs at least one input"))?;
    let grid = first.grid;
    for s in inputs {
        if s.grid != grid || s.channels != 1 {
            return Err(Error::ShapeMismatch(
                "dealiased product inputs must be single-channel on a shared grid".into(),
            ));
        }
    }
    let n = grid.points;
    let padded = 3 * n / 2;
    if padded % 2 != 0 {
        return Err(Error::invalid(format!(
            "3/2 padding of {n} points gives odd size {padded}"
        )));
    }
    let physical: Vec<Field> = inputs
        .iter()
        .map(|s| inverse_transform(&s.resample(padded)?))
        .collect::<Result<_>>()?;
    let len = physical[0].values.len();
    let mut args = vec![0.0; inputs.len()];
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        for (a, f) in args.iter_mut().zip(&physical) {
            *a = f.values[i];
        }
        out.push(product(&args));
    }
    let prod = Field::from_parts_unchecked(physical[0].grid, 1, out);
    let mut s = forward_transform(&prod)?.resample(n)?;
    s.zero_nyquist();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, channels: usize, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..channels * grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        Field::new(grid, channels, values).unwrap()
    }

    fn max_rel_err(a: &Field, b: &Field) -> f64 {
        let scale = b.max_abs().max(1e-300);
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn grid_rejects_odd_points() {
        assert!(Grid::line(7, 1.0).is_err());
        assert!(Grid::new(3, 8, 1.0).is_err());
        assert!(Grid::line(8, -1.0).is_err());
        assert_eq!(Grid::line(256, 16.0).unwrap().spacing(), 0.0625);
    }

    #[test]
    fn constant_has_only_zero_mode() {
        let g = Grid::line(256, 16.0).unwrap();
        let f = Field::from_fn_1d(g, |_| 1.0).unwrap();
        let s = forward_transform(&f).unwrap();
        assert!((s.coeffs()[0].re - 256.0).abs() < 1e-12);
        for c in &s.coeffs()[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn single_sine_is_one_mode() {
        let g = Grid::line(64, 16.0).unwrap();
        let f = Field::from_fn_1d(g, |x| (2.0 * PI * x / 16.0).sin()).unwrap();
        let s = forward_transform(&f).unwrap();
        let nonzero: Vec<usize> = (0..s.coeffs().len()).filter(|&i| s.coeffs()[i].norm() > 1e-9).collect();
        assert_eq!(nonzero, vec![1]);
        // sin = (e^{ix} - e^{-ix}) / 2i  => X[1] = -i N / 2
        assert!((s.coeffs()[1] - Complex64::new(0.0, -32.0)).norm() < 1e-10);
    }

    #[test]
    fn non_finite_input_rejected() {
        let g = Grid::line(8, 1.0).unwrap();
        let mut f = Field::zeros(g, 1);
        f.values_mut()[3] = f64::NAN;
        assert!(matches!(forward_transform(&f), Err(Error::NonFinite { index: 3, .. })));
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let g = Grid::square(8, 1.0).unwrap();
        let f = inverse_transform(&Spectrum::zeros(g, 2)).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_mode_inverts_to_cosine() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let mut s = Spectrum::zeros(g, 1);
        // cos(2x + 3y) = (e^{i(2x+3y)} + c.c.)/2 ; half spectrum stores the kx=2 half
        let i = s.index_of(2, 3);
        s.coeffs_mut()[i] = Complex64::new(g.len() as f64 / 2.0, 0.0);
        let f = inverse_transform(&s).unwrap();
        let expect = Field::from_fn_2d(g, |x, y| (2.0 * x + 3.0 * y).cos()).unwrap();
        assert!(max_rel_err(&f, &expect) < 1e-12);
    }

    #[test]
    fn inverse_rejects_bad_layout() {
        let g = Grid::line(8, 1.0).unwrap();
        let bad = Spectrum {
            grid: g,
            channels: 1,
            coeffs: vec![Complex64::new(0.0, 0.0); 3],
        };
        assert!(matches!(inverse_transform(&bad), Err(Error::ShapeMismatch(_))));
        assert!(Spectrum::new(g, 1, vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn round_trip_random_fields() {
        for (grid, ch) in [
            (Grid::line(256, 16.0).unwrap(), 1),
            (Grid::square(32, 2.0 * PI).unwrap(), 2),
        ] {
            let f = random_field(grid, ch, 11);
            let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
            assert!(max_rel_err(&back, &f) < 1e-12);
        }
    }

    #[test]
    fn wavenumber_tables() {
        let g = Grid::line(8, 2.0 * PI).unwrap();
        let k = wavenumbers(&g);
        let expect = [0.0, 1.0, 2.0, 3.0, 4.0];
        for (a, b) in k.half.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let g = Grid::line(256, 16.0).unwrap();
        assert!((wavenumbers(&g).half[1] - 2.0 * PI / 16.0).abs() < 1e-15);
        let g = Grid::square(8, 2.0 * PI).unwrap();
        let k = wavenumbers(&g);
        assert_eq!(k.full.iter().map(|v| v.round() as i64).collect::<Vec<_>>(), vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(k.is_nyquist(4));
        assert_eq!(k.odd_mode(4), (0.0, 0.0));
    }

    #[test]
    fn spectral_derivative_of_sine() {
        let l = 16.0;
        let g = Grid::line(128, l).unwrap();
        let w = 2.0 * PI / l;
        let f = Field::from_fn_1d(g, |x| (w * x).sin()).unwrap();
        let d = inverse_transform(&derivative(&forward_transform(&f).unwrap(), 0)).unwrap();
        let expect = Field::from_fn_1d(g, |x| w * (w * x).cos()).unwrap();
        let err = d.values().iter().zip(expect.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn parseval_identity() {
        for (grid, ch) in [
            (Grid::line(64, 3.0).unwrap(), 1),
            (Grid::square(16, 1.0).unwrap(), 2),
        ] {
            let f = random_field(grid, ch, 5);
            let s = forward_transform(&f).unwrap();
            for c in 0..ch {
                let direct: f64 = f.channel(c).iter().map(|v| v * v).sum();
                assert!((s.parseval_sum(c) - direct).abs() < 1e-10 * direct);
            }
        }
    }

    #[test]
    fn squaring_a_sine_is_exact() {
        let g = Grid::line(64, 2.0 * PI).unwrap();
        let k = 10.0; // below N/3
        let f = Field::from_fn_1d(g, |x| (k * x).sin()).unwrap();
        let s = forward_transform(&f).unwrap();
        let sq = dealiased_product(&[&s], |a| a[0] * a[0]).unwrap();
        let expect = forward_transform(&Field::from_fn_1d(g, |x| 0.5 * (1.0 - (2.0 * k * x).cos())).unwrap()).unwrap();
        for (a, b) in sq.coeffs().iter().zip(expect.coeffs()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn product_of_two_modes_gives_sum_and_difference() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let a = Field::from_fn_2d(g, |x, y| (3.0 * x + y).cos()).unwrap();
        let b = Field::from_fn_2d(g, |x, y| (5.0 * x - 2.0 * y).cos()).unwrap();
        let (sa, sb) = (forward_transform(&a).unwrap(), forward_transform(&b).unwrap());
        let p = inverse_transform(&dealiased_product(&[&sa, &sb], |v| v[0] * v[1]).unwrap()).unwrap();
        let expect = Field::from_fn_2d(g, |x, y| 0.5 * ((8.0 * x - y).cos() + (-2.0 * x + 3.0 * y).cos())).unwrap();
        assert!(max_rel_err(&p, &expect) < 1e-10);
    }

    #[test]
    fn dealiasing_zero_and_odd_padding() {
        let g = Grid::line(16, 1.0).unwrap();
        let z = Spectrum::zeros(g, 1);
        let p = dealiased_product(&[&z], |a| a[0] * a[0]).unwrap();
        assert!(p.coeffs().iter().all(|c| c.norm() == 0.0));
        let g = Grid::line(6, 1.0).unwrap();
        assert!(dealiased_product(&[&Spectrum::zeros(g, 1)], |a| a[0]).is_err());
    }

    /// Direct convolution oracle: the truncated Galerkin product of two 1D band-limited signals.
    #[test]
    fn dealiased_product_matches_direct_convolution() {
        let n = 32;
        let g = Grid::line(n, 1.0).unwrap();
        let a = random_field(g, 1, 1);
        let b = random_field(g, 1, 2);
        let mut sa = forward_transform(&a).unwrap();
        let mut sb = forward_transform(&b).unwrap();
        sa.zero_nyquist();
        sb.zero_nyquist();
        // full two-sided coefficients c_k = X_k / N for |k| < N/2
        let two_sided = |s: &Spectrum| {
            let mut m = std::collections::BTreeMap::new();
            for k in 0..n / 2 {
                let c = s.coeffs()[k] / n as f64;
                m.insert(k as i64, c);
                if k > 0 {
                    m.insert(-(k as i64), c.conj());
                }
            }
            m
        };
        let (ca, cb) = (two_sided(&sa), two_sided(&sb));
        let p = dealiased_product(&[&sa, &sb], |v| v[0] * v[1]).unwrap();
        for k in 0..(n / 2) as i64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (p1, x) in &ca {
                if let Some(y) = cb.get(&(k - p1)) {
                    acc += x * y;
                }
            }
            let got = p.coeffs()[k as usize] / n as f64;
            assert!((got - acc).norm() < 1e-12, "mode {k}: {got} vs {acc}");
        }
    }

    #[test]
    fn band_limited_products_have_no_alias_energy() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = Spectrum::zeros(g, 1);
        let band = 7; // < N/4 so the product stays below N/2
        for ky in -(band as isize)..=(band as isize) {
            for kx in 0..=band {
                let i = s.index_of(kx, ky);
                s.coeffs_mut()[i] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        let f = inverse_transform(&s).unwrap();
        let s = forward_transform(&f).unwrap();
        let p = dealiased_product(&[&s], |a| a[0] * a[0]).unwrap();
        let peak = p.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let n = 32;
        let h = n / 2 + 1;
        for (i, c) in p.coeffs().iter().enumerate() {
            let kx = i % h;
            let row = i / h;
            let ky = if row < n / 2 { row as isize } else { row as isize - n as isize };
            if kx > 2 * band || ky.unsigned_abs() > 2 * band {
                assert!(c.norm() < 1e-12 * peak);
            }
        }
    }

    #[test]
    fn resample_round_trip_preserves_band_limited_field() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let f = Field::from_fn_2d(g, |x, y| x.sin() * (2.0 * y).cos() + 0.3 * (3.0 * x - y).sin()).unwrap();
        let up = f.resample_spectral(48).unwrap();
        let down = up.resample_spectral(16).unwrap();
        assert!(max_rel_err(&down, &f) < 1e-12);
        let expect = Field::from_fn_2d(*up.grid(), |x, y| x.sin() * (2.0 * y).cos() + 0.3 * (3.0 * x - y).sin()).unwrap();
        assert!(max_rel_err(&up, &expect) < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn transform_is_linear(seed_a in 0u64..1000, seed_b in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
                let g = Grid::square(8, 1.0).unwrap();
                let f = random_field(g, 1, seed_a);
                let h = random_field(g, 1, seed_b);
                let lhs = forward_transform(&f.lin_comb(a, &h, b).unwrap()).unwrap();
                let (sf, sh) = (forward_transform(&f).unwrap(), forward_transform(&h).unwrap());
                for ((l, x), y) in lhs.coeffs().iter().zip(sf.coeffs()).zip(sh.coeffs()) {
                    prop_assert!((l - (x * a + y * b)).norm() < 1e-12);
                }
            }

            #[test]
            fn round_trip_1d(seed in 0u64..10_000, half in 1usize..64) {
                let g = Grid::line(2 * half, 5.0).unwrap();
                let f = random_field(g, 1, seed);
                let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
                prop_assert!(max_rel_err(&back, &f) < 1e-12);
            }
        }
    }
}
