//! Integrating-factor (Lawson) fourth-order Runge-Kutta in spectral space.
//!
//! For `v_t = L v + N(v)` with diagonal `L`, the linear part is propagated
//! exactly by `exp(L h)` and the nonlinear part by classical RK4 in the
//! rotated variable `exp(-L t) v`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Spectrum;

pub(crate) struct IntegratingFactor {
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    h: f64,
}

impl IntegratingFactor {
    /// `rates` holds one linear rate per coefficient (all channels) or per mode.
    pub(crate) fn new(rates: &[Complex64], h: f64) -> Self {
        IntegratingFactor {
            half: rates.iter().map(|r| (r * (0.5 * h)).exp()).collect(),
            full: rates.iter().map(|r| (r * h).exp()).collect(),
            h,
        }
    }

    pub(crate) fn step<N>(&self, v: &Spectrum, nonlinear: &N) -> Result<Spectrum>
    where
        N: Fn(&Spectrum) -> Result<Spectrum>,
    {
        let h = self.h;
        let hh = Complex64::new(0.5 * h, 0.0);

        let k1 = nonlinear(v)?;

        let mut a = v.clone();
        a.axpy(hh, &k1);
        a.apply_table(&self.half);
        let k2 = nonlinear(&a)?;

        let mut ev_half = v.clone();
        ev_half.apply_table(&self.half);
        let mut b = ev_half;
        b.axpy(hh, &k2);
        let k3 = nonlinear(&b)?;

        let mut ev_full = v.clone();
        ev_full.apply_table(&self.full);
        let mut ek3 = k3;
        ek3.apply_table(&self.half);
        let mut c = ev_full.clone();
        c.axpy(Complex64::new(h, 0.0), &ek3);
        let k4 = nonlinear(&c)?;

        // E k1 + 2 E_half (k2 + k3) + k4, with ek3 = E_half k3 already
        let mut ek1 = k1;
        ek1.apply_table(&self.full);
        let mut ek2 = k2;
        ek2.apply_table(&self.half);
        let mut out = ev_full;
        let w = Complex64::new(h / 6.0, 0.0);
        out.axpy(w, &ek1);
        out.axpy(w * 2.0, &ek2);
        out.axpy(w * 2.0, &ek3);
        out.axpy(w, &k4);

        if out.coeffs().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::stability("integrating-factor RK4 produced non-finite values"));
        }
        Ok(out)
    }
}
