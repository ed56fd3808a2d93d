//! Periodic grid on (0,1), Fourier transforms, the operator A = -∂xx, and the
//! norms and energies of the phase spaces.
//!
//! Conventions: N collocation points x_j = j/N, transform normalized so that
//! û_0 is the mean, û_k for k = -N/2..N/2-1 stored in FFT bin order, angular
//! frequency ω_k = 2πk. With this normalization Parseval reads
//! |f|²_{L²} = Σ_k |û_k|², and all seminorms are computed spectrally so A is
//! exactly self-adjoint and positive on zero-mean fields. L^q norms use
//! collocation quadrature (mean of |f|^q; domain length 1).

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid size must be a power of two >= 8 (got {0})")]
    NonPowerOfTwo(usize),
    #[error("field length {found} does not match grid size {expected}")]
    LengthMismatch { found: usize, expected: usize },
    #[error("field contains non-finite samples")]
    NonFinite,
}

/// Uniform periodic grid on (0,1) with cached FFT plans.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::NonPowerOfTwo(n));
        }
        let mut planner = FftPlanner::new();
        Ok(Grid { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 / self.n as f64).collect()
    }

    /// Signed wavenumber of FFT bin i: k = i for i < N/2, i - N otherwise.
    pub fn wavenumber(&self, bin: usize) -> i64 {
        if bin < self.n / 2 {
            bin as i64
        } else {
            bin as i64 - self.n as i64
        }
    }

    /// Angular frequency ω_k = 2πk of FFT bin i.
    pub fn omega(&self, bin: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.wavenumber(bin) as f64
    }

    /// Largest |ω_k| on this grid (the Nyquist bin).
    pub fn omega_max(&self) -> f64 {
        std::f64::consts::PI * self.n as f64
    }

    /// Forward transform with 1/N normalization and Hermitian symmetrization.
    pub fn transform(&self, f: &Field) -> Spectrum {
        assert_eq!(f.len(), self.n, "field/grid size mismatch");
        let mut buf: Vec<Complex64> =
            f.values().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        // symmetrize: bin k and bin N-k must be conjugate, bins 0 and N/2 real
        buf[0].im = 0.0;
        buf[self.n / 2].im = 0.0;
        for k in 1..self.n / 2 {
            let a = buf[k];
            let b = buf[self.n - k];
            let hk = 0.5 * (a + b.conj());
            buf[k] = hk;
            buf[self.n - k] = hk.conj();
        }
        Spectrum { coeffs: buf }
    }

    /// Inverse transform back to a real field.
    pub fn inverse(&self, s: &Spectrum) -> Field {
        assert_eq!(s.len(), self.n, "spectrum/grid size mismatch");
        let mut buf = s.coeffs.clone();
        self.inv.process(&mut buf);
        Field { values: buf.into_iter().map(|c| c.re).collect() }
    }
}

/// Real field sampled on the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        Ok(Field { values })
    }

    pub fn zeros(n: usize) -> Self {
        Field { values: vec![0.0; n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        Field { values: (0..n).map(|j| f(j as f64 / n as f64)).collect() }
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, a: f64) -> Field {
        Field { values: self.values.iter().map(|v| a * v).collect() }
    }

    pub fn add(&self, other: &Field) -> Field {
        Field { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    /// Collocation mean (trapezoid on the periodic grid).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Collocation L² inner product ⟨f, g⟩ = (1/N) Σ f_j g_j.
    pub fn inner(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
            / self.values.len() as f64
    }
}

/// Complex Fourier coefficients in FFT bin order, Hermitian-symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn from_raw(coeffs: Vec<Complex64>) -> Self {
        Spectrum { coeffs }
    }

    /// Coefficient of signed wavenumber k.
    pub fn at_wavenumber(&self, k: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        let bin = k.rem_euclid(n) as usize;
        self.coeffs[bin]
    }
}

/// Power of A applied spectrally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum APower {
    One,
    Half,
}

/// Apply A^power: multiplies û_k by ω_k² (power 1) or |ω_k| (power ½);
/// annihilates the k = 0 bin.
pub fn apply_a(grid: &Grid, s: &Spectrum, power: APower) -> Spectrum {
    let mut out = s.coeffs.clone();
    for (bin, c) in out.iter_mut().enumerate() {
        let w = grid.omega(bin);
        let factor = match power {
            APower::One => w * w,
            APower::Half => w.abs(),
        };
        *c *= factor;
    }
    Spectrum { coeffs: out }
}

/// The norm bundle of a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    /// |f| (spectral / Parseval)
    pub l2: f64,
    /// ‖f‖_{L^q} by collocation quadrature
    pub lq: f64,
    /// |A^{1/2} f|
    pub h1_semi: f64,
    /// |A f|
    pub h2_semi: f64,
}

/// All norms of a field; L^q needs q >= 2.
pub fn norms(grid: &Grid, f: &Field, q: u32) -> Norms {
    assert!(q >= 2, "L^q norm needs q >= 2");
    let s = grid.transform(f);
    let mut l2sq = 0.0;
    let mut h1sq = 0.0;
    let mut h2sq = 0.0;
    for (bin, c) in s.coeffs.iter().enumerate() {
        let m = c.norm_sqr();
        let w2 = grid.omega(bin).powi(2);
        l2sq += m;
        h1sq += w2 * m;
        h2sq += w2 * w2 * m;
    }
    let lq = lq_norm(f, q);
    Norms { l2: l2sq.sqrt(), lq, h1_semi: h1sq.sqrt(), h2_semi: h2sq.sqrt() }
}

/// ‖f‖_{L^q} = (mean of |f|^q)^{1/q} on the collocation nodes.
pub fn lq_norm(f: &Field, q: u32) -> f64 {
    let n = f.len() as f64;
    let sum: f64 = f.values().iter().map(|&v| v.abs().powi(q as i32)).sum();
    (sum / n).powf(1.0 / q as f64)
}

/// (mean of |f|^q): ‖f‖_{L^q}^q without the root.
pub fn lq_norm_pow_q(f: &Field, q: u32) -> f64 {
    let n = f.len() as f64;
    f.values().iter().map(|&v| v.abs().powi(q as i32)).sum::<f64>() / n
}

/// Split off the mean: returns (mean, f - mean); the sum reconstructs f.
pub fn mean_split(f: &Field) -> (f64, Field) {
    let m = f.mean();
    (m, Field { values: f.values().iter().map(|v| v - m).collect() })
}

/// State (u, ∂t u) stamped with its current time.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl State {
    pub fn new(u: Field, v: Field, t: f64) -> Self {
        assert_eq!(u.len(), v.len(), "u and v must live on the same grid");
        State { u, v, t }
    }

    pub fn zero(n: usize, t: f64) -> Self {
        State { u: Field::zeros(n), v: Field::zeros(n), t }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    /// Componentwise difference (same time stamp as self).
    pub fn sub(&self, other: &State) -> State {
        State { u: self.u.sub(&other.u), v: self.v.sub(&other.v), t: self.t }
    }
}

/// Natural energy at time t:
/// E_{X_t}(u,v) = e^{-2Ht}|A^{1/2}u|² + (2/q)‖u‖_{L^q}^q + |u|² + |v|².
pub fn energy_x(grid: &Grid, z: &State, q: u32, h: f64) -> f64 {
    let nu = norms(grid, &z.u, q);
    let vsq = z.v.inner(&z.v);
    let weight = (-2.0 * h * z.t).exp();
    weight * nu.h1_semi.powi(2) + (2.0 / q as f64) * nu.lq.powi(q as i32) + nu.l2.powi(2) + vsq
}

/// ‖(u,v)‖_{X_t} = e^{-Ht}|A^{1/2}u| + ‖u‖_{L^q} + |v|.
pub fn norm_xt(grid: &Grid, z: &State, q: u32, h: f64) -> f64 {
    let nu = norms(grid, &z.u, q);
    let vl2 = z.v.inner(&z.v).sqrt();
    (-h * z.t).exp() * nu.h1_semi + nu.lq + vl2
}

/// ‖(u,v)‖_{Y_t} = e^{-Ht}|Au| + ‖u‖_{L^q} + |A^{1/2}v| + |v|.
pub fn norm_yt(grid: &Grid, z: &State, q: u32, h: f64) -> f64 {
    let nu = norms(grid, &z.u, q);
    let nv = norms(grid, &z.v, 2);
    (-h * z.t).exp() * nu.h2_semi + nu.lq + nv.h1_semi + nv.l2
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(128).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(7).is_err());
        assert!(Grid::new(96).is_err());
        assert!(Grid::new(4).is_err());
        assert!(Grid::new(8).is_ok());
    }

    #[test]
    fn constant_field_transform() {
        let g = grid();
        let f = Field::from_fn(g.len(), |_| 3.25);
        let s = g.transform(&f);
        assert!((s.at_wavenumber(0).re - 3.25).abs() < 1e-14);
        for k in 1..g.len() as i64 {
            assert!(s.coeffs()[k as usize].norm() < 1e-13);
        }
    }

    #[test]
    fn pure_mode_transform() {
        let g = grid();
        let f = Field::from_fn(g.len(), |x| (2.0 * PI * x).sin());
        let s = g.transform(&f);
        // sin(2πx) = (e^{i2πx} - e^{-i2πx}) / 2i: only k = ±1 bins
        assert!((s.at_wavenumber(1) - Complex64::new(0.0, -0.5)).norm() < 1e-13);
        assert!((s.at_wavenumber(-1) - Complex64::new(0.0, 0.5)).norm() < 1e-13);
        let energy_rest: f64 = (0..g.len())
            .filter(|&b| g.wavenumber(b).abs() != 1)
            .map(|b| s.coeffs()[b].norm_sqr())
            .sum();
        assert!(energy_rest < 1e-24);
    }

    #[test]
    fn round_trip_identity() {
        let g = grid();
        // deterministic pseudo-random field
        let f = Field::from_fn(g.len(), |x| {
            (17.0 * x).sin() * (3.0 + (51.0 * x * x).cos()) + 0.3 * (250.0 * x).sin()
        });
        let back = g.inverse(&g.transform(&f));
        let scale: f64 = f.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn apply_a_on_constants_and_eigenfunctions() {
        let g = grid();
        let c = g.transform(&Field::from_fn(g.len(), |_| 2.0));
        let ac = apply_a(&g, &c, APower::One);
        assert!(ac.coeffs().iter().all(|z| z.norm() < 1e-13));

        let f = Field::from_fn(g.len(), |x| (2.0 * PI * x).sin());
        let s = g.transform(&f);
        let af = g.inverse(&apply_a(&g, &s, APower::One));
        let ahalf = g.inverse(&apply_a(&g, &s, APower::Half));
        let w2 = (2.0 * PI).powi(2);
        for j in 0..g.len() {
            assert!((af.values()[j] - w2 * f.values()[j]).abs() < 1e-10);
            assert!((ahalf.values()[j] - 2.0 * PI * f.values()[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn analytic_norms_of_sine() {
        let g = grid();
        let f = Field::from_fn(g.len(), |x| (2.0 * PI * x).sin());
        let n = norms(&g, &f, 2);
        assert!((n.l2.powi(2) - 0.5).abs() < 1e-12);
        assert!((n.h1_semi.powi(2) - 2.0 * PI * PI).abs() < 1e-9);
        // zero field and constants
        let z = norms(&g, &Field::zeros(g.len()), 4);
        assert_eq!((z.l2, z.lq, z.h1_semi, z.h2_semi), (0.0, 0.0, 0.0, 0.0));
        let one = norms(&g, &Field::from_fn(g.len(), |_| 1.0), 6);
        assert!((one.l2 - 1.0).abs() < 1e-13);
        assert!((one.lq - 1.0).abs() < 1e-13);
        assert!(one.h1_semi < 1e-12 && one.h2_semi < 1e-9);
    }

    #[test]
    fn parseval_physical_vs_spectral() {
        let g = grid();
        let f = Field::from_fn(g.len(), |x| (2.0 * PI * x).sin() + 0.5 * (8.0 * PI * x).cos() - 0.2);
        let phys: f64 = f.inner(&f);
        let spec = norms(&g, &f, 2).l2.powi(2);
        assert!((phys - spec).abs() <= 1e-10 * phys.abs().max(1.0));
    }

    #[test]
    fn band_limited_lq_matches_l2() {
        let g = grid();
        // top third of the spectrum empty: max |k| = 20 << 42
        let f = Field::from_fn(g.len(), |x| {
            (2.0 * PI * x).sin() + 0.25 * (2.0 * PI * 20.0 * x).cos()
        });
        let n = norms(&g, &f, 2);
        assert!((n.lq - n.l2).abs() <= 1e-10 * n.l2);
    }

    #[test]
    fn mean_split_cases() {
        let g = grid();
        let c = Field::from_fn(g.len(), |_| 4.5);
        let (m, rest) = mean_split(&c);
        assert!((m - 4.5).abs() < 1e-14);
        assert!(rest.values().iter().all(|v| v.abs() < 1e-13));

        let s = Field::from_fn(g.len(), |x| (2.0 * PI * x).sin());
        let (m2, rest2) = mean_split(&s);
        assert!(m2.abs() < 1e-14);
        for (a, b) in rest2.values().iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-14);
        }

        let both = Field::from_fn(g.len(), |x| 1.0 + (2.0 * PI * x).sin());
        let (m3, rest3) = mean_split(&both);
        assert!((m3 - 1.0).abs() < 1e-13);
        assert!(rest3.mean().abs() < 1e-14);
        // reconstruction
        for (r, orig) in rest3.values().iter().zip(both.values()) {
            assert!((r + m3 - orig).abs() < 1e-14);
        }
    }

    #[test]
    fn energy_x_analytic_values() {
        let g = grid();
        let zero = State::zero(g.len(), 0.0);
        assert_eq!(energy_x(&g, &zero, 2, 1.0), 0.0);

        let u = Field::from_fn(g.len(), |x| (2.0 * PI * x).sin());
        let z = State::new(u.clone(), Field::zeros(g.len()), 0.0);
        let e = energy_x(&g, &z, 2, 1.0);
        assert!((e - (2.0 * PI * PI + 1.0)).abs() < 1e-9);

        // same u with e^{-2Ht} = 1/2: pick H=1, t = ln(2)/2
        let z2 = State::new(u, Field::zeros(g.len()), 0.5 * 2.0_f64.ln());
        let e2 = energy_x(&g, &z2, 2, 1.0);
        assert!((e2 - (PI * PI + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn norm_xt_analytic_value_and_homogeneity() {
        let g = grid();
        let u = Field::from_fn(g.len(), |x| (2.0 * PI * x).sin());
        let z = State::new(u.clone(), Field::zeros(g.len()), 0.0);
        let n = norm_xt(&g, &z, 2, 1.0);
        let expect = PI * 2.0_f64.sqrt() + 1.0 / 2.0_f64.sqrt();
        assert!((n - expect).abs() < 1e-9);
        assert_eq!(norm_xt(&g, &State::zero(g.len(), 0.0), 2, 1.0), 0.0);
        // positive homogeneity of each summand: norm(2z) = 2 norm(z)
        let v = Field::from_fn(g.len(), |x| 0.3 * (4.0 * PI * x).cos());
        let z1 = State::new(u.scale(1.0), v.scale(1.0), 0.3);
        let z2 = State::new(z1.u.scale(2.0), z1.v.scale(2.0), 0.3);
        let (n1, n2) = (norm_xt(&g, &z1, 6, 1.0), norm_xt(&g, &z2, 6, 1.0));
        assert!((n2 - 2.0 * n1).abs() < 1e-10 * n1);
    }

    #[test]
    fn norm_yt_counts_higher_seminorms() {
        let g = grid();
        let u = Field::from_fn(g.len(), |x| (2.0 * PI * x).sin());
        let v = Field::from_fn(g.len(), |x| (2.0 * PI * x).cos());
        let z = State::new(u, v, 0.0);
        let n = norm_yt(&g, &z, 2, 1.0);
        // |Au| = (2π)²/√2, ‖u‖_2 = 1/√2, |A^{1/2}v| = 2π/√2, |v| = 1/√2
        let expect = (2.0 * PI).powi(2) / 2.0_f64.sqrt()
            + 1.0 / 2.0_f64.sqrt()
            + 2.0 * PI / 2.0_f64.sqrt()
            + 1.0 / 2.0_f64.sqrt();
        assert!((n - expect).abs() < 1e-8);
    }

    #[test]
    fn energy_equivalence_with_norm() {
        // shrinking perturbations: both metrics vanish together; a fixed
        // perturbation keeps both away from zero
        let g = grid();
        let base = State::new(
            Field::from_fn(g.len(), |x| (2.0 * PI * x).sin()),
            Field::from_fn(g.len(), |x| 0.5 * (4.0 * PI * x).cos()),
            0.2,
        );
        let dir = State::new(
            Field::from_fn(g.len(), |x| 0.7 * (6.0 * PI * x).cos()),
            Field::from_fn(g.len(), |x| 0.1 + 0.2 * (2.0 * PI * x).sin()),
            0.2,
        );
        let mut prev_e = f64::INFINITY;
        let mut prev_n = f64::INFINITY;
        for i in 0..6 {
            let eps = 0.5_f64.powi(i);
            let zn = State::new(
                base.u.add(&dir.u.scale(eps)),
                base.v.add(&dir.v.scale(eps)),
                base.t,
            );
            let diff = zn.sub(&base);
            let e = energy_x(&g, &diff, 6, 1.0);
            let n = norm_xt(&g, &diff, 6, 1.0);
            assert!(e < prev_e && n < prev_n, "both metrics shrink together");
            prev_e = e;
            prev_n = n;
        }
        let fixed = dir.sub(&State::zero(g.len(), 0.2));
        assert!(energy_x(&g, &fixed, 6, 1.0) > 1e-3);
        assert!(norm_xt(&g, &fixed, 6, 1.0) > 1e-2);
    }
}
