//! Seeded, reproducible initial data. The `thermal` kind stands in for
//! thermalized fluctuations: independent Gaussian Fourier amplitudes under
//! the envelope exp(-(k/k0)²), rescaled so that E_{X_s} hits the requested
//! amplitude exactly (the L^q term makes the energy a strictly increasing but
//! non-quadratic function of the scale, so the rescaling solves a 1-D root
//! problem by bisection).

use crate::spectral::{energy_x, Field, Grid, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InitError {
    #[error("initial-data file not found: {0}")]
    FileNotFound(String),
    #[error("initial-data file malformed: {0}")]
    Malformed(String),
    #[error("mode number {k} does not fit on a grid of {n} points")]
    ModeTooHigh { k: u32, n: usize },
}

/// Initial-data family specification.
#[derive(Clone, Debug, PartialEq)]
pub enum InitKind {
    /// random Fourier modes with Gaussian amplitudes under exp(-(k/k0)²)
    Thermal { seed: u64, amplitude: f64, k0: f64 },
    /// u = a sin(2πkx), v = 0, with a chosen so E_{X_s} = amplitude
    Mode { k: u32, amplitude: f64 },
    /// two CSV rows of N samples: u then v
    File { path: String },
}

/// Build a state at time s with E_{X_s} equal to the requested amplitude.
pub fn make_initial(
    grid: &Grid,
    kind: &InitKind,
    q: u32,
    h: f64,
    s: f64,
) -> Result<State, InitError> {
    match kind {
        InitKind::Thermal { seed, amplitude, k0 } => {
            Ok(thermal_state(grid, *seed, *amplitude, *k0, q, h, s))
        }
        InitKind::Mode { k, amplitude } => {
            let n = grid.len();
            if *k as usize >= n / 2 {
                return Err(InitError::ModeTooHigh { k: *k, n });
            }
            let kk = *k as f64;
            let u = Field::from_fn(n, |x| (2.0 * std::f64::consts::PI * kk * x).sin());
            let z = State::new(u, Field::zeros(n), s);
            Ok(rescale_to_energy(grid, z, *amplitude, q, h))
        }
        InitKind::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|_| InitError::FileNotFound(path.clone()))?;
            let mut rows = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let vals: Result<Vec<f64>, _> =
                    line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
                rows.push(vals.map_err(|e| InitError::Malformed(format!("{path}: {e}")))?);
            }
            if rows.len() != 2 {
                return Err(InitError::Malformed(format!(
                    "{path}: expected 2 rows (u, v), found {}",
                    rows.len()
                )));
            }
            if rows[0].len() != grid.len() || rows[1].len() != grid.len() {
                return Err(InitError::Malformed(format!(
                    "{path}: rows must have {} samples",
                    grid.len()
                )));
            }
            let u = Field::new(rows.remove(0)).map_err(|e| InitError::Malformed(e.to_string()))?;
            let v = Field::new(rows.remove(0)).map_err(|e| InitError::Malformed(e.to_string()))?;
            Ok(State::new(u, v, s))
        }
    }
}

fn thermal_state(grid: &Grid, seed: u64, amplitude: f64, k0: f64, q: u32, h: f64, s: f64) -> State {
    let n = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut su = vec![Complex64::new(0.0, 0.0); n];
    let mut sv = vec![Complex64::new(0.0, 0.0); n];
    // zero mode first, then k = 1..N/2-1 (Nyquist left empty), fixed order
    su[0] = Complex64::new(gauss(), 0.0);
    sv[0] = Complex64::new(gauss(), 0.0);
    for k in 1..n / 2 {
        let env = (-((k as f64) / k0).powi(2)).exp();
        let cu = Complex64::new(gauss(), gauss()) * (0.5 * env);
        let cv = Complex64::new(gauss(), gauss()) * (0.5 * env);
        su[k] = cu;
        su[n - k] = cu.conj();
        sv[k] = cv;
        sv[n - k] = cv.conj();
    }
    use rustfft::FftPlanner;
    let mut planner = FftPlanner::new();
    let inv = planner.plan_fft_inverse(n);
    inv.process(&mut su);
    inv.process(&mut sv);
    let u = Field::from_raw(su.into_iter().map(|c| c.re).collect());
    let v = Field::from_raw(sv.into_iter().map(|c| c.re).collect());
    rescale_to_energy(grid, State::new(u, v, s), amplitude, q, h)
}

/// Scale (u, v) -> (λu, λv) so that E_{X_s} equals `target` (monotone in λ).
pub fn rescale_to_energy(grid: &Grid, z: State, target: f64, q: u32, h: f64) -> State {
    if target <= 0.0 {
        return State::zero(z.u.len(), z.t);
    }
    let base = energy_x(grid, &z, q, h);
    if base == 0.0 {
        return z;
    }
    let energy_at = |lam: f64| {
        let zs = State::new(z.u.scale(lam), z.v.scale(lam), z.t);
        energy_x(grid, &zs, q, h)
    };
    let mut lo = 0.0_f64;
    let mut hi = (target / base).sqrt().max(1e-8);
    while energy_at(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if energy_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = 0.5 * (lo + hi);
    State::new(z.u.scale(lam), z.v.scale(lam), z.t)
}
