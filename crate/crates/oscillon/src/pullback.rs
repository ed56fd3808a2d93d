//! Experiment drivers for the pullback and forward claims: absorber entry,
//! pullback convergence, decay-rate inequalities, the P/N decomposition, and
//! box-counting dimension of sampled end-state clouds.

use crate::diagnostics;
use crate::dynamics::{
    self, evolve, pullback_horizon, DynamicsError, Problem, StepperConfig,
};
use crate::init::{make_initial, InitKind};
use crate::potential::{
    derive_constants, CertifiedPotential, GrowthCertificate, Potential, PotentialError,
    RateConstants,
};
use crate::spectral::{energy_x, norm_yt, Grid, State};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PullbackError {
    #[error("energies reached the noise floor (1e-24) before 3 decades of decay")]
    InsufficientDecades,
    #[error("initial energy {energy} exceeds the absorber radius {r_absorb}")]
    AbsorberViolation { energy: f64, r_absorb: f64 },
    #[error("point cloud too concentrated: diameter {diameter} < 10 x eps_min {eps_min}")]
    DegenerateCloud { diameter: f64, eps_min: f64 },
    #[error("box-counting needs at least 100 points (got {0})")]
    TooFewPoints(usize),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// A pullback experiment: fixed target time t, start times going backwards,
/// and a seeded thermal family normalized to E_{X_s} = amplitude.
#[derive(Clone, Debug)]
pub struct PullbackRun {
    pub t: f64,
    /// s_1 > s_2 > ... (all <= t)
    pub starts: Vec<f64>,
    pub seeds: Vec<u64>,
    pub amplitude: f64,
    pub k0: f64,
    pub stepper: StepperConfig,
}

impl PullbackRun {
    /// Default start grid s_i = t - 2^i, i = 0..=12, clipped at the phase
    /// overflow horizon.
    pub fn default_starts(t: f64, grid: &Grid, h: f64) -> Vec<f64> {
        let horizon = pullback_horizon(grid, h);
        (0..=12)
            .map(|i| t - (1u64 << i) as f64)
            .filter(|s| *s > horizon)
            .collect()
    }

    fn family(&self, grid: &Grid, q: u32, h: f64, s: f64, seed: u64) -> State {
        make_initial(grid, &InitKind::Thermal { seed, amplitude: self.amplitude, k0: self.k0 }, q, h, s)
            .expect("thermal initial data is infallible")
    }
}

/// Per-run outcome of the dissipative estimate check.
#[derive(Clone, Copy, Debug)]
pub struct DissipativeRunOutcome {
    pub s: f64,
    pub seed: u64,
    pub e_start: f64,
    pub e_end: f64,
    /// max over recorded times of E(τ) - [K0 E_s e^{-μ(τ-s)} + K1]
    pub max_violation: f64,
    /// max_violation / (K0 E_s + K1 + 1)
    pub max_normalized: f64,
}

/// Signed violations of E(t) <= K0 E_s e^{-μ(t-s)} + K1 along every run.
#[derive(Clone, Debug)]
pub struct DissipativeReport {
    pub runs: Vec<DissipativeRunOutcome>,
    pub max_violation: f64,
    pub max_normalized: f64,
}

pub fn dissipative_check(
    p: &Problem,
    run: &PullbackRun,
    consts: &RateConstants,
) -> Result<DissipativeReport, PullbackError> {
    let cases: Vec<(f64, u64)> = run
        .starts
        .iter()
        .flat_map(|&s| run.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let runs: Result<Vec<DissipativeRunOutcome>, PullbackError> = cases
        .par_iter()
        .map(|&(s, seed)| {
            let z = run.family(p.grid, p.q, p.h, s, seed);
            let e_start = energy_x(p.grid, &z, p.q, p.h);
            let mut max_violation = f64::NEG_INFINITY;
            let bound = |tau: f64| consts.k0 * e_start * (-consts.mu * (tau - s)).exp() + consts.k1;
            let mut e_end = e_start;
            let out = evolve(&z, run.t, &run.stepper, p, |zt| {
                let e = energy_x(p.grid, zt, p.q, p.h);
                let v = e - bound(zt.t);
                if v > max_violation {
                    max_violation = v;
                }
                e_end = e;
            })?;
            let _ = out;
            if max_violation == f64::NEG_INFINITY {
                max_violation = e_start - bound(s);
            }
            Ok(DissipativeRunOutcome {
                s,
                seed,
                e_start,
                e_end,
                max_violation,
                max_normalized: max_violation / (consts.k0 * e_start + consts.k1 + 1.0),
            })
        })
        .collect();
    let runs = runs?;
    let max_violation = runs.iter().map(|r| r.max_violation).fold(f64::NEG_INFINITY, f64::max);
    let max_normalized = runs.iter().map(|r| r.max_normalized).fold(f64::NEG_INFINITY, f64::max);
    Ok(DissipativeReport { runs, max_violation, max_normalized })
}

/// Least-squares slope of y against x.
fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Fitted pullback decay rates.
#[derive(Clone, Debug)]
pub struct DecayFit {
    /// (t - s, E_{X_t}(end), E_mech(end)) per start
    pub points: Vec<(f64, f64, f64)>,
    /// λ̂ = -slope of ln E_{X_t}(end) vs (t-s)
    pub rate_energy: f64,
    /// same fit on the mechanical energy ϖ|A^{1/2}u|² + |v|²
    pub rate_mech: f64,
    /// λ̂ - μ (the estimate guarantees this is >= 0 asymptotically)
    pub margin: f64,
}

pub fn decay_fit(
    p: &Problem,
    run: &PullbackRun,
    consts: &RateConstants,
) -> Result<DecayFit, PullbackError> {
    let seed = *run.seeds.first().unwrap_or(&0);
    let ends: Result<Vec<(f64, f64, f64)>, PullbackError> = run
        .starts
        .par_iter()
        .map(|&s| {
            let z = run.family(p.grid, p.q, p.h, s, seed);
            let out = evolve(&z, run.t, &run.stepper, p, |_| {})?;
            let e = energy_x(p.grid, &out, p.q, p.h);
            let n = crate::spectral::norms(p.grid, &out.u, p.q);
            let mech = (-2.0 * p.h * out.t).exp() * n.h1_semi.powi(2) + out.v.inner(&out.v);
            Ok((run.t - s, e, mech))
        })
        .collect();
    let points = ends?;
    let floor = 1e-24;
    let clean: Vec<&(f64, f64, f64)> = points.iter().filter(|(_, e, _)| *e > floor).collect();
    if clean.len() < 2 {
        return Err(PullbackError::InsufficientDecades);
    }
    let es: Vec<f64> = clean.iter().map(|(_, e, _)| *e).collect();
    let decades = (es.iter().cloned().fold(f64::MIN, f64::max)
        / es.iter().cloned().fold(f64::MAX, f64::min))
    .log10();
    if decades < 3.0 {
        return Err(PullbackError::InsufficientDecades);
    }
    let gaps: Vec<f64> = clean.iter().map(|(g, _, _)| *g).collect();
    let lne: Vec<f64> = clean.iter().map(|(_, e, _)| e.ln()).collect();
    let lnm: Vec<f64> = clean.iter().map(|(_, _, m)| m.max(floor).ln()).collect();
    let rate_energy = -ls_slope(&gaps, &lne);
    let rate_mech = -ls_slope(&gaps, &lnm);
    Ok(DecayFit { points, rate_energy, rate_mech, margin: rate_energy - consts.mu })
}

/// Successive Cauchy distances of pullback end states.
#[derive(Clone, Debug)]
pub struct CauchyTable {
    /// (s_i, s_{i+1}, d_i = E_{X_t}(end_i - end_{i+1}))
    pub rows: Vec<(f64, f64, f64)>,
    pub end_energies: Vec<f64>,
    /// monotone decrease of d_i after dropping the first entry
    pub monotone_after_burn_in: bool,
}

pub fn pullback_convergence(p: &Problem, run: &PullbackRun) -> Result<CauchyTable, PullbackError> {
    let seed = *run.seeds.first().unwrap_or(&0);
    let ends: Result<Vec<State>, PullbackError> = run
        .starts
        .par_iter()
        .map(|&s| {
            let z = run.family(p.grid, p.q, p.h, s, seed);
            Ok(evolve(&z, run.t, &run.stepper, p, |_| {})?)
        })
        .collect();
    let ends = ends?;
    let mut rows = Vec::new();
    for i in 0..ends.len().saturating_sub(1) {
        let d = energy_x(p.grid, &ends[i].sub(&ends[i + 1]), p.q, p.h);
        rows.push((run.starts[i], run.starts[i + 1], d));
    }
    let end_energies = ends.iter().map(|z| energy_x(p.grid, z, p.q, p.h)).collect();
    let monotone = rows.windows(2).skip(1).all(|w| w[1].2 <= w[0].2 * (1.0 + 1e-9));
    Ok(CauchyTable { rows, end_energies, monotone_after_burn_in: monotone })
}

/// Violations of the sharpened forward bound
/// |v(t)|² <= (Φ(s) + 2b1) · max{1, 1/(2H(t-s))}.
#[derive(Clone, Debug)]
pub struct ForwardReport {
    pub phi_start: f64,
    /// max over recorded steps of |v(t)|² - bound(t); <= 0 means pass
    pub max_violation: f64,
    /// max of |v|²/bound, to show the bound is non-vacuous
    pub max_utilization: f64,
}

pub fn forward_decay_check(
    p: &Problem,
    s: f64,
    z: &State,
    t_final: f64,
    consts: &RateConstants,
) -> Result<ForwardReport, PullbackError> {
    let stamped = State::new(z.u.clone(), z.v.clone(), s);
    let start_row = diagnostics::row(p.grid, &stamped, consts, p.pot);
    let phi_start = start_row.phi;
    let cap = phi_start + 2.0 * consts.b1;
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_utilization: f64 = 0.0;
    let stepper = StepperConfig::strang(0.01);
    evolve(&stamped, t_final, &stepper, p, |zt| {
        let vsq = zt.v.inner(&zt.v);
        let gap = zt.t - s;
        let bound = cap * 1.0_f64.max(1.0 / (2.0 * consts.h * gap));
        max_violation = max_violation.max(vsq - bound);
        if bound > 0.0 {
            max_utilization = max_utilization.max(vsq / bound);
        }
    })?;
    Ok(ForwardReport { phi_start, max_violation, max_utilization })
}

/// The auxiliary potential V⋆(y) = y²/2 + |y|^q/q whose flow absorbs without
/// offset (its certificate has a1 = 0, hence K1 = 0).
pub fn star_potential(q: u32) -> Result<CertifiedPotential, PotentialError> {
    assert!(q >= 4 && q % 2 == 0, "star decomposition needs even q >= 4");
    let mut coeffs = vec![0.0; q as usize];
    coeffs[1] = 0.5;
    coeffs[q as usize - 1] = 1.0 / q as f64;
    let pot = Potential::new(coeffs)?;
    let qm1 = (q - 1) as f64;
    let c_second = (qm1 * (q as f64 - 2.0)).max(1.0);
    let cert = GrowthCertificate::new(q, qm1, 0.0, qm1, 1.0, c_second)?;
    CertifiedPotential::new(pot, cert)
}

/// One decomposition trajectory: u (full flow), p-part (V⋆ flow, same data),
/// n-part (linear flow forced by φ⋆(p) - φ(u), zero data), stepped jointly on
/// one fixed-dt Strang grid so u = p + n holds to rounding.
#[derive(Clone, Debug)]
pub struct DecompositionOutcome {
    pub s: f64,
    /// max over steps of E_{X_t}(u - p - n)^{1/2}
    pub recon_error: f64,
    /// max over steps of E_{X_t}(P) - K2 R_A e^{-μ1 (t-s)}
    pub p_violation: f64,
    /// ‖N(t)‖²_{Y_t} / (1 + e^{qHt}) at the final time
    pub n_ratio_end: f64,
    /// sup over steps of ‖N(τ)‖²_{Y_τ} / (1 + e^{qHτ})
    pub n_ratio_sup: f64,
    pub e_p_end: f64,
}

/// Constants (K2, μ1) of the P-decay lemma: the dissipative constants of the
/// star potential's certificate.
pub fn star_constants(q: u32, h: f64) -> Result<RateConstants, PotentialError> {
    derive_constants(star_potential(q)?.certificate(), h)
}

pub fn decomposition_run(
    p: &Problem,
    s: f64,
    z: &State,
    t: f64,
    consts: &RateConstants,
    dt: f64,
) -> Result<DecompositionOutcome, PullbackError> {
    let e_s = energy_x(p.grid, z, p.q, p.h);
    if e_s > consts.r_absorb * (1.0 + 1e-12) {
        return Err(PullbackError::AbsorberViolation { energy: e_s, r_absorb: consts.r_absorb });
    }
    let star = star_potential(p.q)?;
    let star_rc = derive_constants(star.certificate(), p.h)?;
    let n_pts = p.grid.len();

    let mut u_state = State::new(z.u.clone(), z.v.clone(), s);
    let mut p_state = State::new(z.u.clone(), z.v.clone(), s);
    let mut n_state = State::zero(n_pts, s);

    let mut recon_error: f64 = 0.0;
    let mut p_violation = f64::NEG_INFINITY;
    let mut n_ratio_sup: f64 = 0.0;
    let p_bound = |tau: f64| star_rc.k0 * consts.r_absorb * (-star_rc.mu * (tau - s)).exp();

    let half_kick = |u_st: &mut State, p_st: &mut State, n_st: &mut State, hdt: f64, pot: &Potential, star: &Potential| {
        let phi_u: Vec<f64> = u_st.u.values().iter().map(|&y| pot.phi(y)).collect();
        let phi_star_p: Vec<f64> = p_st.u.values().iter().map(|&y| star.phi(y)).collect();
        for j in 0..phi_u.len() {
            u_st.v.values_mut()[j] -= hdt * phi_u[j];
            p_st.v.values_mut()[j] -= hdt * phi_star_p[j];
            n_st.v.values_mut()[j] += hdt * (phi_star_p[j] - phi_u[j]);
        }
    };

    let mut tau = s;
    while tau < t - 1e-13 * (1.0 + t.abs()) {
        let step = dt.min(t - tau);
        half_kick(&mut u_state, &mut p_state, &mut n_state, 0.5 * step, p.pot, star.potential());
        u_state = dynamics::linear_propagate_exact(p.grid, &u_state, tau + step, p.h)?;
        p_state = dynamics::linear_propagate_exact(p.grid, &p_state, tau + step, p.h)?;
        n_state = dynamics::linear_propagate_exact(p.grid, &n_state, tau + step, p.h)?;
        half_kick(&mut u_state, &mut p_state, &mut n_state, 0.5 * step, p.pot, star.potential());
        tau += step;
        if !(u_state.is_finite() && p_state.is_finite() && n_state.is_finite()) {
            return Err(PullbackError::Dynamics(DynamicsError::NonFinite { t: tau }));
        }

        let sum = State::new(p_state.u.add(&n_state.u), p_state.v.add(&n_state.v), tau);
        recon_error = recon_error.max(energy_x(p.grid, &u_state.sub(&sum), p.q, p.h).sqrt());
        let e_p = energy_x(p.grid, &p_state, p.q, p.h);
        p_violation = p_violation.max(e_p - p_bound(tau));
        let ny = norm_yt(p.grid, &n_state, p.q, p.h);
        n_ratio_sup = n_ratio_sup.max(ny * ny / (1.0 + (p.q as f64 * p.h * tau).exp()));
    }
    let ny_end = norm_yt(p.grid, &n_state, p.q, p.h);
    Ok(DecompositionOutcome {
        s,
        recon_error,
        p_violation,
        n_ratio_end: ny_end * ny_end / (1.0 + (p.q as f64 * p.h * t).exp()),
        n_ratio_sup,
        e_p_end: energy_x(p.grid, &p_state, p.q, p.h),
    })
}

/// Run only the P-part (for the bitwise independence check).
pub fn p_part_alone(
    p: &Problem,
    s: f64,
    z: &State,
    t: f64,
    dt: f64,
) -> Result<State, PullbackError> {
    let star = star_potential(p.q)?;
    let mut p_state = State::new(z.u.clone(), z.v.clone(), s);
    let mut tau = s;
    while tau < t - 1e-13 * (1.0 + t.abs()) {
        let step = dt.min(t - tau);
        let phi_star: Vec<f64> = p_state.u.values().iter().map(|&y| star.potential().phi(y)).collect();
        for (v, f) in p_state.v.values_mut().iter_mut().zip(&phi_star) {
            *v -= 0.5 * step * f;
        }
        p_state = dynamics::linear_propagate_exact(p.grid, &p_state, tau + step, p.h)?;
        let phi_star: Vec<f64> = p_state.u.values().iter().map(|&y| star.potential().phi(y)).collect();
        for (v, f) in p_state.v.values_mut().iter_mut().zip(&phi_star) {
            *v -= 0.5 * step * f;
        }
        tau += step;
    }
    Ok(p_state)
}

/// A state reduced to its first M modes plus means, with the physical
/// reconstruction cached for L^q distances.
#[derive(Clone, Debug)]
pub struct TruncatedState {
    pub mean_u: f64,
    pub mean_v: f64,
    pub modes_u: Vec<Complex64>,
    pub modes_v: Vec<Complex64>,
    phys_u: Vec<f64>,
}

pub fn truncate_state(grid: &Grid, z: &State, m_modes: usize) -> TruncatedState {
    let su = grid.transform(&z.u);
    let sv = grid.transform(&z.v);
    let m = m_modes.min(grid.len() / 2 - 1);
    let mut tu = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut tv = vec![Complex64::new(0.0, 0.0); grid.len()];
    tu[0] = su.coeffs()[0];
    tv[0] = sv.coeffs()[0];
    for k in 1..=m {
        tu[k] = su.coeffs()[k];
        tu[grid.len() - k] = su.coeffs()[grid.len() - k];
        tv[k] = sv.coeffs()[k];
        tv[grid.len() - k] = sv.coeffs()[grid.len() - k];
    }
    let pu = grid.inverse(&crate::spectral::Spectrum::from_raw(tu.clone()));
    TruncatedState {
        mean_u: su.coeffs()[0].re,
        mean_v: sv.coeffs()[0].re,
        modes_u: tu[1..=m].to_vec(),
        modes_v: tv[1..=m].to_vec(),
        phys_u: pu.values().to_vec(),
    }
}

/// A cloud of truncated end-states carrying the metric parameters.
#[derive(Clone, Debug)]
pub struct DimensionCloud {
    pub points: Vec<TruncatedState>,
    pub q: u32,
    pub h: f64,
    pub t: f64,
}

impl DimensionCloud {
    /// E_{X_t}^{1/2} of the difference of two truncated states.
    pub fn distance(&self, a: &TruncatedState, b: &TruncatedState) -> f64 {
        let w = (-2.0 * self.h * self.t).exp();
        let mut h1 = 0.0;
        let mut l2u = (a.mean_u - b.mean_u).powi(2);
        let mut l2v = (a.mean_v - b.mean_v).powi(2);
        for (k, (ma, mb)) in a.modes_u.iter().zip(&b.modes_u).enumerate() {
            let d2 = (ma - mb).norm_sqr();
            let omega = 2.0 * std::f64::consts::PI * (k + 1) as f64;
            h1 += 2.0 * omega * omega * d2;
            l2u += 2.0 * d2;
        }
        for (ma, mb) in a.modes_v.iter().zip(&b.modes_v) {
            l2v += 2.0 * (ma - mb).norm_sqr();
        }
        let n = a.phys_u.len() as f64;
        let lq: f64 = a
            .phys_u
            .iter()
            .zip(&b.phys_u)
            .map(|(x, y)| (x - y).abs().powi(self.q as i32))
            .sum::<f64>()
            / n;
        (w * h1 + (2.0 / self.q as f64) * lq + l2u + l2v).sqrt()
    }

    fn sorted_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&i, &j| {
            let a = &self.points[i];
            let b = &self.points[j];
            let mut key_a = vec![a.mean_u, a.mean_v];
            let mut key_b = vec![b.mean_u, b.mean_v];
            for (ma, mb) in a.modes_u.iter().zip(&b.modes_u) {
                key_a.extend([ma.re, ma.im]);
                key_b.extend([mb.re, mb.im]);
            }
            for (ma, mb) in a.modes_v.iter().zip(&b.modes_v) {
                key_a.extend([ma.re, ma.im]);
                key_b.extend([mb.re, mb.im]);
            }
            key_a.partial_cmp(&key_b).unwrap_or(std::cmp::Ordering::Equal)
        });
        idx
    }

    /// Greedy ε-cover size over a canonical (permutation-invariant) ordering.
    pub fn cover_count(&self, eps: f64) -> usize {
        let order = self.sorted_order();
        let mut centers: Vec<usize> = Vec::new();
        for &i in &order {
            if centers.iter().all(|&c| self.distance(&self.points[i], &self.points[c]) > eps) {
                centers.push(i);
            }
        }
        centers.len()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                d = d.max(self.distance(&self.points[i], &self.points[j]));
            }
        }
        d
    }
}

/// Box-counting estimate: least-squares slope of log N_ε against log(1/ε)
/// over the scaling window (ε where the cover neither collapses to one ball
/// nor resolves every point).
#[derive(Clone, Debug)]
pub struct DimensionEstimate {
    pub dimension: f64,
    /// (ε, N_ε) for the full grid
    pub counts: Vec<(f64, usize)>,
    pub diameter: f64,
}

pub fn box_dimension_estimate(
    cloud: &DimensionCloud,
    eps_grid: &[f64],
) -> Result<DimensionEstimate, PullbackError> {
    if cloud.points.len() < 100 {
        return Err(PullbackError::TooFewPoints(cloud.points.len()));
    }
    let diameter = cloud.diameter();
    if diameter == 0.0 {
        // a single point: dimension zero by definition
        return Ok(DimensionEstimate {
            dimension: 0.0,
            counts: eps_grid.iter().map(|&e| (e, 1)).collect(),
            diameter,
        });
    }
    let eps_min = eps_grid.iter().cloned().fold(f64::MAX, f64::min);
    if diameter < 10.0 * eps_min {
        return Err(PullbackError::DegenerateCloud { diameter, eps_min });
    }
    let mut counts: Vec<(f64, usize)> =
        eps_grid.iter().map(|&e| (e, cloud.cover_count(e))).collect();
    counts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let n = cloud.points.len();
    let window: Vec<(f64, usize)> =
        counts.iter().cloned().filter(|&(_, c)| c > 1 && c < n).collect();
    if window.len() < 2 {
        // no resolvable scaling range: the cloud is flat at every probed scale
        return Ok(DimensionEstimate { dimension: 0.0, counts, diameter });
    }
    let xs: Vec<f64> = window.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|(_, c)| (*c as f64).ln()).collect();
    Ok(DimensionEstimate { dimension: ls_slope(&xs, &ys), counts, diameter })
}

/// Geometric ε grid from `top` down over `decades`, `per_decade` points each.
pub fn geometric_eps_grid(top: f64, decades: f64, per_decade: usize) -> Vec<f64> {
    let total = (decades * per_decade as f64).ceil() as usize;
    (0..=total).map(|i| top * 10f64.powf(-(i as f64) / per_decade as f64)).collect()
}

/// First recorded time at which the energy drops to `level` (absorber entry).
pub fn first_entry_time(
    p: &Problem,
    z: &State,
    t_final: f64,
    stepper: &StepperConfig,
    level: f64,
) -> Result<Option<f64>, PullbackError> {
    let mut entry = None;
    evolve(z, t_final, stepper, p, |zt| {
        if entry.is_none() && energy_x(p.grid, zt, p.q, p.h) <= level {
            entry = Some(zt.t);
        }
    })?;
    Ok(entry)
}
