//! Scalar functionals and density fields evaluated on states, plus discrete
//! residuals of the energy identity
//!
//! ```text
//!     d/dt [ϖ|A^{1/2}u|² + |v|² + 2𝒱(u)] + 2H [ϖ|A^{1/2}u|² + |v|²] = 0,
//! ```
//!
//! with ϖ(t) = e^{-2Ht} and 𝒱(u) = ∫ V(u) dx.

use crate::potential::{Potential, RateConstants};
use crate::spectral::{lq_norm_pow_q, norms, Field, Grid, State};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("localization metric undefined: mean energy density is not positive")]
    ZeroEnergy,
}

/// One row of trajectory diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// E_{X_t} = ϖ|A^{1/2}u|² + (2/q)‖u‖_q^q + |u|² + |v|²
    pub e_xt: f64,
    /// E = ϖ|A^{1/2}u|² + |v|²
    pub e_mech: f64,
    /// 𝒱(u) = ∫ V(u) dx
    pub v_total: f64,
    /// Φ = E + 2𝒱
    pub phi: f64,
    /// Λ₁ = Φ + ν (H|u|² + 2⟨v,u⟩)
    pub lambda1: f64,
    /// ∫ ℋ dx with π = e^{Ht} ∂t u
    pub ham_total: f64,
    /// |v|²
    pub v_l2_sq: f64,
    /// |ΔΦ/Δt + 2H·E(mid)| against the previous recorded row (0 on the first)
    pub identity_residual: f64,
}

/// Integral of V(u) by collocation quadrature.
pub fn v_total(u: &Field, pot: &Potential) -> f64 {
    let n = u.len() as f64;
    u.values().iter().map(|&y| pot.v(y)).sum::<f64>() / n
}

/// All scalar diagnostics of one state (identity_residual = 0; the recorder
/// fills it from consecutive rows).
pub fn row(grid: &Grid, z: &State, consts: &RateConstants, pot: &Potential) -> DiagnosticsRow {
    let nu_norms = norms(grid, &z.u, consts.q);
    let w = (-2.0 * consts.h * z.t).exp();
    let usq = nu_norms.l2.powi(2);
    let vsq = z.v.inner(&z.v);
    let e_mech = w * nu_norms.h1_semi.powi(2) + vsq;
    let vt = v_total(&z.u, pot);
    let phi = e_mech + 2.0 * vt;
    let cross = z.v.inner(&z.u);
    let lambda1 = phi + consts.nu * (consts.h * usq + 2.0 * cross);
    let e_xt = w * nu_norms.h1_semi.powi(2)
        + (2.0 / consts.q as f64) * lq_norm_pow_q(&z.u, consts.q)
        + usq
        + vsq;
    let ham_total = hamiltonian_total(grid, z, pot, consts.h, MomentumConvention::TimeDerivative);
    DiagnosticsRow {
        t: z.t,
        e_xt,
        e_mech,
        v_total: vt,
        phi,
        lambda1,
        ham_total,
        v_l2_sq: vsq,
        identity_residual: 0.0,
    }
}

/// Which canonical momentum to use in the Hamiltonian density.
///
/// The canonical equation u̇ = ∂ℋ/∂π forces π = e^{Ht} ∂t u; the literal
/// π = e^{Ht} u variant is kept for comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentumConvention {
    TimeDerivative,
    FieldLiteral,
}

/// ∫ ℋ dx where ℋ = ½e^{-Ht}[(∂x u)² + π²] + e^{Ht} V(u).
/// With π = e^{Ht} v this is ½e^{-Ht}|A^{1/2}u|² + ½e^{Ht}|v|² + e^{Ht}𝒱(u).
pub fn hamiltonian_total(
    grid: &Grid,
    z: &State,
    pot: &Potential,
    h: f64,
    convention: MomentumConvention,
) -> f64 {
    let n = norms(grid, &z.u, 2);
    let eneg = (-h * z.t).exp();
    let epos = (h * z.t).exp();
    let pi_sq = match convention {
        MomentumConvention::TimeDerivative => epos * epos * z.v.inner(&z.v),
        MomentumConvention::FieldLiteral => epos * epos * z.u.inner(&z.u),
    };
    0.5 * eneg * (n.h1_semi.powi(2) + pi_sq) + epos * v_total(&z.u, pot)
}

/// Per-node energy density e(x) = ½e^{-2Ht}(∂x u)² + ½v² + V(u); its integral
/// is ½E_mech + 𝒱.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyDensityFrame {
    pub t: f64,
    pub density: Vec<f64>,
}

pub fn energy_density(grid: &Grid, z: &State, pot: &Potential, h: f64) -> EnergyDensityFrame {
    // spectral derivative: ∂x has symbol iω; |∂x u| pointwise from A^{1/2}
    // would lose the sign, so go through the derivative directly
    let spec = grid.transform(&z.u);
    let mut ds = spec.clone();
    for (bin, c) in ds.coeffs_mut().iter_mut().enumerate() {
        let w = grid.omega(bin);
        *c = rustfft::num_complex::Complex64::new(-w * c.im, w * c.re);
    }
    let ux = grid.inverse(&ds);
    let w2 = (-2.0 * h * z.t).exp();
    let density = (0..z.u.len())
        .map(|j| {
            0.5 * w2 * ux.values()[j].powi(2)
                + 0.5 * z.v.values()[j].powi(2)
                + pot.v(z.u.values()[j])
        })
        .collect();
    EnergyDensityFrame { t: z.t, density }
}

/// max/mean of the energy density; 1 iff uniform.
pub fn localization_metric(frame: &EnergyDensityFrame) -> Result<f64, DiagnosticsError> {
    let n = frame.density.len() as f64;
    let mean = frame.density.iter().sum::<f64>() / n;
    if !(mean > 0.0) {
        return Err(DiagnosticsError::ZeroEnergy);
    }
    let max = frame.density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(max / mean)
}

/// Discrete residual of the energy identity across two recorded rows:
/// |ΔΦ/Δt + 2H·(E_prev+E_next)/2|; vanishes at the integrator's order.
pub fn identity_residual(prev: &DiagnosticsRow, next: &DiagnosticsRow, h: f64) -> f64 {
    let dt = next.t - prev.t;
    if dt == 0.0 {
        return 0.0;
    }
    ((next.phi - prev.phi) / dt + 2.0 * h * 0.5 * (prev.e_mech + next.e_mech)).abs()
}

/// Time series of diagnostics plus optional energy-density snapshots.
#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecord {
    pub rows: Vec<DiagnosticsRow>,
    pub frames: Vec<EnergyDensityFrame>,
}

/// Observer that assembles a `TrajectoryRecord` from accepted steps.
pub struct Recorder<'a> {
    grid: &'a Grid,
    pot: &'a Potential,
    consts: RateConstants,
    /// record a density frame every `snapshot_stride` accepted steps (0: never)
    pub snapshot_stride: usize,
    steps_seen: usize,
    pub record: TrajectoryRecord,
}

impl<'a> Recorder<'a> {
    pub fn new(grid: &'a Grid, pot: &'a Potential, consts: RateConstants, snapshot_stride: usize) -> Self {
        Recorder { grid, pot, consts, snapshot_stride, steps_seen: 0, record: TrajectoryRecord::default() }
    }

    pub fn observe(&mut self, z: &State) {
        let mut r = row(self.grid, z, &self.consts, self.pot);
        if let Some(prev) = self.record.rows.last() {
            r.identity_residual = identity_residual(prev, &r, self.consts.h);
        }
        self.record.rows.push(r);
        self.steps_seen += 1;
        if self.snapshot_stride > 0 && self.steps_seen % self.snapshot_stride == 0 {
            self.record.frames.push(energy_density(self.grid, z, self.pot, self.consts.h));
        }
    }

    pub fn into_record(self) -> TrajectoryRecord {
        self.record
    }
}

/// ∫ e(x) dx cross-check helper (used in tests and the CSV writer).
pub fn density_integral(frame: &EnergyDensityFrame) -> f64 {
    frame.density.iter().sum::<f64>() / frame.density.len() as f64
}
