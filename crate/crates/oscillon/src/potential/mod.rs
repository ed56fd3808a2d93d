//! Polynomial potentials, exact verification of their growth hypotheses, and
//! closed-form derivation of every constant used by the dissipative estimates.
//!
//! A potential is V(y) = Σ_{j=2..d} c_j y^j with no constant or linear term,
//! even degree and positive leading coefficient, so that φ = V′ vanishes at 0
//! and the two-sided growth bound
//!
//! ```text
//!     a0 |y|^{q-2} - a1  <=  φ′(y)  <=  a2 |y|^{q-2} + a3
//! ```
//!
//! is decidable exactly (q even makes every constraint a polynomial
//! nonnegativity question, settled by Sturm sequences in `exact`).

pub mod exact;

use exact::{Domain, QPoly};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("growth exponent q must be even for exact checking (got {0})")]
    OddQ(u32),
    #[error("degree mismatch: deg phi' = {found}, certificate requires q-2 = {expected}")]
    DegreeMismatch { found: usize, expected: usize },
    #[error("certificate failed verification; derive_constants needs a verified certificate")]
    UncertifiedInput,
    #[error("unknown builtin potential '{0}'")]
    UnknownName(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

/// Which function of the potential family to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialPart {
    V,
    Phi,
    PhiPrime,
    PhiSecond,
}

/// Polynomial potential V(y) = Σ c_j y^j, j = 1..d, with c_1 = 0.
///
/// The zero potential (linear wave equation) is admitted as a flagged special
/// case; it skips certification.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    /// c_1..c_d, ascending powers starting at y^1.
    coeffs: Vec<f64>,
    /// φ = V′ coefficients, ascending from y^0.
    phi: Vec<f64>,
    /// φ′ coefficients.
    phi_prime: Vec<f64>,
    /// φ″ coefficients.
    phi_second: Vec<f64>,
}

fn differentiate(coeffs_from_pow1: &[f64]) -> Vec<f64> {
    // input c_1..c_d multiplies y^1..y^d; output ascending from y^0
    coeffs_from_pow1
        .iter()
        .enumerate()
        .map(|(i, c)| c * (i as f64 + 1.0))
        .collect()
}

fn differentiate0(coeffs_from_pow0: &[f64]) -> Vec<f64> {
    if coeffs_from_pow0.len() <= 1 {
        return vec![0.0];
    }
    coeffs_from_pow0
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

fn horner(coeffs_from_pow0: &[f64], y: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs_from_pow0.iter().rev() {
        acc = acc * y + c;
    }
    acc
}

impl Potential {
    /// Build from the coefficients c_1..c_d of y^1..y^d.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, PotentialError> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(PotentialError::InvalidPotential("non-finite coefficient".into()));
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Ok(Self::zero());
        }
        let d = coeffs.len();
        let lead = coeffs[d - 1];
        if lead <= 0.0 {
            return Err(PotentialError::InvalidPotential(
                "leading coefficient must be positive".into(),
            ));
        }
        if d % 2 != 0 || d < 2 {
            return Err(PotentialError::InvalidPotential(
                "degree must be even and at least 2".into(),
            ));
        }
        if coeffs[0] != 0.0 {
            return Err(PotentialError::InvalidPotential(
                "linear term must vanish so that phi(0) = 0".into(),
            ));
        }
        let phi = differentiate(&coeffs);
        let phi_prime = differentiate0(&phi);
        let phi_second = differentiate0(&phi_prime);
        Ok(Potential { coeffs, phi, phi_prime, phi_second })
    }

    /// The zero potential (V = 0): the linear wave equation.
    pub fn zero() -> Self {
        Potential { coeffs: vec![], phi: vec![0.0], phi_prime: vec![0.0], phi_second: vec![0.0] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients of y^1..y^d.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, part: PotentialPart, y: f64) -> f64 {
        match part {
            PotentialPart::V => y * horner(&self.coeffs, y),
            PotentialPart::Phi => horner(&self.phi, y),
            PotentialPart::PhiPrime => horner(&self.phi_prime, y),
            PotentialPart::PhiSecond => horner(&self.phi_second, y),
        }
    }

    /// φ(y); the hot path of the solver.
    #[inline]
    pub fn phi(&self, y: f64) -> f64 {
        horner(&self.phi, y)
    }

    /// V(y).
    #[inline]
    pub fn v(&self, y: f64) -> f64 {
        y * horner(&self.coeffs, y)
    }

    fn phi_prime_qpoly(&self) -> QPoly {
        QPoly::from_f64_coeffs(&self.phi_prime).expect("finite coefficients")
    }

    fn phi_second_qpoly(&self) -> QPoly {
        QPoly::from_f64_coeffs(&self.phi_second).expect("finite coefficients")
    }
}

/// Certificate for hypotheses (H0)/(H1) and the second-derivative bound:
/// a0|y|^{q-2} - a1 <= φ′(y) <= a2|y|^{q-2} + a3 and
/// |φ″(y)| <= phisecond_c (1 + |y|^θ), θ = max(q-3, 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthCertificate {
    pub q: u32,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub theta: u32,
    pub phisecond_c: f64,
}

impl GrowthCertificate {
    pub fn new(q: u32, a0: f64, a1: f64, a2: f64, a3: f64, phisecond_c: f64) -> Result<Self, PotentialError> {
        if q < 2 {
            return Err(PotentialError::InvalidCertificate("q must be >= 2".into()));
        }
        if !(a0 > 0.0 && a2 > 0.0) {
            return Err(PotentialError::InvalidCertificate("a0 and a2 must be positive".into()));
        }
        if !(a1 >= 0.0 && a3 >= 0.0) {
            return Err(PotentialError::InvalidCertificate("a1 and a3 must be nonnegative".into()));
        }
        if q == 2 && !(a0 > a1) {
            return Err(PotentialError::InvalidCertificate(
                "sublinear case q = 2 requires a0 > a1".into(),
            ));
        }
        if !(phisecond_c > 0.0) {
            return Err(PotentialError::InvalidCertificate("phisecond_c must be positive".into()));
        }
        Ok(GrowthCertificate { q, a0, a1, a2, a3, theta: q.saturating_sub(3), phisecond_c })
    }
}

/// Result of an exact growth check.
#[derive(Clone, Debug, PartialEq)]
pub enum GrowthVerdict {
    Valid,
    /// `witness` violates `bound`; the residual polynomial is negative there.
    Invalid { witness: f64, bound: ViolatedBound },
}

impl GrowthVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, GrowthVerdict::Valid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolatedBound {
    Lower,
    Upper,
    SecondDerivative,
}

impl std::fmt::Display for ViolatedBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ViolatedBound::Lower => write!(f, "lower bound a0|y|^(q-2) - a1 <= phi'(y)"),
            ViolatedBound::Upper => write!(f, "upper bound phi'(y) <= a2|y|^(q-2) + a3"),
            ViolatedBound::SecondDerivative => {
                write!(f, "second-derivative bound |phi''(y)| <= c(1 + |y|^theta)")
            }
        }
    }
}

/// Monomial a*y^k as a QPoly.
fn monomial(a: f64, k: usize) -> QPoly {
    let mut coeffs = vec![0.0; k + 1];
    coeffs[k] = a;
    QPoly::from_f64_coeffs(&coeffs).expect("finite")
}

/// Exact verification of the growth certificate against a potential.
///
/// All three two-sided bounds are decided for every real y by Sturm-sequence
/// nonnegativity tests on the f64-exact difference polynomials. q must be
/// even (so |y|^{q-2} is a polynomial) and deg φ′ must equal q-2.
pub fn verify_growth(
    pot: &Potential,
    cert: &GrowthCertificate,
) -> Result<GrowthVerdict, PotentialError> {
    if cert.q % 2 != 0 {
        return Err(PotentialError::OddQ(cert.q));
    }
    if pot.is_zero() {
        return Err(PotentialError::InvalidPotential(
            "the zero potential carries no growth certificate".into(),
        ));
    }
    let phi_prime = pot.phi_prime_qpoly();
    let expected = (cert.q - 2) as usize;
    if phi_prime.degree() != expected {
        return Err(PotentialError::DegreeMismatch { found: phi_prime.degree(), expected });
    }

    // lower: phi'(y) - a0 y^{q-2} + a1 >= 0 on R
    let lower = phi_prime.sub(&monomial(cert.a0, expected)).add(&monomial(cert.a1, 0));
    if let Err(w) = exact::verify_nonnegative(&lower, Domain::Line) {
        return Ok(GrowthVerdict::Invalid { witness: w, bound: ViolatedBound::Lower });
    }
    // upper: a2 y^{q-2} + a3 - phi'(y) >= 0 on R
    let upper = monomial(cert.a2, expected).add(&monomial(cert.a3, 0)).sub(&phi_prime);
    if let Err(w) = exact::verify_nonnegative(&upper, Domain::Line) {
        return Ok(GrowthVerdict::Invalid { witness: w, bound: ViolatedBound::Upper });
    }
    // |phi''| <= c (1 + |y|^theta): four half-line checks
    // (c(1+y^theta) -/+ phi''(+/-y) >= 0 on [0, inf))
    let envelope = monomial(cert.phisecond_c, 0).add(&monomial(cert.phisecond_c, cert.theta as usize));
    let phi_second = pot.phi_second_qpoly();
    let cases: [(QPoly, f64); 4] = [
        (envelope.sub(&phi_second), 1.0),
        (envelope.add(&phi_second), 1.0),
        (envelope.sub(&phi_second.reflect()), -1.0),
        (envelope.add(&phi_second.reflect()), -1.0),
    ];
    for (p, orient) in cases {
        if let Err(w) = exact::verify_nonnegative(&p, Domain::HalfLine) {
            return Ok(GrowthVerdict::Invalid {
                witness: orient * w,
                bound: ViolatedBound::SecondDerivative,
            });
        }
    }
    Ok(GrowthVerdict::Valid)
}

/// A potential together with a certificate that passed [`verify_growth`].
#[derive(Clone, Debug)]
pub struct CertifiedPotential {
    potential: Potential,
    certificate: GrowthCertificate,
}

impl CertifiedPotential {
    pub fn new(potential: Potential, certificate: GrowthCertificate) -> Result<Self, PotentialError> {
        match verify_growth(&potential, &certificate)? {
            GrowthVerdict::Valid => Ok(CertifiedPotential { potential, certificate }),
            GrowthVerdict::Invalid { .. } => Err(PotentialError::UncertifiedInput),
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn certificate(&self) -> &GrowthCertificate {
        &self.certificate
    }

    pub fn q(&self) -> u32 {
        self.certificate.q
    }
}

/// All constants of the dissipative estimates, derived from a certificate and
/// the damping coefficient H.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateConstants {
    pub h: f64,
    pub q: u32,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub nu: f64,
    pub mu: f64,
    pub sigma: f64,
    pub k0: f64,
    pub k1: f64,
    /// absorber radius R_A = 1 + 2 K1
    pub r_absorb: f64,
}

/// max over y >= 0 of (p2/2) y^2 - pq y^q, via its unique positive critical
/// point y* = (p2 / (q pq))^{1/(q-2)}; the derivative has exactly one positive
/// root, so this closed form is the exact maximizer.
fn one_d_max(p2: f64, pq: f64, q: u32) -> f64 {
    if p2 <= 0.0 {
        return 0.0;
    }
    let qf = q as f64;
    let ystar = (p2 / (qf * pq)).powf(1.0 / (qf - 2.0));
    0.5 * p2 * ystar * ystar - pq * ystar.powi(q as i32)
}

/// Derive every rate constant from a verified certificate.
///
/// Closed forms:
///   c0 = max_{y>=0} [(a1/2) y^2 - (a0/q) y^q]          (0 when a1 = 0, and for q = 2)
///   b0 = a0 / (2 q (q-1))                              ((a0-a1)/4 for q = 2)
///   b1 = max_{y>=0} [(a1/2 + b0) y^2 - b0 y^q]         (0 when a1 = 0; 0 for q = 2)
///   b2 = a2/(q(q-1)) + a3/2                            ((a2+a3)/4 for q = 2)
///   c1 = min(q b0, 1) / 2
///   c2 = max(1 + nu, q b2, 2 b2 + nu (H+1))
///   2 mu = nu = min(1, H/4, c1/(4H+4));  sigma = q/2 - 1
///   K0 = c2/c1;  K1 = 4 (c0 + b1)/c1;  R_A = 1 + 2 K1
pub fn derive_constants(cert: &GrowthCertificate, h: f64) -> Result<RateConstants, PotentialError> {
    if !(h > 0.0) {
        return Err(PotentialError::InvalidCertificate("H must be positive".into()));
    }
    let q = cert.q;
    let qf = q as f64;
    let (c0, b0, b1, b2) = if q == 2 {
        (0.0, (cert.a0 - cert.a1) / 4.0, 0.0, (cert.a2 + cert.a3) / 4.0)
    } else {
        let c0 = if cert.a1 == 0.0 { 0.0 } else { one_d_max(cert.a1, cert.a0 / qf, q) };
        let b0 = cert.a0 / (2.0 * qf * (qf - 1.0));
        let b1 = if cert.a1 == 0.0 { 0.0 } else { one_d_max(cert.a1 + 2.0 * b0, b0, q) };
        let b2 = cert.a2 / (qf * (qf - 1.0)) + cert.a3 / 2.0;
        (c0, b0, b1, b2)
    };
    let c1 = (qf * b0).min(1.0) / 2.0;
    let nu = 1.0_f64.min(h / 4.0).min(c1 / (4.0 * h + 4.0));
    let mu = nu / 2.0;
    let c2 = (1.0 + nu).max(qf * b2).max(2.0 * b2 + nu * (h + 1.0));
    let k0 = c2 / c1;
    let k1 = 4.0 * (c0 + b1) / c1;
    Ok(RateConstants {
        h,
        q,
        b0,
        b1,
        b2,
        c0,
        c1,
        c2,
        nu,
        mu,
        sigma: qf / 2.0 - 1.0,
        k0,
        k1,
        r_absorb: 1.0 + 2.0 * k1,
    })
}

/// Best-effort search for a certificate of `pot` at exponent `q`, scanning a
/// coarse grid and exact-verifying each candidate. The bounds are anchored at
/// the leading coefficient of φ′ and widened until the Sturm check passes.
pub fn search_certificate(pot: &Potential, q: u32) -> Option<GrowthCertificate> {
    if pot.is_zero() || q % 2 != 0 {
        return None;
    }
    let lead = *pot.phi_prime.last()?;
    if lead <= 0.0 {
        return None;
    }
    let a1_grid: Vec<f64> =
        std::iter::once(0.0).chain((0..40).map(|i| 0.125 * (i as f64 + 1.0))).collect();
    let a3_grid: Vec<f64> = (0..40).map(|i| 0.25 * (i as f64 + 1.0)).collect();
    let mut found_lower = None;
    'lower: for &a0 in &[lead / 2.0, lead / 4.0, lead] {
        for &a1 in &a1_grid {
            if let Ok(c) = GrowthCertificate::new(q, a0, a1, 1.0, 0.0, 1.0) {
                let phi_prime = pot.phi_prime_qpoly();
                let expected = (q - 2) as usize;
                if phi_prime.degree() != expected {
                    return None;
                }
                let lower = phi_prime.sub(&monomial(c.a0, expected)).add(&monomial(c.a1, 0));
                if exact::verify_nonnegative(&lower, Domain::Line).is_ok() {
                    found_lower = Some((a0, a1));
                    break 'lower;
                }
            }
        }
    }
    let (a0, a1) = found_lower?;
    let mut found_upper = None;
    'upper: for mult in [1.0, 1.5, 2.0, 3.0] {
        let a2 = lead * mult;
        for &a3 in &a3_grid {
            let phi_prime = pot.phi_prime_qpoly();
            let expected = (q - 2) as usize;
            let upper = monomial(a2, expected).add(&monomial(a3, 0)).sub(&phi_prime);
            if exact::verify_nonnegative(&upper, Domain::Line).is_ok() {
                found_upper = Some((a2, a3));
                break 'upper;
            }
        }
    }
    let (a2, a3) = found_upper?;
    // widen the second-derivative constant until the four half-line checks pass
    let mut c = 1.0;
    for _ in 0..60 {
        let cand = GrowthCertificate::new(q, a0, a1, a2, a3, c).ok()?;
        if let Ok(GrowthVerdict::Valid) = verify_growth(pot, &cand) {
            return Some(cand);
        }
        c *= 2.0;
    }
    None
}

/// Builtin potential names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinName {
    Vplus,
    Vminus,
    ValphaPlus,
    ValphaMinus,
    Vzero,
}

impl std::str::FromStr for BuiltinName {
    type Err = PotentialError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Vplus" | "vplus" => Ok(BuiltinName::Vplus),
            "Vminus" | "vminus" => Ok(BuiltinName::Vminus),
            "Valpha_plus" | "valpha_plus" => Ok(BuiltinName::ValphaPlus),
            "Valpha_minus" | "valpha_minus" => Ok(BuiltinName::ValphaMinus),
            "Vzero" | "vzero" => Ok(BuiltinName::Vzero),
            other => Err(PotentialError::UnknownName(other.to_string())),
        }
    }
}

/// A builtin potential, its default certificate when one is known, and any
/// advisory notes raised during construction.
#[derive(Clone, Debug)]
pub struct BuiltinPotential {
    pub potential: Potential,
    pub certificate: Option<GrowthCertificate>,
    /// true for the zero potential (no certification applies)
    pub linear: bool,
    pub warnings: Vec<String>,
}

/// Construct one of the named potentials.
///
/// Vplus / Vminus are V±(y) = y²/2 ± y⁴/4 + y⁶/6. The shipped certificates are
/// (6, 5, 0, 9, 2) and (6, 1, 0, 5, 1): both verified exactly. (For φ₊ the
/// upper pair (9, 2) follows from 3y² < 1 + 4y⁴; smaller a₂ fails the exact
/// check.) Valpha variants use V_{α±}(y) = y²/2 ± y⁴/4 + (α/6) y⁶ with the
/// certificate found by `search_certificate`. Vzero is the linear case.
pub fn builtin(name: BuiltinName, alpha: Option<f64>) -> Result<BuiltinPotential, PotentialError> {
    let mk = |coeffs: Vec<f64>| Potential::new(coeffs);
    match name {
        BuiltinName::Vplus => {
            let pot = mk(vec![0.0, 0.5, 0.0, 0.25, 0.0, 1.0 / 6.0])?;
            let cert = GrowthCertificate::new(6, 5.0, 0.0, 9.0, 2.0, 21.0)?;
            debug_assert!(verify_growth(&pot, &cert)?.is_valid());
            Ok(BuiltinPotential { potential: pot, certificate: Some(cert), linear: false, warnings: vec![] })
        }
        BuiltinName::Vminus => {
            let pot = mk(vec![0.0, 0.5, 0.0, -0.25, 0.0, 1.0 / 6.0])?;
            let cert = GrowthCertificate::new(6, 1.0, 0.0, 5.0, 1.0, 21.0)?;
            debug_assert!(verify_growth(&pot, &cert)?.is_valid());
            Ok(BuiltinPotential { potential: pot, certificate: Some(cert), linear: false, warnings: vec![] })
        }
        BuiltinName::ValphaPlus | BuiltinName::ValphaMinus => {
            let a = alpha.ok_or_else(|| {
                PotentialError::InvalidPotential("Valpha potentials require alpha".into())
            })?;
            if !(a > 0.0) {
                return Err(PotentialError::InvalidPotential("alpha must be positive".into()));
            }
            let mut warnings = Vec::new();
            if !(0.25 < a && a < 0.45) {
                warnings.push(format!(
                    "alpha = {a} is outside the reference range (1/4, 9/20); growth hypotheses may still hold but the flat-potential regime is different"
                ));
            }
            let quartic = if matches!(name, BuiltinName::ValphaPlus) { 0.25 } else { -0.25 };
            let pot = mk(vec![0.0, 0.5, 0.0, quartic, 0.0, a / 6.0])?;
            let certificate = search_certificate(&pot, 6);
            if certificate.is_none() {
                warnings.push("certificate search failed; supply one manually".into());
            }
            Ok(BuiltinPotential { potential: pot, certificate, linear: false, warnings })
        }
        BuiltinName::Vzero => Ok(BuiltinPotential {
            potential: Potential::zero(),
            certificate: None,
            linear: true,
            warnings: vec![],
        }),
    }
}
