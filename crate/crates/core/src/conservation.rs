//! Conserved quantities, the covariant phase-space calculus, and the
//! constraint ladder for polynomial constants of the motion.
//!
//! The covariant phase-space derivative is
//!
//! ```text
//! D_i f = d_i f - eps_{abc} Q^a A_i^b df/dQ^c
//!       = d_i f - (Q x A_i) . grad_Q f
//! ```
//!
//! and the covariant Poisson bracket is
//!
//! ```text
//! {f, g} = D_j f dg/dpi_j - df/dpi_j D_j g
//!        + Q^a F^a_{jk} df/dpi_j dg/dpi_k
//!        - eps_{abc} df/dQ^a dg/dQ^b Q^c
//! ```
//!
//! A candidate constant of the motion expanded in powers of the covariant
//! momentum, q = C + C_i pi_i + (1/2!) C_ij pi_i pi_j + ..., commutes with
//! H = pi^2/2 + V exactly when the coefficient functions satisfy a ladder of
//! constraints, one per polynomial order; the series may be truncated at a
//! coefficient whose symmetrized covariant derivative vanishes (a Killing
//! vector or Killing tensor). `van_holten_check` evaluates every ladder
//! equation by central finite differences at a set of phase-space samples.
//!
//! All derivatives here are finite differences (step 1e-5) so that ansatz
//! coefficients and potentials stay user-definable as black-box maps.

use crate::dynamics::{ParticleState, Trajectory};
use crate::fields::{FieldError, GaugeFieldConfig, ScalarPotentialConfig};
use crate::par::{par_map, par_max_by};
use crate::su2::AlgebraElement;
use crate::vec3::{Mat3, Vec3};
use serde::{Deserialize, Serialize};

/// Central finite-difference step for all phase-space derivatives.
pub const FD_STEP: f64 = 1e-5;

/// Denominator guard for relative drifts of quantities that start near zero.
pub const DRIFT_DENOMINATOR_FLOOR: f64 = 1e-12;

// ---------------------------------------------------------------------------
// covariant phase-space calculus
// ---------------------------------------------------------------------------

fn grad_position(f: &dyn Fn(&ParticleState) -> f64, s: &ParticleState) -> Vec3 {
    let mut g = Vec3::ZERO;
    for i in 0..3 {
        let mut plus = *s;
        let mut minus = *s;
        plus.position[i] += FD_STEP;
        minus.position[i] -= FD_STEP;
        g[i] = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
    }
    g
}

fn grad_momentum(f: &dyn Fn(&ParticleState) -> f64, s: &ParticleState) -> Vec3 {
    let mut g = Vec3::ZERO;
    for i in 0..3 {
        let mut plus = *s;
        let mut minus = *s;
        plus.momentum[i] += FD_STEP;
        minus.momentum[i] -= FD_STEP;
        g[i] = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
    }
    g
}

fn grad_isospin(f: &dyn Fn(&ParticleState) -> f64, s: &ParticleState) -> Vec3 {
    let mut g = Vec3::ZERO;
    for i in 0..3 {
        let mut plus = *s;
        let mut minus = *s;
        plus.isospin.0[i] += FD_STEP;
        minus.isospin.0[i] -= FD_STEP;
        g[i] = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
    }
    g
}

/// Covariant phase-space derivative D_i f at a state.
pub fn phase_derivative(
    f: &dyn Fn(&ParticleState) -> f64,
    s: &ParticleState,
    field: &GaugeFieldConfig,
) -> Result<Vec3, FieldError> {
    let a = field.potential_at(s.position)?;
    let gx = grad_position(f, s);
    let gq = grad_isospin(f, s);
    let mut d = Vec3::ZERO;
    for i in 0..3 {
        d[i] = gx[i] - s.isospin.0.cross(a[i].0).dot(gq);
    }
    Ok(d)
}

/// Covariant Poisson bracket {f, g} at a state.
pub fn poisson_bracket(
    f: &dyn Fn(&ParticleState) -> f64,
    g: &dyn Fn(&ParticleState) -> f64,
    s: &ParticleState,
    field: &GaugeFieldConfig,
) -> Result<f64, FieldError> {
    let strength = field.field_strength_at(s.position)?;
    let df = phase_derivative(f, s, field)?;
    let dg = phase_derivative(g, s, field)?;
    let fp = grad_momentum(f, s);
    let gp = grad_momentum(g, s);
    let fq = grad_isospin(f, s);
    let gq = grad_isospin(g, s);

    let mut out = df.dot(gp) - fp.dot(dg);
    for j in 0..3 {
        for k in 0..3 {
            out += strength[j][k].inner(s.isospin) * fp[j] * gp[k];
        }
    }
    out -= fq.cross(gq).dot(s.isospin.0);
    Ok(out)
}

/// The Hamiltonian H = pi^2/2 + V(r) as a phase function.
pub fn hamiltonian(
    potential: Option<ScalarPotentialConfig>,
) -> impl Fn(&ParticleState) -> f64 + Sync + Send {
    move |s: &ParticleState| {
        let mut h = 0.5 * s.momentum.norm_sq();
        if let Some(v) = potential {
            h += v.value(s.position.norm()).unwrap_or(f64::NAN);
        }
        h
    }
}

/// Max over interior samples of |{f, H} - df/dt| along a trajectory, tying
/// the bracket algebra to the integrated flow. df/dt uses the same stencils
/// as the transport residuals.
pub fn bracket_matches_flow(
    f: &(dyn Fn(&ParticleState) -> f64 + Sync),
    traj: &Trajectory,
    stride: usize,
) -> Result<f64, FieldError> {
    let h_fn = hamiltonian(traj.potential);
    let samples = &traj.samples;
    let n = samples.len();
    let mut worst = 0.0f64;
    if n < 5 {
        return Ok(worst);
    }
    let stride = stride.max(1);
    if let Some(h) = traj.uniform_step() {
        let mut i = 2;
        while i < n - 2 {
            let fdot = (f(&samples[i - 2]) - f(&samples[i + 2])
                + 8.0 * (f(&samples[i + 1]) - f(&samples[i - 1])))
                / (12.0 * h);
            let pb = poisson_bracket(f, &h_fn, &samples[i], &traj.field)?;
            worst = worst.max((pb - fdot).abs());
            i += stride;
        }
    } else {
        let mut i = 1;
        while i < n - 1 {
            let hp = samples[i + 1].t - samples[i].t;
            let hm = samples[i].t - samples[i - 1].t;
            let fdot = f(&samples[i - 1]) * (-hp / (hm * (hm + hp)))
                + f(&samples[i]) * ((hp - hm) / (hp * hm))
                + f(&samples[i + 1]) * (hm / (hp * (hm + hp)));
            let pb = poisson_bracket(f, &h_fn, &samples[i], &traj.field)?;
            worst = worst.max((pb - fdot).abs());
            i += stride;
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// standard conserved set and drift reports
// ---------------------------------------------------------------------------

/// The quantities tracked on every run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardQuantity {
    /// |Q|^2, conserved in every configuration.
    IsospinNorm2,
    /// q = Q . xhat, the isospin projected on the hedgehog direction.
    RadialCharge,
    /// H = pi^2/2 + V.
    Energy,
    /// J = x cross pi - q xhat, with the radial spin-from-isospin term.
    JWuYang,
    /// K = pi cross J + alpha xhat.
    RungeLenz,
    /// J = x cross pi - Psi with Psi = q xhat + kappa (Q - q xhat).
    JDiatomic,
    /// J = x cross p - Q with the canonical momentum p = pi + A . Q.
    JCanonical,
}

impl StandardQuantity {
    pub fn all() -> [StandardQuantity; 7] {
        [
            StandardQuantity::IsospinNorm2,
            StandardQuantity::RadialCharge,
            StandardQuantity::Energy,
            StandardQuantity::JWuYang,
            StandardQuantity::RungeLenz,
            StandardQuantity::JDiatomic,
            StandardQuantity::JCanonical,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            StandardQuantity::IsospinNorm2 => "isospin_norm2",
            StandardQuantity::RadialCharge => "radial_charge",
            StandardQuantity::Energy => "energy",
            StandardQuantity::JWuYang => "j_wu_yang",
            StandardQuantity::RungeLenz => "runge_lenz",
            StandardQuantity::JDiatomic => "j_diatomic",
            StandardQuantity::JCanonical => "j_canonical",
        }
    }
}

/// Scalar or 3-vector value of a tracked quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantityValue {
    Scalar(f64),
    Vector(Vec3),
}

impl QuantityValue {
    pub fn distance(&self, other: &QuantityValue) -> f64 {
        match (self, other) {
            (QuantityValue::Scalar(a), QuantityValue::Scalar(b)) => (a - b).abs(),
            (QuantityValue::Vector(a), QuantityValue::Vector(b)) => (*a - *b).norm(),
            _ => f64::NAN,
        }
    }

    pub fn magnitude(&self) -> f64 {
        match self {
            QuantityValue::Scalar(a) => a.abs(),
            QuantityValue::Vector(a) => a.norm(),
        }
    }
}

/// Evaluate one standard quantity at one state.
pub fn evaluate_quantity(
    quantity: StandardQuantity,
    s: &ParticleState,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
) -> Result<QuantityValue, FieldError> {
    let x = s.position;
    let xhat = x.normalized();
    let q = s.isospin.0.dot(xhat);
    Ok(match quantity {
        StandardQuantity::IsospinNorm2 => QuantityValue::Scalar(s.isospin.norm_sq()),
        StandardQuantity::RadialCharge => QuantityValue::Scalar(q),
        StandardQuantity::Energy => {
            let mut h = 0.5 * s.momentum.norm_sq();
            if let Some(v) = potential {
                h += v.value(x.norm())?;
            }
            QuantityValue::Scalar(h)
        }
        StandardQuantity::JWuYang => {
            QuantityValue::Vector(x.cross(s.momentum) - xhat * q)
        }
        StandardQuantity::RungeLenz => {
            let j = x.cross(s.momentum) - xhat * q;
            let alpha = potential.map(|v| v.alpha).unwrap_or(0.0);
            QuantityValue::Vector(s.momentum.cross(j) + xhat * alpha)
        }
        StandardQuantity::JDiatomic => {
            let kappa = field.kappa().unwrap_or(0.0);
            let psi = xhat * q + (s.isospin.0 - xhat * q) * kappa;
            QuantityValue::Vector(x.cross(s.momentum) - psi)
        }
        StandardQuantity::JCanonical => {
            let a = field.potential_at(x)?;
            let mut p = s.momentum;
            for i in 0..3 {
                p[i] += a[i].inner(s.isospin);
            }
            QuantityValue::Vector(x.cross(p) - s.isospin.0)
        }
    })
}

/// Whether a quantity is expected to stay constant for the given
/// configuration. Encodes the hedgehog-family facts: the radial charge and
/// the monopole angular momentum survive only at kappa = 0, the deformed
/// angular momentum survives for every kappa, and the Runge-Lenz vector
/// additionally needs the fine-tuned scalar potential.
pub fn expected_conserved(
    quantity: StandardQuantity,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
) -> bool {
    let kappa = field.kappa();
    match quantity {
        StandardQuantity::IsospinNorm2 | StandardQuantity::Energy => true,
        StandardQuantity::RadialCharge | StandardQuantity::JWuYang => kappa == Some(0.0),
        StandardQuantity::RungeLenz => kappa == Some(0.0) && potential.is_some(),
        StandardQuantity::JDiatomic => kappa.is_some(),
        StandardQuantity::JCanonical => {
            kappa.is_some() || matches!(field, GaugeFieldConfig::Vacuum)
        }
    }
}

/// Per-quantity drift over a trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DriftEntry {
    pub quantity: String,
    pub expected_conserved: bool,
    pub max_abs_drift: f64,
    pub max_rel_drift: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub tolerance: f64,
    pub entries: Vec<DriftEntry>,
}

impl DriftReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&DriftEntry> {
        self.entries.iter().find(|e| e.quantity == name)
    }

    /// JSON interface: an array of `{quantity, expectedConserved,
    /// maxAbsDrift, maxRelDrift, pass}` objects.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("drift report serializes")
    }
}

/// Drift of every standard quantity against its t = 0 value. Quantities not
/// expected to be conserved are reported but never fail the run.
pub fn evaluate_standard_set(
    traj: &Trajectory,
    tolerance: f64,
) -> Result<DriftReport, FieldError> {
    let mut entries = Vec::new();
    let first = &traj.samples[0];
    for quantity in StandardQuantity::all() {
        let origin = evaluate_quantity(quantity, first, &traj.field, traj.potential.as_ref())?;
        let drifts = par_map(&traj.samples, |s| {
            evaluate_quantity(quantity, s, &traj.field, traj.potential.as_ref())
                .map(|v| v.distance(&origin))
        });
        let mut max_abs = 0.0f64;
        for d in drifts {
            max_abs = max_abs.max(d?);
        }
        let max_rel = max_abs / origin.magnitude().max(DRIFT_DENOMINATOR_FLOOR);
        let expected = expected_conserved(quantity, &traj.field, traj.potential.as_ref());
        entries.push(DriftEntry {
            quantity: quantity.name().to_string(),
            expected_conserved: expected,
            max_abs_drift: max_abs,
            max_rel_drift: max_rel,
            pass: !expected || max_rel < tolerance,
        });
    }
    Ok(DriftReport {
        tolerance,
        entries,
    })
}

// ---------------------------------------------------------------------------
// quasi-random phase-space samples
// ---------------------------------------------------------------------------

/// Low-discrepancy samples (position in the shell 0.5 <= r <= 5, isospin on
/// the unit sphere), from the additive golden-ratio sequence in five
/// dimensions. Deterministic.
pub fn sample_shell(n: usize) -> Vec<(Vec3, AlgebraElement)> {
    // unique positive root of x^6 = x + 1
    let mut phi = 1.2f64;
    for _ in 0..64 {
        phi -= (phi.powi(6) - phi - 1.0) / (6.0 * phi.powi(5) - 1.0);
    }
    let alpha: Vec<f64> = (1..=5).map(|i| phi.powi(-i)).collect();
    let (r_in, r_out) = (0.5f64, 5.0f64);
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let u: Vec<f64> = alpha.iter().map(|a| (0.5 + k as f64 * a).fract()).collect();
        let r = (r_in.powi(3) + u[0] * (r_out.powi(3) - r_in.powi(3))).cbrt();
        let cos_t = 1.0 - 2.0 * u[1];
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let phi_x = std::f64::consts::TAU * u[2];
        let x = Vec3::new(r * sin_t * phi_x.cos(), r * sin_t * phi_x.sin(), r * cos_t);
        let cos_q = 1.0 - 2.0 * u[3];
        let sin_q = (1.0 - cos_q * cos_q).max(0.0).sqrt();
        let phi_q = std::f64::consts::TAU * u[4];
        let q = AlgebraElement::new(sin_q * phi_q.cos(), sin_q * phi_q.sin(), cos_q);
        out.push((x, q));
    }
    out
}

// ---------------------------------------------------------------------------
// constraint ladder
// ---------------------------------------------------------------------------

type ScalarMap = dyn Fn(Vec3, AlgebraElement) -> f64 + Sync + Send;
type VectorMap = dyn Fn(Vec3, AlgebraElement) -> Vec3 + Sync + Send;
type MatrixMap = dyn Fn(Vec3, AlgebraElement) -> Mat3 + Sync + Send;

/// Scalar potential as a phase-space map V(x, Q), so that potentials whose
/// coefficients are tied to the isospin (the fine-tuned inverse-square term)
/// close the ladder identically at arbitrary sample points.
pub struct PhasePotential {
    pub name: String,
    eval: Box<ScalarMap>,
}

impl PhasePotential {
    pub fn new(name: impl Into<String>, eval: Box<ScalarMap>) -> Self {
        PhasePotential {
            name: name.into(),
            eval,
        }
    }

    pub fn zero() -> Self {
        PhasePotential::new("zero", Box::new(|_, _| 0.0))
    }

    /// V(x, Q) = q^2/(2 r^2) + alpha/r + beta with q = Q . xhat; the
    /// inverse-square coefficient tracks the radial charge pointwise.
    pub fn fine_tuned(alpha: f64, beta: f64) -> Self {
        PhasePotential::new(
            format!("fine-tuned(alpha={alpha}, beta={beta})"),
            Box::new(move |x: Vec3, q: AlgebraElement| {
                let r = x.norm();
                let qc = q.0.dot(x.normalized());
                qc * qc / (2.0 * r * r) + alpha / r + beta
            }),
        )
    }

    pub fn value(&self, x: Vec3, q: AlgebraElement) -> f64 {
        (self.eval)(x, q)
    }
}

/// Coefficient functions of a truncated momentum expansion.
pub struct CoefficientAnsatz {
    pub name: String,
    /// Highest tensor rank supplied (0, 1 or 2); ladder equations up to
    /// `rank + 1` are checked, the last one being the Killing condition
    /// that justifies the truncation.
    pub rank: usize,
    c0: Box<ScalarMap>,
    c1: Box<VectorMap>,
    c2: Box<MatrixMap>,
}

impl CoefficientAnsatz {
    pub fn new(
        name: impl Into<String>,
        rank: usize,
        c0: Box<ScalarMap>,
        c1: Box<VectorMap>,
        c2: Box<MatrixMap>,
    ) -> Self {
        CoefficientAnsatz {
            name: name.into(),
            rank,
            c0,
            c1,
            c2,
        }
    }

    /// The identically zero ansatz; every ladder equation is trivially met.
    pub fn zero() -> Self {
        CoefficientAnsatz::new(
            "zero",
            0,
            Box::new(|_, _| 0.0),
            Box::new(|_, _| Vec3::ZERO),
            Box::new(|_, _| [[0.0; 3]; 3]),
        )
    }

    /// C = Q . xhat, covariantly constant in the hedgehog field; generates
    /// the conserved radial charge.
    pub fn radial_charge() -> Self {
        CoefficientAnsatz::new(
            "radial-charge",
            0,
            Box::new(|x: Vec3, q: AlgebraElement| q.0.dot(x.normalized())),
            Box::new(|_, _| Vec3::ZERO),
            Box::new(|_, _| [[0.0; 3]; 3]),
        )
    }

    /// Angular momentum about `axis` for deformation `kappa`:
    /// C_i = (n cross x)_i, C = -n . (q xhat + kappa (Q - q xhat)).
    pub fn rotation(axis: Vec3, kappa: f64) -> Self {
        let n = axis.normalized();
        CoefficientAnsatz::new(
            format!("rotation(kappa={kappa})"),
            1,
            Box::new(move |x: Vec3, q: AlgebraElement| {
                let xhat = x.normalized();
                let qc = q.0.dot(xhat);
                let psi = xhat * qc + (q.0 - xhat * qc) * kappa;
                -n.dot(psi)
            }),
            Box::new(move |x: Vec3, _| n.cross(x)),
            Box::new(|_, _| [[0.0; 3]; 3]),
        )
    }

    /// Runge-Lenz component along `axis`:
    /// C_ij = 2 delta_ij n.x - n_i x_j - n_j x_i (a rank-2 Killing tensor),
    /// C_i = q (n cross xhat)_i, C = alpha n . xhat.
    pub fn runge_lenz(axis: Vec3, alpha: f64) -> Self {
        let n = axis.normalized();
        CoefficientAnsatz::new(
            "runge-lenz",
            2,
            Box::new(move |x: Vec3, _| alpha * n.dot(x.normalized())),
            Box::new(move |x: Vec3, q: AlgebraElement| {
                let xhat = x.normalized();
                n.cross(xhat) * q.0.dot(xhat)
            }),
            Box::new(move |x: Vec3, _| {
                let mut m = [[0.0; 3]; 3];
                let nx = n.dot(x);
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = -n[i] * x[j] - n[j] * x[i];
                        if i == j {
                            m[i][j] += 2.0 * nx;
                        }
                    }
                }
                m
            }),
        )
    }

    pub fn c0(&self, x: Vec3, q: AlgebraElement) -> f64 {
        (self.c0)(x, q)
    }

    pub fn c1(&self, x: Vec3, q: AlgebraElement) -> Vec3 {
        (self.c1)(x, q)
    }

    pub fn c2(&self, x: Vec3, q: AlgebraElement) -> Mat3 {
        (self.c2)(x, q)
    }
}

fn grad_q_map(f: &dyn Fn(AlgebraElement) -> f64, q: AlgebraElement) -> Vec3 {
    let mut g = Vec3::ZERO;
    for c in 0..3 {
        let mut plus = q;
        let mut minus = q;
        plus.0[c] += FD_STEP;
        minus.0[c] -= FD_STEP;
        g[c] = (f(plus) - f(minus)) / (2.0 * FD_STEP);
    }
    g
}

fn grad_x_map(f: &dyn Fn(Vec3) -> f64, x: Vec3) -> Vec3 {
    let mut g = Vec3::ZERO;
    for i in 0..3 {
        let mut plus = x;
        let mut minus = x;
        plus[i] += FD_STEP;
        minus[i] -= FD_STEP;
        g[i] = (f(plus) - f(minus)) / (2.0 * FD_STEP);
    }
    g
}

/// D_i applied to a scalar map over (x, Q).
fn covariant_d_map(
    f: &dyn Fn(Vec3, AlgebraElement) -> f64,
    x: Vec3,
    q: AlgebraElement,
    a: &[AlgebraElement; 3],
) -> Vec3 {
    let gx = grad_x_map(&|p| f(p, q), x);
    let gq = grad_q_map(&|iq| f(x, iq), q);
    let mut d = Vec3::ZERO;
    for i in 0..3 {
        d[i] = gx[i] - q.0.cross(a[i].0).dot(gq);
    }
    d
}

/// eps_{abc} Q^a (dU/dQ^b) (dV/dQ^c) = Q . (grad_Q U x grad_Q V).
fn isospin_coupling(
    q: AlgebraElement,
    grad_u: Vec3,
    grad_v: Vec3,
) -> f64 {
    q.0.dot(grad_u.cross(grad_v))
}

/// Max-abs residuals of ladder orders 0..3 at one phase-space sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderResiduals(pub [f64; 4]);

pub fn van_holten_residuals_at(
    ansatz: &CoefficientAnsatz,
    field: &GaugeFieldConfig,
    potential: &PhasePotential,
    x: Vec3,
    q: AlgebraElement,
) -> Result<LadderResiduals, FieldError> {
    let a = field.potential_at(x)?;
    let strength = field.field_strength_at(x)?;
    let mut qf = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            qf[i][j] = strength[i][j].inner(q);
        }
    }
    let dv = covariant_d_map(&|p, iq| potential.value(p, iq), x, q, &a);
    let v_q = grad_q_map(&|iq| potential.value(x, iq), q);

    // order 0: C_i D_i V + eps Q dC/dQ dV/dQ = 0
    let c1 = ansatz.c1(x, q);
    let c0_q = grad_q_map(&|iq| ansatz.c0(x, iq), q);
    let r0 = (c1.dot(dv) + isospin_coupling(q, c0_q, v_q)).abs();

    // order 1: D_i C = QF_ij C_j + C_ij D_j V + eps Q dC_i/dQ dV/dQ
    let dc0 = covariant_d_map(&|p, iq| ansatz.c0(p, iq), x, q, &a);
    let c2 = ansatz.c2(x, q);
    let mut r1 = 0.0f64;
    for i in 0..3 {
        let mut rhs = 0.0;
        for j in 0..3 {
            rhs += qf[i][j] * c1[j] + c2[i][j] * dv[j];
        }
        let ci_q = grad_q_map(&|iq| ansatz.c1(x, iq)[i], q);
        rhs += isospin_coupling(q, ci_q, v_q);
        r1 = r1.max((dc0[i] - rhs).abs());
    }

    // order 2: D_i C_j + D_j C_i = QF_ik C_kj + QF_jk C_ki
    //          + eps Q dC_ij/dQ dV/dQ   (rank-3 coefficient absent)
    let mut dc1 = [[0.0f64; 3]; 3]; // dc1[i][j] = D_i C_j
    for j in 0..3 {
        let d = covariant_d_map(&|p, iq| ansatz.c1(p, iq)[j], x, q, &a);
        for i in 0..3 {
            dc1[i][j] = d[i];
        }
    }
    let mut r2 = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let mut rhs = 0.0;
            for k in 0..3 {
                rhs += qf[i][k] * c2[k][j] + qf[j][k] * c2[k][i];
            }
            let cij_q = grad_q_map(&|iq| ansatz.c2(x, iq)[i][j], q);
            rhs += isospin_coupling(q, cij_q, v_q);
            r2 = r2.max((dc1[i][j] + dc1[j][i] - rhs).abs());
        }
    }

    // order 3: the Killing-tensor condition D_(i C_jk) = 0
    let mut dc2 = [[[0.0f64; 3]; 3]; 3]; // dc2[i][j][k] = D_i C_jk
    for j in 0..3 {
        for k in 0..3 {
            let d = covariant_d_map(&|p, iq| ansatz.c2(p, iq)[j][k], x, q, &a);
            for i in 0..3 {
                dc2[i][j][k] = d[i];
            }
        }
    }
    let mut r3 = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                r3 = r3.max((dc2[i][j][k] + dc2[j][k][i] + dc2[k][i][j]).abs());
            }
        }
    }

    Ok(LadderResiduals([r0, r1, r2, r3]))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LadderOrderReport {
    pub order: usize,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LadderReport {
    pub ansatz: String,
    pub field: String,
    pub potential: String,
    pub tolerance: f64,
    pub orders: Vec<LadderOrderReport>,
    pub pass: bool,
}

/// Evaluate the ladder equations for `ansatz` at every sample and report the
/// worst residual per order. Orders beyond `rank + 1` are not reported; the
/// last reported order is the Killing condition closing the expansion.
pub fn van_holten_check(
    ansatz: &CoefficientAnsatz,
    field: &GaugeFieldConfig,
    potential: &PhasePotential,
    samples: &[(Vec3, AlgebraElement)],
    tolerance: f64,
) -> Result<LadderReport, FieldError> {
    let per_sample = par_map(samples, |(x, q)| {
        van_holten_residuals_at(ansatz, field, potential, *x, *q)
    });
    let mut worst = [0.0f64; 4];
    for r in per_sample {
        let r = r?;
        for (w, v) in worst.iter_mut().zip(r.0) {
            *w = w.max(v);
        }
    }
    let n_orders = (ansatz.rank + 2).min(4);
    let orders: Vec<LadderOrderReport> = worst
        .iter()
        .take(n_orders)
        .enumerate()
        .map(|(order, &max_residual)| LadderOrderReport {
            order,
            max_residual,
            pass: max_residual < tolerance,
        })
        .collect();
    let pass = orders.iter().all(|o| o.pass);
    Ok(LadderReport {
        ansatz: ansatz.name.clone(),
        field: field.name().to_string(),
        potential: potential.name.clone(),
        tolerance,
        orders,
        pass,
    })
}

// ---------------------------------------------------------------------------
// flat-space Killing checks
// ---------------------------------------------------------------------------

/// Max over the grid of |d_i C_j + d_j C_i| for a vector map; zero (to
/// stencil accuracy) exactly when C is a flat-space Killing vector.
pub fn killing_vector_residual(c: &(dyn Fn(Vec3) -> Vec3 + Sync), grid: &[Vec3]) -> f64 {
    par_max_by(grid, |&x| {
        let mut d = [[0.0f64; 3]; 3];
        for i in 0..3 {
            let mut plus = x;
            let mut minus = x;
            plus[i] += FD_STEP;
            minus[i] -= FD_STEP;
            let diff = (c(plus) - c(minus)) * (1.0 / (2.0 * FD_STEP));
            for j in 0..3 {
                d[i][j] = diff[j];
            }
        }
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((d[i][j] + d[j][i]).abs());
            }
        }
        worst
    })
}

/// Max over the grid of the cyclic-symmetrized derivative
/// |d_i C_jk + d_j C_ki + d_k C_ij| for a symmetric rank-2 map.
pub fn killing_tensor_residual(c: &(dyn Fn(Vec3) -> Mat3 + Sync), grid: &[Vec3]) -> f64 {
    par_max_by(grid, |&x| {
        let mut d = [[[0.0f64; 3]; 3]; 3];
        for i in 0..3 {
            let mut plus = x;
            let mut minus = x;
            plus[i] += FD_STEP;
            minus[i] -= FD_STEP;
            let (cp, cm) = (c(plus), c(minus));
            for j in 0..3 {
                for k in 0..3 {
                    d[i][j][k] = (cp[j][k] - cm[j][k]) / (2.0 * FD_STEP);
                }
            }
        }
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    worst = worst.max((d[i][j][k] + d[j][k][i] + d[k][i][j]).abs());
                }
            }
        }
        worst
    })
}
