//! Time integration of the flat-space equations of motion for an
//! isospin-carrying particle,
//!
//! ```text
//! xdot_i  = pi_i
//! pidot_i = Q^a F^a_{ij} pi_j - dV/dx_i
//! Qdot    = (A_i pi_i) x Q
//! ```
//!
//! with unit mass and unit coupling. The isospin precession term is the
//! Hamiltonian transport law: it is the unique sign choice under which the
//! radial charge Q.xhat is exactly conserved in the hedgehog monopole field
//! (see `conservation`); written with the matrix commutator it reads
//! Qdot + [Q, A_i pi_i] = 0, so the isospin is covariantly constant along
//! the worldline while its plain time derivative is generally not.
//!
//! The isospin is integrated as a raw 3-vector and never renormalized;
//! norm drift is the primary accuracy diagnostic, not something to hide.

use crate::fields::{FieldError, GaugeFieldConfig, ScalarPotentialConfig};
use crate::su2::AlgebraElement;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

/// Phase point of the particle: position, covariant momentum (pi = xdot for
/// unit mass) and isospin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub t: f64,
    pub position: Vec3,
    pub momentum: Vec3,
    pub isospin: AlgebraElement,
}

impl ParticleState {
    pub fn new(t: f64, position: Vec3, momentum: Vec3, isospin: AlgebraElement) -> Self {
        ParticleState {
            t,
            position,
            momentum,
            isospin,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.position.is_finite()
            && self.momentum.is_finite()
            && self.isospin.is_finite()
    }

    /// Radial charge q = Q . xhat.
    pub fn radial_charge(&self) -> f64 {
        self.isospin.0.dot(self.position.normalized())
    }

    fn pack(&self) -> [f64; 9] {
        let (x, p, q) = (self.position.0, self.momentum.0, self.isospin.0 .0);
        [x[0], x[1], x[2], p[0], p[1], p[2], q[0], q[1], q[2]]
    }

    fn unpack(t: f64, y: &[f64; 9]) -> ParticleState {
        ParticleState {
            t,
            position: Vec3([y[0], y[1], y[2]]),
            momentum: Vec3([y[3], y[4], y[5]]),
            isospin: AlgebraElement(Vec3([y[6], y[7], y[8]])),
        }
    }
}

/// Time derivative of a phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub position: Vec3,
    pub momentum: Vec3,
    pub isospin: AlgebraElement,
}

/// Precession rate (A_i pi_i) x Q of the isospin in the given field.
pub fn isospin_transport_rate(
    state: &ParticleState,
    field: &GaugeFieldConfig,
) -> Result<AlgebraElement, FieldError> {
    let a = field.potential_at(state.position)?;
    let mut coupled = AlgebraElement::ZERO;
    for i in 0..3 {
        coupled = coupled + a[i] * state.momentum[i];
    }
    Ok(coupled.bracket(state.isospin))
}

/// Right-hand side of the equations of motion.
pub fn derivatives(
    state: &ParticleState,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
) -> Result<StateDerivative, FieldError> {
    let f = field.field_strength_at(state.position)?;
    let mut force = Vec3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            force[i] += f[i][j].inner(state.isospin) * state.momentum[j];
        }
    }
    if let Some(v) = potential {
        let r = state.position.norm();
        let dv = v.radial_derivative(r)?;
        force += state.position * (-dv / r);
    }
    Ok(StateDerivative {
        position: state.momentum,
        momentum: force,
        isospin: isospin_transport_rate(state, field)?,
    })
}

fn rhs(
    t: f64,
    y: &[f64; 9],
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
) -> Result<[f64; 9], FieldError> {
    let s = ParticleState::unpack(t, y);
    let d = derivatives(&s, field, potential)?;
    Ok([
        d.position[0],
        d.position[1],
        d.position[2],
        d.momentum[0],
        d.momentum[1],
        d.momentum[2],
        d.isospin.0[0],
        d.isospin.0[1],
        d.isospin.0[2],
    ])
}

fn axpy(y: &[f64; 9], h: f64, k: &[f64; 9]) -> [f64; 9] {
    let mut out = *y;
    for i in 0..9 {
        out[i] += h * k[i];
    }
    out
}

/// One classical fourth-order Runge-Kutta step of size h.
pub fn rk4_step(
    state: &ParticleState,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
    h: f64,
) -> Result<ParticleState, FieldError> {
    let t = state.t;
    let y = state.pack();
    let k1 = rhs(t, &y, field, potential)?;
    let k2 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1), field, potential)?;
    let k3 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2), field, potential)?;
    let k4 = rhs(t + h, &axpy(&y, h, &k3), field, potential)?;
    let mut out = y;
    for i in 0..9 {
        out[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(ParticleState::unpack(t + h, &out))
}

/// Integration method selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Rk4 { h: f64 },
    Rk45Adaptive { tol_abs: f64, tol_rel: f64 },
}

impl Method {
    pub fn rk45_default() -> Method {
        Method::Rk45Adaptive {
            tol_abs: 1e-10,
            tol_rel: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(flatten)]
    pub method: Method,
    pub t_end: f64,
}

impl IntegratorConfig {
    pub fn rk4(h: f64, t_end: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4 { h },
            t_end,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(DynamicsError::invalid("t_end must be finite and positive"));
        }
        match self.method {
            Method::Rk4 { h } => {
                if !(h.is_finite() && h > 0.0) {
                    return Err(DynamicsError::invalid("rk4 step h must be positive"));
                }
            }
            Method::Rk45Adaptive { tol_abs, tol_rel } => {
                if !(tol_abs > 0.0 && tol_rel > 0.0) {
                    return Err(DynamicsError::invalid("rk45 tolerances must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    /// Reached t_end.
    Completed,
    /// The trajectory entered the guard ball around the field singularity.
    /// A legitimate outcome for orbits aimed at the monopole center; the
    /// samples collected so far are kept.
    GuardRadius { at: f64 },
    /// The adaptive step fell below 1e-14.
    StepUnderflow { at: f64 },
}

#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error("invalid integration setup: {0}")]
    Invalid(String),
}

impl DynamicsError {
    fn invalid(msg: impl Into<String>) -> Self {
        DynamicsError::Invalid(msg.into())
    }
}

/// A completed run: samples plus the configuration snapshot that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<ParticleState>,
    pub field: GaugeFieldConfig,
    pub potential: Option<ScalarPotentialConfig>,
    pub integrator: IntegratorConfig,
    pub termination: Termination,
}

impl Trajectory {
    /// Step size when the run used a fixed-step method.
    pub fn uniform_step(&self) -> Option<f64> {
        match self.integrator.method {
            Method::Rk4 { h } => Some(h),
            Method::Rk45Adaptive { .. } => None,
        }
    }

    pub fn last(&self) -> &ParticleState {
        self.samples.last().expect("trajectory is never empty")
    }

    /// CSV export: `t,x1,x2,x3,pi1,pi2,pi3,Q1,Q2,Q3`, one row per sample,
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x1,x2,x3,pi1,pi2,pi3,Q1,Q2,Q3")?;
        for s in &self.samples {
            let y = s.pack();
            write!(w, "{:.16e}", s.t)?;
            for v in y {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

const MIN_ADAPTIVE_STEP: f64 = 1e-14;

/// Integrate from `initial` until t_end, the guard radius, or step underflow.
pub fn integrate(
    initial: ParticleState,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    if !initial.is_finite() {
        return Err(DynamicsError::invalid("initial state has non-finite values"));
    }
    let guard = field.guard_radius();
    if guard > 0.0 && initial.position.norm() <= guard {
        return Err(DynamicsError::invalid(format!(
            "initial position violates the guard radius ({} <= {guard:.1e})",
            initial.position.norm()
        )));
    }

    let mut samples = vec![initial];
    let termination = match cfg.method {
        Method::Rk4 { h } => run_rk4(&mut samples, field, potential, h, cfg.t_end),
        Method::Rk45Adaptive { tol_abs, tol_rel } => {
            run_rk45(&mut samples, field, potential, tol_abs, tol_rel, cfg.t_end)
        }
    };
    Ok(Trajectory {
        samples,
        field: field.clone(),
        potential: potential.copied(),
        integrator: *cfg,
        termination,
    })
}

fn run_rk4(
    samples: &mut Vec<ParticleState>,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
    h: f64,
    t_end: f64,
) -> Termination {
    let t0 = samples[0].t;
    let guard = field.guard_radius();
    let n_steps = (t_end / h).round().max(1.0) as u64;
    let mut state = samples[0];
    for step in 0..n_steps {
        state = match rk4_step(&state, field, potential, h) {
            Ok(s) => s,
            Err(FieldError::SingularPoint { .. }) => {
                return Termination::GuardRadius { at: state.t };
            }
        };
        // keep t exactly on the uniform grid
        state.t = t0 + (step + 1) as f64 * h;
        if guard > 0.0 && state.position.norm() <= guard {
            return Termination::GuardRadius { at: state.t };
        }
        samples.push(state);
    }
    Termination::Completed
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// y5 - y4 error weights
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn run_rk45(
    samples: &mut Vec<ParticleState>,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
    tol_abs: f64,
    tol_rel: f64,
    t_end: f64,
) -> Termination {
    let guard = field.guard_radius();
    let mut state = samples[0];
    let t_final = samples[0].t + t_end;
    let mut h = (t_end / 100.0).min(1e-2);
    let mut err_prev: f64 = 1.0;

    while state.t < t_final {
        h = h.min(t_final - state.t);
        if h < MIN_ADAPTIVE_STEP {
            return Termination::StepUnderflow { at: state.t };
        }
        let y = state.pack();
        let mut k = [[0.0f64; 9]; 7];
        let first = rhs(state.t, &y, field, potential);
        k[0] = match first {
            Ok(v) => v,
            Err(_) => return Termination::GuardRadius { at: state.t },
        };
        let mut failed = false;
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    for i in 0..9 {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            match rhs(state.t + DP_C[stage] * h, &ys, field, potential) {
                Ok(v) => k[stage + 1] = v,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            // stage stepped into the guard ball; shrink and retry
            h *= 0.25;
            continue;
        }

        // 5th-order solution is the last stage evaluation point
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = DP_A[5][j];
            if b != 0.0 {
                for i in 0..9 {
                    y_new[i] += h * b * kj[i];
                }
            }
        }
        let mut err_sq = 0.0;
        for i in 0..9 {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += DP_E[j] * kj[i];
            }
            e *= h;
            let sc = tol_abs + tol_rel * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / 9.0).sqrt();

        if err <= 1.0 {
            state = ParticleState::unpack(state.t + h, &y_new);
            if guard > 0.0 && state.position.norm() <= guard {
                return Termination::GuardRadius { at: state.t };
            }
            samples.push(state);
            let fac = 0.9 * err.max(1e-10).powf(-0.14) * err_prev.powf(0.08);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-10);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Termination::Completed
}

/// Finite-difference residual of the covariant transport law along a
/// trajectory: Qdot_fd - (A_i pi_i) x Q at interior samples. Vanishes at
/// integrator accuracy whenever the scalar potential carries no isospin
/// dependence, including in pure-gauge fields where the plain rate |Qdot|
/// stays O(1).
pub fn covariant_derivative_q(traj: &Trajectory) -> Result<Vec<AlgebraElement>, FieldError> {
    let rates = isospin_rates(traj);
    let mut out = Vec::with_capacity(rates.len());
    for (idx, qdot) in rates {
        let s = &traj.samples[idx];
        out.push(qdot - isospin_transport_rate(s, &traj.field)?);
    }
    Ok(out)
}

/// Plain finite-difference isospin rates Qdot at interior samples,
/// as (sample index, rate) pairs. Uses a fourth-order central stencil on
/// uniform grids and a second-order three-point stencil otherwise.
pub fn isospin_rates(traj: &Trajectory) -> Vec<(usize, AlgebraElement)> {
    let s = &traj.samples;
    let n = s.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    if let Some(h) = traj.uniform_step() {
        if n >= 5 {
            for i in 2..n - 2 {
                let d = (s[i - 2].isospin.0 - s[i + 2].isospin.0
                    + (s[i + 1].isospin.0 - s[i - 1].isospin.0) * 8.0)
                    * (1.0 / (12.0 * h));
                out.push((i, AlgebraElement(d)));
            }
            return out;
        }
    }
    for i in 1..n - 1 {
        let hp = s[i + 1].t - s[i].t;
        let hm = s[i].t - s[i - 1].t;
        let d = s[i - 1].isospin.0 * (-hp / (hm * (hm + hp)))
            + s[i].isospin.0 * ((hp - hm) / (hp * hm))
            + s[i + 1].isospin.0 * (hm / (hp * (hm + hp)));
        out.push((i, AlgebraElement(d)));
    }
    out
}
