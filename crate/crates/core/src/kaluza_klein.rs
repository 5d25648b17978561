//! Five-dimensional Kaluza-Klein geometry over a flat 4D base.
//!
//! The metric is assembled from an Abelian potential A_mu as
//!
//! ```text
//! g_{mu nu} = eta_{mu nu} + A_mu A_nu,   g_{mu 5} = A_mu,   g_55 = 1
//! ```
//!
//! with eta = diag(-1, 1, 1, 1) and coordinates (x^0..x^3, x^5). Christoffel
//! symbols are built by central finite differences of the assembled metric
//! rather than hand-coded formulas, so the geodesic integrator exercises the
//! geometry generically; the tests pin it against an independently computed
//! symbolic oracle.
//!
//! The isometry along x^5 has the conserved charge q = dx^5/dtau +
//! A_mu dx^mu/dtau, and projecting a 5D geodesic to the base reproduces the
//! Lorentz force x''^mu = q F^mu_nu x'^nu. `lorentz_compare` integrates both
//! routes independently (finite-difference Christoffels against the analytic
//! field tensor) and reports the deviation.

use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

/// Finite-difference step for metric derivatives.
pub const METRIC_FD_STEP: f64 = 1e-5;

const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KkError {
    #[error("abelian potential singular at the evaluation point (r = {r:.3e})")]
    SingularPoint { r: f64 },
    #[error("metric not invertible at the evaluation point")]
    DegenerateMetric,
    #[error("invalid integration setup: {0}")]
    Invalid(String),
}

/// Static Abelian potentials with A_0 = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AbelianPotential {
    Zero,
    /// A = (1/2) b cross x, a uniform magnetic field b.
    UniformB { b: Vec3 },
    /// North-patch monopole of charge g with its string along -z:
    /// A = g (-y, x, 0) / (r (r + z)).
    DiracMonopole { g: f64 },
    /// base potential shifted by the gradient of
    /// lambda(x) = slope.x + amp sin(freq.x); the field tensor is unchanged
    /// and x^5 -> x^5 + lambda compensates in the charge.
    Shifted {
        base: Box<AbelianPotential>,
        slope: Vec3,
        amp: f64,
        freq: Vec3,
    },
}

impl AbelianPotential {
    fn spatial(x4: [f64; 4]) -> Vec3 {
        Vec3::new(x4[1], x4[2], x4[3])
    }

    pub fn check(&self, x4: [f64; 4]) -> Result<(), KkError> {
        match self {
            AbelianPotential::Zero | AbelianPotential::UniformB { .. } => Ok(()),
            AbelianPotential::DiracMonopole { .. } => {
                let x = Self::spatial(x4);
                let r = x.norm();
                if r < 1e-6 || r + x[2] < 1e-6 * r.max(1.0) {
                    return Err(KkError::SingularPoint { r });
                }
                Ok(())
            }
            AbelianPotential::Shifted { base, .. } => base.check(x4),
        }
    }

    /// Covector components (A_0, A_1, A_2, A_3); A_0 = 0 throughout.
    pub fn covector(&self, x4: [f64; 4]) -> Result<[f64; 4], KkError> {
        self.check(x4)?;
        Ok(match self {
            AbelianPotential::Zero => [0.0; 4],
            AbelianPotential::UniformB { b } => {
                let a = b.cross(Self::spatial(x4)) * 0.5;
                [0.0, a[0], a[1], a[2]]
            }
            AbelianPotential::DiracMonopole { g } => {
                let x = Self::spatial(x4);
                let r = x.norm();
                let den = g / (r * (r + x[2]));
                [0.0, -x[1] * den, x[0] * den, 0.0]
            }
            AbelianPotential::Shifted {
                base,
                slope,
                amp,
                freq,
            } => {
                let mut a = base.covector(x4)?;
                let x = Self::spatial(x4);
                let grad = *slope + *freq * (*amp * freq.dot(x).cos());
                for i in 0..3 {
                    a[i + 1] += grad[i];
                }
                a
            }
        })
    }

    /// The gauge function lambda(x) for shifted potentials, zero otherwise.
    pub fn gauge_shift(&self, x4: [f64; 4]) -> f64 {
        match self {
            AbelianPotential::Shifted {
                base,
                slope,
                amp,
                freq,
            } => {
                let x = Self::spatial(x4);
                base.gauge_shift(x4) + slope.dot(x) + amp * freq.dot(x).sin()
            }
            _ => 0.0,
        }
    }

    /// Analytic field tensor F_{mu nu} = d_mu A_nu - d_nu A_mu; the
    /// independent route used by the 4D Lorentz-force integration.
    pub fn faraday(&self, x4: [f64; 4]) -> Result<[[f64; 4]; 4], KkError> {
        self.check(x4)?;
        let b = match self {
            AbelianPotential::Zero => Vec3::ZERO,
            AbelianPotential::UniformB { b } => *b,
            AbelianPotential::DiracMonopole { g } => {
                let x = Self::spatial(x4);
                let r = x.norm();
                x * (*g / (r * r * r))
            }
            AbelianPotential::Shifted { base, .. } => return base.faraday(x4),
        };
        let mut f = [[0.0; 4]; 4];
        // spatial block F_ij = eps_{ijk} B_k
        f[1][2] = b[2];
        f[2][1] = -b[2];
        f[2][3] = b[0];
        f[3][2] = -b[0];
        f[3][1] = b[1];
        f[1][3] = -b[1];
        Ok(f)
    }
}

/// The assembled 5D metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiveMetric {
    pub potential: AbelianPotential,
}

impl FiveMetric {
    pub fn new(potential: AbelianPotential) -> Self {
        FiveMetric { potential }
    }

    pub fn metric_at(&self, x: [f64; 5]) -> Result<[[f64; 5]; 5], KkError> {
        let a = self.potential.covector([x[0], x[1], x[2], x[3]])?;
        let mut g = [[0.0; 5]; 5];
        for mu in 0..4 {
            for nu in 0..4 {
                g[mu][nu] = a[mu] * a[nu];
            }
            g[mu][mu] += ETA[mu];
            g[mu][4] = a[mu];
            g[4][mu] = a[mu];
        }
        g[4][4] = 1.0;
        Ok(g)
    }

    /// Christoffel symbols Gamma^A_{BC} by central differences of the
    /// metric, symmetric in (B, C).
    pub fn christoffel_at(&self, x: [f64; 5], h: f64) -> Result<[[[f64; 5]; 5]; 5], KkError> {
        let mut dg = [[[0.0; 5]; 5]; 5]; // dg[d][b][c] = d_d g_bc
        for d in 0..5 {
            let mut plus = x;
            let mut minus = x;
            plus[d] += h;
            minus[d] -= h;
            let (gp, gm) = (self.metric_at(plus)?, self.metric_at(minus)?);
            for b in 0..5 {
                for c in 0..5 {
                    dg[d][b][c] = (gp[b][c] - gm[b][c]) / (2.0 * h);
                }
            }
        }
        let ginv = invert5(self.metric_at(x)?).ok_or(KkError::DegenerateMetric)?;
        let mut gamma = [[[0.0; 5]; 5]; 5];
        for b in 0..5 {
            for c in 0..5 {
                for a in 0..5 {
                    let mut s = 0.0;
                    for d in 0..5 {
                        s += ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                    }
                    gamma[a][b][c] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert5(m: [[f64; 5]; 5]) -> Option<[[f64; 5]; 5]> {
    let mut a = m;
    let mut inv = [[0.0; 5]; 5];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..5 {
        let mut pivot = col;
        for row in col + 1..5 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col];
        for k in 0..5 {
            a[col][k] /= scale;
            inv[col][k] /= scale;
        }
        for row in 0..5 {
            if row != col {
                let factor = a[row][col];
                if factor != 0.0 {
                    for k in 0..5 {
                        a[row][k] -= factor * a[col][k];
                        inv[row][k] -= factor * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Point on a 5D geodesic: affine parameter, position, velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveState {
    pub tau: f64,
    pub x: [f64; 5],
    pub u: [f64; 5],
}

impl FiveState {
    pub fn new(tau: f64, x: [f64; 5], u: [f64; 5]) -> Self {
        FiveState { tau, x, u }
    }

    /// Build initial data with a prescribed Killing charge: U^5 is chosen so
    /// that q = U^5 + A_mu U^mu equals `charge`.
    pub fn with_charge(
        metric: &FiveMetric,
        x4: [f64; 4],
        u4: [f64; 4],
        x5: f64,
        charge: f64,
    ) -> Result<Self, KkError> {
        let a = metric.potential.covector(x4)?;
        let mut au = 0.0;
        for mu in 0..4 {
            au += a[mu] * u4[mu];
        }
        Ok(FiveState::new(
            0.0,
            [x4[0], x4[1], x4[2], x4[3], x5],
            [u4[0], u4[1], u4[2], u4[3], charge - au],
        ))
    }
}

/// Killing charge of the x^5 isometry, q = U^5 + A_mu U^mu.
pub fn charge_of(metric: &FiveMetric, s: &FiveState) -> Result<f64, KkError> {
    let a = metric.potential.covector([s.x[0], s.x[1], s.x[2], s.x[3]])?;
    let mut q = s.u[4];
    for mu in 0..4 {
        q += a[mu] * s.u[mu];
    }
    Ok(q)
}

/// Invariant 5-velocity norm g_AB U^A U^B.
pub fn five_norm(metric: &FiveMetric, s: &FiveState) -> Result<f64, KkError> {
    let g = metric.metric_at(s.x)?;
    let mut n = 0.0;
    for a in 0..5 {
        for b in 0..5 {
            n += g[a][b] * s.u[a] * s.u[b];
        }
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KkIntegratorConfig {
    pub h: f64,
    pub tau_end: f64,
}

impl KkIntegratorConfig {
    pub fn new(h: f64, tau_end: f64) -> Self {
        KkIntegratorConfig { h, tau_end }
    }

    fn validate(&self) -> Result<(), KkError> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(KkError::Invalid("step h must be positive".into()));
        }
        if !(self.tau_end > 0.0 && self.tau_end.is_finite()) {
            return Err(KkError::Invalid("tau_end must be positive".into()));
        }
        Ok(())
    }
}

fn geodesic_rhs(metric: &FiveMetric, y: &[f64; 10]) -> Result<[f64; 10], KkError> {
    let x = [y[0], y[1], y[2], y[3], y[4]];
    let u = [y[5], y[6], y[7], y[8], y[9]];
    let gamma = metric.christoffel_at(x, METRIC_FD_STEP)?;
    let mut out = [0.0; 10];
    out[..5].copy_from_slice(&u);
    for a in 0..5 {
        let mut acc = 0.0;
        for b in 0..5 {
            for c in 0..5 {
                acc -= gamma[a][b][c] * u[b] * u[c];
            }
        }
        out[5 + a] = acc;
    }
    Ok(out)
}

/// RK4 integration of the 5D geodesic equation.
pub fn geodesic_integrate(
    metric: &FiveMetric,
    initial: FiveState,
    cfg: &KkIntegratorConfig,
) -> Result<Vec<FiveState>, KkError> {
    cfg.validate()?;
    let n = (cfg.tau_end / cfg.h).round().max(1.0) as u64;
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(initial);
    let mut y = [0.0f64; 10];
    y[..5].copy_from_slice(&initial.x);
    y[5..].copy_from_slice(&initial.u);
    for step in 0..n {
        let k1 = geodesic_rhs(metric, &y)?;
        let k2 = geodesic_rhs(metric, &stage(&y, 0.5 * cfg.h, &k1))?;
        let k3 = geodesic_rhs(metric, &stage(&y, 0.5 * cfg.h, &k2))?;
        let k4 = geodesic_rhs(metric, &stage(&y, cfg.h, &k3))?;
        for i in 0..10 {
            y[i] += (cfg.h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let tau = initial.tau + (step + 1) as f64 * cfg.h;
        out.push(FiveState::new(
            tau,
            [y[0], y[1], y[2], y[3], y[4]],
            [y[5], y[6], y[7], y[8], y[9]],
        ));
    }
    Ok(out)
}

fn stage(y: &[f64; 10], h: f64, k: &[f64; 10]) -> [f64; 10] {
    let mut out = *y;
    for i in 0..10 {
        out[i] += h * k[i];
    }
    out
}

/// One sample of the 4D route: (tau, position, velocity).
pub type FourSample = (f64, [f64; 4], [f64; 4]);

/// 4D charged-particle route: x''^mu = q eta^{mu alpha} F_{alpha nu} x'^nu
/// with the analytic field tensor.
pub fn lorentz_integrate(
    potential: &AbelianPotential,
    x0: [f64; 4],
    u0: [f64; 4],
    charge: f64,
    cfg: &KkIntegratorConfig,
) -> Result<Vec<FourSample>, KkError> {
    cfg.validate()?;
    let rhs = |y: &[f64; 8]| -> Result<[f64; 8], KkError> {
        let x = [y[0], y[1], y[2], y[3]];
        let f = potential.faraday(x)?;
        let mut out = [0.0; 8];
        out[..4].copy_from_slice(&y[4..]);
        for mu in 0..4 {
            let mut acc = 0.0;
            for nu in 0..4 {
                acc += f[mu][nu] * y[4 + nu];
            }
            out[4 + mu] = charge * ETA[mu].recip() * acc;
        }
        Ok(out)
    };
    let n = (cfg.tau_end / cfg.h).round().max(1.0) as u64;
    let mut y = [0.0f64; 8];
    y[..4].copy_from_slice(&x0);
    y[4..].copy_from_slice(&u0);
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push((0.0, x0, u0));
    for step in 0..n {
        let k1 = rhs(&y)?;
        let k2 = rhs(&stage8(&y, 0.5 * cfg.h, &k1))?;
        let k3 = rhs(&stage8(&y, 0.5 * cfg.h, &k2))?;
        let k4 = rhs(&stage8(&y, cfg.h, &k3))?;
        for i in 0..8 {
            y[i] += (cfg.h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push((
            (step + 1) as f64 * cfg.h,
            [y[0], y[1], y[2], y[3]],
            [y[4], y[5], y[6], y[7]],
        ));
    }
    Ok(out)
}

fn stage8(y: &[f64; 8], h: f64, k: &[f64; 8]) -> [f64; 8] {
    let mut out = *y;
    for i in 0..8 {
        out[i] += h * k[i];
    }
    out
}

/// Result of running the 5D and 4D routes side by side.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LorentzComparison {
    pub max_deviation: f64,
    pub q_drift: f64,
    pub norm_drift: f64,
}

/// Integrate the 5D geodesic and the 4D Lorentz-force equation from the same
/// initial data (q taken from the initial state) and report the maximal
/// spatial deviation plus the drifts of the Killing charge and the
/// 5-velocity norm.
pub fn lorentz_compare(
    metric: &FiveMetric,
    initial: FiveState,
    cfg: &KkIntegratorConfig,
) -> Result<(LorentzComparison, Vec<FiveState>), KkError> {
    let q0 = charge_of(metric, &initial)?;
    let norm0 = five_norm(metric, &initial)?;
    let five = geodesic_integrate(metric, initial, cfg)?;
    let four = lorentz_integrate(
        &metric.potential,
        [initial.x[0], initial.x[1], initial.x[2], initial.x[3]],
        [initial.u[0], initial.u[1], initial.u[2], initial.u[3]],
        q0,
        cfg,
    )?;

    let mut max_dev = 0.0f64;
    for (s5, (_, x4, _)) in five.iter().zip(&four) {
        let mut d = 0.0;
        for i in 1..4 {
            d += (s5.x[i] - x4[i]) * (s5.x[i] - x4[i]);
        }
        max_dev = max_dev.max(d.sqrt());
    }
    let mut q_drift = 0.0f64;
    let mut norm_drift = 0.0f64;
    for s in &five {
        q_drift = q_drift.max((charge_of(metric, s)? - q0).abs());
        norm_drift = norm_drift.max((five_norm(metric, s)? - norm0).abs());
    }
    Ok((
        LorentzComparison {
            max_deviation: max_dev,
            q_drift,
            norm_drift,
        },
        five,
    ))
}

/// CSV export: `tau,x0,x1,x2,x3,x5,u0,u1,u2,u3,u5`, 17 significant digits.
pub fn write_csv<W: Write>(states: &[FiveState], mut w: W) -> io::Result<()> {
    writeln!(w, "tau,x0,x1,x2,x3,x5,u0,u1,u2,u3,u5")?;
    for s in states {
        write!(w, "{:.16e}", s.tau)?;
        for v in s.x.iter().chain(s.u.iter()) {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
