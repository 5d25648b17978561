//! Geometric verification of the dynamical-symmetry structure: cone
//! confinement by the monopole angular momentum, orbital-plane confinement by
//! the Runge-Lenz combination N = K + (alpha/q) J (the orbit satisfies
//! N . x = J^2 - q^2), and conic-section classification of the in-plane
//! track; plus the worldline gauge-covariance experiment.

use crate::conservation::{evaluate_quantity, QuantityValue, StandardQuantity};
use crate::dynamics::{integrate, DynamicsError, IntegratorConfig, ParticleState, Trajectory};
use crate::fields::{FieldError, GaugeFieldConfig, GaugeFunction, ScalarPotentialConfig};
use crate::vec3::Vec3;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum AnalysisError {
    #[error("radial charge too small for the plane construction (|q| = {q:.3e})")]
    DegenerateCharge { q: f64 },
    #[error("gauge experiment requires a fixed-step integrator so both runs share a grid")]
    RequiresFixedStep,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

// ---------------------------------------------------------------------------
// cone confinement
// ---------------------------------------------------------------------------

/// Statistics of the angle between J(0) and xhat(t).
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConeStats {
    pub mean: f64,
    pub max_deviation: f64,
    /// False when the radial charge drifts along the run, in which case the
    /// cone construction does not apply (the deformed hedgehog case).
    pub applicable: bool,
}

/// Angle between the initial monopole angular momentum and the radial
/// direction at every sample. The relation J . xhat = -q makes this angle
/// constant exactly when q is conserved; `q_drift_tolerance` decides when
/// the construction is declared inapplicable.
pub fn cone_check(traj: &Trajectory, q_drift_tolerance: f64) -> Result<ConeStats, FieldError> {
    let first = &traj.samples[0];
    let j0 = match evaluate_quantity(
        StandardQuantity::JWuYang,
        first,
        &traj.field,
        traj.potential.as_ref(),
    )? {
        QuantityValue::Vector(j) => j,
        _ => unreachable!("JWuYang is vector-valued"),
    };
    let j0_hat = j0.normalized();
    let q0 = first.radial_charge();

    let mut sum = 0.0;
    let mut angles = Vec::with_capacity(traj.samples.len());
    let mut q_drift = 0.0f64;
    for s in &traj.samples {
        let angle = j0_hat.dot(s.position.normalized()).clamp(-1.0, 1.0).acos();
        sum += angle;
        angles.push(angle);
        q_drift = q_drift.max((s.radial_charge() - q0).abs());
    }
    let mean = sum / angles.len() as f64;
    let max_deviation = angles
        .iter()
        .fold(0.0f64, |m, a| m.max((a - mean).abs()));
    Ok(ConeStats {
        mean,
        max_deviation,
        applicable: q_drift <= q_drift_tolerance,
    })
}

// ---------------------------------------------------------------------------
// plane confinement and conic fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Planarity {
    pub normal: Vec3,
    pub max_off_plane_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConicType {
    Ellipse,
    Parabola,
    Hyperbola,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConicFit {
    #[serde(rename = "type")]
    pub conic_type: ConicType,
    /// Max algebraic residual of the unit-norm quadratic form over the
    /// RMS-normalized sample points.
    pub residual: f64,
    pub eccentricity: f64,
    /// Fit coefficients (a, b, c, d, e, f) of a u^2 + b uv + c v^2 + d u +
    /// e v + f = 0 in the normalized frame, kept for rendering.
    #[serde(skip)]
    pub coefficients: [f64; 6],
    /// Coordinate scale dividing the in-plane coordinates before the fit.
    #[serde(skip)]
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConicReport {
    pub cone_angle_stats: ConeStats,
    pub planarity: Planarity,
    pub conic_fit: ConicFit,
}

/// Discriminant dead zone inside which a fit is classified as a parabola.
const PARABOLA_DEAD_ZONE: f64 = 1e-9;

/// Deterministic orthonormal frame of the plane with normal `n`: the seed is
/// the coordinate axis least aligned with n, ties broken by smallest index.
pub fn plane_frame(n: Vec3) -> (Vec3, Vec3) {
    let n_hat = n.normalized();
    let mut seed_idx = 0;
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let align = n_hat[i].abs();
        if align < best {
            best = align;
            seed_idx = i;
        }
    }
    let seed = Vec3::basis(seed_idx);
    let e1 = (seed - n_hat * seed.dot(n_hat)).normalized();
    let e2 = n_hat.cross(e1);
    (e1, e2)
}

/// Project points into the plane n . x = offset using the deterministic frame.
pub fn project_to_plane(points: &[Vec3], n: Vec3, offset: f64) -> Vec<(f64, f64)> {
    let n_hat = n.normalized();
    let origin = n_hat * (offset / n.norm());
    let (e1, e2) = plane_frame(n);
    points
        .iter()
        .map(|&p| {
            let d = p - origin;
            (d.dot(e1), d.dot(e2))
        })
        .collect()
}

/// Direct least-squares fit of a general conic with a unit-norm coefficient
/// constraint: the minimizer is the eigenvector of the scatter matrix with
/// the smallest eigenvalue.
pub fn fit_conic(points: &[(f64, f64)]) -> ConicFit {
    let scale = (points.iter().map(|(u, v)| u * u + v * v).sum::<f64>()
        / points.len() as f64)
        .sqrt()
        .max(1e-30);
    let mut scatter = [[0.0f64; 6]; 6];
    for &(u, v) in points {
        let (u, v) = (u / scale, v / scale);
        let row = [u * u, u * v, v * v, u, v, 1.0];
        for i in 0..6 {
            for j in 0..6 {
                scatter[i][j] += row[i] * row[j];
            }
        }
    }
    let (eigenvalues, vectors) = jacobi_eigen(scatter);
    let mut min_idx = 0;
    for i in 1..6 {
        if eigenvalues[i] < eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let mut coef = [0.0f64; 6];
    for (i, c) in coef.iter_mut().enumerate() {
        *c = vectors[i][min_idx];
    }
    // deterministic sign: largest-magnitude coefficient positive
    let lead = coef
        .iter()
        .cloned()
        .fold(0.0f64, |m, c| if c.abs() > m.abs() { c } else { m });
    if lead < 0.0 {
        for c in coef.iter_mut() {
            *c = -*c;
        }
    }

    let mut residual = 0.0f64;
    for &(u, v) in points {
        let (u, v) = (u / scale, v / scale);
        let q = coef[0] * u * u
            + coef[1] * u * v
            + coef[2] * v * v
            + coef[3] * u
            + coef[4] * v
            + coef[5];
        residual = residual.max(q.abs());
    }

    let disc = coef[1] * coef[1] - 4.0 * coef[0] * coef[2];
    let conic_type = if disc.abs() < PARABOLA_DEAD_ZONE {
        ConicType::Parabola
    } else if disc < 0.0 {
        ConicType::Ellipse
    } else {
        ConicType::Hyperbola
    };
    let eccentricity = eccentricity_of(&coef, conic_type);

    ConicFit {
        conic_type,
        residual,
        eccentricity,
        coefficients: coef,
        scale,
    }
}

fn eccentricity_of(coef: &[f64; 6], conic_type: ConicType) -> f64 {
    if conic_type == ConicType::Parabola {
        return 1.0;
    }
    let (a, b, c, d, e, f) = (coef[0], coef[1], coef[2], coef[3], coef[4], coef[5]);
    // center: solve [2a b; b 2c] (u0, v0) = (-d, -e)
    let det = 4.0 * a * c - b * b;
    if det.abs() < 1e-300 {
        return f64::NAN;
    }
    let u0 = (-2.0 * c * d + b * e) / det;
    let v0 = (b * d - 2.0 * a * e) / det;
    let k = a * u0 * u0 + b * u0 * v0 + c * v0 * v0 + d * u0 + e * v0 + f;
    // principal-axis eigenvalues of [[a, b/2], [b/2, c]]
    let tr = a + c;
    let gap = ((a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (0.5 * (tr + gap), 0.5 * (tr - gap));
    match conic_type {
        ConicType::Ellipse => {
            // lambda u'^2 + mu v'^2 = -k with both eigenvalues of one sign;
            // semi-axes^2 = -k/lambda, so e^2 = 1 - min/max of the pair
            let (lo, hi) = (l1.abs().min(l2.abs()), l1.abs().max(l2.abs()));
            (1.0 - lo / hi).max(0.0).sqrt()
        }
        ConicType::Hyperbola => {
            // transverse axis along the eigenvalue matching the sign of -k
            let rhs = -k;
            let (lt, lo) = if l1 * rhs > 0.0 { (l1, l2) } else { (l2, l1) };
            (1.0 + (lt / lo).abs()).sqrt()
        }
        ConicType::Parabola => 1.0,
    }
}

/// Symmetric-matrix eigendecomposition by cyclic Jacobi sweeps. Returns
/// (eigenvalues, eigenvectors) with eigenvectors in the columns.
fn jacobi_eigen<const N: usize>(mut a: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut v = [[0.0f64; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..100 {
        let mut off = 0.0f64;
        for p in 0..N {
            for q in p + 1..N {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cth = 1.0 / (t * t + 1.0).sqrt();
                let sth = t * cth;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cth * akp - sth * akq;
                    a[k][q] = sth * akp + cth * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cth * apk - sth * aqk;
                    a[q][k] = sth * apk + cth * aqk;
                }
                for k in 0..N {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = cth * vkp - sth * vkq;
                    v[k][q] = sth * vkp + cth * vkq;
                }
            }
        }
    }
    let mut eig = [0.0f64; N];
    for (i, e) in eig.iter_mut().enumerate() {
        *e = a[i][i];
    }
    (eig, v)
}

/// Verify plane confinement against N = K + (alpha/q) J and fit the in-plane
/// conic. `j`, `k` and `q` are the conserved values taken from the run.
pub fn plane_and_conic(
    traj: &Trajectory,
    j: Vec3,
    k: Vec3,
    alpha: f64,
    q: f64,
) -> Result<ConicReport, AnalysisError> {
    if q.abs() < 1e-10 {
        return Err(AnalysisError::DegenerateCharge { q });
    }
    let n = k + j * (alpha / q);
    let offset = j.norm_sq() - q * q;
    let n_norm = n.norm();
    let mut max_off = 0.0f64;
    let positions: Vec<Vec3> = traj.samples.iter().map(|s| s.position).collect();
    for p in &positions {
        max_off = max_off.max((n.dot(*p) - offset).abs() / n_norm);
    }
    let projected = project_to_plane(&positions, n, offset);
    let conic_fit = fit_conic(&projected);
    let cone_angle_stats = cone_check(traj, 1e-6)?;
    Ok(ConicReport {
        cone_angle_stats,
        planarity: Planarity {
            normal: n,
            max_off_plane_distance: max_off,
        },
        conic_fit,
    })
}

// ---------------------------------------------------------------------------
// worldline gauge covariance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GaugeComparison {
    /// max_t |x_transformed(t) - x(t)|
    pub max_position_deviation: f64,
    /// max_t |Q_transformed(t) - Ad_{g(x(t))} Q(t)|
    pub max_isospin_deviation: f64,
}

/// Integrate the scenario and its gauge transform (potential conjugated and
/// shifted, initial isospin rotated) on the same fixed-step grid, and report
/// how far the worldline and the pointwise-rotated isospin deviate.
pub fn gauge_covariance_experiment(
    initial: ParticleState,
    field: &GaugeFieldConfig,
    potential: Option<&ScalarPotentialConfig>,
    cfg: &IntegratorConfig,
    gauge: &GaugeFunction,
) -> Result<GaugeComparison, AnalysisError> {
    if traj_is_adaptive(cfg) {
        return Err(AnalysisError::RequiresFixedStep);
    }
    let base = integrate(initial, field, potential, cfg)?;

    let transformed_field = field.gauge_transformed(gauge.clone());
    let transformed_initial = ParticleState::new(
        initial.t,
        initial.position,
        initial.momentum,
        gauge.adjoint_at(initial.position, initial.isospin),
    );
    let transformed = integrate(transformed_initial, &transformed_field, potential, cfg)?;

    let n = base.samples.len().min(transformed.samples.len());
    let mut dev_x = 0.0f64;
    let mut dev_q = 0.0f64;
    for i in 0..n {
        let (a, b) = (&base.samples[i], &transformed.samples[i]);
        dev_x = dev_x.max((a.position - b.position).norm());
        let mapped = gauge.adjoint_at(a.position, a.isospin);
        dev_q = dev_q.max((b.isospin - mapped).norm());
    }
    Ok(GaugeComparison {
        max_position_deviation: dev_x,
        max_isospin_deviation: dev_q,
    })
}

fn traj_is_adaptive(cfg: &IntegratorConfig) -> bool {
    matches!(cfg.method, crate::dynamics::Method::Rk45Adaptive { .. })
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

/// Render the projected orbit as an SVG polyline with the fitted conic
/// overlaid as sampled dots. Self-contained output, no external tooling.
pub fn render_orbit_svg(points: &[(f64, f64)], fit: Option<&ConicFit>) -> String {
    const SIZE: f64 = 600.0;
    const MARGIN: f64 = 30.0;
    let (mut lo_u, mut hi_u) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_v, mut hi_v) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(u, v) in points {
        lo_u = lo_u.min(u);
        hi_u = hi_u.max(u);
        lo_v = lo_v.min(v);
        hi_v = hi_v.max(v);
    }
    let span = (hi_u - lo_u).max(hi_v - lo_v).max(1e-12);
    let px = |u: f64, v: f64| {
        (
            MARGIN + (u - lo_u) / span * (SIZE - 2.0 * MARGIN),
            SIZE - MARGIN - (v - lo_v) / span * (SIZE - 2.0 * MARGIN),
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    ));

    if let Some(fit) = fit {
        let [a, b, c, d, e, f] = fit.coefficients;
        svg.push_str("<g fill=\"#d62728\" fill-opacity=\"0.6\">\n");
        let steps = 400;
        for s in 0..=steps {
            let u_raw = lo_u + (hi_u - lo_u) * s as f64 / steps as f64;
            let u = u_raw / fit.scale;
            // solve c v^2 + (b u + e) v + (a u^2 + d u + f) = 0
            if c.abs() < 1e-12 {
                continue;
            }
            let bb = b * u + e;
            let cc = a * u * u + d * u + f;
            let disc = bb * bb - 4.0 * c * cc;
            if disc < 0.0 {
                continue;
            }
            for sign in [-1.0, 1.0] {
                let v = (-bb + sign * disc.sqrt()) / (2.0 * c) * fit.scale;
                if v >= lo_v - 0.05 * span && v <= hi_v + 0.05 * span {
                    let (x, y) = px(u_raw, v);
                    svg.push_str(&format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.6\"/>\n"));
                }
            }
        }
        svg.push_str("</g>\n");
    }

    svg.push_str("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"");
    for &(u, v) in points {
        let (x, y) = px(u, v);
        svg.push_str(&format!("{x:.2},{y:.2} "));
    }
    svg.push_str("\"/>\n</svg>\n");
    svg
}
