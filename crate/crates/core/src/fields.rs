//! Static SU(2) gauge-field configurations evaluated pointwise.
//!
//! The catalog covers the vacuum, analytic pure-gauge configurations built
//! from fixed-axis gauge functions, the hedgehog monopole
//! (A_i^a = eps_{iak} x_k / r^2, F_ij^a = eps_{ijk} x_k x_a / r^4), and its
//! one-parameter diatomic deformation (potential scaled by 1-kappa, field
//! strength by 1-kappa^2; kappa = 0 recovers the hedgehog, kappa = +1 is the
//! bare vacuum and kappa = -1 a nontrivial pure gauge).
//!
//! Sign conventions (fixed jointly with `su2` and `dynamics`): gauge
//! transformations act as A_i -> Ad_g(A_i) + (d_i g) g^{-1} and
//! F_ij -> Ad_g(F_ij), and in this component basis the curvature of a
//! potential is
//!
//! ```text
//! F_ij = d_i A_j - d_j A_i - [A_i, A_j]
//! ```
//!
//! With the opposite commutator sign the analytic hedgehog pair (A, F) would
//! not match its own finite-difference reconstruction; `check_f_from_a`
//! guards exactly this consistency and is exercised in the tests.

use crate::su2::{AlgebraElement, GroupElement};
use crate::vec3::{levi_civita, Vec3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Evaluations this close to the monopole singularity are rejected.
pub const GUARD_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("evaluation point inside guard radius: r = {r:.6e} <= {r_min:.6e}")]
    SingularPoint { r: f64, r_min: f64 },
}

/// A smooth SU(2)-valued gauge function with a fixed rotation axis,
/// g(x) = exp(f(x) n) with f(x) = a0 + slope.x + amp * sin(freq.x).
///
/// Because the axis is fixed, the Maurer-Cartan form (d_i g) g^{-1} has the
/// closed form (d_i f) n, which keeps pure-gauge field strengths exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeFunction {
    axis: Vec3,
    a0: f64,
    slope: Vec3,
    amp: f64,
    freq: Vec3,
}

impl GaugeFunction {
    pub fn new(axis: Vec3, a0: f64, slope: Vec3, amp: f64, freq: Vec3) -> Self {
        GaugeFunction {
            axis: axis.normalized(),
            a0,
            slope,
            amp,
            freq,
        }
    }

    /// The trivial gauge function g(x) = identity.
    pub fn identity() -> Self {
        GaugeFunction::new(Vec3::basis(2), 0.0, Vec3::ZERO, 0.0, Vec3::ZERO)
    }

    /// Spatially constant rotation by `angle` about `axis`.
    pub fn constant(angle: f64, axis: Vec3) -> Self {
        GaugeFunction::new(axis, angle, Vec3::ZERO, 0.0, Vec3::ZERO)
    }

    /// Deterministic pseudo-random gauge function with O(1) profile
    /// magnitudes, suitable for covariance experiments.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = |r: &mut ChaCha8Rng| {
            loop {
                let v = Vec3::new(
                    r.gen_range(-1.0..1.0),
                    r.gen_range(-1.0..1.0),
                    r.gen_range(-1.0..1.0),
                );
                if v.norm_sq() > 1e-3 && v.norm_sq() <= 1.0 {
                    return v.normalized();
                }
            }
        };
        let axis = unit(&mut rng);
        let a0 = rng.gen_range(-1.0..1.0);
        let slope = unit(&mut rng) * rng.gen_range(0.1..0.6);
        let amp = rng.gen_range(0.2..0.6);
        let freq = unit(&mut rng) * rng.gen_range(0.3..1.0);
        GaugeFunction::new(axis, a0, slope, amp, freq)
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    /// The profile f(x).
    pub fn angle(&self, x: Vec3) -> f64 {
        self.a0 + self.slope.dot(x) + self.amp * (self.freq.dot(x)).sin()
    }

    /// Analytic gradient of the profile.
    pub fn angle_gradient(&self, x: Vec3) -> Vec3 {
        self.slope + self.freq * (self.amp * (self.freq.dot(x)).cos())
    }

    pub fn group_element(&self, x: Vec3) -> GroupElement {
        (AlgebraElement(self.axis) * self.angle(x)).exp()
    }

    /// Adjoint action of g(x) on an algebra element.
    pub fn adjoint_at(&self, x: Vec3, a: AlgebraElement) -> AlgebraElement {
        self.group_element(x).adjoint(a)
    }

    /// Components of (d_i g) g^{-1}: the pure-gauge potential of g.
    pub fn maurer_cartan(&self, x: Vec3) -> [AlgebraElement; 3] {
        let grad = self.angle_gradient(x);
        [
            AlgebraElement(self.axis * grad[0]),
            AlgebraElement(self.axis * grad[1]),
            AlgebraElement(self.axis * grad[2]),
        ]
    }
}

/// A named static gauge-field configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GaugeFieldConfig {
    Vacuum,
    PureGauge { gauge: GaugeFunction },
    WuYang,
    Diatomic { kappa: f64 },
    /// A base configuration conjugated by a gauge function; used by the
    /// covariance experiments.
    Transformed {
        base: Box<GaugeFieldConfig>,
        gauge: GaugeFunction,
    },
}

impl GaugeFieldConfig {
    pub fn diatomic(kappa: f64) -> Self {
        GaugeFieldConfig::Diatomic { kappa }
    }

    pub fn pure_gauge(gauge: GaugeFunction) -> Self {
        GaugeFieldConfig::PureGauge { gauge }
    }

    /// Wrap `self` in the gauge transformation generated by `gauge`.
    pub fn gauge_transformed(&self, gauge: GaugeFunction) -> Self {
        GaugeFieldConfig::Transformed {
            base: Box::new(self.clone()),
            gauge,
        }
    }

    /// The hedgehog deformation parameter: 0 for the monopole itself,
    /// kappa for the diatomic family, None for non-hedgehog kinds.
    pub fn kappa(&self) -> Option<f64> {
        match self {
            GaugeFieldConfig::WuYang => Some(0.0),
            GaugeFieldConfig::Diatomic { kappa } => Some(*kappa),
            _ => None,
        }
    }

    /// Radius of the excluded ball around the field's singular point.
    pub fn guard_radius(&self) -> f64 {
        match self {
            GaugeFieldConfig::Vacuum | GaugeFieldConfig::PureGauge { .. } => 0.0,
            GaugeFieldConfig::WuYang | GaugeFieldConfig::Diatomic { .. } => GUARD_RADIUS,
            GaugeFieldConfig::Transformed { base, .. } => base.guard_radius(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GaugeFieldConfig::Vacuum => "vacuum",
            GaugeFieldConfig::PureGauge { .. } => "pure-gauge",
            GaugeFieldConfig::WuYang => "wu-yang",
            GaugeFieldConfig::Diatomic { .. } => "diatomic",
            GaugeFieldConfig::Transformed { .. } => "transformed",
        }
    }

    fn check_radius(&self, x: Vec3) -> Result<(), FieldError> {
        let r_min = self.guard_radius();
        if r_min > 0.0 {
            let r = x.norm();
            if r <= r_min {
                return Err(FieldError::SingularPoint { r, r_min });
            }
        }
        Ok(())
    }

    /// Potential components A_i^a at x; `result[i]` is the algebra element
    /// carried by the spatial direction i.
    pub fn potential_at(&self, x: Vec3) -> Result<[AlgebraElement; 3], FieldError> {
        self.check_radius(x)?;
        Ok(match self {
            GaugeFieldConfig::Vacuum => [AlgebraElement::ZERO; 3],
            GaugeFieldConfig::PureGauge { gauge } => gauge.maurer_cartan(x),
            GaugeFieldConfig::WuYang => hedgehog_potential(x, 0.0),
            GaugeFieldConfig::Diatomic { kappa } => hedgehog_potential(x, *kappa),
            GaugeFieldConfig::Transformed { base, gauge } => {
                let a = base.potential_at(x)?;
                let g = gauge.group_element(x);
                let mc = gauge.maurer_cartan(x);
                [
                    g.adjoint(a[0]) + mc[0],
                    g.adjoint(a[1]) + mc[1],
                    g.adjoint(a[2]) + mc[2],
                ]
            }
        })
    }

    /// Analytic field strength F_ij^a at x, antisymmetric in (i, j).
    pub fn field_strength_at(&self, x: Vec3) -> Result<[[AlgebraElement; 3]; 3], FieldError> {
        self.check_radius(x)?;
        Ok(match self {
            GaugeFieldConfig::Vacuum | GaugeFieldConfig::PureGauge { .. } => {
                [[AlgebraElement::ZERO; 3]; 3]
            }
            GaugeFieldConfig::WuYang => hedgehog_field_strength(x, 0.0),
            GaugeFieldConfig::Diatomic { kappa } => hedgehog_field_strength(x, *kappa),
            GaugeFieldConfig::Transformed { base, gauge } => {
                let f = base.field_strength_at(x)?;
                let g = gauge.group_element(x);
                let mut out = [[AlgebraElement::ZERO; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        out[i][j] = g.adjoint(f[i][j]);
                    }
                }
                out
            }
        })
    }

    /// Magnetic components B_k^a = 1/2 eps_{ijk} F_ij^a.
    pub fn magnetic_field_at(&self, x: Vec3) -> Result<[AlgebraElement; 3], FieldError> {
        let f = self.field_strength_at(x)?;
        let mut b = [AlgebraElement::ZERO; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let e = levi_civita(i, j, k);
                    if e != 0.0 {
                        b[k] = b[k] + f[i][j] * (0.5 * e);
                    }
                }
            }
        }
        Ok(b)
    }

    /// Max-abs residual between the analytic field strength and its central
    /// finite-difference reconstruction from the potential. O(h^2).
    pub fn check_f_from_a(&self, x: Vec3, h: f64) -> Result<f64, FieldError> {
        let r_min = self.guard_radius();
        if r_min > 0.0 && x.norm() <= r_min + h {
            return Err(FieldError::SingularPoint {
                r: x.norm(),
                r_min: r_min + h,
            });
        }
        let a = self.potential_at(x)?;
        let analytic = self.field_strength_at(x)?;
        // dA[i][j] = d_i A_j
        let mut da = [[AlgebraElement::ZERO; 3]; 3];
        for i in 0..3 {
            let step = Vec3::basis(i) * h;
            let plus = self.potential_at(x + step)?;
            let minus = self.potential_at(x - step)?;
            for j in 0..3 {
                da[i][j] = (plus[j] - minus[j]) * (0.5 / h);
            }
        }
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let reconstructed = da[i][j] - da[j][i] - a[i].bracket(a[j]);
                worst = worst.max((reconstructed - analytic[i][j]).0.max_abs());
            }
        }
        Ok(worst)
    }
}

/// A_i = (1 - kappa) (x cross e_i) / r^2 in algebra components.
fn hedgehog_potential(x: Vec3, kappa: f64) -> [AlgebraElement; 3] {
    let scale = (1.0 - kappa) / x.norm_sq();
    [
        AlgebraElement(x.cross(Vec3::basis(0)) * scale),
        AlgebraElement(x.cross(Vec3::basis(1)) * scale),
        AlgebraElement(x.cross(Vec3::basis(2)) * scale),
    ]
}

/// F_ij^a = (1 - kappa^2) eps_{ijk} x_k x_a / r^4.
fn hedgehog_field_strength(x: Vec3, kappa: f64) -> [[AlgebraElement; 3]; 3] {
    let r2 = x.norm_sq();
    let scale = (1.0 - kappa * kappa) / (r2 * r2);
    let mut f = [[AlgebraElement::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += levi_civita(i, j, k) * x[k];
            }
            f[i][j] = AlgebraElement(x * (s * scale));
        }
    }
    f
}

/// Radial scalar potential V(r) = q^2 / (2 r^2) + alpha / r + beta.
///
/// `q_param` is a free scenario parameter. It is physically correlated with
/// the particle's conserved radial charge; scenario validation warns (but
/// does not fail) when the two disagree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarPotentialConfig {
    pub q_param: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ScalarPotentialConfig {
    pub fn new(q_param: f64, alpha: f64, beta: f64) -> Self {
        ScalarPotentialConfig {
            q_param,
            alpha,
            beta,
        }
    }

    fn check(r: f64) -> Result<(), FieldError> {
        if r <= 0.0 {
            return Err(FieldError::SingularPoint { r, r_min: 0.0 });
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> Result<f64, FieldError> {
        Self::check(r)?;
        Ok(self.q_param * self.q_param / (2.0 * r * r) + self.alpha / r + self.beta)
    }

    /// dV/dr. Since V carries no isospin dependence the covariant gradient
    /// reduces to the ordinary radial gradient.
    pub fn radial_derivative(&self, r: f64) -> Result<f64, FieldError> {
        Self::check(r)?;
        Ok(-self.q_param * self.q_param / (r * r * r) - self.alpha / (r * r))
    }
}

/// The hedgehog Higgs direction field of a monopole of charge m:
/// Phi^a = (1 - m/r) x^a / r. Only its direction enters the dynamics (it
/// defines the radial charge); no force is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiggsHedgehog {
    pub m: f64,
}

impl HiggsHedgehog {
    pub fn field_at(&self, x: Vec3) -> Result<AlgebraElement, FieldError> {
        let r = x.norm();
        if r <= GUARD_RADIUS {
            return Err(FieldError::SingularPoint {
                r,
                r_min: GUARD_RADIUS,
            });
        }
        Ok(AlgebraElement(x * ((1.0 - self.m / r) / r)))
    }

    /// Unit direction Phi-hat, equal to x-hat everywhere away from the core.
    pub fn direction(&self, x: Vec3) -> Result<AlgebraElement, FieldError> {
        let r = x.norm();
        if r <= GUARD_RADIUS {
            return Err(FieldError::SingularPoint {
                r,
                r_min: GUARD_RADIUS,
            });
        }
        Ok(AlgebraElement(x * (1.0 / r)))
    }
}
