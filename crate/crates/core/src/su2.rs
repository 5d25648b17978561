//! Exact arithmetic for the su(2) Lie algebra and the SU(2) group.
//!
//! Algebra elements are stored as real 3-vectors of components in the basis
//! T_a = sigma_a / (2i), in which the Lie bracket is the ordinary cross
//! product: [A, B]^a = eps^a_{bc} A^b B^c. No complex matrices are stored
//! anywhere.
//!
//! Group elements are unit quaternions (w, v1, v2, v3) representing
//! w - i v.sigma, renormalized after every composition.
//!
//! Conventions fixed once, here:
//!   * `exp(a)` is the true exponential of a^a T_a, the quaternion
//!     (cos(|a|/2), sin(|a|/2) a_hat).
//!   * `adjoint(g, a)` returns the components of g a g^{-1}. For
//!     g = exp(theta * n) this is the right-handed rotation of `a` by the
//!     angle +theta about the axis n, so
//!     adjoint(exp(theta e3), e1) = cos(theta) e1 + sin(theta) e2.
//!   * adjoint is a left action: adjoint(compose(g, h), a) =
//!     adjoint(g, adjoint(h, a)).
//!   * g and -g act identically through adjoint (the usual double cover);
//!     group elements are therefore only compared through their adjoint
//!     action, never componentwise.

use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// An su(2) element as the real component vector (Q^1, Q^2, Q^3)
/// in the T_a = sigma_a/(2i) basis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraElement(pub Vec3);

impl AlgebraElement {
    pub const ZERO: AlgebraElement = AlgebraElement(Vec3::ZERO);

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        AlgebraElement(Vec3::new(a, b, c))
    }

    /// Basis element T_i as a component vector.
    pub fn basis(i: usize) -> Self {
        AlgebraElement(Vec3::basis(i))
    }

    pub fn components(self) -> Vec3 {
        self.0
    }

    /// Lie bracket [self, other]; the cross product in this basis.
    pub fn bracket(self, other: AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.0.cross(other.0))
    }

    /// Trace-form metric, delta_{ab} in this basis.
    pub fn inner(self, other: AlgebraElement) -> f64 {
        self.0.dot(other.0)
    }

    pub fn norm_sq(self) -> f64 {
        self.0.norm_sq()
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Exponential map into the group: exp(a^a T_a).
    pub fn exp(self) -> GroupElement {
        let theta = self.norm();
        let half = 0.5 * theta;
        // sin(theta/2)/theta, series for small angles
        let s = if theta < 1e-6 {
            0.5 - theta * theta / 48.0
        } else {
            half.sin() / theta
        };
        GroupElement::from_parts(half.cos(), self.0 * s)
    }
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, o: AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.0 + o.0)
    }
}

impl Sub for AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, o: AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.0 - o.0)
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement(-self.0)
    }
}

impl Mul<f64> for AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, s: f64) -> AlgebraElement {
        AlgebraElement(self.0 * s)
    }
}

/// An SU(2) element as a unit quaternion (w, v).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroupElement {
    w: f64,
    v: Vec3,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        w: 1.0,
        v: Vec3::ZERO,
    };

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    /// Build from scalar and vector parts, renormalizing to unit length.
    pub fn from_parts(w: f64, v: Vec3) -> Self {
        GroupElement { w, v }.renormalized()
    }

    /// The four parameters (w, v1, v2, v3).
    pub fn parameters(self) -> [f64; 4] {
        [self.w, self.v[0], self.v[1], self.v[2]]
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.v.norm_sq()).sqrt()
    }

    fn renormalized(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return Self::IDENTITY;
        }
        GroupElement {
            w: self.w / n,
            v: self.v * (1.0 / n),
        }
    }

    /// Group product self * other (quaternion product), renormalized.
    pub fn compose(self, other: GroupElement) -> GroupElement {
        let w = self.w * other.w - self.v.dot(other.v);
        let v = other.v * self.w + self.v * other.w + self.v.cross(other.v);
        GroupElement { w, v }.renormalized()
    }

    /// Group inverse (quaternion conjugate for unit quaternions).
    pub fn inverse(self) -> GroupElement {
        GroupElement {
            w: self.w,
            v: -self.v,
        }
    }

    /// Adjoint action on the algebra: the components of g a g^{-1}.
    ///
    /// An orthogonal (norm-preserving) map; for g = exp(theta n) it is the
    /// rotation by +theta about n.
    pub fn adjoint(self, a: AlgebraElement) -> AlgebraElement {
        let t = self.v.cross(a.0);
        AlgebraElement(a.0 + 2.0 * self.w * t + 2.0 * self.v.cross(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alg(v: [f64; 3]) -> AlgebraElement {
        AlgebraElement::new(v[0], v[1], v[2])
    }

    #[test]
    fn bracket_structure_constants() {
        let e1 = AlgebraElement::basis(0);
        let e2 = AlgebraElement::basis(1);
        assert_eq!(e1.bracket(e2), AlgebraElement::basis(2));
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let a = alg([0.3, -1.2, 0.7]);
        assert_eq!(a.bracket(a), AlgebraElement::ZERO);
    }

    #[test]
    fn bracket_hand_value() {
        let a = alg([1.0, 2.0, 3.0]);
        let b = alg([4.0, 5.0, 6.0]);
        assert_eq!(a.bracket(b), alg([-3.0, 6.0, -3.0]));
    }

    #[test]
    fn inner_is_euclidean() {
        let e1 = AlgebraElement::basis(0);
        let e2 = AlgebraElement::basis(1);
        assert_eq!(e1.inner(e1), 1.0);
        assert_eq!(e1.inner(e2), 0.0);
        let a = alg([1.0, 2.0, 3.0]);
        assert_eq!(a.inner(a), 14.0);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let g = AlgebraElement::ZERO.exp();
        let p = g.parameters();
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!(p[1].abs() + p[2].abs() + p[3].abs() < 1e-15);
    }

    #[test]
    fn adjoint_of_exp_rotates_by_plus_theta() {
        let theta = 0.73;
        let g = (AlgebraElement::basis(2) * theta).exp();
        let r = g.adjoint(AlgebraElement::basis(0));
        let expect = alg([theta.cos(), theta.sin(), 0.0]);
        assert!((r - expect).norm() < 1e-14);
    }

    #[test]
    fn exp_composes_with_its_inverse() {
        let a = alg([0.4, -0.9, 1.3]);
        let g = a.exp().compose((-a).exp());
        let probe = alg([0.2, 0.5, -0.7]);
        assert!((g.adjoint(probe) - probe).norm() < 1e-13);
    }

    #[test]
    fn compose_with_identity() {
        let g = alg([0.4, 0.1, -0.2]).exp();
        let h = g.compose(GroupElement::identity());
        let probe = alg([1.0, -2.0, 0.5]);
        assert!((g.adjoint(probe) - h.adjoint(probe)).norm() < 1e-14);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let g = alg([1.1, -0.3, 0.8]).exp();
        let id = g.inverse().compose(g);
        let probe = alg([0.3, 0.9, -0.4]);
        assert!((id.adjoint(probe) - probe).norm() < 1e-13);
        assert!((id.norm() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn jacobi_identity(
            a in prop::array::uniform3(-2.0f64..2.0),
            b in prop::array::uniform3(-2.0f64..2.0),
            c in prop::array::uniform3(-2.0f64..2.0),
        ) {
            let (a, b, c) = (alg(a), alg(b), alg(c));
            let total = a.bracket(b.bracket(c))
                + b.bracket(c.bracket(a))
                + c.bracket(a.bracket(b));
            let scale = a.norm() * b.norm() * c.norm();
            prop_assert!(total.norm() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn adjoint_preserves_norm_and_bracket(
            x in prop::array::uniform3(-3.0f64..3.0),
            a in prop::array::uniform3(-2.0f64..2.0),
            b in prop::array::uniform3(-2.0f64..2.0),
        ) {
            let g = alg(x).exp();
            let (a, b) = (alg(a), alg(b));
            prop_assert!((g.adjoint(a).norm() - a.norm()).abs() < 1e-12 * a.norm().max(1.0));
            // automorphism: Ad_g [a,b] = [Ad_g a, Ad_g b]
            let lhs = g.adjoint(a.bracket(b));
            let rhs = g.adjoint(a).bracket(g.adjoint(b));
            prop_assert!((lhs - rhs).norm() < 1e-12 * (a.norm() * b.norm()).max(1.0));
            // metric invariance
            prop_assert!((g.adjoint(a).inner(g.adjoint(b)) - a.inner(b)).abs()
                < 1e-12 * (a.norm() * b.norm()).max(1.0));
        }

        #[test]
        fn adjoint_is_left_action(
            x in prop::array::uniform3(-2.0f64..2.0),
            y in prop::array::uniform3(-2.0f64..2.0),
            a in prop::array::uniform3(-2.0f64..2.0),
        ) {
            let (g, h) = (alg(x).exp(), alg(y).exp());
            let a = alg(a);
            let lhs = g.compose(h).adjoint(a);
            let rhs = g.adjoint(h.adjoint(a));
            prop_assert!((lhs - rhs).norm() < 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn compose_is_associative(
            x in prop::array::uniform3(-2.0f64..2.0),
            y in prop::array::uniform3(-2.0f64..2.0),
            z in prop::array::uniform3(-2.0f64..2.0),
            a in prop::array::uniform3(-2.0f64..2.0),
        ) {
            let (g, h, k) = (alg(x).exp(), alg(y).exp(), alg(z).exp());
            let a = alg(a);
            let lhs = g.compose(h).compose(k).adjoint(a);
            let rhs = g.compose(h.compose(k)).adjoint(a);
            prop_assert!((lhs - rhs).norm() < 1e-12 * a.norm().max(1.0));
        }
    }
}
