//! Matrix structure groups `U(1)` and `SO(3)`.
//!
//! Algebra and coalgebra elements are stored as three-vectors in a fixed
//! basis. For `U(1)` only the first coordinate is used and the remaining
//! two stay zero. The circle is embedded in `SO(3)` as rotations about the
//! third axis whenever a matrix representation is needed, so that spectral
//! operations on group-valued fields can work entry-wise for both groups.
//!
//! Duality is the coordinate dot product: `<sigma, xi> = sigma . xi`. The
//! invariant inner product `tau` is a positive multiple of that dot product,
//! scaled so that the Haar volume of the group is one.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trace threshold below which `SO(3)` logarithms are refused.
pub const CUT_LOCUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureGroup {
    /// `U(1)`, stored as an unreduced angle.
    Circle,
    /// `SO(3)` with the hat-map basis of `so(3)`.
    Rotation3,
}

/// Element of `o`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgebraElement(pub Vector3<f64>);

/// Element of `o*`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoalgebraElement(pub Vector3<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GroupElement {
    Circle(f64),
    Rotation(Matrix3<f64>),
}

macro_rules! vector_ops {
    ($t:ident) => {
        impl $t {
            pub fn zero() -> Self {
                Self(Vector3::zeros())
            }

            pub fn new(x: f64, y: f64, z: f64) -> Self {
                Self(Vector3::new(x, y, z))
            }

            pub fn scalar(x: f64) -> Self {
                Self(Vector3::new(x, 0.0, 0.0))
            }

            pub fn norm(&self) -> f64 {
                self.0.norm()
            }

            pub fn norm_squared(&self) -> f64 {
                self.0.norm_squared()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }

            pub fn coords(&self, dim: usize) -> &[f64] {
                &self.0.as_slice()[..dim]
            }

            pub fn from_coords(c: &[f64]) -> Self {
                let mut v = Vector3::zeros();
                for (i, x) in c.iter().enumerate().take(3) {
                    v[i] = *x;
                }
                Self(v)
            }
        }

        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                $t(self.0 + rhs.0)
            }
        }

        impl AddAssign for $t {
            fn add_assign(&mut self, rhs: $t) {
                self.0 += rhs.0;
            }
        }

        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                $t(self.0 - rhs.0)
            }
        }

        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t(-self.0)
            }
        }

        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, rhs: f64) -> $t {
                $t(self.0 * rhs)
            }
        }
    };
}

vector_ops!(AlgebraElement);
vector_ops!(CoalgebraElement);

impl CoalgebraElement {
    /// Duality pairing `<sigma, xi>`.
    pub fn pair(&self, xi: &AlgebraElement) -> f64 {
        self.0.dot(&xi.0)
    }
}

impl GroupElement {
    /// 3x3 orthogonal matrix; the circle acts as rotations about the third axis.
    pub fn matrix(&self) -> Matrix3<f64> {
        match *self {
            GroupElement::Circle(theta) => {
                let (s, c) = theta.sin_cos();
                Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
            }
            GroupElement::Rotation(r) => r,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match *self {
            GroupElement::Circle(theta) => GroupElement::Circle(-theta),
            GroupElement::Rotation(r) => GroupElement::Rotation(r.transpose()),
        }
    }

    /// Angle reduced to `(-pi, pi]` for circle elements; used on output only.
    pub fn reduced_angle(&self) -> Option<f64> {
        match *self {
            GroupElement::Circle(theta) => Some(wrap_angle(theta)),
            GroupElement::Rotation(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            GroupElement::Circle(t) => t.is_finite(),
            GroupElement::Rotation(r) => r.iter().all(|v| v.is_finite()),
        }
    }

    /// Distance used by tests and verification: Frobenius norm of the matrix difference.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (self.matrix() - other.matrix()).norm()
    }

    /// Flattened coordinates for snapshot files: the angle, or the nine matrix
    /// entries in row-major order.
    pub fn coordinates(&self) -> Vec<f64> {
        match *self {
            GroupElement::Circle(theta) => vec![theta],
            GroupElement::Rotation(r) => r.transpose().iter().copied().collect(),
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        match (self, rhs) {
            (GroupElement::Circle(a), GroupElement::Circle(b)) => GroupElement::Circle(a + b),
            (GroupElement::Rotation(a), GroupElement::Rotation(b)) => GroupElement::Rotation(a * b),
            _ => panic!("cannot multiply elements of different structure groups"),
        }
    }
}

impl fmt::Display for StructureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureGroup::Circle => write!(f, "U(1)"),
            StructureGroup::Rotation3 => write!(f, "SO(3)"),
        }
    }
}

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

pub fn hat3(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

fn vee3(m: &Matrix3<f64>) -> Vector3<f64> {
    0.5 * Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)])
}

impl StructureGroup {
    pub fn dim(self) -> usize {
        match self {
            StructureGroup::Circle => 1,
            StructureGroup::Rotation3 => 3,
        }
    }

    /// Scale `c` with `tau(xi, eta) = c xi.eta`, fixed by `Vol(O) = 1`.
    ///
    /// The circle has length `2 pi` for `c = 1`; `SO(3)` has volume `8 pi^2`
    /// for the hat-map metric, and volume scales as `c^{dim/2}`.
    pub fn tau_scale(self) -> f64 {
        match self {
            StructureGroup::Circle => 1.0 / (4.0 * PI * PI),
            StructureGroup::Rotation3 => (8.0 * PI * PI).powf(-2.0 / 3.0),
        }
    }

    /// Haar volume of the group measured with `tau`.
    pub fn volume(self) -> f64 {
        let c = self.tau_scale();
        match self {
            StructureGroup::Circle => 2.0 * PI * c.sqrt(),
            StructureGroup::Rotation3 => 8.0 * PI * PI * c.powf(1.5),
        }
    }

    pub fn identity(self) -> GroupElement {
        match self {
            StructureGroup::Circle => GroupElement::Circle(0.0),
            StructureGroup::Rotation3 => GroupElement::Rotation(Matrix3::identity()),
        }
    }

    pub fn basis(self, a: usize) -> AlgebraElement {
        assert!(a < self.dim());
        let mut v = Vector3::zeros();
        v[a] = 1.0;
        AlgebraElement(v)
    }

    pub fn dual_basis(self, a: usize) -> CoalgebraElement {
        CoalgebraElement(self.basis(a).0)
    }

    /// Structure constants `C[c][a][b]` with `[e_a, e_b] = C^c_{ab} e_c`.
    pub fn structure_constants(self) -> Vec<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut table = vec![vec![vec![0.0; n]; n]; n];
        if self == StructureGroup::Rotation3 {
            for a in 0..3 {
                for b in 0..3 {
                    let br = self.ad(&self.basis(a), &self.basis(b));
                    for (c, row) in table.iter_mut().enumerate() {
                        row[a][b] = br.0[c];
                    }
                }
            }
        }
        table
    }

    /// Matrix of `xi` in the 3x3 representation.
    pub fn hat(self, xi: &AlgebraElement) -> Matrix3<f64> {
        match self {
            StructureGroup::Circle => {
                let t = xi.0[0];
                Matrix3::new(0.0, -t, 0.0, t, 0.0, 0.0, 0.0, 0.0, 0.0)
            }
            StructureGroup::Rotation3 => hat3(&xi.0),
        }
    }

    /// Algebra coordinates of the skew part of a 3x3 matrix.
    pub fn vee(self, m: &Matrix3<f64>) -> AlgebraElement {
        match self {
            StructureGroup::Circle => AlgebraElement::scalar(0.5 * (m[(1, 0)] - m[(0, 1)])),
            StructureGroup::Rotation3 => AlgebraElement(vee3(m)),
        }
    }

    pub fn exp(self, xi: &AlgebraElement) -> GroupElement {
        match self {
            StructureGroup::Circle => GroupElement::Circle(xi.0[0]),
            StructureGroup::Rotation3 => {
                let theta = xi.0.norm();
                let k = hat3(&xi.0);
                let (a, b) = if theta < 1e-4 {
                    let t2 = theta * theta;
                    (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
                } else {
                    (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
                };
                GroupElement::Rotation(Matrix3::identity() + k * a + k * k * b)
            }
        }
    }

    /// Principal logarithm. The circle returns its stored (unreduced) angle.
    pub fn log(self, g: &GroupElement) -> Result<AlgebraElement> {
        match (self, g) {
            (StructureGroup::Circle, GroupElement::Circle(theta)) => Ok(AlgebraElement::scalar(*theta)),
            (StructureGroup::Rotation3, GroupElement::Rotation(r)) => {
                let tr = r.trace();
                if tr <= -1.0 + CUT_LOCUS_TOL {
                    return Err(Error::CutLocus { trace: tr });
                }
                let cos_t = ((tr - 1.0) * 0.5).clamp(-1.0, 1.0);
                let theta = cos_t.acos();
                let skew = vee3(r);
                if theta < 1e-4 {
                    let t2 = theta * theta;
                    return Ok(AlgebraElement(skew * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0)));
                }
                if theta < PI - 1e-2 {
                    return Ok(AlgebraElement(skew * (theta / theta.sin())));
                }
                // Near pi the skew part is tiny; recover the axis from the symmetric part.
                let sym = (r + r.transpose()) * 0.5 - Matrix3::identity() * cos_t;
                let (mut best, mut col) = (0usize, 0.0);
                for i in 0..3 {
                    if sym[(i, i)] > col {
                        col = sym[(i, i)];
                        best = i;
                    }
                }
                let mut axis: Vector3<f64> = sym.column(best).into();
                axis /= axis.norm();
                if axis.dot(&skew) < 0.0 {
                    axis = -axis;
                }
                Ok(AlgebraElement(axis * theta))
            }
            _ => Err(Error::InvalidInput("group element does not belong to this group".into())),
        }
    }

    pub fn ad(self, xi: &AlgebraElement, eta: &AlgebraElement) -> AlgebraElement {
        match self {
            StructureGroup::Circle => AlgebraElement::zero(),
            StructureGroup::Rotation3 => AlgebraElement(xi.0.cross(&eta.0)),
        }
    }

    /// `Ad_g xi`.
    pub fn adjoint(self, g: &GroupElement, xi: &AlgebraElement) -> AlgebraElement {
        match self {
            StructureGroup::Circle => *xi,
            StructureGroup::Rotation3 => AlgebraElement(g.matrix() * xi.0),
        }
    }

    /// `Ad*_g sigma`, defined by `<Ad*_g sigma, xi> = <sigma, Ad_g xi>`.
    pub fn co_adjoint(self, g: &GroupElement, sigma: &CoalgebraElement) -> CoalgebraElement {
        match self {
            StructureGroup::Circle => *sigma,
            StructureGroup::Rotation3 => CoalgebraElement(g.matrix().transpose() * sigma.0),
        }
    }

    /// `ad*_xi sigma`, defined by `<ad*_xi sigma, eta> = <sigma, [xi, eta]>`.
    pub fn coad(self, xi: &AlgebraElement, sigma: &CoalgebraElement) -> CoalgebraElement {
        match self {
            StructureGroup::Circle => CoalgebraElement::zero(),
            StructureGroup::Rotation3 => CoalgebraElement(sigma.0.cross(&xi.0)),
        }
    }

    pub fn sharp(self, sigma: &CoalgebraElement) -> AlgebraElement {
        AlgebraElement(sigma.0 / self.tau_scale())
    }

    pub fn flat(self, xi: &AlgebraElement) -> CoalgebraElement {
        CoalgebraElement(xi.0 * self.tau_scale())
    }

    pub fn tau_pair(self, xi: &AlgebraElement, eta: &AlgebraElement) -> f64 {
        self.tau_scale() * xi.0.dot(&eta.0)
    }

    /// Dual inner product on `o*`.
    pub fn cotau_pair(self, a: &CoalgebraElement, b: &CoalgebraElement) -> f64 {
        a.0.dot(&b.0) / self.tau_scale()
    }

    /// Cayley map `(I - xi/2)^{-1} (I + xi/2)`. On the abelian circle this is
    /// the exponential.
    pub fn cayley(self, xi: &AlgebraElement) -> GroupElement {
        match self {
            StructureGroup::Circle => self.exp(xi),
            StructureGroup::Rotation3 => {
                let k = hat3(&xi.0) * 0.5;
                let lhs = Matrix3::identity() - k;
                let rhs = Matrix3::identity() + k;
                let inv = lhs.try_inverse().expect("I - skew is always invertible");
                GroupElement::Rotation(inv * rhs)
            }
        }
    }

    /// Left Jacobian of `exp`: `d exp(xi) exp(xi)^{-1} = J_l(xi) dxi`.
    pub fn left_jacobian(self, xi: &AlgebraElement) -> Matrix3<f64> {
        match self {
            StructureGroup::Circle => {
                let mut m = Matrix3::zeros();
                m[(0, 0)] = 1.0;
                m
            }
            StructureGroup::Rotation3 => {
                let theta = xi.0.norm();
                let k = hat3(&xi.0);
                let (a, b) = if theta < 1e-4 {
                    let t2 = theta * theta;
                    (0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0)
                } else {
                    let t2 = theta * theta;
                    ((1.0 - theta.cos()) / t2, (theta - theta.sin()) / (t2 * theta))
                };
                Matrix3::identity() + k * a + k * k * b
            }
        }
    }

    /// Right Jacobian: `exp(xi)^{-1} d exp(xi) = J_r(xi) dxi`.
    pub fn right_jacobian(self, xi: &AlgebraElement) -> Matrix3<f64> {
        self.left_jacobian(&-*xi)
    }

    /// Nearest group element to a 3x3 matrix. Circle angles are unwrapped
    /// to the branch closest to `reference`.
    pub fn project(self, m: &Matrix3<f64>, reference: &GroupElement) -> GroupElement {
        match (self, reference) {
            (StructureGroup::Circle, GroupElement::Circle(r)) => {
                let theta = (m[(1, 0)] - m[(0, 1)]).atan2(m[(0, 0)] + m[(1, 1)]);
                GroupElement::Circle(r + wrap_angle(theta - r))
            }
            _ => {
                let svd = m.svd(true, true);
                let u = svd.u.expect("requested u");
                let vt = svd.v_t.expect("requested v_t");
                let mut r = u * vt;
                if r.determinant() < 0.0 {
                    let mut flip = Matrix3::identity();
                    flip[(2, 2)] = -1.0;
                    r = u * flip * vt;
                }
                GroupElement::Rotation(r)
            }
        }
    }

    /// Uniform random algebra coordinates in `[-scale, scale]`.
    pub fn random_algebra<R: Rng + ?Sized>(self, rng: &mut R, scale: f64) -> AlgebraElement {
        let mut v = Vector3::zeros();
        for i in 0..self.dim() {
            v[i] = rng.random_range(-scale..=scale);
        }
        AlgebraElement(v)
    }

    pub fn random_coalgebra<R: Rng + ?Sized>(self, rng: &mut R, scale: f64) -> CoalgebraElement {
        CoalgebraElement(self.random_algebra(rng, scale).0)
    }

    /// Random element away from the cut locus.
    pub fn random_element<R: Rng + ?Sized>(self, rng: &mut R) -> GroupElement {
        match self {
            StructureGroup::Circle => GroupElement::Circle(rng.random_range(-PI..PI)),
            StructureGroup::Rotation3 => {
                let mut v = self.random_algebra(rng, 1.0);
                while v.norm() < 1e-3 {
                    v = self.random_algebra(rng, 1.0);
                }
                let angle = rng.random_range(0.0..(PI - 0.1));
                self.exp(&AlgebraElement(v.0 / v.norm() * angle))
            }
        }
    }

    pub fn check_member(self, g: &GroupElement) -> bool {
        match (self, g) {
            (StructureGroup::Circle, GroupElement::Circle(t)) => t.is_finite(),
            (StructureGroup::Rotation3, GroupElement::Rotation(r)) => {
                (r.transpose() * r - Matrix3::identity()).norm() <= 1e-10
            }
            _ => false,
        }
    }
}
