//! Observables on `T*M x o*`, points of the Yang-Mills phase space and the
//! trivialization `rho`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::Trig;
use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, CoalgebraElement, GroupElement, StructureGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaFactor {
    One,
    Linear(usize),
    Quadratic(usize, usize),
}

/// `coef * trig(k . q) * prod_j p_j^{n_j} * s(sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTerm {
    pub coef: f64,
    pub k: Vec<i64>,
    pub trig: Trig,
    pub p_powers: Vec<u32>,
    pub sigma: SigmaFactor,
}

/// Partial derivatives of an observable at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    pub dq: DVector<f64>,
    pub dp: DVector<f64>,
    /// `delta h / delta sigma`, an algebra element.
    pub dsigma: AlgebraElement,
}

/// Function on `T*M x o*` with `M` the flat torus `T^d`; invariant under the
/// structure group by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub dim: usize,
    pub group: StructureGroup,
    pub terms: Vec<ObservableTerm>,
}

fn powi(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

impl ObservableTerm {
    fn eval(&self, q: &DVector<f64>, p: &DVector<f64>, s: &CoalgebraElement) -> (f64, DVector<f64>, DVector<f64>, AlgebraElement) {
        let d = q.len();
        let phase: f64 = self.k.iter().zip(q.iter()).map(|(k, x)| *k as f64 * x).sum();
        let (t, dt) = match self.trig {
            Trig::Cos => (phase.cos(), -phase.sin()),
            Trig::Sin => (phase.sin(), phase.cos()),
        };
        let mono: f64 = (0..d).map(|j| powi(p[j], self.p_powers[j])).product();
        let dmono = DVector::from_fn(d, |j, _| {
            let n = self.p_powers[j];
            if n == 0 {
                return 0.0;
            }
            let rest: f64 = (0..d).filter(|&i| i != j).map(|i| powi(p[i], self.p_powers[i])).product();
            n as f64 * powi(p[j], n - 1) * rest
        });
        let (sv, ds) = match self.sigma {
            SigmaFactor::One => (1.0, AlgebraElement::zero()),
            SigmaFactor::Linear(a) => {
                let mut g = AlgebraElement::zero();
                g.0[a] = 1.0;
                (s.0[a], g)
            }
            SigmaFactor::Quadratic(a, b) => {
                let mut g = AlgebraElement::zero();
                g.0[a] += s.0[b];
                g.0[b] += s.0[a];
                (s.0[a] * s.0[b], g)
            }
        };
        let c = self.coef;
        let v = c * t * mono * sv;
        let dq = DVector::from_fn(d, |j, _| c * dt * self.k[j] as f64 * mono * sv);
        let dp = dmono * (c * t * sv);
        (v, dq, dp, ds * (c * t * mono))
    }
}

impl Observable {
    /// Build and validate the closed-form partials against central differences
    /// at seeded random points (relative tolerance `1e-6`).
    pub fn new(dim: usize, group: StructureGroup, terms: Vec<ObservableTerm>) -> Result<Self> {
        for t in &terms {
            if t.k.len() != dim || t.p_powers.len() != dim {
                return Err(Error::ShapeMismatch(format!("observable term does not match dimension {dim}")));
            }
            let bad = match t.sigma {
                SigmaFactor::One => false,
                SigmaFactor::Linear(a) => a >= group.dim(),
                SigmaFactor::Quadratic(a, b) => a >= group.dim() || b >= group.dim(),
            };
            if bad || !t.coef.is_finite() {
                return Err(Error::InvalidInput(format!("invalid observable term {t:?} for {group}")));
            }
        }
        let h = Self { dim, group, terms };
        h.check_partials()?;
        Ok(h)
    }

    fn check_partials(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e);
        let eps = 1e-6;
        for _ in 0..3 {
            let pt = PhasePoint::random(&mut rng, self.dim, self.group);
            let an = self.partials(&pt);
            let scale = an.dq.amax().max(an.dp.amax()).max(an.dsigma.0.amax()).max(1.0);
            let mut worst: f64 = 0.0;
            for j in 0..self.dim {
                let mut a = pt.clone();
                let mut b = pt.clone();
                a.q[j] += eps;
                b.q[j] -= eps;
                worst = worst.max(((self.value(&a) - self.value(&b)) / (2.0 * eps) - an.dq[j]).abs());
                let mut a = pt.clone();
                let mut b = pt.clone();
                a.p[j] += eps;
                b.p[j] -= eps;
                worst = worst.max(((self.value(&a) - self.value(&b)) / (2.0 * eps) - an.dp[j]).abs());
            }
            for c in 0..self.group.dim() {
                let mut a = pt.clone();
                let mut b = pt.clone();
                a.sigma.0[c] += eps;
                b.sigma.0[c] -= eps;
                worst = worst.max(((self.value(&a) - self.value(&b)) / (2.0 * eps) - an.dsigma.0[c]).abs());
            }
            if worst > 1e-6 * scale {
                return Err(Error::InconsistentDerivative(format!("observable partials off by {worst:e}")));
            }
        }
        Ok(())
    }

    pub fn zero(dim: usize, group: StructureGroup) -> Self {
        Self { dim, group, terms: Vec::new() }
    }

    fn term(dim: usize, coef: f64, sigma: SigmaFactor) -> ObservableTerm {
        ObservableTerm { coef, k: vec![0; dim], trig: Trig::Cos, p_powers: vec![0; dim], sigma }
    }

    pub fn constant(dim: usize, group: StructureGroup, c: f64) -> Self {
        Self { dim, group, terms: vec![Self::term(dim, c, SigmaFactor::One)] }
    }

    /// `h = c . p`.
    pub fn linear_momentum(group: StructureGroup, c: &[f64]) -> Self {
        let dim = c.len();
        let terms = (0..dim)
            .map(|j| {
                let mut t = Self::term(dim, c[j], SigmaFactor::One);
                t.p_powers[j] = 1;
                t
            })
            .collect();
        Self { dim, group, terms }
    }

    /// `h = <sigma, xi0>`.
    pub fn linear_charge(dim: usize, group: StructureGroup, xi0: &AlgebraElement) -> Self {
        let terms = (0..group.dim()).map(|a| Self::term(dim, xi0.0[a], SigmaFactor::Linear(a))).collect();
        Self { dim, group, terms }
    }

    /// `h = sigma_a`.
    pub fn sigma_coordinate(dim: usize, group: StructureGroup, a: usize) -> Self {
        Self { dim, group, terms: vec![Self::term(dim, 1.0, SigmaFactor::Linear(a))] }
    }

    /// `h = p_j`.
    pub fn p_coordinate(dim: usize, group: StructureGroup, j: usize) -> Self {
        let mut t = Self::term(dim, 1.0, SigmaFactor::One);
        t.p_powers[j] = 1;
        Self { dim, group, terms: vec![t] }
    }

    /// `h = sin(q_j)`, which restricted near `q_j = 0` acts as a coordinate.
    pub fn sin_q(dim: usize, group: StructureGroup, j: usize) -> Self {
        let mut t = Self::term(dim, 1.0, SigmaFactor::One);
        t.k[j] = 1;
        t.trig = Trig::Sin;
        Self { dim, group, terms: vec![t] }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coef *= s);
        out
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn value(&self, pt: &PhasePoint) -> f64 {
        self.terms.iter().map(|t| t.eval(&pt.q, &pt.p, &pt.sigma).0).sum()
    }

    pub fn partials(&self, pt: &PhasePoint) -> Partials {
        let mut out = Partials { dq: DVector::zeros(self.dim), dp: DVector::zeros(self.dim), dsigma: AlgebraElement::zero() };
        for t in &self.terms {
            let (_, dq, dp, ds) = t.eval(&pt.q, &pt.p, &pt.sigma);
            out.dq += dq;
            out.dp += dp;
            out.dsigma += ds;
        }
        out
    }

    /// Shipped basis: Fourier modes `|k|_1 <= kq` in `q` (half-space
    /// representatives), monomials in `p` of total degree `<= deg_p`, times
    /// `1`, `sigma_a` and `sigma_a sigma_b`.
    pub fn basis(dim: usize, group: StructureGroup, kq: usize, deg_p: u32) -> Vec<Observable> {
        let mut fourier: Vec<(Vec<i64>, Trig)> = Vec::new();
        for mode in crate::basis::fourier_modes(dim, kq) {
            if let crate::basis::ScalarMode::Fourier { k, trig } = mode {
                fourier.push((k, trig));
            }
        }
        let mut monos: Vec<Vec<u32>> = vec![vec![0; dim]];
        for _ in 0..deg_p {
            let mut next = Vec::new();
            for m in &monos {
                for j in 0..dim {
                    let mut m2 = m.clone();
                    m2[j] += 1;
                    if !monos.contains(&m2) && !next.contains(&m2) {
                        next.push(m2);
                    }
                }
            }
            monos.extend(next);
        }
        let m = group.dim();
        let mut sig = vec![SigmaFactor::One];
        sig.extend((0..m).map(SigmaFactor::Linear));
        for a in 0..m {
            for b in a..m {
                sig.push(SigmaFactor::Quadratic(a, b));
            }
        }
        let mut out = Vec::new();
        for (k, trig) in &fourier {
            for pp in &monos {
                for s in &sig {
                    let t = ObservableTerm { coef: 1.0, k: k.clone(), trig: *trig, p_powers: pp.clone(), sigma: *s };
                    out.push(Observable { dim, group, terms: vec![t] });
                }
            }
        }
        out
    }

    /// Sum of eight random low basis elements with coefficients in `[-amp, amp]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, group: StructureGroup, amp: f64) -> Observable {
        let basis = Observable::basis(dim, group, 1, 2);
        let mut h = Observable::zero(dim, group);
        for _ in 0..8 {
            let b = &basis[rng.random_range(0..basis.len())];
            h = h.sum(&b.scaled(rng.random_range(-amp..amp)));
        }
        h
    }
}

/// A point `((q, p), sigma, g)` of `T*M x o* x O`, the right-trivialized
/// `T*(M x O)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
    pub sigma: CoalgebraElement,
    pub g: GroupElement,
}

/// Tangent `(q dot, p dot, g dot g^{-1}, sigma dot)` at a phase point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTangent {
    pub dq: DVector<f64>,
    pub dp: DVector<f64>,
    pub xi: AlgebraElement,
    pub dsigma: CoalgebraElement,
}

impl PhasePoint {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, group: StructureGroup) -> Self {
        Self {
            q: DVector::from_fn(dim, |_, _| rng.random_range(-3.0..3.0)),
            p: DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)),
            sigma: group.random_coalgebra(rng, 1.0),
            g: group.random_element(rng),
        }
    }
}

/// Hamiltonian field of `h` pushed to the trivialization:
/// `(dh/dp, -dh/dq, delta h/delta sigma, -ad*_{delta h/delta sigma} sigma)`.
pub fn trivialized_hvf(h: &Observable, pt: &PhasePoint) -> PointTangent {
    let d = h.partials(pt);
    PointTangent { dq: d.dp, dp: -d.dq, xi: d.dsigma, dsigma: -h.group.coad(&d.dsigma, &pt.sigma) }
}

/// Pointwise symplectic form on right-trivialized tangents:
/// `dq_a . dp_b - dp_a . dq_b + <ds_b, xi_a> - <ds_a, xi_b> - <sigma, [xi_a, xi_b]>`.
pub fn point_omega(group: StructureGroup, pt: &PhasePoint, a: &PointTangent, b: &PointTangent) -> f64 {
    a.dq.dot(&b.dp) - a.dp.dot(&b.dq) + b.dsigma.pair(&a.xi) - a.dsigma.pair(&b.xi) - pt.sigma.pair(&group.ad(&a.xi, &b.xi))
}

/// Move along a trivialized tangent: additive in `(q, p, sigma)`, `g -> exp(eps xi) g`.
pub fn retract_point(group: StructureGroup, pt: &PhasePoint, v: &PointTangent, eps: f64) -> PhasePoint {
    PhasePoint { q: &pt.q + &v.dq * eps, p: &pt.p + &v.dp * eps, sigma: pt.sigma + v.dsigma * eps, g: group.exp(&(v.xi * eps)) * pt.g }
}

/// `{f, g} = f_q . g_p - f_p . g_q + <sigma, [delta f/delta sigma, delta g/delta sigma]>`.
pub fn reduced_poisson(f: &Observable, g: &Observable, pt: &PhasePoint) -> f64 {
    let a = f.partials(pt);
    let b = g.partials(pt);
    a.dq.dot(&b.dp) - a.dp.dot(&b.dq) + pt.sigma.pair(&f.group.ad(&a.dsigma, &b.dsigma))
}

/// Canonical coordinates on `T*(M x O)` near a base element `g0`:
/// `g = exp(x) g0` and `alpha` the covector conjugate to `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPoint {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
    pub x: AlgebraElement,
    pub alpha: DVector<f64>,
}

/// `m x m` block of the left Jacobian of `exp`.
pub fn left_jacobian_block(group: StructureGroup, x: &AlgebraElement) -> DMatrix<f64> {
    let m = group.dim();
    let j = group.left_jacobian(x);
    DMatrix::from_fn(m, m, |r, c| j[(r, c)])
}

/// Right trivialization: `sigma = alpha_g g^{-1}`, i.e. `<sigma, eta> = alpha(J_l(x)^{-1} eta)`.
pub fn rho(c: &CanonicalPoint, base: &GroupElement, group: StructureGroup) -> Result<PhasePoint> {
    let jl = left_jacobian_block(group, &c.x);
    let jt = jl.transpose().lu().solve(&c.alpha).ok_or(Error::CutLocus { trace: f64::NAN })?;
    Ok(PhasePoint { q: c.q.clone(), p: c.p.clone(), sigma: CoalgebraElement::from_coords(jt.as_slice()), g: group.exp(&c.x) * *base })
}

pub fn rho_inverse(pt: &PhasePoint, base: &GroupElement, group: StructureGroup) -> Result<CanonicalPoint> {
    let x = group.log(&(pt.g * base.inverse()))?;
    let jl = left_jacobian_block(group, &x);
    let s = DVector::from_column_slice(pt.sigma.coords(group.dim()));
    Ok(CanonicalPoint { q: pt.q.clone(), p: pt.p.clone(), x, alpha: jl.transpose() * s })
}
