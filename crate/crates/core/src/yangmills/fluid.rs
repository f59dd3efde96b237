//! Pseudo-spectral evaluation of the incompressible Euler-Yang-Mills
//! equations on the flat torus `T^d` for the kinetic Lagrangian
//! `l(u, nu) = 1/2 |u|^2 + 1/2 tau(nu, nu)`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, CoalgebraElement, StructureGroup};

/// Largest accepted spectral divergence of the input velocity.
pub const DIVERGENCE_TOL: f64 = 1e-10;

/// Uniform `n^d` grid on `[0, 2 pi)^d`, index `sum_a i_a n^(d - 1 - a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n: usize,
    pub dim: usize,
}

impl TorusGrid {
    pub fn new(n: usize, dim: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 || dim == 0 || dim > 3 {
            return Err(Error::InvalidInput(format!("torus grid needs even n >= 4 and 1 <= d <= 3, got n={n}, d={dim}")));
        }
        Ok(Self { n, dim })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn multi_index(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        let mut r = idx;
        for a in (0..self.dim).rev() {
            out[a] = r % self.n;
            r /= self.n;
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let h = std::f64::consts::TAU / self.n as f64;
        self.multi_index(idx).iter().map(|i| *i as f64 * h).collect()
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    /// Wavenumbers for first derivatives (Nyquist set to zero).
    fn wavenumbers(&self, idx: usize) -> Vec<f64> {
        let n = self.n as i64;
        self.multi_index(idx)
            .iter()
            .map(|&i| {
                let k = if (i as i64) < n / 2 { i as i64 } else { i as i64 - n };
                if k == -n / 2 {
                    0.0
                } else {
                    k as f64
                }
            })
            .collect()
    }

    fn transform(&self, data: &mut [Complex<f64>], inverse: bool) {
        let mut planner = FftPlanner::new();
        let fft = if inverse { planner.plan_fft_inverse(self.n) } else { planner.plan_fft_forward(self.n) };
        let mut line = vec![Complex::new(0.0, 0.0); self.n];
        for axis in 0..self.dim {
            let stride = self.n.pow((self.dim - 1 - axis) as u32);
            for start in 0..self.len() {
                if (start / stride) % self.n != 0 {
                    continue;
                }
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[start + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
        if inverse {
            let s = 1.0 / self.len() as f64;
            data.iter_mut().for_each(|v| *v *= s);
        }
    }

    fn forward(&self, f: &[f64]) -> Vec<Complex<f64>> {
        let mut c: Vec<Complex<f64>> = f.iter().map(|v| Complex::new(*v, 0.0)).collect();
        self.transform(&mut c, false);
        c
    }

    fn inverse(&self, mut c: Vec<Complex<f64>>) -> Vec<f64> {
        self.transform(&mut c, true);
        c.iter().map(|v| v.re).collect()
    }

    pub fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>> {
        let fh = self.forward(f);
        (0..self.dim)
            .map(|a| {
                let c = fh.iter().enumerate().map(|(i, v)| v * Complex::new(0.0, self.wavenumbers(i)[a])).collect();
                self.inverse(c)
            })
            .collect()
    }

    pub fn divergence(&self, u: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (a, comp) in u.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(&self.gradient(comp)[a]) {
                *o += v;
            }
        }
        out
    }
}

/// Right-hand sides of the momentum and charge equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolTendency {
    /// Divergence-free `d/dt (dl/du)`.
    pub momentum: Vec<Vec<f64>>,
    /// `d/dt (dl/dnu)`.
    pub charge: Vec<CoalgebraElement>,
    /// Pressure with zero mean.
    pub pressure: Vec<f64>,
}

/// `m_t = -(u . grad m + (grad u)^T m + n_a grad nu^a) - grad p`,
/// `n_t = -u . grad n - ad*_nu n` with `m = u`, `n = nu^flat`.
pub fn epautvol_rhs(grid: &TorusGrid, group: StructureGroup, u: &[Vec<f64>], nu: &[AlgebraElement]) -> Result<VolTendency> {
    let len = grid.len();
    if u.len() != grid.dim || u.iter().any(|c| c.len() != len) || nu.len() != len {
        return Err(Error::ShapeMismatch(format!("fields do not match a {}^{} torus grid", grid.n, grid.dim)));
    }
    let umax = u.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    let max_divergence = grid.divergence(u).iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if max_divergence > DIVERGENCE_TOL * umax.max(1.0) {
        return Err(Error::NotDivergenceFree { max_divergence });
    }
    let d = grid.dim;
    let m = group.dim();
    let n: Vec<CoalgebraElement> = nu.iter().map(|v| group.flat(v)).collect();
    let grad_u: Vec<Vec<Vec<f64>>> = u.iter().map(|c| grid.gradient(c)).collect();
    let grad_nu: Vec<Vec<Vec<f64>>> = (0..m).map(|a| grid.gradient(&nu.iter().map(|v| v.0[a]).collect::<Vec<_>>())).collect();
    let grad_n: Vec<Vec<Vec<f64>>> = (0..m).map(|a| grid.gradient(&n.iter().map(|v| v.0[a]).collect::<Vec<_>>())).collect();
    // forcing F with m_t = -F - grad p
    let forcing: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            (0..len)
                .map(|i| {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += u[k][i] * grad_u[j][k][i] + grad_u[k][j][i] * u[k][i];
                    }
                    for a in 0..m {
                        s += n[i].0[a] * grad_nu[a][j][i];
                    }
                    s
                })
                .collect()
        })
        .collect();
    let fh: Vec<Vec<Complex<f64>>> = forcing.iter().map(|f| grid.forward(f)).collect();
    let mut ph = vec![Complex::new(0.0, 0.0); len];
    for (i, p) in ph.iter_mut().enumerate() {
        let k = grid.wavenumbers(i);
        let k2: f64 = k.iter().map(|v| v * v).sum();
        if k2 > 0.0 {
            let kf: Complex<f64> = (0..d).map(|j| fh[j][i] * k[j]).sum();
            *p = kf * Complex::new(0.0, 1.0) / k2;
        }
    }
    let pressure = grid.inverse(ph);
    let grad_p = grid.gradient(&pressure);
    let momentum = (0..d).map(|j| (0..len).map(|i| -forcing[j][i] - grad_p[j][i]).collect()).collect();
    let charge = (0..len)
        .map(|i| {
            let mut adv = CoalgebraElement::zero();
            for a in 0..m {
                adv.0[a] = (0..d).map(|k| u[k][i] * grad_n[a][k][i]).sum();
            }
            -adv - group.coad(&nu[i], &n[i])
        })
        .collect();
    Ok(VolTendency { momentum, charge, pressure })
}
