//! Closed-form population loss of a two-layer ReLU student against the
//! identity teacher under standard Gaussian inputs.
//!
//! The teacher `V` is the `d×d` identity padded with `k−d` zero rows and both
//! second layers are all-ones, so
//! `L(W) = ½Σf(wᵢ,wⱼ) − Σf(wᵢ,vⱼ) + ½Σf(vᵢ,vⱼ)` with the arc-cosine pair
//! kernel `f(w,v) = ‖w‖‖v‖(sin θ + (π−θ)cos θ)/(2π)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angles with `sin θ` below this are treated as parallel/antiparallel.
pub const PARALLEL_TOL: f64 = 1e-10;

/// Student weights `W ∈ M(k,d)`; the teacher is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub k: usize,
    pub d: usize,
    pub w: DMatrix<f64>,
}

impl WeightConfig {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        let (k, d) = w.shape();
        if d == 0 || k < d {
            return Err(Error::Dimension(format!("need k ≥ d ≥ 1, got k={k}, d={d}")));
        }
        Ok(WeightConfig { k, d, w })
    }

    /// The teacher itself padded with `k − d` zero rows.
    pub fn target(k: usize, d: usize) -> Result<Self> {
        let mut w = DMatrix::zeros(k, d);
        for j in 0..d.min(k) {
            w[(j, j)] = 1.0;
        }
        Self::new(w)
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.w.row(i).transpose()
    }

    fn nonzero_rows(&self) -> Result<()> {
        for i in 0..self.k {
            if self.w.row(i).iter().all(|&x| x == 0.0) {
                return Err(Error::ZeroRow { row: i });
            }
        }
        Ok(())
    }
}

/// Angle between two nonzero vectors with `sin θ`, both accurate near 0 and π.
///
/// Uses `θ = 2·atan2(‖û−v̂‖, ‖û+v̂‖)` instead of `acos` of a clamped cosine.
pub fn angle(u: &[f64], v: &[f64]) -> (f64, f64) {
    let nu = norm(u);
    let nv = norm(v);
    let (mut dm, mut dp) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (x, y) = (a / nu, b / nv);
        dm += (x - y) * (x - y);
        dp += (x + y) * (x + y);
    }
    let (dm, dp) = (dm.sqrt(), dp.sqrt());
    (2.0 * dm.atan2(dp), 0.5 * dm * dp)
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `f(w,v)`; zero when either argument vanishes.
pub fn pair_energy(w: &[f64], v: &[f64]) -> f64 {
    let nw = norm(w);
    let nv = norm(v);
    if nw == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let (t, s) = angle(w, v);
    nw * nv * (s + (PI - t) * t.cos()) / (2.0 * PI)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn unit(d: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[j] = 1.0;
    e
}

/// Population loss `L(W)`; zero rows are allowed.
pub fn loss(cfg: &WeightConfig) -> f64 {
    let (k, d) = (cfg.k, cfg.d);
    let w = rows(&cfg.w);
    let mut ww = 0.0;
    for i in 0..k {
        ww += 0.5 * dot(&w[i], &w[i]) * 0.5;
        for j in (i + 1)..k {
            ww += pair_energy(&w[i], &w[j]);
        }
    }
    let mut wv = 0.0;
    for wi in &w {
        for j in 0..d {
            wv += pair_energy(wi, &unit(d, j));
        }
    }
    let df = d as f64;
    let vv = 0.5 * (df / 2.0 + df * (df - 1.0) / (2.0 * PI));
    ww - wv + vv
}

/// Rows `v_j` of the padded teacher that are nonzero (the first `d`).
fn targets(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|j| unit(d, j)).collect()
}

/// Analytic gradient, a `k×d` matrix.
pub fn gradient(cfg: &WeightConfig) -> Result<DMatrix<f64>> {
    cfg.nonzero_rows()?;
    let (k, d) = (cfg.k, cfg.d);
    let w = rows(&cfg.w);
    let v = targets(d);
    let norms: Vec<f64> = w.iter().map(|r| norm(r)).collect();
    let mut colsum = vec![0.0; d];
    for (i, r) in w.iter().enumerate() {
        for c in 0..d {
            colsum[c] += r[c];
        }
        if i < d {
            colsum[i] -= 1.0;
        }
    }
    let mut g = DMatrix::zeros(k, d);
    for i in 0..k {
        let mut sig = 0.0;
        let mut acc = vec![0.0; d];
        for j in 0..k {
            if j == i {
                continue;
            }
            let (t, s) = angle(&w[i], &w[j]);
            sig += norms[j] * s;
            for c in 0..d {
                acc[c] -= t * w[j][c];
            }
        }
        for vj in &v {
            let (t, s) = angle(&w[i], vj);
            sig -= s;
            for c in 0..d {
                acc[c] += t * vj[c];
            }
        }
        for c in 0..d {
            g[(i, c)] = (sig * w[i][c] / norms[i] + acc[c] + PI * colsum[c]) / (2.0 * PI);
        }
    }
    Ok(g)
}

/// How the Hessian treats parallel or antiparallel pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degenerate {
    /// Raise a domain error naming the pair.
    Reject,
    /// Use the continuous limit of the blocks (the loss is C² there).
    Extend,
}

/// Geometry of one ordered pair `(w, v)`, enough for both Hessian blocks.
struct PairGeom {
    theta: f64,
    sin: f64,
    nw: f64,
    nv: f64,
    wh: Vec<f64>,
    vh: Vec<f64>,
    /// `n = v̂ − cos θ ŵ` and `m = ŵ − cos θ v̂`, both of norm `sin θ`.
    n: Vec<f64>,
    m: Vec<f64>,
    degenerate: bool,
}

impl PairGeom {
    fn new(w: &[f64], v: &[f64]) -> Self {
        let nw = norm(w);
        let nv = norm(v);
        let wh: Vec<f64> = w.iter().map(|x| x / nw).collect();
        let vh: Vec<f64> = v.iter().map(|x| x / nv).collect();
        let (theta, sin) = angle(w, v);
        let c = theta.cos();
        let n = vh.iter().zip(&wh).map(|(a, b)| a - c * b).collect();
        let m = wh.iter().zip(&vh).map(|(a, b)| a - c * b).collect();
        PairGeom { theta, sin, nw, nv, wh, vh, n, m, degenerate: sin < PARALLEL_TOL }
    }

    /// `∂²f/∂w² · u`.
    fn ww(&self, u: &[f64], out: &mut [f64]) {
        if self.degenerate {
            return;
        }
        let s = self.nv / (2.0 * PI * self.nw);
        let wu = dot(&self.wh, u);
        let nu = dot(&self.n, u) / self.sin;
        for c in 0..u.len() {
            out[c] += s * (self.sin * (u[c] - self.wh[c] * wu) + self.n[c] * nu);
        }
    }

    /// `∂²f/∂w∂v · u`.
    fn wv(&self, u: &[f64], out: &mut [f64]) {
        let k = 1.0 / (2.0 * PI);
        if self.degenerate {
            // limit: π/2π·I at θ = 0 and 0 at θ = π
            let a = (PI - self.theta) * k;
            for c in 0..u.len() {
                out[c] += a * u[c];
            }
            return;
        }
        let vu = dot(&self.vh, u);
        let mu = dot(&self.m, u) / self.sin;
        for c in 0..u.len() {
            out[c] += k * ((PI - self.theta) * u[c] + self.sin * self.wh[c] * vu + self.n[c] * mu);
        }
    }
}

/// Precomputed pair geometry for repeated Hessian products at one point.
pub struct HessianOperator {
    k: usize,
    d: usize,
    ww: Vec<Vec<Option<PairGeom>>>,
    wt: Vec<Vec<PairGeom>>,
}

impl HessianOperator {
    pub fn new(cfg: &WeightConfig, mode: Degenerate) -> Result<Self> {
        cfg.nonzero_rows()?;
        let (k, d) = (cfg.k, cfg.d);
        let w = rows(&cfg.w);
        let v = targets(d);
        let mut ww = Vec::with_capacity(k);
        for i in 0..k {
            let mut row = Vec::with_capacity(k);
            for j in 0..k {
                if i == j {
                    row.push(None);
                    continue;
                }
                let g = PairGeom::new(&w[i], &w[j]);
                if g.degenerate && mode == Degenerate::Reject {
                    return Err(Error::Parallel { first: format!("w{i}"), second: format!("w{j}") });
                }
                row.push(Some(g));
            }
            ww.push(row);
        }
        let mut wt = Vec::with_capacity(k);
        for i in 0..k {
            let mut row = Vec::with_capacity(d);
            for (j, vj) in v.iter().enumerate() {
                let g = PairGeom::new(&w[i], vj);
                if g.degenerate && mode == Degenerate::Reject {
                    return Err(Error::Parallel { first: format!("w{i}"), second: format!("v{j}") });
                }
                row.push(g);
            }
            wt.push(row);
        }
        Ok(HessianOperator { k, d, ww, wt })
    }

    /// `H·vec(U)` reshaped to `k×d`, in `O(k(k+d)d)` work.
    pub fn apply(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let (k, d) = (self.k, self.d);
        let ur = rows(u);
        let mut out = DMatrix::zeros(k, d);
        let mut acc = vec![0.0; d];
        let mut neg = vec![0.0; d];
        for i in 0..k {
            acc.iter_mut().for_each(|x| *x = 0.0);
            neg.iter_mut().for_each(|x| *x = 0.0);
            for c in 0..d {
                acc[c] = 0.5 * ur[i][c];
            }
            for j in 0..k {
                if let Some(g) = &self.ww[i][j] {
                    g.ww(&ur[i], &mut acc);
                    g.wv(&ur[j], &mut acc);
                }
            }
            for g in &self.wt[i] {
                g.ww(&ur[i], &mut neg);
            }
            for c in 0..d {
                out[(i, c)] = acc[c] - neg[c];
            }
        }
        out
    }

    /// Dense `kd×kd` matrix in row-major vectorization (`i·d + c`).
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.k * self.d;
        let mut h = DMatrix::zeros(n, n);
        let mut e = DMatrix::zeros(self.k, self.d);
        for col in 0..n {
            e[(col / self.d, col % self.d)] = 1.0;
            let y = self.apply(&e);
            e[(col / self.d, col % self.d)] = 0.0;
            for r in 0..n {
                h[(r, col)] = y[(r / self.d, r % self.d)];
            }
        }
        let ht = h.transpose();
        (h + ht) * 0.5
    }
}

/// Dense Hessian; rejects parallel or antiparallel pairs.
pub fn hessian(cfg: &WeightConfig) -> Result<DMatrix<f64>> {
    Ok(HessianOperator::new(cfg, Degenerate::Reject)?.dense())
}

/// Hessian-vector product without forming the Hessian.
pub fn hessian_vector_product(cfg: &WeightConfig, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if u.shape() != (cfg.k, cfg.d) {
        return Err(Error::Dimension(format!("U must be {}×{}", cfg.k, cfg.d)));
    }
    Ok(HessianOperator::new(cfg, Degenerate::Reject)?.apply(u))
}

/// Monte-Carlo estimate of the loss with its standard error.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Sample count per independently seeded stream.
const MC_CHUNK: usize = 1 << 14;

/// Direct sampling of `½E[(1ᵀφ(Wx) − 1ᵀφ(Vx))²]` with `x ~ N(0, I)`.
///
/// Work is split into fixed chunks, each with its own ChaCha stream, so the
/// result does not depend on the number of worker threads.
pub fn monte_carlo_loss(cfg: &WeightConfig, n: usize, seed: u64) -> McEstimate {
    let (k, d) = (cfg.k, cfg.d);
    let w = rows(&cfg.w);
    let chunks = n.div_ceil(MC_CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            let mut x = vec![0.0; d];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                for xi in x.iter_mut() {
                    *xi = StandardNormal.sample(&mut rng);
                }
                let mut student = 0.0;
                for r in w.iter().take(k) {
                    student += dot(r, &x).max(0.0);
                }
                let teacher: f64 = x.iter().map(|xi| xi.max(0.0)).sum();
                let diff = student - teacher;
                let y = 0.5 * diff * diff;
                s1 += y;
                s2 += y * y;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n as f64;
    let mean = s1 / nf;
    let var = if n > 1 { ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    McEstimate { estimate: mean, stderr: (var / nf).sqrt(), samples: n }
}
