//! Fixed-point spaces of `Δ(S_{d−p} × S_p)` with `m` extra rows, and the
//! reduced gradient field `F_d` on their coordinates for real `d`.
//!
//! A [`Shape`] describes the block pattern of a fixed matrix: a band of
//! `n = d − r` permuted indices, `r` singleton columns and `ns` singleton
//! rows. Band rows `i` carry `a` on the diagonal, `b` off it and `c_t` in
//! singleton column `t`; singleton row `u` carries `x_u` on every band column
//! and `y_{u,t}` in singleton column `t`. The first `r` singleton rows are the
//! rows of the singleton columns' diagonal, the rest are the surplus rows.
//!
//! Coordinates are ordered `[a, b, c_1..c_r, x_1, y_11..y_1r, x_2, …]`; with
//! `r = 1, ns = 3` this is the nine-coordinate `ξ` of the `p = 1, m = 2` case.
//!
//! Every angle is computed from `(u_k, v_k, multiplicity)` component lists as
//! `θ = 2·atan2(‖û−v̂‖, ‖û+v̂‖)`, so the same code is exact at large `d` and
//! runs on `f64`, dual numbers and Laurent series alike.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::WeightConfig;
use crate::scalar::{Dual, Scalar};

/// Block pattern of a fixed-point space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    /// Singleton columns.
    pub r: usize,
    /// Singleton rows (`r` diagonal ones followed by surplus rows).
    pub ns: usize,
}

impl Shape {
    pub fn new(r: usize, ns: usize) -> Self {
        assert!(ns >= r, "every singleton column owns a singleton row");
        Shape { r, ns }
    }

    pub fn dim(&self) -> usize {
        2 + self.r + self.ns * (1 + self.r)
    }
    pub fn a(&self) -> usize {
        0
    }
    pub fn b(&self) -> usize {
        1
    }
    pub fn c(&self, t: usize) -> usize {
        2 + t
    }
    pub fn x(&self, u: usize) -> usize {
        2 + self.r + u * (1 + self.r)
    }
    pub fn y(&self, u: usize, t: usize) -> usize {
        self.x(u) + 1 + t
    }

    /// Frobenius inner product on coordinates: `⟨ξ,η⟩_F = Σ g_i ξ_i η_i`.
    pub fn gram_weights(&self, n: f64) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        g[0] = n;
        g[1] = n * (n - 1.0);
        for t in 0..self.r {
            g[self.c(t)] = n;
        }
        for u in 0..self.ns {
            g[self.x(u)] = n;
            for t in 0..self.r {
                g[self.y(u, t)] = 1.0;
            }
        }
        g
    }

    /// The shape obtained by freeing one band index (it becomes the last
    /// singleton column and the last singleton row).
    pub fn refined(&self) -> Shape {
        Shape::new(self.r + 1, self.ns + 1)
    }

    /// Linear embedding of coordinates into [`Shape::refined`].
    pub fn refinement(&self) -> DMatrix<f64> {
        let f = self.refined();
        let mut e = DMatrix::zeros(f.dim(), self.dim());
        e[(f.a(), self.a())] = 1.0;
        e[(f.b(), self.b())] = 1.0;
        for t in 0..self.r {
            e[(f.c(t), self.c(t))] = 1.0;
        }
        e[(f.c(self.r), self.b())] = 1.0;
        for u in 0..self.ns {
            e[(f.x(u), self.x(u))] = 1.0;
            for t in 0..self.r {
                e[(f.y(u, t), self.y(u, t))] = 1.0;
            }
            e[(f.y(u, self.r), self.x(u))] = 1.0;
        }
        let last = self.ns;
        e[(f.x(last), self.b())] = 1.0;
        for t in 0..self.r {
            e[(f.y(last, t), self.c(t))] = 1.0;
        }
        e[(f.y(last, self.r), self.a())] = 1.0;
        e
    }

    /// Permutation exchanging the last two freed indices (needs `r ≥ 2`).
    pub fn swap_last_two(&self) -> DMatrix<f64> {
        assert!(self.r >= 2 && self.ns >= 2);
        let (r, ns) = (self.r, self.ns);
        let sw = |t: usize, top: usize| -> usize {
            if t == top - 2 {
                top - 1
            } else if t == top - 1 {
                top - 2
            } else {
                t
            }
        };
        let mut p = DMatrix::zeros(self.dim(), self.dim());
        p[(0, 0)] = 1.0;
        p[(1, 1)] = 1.0;
        for t in 0..r {
            p[(self.c(sw(t, r)), self.c(t))] = 1.0;
        }
        for u in 0..ns {
            let u2 = sw(u, ns);
            p[(self.x(u2), self.x(u))] = 1.0;
            for t in 0..r {
                p[(self.y(u2, sw(t, r)), self.y(u, t))] = 1.0;
            }
        }
        p
    }
}

/// Isotropy `Δ(S_{d−p} × S_p)` with `m = k − d` surplus rows, at real `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyDescriptor {
    pub p: usize,
    pub m: usize,
    pub d: f64,
}

impl IsotropyDescriptor {
    pub fn new(p: usize, m: usize, d: f64) -> Result<Self> {
        if p > 1 {
            return Err(Error::Unsupported(format!("isotropy with p = {p}")));
        }
        if !(d > p as f64) || (p == 1 && d < 3.0) || d < 2.0 {
            return Err(Error::Domain(format!("d = {d} is below the range for p = {p}")));
        }
        Ok(IsotropyDescriptor { p, m, d })
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.p, self.p + self.m)
    }

    /// Fixed-point dimension: `2 + m` for `p = 0`, `5 + 2m` for `p = 1`.
    pub fn n_dim(&self) -> usize {
        self.shape().dim()
    }

    pub fn with_d(&self, d: f64) -> Self {
        IsotropyDescriptor { d, ..*self }
    }

    /// Integer `(k, d)` when `d` is integral.
    pub fn integer_dims(&self) -> Result<(usize, usize)> {
        if self.d.fract() != 0.0 || self.d < 1.0 {
            return Err(Error::Domain(format!("embedding needs integer d, got {}", self.d)));
        }
        let d = self.d as usize;
        Ok((d + self.m, d))
    }
}

/// A point `ξ` of the fixed-point space for a given descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    pub descriptor: IsotropyDescriptor,
    pub xi: Vec<f64>,
}

impl ReducedPoint {
    pub fn new(descriptor: IsotropyDescriptor, xi: Vec<f64>) -> Result<Self> {
        if xi.len() != descriptor.n_dim() {
            return Err(Error::Dimension(format!(
                "ξ has {} entries, the fixed-point space has dimension {}",
                xi.len(),
                descriptor.n_dim()
            )));
        }
        Ok(ReducedPoint { descriptor, xi })
    }
}

/// Where the band, singleton columns and singleton rows sit in `M(k,d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap {
    pub k: usize,
    pub d: usize,
    pub band: Vec<usize>,
    pub singles: Vec<usize>,
    pub srows: Vec<usize>,
}

impl IndexMap {
    /// Standard placement: band first, singleton columns last, surplus rows
    /// after row `d`.
    pub fn standard(shape: Shape, d: usize) -> Result<Self> {
        if d < shape.r + 2 {
            return Err(Error::Domain(format!("d = {d} too small for shape {shape:?}")));
        }
        let n = d - shape.r;
        let k = d + shape.ns - shape.r;
        Ok(IndexMap {
            k,
            d,
            band: (0..n).collect(),
            singles: (n..d).collect(),
            srows: (n..d).chain(d..k).collect(),
        })
    }

    /// Frees the last band index, making it a singleton.
    pub fn refined(&self) -> Self {
        let mut m = self.clone();
        let j = m.band.pop().expect("band is nonempty");
        m.singles.push(j);
        m.srows.push(j);
        m
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.singles.len(), self.srows.len())
    }
}

/// `Ξ(ξ)` on an explicit index map.
pub fn embed_with(map: &IndexMap, xi: &[f64]) -> DMatrix<f64> {
    let sh = map.shape();
    let mut w = DMatrix::zeros(map.k, map.d);
    for &i in &map.band {
        for &j in &map.band {
            w[(i, j)] = if i == j { xi[sh.a()] } else { xi[sh.b()] };
        }
        for (t, &j) in map.singles.iter().enumerate() {
            w[(i, j)] = xi[sh.c(t)];
        }
    }
    for (u, &i) in map.srows.iter().enumerate() {
        for &j in &map.band {
            w[(i, j)] = xi[sh.x(u)];
        }
        for (t, &j) in map.singles.iter().enumerate() {
            w[(i, j)] = xi[sh.y(u, t)];
        }
    }
    w
}

/// Block-average projection onto the fixed-point pattern of `map`.
pub fn project_with(map: &IndexMap, w: &DMatrix<f64>, tol: f64) -> Result<Vec<f64>> {
    if w.shape() != (map.k, map.d) {
        return Err(Error::Dimension(format!("expected {}×{} matrix", map.k, map.d)));
    }
    let sh = map.shape();
    let mut sum = vec![0.0; sh.dim()];
    let mut cnt = vec![0.0; sh.dim()];
    let mut add = |idx: usize, v: f64| {
        sum[idx] += v;
        cnt[idx] += 1.0;
    };
    for &i in &map.band {
        for &j in &map.band {
            add(if i == j { sh.a() } else { sh.b() }, w[(i, j)]);
        }
        for (t, &j) in map.singles.iter().enumerate() {
            add(sh.c(t), w[(i, j)]);
        }
    }
    for (u, &i) in map.srows.iter().enumerate() {
        for &j in &map.band {
            add(sh.x(u), w[(i, j)]);
        }
        for (t, &j) in map.singles.iter().enumerate() {
            add(sh.y(u, t), w[(i, j)]);
        }
    }
    let xi: Vec<f64> = sum.iter().zip(&cnt).map(|(s, c)| if *c > 0.0 { s / c } else { 0.0 }).collect();
    let back = embed_with(map, &xi);
    let mut worst = (0.0, 0, 0);
    for i in 0..map.k {
        for j in 0..map.d {
            let dev = (back[(i, j)] - w[(i, j)]).abs();
            if dev > worst.0 {
                worst = (dev, i, j);
            }
        }
    }
    if worst.0 > tol {
        return Err(Error::NotFixed { deviation: worst.0, row: worst.1, col: worst.2 });
    }
    Ok(xi)
}

/// `Ξ(ξ) ∈ M(k,d)^G` for integer `d`.
pub fn embed(pt: &ReducedPoint) -> Result<WeightConfig> {
    let (_, d) = pt.descriptor.integer_dims()?;
    let map = IndexMap::standard(pt.descriptor.shape(), d)?;
    WeightConfig::new(embed_with(&map, &pt.xi))
}

/// Left inverse of [`embed`]; fails when `cfg` is not fixed within `1e-8`.
pub fn project(cfg: &WeightConfig, descriptor: IsotropyDescriptor) -> Result<ReducedPoint> {
    let (k, d) = descriptor.integer_dims()?;
    if (k, d) != (cfg.k, cfg.d) {
        return Err(Error::Dimension(format!("descriptor wants {k}×{d}, matrix is {}×{}", cfg.k, cfg.d)));
    }
    let map = IndexMap::standard(descriptor.shape(), d)?;
    let xi = project_with(&map, &cfg.w, 1e-8)?;
    ReducedPoint::new(descriptor, xi)
}

/// One component group of a pair of structured vectors.
struct Part<S> {
    u: S,
    v: S,
    mult: S,
}

fn part<S: Scalar>(u: &S, v: &S, mult: &S) -> Part<S> {
    Part { u: u.clone(), v: v.clone(), mult: mult.clone() }
}

/// Angle data of a structured pair: `θ`, `sin θ`, `cos θ`, `‖u‖`, `‖v‖`.
struct Angle<S> {
    theta: S,
    sin: S,
    cos: S,
    nu: S,
    nv: S,
}

fn angle<S: Scalar>(parts: &[Part<S>]) -> Angle<S> {
    let mut nu2 = S::cst(0.0);
    let mut nv2 = S::cst(0.0);
    for p in parts {
        nu2 = nu2 + p.mult.clone() * p.u.sq();
        nv2 = nv2 + p.mult.clone() * p.v.sq();
    }
    let nu = nu2.sqrt();
    let nv = nv2.sqrt();
    let mut dm2 = S::cst(0.0);
    let mut dp2 = S::cst(0.0);
    for p in parts {
        let x = p.u.clone() / nu.clone();
        let y = p.v.clone() / nv.clone();
        dm2 = dm2 + p.mult.clone() * (x.clone() - y.clone()).sq();
        dp2 = dp2 + p.mult.clone() * (x + y).sq();
    }
    let dm = dm2.sqrt();
    let dp = dp2.sqrt();
    Angle {
        theta: dm.atan2(&dp).scale(2.0),
        sin: (dm * dp).scale(0.5),
        cos: (dp2 - dm2).scale(0.25),
        nu,
        nv,
    }
}

/// All pairwise angle data of a structured point.
struct Geometry<S> {
    nd: S,
    ns: Vec<S>,
    dd: Angle<S>,
    ds: Vec<Angle<S>>,
    beta: Angle<S>,
    toff: Angle<S>,
    phi: Vec<Angle<S>>,
    ss: Vec<Vec<Option<Angle<S>>>>,
    lam_b: Vec<Angle<S>>,
    lam_t: Vec<Vec<Angle<S>>>,
}

fn geometry<S: Scalar>(sh: Shape, n: &S, xi: &[S]) -> Geometry<S> {
    let (r, ns) = (sh.r, sh.ns);
    let one = S::cst(1.0);
    let zero = S::cst(0.0);
    let nm1 = n.clone() - one.clone();
    let nm2 = n.clone() - S::cst(2.0);
    let a = &xi[sh.a()];
    let b = &xi[sh.b()];
    let c = |t: usize| &xi[sh.c(t)];
    let x = |u: usize| &xi[sh.x(u)];
    let y = |u: usize, t: usize| &xi[sh.y(u, t)];

    let mut dd = vec![part(a, b, &one), part(b, a, &one), part(b, b, &nm2)];
    for t in 0..r {
        dd.push(part(c(t), c(t), &one));
    }
    let dd = angle(&dd);
    let nd = dd.nu.clone();

    let ds: Vec<Angle<S>> = (0..ns)
        .map(|u| {
            let mut p = vec![part(a, x(u), &one), part(b, x(u), &nm1)];
            for t in 0..r {
                p.push(part(c(t), y(u, t), &one));
            }
            angle(&p)
        })
        .collect();
    let nsv: Vec<S> = ds.iter().map(|g| g.nv.clone()).collect();

    let with_c = |mut p: Vec<Part<S>>, hit: Option<usize>| {
        for t in 0..r {
            p.push(part(c(t), if hit == Some(t) { &one } else { &zero }, &one));
        }
        angle(&p)
    };
    let beta = with_c(vec![part(a, &one, &one), part(b, &zero, &nm1)], None);
    let toff = with_c(vec![part(a, &zero, &one), part(b, &one, &one), part(b, &zero, &nm2)], None);
    let phi: Vec<Angle<S>> =
        (0..r).map(|t| with_c(vec![part(a, &zero, &one), part(b, &zero, &nm1)], Some(t))).collect();

    let mut ss = Vec::with_capacity(ns);
    for u in 0..ns {
        let mut row = Vec::with_capacity(ns);
        for v in 0..ns {
            if u == v {
                row.push(None);
                continue;
            }
            let mut p = vec![part(x(u), x(v), n)];
            for t in 0..r {
                p.push(part(y(u, t), y(v, t), &one));
            }
            row.push(Some(angle(&p)));
        }
        ss.push(row);
    }
    let srow = |u: usize, head: Vec<Part<S>>, hit: Option<usize>| {
        let mut p = head;
        for t in 0..r {
            p.push(part(y(u, t), if hit == Some(t) { &one } else { &zero }, &one));
        }
        angle(&p)
    };
    let lam_b: Vec<Angle<S>> =
        (0..ns).map(|u| srow(u, vec![part(x(u), &one, &one), part(x(u), &zero, &nm1)], None)).collect();
    let lam_t: Vec<Vec<Angle<S>>> = (0..ns)
        .map(|u| (0..r).map(|t| srow(u, vec![part(x(u), &zero, n)], Some(t))).collect())
        .collect();

    Geometry { nd, ns: nsv, dd, ds, beta, toff, phi, ss, lam_b, lam_t }
}

/// Reduced field `F_d(ξ)` on any number type; `n = d − r` is the band size.
pub fn field_generic<S: Scalar>(sh: Shape, n: &S, xi: &[S]) -> Vec<S> {
    let (r, ns) = (sh.r, sh.ns);
    let g = geometry(sh, n, xi);
    let one = S::cst(1.0);
    let nm1 = n.clone() - one.clone();
    let nm2 = n.clone() - S::cst(2.0);
    let pi = S::cst(PI);
    let a = xi[sh.a()].clone();
    let b = xi[sh.b()].clone();
    let c = |t: usize| xi[sh.c(t)].clone();
    let x = |u: usize| xi[sh.x(u)].clone();
    let y = |u: usize, t: usize| xi[sh.y(u, t)].clone();

    let mut sum_x = S::cst(0.0);
    for u in 0..ns {
        sum_x = sum_x + x(u);
    }
    let om_b = pi.clone() * (a.clone() + nm1.clone() * b.clone() + sum_x - one.clone());
    let om_t: Vec<S> = (0..r)
        .map(|t| {
            let mut s = n.clone() * c(t);
            for u in 0..ns {
                s = s + y(u, t);
            }
            pi.clone() * (s - one.clone())
        })
        .collect();

    let mut sig = nm1.clone() * g.nd.clone() * g.dd.sin.clone();
    for u in 0..ns {
        sig = sig + g.ns[u].clone() * g.ds[u].sin.clone();
    }
    sig = sig - g.beta.sin.clone() - nm1.clone() * g.toff.sin.clone();
    for t in 0..r {
        sig = sig - g.phi[t].sin.clone();
    }
    let sig_n = sig / g.nd.clone();
    let mut lds_x = S::cst(0.0);
    for u in 0..ns {
        lds_x = lds_x + g.ds[u].theta.clone() * x(u);
    }

    let mut out = vec![S::cst(0.0); sh.dim()];
    out[sh.a()] = sig_n.clone() * a.clone() - g.dd.theta.clone() * nm1.clone() * b.clone() - lds_x.clone()
        + g.beta.theta.clone()
        + om_b.clone();
    out[sh.b()] = sig_n.clone() * b.clone()
        - g.dd.theta.clone() * (a.clone() + nm2 * b.clone())
        - lds_x
        + g.toff.theta.clone()
        + om_b.clone();
    for t in 0..r {
        let mut s = sig_n.clone() * c(t) - g.dd.theta.clone() * nm1.clone() * c(t);
        for u in 0..ns {
            s = s - g.ds[u].theta.clone() * y(u, t);
        }
        out[sh.c(t)] = s + g.phi[t].theta.clone() + om_t[t].clone();
    }
    let d_band = a.clone() + nm1 * b.clone();
    for u in 0..ns {
        let mut sg = n.clone() * g.nd.clone() * g.ds[u].sin.clone();
        for v in 0..ns {
            if let Some(l) = &g.ss[u][v] {
                sg = sg + g.ns[v].clone() * l.sin.clone();
            }
        }
        sg = sg - n.clone() * g.lam_b[u].sin.clone();
        for t in 0..r {
            sg = sg - g.lam_t[u][t].sin.clone();
        }
        let sg_n = sg / g.ns[u].clone();
        let mut fx = sg_n.clone() * x(u) - g.ds[u].theta.clone() * d_band.clone();
        for v in 0..ns {
            if let Some(l) = &g.ss[u][v] {
                fx = fx - l.theta.clone() * x(v);
            }
        }
        out[sh.x(u)] = fx + g.lam_b[u].theta.clone() + om_b.clone();
        for t in 0..r {
            let mut fy = sg_n.clone() * y(u, t) - g.ds[u].theta.clone() * n.clone() * c(t);
            for v in 0..ns {
                if let Some(l) = &g.ss[u][v] {
                    fy = fy - l.theta.clone() * y(v, t);
                }
            }
            out[sh.y(u, t)] = fy + g.lam_t[u][t].theta.clone() + om_t[t].clone();
        }
    }
    let k = 1.0 / (2.0 * PI);
    out.into_iter().map(|v| v.scale(k)).collect()
}

fn pair_f<S: Scalar>(g: &Angle<S>) -> S {
    let pi = S::cst(PI);
    (g.nu.clone() * g.nv.clone() * (g.sin.clone() + (pi - g.theta.clone()) * g.cos.clone())).scale(1.0 / (2.0 * PI))
}

/// Loss `L(Ξ(ξ))` on any number type, `n = d − r`.
pub fn loss_generic<S: Scalar>(sh: Shape, n: &S, xi: &[S]) -> S {
    let (r, ns) = (sh.r, sh.ns);
    let g = geometry(sh, n, xi);
    let nm1 = n.clone() - S::cst(1.0);
    let half = 0.5;
    let mut ww = (n.clone() * g.nd.sq()).scale(0.5) + n.clone() * nm1.clone() * pair_f(&g.dd);
    for u in 0..ns {
        ww = ww + (n.clone() * pair_f(&g.ds[u])).scale(2.0);
        ww = ww + g.ns[u].sq().scale(0.5);
        for v in 0..ns {
            if g.ss[u][v].is_some() {
                ww = ww + pair_f(g.ss[u][v].as_ref().unwrap());
            }
        }
    }
    let mut wv = n.clone() * pair_f(&g.beta) + n.clone() * nm1 * pair_f(&g.toff);
    for t in 0..r {
        wv = wv + n.clone() * pair_f(&g.phi[t]);
    }
    for u in 0..ns {
        wv = wv + n.clone() * pair_f(&g.lam_b[u]);
        for t in 0..r {
            wv = wv + pair_f(&g.lam_t[u][t]);
        }
    }
    let d = n.clone() + S::cst(r as f64);
    let vv = (d.clone() + d.clone() * (d - S::cst(1.0)).scale(1.0 / PI)).scale(0.25);
    ww.scale(half) - wv + vv
}

fn check_norms(sh: Shape, xi: &[f64]) -> Result<()> {
    let n1 = xi[sh.a()].abs() + xi[sh.b()].abs() + (0..sh.r).map(|t| xi[sh.c(t)].abs()).sum::<f64>();
    if n1 == 0.0 {
        return Err(Error::Domain("band rows vanish (τ = 0)".into()));
    }
    for u in 0..sh.ns {
        let s = xi[sh.x(u)].abs() + (0..sh.r).map(|t| xi[sh.y(u, t)].abs()).sum::<f64>();
        if s == 0.0 {
            return Err(Error::Domain(format!("singleton row {u} vanishes (τ = 0)")));
        }
    }
    Ok(())
}

/// `F_d` at real `d` for an arbitrary shape.
pub fn field_on(sh: Shape, d: f64, xi: &[f64]) -> Result<DVector<f64>> {
    if xi.len() != sh.dim() {
        return Err(Error::Dimension(format!("ξ must have {} entries", sh.dim())));
    }
    let n = d - sh.r as f64;
    if !(n > 2.0) {
        return Err(Error::Domain(format!("band size d − r = {n} must exceed 2")));
    }
    check_norms(sh, xi)?;
    Ok(DVector::from_vec(field_generic(sh, &n, xi)))
}

/// Exact Jacobian of `F_d` by forward-mode duals.
pub fn jacobian_on(sh: Shape, d: f64, xi: &[f64]) -> Result<DMatrix<f64>> {
    field_on(sh, d, xi)?;
    let n = Dual::cst(d - sh.r as f64);
    let dim = sh.dim();
    let mut j = DMatrix::zeros(dim, dim);
    let mut z: Vec<Dual> = xi.iter().map(|&v| Dual::cst(v)).collect();
    for col in 0..dim {
        z[col].t = 1.0;
        let f = field_generic(sh, &n, &z);
        z[col].t = 0.0;
        for row in 0..dim {
            j[(row, col)] = f[row].t;
        }
    }
    Ok(j)
}

/// Central finite-difference Jacobian (step `h`), the fallback/oracle.
pub fn jacobian_fd_on(sh: Shape, d: f64, xi: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let dim = sh.dim();
    let mut j = DMatrix::zeros(dim, dim);
    let mut z = xi.to_vec();
    for col in 0..dim {
        z[col] = xi[col] + h;
        let fp = field_on(sh, d, &z)?;
        z[col] = xi[col] - h;
        let fm = field_on(sh, d, &z)?;
        z[col] = xi[col];
        j.set_column(col, &((fp - fm) / (2.0 * h)));
    }
    Ok(j)
}

pub fn loss_on(sh: Shape, d: f64, xi: &[f64]) -> Result<f64> {
    check_norms(sh, xi)?;
    Ok(loss_generic(sh, &(d - sh.r as f64), xi))
}

pub fn reduced_field(pt: &ReducedPoint) -> Result<DVector<f64>> {
    field_on(pt.descriptor.shape(), pt.descriptor.d, &pt.xi)
}

pub fn reduced_jacobian(pt: &ReducedPoint) -> Result<DMatrix<f64>> {
    jacobian_on(pt.descriptor.shape(), pt.descriptor.d, &pt.xi)
}

pub fn reduced_loss(pt: &ReducedPoint) -> Result<f64> {
    loss_on(pt.descriptor.shape(), pt.descriptor.d, &pt.xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gradient, loss};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_xi(sh: Shape, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..sh.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn dimensions_match_catalog() {
        for m in 0..3 {
            assert_eq!(IsotropyDescriptor::new(0, m, 8.0).unwrap().n_dim(), 2 + m);
            assert_eq!(IsotropyDescriptor::new(1, m, 8.0).unwrap().n_dim(), 5 + 2 * m);
        }
    }

    #[test]
    fn embed_examples() {
        let ds = IsotropyDescriptor::new(1, 0, 6.0).unwrap();
        let v = embed(&ReducedPoint::new(ds, vec![1.0, 0.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(v.w, DMatrix::identity(6, 6));
        let ds = IsotropyDescriptor::new(1, 2, 6.0).unwrap();
        let mut xi = vec![0.0; 9];
        xi[0] = 1.0;
        let w = embed(&ReducedPoint::new(ds, xi).unwrap()).unwrap().w;
        assert_eq!(w.shape(), (8, 6));
        assert_eq!(w.sum(), 5.0);
        assert_eq!(w[(4, 4)], 1.0);
        let ds = IsotropyDescriptor::new(0, 1, 4.0).unwrap();
        let w = embed(&ReducedPoint::new(ds, vec![2.0, 3.0, 5.0]).unwrap()).unwrap().w;
        assert_eq!(w[(1, 1)], 2.0);
        assert_eq!(w[(1, 2)], 3.0);
        assert!(w.row(4).iter().all(|&v| v == 5.0));
    }

    #[test]
    fn integer_d_field_matches_full_gradient() {
        for (p, m) in [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)] {
            for d in [4usize, 7, 11] {
                let ds = IsotropyDescriptor::new(p, m, d as f64).unwrap();
                let xi = rand_xi(ds.shape(), (10 * d + 3 * m + p) as u64);
                let pt = ReducedPoint::new(ds, xi).unwrap();
                let cfg = embed(&pt).unwrap();
                let g = gradient(&cfg).unwrap();
                let map = IndexMap::standard(ds.shape(), d).unwrap();
                let pg = project_with(&map, &g, 1e-9).unwrap();
                let f = reduced_field(&pt).unwrap();
                for i in 0..f.len() {
                    assert!((f[i] - pg[i]).abs() < 1e-10, "p={p} m={m} d={d} i={i}");
                }
                let l = reduced_loss(&pt).unwrap();
                assert!((l - loss(&cfg)).abs() < 1e-10 * (1.0 + l.abs()));
            }
        }
    }

    #[test]
    fn refinement_embeds_the_same_matrix() {
        let sh = Shape::new(1, 3);
        let xi = rand_xi(sh, 5);
        let map = IndexMap::standard(sh, 9).unwrap();
        let fine = map.refined();
        let e = sh.refinement();
        let xf = &e * DVector::from_vec(xi.clone());
        assert_eq!(embed_with(&map, &xi), embed_with(&fine, xf.as_slice()));
        let f1 = field_on(sh, 9.0, &xi).unwrap();
        let f2 = field_on(sh.refined(), 9.0, xf.as_slice()).unwrap();
        let g1 = sh.gram_weights(8.0);
        let back = project_with(&map, &embed_with(&fine, f2.as_slice()), 1e-10).unwrap();
        for i in 0..f1.len() {
            assert!((f1[i] - back[i]).abs() < 1e-12, "{i} {}", g1[i]);
        }
    }

    #[test]
    fn swap_is_an_involution_fixing_double_refinement() {
        let sh = Shape::new(1, 2);
        let s1 = sh.refined();
        let e2 = s1.refinement();
        let tau = s1.refined().swap_last_two();
        assert_eq!(&tau * &tau, DMatrix::identity(tau.nrows(), tau.nrows()));
        let e = &e2 * sh.refinement();
        assert_eq!(&tau * &e, e);
    }

    #[test]
    fn dual_jacobian_matches_finite_differences() {
        let sh = Shape::new(1, 2);
        let xi = rand_xi(sh, 8);
        let j = jacobian_on(sh, 9.5, &xi).unwrap();
        let f = jacobian_fd_on(sh, 9.5, &xi, 1e-6).unwrap();
        assert!((j - f).amax() < 1e-6);
    }

    #[test]
    fn target_is_critical() {
        let ds = IsotropyDescriptor::new(1, 0, 7.0).unwrap();
        let pt = ReducedPoint::new(ds, vec![1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(reduced_field(&pt).unwrap().amax() < 1e-14);
    }

    #[test]
    fn project_rejects_unstructured_matrix() {
        let ds = IsotropyDescriptor::new(1, 0, 5.0).unwrap();
        let mut w = DMatrix::identity(5, 5);
        w[(0, 1)] = 0.3;
        let cfg = WeightConfig::new(w).unwrap();
        assert!(matches!(project(&cfg, ds), Err(Error::NotFixed { row: 0, col: 1, .. })));
    }
}
