//! Hessian spectra split by isotypic component of `S_q`, `q = d − p`.
//!
//! `S_q` permutes band rows and band columns together. Under it `M(k,d)`
//! splits into the trivial `t`, standard `s`, exterior-square `x` and `y`
//! components, of degrees `1, q−1, (q−1)(q−2)/2, q(q−3)/2`, with `N`,
//! `3 + 2p + m`, `1` and `1` copies (`N` the fixed-point dimension).
//!
//! Two routes:
//! * dense: full eigensolve, clusters labelled by projecting their
//!   eigenvectors onto the isotypic components;
//! * adapted: one representative per copy, chosen fixed by the subgroup that
//!   fixes two band indices `α, β`. Representatives are coordinates of the
//!   doubly refined fixed-point space, where the Hessian restricted to them is
//!   `G·J` (Gram weights times the reduced Jacobian) at any real `d`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::FamilyId;
use crate::fps::family_spec;
use crate::kernel::{Degenerate, HessianOperator, WeightConfig};
use crate::linalg::{lsq_fit, sym_eig, sym_eigvals};
use crate::solver::{continue_family, solve_family, StepPolicy};
use crate::symmetry::{embed, embed_with, jacobian_on, project_with, IndexMap, IsotropyDescriptor, ReducedPoint, Shape};

pub use crate::fps::{xy_eigenvalues_from_fps, XyEigenvalues};

/// Eigenvalues within `CLUSTER_TOL·max(1, |λ|)` of their neighbour merge.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Largest `k·d` handled by the dense method.
pub const DENSE_MAX: usize = 4000;
/// Gate on `‖H − QΛQᵀ‖/‖H‖` for the dense eigensolve.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Irrep {
    T,
    S,
    X,
    Y,
}

pub const IRREPS: [Irrep; 4] = [Irrep::T, Irrep::S, Irrep::X, Irrep::Y];

impl Irrep {
    pub fn degree(&self, q: f64) -> f64 {
        match self {
            Irrep::T => 1.0,
            Irrep::S => q - 1.0,
            Irrep::X => (q - 1.0) * (q - 2.0) / 2.0,
            Irrep::Y => q * (q - 3.0) / 2.0,
        }
    }

    /// Copies inside `M(k,d)` for `p ∈ {0,1}` and `m = k − d`.
    pub fn copies(&self, p: usize, m: usize) -> usize {
        match self {
            Irrep::T => Shape::new(p, p + m).dim(),
            Irrep::S => 3 + 2 * p + m,
            Irrep::X | Irrep::Y => 1,
        }
    }

    /// Label with the symmetric-group index, e.g. `s_11`.
    pub fn label(&self, q: f64) -> String {
        match self {
            Irrep::T => "t".into(),
            _ => format!("{self}_{q}"),
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Irrep::T => "t",
            Irrep::S => "s",
            Irrep::X => "x",
            Irrep::Y => "y",
        })
    }
}

impl std::str::FromStr for Irrep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(Irrep::T),
            "s" => Ok(Irrep::S),
            "x" => Ok(Irrep::X),
            "y" => Ok(Irrep::Y),
            _ => Err(Error::Unsupported(format!("irrep {s:?} (expected t, s, x or y)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Adapted,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Method::Dense),
            "adapted" => Ok(Method::Adapted),
            _ => Err(Error::Unsupported(format!("method {s:?} (expected dense or adapted)"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenEntry {
    pub value: f64,
    /// Multiplicity as a Hessian eigenvalue.
    pub multiplicity: f64,
    /// Copies of the irrep sharing this eigenvalue.
    pub copies: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IrrepGroup {
    pub irrep: Irrep,
    pub label: String,
    pub degree: f64,
    pub eigenvalues: Vec<EigenEntry>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub reconstruction_residual: Option<f64>,
    /// Clusters with no irrep carrying at least half a dimension.
    pub unassigned: Vec<f64>,
    /// Clusters shared by several irreps (accidental degeneracy).
    pub mixed: Vec<String>,
    /// Clusters whose size fits more than one irrep's degree signature.
    pub ambiguous: Vec<String>,
    /// Irreps of equal degree at this `q`.
    pub degree_collisions: Vec<String>,
    /// Irreps of degree ≤ 0.
    pub absent: Vec<Irrep>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub descriptor: IsotropyDescriptor,
    pub method: Method,
    pub groups: Vec<IrrepGroup>,
    pub diagnostics: Diagnostics,
}

impl SpectrumReport {
    pub fn group(&self, irrep: Irrep) -> Option<&IrrepGroup> {
        self.groups.iter().find(|g| g.irrep == irrep)
    }

    /// Distinct eigenvalues of one irrep, each repeated once per copy.
    pub fn values(&self, irrep: Irrep) -> Vec<f64> {
        let mut v = Vec::new();
        if let Some(g) = self.group(irrep) {
            for e in &g.eigenvalues {
                for _ in 0..(e.copies.round().max(1.0) as usize) {
                    v.push(e.value);
                }
            }
        }
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min(&self) -> f64 {
        self.groups.iter().flat_map(|g| g.eigenvalues.iter().map(|e| e.value)).fold(f64::INFINITY, f64::min)
    }

    pub fn total_multiplicity(&self) -> f64 {
        self.groups.iter().flat_map(|g| g.eigenvalues.iter().map(|e| e.multiplicity)).sum()
    }

    /// CSV rows `irrep,label,value,multiplicity,copies`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("irrep,label,value,multiplicity,copies\n");
        for g in &self.groups {
            for e in &g.eigenvalues {
                s.push_str(&format!("{},{},{:.15e},{},{}\n", g.irrep, g.label, e.value, e.multiplicity, e.copies));
            }
        }
        s
    }
}

fn band_size(desc: &IsotropyDescriptor) -> f64 {
    desc.d - desc.p as f64
}

fn degree_diagnostics(q: f64, diag: &mut Diagnostics) {
    for (i, a) in IRREPS.iter().enumerate() {
        if a.degree(q) <= 0.0 {
            diag.absent.push(*a);
            continue;
        }
        for b in &IRREPS[i + 1..] {
            if b.degree(q) > 0.0 && a.degree(q) == b.degree(q) {
                diag.degree_collisions.push(format!("{a} and {b} both have degree {}", a.degree(q)));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Isotypic projections of full matrices
// ---------------------------------------------------------------------------

/// Orthogonal projections of `M(k,d)` onto the four isotypic components.
pub struct IsotypicProjector {
    map: IndexMap,
}

impl IsotypicProjector {
    pub fn new(desc: &IsotropyDescriptor) -> Result<Self> {
        let (_, d) = desc.integer_dims()?;
        Ok(IsotypicProjector { map: IndexMap::standard(desc.shape(), d)? })
    }

    pub fn project(&self, u: &DMatrix<f64>, irrep: Irrep) -> DMatrix<f64> {
        match irrep {
            Irrep::T => self.trivial(u),
            Irrep::X => self.band_part(u, Irrep::X),
            Irrep::Y => self.band_part(u, Irrep::Y),
            Irrep::S => u - self.trivial(u) - self.band_part(u, Irrep::X) - self.band_part(u, Irrep::Y),
        }
    }

    /// Squared norms of the four projections.
    pub fn weights(&self, u: &DMatrix<f64>) -> [f64; 4] {
        let t = self.trivial(u).norm_squared();
        let x = self.band_part(u, Irrep::X).norm_squared();
        let y = self.band_part(u, Irrep::Y).norm_squared();
        [t, (u.norm_squared() - t - x - y).max(0.0), x, y]
    }

    fn trivial(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let xi = project_with(&self.map, u, f64::INFINITY).expect("shape checked by caller");
        embed_with(&self.map, &xi)
    }

    /// `x`: antisymmetric band block with zero row sums; `y`: symmetric
    /// off-diagonal band block with zero row sums.
    fn band_part(&self, u: &DMatrix<f64>, irrep: Irrep) -> DMatrix<f64> {
        let band = &self.map.band;
        let q = band.len();
        let qf = q as f64;
        let b = DMatrix::from_fn(q, q, |i, j| u[(band[i], band[j])]);
        let part = match irrep {
            Irrep::X => {
                let a = (&b - b.transpose()) * 0.5;
                let r: Vec<f64> = (0..q).map(|i| a.row(i).sum()).collect();
                DMatrix::from_fn(q, q, |i, j| a[(i, j)] - (r[i] - r[j]) / qf)
            }
            Irrep::Y => {
                if q < 4 {
                    return DMatrix::zeros(u.nrows(), u.ncols());
                }
                let mut s = (&b + b.transpose()) * 0.5;
                s.fill_diagonal(0.0);
                let r: Vec<f64> = (0..q).map(|i| s.row(i).sum()).collect();
                let c = r.iter().sum::<f64>() / (qf * (qf - 1.0));
                let v: Vec<f64> = r.iter().map(|ri| (ri - c * (qf - 1.0)) / (qf - 2.0)).collect();
                DMatrix::from_fn(q, q, |i, j| if i == j { 0.0 } else { s[(i, j)] - v[i] - v[j] - c })
            }
            _ => unreachable!(),
        };
        let mut out = DMatrix::zeros(u.nrows(), u.ncols());
        for i in 0..q {
            for j in 0..q {
                out[(band[i], band[j])] = part[(i, j)];
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Dense method
// ---------------------------------------------------------------------------

/// Dense Hessian eigensolve with clusters labelled by isotypic projection.
pub fn full_spectrum(cfg: &WeightConfig, desc: &IsotropyDescriptor) -> Result<SpectrumReport> {
    full_spectrum_with(cfg, desc, Degenerate::Reject)
}

/// As [`full_spectrum`], choosing how parallel rows are treated.
pub fn full_spectrum_with(cfg: &WeightConfig, desc: &IsotropyDescriptor, mode: Degenerate) -> Result<SpectrumReport> {
    let (k, d) = desc.integer_dims()?;
    if (cfg.k, cfg.d) != (k, d) {
        return Err(Error::Dimension(format!("descriptor wants {k}×{d}, matrix is {}×{}", cfg.k, cfg.d)));
    }
    if k * d > DENSE_MAX {
        return Err(Error::Domain(format!("k·d = {} exceeds the dense limit {DENSE_MAX}", k * d)));
    }
    let h = HessianOperator::new(cfg, mode)?.dense();
    let eig = SymmetricEigen::new(h.clone());
    let recon = (&eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues) * eig.eigenvectors.transpose() - &h)
        .norm()
        / h.norm().max(1e-300);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let q = band_size(desc);
    let mut diag = Diagnostics { reconstruction_residual: Some(recon), ..Default::default() };
    degree_diagnostics(q, &mut diag);
    let proj = IsotypicProjector::new(desc)?;
    let mut groups: Vec<IrrepGroup> = IRREPS
        .iter()
        .filter(|i| i.degree(q) > 0.0)
        .map(|&irrep| IrrepGroup { irrep, label: irrep.label(q), degree: irrep.degree(q), eigenvalues: vec![] })
        .collect();

    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() {
            let (a, b) = (eig.eigenvalues[order[end - 1]], eig.eigenvalues[order[end]]);
            if b - a > CLUSTER_TOL * a.abs().max(1.0) {
                break;
            }
            end += 1;
        }
        let members = &order[start..end];
        let value = members.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / members.len() as f64;
        let mut w = [0.0; 4];
        for &i in members {
            let v = DMatrix::from_fn(k, d, |r, c| eig.eigenvectors[(r * d + c, i)]);
            for (acc, x) in w.iter_mut().zip(proj.weights(&v)) {
                *acc += x;
            }
        }
        let size = members.len();
        let hits: Vec<Irrep> = IRREPS.iter().copied().filter(|i| w[i.index()] > 0.5).collect();
        let fits: Vec<Irrep> = IRREPS
            .iter()
            .copied()
            .filter(|i| {
                let dg = i.degree(q);
                dg > 0.0 && (1..=i.copies(desc.p, desc.m)).any(|j| j as f64 * dg == size as f64)
            })
            .collect();
        if fits.len() > 1 {
            diag.ambiguous.push(format!(
                "cluster {value:.6} of size {size} fits {}",
                fits.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" or ")
            ));
        }
        match hits.len() {
            0 => diag.unassigned.push(value),
            n => {
                if n > 1 {
                    diag.mixed.push(format!("cluster {value:.6} of size {size} shared by {hits:?}"));
                }
                for irrep in hits {
                    let mult = if n == 1 { size as f64 } else { w[irrep.index()].round() };
                    let g = groups.iter_mut().find(|g| g.irrep == irrep).expect("present irrep");
                    g.eigenvalues.push(EigenEntry { value, multiplicity: mult, copies: mult / g.degree });
                }
            }
        }
        start = end;
    }
    Ok(SpectrumReport { descriptor: *desc, method: Method::Dense, groups, diagnostics: diag })
}

// ---------------------------------------------------------------------------
// Adapted method
// ---------------------------------------------------------------------------

/// Position of a band index relative to the two fixed ones.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Rest,
    A,
    B,
}

const CLASSES: [Class; 3] = [Class::Rest, Class::A, Class::B];

/// Doubly refined shape and the coordinate embedding into it.
fn refine_twice(sh: Shape) -> (Shape, DMatrix<f64>) {
    let s1 = sh.refined();
    (s1.refined(), s1.refinement() * sh.refinement())
}

/// Writes `S_{q−2}`-fixed patterns into doubly refined coordinates.
struct Slots {
    sh2: Shape,
    r0: usize,
    s0: usize,
}

impl Slots {
    fn new(sh: Shape) -> Self {
        Slots { sh2: sh.refined().refined(), r0: sh.r, s0: sh.ns }
    }

    fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.sh2.dim()]
    }

    /// Band-block entry `(i, j)`; `diag` distinguishes the diagonal of the rest.
    fn band(&self, i: Class, j: Class, diag: bool) -> usize {
        let (sh, r0, s0) = (&self.sh2, self.r0, self.s0);
        match (i, j) {
            (Class::Rest, Class::Rest) => {
                if diag {
                    sh.a()
                } else {
                    sh.b()
                }
            }
            (Class::Rest, Class::A) => sh.c(r0),
            (Class::Rest, Class::B) => sh.c(r0 + 1),
            (Class::A, Class::Rest) => sh.x(s0),
            (Class::B, Class::Rest) => sh.x(s0 + 1),
            (Class::A, Class::A) => sh.y(s0, r0),
            (Class::A, Class::B) => sh.y(s0, r0 + 1),
            (Class::B, Class::A) => sh.y(s0 + 1, r0),
            (Class::B, Class::B) => sh.y(s0 + 1, r0 + 1),
        }
    }

    /// Band rows in original singleton column `t`.
    fn col(&self, t: usize, i: Class) -> usize {
        match i {
            Class::Rest => self.sh2.c(t),
            Class::A => self.sh2.y(self.s0, t),
            Class::B => self.sh2.y(self.s0 + 1, t),
        }
    }

    /// Original singleton row `u` on the band columns.
    fn row(&self, u: usize, j: Class) -> usize {
        match j {
            Class::Rest => self.sh2.x(u),
            Class::A => self.sh2.y(u, self.r0),
            Class::B => self.sh2.y(u, self.r0 + 1),
        }
    }

    /// Band block from `f(i, j, diagonal)`.
    fn band_pattern(&self, f: impl Fn(Class, Class, bool) -> f64) -> Vec<f64> {
        let mut eta = self.zeros();
        for i in CLASSES {
            for j in CLASSES {
                if i == Class::Rest && j == Class::Rest {
                    eta[self.band(i, j, true)] = f(i, j, true);
                    eta[self.band(i, j, false)] = f(i, j, false);
                } else {
                    eta[self.band(i, j, false)] = f(i, j, i == j);
                }
            }
        }
        eta
    }
}

/// `z = (e_α − e_β)/√2`.
fn z_odd(c: Class) -> f64 {
    match c {
        Class::Rest => 0.0,
        Class::A => FRAC_1_SQRT_2,
        Class::B => -FRAC_1_SQRT_2,
    }
}

/// One representative per copy of an irrep, as doubly refined coordinates
/// orthonormal in the Frobenius inner product of `M(k,d)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IrrepBasis {
    pub descriptor: IsotropyDescriptor,
    pub irrep: Irrep,
    /// Doubly refined shape the coordinates live in.
    pub shape: Shape,
    pub vectors: Vec<Vec<f64>>,
}

impl IrrepBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    fn gram(&self) -> Vec<f64> {
        self.shape.gram_weights(self.descriptor.d - self.shape.r as f64)
    }

    /// Representatives as `k×d` matrices (integer `d`).
    pub fn matrices(&self) -> Result<Vec<DMatrix<f64>>> {
        let (_, d) = self.descriptor.integer_dims()?;
        let map = IndexMap::standard(self.descriptor.shape(), d)?.refined().refined();
        Ok(self.vectors.iter().map(|v| embed_with(&map, v)).collect())
    }

    /// `⟨R_a, R_b⟩` for all pairs.
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        let g = self.gram();
        let n = self.len();
        DMatrix::from_fn(n, n, |a, b| {
            self.vectors[a].iter().zip(&self.vectors[b]).zip(&g).map(|((x, y), w)| x * y * w).sum()
        })
    }
}

fn orthonormalize(raw: Vec<Vec<f64>>, g: &[f64]) -> Vec<Vec<f64>> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(g).map(|((x, y), w)| x * y * w).sum::<f64>();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in raw {
        let n0 = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for e in &out {
                let p = dot(e, &v);
                v.iter_mut().zip(e).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-10 * n0.max(1e-300) {
            out.push(v.iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Representatives of every copy of `irrep`.
///
/// `t`: the fixed-point coordinate patterns. `s`: the image of
/// `z = (e_α − e_β)/√2` in each slot (band diagonal, symmetric and
/// antisymmetric band off-diagonal, each singleton column, each singleton
/// row). `x`, `y`: `E_αβ ∓ E_βα` projected onto zero row sums.
pub fn build_irrep_basis(desc: &IsotropyDescriptor, irrep: Irrep) -> Result<IrrepBasis> {
    let sh = desc.shape();
    let q = band_size(desc);
    if !(q >= 4.0) || desc.d - sh.r as f64 <= 4.0 {
        return Err(Error::Unsupported(format!("isotypic bases need q = d − p ≥ 4 and d − p > 4, got d = {}", desc.d)));
    }
    let slots = Slots::new(sh);
    let (sh2, e) = refine_twice(sh);
    let g = sh2.gram_weights(desc.d - sh2.r as f64);
    let raw: Vec<Vec<f64>> = match irrep {
        Irrep::T => e.column_iter().map(|c| c.iter().copied().collect()).collect(),
        Irrep::S => {
            let mut v = vec![
                slots.band_pattern(|i, j, diag| if diag && i == j { z_odd(i) } else { 0.0 }),
                slots.band_pattern(|i, j, diag| if diag { 0.0 } else { z_odd(i) + z_odd(j) }),
                slots.band_pattern(|i, j, diag| if diag { 0.0 } else { z_odd(i) - z_odd(j) }),
            ];
            for t in 0..sh.r {
                let mut eta = slots.zeros();
                for c in CLASSES {
                    eta[slots.col(t, c)] = z_odd(c);
                }
                v.push(eta);
            }
            for u in 0..sh.ns {
                let mut eta = slots.zeros();
                for c in CLASSES {
                    eta[slots.row(u, c)] = z_odd(c);
                }
                v.push(eta);
            }
            v
        }
        Irrep::X => {
            let r = |c: Class| z_odd(c) * std::f64::consts::SQRT_2;
            let a = |i: Class, j: Class| match (i, j) {
                (Class::A, Class::B) => 1.0,
                (Class::B, Class::A) => -1.0,
                _ => 0.0,
            };
            vec![slots.band_pattern(|i, j, diag| if diag { 0.0 } else { a(i, j) - (r(i) - r(j)) / q })]
        }
        Irrep::Y => {
            let s = |i: Class, j: Class| if (i, j) == (Class::A, Class::B) || (i, j) == (Class::B, Class::A) { 1.0 } else { 0.0 };
            let r = |c: Class| if c == Class::Rest { 0.0 } else { 1.0 };
            let c0 = 2.0 / (q * (q - 1.0));
            let v = |c: Class| (r(c) - c0 * (q - 1.0)) / (q - 2.0);
            vec![slots.band_pattern(|i, j, diag| if diag { 0.0 } else { s(i, j) - v(i) - v(j) - c0 })]
        }
    };
    let vectors = orthonormalize(raw, &g);
    if vectors.len() != irrep.copies(desc.p, desc.m) {
        return Err(Error::Unsupported(format!(
            "built {} representatives of {irrep}, expected {}",
            vectors.len(),
            irrep.copies(desc.p, desc.m)
        )));
    }
    Ok(IrrepBasis { descriptor: *desc, irrep, shape: sh2, vectors })
}

/// Restriction of the Hessian to the span of one irrep's representatives.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsotypicBlock {
    pub irrep: Irrep,
    pub matrix: DMatrix<f64>,
    /// Ascending; each is a Hessian eigenvalue of multiplicity `degree`.
    pub eigenvalues: Vec<f64>,
}

fn block_from(irrep: Irrep, m: DMatrix<f64>) -> IsotypicBlock {
    let m = (&m + m.transpose()) * 0.5;
    IsotypicBlock { irrep, eigenvalues: sym_eigvals(&m), matrix: m }
}

/// Block `⟨R_a, H R_b⟩` from Hessian-vector products on the full matrices.
pub fn isotypic_block(cfg: &WeightConfig, basis: &IrrepBasis) -> Result<IsotypicBlock> {
    let (k, d) = basis.descriptor.integer_dims()?;
    if (cfg.k, cfg.d) != (k, d) {
        return Err(Error::Dimension(format!("basis is for {k}×{d}, matrix is {}×{}", cfg.k, cfg.d)));
    }
    let reps = basis.matrices()?;
    let op = HessianOperator::new(cfg, Degenerate::Reject)?;
    let hr: Vec<DMatrix<f64>> = reps.par_iter().map(|r| op.apply(r)).collect();
    let n = reps.len();
    Ok(block_from(basis.irrep, DMatrix::from_fn(n, n, |a, b| reps[a].dot(&hr[b]))))
}

/// Hessian of `L∘Ξ` in doubly refined coordinates at a fixed point.
#[derive(Clone, Debug)]
pub struct RefinedHessian {
    pub descriptor: IsotropyDescriptor,
    pub shape: Shape,
    pub matrix: DMatrix<f64>,
}

impl RefinedHessian {
    pub fn new(pt: &ReducedPoint) -> Result<Self> {
        let desc = pt.descriptor;
        let (sh2, e) = refine_twice(desc.shape());
        let eta = &e * DVector::from_column_slice(&pt.xi);
        let j = jacobian_on(sh2, desc.d, eta.as_slice())?;
        let g = sh2.gram_weights(desc.d - sh2.r as f64);
        let h = DMatrix::from_fn(j.nrows(), j.ncols(), |r, c| g[r] * j[(r, c)]);
        Ok(RefinedHessian { descriptor: desc, shape: sh2, matrix: (&h + h.transpose()) * 0.5 })
    }

    /// `⟨R_a, H R_b⟩` for coordinate vectors `a`, `b`.
    pub fn form(&self, a: &[f64], b: &[f64]) -> f64 {
        let va = DVector::from_column_slice(a);
        let vb = DVector::from_column_slice(b);
        va.dot(&(&self.matrix * vb))
    }

    pub fn block(&self, basis: &IrrepBasis) -> IsotypicBlock {
        let n = basis.len();
        block_from(basis.irrep, DMatrix::from_fn(n, n, |a, b| self.form(&basis.vectors[a], &basis.vectors[b])))
    }
}

/// Block of one irrep at a fixed point with real `d`.
pub fn adapted_block(pt: &ReducedPoint, irrep: Irrep) -> Result<IsotypicBlock> {
    let basis = build_irrep_basis(&pt.descriptor, irrep)?;
    Ok(RefinedHessian::new(pt)?.block(&basis))
}

/// Every isotypic block at a fixed point (real `d`).
pub fn adapted_spectrum(pt: &ReducedPoint) -> Result<SpectrumReport> {
    let desc = pt.descriptor;
    let q = band_size(&desc);
    let rh = RefinedHessian::new(pt)?;
    let mut diag = Diagnostics::default();
    degree_diagnostics(q, &mut diag);
    let mut groups = Vec::new();
    for irrep in IRREPS {
        if irrep.degree(q) <= 0.0 {
            continue;
        }
        let block = rh.block(&build_irrep_basis(&desc, irrep)?);
        let degree = irrep.degree(q);
        groups.push(IrrepGroup {
            irrep,
            label: irrep.label(q),
            degree,
            eigenvalues: block
                .eigenvalues
                .iter()
                .map(|&value| EigenEntry { value, multiplicity: degree, copies: 1.0 })
                .collect(),
        });
    }
    Ok(SpectrumReport { descriptor: desc, method: Method::Adapted, groups, diagnostics: diag })
}

// ---------------------------------------------------------------------------
// Interlacing certificate
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Negative eigenvalue of the 2×2 block; the Hessian has at least
    /// `descent_dim` descent directions.
    SaddleCertified { descent_dim: usize },
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterlacingCertificate {
    pub d: f64,
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: [f64; 2],
    pub verdict: Verdict,
    /// Smallest eigenvalue of the `2d×2d` principal submatrix `Ĥ`.
    pub submatrix_min: Option<f64>,
    /// Smallest eigenvalue of the full Hessian.
    pub hessian_min: Option<f64>,
    /// `hessian_min ≤ submatrix_min` (up to `1e-10`).
    pub interlacing_holds: Option<bool>,
}

fn check_interlace_desc(desc: &IsotropyDescriptor) -> Result<()> {
    if desc.p != 1 || desc.m != 2 {
        return Err(Error::Domain(format!(
            "interlacing certificate needs p = 1, m = 2 (two surplus rows), got p = {}, m = {}",
            desc.p, desc.m
        )));
    }
    Ok(())
}

fn two_by_two(m: [[f64; 2]; 2], d: f64) -> ([f64; 2], Verdict) {
    let tr = m[0][0] + m[1][1];
    let disc = ((m[0][0] - m[1][1]).powi(2) + 4.0 * m[0][1] * m[1][0]).max(0.0).sqrt();
    let ev = [(tr + disc) / 2.0, (tr - disc) / 2.0];
    let verdict = if ev[1] < 0.0 {
        Verdict::SaddleCertified { descent_dim: (d - 2.0).round() as usize }
    } else {
        Verdict::Inconclusive
    };
    (ev, verdict)
}

/// Singleton rows spanning `Ĥ`: the two whose singleton-column entries vanish
/// as `d → ∞` (coordinates `(g, h)` and `(p, q)` of the `p = 1, m = 2` point).
const INTERLACE_ROWS: [usize; 2] = [0, 1];

/// The 2×2 restriction to the two `s` copies carried by [`INTERLACE_ROWS`],
/// at a fixed point with real `d` (eigenvalues in descending order).
pub fn interlacing_block(pt: &ReducedPoint) -> Result<InterlacingCertificate> {
    let desc = pt.descriptor;
    check_interlace_desc(&desc)?;
    let sh = desc.shape();
    let slots = Slots::new(sh);
    let rh = RefinedHessian::new(pt)?;
    let reps: Vec<Vec<f64>> = INTERLACE_ROWS
        .iter()
        .map(|&u| {
            let mut eta = slots.zeros();
            for c in CLASSES {
                eta[slots.row(u, c)] = z_odd(c);
            }
            eta
        })
        .collect();
    let mut m = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            m[a][b] = rh.form(&reps[a], &reps[b]);
        }
    }
    let (eigenvalues, verdict) = two_by_two(m, desc.d);
    Ok(InterlacingCertificate {
        d: desc.d,
        matrix: m,
        eigenvalues,
        verdict,
        submatrix_min: None,
        hessian_min: None,
        interlacing_holds: None,
    })
}

/// Certificate on the full matrix: the 2×2 block from the `2d×2d` principal
/// submatrix `Ĥ` of the [`INTERLACE_ROWS`], plus the interlacing check against the
/// full Hessian when it is small enough to form.
pub fn interlacing_certificate(cfg: &WeightConfig, desc: &IsotropyDescriptor) -> Result<InterlacingCertificate> {
    check_interlace_desc(desc)?;
    let (k, d) = desc.integer_dims()?;
    if (cfg.k, cfg.d) != (k, d) {
        return Err(Error::Dimension(format!("descriptor wants {k}×{d}, matrix is {}×{}", cfg.k, cfg.d)));
    }
    let op = HessianOperator::new(cfg, Degenerate::Reject)?;
    let map = IndexMap::standard(desc.shape(), d)?;
    let rows = INTERLACE_ROWS.map(|u| map.srows[u]);
    let n = 2 * d;
    let cols: Vec<DMatrix<f64>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let mut e = DMatrix::zeros(k, d);
            e[(rows[c / d], c % d)] = 1.0;
            op.apply(&e)
        })
        .collect();
    let hhat = DMatrix::from_fn(n, n, |r, c| cols[c][(rows[r / d], r % d)]);
    let hhat = (&hhat + hhat.transpose()) * 0.5;
    let band = &map.band;
    let mut z = DVector::zeros(n);
    let mut reps = Vec::new();
    for row in 0..2 {
        z.fill(0.0);
        z[row * d + band[band.len() - 1]] = FRAC_1_SQRT_2;
        z[row * d + band[band.len() - 2]] = -FRAC_1_SQRT_2;
        reps.push(z.clone());
    }
    let mut m = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            m[a][b] = reps[a].dot(&(&hhat * &reps[b]));
        }
    }
    let (eigenvalues, verdict) = two_by_two(m, desc.d);
    let submatrix_min = sym_eigvals(&hhat)[0];
    let hessian_min = (k * d <= DENSE_MAX).then(|| sym_eigvals(&op.dense())[0]);
    Ok(InterlacingCertificate {
        d: desc.d,
        matrix: m,
        eigenvalues,
        verdict,
        submatrix_min: Some(submatrix_min),
        hessian_min,
        interlacing_holds: hessian_min.map(|h| h <= submatrix_min + 1e-10),
    })
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMode {
    Exact { d: f64, method: Method },
    Asymptotic { d_lo: f64, d_hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    /// Exact value at one `d`.
    Exact,
    /// `a + O(d^{−1/κ})`.
    Constant,
    /// `a·d + b + O(d^{−1/κ})`.
    Linear,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRow {
    pub irrep: Irrep,
    /// Rank of the branch within its irrep block (ascending).
    pub branch: usize,
    pub kind: BranchKind,
    /// Exact value, fitted constant or fitted intercept.
    pub value: f64,
    /// Fitted coefficient of `d` (linear branches).
    pub slope: Option<f64>,
    pub stderr: Option<f64>,
    pub rms: Option<f64>,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableReport {
    pub family: FamilyId,
    pub mode: TableMode,
    pub rows: Vec<TableRow>,
    pub warnings: Vec<String>,
}

impl TableReport {
    pub fn rows_of(&self, irrep: Irrep) -> Vec<&TableRow> {
        self.rows.iter().filter(|r| r.irrep == irrep).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("irrep,branch,kind,value,slope,stderr,rms,flagged\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:?},{:.10e},{},{},{},{}\n",
                r.irrep,
                r.branch,
                r.kind,
                r.value,
                opt(r.slope),
                opt(r.stderr),
                opt(r.rms),
                r.flagged
            ));
        }
        s
    }
}

/// Branches growing at least this fast in `d` are fitted as linear.
const LINEAR_THRESHOLD: f64 = 0.05;
/// Fitted constants with a larger standard error are flagged.
const FIT_STDERR_MAX: f64 = 1e-3;

/// Fit of one eigenvalue branch over a `d` grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchFit {
    pub kind: BranchKind,
    pub value: f64,
    pub slope: Option<f64>,
    pub stderr: f64,
    pub rms: f64,
}

/// Fit `a + Σ_{j=1..terms} c_j d^{−j/κ}` or `a·d + b + Σ c_j d^{−j/κ}`.
pub fn fit_branch(ds: &[f64], values: &[f64], kappa: u32, terms: usize) -> BranchFit {
    let last = ds.len() - 1;
    let linear = values[last] / ds[last] > LINEAR_THRESHOLD;
    let off = usize::from(linear);
    let a = DMatrix::from_fn(ds.len(), terms + 1 + off, |r, c| {
        if linear && c == 0 {
            ds[r]
        } else {
            ds[r].powf(-((c - off) as f64) / kappa as f64)
        }
    });
    let f = lsq_fit(&a, &DVector::from_column_slice(values));
    if linear {
        BranchFit { kind: BranchKind::Linear, value: f.x[1], slope: Some(f.x[0]), stderr: f.stderr[1], rms: f.rms }
    } else {
        BranchFit { kind: BranchKind::Constant, value: f.x[0], slope: None, stderr: f.stderr[0], rms: f.rms }
    }
}

/// Trivial and standard branches of a family, at one `d` or fitted over a grid.
pub fn table_report(family: FamilyId, mode: TableMode) -> Result<TableReport> {
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    match mode {
        TableMode::Exact { d, method } => {
            let pt = solve_family(family, d, &StepPolicy::default())?.point;
            let rep = match method {
                Method::Adapted => adapted_spectrum(&pt)?,
                Method::Dense => full_spectrum(&embed(&pt)?, &pt.descriptor)?,
            };
            for irrep in [Irrep::T, Irrep::S] {
                let vals = rep.values(irrep);
                if vals.len() != irrep.copies(family.p, family.m) {
                    warnings.push(format!("{irrep}: {} eigenvalues, expected {}", vals.len(), irrep.copies(family.p, family.m)));
                }
                for (branch, value) in vals.into_iter().enumerate() {
                    rows.push(TableRow {
                        irrep,
                        branch,
                        kind: BranchKind::Exact,
                        value,
                        slope: None,
                        stderr: None,
                        rms: None,
                        flagged: false,
                    });
                }
            }
            warnings.extend(rep.diagnostics.mixed.iter().cloned());
        }
        TableMode::Asymptotic { d_lo, d_hi } => {
            let kappa = family_spec(family).kappa;
            let fits = branch_fits(family, &[Irrep::T, Irrep::S], d_lo, d_hi, kappa)?;
            for (irrep, list) in fits {
                for (branch, f) in list.into_iter().enumerate() {
                    let flagged = f.stderr > FIT_STDERR_MAX || !f.value.is_finite();
                    if flagged {
                        warnings.push(format!("{irrep} branch {branch}: fit stderr {:.1e}", f.stderr));
                    }
                    rows.push(TableRow {
                        irrep,
                        branch,
                        kind: f.kind,
                        value: f.value,
                        slope: f.slope,
                        stderr: Some(f.stderr),
                        rms: Some(f.rms),
                        flagged,
                    });
                }
            }
        }
    }
    Ok(TableReport { family, mode, rows, warnings })
}

/// Eigenvalue branches of the given irreps along a continuation path over
/// `[d_lo, d_hi]`: the grid and, per irrep, one ascending-ranked series per branch.
pub fn branch_values(family: FamilyId, irreps: &[Irrep], d_lo: f64, d_hi: f64) -> Result<(Vec<f64>, Vec<Vec<Vec<f64>>>)> {
    let policy = StepPolicy { samples_per_decade: 12.0, ..Default::default() };
    let path = continue_family(family, d_lo, d_hi, &policy)?;
    let per_d: Vec<Vec<Vec<f64>>> = path
        .samples
        .par_iter()
        .map(|s| {
            let pt = ReducedPoint::new(family.descriptor(s.d)?, s.xi.clone())?;
            let rh = RefinedHessian::new(&pt)?;
            irreps
                .iter()
                .map(|&i| Ok(rh.block(&build_irrep_basis(&pt.descriptor, i)?).eigenvalues))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let ds = path.ds();
    let out = (0..irreps.len())
        .map(|k| {
            let nb = per_d[0][k].len();
            (0..nb).map(|b| per_d.iter().map(|v| v[k][b]).collect()).collect()
        })
        .collect();
    Ok((ds, out))
}

fn branch_fits(family: FamilyId, irreps: &[Irrep], d_lo: f64, d_hi: f64, kappa: u32) -> Result<Vec<(Irrep, Vec<BranchFit>)>> {
    let (ds, vals) = branch_values(family, irreps, d_lo, d_hi)?;
    let terms = if kappa == 4 { 4 } else { 3 };
    Ok(irreps
        .iter()
        .zip(vals)
        .map(|(&i, branches)| (i, branches.iter().map(|v| fit_branch(&ds, v, kappa, terms)).collect()))
        .collect())
}

/// Fitted constants of the `x` and `y` eigenvalues along a family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XyFit {
    pub family: FamilyId,
    pub x: BranchFit,
    pub y: BranchFit,
}

pub fn xy_fit(family: FamilyId, d_lo: f64, d_hi: f64) -> Result<XyFit> {
    let kappa = family_spec(family).kappa;
    let mut fits = branch_fits(family, &[Irrep::X, Irrep::Y], d_lo, d_hi, kappa)?;
    let y = fits.pop().unwrap().1.remove(0);
    let x = fits.pop().unwrap().1.remove(0);
    Ok(XyFit { family, x, y })
}

/// `¼ − 1/2π` and `¼ + 1/2π`.
pub fn xy_limits() -> (f64, f64) {
    (0.25 - 1.0 / (2.0 * PI), 0.25 + 1.0 / (2.0 * PI))
}

/// Smallest eigenvalue of the reduced Jacobian symmetrized by the Gram
/// weights, i.e. the trivial block computed without refinement.
pub fn trivial_block_reference(pt: &ReducedPoint) -> Result<Vec<f64>> {
    let sh = pt.descriptor.shape();
    let j = jacobian_on(sh, pt.descriptor.d, &pt.xi)?;
    let g: Vec<f64> = sh.gram_weights(pt.descriptor.d - sh.r as f64).iter().map(|w| w.sqrt()).collect();
    let n = j.nrows();
    Ok(sym_eig(&DMatrix::from_fn(n, n, |r, c| g[r] * j[(r, c)] / g[c])).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyType;
    use crate::kernel::hessian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fixed(p: usize, m: usize, d: usize, seed: u64) -> ReducedPoint {
        let desc = IsotropyDescriptor::new(p, m, d as f64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = (0..desc.n_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ReducedPoint::new(desc, xi).unwrap()
    }

    #[test]
    fn degrees_and_copies_fill_the_space() {
        for (p, m) in [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)] {
            for d in 6..12usize {
                let q = (d - p) as f64;
                let total: f64 = IRREPS.iter().map(|i| i.degree(q) * i.copies(p, m) as f64).sum();
                assert_eq!(total, ((d + m) * d) as f64, "p={p} m={m} d={d}");
            }
        }
    }

    #[test]
    fn projections_are_orthogonal_and_complete() {
        let desc = IsotropyDescriptor::new(1, 1, 7.0).unwrap();
        let proj = IsotypicProjector::new(&desc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = DMatrix::from_fn(8, 7, |_, _| rng.gen_range(-1.0..1.0));
        let parts: Vec<DMatrix<f64>> = IRREPS.iter().map(|&i| proj.project(&u, i)).collect();
        let sum = parts.iter().fold(DMatrix::zeros(8, 7), |a, b| a + b);
        assert!((sum - &u).amax() < 1e-12);
        for i in 0..4 {
            assert!((proj.project(&parts[i], IRREPS[i]) - &parts[i]).amax() < 1e-12);
            for j in 0..i {
                assert!(parts[i].dot(&parts[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bases_are_orthonormal_and_isotypic() {
        for (p, m) in [(0, 1), (1, 0), (1, 2)] {
            let desc = IsotropyDescriptor::new(p, m, 9.0).unwrap();
            let proj = IsotypicProjector::new(&desc).unwrap();
            for irrep in IRREPS {
                let b = build_irrep_basis(&desc, irrep).unwrap();
                assert_eq!(b.len(), irrep.copies(p, m));
                let mats = b.matrices().unwrap();
                for (a, ra) in mats.iter().enumerate() {
                    assert!((proj.project(ra, irrep) - ra).amax() < 1e-10, "{irrep} p={p} m={m}");
                    for (c, rc) in mats.iter().enumerate() {
                        let want = if a == c { 1.0 } else { 0.0 };
                        assert!((ra.dot(rc) - want).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn refined_blocks_match_hessian_products() {
        let pt = random_fixed(1, 1, 8, 11);
        let cfg = embed(&pt).unwrap();
        let rh = RefinedHessian::new(&pt).unwrap();
        for irrep in IRREPS {
            let b = build_irrep_basis(&pt.descriptor, irrep).unwrap();
            let x = rh.block(&b);
            let y = isotypic_block(&cfg, &b).unwrap();
            assert!((x.matrix - y.matrix).amax() < 1e-9, "{irrep}");
        }
    }

    #[test]
    fn dense_clusters_match_blocks_at_random_fixed_point() {
        let pt = random_fixed(1, 0, 8, 5);
        let cfg = embed(&pt).unwrap();
        let dense = full_spectrum(&cfg, &pt.descriptor).unwrap();
        let adapted = adapted_spectrum(&pt).unwrap();
        assert!(dense.diagnostics.reconstruction_residual.unwrap() < RECONSTRUCTION_TOL);
        assert!(dense.diagnostics.unassigned.is_empty());
        assert_eq!(dense.total_multiplicity(), 64.0);
        for irrep in IRREPS {
            let a = adapted.values(irrep);
            let b = dense.values(irrep);
            assert_eq!(a.len(), b.len(), "{irrep}");
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-8, "{irrep}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn dense_matches_kernel_hessian() {
        let pt = random_fixed(0, 1, 6, 2);
        let cfg = embed(&pt).unwrap();
        let h = hessian(&cfg).unwrap();
        let ev = sym_eigvals(&h);
        let rep = full_spectrum(&cfg, &pt.descriptor).unwrap();
        assert!((rep.min() - ev[0]).abs() < 1e-9);
    }

    #[test]
    fn interlacing_rejects_wrong_descriptor() {
        let pt = random_fixed(1, 0, 8, 1);
        assert!(matches!(interlacing_block(&pt), Err(Error::Domain(_))));
    }

    #[test]
    fn interlacing_full_and_refined_agree() {
        let pt = random_fixed(1, 2, 8, 9);
        let cfg = embed(&pt).unwrap();
        let a = interlacing_block(&pt).unwrap();
        let b = interlacing_certificate(&cfg, &pt.descriptor).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.matrix[i][j] - b.matrix[i][j]).abs() < 1e-9);
            }
        }
        assert_eq!(b.interlacing_holds, Some(true));
    }

    #[test]
    fn fit_branch_recovers_linear_and_constant() {
        let ds: Vec<f64> = (0..20).map(|i| 100.0 * 10f64.powf(i as f64 / 10.0)).collect();
        let lin: Vec<f64> = ds.iter().map(|d| 0.25 * d + 0.8 + 0.3 / d.sqrt()).collect();
        let f = fit_branch(&ds, &lin, 2, 3);
        assert_eq!(f.kind, BranchKind::Linear);
        assert!((f.slope.unwrap() - 0.25).abs() < 1e-9 && (f.value - 0.8).abs() < 1e-7);
        let c: Vec<f64> = ds.iter().map(|d| 0.09 - 0.5 / d.sqrt() + 1.0 / d).collect();
        let f = fit_branch(&ds, &c, 2, 3);
        assert_eq!(f.kind, BranchKind::Constant);
        assert!((f.value - 0.09).abs() < 1e-9);
    }

    #[test]
    fn irrep_parsing() {
        assert_eq!("s".parse::<Irrep>().unwrap(), Irrep::S);
        assert!("z".parse::<Irrep>().is_err());
        assert_eq!(Irrep::S.label(11.0), "s_11");
        let _ = FamilyType::I;
    }
}
