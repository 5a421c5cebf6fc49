//! Xavier-initialization loss bounds and the fossilized critical sets that
//! appear when neurons are added.
//!
//! With `k = d` and entries i.i.d. `N(0, 1/d)` the expected squared error
//! `E[(1ᵀσ(Wx) − 1ᵀσ(Vx))²] = 2L(W)` lies in `[(1−2/π)d, (1−1/π)d]`.
//! Adding `m = k − d` neurons replaces the discrete orbit of global minima by
//! a connected `m`-dimensional complex `Δ★(k,d)`,
//! built from partitions `𝒦 = (K₁..K_d)` of `[k]` with `j ∈ K_j`; the same
//! construction splits the rows of any critical point into convex copies.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, Degenerate, HessianOperator, WeightConfig};
use crate::linalg;

/// Smallest Monte-Carlo sample accepted by [`xavier_mc`].
pub const XAVIER_MIN_SAMPLES: usize = 1000;

/// Largest `k − d` accepted by [`enumerate_partitions`].
pub const PARTITION_GUARD: usize = 4;

/// Entries closer than this identify two vertex matrices.
pub const VERTEX_TOL: f64 = 1e-12;

/// Samples per independently seeded stream.
const XAVIER_CHUNK: usize = 1 << 10;

/// `((1−2/π)d, (1−1/π)d)`.
pub fn xavier_bounds(d: usize) -> (f64, f64) {
    let df = d as f64;
    ((1.0 - 2.0 / PI) * df, (1.0 - 1.0 / PI) * df)
}

/// Monte-Carlo estimate of the expected initial error with its closed-form
/// bracket. `estimate` is the unhalved squared error `2L`, the quantity the
/// bracket refers to; `loss_mean` is `E_W[L(W)]` in the halved convention.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XavierEstimate {
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub loss_mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl XavierEstimate {
    /// Whether the estimate lies in `[lo − zσ, hi + zσ]`.
    pub fn within(&self, z: f64) -> bool {
        self.estimate >= self.lo - z * self.stderr && self.estimate <= self.hi + z * self.stderr
    }
}

/// `(sin θ + (π−θ)cos θ)/(2π)` from `cos θ`.
fn kernel_of_cos(c: f64) -> f64 {
    let c = c.clamp(-1.0, 1.0);
    let t = c.acos();
    ((1.0 - c * c).sqrt() + (PI - t) * c) / (2.0 * PI)
}

/// Loss of a square `W` (no zero rows) through its Gram matrix `WWᵀ`.
pub fn loss_via_gram(w: &DMatrix<f64>) -> f64 {
    let (k, d) = w.shape();
    let g = w * w.transpose();
    let norms: Vec<f64> = (0..k).map(|i| g[(i, i)].max(0.0).sqrt()).collect();
    let mut ww = 0.0;
    for i in 0..k {
        ww += 0.25 * g[(i, i)];
        for j in (i + 1)..k {
            let nn = norms[i] * norms[j];
            if nn > 0.0 {
                ww += nn * kernel_of_cos(g[(i, j)] / nn);
            }
        }
    }
    let mut wv = 0.0;
    for i in 0..k {
        if norms[i] == 0.0 {
            continue;
        }
        for j in 0..d {
            wv += norms[i] * kernel_of_cos(w[(i, j)] / norms[i]);
        }
    }
    let df = d as f64;
    ww - wv + 0.5 * (df / 2.0 + df * (df - 1.0) / (2.0 * PI))
}

/// Samples `W ∈ M(d,d)` with i.i.d. `N(0, 1/d)` entries and averages twice
/// the closed-form loss. Chunks carry their own ChaCha stream, so the result
/// is independent of the thread count.
pub fn xavier_mc(d: usize, n: usize, seed: u64) -> Result<XavierEstimate> {
    if d == 0 {
        return Err(Error::Domain("xavier_mc needs d ≥ 1".into()));
    }
    if n < XAVIER_MIN_SAMPLES {
        return Err(Error::Domain(format!("xavier_mc needs n ≥ {XAVIER_MIN_SAMPLES}, got {n}")));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let chunks = n.div_ceil(XAVIER_CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = XAVIER_CHUNK.min(n - c * XAVIER_CHUNK);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let w = DMatrix::from_fn(d, d, |_, _| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    scale * z
                });
                let y = 2.0 * loss_via_gram(&w);
                s1 += y;
                s2 += y * y;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    let (lo, hi) = xavier_bounds(d);
    Ok(XavierEstimate { d, samples: n, seed, estimate: mean, stderr: (var / nf).sqrt(), loss_mean: 0.5 * mean, lo, hi })
}

/// A partition `K₁..K_d` of `[k]` (0-based) with `j ∈ K_j` for `j < d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FossilPartition {
    pub k: usize,
    pub d: usize,
    pub parts: Vec<Vec<usize>>,
}

impl FossilPartition {
    /// Validates and sorts the parts.
    pub fn new(k: usize, d: usize, mut parts: Vec<Vec<usize>>) -> Result<Self> {
        if d == 0 || k < d {
            return Err(Error::Dimension(format!("need k ≥ d ≥ 1, got k={k}, d={d}")));
        }
        if parts.len() != d {
            return Err(Error::Dimension(format!("expected {d} parts, got {}", parts.len())));
        }
        let mut seen = vec![false; k];
        for (j, part) in parts.iter_mut().enumerate() {
            part.sort_unstable();
            if !part.contains(&j) {
                return Err(Error::Domain(format!("part {j} does not contain {j}")));
            }
            for &i in part.iter() {
                if i >= k || seen[i] {
                    return Err(Error::Domain(format!("index {i} repeated or out of range")));
                }
                if i < d && i != j {
                    return Err(Error::Domain(format!("part {j} contains the leading index {i}")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Domain(format!("index {i} not covered")));
        }
        Ok(FossilPartition { k, d, parts })
    }

    pub fn m(&self) -> usize {
        self.k - self.d
    }

    /// The part containing `i`.
    pub fn owner(&self, i: usize) -> usize {
        self.parts.iter().position(|p| p.contains(&i)).expect("partition covers [k]")
    }

    /// `M_𝒦`: entry `(i,j)` is 1 iff `i ∈ K_j`.
    pub fn vertex_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.k, self.d);
        for (j, part) in self.parts.iter().enumerate() {
            for &i in part {
                m[(i, j)] = 1.0;
            }
        }
        m
    }

    /// Point `V_δ` of `Δ(𝒦)`: entry `(i,j)` is `δᵢ` for `i ∈ K_j`.
    pub fn simplex_point(&self, delta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_delta(delta)?;
        let mut m = DMatrix::zeros(self.k, self.d);
        for (j, part) in self.parts.iter().enumerate() {
            for &i in part {
                m[(i, j)] = delta[i];
            }
        }
        Ok(m)
    }

    /// Barycentric weights: nonnegative and summing to 1 on every part.
    pub fn check_delta(&self, delta: &[f64]) -> Result<()> {
        if delta.len() != self.k {
            return Err(Error::Dimension(format!("δ has length {}, expected {}", delta.len(), self.k)));
        }
        for (j, part) in self.parts.iter().enumerate() {
            let s: f64 = part.iter().map(|&i| delta[i]).sum();
            if (s - 1.0).abs() > 1e-12 || part.iter().any(|&i| delta[i] < 0.0) {
                return Err(Error::Domain(format!("δ is not barycentric on part {j} (sum {s})")));
            }
        }
        Ok(())
    }

    /// Dirichlet(1,…,1) weights on every part.
    pub fn sample_delta<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut delta = vec![0.0; self.k];
        for part in &self.parts {
            let e: Vec<f64> = part.iter().map(|_| Exp1.sample(rng)).collect();
            let s: f64 = e.iter().sum();
            for (&i, x) in part.iter().zip(e) {
                delta[i] = x / s;
            }
        }
        delta
    }

    /// Vertices of `Δ(𝒦)`: one chosen index per part.
    pub fn vertex_choices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for part in &self.parts {
            out = out
                .into_iter()
                .flat_map(|c| {
                    part.iter().map(move |&i| {
                        let mut c = c.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        out
    }
}

/// All of `𝔎★(k,d)`: each of the `k − d` extra indices goes to one of `d`
/// parts, `d^{k−d}` partitions in total.
pub fn enumerate_partitions(k: usize, d: usize) -> Result<Vec<FossilPartition>> {
    if d == 0 || k < d {
        return Err(Error::Dimension(format!("need k ≥ d ≥ 1, got k={k}, d={d}")));
    }
    let m = k - d;
    if m > PARTITION_GUARD {
        return Err(Error::Unsupported(format!("k − d = {m} exceeds the enumeration guard {PARTITION_GUARD}")));
    }
    let total = d.pow(m as u32);
    (0..total)
        .map(|mut code| {
            let mut parts: Vec<Vec<usize>> = (0..d).map(|j| vec![j]).collect();
            for e in 0..m {
                parts[code % d].push(d + e);
                code /= d;
            }
            FossilPartition::new(k, d, parts)
        })
        .collect()
}

/// The cells `Δ(𝒦)` of `Δ(k,d)` with their vertex matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FossilComplex {
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub partitions: Vec<FossilPartition>,
    pub vertex_matrices: Vec<DMatrix<f64>>,
}

impl FossilComplex {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        let partitions = enumerate_partitions(k, d)?;
        let vertex_matrices = partitions.iter().map(|p| p.vertex_matrix()).collect();
        Ok(FossilComplex { k, d, m: k - d, partitions, vertex_matrices })
    }
}

/// A critical point with rows split along a partition of `[k̄]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FossilPoint {
    pub config: WeightConfig,
    pub source_loss: f64,
    pub loss: f64,
    /// Frobenius norm of the gradient; `None` on the boundary, where the
    /// loss is not smooth.
    pub gradient_norm: Option<f64>,
    /// Largest deviation of the column sums from those of the source.
    pub column_sum_drift: f64,
    pub interior: bool,
    pub warnings: Vec<String>,
}

/// `W_δ ∈ M(k̄,d)`: row `ℓ ∈ K_i` becomes `δ_ℓ wᵢ`. The partition has one
/// part per row of `W`.
pub fn fossil_point(w: &WeightConfig, partition: &FossilPartition, delta: &[f64]) -> Result<FossilPoint> {
    if partition.d != w.k {
        return Err(Error::Dimension(format!(
            "partition has {} parts but W has {} rows",
            partition.d, w.k
        )));
    }
    partition.check_delta(delta)?;
    let kbar = partition.k;
    let mut out = DMatrix::zeros(kbar, w.d);
    for (i, part) in partition.parts.iter().enumerate() {
        for &l in part {
            out.row_mut(l).copy_from(&(w.w.row(i) * delta[l]));
        }
    }
    let drift = (0..w.d)
        .map(|j| (out.column(j).sum() - w.w.column(j).sum()).abs())
        .fold(0.0, f64::max);
    let config = WeightConfig::new(out)?;
    let interior = delta.iter().all(|&x| x > 0.0);
    let mut warnings = Vec::new();
    let gradient_norm = if interior {
        Some(kernel::gradient(&config)?.norm())
    } else {
        warnings.push("boundary δ: some rows vanish and the loss is not smooth; gradient not evaluated".into());
        None
    };
    Ok(FossilPoint {
        source_loss: kernel::loss(w),
        loss: kernel::loss(&config),
        config,
        gradient_norm,
        column_sum_drift: drift,
        interior,
        warnings,
    })
}

/// Splits row `row` of `W` into copies weighted by `alphas` (appended as new
/// trailing rows after the first).
pub fn split_row(w: &WeightConfig, row: usize, alphas: &[f64]) -> Result<FossilPoint> {
    if row >= w.k || alphas.is_empty() {
        return Err(Error::Dimension(format!("cannot split row {row} of a {}-row matrix", w.k)));
    }
    let kbar = w.k + alphas.len() - 1;
    let mut parts: Vec<Vec<usize>> = (0..w.k).map(|i| vec![i]).collect();
    parts[row].extend(w.k..kbar);
    let partition = FossilPartition::new(kbar, w.k, parts)?;
    let mut delta = vec![1.0; kbar];
    delta[row] = alphas[0];
    delta[w.k..].copy_from_slice(&alphas[1..]);
    fossil_point(w, &partition, &delta)
}

/// Ascending Hessian eigenvalues, using the continuous extension across the
/// parallel rows created by splitting.
pub fn fossil_hessian_eigenvalues(cfg: &WeightConfig) -> Result<Vec<f64>> {
    let h = HessianOperator::new(cfg, Degenerate::Extend)?.dense();
    let mut ev = linalg::sym_eigvals(&h);
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Vertex/edge structure of `Δ★(k,d)` with sampled zero-loss checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexReport {
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub partitions: usize,
    /// Vertex matrices flattened row by row.
    pub vertices: Vec<Vec<f64>>,
    pub edges: Vec<(usize, usize)>,
    pub connected: bool,
    /// Connected with every vertex of degree 2.
    pub is_cycle: bool,
    pub samples: usize,
    pub max_sample_loss: f64,
    /// Largest max−min of the loss over the samples of one cell orbit.
    pub max_loss_spread: f64,
    pub max_column_sum_drift: f64,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `(σ, τ)·W`: row `i` of the result is row `σ⁻¹(i)`, columns likewise.
fn act(w: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(w.nrows(), w.ncols());
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            out[(rows[i], cols[j])] = w[(i, j)];
        }
    }
    out
}

fn find_or_insert(verts: &mut Vec<DMatrix<f64>>, m: DMatrix<f64>) -> usize {
    if let Some(i) = verts.iter().position(|v| (v - &m).amax() <= VERTEX_TOL) {
        return i;
    }
    verts.push(m);
    verts.len() - 1
}

fn choice_matrix(k: usize, d: usize, choice: &[usize]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, d);
    for (j, &i) in choice.iter().enumerate() {
        m[(i, j)] = 1.0;
    }
    m
}

/// Builds `Δ★(k,d) = Γ·Δ(k,d)` with `Γ = S_k × S_d`, identifies vertices,
/// collects edges (one column moving along an edge of its simplex) and
/// samples Dirichlet points of every cell orbit.
pub fn global_min_complex_check(k: usize, d: usize, samples: usize, seed: u64) -> Result<ComplexReport> {
    if d == 0 || k < d || k - d > 2 || d > 4 {
        return Err(Error::Unsupported(format!("complex check needs k − d ≤ 2 and d ≤ 4, got k={k}, d={d}")));
    }
    let complex = FossilComplex::new(k, d)?;
    let row_perms = permutations(k);
    let col_perms = permutations(d);
    let mut verts: Vec<DMatrix<f64>> = Vec::new();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for part in &complex.partitions {
        let choices = part.vertex_choices();
        let local: Vec<DMatrix<f64>> = choices.iter().map(|c| choice_matrix(k, d, c)).collect();
        let mut local_edges = Vec::new();
        for a in 0..choices.len() {
            for b in (a + 1)..choices.len() {
                let diff = choices[a].iter().zip(&choices[b]).filter(|(x, y)| x != y).count();
                if diff == 1 {
                    local_edges.push((a, b));
                }
            }
        }
        for s in &row_perms {
            for t in &col_perms {
                let ids: Vec<usize> = local.iter().map(|m| find_or_insert(&mut verts, act(m, s, t))).collect();
                for &(a, b) in &local_edges {
                    let (x, y) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                    edges.insert((x, y));
                }
            }
        }
    }
    let n = verts.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    let connected = seen.iter().all(|&s| s);
    let is_cycle = connected && n >= 3 && adj.iter().all(|a| a.len() == 2);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_loss: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let per_cell = samples.div_ceil(complex.partitions.len()).max(1);
    let mut spread: f64 = 0.0;
    let mut taken = 0;
    for part in &complex.partitions {
        let s = row_perms.choose(&mut rng).expect("nonempty");
        let t = col_perms.choose(&mut rng).expect("nonempty");
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..per_cell {
            if taken == samples {
                break;
            }
            let delta = part.sample_delta(&mut rng);
            let w = act(&part.simplex_point(&delta)?, s, t);
            for j in 0..d {
                drift = drift.max((w.column(j).sum() - 1.0).abs());
            }
            let l = kernel::loss(&WeightConfig::new(w)?);
            max_loss = max_loss.max(l.abs());
            lo = lo.min(l);
            hi = hi.max(l);
            taken += 1;
        }
        if hi >= lo {
            spread = spread.max(hi - lo);
        }
    }
    let vertices = verts.iter().map(|m| m.transpose().iter().copied().collect()).collect();
    Ok(ComplexReport {
        k,
        d,
        m: k - d,
        partitions: complex.partitions.len(),
        vertices,
        edges: edges.into_iter().collect(),
        connected,
        is_cycle,
        samples: taken,
        max_sample_loss: max_loss,
        max_loss_spread: spread,
        max_column_sum_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_examples() {
        let (lo, hi) = xavier_bounds(10);
        assert!((lo - 3.63380).abs() < 1e-5 && (hi - 6.81690).abs() < 1e-5);
        let (lo, hi) = xavier_bounds(1);
        assert!((lo - 0.36338).abs() < 1e-5 && (hi - 0.68169).abs() < 1e-5);
    }

    #[test]
    fn gram_loss_matches_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = DMatrix::from_fn(5, 5, |_, _| rng.gen_range(-1.0..1.0));
        let a = loss_via_gram(&w);
        let b = kernel::loss(&WeightConfig::new(w).unwrap());
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn partition_counts() {
        assert_eq!(enumerate_partitions(3, 2).unwrap().len(), 2);
        assert_eq!(enumerate_partitions(4, 2).unwrap().len(), 4);
        assert_eq!(enumerate_partitions(5, 5).unwrap().len(), 1);
        assert!(enumerate_partitions(9, 3).is_err());
        let p = enumerate_partitions(3, 2).unwrap();
        assert_eq!(p[0].parts, vec![vec![0, 2], vec![1]]);
        assert_eq!(p[1].parts, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn partition_validation() {
        assert!(FossilPartition::new(3, 2, vec![vec![0, 1], vec![2]]).is_err());
        assert!(FossilPartition::new(3, 2, vec![vec![0], vec![1]]).is_err());
        assert!(FossilPartition::new(3, 2, vec![vec![2, 0], vec![1]]).is_ok());
    }

    #[test]
    fn hexagon() {
        let r = global_min_complex_check(3, 2, 100, 1).unwrap();
        assert_eq!(r.vertices.len(), 6);
        assert_eq!(r.edges.len(), 6);
        assert!(r.is_cycle);
        assert!(r.max_sample_loss < 1e-12);
    }

    #[test]
    fn square_case_is_two_points() {
        let r = global_min_complex_check(2, 2, 10, 1).unwrap();
        assert_eq!(r.vertices.len(), 2);
        assert!(r.edges.is_empty());
    }

    #[test]
    fn boundary_delta_skips_gradient() {
        let v = WeightConfig::target(2, 2).unwrap();
        let p = split_row(&v, 0, &[1.0, 0.0]).unwrap();
        assert!(p.gradient_norm.is_none() && !p.warnings.is_empty());
        assert!((p.loss - p.source_loss).abs() < 1e-12);
    }
}
