//! Fractional power series of the critical families in `s = d^{-1/κ}`.
//!
//! Coefficients come from three routes:
//! * the explicit small coefficient systems of the type II `k = d+1, d+2`
//!   families and the closed forms of type I `k = d+1`;
//! * an order-by-order solve of `F_d(ξ(s)) = 0` with ξ an ansatz of
//!   Laurent series (works for every cataloged family, and is the route for
//!   type I `k = d+2`);
//! * least-squares fits along continuation paths.
//!
//! Coefficient names follow the coordinate letters: for `p = 1, m = 2`,
//! `ξ = (c, e, f, g, h, p, q, a, b)` and a subscript is the power of `s`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyId, FamilyType};
use crate::linalg::{lsq_fit, lstsq};
use crate::series::{Series, MAX_TERMS};
use crate::solver::{ContinuationPath, PathSample};
use crate::symmetry::{field_generic, loss_generic, loss_on};

/// Known structure of one coordinate: `constant + Σ_j u_j s^{lead+j}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CoordSpec {
    pub constant: f64,
    pub lead: u32,
    /// Rough value of the leading unknown coefficient (Newton start).
    pub guess: f64,
}

const fn cs(constant: f64, lead: u32, guess: f64) -> CoordSpec {
    CoordSpec { constant, lead, guess }
}

/// Catalog entry: expansion base and coordinate structure of a family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyId,
    pub kappa: u32,
    pub coords: Vec<CoordSpec>,
    /// Unknown coefficients per coordinate in the order-by-order solve.
    pub terms: usize,
    /// Smallest `d` at which the truncated series is trusted as a seed.
    pub d_valid: f64,
}

pub fn family_spec(f: FamilyId) -> FamilySpec {
    use FamilyType::*;
    let (kappa, coords, terms, d_valid): (u32, Vec<CoordSpec>, usize, f64) = match (f.family_type, f.p, f.m) {
        (I, 0, 0) => (2, vec![cs(-1.0, 2, 2.0), cs(0.0, 2, 2.0)], 6, 20.0),
        (I, 0, 1) => (2, vec![cs(-1.0, 2, 2.0), cs(0.0, 2, 2.0), cs(0.0, 2, 2.0)], 6, 20.0),
        (I, 1, 0) => (
            2,
            vec![cs(-1.0, 2, 2.0), cs(0.0, 2, 2.0), cs(0.0, 4, -2.2), cs(0.0, 2, 0.73), cs(1.0, 2, 1.74)],
            6,
            20.0,
        ),
        (I, 1, 1) => (
            4,
            vec![
                cs(-1.0, 4, 2.0),
                cs(0.0, 4, 2.0),
                cs(0.0, 4, 1.0),
                cs(0.0, 3, 0.53),
                cs(0.5, 1, 0.57),
                cs(0.0, 3, 0.53),
                cs(-0.5, 1, 0.57),
            ],
            10,
            100.0,
        ),
        (I, 1, 2) => (
            4,
            vec![
                cs(-1.0, 4, 2.0),
                cs(0.0, 4, 2.0),
                cs(0.0, 4, 1.0),
                cs(0.0, 3, 0.53),
                cs(0.5, 1, 0.43),
                cs(0.0, 3, 0.53),
                cs(-0.5, 1, 0.43),
                cs(0.0, 4, 1.25),
                cs(0.0, 2, -0.88),
            ],
            10,
            100.0,
        ),
        (II, 1, 0) => (
            2,
            vec![cs(1.0, 4, 2.5), cs(0.0, 4, -1.3), cs(0.0, 2, 2.0), cs(0.0, 2, 1.3), cs(-1.0, 2, 5.4)],
            6,
            20.0,
        ),
        (II, 1, 1) => (
            2,
            vec![
                cs(1.0, 3, -0.57),
                cs(0.0, 4, -1.6),
                cs(0.0, 2, 2.0),
                cs(0.0, 2, 0.92),
                cs(0.0, 1, -1.39),
                cs(0.0, 2, 0.70),
                cs(-1.0, 1, 1.09),
            ],
            6,
            20.0,
        ),
        (II, 1, 2) => (
            2,
            vec![
                cs(1.0, 3, -0.57),
                cs(0.0, 4, -1.6),
                cs(0.0, 2, 2.0),
                cs(0.0, 2, 0.79),
                cs(0.0, 1, -1.12),
                cs(0.0, 2, 0.16),
                cs(0.0, 1, -0.42),
                cs(0.0, 2, 0.67),
                cs(-1.0, 1, 1.24),
            ],
            6,
            20.0,
        ),
        _ => unreachable!("FamilyId::new rejects other combinations"),
    };
    FamilySpec { family: f, kappa, coords, terms, d_valid }
}

/// Truncated expansion `ξ_i(d) = Σ_j c[i][j] d^{-j/κ}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FPSExpansion {
    pub family: FamilyId,
    pub kappa: u32,
    /// `coeffs[i][j]`, orders `j = 0..=J`.
    pub coeffs: Vec<Vec<f64>>,
    /// Whether `coeffs[i][j]` is pinned by the equations (fits: always true).
    pub determined: Vec<Vec<bool>>,
    /// Standard errors of fitted coefficients, or propagated uncertainties
    /// of order-by-order ones.
    pub stderr: Option<Vec<Vec<f64>>>,
    pub order: usize,
    pub warnings: Vec<String>,
}

impl FPSExpansion {
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i].get(j).copied().unwrap_or(0.0)
    }

    /// Keep only determined coefficients (undetermined ones are set to 0).
    pub fn determined_part(&self) -> FPSExpansion {
        let mut e = self.clone();
        for (row, det) in e.coeffs.iter_mut().zip(&self.determined) {
            for (c, ok) in row.iter_mut().zip(det) {
                if !ok {
                    *c = 0.0;
                }
            }
        }
        e
    }
}

/// `Σ_j c[i][j] d^{-j/κ}` per coordinate.
pub fn evaluate_fps(exp: &FPSExpansion, d: f64) -> Result<Vec<f64>> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("d = {d} must be positive")));
    }
    let s = d.powf(-1.0 / exp.kappa as f64);
    Ok(exp
        .coeffs
        .iter()
        .map(|row| row.iter().rev().fold(0.0, |acc, c| acc * s + c))
        .collect())
}

/// Coefficient table entry, keyed by family, coordinate and order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub family_type: FamilyType,
    pub p: usize,
    pub m: usize,
    pub coordinate: usize,
    pub order: usize,
    pub value: f64,
    pub determined: bool,
    pub stderr: Option<f64>,
}

/// Flatten an expansion into JSON-friendly table rows.
pub fn coefficient_table(exp: &FPSExpansion) -> Vec<CoeffEntry> {
    let mut rows = Vec::new();
    for (i, row) in exp.coeffs.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            rows.push(CoeffEntry {
                family_type: exp.family.family_type,
                p: exp.family.p,
                m: exp.family.m,
                coordinate: i,
                order: j,
                value,
                determined: exp.determined[i][j],
                stderr: exp.stderr.as_ref().map(|e| e[i][j]),
            });
        }
    }
    rows
}

/// One scalar equation: the coefficient of `s^order` in component `component`.
#[derive(Clone, Copy, Debug)]
pub struct Equation {
    pub component: usize,
    pub order: i32,
    pub scale: f64,
}

fn same_orders(a: &[Equation], b: &[Equation]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.component == y.component && x.order == y.order)
}

/// Lowest order of `F` inspected for equations.
const LOWEST_ORDER: i32 = -16;
/// Relative noise of one scaled equation.
const EQ_NOISE: f64 = 1e-15;
/// Coefficients with a larger propagated uncertainty count as undetermined.
const DETERMINED_TOL: f64 = 1e-5;

/// Order-by-order system `F_d(ξ(s)) = 0` for one family.
///
/// Unknown `(i, j)` is the coefficient of `s^{lead_i + j}` in coordinate `i`.
pub struct SeriesSystem {
    pub spec: FamilySpec,
    offsets: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SeriesSolution {
    pub u: Vec<f64>,
    /// Largest scaled equation residual.
    pub residual: f64,
    pub equations: usize,
    pub determined: Vec<bool>,
    pub uncertainty: Vec<f64>,
}

impl SeriesSystem {
    pub fn new(spec: FamilySpec) -> Self {
        let offsets = (0..spec.coords.len()).map(|i| i * spec.terms).collect();
        SeriesSystem { spec, offsets }
    }

    pub fn unknowns(&self) -> usize {
        self.spec.coords.len() * self.spec.terms
    }

    /// Index of the unknown holding the coefficient of `s^order` in `coord`.
    pub fn unknown_index(&self, coord: usize, order: usize) -> Option<usize> {
        let lead = self.spec.coords.get(coord)?.lead as usize;
        (order >= lead && order < lead + self.spec.terms).then(|| self.offsets[coord] + order - lead)
    }

    /// Unknowns read off an expansion (missing orders are 0).
    pub fn unknowns_from(&self, exp: &FPSExpansion) -> Vec<f64> {
        let mut u = vec![0.0; self.unknowns()];
        for (i, c) in self.spec.coords.iter().enumerate() {
            for j in 0..self.spec.terms {
                u[self.offsets[i] + j] = exp.coeff(i, c.lead as usize + j);
            }
        }
        u
    }

    pub fn xi(&self, u: &[f64]) -> Vec<Series> {
        self.spec
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let top = c.lead as usize + self.spec.terms;
                let mut v = vec![0.0; top];
                v[0] = c.constant;
                for j in 0..self.spec.terms {
                    v[c.lead as usize + j] = u[self.offsets[i] + j];
                }
                Series::from_coeffs(0, &v, top as i32)
            })
            .collect()
    }

    pub fn field(&self, u: &[f64]) -> Vec<Series> {
        field_generic(self.spec.family.shape(), &band_size(self.spec.kappa, self.spec.family.p), &self.xi(u))
    }

    /// All `(component, order)` pairs below each component's precision,
    /// scaled by the magnitude bound of the coefficient at `u`.
    pub fn equations(&self, u: &[f64]) -> Vec<Equation> {
        let f = self.field(u);
        let mut eqs = Vec::new();
        for (i, fi) in f.iter().enumerate() {
            for o in LOWEST_ORDER..fi.prec().min(LOWEST_ORDER + MAX_TERMS) {
                eqs.push(Equation { component: i, order: o, scale: fi.mag(o).max(1.0) });
            }
        }
        eqs
    }

    pub fn residual(&self, u: &[f64], eqs: &[Equation]) -> DVector<f64> {
        let f = self.field(u);
        DVector::from_iterator(eqs.len(), eqs.iter().map(|e| f[e.component].coef(e.order).unwrap_or(0.0) / e.scale))
    }

    /// Central-difference Jacobian in the free unknowns.
    pub fn jacobian(&self, u: &[f64], eqs: &[Equation], free: &[usize]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(eqs.len(), free.len());
        let mut up = u.to_vec();
        for (col, &c) in free.iter().enumerate() {
            let h = 1e-6 * (1.0 + u[c].abs());
            up[c] = u[c] + h;
            let rp = self.residual(&up, eqs);
            up[c] = u[c] - h;
            let rm = self.residual(&up, eqs);
            up[c] = u[c];
            j.set_column(col, &((rp - rm) / (2.0 * h)));
        }
        j
    }

    /// Levenberg-Marquardt on a fixed equation set, moving only `free`.
    fn levenberg_marquardt(&self, u0: &[f64], eqs: &[Equation], free: &[usize], iters: usize) -> (Vec<f64>, f64, DMatrix<f64>) {
        let mut u = u0.to_vec();
        let mut r = self.residual(&u, eqs);
        let mut mu = 1e-3;
        let mut jac = self.jacobian(&u, eqs, free);
        for _ in 0..iters {
            if r.amax() < 1e-16 {
                break;
            }
            let a = jac.transpose() * &jac;
            let g = jac.transpose() * &r;
            let scale = a.diagonal().amax().max(1e-300);
            let mut improved = false;
            for _ in 0..12 {
                let mut m = a.clone();
                for i in 0..m.nrows() {
                    m[(i, i)] += mu * (a[(i, i)] + 1e-12 * scale);
                }
                let step = match m.clone().cholesky() {
                    Some(ch) => ch.solve(&(-&g)),
                    None => lstsq(&m, &(-&g)).0,
                };
                let mut trial = u.clone();
                for (k, &c) in free.iter().enumerate() {
                    trial[c] += step[k];
                }
                let rt = self.residual(&trial, eqs);
                if rt.norm() < r.norm() {
                    let small = step.amax() < 1e-15 * (1.0 + u.iter().fold(0.0f64, |m, x| m.max(x.abs())));
                    u = trial;
                    r = rt;
                    mu = (mu / 3.0).max(1e-12);
                    improved = true;
                    if small {
                        return (u, r.amax(), jac);
                    }
                    break;
                }
                mu *= 4.0;
            }
            if !improved {
                break;
            }
            jac = self.jacobian(&u, eqs, free);
        }
        (u, r.amax(), jac)
    }

    /// Solve with every unknown free.
    pub fn solve_fixed(&self, u0: &[f64]) -> SeriesSolution {
        self.solve_pinned(u0, &[])
    }

    /// Solve with the listed unknowns held at the given values, re-deriving
    /// the equation set after each pass until it is stable.
    pub fn solve_pinned(&self, u0: &[f64], pinned: &[(usize, f64)]) -> SeriesSolution {
        let mut u = u0.to_vec();
        for &(i, v) in pinned {
            u[i] = v;
        }
        let free: Vec<usize> = (0..u.len()).filter(|i| !pinned.iter().any(|(p, _)| p == i)).collect();
        let mut eqs = self.equations(&u);
        let mut out = (u.clone(), f64::INFINITY, DMatrix::zeros(0, 0));
        for _ in 0..6 {
            out = self.levenberg_marquardt(&u, &eqs, &free, 200);
            u = out.0.clone();
            let next = self.equations(&u);
            if same_orders(&next, &eqs) {
                break;
            }
            eqs = next;
        }
        let (u, res, jac) = out;
        let mut uncertainty = vec![0.0; u.len()];
        for (k, e) in free.iter().zip(unknown_uncertainty(&jac)) {
            uncertainty[*k] = e;
        }
        let determined = uncertainty.iter().map(|e| *e < DETERMINED_TOL).collect();
        SeriesSolution { u, residual: res, equations: eqs.len(), determined, uncertainty }
    }

    pub fn expansion(&self, sol: &SeriesSolution) -> FPSExpansion {
        let spec = &self.spec;
        let order = spec.coords.iter().map(|c| c.lead as usize).max().unwrap() + spec.terms - 1;
        let mut coeffs = Vec::new();
        let mut determined = Vec::new();
        let mut stderr = Vec::new();
        for (i, c) in spec.coords.iter().enumerate() {
            let mut row = vec![0.0; order + 1];
            let mut det = vec![true; order + 1];
            let mut err = vec![0.0; order + 1];
            row[0] = c.constant;
            for o in (c.lead as usize + spec.terms)..=order {
                det[o] = false;
                err[o] = f64::INFINITY;
            }
            for j in 0..spec.terms {
                let o = c.lead as usize + j;
                row[o] = sol.u[self.offsets[i] + j];
                det[o] = sol.determined[self.offsets[i] + j];
                err[o] = sol.uncertainty[self.offsets[i] + j];
            }
            coeffs.push(row);
            determined.push(det);
            stderr.push(err);
        }
        let mut warnings = Vec::new();
        if sol.residual > 1e-12 {
            warnings.push(format!("order-by-order residual {:.2e}", sol.residual));
        }
        FPSExpansion { family: spec.family, kappa: spec.kappa, coeffs, determined, stderr: Some(stderr), order, warnings }
    }
}

/// `n = d − r = s^{−κ} − r` as a series.
fn band_size(kappa: u32, r: usize) -> Series {
    let k = kappa as i32;
    let mut nc = vec![0.0; (k + 1) as usize];
    nc[0] = 1.0;
    nc[k as usize] = -(r as f64);
    Series::from_coeffs(-k, &nc, -k + MAX_TERMS)
}

/// Per-unknown uncertainty from the scaled Jacobian: the equation noise
/// propagated through the pseudo-inverse, plus the unknown's share of the
/// structural null space (how far it moves along a unit free direction).
fn unknown_uncertainty(jac: &DMatrix<f64>) -> Vec<f64> {
    let n = jac.ncols();
    if jac.nrows() == 0 {
        return vec![f64::INFINITY; n];
    }
    let a = jac.transpose() * jac;
    let (vals, vecs) = crate::linalg::sym_eig(&a);
    let top = vals.last().copied().unwrap_or(0.0).max(1e-300);
    let mut var = vec![0.0; n];
    let mut null = vec![0.0; n];
    for (k, &v) in vals.iter().enumerate() {
        let is_null = v <= 1e-26 * top;
        for i in 0..n {
            let w = vecs[(i, k)];
            if is_null {
                null[i] += w * w;
            } else {
                var[i] += w * w / v;
            }
        }
    }
    var.iter().zip(&null).map(|(v, z)| EQ_NOISE * v.sqrt() + z.sqrt()).collect()
}

/// Leading-order expansion straight from the catalog guesses.
pub fn crude_expansion(spec: &FamilySpec) -> FPSExpansion {
    let order = spec.coords.iter().map(|c| c.lead as usize).max().unwrap();
    let coeffs = spec
        .coords
        .iter()
        .map(|c| {
            let mut row = vec![0.0; order + 1];
            row[0] = c.constant;
            row[c.lead as usize] += c.guess;
            row
        })
        .collect();
    FPSExpansion {
        family: spec.family,
        kappa: spec.kappa,
        coeffs,
        determined: vec![vec![true; order + 1]; spec.coords.len()],
        stderr: None,
        order,
        warnings: vec![],
    }
}

/// Upper end of the bootstrap path; beyond it `f64` continuation loses the
/// branch.
const BOOTSTRAP_HI: f64 = 1e5;
const BOOTSTRAP_LO: f64 = 1e3;

/// Numerical path at large `d` started from the crude leading-order seed.
pub fn bootstrap_path(spec: &FamilySpec) -> Result<Vec<PathSample>> {
    let sh = spec.family.shape();
    let seed = evaluate_fps(&crude_expansion(spec), BOOTSTRAP_HI)?;
    let policy = crate::solver::StepPolicy { samples_per_decade: 10.0, ..Default::default() };
    crate::solver::continue_from(sh, BOOTSTRAP_HI, &seed, BOOTSTRAP_LO, &policy)
}

/// Initial unknowns of the series system from a least-squares fit of the
/// ansatz to numerical path samples (`fit_terms` per coordinate).
pub fn fit_unknowns(sys: &SeriesSystem, samples: &[PathSample], fit_terms: usize) -> Vec<f64> {
    let spec = &sys.spec;
    let mut u = vec![0.0; sys.unknowns()];
    let nt = fit_terms.min(spec.terms);
    let kinv = -1.0 / spec.kappa as f64;
    let smax = samples.iter().map(|p| p.d.powf(kinv)).fold(0.0, f64::max);
    for (i, c) in spec.coords.iter().enumerate() {
        let a = DMatrix::from_fn(samples.len(), nt, |r, j| {
            (samples[r].d.powf(kinv) / smax).powi((c.lead as usize + j) as i32)
        });
        let b = DVector::from_iterator(samples.len(), samples.iter().map(|p| p.xi[i] - c.constant));
        let (x, _) = lstsq(&a, &b);
        for j in 0..nt {
            u[sys.offsets[i] + j] = x[j] / smax.powi((c.lead as usize + j) as i32);
        }
    }
    u
}

static EXPANSIONS: OnceLock<Mutex<HashMap<FamilyId, FPSExpansion>>> = OnceLock::new();

/// Order-by-order expansion of a cataloged family (computed once, cached).
///
/// Unknowns start from a fit to a numerical path over `d ∈ [10³, 10⁵]`.
pub fn series_expansion(f: FamilyId) -> Result<FPSExpansion> {
    let cache = EXPANSIONS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(e) = cache.lock().unwrap().get(&f) {
        return Ok(e.clone());
    }
    let spec = family_spec(f);
    let path = bootstrap_path(&spec)?;
    let sys = SeriesSystem::new(spec);
    let sol = sys.solve_fixed(&fit_unknowns(&sys, &path, 4));
    if !(sol.residual < 1e-9) {
        return Err(Error::NoConvergence { iterations: 0, residual: sol.residual, history: vec![] });
    }
    let e = sys.expansion(&sol);
    cache.lock().unwrap().insert(f, e.clone());
    Ok(e)
}

// ---------------------------------------------------------------------------
// Direct coefficient systems
// ---------------------------------------------------------------------------

/// Dense Newton with backtracking for the small coefficient systems.
fn newton_small<F>(f: F, x0: &[f64], tol: f64, max_iter: usize) -> Option<(Vec<f64>, f64, usize)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let mut r = f(&x);
    for it in 0..max_iter {
        let res = norm(&r);
        if !res.is_finite() {
            return None;
        }
        if res < tol {
            return Some((x, res, it));
        }
        let mut j = DMatrix::zeros(r.len(), n);
        let mut xp = x.clone();
        for c in 0..n {
            let h = 1e-7 * (1.0 + x[c].abs());
            xp[c] = x[c] + h;
            let rp = f(&xp);
            xp[c] = x[c] - h;
            let rm = f(&xp);
            xp[c] = x[c];
            for row in 0..r.len() {
                j[(row, c)] = (rp[row] - rm[row]) / (2.0 * h);
            }
        }
        let (step, _) = lstsq(&j, &DVector::from_iterator(r.len(), r.iter().map(|v| -v)));
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            let rt = f(&trial);
            if norm(&rt) < res || t < 1e-4 {
                x = trial;
                r = rt;
                break;
            }
            t *= 0.5;
        }
    }
    let res = norm(&r);
    (res < tol).then_some((x, res, max_iter))
}

/// Limit angles of the type II `k = d+2` coefficient system.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LimitAngles {
    pub l23: f64,
    pub l24: f64,
    pub l34: f64,
    pub r2: f64,
    pub r3: f64,
}

impl LimitAngles {
    pub fn new(g2: f64, h1: f64, p2: f64, q1: f64) -> Self {
        let r2 = g2.hypot(h1);
        let r3 = p2.hypot(q1);
        let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
        LimitAngles { l23: asin((h1 * p2 - g2 * q1) / (r2 * r3)), l24: asin(g2 / r2), l34: asin(p2 / r3), r2, r3 }
    }
}

pub const TYPE2_KD2_NAMES: [&str; 9] = ["c3", "e4", "f3", "g2", "h1", "p2", "q1", "a2", "b1"];

/// The nine equations for `(c₃, e₄, f₃, g₂, h₁, p₂, q₁, a₂, b₁)`.
///
/// Equations 6–7 carry `Λ⁰₃₄` on the `a₂, b₁` terms, mirroring 4–5.
pub fn type2_kd2_residual(x: &[f64]) -> Vec<f64> {
    let [c3, e4, f3, g2, h1, p2, q1, a2, b1] = <[f64; 9]>::try_from(x).expect("nine unknowns");
    let LimitAngles { l23, l24, l34, r2, r3 } = LimitAngles::new(g2, h1, p2, q1);
    let t2 = (c3 * r2 * r2 - 2.0 * g2 * h1) / r2.powi(3) + (-b1 * g2 + h1 * a2 - g2 * q1 + h1 * p2) / (r2 * r2);
    let t3 = (c3 * r3 * r3 - 2.0 * p2 * q1) / r3.powi(3) + (-b1 * p2 + q1 * a2 + p2 * h1 - q1 * g2) / (r3 * r3);
    vec![
        c3 - b1 + r2 + r3,
        e4 + g2 + p2 + a2,
        f3 + h1 + q1 + b1,
        g2 * t2 - (l23 * p2 + l24 * a2 + FRAC_PI_2 * e4 - 2.0 * h1 / r2),
        h1 * t2 - (l23 * q1 + l24 * b1 + FRAC_PI_2 * f3 - 2.0 * g2 / r2 + a2),
        p2 * t3 - (l23 * g2 + l34 * a2 + FRAC_PI_2 * e4 - 2.0 * q1 / r3),
        q1 * t3 - (l23 * h1 + l34 * b1 + FRAC_PI_2 * f3 - 2.0 * p2 / r3 + a2),
        2.0 - FRAC_PI_2 * e4 - ((PI - l24) * g2 + (PI - l34) * p2 + PI * a2),
        c3 - FRAC_PI_2 * f3 + g2 + p2 - ((PI - l24) * h1 + (PI - l34) * q1 + PI * b1),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Type2Kd2 {
    /// `(c₃, e₄, f₃, g₂, h₁, p₂, q₁, a₂, b₁)`.
    pub values: [f64; 9],
    pub residual: f64,
    pub iterations: usize,
    /// Which initialization converged.
    pub initialization: String,
}

impl Type2Kd2 {
    pub fn get(&self, name: &str) -> Option<f64> {
        TYPE2_KD2_NAMES.iter().position(|n| *n == name).map(|i| self.values[i])
    }
    pub fn angles(&self) -> LimitAngles {
        let v = &self.values;
        LimitAngles::new(v[3], v[4], v[5], v[6])
    }
    /// Angle-ordering condition `h₁p₂ > g₂q₁`.
    pub fn ordered(&self) -> bool {
        let v = &self.values;
        v[4] * v[5] > v[3] * v[6]
    }
}

/// Coefficients read off a solved point at `d` by scaling each coordinate
/// with its leading power.
fn coarse_coefficients(f: FamilyId, d: f64) -> Option<Vec<f64>> {
    let spec = family_spec(f);
    let seed = evaluate_fps(&crude_expansion(&spec), BOOTSTRAP_HI).ok()?;
    let sh = f.shape();
    let policy = crate::solver::StepPolicy { samples_per_decade: 10.0, ..Default::default() };
    let path = crate::solver::continue_from(sh, BOOTSTRAP_HI, &seed, d, &policy).ok()?;
    let xi = &path.last()?.xi;
    let s = d.powf(-1.0 / spec.kappa as f64);
    Some(spec.coords.iter().zip(xi).map(|(c, x)| (x - c.constant) / s.powi(c.lead as i32)).collect())
}

/// Scaled coordinates at `d` → the nine unknowns (ξ₃ carries `2 s² + f₃ s³`).
fn kd2_from_coarse(c: &[f64], d: f64) -> Vec<f64> {
    let s = d.powf(-0.5);
    vec![c[0], c[1], (c[2] - 2.0) / s, c[3], c[4], c[5], c[6], c[7], c[8]]
}

/// Solve the type II `k = d+2` nine-equation system.
///
/// Newton starts from coefficients read off the numerical solution at
/// `d = 10⁴`, falling back to a small multistart around the catalog values.
pub fn type2_kd2_coeffs() -> Result<Type2Kd2> {
    let fam = FamilyId::new(FamilyType::II, 1, 2)?;
    let mut starts: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(c) = coarse_coefficients(fam, 1e4) {
        starts.push(("numerical point at d = 1e4".into(), kd2_from_coarse(&c, 1e4)));
    }
    let spec = family_spec(fam);
    let base: Vec<f64> = {
        let g: Vec<f64> = spec.coords.iter().map(|c| c.guess).collect();
        vec![g[0], g[1], 0.3, g[3], g[4], g[5], g[6], g[7], g[8]]
    };
    for (k, scale) in [1.0, 0.8, 1.2, 0.6, 1.5].iter().enumerate() {
        starts.push((format!("multistart {k} (catalog × {scale})"), base.iter().map(|v| v * scale).collect()));
    }
    let mut trials = Vec::new();
    for (label, x0) in starts {
        match newton_small(type2_kd2_residual, &x0, 1e-14, 60) {
            Some((x, res, it)) => {
                let out = Type2Kd2 { values: x.try_into().unwrap(), residual: res, iterations: it, initialization: label.clone() };
                if out.ordered() {
                    return Ok(out);
                }
                trials.push(format!("{label}: converged to a root violating h1·p2 > g2·q1"));
            }
            None => trials.push(format!("{label}: Newton diverged")),
        }
    }
    Err(Error::CoefficientSystem { system: "type II k=d+2".into(), trials })
}

/// Pieces `A, B, P, Q` of the scalar equation `p(ϑ) = A Q − B P`.
pub fn theta_parts(t: f64) -> (f64, f64, f64, f64) {
    let (s, c) = t.sin_cos();
    let k = 2.0 / (2.0 - PI);
    let a = k * ((2.0 * t).sin() / 2.0 * (1.0 - s) * (t - FRAC_PI_2) + s * (1.0 - s).powi(2))
        + s * (2.0 * t - 2.0 * t * t / PI - 1.0 - (2.0 * t).sin() / 2.0 * (2.0 * t / PI - 1.0));
    let b = k * (-c * (FRAC_PI_2 - t).powi(2) + (FRAC_PI_2 - t) * (1.0 - s) * (2.0 - s * s) - c * (1.0 - s).powi(2))
        + (c * (1.0 - FRAC_PI_2) - s.powi(3) * (2.0 * t / PI - 1.0));
    let p = 2.0 - 4.0 * t / PI - 2.0 * (2.0 * t).sin() / PI - 2.0 * c.powi(3);
    let q = 2.0 * s.powi(3) - 4.0 / PI * s * s;
    (a, b, p, q)
}

pub fn theta_poly(t: f64) -> f64 {
    let (a, b, p, q) = theta_parts(t);
    a * q - b * p
}

/// `p′(ϑ)` by a fourth-order central difference.
pub fn theta_poly_derivative(t: f64) -> f64 {
    let h = 1e-4;
    (-theta_poly(t + 2.0 * h) + 8.0 * theta_poly(t + h) - 8.0 * theta_poly(t - h) + theta_poly(t - 2.0 * h)) / (12.0 * h)
}

pub const TYPE2_KD1_NAMES: [&str; 7] = ["c3", "e4", "f3", "g2", "h1", "a2", "b1"];

/// The seven equations for `(c₃, e₄, f₃, g₂, h₁, a₂, b₁)` with `ϑ = Λ⁰₂₃`.
pub fn type2_kd1_residual(x: &[f64]) -> Vec<f64> {
    let [c3, e4, f3, g2, h1, a2, b1] = <[f64; 7]>::try_from(x).expect("seven unknowns");
    let r2 = g2.hypot(h1);
    let th = (g2 / r2).clamp(-1.0, 1.0).asin();
    let t = (c3 * r2 * r2 - 2.0 * g2 * h1) / r2.powi(3) + (-b1 * g2 + h1 * a2) / (r2 * r2);
    vec![
        c3 - b1 + r2,
        e4 + g2 + a2,
        f3 + h1 + b1,
        g2 * t - (th * a2 + FRAC_PI_2 * e4 - 2.0 * h1 / r2),
        h1 * t - (FRAC_PI_2 * f3 - 2.0 * g2 / r2 + th * b1 + a2),
        FRAC_PI_2 * e4 + 2.0 + th * g2,
        c3 + FRAC_PI_2 * f3 + g2 + th * h1,
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Type2Kd1 {
    pub theta: f64,
    pub p_value: f64,
    pub p_derivative: f64,
    /// `(c₃, e₄, f₃, g₂, h₁, a₂, b₁)`.
    pub values: [f64; 7],
    /// Largest residual of the seven-equation system at `values`.
    pub residual: f64,
    /// Newton left `(0, π/2)` and bisection was used.
    pub bracketed: bool,
}

impl Type2Kd1 {
    pub fn get(&self, name: &str) -> Option<f64> {
        TYPE2_KD1_NAMES.iter().position(|n| *n == name).map(|i| self.values[i])
    }
}

/// Back-substitution from `ϑ`: `R₂ = −P/A`, then the linear equations.
pub fn type2_kd1_from_theta(t: f64) -> [f64; 7] {
    let (a, _, p, _) = theta_parts(t);
    let r2 = -p / a;
    let g2 = r2 * t.sin();
    let h1 = -r2 * t.cos();
    let e4 = -(2.0 + t * g2) / FRAC_PI_2;
    let a2 = -e4 - g2;
    let b1 = (r2 + FRAC_PI_2 * h1 - g2 - t * h1) / (1.0 - FRAC_PI_2);
    let c3 = b1 - r2;
    let f3 = -h1 - b1;
    [c3, e4, f3, g2, h1, a2, b1]
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < 1e-17 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solve `p(ϑ) = 0` on `(0, π/2)` and back-substitute the seven coefficients.
///
/// Newton starts from `ϑ` read off the numerical solution at `d = 10⁴`;
/// if it leaves the interval, the root is bracketed on a grid and bisected.
pub fn type2_kd1_coeffs() -> Result<Type2Kd1> {
    let fam = FamilyId::new(FamilyType::II, 1, 1)?;
    let t0 = coarse_coefficients(fam, 1e4).map(|c| (c[3] / c[3].hypot(c[4])).asin()).unwrap_or(0.6);
    let mut t = t0;
    let mut ok = false;
    for _ in 0..50 {
        let step = theta_poly(t) / theta_poly_derivative(t);
        t -= step;
        if !(t > 0.0 && t < FRAC_PI_2) {
            break;
        }
        if step.abs() < 1e-16 {
            ok = true;
            break;
        }
    }
    let ok = ok || (t > 0.0 && t < FRAC_PI_2 && theta_poly(t).abs() < 1e-15);
    let bracketed = !ok;
    if bracketed {
        let grid: Vec<f64> = (1..400).map(|i| FRAC_PI_2 * i as f64 / 400.0).collect();
        let w = grid
            .windows(2)
            .find(|w| theta_poly(w[0]).signum() != theta_poly(w[1]).signum())
            .ok_or_else(|| Error::CoefficientSystem { system: "type II k=d+1".into(), trials: vec!["no sign change of p on (0, π/2)".into()] })?;
        t = bisect(theta_poly, w[0], w[1]);
    }
    let values = type2_kd1_from_theta(t);
    let residual = type2_kd1_residual(&values).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Type2Kd1 { theta: t, p_value: theta_poly(t), p_derivative: theta_poly_derivative(t), values, residual, bracketed })
}

/// Closed-form type I `k = d+1` coefficients (coordinate letters
/// `c, e, f, g, h, p, q` for `ξ₁..ξ₇`; the index is the power of `d^{-1/4}`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Type1Kd1 {
    pub c4: f64,
    pub c6: f64,
    pub e4: f64,
    pub e7: f64,
    pub f4: f64,
    pub f5: f64,
    pub g3: f64,
    pub h1: f64,
    pub p3: f64,
    pub q1: f64,
    /// Largest scaled order-residual of `F_d` with these values pinned.
    pub order_residual: f64,
}

impl Type1Kd1 {
    pub fn closed_forms() -> Self {
        let r = (PI - 2.0).sqrt();
        let h = (6.0 + 3.0 * PI) / (8.0 * PI * r);
        Type1Kd1 {
            c4: 2.0,
            c6: FRAC_PI_2,
            e4: 2.0,
            e7: -r,
            f4: 1.0,
            f5: -2.0 * h,
            g3: r / 2.0,
            h1: h,
            p3: r / 2.0,
            q1: h,
            order_residual: f64::NAN,
        }
    }

    /// `(coordinate, order, value)` triples.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        vec![
            (0, 4, self.c4),
            (0, 6, self.c6),
            (1, 4, self.e4),
            (1, 7, self.e7),
            (2, 4, self.f4),
            (2, 5, self.f5),
            (3, 3, self.g3),
            (4, 1, self.h1),
            (5, 3, self.p3),
            (6, 1, self.q1),
        ]
    }
}

/// Pin `(coordinate, order, value)` triples in a family's series system,
/// solve for the rest and return the largest scaled residual.
pub fn order_residual(f: FamilyId, pins: &[(usize, usize, f64)]) -> Result<f64> {
    let sys = SeriesSystem::new(family_spec(f));
    let start = sys.unknowns_from(&series_expansion(f)?);
    let mut pinned = Vec::new();
    for &(c, o, v) in pins {
        let i = sys
            .unknown_index(c, o)
            .ok_or_else(|| Error::Domain(format!("coefficient ({c}, {o}) is not an unknown of {f}")))?;
        pinned.push((i, v));
    }
    Ok(sys.solve_pinned(&start, &pinned).residual)
}

/// Closed forms, checked against the order-by-order residuals of `F_d`.
pub fn type1_kd1_coeffs() -> Result<Type1Kd1> {
    let mut out = Type1Kd1::closed_forms();
    out.order_residual = order_residual(FamilyId::new(FamilyType::I, 1, 1)?, &out.entries())?;
    Ok(out)
}

pub const TYPE1_KD2_NAMES: [&str; 9] = ["c6", "e7", "f5", "g3", "h1", "p3", "q1", "a4", "b1"];
const TYPE1_KD2_SLOTS: [(usize, usize); 9] = [(0, 6), (1, 7), (2, 5), (3, 3), (4, 1), (5, 3), (6, 1), (7, 4), (8, 2)];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Type1Kd2 {
    /// `(c₆, e₇, f₅, g₃, h₁, p₃, q₁, a₄, b₁)`.
    pub values: [f64; 9],
    pub uncertainty: [f64; 9],
    /// `(c₄, e₄, f₄)`, expected `(2, 2, 1)`.
    pub fixed: [f64; 3],
    pub residual: f64,
}

impl Type1Kd2 {
    pub fn get(&self, name: &str) -> Option<f64> {
        TYPE1_KD2_NAMES.iter().position(|n| *n == name).map(|i| self.values[i])
    }
}

/// Type I `k = d+2` coefficients from the order-by-order solve.
pub fn type1_kd2_coeffs() -> Result<Type1Kd2> {
    let f = FamilyId::new(FamilyType::I, 1, 2)?;
    let exp = series_expansion(f)?;
    let err = exp.stderr.clone().unwrap_or_default();
    let mut values = [0.0; 9];
    let mut uncertainty = [f64::INFINITY; 9];
    for (k, &(c, o)) in TYPE1_KD2_SLOTS.iter().enumerate() {
        values[k] = exp.coeff(c, o);
        if let Some(e) = err.get(c).and_then(|r| r.get(o)) {
            uncertainty[k] = *e;
        }
    }
    let sys = SeriesSystem::new(family_spec(f));
    let u = sys.unknowns_from(&exp);
    let residual = sys.residual(&u, &sys.equations(&u)).amax();
    Ok(Type1Kd2 { values, uncertainty, fixed: [exp.coeff(0, 4), exp.coeff(1, 4), exp.coeff(2, 4)], residual })
}

// ---------------------------------------------------------------------------
// Path fits
// ---------------------------------------------------------------------------

/// Vandermonde conditioning above which the fit order is reduced.
const FIT_COND_MAX: f64 = 1e10;

fn log_span(samples: &[PathSample]) -> f64 {
    let lo = samples.iter().map(|p| p.d).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|p| p.d).fold(0.0, f64::max);
    (hi / lo).log10()
}

/// Fit one coordinate against the given orders of `s`; reduces the number
/// of orders (dropping the highest) until the design is well conditioned.
fn fit_orders(s: &[f64], y: &[f64], orders: &[usize], warnings: &mut Vec<String>, label: &str) -> (Vec<f64>, Vec<f64>, usize) {
    let mut n = orders.len();
    loop {
        let a = DMatrix::from_fn(s.len(), n, |r, j| s[r].powi(orders[j] as i32));
        let b = DVector::from_column_slice(y);
        let f = lsq_fit(&a, &b);
        if f.cond <= FIT_COND_MAX || n == 1 {
            if n < orders.len() {
                warnings.push(format!("{label}: order reduced to {} (condition {:.1e})", orders[n - 1], f.cond));
            }
            return (f.x.iter().copied().collect(), f.stderr.iter().copied().collect(), n);
        }
        n -= 1;
    }
}

/// Least-squares fit of every coordinate in powers `d^{−j/κ}`, `j = 0..=J`.
pub fn fit_coeffs_from_path(path: &ContinuationPath, kappa: u32, order: usize) -> Result<FPSExpansion> {
    let samples = &path.samples;
    if samples.is_empty() || log_span(samples) < 2.0 - 1e-9 {
        return Err(Error::Domain("path must span at least two decades of d".into()));
    }
    if samples.len() <= order + 1 {
        return Err(Error::Domain(format!("{} samples cannot fit {} coefficients", samples.len(), order + 1)));
    }
    let s: Vec<f64> = samples.iter().map(|p| p.d.powf(-1.0 / kappa as f64)).collect();
    let orders: Vec<usize> = (0..=order).collect();
    let dim = samples[0].xi.len();
    let mut warnings = Vec::new();
    let mut coeffs = Vec::with_capacity(dim);
    let mut stderr = Vec::with_capacity(dim);
    for i in 0..dim {
        let y: Vec<f64> = samples.iter().map(|p| p.xi[i]).collect();
        let (x, e, n) = fit_orders(&s, &y, &orders, &mut warnings, &format!("coordinate {i}"));
        let mut row = vec![0.0; order + 1];
        let mut err = vec![f64::INFINITY; order + 1];
        row[..n].copy_from_slice(&x);
        err[..n].copy_from_slice(&e);
        coeffs.push(row);
        stderr.push(err);
    }
    Ok(FPSExpansion {
        family: path.family,
        kappa,
        determined: vec![vec![true; order + 1]; dim],
        coeffs,
        stderr: Some(stderr),
        order,
        warnings,
    })
}

/// Fit using the catalog structure: constants fixed, orders
/// `lead..lead+terms` free per coordinate.
pub fn fit_structured(path: &ContinuationPath, terms: usize) -> Result<FPSExpansion> {
    let spec = family_spec(path.family);
    let samples = &path.samples;
    if samples.is_empty() || log_span(samples) < 2.0 - 1e-9 {
        return Err(Error::Domain("path must span at least two decades of d".into()));
    }
    let s: Vec<f64> = samples.iter().map(|p| p.d.powf(-1.0 / spec.kappa as f64)).collect();
    let order = spec.coords.iter().map(|c| c.lead as usize).max().unwrap() + terms - 1;
    let mut warnings = Vec::new();
    let mut coeffs = Vec::new();
    let mut stderr = Vec::new();
    let mut determined = Vec::new();
    for (i, c) in spec.coords.iter().enumerate() {
        let y: Vec<f64> = samples.iter().map(|p| p.xi[i] - c.constant).collect();
        let orders: Vec<usize> = (c.lead as usize..c.lead as usize + terms).collect();
        let (x, e, n) = fit_orders(&s, &y, &orders, &mut warnings, &format!("coordinate {i}"));
        let mut row = vec![0.0; order + 1];
        let mut err = vec![0.0; order + 1];
        let mut det = vec![true; order + 1];
        row[0] = c.constant;
        for (j, o) in orders.iter().enumerate() {
            if j < n {
                row[*o] = x[j];
                err[*o] = e[j];
            } else {
                err[*o] = f64::INFINITY;
                det[*o] = false;
            }
        }
        for o in (c.lead as usize + terms)..=order {
            det[o] = false;
            err[o] = f64::INFINITY;
        }
        coeffs.push(row);
        stderr.push(err);
        determined.push(det);
    }
    Ok(FPSExpansion { family: path.family, kappa: spec.kappa, coeffs, determined, stderr: Some(stderr), order, warnings })
}

/// Root-mean-square residual of an unconstrained fit with `κ` and `J`.
pub fn fit_residual(path: &ContinuationPath, kappa: u32, order: usize) -> Result<f64> {
    let exp = fit_coeffs_from_path(path, kappa, order)?;
    let mut acc = 0.0;
    let mut n = 0;
    for p in &path.samples {
        let v = evaluate_fps(&exp, p.d)?;
        for (a, b) in v.iter().zip(&p.xi) {
            acc += (a - b).powi(2);
            n += 1;
        }
    }
    Ok((acc / n as f64).sqrt())
}

/// Base detection: the `κ ∈ {2, 4}` whose fit (same number of
/// coefficients) has the smaller residual, with both residuals.
pub fn detect_kappa(path: &ContinuationPath, order: usize) -> Result<(u32, f64, f64)> {
    let r2 = fit_residual(path, 2, order)?;
    let r4 = fit_residual(path, 4, order)?;
    Ok((if r4 < r2 { 4 } else { 2 }, r2, r4))
}

// ---------------------------------------------------------------------------
// Loss asymptotics
// ---------------------------------------------------------------------------

/// Fitted large-`d` behaviour of the loss along a family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LossAsymptotics {
    pub family: FamilyId,
    /// `d·L` for type II (`α`), `L` for type I.
    pub scaled_by_d: bool,
    /// Fitted constant (α or the limit of `L`).
    pub constant: f64,
    /// Coefficients of `d^{−j/κ}`, `j = 1..`, after the constant.
    pub coeffs: Vec<f64>,
    pub stderr: Vec<f64>,
    pub rms: f64,
    /// Log-log slope of `|y − constant|` over the path.
    pub decay_slope: f64,
    pub warnings: Vec<String>,
}

/// Fit `d·L` (type II) or `L` (type I) in powers of `d^{−1/κ}`.
pub fn loss_asymptotics(family: FamilyId, path: &ContinuationPath, order: usize) -> Result<LossAsymptotics> {
    let spec = family_spec(family);
    let sh = family.shape();
    let scaled = family.family_type == FamilyType::II;
    let mut s = Vec::new();
    let mut y = Vec::new();
    for p in &path.samples {
        let l = loss_on(sh, p.d, &p.xi)?;
        s.push(p.d.powf(-1.0 / spec.kappa as f64));
        y.push(if scaled { p.d * l } else { l });
    }
    let orders: Vec<usize> = (0..=order).collect();
    let mut warnings = Vec::new();
    let (x, e, n) = fit_orders(&s, &y, &orders, &mut warnings, "loss");
    let mut coeffs = x[1..].to_vec();
    coeffs.resize(order, 0.0);
    let mut stderr = e[1..].to_vec();
    stderr.resize(order, f64::INFINITY);
    let rms = {
        let mut acc = 0.0;
        for (si, yi) in s.iter().zip(&y) {
            let v: f64 = x.iter().enumerate().map(|(j, c)| c * si.powi(j as i32)).sum();
            acc += (v - yi).powi(2);
        }
        (acc / s.len() as f64).sqrt()
    };
    let decay_slope = log_log_slope(
        &path.samples.iter().map(|p| p.d).collect::<Vec<_>>(),
        &y.iter().map(|v| (v - x[0]).abs()).collect::<Vec<_>>(),
    );
    if n <= 1 {
        warnings.push("loss fit reduced to a constant".into());
    }
    Ok(LossAsymptotics { family, scaled_by_d: scaled, constant: x[0], coeffs, stderr, rms, decay_slope, warnings })
}

/// Least-squares slope of `log y` against `log x` (non-positive `y` skipped).
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Laurent coefficients of `L(ξ(s))` for an expansion, treating the
/// truncated series as exact. Entry `j` is the coefficient of `d^{−j/κ}`;
/// entries beyond the expansion's precision are `None`.
pub fn loss_series(exp: &FPSExpansion, orders: usize) -> Vec<Option<f64>> {
    let sh = exp.family.shape();
    let xi: Vec<Series> = exp.coeffs.iter().map(|row| exact_series(row)).collect();
    let l = loss_generic(sh, &band_size(exp.kappa, exp.family.p), &xi);
    (0..orders as i32).map(|o| l.coef(o)).collect()
}

/// A polynomial in `s` as a series known to all orders.
fn exact_series(row: &[f64]) -> Series {
    Series::from_coeffs(0, row, i32::MAX / 8)
}

// ---------------------------------------------------------------------------
// x/y eigenvalues from gradient coefficients
// ---------------------------------------------------------------------------

/// `λ_x, λ_y` expressed through gradient coefficients of a `κ = 4`,
/// `p = 1, k = d+1` expansion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XyEigenvalues {
    /// Coefficients of `(d⁰, d^{1/4}, d^{1/2})` in `λ_x`.
    pub lambda_x: [f64; 3],
    pub lambda_y: [f64; 3],
    /// `([d⁰]F₁, [d^{1/4}]F₁, [d^{1/2}]F₁, [d⁰]F₂)`.
    pub gradient_coeffs: [f64; 4],
}

/// `λ_{x,y} = ¼ ∓ 1/2π + [d⁰]F₁ − c₂[d^{1/2}]F₁ − [d⁰]F₂
///           + [d^{1/4}]F₁ d^{1/4} + [d^{1/2}]F₁ d^{1/2} + O(d^{−1/4})`,
/// with `F₁, F₂` the first two components of the reduced field evaluated on
/// the truncated expansion.
pub fn xy_eigenvalues_from_fps(exp: &FPSExpansion) -> Result<XyEigenvalues> {
    if exp.kappa != 4 || exp.family.p != 1 || exp.family.m != 1 {
        return Err(Error::Domain("x/y formula needs a κ = 4 expansion with p = 1, k = d+1".into()));
    }
    let c = |i: usize, j: usize| exp.coeff(i, j);
    let mut bad = vec![c(0, 1).abs()];
    for j in 0..4 {
        bad.push(c(1, j).abs());
        bad.push(c(2, j).abs());
    }
    if bad.iter().any(|v| *v > 1e-3) || (c(0, 0).abs() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(
            "expansion violates the vanishing structure c₀ = ±1, c₁ = e₀..e₃ = f₀..f₃ = 0".into(),
        ));
    }
    let xi: Vec<Series> = exp.coeffs.iter().map(|row| exact_series(row)).collect();
    let f = field_generic(exp.family.shape(), &band_size(4, 1), &xi);
    let g = |i: usize, o: i32| f[i].coef(o).unwrap_or(0.0);
    let (f10, f1q, f1h, f20) = (g(0, 0), g(0, -1), g(0, -2), g(1, 0));
    let base = f10 - c(0, 2) * f1h - f20;
    let x0 = 0.25 - 1.0 / (2.0 * PI) + base;
    let y0 = 0.25 + 1.0 / (2.0 * PI) + base;
    Ok(XyEigenvalues { lambda_x: [x0, f1q, f1h], lambda_y: [y0, f1q, f1h], gradient_coeffs: [f10, f1q, f1h, f20] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(t: FamilyType, p: usize, m: usize) -> FamilyId {
        FamilyId::new(t, p, m).unwrap()
    }

    #[test]
    fn evaluate_zero_and_limit() {
        let f = fam(FamilyType::II, 1, 0);
        let mut e = crude_expansion(&family_spec(f));
        for row in e.coeffs.iter_mut() {
            row.iter_mut().for_each(|c| *c = 0.0);
        }
        assert!(evaluate_fps(&e, 10.0).unwrap().iter().all(|v| *v == 0.0));
        let e = crude_expansion(&family_spec(f));
        let lim = evaluate_fps(&e, 1e300).unwrap();
        for (row, v) in e.coeffs.iter().zip(lim) {
            assert!((row[0] - v).abs() < 1e-12);
        }
        assert!(evaluate_fps(&e, -1.0).is_err());
    }

    #[test]
    fn catalog_constants_match_type() {
        for f in FamilyId::all() {
            let spec = family_spec(f);
            let want = if f.family_type == FamilyType::I { -1.0 } else { 1.0 };
            assert_eq!(spec.coords[0].constant, want);
            assert_eq!(spec.coords.len(), f.shape().dim());
        }
    }

    #[test]
    fn printed_kd2_values_satisfy_system() {
        let x = [
            -0.5748287640041448964,
            -1.6165352425422284608,
            0.2969965493462016520,
            0.7877659431796313120,
            -1.1161365378487412475,
            0.1562694812799615923,
            -0.4248280138040598900,
            0.6724998180826355564,
            1.2439680023065994855,
        ];
        let r = type2_kd2_residual(&x);
        assert!(r.iter().all(|v| v.abs() < 1e-14), "{r:?}");
    }

    #[test]
    fn theta_root_back_substitution() {
        let t = 0.58416413506022510436;
        assert!(theta_poly(t).abs() < 1e-15);
        let v = type2_kd1_from_theta(t);
        assert!((v[3] - 0.91787878976036618322).abs() < 1e-13);
        assert!((v[4] + 1.38833511087258399162).abs() < 1e-13);
        assert!(type2_kd1_residual(&v).iter().all(|r| r.abs() < 1e-13));
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn log_log_slope_of_power() {
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        assert!((log_log_slope(&x, &y) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_index_layout() {
        let sys = SeriesSystem::new(family_spec(fam(FamilyType::I, 1, 1)));
        let t = sys.spec.terms;
        assert_eq!(sys.unknown_index(0, 4), Some(0));
        assert_eq!(sys.unknown_index(0, 6), Some(2));
        assert_eq!(sys.unknown_index(4, 1), Some(4 * t));
        assert_eq!(sys.unknown_index(0, 3), None);
    }
}
