//! Newton solves of `F_d(ξ) = 0`, continuation in real `d`, and seeds.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyId, FamilyType};
use crate::fps;
use crate::linalg::{cond1, sym_eigvals};
use crate::symmetry::{field_on, jacobian_on, IsotropyDescriptor, ReducedPoint, Shape};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewtonReport {
    pub point: ReducedPoint,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Residual tolerance that the `f64` field can honour at size `d`.
///
/// Field components are sums of `O(d)` terms of size one, so the attainable
/// floor grows linearly with `d`.
pub fn default_tol(d: f64) -> f64 {
    1e-12 * (d / 100.0).max(1.0)
}

/// Row/column equilibration before the condition estimate, so that the
/// natural `d`-scaling of the coordinates does not read as singularity.
fn scaled_condition(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows();
    let mut a = j.clone();
    for r in 0..n {
        let s = a.row(r).amax();
        if s > 0.0 {
            a.row_mut(r).scale_mut(1.0 / s);
        }
    }
    for c in 0..n {
        let s = a.column(c).amax();
        if s > 0.0 {
            a.column_mut(c).scale_mut(1.0 / s);
        }
    }
    cond1(&a)
}

/// Newton with backtracking on an arbitrary shape at real `d`.
pub fn newton_on(sh: Shape, d: f64, xi0: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let mut xi = xi0.to_vec();
    let mut f = field_on(sh, d, &xi)?;
    let mut res = f.amax();
    let mut history = vec![res];
    let mut it = 0;
    while res >= tol {
        if it == max_iter {
            return Err(Error::NoConvergence { iterations: it, residual: res, history });
        }
        it += 1;
        let j = jacobian_on(sh, d, &xi)?;
        let cond = scaled_condition(&j);
        if !(cond < 1e12) {
            return Err(Error::Singular { condition: cond });
        }
        let step = j.lu().solve(&(-&f)).ok_or(Error::Singular { condition: f64::INFINITY })?;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-4 {
            let trial: Vec<f64> = xi.iter().zip(step.iter()).map(|(x, s)| x + t * s).collect();
            if let Ok(ft) = field_on(sh, d, &trial) {
                let rt = ft.amax();
                if rt < (1.0 - 1e-4 * t) * res || rt < tol {
                    xi = trial;
                    f = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        history.push(res);
        if !accepted {
            return Err(Error::NoConvergence { iterations: it, residual: res, history });
        }
    }
    Ok((xi, it, history))
}

/// Newton solve of `F_d(ξ) = 0` from `ξ₀`.
pub fn newton_solve(descriptor: IsotropyDescriptor, xi0: &[f64], tol: f64, max_iter: usize) -> Result<NewtonReport> {
    let (xi, iterations, history) = newton_on(descriptor.shape(), descriptor.d, xi0, tol, max_iter)?;
    let residual = *history.last().unwrap();
    Ok(NewtonReport { point: ReducedPoint::new(descriptor, xi)?, iterations, residual, history })
}

/// Smallest `|λ|` of the reduced Jacobian (its eigenvalues are real: it is
/// similar to a symmetric matrix through the Frobenius Gram weights).
pub fn jacobian_min_abs_eig(sh: Shape, d: f64, xi: &[f64]) -> Result<f64> {
    let ev = jacobian_eigenvalues(sh, d, xi)?;
    Ok(ev.iter().fold(f64::INFINITY, |m, x| m.min(x.abs())))
}

/// Eigenvalues of the reduced Jacobian, ascending.
pub fn jacobian_eigenvalues(sh: Shape, d: f64, xi: &[f64]) -> Result<Vec<f64>> {
    let j = jacobian_on(sh, d, xi)?;
    let g: Vec<f64> = sh.gram_weights(d - sh.r as f64).iter().map(|w| w.sqrt()).collect();
    let n = j.nrows();
    let s = DMatrix::from_fn(n, n, |r, c| g[r] * j[(r, c)] / g[c]);
    Ok(sym_eigvals(&s))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StepPolicy {
    pub samples_per_decade: f64,
    pub max_halvings: usize,
    /// Residual tolerance; `None` uses [`default_tol`].
    pub tol: Option<f64>,
    /// Where continuation starts from the series seed.
    pub anchor: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy { samples_per_decade: 40.0, max_halvings: 10, tol: None, anchor: 1e3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSample {
    pub d: f64,
    pub xi: Vec<f64>,
    pub jacobian_min_abs_eig: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationPath {
    pub family: FamilyId,
    pub samples: Vec<PathSample>,
}

impl ContinuationPath {
    pub fn ds(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.d).collect()
    }

    /// Sample closest to `d` in log scale.
    pub fn nearest(&self, d: f64) -> &PathSample {
        self.samples
            .iter()
            .min_by(|a, b| (a.d / d).ln().abs().total_cmp(&(b.d / d).ln().abs()))
            .expect("path is nonempty")
    }
}

/// Largest accepted distance between predictor and corrected point; larger
/// corrections mean Newton left the branch (e.g. for a zero-loss point).
pub const CORRECTOR_MAX: f64 = 0.05;

/// Continue a solved point from `d0` to `d_end` (either direction). Steps
/// whose corrector lands far from the predictor are halved.
pub fn continue_from(sh: Shape, d0: f64, xi0: &[f64], d_end: f64, policy: &StepPolicy) -> Result<Vec<PathSample>> {
    let tol_at = |d: f64| policy.tol.unwrap_or_else(|| default_tol(d));
    let (xi, it, hist) = newton_on(sh, d0, xi0, tol_at(d0), 50)?;
    let mut samples = vec![PathSample {
        d: d0,
        jacobian_min_abs_eig: jacobian_min_abs_eig(sh, d0, &xi)?,
        xi,
        iterations: it,
        residual: *hist.last().unwrap(),
    }];
    let total = (d_end / d0).ln();
    if total.abs() < 1e-14 {
        return Ok(samples);
    }
    let nominal = std::f64::consts::LN_10 / policy.samples_per_decade * total.signum();
    let mut t = 0.0;
    let mut h = nominal;
    let mut halvings = 0;
    while (total - t).abs() > 1e-12 {
        let step = if (total - t).abs() < h.abs() * 1.0000001 { total - t } else { h };
        let dn = d0 * (t + step).exp();
        let last = samples.last().unwrap();
        let mut pred = last.xi.clone();
        if samples.len() >= 2 {
            let prev = &samples[samples.len() - 2];
            let dt = (last.d / prev.d).ln();
            for (i, p) in pred.iter_mut().enumerate() {
                *p += step / dt * (last.xi[i] - prev.xi[i]);
            }
        }
        let solved = newton_on(sh, dn, &pred, tol_at(dn), 30).and_then(|r| {
            let jump = r.0.iter().zip(&pred).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if jump > CORRECTOR_MAX {
                return Err(Error::Domain(format!("corrector moved {jump:.2e} from the predictor at d = {dn}")));
            }
            Ok(r)
        });
        match solved {
            Ok((xi, it, hist)) => {
                samples.push(PathSample {
                    d: dn,
                    jacobian_min_abs_eig: jacobian_min_abs_eig(sh, dn, &xi)?,
                    xi,
                    iterations: it,
                    residual: *hist.last().unwrap(),
                });
                t += step;
                halvings = 0;
                if h.abs() < nominal.abs() {
                    h *= 2.0;
                }
            }
            Err(e) => {
                halvings += 1;
                if halvings > policy.max_halvings {
                    return Err(Error::PathTerminated {
                        last_good: samples.last().unwrap().d,
                        samples: samples.len(),
                        reason: e.to_string(),
                    });
                }
                h *= 0.5;
            }
        }
    }
    Ok(samples)
}

/// Newton initializer from the truncated series of a family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedPoint {
    pub xi: Vec<f64>,
    /// `d` is below the range where the truncated series is trusted.
    pub low_confidence: bool,
}

pub fn seed_point(family: FamilyId, d: f64) -> Result<SeedPoint> {
    let exp = fps::series_expansion(family)?;
    let spec = fps::family_spec(family);
    Ok(SeedPoint { xi: fps::evaluate_fps(&exp, d)?, low_confidence: d < spec.d_valid })
}

/// Solve the family at one `d`: seed at the anchor, then continue to `d`.
pub fn solve_family(family: FamilyId, d: f64, policy: &StepPolicy) -> Result<NewtonReport> {
    let desc = family.descriptor(d)?;
    let tol = policy.tol.unwrap_or_else(|| default_tol(d));
    let seed = seed_point(family, d)?;
    if !seed.low_confidence {
        if let Ok(r) = newton_solve(desc, &seed.xi, tol, 30) {
            if classify_xi(&r.point.xi).ok() == Some(family.family_type) {
                return Ok(r);
            }
        }
    }
    let path = continue_family(family, policy.anchor.max(fps::family_spec(family).d_valid), d, policy)?;
    let last = path.samples.last().unwrap();
    newton_solve(desc, &last.xi, tol, 30)
}

/// Continuation path of a family over `[d_start, d_end]`, ordered from
/// `d_start` to `d_end`.
///
/// Starts from the series seed at the anchor `d` (clamped into the range and
/// above the seed's validity), since the series is most accurate at large `d`.
pub fn continue_family(family: FamilyId, d_start: f64, d_end: f64, policy: &StepPolicy) -> Result<ContinuationPath> {
    family.descriptor(d_start.min(d_end))?;
    let sh = family.shape();
    let (lo, hi) = (d_start.min(d_end), d_start.max(d_end));
    let valid = fps::family_spec(family).d_valid;
    let anchor = policy.anchor.max(valid).clamp(lo, hi);
    let mut start = None;
    for a in [anchor, anchor * 10.0, anchor * 100.0, anchor * 1000.0] {
        let seed = seed_point(family, a)?;
        if let Ok(s) = continue_from(sh, a, &seed.xi, anchor, policy) {
            start = Some(s.last().unwrap().xi.clone());
            break;
        }
    }
    let xi_a = start.ok_or_else(|| Error::NoConvergence { iterations: 0, residual: f64::NAN, history: vec![] })?;
    let down = continue_from(sh, anchor, &xi_a, lo, policy)?;
    let up = continue_from(sh, anchor, &xi_a, hi, policy)?;
    let mut samples: Vec<PathSample> = down.into_iter().rev().collect();
    samples.extend(up.into_iter().skip(1));
    if d_start > d_end {
        samples.reverse();
    }
    Ok(ContinuationPath { family, samples })
}

/// Type from the sign of `ξ₁`; `|ξ₁| ≤ 0.5` is unclassifiable.
pub fn classify_xi(xi: &[f64]) -> Result<FamilyType> {
    let x = xi[0];
    if x.abs() <= 0.5 {
        return Err(Error::Domain(format!("ξ₁ = {x} is too close to the type transition to classify")));
    }
    Ok(if x < 0.0 { FamilyType::I } else { FamilyType::II })
}

pub fn classify_type(pt: &ReducedPoint) -> Result<FamilyType> {
    classify_xi(&pt.xi)
}
