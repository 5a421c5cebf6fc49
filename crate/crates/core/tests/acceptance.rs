//! Acceptance criteria, one test each. Every test prints a `PASS`/`FAIL`
//! line with the measured quantities before asserting.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use landscape::extras;
use landscape::fps;
use landscape::kernel::{self, WeightConfig};
use landscape::solver::{self, StepPolicy};
use landscape::spectrum::{self, BranchKind, Irrep, Method, TableMode, TableReport};
use landscape::symmetry;
use landscape::{FamilyId, FamilyType};

fn verdict(id: u32, title: &str, ok: bool, detail: &str, started: Instant) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] AC{id} {title} ({:.1} s): {detail}", started.elapsed().as_secs_f64());
    assert!(ok, "AC{id} {title}: {detail}");
}

fn fam(t: FamilyType, p: usize, m: usize) -> FamilyId {
    FamilyId::new(t, p, m).unwrap()
}

fn random_config(rng: &mut ChaCha8Rng) -> WeightConfig {
    let d = rng.gen_range(2..=8usize);
    let k = d + rng.gen_range(0..=2usize);
    let s = 1.0 / (d as f64).sqrt();
    let w = DMatrix::from_fn(k, d, |i, j| {
        let z: f64 = rng.sample(StandardNormal);
        s * z + if i == j { 0.5 } else { 0.0 }
    });
    WeightConfig::new(w).unwrap()
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / a.norm().max(1e-300)
}

#[test]
fn ac01_kernel_correctness() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_z: f64 = 0.0;
    for i in 0..20 {
        let cfg = random_config(&mut rng);
        let mc = kernel::monte_carlo_loss(&cfg, 1_000_000, 100 + i);
        worst_z = worst_z.max((kernel::loss(&cfg) - mc.estimate).abs() / mc.stderr);
    }
    let h = 1e-6;
    let mut worst_g: f64 = 0.0;
    for _ in 0..50 {
        let cfg = random_config(&mut rng);
        let g = kernel::gradient(&cfg).unwrap();
        let fd = DMatrix::from_fn(cfg.k, cfg.d, |i, j| {
            let mut p = cfg.clone();
            let mut m = cfg.clone();
            p.w[(i, j)] += h;
            m.w[(i, j)] -= h;
            (kernel::loss(&p) - kernel::loss(&m)) / (2.0 * h)
        });
        worst_g = worst_g.max(rel(&g, &fd));
    }
    let mut worst_h: f64 = 0.0;
    for _ in 0..20 {
        let cfg = random_config(&mut rng);
        let hm = kernel::hessian(&cfg).unwrap();
        let n = cfg.k * cfg.d;
        let mut fd = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut p = cfg.clone();
            let mut m = cfg.clone();
            p.w[(c / cfg.d, c % cfg.d)] += h;
            m.w[(c / cfg.d, c % cfg.d)] -= h;
            let col = (kernel::gradient(&p).unwrap() - kernel::gradient(&m).unwrap()) / (2.0 * h);
            for r in 0..n {
                fd[(r, c)] = col[(r / cfg.d, r % cfg.d)];
            }
        }
        worst_h = worst_h.max(rel(&hm, &fd));
    }
    let ok = worst_z < 3.0 && worst_g < 1e-6 && worst_h < 1e-5;
    let detail = format!("max |loss−MC|/σ = {worst_z:.2}, gradient rel. err {worst_g:.1e}, Hessian rel. err {worst_h:.1e}");
    verdict(1, "kernel correctness", ok, &detail, t);
}

#[test]
fn ac02_type2_kd1_scalar_root() {
    let t = Instant::now();
    let r = fps::type2_kd1_coeffs().unwrap();
    let dt = (r.theta - 0.5841641350602251).abs();
    let ok = dt < 1e-12 && r.p_value.abs() < 1e-14 && r.p_derivative.abs() > 0.4;
    let detail = format!(
        "ϑ = {:.16} (|Δ| = {dt:.1e}), |p(ϑ)| = {:.1e}, |p′(ϑ)| = {:.4} (needs > 0.4)",
        r.theta,
        r.p_value.abs(),
        r.p_derivative.abs()
    );
    verdict(2, "type II k=d+1 scalar root", ok, &detail, t);
}

const PRINTED_KD2: [f64; 9] = [
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

#[test]
fn ac03_type2_kd2_coefficients() {
    let t = Instant::now();
    let r = fps::type2_kd2_coeffs().unwrap();
    let worst = r.values.iter().zip(PRINTED_KD2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    let ok = worst < 1e-9 && secs < 1.0;
    verdict(3, "type II k=d+2 coefficients", ok, &format!("max |Δ| = {worst:.1e} in {secs:.2} s"), t);
}

#[test]
fn ac04_type1_closed_forms() {
    let t = Instant::now();
    let r = fps::type1_kd1_coeffs().unwrap();
    let g3 = (PI - 2.0).sqrt() / 2.0;
    let h1 = (6.0 + 3.0 * PI) / (8.0 * PI * (PI - 2.0).sqrt());
    let forms = (r.g3 - g3).abs() < 1e-15 && (r.h1 - h1).abs() < 1e-15;
    let k2 = fps::type1_kd2_coeffs().unwrap();
    let g3n = k2.get("g3").unwrap();
    let ok = forms && r.order_residual < 1e-12 && (g3n - g3).abs() < 1e-12 && (g3n - 0.5342266966349101).abs() < 1e-12;
    let detail = format!(
        "k=d+1 order residual {:.1e}; k=d+2 g₃ = {g3n:.16} vs √(π−2)/2 = {g3:.16} (|Δ| = {:.1e})",
        r.order_residual,
        (g3n - g3).abs()
    );
    verdict(4, "type I closed forms", ok, &detail, t);
}

/// Direct values `(coordinate, order, value)` of the type II systems.
fn named_direct(f: FamilyId) -> Vec<(usize, usize, f64)> {
    match (f.family_type, f.m) {
        (FamilyType::II, 2) => {
            let v = fps::type2_kd2_coeffs().unwrap().values;
            let slots = [(0, 3), (1, 4), (2, 3), (3, 2), (4, 1), (5, 2), (6, 1), (7, 2), (8, 1)];
            slots.iter().zip(v).map(|(&(c, o), x)| (c, o, x)).collect()
        }
        (FamilyType::II, 1) => {
            let v = fps::type2_kd1_coeffs().unwrap().values;
            let slots = [(0, 3), (1, 4), (2, 3), (3, 2), (4, 1), (5, 2), (6, 1)];
            slots.iter().zip(v).map(|(&(c, o), x)| (c, o, x)).collect()
        }
        _ => Vec::new(),
    }
}

#[test]
fn ac05_solver_fps_cross_validation() {
    let t = Instant::now();
    let policy = StepPolicy { samples_per_decade: 20.0, ..Default::default() };
    let mut lines = Vec::new();
    let mut ok = true;
    for f in FamilyId::all() {
        let spec = fps::family_spec(f);
        let exp = fps::series_expansion(f).unwrap();
        let path = solver::continue_family(f, 1e2, 1e6, &policy).unwrap();
        let fit = fps::fit_structured(&path, 8).unwrap();
        let mut checks: Vec<(usize, usize, f64)> =
            spec.coords.iter().enumerate().map(|(i, c)| (i, c.lead as usize, exp.coeff(i, c.lead as usize))).collect();
        checks.extend(named_direct(f));
        let worst = checks.iter().map(|&(i, o, v)| (fit.coeff(i, o) - v).abs()).fold(0.0, f64::max);
        ok &= worst < 1e-3;
        lines.push(format!("{f}: {worst:.1e}"));
    }
    verdict(5, "path fits vs direct values", ok, &lines.join(", "), t);
}

#[test]
fn ac06_xy_eigenvalues() {
    let t = Instant::now();
    let (x0, y0) = spectrum::xy_limits();
    let mut ok = true;
    let mut lines = Vec::new();
    for f in FamilyId::all() {
        let r = spectrum::xy_fit(f, 1e2, 1e3).unwrap();
        let (dx, dy) = ((r.x.value - x0).abs(), (r.y.value - y0).abs());
        ok &= dx < 1e-3 && dy < 1e-3;
        lines.push(format!("{f}: ({:.5}, {:.5})", r.x.value, r.y.value));
    }
    verdict(6, "x/y eigenvalue constants", ok, &lines.join(", "), t);
}

#[derive(Clone, Copy, Debug)]
enum Printed {
    C(f64),
    L(f64, f64),
}

/// Sorted pairwise comparison per irrep and branch kind (unordered-set
/// matching); returns the worst deviation and a log of mismatches.
fn compare_table(r: &TableReport, irrep: Irrep, printed: &[Printed], tol: f64) -> (f64, Vec<String>) {
    let rows = r.rows_of(irrep);
    let mut consts: Vec<f64> = rows.iter().filter(|x| x.kind == BranchKind::Constant).map(|x| x.value).collect();
    let mut lins: Vec<(f64, f64)> =
        rows.iter().filter(|x| x.kind == BranchKind::Linear).map(|x| (x.slope.unwrap(), x.value)).collect();
    let mut pc: Vec<f64> = printed.iter().filter_map(|p| if let Printed::C(v) = p { Some(*v) } else { None }).collect();
    let mut pl: Vec<(f64, f64)> =
        printed.iter().filter_map(|p| if let Printed::L(a, b) = p { Some((*a, *b)) } else { None }).collect();
    consts.sort_by(f64::total_cmp);
    pc.sort_by(f64::total_cmp);
    lins.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pl.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    if consts.len() != pc.len() || lins.len() != pl.len() {
        bad.push(format!("{irrep}: {} constant / {} linear branches, printed {} / {}", consts.len(), lins.len(), pc.len(), pl.len()));
        return (f64::INFINITY, bad);
    }
    for (a, b) in consts.iter().zip(&pc) {
        let e = (a - b).abs();
        worst = worst.max(e);
        if e >= tol {
            bad.push(format!("{irrep}: {a:.4} vs printed {b:.4}"));
        }
    }
    for (a, b) in lins.iter().zip(&pl) {
        let e = (a.0 - b.0).abs().max((a.1 - b.1).abs());
        worst = worst.max(e);
        if e >= tol {
            bad.push(format!("{irrep}: {:.4}d{:+.4} vs printed {:.4}d{:+.4}", a.0, a.1, b.0, b.1));
        }
    }
    (worst, bad)
}

#[test]
fn ac07_table1() {
    use Printed::{C, L};
    let t = Instant::now();
    let mode = TableMode::Asymptotic { d_lo: 1e2, d_hi: 1e4 };
    let k0 = spectrum::table_report(fam(FamilyType::II, 1, 0), mode).unwrap();
    let k1 = spectrum::table_report(fam(FamilyType::II, 1, 1), mode).unwrap();
    let cases: [(&TableReport, Irrep, Vec<Printed>); 4] = [
        (&k0, Irrep::T, vec![C(0.0908), C(0.25), L(0.1591, -0.3471), L(0.25, 0.25), L(0.25, 0.8471)]),
        (&k0, Irrep::S, vec![C(0.0908), C(0.0908), C(0.25), C(0.4091), L(0.25, 0.25)]),
        (
            &k1,
            Irrep::T,
            vec![C(0.0044), C(0.0843), C(0.2632), C(0.3121), L(0.1591, 0.7546), L(0.25, 0.5), L(0.25, 1.0979)],
        ),
        (&k1, Irrep::S, vec![C(0.0230), C(0.0908), C(0.0936), C(0.2693), C(0.5340), L(0.25, 0.5)]),
    ];
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (r, irrep, printed) in &cases {
        let (w, b) = compare_table(r, *irrep, printed, 5e-3);
        worst = worst.max(w);
        bad.extend(b.into_iter().map(|s| format!("{}: {s}", r.family)));
    }
    let detail = if bad.is_empty() { format!("max |Δ| = {worst:.1e}") } else { bad.join("; ") };
    verdict(7, "type II branch table", bad.is_empty(), &detail, t);
}


fn table2_column(m: usize, d: f64, method: Method) -> (Vec<f64>, Vec<f64>) {
    let r = spectrum::table_report(fam(FamilyType::I, 1, m), TableMode::Exact { d, method }).unwrap();
    let pick = |i: Irrep| {
        let mut v: Vec<f64> = r.rows_of(i).iter().map(|x| x.value).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    (pick(Irrep::T), pick(Irrep::S))
}

#[test]
fn ac08_table2() {
    let t = Instant::now();
    let columns: [(usize, f64, Method, &str, &str); 4] = [
        (1, 10.0, Method::Dense, "0.01859 0.03574 0.08472 0.25925 1.5634 2.90219 3.3678", "-0.00230 0.04343 0.1135 0.2324 0.3915 2.9398"),
        (
            2,
            10.0,
            Method::Dense,
            "0.00613 0.01715 0.04434 0.05308 0.2309 0.3080 1.6453 3.2022 3.7551",
            "-0.03903 0.00423 0.04824 0.1206 0.2630 0.4559 3.2410",
        ),
        (1, 100.0, Method::Adapted, "0.006647 0.05914 0.20056 0.27534 15.746 25.4661 26.055", "0.03178 0.0680 0.09210 0.24363 0.48426 25.478"),
        (
            2,
            100.0,
            Method::Adapted,
            "0.006467 0.01348 0.06335 0.09132 0.2697 0.4127 15.846 25.74 26.395",
            "-0.03432 0.03707 0.07250 0.09303 0.3103 0.5329 25.751",
        ),
    ];
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    let mut s_min = Vec::new();
    for (m, d, method, tp, sp) in columns {
        let (tv, sv) = table2_column(m, d, method);
        if m == 1 {
            s_min.push(sv[0]);
        }
        for (label, got, want) in [("t", tv, tp), ("s", sv, sp)] {
            let want: Vec<f64> = want.split_whitespace().map(|x| x.parse().unwrap()).collect();
            if got.len() != want.len() {
                bad.push(format!("k=d+{m} d={d} {label}: {} values, printed {}", got.len(), want.len()));
                continue;
            }
            for (g, w) in got.iter().zip(want) {
                let e = (g - w).abs();
                worst = worst.max(e);
                if e >= 5e-4 {
                    bad.push(format!("k=d+{m} d={d} {label}: {g:.5} vs printed {w}"));
                }
            }
        }
    }
    let sign_change = s_min.len() == 2 && s_min[0] < 0.0 && s_min[1] > 0.0;
    if !sign_change {
        bad.push(format!("smallest s eigenvalue for k=d+1: {s_min:?}"));
    }
    let detail = if bad.is_empty() {
        format!("max |Δ| = {worst:.1e}; k=d+1 smallest s: {:.5} → {:.5}", s_min[0], s_min[1])
    } else {
        bad.join("; ")
    };
    verdict(8, "type I spectrum table", bad.is_empty(), &detail, t);
}

#[test]
fn ac09_interlacing_certificate() {
    let t = Instant::now();
    let f = fam(FamilyType::II, 1, 2);
    let n = 12;
    let ds: Vec<f64> = (0..n).map(|i| 1e2 * 10f64.powf(i as f64 / (n - 1) as f64)).collect();
    let policy = StepPolicy::default();
    let certs: Vec<_> = ds
        .iter()
        .map(|&d| spectrum::interlacing_block(&solver::solve_family(f, d, &policy).unwrap().point).unwrap())
        .collect();
    let kappa = fps::family_spec(f).kappa;
    let terms = if kappa == 4 { 4 } else { 3 };
    let fit = |b: usize| spectrum::fit_branch(&ds, &certs.iter().map(|c| c.eigenvalues[b]).collect::<Vec<_>>(), kappa, terms).value;
    let (hi, lo) = (fit(0), fit(1));
    let pt = solver::solve_family(f, 12.0, &policy).unwrap().point;
    let dense = spectrum::interlacing_certificate(&symmetry::embed(&pt).unwrap(), &pt.descriptor).unwrap();
    let holds = dense.interlacing_holds == Some(true);
    let ok = (hi - 0.8060).abs() < 5e-3 && (lo + 0.1198).abs() < 5e-3 && holds;
    let detail = format!(
        "fitted ({hi:.4}, {lo:.4}); d=12: min eig H = {:.5} ≤ min eig Ĥ = {:.5}",
        dense.hessian_min.unwrap_or(f64::NAN),
        dense.submatrix_min.unwrap_or(f64::NAN)
    );
    verdict(9, "interlacing certificate", ok, &detail, t);
}

fn fitted_branches(r: &TableReport) -> (Vec<f64>, Vec<(f64, f64)>) {
    let consts = r.rows.iter().filter(|x| x.kind == BranchKind::Constant).map(|x| x.value).collect();
    let lins = r.rows.iter().filter(|x| x.kind == BranchKind::Linear).map(|x| (x.slope.unwrap(), x.value)).collect();
    (consts, lins)
}

#[test]
fn ac10_delta_sd_overparameterization() {
    let t = Instant::now();
    let mode = TableMode::Asymptotic { d_lo: 1e2, d_hi: 1e4 };
    let (x0, _) = spectrum::xy_limits();
    let r5 = 5f64.sqrt();
    let neg = (-1.0 - r5) / (4.0 * PI) + 0.25;
    let cases = [(0usize, vec![x0, 0.25], vec![(0.25, 0.25)]), (1, vec![x0, (-1.0 + r5) / (4.0 * PI) + 0.25, neg], vec![(0.25, 0.5)])];
    let mut bad = Vec::new();
    let mut neg_branch = f64::NAN;
    for (m, consts, lins) in cases {
        let r = spectrum::table_report(fam(FamilyType::I, 0, m), mode).unwrap();
        let (fc, fl) = fitted_branches(&r);
        for c in consts {
            let best = fc.iter().copied().min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs())).unwrap_or(f64::NAN);
            if !((best - c).abs() < 1e-3) {
                bad.push(format!("m={m}: {c:.5} unmatched (closest {best:.5})"));
            }
            if (c - neg).abs() < 1e-12 {
                neg_branch = best;
            }
        }
        for (a, b) in lins {
            if !fl.iter().any(|&(s, i)| (s - a).abs() < 1e-3 && (i - b).abs() < 1e-3) {
                bad.push(format!("m={m}: {a}d+{b} unmatched among {fl:?}"));
            }
        }
    }
    if !(neg_branch < 0.0) {
        bad.push(format!("negative branch fitted at {neg_branch}"));
    }
    let detail = if bad.is_empty() { format!("all constants within 1e-3; negative branch {neg_branch:.5}") } else { bad.join("; ") };
    verdict(10, "ΔS_d over-parameterization", bad.is_empty(), &detail, t);
}

#[test]
fn ac11_loss_expansions() {
    let t = Instant::now();
    let f = fam(FamilyType::I, 0, 1);
    let path = solver::continue_family(f, 1e2, 1e4, &StepPolicy { samples_per_decade: 10.0, ..Default::default() }).unwrap();
    let c2 = -1.0 - 2.0 / (PI * PI) + 4.0 / PI;
    let (mut ds, mut res) = (Vec::new(), Vec::new());
    for s in &path.samples {
        let l = symmetry::loss_on(f.shape(), s.d, &s.xi).unwrap();
        let model = 0.5 - 1.0 / PI - 4.0 / (3.0 * PI) * s.d.powf(-0.5) + c2 / s.d;
        ds.push(s.d);
        res.push((l - model).abs());
    }
    let slope = -fps::log_log_slope(&ds, &res);
    let exp = fps::series_expansion(fam(FamilyType::I, 1, 1)).unwrap();
    let c34 = fps::loss_series(&exp, 4)[3].unwrap_or(f64::NAN);
    let want = -(PI - 2.0).powf(1.5) / (3.0 * PI);
    let ok = slope >= 1.4 && (c34 - want).abs() < 1e-3;
    let detail = format!("p=0 residual decay exponent {slope:.3}; p=1 d^(-3/4) coefficient {c34:.6} vs {want:.6}");
    verdict(11, "loss expansions", ok, &detail, t);
}

#[test]
fn ac12_type2_loss_constants() {
    let t = Instant::now();
    let mut alpha = [0.0; 3];
    let mut converging = true;
    let mut lines = Vec::new();
    for m in 0..3 {
        let f = fam(FamilyType::II, 1, m);
        alpha[m] = fps::loss_series(&fps::series_expansion(f).unwrap(), 3)[2].unwrap();
        let path = solver::continue_family(f, 1e2, 1e4, &StepPolicy { samples_per_decade: 4.0, ..Default::default() }).unwrap();
        let gap = |s: &solver::PathSample| (s.d * symmetry::loss_on(f.shape(), s.d, &s.xi).unwrap() - alpha[m]).abs();
        let (g0, g1) = (gap(&path.samples[0]), gap(path.samples.last().unwrap()));
        converging &= g1 < g0 && g1 < 5e-3;
        lines.push(format!("α{m} = {:.11} (|dL − α| {g0:.1e} → {g1:.1e})", alpha[m]));
    }
    let (r1, r2) = (alpha[1] / alpha[0], alpha[2] / alpha[0]);
    let half = 0.5 - 2.0 / (PI * PI);
    lines.push(format!(
        "ratios {r1:.6}, {r2:.6}; α0 − (1/2 − 2/π²) = {:.1e}, α0 − 2.97357632715 = {:.3}",
        alpha[0] - half,
        alpha[0] - 2.97357632715
    ));
    let ok = converging && (r1 - 0.898765).abs() < 1e-3 && (r2 - 0.898559).abs() < 1e-3;
    verdict(12, "type II loss constants", ok, &lines.join("; "), t);
}

#[test]
fn ac13_xavier_bounds() {
    let t = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for d in [2usize, 10, 50] {
        let e = extras::xavier_mc(d, 200_000, 7).unwrap();
        ok &= e.within(0.0);
        lines.push(format!("d={d}: {:.4} ± {:.4} in [{:.4}, {:.4}]", e.estimate, e.stderr, e.lo, e.hi));
    }
    verdict(13, "Xavier bounds", ok, &lines.join(", "), t);
}

#[test]
fn ac14_fossilization() {
    let t = Instant::now();
    let r = extras::global_min_complex_check(3, 2, 100, 11).unwrap();
    let hex = r.vertices.len() == 6 && r.edges.len() == 6 && r.is_cycle;
    let pt = solver::solve_family(fam(FamilyType::II, 1, 0), 10.0, &StepPolicy::default()).unwrap().point;
    let w = symmetry::embed(&pt).unwrap();
    let fp = extras::split_row(&w, w.k - 1, &[0.5, 0.5]).unwrap();
    let g = fp.gradient_norm.unwrap_or(f64::INFINITY);
    let ev = extras::fossil_hessian_eigenvalues(&fp.config).unwrap();
    let zero = ev.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let ok = hex && r.samples == 100 && r.max_sample_loss < 1e-12 && g < 1e-8 && zero < 1e-6;
    let detail = format!(
        "{} vertices, {} edges, cycle {}; max sampled loss {:.1e}; split row: ‖∇L‖ = {g:.1e}, min |λ| = {zero:.1e}",
        r.vertices.len(),
        r.edges.len(),
        r.is_cycle,
        r.max_sample_loss
    );
    verdict(14, "fossilization", ok, &detail, t);
}

#[test]
fn ac15_stability_ledger() {
    let t = Instant::now();
    let policy = StepPolicy::default();
    let spec = |f: FamilyId| {
        let pt = solver::solve_family(f, 12.0, &policy).unwrap().point;
        spectrum::full_spectrum(&symmetry::embed(&pt).unwrap(), &pt.descriptor).unwrap()
    };
    let m0 = spec(fam(FamilyType::II, 1, 0)).min();
    let m1 = spec(fam(FamilyType::II, 1, 1)).min();
    let s2 = spec(fam(FamilyType::II, 1, 2)).values(Irrep::S)[0];
    let i0 = spec(fam(FamilyType::I, 0, 0)).min();
    let ok = m0 > 0.0 && m1 > 0.0 && s2 < 0.0 && i0 > 0.0;
    let detail = format!("II m=0 min {m0:.5}, II m=1 min {m1:.5}, II m=2 smallest s {s2:.5}, I p=0 m=0 min {i0:.5}");
    verdict(15, "stability ledger at d=12", ok, &detail, t);
}
