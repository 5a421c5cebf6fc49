//! Property tests for the loss kernel, Puiseux evaluation, fossil partitions
//! and the Xavier bracket.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use landscape::extras::{self, FossilPartition};
use landscape::fps;
use landscape::kernel::{self, WeightConfig};
use landscape::{FamilyId, FamilyType};

fn config() -> impl Strategy<Value = WeightConfig> {
    (2usize..=6, 0usize..=2).prop_flat_map(|(d, extra)| {
        let k = d + extra;
        prop::collection::vec(-1.5f64..1.5, k * d)
            .prop_map(move |v| WeightConfig::new(DMatrix::from_row_slice(k, d, &v)).unwrap())
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loss_is_nonnegative(cfg in config()) {
        prop_assert!(kernel::loss(&cfg) >= -1e-12);
    }

    #[test]
    fn loss_invariant_under_row_and_column_permutations(
        (cfg, rp, cp) in config().prop_flat_map(|c| {
            let (k, d) = (c.k, c.d);
            (Just(c), permutation(k), permutation(d))
        })
    ) {
        let w = DMatrix::from_fn(cfg.k, cfg.d, |i, j| cfg.w[(rp[i], cp[j])]);
        let moved = WeightConfig::new(w).unwrap();
        let (a, b) = (kernel::loss(&cfg), kernel::loss(&moved));
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn pair_energy_is_positively_homogeneous(
        w in prop::collection::vec(-2.0f64..2.0, 4),
        v in prop::collection::vec(-2.0f64..2.0, 4),
        a in 0.01f64..10.0,
        b in 0.01f64..10.0,
    ) {
        let base = kernel::pair_energy(&w, &v);
        let wa: Vec<f64> = w.iter().map(|x| a * x).collect();
        let vb: Vec<f64> = v.iter().map(|x| b * x).collect();
        let scaled = kernel::pair_energy(&wa, &vb);
        prop_assert!((scaled - a * b * base).abs() <= 1e-10 * (a * b * base).abs().max(1e-10));
    }

    #[test]
    fn gradient_matches_directional_derivative(
        (cfg, dir) in config().prop_flat_map(|c| {
            let n = c.k * c.d;
            (Just(c), prop::collection::vec(-1.0f64..1.0, n))
        })
    ) {
        let g = kernel::gradient(&cfg).unwrap();
        let u = DMatrix::from_row_slice(cfg.k, cfg.d, &dir);
        let h = 1e-6;
        let mut p = cfg.clone();
        let mut m = cfg.clone();
        p.w += &u * h;
        m.w -= &u * h;
        let fd = (kernel::loss(&p) - kernel::loss(&m)) / (2.0 * h);
        let an = g.dot(&u);
        prop_assert!((fd - an).abs() <= 1e-6 * g.norm().max(1.0) * u.norm().max(1.0), "{} vs {}", fd, an);
    }

    #[test]
    fn partitions_are_valid_and_counted(d in 1usize..=4, extra in 0usize..=2) {
        let k = d + extra;
        let parts = extras::enumerate_partitions(k, d).unwrap();
        prop_assert_eq!(parts.len(), d.pow(extra as u32));
        for p in &parts {
            let mut rows: Vec<usize> = p.parts.iter().flatten().copied().collect();
            rows.sort_unstable();
            prop_assert_eq!(rows, (0..k).collect::<Vec<_>>());
            prop_assert!(p.parts.iter().all(|c| !c.is_empty()));
        }
    }

    #[test]
    fn simplex_points_have_unit_column_sums(d in 2usize..=4, extra in 0usize..=2, seed in any::<u64>()) {
        let k = d + extra;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in extras::enumerate_partitions(k, d).unwrap() {
            let delta = p.sample_delta(&mut rng);
            let w = p.simplex_point(&delta).unwrap();
            for j in 0..d {
                prop_assert!((w.column(j).sum() - 1.0).abs() < 1e-12);
            }
            let cfg = WeightConfig::new(w).unwrap();
            prop_assert!(kernel::loss(&cfg).abs() < 1e-12);
        }
    }

    #[test]
    fn fossil_point_preserves_loss(cfg in config(), seed in any::<u64>(), extra in 1usize..=2) {
        let k = cfg.k + extra;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parts = extras::enumerate_partitions(k, cfg.k).unwrap();
        let p: &FossilPartition = &parts[(seed as usize) % parts.len()];
        let delta = p.sample_delta(&mut rng);
        let fp = extras::fossil_point(&cfg, p, &delta).unwrap();
        prop_assert!((fp.loss - fp.source_loss).abs() <= 1e-10 * fp.source_loss.max(1.0));
        prop_assert!(fp.column_sum_drift < 1e-12);
    }

    #[test]
    fn xavier_bracket_is_ordered(d in 1usize..5000) {
        let (lo, hi) = extras::xavier_bounds(d);
        prop_assert!(0.0 < lo && lo < hi);
        let r = hi / lo;
        prop_assert!(r > 1.0 && r < 2.0, "ratio {}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn truncated_series_tends_to_constant_term(idx in 0usize..8) {
        let f = FamilyId::all()[idx];
        let exp = fps::series_expansion(f).unwrap();
        let at = fps::evaluate_fps(&exp, 1e16).unwrap();
        for (i, v) in at.iter().enumerate() {
            prop_assert!((v - exp.coeff(i, 0)).abs() < 1e-3, "{}: coordinate {} at {} vs {}", f, i, v, exp.coeff(i, 0));
        }
    }
}

#[test]
fn family_catalog_has_both_types() {
    let all = FamilyId::all();
    assert!(all.iter().any(|f| f.family_type == FamilyType::I));
    assert!(all.iter().any(|f| f.family_type == FamilyType::II));
}
