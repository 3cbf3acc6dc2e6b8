mod common;

use common::{gaussian, random_labels, rng};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use streamsel::data::Labels;
use streamsel::spectral::{
    build_affinities, build_affinities_in, quadratic_form, scatter_pair, subset_score, LaplacianPair, DEFAULT_DELTA,
};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn total_scatter(f: &[f64]) -> f64 {
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    f.iter().map(|v| (v - mean).powi(2)).sum()
}

#[test]
fn affinities_sum_to_uniform_exactly() {
    let mut r = rng(3);
    for _ in 0..40 {
        let n = rand::Rng::random_range(&mut r, 2..=14);
        let c = rand::Rng::random_range(&mut r, 2..=n.min(4));
        let labels = random_labels(&mut r, n, c);
        let a = build_affinities_in::<Ratio<i64>>(&labels);
        let inv_n = Ratio::new(1, n as i64);
        assert!((&a.s_b + &a.s_w).iter().all(|v| *v == inv_n));
    }
}

fn instance() -> impl Strategy<Value = (Labels, Vec<f64>)> {
    (any::<u64>(), 2usize..=50, 2usize..=4).prop_map(|(seed, n, c)| {
        let mut r = rng(seed);
        let labels = random_labels(&mut r, n, c.min(n));
        let scale = 10f64.powf(gaussian(&mut r));
        let f = (0..n).map(|_| scale * gaussian(&mut r)).collect();
        (labels, f)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closed_form_matches_dense((labels, f) in instance()) {
        let l = LaplacianPair::from_labels(&labels).unwrap();
        let p = scatter_pair(&f, &labels).unwrap();
        let qb = quadratic_form(&f, &l.l_b).unwrap();
        let qw = quadratic_form(&f, &l.l_w).unwrap();
        prop_assert!((p.between - qb).abs() <= 1e-9 * (1.0 + qb.abs()));
        prop_assert!((p.within - qw).abs() <= 1e-9 * (1.0 + qw.abs()));
        prop_assert!(qw >= -1e-9 * (1.0 + qb.abs()));
        prop_assert!(close(p.between + p.within, total_scatter(&f)));
    }

    #[test]
    fn laplacian_annihilates_constants((labels, _f) in instance(), c in -5.0f64..5.0) {
        let l = LaplacianPair::from_labels(&labels).unwrap();
        let n = labels.len();
        for m in [&l.l_b, &l.l_w] {
            for i in 0..n {
                prop_assert!(m.row(i).sum().abs() <= 1e-10);
            }
            prop_assert!(quadratic_form(&vec![c; n], m).unwrap().abs() <= 1e-9);
        }
    }

    #[test]
    fn score_invariant_under_sample_permutation((labels, f) in instance(), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.shuffle(&mut rng(seed));
        let fp: Vec<f64> = order.iter().map(|&i| f[i]).collect();
        let ids: Vec<i64> = order.iter().map(|&i| labels.ids()[i] as i64).collect();
        let lp = Labels::from_raw(&ids).unwrap();
        let a = scatter_pair(&f, &labels).unwrap();
        let b = scatter_pair(&fp, &lp).unwrap();
        let sa = subset_score(a.between, a.within, DEFAULT_DELTA).unwrap();
        let sb = subset_score(b.between, b.within, DEFAULT_DELTA).unwrap();
        prop_assert!(close(sa, sb));
    }

    #[test]
    fn affinity_scaling_cancels((labels, f) in instance(), g in prop::collection::vec(-3.0f64..3.0, 50), k in 0.01f64..100.0) {
        let g = &g[..f.len()];
        let pair = build_affinities(&labels);
        let mut scaled = pair.clone();
        scaled.s_b *= k;
        scaled.s_w *= k;
        let base = LaplacianPair::from_affinities(&pair).unwrap();
        let sc = LaplacianPair::from_affinities(&scaled).unwrap();
        // without the delta guard the ratio is exactly scale-free
        let ratio = |l: &LaplacianPair, cols: &[&[f64]]| {
            let (b, w) = cols.iter().fold((0.0, 0.0), |(b, w), c| {
                (b + quadratic_form(c, &l.l_b).unwrap(), w + quadratic_form(c, &l.l_w).unwrap())
            });
            b / w
        };
        let r0 = ratio(&base, &[&f]);
        let r1 = ratio(&sc, &[&f]);
        prop_assume!(r0.is_finite() && r0.abs() < 1e6);
        prop_assert!((r0 - r1).abs() <= 1e-8 * (1.0 + r0.abs()));
        let d0 = ratio(&base, &[&f, g]) - r0;
        let d1 = ratio(&sc, &[&f, g]) - r1;
        prop_assume!((d0.abs() - 0.001).abs() > 1e-6);
        prop_assert_eq!(d0.abs() > 0.001, d1.abs() > 0.001);
    }
}
