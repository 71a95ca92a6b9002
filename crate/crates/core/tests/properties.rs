//! Property tests for the distance functionals, the R statistic and the
//! sphere marginal.

use proptest::prelude::*;
use randclt_core::distance::{ecdf, kantorovich, kolmogorov, l2_dist, l2_dist_sq, AnalyticCdf};
use randclt_core::expansions::{r_statistic, sqrt_gap_sandwich, RForm};
use randclt_core::moments::{moment_ratio_sides, pair_variance_sides};
use randclt_core::sphere::SphereLaw;

const SLOP: f64 = 1e-12;

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, 1..40)
}

proptest! {
    #[test]
    fn distances_are_symmetric(a in sample(), b in sample()) {
        let (fa, fb) = (ecdf(&a).unwrap(), ecdf(&b).unwrap());
        prop_assert!((kolmogorov(&fa, &fb).unwrap() - kolmogorov(&fb, &fa).unwrap()).abs() <= SLOP);
        prop_assert!((l2_dist(&fa, &fb).unwrap() - l2_dist(&fb, &fa).unwrap()).abs() <= SLOP);
        prop_assert!((kantorovich(&fa, &fb).unwrap() - kantorovich(&fb, &fa).unwrap()).abs() <= SLOP);
    }

    #[test]
    fn distances_satisfy_triangle_inequality(a in sample(), b in sample(), c in sample()) {
        let (fa, fb, fc) = (ecdf(&a).unwrap(), ecdf(&b).unwrap(), ecdf(&c).unwrap());
        let rho = |x, y| kolmogorov(x, y).unwrap();
        let om = |x, y| l2_dist(x, y).unwrap();
        let w = |x, y| kantorovich(x, y).unwrap();
        prop_assert!(rho(&fa, &fc) <= rho(&fa, &fb) + rho(&fb, &fc) + SLOP);
        prop_assert!(om(&fa, &fc) <= om(&fa, &fb) + om(&fb, &fc) + SLOP);
        prop_assert!(w(&fa, &fc) <= w(&fa, &fb) + w(&fb, &fc) + SLOP);
    }

    #[test]
    fn omega_sq_at_most_rho_times_w(a in sample(), b in sample()) {
        let (fa, fb) = (ecdf(&a).unwrap(), ecdf(&b).unwrap());
        let lhs = l2_dist_sq(&fa, &fb).unwrap();
        let rhs = kolmogorov(&fa, &fb).unwrap() * kantorovich(&fa, &fb).unwrap();
        prop_assert!(lhs <= rhs + SLOP);
    }

    #[test]
    fn omega_sq_at_most_rho_times_w_against_normal(a in sample()) {
        let fa = ecdf(&a).unwrap();
        let phi = AnalyticCdf::StandardNormal;
        let lhs = l2_dist_sq(&fa, &phi).unwrap();
        let rhs = kolmogorov(&fa, &phi).unwrap() * kantorovich(&fa, &phi).unwrap();
        prop_assert!(lhs <= rhs + 1e-10);
        prop_assert!(kolmogorov(&fa, &phi).unwrap() <= 1.0);
    }

    #[test]
    fn r_is_bounded_by_norms(x in prop::collection::vec(-3.0f64..3.0, 2..30), seed in any::<u64>()) {
        let n = x.len();
        let y: Vec<f64> = (0..n).map(|i| ((seed.rotate_left(i as u32 * 7) % 1000) as f64 / 250.0) - 2.0).collect();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bound = 3.0 * (nx + ny) / (n as f64).sqrt();
        for form in [RForm::Simplified, RForm::Full] {
            let r = r_statistic(&x, &y, form).unwrap();
            prop_assert!(r.abs() <= bound + SLOP);
        }
    }

    #[test]
    fn sqrt_gap_is_sandwiched(eps in -1.0f64..=1.0) {
        let (lo, hi) = sqrt_gap_sandwich(eps);
        let w = 1.0 - (1.0 - eps).sqrt();
        prop_assert!(lo <= w + 1e-15);
        prop_assert!(w <= hi + 1e-15);
    }

    #[test]
    fn sphere_marginal_cdf_is_symmetric_and_monotone(n in 2usize..200, x in 0.0f64..1.0, dx in 0.0f64..0.5) {
        let law = SphereLaw::new(n).unwrap();
        let (a, b) = (x, (x + dx).min(1.0));
        prop_assert!((law.cdf(a) + law.cdf(-a) - 1.0).abs() <= 1e-12);
        prop_assert!(law.cdf(a) <= law.cdf(b) + 1e-15);
    }

    #[test]
    fn moment_ratio_holds(w in prop::collection::vec(0.0f64..5.0, 1..60)) {
        prop_assume!(w.iter().any(|v| *v > 0.0));
        let (mean, ratio) = moment_ratio_sides(&w).unwrap();
        prop_assert!(ratio <= mean * (1.0 + 1e-12));
    }

    #[test]
    fn pair_variance_holds(w in prop::collection::vec(0.0f64..5.0, 1..60)) {
        prop_assume!(w.iter().any(|v| *v > 0.0));
        let (lhs, rhs) = pair_variance_sides(&w).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }
}
