//! Property tests for the scaling law, the moment calculus and the path
//! statistics.

use dilative::pathstats::{
    classify_dichotomy, discriminate, probe_times, ratio_statistics, DichotomyRule, GeometricGrid, Verdict,
};
use dilative::simulate::{deterministic_path, DeterministicPath, FbmSampler, PathSampler};
use dilative::{
    cumulant_at, fbm_covariance, kolmogorov_bound, min_even_order, moment_from_cumulants, scaled_increment_moment,
    CumulantVector, DilativeParams, SamplePath,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn params() -> impl Strategy<Value = DilativeParams> {
    (0.05f64..0.95, -1.0f64..1.5).prop_map(|(h, d)| DilativeParams::stationary(h, d))
}

fn cumulants() -> impl Strategy<Value = CumulantVector> {
    proptest::collection::vec(0.0f64..3.0, 7).prop_map(|c| CumulantVector::from_higher(&c).unwrap())
}

proptest! {
    #[test]
    fn cumulant_law_is_a_semigroup(p in params(), c in cumulants(), n in 2usize..=8, t in 0.01f64..10.0, s in 0.01f64..10.0) {
        let lhs = cumulant_at(&p, &c, n, t * s).unwrap();
        let rhs = s.powf(p.cumulant_exponent(n)) * cumulant_at(&p, &c, n, t).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn second_cumulant_matches_covariance_diagonal(h in 0.05f64..0.95, v in 0.1f64..5.0, t in 0.01f64..10.0) {
        let p = DilativeParams::stationary(h, 0.0);
        let c = CumulantVector::gaussian(v, 8).unwrap();
        prop_assert!(close(cumulant_at(&p, &c, 2, t).unwrap(), fbm_covariance(h, v, t, t), 1e-12));
    }

    #[test]
    fn covariance_is_symmetric(h in 0.05f64..0.95, v in 0.1f64..5.0, t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
        prop_assert_eq!(fbm_covariance(h, v, t1, t2), fbm_covariance(h, v, t2, t1));
        prop_assert_eq!(fbm_covariance(h, v, t1, 0.0), 0.0);
    }

    #[test]
    fn scaled_moment_dominated_by_bound(p in params(), c in cumulants(), k in 1usize..=3, h in 0.001f64..0.999) {
        prop_assume!(p.validate().is_ok());
        let order = 2 * k;
        let Ok(min) = min_even_order(&p) else { return Ok(()); };
        prop_assume!(order >= min);
        let Ok(bound) = kolmogorov_bound(&p, &c, order, h) else { return Ok(()); };
        let m = scaled_increment_moment(&p, &c, order, h).unwrap();
        prop_assert!(m >= 0.0);
        prop_assert!(m <= bound * (1.0 + 1e-12), "p={order} h={h}: {m} > {bound}");
    }

    #[test]
    fn self_similar_moment_reduces_to_power(hurst in 0.05f64..0.95, c in cumulants(), k in 1usize..=4, h in 0.001f64..3.0) {
        let p = DilativeParams::stationary(hurst, 0.0);
        let order = 2 * k;
        let m = scaled_increment_moment(&p, &c, order, h).unwrap();
        let expected = h.powf(hurst * order as f64) * moment_from_cumulants(&c, order).unwrap();
        prop_assert!(close(m, expected, 1e-10), "{m} vs {expected}");
    }

    #[test]
    fn power_paths_split_exactly(beta in 0.05f64..1.4, kappa in 0.05f64..1.4, ratio in 0.2f64..0.9, extra in 0usize..20) {
        prop_assume!((beta - kappa).abs() > 1e-3);
        let rule = DichotomyRule::default();
        let grid = GeometricGrid::to_zero(ratio, rule.window + 1 + extra).unwrap();
        let times = probe_times(std::slice::from_ref(&grid));
        let path = deterministic_path(DeterministicPath::power(beta).unwrap(), &times).unwrap();
        let verdict = classify_dichotomy(&ratio_statistics(&path, &grid, kappa).unwrap(), &rule);
        prop_assert_eq!(verdict, if kappa < beta { Verdict::Vanishes } else { Verdict::Diverges });
    }

    #[test]
    fn ratios_decrease_in_kappa_near_anchor(seed in any::<u64>(), k1 in 0.05f64..1.5, dk in 0.01f64..0.5) {
        let grid = GeometricGrid::to_zero(0.7, 20).unwrap();
        let times = probe_times(std::slice::from_ref(&grid));
        let path = fbm_path(0.6, &times, seed);
        let a = ratio_statistics(&path, &grid, k1).unwrap();
        let b = ratio_statistics(&path, &grid, k1 + dk).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
        let far = GeometricGrid::to_infinity(0.7, 8).unwrap();
        let times = probe_times(std::slice::from_ref(&far));
        let path = fbm_path(0.6, &times, seed);
        let a = ratio_statistics(&path, &far, k1).unwrap();
        let b = ratio_statistics(&path, &far, k1 + dk).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x >= y));
    }

    #[test]
    fn scaling_values_scales_ratios(seed in any::<u64>(), lambda in 0.01f64..100.0, kappa in 0.1f64..1.2) {
        let grid = GeometricGrid::to_zero(0.7, 40).unwrap();
        let times = probe_times(std::slice::from_ref(&grid));
        let path = fbm_path(0.7, &times, seed);
        let scaled = path.scaled(lambda);
        let a = ratio_statistics(&path, &grid, kappa).unwrap();
        let b = ratio_statistics(&scaled, &grid, kappa).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| close(x * lambda, *y, 1e-12)));
        let rule = DichotomyRule::default();
        let coarse = DichotomyRule::new(rule.window, 1.01, 0.99).unwrap();
        prop_assert_eq!(classify_dichotomy(&a, &coarse), classify_dichotomy(&b, &coarse));
    }

    #[test]
    fn discrimination_ignores_hypothesis_order(seed in any::<u64>(), h1 in 0.2f64..0.9, h2 in 0.2f64..0.9) {
        let grids = GeometricGrid::anchored_family(1.0, 1 << 10, 0.7, 4).unwrap();
        let times = probe_times(&grids);
        let path = fbm_path(0.6, &times, seed);
        let rule = DichotomyRule::default();
        prop_assert_eq!(
            discriminate(&path, &grids, h1, h2, &rule).unwrap(),
            discriminate(&path, &grids, h2, h1, &rule).unwrap()
        );
    }
}

fn fbm_path(hurst: f64, times: &[f64], seed: u64) -> SamplePath {
    FbmSampler::new(hurst, 1.0, times).unwrap().sample_path(seed).unwrap()
}

#[test]
fn anchored_family_fits_resolution() {
    let grids = GeometricGrid::anchored_family(1.0, 1 << 14, 0.7, 32).unwrap();
    let resolution = 1.0 / f64::from(1 << 14);
    for g in &grids {
        let seq = g.build_sequence();
        assert!(seq
            .iter()
            .all(|t| *t > g.reference() && *t - g.reference() < 1.0 / 32.0));
        assert!(seq.last().unwrap() - g.reference() >= resolution * 0.999);
    }
}
