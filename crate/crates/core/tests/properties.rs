use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hypercone_core::growth::ModeTerm;
use hypercone_core::io::{
    coefficients_to_json, cone_to_json, fmt_f64, parse_coefficients, parse_cone, parse_tree,
    tree_to_json,
};
use hypercone_core::spectrum::{
    cross_section_spectrum, indicial_roots, resonant_exponent, ConeDescriptor,
};
use hypercone_core::trees::random::{jitter, random_tree, sample_models};
use hypercone_core::trees::{
    coarse_tree, gamma_close, interval_bounds, interval_index, validate_tree, ConeMetric,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_trees_are_valid_and_round_trip(seed in any::<u64>(), depth in 0u32..4) {
        let models = sample_models();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, &models, depth, 0.01);
        prop_assert!(validate_tree(&tree, 0.01, &models).is_empty());
        let back = parse_tree(&tree_to_json(&tree)).unwrap();
        prop_assert_eq!(&back, &tree);
        let verdict = gamma_close(&tree, &back, 1e-3, &models, &ConeMetric::default()).unwrap();
        prop_assert!(verdict.close);
    }

    #[test]
    fn jitter_keeps_validity_and_shape(seed in any::<u64>()) {
        let models = sample_models();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, &models, 3, 0.01);
        let moved = jitter(&mut rng, &tree, &models, 1e-3);
        prop_assert!(validate_tree(&moved, 0.01, &models).is_empty());
        prop_assert_eq!(coarse_tree(&moved), coarse_tree(&tree));
    }

    #[test]
    fn indicial_roots_solve_the_euler_equation(mu in -6.0f64..200.0, n in 3u32..12) {
        let (gp, gm) = indicial_roots(mu, n);
        let m = f64::from(n) - 2.0;
        if mu + m * m / 4.0 >= 0.0 {
            prop_assert!((gp + gm - 2.0 * resonant_exponent(n)).abs() < 1e-9);
            for g in [gp, gm] {
                prop_assert!((g * g + m * g - mu).abs() < 1e-8 * (1.0 + mu.abs()));
            }
        }
    }

    #[test]
    fn product_sphere_spectra_are_sorted(p in 1u32..6, q in 1u32..6) {
        let cone = ConeDescriptor::product_sphere(p, q).unwrap();
        let ladder = cross_section_spectrum(&cone, 40.0).unwrap();
        prop_assert!(ladder.entries.windows(2).all(|w| w[0].mu < w[1].mu));
        prop_assert_eq!(ladder.entries[0].mu, -f64::from(p + q));
        prop_assert_eq!(parse_cone(&cone_to_json(&cone)).unwrap(), cone);
    }

    #[test]
    fn coefficients_round_trip(rows in prop::collection::vec((1usize..50, -1e6f64..1e6, -1e6f64..1e6), 0..8)) {
        let terms: Vec<ModeTerm> = rows.iter().map(|&(j, c_plus, c_minus)| ModeTerm { j, c_plus, c_minus }).collect();
        prop_assert_eq!(parse_coefficients(&coefficients_to_json(&terms)).unwrap(), terms);
    }

    #[test]
    fn interval_index_brackets_its_value(v in 1e-12f64..1e12, base in 1.001f64..10.0) {
        let k = interval_index(v, base).unwrap();
        let (lo, hi) = interval_bounds(k, base);
        prop_assert!(lo <= v && v < hi);
    }

    #[test]
    fn formatted_floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}
