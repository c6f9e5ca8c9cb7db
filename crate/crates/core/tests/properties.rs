use modanova::fanova::{component_value, subset_keys, subset_variance, total_variance, tree_marginal, ComponentMemo};
use modanova::forest::tree_stream;
use modanova::synth::{generate_synthetic, TruthComponent, TruthSpec};
use modanova::{
    decompose, exact_decompose, fit_forest, fit_tree, to_factorial, ConfigSpace, Dataset, FitParams,
    FractionMode, ModuleSpec, Scenario, SubsetKey, Variant,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(arities: &[usize]) -> ConfigSpace {
    ConfigSpace::new(
        arities
            .iter()
            .enumerate()
            .map(|(j, &k)| ModuleSpec::new(format!("m{j}"), (0..k).map(|o| format!("o{o}"))))
            .collect(),
    )
    .unwrap()
}

fn random_dataset(s: &ConfigSpace, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = s
        .variants()
        .map(|v| (v, rng.random_range(-5.0..5.0)))
        .collect();
    Dataset::new(s.clone(), rows, Scenario::Synthetic).unwrap()
}

fn arities_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=4, 2..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closure_per_tree(arities in arities_strategy(), seed in any::<u64>(), bootstrap in any::<bool>()) {
        let s = space(&arities);
        let d = random_dataset(&s, seed);
        let params = FitParams { n_trees: 4, bootstrap, seed, ..FitParams::default() };
        let f = fit_forest(&d, &params).unwrap();
        let e = decompose(&f, s.n_modules(), FractionMode::Ratio).unwrap();
        for t in &e.per_tree {
            let sum: f64 = t.variances.iter().sum();
            prop_assert!(t.variances.iter().all(|&v| v >= 0.0));
            prop_assert!((sum - t.total).abs() <= 1e-9 * t.total.max(f64::MIN_POSITIVE), "{sum} vs {}", t.total);
        }
    }

    #[test]
    fn exact_preset_matches_oracle(arities in arities_strategy(), seed in any::<u64>()) {
        let s = space(&arities);
        let d = random_dataset(&s, seed);
        let f = fit_forest(&d, &FitParams::exact(s.n_modules())).unwrap();
        for v in s.variants() {
            let y = d.rows().iter().find(|(w, _)| *w == v).unwrap().1;
            prop_assert_eq!(f.predict(&v), y);
        }
        let forest = decompose(&f, s.n_modules(), FractionMode::Ratio).unwrap();
        let oracle = exact_decompose(&to_factorial(&d).unwrap(), s.n_modules()).unwrap();
        prop_assert_eq!(&forest.keys, &oracle.keys);
        for (a, b) in forest.fractions.iter().zip(&oracle.fractions) {
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn partitions_tile_the_space(arities in arities_strategy(), seed in any::<u64>()) {
        let s = space(&arities);
        let d = random_dataset(&s, seed);
        let params = FitParams { n_trees: 3, seed, ..FitParams::default() };
        let f = fit_forest(&d, &params).unwrap();
        for t in f.trees() {
            t.validate().unwrap();
            let volume: usize = t.leaves().map(|(_, p)| p.iter().map(|o| o.len()).product::<usize>()).sum();
            prop_assert_eq!(volume, s.cardinality());
            for v in s.variants() {
                let hits: Vec<f64> = t
                    .leaves()
                    .filter(|(_, p)| p.iter().zip(&v.0).all(|(o, &i)| o.contains(i)))
                    .map(|(y, _)| y)
                    .collect();
                prop_assert_eq!(hits.len(), 1);
                prop_assert_eq!(hits[0], t.predict(&v));
            }
        }
    }

    #[test]
    fn components_have_zero_axis_means(arities in arities_strategy(), seed in any::<u64>()) {
        let s = space(&arities);
        let d = random_dataset(&s, seed);
        let t = fit_tree(&d, &FitParams { features_per_split: Some(1), ..FitParams::default() }, &mut tree_stream(seed, 0)).unwrap();
        let mut memo = ComponentMemo::new();
        let scale = total_variance(&t).sqrt().max(1.0);
        for key in subset_keys(s.n_modules(), s.n_modules()) {
            let sub = ConfigSpace::new(key.indices().iter().map(|&j| s.modules()[j].clone()).collect()).unwrap();
            for (p, &j) in key.indices().iter().enumerate() {
                for opts in sub.variants() {
                    if opts.0[p] != 0 {
                        continue;
                    }
                    let mut sum = 0.0;
                    for o in 0..s.arity(j) {
                        let mut w = opts.0.clone();
                        w[p] = o;
                        sum += component_value(&t, &key, &w, &mut memo).unwrap();
                    }
                    prop_assert!((sum / s.arity(j) as f64).abs() <= 1e-9 * scale);
                }
            }
        }
    }
}

#[test]
fn tree_marginal_matches_brute_force() {
    let s = space(&[3, 2, 4]);
    for seed in 0..10 {
        let d = random_dataset(&s, seed);
        let params = FitParams {
            features_per_split: Some(1),
            ..FitParams::default()
        };
        let t = fit_tree(&d, &params, &mut tree_stream(seed, 1)).unwrap();
        for key in subset_keys(3, 3) {
            let sub = ConfigSpace::new(key.indices().iter().map(|&j| s.modules()[j].clone()).collect()).unwrap();
            for opts in sub.variants() {
                let matching: Vec<f64> = s
                    .variants()
                    .filter(|v| key.indices().iter().zip(&opts.0).all(|(&j, &o)| v.0[j] == o))
                    .map(|v| t.predict(&v))
                    .collect();
                let brute = matching.iter().sum::<f64>() / matching.len() as f64;
                let m = tree_marginal(&t, &key, &opts.0).unwrap();
                assert!((m - brute).abs() < 1e-12, "{key:?} {opts:?}: {m} vs {brute}");
            }
        }
    }
}

#[test]
fn scale_and_shift_invariance() {
    let s = space(&[3, 2, 4, 2]);
    let d = random_dataset(&s, 7);
    let params = FitParams {
        n_trees: 16,
        ..FitParams::default()
    };
    let base = decompose(&fit_forest(&d, &params).unwrap(), 3, FractionMode::Ratio).unwrap();
    let scaled = decompose(
        &fit_forest(&d.map_responses(|y| 7.3 * y), &params).unwrap(),
        3,
        FractionMode::Ratio,
    )
    .unwrap();
    let shifted = decompose(
        &fit_forest(&d.map_responses(|y| y + 100.0), &params).unwrap(),
        3,
        FractionMode::Ratio,
    )
    .unwrap();
    for (a, b) in base.fractions.iter().zip(&scaled.fractions) {
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
    for (ta, tb) in base.per_tree.iter().zip(&shifted.per_tree) {
        for (a, b) in ta.variances.iter().zip(&tb.variances) {
            assert!((a - b).abs() <= 1e-9 * ta.total.max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn relabeling_permutes_keys() {
    let s = space(&[3, 2, 4]);
    let d = random_dataset(&s, 3);
    let base = exact_decompose(&to_factorial(&d).unwrap(), 3).unwrap();

    // module order reversed, options of module 0 rotated
    let perm = [2usize, 1, 0];
    let rotate = |o: usize| (o + 1) % 3;
    let modules: Vec<ModuleSpec> = perm
        .iter()
        .map(|&j| {
            let mut m = s.modules()[j].clone();
            if j == 0 {
                m.options.rotate_right(1);
            }
            m
        })
        .collect();
    let t = ConfigSpace::new(modules).unwrap();
    let rows = d
        .rows()
        .iter()
        .map(|(v, y)| {
            let w: Vec<usize> = perm
                .iter()
                .map(|&j| if j == 0 { rotate(v.0[j]) } else { v.0[j] })
                .collect();
            (Variant(w), *y)
        })
        .collect();
    let d2 = Dataset::new(t.clone(), rows, Scenario::Synthetic).unwrap();
    let relabeled = exact_decompose(&to_factorial(&d2).unwrap(), 3).unwrap();

    for (key, f) in base.iter() {
        let mapped = SubsetKey::new(key.indices().iter().map(|&j| perm.iter().position(|&p| p == j).unwrap())).unwrap();
        assert_eq!(key.label(&s).split(';').count(), mapped.order());
        let g = relabeled.fraction(&mapped).unwrap();
        assert!((f - g).abs() <= 1e-12, "{key:?}: {f} vs {g}");
    }
}

#[test]
fn forest_is_deterministic_across_thread_counts() {
    let s = space(&[3, 3, 2, 4]);
    let d = random_dataset(&s, 11);
    let params = FitParams {
        n_trees: 12,
        seed: 5,
        ..FitParams::default()
    };
    let a = fit_forest(&d, &params).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| fit_forest(&d, &params).unwrap());
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let other = fit_forest(&d, &FitParams { seed: 6, ..params }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn synthetic_truth_is_recovered_exactly() {
    let s = ConfigSpace::modcma();
    let spec = TruthSpec {
        components: vec![
            TruthComponent {
                modules: vec!["elitist".into()],
                values: None,
                scale: Some(1.0),
            },
            TruthComponent {
                modules: vec!["base_sampler".into(), "mirrored".into()],
                values: None,
                scale: Some(0.5),
            },
            TruthComponent {
                modules: vec!["elitist".into(), "local_restart".into(), "weights_option".into()],
                values: None,
                scale: Some(0.3),
            },
        ],
    };
    let syn = generate_synthetic(&s, &spec, 0.0, 4).unwrap();
    let e = exact_decompose(&to_factorial(&syn.dataset).unwrap(), 3).unwrap();
    for (key, f) in e.iter() {
        assert!((f - syn.truth.fraction(key)).abs() <= 1e-9, "{key:?}");
    }
    let v = subset_variance(
        &fit_tree(&syn.dataset, &FitParams::exact(6), &mut tree_stream(0, 0)).unwrap(),
        &SubsetKey::new([0, 3]).unwrap(),
    )
    .unwrap();
    assert!((v / syn.truth.total_variance - syn.truth.fraction(&SubsetKey::new([0, 3]).unwrap())).abs() < 1e-9);
}
