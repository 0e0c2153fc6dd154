use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use wtest_core::hf::moment_match;
use wtest_core::scan::{pair_at, pair_count, pair_index, scan_pairs, sort_results};
use wtest_core::stats::{mean, sample_variance};
use wtest_core::{
    cell_log_odds, chisq_cdf, chisq_sf, default_hf, s_statistic, tabulate_pair, tabulate_single, w_test,
    GenotypeDataset, Order, PackedGenotypes, ScanConfig, MISSING,
};

fn dataset() -> impl Strategy<Value = GenotypeDataset> {
    (4usize..40, 2usize..6).prop_flat_map(|(n, m)| {
        (
            proptest::collection::vec(proptest::collection::vec(0u8..=3, n), m),
            proptest::collection::vec(0u8..=1, n),
        )
            .prop_map(move |(columns, mut phenotype)| {
                phenotype[0] = 1;
                phenotype[1] = 0;
                let names = (0..m).map(|i| format!("m{i}")).collect();
                GenotypeDataset::new(names, columns, phenotype).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn cell_totals_equal_complete_cases(d in dataset()) {
        for i in 0..d.n_markers() {
            if let Ok(t) = tabulate_single(&d, i) {
                let complete = d.column(i).iter().filter(|&&g| g != MISSING).count() as u32;
                prop_assert_eq!(t.n1() + t.n0(), complete);
                prop_assert_eq!(t.cells().iter().map(|c| c.n1 + c.n0).sum::<u32>(), complete);
                prop_assert!(t.cells().iter().all(|c| c.n1 + c.n0 > 0));
            }
        }
    }

    #[test]
    fn pair_tables_are_transposes(d in dataset()) {
        let hf = default_hf(Order::Pair);
        let (a, b) = (tabulate_pair(&d, 0, 1), tabulate_pair(&d, 1, 0));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.k(), b.k());
                for c in a.cells() {
                    let t = (c.category % 3) * 3 + c.category / 3;
                    prop_assert_eq!(b.cell(t).map(|x| (x.n1, x.n0)), Some((c.n1, c.n0)));
                }
                if a.k() >= 2 {
                    let (wa, wb) = (w_test(&a, &hf).unwrap(), w_test(&b, &hf).unwrap());
                    prop_assert!((wa.w - wb.w).abs() < 1e-12);
                }
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn w_is_invariant_to_swapping_labels(d in dataset()) {
        let flipped: Vec<u8> = d.phenotype().iter().map(|&y| 1 - y).collect();
        let e = GenotypeDataset::new(d.marker_names().to_vec(), d.columns().to_vec(), flipped).unwrap();
        let hf = default_hf(Order::Main);
        for i in 0..d.n_markers() {
            let a = tabulate_single(&d, i).and_then(|t| w_test(&t, &hf));
            let b = tabulate_single(&e, i).and_then(|t| w_test(&t, &hf));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert!((a.w - b.w).abs() < 1e-12);
                    prop_assert!(a.w >= 0.0 && (0.0..=1.0).contains(&a.p_value));
                }
                (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }

    #[test]
    fn w_is_invariant_to_relabeling_genotypes(d in dataset()) {
        let relabel = |g: u8| if g == MISSING { g } else { (g + 1) % 3 };
        let cols: Vec<Vec<u8>> = d.columns().iter().map(|c| c.iter().map(|&g| relabel(g)).collect()).collect();
        let e = GenotypeDataset::new(d.marker_names().to_vec(), cols, d.phenotype().to_vec()).unwrap();
        for i in 0..d.n_markers() {
            if let (Ok(a), Ok(b)) = (tabulate_single(&d, i), tabulate_single(&e, i)) {
                prop_assert!((s_statistic(&cell_log_odds(&a)) - s_statistic(&cell_log_odds(&b))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn packed_matches_naive(d in dataset()) {
        let p = PackedGenotypes::pack(&d);
        for i in 0..d.n_markers() {
            prop_assert_eq!(p.tabulate_single(i), tabulate_single(&d, i));
            for j in 0..d.n_markers() {
                if i != j {
                    prop_assert_eq!(p.tabulate_pair(i, j), tabulate_pair(&d, i, j));
                }
            }
        }
    }

    #[test]
    fn scan_rows_are_sorted_and_complete(d in dataset()) {
        let out = scan_pairs(&d, &default_hf(Order::Main), &default_hf(Order::Pair), &ScanConfig::new(Order::Pair)).unwrap();
        let mut sorted = out.results.clone();
        sort_results(&mut sorted);
        prop_assert_eq!(&sorted, &out.results);
        let retained = d.n_markers() - out.untestable_markers;
        prop_assert_eq!(out.tested, pair_count(retained));
        prop_assert_eq!(out.results.len() as u64, out.tested);
    }

    #[test]
    fn moment_identity(values in proptest::collection::vec(0.01f64..50.0, 3..200)) {
        if let Some((h, f)) = moment_match(&values) {
            let scaled: Vec<f64> = values.iter().map(|s| h * s).collect();
            prop_assert!((mean(&scaled) - f).abs() <= 1e-9 * f.max(1.0));
            prop_assert!((sample_variance(&scaled) - 2.0 * f).abs() <= 1e-9 * f.max(1.0));
        }
    }

    #[test]
    fn sf_and_cdf_are_complementary(x in 0.0f64..200.0, f in 0.1f64..40.0) {
        let (q, p) = (chisq_sf(x, f).unwrap(), chisq_cdf(x, f).unwrap());
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!((p + q - 1.0).abs() < 1e-12);
        prop_assert!(chisq_sf(x + 0.5, f).unwrap() <= q);
    }

    #[test]
    fn pair_index_is_a_bijection(m in 2usize..5000, seed in any::<u64>()) {
        let idx = seed % pair_count(m);
        let (i, j) = pair_at(idx, m);
        prop_assert!(i < j && j < m);
        prop_assert_eq!(pair_index(i, j, m), idx);
    }
}

#[test]
fn satterthwaite_recovers_scaled_chi_squared() {
    let (h0, f0) = (0.9, 7.0);
    let chi = ChiSquared::new(f0).unwrap();
    for seed in 1..=5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..10_000).map(|_| chi.sample(&mut rng) / h0).collect();
        let (h, f) = moment_match(&values).unwrap();
        assert!((h - h0).abs() / h0 < 0.10, "seed {seed}: h {h}");
        assert!((f - f0).abs() / f0 < 0.10, "seed {seed}: f {f}");
    }
}
