//! Simulation checks on null data: estimator behaviour and driver agreement.

use wtest::parallel;
use wtest::simulate::{simulate_null, SimConfig};
use wtest_core::hf::estimate_hf;
use wtest_core::scan::scan_pairs;
use wtest_core::{null_w_samples, Order, ScanConfig};

#[test]
fn null_estimates_approach_large_sample_limit() {
    let d = simulate_null(&SimConfig::null(2000, 500, 31)).unwrap();
    let hf = parallel::estimate_hf(&d, Order::Main, 400, 1000, 8, None).unwrap();
    let e = hf.get(3).unwrap();
    assert!((e.f - 2.0).abs() / 2.0 < 0.15, "f(3) = {}", e.f);
    assert!((e.h - 2.0 / 3.0).abs() / (2.0 / 3.0) < 0.15, "h(3) = {}", e.h);
}

#[test]
fn null_w_mean_tracks_f() {
    let d = simulate_null(&SimConfig::null(2000, 300, 32)).unwrap();
    let hf = parallel::estimate_hf(&d, Order::Main, 200, 300, 1, None).unwrap();
    let s = parallel::null_w_samples(&d, &hf, Order::Main, 20, 300, 2, None).unwrap();
    let w = &s.by_k[&3];
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let f = hf.get(3).unwrap().f;
    assert!((mean - f).abs() / f < 0.10, "mean {mean} vs f {f}");
    assert!(w.iter().all(|&x| x >= 0.0));
    assert_eq!(s.total(), s.by_k.values().map(Vec::len).sum::<usize>());
}

#[test]
fn parallel_drivers_equal_sequential() {
    let cfg = SimConfig { missing_rate: 0.02, ..SimConfig::null(600, 40, 33) };
    let d = simulate_null(&cfg).unwrap();
    for order in [Order::Main, Order::Pair] {
        let seq = estimate_hf(&d, order, 30, 150, 4).unwrap();
        for threads in [1, 2, 5] {
            assert_eq!(parallel::estimate_hf(&d, order, 30, 150, 4, Some(threads)).unwrap(), seq);
        }
        let seq_null = null_w_samples(&d, &seq, order, 5, 100, 6).unwrap();
        assert_eq!(parallel::null_w_samples(&d, &seq, order, 5, 100, 6, Some(3)).unwrap(), seq_null);
    }
    let hm = estimate_hf(&d, Order::Main, 30, 40, 4).unwrap();
    let hp = estimate_hf(&d, Order::Pair, 30, 150, 4).unwrap();
    let config = ScanConfig { input_pval: Some(0.8), ..ScanConfig::new(Order::Pair) };
    let seq = scan_pairs(&d, &hm, &hp, &config).unwrap();
    for threads in [1, 3] {
        let par = parallel::scan_pairs(&d, &hm, &hp, &ScanConfig { threads: Some(threads), ..config.clone() }, true).unwrap();
        assert_eq!(par, seq);
    }
}

#[test]
fn convergence_report_shapes() {
    let d = simulate_null(&SimConfig::null(500, 100, 34)).unwrap();
    let rows = parallel::hf_convergence_report(&d, Order::Main, &[50], &[1], 100, None).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.sd_f.is_none()));
    let flat = wtest_core::GenotypeDataset::new(vec!["a".into()], vec![vec![1, 1, 1]], vec![1, 0, 1]).unwrap();
    assert!(parallel::hf_convergence_report(&flat, Order::Main, &[10], &[1], 5, None).is_err());
}
