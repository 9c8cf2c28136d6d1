use blindchan::experiments::{
    read_csv, run_all, run_scenario, scenario_fig13, write_csv, EstimatorKind, RunConfig,
    Scenario, ScenarioName,
};

fn quick(estimator: EstimatorKind, rho: f64, ff: f64) -> Scenario {
    let mut s = Scenario::base(ScenarioName::Custom, estimator, rho, ff);
    s.trials = 8;
    s.snr_grid_db = vec![8.0, 16.0];
    s
}

#[test]
fn exact_nearby_init_matches_perfect_csi() {
    let mut s = quick(EstimatorKind::BlindNearbyInit, 1.0, 1.0);
    s.nearby_pilot_snr_db = Some(f64::INFINITY);
    let est = run_scenario(&s).unwrap();
    let mut known = s.clone();
    known.perfect_csi = true;
    let base = run_scenario(&known).unwrap();
    for (e, b) in est.iter().zip(&base) {
        assert_eq!(e.invalid_trials, 0);
        // only the scale fitted from the noisy main-channel pilots is off
        assert!(e.mean_nmse < 1e-2, "nmse {}", e.mean_nmse);
        let sigma = (b.ber * (1.0 - b.ber) / b.bits as f64).sqrt();
        assert!((e.ber - b.ber).abs() <= 3.0 * sigma + 1e-12, "{} vs {}", e.ber, b.ber);
    }
}

#[test]
fn exact_nearby_init_recovers_channel_when_scale_pilots_are_clean() {
    let mut s = quick(EstimatorKind::BlindNearbyInit, 1.0, 1.0);
    s.nearby_pilot_snr_db = Some(f64::INFINITY);
    s.snr_grid_db = vec![60.0];
    let p = &run_scenario(&s).unwrap()[0];
    assert_eq!(p.invalid_trials, 0);
    assert!(p.mean_nmse < 1e-6, "nmse {}", p.mean_nmse);
    assert_eq!(p.bit_errors, 0);
}

#[test]
fn perfect_csi_ber_non_increasing_in_snr() {
    let mut s = Scenario::base(ScenarioName::Custom, EstimatorKind::Pilot, 0.0, 0.98);
    s.perfect_csi = true;
    s.trials = 16;
    s.payload_bits = 8192;
    let pts = run_scenario(&s).unwrap();
    for w in pts.windows(2) {
        assert!(w[0].bits >= 100_000);
        assert!(w[1].ber <= w[0].ber, "{} dB {} > {} dB {}", w[1].snr_db, w[1].ber, w[0].snr_db, w[0].ber);
    }
}

#[test]
fn conservation_holds_for_every_estimator() {
    for kind in [EstimatorKind::Blind, EstimatorKind::Pilot, EstimatorKind::BlindNearbyInit] {
        let s = quick(kind, 0.5, 0.9);
        for p in run_scenario(&s).unwrap() {
            let counted = (p.bits / (s.payload_bits as u64)) as usize;
            assert_eq!(counted + p.invalid_trials, s.trials);
            assert!(p.bit_errors <= p.bits);
        }
    }
}

#[test]
fn fig13_csv_has_three_rows_per_snr() {
    let mut curves = scenario_fig13();
    for s in &mut curves {
        s.trials = 2;
        s.payload_bits = 1024;
    }
    let results = run_all(&curves).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig13.csv");
    write_csv(&results, &path).unwrap();
    let rows = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 3 * curves[0].snr_grid_db.len());
    let rhos: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    assert!(rhos.contains(&0.98) && rhos.contains(&0.68) && rhos.contains(&0.11));
}

#[test]
fn seed_changes_results_and_reruns_do_not() {
    let cfg = RunConfig::parse("scenario = custom\ntrials = 4\nsnr = 10:1:10\npayload_bits = 4096").unwrap();
    let a = cfg.scenarios().unwrap();
    let mut b = a.clone();
    b[0].seed += 1;
    let ra = run_all(&a).unwrap();
    assert_eq!(ra, run_all(&a).unwrap());
    assert_ne!(ra[0].points, run_all(&b).unwrap()[0].points);
}
