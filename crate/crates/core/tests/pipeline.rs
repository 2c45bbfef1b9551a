use qrg_core::bank::{make_challenge, verify_token, Thresholds};
use qrg_core::cracker::{
    batches_from_constraints, batches_from_log, counterfeit, extract_constraints,
    read_constraints_csv, recover, salt_space, write_constraints_csv,
};
use qrg_core::harness::{run_attack, run_table1, RunConfig};
use qrg_core::mint::{mint_token, HashId};
use qrg_core::rng::SeedRoot;
use qrg_core::terminal::{honest_respond, read_sniff_log, write_sniff_log};

#[test]
fn sniffed_traffic_yields_working_counterfeits() {
    let cfg = RunConfig::default();
    let report = run_attack(&cfg).unwrap();
    assert!(report.recovered_truth(), "{}", report.result.to_json());

    let fake = counterfeit(&report.result, "424242").unwrap();
    let genuine = mint_token(&cfg.encoding, "424242");
    assert_eq!(fake, genuine);
    let mut rng = SeedRoot(3).stream("check");
    let challenge = make_challenge("424242", fake.len(), &mut rng);
    let response = honest_respond(&fake, &challenge, &mut rng).unwrap();
    let v = verify_token(&genuine, &challenge, &response, Thresholds::default()).unwrap();
    assert!(v.accepted);
    assert_eq!(v.error_rate, 0.0);
}

#[test]
fn artifacts_round_trip_to_the_same_result() {
    let cfg = RunConfig::default();
    let report = run_attack(&cfg).unwrap();

    let mut log = Vec::new();
    write_sniff_log(&report.records, &mut log).unwrap();
    let records = read_sniff_log(log.as_slice()).unwrap();
    assert_eq!(records, report.records);

    let mut csv = Vec::new();
    write_constraints_csv(&report.constraints, &mut csv).unwrap();
    let constraints = read_constraints_csv(csv.as_slice()).unwrap();
    assert_eq!(constraints, extract_constraints(&records));

    let salts = salt_space(3);
    let hashes = [cfg.encoding.hash];
    let from_log = recover(
        &batches_from_log(&records),
        &hashes,
        &salts,
        &cfg.encoding,
        &cfg.recovery,
    )
    .unwrap();
    let from_csv = recover(
        &batches_from_constraints(&constraints),
        &hashes,
        &salts,
        &cfg.encoding,
        &cfg.recovery,
    )
    .unwrap();
    assert_eq!(from_log.spec, report.result.spec);
    assert_eq!(from_csv.spec, report.result.spec);
}

#[test]
fn same_seed_same_run() {
    let cfg = RunConfig::default();
    let (a, b) = (run_attack(&cfg).unwrap(), run_attack(&cfg).unwrap());
    assert_eq!(a.records, b.records);
    assert_eq!(a.result, b.result);
}

#[test]
fn table1_rows_overlap() {
    let rows = run_table1(&RunConfig::default(), 6).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.hash).collect::<Vec<_>>(),
        HashId::ALL.to_vec()
    );
    for r in &rows {
        assert_eq!(r.successes, 6, "{:?}", r.hash);
        assert!(r.mean.is_finite() && r.std_error > 0.0);
    }
    // The hash function does not matter: every pair of rows is within 3 SE.
    for a in &rows {
        for b in &rows {
            let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!(
                (a.mean - b.mean).abs() < 3.0 * se,
                "{:?} vs {:?}",
                a.hash,
                b.hash
            );
        }
    }
}
