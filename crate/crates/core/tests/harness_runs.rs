use rscw::code::RscCode;
use rscw::decoders::{IdentityDecoder, MwpmDecoder};
use rscw::harness::{
    estimate_ler, hamming_stats, ler_from_tau, wilson, write_raw_csv, write_summary_csv, DecoderKind, RunConfig,
    SUMMARY_HEADER,
};
use rscw::noise::{NoiseModel, NoiseParams};

fn csvs(code: &RscCode, params: &NoiseParams, seed: u64) -> (String, String) {
    let dec = MwpmDecoder::new(code, 3).unwrap();
    let run = estimate_ler(code, params, 3, &dec, 60, 2_000, seed).unwrap();
    let (mut raw, mut summary) = (Vec::new(), Vec::new());
    write_raw_csv(&mut raw, &run.runs).unwrap();
    write_summary_csv(&mut summary, &[run.result]).unwrap();
    (String::from_utf8(raw).unwrap(), String::from_utf8(summary).unwrap())
}

#[test]
fn same_seed_same_bytes() {
    let code = RscCode::new(3).unwrap();
    let params = NoiseParams::uniform(0.01, NoiseModel::CircuitLevel).unwrap();
    let a = csvs(&code, &params, 17);
    assert_eq!(a, csvs(&code, &params, 17));
    assert_ne!(a.0, csvs(&code, &params, 18).0);
    assert!(a.1.starts_with(SUMMARY_HEADER));
}

#[test]
fn rate_recomputed_from_raw_rows() {
    let code = RscCode::new(3).unwrap();
    let params = NoiseParams::uniform(0.01, NoiseModel::CircuitLevel).unwrap();
    let (raw, summary) = csvs(&code, &params, 2);
    let mut lines = raw.lines();
    assert_eq!(lines.next(), Some("trajectory,cycles,censored,failed_x,failed_z,overflows"));
    let cycles: Vec<u64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(cycles.len(), 60);
    let total: u64 = cycles.iter().sum();
    let want = 1.0 / (3.0 * (total as f64 / 60.0));

    let header: Vec<&str> = SUMMARY_HEADER.split(',').collect();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    let field = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(field("ler").parse::<f64>().unwrap(), want);
    assert_eq!(field("total_cycles").parse::<u64>().unwrap(), total);
    assert_eq!(field("decoder"), "mwpm");
}

#[test]
fn noiseless_runs_are_censored() {
    let code = RscCode::new(3).unwrap();
    let dec = MwpmDecoder::new(&code, 3).unwrap();
    let run = estimate_ler(&code, &NoiseParams::noiseless(), 3, &dec, 8, 50, 1).unwrap();
    assert!(run.runs.iter().all(|t| t.censored && t.cycles == 50 && t.failed == [false; 2]));
    let r = &run.result;
    assert!(r.upper_bound_only());
    assert_eq!(r.censored, 8);
    assert_eq!(r.ler, 1.0 / 150.0);
    assert!(r.ci.0 <= r.ler && r.ler <= r.ci.1);
}

#[test]
fn doing_nothing_at_high_noise_fails_fast() {
    let code = RscCode::new(3).unwrap();
    let params = NoiseParams::uniform(0.05, NoiseModel::CircuitLevel).unwrap();
    let run = estimate_ler(&code, &params, 3, &IdentityDecoder::new(&code), 100, 1_000, 3).unwrap();
    assert_eq!(run.result.censored, 0);
    assert!(run.result.mean_tau < 5.0, "{}", run.result.mean_tau);
    assert!(run.runs.iter().all(|t| t.failed[0] || t.failed[1]));
}

#[test]
fn tau_conversion() {
    assert!((ler_from_tau(50.0, 10) - 2e-3).abs() < 1e-15);
    assert_eq!(ler_from_tau(1.0, 1), 1.0);
}

#[test]
fn wilson_endpoints_solve_the_score_equation() {
    // Each endpoint q satisfies (k/n - q)^2 = z^2 q (1 - q) / n.
    for (k, n) in [(1u64, 10u64), (7, 20), (400, 20_000), (3, 3), (0, 50)] {
        let z = 1.96;
        let (lo, hi) = wilson(k, n, z);
        let p = k as f64 / n as f64;
        assert!(lo <= p && p <= hi);
        for q in [lo, hi] {
            if q == 0.0 || q == 1.0 {
                continue;
            }
            let lhs = (p - q) * (p - q);
            let rhs = z * z * q * (1.0 - q) / n as f64;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-12), "k={k} n={n}");
        }
    }
    assert_eq!(wilson(0, 0, 1.96), (0.0, 1.0));
}

#[test]
fn matching_gets_better_as_noise_drops() {
    let code = RscCode::new(3).unwrap();
    let dec = MwpmDecoder::new(&code, 3).unwrap();
    let mut last = 1.0;
    for p in [0.008, 0.004, 0.002] {
        let params = NoiseParams::uniform(p, NoiseModel::CircuitLevel).unwrap();
        let r = estimate_ler(&code, &params, 3, &dec, 400, 1_000_000, 5).unwrap().result;
        assert_eq!(r.censored, 0);
        assert!(r.ler < last, "p={p}: {} !< {last}", r.ler);
        assert!(r.ci.0 <= r.ler && r.ler <= r.ci.1);
        last = r.ler;
    }
}

#[test]
fn config_sources_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "L=5\nT=5\ndecoder=lut\np=0.003\ntrajectories=500\n").unwrap();
    let env = vec![("RSCW_DECODER".to_string(), "mwpm".to_string())];
    let c = RunConfig::load(Some(&path), env.clone(), &[]).unwrap();
    assert_eq!((c.distance, c.decoder, c.p, c.trajectories), (5, DecoderKind::Mwpm, 0.003, 500));
    let flags = vec![("decoder".to_string(), "identity".to_string())];
    assert_eq!(RunConfig::load(Some(&path), env, &flags).unwrap().decoder, DecoderKind::Identity);

    let few = vec![("trajectories".to_string(), "10".to_string())];
    assert!(RunConfig::load(None, Vec::new(), &few).is_err());
    let allowed = vec![few[0].clone(), ("allow_few_trajectories".to_string(), "yes".to_string())];
    assert_eq!(RunConfig::load(None, Vec::new(), &allowed).unwrap().trajectories, 10);
    assert!(RunConfig::load(None, Vec::new(), &[("L".to_string(), "4".to_string())]).is_err());
    assert!(RunConfig::load(None, Vec::new(), &[("colour".to_string(), "red".to_string())]).is_err());
}

#[test]
fn hamming_weight_without_noise_is_zero() {
    let code = RscCode::new(5).unwrap();
    let s = hamming_stats(&code, &NoiseParams::noiseless(), 5, 200, 1).unwrap();
    assert_eq!(s.raw_total.prob(0), 1.0);
    assert_eq!(s.detection_total.prob(0), 1.0);
    assert_eq!(s.detection_total.mean(), 0.0);

    let noisy = NoiseParams::uniform(0.01, NoiseModel::CircuitLevel).unwrap();
    let s = hamming_stats(&code, &noisy, 5, 2_000, 2).unwrap();
    let parts = s.detection[0].mean() + s.detection[1].mean();
    assert!((s.detection_total.mean() - parts).abs() < 1e-9);
    assert_eq!(s.detection_total.samples, 2_000);
    assert!(s.detection_total.first_below(1e-3) > s.detection_total.mode());
}
