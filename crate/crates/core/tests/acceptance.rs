//! Acceptance run: one line per criterion, non-zero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use rscw::code::{BitRow, CheckType, HomologyLabel, PauliOperator, PureErrorTables, RscCode};
use rscw::decoders::{MatchingProblem, MtlndDecoder, MwpmDecoder};
use rscw::harness::{estimate_ler, hamming_stats};
use rscw::neural::{
    count_multiplications, default_spec, quantize, spec_with_widths, FloatNetwork, FloatWeights, QuantizedNetwork,
};
use rscw::noise::{stream_rng, DatasetGenerator, LabeledSample, NoiseModel, NoiseParams};
use rscw::npe::{allocate, compile, continuous_allocation, pipeline_latency, NpeConfig, Simulator};
use rscw::training::{examples, train, Optimizer, TrainConfig};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

// ---- AC1 -------------------------------------------------------------

fn oracle_syndrome(code: &RscCode, e: &PauliOperator, t: CheckType) -> BitRow {
    let bits = code.checks(t).iter().map(|c| {
        c.support.iter().fold(false, |acc, &q| {
            acc ^ match t {
                CheckType::X => e.z_bits().get(q),
                CheckType::Z => e.x_bits().get(q),
            }
        })
    });
    BitRow::from_bools(bits)
}

fn ac1() -> Verdict {
    let start = Instant::now();
    let mut checked = 0usize;
    for l in [3usize, 5, 7] {
        let code = RscCode::new(l).unwrap();
        let tables = PureErrorTables::build(&code);
        let mut rng = stream_rng(l as u64, 1);
        for t in CheckType::BOTH {
            let table = tables.get(t);
            let n = table.len();
            for (k, entry) in table.entries().iter().enumerate() {
                let mut unit = BitRow::zeros(n);
                unit.set(k, true);
                if oracle_syndrome(&code, entry, t) != unit {
                    return verdict(false, format!("unit {k} of {t:?} at L={l}"));
                }
            }
            let cases: Vec<(bool, BitRow)> = if l == 3 {
                (0..1u64 << n)
                    .flat_map(|v| {
                        let mut s = BitRow::zeros(n);
                        s.set_field(0, n, v);
                        [(false, s.clone()), (true, s)]
                    })
                    .collect()
            } else {
                (0..10_000)
                    .map(|_| (rng.gen_bool(0.5), BitRow::from_bools((0..n).map(|_| rng.gen_bool(0.5)))))
                    .collect()
            };
            for (class, s) in cases {
                let class = HomologyLabel::from_bit(class);
                let e = table.combine_error(&code, class, &s).unwrap();
                if oracle_syndrome(&code, &e, t) != s {
                    return verdict(false, format!("combine_error syndrome at L={l}"));
                }
                let mut back = e;
                back *= &table.pure_error(&s).unwrap();
                if code.homology_class(&back, t).unwrap() != class {
                    return verdict(false, format!("combine_error class at L={l}"));
                }
                checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(secs < 10.0, format!("{checked} combine_error checks, units for L=3,5,7, {secs:.2} s (< 10 s)"))
}

// ---- AC2 -------------------------------------------------------------

fn ac2() -> Verdict {
    let mut ok = true;
    for l in [3usize, 5, 7, 9, 11, 13] {
        let bits = PureErrorTables::build(&RscCode::new(l).unwrap()).storage_bits();
        ok &= bits == l.pow(4) - l * l;
    }
    let l13 = PureErrorTables::build(&RscCode::new(13).unwrap()).storage_bits();
    ok &= l13 == 28392;
    verdict(ok, format!("L^4 - L^2 for L=3..13; L=13: {l13} bits = {:.2} KB", l13 as f64 / 8.0 / 1000.0))
}

// ---- AC3 -------------------------------------------------------------

fn ac3() -> Verdict {
    let start = Instant::now();
    let code = RscCode::new(5).unwrap();
    let circuit = NoiseParams::uniform(0.006, NoiseModel::CircuitLevel).unwrap();
    let phenom = NoiseParams::uniform(0.006, NoiseModel::Phenomenological).unwrap();
    let c = hamming_stats(&code, &circuit, 10, 1_000_000, 1).unwrap();
    let p = hamming_stats(&code, &phenom, 10, 200_000, 2).unwrap();
    let tail = c.detection_of(CheckType::X).prob(23);
    let target = 1.62e-4;
    let within = tail >= target / 3.0 && tail <= target * 3.0;
    let (cm, pm) = (c.detection_of(CheckType::X).mean(), p.detection_of(CheckType::X).mean());
    let raw = (c.raw_total.mean(), p.raw_total.mean());
    let secs = start.elapsed().as_secs_f64();
    verdict(
        within && cm > pm && raw.0 > raw.1 && secs < 600.0,
        format!(
            "P[HW=23] = {tail:.3e} (target 1.62e-4 within 3x); mean HW circuit {cm:.2} > phenomenological {pm:.2}; {secs:.0} s"
        ),
    )
}

// ---- AC4 -------------------------------------------------------------

fn ac4() -> Verdict {
    let start = Instant::now();
    let spec = spec_with_widths(3, 3, CheckType::Z, common::tiny_widths()).unwrap();
    let net = FloatNetwork::new(spec.clone(), common::random_weights(&spec, 3)).unwrap();
    let batch = common::random_examples(&net, 4, 8);
    let (gap, layers) = common::finite_difference_gap(&net, &batch, 100, 1e-4, 1);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        gap <= 1e-4 && secs < 60.0,
        format!("worst relative gap {gap:.2e} over 100 probes, {layers} layers (conv, dense relu, dense identity); {secs:.1} s"),
    )
}

// ---- shared trained L=3, T=3 decoder ---------------------------------

struct Trained {
    float: [FloatNetwork<f32>; 2],
    quant: [QuantizedNetwork; 2],
    seconds: f64,
}

fn train_l3() -> Trained {
    let start = Instant::now();
    let code = RscCode::new(3).unwrap();
    let params = NoiseParams::uniform(0.004, NoiseModel::CircuitLevel).unwrap();
    let gen = DatasetGenerator::new(&code, params, 3, 1).unwrap();
    let data: Vec<LabeledSample> = gen.collect(0, 100_000).unwrap();
    let config = TrainConfig {
        batch_size: 256,
        epochs: 4,
        learning_rate: 3e-3,
        optimizer: Optimizer::adam(),
        seed: 1,
        shuffle: true,
    };
    let one = |t: CheckType| {
        let spec = default_spec(3, 3, t).unwrap();
        let out = train::<f32>(&spec, &data, &config).unwrap();
        let net = FloatNetwork::new(spec, out.weights).unwrap();
        let calib: Vec<_> = data.iter().take(2000).map(|s| s.syndromes.get(t).clone()).collect();
        let q = quantize(&net, &calib).unwrap();
        (net, q)
    };
    let (fx, qx) = one(CheckType::X);
    let (fz, qz) = one(CheckType::Z);
    Trained {
        float: [fx, fz],
        quant: [qx, qz],
        seconds: start.elapsed().as_secs_f64(),
    }
}

// ---- AC5 -------------------------------------------------------------

fn ac5(tr: &Trained) -> Verdict {
    let code = RscCode::new(3).unwrap();
    let params = NoiseParams::uniform(0.004, NoiseModel::CircuitLevel).unwrap();
    // Held-out stream, disjoint from the training indices.
    let gen = DatasetGenerator::new(&code, params, 3, 1).unwrap();
    let held = gen.collect(500_000, 10_000).unwrap();
    let mut worst = 1.0f64;
    let mut parts = Vec::new();
    for t in CheckType::BOTH {
        let (f, q) = (&tr.float[t.index()], &tr.quant[t.index()]);
        let ex = examples(f, &held).unwrap();
        let agree = held
            .iter()
            .zip(&ex)
            .filter(|(s, e)| {
                f.forward_input(&e.input).unwrap().argmax() == q.forward(s.syndromes.get(t)).unwrap().argmax()
            })
            .count();
        let frac = agree as f64 / held.len() as f64;
        worst = worst.min(frac);
        parts.push(format!("{t:?} {:.2}%", 100.0 * frac));
    }
    verdict(
        worst >= 0.99,
        format!("all-head argmax agreement over 10^4 samples: {} (>= 99%)", parts.join(", ")),
    )
}

// ---- AC6 -------------------------------------------------------------

fn ac6(tr: &Trained) -> Verdict {
    let code = RscCode::new(3).unwrap();
    let params = NoiseParams::uniform(0.004, NoiseModel::CircuitLevel).unwrap();
    let mtlnd = MtlndDecoder::quantized(
        &code,
        PureErrorTables::build(&code),
        tr.quant[0].clone(),
        tr.quant[1].clone(),
    )
    .unwrap();
    let mwpm = MwpmDecoder::new(&code, 3).unwrap();
    let a = estimate_ler(&code, &params, 3, &mtlnd, 400, 10_000_000, 7).unwrap().result;
    let b = estimate_ler(&code, &params, 3, &mwpm, 400, 10_000_000, 7).unwrap().result;
    verdict(
        a.ler <= 2.0 * b.ler && a.censored == 0 && b.censored == 0,
        format!(
            "p=0.004, 400 paired trajectories: MTLND LER {:.3e} [{:.2e}, {:.2e}] vs MWPM {:.3e} [{:.2e}, {:.2e}], ratio {:.2} (<= 2); training {:.0} s",
            a.ler,
            a.ci.0,
            a.ci.1,
            b.ler,
            b.ci.0,
            b.ci.1,
            a.ler / b.ler,
            tr.seconds
        ),
    )
}

// ---- AC7 -------------------------------------------------------------

fn brute_matching(p: &MatchingProblem, left: &mut Vec<usize>) -> u64 {
    let Some(a) = left.pop() else { return 0 };
    let mut best = p.boundary[a] as u64 + brute_matching(p, left);
    for i in 0..left.len() {
        let b = left.remove(i);
        best = best.min(p.pair[a][b] as u64 + brute_matching(p, left));
        left.insert(i, b);
    }
    left.push(a);
    best
}

fn ac7() -> Verdict {
    let mut rng = stream_rng(77, 0);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(0..=6);
        let mut pair = vec![vec![0u32; k]; k];
        for i in 0..k {
            for j in 0..i {
                let w = rng.gen_range(1..20);
                pair[i][j] = w;
                pair[j][i] = w;
            }
        }
        let boundary = (0..k).map(|_| rng.gen_range(1..20)).collect();
        let p = MatchingProblem { pair, boundary };
        let dp = p.solve().unwrap();
        let mut left: Vec<usize> = (0..k).collect();
        let brute = brute_matching(&p, &mut left);
        if dp.weight != brute || p.weight_of(&dp.partner) != Some(dp.weight) {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("1000 random instances with <= 6 defects, {mismatches} mismatches"))
}

// ---- AC8 -------------------------------------------------------------

fn ac8() -> Verdict {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for l in [3usize, 5, 7, 9, 11] {
        let t = if l % 4 == 1 { CheckType::X } else { CheckType::Z };
        let spec = default_spec(l, l, t).unwrap();
        let w = FloatWeights::<f32>::glorot(&spec, &mut stream_rng(l as u64, 8));
        let net = FloatNetwork::new(spec, w).unwrap();
        let checks = (l * l - 1) / 2;
        let calib = common::random_syndromes(l, checks, 0.1, l as u64, 64);
        let q = quantize(&net, &calib).unwrap();
        let prog = compile(&q.spec, &NpeConfig::default()).unwrap();
        let sim = Simulator::new(&prog, &q).unwrap();
        let inputs = common::random_syndromes(l, checks, 0.1, 1000 + l as u64, 10_000);
        let mut bad = 0;
        for s in &inputs {
            let out = sim.run(s, false).unwrap();
            if out.outputs != rscw::neural::forward_quantized(&q, s).unwrap() || out.cycles != prog.cycles {
                bad += 1;
            }
        }
        ok &= bad == 0;
        parts.push(format!("L={l}: {bad} mismatches, {} cycles", prog.cycles));
    }
    verdict(
        ok,
        format!("10^4 inputs per default spec (T=L); {}; {:.0} s", parts.join("; "), start.elapsed().as_secs_f64()),
    )
}

// ---- AC9 -------------------------------------------------------------

fn exhaustive_alloc(work: &[u64], mult: &[u64], left: u64) -> Option<f64> {
    let (&m, &a) = (work.first()?, mult.first()?);
    if work.len() == 1 {
        return (left >= a && left.is_multiple_of(a)).then(|| (a * m) as f64 / (left / a) as f64);
    }
    let mut best: Option<f64> = None;
    let mut c = 1;
    while a * c < left {
        if let Some(rest) = exhaustive_alloc(&work[1..], &mult[1..], left - a * c) {
            let v = (a * m) as f64 / c as f64 + rest;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        c += 1;
    }
    best
}

fn ac9() -> Verdict {
    let mut rng = stream_rng(99, 0);
    let (mut integer_bad, mut closed_gap) = (0, 0.0f64);
    for _ in 0..100 {
        let k = rng.gen_range(1..=4);
        let work: Vec<u64> = (0..k).map(|_| rng.gen_range(1..100_000)).collect();
        let mult: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
        let total = rng.gen_range(1..=64);
        let best = exhaustive_alloc(&work, &mult, total);
        match (allocate(&work, &mult, total), best) {
            (Ok(a), Some(b)) if (a.latency - b).abs() <= 1e-9 * b => {}
            (Err(_), None) => {}
            _ => integer_bad += 1,
        }
        let m: Vec<f64> = work.iter().map(|&v| v as f64).collect();
        let al: Vec<f64> = mult.iter().map(|&v| v as f64).collect();
        let c = continuous_allocation(&m, &al, total as f64);
        let denom: f64 = m.iter().zip(&al).map(|(m, a)| a * m.sqrt()).sum();
        for (cj, mj) in c.iter().zip(&m) {
            let want = total as f64 * mj.sqrt() / denom;
            closed_gap = closed_gap.max((cj - want).abs() / want);
        }
    }
    verdict(
        integer_bad == 0 && closed_gap <= 1e-9,
        format!("100 draws (<= 4 layers, C <= 64): {integer_bad} integer mismatches; closed-form relative gap {closed_gap:.1e}"),
    )
}

// ---- AC10 ------------------------------------------------------------

fn ac10() -> Verdict {
    let mut mults = Vec::new();
    let mut params = Vec::new();
    let mut parts = Vec::new();
    for l in [3usize, 5, 7, 9, 11] {
        let spec = default_spec(l, l, CheckType::Z).unwrap();
        let m = count_multiplications(&spec) as f64 / (l * l * l) as f64;
        let p = spec.param_count() as f64 / (l * l) as f64;
        parts.push(format!("L={l}: mult/L^3 {m:.0}, params/L^2 {p:.0}"));
        mults.push(m);
        params.push(p);
    }
    // Bounded: no later distance exceeds the smallest-distance constant.
    let ok = mults.iter().all(|&m| m <= 4.0 * mults[0]) && params.iter().all(|&p| p <= 4.0 * params[0]);
    verdict(ok, format!("{} (bound 4x the L=3 value)", parts.join("; ")))
}

// ---- AC11 ------------------------------------------------------------

fn ac11() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for l in [3usize, 5, 7, 9, 11] {
        let spec = default_spec(l, l, CheckType::X).unwrap();
        let prog = compile(&spec, &NpeConfig::default()).unwrap();
        let full = prog.latency_seconds();
        ok &= pipeline_latency(&prog, 0.0, l).unwrap() == full;
        let mut best = full;
        for period in [1e-9, 1e-8, 1e-7, 1e-6, 1e-5, f64::INFINITY] {
            let p = pipeline_latency(&prog, period, l).unwrap();
            ok &= p <= full;
            best = best.min(p);
        }
        parts.push(format!("L={l}: full {:.0} ns, windowed >= {:.0} ns", full * 1e9, best * 1e9));
    }
    verdict(ok, format!("period 0 equals full; {}", parts.join("; ")))
}

fn main() {
    let mut all = true;
    let mut report = |name: &str, what: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name} {what}: {} ({:.1?})", v.detail, Duration::from_secs_f64(start.elapsed().as_secs_f64()));
        all &= v.pass;
    };
    report("AC-1", "pure-error identities", &mut ac1);
    report("AC-2", "table memory", &mut ac2);
    report("AC-3", "Hamming-weight tail", &mut ac3);
    report("AC-4", "gradient check", &mut ac4);
    let trained = train_l3();
    report("AC-5", "quantization fidelity", &mut || ac5(&trained));
    report("AC-6", "desk-scale accuracy", &mut || ac6(&trained));
    report("AC-7", "matching oracle", &mut ac7);
    report("AC-8", "engine bit-exactness", &mut ac8);
    report("AC-9", "allocation optimality", &mut ac9);
    report("AC-10", "complexity scaling", &mut ac10);
    report("AC-11", "pipeline sanity", &mut ac11);
    if !all {
        std::process::exit(1);
    }
}
