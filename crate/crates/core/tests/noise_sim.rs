use rscw::code::{CheckType, HomologyLabel, Pauli, PauliOperator, PureErrorTables, RscCode};
use rscw::noise::{
    generate_dataset, read_dataset, residual_labels, simulate_rounds, two_qubit_pauli, write_dataset, Circuit,
    DatasetGenerator, FaultSet, NoiseModel, NoiseParams,
};

/// Pauli as (x, z) bits.
type P2 = (bool, bool);

fn p2(p: Pauli) -> P2 {
    (p.has_x(), p.has_z())
}

/// CNOT conjugation written out from the generator table
/// X.I -> X.X, I.X -> I.X, Z.I -> Z.I, I.Z -> Z.Z.
fn cnot_table(c: P2, t: P2) -> (P2, P2) {
    let mut out = ((false, false), (false, false));
    let mut mul = |a: (P2, P2)| {
        out.0 .0 ^= a.0 .0;
        out.0 .1 ^= a.0 .1;
        out.1 .0 ^= a.1 .0;
        out.1 .1 ^= a.1 .1;
    };
    if c.0 {
        mul(((true, false), (true, false)));
    }
    if t.0 {
        mul(((false, false), (true, false)));
    }
    if c.1 {
        mul(((false, true), (false, false)));
    }
    if t.1 {
        mul(((false, true), (false, true)));
    }
    out
}

#[test]
fn cnot_truth_table_samples() {
    let (x, y, z, i) = ((true, false), (true, true), (false, true), (false, false));
    assert_eq!(cnot_table(x, i), (x, x));
    assert_eq!(cnot_table(i, z), (z, z));
    assert_eq!(cnot_table(y, i), (y, x));
    assert_eq!(cnot_table(i, y), (z, y));
    assert_eq!(cnot_table(z, x), (z, x));
    assert_eq!(cnot_table(x, z), (y, y));
}

/// Straight-line propagation of a fault set through the schedule, one gate
/// at a time with the truth table above.
fn reference_run(circuit: &Circuit, faults: &FaultSet) -> (Vec<Vec<bool>>, Vec<Vec<bool>>, Vec<P2>) {
    let n = circuit.num_data();
    let nc = circuit.num_checks();
    let gates = circuit.cnots().len();
    let mut frame = vec![(false, false); n + 2 * nc];
    let mut sx = vec![vec![false; nc]; circuit.rounds()];
    let mut sz = sx.clone();
    let mul = |q: &mut P2, p: P2| {
        q.0 ^= p.0;
        q.1 ^= p.1;
    };
    for r in 0..circuit.rounds() {
        for &(pos, p) in &faults.storage {
            if pos / n == r {
                mul(&mut frame[pos % n], p2(p));
            }
        }
        for (g, &(c, t)) in circuit.cnots().iter().enumerate() {
            let (nc_, nt) = cnot_table(frame[c], frame[t]);
            frame[c] = nc_;
            frame[t] = nt;
            for &(pos, idx) in &faults.gate {
                if pos == r * gates + g {
                    let (pc, pt) = two_qubit_pauli(idx);
                    mul(&mut frame[c], p2(pc));
                    mul(&mut frame[t], p2(pt));
                }
            }
        }
        for a in 0..nc {
            // X-check ancillas are read in the X basis, Z-check ancillas in Z.
            sx[r][a] = frame[n + a].1;
            sz[r][a] = frame[n + nc + a].0;
        }
        for &m in &faults.measurement {
            if m / (2 * nc) == r {
                let a = m % (2 * nc);
                if a < nc {
                    sx[r][a] ^= true;
                } else {
                    sz[r][a - nc] ^= true;
                }
            }
        }
        for f in frame[n..].iter_mut() {
            *f = (false, false);
        }
    }
    frame.truncate(n);
    (sx, sz, frame)
}

fn single_faults(circuit: &Circuit) -> Vec<(FaultSet, f64)> {
    // Weights are per unit of p: storage p/3 per Pauli, gates p/15 per pair.
    let mut out = Vec::new();
    for pos in 0..circuit.storage_sites() {
        for k in 1..4u8 {
            let f = FaultSet {
                storage: vec![(pos, Pauli::from_index(k))],
                ..FaultSet::default()
            };
            out.push((f, 1.0 / 3.0));
        }
    }
    for pos in 0..circuit.gate_sites() {
        for k in 1..16u8 {
            let f = FaultSet {
                gate: vec![(pos, k)],
                ..FaultSet::default()
            };
            out.push((f, 1.0 / 15.0));
        }
    }
    for pos in 0..circuit.measurement_sites() {
        let f = FaultSet {
            measurement: vec![pos],
            ..FaultSet::default()
        };
        out.push((f, 1.0));
    }
    out
}

#[test]
fn frame_propagation_matches_gate_truth_table() {
    let code = RscCode::new(3).unwrap();
    let circuit = Circuit::new(&code, 2).unwrap();
    let id = PauliOperator::identity(9);
    for (faults, _) in single_faults(&circuit) {
        let got = circuit.execute(&id, &faults).unwrap();
        let (sx, sz, frame) = reference_run(&circuit, &faults);
        for r in 0..2 {
            for a in 0..code.num_checks() {
                assert_eq!(got.syndromes.x.get(r, a), sx[r][a], "{faults:?}");
                assert_eq!(got.syndromes.z.get(r, a), sz[r][a], "{faults:?}");
            }
        }
        for (q, &(x, z)) in frame.iter().enumerate() {
            assert_eq!((got.frame.x_bits().get(q), got.frame.z_bits().get(q)), (x, z), "{faults:?}");
        }
    }
}

#[test]
fn data_errors_and_readout_flips() {
    let code = RscCode::new(5).unwrap();
    let circuit = Circuit::new(&code, 3).unwrap();
    let n = code.num_data();
    // An X error already present is seen by Z checks in every round.
    let initial = PauliOperator::x_on(n, &[12]);
    let out = circuit.execute(&initial, &FaultSet::default()).unwrap();
    let s = code.syndrome(&initial, CheckType::Z).unwrap();
    for r in 0..3 {
        for a in 0..code.num_checks() {
            assert_eq!(out.syndromes.z.get(r, a), s.get(a));
            assert!(!out.syndromes.x.get(r, a));
        }
    }
    assert_eq!(out.frame, initial);

    let nc = code.num_checks();
    let flip = FaultSet {
        measurement: vec![2 * nc + 3],
        ..FaultSet::default()
    };
    let id = PauliOperator::identity(n);
    let out = circuit.execute(&id, &flip).unwrap();
    assert_eq!(out.syndromes.hamming_weight(), 1);
    assert!(out.syndromes.x.get(1, 3));
    assert!(out.frame.is_identity());
}

#[test]
fn zero_noise_is_silent() {
    let code = RscCode::new(5).unwrap();
    let tables = PureErrorTables::build(&code);
    let g = DatasetGenerator::new(&code, NoiseParams::noiseless(), 5, 1).unwrap();
    for s in g.collect(0, 200).unwrap() {
        assert_eq!(s.syndromes.hamming_weight(), 0);
        assert!(s.residual.is_identity());
        for t in CheckType::BOTH {
            assert_eq!(s.class(t), HomologyLabel::Trivial);
            assert!(s.s(t).is_zero());
        }
    }
    let one = simulate_rounds(&code, &NoiseParams::noiseless(), 2, 3).unwrap();
    assert!(one.residual.is_identity());
    assert_eq!(tables.get(CheckType::X).len(), 12);
}

#[test]
fn labels_are_consistent_on_every_sample() {
    let code = RscCode::new(5).unwrap();
    let tables = PureErrorTables::build(&code);
    let params = NoiseParams::uniform(0.01, NoiseModel::CircuitLevel).unwrap();
    let g = DatasetGenerator::new(&code, params, 5, 11).unwrap();
    for s in g.collect(0, 2000).unwrap() {
        for t in CheckType::BOTH {
            let syn = code.syndrome(&s.residual, t).unwrap();
            assert_eq!(&syn, s.s(t));
            let mut clean = match t.detected() {
                Pauli::X => s.residual.x_part(),
                _ => s.residual.z_part(),
            };
            clean *= &tables.get(t).pure_error(&syn).unwrap();
            assert_eq!(code.homology_class(&clean, t).unwrap(), s.class(t));
        }
        let (classes, pieces) = residual_labels(&code, &tables, &s.residual).unwrap();
        assert_eq!(classes, s.label_class);
        assert_eq!(pieces, s.label_s);
    }
}

#[test]
fn datasets_are_deterministic_and_round_trip() {
    let code = RscCode::new(3).unwrap();
    let params = NoiseParams::uniform(0.02, NoiseModel::CircuitLevel).unwrap();
    let bytes = |seed| {
        let g = DatasetGenerator::new(&code, params, 3, seed).unwrap();
        let samples = g.collect(0, 1000).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &g.header(1000), samples.iter()).unwrap();
        (buf, samples)
    };
    let (a, samples) = bytes(5);
    let (b, _) = bytes(5);
    let (c, _) = bytes(6);
    assert_eq!(a, b);
    assert_ne!(a, c);
    let (header, back) = read_dataset(&mut &a[..]).unwrap();
    assert_eq!(header.count, 1000);
    assert_eq!(back, samples);
    let streamed = generate_dataset(&code, &params, 3, 1000, 5).unwrap();
    assert_eq!(streamed, samples);
    // Samples are addressed by index, so a suffix does not depend on the prefix.
    let g = DatasetGenerator::new(&code, params, 3, 5).unwrap();
    assert_eq!(g.collect(400, 10).unwrap(), samples[400..410]);
}

/// Per-location probability, at unit p, of a single fault that leaves a
/// syndrome on the residual.
fn single_fault_rates(code: &RscCode, circuit: &Circuit) -> Vec<f64> {
    let id = PauliOperator::identity(code.num_data());
    let mut per_site: std::collections::BTreeMap<(u8, usize), f64> = Default::default();
    for (f, w) in single_faults(circuit) {
        let site = match (f.storage.first(), f.gate.first(), f.measurement.first()) {
            (Some(&(pos, _)), _, _) => (0, pos),
            (_, Some(&(pos, _)), _) => (1, pos),
            (_, _, Some(&pos)) => (2, pos),
            _ => unreachable!(),
        };
        let out = circuit.execute(&id, &f).unwrap();
        let visible = CheckType::BOTH
            .iter()
            .any(|&t| !code.syndrome(&out.frame, t).unwrap().is_zero());
        *per_site.entry(site).or_default() += if visible { w } else { 0.0 };
    }
    per_site.into_values().collect()
}

#[test]
fn residual_syndrome_rate_matches_single_fault_enumeration() {
    let code = RscCode::new(3).unwrap();
    let circuit = Circuit::new(&code, 3).unwrap();
    let rates = single_fault_rates(&code, &circuit);
    let lambda: f64 = rates.iter().sum();
    for (p, n) in [(0.001, 200_000u64), (0.01, 50_000)] {
        let params = NoiseParams::uniform(p, NoiseModel::CircuitLevel).unwrap();
        let g = DatasetGenerator::new(&code, params, 3, 21).unwrap();
        let hits = g
            .stream(0, n)
            .filter(|s| {
                let s = s.as_ref().unwrap();
                CheckType::BOTH.iter().any(|&t| !s.s(t).is_zero())
            })
            .count();
        let empirical = hits as f64 / n as f64;
        // Sum of single-fault rates, and the same rates combined as
        // independent locations; they agree to first order in p.
        let summed = lambda * p;
        let independent = 1.0 - rates.iter().map(|r| 1.0 - r * p).product::<f64>();
        eprintln!("p={p}: empirical {empirical:.5}, summed {summed:.5}, independent {independent:.5}");
        let predicted = if summed < 0.1 { summed } else { independent };
        let rel = (empirical - predicted).abs() / predicted;
        assert!(rel < 0.2, "p={p}: {empirical} vs {predicted}");
    }
}

#[test]
fn circuit_noise_raises_mean_weight() {
    let code = RscCode::new(5).unwrap();
    let mean = |model| {
        let params = NoiseParams::uniform(0.006, model).unwrap();
        let g = DatasetGenerator::new(&code, params, 10, 2).unwrap();
        let n = 5000;
        let total: usize = g.stream(0, n).map(|s| s.unwrap().syndromes.hamming_weight()).sum();
        total as f64 / n as f64
    };
    assert!(mean(NoiseModel::CircuitLevel) > mean(NoiseModel::Phenomenological));
}
