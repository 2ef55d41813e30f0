mod common;

use proptest::prelude::*;
use rscw::code::CheckType;
use rscw::neural::{default_spec, quantize, spec_with_widths, FloatNetwork, FloatWeights, NetworkSpec, SpecWidths};
use rscw::noise::stream_rng;
use rscw::npe::{
    allocate, allocation_latency, compile, continuous_allocation, layer_groups, pipeline_latency, Instruction,
    Lowering, NpeConfig, SfMode, Simulator,
};

fn engine(c: usize, w: usize) -> NpeConfig {
    NpeConfig {
        mau_count: c,
        mau_width: w,
        ..NpeConfig::default()
    }
}

/// Issues a layer needs, from the tap rule written out directly: the
/// smallest power-of-two group of MAUs (at least two) whose lanes cover
/// the dot product, or full-width chunks when none does.
fn expected_issues(fan_in: usize, outputs: usize, c: usize, w: usize) -> usize {
    if fan_in <= c * w {
        let mut group = 2;
        while group * w < fan_in {
            group *= 2;
        }
        outputs.div_ceil(c / group)
    } else {
        outputs * fan_in.div_ceil(c * w)
    }
}

fn small_widths() -> SpecWidths {
    SpecWidths {
        conv_channels: 4,
        frontend_width: 16,
        head_hidden: 8,
        piece_size: 2,
    }
}

fn qnet(spec: NetworkSpec, seed: u64) -> rscw::neural::QuantizedNetwork {
    let w = FloatWeights::<f32>::glorot(&spec, &mut stream_rng(seed, 1));
    let calib = common::random_syndromes(spec.rounds, spec.num_checks(), 0.2, seed, 32);
    quantize(&FloatNetwork::new(spec, w).unwrap(), &calib).unwrap()
}

#[test]
fn issue_counts_match_the_tap_rule() {
    let specs = [
        spec_with_widths(3, 3, CheckType::Z, small_widths()).unwrap(),
        spec_with_widths(5, 4, CheckType::X, small_widths()).unwrap(),
        default_spec(3, 3, CheckType::X).unwrap(),
        default_spec(5, 5, CheckType::Z).unwrap(),
        default_spec(7, 7, CheckType::Z).unwrap(),
    ];
    for spec in &specs {
        for (c, w) in [(2, 1), (8, 1), (8, 2), (64, 16), (16, 4)] {
            let prog = compile(spec, &engine(c, w)).unwrap();
            let mut per_layer = vec![0usize; spec.layer_count()];
            for i in prog.issues() {
                per_layer[i.layer as usize] += 1;
            }
            let mut total = 0;
            for (li, (_, l)) in spec.layers().iter().enumerate() {
                let g = l.geometry();
                let want = expected_issues(g.fan_in(), g.output_len(), c, w);
                assert_eq!(per_layer[li], want, "L={} layer {li} c={c} w={w}", spec.distance);
                total += want;
            }
            assert_eq!(prog.lowering.issue_count(), total);
            // Every multiply fits somewhere in the issued lanes.
            assert!(total * c * w >= spec.multiplications());
            assert!(prog.cycles >= total as u64);
        }
    }
}

#[test]
fn small_dense_layers_on_eight_units() {
    // Class head 8 -> 2 fits one tap-3 issue per output; 64 -> 4 needs
    // eight chunks of eight for each of four outputs.
    let c8 = engine(8, 1);
    let spec = spec_with_widths(3, 3, CheckType::Z, small_widths()).unwrap();
    let low = Lowering::new(&spec, &c8).unwrap();
    let class_out = low
        .layers
        .iter()
        .find(|l| l.placement == rscw::neural::Placement::HeadOutput(0))
        .unwrap();
    assert_eq!((class_out.fan_in, class_out.tap, class_out.lanes, class_out.chunks), (8, 3, 1, 1));
    assert_eq!(class_out.order.len(), 2);
    assert_eq!(c8.tap_for(8), Some((3, 1)));
    assert_eq!(expected_issues(8, 1, 8, 1), 1);

    let wide = SpecWidths {
        head_hidden: 64,
        ..small_widths()
    };
    let spec = spec_with_widths(3, 3, CheckType::Z, wide).unwrap();
    let prog = compile(&spec, &c8).unwrap();
    let low = &prog.lowering;
    let last = low.layers.len() - 1;
    assert_eq!(low.layers[last].geometry.output_len(), 4);
    let issues: Vec<Instruction> = prog.issues().into_iter().filter(|i| i.layer as usize == last).collect();
    assert_eq!(issues.len(), 4 * 8);
    assert_eq!(issues.iter().filter(|i| i.sf == SfMode::Finalize).count(), 4);
    assert!(issues.iter().all(|i| i.tap == 3 && i.lanes == 1));
}

#[test]
fn more_units_never_take_longer() {
    for spec in [
        spec_with_widths(3, 3, CheckType::Z, small_widths()).unwrap(),
        default_spec(3, 3, CheckType::Z).unwrap(),
        default_spec(5, 5, CheckType::X).unwrap(),
    ] {
        for w in [1, 4] {
            let mut last = u64::MAX;
            for c in [2, 4, 8, 16, 32, 64] {
                let cycles = compile(&spec, &engine(c, w)).unwrap().cycles;
                assert!(cycles <= last, "L={} c={c} w={w}: {cycles} > {last}", spec.distance);
                last = cycles;
            }
        }
    }
}

#[test]
fn simulator_agrees_with_integer_inference_across_engines() {
    for (l, t) in [(3, 3), (5, 3)] {
        let q = qnet(default_spec(l, t, CheckType::Z).unwrap(), l as u64);
        let inputs = common::random_syndromes(t, (l * l - 1) / 2, 0.15, 40 + l as u64, 40);
        for config in [engine(4, 2), engine(16, 1), NpeConfig { memory_latency: 5, ..engine(32, 8) }] {
            let prog = compile(&q.spec, &config).unwrap();
            let sim = Simulator::new(&prog, &q).unwrap();
            for s in &inputs {
                let out = sim.run(s, false).unwrap();
                assert_eq!(out.outputs, q.forward(s).unwrap());
                assert_eq!(out.cycles, prog.cycles);
            }
        }
    }
}

#[test]
fn pipelining_never_hurts() {
    for l in [3, 5, 7] {
        let spec = default_spec(l, l, CheckType::X).unwrap();
        let prog = compile(&spec, &NpeConfig::default()).unwrap();
        let full = prog.latency_seconds();
        assert_eq!(pipeline_latency(&prog, 0.0, l).unwrap(), full);
        let mut last = full;
        for period in [1e-8, 1e-7, 1e-6, 1e-5] {
            let p = pipeline_latency(&prog, period, l).unwrap();
            assert!(p <= full && p <= last + 1e-15, "L={l} period {period}: {p} vs {last}");
            last = p;
        }
        assert!(pipeline_latency(&prog, 1e-6, l + 1).is_err());
        assert!(pipeline_latency(&prog, -1.0, l).is_err());
    }
}

#[test]
fn register_file_and_config_limits() {
    let spec = default_spec(5, 5, CheckType::Z).unwrap();
    assert!(compile(&spec, &NpeConfig { register_file_size: 64, ..NpeConfig::default() }).is_err());
    assert!(compile(&spec, &engine(12, 1)).is_err());
    assert!(compile(&spec, &engine(8, 0)).is_err());
}

/// Every split of `total` into positive `units` with `sum a_j C_j = total`.
fn exhaustive(work: &[u64], mult: &[u64], total: u64) -> Option<f64> {
    fn go(work: &[u64], mult: &[u64], left: u64, acc: f64, best: &mut Option<f64>) {
        match work.len() {
            0 => {}
            1 => {
                if left >= mult[0] && left.is_multiple_of(mult[0]) {
                    let v = acc + (mult[0] * work[0]) as f64 / (left / mult[0]) as f64;
                    *best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            _ => {
                let mut c = 1;
                while mult[0] * c < left {
                    let v = acc + (mult[0] * work[0]) as f64 / c as f64;
                    go(&work[1..], &mult[1..], left - mult[0] * c, v, best);
                    c += 1;
                }
            }
        }
    }
    let mut best = None;
    go(work, mult, total, 0.0, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn allocation_is_the_exhaustive_optimum(
        (work, mult, total) in (1usize..=4).prop_flat_map(|k| (
            prop::collection::vec(1u64..10_000, k),
            prop::collection::vec(1u64..=2, k),
            1u64..=64,
        ))
    ) {
        let best = exhaustive(&work, &mult, total);
        match allocate(&work, &mult, total) {
            Ok(a) => {
                let best = best.expect("allocator found a split the search missed");
                let spent: u64 = a.units.iter().zip(&mult).map(|(c, m)| c * m).sum();
                prop_assert_eq!(spent, total);
                prop_assert!(a.units.iter().all(|&c| c >= 1));
                prop_assert!((a.latency - best).abs() <= 1e-9 * best);
                prop_assert_eq!(a.latency, allocation_latency(&work, &mult, &a.units));
            }
            Err(_) => prop_assert!(best.is_none()),
        }
    }

    #[test]
    fn continuous_optimum_is_stationary(
        (work, mult) in (1usize..=6).prop_flat_map(|k| (
            prop::collection::vec(1.0f64..1e6, k),
            prop::collection::vec(1u32..=4, k),
        )),
        total in 10.0f64..1e4,
    ) {
        let a: Vec<f64> = mult.iter().map(|&m| m as f64).collect();
        let c = continuous_allocation(&work, &a, total);
        let spent: f64 = c.iter().zip(&a).map(|(c, a)| c * a).sum();
        prop_assert!((spent - total).abs() <= 1e-9 * total);
        // Lagrange condition: M_j / C_j^2 is the same for every layer.
        let lambda = work[0] / (c[0] * c[0]);
        for (m, cj) in work.iter().zip(&c) {
            prop_assert!((m / (cj * cj) - lambda).abs() <= 1e-9 * lambda);
        }
        // No feasible perturbation moving budget between two layers helps.
        if c.len() >= 2 {
            let cost = |c: &[f64]| -> f64 { work.iter().zip(&a).zip(c).map(|((m, a), c)| a * m / c).sum() };
            let eps = 1e-3 * c[0].min(c[1]);
            let mut moved = c.clone();
            moved[0] += eps / a[0];
            moved[1] -= eps / a[1];
            prop_assert!(cost(&moved) >= cost(&c) * (1.0 - 1e-12));
        }
        let single: Vec<f32> = continuous_allocation(
            &work.iter().map(|&v| v as f32).collect::<Vec<_>>(),
            &a.iter().map(|&v| v as f32).collect::<Vec<_>>(),
            total as f32,
        );
        for (s, d) in single.iter().zip(&c) {
            prop_assert!((*s as f64 - d).abs() <= 1e-4 * d);
        }
    }

    #[test]
    fn scaling_all_work_keeps_the_split(
        work in prop::collection::vec(1u64..50_000, 1..=4),
        total in 4u64..=64,
    ) {
        let mult = vec![1; work.len()];
        prop_assume!(total >= work.len() as u64);
        let a = allocate(&work, &mult, total).unwrap();
        let scaled: Vec<u64> = work.iter().map(|m| 4 * m).collect();
        let b = allocate(&scaled, &mult, total).unwrap();
        prop_assert!((b.latency - 4.0 * a.latency).abs() <= 1e-9 * b.latency);
        for (x, y) in a.continuous.iter().zip(&b.continuous) {
            prop_assert!((x - y).abs() <= 1e-9 * x);
        }
    }

    #[test]
    fn instruction_words_round_trip(
        sf in 0u8..3, tap in 1u8..8, layer in any::<u16>(), chunk in any::<u16>(), lanes in any::<u16>(),
        first in any::<u16>(), load in any::<bool>(), load_len in any::<u16>(), address in any::<u32>(),
    ) {
        let sf = [SfMode::Bypass, SfMode::Accumulate, SfMode::Finalize][sf as usize];
        let i = Instruction { sf, tap, layer, chunk, lanes, first, load, load_len, address };
        prop_assert_eq!(Instruction::decode(&i.encode()).unwrap(), i);
    }
}

#[test]
fn two_layer_split() {
    let a = allocate(&[100, 400], &[1, 1], 30).unwrap();
    assert_eq!(a.units, vec![10, 20]);
    assert!((a.latency - 30.0).abs() < 1e-12);
    // Ties in the integer problem may pick either optimum; scaling keeps it.
    assert_eq!(allocate(&[400, 1600], &[1, 1], 30).unwrap().units, vec![10, 20]);
}

#[test]
fn default_networks_group_into_an_allocation_problem() {
    for l in [3, 5, 7] {
        let spec = default_spec(l, l, CheckType::Z).unwrap();
        let groups = layer_groups(&spec);
        let work: Vec<u64> = groups.iter().map(|g| g.1).collect();
        let mult: Vec<u64> = groups.iter().map(|g| g.2).collect();
        let covered: u64 = work.iter().zip(&mult).map(|(w, m)| w * m).sum();
        assert_eq!(covered, spec.multiplications() as u64);
        assert_eq!(mult.iter().sum::<u64>() as usize, spec.layer_count());
        let budget = 4096;
        let a = allocate(&work, &mult, budget).unwrap();
        let spent: u64 = a.units.iter().zip(&mult).map(|(c, m)| c * m).sum();
        assert_eq!(spent, budget);
        let bound: f64 = work.iter().zip(&mult).map(|(w, m)| (*m * *w) as f64).sum::<f64>() / budget as f64;
        assert!(a.latency >= bound);
    }
}
