use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::code::{PauliOperator, PureErrorTables, RscCode};
use crate::decoders::Decoder;
use crate::error::{Error, Result};
use crate::noise::{residual_labels, stream_rng, Circuit, NoiseParams};

/// Outcome of one trajectory. `cycles` includes the failing cycle; a
/// censored trajectory reached the cap without failing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub cycles: u64,
    pub censored: bool,
    /// Failing check types, indexed by `CheckType::index`.
    pub failed: [bool; 2],
    /// Cycles where matching overflowed and no correction was applied.
    pub overflows: u64,
}

/// Repeats noisy `T`-round cycles from a persistent frame, applying the
/// decoder's correction after each, until the syndrome-free part of the
/// residual is a logical operator.
pub fn run_trajectory<R: Rng + ?Sized>(
    code: &RscCode,
    tables: &PureErrorTables,
    circuit: &Circuit,
    params: &NoiseParams,
    decoder: &dyn Decoder,
    rng: &mut R,
    max_cycles: u64,
) -> Result<Trajectory> {
    let mut frame = PauliOperator::identity(code.num_data());
    let mut overflows = 0;
    for cycle in 1..=max_cycles {
        let outcome = circuit.run(params, &frame, rng)?;
        frame = outcome.frame;
        match decoder.decode(&outcome.syndromes) {
            Ok(c) => frame *= &c,
            Err(Error::MatchingOverflow { .. }) => overflows += 1,
            Err(e) => return Err(e),
        }
        let (classes, _) = residual_labels(code, tables, &frame)?;
        let failed = [classes[0].bit(), classes[1].bit()];
        if failed[0] || failed[1] {
            return Ok(Trajectory {
                cycles: cycle,
                censored: false,
                failed,
                overflows,
            });
        }
    }
    Ok(Trajectory {
        cycles: max_cycles,
        censored: true,
        failed: [false; 2],
        overflows,
    })
}

/// `1 / (T * tau)`.
pub fn ler_from_tau(mean_tau: f64, rounds: usize) -> f64 {
    1.0 / (rounds as f64 * mean_tau)
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LerResult {
    pub decoder: String,
    pub distance: usize,
    pub rounds: usize,
    pub params: NoiseParams,
    pub trajectories: usize,
    pub censored: usize,
    pub total_cycles: u64,
    pub mean_tau: f64,
    pub ler: f64,
    /// 95% interval; censored trajectories count as failures at the cap,
    /// so the estimate and interval are upper bounds when any are censored.
    pub ci: (f64, f64),
    pub failures: [u64; 2],
    pub overflows: u64,
}

impl LerResult {
    pub fn from_trajectories(
        decoder: &str,
        distance: usize,
        rounds: usize,
        params: NoiseParams,
        runs: &[Trajectory],
    ) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::InvalidArgument("no trajectories".into()));
        }
        let n = runs.len();
        let total_cycles: u64 = runs.iter().map(|t| t.cycles).sum();
        let censored = runs.iter().filter(|t| t.censored).count();
        if censored == n {
            log::warn!("all {n} trajectories reached the cycle cap; the rate is an upper bound only");
        } else if censored > 0 {
            log::warn!("{censored} of {n} trajectories censored; the rate is an upper bound");
        }
        let mean_tau = total_cycles as f64 / n as f64;
        let (lo, hi) = wilson(n as u64, total_cycles, 1.96);
        let failures = [0, 1].map(|i| runs.iter().filter(|t| t.failed[i]).count() as u64);
        Ok(Self {
            decoder: decoder.to_string(),
            distance,
            rounds,
            params,
            trajectories: n,
            censored,
            total_cycles,
            mean_tau,
            ler: ler_from_tau(mean_tau, rounds),
            ci: (lo / rounds as f64, hi / rounds as f64),
            failures,
            overflows: runs.iter().map(|t| t.overflows).sum(),
        })
    }

    pub fn upper_bound_only(&self) -> bool {
        self.censored == self.trajectories
    }
}

#[derive(Clone, Debug)]
pub struct LerRun {
    pub result: LerResult,
    pub runs: Vec<Trajectory>,
}

/// Trajectory `i` draws its noise from stream `i` of `seed`, so decoders
/// run with the same seed see the same faults for as long as their frames
/// agree on failure.
#[allow(clippy::too_many_arguments)]
pub fn estimate_ler(
    code: &RscCode,
    params: &NoiseParams,
    rounds: usize,
    decoder: &dyn Decoder,
    trajectories: usize,
    max_cycles: u64,
    seed: u64,
) -> Result<LerRun> {
    let circuit = Circuit::new(code, rounds)?;
    let tables = PureErrorTables::build(code);
    let runs = (0..trajectories as u64)
        .into_par_iter()
        .map(|i| run_trajectory(code, &tables, &circuit, params, decoder, &mut stream_rng(seed, i), max_cycles))
        .collect::<Result<Vec<_>>>()?;
    let result = LerResult::from_trajectories(decoder.name(), code.distance(), rounds, *params, &runs)?;
    Ok(LerRun { result, runs })
}

pub fn write_raw_csv<W: Write>(w: &mut W, runs: &[Trajectory]) -> Result<()> {
    writeln!(w, "trajectory,cycles,censored,failed_x,failed_z,overflows")?;
    for (i, t) in runs.iter().enumerate() {
        writeln!(
            w,
            "{i},{},{},{},{},{}",
            t.cycles, t.censored as u8, t.failed[0] as u8, t.failed[1] as u8, t.overflows
        )?;
    }
    Ok(())
}

pub const SUMMARY_HEADER: &str = "decoder,L,T,p_s,p_g,p_m,model,trajectories,censored,total_cycles,mean_tau,ler,ci_low,ci_high,failures_x,failures_z,overflows,upper_bound";

pub fn write_summary_csv<W: Write>(w: &mut W, results: &[LerResult]) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in results {
        let model = match r.params.model {
            crate::noise::NoiseModel::CircuitLevel => "circuit",
            crate::noise::NoiseModel::Phenomenological => "phenomenological",
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.decoder,
            r.distance,
            r.rounds,
            r.params.p_s,
            r.params.p_g,
            r.params.p_m,
            model,
            r.trajectories,
            r.censored,
            r.total_cycles,
            r.mean_tau,
            r.ler,
            r.ci.0,
            r.ci.1,
            r.failures[0],
            r.failures[1],
            r.overflows,
            (r.censored > 0) as u8
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ler_arithmetic() {
        assert!((ler_from_tau(50.0, 10) - 2e-3).abs() < 1e-18);
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        for (k, n) in [(0, 10), (1, 10), (5, 10), (10, 10), (3, 100_000)] {
            let (lo, hi) = wilson(k, n, 1.96);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && 0.0 <= lo && hi <= 1.0);
        }
    }
}
