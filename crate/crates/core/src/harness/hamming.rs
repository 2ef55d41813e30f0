use std::io::Write;

use rayon::prelude::*;

use crate::code::{CheckType, RscCode};
use crate::error::Result;
use crate::noise::{stream_rng, Circuit, NoiseParams};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub samples: u64,
}

impl Histogram {
    pub fn add(&mut self, weight: usize) {
        if self.counts.len() <= weight {
            self.counts.resize(weight + 1, 0);
        }
        self.counts[weight] += 1;
        self.samples += 1;
    }

    pub fn merge(mut self, other: Histogram) -> Histogram {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.samples += other.samples;
        self
    }

    pub fn prob(&self, weight: usize) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.counts.get(weight).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self.counts.iter().enumerate().map(|(w, &c)| w as f64 * c as f64).sum();
        s / self.samples.max(1) as f64
    }

    pub fn mode(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .fold((0, 0), |best, (w, &c)| if c > best.1 { (w, c) } else { best })
            .0
    }

    /// First weight past the mode whose probability is below `threshold`.
    pub fn first_below(&self, threshold: f64) -> usize {
        (self.mode()..)
            .find(|&w| self.prob(w) < threshold)
            .expect("probability vanishes past the largest weight")
    }
}

/// Syndrome weight distributions: total raw bits of both arrays, total
/// detection events (consecutive rounds XOR-ed) and detection events per
/// check type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HammingStats {
    pub raw_total: Histogram,
    pub detection_total: Histogram,
    pub detection: [Histogram; 2],
}

impl HammingStats {
    fn merge(self, o: HammingStats) -> HammingStats {
        let [x, z] = self.detection;
        let [ox, oz] = o.detection;
        HammingStats {
            raw_total: self.raw_total.merge(o.raw_total),
            detection_total: self.detection_total.merge(o.detection_total),
            detection: [x.merge(ox), z.merge(oz)],
        }
    }

    pub fn detection_of(&self, t: CheckType) -> &Histogram {
        &self.detection[t.index()]
    }
}

/// Sample `i` uses stream `i` of `seed`.
pub fn hamming_stats(code: &RscCode, params: &NoiseParams, rounds: usize, samples: u64, seed: u64) -> Result<HammingStats> {
    let circuit = Circuit::new(code, rounds)?;
    Ok((0..samples)
        .into_par_iter()
        .fold(HammingStats::default, |mut acc, i| {
            let syn = circuit.sample_syndromes(params, &mut stream_rng(seed, i));
            acc.raw_total.add(syn.hamming_weight());
            let dx = syn.x.detection_events().hamming_weight();
            let dz = syn.z.detection_events().hamming_weight();
            acc.detection_total.add(dx + dz);
            acc.detection[0].add(dx);
            acc.detection[1].add(dz);
            acc
        })
        .reduce(HammingStats::default, HammingStats::merge))
}

/// Probabilities per weight, one column per statistic.
pub fn write_hamming_csv<W: Write>(w: &mut W, stats: &HammingStats) -> Result<()> {
    writeln!(w, "weight,raw_total,detection_total,detection_x,detection_z")?;
    let hists = [
        &stats.raw_total,
        &stats.detection_total,
        &stats.detection[0],
        &stats.detection[1],
    ];
    let max = hists.iter().map(|h| h.counts.len()).max().unwrap_or(0);
    for weight in 0..max {
        write!(w, "{weight}")?;
        for h in hists {
            write!(w, ",{}", h.prob(weight))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
