use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::params::NoiseParams;
use super::syndrome::{SyndromeArray, SyndromePair};
use crate::code::{CheckType, Pauli, PauliOperator, RscCode};
use crate::error::{Error, Result};

/// Two-qubit Pauli `index` in `1..16` as `(control, target)` = `(index / 4, index % 4)`.
pub fn two_qubit_pauli(index: u8) -> (Pauli, Pauli) {
    (Pauli::from_index(index >> 2), Pauli::from_index(index & 3))
}

/// Explicit fault locations for a block of rounds. Positions are flattened
/// `round * sites_per_round + site` and kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultSet {
    /// Data qubit Pauli at the start of a round.
    pub storage: Vec<(usize, Pauli)>,
    /// Two-qubit Pauli index (`1..16`) right after a CNOT.
    pub gate: Vec<(usize, u8)>,
    /// Flipped readout; site `a < checks` is X check `a`, otherwise Z check `a - checks`.
    pub measurement: Vec<usize>,
}

impl FaultSet {
    pub fn is_empty(&self) -> bool {
        self.storage.is_empty() && self.gate.is_empty() && self.measurement.is_empty()
    }

    pub fn len(&self) -> usize {
        self.storage.len() + self.gate.len() + self.measurement.len()
    }

    pub fn sort(&mut self) {
        self.storage.sort_by_key(|f| f.0);
        self.gate.sort_by_key(|f| f.0);
        self.measurement.sort_unstable();
    }
}

/// Repeated syndrome-measurement circuit of a code, ready for Pauli-frame
/// execution.
///
/// Frame qubits are the data qubits, then the X-check ancillas, then the
/// Z-check ancillas. X checks use ancilla-controlled CNOTs onto the data,
/// Z checks data-controlled CNOTs onto the ancilla.
#[derive(Clone, Debug)]
pub struct Circuit {
    num_data: usize,
    num_checks: usize,
    rounds: usize,
    cnots: Vec<(usize, usize)>,
}

/// Raw syndromes plus the data-qubit frame after the last round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundsOutcome {
    pub syndromes: SyndromePair,
    pub frame: PauliOperator,
}

impl Circuit {
    pub fn new(code: &RscCode, rounds: usize) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidArgument("at least one round is required".into()));
        }
        let n = code.num_data();
        let nc = code.num_checks();
        let mut cnots = Vec::new();
        for step in code.cnot_schedule() {
            for (t, k, q) in step {
                cnots.push(match t {
                    CheckType::X => (n + k, q),
                    CheckType::Z => (q, n + nc + k),
                });
            }
        }
        Ok(Self {
            num_data: n,
            num_checks: nc,
            rounds,
            cnots,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn num_data(&self) -> usize {
        self.num_data
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn cnots(&self) -> &[(usize, usize)] {
        &self.cnots
    }

    pub fn storage_sites(&self) -> usize {
        self.rounds * self.num_data
    }

    pub fn gate_sites(&self) -> usize {
        self.rounds * self.cnots.len()
    }

    pub fn measurement_sites(&self) -> usize {
        self.rounds * 2 * self.num_checks
    }

    /// Draws independent faults at every location.
    pub fn sample_faults<R: Rng + ?Sized>(&self, params: &NoiseParams, rng: &mut R) -> FaultSet {
        let mut faults = FaultSet::default();
        for_each_hit(params.p_s, self.storage_sites(), rng, |pos, rng| {
            faults.storage.push((pos, Pauli::from_index(rng.gen_range(1..4))));
        });
        for_each_hit(params.p_g, self.gate_sites(), rng, |pos, rng| {
            faults.gate.push((pos, rng.gen_range(1..16)));
        });
        for_each_hit(params.p_m, self.measurement_sites(), rng, |pos, _| {
            faults.measurement.push(pos);
        });
        faults
    }

    /// Runs all rounds starting from `initial` on the data qubits.
    pub fn execute(&self, initial: &PauliOperator, faults: &FaultSet) -> Result<RoundsOutcome> {
        let n = self.num_data;
        let nc = self.num_checks;
        if initial.num_qubits() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: initial.num_qubits(),
            });
        }
        let total = n + 2 * nc;
        let mut x = vec![0u8; total];
        let mut z = vec![0u8; total];
        for q in initial.x_bits().iter_ones() {
            x[q] = 1;
        }
        for q in initial.z_bits().iter_ones() {
            z[q] = 1;
        }
        let mut out = SyndromePair::zeros(self.rounds, nc);
        let gates = self.cnots.len();
        let (mut si, mut gi, mut mi) = (0, 0, 0);
        for r in 0..self.rounds {
            while si < faults.storage.len() && faults.storage[si].0 < (r + 1) * n {
                let (pos, p) = faults.storage[si];
                apply(&mut x, &mut z, pos - r * n, p);
                si += 1;
            }
            for (g, &(c, t)) in self.cnots.iter().enumerate() {
                x[t] ^= x[c];
                z[c] ^= z[t];
                while gi < faults.gate.len() && faults.gate[gi].0 == r * gates + g {
                    let (pc, pt) = two_qubit_pauli(faults.gate[gi].1);
                    apply(&mut x, &mut z, c, pc);
                    apply(&mut x, &mut z, t, pt);
                    gi += 1;
                }
            }
            for a in 0..nc {
                out.x.set(r, a, z[n + a] == 1);
                out.z.set(r, a, x[n + nc + a] == 1);
            }
            while mi < faults.measurement.len() && faults.measurement[mi] < (r + 1) * 2 * nc {
                let a = faults.measurement[mi] - r * 2 * nc;
                if a < nc {
                    out.x.flip(r, a);
                } else {
                    out.z.flip(r, a - nc);
                }
                mi += 1;
            }
            x[n..].fill(0);
            z[n..].fill(0);
        }
        let mut frame = PauliOperator::identity(n);
        for q in 0..n {
            if x[q] == 1 {
                frame.x_bits_mut().set(q, true);
            }
            if z[q] == 1 {
                frame.z_bits_mut().set(q, true);
            }
        }
        Ok(RoundsOutcome {
            syndromes: out,
            frame,
        })
    }

    /// Samples faults and executes them.
    pub fn run<R: Rng + ?Sized>(
        &self,
        params: &NoiseParams,
        initial: &PauliOperator,
        rng: &mut R,
    ) -> Result<RoundsOutcome> {
        let faults = self.sample_faults(params, rng);
        self.execute(initial, &faults)
    }

    /// Syndrome arrays only, for statistics that do not need the frame.
    pub fn sample_syndromes<R: Rng + ?Sized>(&self, params: &NoiseParams, rng: &mut R) -> SyndromePair {
        let id = PauliOperator::identity(self.num_data);
        self.run(params, &id, rng)
            .expect("identity frame has the right size")
            .syndromes
    }

    /// Empty syndrome arrays of the right shape.
    pub fn empty_syndromes(&self) -> SyndromePair {
        SyndromePair {
            x: SyndromeArray::zeros(self.rounds, self.num_checks),
            z: SyndromeArray::zeros(self.rounds, self.num_checks),
        }
    }
}

#[inline]
fn apply(x: &mut [u8], z: &mut [u8], q: usize, p: Pauli) {
    x[q] ^= p.has_x() as u8;
    z[q] ^= p.has_z() as u8;
}

/// Calls `hit` for each of `sites` locations that fault with probability `p`,
/// jumping between hits with geometric gaps.
fn for_each_hit<R: Rng + ?Sized>(
    p: f64,
    sites: usize,
    rng: &mut R,
    mut hit: impl FnMut(usize, &mut R),
) {
    if p <= 0.0 || sites == 0 {
        return;
    }
    let gap = Geometric::new(p).expect("probability validated in NoiseParams");
    let mut pos = 0usize;
    loop {
        let skip = gap.sample(rng);
        pos = match usize::try_from(skip).ok().and_then(|s| pos.checked_add(s)) {
            Some(p) if p < sites => p,
            _ => return,
        };
        hit(pos, rng);
        pos += 1;
    }
}
