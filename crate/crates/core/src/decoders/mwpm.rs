use super::{ensure_checks, ensure_rounds, Decoded, Decoder};
use crate::code::{BitRow, CheckType, PauliOperator, RscCode, ShortestPaths};
use crate::error::{Error, Result};
use crate::noise::{SyndromeArray, SyndromePair};

/// Largest defect count the exact matcher accepts.
pub const DEFECT_CAP: usize = 20;

/// Space-time location of a detection event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Defect {
    pub round: usize,
    pub check: usize,
}

/// Detection events in round-major order; round 0 is compared against zero.
pub fn defects(syndromes: &SyndromeArray) -> Vec<Defect> {
    let ev = syndromes.detection_events();
    let mut out = Vec::new();
    for round in 0..ev.rounds() {
        for check in 0..ev.checks() {
            if ev.get(round, check) {
                out.push(Defect { round, check });
            }
        }
    }
    out
}

/// Unit-weight space-time graph for one check type. Space edges are data
/// qubits, time edges join a check to itself in consecutive rounds, and the
/// boundary is reachable in space through boundary qubits or forward in time
/// past the last round.
#[derive(Clone, Debug)]
pub struct DetectionGraph {
    check_type: CheckType,
    rounds: usize,
    paths: Vec<ShortestPaths>,
    boundary: usize,
}

impl DetectionGraph {
    pub fn new(code: &RscCode, t: CheckType, rounds: usize) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be at least 1".into()));
        }
        let g = code.check_graph(t);
        let paths = (0..code.num_checks()).map(|k| g.bfs_within(k)).collect();
        Ok(Self {
            check_type: t,
            rounds,
            paths,
            boundary: g.boundary(),
        })
    }

    pub fn check_type(&self) -> CheckType {
        self.check_type
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn spatial_distance(&self, a: usize, b: usize) -> u32 {
        self.paths[a].dist[b]
    }

    pub fn boundary_distance(&self, check: usize) -> u32 {
        self.paths[check].dist[self.boundary]
    }

    pub fn pair_weight(&self, a: Defect, b: Defect) -> u32 {
        self.spatial_distance(a.check, b.check)
            .saturating_add(a.round.abs_diff(b.round) as u32)
    }

    /// Cheapest boundary match and whether it goes through space. Ties go
    /// to space so that a data error in the final round is still corrected.
    pub fn boundary_weight(&self, d: Defect) -> (u32, bool) {
        let space = self.boundary_distance(d.check);
        let time = (self.rounds - d.round) as u32;
        if space <= time {
            (space, true)
        } else {
            (time, false)
        }
    }

    pub fn problem(&self, defects: &[Defect]) -> MatchingProblem {
        let pair = defects
            .iter()
            .map(|&a| defects.iter().map(|&b| self.pair_weight(a, b)).collect())
            .collect();
        let boundary = defects.iter().map(|&d| self.boundary_weight(d).0).collect();
        MatchingProblem { pair, boundary }
    }

    /// Data qubits of the chain realising one matched edge.
    pub fn chain(&self, a: Defect, partner: Option<Defect>) -> Vec<usize> {
        match partner {
            Some(b) if b.check != a.check => self.paths[a.check].path_to(b.check),
            Some(_) => Vec::new(),
            None => {
                if self.boundary_weight(a).1 {
                    self.paths[a.check].path_to(self.boundary)
                } else {
                    Vec::new()
                }
            }
        }
    }
}

/// Weighted defect set: `pair[i][j]` joins two defects, `boundary[i]`
/// retires one alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingProblem {
    pub pair: Vec<Vec<u32>>,
    pub boundary: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub weight: u64,
    /// Partner of every defect, `None` for the boundary.
    pub partner: Vec<Option<usize>>,
}

const TO_BOUNDARY: u8 = u8::MAX;

impl MatchingProblem {
    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    /// Total weight of an assignment; `None` if it is not an involution.
    pub fn weight_of(&self, partner: &[Option<usize>]) -> Option<u64> {
        if partner.len() != self.len() {
            return None;
        }
        let mut w = 0u64;
        for (i, p) in partner.iter().enumerate() {
            match *p {
                None => w += self.boundary[i] as u64,
                Some(j) => {
                    if j == i || j >= self.len() || partner[j] != Some(i) {
                        return None;
                    }
                    if i < j {
                        w += self.pair[i][j] as u64;
                    }
                }
            }
        }
        Some(w)
    }

    /// Exact minimum by dynamic programming over defect subsets: the lowest
    /// defect of each subset is retired to the boundary or paired.
    pub fn solve(&self) -> Result<Matching> {
        let k = self.len();
        if k > DEFECT_CAP {
            return Err(Error::MatchingOverflow { defects: k, cap: DEFECT_CAP });
        }
        let size = 1usize << k;
        let mut cost = vec![0u64; size];
        let mut choice = vec![TO_BOUNDARY; size];
        for mask in 1..size {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let mut best = self.boundary[i] as u64 + cost[rest];
            let mut pick = TO_BOUNDARY;
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                r &= r - 1;
                let c = self.pair[i][j] as u64 + cost[rest & !(1 << j)];
                if c < best {
                    best = c;
                    pick = j as u8;
                }
            }
            cost[mask] = best;
            choice[mask] = pick;
        }
        let mut partner = vec![None; k];
        let mut mask = size - 1;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            mask &= !(1 << i);
            let c = choice[mask | (1 << i)];
            if c != TO_BOUNDARY {
                let j = c as usize;
                partner[i] = Some(j);
                partner[j] = Some(i);
                mask &= !(1 << j);
            }
        }
        Ok(Matching {
            weight: cost[size - 1],
            partner,
        })
    }
}

/// Exact minimum-weight matching decoder, run independently per check type.
#[derive(Clone, Debug)]
pub struct MwpmDecoder {
    code: RscCode,
    graphs: [DetectionGraph; 2],
}

impl MwpmDecoder {
    pub fn new(code: &RscCode, rounds: usize) -> Result<Self> {
        Ok(Self {
            code: code.clone(),
            graphs: [
                DetectionGraph::new(code, CheckType::X, rounds)?,
                DetectionGraph::new(code, CheckType::Z, rounds)?,
            ],
        })
    }

    pub fn graph(&self, t: CheckType) -> &DetectionGraph {
        &self.graphs[t.index()]
    }

    /// Qubits flipped by the matching for one check type.
    pub fn decode_type(&self, t: CheckType, syndromes: &SyndromeArray) -> Result<BitRow> {
        let graph = self.graph(t);
        let ds = defects(syndromes);
        let m = graph.problem(&ds).solve()?;
        let mut flips = BitRow::zeros(self.code.num_data());
        for (i, p) in m.partner.iter().enumerate() {
            if matches!(p, Some(j) if *j < i) {
                continue;
            }
            for q in graph.chain(ds[i], p.map(|j| ds[j])) {
                flips.flip(q);
            }
        }
        Ok(flips)
    }
}

impl Decoder for MwpmDecoder {
    fn name(&self) -> &str {
        "mwpm"
    }

    fn decode_full(&self, syndromes: &SyndromePair) -> Result<Decoded> {
        ensure_rounds(syndromes, self.graphs[0].rounds)?;
        let mut correction = PauliOperator::identity(self.code.num_data());
        let mut predicted = [BitRow::zeros(0), BitRow::zeros(0)];
        for t in CheckType::BOTH {
            ensure_checks(syndromes, t, self.code.num_checks())?;
            let flips = self.decode_type(t, syndromes.get(t))?;
            let qubits: Vec<usize> = flips.iter_ones().collect();
            let part = self.code.error_on(t, &qubits);
            predicted[t.index()] = self.code.syndrome(&part, t)?;
            correction *= &part;
        }
        Ok(Decoded { correction, predicted })
    }
}
