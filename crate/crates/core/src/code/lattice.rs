use std::collections::VecDeque;
use std::fmt;

use super::bits::BitRow;
use super::pauli::{Pauli, PauliOperator};
use crate::error::{Error, Result};

/// Stabilizer type. X checks detect Z errors and vice versa.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckType {
    X,
    Z,
}

impl CheckType {
    pub const BOTH: [CheckType; 2] = [CheckType::X, CheckType::Z];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            CheckType::X => 0,
            CheckType::Z => 1,
        }
    }

    pub fn other(self) -> CheckType {
        match self {
            CheckType::X => CheckType::Z,
            CheckType::Z => CheckType::X,
        }
    }

    /// Single-qubit Pauli of the errors these checks see.
    pub fn detected(self) -> Pauli {
        match self {
            CheckType::X => Pauli::Z,
            CheckType::Z => Pauli::X,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            CheckType::X => b'X',
            CheckType::Z => b'Z',
        }
    }

    pub fn from_tag(tag: u8) -> Option<CheckType> {
        match tag {
            b'X' | b'x' => Some(CheckType::X),
            b'Z' | b'z' => Some(CheckType::Z),
            _ => None,
        }
    }
}

impl fmt::Display for CheckType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckType::X => "X",
            CheckType::Z => "Z",
        })
    }
}

/// Logical class of a syndrome-free operator relative to one check type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum HomologyLabel {
    #[default]
    Trivial,
    Logical,
}

impl HomologyLabel {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            HomologyLabel::Logical
        } else {
            HomologyLabel::Trivial
        }
    }

    pub fn bit(self) -> bool {
        self == HomologyLabel::Logical
    }
}

/// One stabilizer generator with its ancilla placement and CNOT order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub operator: PauliOperator,
    pub support: Vec<usize>,
    /// Plaquette corner index `(i, j)` on the `(L+1) x (L+1)` grid; the
    /// ancilla sits at data-lattice coordinate `(i - 1/2, j - 1/2)`.
    pub plaquette: (usize, usize),
    /// Data qubit touched at each of the four CNOT time steps.
    pub schedule: [Option<usize>; 4],
}

/// Distance-`L` rotated surface code on an `L x L` grid of data qubits
/// indexed row-major.
#[derive(Clone, Debug)]
pub struct RscCode {
    distance: usize,
    x_checks: Vec<Check>,
    z_checks: Vec<Check>,
    logical_x: PauliOperator,
    logical_z: PauliOperator,
    graphs: [CheckGraph; 2],
}

impl RscCode {
    pub fn new(distance: usize) -> Result<Self> {
        if distance % 2 == 0 || !(3..=15).contains(&distance) {
            return Err(Error::InvalidDistance(distance));
        }
        let l = distance;
        let n = l * l;
        let mut x_checks = Vec::new();
        let mut z_checks = Vec::new();
        for i in 0..=l {
            for j in 0..=l {
                let is_x = (i + j) % 2 == 0;
                let bulk = (1..l).contains(&i) && (1..l).contains(&j);
                let x_edge = is_x && (i == 0 || i == l) && (1..l).contains(&j);
                let z_edge = !is_x && (j == 0 || j == l) && (1..l).contains(&i);
                if !(bulk || x_edge || z_edge) {
                    continue;
                }
                let at = |r: isize, c: isize| -> Option<usize> {
                    (r >= 0 && c >= 0 && (r as usize) < l && (c as usize) < l)
                        .then(|| r as usize * l + c as usize)
                };
                let (ii, jj) = (i as isize, j as isize);
                let nw = at(ii - 1, jj - 1);
                let ne = at(ii - 1, jj);
                let sw = at(ii, jj - 1);
                let se = at(ii, jj);
                // Hook errors from the last two CNOTs land on a pair
                // perpendicular to the matching logical: horizontal for X
                // checks (X logical is a column), vertical for Z checks.
                let schedule = if is_x {
                    [nw, ne, sw, se]
                } else {
                    [nw, sw, ne, se]
                };
                let mut support: Vec<usize> = schedule.iter().flatten().copied().collect();
                support.sort_unstable();
                let operator = if is_x {
                    PauliOperator::x_on(n, &support)
                } else {
                    PauliOperator::z_on(n, &support)
                };
                let check = Check {
                    operator,
                    support,
                    plaquette: (i, j),
                    schedule,
                };
                if is_x {
                    x_checks.push(check);
                } else {
                    z_checks.push(check);
                }
            }
        }
        let column: Vec<usize> = (0..l).map(|r| r * l).collect();
        let row: Vec<usize> = (0..l).collect();
        let logical_x = PauliOperator::x_on(n, &column);
        let logical_z = PauliOperator::z_on(n, &row);
        let graphs = [
            CheckGraph::new(n, &x_checks),
            CheckGraph::new(n, &z_checks),
        ];
        Ok(Self {
            distance,
            x_checks,
            z_checks,
            logical_x,
            logical_z,
            graphs,
        })
    }

    #[inline]
    pub fn distance(&self) -> usize {
        self.distance
    }

    #[inline]
    pub fn num_data(&self) -> usize {
        self.distance * self.distance
    }

    /// Checks per type, `(L^2 - 1) / 2`.
    #[inline]
    pub fn num_checks(&self) -> usize {
        (self.num_data() - 1) / 2
    }

    pub fn checks(&self, t: CheckType) -> &[Check] {
        match t {
            CheckType::X => &self.x_checks,
            CheckType::Z => &self.z_checks,
        }
    }

    pub fn logical_x(&self) -> &PauliOperator {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliOperator {
        &self.logical_z
    }

    /// Minimum-weight logical built from the errors `t` detects.
    pub fn error_logical(&self, t: CheckType) -> &PauliOperator {
        match t {
            CheckType::X => &self.logical_z,
            CheckType::Z => &self.logical_x,
        }
    }

    /// Logical whose commutation with a syndrome-free residual gives its class.
    pub fn conjugate_logical(&self, t: CheckType) -> &PauliOperator {
        match t {
            CheckType::X => &self.logical_x,
            CheckType::Z => &self.logical_z,
        }
    }

    pub fn check_graph(&self, t: CheckType) -> &CheckGraph {
        &self.graphs[t.index()]
    }

    pub fn data_coord(&self, q: usize) -> (usize, usize) {
        (q / self.distance, q % self.distance)
    }

    /// Operator of the kind `t` detects, supported on `qubits`.
    pub fn error_on(&self, t: CheckType, qubits: &[usize]) -> PauliOperator {
        match t.detected() {
            Pauli::X => PauliOperator::x_on(self.num_data(), qubits),
            _ => PauliOperator::z_on(self.num_data(), qubits),
        }
    }

    /// Bit `k` is set iff `e` anticommutes with check `k` of type `t`.
    pub fn syndrome(&self, e: &PauliOperator, t: CheckType) -> Result<BitRow> {
        if e.num_qubits() != self.num_data() {
            return Err(Error::SizeMismatch {
                expected: self.num_data(),
                found: e.num_qubits(),
            });
        }
        let seen = match t {
            CheckType::X => e.z_bits(),
            CheckType::Z => e.x_bits(),
        };
        Ok(BitRow::from_bools(
            self.checks(t)
                .iter()
                .map(|c| c.support.iter().filter(|&&q| seen.get(q)).count() % 2 == 1),
        ))
    }

    /// Class of a residual whose `t`-syndrome is already zero.
    pub fn homology_class(&self, residual: &PauliOperator, t: CheckType) -> Result<HomologyLabel> {
        if !self.syndrome(residual, t)?.is_zero() {
            return Err(Error::NonzeroSyndrome);
        }
        Ok(HomologyLabel::from_bit(
            residual.anticommutes(self.conjugate_logical(t))?,
        ))
    }

    /// `(check type, ancilla index within type, data qubit)` per CNOT, grouped
    /// by time step. CNOTs within a step touch disjoint qubits.
    pub fn cnot_schedule(&self) -> [Vec<(CheckType, usize, usize)>; 4] {
        let mut steps: [Vec<(CheckType, usize, usize)>; 4] = Default::default();
        for t in CheckType::BOTH {
            for (k, check) in self.checks(t).iter().enumerate() {
                for (step, q) in check.schedule.iter().enumerate() {
                    if let Some(q) = q {
                        steps[step].push((t, k, *q));
                    }
                }
            }
        }
        steps
    }
}

/// Decoding graph of one check type: nodes are the checks plus one boundary
/// node (index `num_checks`), edges are data qubits.
#[derive(Clone, Debug)]
pub struct CheckGraph {
    num_checks: usize,
    /// Adjacency lists `(neighbour, qubit)`, sorted by qubit.
    adjacency: Vec<Vec<(usize, usize)>>,
    /// Endpoints per data qubit.
    edges: Vec<(usize, usize)>,
}

impl CheckGraph {
    fn new(num_data: usize, checks: &[Check]) -> Self {
        let boundary = checks.len();
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); num_data];
        for (k, c) in checks.iter().enumerate() {
            for &q in &c.support {
                touching[q].push(k);
            }
        }
        let mut adjacency = vec![Vec::new(); boundary + 1];
        let mut edges = Vec::with_capacity(num_data);
        for (q, ks) in touching.iter().enumerate() {
            let (a, b) = match ks.as_slice() {
                [a] => (*a, boundary),
                [a, b] => (*a, *b),
                other => unreachable!("data qubit {q} touches {} checks", other.len()),
            };
            adjacency[a].push((b, q));
            adjacency[b].push((a, q));
            edges.push((a, b));
        }
        Self {
            num_checks: boundary,
            adjacency,
            edges,
        }
    }

    #[inline]
    pub fn boundary(&self) -> usize {
        self.num_checks
    }

    pub fn num_nodes(&self) -> usize {
        self.num_checks + 1
    }

    pub fn edge(&self, qubit: usize) -> (usize, usize) {
        self.edges[qubit]
    }

    /// Breadth-first search; neighbours are visited in qubit order, so the
    /// first-found parent is the lowest-index edge among shortest paths.
    pub fn bfs(&self, source: usize) -> ShortestPaths {
        self.search(source, true)
    }

    /// Like [`Self::bfs`] but paths may end at the boundary, never pass it.
    pub fn bfs_within(&self, source: usize) -> ShortestPaths {
        self.search(source, false)
    }

    fn search(&self, source: usize, through_boundary: bool) -> ShortestPaths {
        let mut dist = vec![u32::MAX; self.num_nodes()];
        let mut parent = vec![None; self.num_nodes()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            if u == self.num_checks && u != source && !through_boundary {
                continue;
            }
            for &(v, q) in &self.adjacency[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = Some((u, q));
                    queue.push_back(v);
                }
            }
        }
        ShortestPaths {
            source,
            dist,
            parent,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<u32>,
    parent: Vec<Option<(usize, usize)>>,
}

impl ShortestPaths {
    /// Data qubits along the path from the source to `target`.
    pub fn path_to(&self, target: usize) -> Vec<usize> {
        let mut qubits = Vec::new();
        let mut node = target;
        while node != self.source {
            let (prev, q) = self.parent[node].expect("target reachable");
            qubits.push(q);
            node = prev;
        }
        qubits
    }
}
