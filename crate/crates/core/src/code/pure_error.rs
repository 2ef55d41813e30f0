use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::bits::BitRow;
use super::lattice::{CheckType, HomologyLabel, RscCode};
use super::pauli::PauliOperator;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RSCL";
const VERSION: u16 = 1;

/// Canonical error representatives `T(h_k)` for every unit syndrome of one
/// check type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureErrorTable {
    check_type: CheckType,
    distance: usize,
    entries: Vec<PauliOperator>,
}

impl PureErrorTable {
    /// Entry `k` is the shortest chain from check `k` to the boundary in the
    /// check graph, preferring lower qubit indices on ties.
    pub fn build(code: &RscCode, t: CheckType) -> Self {
        let graph = code.check_graph(t);
        let entries = (0..code.num_checks())
            .map(|k| {
                let paths = graph.bfs(k);
                code.error_on(t, &paths.path_to(graph.boundary()))
            })
            .collect();
        Self {
            check_type: t,
            distance: code.distance(),
            entries,
        }
    }

    pub fn check_type(&self) -> CheckType {
        self.check_type
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn entries(&self) -> &[PauliOperator] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Storage in bits with every entry kept as an `L^2`-bit string.
    pub fn storage_bits(&self) -> usize {
        self.entries.len() * self.distance * self.distance
    }

    /// `T(s)`: XOR of the entries selected by `s`.
    pub fn pure_error(&self, s: &BitRow) -> Result<PauliOperator> {
        if s.len() != self.entries.len() {
            return Err(Error::SizeMismatch {
                expected: self.entries.len(),
                found: s.len(),
            });
        }
        let n = self.distance * self.distance;
        let mut out = PauliOperator::identity(n);
        for k in s.iter_ones() {
            out *= &self.entries[k];
        }
        Ok(out)
    }

    /// `L_c^class * T(s)`.
    pub fn combine_error(
        &self,
        code: &RscCode,
        class: HomologyLabel,
        s: &BitRow,
    ) -> Result<PauliOperator> {
        if code.distance() != self.distance {
            return Err(Error::SizeMismatch {
                expected: self.distance,
                found: code.distance(),
            });
        }
        let mut out = self.pure_error(s)?;
        if class.bit() {
            out *= code.error_logical(self.check_type);
        }
        Ok(out)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u16::<LittleEndian>(self.distance as u16)?;
        w.write_u8(self.check_type.tag())?;
        w.write_all(&[0u8; 7])?;
        for e in &self.entries {
            let bits = match self.check_type.detected() {
                super::Pauli::X => e.x_bits(),
                _ => e.z_bits(),
            };
            w.write_all(&bits.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a pure-error table".into()));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported table version {version}")));
        }
        let distance = r.read_u16::<LittleEndian>()? as usize;
        let check_type = CheckType::from_tag(r.read_u8()?)
            .ok_or_else(|| Error::Format("bad check type tag".into()))?;
        let mut pad = [0u8; 7];
        r.read_exact(&mut pad)?;
        let code = RscCode::new(distance)?;
        let n = code.num_data();
        let mut row = vec![0u8; n.div_ceil(8)];
        let mut entries = Vec::with_capacity(code.num_checks());
        for _ in 0..code.num_checks() {
            r.read_exact(&mut row)?;
            let bits = BitRow::from_le_bytes(n, &row);
            let zeros = BitRow::zeros(n);
            entries.push(match check_type.detected() {
                super::Pauli::X => PauliOperator::from_parts(bits, zeros)?,
                _ => PauliOperator::from_parts(zeros, bits)?,
            });
        }
        Ok(Self {
            check_type,
            distance,
            entries,
        })
    }
}

/// Both tables of a code, indexed by check type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureErrorTables {
    pub x: PureErrorTable,
    pub z: PureErrorTable,
}

impl PureErrorTables {
    pub fn build(code: &RscCode) -> Self {
        Self {
            x: PureErrorTable::build(code, CheckType::X),
            z: PureErrorTable::build(code, CheckType::Z),
        }
    }

    pub fn get(&self, t: CheckType) -> &PureErrorTable {
        match t {
            CheckType::X => &self.x,
            CheckType::Z => &self.z,
        }
    }

    pub fn storage_bits(&self) -> usize {
        self.x.storage_bits() + self.z.storage_bits()
    }
}
