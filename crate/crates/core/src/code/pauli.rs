use std::fmt;
use std::ops::{Mul, MulAssign};

use super::bits::BitRow;
use crate::error::{Error, Result};

/// Single-qubit Pauli, phase ignored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// 0 = I, 1 = X, 2 = Y, 3 = Z.
    pub fn from_index(i: u8) -> Pauli {
        match i & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    #[inline]
    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }
}

/// n-qubit Pauli in symplectic form: one bit row for the X component and one
/// for the Z component. Multiplication is component-wise XOR.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: BitRow,
    z: BitRow,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitRow::zeros(n),
            z: BitRow::zeros(n),
        }
    }

    pub fn from_parts(x: BitRow, z: BitRow) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::SizeMismatch {
                expected: x.len(),
                found: z.len(),
            });
        }
        Ok(Self { x, z })
    }

    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        Self {
            x: BitRow::from_indices(n, qubits),
            z: BitRow::zeros(n),
        }
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        Self {
            x: BitRow::zeros(n),
            z: BitRow::from_indices(n, qubits),
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.apply(qubit, p);
        op
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &BitRow {
        &self.x
    }

    pub fn z_bits(&self) -> &BitRow {
        &self.z
    }

    pub fn x_bits_mut(&mut self) -> &mut BitRow {
        &mut self.x
    }

    pub fn z_bits_mut(&mut self) -> &mut BitRow {
        &mut self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        match (self.x.get(qubit), self.z.get(qubit)) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Multiply a single-qubit Pauli onto `qubit`.
    pub fn apply(&mut self, qubit: usize, p: Pauli) {
        if p.has_x() {
            self.x.flip(qubit);
        }
        if p.has_z() {
            self.z.flip(qubit);
        }
    }

    pub fn weight(&self) -> usize {
        (0..self.num_qubits())
            .filter(|&q| self.x.get(q) || self.z.get(q))
            .count()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// X component only.
    pub fn x_part(&self) -> Self {
        Self {
            x: self.x.clone(),
            z: BitRow::zeros(self.num_qubits()),
        }
    }

    /// Z component only.
    pub fn z_part(&self) -> Self {
        Self {
            x: BitRow::zeros(self.num_qubits()),
            z: self.z.clone(),
        }
    }

    /// Multiply `other` into `self`; fails on size mismatch.
    pub fn try_mul_assign(&mut self, other: &PauliOperator) -> Result<()> {
        self.check_size(other)?;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
        Ok(())
    }

    /// Symplectic product: `true` iff the operators anticommute.
    pub fn anticommutes(&self, other: &PauliOperator) -> Result<bool> {
        self.check_size(other)?;
        Ok(self.x.and_parity(&other.z) ^ self.z.and_parity(&other.x))
    }

    fn check_size(&self, other: &PauliOperator) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::SizeMismatch {
                expected: self.num_qubits(),
                found: other.num_qubits(),
            });
        }
        Ok(())
    }
}

impl MulAssign<&PauliOperator> for PauliOperator {
    /// Panics on size mismatch; use [`PauliOperator::try_mul_assign`] to handle it.
    fn mul_assign(&mut self, rhs: &PauliOperator) {
        self.try_mul_assign(rhs).expect("pauli size mismatch");
    }
}

impl Mul<&PauliOperator> for &PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        let mut out = self.clone();
        out *= rhs;
        out
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits() {
            let c = match self.get(q) {
                Pauli::I => '.',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
