//! Sparse Pauli-string algebra.
//!
//! Strings are held in the symplectic (x, z) bitmask representation with a
//! canonical phase, so that every stored string is exactly a tensor product
//! of I/X/Y/Z: S(x, z) = i^{|x & z|} X^x Z^z. Sums keep their terms in a
//! `BTreeMap`, which fixes the reduction order and makes every downstream
//! expectation value bit-reproducible.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Coefficients with magnitude below this are pruned after simplification.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Budget for dense-matrix conversion.
pub const DENSE_QUBIT_LIMIT: usize = 14;

/// A tensor product of single-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    x: u32,
    z: u32,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    /// Single-qubit operator: `kind` is one of 'X', 'Y', 'Z'.
    pub fn single(qubit: usize, kind: char) -> Self {
        let bit = 1u32 << qubit;
        match kind {
            'X' => Self { x: bit, z: 0 },
            'Y' => Self { x: bit, z: bit },
            'Z' => Self { x: 0, z: bit },
            _ => panic!("unknown Pauli kind {kind}"),
        }
    }

    /// Parse a string like "XIZY" with qubit 0 leftmost.
    pub fn parse(s: &str) -> Result<Self> {
        let mut x = 0u32;
        let mut z = 0u32;
        for (q, c) in s.chars().enumerate() {
            if q >= 32 {
                return Err(Error::Resource("more than 32 qubits".into()));
            }
            match c {
                'I' => {}
                'X' => x |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                'Z' => z |= 1 << q,
                _ => return Err(Error::Parse { line: 1, msg: format!("bad Pauli char '{c}'") }),
            }
        }
        Ok(Self { x, z })
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Highest qubit index touched plus one.
    pub fn min_qubits(&self) -> usize {
        32 - (self.x | self.z).leading_zeros() as usize
    }

    /// The Pauli on one qubit: 'I', 'X', 'Y' or 'Z'.
    pub fn at(&self, qubit: usize) -> char {
        let xb = self.x >> qubit & 1;
        let zb = self.z >> qubit & 1;
        match (xb, zb) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            (0, 1) => 'Z',
            _ => unreachable!(),
        }
    }

    /// Render with qubit 0 leftmost, padded to `n` qubits.
    pub fn label(&self, n: usize) -> String {
        (0..n).map(|q| self.at(q)).collect()
    }

    /// Product of canonical strings: returns the resulting string and the
    /// power of i picked up, `S1 S2 = i^phase S3`.
    pub fn multiply(&self, other: &PauliString) -> (u8, PauliString) {
        let x3 = self.x ^ other.x;
        let z3 = self.z ^ other.z;
        let c1 = (self.x & self.z).count_ones();
        let c2 = (other.x & other.z).count_ones();
        let c3 = (x3 & z3).count_ones();
        let anti = (self.z & other.x).count_ones();
        let phase = (c1 + c2 + 4 - (c3 % 4) + 2 * anti) % 4;
        (phase as u8, PauliString { x: x3, z: z3 })
    }

    /// True when the two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let a = (self.x & other.z).count_ones();
        let b = (self.z & other.x).count_ones();
        (a + b) % 2 == 0
    }

    /// Action on a computational basis state: S |b> = amp |b ^ x> with
    /// amp = i^{|x & z|} (-1)^{|b & z|}. Returned as (flipped index, i-power).
    #[inline]
    pub fn apply_basis(&self, b: usize) -> (usize, u8) {
        let sign = (b as u32 & self.z).count_ones() % 2;
        let phase = ((self.x & self.z).count_ones() + 2 * sign) % 4;
        (b ^ self.x as usize, phase as u8)
    }

    pub fn x_mask(&self) -> u32 {
        self.x
    }

    pub fn z_mask(&self) -> u32 {
        self.z
    }
}

/// Multiply a complex coefficient by i^phase.
#[inline]
pub fn mul_i_power<T: Real>(c: C<T>, phase: u8) -> C<T> {
    match phase % 4 {
        0 => c,
        1 => C::new(-c.im, c.re),
        2 => -c,
        _ => C::new(c.im, -c.re),
    }
}

/// A weighted sum of Pauli strings on a fixed qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePauliSum<T> {
    n_qubits: usize,
    terms: BTreeMap<PauliString, C<T>>,
}

impl<T: Real> SparsePauliSum<T> {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= 32, "qubit register limited to 32");
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(PauliString::IDENTITY, C::new(T::one(), T::zero()));
        s
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, C<T>)>,
    ) -> Self {
        let mut s = Self::zero(n_qubits);
        for (p, c) in terms {
            s.add_term(p, c);
        }
        s.simplify();
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C<T>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> C<T> {
        self.terms.get(p).copied().unwrap_or_else(|| C::new(T::zero(), T::zero()))
    }

    /// Accumulate one term (no pruning until `simplify`).
    pub fn add_term(&mut self, p: PauliString, c: C<T>) {
        debug_assert!(p.min_qubits() <= self.n_qubits);
        let entry = self.terms.entry(p).or_insert_with(|| C::new(T::zero(), T::zero()));
        *entry += c;
    }

    /// Drop terms with |coefficient| below the pruning threshold.
    pub fn simplify(&mut self) {
        let thr = T::of(PRUNE_THRESHOLD);
        self.terms.retain(|_, c| c.norm_sqr().sqrt() >= thr);
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Contract(format!(
                "qubit mismatch: {} vs {}",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        out.simplify();
        Ok(out)
    }

    pub fn scaled(&self, factor: C<T>) -> Self {
        let mut out = Self::zero(self.n_qubits);
        for (p, c) in &self.terms {
            out.terms.insert(*p, *c * factor);
        }
        out.simplify();
        out
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Contract(format!(
                "qubit mismatch: {} vs {}",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut out = Self::zero(self.n_qubits);
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                let (phase, p3) = p1.multiply(p2);
                out.add_term(p3, mul_i_power(*c1 * *c2, phase));
            }
        }
        out.simplify();
        Ok(out)
    }

    /// Commutator [A, B] = AB - BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.checked_mul(other)?;
        let ba = other.checked_mul(self)?;
        ab.checked_add(&ba.scaled(C::new(-T::one(), T::zero())))
    }

    /// Hermitian iff every coefficient is real (Pauli strings are Hermitian
    /// and linearly independent).
    pub fn is_hermitian(&self) -> bool {
        let thr = T::of(PRUNE_THRESHOLD);
        self.terms.values().all(|c| c.im.abs() < thr)
    }

    /// Anti-Hermitian iff every coefficient is purely imaginary.
    pub fn is_anti_hermitian(&self) -> bool {
        let thr = T::of(PRUNE_THRESHOLD);
        self.terms.values().all(|c| c.re.abs() < thr)
    }

    /// Dense matrix in the computational basis (qubit 0 = least significant
    /// bit). Only allowed within the dense budget.
    pub fn matrix(&self) -> Result<Array2<C<T>>> {
        if self.n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::Resource(format!(
                "dense matrix for {} qubits exceeds the {DENSE_QUBIT_LIMIT}-qubit budget",
                self.n_qubits
            )));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = Array2::from_elem((dim, dim), C::new(T::zero(), T::zero()));
        for (p, c) in &self.terms {
            for b in 0..dim {
                let (b2, phase) = p.apply_basis(b);
                m[[b2, b]] += mul_i_power(*c, phase);
            }
        }
        Ok(m)
    }

    /// Plain-text term list, one `coefficient pauli-string` per line (qubit 0
    /// leftmost). Requires a Hermitian sum so coefficients are real.
    pub fn to_term_list(&self) -> Result<String> {
        if !self.is_hermitian() {
            return Err(Error::Contract("term list export requires a Hermitian sum".into()));
        }
        let mut out = String::new();
        for (p, c) in &self.terms {
            out.push_str(&format!("{:+.16e} {}\n", c.re.to_f64_lossy(), p.label(self.n_qubits)));
        }
        Ok(out)
    }
}

impl<T: Real> fmt::Display for SparsePauliSum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)*{}", c.re, c.im, p.label(self.n_qubits))?;
        }
        Ok(())
    }
}
