//! Exact statevector simulation substrate.
//!
//! Amplitudes are indexed by computational basis states with qubit 0 as the
//! least significant bit. Expectation values reduce over the Pauli terms in
//! their stored (ordered) sequence, so results are bit-reproducible.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::pauli::{mul_i_power, SparsePauliSum};
use crate::scalar::{Real, C};

/// Complex amplitude vector over 2^n basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T> {
    n_qubits: usize,
    amplitudes: Vec<C<T>>,
}

impl<T: Real> Statevector<T> {
    /// Computational basis state |index>.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        assert!(index < 1 << n_qubits);
        let mut amplitudes = vec![C::new(T::zero(), T::zero()); 1 << n_qubits];
        amplitudes[index] = C::new(T::one(), T::zero());
        Self { n_qubits, amplitudes }
    }

    /// Build from explicit amplitudes (normalized by the caller).
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Contract(format!(
                "expected {} amplitudes, got {}",
                1 << n_qubits,
                amplitudes.len()
            )));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > T::zero() {
            let inv = T::one() / n;
            for a in &mut self.amplitudes {
                *a = C::new(a.re * inv, a.im * inv);
            }
        }
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &Self) -> C<T> {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        let mut acc = C::new(T::zero(), T::zero());
        for (a, b) in self.amplitudes.iter().zip(&other.amplitudes) {
            acc += a.conj() * *b;
        }
        acc
    }

    /// Apply a Pauli sum: |out> = O |self>.
    pub fn apply(&self, op: &SparsePauliSum<T>) -> Result<Self> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::Contract(format!(
                "operator on {} qubits applied to {}-qubit state",
                op.n_qubits(),
                self.n_qubits
            )));
        }
        let dim = self.amplitudes.len();
        let mut out = vec![C::new(T::zero(), T::zero()); dim];
        for (p, c) in op.terms() {
            for b in 0..dim {
                let amp = self.amplitudes[b];
                if amp.re == T::zero() && amp.im == T::zero() {
                    continue;
                }
                let (b2, phase) = p.apply_basis(b);
                out[b2] += mul_i_power(*c * amp, phase);
            }
        }
        Ok(Self { n_qubits: self.n_qubits, amplitudes: out })
    }

    /// Exact expectation value of a Hermitian Pauli sum.
    pub fn expectation(&self, op: &SparsePauliSum<T>) -> Result<T> {
        if !op.is_hermitian() {
            return Err(Error::Contract("expectation requires a Hermitian operator".into()));
        }
        Ok(self.expectation_unchecked(op))
    }

    /// Expectation without the hermiticity guard; returns the real part.
    pub fn expectation_unchecked(&self, op: &SparsePauliSum<T>) -> T {
        debug_assert_eq!(op.n_qubits(), self.n_qubits);
        let mut total = T::zero();
        for (p, c) in op.terms() {
            let mut term = C::new(T::zero(), T::zero());
            for (b, amp) in self.amplitudes.iter().enumerate() {
                if amp.re == T::zero() && amp.im == T::zero() {
                    continue;
                }
                let (b2, phase) = p.apply_basis(b);
                term += self.amplitudes[b2].conj() * mul_i_power(*c * *amp, phase);
            }
            total += term.re;
        }
        total
    }

    /// Exact expectation of a single Pauli string.
    pub fn pauli_expectation(&self, p: &crate::pauli::PauliString) -> T {
        let mut term = C::new(T::zero(), T::zero());
        for (b, amp) in self.amplitudes.iter().enumerate() {
            if amp.re == T::zero() && amp.im == T::zero() {
                continue;
            }
            let (b2, phase) = p.apply_basis(b);
            term += self.amplitudes[b2].conj() * mul_i_power(*amp, phase);
        }
        term.re
    }

    /// Shot-sampled expectation value: each Pauli term is measured
    /// independently with a binomial draw of `shots` outcomes from its exact
    /// +1/-1 distribution. Deterministic for a fixed RNG state.
    pub fn sampled_expectation<R: Rng>(
        &self,
        op: &SparsePauliSum<T>,
        shots: u64,
        rng: &mut R,
    ) -> Result<T> {
        if shots == 0 {
            return Err(Error::Contract("shots must be >= 1".into()));
        }
        if !op.is_hermitian() {
            return Err(Error::Contract("expectation requires a Hermitian operator".into()));
        }
        let mut total = T::zero();
        for (p, c) in op.terms() {
            if p.is_identity() {
                total += c.re;
                continue;
            }
            let exact = self.pauli_expectation(p).max(-T::one()).min(T::one());
            let p_plus = (T::one() + exact) * T::of(0.5);
            let p_plus_f64 = p_plus.to_f64_lossy().clamp(0.0, 1.0);
            let dist = Binomial::new(shots, p_plus_f64)
                .map_err(|e| Error::Contract(format!("binomial: {e}")))?;
            let k = dist.sample(rng);
            let estimate =
                T::of(2.0 * k as f64 / shots as f64 - 1.0);
            total += c.re * estimate;
        }
        Ok(total)
    }
}

/// Hartree-Fock reference determinant in the blocked spin-orbital ordering:
/// the lowest `n_alpha` qubits of the alpha block and the lowest `n_beta`
/// qubits of the beta block are occupied.
pub fn hartree_fock_state<T: Real>(
    n_qubits: usize,
    n_alpha: usize,
    n_beta: usize,
) -> Result<Statevector<T>> {
    if n_qubits % 2 != 0 {
        return Err(Error::Contract("blocked register needs an even qubit count".into()));
    }
    let m = n_qubits / 2;
    if n_alpha > m || n_beta > m {
        return Err(Error::Contract(format!(
            "occupation ({n_alpha}, {n_beta}) exceeds block size {m}"
        )));
    }
    let mut index = 0usize;
    for p in 0..n_alpha {
        index |= 1 << p;
    }
    for p in 0..n_beta {
        index |= 1 << (m + p);
    }
    Ok(Statevector::basis_state(n_qubits, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    type Sum = SparsePauliSum<f64>;

    #[test]
    fn hf_state_is_0101_pattern() {
        let psi: Statevector<f64> = hartree_fock_state(4, 1, 1).unwrap();
        // alpha block qubits {0,1}, beta block {2,3}: occupied 0 and 2.
        let expected_index = 0b0101;
        for (i, a) in psi.amplitudes().iter().enumerate() {
            let want = if i == expected_index { 1.0 } else { 0.0 };
            assert_eq!(a.re, want);
            assert_eq!(a.im, 0.0);
        }
        assert!(hartree_fock_state::<f64>(4, 3, 0).is_err());
    }

    #[test]
    fn basic_expectations() {
        // <0|Z|0> = +1.
        let zero: Statevector<f64> = Statevector::basis_state(1, 0);
        let z = Sum::from_terms(1, [(PauliString::single(0, 'Z'), C::new(1.0, 0.0))]);
        assert_eq!(zero.expectation(&z).unwrap(), 1.0);
        // <+|X|+> = +1 from explicit amplitudes.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus =
            Statevector::from_amplitudes(1, vec![C::new(s, 0.0), C::new(s, 0.0)]).unwrap();
        let x = Sum::from_terms(1, [(PauliString::single(0, 'X'), C::new(1.0, 0.0))]);
        assert!((plus.expectation(&x).unwrap() - 1.0).abs() < 1e-15);
        // Non-Hermitian operators are rejected.
        let bad = x.scaled(C::new(0.0, 1.0));
        assert!(zero.expectation(&bad).is_err());
    }

    #[test]
    fn number_operator_on_hf_state() {
        let psi: Statevector<f64> = hartree_fock_state(4, 1, 1).unwrap();
        let n = crate::jw::number_operator::<f64>(4);
        assert!((psi.expectation(&n).unwrap() - 2.0).abs() < 1e-12);
        let sz = crate::jw::sz_operator::<f64>(2);
        assert!(psi.expectation(&sz).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sampling_deterministic_and_exact_for_eigenstates() {
        let zero: Statevector<f64> = Statevector::basis_state(1, 0);
        let z = Sum::from_terms(1, [(PauliString::single(0, 'Z'), C::new(1.0, 0.0))]);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        // Zero-variance term: exactly 1 regardless of shots.
        let v = zero.sampled_expectation(&z, 1_000_000, &mut rng).unwrap();
        assert_eq!(v, 1.0);
        // Fixed seed -> bit-identical repeats.
        let x = Sum::from_terms(1, [(PauliString::single(0, 'X'), C::new(1.0, 0.0))]);
        let mut r1 = ChaCha12Rng::seed_from_u64(5);
        let mut r2 = ChaCha12Rng::seed_from_u64(5);
        let a = zero.sampled_expectation(&x, 2000, &mut r1).unwrap();
        let b = zero.sampled_expectation(&x, 2000, &mut r2).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(zero.sampled_expectation(&x, 0, &mut r1).is_err());
    }

    #[test]
    fn sampled_x_on_zero_has_binomial_spread() {
        // <X> on |0> is 0 with single-shot variance 1; the sample standard
        // deviation over seeds must sit near 1/sqrt(shots).
        let zero: Statevector<f64> = Statevector::basis_state(1, 0);
        let x = Sum::from_terms(1, [(PauliString::single(0, 'X'), C::new(1.0, 0.0))]);
        let shots = 2000u64;
        let n_seeds = 200;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for seed in 0..n_seeds {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let v = zero.sampled_expectation(&x, shots, &mut rng).unwrap();
            let delta = v - mean;
            mean += delta / (seed + 1) as f64;
            m2 += delta * (v - mean);
        }
        let std = (m2 / (n_seeds - 1) as f64).sqrt();
        let expect = 1.0 / (shots as f64).sqrt(); // 0.02236
        assert!(mean.abs() < 5.0 * expect / (n_seeds as f64).sqrt() * 3.0, "mean {mean}");
        assert!(
            (std - expect).abs() < 0.25 * expect,
            "std {std} vs binomial {expect}"
        );
    }

    #[test]
    fn apply_matches_matrix() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        use rand::Rng;
        let mut op = Sum::zero(3);
        for _ in 0..5 {
            let label: String =
                (0..3).map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)]).collect();
            op.add_term(
                PauliString::parse(&label).unwrap(),
                C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
        let amps: Vec<C<f64>> =
            (0..8).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mut psi = Statevector::from_amplitudes(3, amps).unwrap();
        psi.normalize();
        let applied = psi.apply(&op).unwrap();
        let m = op.matrix().unwrap();
        for i in 0..8 {
            let mut want = C::new(0.0, 0.0);
            for j in 0..8 {
                want += m[[i, j]] * psi.amplitudes()[j];
            }
            assert!((want - applied.amplitudes()[i]).norm() < 1e-12);
        }
    }
}
