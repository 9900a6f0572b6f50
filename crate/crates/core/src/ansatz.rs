//! Product-of-exponentials ansatz: excitation generators, exact
//! exponential action, and adjoint-mode analytic gradients.

use crate::error::{Error, Result};
use crate::jw::ladder_operator;
use crate::pauli::{mul_i_power, SparsePauliSum};
use crate::scalar::{Real, C};
use crate::statevector::Statevector;

/// Excitation index data in spin-orbital labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitationKind {
    /// i -> a
    Single { i: usize, a: usize },
    /// (i, j) -> (a, b)
    Double { i: usize, j: usize, a: usize, b: usize },
}

impl std::fmt::Display for ExcitationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExcitationKind::Single { i, a } => write!(f, "single({i}->{a})"),
            ExcitationKind::Double { i, j, a, b } => write!(f, "double({i},{j}->{a},{b})"),
        }
    }
}

/// Anti-Hermitian generator G = T - T^dag for one excitation, in its
/// Jordan-Wigner Pauli form.
#[derive(Debug, Clone)]
pub struct ExcitationGenerator<T> {
    pub kind: ExcitationKind,
    pub pauli: SparsePauliSum<T>,
    /// All Pauli terms commute pairwise, enabling the exact product-form
    /// exponential (true for every JW single/double excitation).
    commuting: bool,
}

impl<T: Real> ExcitationGenerator<T> {
    pub fn single(i: usize, a: usize, n_qubits: usize) -> Result<Self> {
        let t_op = ladder_operator::<T>(a, n_qubits, true)
            .checked_mul(&ladder_operator(i, n_qubits, false))?;
        Self::from_t_operator(ExcitationKind::Single { i, a }, t_op)
    }

    pub fn double(i: usize, j: usize, a: usize, b: usize, n_qubits: usize) -> Result<Self> {
        let t_op = ladder_operator::<T>(a, n_qubits, true)
            .checked_mul(&ladder_operator(b, n_qubits, true))?
            .checked_mul(&ladder_operator(j, n_qubits, false))?
            .checked_mul(&ladder_operator(i, n_qubits, false))?;
        Self::from_t_operator(ExcitationKind::Double { i, j, a, b }, t_op)
    }

    fn from_t_operator(kind: ExcitationKind, t_op: SparsePauliSum<T>) -> Result<Self> {
        // G = T - T^dag; for real coefficients the adjoint flips the sign of
        // imaginary parts, which for Pauli sums is complex conjugation of
        // the coefficients.
        let minus_t_dag = SparsePauliSum::from_terms(
            t_op.n_qubits(),
            t_op.terms().map(|(p, c)| (*p, -c.conj())),
        );
        let pauli = t_op.checked_add(&minus_t_dag)?;
        if pauli.is_empty() {
            return Err(Error::Contract(format!("excitation {kind} maps to zero")));
        }
        if !pauli.is_anti_hermitian() {
            return Err(Error::Contract(format!("generator {kind} is not anti-Hermitian")));
        }
        let strings: Vec<_> = pauli.terms().map(|(p, _)| *p).collect();
        let commuting = strings
            .iter()
            .enumerate()
            .all(|(k, p)| strings[k + 1..].iter().all(|q| p.commutes_with(q)));
        Ok(Self { kind, pauli, commuting })
    }

    pub fn n_qubits(&self) -> usize {
        self.pauli.n_qubits()
    }
}

/// Apply exp(theta * G) exactly.
///
/// When the generator's Pauli terms commute pairwise (always true for the
/// JW-mapped excitations used here), exp(sum_k i d_k P_k) factors exactly
/// into single-string rotations cos(d_k theta) I + i sin(d_k theta) P_k.
/// A scaled Taylor expansion covers arbitrary anti-Hermitian sums.
pub fn apply_exponential<T: Real>(
    state: &Statevector<T>,
    gen: &ExcitationGenerator<T>,
    theta: T,
) -> Result<Statevector<T>> {
    if gen.n_qubits() != state.n_qubits() {
        return Err(Error::Contract("generator register size mismatch".into()));
    }
    if theta == T::zero() {
        return Ok(state.clone());
    }
    if gen.commuting {
        let dim = state.amplitudes().len();
        let mut cur = state.amplitudes().to_vec();
        for (p, c) in gen.pauli.terms() {
            // c = i d with real d; rotation exp(i theta d P).
            let d = c.im;
            let (sin, cos) = (theta * d).sin_cos();
            let mut next = vec![C::new(T::zero(), T::zero()); dim];
            for (b, amp) in cur.iter().enumerate() {
                if amp.re == T::zero() && amp.im == T::zero() {
                    continue;
                }
                next[b] += C::new(cos, T::zero()) * *amp;
                let (b2, phase) = p.apply_basis(b);
                next[b2] += mul_i_power(C::new(T::zero(), sin) * *amp, phase);
            }
            cur = next;
        }
        Statevector::from_amplitudes(state.n_qubits(), cur)
    } else {
        apply_exponential_taylor(state, &gen.pauli, theta)
    }
}

/// Taylor-series action with scaling and squaring, for general
/// anti-Hermitian Pauli sums.
pub fn apply_exponential_taylor<T: Real>(
    state: &Statevector<T>,
    gen: &SparsePauliSum<T>,
    theta: T,
) -> Result<Statevector<T>> {
    if !gen.is_anti_hermitian() {
        return Err(Error::Contract("exponential requires an anti-Hermitian generator".into()));
    }
    let norm_bound: T = gen.terms().map(|(_, c)| c.norm_sqr().sqrt()).sum::<T>() * theta.abs();
    let mut halvings = 0u32;
    let mut scale = T::one();
    while norm_bound * scale > T::of(0.5) && halvings < 40 {
        scale = scale * T::of(0.5);
        halvings += 1;
    }
    let theta_s = theta * scale;
    let mut out = state.clone();
    for _ in 0..(1u64 << halvings) {
        let mut acc = out.clone();
        let mut term = out.clone();
        for m in 1..60 {
            term = term.apply(gen)?;
            let f = theta_s / T::of_usize(m);
            let amps: Vec<C<T>> =
                term.amplitudes().iter().map(|a| C::new(a.re * f, a.im * f)).collect();
            term = Statevector::from_amplitudes(state.n_qubits(), amps)?;
            let mut acc_amps = acc.amplitudes().to_vec();
            let mut shift = T::zero();
            for (dst, src) in acc_amps.iter_mut().zip(term.amplitudes()) {
                *dst += *src;
                shift += src.norm_sqr();
            }
            acc = Statevector::from_amplitudes(state.n_qubits(), acc_amps)?;
            if shift.sqrt() < T::epsilon() {
                break;
            }
        }
        out = acc;
    }
    Ok(out)
}

/// An ordered ansatz: reference determinant plus parameterized exponentials.
#[derive(Debug, Clone)]
pub struct AnsatzState<T> {
    n_qubits: usize,
    reference: usize,
    operators: Vec<(ExcitationGenerator<T>, T)>,
}

impl<T: Real> AnsatzState<T> {
    pub fn new(n_qubits: usize, reference: usize) -> Self {
        Self { n_qubits, reference, operators: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn push(&mut self, gen: ExcitationGenerator<T>, theta: T) {
        assert_eq!(gen.n_qubits(), self.n_qubits);
        self.operators.push((gen, theta));
    }

    pub fn operators(&self) -> &[(ExcitationGenerator<T>, T)] {
        &self.operators
    }

    pub fn angles(&self) -> Vec<T> {
        self.operators.iter().map(|(_, t)| *t).collect()
    }

    pub fn set_angles(&mut self, angles: &[T]) {
        assert_eq!(angles.len(), self.operators.len());
        for ((_, t), a) in self.operators.iter_mut().zip(angles) {
            *t = *a;
        }
    }

    /// Prepare |psi(theta)> from the reference.
    pub fn prepare(&self) -> Result<Statevector<T>> {
        let mut psi = Statevector::basis_state(self.n_qubits, self.reference);
        for (gen, theta) in &self.operators {
            psi = apply_exponential(&psi, gen, *theta)?;
        }
        Ok(psi)
    }

    /// Energy expectation at the stored angles.
    pub fn energy(&self, hamiltonian: &SparsePauliSum<T>) -> Result<T> {
        self.prepare()?.expectation(hamiltonian)
    }

    /// Adjoint-mode gradient dE/dtheta_k at the stored angles.
    ///
    /// One forward preparation, one Hamiltonian application, then a single
    /// backward sweep peeling one exponential at a time:
    /// dE/dtheta_k = 2 Re <lambda_k | G_k | psi_k>.
    pub fn gradient(&self, hamiltonian: &SparsePauliSum<T>) -> Result<Vec<T>> {
        let psi_full = self.prepare()?;
        let mut lambda = psi_full.apply(hamiltonian)?;
        let mut psi = psi_full;
        let mut grads = vec![T::zero(); self.operators.len()];
        for (idx, (gen, theta)) in self.operators.iter().enumerate().rev() {
            // Undo U_idx on both vectors.
            psi = apply_exponential(&psi, gen, -*theta)?;
            lambda = apply_exponential(&lambda, gen, -*theta)?;
            let g_psi = psi.apply(&gen.pauli)?;
            grads[idx] = T::of(2.0) * lambda.inner(&g_psi).re;
        }
        Ok(grads)
    }
}
