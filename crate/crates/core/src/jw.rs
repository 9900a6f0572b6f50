//! Jordan-Wigner mapping of second-quantized operators onto Pauli sums.
//!
//! Creation operators pick up a Z parity chain on all lower qubits:
//! a_p^dag -> (X_p - i Y_p)/2 (x) Z_{p-1} ... Z_0. Spin orbital p maps to
//! qubit p in the blocked (alpha block then beta block) ordering.

use crate::error::{Error, Result};
use crate::fermion::{ActiveDipole, SpinOrbitalIntegrals};
use crate::pauli::{PauliString, SparsePauliSum};
use crate::scalar::{Real, C};

/// Statevector budget: Hamiltonians above this are rejected.
pub const MAX_SPIN_ORBITALS: usize = 16;

/// Jordan-Wigner image of a_p^dag (plus = true) or a_p (plus = false).
pub fn ladder_operator<T: Real>(p: usize, n_qubits: usize, creation: bool) -> SparsePauliSum<T> {
    let x_string = PauliString::parse(
        &(0..n_qubits)
            .map(|q| if q == p { 'X' } else if q < p { 'Z' } else { 'I' })
            .collect::<String>(),
    )
    .unwrap();
    let y_string = PauliString::parse(
        &(0..n_qubits)
            .map(|q| if q == p { 'Y' } else if q < p { 'Z' } else { 'I' })
            .collect::<String>(),
    )
    .unwrap();
    let half = T::of(0.5);
    let sign = if creation { -half } else { half };
    SparsePauliSum::from_terms(
        n_qubits,
        [
            (x_string, C::new(half, T::zero())),
            (y_string, C::new(T::zero(), sign)),
        ],
    )
}

/// Map an excitation product a_p^dag a_q.
pub fn transfer_operator<T: Real>(p: usize, q: usize, n_qubits: usize) -> SparsePauliSum<T> {
    let ap = ladder_operator::<T>(p, n_qubits, true);
    let aq = ladder_operator::<T>(q, n_qubits, false);
    ap.checked_mul(&aq).expect("matching registers")
}

/// Map the full second-quantized Hamiltonian
/// H = E_core + sum h1[pq] a_p^dag a_q
///   + 1/4 sum <pq||rs> a_p^dag a_q^dag a_s a_r
/// onto a simplified Pauli sum.
pub fn jordan_wigner<T: Real>(h: &SpinOrbitalIntegrals<T>) -> Result<SparsePauliSum<T>> {
    let n = h.n_spin_orbitals();
    if n > MAX_SPIN_ORBITALS {
        return Err(Error::Resource(format!(
            "{n} spin orbitals exceed the {MAX_SPIN_ORBITALS}-qubit statevector budget"
        )));
    }
    let create: Vec<SparsePauliSum<T>> =
        (0..n).map(|p| ladder_operator(p, n, true)).collect();
    let destroy: Vec<SparsePauliSum<T>> =
        (0..n).map(|p| ladder_operator(p, n, false)).collect();

    let mut out = SparsePauliSum::zero(n);
    out.add_term(PauliString::IDENTITY, C::new(h.core_energy, T::zero()));

    let thr = T::of(1e-14);
    for p in 0..n {
        for q in 0..n {
            let coeff = h.h1[[p, q]];
            if coeff.abs() < thr {
                continue;
            }
            let term = create[p].checked_mul(&destroy[q])?;
            for (string, c) in term.terms() {
                out.add_term(*string, *c * C::new(coeff, T::zero()));
            }
        }
    }

    let quarter = T::of(0.25);
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let pq = create[p].checked_mul(&create[q])?;
            for r in 0..n {
                for s in 0..n {
                    if r == s {
                        continue;
                    }
                    let coeff = h.h2(p, q, r, s) * quarter;
                    if coeff.abs() < thr {
                        continue;
                    }
                    // a_p^dag a_q^dag a_s a_r
                    let sr = destroy[s].checked_mul(&destroy[r])?;
                    let term = pq.checked_mul(&sr)?;
                    for (string, c) in term.terms() {
                        out.add_term(*string, *c * C::new(coeff, T::zero()));
                    }
                }
            }
        }
    }
    out.simplify();
    Ok(out)
}

/// Total particle-number operator N = sum_p (I - Z_p)/2.
pub fn number_operator<T: Real>(n_qubits: usize) -> SparsePauliSum<T> {
    let half = T::of(0.5);
    let mut out = SparsePauliSum::zero(n_qubits);
    for p in 0..n_qubits {
        out.add_term(PauliString::IDENTITY, C::new(half, T::zero()));
        out.add_term(PauliString::single(p, 'Z'), C::new(-half, T::zero()));
    }
    out.simplify();
    out
}

/// Spin projection S_z = (N_alpha - N_beta)/2 in the blocked ordering.
pub fn sz_operator<T: Real>(n_spatial: usize) -> SparsePauliSum<T> {
    let n_qubits = 2 * n_spatial;
    let quarter = T::of(0.25);
    let mut out = SparsePauliSum::zero(n_qubits);
    for p in 0..n_spatial {
        // alpha contributes +1/2 (I - Z)/2, beta -1/2 (I - Z)/2.
        out.add_term(PauliString::single(p, 'Z'), C::new(-quarter, T::zero()));
        out.add_term(PauliString::single(p + n_spatial, 'Z'), C::new(quarter, T::zero()));
    }
    out.simplify();
    out
}

/// Dipole operators mu_axis = identity offset - sum_pq D_pq a_p^dag a_q
/// summed over both spin blocks (electrons carry charge -1).
pub fn dipole_operators<T: Real>(dip: &ActiveDipole<T>) -> Result<[SparsePauliSum<T>; 3]> {
    let m = dip.active[0].nrows();
    let n_qubits = 2 * m;
    if n_qubits > MAX_SPIN_ORBITALS {
        return Err(Error::Resource("dipole operator register too large".into()));
    }
    let mut ops = std::array::from_fn(|_| SparsePauliSum::zero(n_qubits));
    for (axis, op) in ops.iter_mut().enumerate() {
        op.add_term(PauliString::IDENTITY, C::new(dip.identity_offset[axis], T::zero()));
        for p in 0..m {
            for q in 0..m {
                let d = dip.active[axis][[p, q]];
                if d.abs() < T::of(1e-14) {
                    continue;
                }
                for block in [0, m] {
                    let term = transfer_operator::<T>(p + block, q + block, n_qubits);
                    for (string, c) in term.terms() {
                        op.add_term(*string, *c * C::new(-d, T::zero()));
                    }
                }
            }
        }
        op.simplify();
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Sum = SparsePauliSum<f64>;

    #[test]
    fn number_operator_single_mode() {
        // a0^dag a0 = (I - Z0)/2.
        let n: Sum = transfer_operator(0, 0, 1);
        assert_eq!(n.len(), 2);
        assert!((n.coefficient(&PauliString::IDENTITY).re - 0.5).abs() < 1e-15);
        assert!((n.coefficient(&PauliString::single(0, 'Z')).re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn hopping_term() {
        // a0^dag a1 + a1^dag a0 = (X0 X1 + Y0 Y1)/2.
        let f: Sum = transfer_operator(0, 1, 2)
            .checked_add(&transfer_operator(1, 0, 2))
            .unwrap();
        assert_eq!(f.len(), 2);
        let xx = PauliString::parse("XX").unwrap();
        let yy = PauliString::parse("YY").unwrap();
        assert!((f.coefficient(&xx).re - 0.5).abs() < 1e-15);
        assert!((f.coefficient(&yy).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ladder_anticommutation_on_four_qubits() {
        // {a_p, a_q^dag} = delta_pq I, {a_p, a_q} = 0, exhaustively.
        let n = 4;
        for p in 0..n {
            for q in 0..n {
                let ap: Sum = ladder_operator(p, n, false);
                let aq_dag: Sum = ladder_operator(q, n, true);
                let anti = ap
                    .checked_mul(&aq_dag)
                    .unwrap()
                    .checked_add(&aq_dag.checked_mul(&ap).unwrap())
                    .unwrap();
                if p == q {
                    assert_eq!(anti.len(), 1);
                    assert!((anti.coefficient(&PauliString::IDENTITY).re - 1.0).abs() < 1e-12);
                } else {
                    assert!(anti.is_empty(), "{{a_{p}, a_{q}^dag}} != 0");
                }
                let aq: Sum = ladder_operator(q, n, false);
                let anti2 = ap
                    .checked_mul(&aq)
                    .unwrap()
                    .checked_add(&aq.checked_mul(&ap).unwrap())
                    .unwrap();
                assert!(anti2.is_empty(), "{{a_{p}, a_{q}}} != 0");
            }
        }
    }

    #[test]
    fn sz_on_blocked_register() {
        let sz: Sum = sz_operator(2);
        // Two Z terms per spin block with opposite signs.
        assert_eq!(sz.len(), 4);
        assert!((sz.coefficient(&PauliString::single(0, 'Z')).re + 0.25).abs() < 1e-15);
        assert!((sz.coefficient(&PauliString::single(2, 'Z')).re - 0.25).abs() < 1e-15);
    }
}
