//! Restricted Hartree-Fock with DIIS acceleration.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::integrals::IntegralSet;
use crate::linalg;
use crate::scalar::Real;

/// SCF driver options.
#[derive(Debug, Clone)]
pub struct ScfOptions<T> {
    pub max_cycles: usize,
    /// Convergence threshold on |dE| (hartree).
    pub energy_tol: T,
    pub use_diis: bool,
    /// Warm-start density from a previous geometry.
    pub initial_density: Option<Array2<T>>,
}

impl<T: Real> Default for ScfOptions<T> {
    fn default() -> Self {
        Self {
            max_cycles: 200,
            energy_tol: T::of(1e-10),
            use_diis: true,
            initial_density: None,
        }
    }
}

/// Converged self-consistent field solution.
#[derive(Debug, Clone)]
pub struct ScfResult<T> {
    /// MO coefficients, AO x MO, columns ordered by orbital energy.
    pub coefficients: Array2<T>,
    /// Orbital energies, ascending (hartree).
    pub orbital_energies: Array1<T>,
    /// Closed-shell density matrix P = 2 C_occ C_occ^T.
    pub density: Array2<T>,
    /// Total RHF energy including nuclear repulsion (hartree).
    pub energy: T,
    /// Number of doubly occupied spatial orbitals.
    pub n_occ: usize,
    /// SCF cycles actually used.
    pub cycles: usize,
}

const DIIS_SPACE: usize = 8;
const DIIS_TOL: f64 = 1e-8;

fn fock_matrix<T: Real>(h_core: &Array2<T>, ints: &IntegralSet<T>, p: &Array2<T>) -> Array2<T> {
    let n = h_core.nrows();
    let mut f = h_core.clone();
    for mu in 0..n {
        for nu in 0..=mu {
            let mut g = T::zero();
            for lam in 0..n {
                for sig in 0..n {
                    g += p[[lam, sig]]
                        * (ints.eri.get(mu, nu, lam, sig)
                            - T::of(0.5) * ints.eri.get(mu, lam, nu, sig));
                }
            }
            f[[mu, nu]] += g;
            if nu != mu {
                f[[nu, mu]] += g;
            }
        }
    }
    f
}

fn electronic_energy<T: Real>(p: &Array2<T>, h: &Array2<T>, f: &Array2<T>) -> T {
    let n = p.nrows();
    let mut e = T::zero();
    for i in 0..n {
        for j in 0..n {
            e += p[[i, j]] * (h[[i, j]] + f[[i, j]]);
        }
    }
    e * T::of(0.5)
}

/// Solve the restricted Hartree-Fock equations.
///
/// Converges when |dE| < `energy_tol` and the orbital-gradient (DIIS error)
/// norm falls below 1e-8; errors out after `max_cycles` otherwise.
pub fn run_rhf<T: Real>(
    ints: &IntegralSet<T>,
    n_electrons: usize,
    options: &ScfOptions<T>,
) -> Result<ScfResult<T>> {
    let n = ints.n_ao();
    if n_electrons % 2 != 0 {
        return Err(Error::Config(format!(
            "RHF requires an even electron count, got {n_electrons}"
        )));
    }
    if n_electrons < 2 || n_electrons > 2 * n {
        return Err(Error::Config(format!(
            "{n_electrons} electrons do not fit {n} spatial orbitals"
        )));
    }
    let n_occ = n_electrons / 2;

    // Symmetric orthogonalizer X = S^(-1/2).
    let (s_eig, s_vec) = linalg::eigh(&ints.s);
    if s_eig[0] < T::of(1e-8) {
        return Err(Error::Conditioning(format!(
            "near-linear dependence in basis (smallest S eigenvalue {:e})",
            s_eig[0]
        )));
    }
    let mut x = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut v = T::zero();
            for k in 0..n {
                v += s_vec[[i, k]] * s_vec[[j, k]] / s_eig[k].sqrt();
            }
            x[[i, j]] = v;
        }
    }

    let h_core = &ints.t + &ints.v;
    let mut fock = match &options.initial_density {
        Some(p0) => {
            if p0.nrows() != n {
                return Err(Error::Config("warm-start density has wrong dimension".into()));
            }
            fock_matrix(&h_core, ints, p0)
        }
        None => h_core.clone(),
    };

    let mut diis_focks: Vec<Array2<T>> = Vec::new();
    let mut diis_errs: Vec<Array2<T>> = Vec::new();
    let mut energy_old = T::zero();
    #[allow(unused_assignments)]
    let mut density = Array2::<T>::zeros((n, n));

    for cycle in 1..=options.max_cycles {
        // Diagonalize in the orthonormal basis.
        let f_prime = x.t().dot(&fock).dot(&x);
        let (eps, c_prime) = linalg::eigh(&f_prime);
        let c = x.dot(&c_prime);
        let c_occ = c.slice(ndarray::s![.., ..n_occ]);
        density = c_occ.dot(&c_occ.t()).mapv(|v| v * T::of(2.0));

        fock = fock_matrix(&h_core, ints, &density);
        let energy = electronic_energy(&density, &h_core, &fock) + ints.e_nuc;

        // Orbital gradient in the orthonormal basis: X^T (FPS - SPF) X.
        let fps = fock.dot(&density).dot(&ints.s);
        let err = x.t().dot(&(&fps - &fps.t())).dot(&x);
        let err_norm = err.iter().map(|v| *v * *v).sum::<T>().sqrt();

        if (energy - energy_old).abs() < options.energy_tol
            && err_norm < T::of(DIIS_TOL)
            && cycle > 1
        {
            return Ok(ScfResult {
                coefficients: c,
                orbital_energies: eps,
                density,
                energy,
                n_occ,
                cycles: cycle,
            });
        }
        energy_old = energy;

        if options.use_diis {
            diis_focks.push(fock.clone());
            diis_errs.push(err);
            if diis_focks.len() > DIIS_SPACE {
                diis_focks.remove(0);
                diis_errs.remove(0);
            }
            if diis_focks.len() >= 2 {
                if let Some(f_ex) = diis_extrapolate(&diis_focks, &diis_errs) {
                    fock = f_ex;
                }
            }
        }
    }

    Err(Error::Convergence {
        context: "RHF".into(),
        cycles: options.max_cycles,
        last_energy: energy_old.to_f64_lossy(),
    })
}

/// Pulay DIIS: minimize the norm of the extrapolated error vector.
fn diis_extrapolate<T: Real>(focks: &[Array2<T>], errs: &[Array2<T>]) -> Option<Array2<T>> {
    let m = focks.len();
    let mut b = Array2::<T>::zeros((m + 1, m + 1));
    for i in 0..m {
        for j in 0..m {
            b[[i, j]] = (&errs[i] * &errs[j]).sum();
        }
        b[[i, m]] = -T::one();
        b[[m, i]] = -T::one();
    }
    let mut rhs = Array1::<T>::zeros(m + 1);
    rhs[m] = -T::one();
    let coeff = linalg::lu_solve(&b, &rhs).ok()?;
    let mut f = Array2::<T>::zeros(focks[0].raw_dim());
    for (i, fi) in focks.iter().enumerate() {
        f = f + fi.mapv(|v| v * coeff[i]);
    }
    Some(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSet;
    use crate::geometry::parse_xyz;
    use crate::integrals::build_integrals;

    fn h2_integrals(bond: f64) -> IntegralSet<f64> {
        let basis = BasisSet::by_name("sto3g").unwrap();
        let geom = parse_xyz(&format!("2\n\nH 0 0 0\nH 0 0 {bond}")).unwrap();
        build_integrals(&geom, &basis).unwrap()
    }

    #[test]
    fn h2_reference_energy() {
        // Frozen cross-check value at exactly 0.735 A (see ledger: the
        // 1.4 bohr textbook geometry gives -1.11671 instead).
        let ints = h2_integrals(0.735);
        let scf = run_rhf(&ints, 2, &ScfOptions::default()).unwrap();
        assert!(
            (scf.energy - -1.116998996797).abs() < 5e-5,
            "E_HF = {}",
            scf.energy
        );
        assert_eq!(scf.n_occ, 1);
    }

    #[test]
    fn he_reference_energy() {
        let basis = BasisSet::by_name("sto3g").unwrap();
        let geom = parse_xyz("1\n\nHe 0 0 0").unwrap();
        let ints = build_integrals(&geom, &basis).unwrap();
        let scf = run_rhf(&ints, 2, &ScfOptions::<f64>::default()).unwrap();
        assert!((scf.energy - -2.807783957).abs() < 1e-4, "E_HF = {}", scf.energy);
    }

    #[test]
    fn orthonormal_orbitals_and_idempotent_density() {
        let ints = h2_integrals(0.735);
        let scf = run_rhf(&ints, 2, &ScfOptions::default()).unwrap();
        let csc = scf.coefficients.t().dot(&ints.s).dot(&scf.coefficients);
        for i in 0..csc.nrows() {
            for j in 0..csc.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((csc[[i, j]] - want).abs() < 1e-8);
            }
        }
        // PSP = 2P for a closed-shell idempotent density.
        let psp = scf.density.dot(&ints.s).dot(&scf.density);
        for (a, b) in psp.iter().zip(scf.density.iter()) {
            assert!((a - 2.0 * b).abs() < 1e-6);
        }
        // Orbital energies ascending.
        for k in 1..scf.orbital_energies.len() {
            assert!(scf.orbital_energies[k] >= scf.orbital_energies[k - 1]);
        }
    }

    #[test]
    fn warm_start_reaches_same_fixed_point_faster() {
        let ints_a = h2_integrals(0.734);
        let scf_a = run_rhf(&ints_a, 2, &ScfOptions::default()).unwrap();
        let ints_b = h2_integrals(0.735);
        let cold = run_rhf(&ints_b, 2, &ScfOptions::default()).unwrap();
        let warm = run_rhf(
            &ints_b,
            2,
            &ScfOptions { initial_density: Some(scf_a.density.clone()), ..Default::default() },
        )
        .unwrap();
        assert!((cold.energy - warm.energy).abs() < 1e-10);
        assert!(warm.cycles <= cold.cycles);
    }

    #[test]
    fn roothaan_steps_monotonically_decrease_h2() {
        // With DIIS off, plain Roothaan iterations on H2 must not raise the
        // energy. Track energies by running with increasing cycle budgets.
        let ints = h2_integrals(0.9);
        let mut last = f64::INFINITY;
        for cycles in 2..10 {
            let opts = ScfOptions {
                max_cycles: cycles,
                energy_tol: 0.0,
                use_diis: false,
                initial_density: None,
            };
            let e = match run_rhf(&ints, 2, &opts) {
                Ok(r) => r.energy,
                Err(Error::Convergence { last_energy, .. }) => last_energy,
                Err(e) => panic!("{e}"),
            };
            assert!(e <= last + 1e-12, "cycle {cycles}: {e} > {last}");
            last = e;
        }
    }

    #[test]
    fn rejects_odd_electrons() {
        let ints = h2_integrals(0.735);
        assert!(matches!(run_rhf(&ints, 3, &ScfOptions::default()), Err(Error::Config(_))));
        assert!(matches!(run_rhf(&ints, 6, &ScfOptions::default()), Err(Error::Config(_))));
    }

    #[test]
    fn f2_converges_with_diis() {
        let basis = BasisSet::by_name("sto3g").unwrap();
        let geom = parse_xyz("2\n\nF 0 0 0\nF 0 0 1.42").unwrap();
        let ints = build_integrals(&geom, &basis).unwrap();
        let scf = run_rhf(&ints, 18, &ScfOptions::<f64>::default()).unwrap();
        assert!(scf.energy < -195.0 && scf.energy > -200.0, "E = {}", scf.energy);
        assert_eq!(scf.n_occ, 9);
    }
}
