//! UCCSD operator pools, fixed-ansatz VQE, and ADAPT-VQE.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::ansatz::{AnsatzState, ExcitationGenerator};
use crate::error::{Error, Result};
use crate::fermion::ActiveSpace;
use crate::optimizers::{fd_gradient, minimize_bfgs, minimize_cobyla, MinimizeOptions, OptResult};
use crate::pauli::SparsePauliSum;
use crate::scalar::Real;
use crate::statevector::{hartree_fock_state, Statevector};

/// Spin-conserving singles and doubles over the active spin orbitals, in
/// deterministic lexicographic order.
#[derive(Debug, Clone)]
pub struct OperatorPool<T> {
    pub generators: Vec<ExcitationGenerator<T>>,
}

/// Enumerate the Sz-conserving UCCSD pool for an active space.
pub fn build_uccsd_pool<T: Real>(active: &ActiveSpace) -> Result<OperatorPool<T>> {
    let m = active.n_active_spatial;
    let n_qubits = 2 * m;
    let n_alpha = active.n_active_electrons / 2;
    let n_beta = active.n_active_electrons - n_alpha;
    let spin = |p: usize| p / m;

    let occupied: Vec<usize> = (0..n_alpha).chain(m..m + n_beta).collect();
    let virtuals: Vec<usize> =
        (0..n_qubits).filter(|p| !occupied.contains(p)).collect();
    if virtuals.is_empty() {
        return Err(Error::Config("active space has no virtual spin orbitals".into()));
    }

    let mut generators = Vec::new();
    // Singles by (i, a) lexicographic.
    for &i in &occupied {
        for &a in &virtuals {
            if spin(i) == spin(a) {
                generators.push(ExcitationGenerator::single(i, a, n_qubits)?);
            }
        }
    }
    // Doubles by (i, j, a, b) lexicographic with i < j, a < b.
    for (ii, &i) in occupied.iter().enumerate() {
        for &j in &occupied[ii + 1..] {
            for (ai, &a) in virtuals.iter().enumerate() {
                for &b in &virtuals[ai + 1..] {
                    if spin(i) + spin(j) == spin(a) + spin(b) {
                        generators.push(ExcitationGenerator::double(i, j, a, b, n_qubits)?);
                    }
                }
            }
        }
    }
    if generators.is_empty() {
        return Err(Error::Config("empty excitation pool".into()));
    }
    Ok(OperatorPool { generators })
}

/// Measurement backend for the variational cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Statevector,
    Sampled { shots: u64, seed: u64 },
}

/// Classical optimizer selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerName {
    Cobyla,
    QuasiNewton,
}

/// Configuration for one variational minimization.
#[derive(Debug, Clone)]
pub struct VqeConfig<T> {
    pub optimizer: OptimizerName,
    /// Cost-evaluation budget.
    pub maxiter: usize,
    pub param_tol: T,
    pub energy_tol: T,
    pub backend: Backend,
    /// Initial angles; zeros otherwise.
    pub warm_start: Option<Vec<T>>,
}

impl<T: Real> Default for VqeConfig<T> {
    fn default() -> Self {
        Self {
            optimizer: OptimizerName::QuasiNewton,
            maxiter: 1000,
            param_tol: T::of(1e-7),
            energy_tol: T::of(1e-9),
            backend: Backend::Statevector,
            warm_start: None,
        }
    }
}

/// Converged variational result.
#[derive(Debug, Clone)]
pub struct VqeResult<T> {
    /// Energy at the returned parameters; exact statevector expectation in
    /// statevector mode.
    pub energy: T,
    pub parameters: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<(usize, T)>,
}

/// Reference occupation for a closed-shell active space.
fn reference_state<T: Real>(n_qubits: usize, n_electrons: usize) -> Result<Statevector<T>> {
    hartree_fock_state(n_qubits, n_electrons / 2, n_electrons - n_electrons / 2)
}

fn optimize_ansatz<T: Real>(
    ansatz: &mut AnsatzState<T>,
    hamiltonian: &SparsePauliSum<T>,
    config: &VqeConfig<T>,
) -> Result<OptResult<T>> {
    let x0 = ansatz.angles();
    let opts = MinimizeOptions {
        max_iterations: config.maxiter,
        energy_tol: config.energy_tol,
        param_tol: config.param_tol,
    };

    let mut rng = match config.backend {
        Backend::Sampled { seed, .. } => Some(ChaCha12Rng::seed_from_u64(seed)),
        Backend::Statevector => None,
    };

    // The cost closure mutates a scratch ansatz to avoid re-cloning.
    let mut scratch = ansatz.clone();
    let mut cost = |x: &[T]| -> Result<T> {
        scratch.set_angles(x);
        let psi = scratch.prepare()?;
        match (config.backend, rng.as_mut()) {
            (Backend::Sampled { shots, .. }, Some(r)) => psi.sampled_expectation(hamiltonian, shots, r),
            _ => psi.expectation(hamiltonian),
        }
    };

    let result = match config.optimizer {
        OptimizerName::Cobyla => minimize_cobyla(&mut cost, &x0, &opts)?,
        OptimizerName::QuasiNewton => match config.backend {
            Backend::Statevector => {
                let mut grad_ansatz = ansatz.clone();
                let gradient = |x: &[T]| -> Result<Vec<T>> {
                    grad_ansatz.set_angles(x);
                    grad_ansatz.gradient(hamiltonian)
                };
                minimize_bfgs(&mut cost, gradient, &x0, &opts)?
            }
            Backend::Sampled { shots, seed } => {
                // Finite differences on an independent sampled-cost stream.
                let mut fd_rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e37_79b9);
                let mut fd_scratch = ansatz.clone();
                let mut fd_cost = move |x: &[T]| -> Result<T> {
                    fd_scratch.set_angles(x);
                    fd_scratch.prepare()?.sampled_expectation(hamiltonian, shots, &mut fd_rng)
                };
                let gradient =
                    move |x: &[T]| -> Result<Vec<T>> { fd_gradient(&mut fd_cost, x, T::of(1e-4)) };
                minimize_bfgs(&mut cost, gradient, &x0, &opts)?
            }
        },
    };
    ansatz.set_angles(&result.x);
    Ok(result)
}

/// Fixed-ansatz VQE: every pool operator appended in order, angles from the
/// warm start (or zero), then one joint minimization.
pub fn run_vqe<T: Real>(
    hamiltonian: &SparsePauliSum<T>,
    pool: &OperatorPool<T>,
    n_electrons: usize,
    config: &VqeConfig<T>,
) -> Result<VqeResult<T>> {
    let n_qubits = hamiltonian.n_qubits();
    let reference = reference_state::<T>(n_qubits, n_electrons)?;
    let mut ansatz = AnsatzState::new(n_qubits, index_of(&reference));
    let zeros = vec![T::zero(); pool.generators.len()];
    let init = config.warm_start.as_deref().unwrap_or(&zeros);
    if init.len() != pool.generators.len() {
        return Err(Error::Config(format!(
            "warm start has {} parameters for a {}-operator ansatz",
            init.len(),
            pool.generators.len()
        )));
    }
    for (gen, theta) in pool.generators.iter().zip(init) {
        ansatz.push(gen.clone(), *theta);
    }
    let opt = optimize_ansatz(&mut ansatz, hamiltonian, config)?;
    let energy = match config.backend {
        Backend::Statevector => ansatz.energy(hamiltonian)?,
        Backend::Sampled { .. } => opt.value,
    };
    Ok(VqeResult {
        energy,
        parameters: opt.x,
        iterations: opt.iterations,
        converged: opt.converged,
        history: opt.history,
    })
}

fn index_of<T: Real>(reference: &Statevector<T>) -> usize {
    reference
        .amplitudes()
        .iter()
        .position(|a| a.norm() > T::of(0.5))
        .expect("reference is a basis state")
}

/// ADAPT-VQE configuration.
#[derive(Debug, Clone)]
pub struct AdaptConfig<T> {
    /// Stop when the infinity norm of the pool gradient drops below this.
    pub gradient_threshold: T,
    /// Operator budget (repeat selection allowed).
    pub max_operators: usize,
    pub vqe: VqeConfig<T>,
}

impl<T: Real> Default for AdaptConfig<T> {
    fn default() -> Self {
        Self {
            gradient_threshold: T::of(1e-5),
            max_operators: 100,
            vqe: VqeConfig::default(),
        }
    }
}

/// ADAPT-VQE result: the variational outcome plus the growth record.
#[derive(Debug, Clone)]
pub struct AdaptResult<T> {
    pub result: VqeResult<T>,
    /// Pool indices in selection order.
    pub selected: Vec<usize>,
    /// (operator count, energy, pool-gradient infinity norm) per macro
    /// iteration, including the final state.
    pub growth: Vec<(usize, T, T)>,
}

/// Pool gradients g_k = <psi| [H, G_k] |psi> = 2 Re <H psi | G_k psi>.
pub fn pool_gradients<T: Real>(
    psi: &Statevector<T>,
    hamiltonian: &SparsePauliSum<T>,
    pool: &OperatorPool<T>,
) -> Result<Vec<T>> {
    let h_psi = psi.apply(hamiltonian)?;
    pool.generators
        .iter()
        .map(|gen| {
            let g_psi = psi.apply(&gen.pauli)?;
            Ok(T::of(2.0) * h_psi.inner(&g_psi).re)
        })
        .collect()
}

/// Grow the ansatz one operator at a time by largest pool gradient,
/// re-minimizing all angles after each addition (warm-started).
pub fn adapt_vqe<T: Real>(
    hamiltonian: &SparsePauliSum<T>,
    pool: &OperatorPool<T>,
    n_electrons: usize,
    config: &AdaptConfig<T>,
    warm_start: Option<(&[usize], &[T])>,
) -> Result<AdaptResult<T>> {
    if pool.generators.is_empty() {
        return Err(Error::Config("empty excitation pool".into()));
    }
    let n_qubits = hamiltonian.n_qubits();
    let reference = reference_state::<T>(n_qubits, n_electrons)?;
    let mut ansatz = AnsatzState::new(n_qubits, index_of(&reference));
    let mut selected: Vec<usize> = Vec::new();
    let mut total_evals = 0usize;
    let mut growth = Vec::new();
    let mut history = Vec::new();

    // Resume a previous ansatz: same operator sequence, stored angles.
    if let Some((ops, angles)) = warm_start {
        if ops.len() != angles.len() {
            return Err(Error::Config("warm-start operator/angle length mismatch".into()));
        }
        for (&k, &theta) in ops.iter().zip(angles) {
            let gen = pool
                .generators
                .get(k)
                .ok_or_else(|| Error::Config(format!("warm-start pool index {k} out of range")))?;
            ansatz.push(gen.clone(), theta);
            selected.push(k);
        }
        if !ansatz.is_empty() {
            let opt = optimize_ansatz(&mut ansatz, hamiltonian, &config.vqe)?;
            total_evals += opt.iterations;
            history.extend(opt.history);
        }
    }

    let mut energy = ansatz.energy(hamiltonian)?;
    loop {
        let psi = ansatz.prepare()?;
        let grads = pool_gradients(&psi, hamiltonian, pool)?;
        let (best_idx, best_mag) = grads
            .iter()
            .enumerate()
            .map(|(i, g)| (i, g.abs()))
            // max by magnitude, ties resolved toward the lowest index.
            .fold((0usize, T::neg_infinity()), |acc, (i, m)| {
                if m > acc.1 {
                    (i, m)
                } else {
                    acc
                }
            });
        let gnorm = best_mag;
        growth.push((ansatz.len(), energy, gnorm));

        if gnorm < config.gradient_threshold || ansatz.len() >= config.max_operators {
            break;
        }

        ansatz.push(pool.generators[best_idx].clone(), T::zero());
        selected.push(best_idx);
        let opt = optimize_ansatz(&mut ansatz, hamiltonian, &config.vqe)?;
        total_evals += opt.iterations;
        history.extend(opt.history);
        energy = ansatz.energy(hamiltonian)?;
    }

    Ok(AdaptResult {
        result: VqeResult {
            energy,
            parameters: ansatz.angles(),
            iterations: total_evals,
            converged: growth.last().map(|g| g.2 < config.gradient_threshold).unwrap_or(false),
            history,
        },
        selected,
        growth,
    })
}

/// Render the ADAPT growth record as delimited text for plotting.
pub fn growth_table<T: Real>(growth: &[(usize, T, T)]) -> String {
    let mut out = String::from("n_operators\tenergy_hartree\tpool_grad_inf_norm\n");
    for (n, e, g) in growth {
        out.push_str(&format!("{n}\t{:.12e}\t{:.6e}\n", e.to_f64_lossy(), g.to_f64_lossy()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h2_pool_shape() {
        let active = ActiveSpace::resolve(2, 2, 0, None).unwrap();
        let pool: OperatorPool<f64> = build_uccsd_pool(&active).unwrap();
        // 2 spin-conserving singles + 1 mixed-spin double.
        assert_eq!(pool.generators.len(), 3);
        let kinds: Vec<String> =
            pool.generators.iter().map(|g| g.kind.to_string()).collect();
        assert_eq!(kinds, vec!["single(0->1)", "single(2->3)", "double(0,2->1,3)"]);
    }

    #[test]
    fn cas22_pools_share_shape() {
        // F2 CAS(2,2) has the same 3-generator pool as H2.
        let active = ActiveSpace::resolve(18, 10, 8, Some(2)).unwrap();
        let pool: OperatorPool<f64> = build_uccsd_pool(&active).unwrap();
        assert_eq!(pool.generators.len(), 3);
    }

    #[test]
    fn zero_virtuals_is_an_error() {
        let active = ActiveSpace::resolve(4, 2, 0, None).unwrap();
        assert!(build_uccsd_pool::<f64>(&active).is_err());
    }
}
