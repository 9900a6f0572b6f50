//! The calculator: geometry in, energy / forces / dipole out.
//!
//! Wraps the full pipeline (integrals -> RHF -> active space -> Jordan-
//! Wigner -> variational or exact solver) behind a property interface with
//! warm starting across geometries and central-difference forces. Displaced
//! evaluations inside one force call run concurrently (up to `n_jobs`) and
//! read a frozen snapshot of the warm-start store; the reduction into the
//! force array is fixed-order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

use crate::basis::BasisSet;
use crate::constants::{EBOHR_DEBYE, HARTREE_EV};
use crate::error::{Error, Result};
use crate::fci::fci_ground_state_in_sector;
use crate::fermion::{ao_to_mo, apply_active_space, ActiveSpace};
use crate::geometry::MolecularGeometry;
use crate::integrals::build_integrals;
use crate::jw::{dipole_operators, jordan_wigner};
use crate::scalar::Real;
use crate::scf::{run_rhf, ScfOptions, ScfResult};
use crate::statevector::Statevector;
use crate::vqe::{
    adapt_vqe, build_uccsd_pool, run_vqe, AdaptConfig, Backend, OptimizerName, VqeConfig,
};

/// Ground-state solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AdaptVqe,
    Vqe,
    FciOracle,
}

/// Full calculator configuration. Defaults mirror the reference scripts.
#[derive(Debug, Clone)]
pub struct CalculatorConfig<T> {
    pub basis: String,
    pub method: Method,
    pub backend: Backend,
    /// Finite-difference displacement for forces (Angstrom).
    pub delta: T,
    pub optimizer: OptimizerName,
    /// Cost-evaluation budget per minimization.
    pub maxiter: usize,
    /// Number of frozen doubly-occupied spatial orbitals.
    pub coreorb: usize,
    /// Optional cap on the active spatial orbital count.
    pub n_active_spatial: Option<usize>,
    /// Concurrent displaced-geometry evaluations per force call.
    pub n_jobs: usize,
    /// ADAPT pool-gradient stop.
    pub gradient_threshold: T,
    /// ADAPT operator budget.
    pub max_operators: usize,
    pub energy_tol: T,
    pub param_tol: T,
    /// Reuse converged parameters and densities across geometries.
    pub warm_start: bool,
    /// Accepted for interface compatibility; has no effect on a simulator.
    pub resilience_level: u32,
}

impl<T: Real> Default for CalculatorConfig<T> {
    fn default() -> Self {
        Self {
            basis: "sto3g".into(),
            method: Method::AdaptVqe,
            backend: Backend::Statevector,
            delta: T::of(0.01),
            optimizer: OptimizerName::Cobyla,
            maxiter: 100,
            coreorb: 0,
            n_active_spatial: None,
            n_jobs: 18,
            gradient_threshold: T::of(1e-5),
            max_operators: 100,
            energy_tol: T::of(1e-9),
            param_tol: T::of(1e-7),
            warm_start: true,
            resilience_level: 0,
        }
    }
}

impl<T: Real> CalculatorConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.delta <= T::zero() {
            return Err(Error::Config("delta must be positive".into()));
        }
        if let Backend::Sampled { shots, .. } = self.backend {
            if shots == 0 {
                return Err(Error::Config("sampled backend needs shots >= 1".into()));
            }
        }
        if self.n_jobs == 0 {
            return Err(Error::Config("n_jobs must be >= 1".into()));
        }
        Ok(())
    }

    /// Fields whose change invalidates warm-start data.
    fn store_fingerprint(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        let mut mix = |v: u64| {
            h ^= v;
            h = h.wrapping_mul(0x100000001b3);
        };
        for b in self.basis.bytes() {
            mix(b as u64);
        }
        mix(self.coreorb as u64);
        mix(self.n_active_spatial.map(|v| v as u64 + 1).unwrap_or(0));
        mix(match self.method {
            Method::AdaptVqe => 1,
            Method::Vqe => 2,
            Method::FciOracle => 3,
        });
        h
    }
}

/// Solver-facing metadata attached to every property result.
#[derive(Debug, Clone, Serialize)]
pub struct SolveMetadata {
    pub method: Method,
    pub n_qubits: usize,
    /// Ansatz operators (ADAPT growth length or pool size; 0 for FCI).
    pub operator_count: usize,
    /// Optimizer cost evaluations (or Lanczos-free for FCI).
    pub solver_iterations: usize,
    pub solver_converged: bool,
    pub scf_cycles: usize,
    pub n_frozen_core: usize,
    pub n_active_spatial: usize,
    pub n_active_electrons: usize,
    /// Dipole origin (center of nuclear charge), bohr.
    pub dipole_origin_bohr: [f64; 3],
    /// Frozen-core electrons contribute to the reported dipole.
    pub frozen_core_dipole_included: bool,
    pub warm_started: bool,
    pub degenerate_ground: bool,
    pub wall_time_s: f64,
}

/// Energy, forces and dipole in calculator units (eV, eV/A, debye).
#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult<T> {
    pub energy_ev: T,
    /// Present when the call computed forces.
    pub forces_ev_per_a: Option<Vec<[T; 3]>>,
    pub dipole_debye: [T; 3],
    pub metadata: SolveMetadata,
}

/// Converged state carried between geometries.
#[derive(Debug, Clone, Default)]
struct ParameterStore<T> {
    density: Option<Array2<T>>,
    /// ADAPT: selected pool indices with angles. VQE: angles over the pool.
    adapt_ops: Option<Vec<usize>>,
    angles: Option<Vec<T>>,
    fci_vector: Option<Statevector<T>>,
    fingerprint: u64,
}

#[derive(Debug, Clone)]
struct Solved<T> {
    energy_ha: T,
    dipole_au: [T; 3],
    metadata: SolveMetadata,
    // Warm-start payload produced by this solution.
    density: Array2<T>,
    adapt_ops: Option<Vec<usize>>,
    angles: Option<Vec<T>>,
    fci_vector: Option<Statevector<T>>,
}

fn geometry_key<T: Real>(geometry: &MolecularGeometry<T>) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
    };
    for s in geometry.symbols() {
        for b in s.bytes() {
            mix(b as u64);
        }
    }
    for p in geometry.positions() {
        for c in p {
            mix(c.to_f64_lossy().to_bits());
        }
    }
    mix(geometry.charge() as u64);
    mix(geometry.spin() as u64);
    h
}

/// One quantum-chemistry calculator instance serving a geometry sequence.
#[derive(Debug)]
pub struct Calculator<T> {
    config: CalculatorConfig<T>,
    basis: BasisSet,
    store: ParameterStore<T>,
    /// Result cache for the most recent geometry.
    last: Option<(u64, Solved<T>)>,
    /// Monotone counter deriving per-call sampling streams.
    call_seq: u64,
}

impl<T: Real> Calculator<T> {
    pub fn new(config: CalculatorConfig<T>) -> Result<Self> {
        config.validate()?;
        let basis = BasisSet::by_name(&config.basis)?;
        let fingerprint = config.store_fingerprint();
        Ok(Self {
            config,
            basis,
            store: ParameterStore { fingerprint, ..Default::default() },
            last: None,
            call_seq: 0,
        })
    }

    pub fn config(&self) -> &CalculatorConfig<T> {
        &self.config
    }

    /// Replace the configuration; warm-start data is dropped whenever
    /// basis, active space or method change.
    pub fn update_config(&mut self, config: CalculatorConfig<T>) -> Result<()> {
        config.validate()?;
        let new_fp = config.store_fingerprint();
        if new_fp != self.store.fingerprint {
            self.store = ParameterStore { fingerprint: new_fp, ..Default::default() };
            self.last = None;
        }
        self.basis = BasisSet::by_name(&config.basis)?;
        self.config = config;
        Ok(())
    }

    /// Total energy in eV.
    pub fn get_potential_energy(&mut self, geometry: &MolecularGeometry<T>) -> Result<T> {
        let solved = self.solve_cached(geometry)?;
        Ok(solved.energy_ha * T::of(HARTREE_EV))
    }

    /// Dipole moment in debye, from the converged solver state.
    pub fn get_dipole(&mut self, geometry: &MolecularGeometry<T>) -> Result<[T; 3]> {
        let solved = self.solve_cached(geometry)?;
        let f = T::of(EBOHR_DEBYE);
        Ok([solved.dipole_au[0] * f, solved.dipole_au[1] * f, solved.dipole_au[2] * f])
    }

    /// Energy, dipole and metadata in one shot (no forces).
    pub fn get_properties(&mut self, geometry: &MolecularGeometry<T>) -> Result<PropertyResult<T>> {
        let solved = self.solve_cached(geometry)?.clone();
        let f = T::of(EBOHR_DEBYE);
        Ok(PropertyResult {
            energy_ev: solved.energy_ha * T::of(HARTREE_EV),
            forces_ev_per_a: None,
            dipole_debye: [
                solved.dipole_au[0] * f,
                solved.dipole_au[1] * f,
                solved.dipole_au[2] * f,
            ],
            metadata: solved.metadata,
        })
    }

    /// Central-difference forces in eV/A.
    ///
    /// All 6N displaced evaluations share the solver settings and warm-start
    /// from the central geometry's converged parameters; any failure fails
    /// the whole call.
    pub fn get_forces(&mut self, geometry: &MolecularGeometry<T>) -> Result<Vec<[T; 3]>> {
        // Central solve refreshes the store so displacements inherit it.
        self.solve_cached(geometry)?;
        let snapshot = self.store.clone();
        let n_atoms = geometry.len();
        let delta = self.config.delta;
        let n_tasks = 6 * n_atoms;
        let base_seq = self.call_seq;
        self.call_seq += 1;

        let results: Vec<Mutex<Option<Result<T>>>> =
            (0..n_tasks).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let config = &self.config;
        let basis = &self.basis;
        let snapshot_ref = &snapshot;
        let results_ref = &results;
        let next_ref = &next;

        let n_workers = self.config.n_jobs.min(n_tasks).max(1);
        std::thread::scope(|scope| {
            for _ in 0..n_workers {
                scope.spawn(move || loop {
                    let task = next_ref.fetch_add(1, Ordering::Relaxed);
                    if task >= n_tasks {
                        break;
                    }
                    let atom = task / 6;
                    let axis = task % 6 / 2;
                    let sign = if task % 2 == 0 { T::one() } else { -T::one() };
                    let displaced = geometry.displaced(atom, axis, sign * delta);
                    let out = solve_pipeline(
                        config,
                        basis,
                        &displaced,
                        Some(snapshot_ref),
                        sample_stream(config, base_seq, task as u64 + 1),
                    )
                    .map(|s| s.energy_ha);
                    *results_ref[task].lock().unwrap() = Some(out);
                });
            }
        });

        // Fixed-order reduction.
        let mut energies = Vec::with_capacity(n_tasks);
        for slot in results {
            let v = slot.into_inner().unwrap().expect("worker filled every claimed slot")?;
            energies.push(v);
        }
        let mut forces = vec![[T::zero(); 3]; n_atoms];
        let ha_ev = T::of(HARTREE_EV);
        for atom in 0..n_atoms {
            for axis in 0..3 {
                let e_plus = energies[atom * 6 + axis * 2];
                let e_minus = energies[atom * 6 + axis * 2 + 1];
                forces[atom][axis] =
                    -(e_plus - e_minus) * ha_ev / (T::of(2.0) * delta);
            }
        }
        Ok(forces)
    }

    /// Forces plus the central-point properties.
    pub fn get_forces_and_properties(
        &mut self,
        geometry: &MolecularGeometry<T>,
    ) -> Result<PropertyResult<T>> {
        let forces = self.get_forces(geometry)?;
        let mut props = self.get_properties(geometry)?;
        props.forces_ev_per_a = Some(forces);
        Ok(props)
    }

    fn solve_cached(&mut self, geometry: &MolecularGeometry<T>) -> Result<&Solved<T>> {
        let key = geometry_key(geometry);
        let hit = matches!(&self.last, Some((k, _)) if *k == key);
        if !hit {
            let seq = self.call_seq;
            self.call_seq += 1;
            let snapshot = self.store.clone();
            let solved = solve_pipeline(
                &self.config,
                &self.basis,
                geometry,
                Some(&snapshot),
                sample_stream(&self.config, seq, 0),
            )?;
            if self.config.warm_start {
                self.store.density = Some(solved.density.clone());
                self.store.adapt_ops = solved.adapt_ops.clone();
                self.store.angles = solved.angles.clone();
                self.store.fci_vector = solved.fci_vector.clone();
            }
            self.last = Some((key, solved));
        }
        Ok(&self.last.as_ref().unwrap().1)
    }
}

/// Derive the per-evaluation sampling seed for call `seq`, task `tag`.
fn sample_stream<T: Real>(config: &CalculatorConfig<T>, seq: u64, tag: u64) -> u64 {
    match config.backend {
        Backend::Statevector => 0,
        Backend::Sampled { seed, .. } => {
            let mut x = seed ^ seq.wrapping_mul(0x9E3779B97F4A7C15) ^ tag.wrapping_mul(0xBF58476D1CE4E5B9);
            x ^= x >> 30;
            x = x.wrapping_mul(0xBF58476D1CE4E5B9);
            x ^= x >> 27;
            x
        }
    }
}

/// Run the full pipeline for one geometry. Pure function of its inputs;
/// `snapshot` is read-only warm-start data.
fn solve_pipeline<T: Real>(
    config: &CalculatorConfig<T>,
    basis: &BasisSet,
    geometry: &MolecularGeometry<T>,
    snapshot: Option<&ParameterStore<T>>,
    stream_seed: u64,
) -> Result<Solved<T>> {
    let t0 = Instant::now();
    if geometry.spin() != 0 {
        return Err(Error::Config(format!(
            "only closed-shell references are supported (spin = {})",
            geometry.spin()
        )));
    }
    let n_electrons = geometry.electron_count()?;
    if n_electrons % 2 != 0 {
        return Err(Error::Config(format!(
            "{n_electrons} electrons cannot form a closed shell"
        )));
    }

    let warm = config.warm_start;
    let ints = build_integrals(geometry, basis)?;
    let scf_opts = ScfOptions {
        initial_density: if warm {
            snapshot.and_then(|s| {
                s.density.as_ref().filter(|d| d.nrows() == ints.n_ao()).cloned()
            })
        } else {
            None
        },
        ..ScfOptions::default()
    };
    let warm_started = scf_opts.initial_density.is_some();
    let scf: ScfResult<T> = run_rhf(&ints, n_electrons, &scf_opts)?;
    let mo = ao_to_mo(&ints, &scf)?;
    let active =
        ActiveSpace::resolve(n_electrons, mo.n_mo(), config.coreorb, config.n_active_spatial)?;
    let (so, active_dipole) = apply_active_space(&mo, n_electrons, &active)?;
    let hamiltonian = jordan_wigner(&so)?;
    let dipole_ops = dipole_operators(&active_dipole)?;

    // Point the sampled backend at this evaluation's derived stream.
    let backend = match config.backend {
        Backend::Statevector => Backend::Statevector,
        Backend::Sampled { shots, .. } => Backend::Sampled { shots, seed: stream_seed },
    };

    let (energy_ha, state, op_count, iterations, converged, adapt_ops, angles) = match config.method
    {
        Method::FciOracle => {
            let guess = if warm { snapshot.and_then(|s| s.fci_vector.as_ref()) } else { None };
            let guess = guess.filter(|v| v.n_qubits() == hamiltonian.n_qubits());
            let ground = fci_ground_state_in_sector(
                &hamiltonian,
                active.n_active_electrons,
                0,
                guess,
            )?;
            (ground.energy, ground.state, 0, 0, true, None, None)
        }
        Method::Vqe => {
            let pool = build_uccsd_pool(&active)?;
            let warm_angles = if warm {
                snapshot
                    .and_then(|s| s.angles.as_ref())
                    .filter(|a| a.len() == pool.generators.len() && snapshot.unwrap().adapt_ops.is_none())
                    .cloned()
            } else {
                None
            };
            let vqe_config = VqeConfig {
                optimizer: config.optimizer,
                maxiter: config.maxiter,
                param_tol: config.param_tol,
                energy_tol: config.energy_tol,
                backend,
                warm_start: warm_angles,
            };
            let res = run_vqe(&hamiltonian, &pool, active.n_active_electrons, &vqe_config)?;
            if !res.converged && matches!(backend, Backend::Statevector) {
                return Err(Error::Convergence {
                    context: "VQE".into(),
                    cycles: res.iterations,
                    last_energy: res.energy.to_f64_lossy(),
                });
            }
            let state = prepare_state(&hamiltonian, &pool, active.n_active_electrons, None, &res.parameters)?;
            let n = res.iterations;
            (res.energy, state, pool.generators.len(), n, res.converged, None, Some(res.parameters))
        }
        Method::AdaptVqe => {
            let pool = build_uccsd_pool(&active)?;
            let warm_ops: Option<(Vec<usize>, Vec<T>)> = if warm {
                snapshot.and_then(|s| match (&s.adapt_ops, &s.angles) {
                    (Some(ops), Some(angles))
                        if ops.len() == angles.len()
                            && ops.iter().all(|&k| k < pool.generators.len()) =>
                    {
                        Some((ops.clone(), angles.clone()))
                    }
                    _ => None,
                })
            } else {
                None
            };
            let adapt_config = AdaptConfig {
                gradient_threshold: config.gradient_threshold,
                max_operators: config.max_operators,
                vqe: VqeConfig {
                    optimizer: config.optimizer,
                    maxiter: config.maxiter,
                    param_tol: config.param_tol,
                    energy_tol: config.energy_tol,
                    backend,
                    warm_start: None,
                },
            };
            let warm_ref = warm_ops
                .as_ref()
                .map(|(ops, angles)| (ops.as_slice(), angles.as_slice()));
            let adapt =
                adapt_vqe(&hamiltonian, &pool, active.n_active_electrons, &adapt_config, warm_ref)?;
            let state = prepare_state(
                &hamiltonian,
                &pool,
                active.n_active_electrons,
                Some(&adapt.selected),
                &adapt.result.parameters,
            )?;
            (
                adapt.result.energy,
                state,
                adapt.selected.len(),
                adapt.result.iterations,
                adapt.result.converged,
                Some(adapt.selected),
                Some(adapt.result.parameters),
            )
        }
    };

    let mut dipole_au = [T::zero(); 3];
    for (axis, op) in dipole_ops.iter().enumerate() {
        dipole_au[axis] = state.expectation(op)?;
    }

    let metadata = SolveMetadata {
        method: config.method,
        n_qubits: hamiltonian.n_qubits(),
        operator_count: op_count,
        solver_iterations: iterations,
        solver_converged: converged,
        scf_cycles: scf.cycles,
        n_frozen_core: active.n_frozen_core,
        n_active_spatial: active.n_active_spatial,
        n_active_electrons: active.n_active_electrons,
        dipole_origin_bohr: [
            ints.dipole_origin[0].to_f64_lossy(),
            ints.dipole_origin[1].to_f64_lossy(),
            ints.dipole_origin[2].to_f64_lossy(),
        ],
        frozen_core_dipole_included: true,
        warm_started,
        degenerate_ground: false,
        wall_time_s: t0.elapsed().as_secs_f64(),
    };

    Ok(Solved {
        energy_ha,
        dipole_au,
        metadata,
        density: scf.density,
        adapt_ops,
        angles,
        fci_vector: if matches!(config.method, Method::FciOracle) { Some(state) } else { None },
    })
}

/// Rebuild the converged statevector from pool selections and angles.
fn prepare_state<T: Real>(
    hamiltonian: &crate::pauli::SparsePauliSum<T>,
    pool: &crate::vqe::OperatorPool<T>,
    n_electrons: usize,
    selected: Option<&[usize]>,
    angles: &[T],
) -> Result<Statevector<T>> {
    use crate::ansatz::AnsatzState;
    use crate::statevector::hartree_fock_state;
    let n_qubits = hamiltonian.n_qubits();
    let reference: Statevector<T> =
        hartree_fock_state(n_qubits, n_electrons / 2, n_electrons - n_electrons / 2)?;
    let ref_index = reference
        .amplitudes()
        .iter()
        .position(|a| a.norm() > T::of(0.5))
        .expect("basis reference");
    let mut ansatz = AnsatzState::new(n_qubits, ref_index);
    match selected {
        Some(indices) => {
            for (&k, &theta) in indices.iter().zip(angles) {
                ansatz.push(pool.generators[k].clone(), theta);
            }
        }
        None => {
            for (gen, &theta) in pool.generators.iter().zip(angles) {
                ansatz.push(gen.clone(), theta);
            }
        }
    }
    ansatz.prepare()
}
