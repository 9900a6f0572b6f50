//! Langevin NVT dynamics and active-learning acceleration.

pub mod active;
pub mod gp;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::constants::{atomic_mass, KB_EV, MD_TIME_FS};
use crate::error::{Error, Result};
use crate::geometry::MolecularGeometry;
use crate::scalar::Real;

/// Langevin thermostat parameters.
#[derive(Debug, Clone)]
pub struct MdConfig<T> {
    pub timestep_fs: T,
    pub temperature_k: T,
    /// Friction coefficient in fs^-1.
    pub friction_per_fs: T,
    pub n_steps: usize,
    pub seed: u64,
}

impl<T: Real> Default for MdConfig<T> {
    fn default() -> Self {
        Self {
            timestep_fs: T::of(0.5),
            temperature_k: T::of(300.0),
            friction_per_fs: T::of(0.01),
            n_steps: 1000,
            seed: 0,
        }
    }
}

impl<T: Real> MdConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.timestep_fs <= T::zero() {
            return Err(Error::Config("timestep must be positive".into()));
        }
        if self.temperature_k < T::zero() {
            return Err(Error::Config("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

/// Dynamical state: positions in Angstrom, velocities in internal units
/// (Angstrom per sqrt(amu A^2/eV) = 10.1805 fs), masses in amu, cached
/// forces in eV/A at the current positions.
#[derive(Debug, Clone)]
pub struct MdState<T> {
    pub positions: Vec<[T; 3]>,
    pub velocities: Vec<[T; 3]>,
    pub masses: Vec<T>,
    pub forces: Vec<[T; 3]>,
}

impl<T: Real> MdState<T> {
    /// Initialize from a geometry with Maxwell-Boltzmann velocities at the
    /// target temperature (center-of-mass motion removed) and the provided
    /// initial forces.
    pub fn initialize<R: Rng>(
        geometry: &MolecularGeometry<T>,
        forces: Vec<[T; 3]>,
        temperature_k: T,
        rng: &mut R,
    ) -> Result<Self> {
        let masses: Vec<T> = geometry
            .symbols()
            .iter()
            .map(|s| {
                atomic_mass(s)
                    .map(T::of)
                    .ok_or_else(|| Error::Config(format!("no mass for element {s}")))
            })
            .collect::<Result<_>>()?;
        let kt = T::of(KB_EV) * temperature_k;
        let mut velocities = Vec::with_capacity(masses.len());
        for m in &masses {
            let sigma = (kt / *m).sqrt();
            let mut v = [T::zero(); 3];
            for vk in &mut v {
                let xi: f64 = rng.sample(StandardNormal);
                *vk = sigma * T::of(xi);
            }
            velocities.push(v);
        }
        let mut state = Self { positions: geometry.positions().to_vec(), velocities, masses, forces };
        state.remove_com_velocity();
        Ok(state)
    }

    pub fn remove_com_velocity(&mut self) {
        let total_mass: T = self.masses.iter().copied().sum();
        let mut p = [T::zero(); 3];
        for (v, m) in self.velocities.iter().zip(&self.masses) {
            for k in 0..3 {
                p[k] += v[k] * *m;
            }
        }
        for v in &mut self.velocities {
            for k in 0..3 {
                v[k] -= p[k] / total_mass;
            }
        }
    }

    /// Kinetic energy in eV (velocities are in internal units).
    pub fn kinetic_energy(&self) -> T {
        let mut ke = T::zero();
        for (v, m) in self.velocities.iter().zip(&self.masses) {
            for vk in v {
                ke += T::of(0.5) * *m * *vk * *vk;
            }
        }
        ke
    }

    /// Instantaneous kinetic temperature (K); the center of mass is pinned,
    /// so three degrees of freedom are excluded.
    pub fn temperature(&self) -> T {
        let dof = 3 * self.masses.len() - 3;
        if dof == 0 {
            return T::zero();
        }
        T::of(2.0) * self.kinetic_energy() / (T::of_usize(dof) * T::of(KB_EV))
    }
}

/// One BAOAB step of the Langevin integrator.
///
/// `force_provider` is called exactly once, at the new positions; forces at
/// the current positions come from the state cache. With zero friction and
/// zero temperature the scheme reduces exactly to velocity Verlet.
pub fn langevin_step<T: Real, R: Rng>(
    state: &mut MdState<T>,
    config: &MdConfig<T>,
    rng: &mut R,
    mut force_provider: impl FnMut(&[[T; 3]]) -> Result<Vec<[T; 3]>>,
) -> Result<()> {
    config.validate()?;
    let dt = config.timestep_fs / T::of(MD_TIME_FS);
    let half = dt * T::of(0.5);
    let gamma = config.friction_per_fs * T::of(MD_TIME_FS);
    let kt = T::of(KB_EV) * config.temperature_k;

    let n = state.masses.len();
    for i in 0..n {
        for k in 0..3 {
            if !state.forces[i][k].is_finite() {
                return Err(Error::Contract("non-finite force".into()));
            }
            // B: half kick with cached forces.
            state.velocities[i][k] += half * state.forces[i][k] / state.masses[i];
            // A: half drift.
            state.positions[i][k] += half * state.velocities[i][k];
        }
    }
    // O: exact Ornstein-Uhlenbeck velocity update.
    let c1 = (-gamma * dt).exp();
    let c2 = (T::one() - c1 * c1).max(T::zero()).sqrt();
    for i in 0..n {
        let sigma = (kt / state.masses[i]).sqrt();
        for k in 0..3 {
            let xi: f64 = rng.sample(StandardNormal);
            state.velocities[i][k] = c1 * state.velocities[i][k] + c2 * sigma * T::of(xi);
        }
    }
    for i in 0..n {
        for k in 0..3 {
            // A: second half drift.
            state.positions[i][k] += half * state.velocities[i][k];
        }
    }
    // B: closing half kick with fresh forces.
    state.forces = force_provider(&state.positions)?;
    for i in 0..n {
        for k in 0..3 {
            state.velocities[i][k] += half * state.forces[i][k] / state.masses[i];
        }
    }
    state.remove_com_velocity();
    Ok(())
}

/// Which engine produced a trajectory frame's energy and forces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceSource {
    Quantum,
    Surrogate,
}

impl std::fmt::Display for ForceSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ForceSource::Quantum => write!(f, "quantum"),
            ForceSource::Surrogate => write!(f, "surrogate"),
        }
    }
}

/// One recorded MD frame.
#[derive(Debug, Clone)]
pub struct Frame<T> {
    pub step: usize,
    pub positions: Vec<[T; 3]>,
    pub energy_ev: T,
    pub source: ForceSource,
    pub temperature_k: T,
}

/// Render frames as multi-frame XYZ with `E=<eV> source=<..>` comments.
pub fn trajectory_xyz<T: Real>(symbols: &[String], frames: &[Frame<T>]) -> String {
    let mut out = String::new();
    for frame in frames {
        out.push_str(&format!(
            "{}\nstep={} E={:.10} source={} T={:.2}\n",
            symbols.len(),
            frame.step,
            frame.energy_ev.to_f64_lossy(),
            frame.source,
            frame.temperature_k.to_f64_lossy()
        ));
        for (s, p) in symbols.iter().zip(&frame.positions) {
            out.push_str(&format!(
                "{s} {:.10} {:.10} {:.10}\n",
                p[0].to_f64_lossy(),
                p[1].to_f64_lossy(),
                p[2].to_f64_lossy()
            ));
        }
    }
    out
}
