//! On-the-fly active learning: Langevin dynamics with a GP surrogate that
//! queries the quantum calculator only where its own uncertainty is high.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::calculator::Calculator;
use crate::error::Result;
use crate::geometry::MolecularGeometry;
use crate::md::gp::{
    descriptor, forces_to_descriptor_gradient, GpHyperparameters, SurrogateModel, TrainingPoint,
};
use crate::md::{langevin_step, ForceSource, Frame, MdConfig, MdState};
use crate::scalar::Real;

/// Query policy for the active-learning loop.
#[derive(Debug, Clone)]
pub struct AlPolicy<T> {
    /// Predicted-std trigger (eV); `None` calibrates from a 10-step pilot.
    pub variance_threshold: Option<T>,
    /// Mandatory quantum calls at the start of the run.
    pub n_initial: usize,
    /// Refit the surrogate after this many new training points.
    pub refit_every: usize,
    /// Re-optimize kernel hyperparameters on refits.
    pub optimize_hyperparameters: bool,
}

impl<T: Real> Default for AlPolicy<T> {
    fn default() -> Self {
        Self {
            variance_threshold: None,
            n_initial: 3,
            refit_every: 1,
            optimize_hyperparameters: true,
        }
    }
}

/// One quantum query in the log.
#[derive(Debug, Clone)]
pub struct QueryRecord<T> {
    pub step: usize,
    /// Predicted std before retraining (absent while the model is empty).
    pub predicted_std: Option<T>,
    pub energy_ev: T,
}

/// Outcome of an active-learning MD run.
#[derive(Debug, Clone)]
pub struct AlOutcome<T> {
    pub frames: Vec<Frame<T>>,
    pub queries: Vec<QueryRecord<T>>,
    /// Threshold actually applied (after calibration).
    pub threshold_used: T,
    pub final_state: MdState<T>,
}

/// Render the query log as delimited text; the header records the policy.
pub fn query_log<T: Real>(outcome: &AlOutcome<T>, n_steps: usize) -> String {
    let mut out = format!(
        "# variance_threshold_ev={:.6e} n_steps={} n_queries={}\nstep\tpredicted_std_ev\tenergy_ev\n",
        outcome.threshold_used.to_f64_lossy(),
        n_steps,
        outcome.queries.len()
    );
    for q in &outcome.queries {
        out.push_str(&format!(
            "{}\t{}\t{:.10}\n",
            q.step,
            q.predicted_std
                .map(|s| format!("{:.6e}", s.to_f64_lossy()))
                .unwrap_or_else(|| "-".into()),
            q.energy_ev.to_f64_lossy()
        ));
    }
    out
}

const PILOT_STEPS: usize = 10;
const CALIBRATION_FACTOR: f64 = 3.0;

struct Learner<'a, T: Real> {
    calc: &'a mut Calculator<T>,
    template: MolecularGeometry<T>,
    model: Option<SurrogateModel<T>>,
    training: Vec<TrainingPoint<T>>,
    pending_since_fit: usize,
    policy: AlPolicy<T>,
    hyper: GpHyperparameters<T>,
    queries: Vec<QueryRecord<T>>,
    pilot_stds: Vec<T>,
    threshold: Option<T>,
}

impl<'a, T: Real> Learner<'a, T> {
    fn quantum(&mut self, positions: &[[T; 3]]) -> Result<(T, Vec<[T; 3]>)> {
        let geom = self.template.with_positions(positions.to_vec());
        let forces = self.calc.get_forces(&geom)?;
        let energy = self.calc.get_potential_energy(&geom)?;
        Ok((energy, forces))
    }

    fn add_point(&mut self, positions: &[[T; 3]], energy: T, forces: &[[T; 3]]) -> Result<()> {
        let (desc, jac) = descriptor(positions);
        let gradient = forces_to_descriptor_gradient(&jac, forces);
        self.training.push(TrainingPoint {
            descriptor: desc,
            energy,
            gradient,
            forces: forces.to_vec(),
        });
        self.pending_since_fit += 1;
        if self.pending_since_fit >= self.policy.refit_every || self.model.is_none() {
            self.refit()?;
        }
        Ok(())
    }

    fn refit(&mut self) -> Result<()> {
        let model = SurrogateModel::fit(
            self.training.clone(),
            self.hyper.clone(),
            self.policy.optimize_hyperparameters && self.training.len() >= 3,
        )?;
        self.hyper = model.hyper.clone();
        self.model = Some(model);
        self.pending_since_fit = 0;
        Ok(())
    }

    /// Force provider for one MD step; decides surrogate vs quantum.
    fn provide(&mut self, step: usize, positions: &[[T; 3]]) -> Result<(Vec<[T; 3]>, T, ForceSource)> {
        let calibrating = self.threshold.is_none();
        let prediction = self.model.as_ref().map(|m| m.predict(positions));
        let predicted_std = prediction.as_ref().map(|p| p.std);

        let forced = step <= self.policy.n_initial || (calibrating && step <= PILOT_STEPS);
        let triggered = match (self.threshold, predicted_std) {
            (Some(thr), Some(std)) => std > thr,
            (Some(_), None) => true,
            (None, _) => true, // still calibrating: always query
        };

        if forced || triggered {
            let (energy, forces) = self.quantum(positions)?;
            self.queries.push(QueryRecord { step, predicted_std, energy_ev: energy });
            if calibrating {
                if let Some(std) = predicted_std {
                    self.pilot_stds.push(std);
                }
                if step >= PILOT_STEPS {
                    self.threshold = Some(calibrate(&self.pilot_stds));
                }
            }
            self.add_point(positions, energy, &forces)?;
            Ok((forces, energy, ForceSource::Quantum))
        } else {
            let p = prediction.expect("threshold set implies a trained model");
            Ok((p.forces, p.energy, ForceSource::Surrogate))
        }
    }
}

fn calibrate<T: Real>(stds: &[T]) -> T {
    if stds.is_empty() {
        return T::of(1e-3);
    }
    let mut sorted = stds.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    (median * T::of(CALIBRATION_FACTOR)).max(T::of(1e-6))
}

/// Langevin MD with uncertainty-triggered quantum queries.
///
/// Every frame records positions, the energy actually used for propagation
/// and its provenance; every quantum query lands in the log. With
/// `variance_threshold = Some(0)` the run degenerates to direct quantum MD,
/// bit for bit.
pub fn al_md_run<T: Real>(
    geometry: &MolecularGeometry<T>,
    calc: &mut Calculator<T>,
    md: &MdConfig<T>,
    policy: &AlPolicy<T>,
) -> Result<AlOutcome<T>> {
    let mut rng = ChaCha12Rng::seed_from_u64(md.seed);
    let mut learner = Learner {
        calc,
        template: geometry.clone(),
        model: None,
        training: Vec::new(),
        pending_since_fit: 0,
        policy: policy.clone(),
        hyper: GpHyperparameters::default(),
        queries: Vec::new(),
        pilot_stds: Vec::new(),
        threshold: policy.variance_threshold,
    };

    // Step 0: quantum evaluation at the initial geometry.
    let (e0, f0) = learner.quantum(geometry.positions())?;
    learner.queries.push(QueryRecord { step: 0, predicted_std: None, energy_ev: e0 });
    learner.add_point(geometry.positions(), e0, &f0)?;

    let mut state = MdState::initialize(geometry, f0, md.temperature_k, &mut rng)?;
    let mut frames = Vec::with_capacity(md.n_steps + 1);
    frames.push(Frame {
        step: 0,
        positions: state.positions.clone(),
        energy_ev: e0,
        source: ForceSource::Quantum,
        temperature_k: state.temperature(),
    });

    for step in 1..=md.n_steps {
        let mut used: Option<(T, ForceSource)> = None;
        {
            let learner_ref = &mut learner;
            let used_ref = &mut used;
            langevin_step(&mut state, md, &mut rng, |positions| {
                let (forces, energy, source) = learner_ref.provide(step, positions)?;
                *used_ref = Some((energy, source));
                Ok(forces)
            })?;
        }
        let (energy, source) = used.expect("provider ran");
        frames.push(Frame {
            step,
            positions: state.positions.clone(),
            energy_ev: energy,
            source,
            temperature_k: state.temperature(),
        });
    }

    let threshold_used = learner.threshold.unwrap_or_else(|| calibrate(&learner.pilot_stds));
    Ok(AlOutcome { frames, queries: learner.queries, threshold_used, final_state: state })
}

/// Plain Langevin MD with the quantum calculator on every step; the
/// reference trajectory for the active-learning equivalence check.
pub fn direct_md_run<T: Real>(
    geometry: &MolecularGeometry<T>,
    calc: &mut Calculator<T>,
    md: &MdConfig<T>,
) -> Result<(Vec<Frame<T>>, MdState<T>)> {
    let mut rng = ChaCha12Rng::seed_from_u64(md.seed);
    let template = geometry.clone();
    let eval = |positions: &[[T; 3]], calc: &mut Calculator<T>| -> Result<(T, Vec<[T; 3]>)> {
        let geom = template.with_positions(positions.to_vec());
        let forces = calc.get_forces(&geom)?;
        let energy = calc.get_potential_energy(&geom)?;
        Ok((energy, forces))
    };
    let (e0, f0) = eval(geometry.positions(), calc)?;
    let mut state = MdState::initialize(geometry, f0, md.temperature_k, &mut rng)?;
    let mut frames = Vec::with_capacity(md.n_steps + 1);
    frames.push(Frame {
        step: 0,
        positions: state.positions.clone(),
        energy_ev: e0,
        source: ForceSource::Quantum,
        temperature_k: state.temperature(),
    });
    for step in 1..=md.n_steps {
        let mut last_energy = e0;
        {
            let last = &mut last_energy;
            let calc_ref: &mut Calculator<T> = calc;
            langevin_step(&mut state, md, &mut rng, |positions| {
                let geom = template.with_positions(positions.to_vec());
                let forces = calc_ref.get_forces(&geom)?;
                *last = calc_ref.get_potential_energy(&geom)?;
                Ok(forces)
            })?;
        }
        frames.push(Frame {
            step,
            positions: state.positions.clone(),
            energy_ev: last_energy,
            source: ForceSource::Quantum,
            temperature_k: state.temperature(),
        });
    }
    Ok((frames, state))
}
