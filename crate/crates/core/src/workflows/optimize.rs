//! Force-driven structure tasks: local BFGS relaxation, random structure
//! seeds, and minima-hopping global search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use ndarray::Array2;

use crate::calculator::Calculator;
use crate::error::{Error, Result};
use crate::geometry::MolecularGeometry;
use crate::linalg;
use crate::md::{langevin_step, MdConfig, MdState};
use crate::scalar::Real;

/// Convergence settings for the local optimizer.
#[derive(Debug, Clone)]
pub struct OptimizeConfig<T> {
    /// Maximum per-atom force norm at convergence (eV/A).
    pub fmax: T,
    pub max_steps: usize,
    /// Largest allowed per-atom displacement per step (Angstrom).
    pub max_step_length: T,
}

impl<T: Real> Default for OptimizeConfig<T> {
    fn default() -> Self {
        Self { fmax: T::of(0.005), max_steps: 200, max_step_length: T::of(0.2) }
    }
}

/// One accepted optimization step.
#[derive(Debug, Clone)]
pub struct OptStep<T> {
    pub positions: Vec<[T; 3]>,
    pub energy_ev: T,
    pub fmax_ev_a: T,
}

/// Relaxation outcome with the accepted-step trajectory.
#[derive(Debug, Clone)]
pub struct OptimizationOutcome<T> {
    pub geometry: MolecularGeometry<T>,
    pub energy_ev: T,
    pub steps: usize,
    pub converged: bool,
    pub trajectory: Vec<OptStep<T>>,
}

fn max_atom_force<T: Real>(forces: &[[T; 3]]) -> T {
    forces
        .iter()
        .map(|f| (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt())
        .fold(T::zero(), |a, b| a.max(b))
}

/// Quasi-Newton relaxation on Cartesian coordinates.
///
/// BFGS Hessian updates with eigenvalue-clamped steps capped at
/// `max_step_length`; a step that would raise the energy is halved (up to
/// four times) so accepted steps decrease the energy monotonically.
pub fn optimize_bfgs<T: Real>(
    geometry: &MolecularGeometry<T>,
    calc: &mut Calculator<T>,
    config: &OptimizeConfig<T>,
) -> Result<OptimizationOutcome<T>> {
    if config.fmax <= T::zero() {
        return Err(Error::Config("fmax must be positive".into()));
    }
    let n = geometry.len();
    let dim = 3 * n;
    let mut hessian = Array2::<T>::eye(dim).mapv(|v| v * T::of(70.0));
    let mut geom = geometry.clone();
    let mut forces = calc.get_forces(&geom)?;
    let mut energy = calc.get_potential_energy(&geom)?;
    let mut trajectory = vec![OptStep {
        positions: geom.positions().to_vec(),
        energy_ev: energy,
        fmax_ev_a: max_atom_force(&forces),
    }];

    let mut prev: Option<(Vec<T>, Vec<T>)> = None; // (positions, forces) flat
    let flat = |positions: &[[T; 3]]| -> Vec<T> {
        positions.iter().flat_map(|p| p.iter().copied()).collect()
    };

    for step in 0..config.max_steps {
        let fmax_now = max_atom_force(&forces);
        if fmax_now < config.fmax {
            return Ok(OptimizationOutcome {
                geometry: geom,
                energy_ev: energy,
                steps: step,
                converged: true,
                trajectory,
            });
        }

        let f_flat: Vec<T> = flat(&forces);
        let x_flat: Vec<T> = flat(geom.positions());

        // BFGS update from the previous accepted step.
        if let Some((x_prev, f_prev)) = &prev {
            let mut s = vec![T::zero(); dim];
            let mut y = vec![T::zero(); dim];
            let mut sy = T::zero();
            for i in 0..dim {
                s[i] = x_flat[i] - x_prev[i];
                y[i] = f_prev[i] - f_flat[i]; // y = -(F_new - F_old) = grad diff
                sy += s[i] * y[i];
            }
            if sy > T::of(1e-12) {
                let mut hs = vec![T::zero(); dim];
                for i in 0..dim {
                    for j in 0..dim {
                        hs[i] += hessian[[i, j]] * s[j];
                    }
                }
                let shs: T = s.iter().zip(&hs).map(|(a, b)| *a * *b).sum();
                for i in 0..dim {
                    for j in 0..dim {
                        hessian[[i, j]] += y[i] * y[j] / sy - hs[i] * hs[j] / shs;
                    }
                }
            }
        }
        prev = Some((x_flat.clone(), f_flat.clone()));

        // Step from the eigen-clamped Newton direction.
        let (w, v) = linalg::eigh(&hessian);
        let floor = T::of(1e-3);
        let mut step_vec = vec![T::zero(); dim];
        for k in 0..dim {
            let mut proj = T::zero();
            for i in 0..dim {
                proj += v[[i, k]] * f_flat[i];
            }
            let lam = w[k].abs().max(floor);
            for i in 0..dim {
                step_vec[i] += v[[i, k]] * proj / lam;
            }
        }
        // Cap the largest per-atom displacement.
        let mut longest = T::zero();
        for a in 0..n {
            let d = (step_vec[3 * a] * step_vec[3 * a]
                + step_vec[3 * a + 1] * step_vec[3 * a + 1]
                + step_vec[3 * a + 2] * step_vec[3 * a + 2])
                .sqrt();
            longest = longest.max(d);
        }
        if longest > config.max_step_length {
            let scale = config.max_step_length / longest;
            for s in &mut step_vec {
                *s *= scale;
            }
        }

        // Energy backtracking: accepted steps never raise the energy.
        let mut accepted = false;
        let mut scale = T::one();
        for _ in 0..5 {
            let new_positions: Vec<[T; 3]> = geom
                .positions()
                .iter()
                .enumerate()
                .map(|(a, p)| {
                    [
                        p[0] + scale * step_vec[3 * a],
                        p[1] + scale * step_vec[3 * a + 1],
                        p[2] + scale * step_vec[3 * a + 2],
                    ]
                })
                .collect();
            let trial = geom.with_positions(new_positions);
            let e_trial = calc.get_potential_energy(&trial)?;
            if e_trial <= energy + T::of(1e-12) {
                geom = trial;
                energy = e_trial;
                forces = calc.get_forces(&geom)?;
                accepted = true;
                break;
            }
            scale = scale * T::of(0.5);
        }
        if !accepted {
            // The quadratic model is unusable at this resolution; treat the
            // incumbent as converged-to-noise.
            return Ok(OptimizationOutcome {
                geometry: geom,
                energy_ev: energy,
                steps: step,
                converged: false,
                trajectory,
            });
        }
        trajectory.push(OptStep {
            positions: geom.positions().to_vec(),
            energy_ev: energy,
            fmax_ev_a: max_atom_force(&forces),
        });
    }

    let converged = max_atom_force(&forces) < config.fmax;
    Ok(OptimizationOutcome {
        geometry: geom,
        energy_ev: energy,
        steps: config.max_steps,
        converged,
        trajectory,
    })
}

/// Rejection-sample positions in a cubic box with a minimum pairwise
/// distance; deterministic per seed.
pub fn random_positions_with_min_distance<T: Real>(
    n_atoms: usize,
    min_dist: T,
    box_size: T,
    seed: u64,
) -> Result<Vec<[T; 3]>> {
    const MAX_REJECTIONS: usize = 100_000;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut positions: Vec<[T; 3]> = Vec::with_capacity(n_atoms);
    let mut rejections = 0usize;
    while positions.len() < n_atoms {
        let candidate = [
            T::of(rng.gen_range(0.0..1.0)) * box_size,
            T::of(rng.gen_range(0.0..1.0)) * box_size,
            T::of(rng.gen_range(0.0..1.0)) * box_size,
        ];
        let ok = positions.iter().all(|p| {
            let mut d2 = T::zero();
            for k in 0..3 {
                let d = p[k] - candidate[k];
                d2 += d * d;
            }
            d2.sqrt() >= min_dist
        });
        if ok {
            positions.push(candidate);
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::Packing(format!(
                    "{n_atoms} atoms with min_dist {min_dist} do not fit a {box_size} box"
                )));
            }
        }
    }
    Ok(positions)
}

/// Minima-hopping settings; adjustment factors follow the classic scheme.
#[derive(Debug, Clone)]
pub struct HoppingConfig<T> {
    /// Initial acceptance window (eV).
    pub ediff0: T,
    /// Initial MD temperature (K).
    pub t0: T,
    pub total_steps: usize,
    pub seed: u64,
    /// Langevin steps per escape burst.
    pub md_steps: usize,
    pub md_timestep_fs: T,
    pub optimize: OptimizeConfig<T>,
    /// Acceptance-window factor on accept.
    pub ediff_factor: T,
    /// Temperature factor on accept (1/1.02) and on reject (1.1).
    pub t_down: T,
    pub t_up: T,
}

impl<T: Real> Default for HoppingConfig<T> {
    fn default() -> Self {
        Self {
            ediff0: T::of(2.5),
            t0: T::of(4000.0),
            total_steps: 50,
            seed: 0,
            md_steps: 30,
            md_timestep_fs: T::of(1.0),
            optimize: OptimizeConfig::default(),
            ediff_factor: T::of(0.98),
            t_down: T::of(1.0 / 1.02),
            t_up: T::of(1.1),
        }
    }
}

/// A distinct local minimum.
#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub geometry: MolecularGeometry<T>,
    pub energy_ev: T,
    /// Sorted interatomic distances, the structure fingerprint.
    pub fingerprint: Vec<T>,
}

fn fingerprint<T: Real>(geometry: &MolecularGeometry<T>) -> Vec<T> {
    let n = geometry.len();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(geometry.distance(i, j));
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists
}

fn same_minimum<T: Real>(a: &Minimum<T>, energy: T, fp: &[T]) -> bool {
    if (a.energy_ev - energy).abs() > T::of(1e-3) {
        return false;
    }
    a.fingerprint
        .iter()
        .zip(fp)
        .all(|(x, y)| (*x - *y).abs() < T::of(1e-2))
}

/// Alternate heated Langevin escapes with quenches, keeping every distinct
/// minimum. Returns minima sorted by energy; budget exhaustion returns what
/// was found.
pub fn minima_hopping<T: Real>(
    geometry: &MolecularGeometry<T>,
    calc: &mut Calculator<T>,
    config: &HoppingConfig<T>,
) -> Result<Vec<Minimum<T>>> {
    if config.ediff0 <= T::zero() || config.t0 <= T::zero() {
        return Err(Error::Config("Ediff0 and T0 must be positive".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut minima: Vec<Minimum<T>> = Vec::new();
    let mut ediff = config.ediff0;
    let mut temperature = config.t0;

    let quench = |geom: &MolecularGeometry<T>, calc: &mut Calculator<T>| -> Result<(MolecularGeometry<T>, T)> {
        let out = optimize_bfgs(geom, calc, &config.optimize)?;
        Ok((out.geometry, out.energy_ev))
    };

    let (mut current, mut e_last) = quench(geometry, calc)?;
    minima.push(Minimum {
        geometry: current.clone(),
        energy_ev: e_last,
        fingerprint: fingerprint(&current),
    });

    for _hop in 0..config.total_steps {
        // Heated escape burst.
        let md = MdConfig {
            timestep_fs: config.md_timestep_fs,
            temperature_k: temperature,
            friction_per_fs: T::of(0.02),
            n_steps: config.md_steps,
            seed: rng.gen(),
        };
        let mut burst_rng = ChaCha12Rng::seed_from_u64(md.seed);
        let forces0 = calc.get_forces(&current)?;
        let mut state = MdState::initialize(&current, forces0, temperature, &mut burst_rng)?;
        let template = current.clone();
        let mut md_failed = false;
        for _ in 0..config.md_steps {
            let calc_ref: &mut Calculator<T> = calc;
            let res = langevin_step(&mut state, &md, &mut burst_rng, |positions| {
                calc_ref.get_forces(&template.with_positions(positions.to_vec()))
            });
            if res.is_err() {
                md_failed = true;
                break;
            }
        }
        if md_failed {
            temperature = temperature * config.t_up;
            continue;
        }
        let escaped = current.with_positions(state.positions.clone());

        let (candidate, e_new) = match quench(&escaped, calc) {
            Ok(v) => v,
            Err(_) => {
                temperature = temperature * config.t_up;
                continue;
            }
        };
        let fp = fingerprint(&candidate);
        let revisit = minima.iter().any(|m| same_minimum(m, e_new, &fp));
        if revisit {
            temperature = temperature * config.t_up;
            continue;
        }
        minima.push(Minimum { geometry: candidate.clone(), energy_ev: e_new, fingerprint: fp });
        if e_new < e_last + ediff {
            current = candidate;
            e_last = e_new;
            ediff = ediff * config.ediff_factor;
            temperature = temperature * config.t_down;
        } else {
            temperature = temperature * config.t_up;
        }
    }

    minima.sort_by(|a, b| a.energy_ev.partial_cmp(&b.energy_ev).unwrap());
    Ok(minima)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_positions_respect_min_distance() {
        let single = random_positions_with_min_distance::<f64>(1, 0.6, 3.0, 1).unwrap();
        assert_eq!(single.len(), 1);
        for c in single[0] {
            assert!((0.0..=3.0).contains(&c));
        }
        let pts = random_positions_with_min_distance::<f64>(3, 0.6, 3.0, 7).unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let d: f64 = (0..3)
                    .map(|k| (pts[i][k] - pts[j][k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(d >= 0.6, "pair ({i},{j}) at {d}");
            }
        }
        // Determinism.
        let again = random_positions_with_min_distance::<f64>(3, 0.6, 3.0, 7).unwrap();
        assert_eq!(pts, again);
        // Overpacked request fails.
        assert!(matches!(
            random_positions_with_min_distance::<f64>(50, 2.9, 3.0, 1),
            Err(Error::Packing(_))
        ));
    }
}
