//! Gaussian-process surrogate over rotation/permutation-invariant
//! descriptors, with force labels folded in as derivative observations.
//!
//! The descriptor is the sorted vector of inverse pairwise distances. An
//! energy GP with a squared-exponential kernel is conditioned on energies
//! and on descriptor-space gradients obtained from the Cartesian force
//! labels through the chain rule (least squares through the descriptor
//! Jacobian); forces are predicted by differentiating the posterior mean
//! back through the same Jacobian.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Sorted inverse pairwise distances (1/Angstrom) and the permutation that
/// sorts them, plus the Jacobian d(descriptor)/d(positions).
pub fn descriptor<T: Real>(positions: &[[T; 3]]) -> (Vec<T>, Array2<T>) {
    let n = positions.len();
    let n_pairs = n * (n - 1) / 2;
    let mut vals: Vec<(T, usize, usize)> = Vec::with_capacity(n_pairs);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d2 = T::zero();
            for k in 0..3 {
                let d = positions[i][k] - positions[j][k];
                d2 += d * d;
            }
            vals.push((T::one() / d2.sqrt(), i, j));
        }
    }
    vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite descriptor"));
    let mut desc = Vec::with_capacity(n_pairs);
    let mut jac = Array2::<T>::zeros((n_pairs, 3 * n));
    for (row, (inv_r, i, j)) in vals.into_iter().enumerate() {
        desc.push(inv_r);
        // d(1/r)/dx_i = -(x_i - x_j)/r^3
        let r3 = inv_r * inv_r * inv_r;
        for k in 0..3 {
            let diff = positions[i][k] - positions[j][k];
            jac[[row, 3 * i + k]] = -diff * r3;
            jac[[row, 3 * j + k]] = diff * r3;
        }
    }
    (desc, jac)
}

/// Kernel hyperparameters.
#[derive(Debug, Clone)]
pub struct GpHyperparameters<T> {
    /// Length scale in descriptor units (1/Angstrom).
    pub length_scale: T,
    /// Signal standard deviation (eV).
    pub signal_std: T,
    /// Energy observation noise (eV).
    pub noise_std: T,
    /// Gradient observation noise (eV per descriptor unit).
    pub gradient_noise_std: T,
}

impl<T: Real> Default for GpHyperparameters<T> {
    fn default() -> Self {
        Self {
            length_scale: T::of(0.2),
            signal_std: T::of(1.0),
            noise_std: T::of(1e-5),
            gradient_noise_std: T::of(1e-4),
        }
    }
}

/// One training observation.
#[derive(Debug, Clone)]
pub struct TrainingPoint<T> {
    pub descriptor: Vec<T>,
    /// Energy label (eV).
    pub energy: T,
    /// Gradient of the energy in descriptor space (eV per unit descriptor).
    pub gradient: Vec<T>,
    /// Original Cartesian forces (eV/A), kept for validation.
    pub forces: Vec<[T; 3]>,
}

/// Convert Cartesian forces to a descriptor-space gradient by least
/// squares: F = -J^T g, solved through the pseudoinverse of J^T.
pub fn forces_to_descriptor_gradient<T: Real>(
    jacobian: &Array2<T>,
    forces: &[[T; 3]],
) -> Vec<T> {
    let n3 = jacobian.ncols();
    let mut f_flat = Array1::<T>::zeros(n3);
    for (i, f) in forces.iter().enumerate() {
        for k in 0..3 {
            f_flat[3 * i + k] = -f[k];
        }
    }
    // g = (J^T)^+ (-F) = pinv(J^T) . f_flat ; J^T is (3n x D).
    let jt = jacobian.t().to_owned();
    let jt_pinv = linalg::pinv(&jt, T::of(1e-10));
    jt_pinv.dot(&f_flat).to_vec()
}

/// Trained surrogate model.
#[derive(Debug, Clone)]
pub struct SurrogateModel<T> {
    pub hyper: GpHyperparameters<T>,
    points: Vec<TrainingPoint<T>>,
    /// Cholesky factor of the joint (value + gradient) kernel matrix.
    chol: Array2<T>,
    /// K^-1 (y - prior_mean) over the stacked observation vector.
    alpha: Array1<T>,
    prior_mean: T,
    dim: usize,
}

/// Surrogate prediction at one geometry.
#[derive(Debug, Clone)]
pub struct Prediction<T> {
    pub energy: T,
    /// Predictive standard deviation of the latent energy (eV).
    pub std: T,
    pub forces: Vec<[T; 3]>,
}

fn kernel_value<T: Real>(a: &[T], b: &[T], h: &GpHyperparameters<T>) -> T {
    let mut d2 = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        d2 += d * d;
    }
    let l2 = h.length_scale * h.length_scale;
    h.signal_std * h.signal_std * (-d2 / (T::of(2.0) * l2)).exp()
}

impl<T: Real> SurrogateModel<T> {
    /// Fit the joint GP. With `optimize` set, the length scale is refined
    /// by a log-marginal-likelihood line scan before the final factorization.
    pub fn fit(
        points: Vec<TrainingPoint<T>>,
        mut hyper: GpHyperparameters<T>,
        optimize: bool,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("GP needs at least one training point".into()));
        }
        let dim = points[0].descriptor.len();
        for p in &points {
            if p.descriptor.len() != dim || p.gradient.len() != dim {
                return Err(Error::Config("inconsistent descriptor dimensions".into()));
            }
        }
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                let d2: T = a
                    .descriptor
                    .iter()
                    .zip(&b.descriptor)
                    .map(|(x, y)| (*x - *y) * (*x - *y))
                    .sum();
                if d2.sqrt() < T::of(1e-12) {
                    return Err(Error::Config(
                        "duplicate training point makes the kernel singular".into(),
                    ));
                }
            }
        }
        if optimize && points.len() >= 3 {
            let mut best = (T::neg_infinity(), hyper.length_scale);
            for factor in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let mut h = hyper.clone();
                h.length_scale = hyper.length_scale * T::of(factor);
                if let Ok(lml) = log_marginal_likelihood(&points, &h) {
                    if lml > best.0 {
                        best = (lml, h.length_scale);
                    }
                }
            }
            if best.0.is_finite() {
                hyper.length_scale = best.1;
            }
        }
        let (chol, alpha, prior_mean) = factorize(&points, &hyper)?;
        Ok(Self { hyper, points, chol, alpha, prior_mean, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TrainingPoint<T>] {
        &self.points
    }

    /// Predict energy, predictive std and forces at a geometry.
    pub fn predict(&self, positions: &[[T; 3]]) -> Prediction<T> {
        let (desc, jac) = descriptor(positions);
        let n = self.points.len();
        let block = 1 + self.dim;
        let l2 = self.hyper.length_scale * self.hyper.length_scale;

        // Cross-covariance vector between the query value and every stored
        // observation (value then gradient components per point), plus the
        // derivative blocks wrt the query for force prediction.
        let mut k_star = Array1::<T>::zeros(n * block);
        let mut dk_star = Array2::<T>::zeros((self.dim, n * block));
        for (pi, p) in self.points.iter().enumerate() {
            let k = kernel_value(&desc, &p.descriptor, &self.hyper);
            k_star[pi * block] = k;
            for j in 0..self.dim {
                // d k(x*, xi) / d xi_j
                let diff_j = desc[j] - p.descriptor[j];
                k_star[pi * block + 1 + j] = k * diff_j / l2;
                // d k(x*, xi) / d x*_m handled below
            }
            for m in 0..self.dim {
                let diff_m = desc[m] - p.descriptor[m];
                dk_star[[m, pi * block]] = -k * diff_m / l2;
                for j in 0..self.dim {
                    let diff_j = desc[j] - p.descriptor[j];
                    let delta = if m == j { T::one() } else { T::zero() };
                    // d^2 k / d x*_m d xi_j
                    dk_star[[m, pi * block + 1 + j]] =
                        k * (delta / l2 - diff_m * diff_j / (l2 * l2));
                }
            }
        }

        let mean = self.prior_mean + k_star.dot(&self.alpha);
        let v = linalg::cho_solve(&self.chol, &k_star);
        let k_self = self.hyper.signal_std * self.hyper.signal_std;
        let var = (k_self - k_star.dot(&v)).max(T::zero());

        // dE/d(descriptor), then chain rule to Cartesian forces.
        let grad_desc = dk_star.dot(&self.alpha);
        let n_atoms = positions.len();
        let mut forces = vec![[T::zero(); 3]; n_atoms];
        for i in 0..n_atoms {
            for k in 0..3 {
                let mut f = T::zero();
                for d in 0..self.dim {
                    f -= jac[[d, 3 * i + k]] * grad_desc[d];
                }
                forces[i][k] = f;
            }
        }
        Prediction { energy: mean, std: var.sqrt(), forces }
    }
}

/// Stacked joint kernel matrix over values and gradients.
fn joint_kernel<T: Real>(
    points: &[TrainingPoint<T>],
    hyper: &GpHyperparameters<T>,
) -> Array2<T> {
    let n = points.len();
    let dim = points[0].descriptor.len();
    let block = 1 + dim;
    let l2 = hyper.length_scale * hyper.length_scale;
    let mut k = Array2::<T>::zeros((n * block, n * block));
    for a in 0..n {
        for b in 0..n {
            let da = &points[a].descriptor;
            let db = &points[b].descriptor;
            let kv = kernel_value(da, db, hyper);
            let row = a * block;
            let col = b * block;
            k[[row, col]] = kv;
            for j in 0..dim {
                let diff_j = da[j] - db[j];
                // cov(E_a, dE_b/d x_bj) = d k / d xb_j
                k[[row, col + 1 + j]] = kv * diff_j / l2;
                // cov(dE_a/d x_ai, E_b) = d k / d xa_i = -diff_i/l2 * k
                k[[row + 1 + j, col]] = -kv * diff_j / l2;
            }
            for i in 0..dim {
                for j in 0..dim {
                    let diff_i = da[i] - db[i];
                    let diff_j = da[j] - db[j];
                    let delta = if i == j { T::one() } else { T::zero() };
                    k[[row + 1 + i, col + 1 + j]] =
                        kv * (delta / l2 - diff_i * diff_j / (l2 * l2));
                }
            }
        }
    }
    // Observation noise plus a PD jitter.
    let jitter = T::of(1e-10);
    for a in 0..n {
        let row = a * block;
        k[[row, row]] += hyper.noise_std * hyper.noise_std + jitter;
        for j in 0..dim {
            k[[row + 1 + j, row + 1 + j]] +=
                hyper.gradient_noise_std * hyper.gradient_noise_std + jitter;
        }
    }
    k
}

fn stacked_targets<T: Real>(points: &[TrainingPoint<T>], prior_mean: T) -> Array1<T> {
    let dim = points[0].descriptor.len();
    let block = 1 + dim;
    let mut y = Array1::<T>::zeros(points.len() * block);
    for (a, p) in points.iter().enumerate() {
        y[a * block] = p.energy - prior_mean;
        for j in 0..dim {
            y[a * block + 1 + j] = p.gradient[j];
        }
    }
    y
}

fn factorize<T: Real>(
    points: &[TrainingPoint<T>],
    hyper: &GpHyperparameters<T>,
) -> Result<(Array2<T>, Array1<T>, T)> {
    let prior_mean =
        points.iter().map(|p| p.energy).sum::<T>() / T::of_usize(points.len());
    let k = joint_kernel(points, hyper);
    let chol = linalg::cholesky(&k).map_err(|_| {
        Error::Config("kernel matrix singular after jitter (duplicate training point?)".into())
    })?;
    let y = stacked_targets(points, prior_mean);
    let alpha = linalg::cho_solve(&chol, &y);
    Ok((chol, alpha, prior_mean))
}

fn log_marginal_likelihood<T: Real>(
    points: &[TrainingPoint<T>],
    hyper: &GpHyperparameters<T>,
) -> Result<T> {
    let (chol, alpha, prior_mean) = factorize(points, hyper)?;
    let y = stacked_targets(points, prior_mean);
    let fit: T = y.dot(&alpha);
    let mut logdet = T::zero();
    for i in 0..chol.nrows() {
        logdet += chol[[i, i]].ln();
    }
    Ok(-T::of(0.5) * fit - logdet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_1d(x: f64, e: f64, g: f64) -> TrainingPoint<f64> {
        TrainingPoint { descriptor: vec![x], energy: e, gradient: vec![g], forces: vec![] }
    }

    #[test]
    fn single_point_prediction_recovers_label() {
        let hyper = GpHyperparameters { noise_std: 1e-8, ..Default::default() };
        let model = SurrogateModel::fit(vec![point_1d(0.5, -2.0, 0.0)], hyper, false).unwrap();
        // Descriptor 0.5 corresponds to a pair distance of 2 A.
        let pred = model.predict(&[[0.0; 3], [0.0, 0.0, 2.0]]);
        assert!((pred.energy - -2.0).abs() < 1e-6, "mean {}", pred.energy);
        assert!(pred.std < 1e-3, "std at the training point: {}", pred.std);
    }

    #[test]
    fn quadratic_interpolation_under_one_percent() {
        // E(d) = 3 (d - 0.7)^2 - 1 over descriptor d in [0.4, 1.0].
        let f = |d: f64| 3.0 * (d - 0.7).powi(2) - 1.0;
        let fp = |d: f64| 6.0 * (d - 0.7);
        let xs = [0.4, 0.55, 0.7, 0.85, 1.0];
        let points: Vec<_> = xs.iter().map(|&x| point_1d(x, f(x), fp(x))).collect();
        let hyper = GpHyperparameters { length_scale: 0.3, ..Default::default() };
        let model = SurrogateModel::fit(points, hyper, false).unwrap();
        let range = f(0.4) - f(0.7);
        for mid in [0.475, 0.625, 0.775, 0.925] {
            let pred = model.predict(&[[0.0; 3], [0.0, 0.0, 1.0 / mid]]);
            assert!(
                (pred.energy - f(mid)).abs() < 0.01 * range.abs(),
                "at {mid}: {} vs {}",
                pred.energy,
                f(mid)
            );
        }
    }

    #[test]
    fn far_query_recovers_prior_std() {
        let hyper = GpHyperparameters::<f64>::default();
        let signal = hyper.signal_std;
        let model = SurrogateModel::fit(vec![point_1d(2.0, -1.0, 0.0)], hyper, false).unwrap();
        // 0.05 1/A descriptor = 20 A separation: far outside.
        let pred = model.predict(&[[0.0; 3], [0.0, 0.0, 20.0]]);
        assert!(pred.std >= 0.9 * signal, "std {} vs signal {signal}", pred.std);
    }

    #[test]
    fn duplicate_points_error() {
        let hyper = GpHyperparameters { noise_std: 0.0, gradient_noise_std: 0.0, ..Default::default() };
        let res = SurrogateModel::fit(
            vec![point_1d(0.5, -2.0, 0.0), point_1d(0.5, -2.0, 0.0)],
            hyper,
            false,
        );
        assert!(res.is_err(), "exact duplicates with zero noise must fail");
    }

    #[test]
    fn gradient_observations_shape_forces() {
        // A pure-gradient signal: flat energies but nonzero slopes force
        // the posterior mean to tilt.
        let points = vec![point_1d(0.5, 0.0, 1.0), point_1d(0.6, 0.1, 1.0)];
        let hyper = GpHyperparameters { length_scale: 0.2, ..Default::default() };
        let model = SurrogateModel::fit(points, hyper, false).unwrap();
        let pred = model.predict(&[[0.0; 3], [0.0, 0.0, 1.0 / 0.55]]);
        // dE/d(descriptor) = 1 -> force along the bond axis is nonzero.
        let f_axis = pred.forces[1][2];
        assert!(f_axis.abs() > 1e-3, "force {f_axis}");
    }

    #[test]
    fn descriptor_is_invariant_and_jacobian_consistent() {
        let pos = [[0.0, 0.0, 0.0], [0.9, 0.1, -0.2], [0.3, 0.8, 0.4]];
        let (d1, jac) = descriptor::<f64>(&pos);
        // Rigid translation leaves the descriptor unchanged.
        let shifted: Vec<[f64; 3]> =
            pos.iter().map(|p| [p[0] + 3.0, p[1] - 1.0, p[2] + 0.4]).collect();
        let (d2, _) = descriptor::<f64>(&shifted);
        for (a, b) in d1.iter().zip(&d2) {
            assert!((a - b).abs() < 1e-12);
        }
        // Finite-difference check of the Jacobian.
        let eps = 1e-7;
        for col in 0..9 {
            let mut plus = pos;
            plus[col / 3][col % 3] += eps;
            let (dp, _) = descriptor::<f64>(&plus);
            let mut minus = pos;
            minus[col / 3][col % 3] -= eps;
            let (dm, _) = descriptor::<f64>(&minus);
            for row in 0..d1.len() {
                let fd = (dp[row] - dm[row]) / (2.0 * eps);
                assert!((jac[[row, col]] - fd).abs() < 1e-5, "J[{row},{col}]");
            }
        }
    }
}
