//! Harmonic vibrational analysis from finite differences of forces.

use ndarray::Array2;

use crate::calculator::Calculator;
use crate::constants::{atomic_mass, FREQ_CM, IR_KM_MOL};
use crate::error::{Error, Result};
use crate::geometry::MolecularGeometry;
use crate::linalg;
use crate::scalar::Real;

/// Displacement protocol for the Hessian build.
#[derive(Debug, Clone)]
pub struct VibrationConfig<T> {
    /// Displacement step (Angstrom).
    pub step: T,
    /// Stencil order: 2 (central) or 4.
    pub nfree: usize,
    /// Compute IR intensities from dipole derivatives.
    pub ir: bool,
    /// Warn when the starting geometry is not relaxed below twice this.
    pub fmax_reference: T,
}

impl<T: Real> Default for VibrationConfig<T> {
    fn default() -> Self {
        Self { step: T::of(0.01), nfree: 2, ir: true, fmax_reference: T::of(0.005) }
    }
}

/// Hessian, frequencies, normal modes and optional IR intensities.
#[derive(Debug, Clone)]
pub struct HessianResult<T> {
    /// Symmetrized Cartesian Hessian (eV/A^2), 3N x 3N.
    pub hessian: Array2<T>,
    /// Largest |H - H^T|/2 element before symmetrization.
    pub asymmetry: T,
    /// All 3N frequencies in cm^-1, ascending; imaginary modes negative.
    pub frequencies_cm: Vec<T>,
    /// Mass-weighted eigenvectors as columns, matching `frequencies_cm`.
    pub modes: Array2<T>,
    /// Per-mode IR intensity (km/mol) when dipoles were requested.
    pub ir_intensities: Option<Vec<T>>,
    /// Set when the input geometry was not force-free.
    pub warning: Option<String>,
}

/// Build the Hessian column by column from central differences of forces
/// and diagonalize its mass-weighted form.
pub fn vibrational_analysis<T: Real>(
    geometry: &MolecularGeometry<T>,
    calc: &mut Calculator<T>,
    config: &VibrationConfig<T>,
) -> Result<HessianResult<T>> {
    if config.nfree != 2 && config.nfree != 4 {
        return Err(Error::Config(format!("nfree must be 2 or 4, got {}", config.nfree)));
    }
    if config.step <= T::zero() {
        return Err(Error::Config("vibration step must be positive".into()));
    }
    let n = geometry.len();
    let dim = 3 * n;
    let delta = config.step;

    // Pre-check: residual forces at the reference geometry.
    let f0 = calc.get_forces(geometry)?;
    let fmax0 = f0
        .iter()
        .map(|f| (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt())
        .fold(T::zero(), |a, b| a.max(b));
    let warning = if fmax0 > T::of(2.0) * config.fmax_reference {
        Some(format!(
            "geometry not relaxed: max |F| = {:.4} eV/A exceeds twice the convergence target",
            fmax0.to_f64_lossy()
        ))
    } else {
        None
    };

    fn forces_at<T: Real>(
        calc: &mut Calculator<T>,
        geometry: &MolecularGeometry<T>,
        atom: usize,
        axis: usize,
        step: T,
    ) -> Result<Vec<T>> {
        let displaced = geometry.displaced(atom, axis, step);
        Ok(calc
            .get_forces(&displaced)?
            .iter()
            .flat_map(|f| f.iter().copied())
            .collect())
    }

    let mut hessian_raw = Array2::<T>::zeros((dim, dim));
    let mut dipole_derivatives: Option<Array2<T>> =
        if config.ir { Some(Array2::zeros((3, dim))) } else { None };

    for col in 0..dim {
        let (atom, axis) = (col / 3, col % 3);
        let column: Vec<T> = if config.nfree == 2 {
            let fp = forces_at(calc, geometry, atom, axis, delta)?;
            let fm = forces_at(calc, geometry, atom, axis, -delta)?;
            fp.iter()
                .zip(&fm)
                .map(|(p, m)| -(*p - *m) / (T::of(2.0) * delta))
                .collect()
        } else {
            let fp2 = forces_at(calc, geometry, atom, axis, delta * T::of(2.0))?;
            let fp1 = forces_at(calc, geometry, atom, axis, delta)?;
            let fm1 = forces_at(calc, geometry, atom, axis, -delta)?;
            let fm2 = forces_at(calc, geometry, atom, axis, delta * T::of(-2.0))?;
            (0..dim)
                .map(|i| {
                    -(fm2[i] - T::of(8.0) * fm1[i] + T::of(8.0) * fp1[i] - fp2[i])
                        / (T::of(12.0) * delta)
                })
                .collect()
        };
        for (row, v) in column.into_iter().enumerate() {
            hessian_raw[[row, col]] = v;
        }
        if let Some(dd) = dipole_derivatives.as_mut() {
            // Two-point dipole derivative reusing the cached displaced
            // solutions from the force calls above.
            let dp = calc.get_dipole(&geometry.displaced(atom, axis, delta))?;
            let dm = calc.get_dipole(&geometry.displaced(atom, axis, -delta))?;
            for k in 0..3 {
                dd[[k, col]] = (dp[k] - dm[k]) / (T::of(2.0) * delta);
            }
        }
    }

    // Symmetrize and record the asymmetry diagnostic.
    let mut asymmetry = T::zero();
    for i in 0..dim {
        for j in 0..i {
            let d = (hessian_raw[[i, j]] - hessian_raw[[j, i]]).abs() * T::of(0.5);
            asymmetry = asymmetry.max(d);
        }
    }
    let hessian = (&hessian_raw + &hessian_raw.t()).mapv(|v| v * T::of(0.5));

    // Mass-weighted eigenproblem.
    let masses: Vec<T> = geometry
        .symbols()
        .iter()
        .map(|s| {
            atomic_mass(s)
                .map(T::of)
                .ok_or_else(|| Error::Config(format!("no mass for {s}")))
        })
        .collect::<Result<_>>()?;
    let mut weighted = hessian.clone();
    for i in 0..dim {
        for j in 0..dim {
            weighted[[i, j]] /= (masses[i / 3] * masses[j / 3]).sqrt();
        }
    }
    let (eigs, modes) = linalg::eigh(&weighted);
    let frequencies_cm: Vec<T> = eigs
        .iter()
        .map(|lam| {
            let f = lam.abs().sqrt() * T::of(FREQ_CM);
            if *lam < T::zero() {
                -f
            } else {
                f
            }
        })
        .collect();

    // IR intensity: squared dipole derivative along each mass-weighted mode.
    let ir_intensities = dipole_derivatives.map(|dd| {
        (0..dim)
            .map(|mode| {
                let mut d_mu = [T::zero(); 3];
                for col in 0..dim {
                    let w = modes[[col, mode]] / masses[col / 3].sqrt();
                    for k in 0..3 {
                        d_mu[k] += dd[[k, col]] * w;
                    }
                }
                (d_mu[0] * d_mu[0] + d_mu[1] * d_mu[1] + d_mu[2] * d_mu[2]) * T::of(IR_KM_MOL)
            })
            .collect()
    });

    Ok(HessianResult {
        hessian,
        asymmetry,
        frequencies_cm,
        modes,
        ir_intensities,
        warning,
    })
}

/// Vibrational summary as delimited text: index, cm^-1, km/mol.
pub fn vibration_table<T: Real>(result: &HessianResult<T>) -> String {
    let mut out = String::from("mode\tfrequency_cm^-1\tir_km_mol\n");
    for (i, f) in result.frequencies_cm.iter().enumerate() {
        let ir = result
            .ir_intensities
            .as_ref()
            .map(|v| format!("{:.4}", v[i].to_f64_lossy()))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!("{i}\t{:.4}\t{ir}\n", f.to_f64_lossy()));
    }
    out
}
