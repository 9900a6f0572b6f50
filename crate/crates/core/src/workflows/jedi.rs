//! Strain decomposition onto redundant internal coordinates.
//!
//! Bonds come from scaled covalent radii (plus van-der-Waals pairs), angles
//! from bonded triples. The Cartesian Hessian is projected into the
//! redundant internal space through the Wilson B matrix pseudoinverse and
//! the harmonic strain is split coordinate by coordinate:
//! E_i = 1/2 dq_i (H_q dq)_i.

use ndarray::{Array1, Array2};

use crate::constants::{covalent_radius, vdw_radius, EV_KCALMOL};
use crate::error::{Error, Result};
use crate::geometry::MolecularGeometry;
use crate::linalg;
use crate::scalar::Real;

/// Bond-detection scaling factors.
#[derive(Debug, Clone)]
pub struct JediConfig<T> {
    /// Covalent-radius scale.
    pub covf: T,
    /// Van-der-Waals scale for non-covalent pairs.
    pub vdwf: T,
}

impl<T: Real> Default for JediConfig<T> {
    fn default() -> Self {
        Self { covf: T::of(2.0), vdwf: T::of(0.9) }
    }
}

/// A redundant internal coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InternalCoordinate {
    /// Pair distance, indices ascending.
    Bond(usize, usize),
    /// Angle with the vertex at the middle index.
    Angle(usize, usize, usize),
}

impl std::fmt::Display for InternalCoordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InternalCoordinate::Bond(i, j) => write!(f, "bond H{i} H{j}"),
            InternalCoordinate::Angle(i, j, k) => write!(f, "angle H{i} H{j} H{k}"),
        }
    }
}

/// Per-coordinate strain energies (kcal/mol).
#[derive(Debug, Clone)]
pub struct JediResult<T> {
    pub coordinates: Vec<InternalCoordinate>,
    pub energies_kcal: Vec<T>,
    pub total_kcal: T,
    /// Internal-coordinate displacements (Angstrom / radian).
    pub delta_q: Vec<T>,
    /// Present when chains of four bonded atoms exist (dihedrals are not
    /// modeled).
    pub warning: Option<String>,
}

/// Detect bonds and angles for a geometry.
pub fn internal_coordinates<T: Real>(
    geometry: &MolecularGeometry<T>,
    config: &JediConfig<T>,
) -> Result<Vec<InternalCoordinate>> {
    let n = geometry.len();
    let symbols = geometry.symbols();
    let mut bonded = vec![vec![false; n]; n];
    let mut coords = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let r_cov_sum = covalent_radius(&symbols[i]).unwrap_or(0.0)
                + covalent_radius(&symbols[j]).unwrap_or(0.0);
            let d = geometry.distance(i, j);
            if d < config.covf * T::of(r_cov_sum) {
                bonded[i][j] = true;
                bonded[j][i] = true;
                coords.push(InternalCoordinate::Bond(i, j));
            }
        }
    }
    // Non-covalent van-der-Waals contacts enter as distance coordinates.
    for i in 0..n {
        for j in (i + 1)..n {
            if bonded[i][j] {
                continue;
            }
            let r_vdw_sum =
                vdw_radius(&symbols[i]).unwrap_or(0.0) + vdw_radius(&symbols[j]).unwrap_or(0.0);
            if geometry.distance(i, j) < config.vdwf * T::of(r_vdw_sum) {
                coords.push(InternalCoordinate::Bond(i, j));
            }
        }
    }
    if n > 1 {
        for i in 0..n {
            if !(0..n).any(|j| j != i && bonded[i][j]) {
                return Err(Error::Config(format!(
                    "atom {i} is disconnected; no bonds detected within the covalent cutoff"
                )));
            }
        }
    }
    // Angles from bonded triples, vertex in the middle.
    for j in 0..n {
        let neighbors: Vec<usize> = (0..n).filter(|&i| i != j && bonded[i][j]).collect();
        for (a, &i) in neighbors.iter().enumerate() {
            for &k in &neighbors[a + 1..] {
                coords.push(InternalCoordinate::Angle(i, j, k));
            }
        }
    }
    Ok(coords)
}

fn has_four_atom_chain(bonded: &[(usize, usize)], n: usize) -> bool {
    let mut adj = vec![vec![]; n];
    for &(i, j) in bonded {
        adj[i].push(j);
        adj[j].push(i);
    }
    for &(b, c) in bonded {
        for &a in &adj[b] {
            if a == c {
                continue;
            }
            for &d in &adj[c] {
                if d != b && d != a {
                    return true;
                }
            }
        }
    }
    false
}

fn q_value<T: Real>(geometry: &MolecularGeometry<T>, coord: &InternalCoordinate) -> T {
    let pos = geometry.positions();
    match *coord {
        InternalCoordinate::Bond(i, j) => geometry.distance(i, j),
        InternalCoordinate::Angle(i, j, k) => {
            let mut dot = T::zero();
            let mut nu = T::zero();
            let mut nv = T::zero();
            for m in 0..3 {
                let u = pos[i][m] - pos[j][m];
                let v = pos[k][m] - pos[j][m];
                dot += u * v;
                nu += u * u;
                nv += v * v;
            }
            let c = (dot / (nu.sqrt() * nv.sqrt())).max(-T::one()).min(T::one());
            c.acos()
        }
    }
}

/// Wilson B matrix rows for the coordinate list at a geometry.
pub fn wilson_b<T: Real>(
    geometry: &MolecularGeometry<T>,
    coords: &[InternalCoordinate],
) -> Array2<T> {
    let n = geometry.len();
    let pos = geometry.positions();
    let mut b = Array2::<T>::zeros((coords.len(), 3 * n));
    for (row, coord) in coords.iter().enumerate() {
        match *coord {
            InternalCoordinate::Bond(i, j) => {
                let mut u = [T::zero(); 3];
                let mut norm = T::zero();
                for m in 0..3 {
                    u[m] = pos[i][m] - pos[j][m];
                    norm += u[m] * u[m];
                }
                let norm = norm.sqrt();
                for m in 0..3 {
                    b[[row, 3 * i + m]] = u[m] / norm;
                    b[[row, 3 * j + m]] = -u[m] / norm;
                }
            }
            InternalCoordinate::Angle(i, j, k) => {
                let mut u = [T::zero(); 3];
                let mut v = [T::zero(); 3];
                let mut ru = T::zero();
                let mut rv = T::zero();
                for m in 0..3 {
                    u[m] = pos[i][m] - pos[j][m];
                    v[m] = pos[k][m] - pos[j][m];
                    ru += u[m] * u[m];
                    rv += v[m] * v[m];
                }
                let ru = ru.sqrt();
                let rv = rv.sqrt();
                let eu: Vec<T> = u.iter().map(|x| *x / ru).collect();
                let ev: Vec<T> = v.iter().map(|x| *x / rv).collect();
                let cos_t: T = eu.iter().zip(&ev).map(|(a, b)| *a * *b).sum();
                let sin_t = (T::one() - cos_t * cos_t).max(T::of(1e-14)).sqrt();
                for m in 0..3 {
                    let di = (cos_t * eu[m] - ev[m]) / (ru * sin_t);
                    let dk = (cos_t * ev[m] - eu[m]) / (rv * sin_t);
                    b[[row, 3 * i + m]] = di;
                    b[[row, 3 * k + m]] = dk;
                    b[[row, 3 * j + m]] = -(di + dk);
                }
            }
        }
    }
    b
}

/// Decompose the harmonic strain between a relaxed and a strained geometry
/// onto redundant internals, given the Cartesian Hessian at the relaxed
/// structure (eV/A^2).
pub fn jedi_strain<T: Real>(
    relaxed: &MolecularGeometry<T>,
    strained: &MolecularGeometry<T>,
    hessian: &Array2<T>,
    config: &JediConfig<T>,
) -> Result<JediResult<T>> {
    if relaxed.len() != strained.len() || relaxed.symbols() != strained.symbols() {
        return Err(Error::Contract("geometries must share atom ordering".into()));
    }
    if hessian.nrows() != 3 * relaxed.len() {
        return Err(Error::Contract("Hessian dimension mismatch".into()));
    }
    let coords = internal_coordinates(relaxed, config)?;
    let bonds: Vec<(usize, usize)> = coords
        .iter()
        .filter_map(|c| match c {
            InternalCoordinate::Bond(i, j) => Some((*i, *j)),
            _ => None,
        })
        .collect();
    let warning = if has_four_atom_chain(&bonds, relaxed.len()) {
        Some("four-atom bonded chains present; dihedral contributions are not modeled".into())
    } else {
        None
    };

    let delta_q: Vec<T> = coords
        .iter()
        .map(|c| q_value(strained, c) - q_value(relaxed, c))
        .collect();
    let b = wilson_b(relaxed, &coords);
    let b_pinv = linalg::pinv(&b, T::of(1e-8));
    let h_q = b_pinv.t().dot(hessian).dot(&b_pinv);
    let dq = Array1::from_vec(delta_q.clone());
    let h_dq = h_q.dot(&dq);
    let energies_kcal: Vec<T> = dq
        .iter()
        .zip(h_dq.iter())
        .map(|(q, hq)| T::of(0.5) * *q * *hq * T::of(EV_KCALMOL))
        .collect();
    let total_kcal = energies_kcal.iter().copied().sum();
    Ok(JediResult { coordinates: coords, energies_kcal, total_kcal, delta_q, warning })
}

/// Strain report table: coordinate kind, atom indices, kcal/mol.
pub fn jedi_report<T: Real>(result: &JediResult<T>) -> String {
    let mut out = String::from("coordinate\tstrain_kcal_mol\n");
    for (c, e) in result.coordinates.iter().zip(&result.energies_kcal) {
        out.push_str(&format!("{c}\t{:.7}\n", e.to_f64_lossy()));
    }
    out.push_str(&format!("total\t{:.7}\n", result.total_kcal.to_f64_lossy()));
    out
}
