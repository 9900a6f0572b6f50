//! Molecular geometry: element symbols, Cartesian coordinates, charge, spin.

use crate::constants::{atomic_number, BOHR_ANGSTROM};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum allowed interatomic distance (Angstrom).
const MIN_DISTANCE: f64 = 1e-6;

/// A molecule: atoms with positions in Angstrom, total charge and spin (2S).
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularGeometry<T> {
    symbols: Vec<String>,
    /// Positions in Angstrom, one `[x, y, z]` per atom.
    positions: Vec<[T; 3]>,
    charge: i32,
    spin: u32,
}

impl<T: Real> MolecularGeometry<T> {
    pub fn new(
        atoms: Vec<(String, [T; 3])>,
        charge: i32,
        spin: u32,
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config("geometry must contain at least one atom".into()));
        }
        let (symbols, positions): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
        for s in &symbols {
            if atomic_number(s).is_none() {
                return Err(Error::Config(format!("unknown element symbol '{s}'")));
            }
        }
        for p in &positions {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Config("non-finite coordinate".into()));
            }
        }
        let geom = Self { symbols, positions, charge, spin };
        geom.electron_count()?;
        for i in 0..geom.len() {
            for j in 0..i {
                if geom.distance(i, j) <= T::of(MIN_DISTANCE) {
                    return Err(Error::Singularity(format!(
                        "atoms {j} and {i} closer than {MIN_DISTANCE} A"
                    )));
                }
            }
        }
        Ok(geom)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn positions(&self) -> &[[T; 3]] {
        &self.positions
    }

    pub fn charge(&self) -> i32 {
        self.charge
    }

    pub fn spin(&self) -> u32 {
        self.spin
    }

    pub fn atomic_numbers(&self) -> Vec<u32> {
        self.symbols.iter().map(|s| atomic_number(s).unwrap()).collect()
    }

    /// Number of electrons after accounting for the total charge.
    pub fn electron_count(&self) -> Result<usize> {
        let z: i64 = self.atomic_numbers().iter().map(|&z| z as i64).sum();
        let n = z - self.charge as i64;
        if n < 1 {
            return Err(Error::Config(format!("charge {} leaves {n} electrons", self.charge)));
        }
        Ok(n as usize)
    }

    /// Interatomic distance in Angstrom.
    pub fn distance(&self, i: usize, j: usize) -> T {
        let a = &self.positions[i];
        let b = &self.positions[j];
        let mut d2 = T::zero();
        for k in 0..3 {
            let d = a[k] - b[k];
            d2 += d * d;
        }
        d2.sqrt()
    }

    /// Replace all positions (Angstrom), keeping symbols/charge/spin.
    pub fn with_positions(&self, positions: Vec<[T; 3]>) -> Self {
        assert_eq!(positions.len(), self.len());
        Self { positions, ..self.clone() }
    }

    /// Displace one Cartesian coordinate by `step` Angstrom.
    pub fn displaced(&self, atom: usize, axis: usize, step: T) -> Self {
        let mut positions = self.positions.clone();
        positions[atom][axis] += step;
        Self { positions, ..self.clone() }
    }

    /// Positions converted to bohr.
    pub fn positions_bohr(&self) -> Vec<[T; 3]> {
        let f = T::of(1.0 / BOHR_ANGSTROM);
        self.positions
            .iter()
            .map(|p| [p[0] * f, p[1] * f, p[2] * f])
            .collect()
    }

    /// Center of nuclear charge, in bohr.
    pub fn charge_center_bohr(&self) -> [T; 3] {
        let zs = self.atomic_numbers();
        let total: T = zs.iter().map(|&z| T::of_usize(z as usize)).sum();
        let mut c = [T::zero(); 3];
        for (p, &z) in self.positions_bohr().iter().zip(&zs) {
            for k in 0..3 {
                c[k] += T::of_usize(z as usize) * p[k];
            }
        }
        for ck in &mut c {
            *ck /= total;
        }
        c
    }

    /// Nuclear repulsion energy in hartree.
    pub fn nuclear_repulsion(&self) -> Result<T> {
        let zs = self.atomic_numbers();
        let pos = self.positions_bohr();
        let mut e = T::zero();
        for i in 0..self.len() {
            for j in 0..i {
                let mut d2 = T::zero();
                for k in 0..3 {
                    let d = pos[i][k] - pos[j][k];
                    d2 += d * d;
                }
                let r = d2.sqrt();
                if r <= T::of(MIN_DISTANCE / BOHR_ANGSTROM) {
                    return Err(Error::Singularity(format!("atoms {j} and {i} coincide")));
                }
                e += T::of_usize((zs[i] * zs[j]) as usize) / r;
            }
        }
        Ok(e)
    }
}

/// Parse a standard XYZ stream: count line, comment line, then
/// `symbol x y z` per atom. `charge=<int>` and `spin=<int>` tokens in the
/// comment line are honored and default to 0.
pub fn parse_xyz<T: Real>(text: &str) -> Result<MolecularGeometry<T>> {
    let mut lines = text.lines().enumerate();
    let (_, count_line) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    let n: usize = count_line.trim().parse().map_err(|_| Error::Parse {
        line: 1,
        msg: format!("expected atom count, found '{}'", count_line.trim()),
    })?;
    if n == 0 {
        return Err(Error::Parse { line: 1, msg: "atom count must be positive".into() });
    }
    let (_, comment) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 2, msg: "missing comment line".into() })?;
    let mut charge = 0i32;
    let mut spin = 0u32;
    for token in comment.split_whitespace() {
        if let Some(v) = token.strip_prefix("charge=") {
            charge = v.parse().map_err(|_| Error::Parse {
                line: 2,
                msg: format!("bad charge token '{token}'"),
            })?;
        } else if let Some(v) = token.strip_prefix("spin=") {
            spin = v.parse().map_err(|_| Error::Parse {
                line: 2,
                msg: format!("bad spin token '{token}'"),
            })?;
        }
    }
    let mut atoms = Vec::with_capacity(n);
    for _ in 0..n {
        let (idx, line) = lines.next().ok_or_else(|| Error::Parse {
            line: n + 2,
            msg: format!("expected {n} atom lines, found {}", atoms.len()),
        })?;
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 'symbol x y z', found '{}'", line.trim()),
            });
        }
        let symbol = fields[0].to_string();
        if atomic_number(&symbol).is_none() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("unknown element '{symbol}'"),
            });
        }
        let mut xyz = [T::zero(); 3];
        for (k, f) in fields[1..4].iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("non-numeric coordinate '{f}'"),
            })?;
            xyz[k] = T::of(v);
        }
        atoms.push((symbol, xyz));
    }
    MolecularGeometry::new(atoms, charge, spin)
}

/// Render one XYZ frame; the comment line is caller-provided.
pub fn format_xyz<T: Real>(geometry: &MolecularGeometry<T>, comment: &str) -> String {
    let mut out = format!("{}\n{}\n", geometry.len(), comment);
    for (s, p) in geometry.symbols().iter().zip(geometry.positions()) {
        out.push_str(&format!(
            "{s} {:.10} {:.10} {:.10}\n",
            p[0].to_f64_lossy(),
            p[1].to_f64_lossy(),
            p[2].to_f64_lossy()
        ));
    }
    out
}
