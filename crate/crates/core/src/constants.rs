//! Physical constants, unit conversions, and per-element data.
//!
//! The engine works in Hartree atomic units throughout; conversions happen
//! at the calculator boundary.

/// Angstrom per bohr.
pub const BOHR_ANGSTROM: f64 = 0.52917721;
/// eV per hartree.
pub const HARTREE_EV: f64 = 27.211386245988;
/// Debye per e*bohr.
pub const EBOHR_DEBYE: f64 = 2.5417464;
/// kcal/mol per eV.
pub const EV_KCALMOL: f64 = 23.060547830619026;

/// cm^-1 per sqrt(eV / (amu * A^2)); converts mass-weighted Hessian
/// eigenvalues to wavenumbers.
pub const FREQ_CM: f64 = 521.4708983725066;

/// km/mol per (D/A)^2/amu for IR intensities.
pub const IR_KM_MOL: f64 = 42.2561;

/// Boltzmann constant in eV/K.
pub const KB_EV: f64 = 8.617333262e-5;

/// fs per internal MD time unit sqrt(amu * A^2 / eV).
/// With lengths in A, masses in amu and energies in eV, one internal time
/// unit is sqrt(amu A^2 / eV) = 10.180505 fs.
pub const MD_TIME_FS: f64 = 10.180505710759414;

/// Supported elements (first two rows of the periodic table).
pub const ELEMENTS: [&str; 10] = ["H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne"];

/// Atomic number for a supported element symbol.
pub fn atomic_number(symbol: &str) -> Option<u32> {
    ELEMENTS.iter().position(|s| *s == symbol).map(|i| i as u32 + 1)
}

/// Standard atomic mass (amu).
pub fn atomic_mass(symbol: &str) -> Option<f64> {
    const MASSES: [f64; 10] = [
        1.008, 4.002602, 6.94, 9.0121831, 10.81, 12.011, 14.007, 15.999, 18.998403163, 20.1797,
    ];
    atomic_number(symbol).map(|z| MASSES[z as usize - 1])
}

/// Covalent single-bond radius (Angstrom), Cordero et al. values.
pub fn covalent_radius(symbol: &str) -> Option<f64> {
    const RADII: [f64; 10] = [0.31, 0.28, 1.28, 0.96, 0.84, 0.76, 0.71, 0.66, 0.57, 0.58];
    atomic_number(symbol).map(|z| RADII[z as usize - 1])
}

/// Van der Waals radius (Angstrom), Bondi values.
pub fn vdw_radius(symbol: &str) -> Option<f64> {
    const RADII: [f64; 10] = [1.20, 1.40, 1.82, 1.53, 1.92, 1.70, 1.55, 1.52, 1.47, 1.54];
    atomic_number(symbol).map(|z| RADII[z as usize - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_lookups() {
        assert_eq!(atomic_number("H"), Some(1));
        assert_eq!(atomic_number("F"), Some(9));
        assert_eq!(atomic_number("Xx"), None);
        assert!((atomic_mass("Be").unwrap() - 9.0121831).abs() < 1e-12);
    }

    #[test]
    fn frequency_constant_consistent() {
        // Recompute from CODATA: sqrt(e / (amu * 1e-20)) / (2 pi c).
        let e: f64 = 1.602176634e-19;
        let amu = 1.66053906660e-27;
        let c = 2.99792458e10;
        let s = (e / (amu * 1e-20)).sqrt() / (2.0 * std::f64::consts::PI * c);
        assert!((s - FREQ_CM).abs() < 1e-9);
        // MD time unit: sqrt(amu A^2 / eV) in fs.
        let t = (amu * 1e-20 / e).sqrt() * 1e15;
        assert!((t - MD_TIME_FS).abs() < 1e-9);
    }
}
