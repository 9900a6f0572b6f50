//! Embedded STO-3G basis data and contracted Gaussian functions.
//!
//! Data from the Basis Set Exchange tables (Hehre, Stewart, Pople 1969).
//! Only STO-3G is supported; unknown basis names are rejected outright.

use crate::constants::atomic_number;
use crate::error::{Error, Result};
use crate::geometry::MolecularGeometry;
use crate::integrals::overlap_contracted;
use crate::scalar::Real;

/// One shell of basis data: shared exponents, one coefficient set per
/// angular momentum carried by the shell.
struct ShellData {
    /// 0 = s, 1 = sp (s and p share exponents).
    kind: u8,
    exponents: [f64; 3],
    s_coeffs: [f64; 3],
    p_coeffs: [f64; 3],
}

const S1_COEFFS: [f64; 3] = [0.1543289673, 0.5353281423, 0.4446345422];
const S2_COEFFS: [f64; 3] = [-0.09996722919, 0.3995128261, 0.7001154689];
const P2_COEFFS: [f64; 3] = [0.1559162750, 0.6076837186, 0.3919573931];
const NO_P: [f64; 3] = [0.0; 3];

fn sto3g_shells(z: u32) -> &'static [ShellData] {
    macro_rules! s_shell {
        ($e:expr) => {
            ShellData { kind: 0, exponents: $e, s_coeffs: S1_COEFFS, p_coeffs: NO_P }
        };
    }
    macro_rules! sp_shell {
        ($e:expr) => {
            ShellData { kind: 1, exponents: $e, s_coeffs: S2_COEFFS, p_coeffs: P2_COEFFS }
        };
    }
    static H: [ShellData; 1] = [s_shell!([3.425250914, 0.6239137298, 0.1688554040])];
    static HE: [ShellData; 1] = [s_shell!([6.362421394, 1.158922999, 0.3136497915])];
    static LI: [ShellData; 2] = [
        s_shell!([16.11957475, 2.936200663, 0.7946504870]),
        sp_shell!([0.6362897469, 0.1478600533, 0.0480886784]),
    ];
    static BE: [ShellData; 2] = [
        s_shell!([30.16787069, 5.495115306, 1.487192653]),
        sp_shell!([1.314833110, 0.3055389383, 0.0993707456]),
    ];
    static B: [ShellData; 2] = [
        s_shell!([48.79111318, 8.887362172, 2.405267040]),
        sp_shell!([2.236956142, 0.5198204999, 0.1580620473]),
    ];
    static C: [ShellData; 2] = [
        s_shell!([71.61683735, 13.04509632, 3.530512160]),
        sp_shell!([2.941249355, 0.6834830964, 0.2222899159]),
    ];
    static N: [ShellData; 2] = [
        s_shell!([99.10616896, 18.05231239, 4.885660238]),
        sp_shell!([3.780455879, 0.8784966449, 0.2857143744]),
    ];
    static O: [ShellData; 2] = [
        s_shell!([130.7093214, 23.80886605, 6.443608313]),
        sp_shell!([5.033151319, 1.169596125, 0.3803889600]),
    ];
    static F: [ShellData; 2] = [
        s_shell!([166.6791340, 30.36081233, 8.216820672]),
        sp_shell!([6.464803249, 1.502281245, 0.4885884864]),
    ];
    static NE: [ShellData; 2] = [
        s_shell!([207.0156070, 37.70815124, 10.20529731]),
        sp_shell!([8.246315120, 1.916266291, 0.6232292721]),
    ];
    match z {
        1 => &H,
        2 => &HE,
        3 => &LI,
        4 => &BE,
        5 => &B,
        6 => &C,
        7 => &N,
        8 => &O,
        9 => &F,
        10 => &NE,
        _ => unreachable!("element filtered earlier"),
    }
}

/// A contracted Cartesian Gaussian basis function.
#[derive(Debug, Clone)]
pub struct ContractedGaussian<T> {
    /// Center in bohr.
    pub center: [T; 3],
    /// Cartesian angular momentum exponents (l, m, n).
    pub lmn: [u32; 3],
    /// (exponent in bohr^-2, contraction coefficient including the
    /// primitive normalization factor).
    pub primitives: Vec<(T, T)>,
}

fn double_factorial(n: i64) -> f64 {
    let mut r = 1.0;
    let mut k = n;
    while k > 1 {
        r *= k as f64;
        k -= 2;
    }
    r
}

impl<T: Real> ContractedGaussian<T> {
    /// Build a normalized contracted function from raw table data.
    pub fn new(center: [T; 3], lmn: [u32; 3], exps: &[f64], coeffs: &[f64]) -> Result<Self> {
        if exps.len() != coeffs.len() || exps.is_empty() {
            return Err(Error::Config("primitive table shape mismatch".into()));
        }
        let (l, m, n) = (lmn[0] as i64, lmn[1] as i64, lmn[2] as i64);
        let mut primitives = Vec::with_capacity(exps.len());
        for (&alpha, &c) in exps.iter().zip(coeffs) {
            if alpha <= 0.0 {
                return Err(Error::Config(format!("non-positive exponent {alpha}")));
            }
            let norm = (2.0 * alpha / std::f64::consts::PI).powf(0.75)
                * (4.0 * alpha).powf((l + m + n) as f64 / 2.0)
                / (double_factorial(2 * l - 1)
                    * double_factorial(2 * m - 1)
                    * double_factorial(2 * n - 1))
                .sqrt();
            primitives.push((T::of(alpha), T::of(c * norm)));
        }
        let mut cgf = Self { center, lmn, primitives };
        let s = overlap_contracted(&cgf, &cgf);
        let scale = T::one() / s.sqrt();
        for (_, c) in &mut cgf.primitives {
            *c *= scale;
        }
        Ok(cgf)
    }
}

/// A named basis set; only `"sto3g"` is available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSet {
    name: String,
}

impl BasisSet {
    pub fn by_name(name: &str) -> Result<Self> {
        let canonical = name.to_ascii_lowercase().replace('-', "");
        if canonical != "sto3g" {
            return Err(Error::Config(format!(
                "unsupported basis '{name}' (only sto3g is embedded)"
            )));
        }
        Ok(Self { name: "sto3g".into() })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Expand a geometry into its list of atomic orbitals. Orbitals are
    /// ordered atom by atom; sp shells contribute s, px, py, pz.
    pub fn atomic_orbitals<T: Real>(
        &self,
        geometry: &MolecularGeometry<T>,
    ) -> Result<Vec<ContractedGaussian<T>>> {
        let mut aos = Vec::new();
        let centers = geometry.positions_bohr();
        for (symbol, center) in geometry.symbols().iter().zip(centers) {
            let z = atomic_number(symbol)
                .ok_or_else(|| Error::Config(format!("unknown element '{symbol}'")))?;
            for shell in sto3g_shells(z) {
                aos.push(ContractedGaussian::new(
                    center,
                    [0, 0, 0],
                    &shell.exponents,
                    &shell.s_coeffs,
                )?);
                if shell.kind == 1 {
                    for axis in 0..3 {
                        let mut lmn = [0u32; 3];
                        lmn[axis] = 1;
                        aos.push(ContractedGaussian::new(
                            center,
                            lmn,
                            &shell.exponents,
                            &shell.p_coeffs,
                        )?);
                    }
                }
            }
        }
        Ok(aos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_xyz;

    #[test]
    fn rejects_unknown_basis() {
        assert!(BasisSet::by_name("sto3g").is_ok());
        assert!(BasisSet::by_name("STO-3G").is_ok());
        assert!(BasisSet::by_name("cc-pVQZ").is_err());
    }

    #[test]
    fn contracted_functions_are_normalized() {
        let basis = BasisSet::by_name("sto3g").unwrap();
        for xyz in ["1\nspin=1\nH 0.1 -0.2 0.3", "1\nspin=1\nF 0 0 0", "1\n\nBe 0 0 0"] {
            let geom: MolecularGeometry<f64> = parse_xyz(xyz).unwrap();
            for ao in basis.atomic_orbitals(&geom).unwrap() {
                let s = overlap_contracted(&ao, &ao);
                assert!((s - 1.0).abs() < 1e-10, "self overlap {s}");
            }
        }
    }

    #[test]
    fn ao_counts() {
        let basis = BasisSet::by_name("sto3g").unwrap();
        let h2: MolecularGeometry<f64> = parse_xyz("2\n\nH 0 0 0\nH 0 0 0.735").unwrap();
        assert_eq!(basis.atomic_orbitals(&h2).unwrap().len(), 2);
        let beh2: MolecularGeometry<f64> =
            parse_xyz("3\n\nBe 0 0 0\nH 0 0 1.33\nH 0 0 -1.33").unwrap();
        assert_eq!(basis.atomic_orbitals(&beh2).unwrap().len(), 7);
        let f2: MolecularGeometry<f64> = parse_xyz("2\n\nF 0 0 0\nF 0 0 1.41").unwrap();
        assert_eq!(basis.atomic_orbitals(&f2).unwrap().len(), 10);
    }
}
