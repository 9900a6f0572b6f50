//! Analytic Gaussian integrals over contracted functions.
//!
//! McMurchie-Davidson Hermite expansion for overlap, kinetic, nuclear
//! attraction, dipole and electron repulsion integrals; covers the s and p
//! shells needed by the embedded basis. The Boys function switches from the
//! convergent ascending series to the large-argument closed form at x = 25.

use ndarray::Array2;

use crate::basis::{BasisSet, ContractedGaussian};
use crate::error::{Error, Result};
use crate::geometry::MolecularGeometry;
use crate::linalg;
use crate::scalar::Real;

const BOYS_SWITCH: f64 = 25.0;

/// Boys function F_n(x).
pub fn boys<T: Real>(n: usize, x: T) -> T {
    debug_assert!(x >= T::zero());
    if x < T::of(BOYS_SWITCH) {
        // F_n(x) = e^-x * sum_k (2x)^k (2n-1)!! / (2n+2k+1)!!; all terms
        // positive, so there is no cancellation.
        let two_x = x + x;
        let mut term = T::one() / T::of_usize(2 * n + 1);
        let mut sum = term;
        let mut k = 0usize;
        loop {
            k += 1;
            term = term * two_x / T::of_usize(2 * n + 2 * k + 1);
            sum += term;
            if term < sum * T::epsilon() || k > 400 {
                break;
            }
        }
        (-x).exp() * sum
    } else {
        // erf(sqrt(x)) = 1 to beyond machine precision here.
        let mut f = T::of(0.5) * (T::PI() / x).sqrt();
        if n == 0 {
            return f;
        }
        let e = (-x).exp();
        let inv_2x = T::of(0.5) / x;
        for m in 0..n {
            f = (T::of_usize(2 * m + 1) * f - e) * inv_2x;
        }
        f
    }
}

/// Hermite expansion coefficients E_t^{ij} for one Cartesian direction,
/// up to i <= l1, j <= l2. Indexed as e[i][j][t].
fn hermite_e<T: Real>(l1: usize, l2: usize, a: T, b: T, ab: T) -> Vec<Vec<Vec<T>>> {
    let p = a + b;
    let mu = a * b / p;
    let x_pa = -(b / p) * ab;
    let x_pb = (a / p) * ab;
    let half_p = T::of(0.5) / p;
    let mut e = vec![vec![vec![T::zero(); l1 + l2 + 1]; l2 + 1]; l1 + 1];
    e[0][0][0] = (-mu * ab * ab).exp();
    for i in 0..l1 {
        for t in 0..=(i + 1) {
            let mut v = x_pa * e[i][0][t];
            if t > 0 {
                v += half_p * e[i][0][t - 1];
            }
            if t + 1 <= i {
                v += T::of_usize(t + 1) * e[i][0][t + 1];
            }
            e[i + 1][0][t] = v;
        }
    }
    for i in 0..=l1 {
        for j in 0..l2 {
            for t in 0..=(i + j + 1) {
                let mut v = x_pb * e[i][j][t];
                if t > 0 {
                    v += half_p * e[i][j][t - 1];
                }
                if t + 1 <= i + j {
                    v += T::of_usize(t + 1) * e[i][j][t + 1];
                }
                e[i][j + 1][t] = v;
            }
        }
    }
    e
}

/// Hermite Coulomb integral R^0_{tuv}(p, PC) by downward recursion.
fn hermite_r<T: Real>(t: i32, u: i32, v: i32, n: usize, p: T, pc: &[T; 3], r2: T) -> T {
    if t < 0 || u < 0 || v < 0 {
        return T::zero();
    }
    if t == 0 && u == 0 && v == 0 {
        let mut f = boys(n, p * r2);
        let m2p = -(p + p);
        for _ in 0..n {
            f = f * m2p;
        }
        return f;
    }
    if t > 0 {
        let mut val = pc[0] * hermite_r(t - 1, u, v, n + 1, p, pc, r2);
        if t > 1 {
            val += T::of_usize(t as usize - 1) * hermite_r(t - 2, u, v, n + 1, p, pc, r2);
        }
        val
    } else if u > 0 {
        let mut val = pc[1] * hermite_r(t, u - 1, v, n + 1, p, pc, r2);
        if u > 1 {
            val += T::of_usize(u as usize - 1) * hermite_r(t, u - 2, v, n + 1, p, pc, r2);
        }
        val
    } else {
        let mut val = pc[2] * hermite_r(t, u, v - 1, n + 1, p, pc, r2);
        if v > 1 {
            val += T::of_usize(v as usize - 1) * hermite_r(t, u, v - 2, n + 1, p, pc, r2);
        }
        val
    }
}

struct PrimitivePair<T> {
    b: T,
    p: T,
    center_p: [T; 3],
    /// E tables per direction at the native angular momenta.
    e: [Vec<Vec<Vec<T>>>; 3],
}

fn pair<T: Real>(
    a: T,
    ga: &ContractedGaussian<T>,
    b: T,
    gb: &ContractedGaussian<T>,
    extra: usize,
) -> PrimitivePair<T> {
    let p = a + b;
    let mut center_p = [T::zero(); 3];
    for k in 0..3 {
        center_p[k] = (a * ga.center[k] + b * gb.center[k]) / p;
    }
    let e = std::array::from_fn(|k| {
        hermite_e(
            ga.lmn[k] as usize,
            gb.lmn[k] as usize + extra,
            a,
            b,
            ga.center[k] - gb.center[k],
        )
    });
    PrimitivePair { b, p, center_p, e }
}

fn overlap_1d<T: Real>(pp: &PrimitivePair<T>, k: usize, i: usize, j: usize) -> T {
    pp.e[k][i][j][0] * (T::PI() / pp.p).sqrt()
}

fn overlap_prim<T: Real>(pp: &PrimitivePair<T>, la: &[u32; 3], lb: &[u32; 3]) -> T {
    (0..3)
        .map(|k| overlap_1d(pp, k, la[k] as usize, lb[k] as usize))
        .product()
}

fn kinetic_prim<T: Real>(pp: &PrimitivePair<T>, la: &[u32; 3], lb: &[u32; 3]) -> T {
    let b = pp.b;
    let l_sum = lb.iter().sum::<u32>() as usize;
    let mut total = b * T::of_usize(2 * l_sum + 3) * overlap_prim(pp, la, lb);
    for k in 0..3 {
        let mut lb2 = *lb;
        lb2[k] += 2;
        total -= T::of(2.0) * b * b * overlap_prim(pp, la, &lb2);
        if lb[k] >= 2 {
            let mut lbm = *lb;
            lbm[k] -= 2;
            let j = lb[k] as usize;
            total -= T::of(0.5) * T::of_usize(j * (j - 1)) * overlap_prim(pp, la, &lbm);
        }
    }
    total
}

/// Positive-kernel nuclear attraction integral over one primitive pair;
/// the caller scales by -Z per nucleus.
fn nuclear_prim<T: Real>(pp: &PrimitivePair<T>, la: &[u32; 3], lb: &[u32; 3], c: &[T; 3]) -> T {
    let mut pc = [T::zero(); 3];
    let mut r2 = T::zero();
    for k in 0..3 {
        pc[k] = pp.center_p[k] - c[k];
        r2 += pc[k] * pc[k];
    }
    let mut val = T::zero();
    for t in 0..=(la[0] + lb[0]) as i32 {
        for u in 0..=(la[1] + lb[1]) as i32 {
            for v in 0..=(la[2] + lb[2]) as i32 {
                val += pp.e[0][la[0] as usize][lb[0] as usize][t as usize]
                    * pp.e[1][la[1] as usize][lb[1] as usize][u as usize]
                    * pp.e[2][la[2] as usize][lb[2] as usize][v as usize]
                    * hermite_r(t, u, v, 0, pp.p, &pc, r2);
            }
        }
    }
    T::of(2.0) * T::PI() / pp.p * val
}

/// Dipole moment integral <a| r_axis - C_axis |b> for one primitive pair.
fn dipole_prim<T: Real>(
    pp: &PrimitivePair<T>,
    la: &[u32; 3],
    lb: &[u32; 3],
    axis: usize,
    c: &[T; 3],
) -> T {
    let sq = (T::PI() / pp.p).sqrt();
    let mut val = T::one();
    for k in 0..3 {
        let (i, j) = (la[k] as usize, lb[k] as usize);
        if k == axis {
            let e1 = if i + j >= 1 { pp.e[k][i][j][1] } else { T::zero() };
            let pc = pp.center_p[k] - c[k];
            val = val * (e1 + pc * pp.e[k][i][j][0]) * sq;
        } else {
            val = val * pp.e[k][i][j][0] * sq;
        }
    }
    val
}

fn eri_prim<T: Real>(
    pp1: &PrimitivePair<T>,
    la: &[u32; 3],
    lb: &[u32; 3],
    pp2: &PrimitivePair<T>,
    lc: &[u32; 3],
    ld: &[u32; 3],
) -> T {
    let p = pp1.p;
    let q = pp2.p;
    let alpha = p * q / (p + q);
    let mut pq = [T::zero(); 3];
    let mut r2 = T::zero();
    for k in 0..3 {
        pq[k] = pp1.center_p[k] - pp2.center_p[k];
        r2 += pq[k] * pq[k];
    }
    let mut val = T::zero();
    for t in 0..=(la[0] + lb[0]) as usize {
        for u in 0..=(la[1] + lb[1]) as usize {
            for v in 0..=(la[2] + lb[2]) as usize {
                let e1 = pp1.e[0][la[0] as usize][lb[0] as usize][t]
                    * pp1.e[1][la[1] as usize][lb[1] as usize][u]
                    * pp1.e[2][la[2] as usize][lb[2] as usize][v];
                if e1 == T::zero() {
                    continue;
                }
                for tt in 0..=(lc[0] + ld[0]) as usize {
                    for uu in 0..=(lc[1] + ld[1]) as usize {
                        for vv in 0..=(lc[2] + ld[2]) as usize {
                            let e2 = pp2.e[0][lc[0] as usize][ld[0] as usize][tt]
                                * pp2.e[1][lc[1] as usize][ld[1] as usize][uu]
                                * pp2.e[2][lc[2] as usize][ld[2] as usize][vv];
                            if e2 == T::zero() {
                                continue;
                            }
                            let sign = if (tt + uu + vv) % 2 == 0 { T::one() } else { -T::one() };
                            val += e1 * e2
                                * sign
                                * hermite_r(
                                    (t + tt) as i32,
                                    (u + uu) as i32,
                                    (v + vv) as i32,
                                    0,
                                    alpha,
                                    &pq,
                                    r2,
                                );
                        }
                    }
                }
            }
        }
    }
    let two = T::of(2.0);
    val * two * T::PI() * T::PI() * (T::PI() / (p + q)).sqrt() / (p * q)
}

/// Contracted overlap <a|b>; also used to normalize basis functions.
pub fn overlap_contracted<T: Real>(ga: &ContractedGaussian<T>, gb: &ContractedGaussian<T>) -> T {
    let mut val = T::zero();
    for &(a, ca) in &ga.primitives {
        for &(b, cb) in &gb.primitives {
            let pp = pair(a, ga, b, gb, 0);
            val += ca * cb * overlap_prim(&pp, &ga.lmn, &gb.lmn);
        }
    }
    val
}

/// Two-electron integrals in chemists' notation, stored with the full
/// 8-fold permutational symmetry materialized.
#[derive(Debug, Clone)]
pub struct Eri<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Eri<T> {
    fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n * n * n] }
    }

    /// Wrap a dense row-major 4-index buffer.
    pub fn from_dense(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n * n * n);
        Self { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    fn set_sym(&mut self, i: usize, j: usize, k: usize, l: usize, v: T) {
        let n = self.n;
        for (p, q, r, s) in [
            (i, j, k, l),
            (j, i, k, l),
            (i, j, l, k),
            (j, i, l, k),
            (k, l, i, j),
            (l, k, i, j),
            (k, l, j, i),
            (l, k, j, i),
        ] {
            self.data[((p * n + q) * n + r) * n + s] = v;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// One- and two-electron integrals over the contracted AO basis.
#[derive(Debug, Clone)]
pub struct IntegralSet<T> {
    /// Overlap matrix.
    pub s: Array2<T>,
    /// Kinetic energy matrix (hartree).
    pub t: Array2<T>,
    /// Nuclear attraction matrix (hartree).
    pub v: Array2<T>,
    /// Electron repulsion tensor (mu nu | lambda sigma), hartree.
    pub eri: Eri<T>,
    /// Dipole matrices <mu| r - O |nu> per axis (e*bohr).
    pub dipole: [Array2<T>; 3],
    /// Nuclear repulsion energy (hartree).
    pub e_nuc: T,
    /// Dipole origin O: the center of nuclear charge (bohr).
    pub dipole_origin: [T; 3],
    /// Nuclear dipole Sum_A Z_A (R_A - O) per axis (e*bohr).
    pub nuclear_dipole: [T; 3],
}

impl<T: Real> IntegralSet<T> {
    pub fn n_ao(&self) -> usize {
        self.s.nrows()
    }
}

/// Evaluate all integrals for a geometry in the given basis.
pub fn build_integrals<T: Real>(
    geometry: &MolecularGeometry<T>,
    basis: &BasisSet,
) -> Result<IntegralSet<T>> {
    let aos = basis.atomic_orbitals(geometry)?;
    let n = aos.len();
    let origin = geometry.charge_center_bohr();
    let nuclei: Vec<([T; 3], T)> = geometry
        .positions_bohr()
        .into_iter()
        .zip(geometry.atomic_numbers())
        .map(|(p, z)| (p, T::of_usize(z as usize)))
        .collect();

    let mut s = Array2::<T>::zeros((n, n));
    let mut t = Array2::<T>::zeros((n, n));
    let mut v = Array2::<T>::zeros((n, n));
    let mut dipole = [Array2::<T>::zeros((n, n)), Array2::zeros((n, n)), Array2::zeros((n, n))];

    for i in 0..n {
        for j in 0..=i {
            let (ga, gb) = (&aos[i], &aos[j]);
            let mut sij = T::zero();
            let mut tij = T::zero();
            let mut vij = T::zero();
            let mut dij = [T::zero(); 3];
            for &(a, ca) in &ga.primitives {
                for &(b, cb) in &gb.primitives {
                    let w = ca * cb;
                    // Kinetic needs E tables two quanta above the bra/ket.
                    let pp = pair(a, ga, b, gb, 2);
                    sij += w * overlap_prim(&pp, &ga.lmn, &gb.lmn);
                    tij += w * kinetic_prim(&pp, &ga.lmn, &gb.lmn);
                    for (c, z) in &nuclei {
                        vij -= w * *z * nuclear_prim(&pp, &ga.lmn, &gb.lmn, c);
                    }
                    for (axis, d) in dij.iter_mut().enumerate() {
                        *d += w * dipole_prim(&pp, &ga.lmn, &gb.lmn, axis, &origin);
                    }
                }
            }
            s[[i, j]] = sij;
            s[[j, i]] = sij;
            t[[i, j]] = tij;
            t[[j, i]] = tij;
            v[[i, j]] = vij;
            v[[j, i]] = vij;
            for (axis, d) in dij.iter().enumerate() {
                dipole[axis][[i, j]] = *d;
                dipole[axis][[j, i]] = *d;
            }
        }
    }

    let (w, _) = linalg::eigh(&s);
    if w[0] < T::of(1e-8) {
        return Err(Error::Conditioning(format!(
            "overlap matrix nearly singular (smallest eigenvalue {:e})",
            w[0]
        )));
    }

    let mut eri = Eri::zeros(n);
    let pair_idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
    for i in 0..n {
        for j in 0..=i {
            for k in 0..=i {
                for l in 0..=k {
                    if pair_idx(i, j) < pair_idx(k, l) {
                        continue;
                    }
                    let mut val = T::zero();
                    for &(a, ca) in &aos[i].primitives {
                        for &(b, cb) in &aos[j].primitives {
                            let pp1 = pair(a, &aos[i], b, &aos[j], 0);
                            for &(c, cc) in &aos[k].primitives {
                                for &(d, cd) in &aos[l].primitives {
                                    let pp2 = pair(c, &aos[k], d, &aos[l], 0);
                                    val += ca * cb * cc * cd
                                        * eri_prim(
                                            &pp1,
                                            &aos[i].lmn,
                                            &aos[j].lmn,
                                            &pp2,
                                            &aos[k].lmn,
                                            &aos[l].lmn,
                                        );
                                }
                            }
                        }
                    }
                    eri.set_sym(i, j, k, l, val);
                }
            }
        }
    }

    let mut nuclear_dipole = [T::zero(); 3];
    for (c, z) in &nuclei {
        for k in 0..3 {
            nuclear_dipole[k] += *z * (c[k] - origin[k]);
        }
    }

    Ok(IntegralSet {
        s,
        t,
        v,
        eri,
        dipole,
        e_nuc: geometry.nuclear_repulsion()?,
        dipole_origin: origin,
        nuclear_dipole,
    })
}
