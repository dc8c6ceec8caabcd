use serde::Serialize;

use super::{oriented_link, Orientation};
use crate::error::{invalid, Result};
use crate::gauge::{LinkId, LinkSet};
use crate::linalg::{eigvalsh, max_abs};
use crate::scalar::{cis, cr, CMatrix, Scalar};

/// Bloch matrix in units of `J`, basis `[A_1..A_N, B_1..B_N, C_1..C_N]`.
///
/// Generated from the links with the same bond placement as
/// [`super::build_real_space`], so periodic real-space spectra are the union
/// of Bloch spectra over `k = 2 pi j / L`.
pub fn bloch_hamiltonian<T: Scalar>(links: &LinkSet<T>, orientation: Orientation, k: T) -> CMatrix<T> {
    let n = links.n_components();
    let mut h = CMatrix::<T>::zeros(3 * n, 3 * n);
    for link in LinkId::ALL {
        let (row, col, offset) = oriented_link(link, orientation);
        // row cell = col cell + offset, so the Bloch phase is e^{-i k offset}
        let phase = cis(-k * T::of(offset as f64));
        let u = links.link(link).matrix();
        let (r0, c0) = (row.ordinal() * n, col.ordinal() * n);
        for a in 0..n {
            for b in 0..n {
                let v = -u[(a, b)] * phase;
                h[(r0 + a, c0 + b)] += v;
                h[(c0 + b, r0 + a)] += v.conj();
            }
        }
    }
    h
}

/// Energies (units of `J`, ascending per `k`) on the grid
/// `k_j = -pi + 2 pi j / n_k`.
#[derive(Debug, Clone, Serialize)]
pub struct BandStructure<T> {
    pub k_grid: Vec<T>,
    pub energies: Vec<Vec<T>>,
}

impl<T: Scalar> BandStructure<T> {
    pub fn n_bands(&self) -> usize {
        self.energies.first().map_or(0, |e| e.len())
    }

    pub fn band(&self, index: usize) -> impl Iterator<Item = T> + '_ {
        self.energies.iter().map(move |e| e[index])
    }

    pub fn band_means(&self) -> Vec<T> {
        let nk = T::of(self.energies.len() as f64);
        (0..self.n_bands())
            .map(|b| self.band(b).fold(T::zero(), |acc, e| acc + e) / nk)
            .collect()
    }

    /// Population standard deviation of each band over the grid.
    pub fn band_std(&self) -> Vec<T> {
        let nk = T::of(self.energies.len() as f64);
        self.band_means()
            .into_iter()
            .enumerate()
            .map(|(b, mean)| {
                let var = self.band(b).fold(T::zero(), |acc, e| acc + (e - mean) * (e - mean)) / nk;
                var.sqrt()
            })
            .collect()
    }

    pub fn shifted(&self, shift: T) -> Self {
        Self {
            k_grid: self.k_grid.clone(),
            energies: self
                .energies
                .iter()
                .map(|e| e.iter().map(|&x| x + shift).collect())
                .collect(),
        }
    }
}

pub fn k_grid<T: Scalar>(n_k: usize) -> Vec<T> {
    (0..n_k)
        .map(|j| -T::pi() + T::two_pi() * T::of(j as f64) / T::of(n_k as f64))
        .collect()
}

pub fn band_structure<T: Scalar>(
    links: &LinkSet<T>,
    orientation: Orientation,
    n_k: usize,
) -> Result<BandStructure<T>> {
    if n_k < 2 {
        return Err(invalid("n_k", format!("need at least 2 k points, got {n_k}")));
    }
    let k_grid = k_grid::<T>(n_k);
    let energies = k_grid
        .iter()
        .map(|&k| eigvalsh(&bloch_hamiltonian(links, orientation, k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStructure { k_grid, energies })
}

/// `max_k |E_n(k) - mean_k E_n|` per band; zero for a flat band.
pub fn flatness_metric<T: Scalar>(bands: &BandStructure<T>) -> Vec<T> {
    bands
        .band_means()
        .into_iter()
        .enumerate()
        .map(|(b, mean)| bands.band(b).fold(T::zero(), |acc, e| acc.max((e - mean).abs())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub chiral: bool,
    pub trs_pseudospin: bool,
    pub ph: bool,
    /// `max_k |C H_k + H_k C|_F`.
    pub chiral_residual: f64,
    /// `max_k max |H_{-k} - conj(H_k)|`.
    pub trs_residual: f64,
}

/// `C = diag(+1 on A modes, -1 on B and C modes)`.
pub fn chiral_operator<T: Scalar>(n_components: usize) -> CMatrix<T> {
    let n = n_components;
    CMatrix::from_fn(3 * n, 3 * n, |i, j| {
        if i != j {
            cr(T::zero())
        } else if i < n {
            cr(T::one())
        } else {
            cr(-T::one())
        }
    })
}

pub fn symmetry_checks<T: Scalar>(
    links: &LinkSet<T>,
    orientation: Orientation,
    n_k: usize,
) -> Result<SymmetryReport> {
    if n_k < 2 {
        return Err(invalid("n_k", format!("need at least 2 k points, got {n_k}")));
    }
    let c = chiral_operator::<T>(links.n_components());
    let mut chiral_residual = T::zero();
    let mut trs_residual = T::zero();
    for k in k_grid::<T>(n_k) {
        let hk = bloch_hamiltonian(links, orientation, k);
        let anti = &c * &hk + &hk * &c;
        chiral_residual = chiral_residual.max(anti.norm());
        let hmk = bloch_hamiltonian(links, orientation, -k);
        trs_residual = trs_residual.max(max_abs(&(hmk - hk.map(|z| z.conj()))));
    }
    let tol = T::exact_tol();
    let chiral = chiral_residual <= tol;
    let trs_pseudospin = trs_residual <= tol;
    Ok(SymmetryReport {
        chiral,
        trs_pseudospin,
        ph: chiral && trs_pseudospin,
        chiral_residual: chiral_residual.to_f64_lossy(),
        trs_residual: trs_residual.to_f64_lossy(),
    })
}
