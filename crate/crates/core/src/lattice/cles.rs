use std::collections::BTreeMap;

use super::{band_structure, build_real_space, LatticeModel, LatticeSpec, ModeIndex, Orientation};
use crate::error::{invalid, Error, Result};
use crate::gauge::LinkSet;
use crate::linalg::{canonical_basis, normalize_phase, null_space};
use nalgebra::ComplexField;

use crate::scalar::{cr, CMatrix, CVector, Scalar, C};

/// Cells in the open chain used to certify that a windowed state is an
/// exact eigenstate.
const EMBEDDING_CELLS: usize = 7;
const WINDOW_START: i64 = 2;

/// Compact localized eigenstate. Cells in `amplitudes` are relative to the
/// window's first cell (0); energy in units of `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cles<T: Scalar> {
    pub energy: T,
    pub amplitudes: BTreeMap<ModeIndex, C<T>>,
}

impl<T: Scalar> Cles<T> {
    /// Cells carrying nonzero weight, ascending.
    pub fn support_cells(&self) -> Vec<i64> {
        let mut cells: Vec<i64> = self.amplitudes.keys().map(|m| m.cell).collect();
        cells.dedup();
        cells
    }

    pub fn amplitude(&self, m: ModeIndex) -> C<T> {
        self.amplitudes.get(&m).copied().unwrap_or_else(|| cr(T::zero()))
    }

    /// Place the state on `model` with relative cell 0 at `anchor_cell`.
    pub fn embed(&self, model: &LatticeModel<T>, anchor_cell: i64) -> Result<CVector<T>> {
        let mut v = CVector::zeros(model.dim());
        for (m, a) in &self.amplitudes {
            let idx = model
                .index(m.shifted(anchor_cell))
                .map_err(|_| Error::BasisMismatch(format!("{m} at anchor {anchor_cell} leaves the lattice")))?;
            v[idx] = *a;
        }
        Ok(v)
    }
}

/// Compact eigenstates at `energy` (units of `J`) that fit in a window of
/// `window_cells` consecutive cells.
///
/// The window sits inside a longer open chain; the states are the null
/// space of `(H - E)` restricted to the window's columns, so they are exact
/// eigenstates of the embedding chain, and hence of any longer lattice. An
/// empty list means no compact state fits the window.
pub fn extract_cles<T: Scalar>(
    links: &LinkSet<T>,
    orientation: Orientation,
    energy: T,
    window_cells: usize,
) -> Result<Vec<Cles<T>>> {
    if !(1..=3).contains(&window_cells) {
        return Err(invalid("window_cells", format!("need 1..=3, got {window_cells}")));
    }
    check_flat_energy(links, orientation, energy)?;

    let n = links.n_components();
    let spec = LatticeSpec::new(n, EMBEDDING_CELLS, super::Boundary::Open, T::one())
        .with_orientation(orientation);
    let model = build_real_space(spec, links)?;
    let dim = model.dim();
    let width = 3 * n * window_cells;
    let col0 = model.index(ModeIndex::new(WINDOW_START, super::Site::A, 1))?;

    let mut shifted = model.hamiltonian().clone();
    for i in 0..dim {
        shifted[(i, i)] -= cr(energy);
    }
    let restricted: CMatrix<T> = shifted.columns(col0, width).into_owned();
    let candidates = null_space(&restricted, T::of(1e-8))?;
    let basis = canonical_basis(&candidates, T::of(1e-10));

    let tol = T::residual_tol();
    let mut states = Vec::with_capacity(basis.len());
    for v in basis {
        let v = normalize_phase(&v);
        let mut full = CVector::<T>::zeros(dim);
        full.rows_mut(col0, width).copy_from(&v);
        let residual = (&shifted * &full).norm();
        if residual > tol {
            continue;
        }
        let mut amplitudes = BTreeMap::new();
        for (k, z) in v.iter().enumerate() {
            if z.modulus() > T::of(1e-12) {
                let m = model.mode_at(col0 + k);
                amplitudes.insert(m.shifted(-WINDOW_START), *z);
            }
        }
        states.push(Cles { energy, amplitudes });
    }
    Ok(states)
}

fn check_flat_energy<T: Scalar>(links: &LinkSet<T>, orientation: Orientation, energy: T) -> Result<()> {
    let bands = band_structure(links, orientation, 16)?;
    let tol = T::of(1e-8);
    let present = bands
        .energies
        .iter()
        .all(|e| e.iter().any(|x| (*x - energy).abs() <= tol));
    if present {
        Ok(())
    } else {
        Err(Error::EnergyNotInSpectrum { energy: energy.to_f64_lossy() })
    }
}
