//! Rhombic-chain Hamiltonians built from a [`LinkSet`].
//!
//! Every unit cell `n` holds a spinal site `A` and two apical sites `B`, `C`,
//! each with `N` modes. Flattened index of `[cell, site, mode]` is
//! `((cell - first_cell) * 3 + site) * N + (mode - 1)`.

mod bloch;
mod cles;

pub use bloch::{
    band_structure, bloch_hamiltonian, flatness_metric, symmetry_checks, BandStructure,
    SymmetryReport,
};
pub use cles::{extract_cles, Cles};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gauge::{LinkId, LinkSet};
use crate::linalg::hermiticity_deviation;
use crate::scalar::{cr, CMatrix, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    A,
    B,
    C,
}

impl Site {
    pub const ALL: [Site; 3] = [Site::A, Site::B, Site::C];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(k: usize) -> Option<Site> {
        Self::ALL.get(k).copied()
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Site::A => "A",
            Site::B => "B",
            Site::C => "C",
        })
    }
}

impl FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Site::A),
            "B" | "b" => Ok(Site::B),
            "C" | "c" => Ok(Site::C),
            _ => Err(invalid("site", format!("expected A, B or C, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Which hop a link variable describes.
///
/// With `Rightward` the block `[right site, left site]` of `H` is `-J U`, so
/// `U` is picked up when hopping rightward and rightward A-to-A transfer goes
/// through the interference matrix `I`. `Leftward` places `-J U` on
/// `[left site, right site]`, the mirror image; for the U(2) model it sends
/// a walker started in `[n,A,1]` rightward into `[n+1,A,2]`, which is why it
/// is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Rightward,
    #[default]
    Leftward,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Rightward => Orientation::Leftward,
            Orientation::Leftward => Orientation::Rightward,
        }
    }
}

/// One mode of the lattice, `[cell, site, mode]` with `mode` 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub cell: i64,
    pub site: Site,
    pub mode: usize,
}

impl ModeIndex {
    pub fn new(cell: i64, site: Site, mode: usize) -> Self {
        Self { cell, site, mode }
    }

    /// `"cell/site/mode"`, e.g. `"0/A/1"`.
    pub fn key(&self) -> String {
        self.to_string()
    }

    pub fn shifted(&self, cells: i64) -> Self {
        Self { cell: self.cell + cells, ..*self }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.cell, self.site, self.mode)
    }
}

impl FromStr for ModeIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('/').collect();
        if parts.len() != 3 {
            return Err(invalid("mode", format!("expected cell/site/mode, got {s:?}")));
        }
        let cell = parts[0]
            .parse()
            .map_err(|_| invalid("mode", format!("bad cell in {s:?}")))?;
        let site = parts[1].parse()?;
        let mode = parts[2]
            .parse()
            .map_err(|_| invalid("mode", format!("bad mode in {s:?}")))?;
        Ok(Self { cell, site, mode })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec<T> {
    pub n_components: usize,
    pub n_cells: usize,
    pub boundary: Boundary,
    /// Hopping strength in units of 2pi MHz.
    pub hopping_j: T,
    /// Label of the leftmost cell.
    #[serde(default)]
    pub first_cell: i64,
    #[serde(default)]
    pub orientation: Orientation,
}

impl<T: Scalar> LatticeSpec<T> {
    pub fn new(n_components: usize, n_cells: usize, boundary: Boundary, hopping_j: T) -> Self {
        Self {
            n_components,
            n_cells,
            boundary,
            hopping_j,
            first_cell: 0,
            orientation: Orientation::default(),
        }
    }

    /// Open chain of `n_cells` cells labelled symmetrically around 0
    /// (`-5..=5` for 11 cells).
    pub fn centered(n_components: usize, n_cells: usize, hopping_j: T) -> Self {
        Self {
            first_cell: -((n_cells as i64 - 1) / 2),
            ..Self::new(n_components, n_cells, Boundary::Open, hopping_j)
        }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_first_cell(mut self, first_cell: i64) -> Self {
        self.first_cell = first_cell;
        self
    }

    pub fn last_cell(&self) -> i64 {
        self.first_cell + self.n_cells as i64 - 1
    }

    pub fn dim(&self) -> usize {
        3 * self.n_components * self.n_cells
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_components == 0 {
            return Err(invalid("n_components", "must be positive"));
        }
        if self.n_cells < 3 {
            return Err(invalid("n_cells", format!("need at least 3 cells, got {}", self.n_cells)));
        }
        if !(self.hopping_j > T::zero()) {
            return Err(invalid("hopping_j", "must be positive"));
        }
        Ok(())
    }

    pub fn index(&self, m: ModeIndex) -> Result<usize> {
        let rel = m.cell - self.first_cell;
        if rel < 0 || rel >= self.n_cells as i64 || m.mode == 0 || m.mode > self.n_components {
            return Err(invalid("mode", format!("{m} is outside the lattice")));
        }
        Ok((rel as usize * 3 + m.site.ordinal()) * self.n_components + m.mode - 1)
    }

    pub fn mode_at(&self, flat: usize) -> ModeIndex {
        let n = self.n_components;
        let mode = flat % n + 1;
        let site = Site::from_ordinal((flat / n) % 3).expect("ordinal < 3");
        let cell = (flat / (3 * n)) as i64 + self.first_cell;
        ModeIndex { cell, site, mode }
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        (0..self.dim()).map(move |k| self.mode_at(k))
    }
}

/// Endpoint of a bond: `(cell, site)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRef {
    pub cell: i64,
    pub site: Site,
}

/// A hopping block `H[row, col] = -J U_link` (plus its conjugate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub link: LinkId,
    pub row: SiteRef,
    pub col: SiteRef,
}

/// Left and right endpoint sites of a link, and whether the right site sits
/// in the next cell.
pub(crate) fn link_geometry(link: LinkId) -> (Site, Site, i64) {
    match link {
        LinkId::U1 => (Site::A, Site::B, 0),
        LinkId::U2 => (Site::B, Site::A, 1),
        LinkId::U3 => (Site::A, Site::C, 0),
        LinkId::U4 => (Site::C, Site::A, 1),
    }
}

/// Row/column sites and the cell offset `row_cell - col_cell` of a link's
/// `-J U` block.
pub(crate) fn oriented_link(link: LinkId, orientation: Orientation) -> (Site, Site, i64) {
    let (left, right, offset) = link_geometry(link);
    match orientation {
        Orientation::Rightward => (right, left, offset),
        Orientation::Leftward => (left, right, -offset),
    }
}

fn bonds_for<T: Scalar>(spec: &LatticeSpec<T>) -> Vec<Bond> {
    let l = spec.n_cells as i64;
    let mut bonds = Vec::with_capacity(4 * spec.n_cells);
    for rel in 0..l {
        let cell = spec.first_cell + rel;
        for link in LinkId::ALL {
            let (left, right, offset) = link_geometry(link);
            let mut right_rel = rel + offset;
            if right_rel >= l {
                match spec.boundary {
                    Boundary::Open => continue,
                    Boundary::Periodic => right_rel -= l,
                }
            }
            let left_ref = SiteRef { cell, site: left };
            let right_ref = SiteRef { cell: spec.first_cell + right_rel, site: right };
            let (row, col) = match spec.orientation {
                Orientation::Rightward => (right_ref, left_ref),
                Orientation::Leftward => (left_ref, right_ref),
            };
            bonds.push(Bond { link, row, col });
        }
    }
    bonds
}

/// Real-space model: spec, links, the bond list and the dense Hamiltonian
/// (units of 2pi MHz, i.e. scaled by `hopping_j`).
#[derive(Debug, Clone)]
pub struct LatticeModel<T: Scalar> {
    pub spec: LatticeSpec<T>,
    pub links: LinkSet<T>,
    bonds: Vec<Bond>,
    h: CMatrix<T>,
}

impl<T: Scalar> LatticeModel<T> {
    pub fn hamiltonian(&self) -> &CMatrix<T> {
        &self.h
    }

    /// Hamiltonian divided by `J`.
    pub fn hamiltonian_in_j(&self) -> CMatrix<T> {
        &self.h / cr(self.spec.hopping_j)
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn index(&self, m: ModeIndex) -> Result<usize> {
        self.spec.index(m)
    }

    pub fn mode_at(&self, flat: usize) -> ModeIndex {
        self.spec.mode_at(flat)
    }

    /// Flat index of the first mode of `(cell, site)`.
    pub fn site_offset(&self, site: SiteRef) -> Result<usize> {
        self.spec.index(ModeIndex::new(site.cell, site.site, 1))
    }
}

pub fn build_real_space<T: Scalar>(spec: LatticeSpec<T>, links: &LinkSet<T>) -> Result<LatticeModel<T>> {
    spec.validate()?;
    if spec.n_components != links.n_components() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_components,
            got: links.n_components(),
        });
    }
    let n = spec.n_components;
    let dim = spec.dim();
    let mut h = CMatrix::<T>::zeros(dim, dim);
    let bonds = bonds_for(&spec);
    let scale = cr(-spec.hopping_j);
    for bond in &bonds {
        let r0 = spec.index(ModeIndex::new(bond.row.cell, bond.row.site, 1))?;
        let c0 = spec.index(ModeIndex::new(bond.col.cell, bond.col.site, 1))?;
        let u = links.link(bond.link).matrix();
        for a in 0..n {
            for b in 0..n {
                let v = u[(a, b)] * scale;
                h[(r0 + a, c0 + b)] += v;
                h[(c0 + b, r0 + a)] += v.conj();
            }
        }
    }
    debug_assert!(hermiticity_deviation(&h) <= T::exact_tol());
    Ok(LatticeModel { spec, links: links.clone(), bonds, h })
}
