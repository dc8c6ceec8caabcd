//! Coherently pumped, uniformly damped lattice: steady states, driven
//! trajectories, steady-state photon numbers (SSPN) and CLES fidelity.
//!
//! Everything runs in units of `J` in the frame rotating at the pump:
//! `i da/dt = [B(t) - (w_P + i k/2)] a + P`.

use serde::Serialize;

use crate::cqed::TimeDependentModel;
use crate::error::{invalid, Error, Result};
use crate::gauge::LinkSet;
use crate::lattice::{extract_cles, LatticeModel, LatticeSpec, ModeIndex, Site};
use crate::linalg::normalized_overlap;
use crate::ode::{integrate, Stats, Tolerances};
use crate::scalar::{c, cr, CMatrix, CVector, Scalar, C};

/// Pump vector (`2pi MHz`, over the flattened basis), pump detuning from the
/// pumped mode and decay rate (both in units of `J`).
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSetup<T: Scalar> {
    pub pump: CVector<T>,
    pub omega_p: T,
    pub kappa: T,
}

impl<T: Scalar> DriveSetup<T> {
    pub fn new(pump: CVector<T>, omega_p: T, kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(invalid("kappa", "need finite kappa > 0"));
        }
        if !omega_p.is_finite() {
            return Err(invalid("omega_p", "not finite"));
        }
        if pump.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("pump", "not finite"));
        }
        Ok(Self { pump, omega_p, kappa })
    }

    /// A single pumped mode with complex amplitude `amplitude` (`2pi MHz`).
    pub fn single(spec: &LatticeSpec<T>, mode: ModeIndex, amplitude: C<T>, omega_p: T, kappa: T) -> Result<Self> {
        let mut pump = CVector::zeros(spec.dim());
        pump[spec.index(mode)?] = amplitude;
        Self::new(pump, omega_p, kappa)
    }

    /// Pump divided by `J`.
    pub fn pump_in_j(&self, hopping_j: T) -> CVector<T> {
        &self.pump / cr(hopping_j)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.pump.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.pump.len() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState<T: Scalar> {
    pub amplitudes: CVector<T>,
    /// `|a|^2` per mode.
    pub sspn: Vec<T>,
    /// `|[B - (w_P + i k/2)] a + P| / |P|`, zero when `P = 0`.
    pub residual: T,
}

fn sspn_of<T: Scalar>(a: &CVector<T>) -> Vec<T> {
    a.iter().map(|z| z.re * z.re + z.im * z.im).collect()
}

/// `a = -[B - (w_P + i k/2)]^{-1} P` by dense LU.
pub fn steady_state<T: Scalar>(model: &LatticeModel<T>, drive: &DriveSetup<T>) -> Result<SteadyState<T>> {
    drive.check_dim(model.dim())?;
    let p = drive.pump_in_j(model.spec.hopping_j);
    let mut m = model.hamiltonian_in_j();
    let shift = c(drive.omega_p, drive.kappa / T::of(2.0));
    for i in 0..m.nrows() {
        m[(i, i)] -= shift;
    }
    let lu = m.clone().lu();
    let amplitudes = lu.solve(&(-&p)).ok_or(Error::Singular)?;
    let p_norm = p.norm();
    let residual = if p_norm > T::zero() { (&m * &amplitudes + &p).norm() / p_norm } else { T::zero() };
    if residual > T::residual_tol() {
        return Err(Error::Singular);
    }
    let sspn = sspn_of(&amplitudes);
    Ok(SteadyState { amplitudes, sspn, residual })
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    /// Units of `1/J`.
    pub times: Vec<T>,
    pub amplitudes: Vec<CVector<T>>,
    pub stats: Stats,
}

impl<T: Scalar> Trajectory<T> {
    pub fn sspn(&self, sample: usize) -> Vec<T> {
        sspn_of(&self.amplitudes[sample])
    }
}

/// Integrate from `a(0) = 0`, sampling at `times` (ascending, units of
/// `1/J`).
pub fn integrate_driven<T: Scalar>(
    model: &TimeDependentModel<T>,
    drive: &DriveSetup<T>,
    times: &[T],
    tol: Tolerances,
) -> Result<Trajectory<T>> {
    drive.check_dim(model.dim())?;
    if times.last().is_none_or(|t| *t <= T::zero()) {
        return Err(invalid("t_max", "need at least one positive sample time"));
    }
    let p = drive.pump_in_j(model.hopping_j);
    let shift = c(drive.omega_p, drive.kappa / T::of(2.0));
    let minus_i = c(T::zero(), -T::one());
    let omega_p = drive.omega_p;
    let rhs = |t: T, a: &CVector<T>| (model.apply(t, a, omega_p) - a * shift + &p) * minus_i;
    let (amplitudes, stats) = integrate(rhs, T::zero(), CVector::zeros(model.dim()), times, tol)?;
    Ok(Trajectory { times: times.to_vec(), amplitudes, stats })
}

/// `F(t) = |<a(t)|E>| / (|a(t)| |E|)`, reported as 0 while `|a(t)| < 1e-12`.
pub fn fidelity_series<T: Scalar>(traj: &Trajectory<T>, target: &CVector<T>) -> Result<Vec<T>> {
    traj.amplitudes
        .iter()
        .map(|a| {
            if a.len() != target.len() {
                return Err(Error::BasisMismatch(format!(
                    "trajectory has {} modes, target {}",
                    a.len(),
                    target.len()
                )));
            }
            Ok(normalized_overlap(target, a))
        })
        .collect()
}

/// Orthogonal projection of the pumped mode onto the span of every compact
/// localized state at `energy` that fits on `model`, normalized. This is the
/// CLES a resonant pump at that mode selects; zero if none contains it.
pub fn resonant_cles<T: Scalar>(
    model: &LatticeModel<T>,
    links: &LinkSet<T>,
    energy: T,
    pumped: ModeIndex,
) -> Result<CVector<T>> {
    let states = extract_cles(links, model.spec.orientation, energy, 3)?;
    let mut cols = Vec::new();
    for s in &states {
        let cells = s.support_cells();
        let (lo, hi) = (cells[0], cells[cells.len() - 1]);
        for anchor in model.spec.first_cell - lo..=model.spec.last_cell() - hi {
            cols.push(s.embed(model, anchor)?);
        }
    }
    if cols.is_empty() {
        return Err(Error::BasisMismatch(format!("no compact state at E = {} fits the lattice", energy.to_f64_lossy())));
    }
    let basis = CMatrix::from_columns(&cols);
    let mut e = CVector::zeros(model.dim());
    e[model.index(pumped)?] = cr(T::one());
    let gram = basis.adjoint() * &basis;
    let rhs = basis.adjoint() * &e;
    let coef = gram.pseudo_inverse(T::of(1e-10)).map_err(|_| Error::Singular)? * rhs;
    let v = basis * coef;
    let n = v.norm();
    Ok(if n > T::of(1e-12) { v / cr(n) } else { v })
}

/// `|<E|a>|^2 / (|E|^2 |a|^2)`.
pub fn overlap_fraction<T: Scalar>(target: &CVector<T>, a: &CVector<T>) -> T {
    let f = normalized_overlap(target, a);
    f * f
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SspnRow {
    pub cell: i64,
    pub site: Site,
    pub mode: usize,
    pub raw: f64,
    /// Fraction of the total; zero when the total vanishes.
    pub normalized: f64,
}

/// SSPN per `(cell, site, mode)`, grouped by mode (component) first.
pub fn sspn_report<T: Scalar>(state: &SteadyState<T>, spec: &LatticeSpec<T>) -> Result<Vec<SspnRow>> {
    if state.sspn.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: state.sspn.len() });
    }
    let total: f64 = state.sspn.iter().map(|x| x.to_f64_lossy()).sum();
    let mut rows: Vec<SspnRow> = spec
        .modes()
        .zip(&state.sspn)
        .map(|(m, x)| {
            let raw = x.to_f64_lossy();
            SspnRow {
                cell: m.cell,
                site: m.site,
                mode: m.mode,
                raw,
                normalized: if total > 0.0 { raw / total } else { 0.0 },
            }
        })
        .collect();
    rows.sort_by_key(|r| (r.mode, r.cell, r.site));
    Ok(rows)
}

/// Flat indices of the A modes in `a_cells` and of every B/C mode bonded
/// to one of them.
pub fn cage_region<T: Scalar>(model: &LatticeModel<T>, a_cells: &[i64]) -> Vec<usize> {
    let n = model.spec.n_components;
    let mut sites = Vec::new();
    for b in model.bonds() {
        for (x, y) in [(b.row, b.col), (b.col, b.row)] {
            if x.site == Site::A && a_cells.contains(&x.cell) {
                sites.push(x);
                sites.push(y);
            }
        }
    }
    let mut idx: Vec<usize> = sites
        .into_iter()
        .filter_map(|s| model.site_offset(s).ok())
        .flat_map(|o| o..o + n)
        .collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// Share of `sum |a|^2` on the given modes.
pub fn weight_fraction<T: Scalar>(sspn: &[T], modes: &[usize]) -> T {
    let total = sspn.iter().fold(T::zero(), |a, x| a + *x);
    if total <= T::zero() {
        return T::zero();
    }
    modes.iter().fold(T::zero(), |a, &i| a + sspn[i]) / total
}

/// Amplitudes for each pump placed at `mode` with detuning sweep
/// `omega_ps` (units of `J`); a convenience over [`steady_state`].
pub fn sweep_detuning<T: Scalar>(
    model: &LatticeModel<T>,
    mode: ModeIndex,
    amplitude: C<T>,
    omega_ps: &[T],
    kappa: T,
) -> Result<Vec<SteadyState<T>>> {
    omega_ps
        .iter()
        .map(|w| steady_state(model, &DriveSetup::single(&model.spec, mode, amplitude, *w, kappa)?))
        .collect()
}

/// Mirror image of a mode across cell 0: A cells map `n -> -n` with the
/// components swapped, B/C cells `n -> -n - 1` (they sit between `A_n` and
/// `A_{n+1}`) with components kept.
pub fn mirror_mode(m: ModeIndex, n_components: usize) -> ModeIndex {
    if m.site == Site::A {
        ModeIndex::new(-m.cell, m.site, n_components + 1 - m.mode)
    } else {
        ModeIndex::new(-m.cell - 1, m.site, m.mode)
    }
}
