//! Link-variable algebra: unitary links on one rhombic unit cell, the
//! interference matrix of the two paths between neighbouring A sites, and
//! constructors for families whose interference matrix is nilpotent.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{max_abs, unitarity_deviation};
use crate::scalar::{c, cis, cr, CMatrix, Scalar, C};

/// Square matrix checked to satisfy `U U^dagger = 1` at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix<T: Scalar>(CMatrix<T>);

impl<T: Scalar> UnitaryMatrix<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        Self::with_tolerance(m, T::exact_tol())
    }

    pub fn with_tolerance(m: CMatrix<T>, tol: T) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let deviation = unitarity_deviation(&m);
        if !(deviation <= tol) {
            return Err(Error::NotUnitary { deviation: deviation.to_f64_lossy() });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    /// Build from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = CMatrix::from_fn(n, rows.first().map_or(0, |r| r.len()), |i, j| {
            cr(T::of(rows[i][j]))
        });
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix<T> {
        self.0
    }

    /// Multiply by a global phase `e^{i phi}` (stays unitary).
    pub fn with_phase(&self, phi: T) -> Self {
        Self(&self.0 * cis(phi))
    }
}

/// Identifies one of the four rightward links of a unit cell:
/// `U1: A_n -> B_n`, `U2: B_n -> A_{n+1}`, `U3: A_n -> C_n`, `U4: C_n -> A_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkId {
    U1,
    U2,
    U3,
    U4,
}

impl LinkId {
    pub const ALL: [LinkId; 4] = [LinkId::U1, LinkId::U2, LinkId::U3, LinkId::U4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkId::U1 => "U1",
            LinkId::U2 => "U2",
            LinkId::U3 => "U3",
            LinkId::U4 => "U4",
        }
    }
}

/// The four link variables of one unit cell, all of the same dimension `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSet<T: Scalar> {
    links: [UnitaryMatrix<T>; 4],
}

impl<T: Scalar> LinkSet<T> {
    pub fn new(
        u1: UnitaryMatrix<T>,
        u2: UnitaryMatrix<T>,
        u3: UnitaryMatrix<T>,
        u4: UnitaryMatrix<T>,
    ) -> Result<Self> {
        let n = u1.dim();
        for u in [&u2, &u3, &u4] {
            if u.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: u.dim() });
            }
        }
        Ok(Self { links: [u1, u2, u3, u4] })
    }

    pub fn n_components(&self) -> usize {
        self.links[0].dim()
    }

    pub fn link(&self, id: LinkId) -> &UnitaryMatrix<T> {
        &self.links[id.index()]
    }

    pub fn u1(&self) -> &CMatrix<T> {
        self.links[0].matrix()
    }

    pub fn u2(&self) -> &CMatrix<T> {
        self.links[1].matrix()
    }

    pub fn u3(&self) -> &CMatrix<T> {
        self.links[2].matrix()
    }

    pub fn u4(&self) -> &CMatrix<T> {
        self.links[3].matrix()
    }

    /// Transformation picked up along `A_n -> B_n -> A_{n+1}`.
    pub fn u_up(&self) -> CMatrix<T> {
        self.u2() * self.u1()
    }

    /// Transformation picked up along `A_n -> C_n -> A_{n+1}`.
    pub fn u_down(&self) -> CMatrix<T> {
        self.u4() * self.u3()
    }

    /// Copy with one link replaced.
    pub fn with_link(&self, id: LinkId, u: UnitaryMatrix<T>) -> Result<Self> {
        if u.dim() != self.n_components() {
            return Err(Error::DimensionMismatch { expected: self.n_components(), got: u.dim() });
        }
        let mut links = self.links.clone();
        links[id.index()] = u;
        Ok(Self { links })
    }

    pub fn to_doc(&self) -> LinkSetDoc {
        let conv = |u: &UnitaryMatrix<T>| {
            let m = u.matrix();
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| ComplexEntry {
                            re: m[(i, j)].re.to_f64_lossy(),
                            im: m[(i, j)].im.to_f64_lossy(),
                        })
                        .collect()
                })
                .collect()
        };
        LinkSetDoc {
            n: self.n_components(),
            u1: conv(&self.links[0]),
            u2: conv(&self.links[1]),
            u3: conv(&self.links[2]),
            u4: conv(&self.links[3]),
        }
    }

    pub fn from_doc(doc: &LinkSetDoc) -> Result<Self> {
        Self::from_doc_with_tolerance(doc, T::exact_tol())
    }

    /// Documents written with few decimals need a looser unitarity check.
    pub fn from_doc_with_tolerance(doc: &LinkSetDoc, tol: T) -> Result<Self> {
        let conv = |rows: &Vec<Vec<ComplexEntry>>| -> Result<UnitaryMatrix<T>> {
            if rows.len() != doc.n {
                return Err(Error::DimensionMismatch { expected: doc.n, got: rows.len() });
            }
            for r in rows {
                if r.len() != doc.n {
                    return Err(Error::DimensionMismatch { expected: doc.n, got: r.len() });
                }
            }
            let m = CMatrix::from_fn(doc.n, doc.n, |i, j| {
                c(T::of(rows[i][j].re), T::of(rows[i][j].im))
            });
            UnitaryMatrix::with_tolerance(m, tol)
        };
        Self::new(conv(&doc.u1)?, conv(&doc.u2)?, conv(&doc.u3)?, conv(&doc.u4)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

/// JSON form of a [`LinkSet`]: `{ "n": 2, "u1": [[{"re":..,"im":..},..],..], .. }`,
/// rows in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSetDoc {
    pub n: usize,
    pub u1: Vec<Vec<ComplexEntry>>,
    pub u2: Vec<Vec<ComplexEntry>>,
    pub u3: Vec<Vec<ComplexEntry>>,
    pub u4: Vec<Vec<ComplexEntry>>,
}

/// Interference matrix `I = (U2 U1 + U4 U3) / 2` together with the two path
/// unitaries and the nilpotent power of `I`, if any.
#[derive(Debug, Clone)]
pub struct InterferenceReport<T: Scalar> {
    pub i_matrix: CMatrix<T>,
    pub u_up: CMatrix<T>,
    pub u_down: CMatrix<T>,
    pub nilpotent_power: Option<usize>,
}

pub fn interference_matrix<T: Scalar>(links: &LinkSet<T>) -> InterferenceReport<T> {
    let u_up = links.u_up();
    let u_down = links.u_down();
    let i_matrix = (&u_up + &u_down) * cr(T::of(0.5));
    let n = links.n_components();
    let nilpotent_power = nilpotent_power(&i_matrix, n).expect("interference matrix is square");
    InterferenceReport { i_matrix, u_up, u_down, nilpotent_power }
}

/// Smallest `m <= max_exponent` with `M^m = 0` entrywise (to the exact
/// tolerance), or `None`.
pub fn nilpotent_power<T: Scalar>(m: &CMatrix<T>, max_exponent: usize) -> Result<Option<usize>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if max_exponent == 0 {
        return Err(invalid("max_exponent", "must be at least 1"));
    }
    let tol = T::exact_tol();
    let mut power = m.clone();
    for k in 1..=max_exponent {
        if max_abs(&power) < tol {
            return Ok(Some(k));
        }
        if k < max_exponent {
            power = &power * m;
        }
    }
    Ok(None)
}

/// Basis projector `|row><col|` (1-based labels).
fn ket_bra<T: Scalar>(n: usize, row: usize, col: usize) -> CMatrix<T> {
    let mut m = CMatrix::zeros(n, n);
    m[(row - 1, col - 1)] = cr(T::one());
    m
}

/// `I = sum_{n=1}^{N-1} |n><n+1|`, nilpotent of power `N`. The path
/// unitaries are the cyclic shift and the shift with a sign-flipped wrap
/// term; `U1 = U3 = 1`.
pub fn shift_family<T: Scalar>(n_components: usize) -> Result<LinkSet<T>> {
    let n = n_components;
    if n < 2 {
        return Err(invalid("n_components", format!("need N >= 2, got {n}")));
    }
    let mut shift = CMatrix::<T>::zeros(n, n);
    for k in 1..n {
        shift += ket_bra::<T>(n, k, k + 1);
    }
    let wrap = ket_bra::<T>(n, n, 1);
    let u_up = UnitaryMatrix::new(&shift + &wrap)?;
    let u_down = UnitaryMatrix::new(&shift - &wrap)?;
    LinkSet::new(UnitaryMatrix::identity(n), u_up, UnitaryMatrix::identity(n), u_down)
}

/// Target interference matrix `sum_{n=1}^{m-1} |n><n+N-m+1|`.
pub fn stride_target<T: Scalar>(n_components: usize, power: usize) -> CMatrix<T> {
    let n = n_components;
    let mut target = CMatrix::zeros(n, n);
    for k in 1..power {
        target += ket_bra::<T>(n, k, k + n - power + 1);
    }
    target
}

/// Links whose interference matrix is exactly `sum_{n=1}^{m-1} |n><n+N-m+1|`.
///
/// The partial permutation `column n+N-m+1 -> row n` is completed to a full
/// permutation `P` by sending the leftover columns `1..=N-m+1` to rows
/// `m..=N` in ascending order. Then `U_up = P` and `U_down = P D`, with `D`
/// diagonal, `+1` on columns `N-m+2..=N` and `-1` elsewhere, average to the
/// target while both stay signed permutations.
///
/// The nilpotent power of this target is `2 + floor((m-2)/(N-m+1))`, which
/// equals `m` only for `m = 2`.
pub fn stride_family<T: Scalar>(n_components: usize, power: usize) -> Result<LinkSet<T>> {
    let n = n_components;
    let m = power;
    if !(1 < m && m < n) {
        return Err(invalid("power", format!("need 1 < m < N, got m = {m}, N = {n}")));
    }
    let shift = n - m + 1;
    let mut p = CMatrix::<T>::zeros(n, n);
    for row in 1..m {
        p[(row - 1, row + shift - 1)] = cr(T::one());
    }
    for (k, col) in (1..=shift).enumerate() {
        p[(m + k - 1, col - 1)] = cr(T::one());
    }
    let mut d = CMatrix::<T>::identity(n, n);
    for col in 1..=shift {
        d[(col - 1, col - 1)] = cr(-T::one());
    }
    let u_up = UnitaryMatrix::new(p.clone())?;
    let u_down = UnitaryMatrix::new(&p * &d)?;
    LinkSet::new(UnitaryMatrix::identity(n), u_up, UnitaryMatrix::identity(n), u_down)
}

/// Two-component family with `I = [[0, gamma e^{i theta}], [0, 0]]`:
/// `U_up = [[0, e^{i theta} z], [e^{i psi}, 0]]`,
/// `U_down = [[0, e^{i theta} conj(z)], [-e^{i psi}, 0]]` with
/// `z = gamma + i sqrt(1 - gamma^2)`, placed as `U2 = U_up`, `U3 = U_down`,
/// `U1 = U4 = 1`. `(1, 0, 0)` gives the standard U(2) model.
pub fn u2_family<T: Scalar>(gamma: T, theta: T, psi: T) -> Result<LinkSet<T>> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(invalid("gamma", format!("need 0 < gamma <= 1, got {gamma}")));
    }
    let s = (T::one() - gamma * gamma).max(T::zero()).sqrt();
    let z = c(gamma, s);
    let top = cis(theta);
    let bottom = cis(psi);
    let zero = C::new(T::zero(), T::zero());
    let u_up = CMatrix::from_row_slice(2, 2, &[zero, top * z, bottom, zero]);
    let u_down = CMatrix::from_row_slice(2, 2, &[zero, top * z.conj(), -bottom, zero]);
    LinkSet::new(
        UnitaryMatrix::identity(2),
        UnitaryMatrix::new(u_up)?,
        UnitaryMatrix::new(u_down)?,
        UnitaryMatrix::identity(2),
    )
}

/// The minimal U(2) caging model:
/// `U1 = U4 = 1`, `U2 = [[0,1],[1,0]]`, `U3 = [[0,1],[-1,0]]`.
pub fn u2_model<T: Scalar>() -> LinkSet<T> {
    u2_family(T::one(), T::zero(), T::zero()).expect("gamma = 1 is valid")
}

/// Single-component rhombic chain with flux `phi` per plaquette
/// (`U1 = U2 = U3 = 1`, `U4 = e^{i phi}`); `phi = pi` cages.
pub fn abelian_flux<T: Scalar>(phi: T) -> LinkSet<T> {
    let one = UnitaryMatrix::identity(1);
    LinkSet::new(one.clone(), one.clone(), one.clone(), one.with_phase(phi))
        .expect("1x1 links share dimension")
}
