//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{ComplexField, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, CVector, Scalar};

/// Largest entry modulus.
pub fn max_abs<T: Scalar>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// `max |U U^dagger - 1|` entrywise.
pub fn unitarity_deviation<T: Scalar>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let prod = m * m.adjoint();
    max_abs(&(prod - CMatrix::<T>::identity(n, n)))
}

pub fn hermiticity_deviation<T: Scalar>(m: &CMatrix<T>) -> T {
    max_abs(&(m - m.adjoint()))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending
/// order. Column `j` of the returned matrix is the eigenvector of value `j`.
pub fn eigh<T: Scalar>(h: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let n = h.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(h.clone(), T::default_epsilon(), 0)
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn eigvalsh<T: Scalar>(h: &CMatrix<T>) -> Result<Vec<T>> {
    if h.nrows() == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::try_new(h.clone(), T::default_epsilon(), 0)
        .ok_or(Error::EigenFailure)?;
    let mut values: Vec<T> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(values)
}

/// Orthonormal basis of the right null space of `m`: singular vectors whose
/// singular value is at most `tol`.
pub fn null_space<T: Scalar>(m: &CMatrix<T>, tol: T) -> Result<Vec<CVector<T>>> {
    let cols = m.ncols();
    if cols == 0 {
        return Ok(Vec::new());
    }
    // Pad to at least square so the thin SVD keeps every right singular vector.
    let padded;
    let work = if m.nrows() < cols {
        padded = {
            let mut p = CMatrix::<T>::zeros(cols, cols);
            p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let svd = work.clone().try_svd(false, true, T::default_epsilon(), 0).ok_or(Error::EigenFailure)?;
    let v_t = svd.v_t.ok_or(Error::EigenFailure)?;
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect())
}

/// Reduced row-echelon form of the span of `basis` (rows), giving a
/// canonical, typically sparse, basis of the same subspace.
pub fn canonical_basis<T: Scalar>(basis: &[CVector<T>], tol: T) -> Vec<CVector<T>> {
    if basis.is_empty() {
        return Vec::new();
    }
    let dim = basis[0].len();
    let mut rows: Vec<CVector<T>> = basis.to_vec();
    let mut lead = 0usize;
    let mut r = 0usize;
    while r < rows.len() && lead < dim {
        let pivot = (r..rows.len()).max_by(|&a, &b| {
            rows[a][lead]
                .modulus()
                .partial_cmp(&rows[b][lead].modulus())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let p = match pivot {
            Some(p) if rows[p][lead].modulus() > tol => p,
            _ => {
                lead += 1;
                continue;
            }
        };
        rows.swap(r, p);
        let inv = rows[r][lead].recip();
        rows[r] *= inv;
        for k in 0..rows.len() {
            if k != r {
                let f = rows[k][lead];
                if f.modulus() > T::zero() {
                    let pivot_row = rows[r].clone();
                    rows[k] -= pivot_row * f;
                }
            }
        }
        r += 1;
        lead += 1;
    }
    rows.truncate(r);
    for row in rows.iter_mut() {
        for z in row.iter_mut() {
            if z.modulus() <= tol {
                *z = nalgebra::Complex::new(T::zero(), T::zero());
            }
        }
    }
    rows
}

/// Scale `v` to unit norm and rotate its global phase so the
/// largest-modulus entry is real and positive.
pub fn normalize_phase<T: Scalar>(v: &CVector<T>) -> CVector<T> {
    let norm = v.norm();
    if norm == T::zero() {
        return v.clone();
    }
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.modulus() > v[best].modulus() * (T::one() + T::of(1e-9)) {
            best = i;
        }
    }
    let phase = v[best] / nalgebra::Complex::new(v[best].modulus(), T::zero());
    v.map(|z| z / phase / nalgebra::Complex::new(norm, T::zero()))
}

/// `|<a|b>|`.
pub fn overlap<T: Scalar>(a: &CVector<T>, b: &CVector<T>) -> T {
    a.dotc(b).modulus()
}

/// `|<a|b>| / (|a| |b|)`, zero when either vector vanishes.
pub fn normalized_overlap<T: Scalar>(a: &CVector<T>, b: &CVector<T>) -> T {
    let na = a.norm();
    let nb = b.norm();
    if na <= T::of(1e-12) || nb <= T::of(1e-12) {
        return T::zero();
    }
    overlap(a, b) / (na * nb)
}
