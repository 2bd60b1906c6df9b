//! Small dense complex linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Kronecker product with the left factor as the slow index, matching the
/// row-major subsystem ordering used by the layouts.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn check_hermitian(m: &CMatrix, tolerance: f64) -> Result<()> {
    let deviation = hermiticity_deviation(m);
    if deviation > tolerance {
        return Err(Error::NonHermitian {
            deviation,
            tolerance,
        });
    }
    Ok(())
}

pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs_diff(&(m.adjoint() * m), &identity(n))
}

pub fn check_unitary(m: &CMatrix, tolerance: f64) -> Result<()> {
    let deviation = unitarity_deviation(m);
    if deviation > tolerance {
        return Err(Error::NonUnitary { deviation });
    }
    Ok(())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Embed local operators into the ordered product space described by `dims`,
/// acting as identity on every unmentioned factor. `ops` pairs a factor index
/// with its local matrix; indices must be distinct.
pub fn embed(dims: &[usize], ops: &[(usize, &CMatrix)]) -> Result<CMatrix> {
    let mut seen = vec![false; dims.len()];
    for &(index, op) in ops {
        if index >= dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index,
                count: dims.len(),
            });
        }
        if seen[index] {
            return Err(Error::SiteCollision { index });
        }
        seen[index] = true;
        if op.nrows() != dims[index] || op.ncols() != dims[index] {
            return Err(Error::DimensionMismatch {
                expected: dims[index],
                got: op.nrows(),
            });
        }
    }
    let mut full = CMatrix::identity(1, 1);
    for (index, &dim) in dims.iter().enumerate() {
        match ops.iter().find(|(i, _)| *i == index) {
            Some((_, op)) => full = kron(&full, op),
            None => full = kron(&full, &identity(dim)),
        }
    }
    Ok(full)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn sz() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    #[test]
    fn embed_identity_on_unmentioned_factors() {
        let full = embed(&[2, 2], &[(1, &sx())]).unwrap();
        let expected = kron(&identity(2), &sx());
        assert_eq!(full, expected);
    }

    #[test]
    fn embed_rejects_site_collision() {
        let m = sx();
        let err = embed(&[2, 2], &[(0, &m), (0, &m)]).unwrap_err();
        assert!(matches!(err, Error::SiteCollision { index: 0 }));
    }

    #[test]
    fn embed_rejects_dim_mismatch() {
        let err = embed(&[3, 2], &[(0, &sx())]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn embedding_composes_over_disjoint_sites() {
        let a = embed(&[2, 2, 2], &[(0, &sz())]).unwrap();
        let b = embed(&[2, 2, 2], &[(2, &sx())]).unwrap();
        let joint = embed(&[2, 2, 2], &[(0, &sz()), (2, &sx())]).unwrap();
        assert!(max_abs_diff(&(a * b), &joint) < 1e-15);
    }

    #[test]
    fn hermiticity_and_unitarity_checks() {
        assert!(check_hermitian(&sx(), 1e-12).is_ok());
        assert!(check_unitary(&sx(), 1e-12).is_ok());
        let mut bad = sx();
        bad[(0, 1)] += C64::new(0.0, 1e-3);
        assert!(check_hermitian(&bad, 1e-10).is_err());
    }
}
