use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pivots below this magnitude mark the system as numerically singular.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// Dense LU solve with partial pivoting.
pub(crate) fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.lu();
    let pivot = lu
        .u()
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(pivot >= PIVOT_FLOOR) {
        return Err(Error::Singular { pivot });
    }
    lu.solve(b).ok_or(Error::Singular { pivot })
}

/// `I - gamma * t`.
pub(crate) fn resolvent_system(t: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    let n = t.nrows();
    DMatrix::identity(n, n) - t * gamma
}
