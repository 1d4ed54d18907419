//! JSON codec for complex matrices: row-major rows of `[re, im]` pairs.

use crate::error::{Error, Result};
use crate::linalg::{cplx, to_f64, CMat};
use crate::Real;

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows<T: Real>(m: &CMat<T>) -> MatrixRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [to_f64(m[(i, j)].re), to_f64(m[(i, j)].im)])
                .collect()
        })
        .collect()
}

pub fn rows_to_matrix<T: Real>(rows: &MatrixRows) -> Result<CMat<T>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Config("matrix rows have unequal lengths".into()));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Config("matrix entries must be finite".into()));
    }
    Ok(CMat::from_fn(r, c, |i, j| cplx(rows[i][j][0], rows[i][j][1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = CMat::<f64>::from_fn(2, 3, |i, j| cplx(0.1 * i as f64 + 1.0 / 3.0, -(j as f64) / 7.0));
        let json = serde_json::to_string(&matrix_to_rows(&m)).unwrap();
        let back: MatrixRows = serde_json::from_str(&json).unwrap();
        assert_eq!(rows_to_matrix::<f64>(&back).unwrap(), m);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![[1.0, 0.0]], vec![]];
        assert!(matches!(rows_to_matrix::<f64>(&rows), Err(Error::Config(_))));
    }
}
