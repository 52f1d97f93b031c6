//! Dense Hermitian helpers shared by the evolvers and the reference oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QasError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

/// Largest absolute entry of `a - a^dagger`, relative to the largest entry of `a`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut scale = 0.0f64;
    let mut defect = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(a[(i, j)].norm());
            defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        defect / scale
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Diagonal and purely real inputs take cheaper paths; the result is sorted
/// ascending with ties kept in index order.
pub fn hermitian_eigen(a: &CMatrix, tol: f64) -> Result<HermitianEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(QasError::Dimension {
            expected: n,
            found: a.ncols(),
        });
    }
    let defect = hermiticity_defect(a);
    if defect > tol {
        return Err(QasError::Data(format!(
            "matrix is not Hermitian (relative defect {defect:.3e})"
        )));
    }

    let off_diag_zero = (0..n).all(|j| (0..n).all(|i| i == j || a[(i, j)] == Complex64::default()));
    let (values, vectors) = if off_diag_zero {
        let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        (vals, CMatrix::identity(n, n))
    } else if a.iter().all(|z| z.im == 0.0) {
        let re = DMatrix::<f64>::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re));
        let eig = re.symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let sym = CMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
        let eig = sym.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let sorted_vals = order.iter().map(|&i| values[i]).collect();
    let sorted_vecs = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(HermitianEigen {
        values: sorted_vals,
        vectors: sorted_vecs,
    })
}

/// Eigenvectors of `e` kept by a relative cutoff, and their eigenvalues.
///
/// Keeps eigenvalues `>= cutoff * lambda_max`; everything else is treated as
/// null space.
pub(crate) fn retained_spectrum(eig: &HermitianEigen, cutoff: f64) -> Result<(Vec<usize>, f64)> {
    let lmax = eig.values.iter().copied().fold(0.0f64, f64::max);
    if lmax <= 0.0 || !lmax.is_finite() {
        return Err(QasError::Singular("Gram matrix is numerically zero".into()));
    }
    let thresh = cutoff * lmax;
    let keep = (0..eig.values.len())
        .filter(|&k| eig.values[k] >= thresh && eig.values[k] > 0.0)
        .collect();
    Ok((keep, lmax))
}

/// Moore-Penrose style inverse of a Hermitian PSD matrix with a relative
/// eigenvalue cutoff.
pub fn pseudo_inverse(e: &CMatrix, cutoff: f64, herm_tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eigen(e, herm_tol)?;
    let (keep, _) = retained_spectrum(&eig, cutoff)?;
    let n = e.nrows();
    let mut out = CMatrix::zeros(n, n);
    for &k in &keep {
        let v = eig.vectors.column(k);
        let inv = 1.0 / eig.values[k];
        for j in 0..n {
            let vj = v[j].conj() * inv;
            for i in 0..n {
                out[(i, j)] += v[i] * vj;
            }
        }
    }
    Ok(out)
}

/// `a^dagger * b` for vectors.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

/// `a^dagger M b`.
pub fn quadratic_form(a: &CVector, m: &CMatrix, b: &CVector) -> Complex64 {
    a.dotc(&(m * b))
}
