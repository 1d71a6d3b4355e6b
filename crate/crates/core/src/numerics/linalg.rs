//! Dense complex linear algebra with residual contracts.
//!
//! Most routines are thin layers over `nalgebra` decompositions plus the
//! bookkeeping the dynamics code relies on: ascending eigenvalue order,
//! biorthonormal left/right eigenvectors, and explicit defect detection.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64 as C64;

use crate::error::{AmtError, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry magnitude.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    // Frobenius norm bounds the spectral norm if the SVD fails
    svd_of(a, false, false)
        .map(|svd| svd.singular_values.iter().fold(0.0, |m: f64, s| m.max(*s)))
        .unwrap_or_else(|_| a.norm())
}

pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn is_hermitian(a: &CMatrix, rel_tol: f64) -> bool {
    a.is_square() && hermiticity_deviation(a) <= rel_tol * max_abs(a).max(f64::MIN_POSITIVE)
}

fn require_square(a: &CMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(AmtError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        })
    }
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues in ascending
/// order and orthonormal eigenvectors as columns.
pub fn hermitian_eigensystem(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    require_square(a)?;
    let scale = max_abs(a);
    let deviation = hermiticity_deviation(a);
    if deviation > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(AmtError::NotHermitian { deviation, scale });
    }
    let n = a.nrows();
    // symmetrize so rounding in the input cannot leak into the solver
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}

/// Complex Schur form `A = Q T Q^H` as `(Q, T)`. The QR sweep can stall
/// at machine-epsilon tolerance, so the tolerance is relaxed in steps with
/// a bounded iteration count at each.
pub fn schur_form(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    require_square(a)?;
    let cap = 200 * a.nrows().max(1);
    for eps in [f64::EPSILON, 4.0 * f64::EPSILON, 1e-14, 1e-12] {
        if let Some(schur) = Schur::try_new(a.clone(), eps, cap) {
            let (q, t) = schur.unpack();
            // accept only factors that reconstruct the input
            if (&q * &t * q.adjoint() - a).norm() <= 1e-10 * a.norm().max(f64::MIN_POSITIVE) {
                return Ok((q, t));
            }
        }
    }
    Err(AmtError::NoConvergence)
}

/// Thin singular value decomposition `A = U diag(s) V^H`, values descending.
/// `u` is `m x n` (columns for zero singular values are zero), `v_t` is
/// `n x n`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Option<CMatrix>,
    pub singular_values: Vec<f64>,
    pub v_t: Option<CMatrix>,
}

/// One-sided (Hestenes) Jacobi SVD. `nalgebra`'s complex bidiagonal SVD
/// returns factors that do not reconstruct some rank-deficient inputs, and
/// the kernels and column spaces used here must be exact to rounding.
pub fn svd_of(a: &CMatrix, compute_u: bool, compute_v: bool) -> Result<Svd> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = CMatrix::identity(n, n);
    let mut converged = n < 2;
    // columns below this are numerically zero and are left alone
    let floor = (f64::EPSILON * a.norm()).powi(2);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if alpha <= floor
                    || beta <= floor
                    || g <= (m.max(1) as f64) * f64::EPSILON * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut w, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = x * cs - y * e.conj() * sn;
                        mat[(r, q)] = x * e * sn + y * cs;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AmtError::NoConvergence);
    }
    let norms: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let u = compute_u.then(|| {
        let mut u = CMatrix::zeros(m, n);
        for (col, &k) in order.iter().enumerate() {
            if norms[k] > 0.0 {
                u.set_column(col, &(w.column(k) / C64::new(norms[k], 0.0)));
            }
        }
        u
    });
    let v_t = compute_v.then(|| {
        let mut vs = CMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            vs.set_column(col, &v.column(k));
        }
        vs.adjoint()
    });
    Ok(Svd {
        u,
        singular_values,
        v_t,
    })
}

/// Eigenvalues of a square matrix from its complex Schur form, in Schur order.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let (_, t) = schur_form(a)?;
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// Output of [`general_eigensystem`]. Column `k` of `right` and `left`
/// belongs to `values[k]`; `left[:,k]^H right[:,l] = delta_kl`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<C64>,
    pub right: CMatrix,
    pub left: CMatrix,
}

/// Groups eigenvalues whose mutual distance is within `tol` (single linkage).
pub fn cluster_eigenvalues(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of_group: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of_group.iter().position(|&g| g == r) {
            Some(g) => groups[g].push(i),
            None => {
                root_of_group.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Eigenvectors of an upper-triangular matrix by back substitution.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let smin = (f64::EPSILON * max_abs(t)).max(f64::MIN_POSITIVE);
    let mut v = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        v[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = t[(i, k)];
            for j in i + 1..k {
                acc += t[(i, j)] * v[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            v[(i, k)] = -acc / d;
        }
        let norm = v.column(k).norm();
        v.column_mut(k).unscale_mut(norm);
    }
    v
}

/// Numerical rank with singular values compared against `rel_tol * sigma_max`.
pub fn numerical_rank(a: &CMatrix, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let Ok(svd) = svd_of(a, false, false) else {
        return a.nrows().min(a.ncols());
    };
    let sv = svd.singular_values;
    let smax = sv.iter().fold(0.0f64, |m, s| m.max(*s));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax).count()
}

/// Right and left eigenvectors of a general square matrix.
///
/// Eigenvalues within `1e-8 * ||A||` of each other are checked for a full
/// set of eigenvectors; a rank deficit is reported as [`AmtError::Defective`]
/// so the caller can fall back to the Jordan machinery.
pub fn general_eigensystem(a: &CMatrix) -> Result<Eigensystem> {
    require_square(a)?;
    let n = a.nrows();
    let scale = spectral_norm(a).max(f64::MIN_POSITIVE);
    let (q, t) = schur_form(a)?;
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let right = &q * triangular_eigenvectors(&t);

    for cluster in cluster_eigenvalues(&values, 1e-8 * scale) {
        if cluster.len() < 2 {
            continue;
        }
        let mut cols = CMatrix::zeros(n, cluster.len());
        for (c_idx, &k) in cluster.iter().enumerate() {
            cols.set_column(c_idx, &right.column(k));
        }
        let rank = numerical_rank(&cols, 1e-6);
        if rank < cluster.len() {
            let mean = cluster.iter().map(|&k| values[k]).sum::<C64>() / cluster.len() as f64;
            return Err(AmtError::Defective {
                eigenvalue: mean,
                algebraic: cluster.len(),
                geometric: rank,
            });
        }
    }

    let inverse = right.clone().try_inverse().ok_or(AmtError::Defective {
        eigenvalue: values.first().copied().unwrap_or_default(),
        algebraic: n,
        geometric: numerical_rank(&right, 1e-12),
    })?;
    let left = inverse.adjoint();
    Ok(Eigensystem {
        values,
        right,
        left,
    })
}

/// Orthonormal basis (as columns) of `{v : ||A v|| <= tol * ||A||}`.
pub fn null_space(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    require_square(a)?;
    let n = a.nrows();
    let svd = svd_of(a, false, true)?;
    let v_t = svd.v_t.ok_or(AmtError::NoConvergence)?;
    let smax = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let picks: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= tol * smax)
        .collect();
    let mut basis = CMatrix::zeros(n, picks.len());
    for (col, &k) in picks.iter().enumerate() {
        basis.set_column(col, &v_t.row(k).adjoint());
    }
    Ok(basis)
}

/// The `count` right-singular vectors with the smallest singular values.
pub fn smallest_singular_vectors(a: &CMatrix, count: usize) -> Result<CMatrix> {
    let n = a.ncols();
    let svd = svd_of(a, false, true)?;
    let v_t = svd.v_t.ok_or(AmtError::NoConvergence)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let mut basis = CMatrix::zeros(n, count);
    for (col, &k) in order.iter().take(count).enumerate() {
        basis.set_column(col, &v_t.row(k).adjoint());
    }
    Ok(basis)
}

/// Orthonormal basis for the column space of `a` (rank by `rel_tol`).
pub fn orthonormal_columns(a: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    if a.ncols() == 0 {
        return Ok(CMatrix::zeros(a.nrows(), 0));
    }
    let svd = svd_of(a, true, false)?;
    let u = svd.u.ok_or(AmtError::NoConvergence)?;
    let smax = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let picks: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| smax > 0.0 && svd.singular_values[k] > rel_tol * smax)
        .collect();
    let mut out = CMatrix::zeros(a.nrows(), picks.len());
    for (col, &k) in picks.iter().enumerate() {
        out.set_column(col, &u.column(k));
    }
    Ok(out)
}

/// Rotates the global phase so the largest-magnitude component is real and
/// positive. Ties go to the lowest index.
pub fn fix_gauge(v: &mut CVector) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (k, z) in v.iter().enumerate() {
        // small slack so near-ties do not flip between neighbouring samples
        if z.norm() > best_mag * (1.0 + 1e-12) {
            best = k;
            best_mag = z.norm();
        }
    }
    if best_mag > 0.0 {
        let phase = v[best] / best_mag;
        for z in v.iter_mut() {
            *z /= phase;
        }
    }
}

/// `|<a|b>|^2` for normalized vectors.
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm_sqr()
}

/// Identity matrix of dimension `n`.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: [[f64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| c(a[i][j], 0.0))
    }

    #[test]
    fn diagonal_hermitian() {
        let (vals, vecs) = hermitian_eigensystem(&m2([[1.0, 0.0], [0.0, -1.0]])).unwrap();
        assert_eq!(vals, vec![-1.0, 1.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((vecs[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x() {
        let (vals, vecs) = hermitian_eigensystem(&m2([[0.0, 1.0], [1.0, 0.0]])).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // (1, -1)/sqrt2 up to phase
        let v0 = vecs.column(0);
        assert!((v0[0].norm() - s).abs() < 1e-12);
        assert!(((v0[1] / v0[0]) - c(-1.0, 0.0)).norm() < 1e-12);
        let v1 = vecs.column(1);
        assert!(((v1[1] / v1[0]) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected_with_deviation() {
        let err = hermitian_eigensystem(&m2([[0.0, 1.0], [0.0, 0.0]])).unwrap_err();
        match err {
            AmtError::NotHermitian { deviation, .. } => assert!((deviation - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn general_diag() {
        let es = general_eigensystem(&m2([[2.0, 0.0], [0.0, 3.0]])).unwrap();
        let mut vals: Vec<f64> = es.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![2.0, 3.0]);
        let bio = es.left.adjoint() * &es.right;
        assert!((bio - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn nilpotent_block_is_defective() {
        match general_eigensystem(&m2([[0.0, 1.0], [0.0, 0.0]])) {
            Err(AmtError::Defective {
                eigenvalue,
                algebraic,
                geometric,
            }) => {
                assert!(eigenvalue.norm() < 1e-12);
                assert_eq!((algebraic, geometric), (2, 1));
            }
            other => panic!("expected defect, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_but_diagonalizable() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(-1.0, 0.0),
            c(-1.0, 0.0),
            c(0.0, 0.0),
        ]));
        let es = general_eigensystem(&a).unwrap();
        for k in 0..3 {
            let r = &a * es.right.column(k) - es.right.column(k) * es.values[k];
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn null_space_examples() {
        let z = CMatrix::zeros(3, 3);
        assert_eq!(null_space(&z, 1e-10).unwrap().ncols(), 3);
        let d = m2([[0.0, 0.0], [0.0, 1.0]]);
        let ns = null_space(&d, 1e-10).unwrap();
        assert_eq!(ns.ncols(), 1);
        assert!((ns[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let full = identity(2);
        assert_eq!(null_space(&full, 1e-10).unwrap().ncols(), 0);
    }

    #[test]
    fn gauge_fix_makes_largest_real_positive() {
        let mut v = CVector::from_vec(vec![c(0.1, 0.2), c(0.0, -0.9)]);
        fix_gauge(&mut v);
        assert!(v[1].im.abs() < 1e-15 && v[1].re > 0.0);
    }

    fn reconstruct(svd: &Svd) -> CMatrix {
        let u = svd.u.as_ref().unwrap();
        let s = CMatrix::from_diagonal(&CVector::from_iterator(
            svd.singular_values.len(),
            svd.singular_values.iter().map(|x| c(*x, 0.0)),
        ));
        u * s * svd.v_t.as_ref().unwrap()
    }

    #[test]
    fn svd_of_rank_deficient_tall_matrix() {
        // two parallel columns plus rounding noise
        let a = CMatrix::from_row_slice(
            4,
            2,
            &[
                c(0.3, 0.1),
                c(0.6, 0.2),
                c(-0.2, 0.5),
                c(-0.4, 1.0),
                c(0.7, 0.0),
                c(1.4, 1e-16),
                c(0.0, -0.1),
                c(0.0, -0.2),
            ],
        );
        let svd = svd_of(&a, true, true).unwrap();
        assert!((reconstruct(&svd) - &a).norm() < 1e-14);
        assert!(svd.singular_values[1] < 1e-15);
        assert_eq!(orthonormal_columns(&a, 1e-6).unwrap().ncols(), 1);
    }

    proptest::proptest! {
        #[test]
        fn svd_reconstructs_with_unitary_factors(
            rows in 1usize..6,
            cols in 1usize..6,
            entries in proptest::collection::vec(-1.0f64..1.0, 72),
        ) {
            let a = CMatrix::from_fn(rows, cols, |i, j| c(entries[2 * (i * 6 + j)], entries[2 * (i * 6 + j) + 1]));
            let svd = svd_of(&a, true, true).unwrap();
            proptest::prop_assert!((reconstruct(&svd) - &a).norm() <= 1e-13 * a.norm().max(1.0));
            let v = svd.v_t.as_ref().unwrap();
            proptest::prop_assert!((v * v.adjoint() - CMatrix::identity(cols, cols)).norm() < 1e-13);
            proptest::prop_assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
