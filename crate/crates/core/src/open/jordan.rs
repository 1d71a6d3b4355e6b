//! Jordan chains of non-Hermitian generators.
//!
//! Right chains satisfy `L P^(j) = chi P^(j) + P^(j-1)` with `P^(-1) = 0`;
//! left chains satisfy `Q^(j)^H L = chi Q^(j)^H + Q^(j+1)^H` with
//! `Q^(n) = 0`, and `<<Q_a^(i)|P_b^(j)>> = delta_ab delta_ij`.
//!
//! Each eigenvalue cluster is handled inside its generalized eigenspace
//! `ker (L - chi)^m`. Chain tops are picked from the kernels of powers of
//! the restricted operator and pushed down by `L - chi`, so the right-chain
//! recursion holds to rounding except at the bottom vector. The left chains
//! are the rows of the inverse of the stacked right chains.

use num_complex::Complex64 as C64;

use crate::error::{AmtError, Result};
use crate::numerics::linalg::{
    cluster_eigenvalues, eigenvalues, orthonormal_columns, smallest_singular_vectors,
    spectral_norm, svd_of, CMatrix, CVector,
};

/// Certification bound on relative chain residuals and biorthonormality.
pub const CERTIFICATION_TOL: f64 = 1e-6;

/// Default cluster tolerance relative to `||L||`.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct JordanChain {
    pub eigenvalue: C64,
    /// `P^(0) .. P^(n-1)`; `P^(0)` is the eigenvector.
    pub right: Vec<CVector>,
    /// `Q^(0) .. Q^(n-1)`; `Q^(n-1)` is the left eigenvector.
    pub left: Vec<CVector>,
    /// `||L P^(j) - chi P^(j) - P^(j-1)|| / (||L|| ||P^(j)||)` per link.
    pub right_residuals: Vec<f64>,
    /// The left-chain analogue.
    pub left_residuals: Vec<f64>,
}

impl JordanChain {
    pub fn len(&self) -> usize {
        self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.right.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.right_residuals
            .iter()
            .chain(&self.left_residuals)
            .fold(0.0f64, |m, r| m.max(*r))
    }
}

#[derive(Debug, Clone)]
pub struct JordanDecomposition {
    /// Ordered by decreasing real part, then increasing imaginary part.
    pub chains: Vec<JordanChain>,
    /// `max |<<Q_a^(i)|P_b^(j)>> - delta|`.
    pub biorthonormality_error: f64,
    /// Spectral norm of the decomposed generator.
    pub scale: f64,
    /// True when every residual and the biorthonormality error are within
    /// [`CERTIFICATION_TOL`].
    pub certified: bool,
    /// Clusters of more than one eigenvalue, with their algebraic size.
    pub multiple_clusters: Vec<(C64, usize)>,
}

impl JordanDecomposition {
    pub fn dim(&self) -> usize {
        self.chains.iter().map(JordanChain::len).sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.chains
            .iter()
            .fold(0.0f64, |m, c| m.max(c.max_residual()))
    }

    pub fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            Err(AmtError::Uncertified(format!(
                "max residual {:e}, biorthonormality error {:e}",
                self.max_residual(),
                self.biorthonormality_error
            )))
        }
    }

    pub fn chain_lengths(&self) -> Vec<usize> {
        self.chains.iter().map(JordanChain::len).collect()
    }

    /// Index of the chain whose eigenvalue is closest to `target`.
    pub fn nearest(&self, target: C64) -> usize {
        let mut best = 0;
        for (k, ch) in self.chains.iter().enumerate() {
            if (ch.eigenvalue - target).norm() < (self.chains[best].eigenvalue - target).norm() {
                best = k;
            }
        }
        best
    }

    /// Scales the leading chain, when it is a single zero-eigenvalue vector,
    /// so its right vector has unit trace; its left vector is then the
    /// trace functional.
    pub fn normalize_steady_state(&mut self, hilbert_dim: usize) -> Result<()> {
        let ch = self
            .chains
            .first()
            .ok_or_else(|| AmtError::IndexOutOfRange("no chains".into()))?;
        if ch.len() != 1 || ch.eigenvalue.norm() > 1e-8 * self.scale.max(1.0) {
            return Err(AmtError::InvalidParameter(format!(
                "leading chain has eigenvalue {} and length {}",
                ch.eigenvalue,
                ch.len()
            )));
        }
        let trace: C64 = (0..hilbert_dim)
            .map(|k| ch.right[0][k * (hilbert_dim + 1)])
            .sum();
        if trace.norm() < 1e-14 {
            return Err(AmtError::InvalidParameter(
                "steady-state vector is traceless".into(),
            ));
        }
        self.rescale_chain(0, C64::new(1.0, 0.0) / trace);
        Ok(())
    }

    /// Scales chain `a` by `factor` on the right and `1 / conj(factor)` on
    /// the left, which keeps every relation intact.
    pub fn rescale_chain(&mut self, a: usize, factor: C64) {
        let ch = &mut self.chains[a];
        for p in ch.right.iter_mut() {
            *p *= factor;
        }
        let inv = C64::new(1.0, 0.0) / factor.conj();
        for q in ch.left.iter_mut() {
            *q *= inv;
        }
    }
}

fn matrix_power(a: &CMatrix, k: usize) -> CMatrix {
    let mut out = CMatrix::identity(a.nrows(), a.ncols());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

/// Dimension of the numerical kernel: singular values at or below `thresh`.
fn kernel(a: &CMatrix, thresh: f64) -> Result<CMatrix> {
    let n = a.ncols();
    let svd = svd_of(a, false, true)?;
    let v_t = svd.v_t.ok_or(AmtError::NoConvergence)?;
    let picks: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= thresh)
        .collect();
    let mut out = CMatrix::zeros(n, picks.len());
    for (col, &k) in picks.iter().enumerate() {
        out.set_column(col, &v_t.row(k).adjoint());
    }
    Ok(out)
}

fn hstack(blocks: &[&CMatrix], rows: usize) -> CMatrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Chain tops `(length, vector)` for a nilpotent-up-to-`thresh` operator
/// `n` on a small space.
fn chain_tops(n: &CMatrix, thresh: f64) -> Result<Vec<(usize, CVector)>> {
    let m = n.nrows();
    let norm = spectral_norm(n).max(thresh);
    // kernels of N^k until they fill the space
    let mut kernels = vec![CMatrix::zeros(m, 0)];
    let mut k = 0;
    while kernels[k].ncols() < m {
        k += 1;
        if k > m {
            return Err(AmtError::Uncertified(format!(
                "kernels of powers stall at dimension {} of {m}",
                kernels[k - 1].ncols()
            )));
        }
        let power = matrix_power(n, k);
        let ker = kernel(&power, thresh * norm.powi(k as i32 - 1) * (m as f64))?;
        if ker.ncols() < kernels[k - 1].ncols() {
            return Err(AmtError::Uncertified(
                "kernel of a higher power shrank".into(),
            ));
        }
        kernels.push(ker);
    }
    let depth = k;
    let dims: Vec<usize> = kernels.iter().map(|b| b.ncols()).collect();
    // chains of length >= k
    let at_least = |k: usize| if k > depth { 0 } else { dims[k] - dims[k - 1] };

    let mut tops: Vec<(usize, CVector)> = Vec::new();
    for level in (1..=depth).rev() {
        let wanted = at_least(level) - at_least(level + 1);
        if wanted == 0 {
            continue;
        }
        // vectors already accounted for at this level
        let mut existing: Vec<CVector> = Vec::new();
        for (len, v) in &tops {
            let mut w = v.clone();
            for _ in 0..(len - level) {
                w = n * w;
            }
            existing.push(w);
        }
        let prior = if existing.is_empty() {
            CMatrix::zeros(m, 0)
        } else {
            CMatrix::from_columns(&existing)
        };
        let span = orthonormal_columns(&hstack(&[&kernels[level - 1], &prior], m), 1e-8)?;
        let candidates = &kernels[level];
        let projected = candidates - &span * (span.adjoint() * candidates);
        let fresh = orthonormal_columns(&projected, 1e-6)?;
        if fresh.ncols() < wanted {
            return Err(AmtError::Uncertified(format!(
                "found {} of {wanted} chain tops of length {level}",
                fresh.ncols()
            )));
        }
        for col in 0..wanted {
            tops.push((level, fresh.column(col).into_owned()));
        }
    }
    Ok(tops)
}

/// Decomposes `l` into Jordan chains. Eigenvalues within
/// `cluster_tol * ||L||` of each other are treated as one cluster with the
/// cluster mean as its eigenvalue. An uncertified result is still returned;
/// check [`JordanDecomposition::certified`] before use.
pub fn jordan_decompose(l: &CMatrix, cluster_tol: f64) -> Result<JordanDecomposition> {
    if !l.is_square() {
        return Err(AmtError::NotSquare {
            rows: l.nrows(),
            cols: l.ncols(),
        });
    }
    let dim = l.nrows();
    let scale = spectral_norm(l);
    let values = eigenvalues(l)?;
    let mut clusters: Vec<(C64, usize)> =
        cluster_eigenvalues(&values, cluster_tol * scale.max(f64::MIN_POSITIVE))
            .into_iter()
            .map(|members| {
                let mean = members.iter().map(|&k| values[k]).sum::<C64>() / members.len() as f64;
                (mean, members.len())
            })
            .collect();
    clusters.sort_by(|a, b| b.0.re.total_cmp(&a.0.re).then(a.0.im.total_cmp(&b.0.im)));

    let mut raw: Vec<(C64, Vec<CVector>)> = Vec::new();
    let thresh = (cluster_tol * scale).max(1e-14 * scale.max(1.0));
    for &(chi, m) in &clusters {
        let shifted = l - CMatrix::identity(dim, dim) * chi;
        let basis = smallest_singular_vectors(&matrix_power(&shifted, m), m)?;
        let restricted = basis.adjoint() * &shifted * &basis;
        for (len, top) in chain_tops(&restricted, thresh)? {
            let mut chain = vec![CVector::zeros(dim); len];
            chain[len - 1] = &basis * top;
            for j in (0..len - 1).rev() {
                chain[j] = &shifted * &chain[j + 1];
            }
            let norm = chain[0].norm();
            if norm > 0.0 {
                for v in chain.iter_mut() {
                    *v /= C64::new(norm, 0.0);
                }
            }
            raw.push((chi, chain));
        }
    }
    // longer chains first within a cluster keeps the order deterministic
    let total: usize = raw.iter().map(|(_, c)| c.len()).sum();
    if total != dim {
        return Err(AmtError::Uncertified(format!(
            "chains span {total} of {dim} dimensions"
        )));
    }
    let columns: Vec<CVector> = raw.iter().flat_map(|(_, c)| c.iter().cloned()).collect();
    let p = CMatrix::from_columns(&columns);
    let inverse = p
        .clone()
        .try_inverse()
        .ok_or_else(|| AmtError::Uncertified("stacked right chains are singular".into()))?;
    let mut at = 0;
    let mut chains = Vec::with_capacity(raw.len());
    let denom = scale.max(f64::MIN_POSITIVE);
    for (chi, right) in raw {
        let n = right.len();
        let left: Vec<CVector> = (0..n).map(|j| inverse.row(at + j).adjoint()).collect();
        at += n;
        let right_residuals = (0..n)
            .map(|j| {
                let mut r = l * &right[j] - &right[j] * chi;
                if j > 0 {
                    r -= &right[j - 1];
                }
                r.norm() / (denom * right[j].norm())
            })
            .collect();
        let left_residuals = (0..n)
            .map(|j| {
                let mut r = l.adjoint() * &left[j] - &left[j] * chi.conj();
                if j + 1 < n {
                    r -= &left[j + 1];
                }
                r.norm() / (denom * left[j].norm())
            })
            .collect();
        chains.push(JordanChain {
            eigenvalue: chi,
            right,
            left,
            right_residuals,
            left_residuals,
        });
    }
    let gram = inverse * &p;
    let biorthonormality_error = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| {
            (gram[(i, j)]
                - if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                })
            .norm()
        })
        .fold(0.0f64, f64::max);
    let mut dec = JordanDecomposition {
        chains,
        biorthonormality_error,
        scale,
        certified: false,
        multiple_clusters: clusters.into_iter().filter(|&(_, m)| m > 1).collect(),
    };
    dec.certified =
        dec.max_residual() <= CERTIFICATION_TOL && biorthonormality_error <= CERTIFICATION_TOL;
    Ok(dec)
}

/// `<<Q_b^(j)|rho>>` for every chain vector, chain by chain.
pub fn block_coefficients(dec: &JordanDecomposition, rho: &CVector) -> Vec<Vec<C64>> {
    dec.chains
        .iter()
        .map(|ch| ch.left.iter().map(|q| q.dotc(rho)).collect())
        .collect()
}

/// `sum r_b^(j) P_b^(j)`.
pub fn reconstruct(dec: &JordanDecomposition, coefficients: &[Vec<C64>]) -> CVector {
    let dim = dec.dim();
    let mut out = CVector::zeros(dim);
    for (ch, r) in dec.chains.iter().zip(coefficients) {
        for (p, x) in ch.right.iter().zip(r) {
            out += p * *x;
        }
    }
    out
}

/// Exact fixed-generator evolution of block coefficients:
/// `dr^(i)/dt = chi r^(i) + r^(i+1)`, with `r^(n) = 0`.
pub fn evolve_block_coefficients(
    dec: &JordanDecomposition,
    r0: &[Vec<C64>],
    t: f64,
) -> Vec<Vec<C64>> {
    dec.chains
        .iter()
        .zip(r0)
        .map(|(ch, r)| {
            let growth = (ch.eigenvalue * t).exp();
            (0..r.len())
                .map(|i| {
                    let mut acc = C64::new(0.0, 0.0);
                    let mut weight = 1.0;
                    for k in 0..(r.len() - i) {
                        if k > 0 {
                            weight *= t / k as f64;
                        }
                        acc += r[i + k] * weight;
                    }
                    growth * acc
                })
                .collect()
        })
        .collect()
}

/// `<<Q_a^(i)|dL|P_b^(j)>>`.
fn coupling(
    dec: &JordanDecomposition,
    dl: &CMatrix,
    a: usize,
    i: usize,
    b: usize,
    j: usize,
) -> C64 {
    dec.chains[a].left[i].dotc(&(dl * &dec.chains[b].right[j]))
}

fn check_pair(dec: &JordanDecomposition, a: (usize, usize), b: (usize, usize)) -> Result<C64> {
    let n = dec.chains.len();
    if a.0 >= n || b.0 >= n || a.1 >= dec.chains[a.0].len() || b.1 >= dec.chains[b.0].len() {
        return Err(AmtError::IndexOutOfRange(format!(
            "chain entries {a:?}, {b:?}"
        )));
    }
    if a.0 == b.0 {
        return Err(AmtError::InvalidParameter(
            "projected change needs two distinct chains".into(),
        ));
    }
    let gap = dec.chains[b.0].eigenvalue - dec.chains[a.0].eigenvalue;
    if gap.norm() < 1e-12 {
        return Err(AmtError::SingularGap(gap.norm()));
    }
    Ok(gap)
}

/// `<<Q_a^(i)| d/dlambda |P_b^(j)>>` from the nested sum over
/// `p = 1 .. n_a - i` and compositions `k_1 + .. + k_p = S_p <= j`:
/// `<<Q_a^(i+p-1)|dL|P_b^(j-S_p)>> / ((-1)^S_p chi_ba^(p + S_p))`.
pub fn projected_mode_change(
    dec: &JordanDecomposition,
    dl: &CMatrix,
    a: (usize, usize),
    b: (usize, usize),
) -> Result<C64> {
    let gap = check_pair(dec, a, b)?;
    let n_a = dec.chains[a.0].len();
    let (i, j) = (a.1, b.1);
    let mut total = C64::new(0.0, 0.0);
    for p in 1..=(n_a - i) {
        // enumerate k_1..k_p with every partial sum <= j
        let mut ks = vec![0usize; p];
        loop {
            let s: usize = ks.iter().sum();
            let sign = if s.is_multiple_of(2) { 1.0 } else { -1.0 };
            total +=
                coupling(dec, dl, a.0, i + p - 1, b.0, j - s) * sign / gap.powi((p + s) as i32);
            // odometer over the last index first
            let mut pos = p;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                let before: usize = ks[..pos].iter().sum();
                if ks[pos] < j - before {
                    ks[pos] += 1;
                    for r in ks.iter_mut().skip(pos + 1) {
                        *r = 0;
                    }
                    break;
                }
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX || (pos == 0 && ks.iter().all(|&k| k == 0)) {
                break;
            }
        }
    }
    Ok(total)
}

/// The same quantity by the defining recursion
/// `X(i, j) = (<<Q^(i)|dL|P^(j)>> + X(i+1, j) - X(i, j-1)) / chi_ba`,
/// with `X(n_a, .) = X(., -1) = 0`.
pub fn projected_mode_change_recursive(
    dec: &JordanDecomposition,
    dl: &CMatrix,
    a: (usize, usize),
    b: (usize, usize),
) -> Result<C64> {
    let gap = check_pair(dec, a, b)?;
    let n_a = dec.chains[a.0].len();
    let n_b = dec.chains[b.0].len();
    // table over i descending and j ascending
    let mut x = vec![vec![C64::new(0.0, 0.0); n_b]; n_a + 1];
    for ii in (0..n_a).rev() {
        for jj in 0..n_b {
            let below = if jj == 0 {
                C64::new(0.0, 0.0)
            } else {
                x[ii][jj - 1]
            };
            x[ii][jj] = (coupling(dec, dl, a.0, ii, b.0, jj) + x[ii + 1][jj] - below) / gap;
        }
    }
    Ok(x[a.1][b.1])
}
