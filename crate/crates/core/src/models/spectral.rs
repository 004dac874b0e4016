//! Truncated symmetric eigendecomposition by block Krylov iteration with
//! Rayleigh-Ritz extraction, used for spectral embeddings.
//!
//! The Krylov basis is kept fully orthonormal (two passes of block
//! Gram-Schmidt), so repeated eigenvalues up to the block size are resolved.
//! Ritz pairs are ordered by algebraic value, largest first.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{s, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GlrError, Result};
use crate::graph::CsrMatrix;

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    /// Extra block columns beyond the requested dimension.
    pub oversample: usize,
    /// Maximum number of Krylov blocks before giving up.
    pub max_blocks: usize,
    /// Convergence once every residual `||A v - theta v||` is below
    /// `tol * max(|theta_1|, 1e-300)`.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            oversample: 8,
            max_blocks: 40,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// `n x dim`, orthonormal columns.
    pub vectors: Array2<f64>,
}

/// Orthonormalizes the columns of `block` against `basis` and against each
/// other, dropping columns that become numerically dependent.
fn orthonormalize_block(basis: Option<ArrayView2<f64>>, mut block: Array2<f64>) -> Array2<f64> {
    let original: Vec<f64> = block
        .axis_iter(Axis(1))
        .map(|c| c.dot(&c).sqrt())
        .collect();
    if let Some(v) = basis {
        for _ in 0..2 {
            let coeffs = v.t().dot(&block);
            block -= &v.dot(&coeffs);
        }
    }
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..block.ncols() {
        for _ in 0..2 {
            for &k in &kept {
                let proj = block.column(k).dot(&block.column(j));
                let qk = block.column(k).to_owned();
                block.column_mut(j).scaled_add(-proj, &qk);
            }
        }
        let norm = block.column(j).dot(&block.column(j)).sqrt();
        if norm > 1e-10 * original[j].max(f64::MIN_POSITIVE) && norm > 1e-300 {
            block.column_mut(j).mapv_inplace(|x| x / norm);
            kept.push(j);
        }
    }
    block.select(Axis(1), &kept)
}

/// Largest-algebraic eigenpairs of the symmetric operator `apply` on `R^n`.
pub fn top_eigenpairs<F>(
    n: usize,
    apply: F,
    dim: usize,
    seed: u64,
    opts: &KrylovOptions,
) -> Result<Eigenpairs>
where
    F: Fn(ArrayView2<f64>) -> Array2<f64>,
{
    if dim == 0 || dim >= n {
        return Err(GlrError::InvalidArgument(format!(
            "embedding dimension must be in 1..{n}, got {dim}"
        )));
    }
    let block_size = (dim + opts.oversample).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Array2::from_shape_fn((n, block_size), |_| rng.gen_range(-1.0..1.0));

    let mut basis = orthonormalize_block(None, start);
    let mut image = apply(basis.view());
    let mut last_start = 0;

    for _ in 0..opts.max_blocks {
        // Rayleigh-Ritz on the current subspace.
        let s_dim = basis.ncols();
        let projected = basis.t().dot(&image);
        let sym = DMatrix::from_fn(s_dim, s_dim, |i, j| {
            0.5 * (projected[[i, j]] + projected[[j, i]])
        });
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..s_dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let take = dim.min(s_dim);
        let coeffs = Array2::from_shape_fn((s_dim, take), |(i, j)| eig.eigenvectors[(i, order[j])]);
        let values: Vec<f64> = order[..take].iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = basis.dot(&coeffs);

        let exhausted = s_dim >= n;
        if take == dim {
            let av = image.dot(&coeffs);
            let scale = values
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(1e-300);
            let worst = (0..dim)
                .map(|j| {
                    let r = &av.column(j) - &(&vectors.column(j) * values[j]);
                    r.dot(&r).sqrt()
                })
                .fold(0.0f64, f64::max);
            if exhausted || worst <= opts.tol * scale {
                return Ok(Eigenpairs { values, vectors });
            }
        }
        if exhausted {
            break;
        }

        // Extend with the image of the newest block.
        let next = image.slice(s![.., last_start..]).to_owned();
        let fresh = orthonormalize_block(Some(basis.view()), next);
        if fresh.ncols() == 0 {
            // Invariant subspace found. Restart directions from fresh noise so
            // that the remaining spectrum can still be reached.
            let noise = Array2::from_shape_fn((n, block_size), |_| rng.gen_range(-1.0..1.0));
            let fresh = orthonormalize_block(Some(basis.view()), noise);
            if fresh.ncols() == 0 {
                break;
            }
            last_start = basis.ncols();
            let fresh_image = apply(fresh.view());
            basis = ndarray::concatenate![Axis(1), basis, fresh];
            image = ndarray::concatenate![Axis(1), image, fresh_image];
            continue;
        }
        last_start = basis.ncols();
        let fresh_image = apply(fresh.view());
        basis = ndarray::concatenate![Axis(1), basis, fresh];
        image = ndarray::concatenate![Axis(1), image, fresh_image];
    }
    Err(GlrError::NoConvergence {
        method: "block Krylov eigensolver",
        iterations: opts.max_blocks,
    })
}

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
pub fn fix_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.axis_iter_mut(Axis(1)) {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
}

fn is_symmetric(m: &CsrMatrix) -> bool {
    m.n_rows() == m.n_cols() && m.transpose() == *m
}

/// Spectral embedding of a sparse matrix.
///
/// For a symmetric matrix the columns are its leading eigenvectors; otherwise
/// they are the leading left singular vectors, computed as eigenvectors of
/// `M M^T` applied implicitly. Columns are orthonormal and sign-normalized.
pub fn spectral_embed(m: &CsrMatrix, dim: usize, seed: u64) -> Result<Array2<f64>> {
    spectral_embed_with(m, dim, seed, &KrylovOptions::default()).map(|e| e.vectors)
}

pub fn spectral_embed_with(
    m: &CsrMatrix,
    dim: usize,
    seed: u64,
    opts: &KrylovOptions,
) -> Result<Eigenpairs> {
    let n = m.n_rows();
    let mut pairs = if is_symmetric(m) {
        top_eigenpairs(n, |v| m.spmm_dense(v).expect("square operator"), dim, seed, opts)?
    } else {
        let mt = m.transpose();
        top_eigenpairs(
            n,
            |v| {
                let inner = mt.spmm_dense(v).expect("conformable");
                m.spmm_dense(inner.view()).expect("conformable")
            },
            dim,
            seed,
            opts,
        )?
    };
    fix_signs(&mut pairs.vectors);
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn four_cycle_leading_vector_is_constant() {
        let g = build_graph("c4", &[(0, 1), (1, 2), (2, 3), (3, 0)], &[], &[0, 0, 1, 1], 4, 1)
            .unwrap();
        let pairs = spectral_embed_with(g.adjacency(), 1, 7, &KrylovOptions::default()).unwrap();
        assert!((pairs.values[0] - 2.0).abs() < 1e-10);
        for v in pairs.vectors.column(0) {
            assert!((v - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_dimension() {
        let m = CsrMatrix::identity(3);
        assert!(spectral_embed(&m, 0, 0).is_err());
        assert!(spectral_embed(&m, 3, 0).is_err());
    }

    #[test]
    fn signs_are_normalized() {
        let mut v = ndarray::array![[0.1, -0.2], [-0.9, 0.2]];
        fix_signs(&mut v);
        assert_eq!(v, ndarray::array![[-0.1, 0.2], [0.9, -0.2]]);
    }
}
