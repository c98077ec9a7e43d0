//! Variable-band (skyline) `LDLᵀ` factorization of symmetric matrices without pivoting.
//!
//! Rows are stored from their first nonzero column to the diagonal after a
//! reverse Cuthill–McKee reordering. The number of negative pivots is the
//! inertia of the factored matrix, which for `A − σM` with `M` positive definite
//! counts the eigenvalues of the pencil below σ.

use sprs::CsMat;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Skyline {
    n: usize,
    /// `perm[k]` is the original index placed at position k.
    perm: Vec<usize>,
    /// Position of original index i.
    inv: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    /// Strictly-lower entries of the unit factor L, row by row.
    lower: Vec<f64>,
    diag: Vec<f64>,
}

/// A fill-reducing ordering for the sparsity pattern of `mat`.
pub fn rcm_order(mat: &CsMat<f64>) -> Vec<usize> {
    // the ordering only needs the structure; symmetrize it so rounding in the values cannot matter
    let n = mat.rows();
    let mut tri = sprs::TriMat::new((n, n));
    for (row, vec) in mat.outer_iterator().enumerate() {
        for (col, _) in vec.iter() {
            tri.add_triplet(row, col, 1.0);
            tri.add_triplet(col, row, 1.0);
        }
    }
    let pattern: CsMat<f64> = tri.to_csr();
    sprs::linalg::reverse_cuthill_mckee(pattern.view()).perm.vec()
}

impl Skyline {
    /// Factors `a + shift_m · m` (pass `shift_m = −σ` for `A − σM`) in the given ordering.
    pub fn factor(a: &CsMat<f64>, m: &CsMat<f64>, shift_m: f64, perm: &[usize]) -> Result<Self> {
        let n = a.rows();
        let mut inv = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        // profile in permuted numbering
        let mut first: Vec<usize> = (0..n).collect();
        for (row, vec) in a.outer_iterator().enumerate().chain(m.outer_iterator().enumerate()) {
            let pr = inv[row];
            for (col, _) in vec.iter() {
                let pc = inv[col];
                if pc < pr {
                    first[pr] = first[pr].min(pc);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        let mut scale = vec![0.0f64; n];
        for (mat, f) in [(a, 1.0), (m, shift_m)] {
            for (row, vec) in mat.outer_iterator().enumerate() {
                let pr = inv[row];
                for (col, &v) in vec.iter() {
                    let pc = inv[col];
                    scale[pr] = scale[pr].max((f * v).abs());
                    if pc == pr {
                        diag[pr] += f * v;
                    } else if pc < pr {
                        lower[start[pr] + pc - first[pr]] += f * v;
                    }
                }
            }
        }
        let mut f = Skyline { n, perm: perm.to_vec(), inv, first, start, lower, diag };
        f.eliminate(shift_m, &scale)?;
        Ok(f)
    }

    fn eliminate(&mut self, shift_m: f64, scale: &[f64]) -> Result<()> {
        // row i holds g_ij = l_ij d_j while it is being built, then l_ij
        let mut g = Vec::new();
        for i in 0..self.n {
            let fi = self.first[i];
            let si = self.start[i];
            g.clear();
            g.extend_from_slice(&self.lower[si..si + (i - fi)]);
            for j in fi..i {
                let fj = self.first[j];
                let lo = fi.max(fj);
                let sj = self.start[j];
                let mut acc = 0.0;
                for k in lo..j {
                    acc += g[k - fi] * self.lower[sj + k - fj];
                }
                g[j - fi] -= acc;
            }
            let mut d = self.diag[i];
            for j in fi..i {
                let l = g[j - fi] / self.diag[j];
                d -= g[j - fi] * l;
                self.lower[si + j - fi] = l;
            }
            if !(d.abs() > 1e-13 * scale[i].max(f64::MIN_POSITIVE)) || !d.is_finite() {
                return Err(Error::FactorizationBreakdown { shift: -shift_m, row: i, pivot: d });
            }
            self.diag[i] = d;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of negative pivots.
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    /// Stored entries of the factor.
    pub fn profile_size(&self) -> usize {
        self.lower.len()
    }

    /// Solves `(A + shift_m M) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = (0..n).map(|k| b[self.perm[k]]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i] + (i - fi)];
            let acc: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= acc;
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.lower[self.start[i]..self.start[i] + (i - fi)];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = y[self.inv[i]];
        }
        x
    }
}
