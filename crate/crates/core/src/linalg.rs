//! Dense real symmetric eigenvalue problems.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration. Symmetric Toeplitz matrices are centrosymmetric, so their
//! spectrum splits into the spectra of two half-size symmetric blocks
//! (even and odd eigenvectors); [`toeplitz_eigenvalues`] uses that split.

use crate::{Error, Result};

const QL_MAX_SWEEPS: usize = 60;

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Build from a function of `(i, j)`; only `j <= i` is queried.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let x = f(i, j);
                m.data[i * n + j] = x;
                m.data[j * n + i] = x;
            }
        }
        m
    }

    /// Symmetric Toeplitz matrix with the given first row.
    pub fn toeplitz(first_row: &[f64]) -> Self {
        Self::from_fn(first_row.len(), |i, j| first_row[i.abs_diff(j)])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Tridiagonal form: diagonal `d` and sub-diagonal `e` (`e[i]` couples
/// `i` and `i + 1`; the last entry is zero).
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

/// Householder reduction using only the lower triangle. When `q` is given,
/// the orthogonal transformation is accumulated into it (`A = Q T Q^T`).
fn tridiagonalize(a: &mut SymMatrix, mut q: Option<&mut SymMatrix>) -> Tridiagonal {
    let n = a.n;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return Tridiagonal { d, e };
    }
    let data = &mut a.data;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        d[k] = data[k * n + k];
        let m = n - k - 1;
        let off = k + 1;
        let mut scale = 0.0f64;
        for i in 0..m {
            v[i] = data[(off + i) * n + k];
            scale = scale.max(v[i].abs());
        }
        if m == 1 || scale == 0.0 {
            e[k] = v[0];
            continue;
        }
        let mut norm2 = 0.0;
        for x in &mut v[..m] {
            *x /= scale;
            norm2 += *x * *x;
        }
        let norm = norm2.sqrt();
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        e[k] = alpha * scale;
        // v = x - alpha e_1, H = I - beta v v^T
        v[0] -= alpha;
        let vtv = norm2 - 2.0 * alpha * (v[0] + alpha) + alpha * alpha;
        let beta = 2.0 / vtv;

        // p = beta * A22 v from the lower triangle
        let v = &v[..m];
        let p = &mut p[..m];
        p.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..m {
            let base = (off + i) * n + off;
            let row = &data[base..base + i];
            let vi = v[i];
            let mut acc = dot(row, &v[..i]);
            for (pj, r) in p[..i].iter_mut().zip(row) {
                *pj += r * vi;
            }
            acc += data[base + i] * vi;
            p[i] += acc;
        }
        p.iter_mut().for_each(|x| *x *= beta);
        let kfac = 0.5 * beta * dot(p, v);
        // w = p - K v, stored in p
        for (pi, vi) in p.iter_mut().zip(v) {
            *pi -= kfac * vi;
        }
        let w = &*p;
        for i in 0..m {
            let base = (off + i) * n + off;
            let row = &mut data[base..=base + i];
            let (vi, wi) = (v[i], w[i]);
            for ((r, vj), wj) in row.iter_mut().zip(&v[..=i]).zip(&w[..=i]) {
                *r -= vi * wj + wi * vj;
            }
        }
        if let Some(q) = q.as_deref_mut() {
            // Q <- Q H on columns off..n
            for r in 0..n {
                let row = &mut q.data[r * n + off..r * n + n];
                let s = beta * dot(row, v);
                for (x, vi) in row.iter_mut().zip(v) {
                    *x -= s * vi;
                }
            }
        }
    }
    d[n - 1] = data[(n - 1) * n + (n - 1)];
    e[n - 1] = 0.0;
    Tridiagonal { d, e }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. Rotations are applied
/// to the columns of `z` when given.
fn tridiagonal_ql(t: &mut Tridiagonal, mut z: Option<&mut SymMatrix>) -> Result<()> {
    let n = t.d.len();
    let (d, e) = (&mut t.d, &mut t.e);
    let floor = f64::EPSILON
        * d.iter()
            .zip(e.iter())
            .map(|(a, b)| a.abs() + b.abs())
            .fold(0.0, f64::max);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(Error::Convergence {
                    iterations: QL_MAX_SWEEPS,
                    estimate: d[l],
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let zn = z.n;
                    for row in z.data.chunks_exact_mut(zn) {
                        let f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_descending(values: &mut [f64]) {
    values.sort_by(|a, b| b.total_cmp(a));
}

/// Eigenvalues of a dense symmetric matrix, in descending order.
pub fn symmetric_eigenvalues(mut a: SymMatrix) -> Result<Vec<f64>> {
    let mut t = tridiagonalize(&mut a, None);
    tridiagonal_ql(&mut t, None)?;
    let mut d = t.d;
    sort_descending(&mut d);
    Ok(d)
}

/// Eigenpairs of a dense symmetric matrix, in descending eigenvalue order.
/// Eigenvectors are returned as rows.
pub fn symmetric_eigen(mut a: SymMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.n;
    let mut q = SymMatrix::zeros(n);
    for i in 0..n {
        q.data[i * n + i] = 1.0;
    }
    let mut t = tridiagonalize(&mut a, Some(&mut q));
    tridiagonal_ql(&mut t, Some(&mut q))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| t.d[j].total_cmp(&t.d[i]));
    let values = order.iter().map(|&i| t.d[i]).collect();
    let vectors = order
        .iter()
        .map(|&c| (0..n).map(|r| q.data[r * n + c]).collect())
        .collect();
    Ok((values, vectors))
}

/// Eigenvalues of the symmetric Toeplitz matrix with the given first row, in
/// descending order.
///
/// With `J` the exchange matrix and `m = n / 2`, the even vectors
/// `[x; Jx]` (plus a middle component when `n` is odd) and odd vectors
/// `[x; -Jx]` reduce the problem to `A + H` and `A - H`, where `A` is the
/// leading `m x m` Toeplitz block and `H_ij = t(n - 1 - i - j)`.
pub fn toeplitz_eigenvalues(first_row: &[f64]) -> Result<Vec<f64>> {
    let n = first_row.len();
    if n < 4 {
        return symmetric_eigenvalues(SymMatrix::toeplitz(first_row));
    }
    let t = first_row;
    let m = n / 2;
    let odd = n % 2 == 1;
    let even_dim = if odd { m + 1 } else { m };
    let even = SymMatrix::from_fn(even_dim, |i, j| {
        if i == m {
            // odd n: border row through the centre site
            if j == m {
                t[0]
            } else {
                std::f64::consts::SQRT_2 * t[m - j]
            }
        } else {
            t[i.abs_diff(j)] + t[n - 1 - i - j]
        }
    });
    let odd_block = SymMatrix::from_fn(m, |i, j| t[i.abs_diff(j)] - t[n - 1 - i - j]);
    let mut values = symmetric_eigenvalues(even)?;
    values.extend(symmetric_eigenvalues(odd_block)?);
    sort_descending(&mut values);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lcg_matrix(n: usize, seed: u64) -> SymMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        SymMatrix::from_fn(n, |_, _| next())
    }

    #[test]
    fn diagonal_matrix() {
        let a = SymMatrix::from_fn(4, |i, j| if i == j { i as f64 } else { 0.0 });
        assert_eq!(symmetric_eigenvalues(a).unwrap(), vec![3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        let a = SymMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let ev = symmetric_eigenvalues(a).unwrap();
        assert_relative_eq!(ev[0], 3.0, max_relative = 1e-15);
        assert_relative_eq!(ev[1], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn trace_and_frobenius_preserved() {
        for n in [1, 2, 3, 7, 40] {
            let a = lcg_matrix(n, n as u64);
            let trace: f64 = (0..n).map(|i| a.get(i, i)).sum();
            let fro = a.norm();
            let ev = symmetric_eigenvalues(a).unwrap();
            assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-12);
            assert!((ev.iter().map(|x| x * x).sum::<f64>().sqrt() - fro).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenpairs_have_small_residuals() {
        let a = lcg_matrix(30, 7);
        let (values, vectors) = symmetric_eigen(a.clone()).unwrap();
        let norm = a.norm();
        for (g, v) in values.iter().zip(&vectors) {
            let av = a.mul_vec(v);
            let res: f64 = av
                .iter()
                .zip(v)
                .map(|(x, y)| (x - g * y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-12 * norm);
            let len: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_relative_eq!(len, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn toeplitz_split_matches_dense() {
        for n in [1, 2, 3, 4, 5, 8, 9, 33, 64] {
            let row: Vec<f64> = (0..n)
                .map(|d| 1.0 / (1.0 + d as f64) + 0.1 * (d as f64).cos())
                .collect();
            let split = toeplitz_eigenvalues(&row).unwrap();
            let dense = symmetric_eigenvalues(SymMatrix::toeplitz(&row)).unwrap();
            assert_eq!(split.len(), n);
            for (a, b) in split.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-12, "n = {n}: {a} vs {b}");
            }
        }
    }
}
