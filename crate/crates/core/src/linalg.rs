//! Dense symmetric eigensolvers.
//!
//! `sym_eig` reduces to tridiagonal form with Householder reflections and
//! finishes with implicit QL iterations (the EISPACK `tred2`/`tql2` pair).
//! `gen_eig_spd` handles `A w = lambda B w` for symmetric `A` and SPD `B` via
//! a Cholesky factor of `B`.
//!
//! Eigenvalues are returned in ascending order. Each eigenvector is signed so
//! that its entry of largest magnitude is non-negative.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Per-eigenvalue cap on QL sweeps.
const MAX_QL_ITER: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Array1<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: Array2<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_square(a: ArrayView2<'_, f64>, what: &'static str) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::ShapeMismatch(format!("{what} is {r}x{c}, expected square")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(r)
}

fn symmetrized(a: ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    let n = a.nrows();
    (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (a[[i, j]] + a[[j, i]])).collect())
        .collect()
}

/// Full eigendecomposition of a symmetric matrix (symmetrized as `(A+A^T)/2`).
pub fn sym_eig(a: ArrayView2<'_, f64>) -> Result<EigenPairs> {
    let n = check_square(a, "symmetric matrix")?;
    if n == 0 {
        return Ok(EigenPairs {
            values: Array1::zeros(0),
            vectors: Array2::zeros((0, 0)),
        });
    }
    let mut v = symmetrized(a);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, dst]] = v[k][src];
        }
    }
    fix_signs(&mut vectors);
    Ok(EigenPairs { values, vectors })
}

/// Generalized problem `A w = lambda B w` with `B` symmetric positive definite.
///
/// Returned vectors are `B`-orthonormal up to the sign convention.
pub fn gen_eig_spd(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<EigenPairs> {
    let n = check_square(a, "left matrix")?;
    if check_square(b, "right matrix")? != n {
        return Err(Error::ShapeMismatch(format!(
            "left matrix is {n}x{n}, right matrix is {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let l = cholesky(b)?;

    // C = L^{-1} A L^{-T}
    let a_sym = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (a[[i, j]] + a[[j, i]]));
    let y = forward_solve(&l, &a_sym);
    let c = forward_solve(&l, &y.t().to_owned());
    let c = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (c[[i, j]] + c[[j, i]]));

    let std = sym_eig(c.view())?;
    let mut vectors = back_solve_transposed(&l, &std.vectors);
    fix_signs(&mut vectors);
    Ok(EigenPairs {
        values: std.values,
        vectors,
    })
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let n = check_square(b, "matrix")?;
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = b[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite { row: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in j + 1..n {
            let mut s = 0.5 * (b[[i, j]] + b[[j, i]]);
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L X = R` for lower-triangular `L`.
fn forward_solve(l: &Array2<f64>, r: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut x = r.clone();
    for mut col in x.axis_iter_mut(Axis(1)) {
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= l[[i, k]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
    }
    x
}

/// Solves `L^T X = R` for lower-triangular `L`.
fn back_solve_transposed(l: &Array2<f64>, r: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut x = r.clone();
    for mut col in x.axis_iter_mut(Axis(1)) {
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in i + 1..n {
                s -= l[[k, i]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
    }
    x
}

/// Makes the largest-magnitude entry of every column non-negative.
pub(crate) fn fix_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.axis_iter_mut(Axis(1)) {
        let mut best = 0;
        for (k, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = k;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

/// Householder tridiagonalization. On exit `d`/`e` hold the diagonal and
/// subdiagonal, `v` the accumulated orthogonal transform.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1][..n]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal matrix left by `tred2`.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(Error::NoConvergence(MAX_QL_ITER));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
