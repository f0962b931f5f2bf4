//! Capped `l_{p,q}` matrix norms.
//!
//! For a matrix with columns `m_j`, the capped norm is
//! `(sum_j min(||m_j||_p^q, eps))^(1/q)`. It satisfies positive scalability
//! and the triangle inequality for `p, q >= 1` but is not homogeneous.

use ndarray::{ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CappedNormParams {
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
}

impl CappedNormParams {
    pub fn new(p: f64, q: f64, epsilon: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0 && epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "capped norm needs p, q, epsilon > 0 (got {p}, {q}, {epsilon})"
            )));
        }
        Ok(Self { p, q, epsilon })
    }
}

/// `||v||_p`; a zero vector has norm 0 for every `p`.
pub fn vector_lp(v: ArrayView1<'_, f64>, p: f64) -> f64 {
    if p == 2.0 {
        return v.dot(&v).sqrt();
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    // scale by the largest entry so high powers do not overflow
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

fn check_finite(m: ArrayView2<'_, f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("matrix"))
    }
}

/// Capped `l_{p,q}` norm; the cap is applied to `||m_j||_p^q`.
pub fn capped_lpq(m: ArrayView2<'_, f64>, params: &CappedNormParams) -> Result<f64> {
    check_finite(m)?;
    let total: f64 = m
        .axis_iter(Axis(1))
        .map(|col| vector_lp(col, params.p).powf(params.q).min(params.epsilon))
        .sum();
    Ok(total.powf(1.0 / params.q))
}

/// Plain `l_{p,q}` norm, `(sum_j ||m_j||_p^q)^(1/q)`.
pub fn lpq(m: ArrayView2<'_, f64>, p: f64, q: f64) -> Result<f64> {
    check_finite(m)?;
    let total: f64 = m
        .axis_iter(Axis(1))
        .map(|col| vector_lp(col, p).powf(q))
        .sum();
    Ok(total.powf(1.0 / q))
}

/// Sum of column `l_2` norms.
pub fn l21_norm(m: ArrayView2<'_, f64>) -> Result<f64> {
    check_finite(m)?;
    Ok(m.axis_iter(Axis(1)).map(|col| col.dot(&col).sqrt()).sum())
}
