//! Small dense kernels with a fixed summation order.
//!
//! Loops are written out so results are bit-reproducible and shared
//! between code paths that must agree exactly.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::C64;

/// `Y · conj(p)`: correlates every antenna row with a pilot.
pub fn correlate(y: ArrayView2<C64>, p: ArrayView1<C64>) -> Array1<C64> {
    assert_eq!(y.ncols(), p.len());
    let mut out = Array1::zeros(y.nrows());
    for (o, row) in out.iter_mut().zip(y.rows()) {
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(p.iter()) {
            acc += a * b.conj();
        }
        *o = acc;
    }
    out
}

/// `hᴴ · Y`, a row vector of length `Y.ncols()`.
pub fn hermitian_project(h: ArrayView1<C64>, y: ArrayView2<C64>) -> Array1<C64> {
    assert_eq!(h.len(), y.nrows());
    let mut out = Array1::zeros(y.ncols());
    for (hm, row) in h.iter().zip(y.rows()) {
        let hc = hm.conj();
        for (o, v) in out.iter_mut().zip(row.iter()) {
            *o += hc * v;
        }
    }
    out
}

/// `xᵀ · conj(p)` for equal-length vectors.
pub fn dot_conj(x: ArrayView1<C64>, p: ArrayView1<C64>) -> C64 {
    assert_eq!(x.len(), p.len());
    x.iter().zip(p.iter()).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * b.conj())
}

pub fn norm_sqr(v: ArrayView1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `H · S` for `H` of shape M×N and `S` of shape N×T.
pub fn matmul(h: ArrayView2<C64>, s: ArrayView2<C64>) -> Array2<C64> {
    assert_eq!(h.ncols(), s.nrows());
    let mut out = Array2::zeros((h.nrows(), s.ncols()));
    for (mut orow, hrow) in out.rows_mut().into_iter().zip(h.rows()) {
        for (hv, srow) in hrow.iter().zip(s.rows()) {
            if hv.re == 0.0 && hv.im == 0.0 {
                continue;
            }
            for (o, sv) in orow.iter_mut().zip(srow.iter()) {
                *o += hv * sv;
            }
        }
    }
    out
}
