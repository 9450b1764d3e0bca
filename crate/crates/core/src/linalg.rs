//! Small dense helpers shared by the alignment and contrastive modules.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Scalar};

pub fn l2_norm<T: Scalar>(v: ArrayView1<'_, T>) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Unit-normalize `v`; `row` is only used for the error message.
pub fn normalize<T: Scalar>(v: ArrayView1<'_, T>, row: usize) -> Result<Array1<T>> {
    let n = l2_norm(v);
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::ZeroNorm { row, context: None });
    }
    Ok(v.mapv(|x| x / n))
}

/// Unit-normalize every row. Rows flagged in `skip` are left as zeros.
pub fn normalize_rows<T: Scalar>(m: ArrayView2<'_, T>, skip: Option<&[bool]>) -> Result<Array2<T>> {
    let mut out = Array2::zeros(m.raw_dim());
    for (i, row) in m.axis_iter(Axis(0)).enumerate() {
        if skip.is_some_and(|s| s[i]) {
            continue;
        }
        out.row_mut(i).assign(&normalize(row, i)?);
    }
    Ok(out)
}

/// Row-wise softmax.
pub fn softmax_rows<T: Scalar>(logits: ArrayView2<'_, T>) -> Array2<T> {
    let mut out = logits.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let lse = log_sum_exp(row.iter().copied());
        row.mapv_inplace(|x| (x - lse).exp());
    }
    out
}

/// Row-wise log-softmax.
pub fn log_softmax_rows<T: Scalar>(logits: ArrayView2<'_, T>) -> Array2<T> {
    let mut out = logits.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let lse = log_sum_exp(row.iter().copied());
        row.mapv_inplace(|x| x - lse);
    }
    out
}
