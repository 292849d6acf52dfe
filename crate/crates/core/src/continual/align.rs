//! Weight aligning: rescale the new-class rows of a bias-free head so their
//! mean norm equals the mean norm of the old-class rows.

use crate::error::{Error, Result};
use crate::numkit::{vec_norm, Matrix2D, NormKind};

fn check(head: &Matrix2D, u: usize, v: usize) -> Result<()> {
    if u == 0 || v == 0 {
        return Err(Error::Argument(format!(
            "weight aligning needs u >= 1 and v >= 1, got u={u}, v={v}"
        )));
    }
    if head.rows() != u + v {
        return Err(Error::shape(
            format!("head with {} rows", head.rows()),
            format!("u + v = {}", u + v),
        ));
    }
    Ok(())
}

fn mean_norm(head: &Matrix2D, rows: std::ops::Range<usize>, norm: NormKind) -> Result<f64> {
    let count = rows.len() as f64;
    let mut total = 0.0;
    for r in rows {
        total += vec_norm(head.row(r), norm)?;
    }
    Ok(total / count)
}

/// `mean(‖w_old‖) / mean(‖w_new‖)` over rows `0..u` and `u..u+v`.
pub fn alignment_factor(head: &Matrix2D, u: usize, v: usize, norm: NormKind) -> Result<f64> {
    check(head, u, v)?;
    let old = mean_norm(head, 0..u, norm)?;
    let new = mean_norm(head, u..u + v, norm)?;
    if new == 0.0 {
        return Err(Error::DegenerateHead(
            "every new-class weight row is zero".into(),
        ));
    }
    Ok(old / new)
}

/// Returns a copy of `head` with rows `u..u+v` scaled by [`alignment_factor`]; rows `0..u` are copied bit for bit.
pub fn weight_align(head: &Matrix2D, u: usize, v: usize, norm: NormKind) -> Result<Matrix2D> {
    let gamma = alignment_factor(head, u, v, norm)?;
    let mut out = head.clone();
    for r in u..u + v {
        out.row_mut(r).iter_mut().for_each(|w| *w *= gamma);
    }
    Ok(out)
}
