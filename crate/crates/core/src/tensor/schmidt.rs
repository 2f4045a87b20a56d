use super::spectral::thin_svd;
use super::{permute, CompositeOperator};
use crate::{CMatrix, Error, Result};

/// Relative cut-off for discarding operator-Schmidt terms.
pub const SCHMIDT_TOL: f64 = 1e-12;

/// One term `weight · left ⊗ right` of an operator-Schmidt expansion.
/// Both factors have unit Hilbert–Schmidt norm.
#[derive(Debug, Clone)]
pub struct SchmidtTerm {
    pub weight: f64,
    pub left: CompositeOperator,
    pub right: CompositeOperator,
}

/// Operator-Schmidt decomposition across the cut `left | right`, obtained
/// by realigning the matrix and taking its SVD. Terms are sorted by
/// descending weight; weights ≤ `SCHMIDT_TOL · max weight` are dropped.
pub fn operator_schmidt<S: AsRef<str>>(
    h: &CompositeOperator,
    left: &[S],
    right: &[S],
) -> Result<Vec<SchmidtTerm>> {
    let layout = h.layout();
    let lpos = layout.positions(left)?;
    let rpos = layout.positions(right)?;
    if lpos.is_empty() || rpos.is_empty() || lpos.len() + rpos.len() != layout.len() || lpos.iter().any(|p| rpos.contains(p)) {
        return Err(Error::Layout(format!("cut does not partition layout {layout}")));
    }
    let left_layout = layout.sub_layout(&lpos);
    let right_layout = layout.sub_layout(&rpos);
    let order: Vec<String> = left_layout.labels().chain(right_layout.labels()).map(str::to_string).collect();
    let m = permute(h, &order)?.into_matrix();

    let dl = left_layout.total_dim();
    let dr = right_layout.total_dim();
    let realigned = CMatrix::from_fn(dl * dl, dr * dr, |row, col| {
        let (a, a2) = (row / dl, row % dl);
        let (b, b2) = (col / dr, col % dr);
        m[(a * dr + b, a2 * dr + b2)]
    });
    let svd = thin_svd(&realigned);
    let max = svd.values.first().copied().unwrap_or(0.0);
    let mut terms = Vec::new();
    for (k, &w) in svd.values.iter().enumerate() {
        if max == 0.0 || w <= SCHMIDT_TOL * max {
            break;
        }
        let a = CMatrix::from_fn(dl, dl, |r, c| svd.u[(r * dl + c, k)]);
        let b = CMatrix::from_fn(dr, dr, |r, c| svd.v[(r * dr + c, k)].conj());
        terms.push(SchmidtTerm {
            weight: w,
            left: CompositeOperator::new(a, left_layout.clone())?,
            right: CompositeOperator::new(b, right_layout.clone())?,
        });
    }
    Ok(terms)
}
