//! Structural operations on composite operators: products, partial traces,
//! partial transposes and factor permutations.
//!
//! All index arithmetic uses one convention: row-major composite indices with
//! the first layout entry varying slowest.

use super::{CompositeOperator, SubsystemLayout};
use crate::{CMatrix, Error, Result, C64};

/// Kronecker product; the layout of `a` comes first.
pub fn tensor_product(a: &CompositeOperator, b: &CompositeOperator) -> Result<CompositeOperator> {
    let layout = a.layout().concat(b.layout())?;
    CompositeOperator::new(a.matrix().kronecker(b.matrix()), layout)
}

/// Tensor product of several operators, left to right.
pub fn tensor_product_all<'a, I>(ops: I) -> Result<CompositeOperator>
where
    I: IntoIterator<Item = &'a CompositeOperator>,
{
    let mut acc: Option<CompositeOperator> = None;
    for op in ops {
        acc = Some(match acc {
            None => op.clone(),
            Some(a) => tensor_product(&a, op)?,
        });
    }
    Ok(acc.unwrap_or_else(|| CompositeOperator::identity(SubsystemLayout::scalar())))
}

/// Traces out every factor not listed in `keep`. The result keeps the
/// surviving factors in their original layout order.
pub fn partial_trace<S: AsRef<str>>(op: &CompositeOperator, keep: &[S]) -> Result<CompositeOperator> {
    if keep.is_empty() {
        return Err(Error::Layout("partial_trace needs at least one kept label".into()));
    }
    let layout = op.layout();
    let kept = layout.positions(keep)?;
    let traced: Vec<usize> = (0..layout.len()).filter(|p| !kept.contains(p)).collect();
    let kept_layout = layout.sub_layout(&kept);
    let traced_layout = layout.sub_layout(&traced);
    let dk = kept_layout.total_dim();
    let dt = traced_layout.total_dim();

    // full index for every (kept, traced) pair
    let n = layout.len();
    let mut digits = vec![0usize; n];
    let mut kd = vec![0usize; kept.len()];
    let mut td = vec![0usize; traced.len()];
    let mut full = vec![0usize; dk * dt];
    for k in 0..dk {
        kept_layout.digits(k, &mut kd);
        for t in 0..dt {
            traced_layout.digits(t, &mut td);
            for (i, &p) in kept.iter().enumerate() {
                digits[p] = kd[i];
            }
            for (i, &p) in traced.iter().enumerate() {
                digits[p] = td[i];
            }
            full[k * dt + t] = layout.compose(&digits);
        }
    }

    let m = op.matrix();
    let out = CMatrix::from_fn(dk, dk, |r, c| {
        let mut s = C64::new(0.0, 0.0);
        for t in 0..dt {
            s += m[(full[r * dt + t], full[c * dt + t])];
        }
        s
    });
    CompositeOperator::new(out, kept_layout)
}

/// Transposes the indices of the listed factors only.
pub fn partial_transpose<S: AsRef<str>>(
    op: &CompositeOperator,
    subset: &[S],
) -> Result<CompositeOperator> {
    let layout = op.layout();
    let pos = layout.positions(subset)?;
    let d = op.dim();
    let n = layout.len();
    let mut rd = vec![0usize; n];
    let mut cd = vec![0usize; n];
    let m = op.matrix();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        layout.digits(i, &mut rd);
        for j in 0..d {
            layout.digits(j, &mut cd);
            let (mut r2, mut c2) = (rd.clone(), cd.clone());
            for &p in &pos {
                r2[p] = cd[p];
                c2[p] = rd[p];
            }
            out[(layout.compose(&r2), layout.compose(&c2))] = m[(i, j)];
        }
    }
    Ok(op.with_matrix(out))
}

/// Reorders the factors so that they appear in `order`, which must list
/// every label exactly once.
pub fn permute<S: AsRef<str>>(op: &CompositeOperator, order: &[S]) -> Result<CompositeOperator> {
    let layout = op.layout();
    if order.len() != layout.len() {
        return Err(Error::Layout(format!(
            "permutation lists {} labels, layout {layout} has {}",
            order.len(),
            layout.len()
        )));
    }
    let src: Vec<usize> = order
        .iter()
        .map(|l| {
            layout
                .position(l.as_ref())
                .ok_or_else(|| Error::Layout(format!("unknown label '{}'", l.as_ref())))
        })
        .collect::<Result<_>>()?;
    let new_layout = layout.sub_layout(&src);
    // reject repeated labels
    SubsystemLayout::new(new_layout.entries().iter().map(|e| (e.label.clone(), e.dim)))?;

    let d = op.dim();
    let n = layout.len();
    let mut od = vec![0usize; n];
    let mut nd = vec![0usize; n];
    let map: Vec<usize> = (0..d)
        .map(|i| {
            layout.digits(i, &mut od);
            for (k, &s) in src.iter().enumerate() {
                nd[k] = od[s];
            }
            new_layout.compose(&nd)
        })
        .collect();
    let m = op.matrix();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    CompositeOperator::new(out, new_layout)
}

/// Embeds an operator acting on some factors of `layout` into the full
/// space, with identities elsewhere.
pub fn embed(local: &CompositeOperator, layout: &SubsystemLayout) -> Result<CompositeOperator> {
    for e in local.layout().entries() {
        match layout.position(&e.label) {
            Some(p) if layout.entries()[p].dim == e.dim => {}
            Some(_) => {
                return Err(Error::Layout(format!(
                    "dimension of '{}' differs between operator and layout",
                    e.label
                )))
            }
            None => return Err(Error::Layout(format!("unknown label '{}'", e.label))),
        }
    }
    let local_labels: Vec<&str> = local.layout().labels().collect();
    let rest = layout.complement(&local_labels);
    let rest_pos = layout.positions(&rest)?;
    let id = CompositeOperator::identity(layout.sub_layout(&rest_pos));
    let full = tensor_product(local, &id)?;
    let order: Vec<&str> = layout.labels().collect();
    permute(&full, &order)
}

/// `ab − ba`.
pub fn commutator(a: &CompositeOperator, b: &CompositeOperator) -> Result<CompositeOperator> {
    if a.layout() != b.layout() {
        return Err(Error::Shape(format!(
            "commutator of operators on {} and {}",
            a.layout(),
            b.layout()
        )));
    }
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    Ok(a.with_matrix(ab - ba))
}
