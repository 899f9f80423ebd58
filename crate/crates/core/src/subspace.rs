//! Linear algebra on jets of subspaces.
//!
//! A subspace-valued jet is represented by a `MatrixJet` whose columns are a
//! basis at every `t` near the center. All routines pivot on the constant term
//! (SVD at `t0`) and then solve for the remaining coordinates as series; the
//! resulting identities are re-verified at every retained order, and a
//! failure is reported as a non-constant rank.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::MatrixJet;

/// Numerical tolerances used by the jet linear algebra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    /// Singular values below `rank * σ_max` count as zero.
    pub rank: f64,
    /// Relative size of a residual that still counts as an exact identity.
    pub consistency: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            rank: 1e-9,
            consistency: 1e-6,
        }
    }
}

/// Numerical rank of a constant matrix, relative to its largest singular value.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Full SVD `M = U S Vᵀ` with singular values sorted decreasingly and square
/// `U`, `V`.
pub(crate) fn full_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    // nalgebra returns thin factors; complete them with orthonormal complements.
    let svd = m.clone().svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let u_thin = svd.u.unwrap().select_columns(&order);
    let vt_thin = svd.v_t.unwrap().select_rows(&order);
    let s: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = complete_basis(&u_thin, r);
    let v = complete_basis(&vt_thin.transpose(), c);
    (u, s, v)
}

/// Extends orthonormal columns to an orthonormal basis of `R^dim`.
fn complete_basis(q: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let k = q.ncols();
    if k >= dim {
        return q.columns(0, dim).into_owned();
    }
    let proj = DMatrix::<f64>::identity(dim, dim) - q * q.transpose();
    let mut out = DMatrix::zeros(dim, dim);
    out.columns_mut(0, k).copy_from(q);
    let mut filled = k;
    // Deterministic: Gram–Schmidt over the projected standard basis, taking
    // the largest remaining candidate each time.
    let mut cands: Vec<nalgebra::DVector<f64>> =
        (0..dim).map(|i| proj.column(i).into_owned()).collect();
    while filled < dim {
        let (best, _) = cands
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let v = cands[best].normalize();
        out.set_column(filled, &v);
        filled += 1;
        for c in cands.iter_mut() {
            let d = v.dot(c);
            *c -= &v * d;
        }
    }
    out
}

/// Values this small are treated as exact zeros regardless of scale.
const ABS_FLOOR: f64 = 1e-13;

fn rank_from(s: &[f64], tol: Tol) -> usize {
    let smax = s.first().cloned().unwrap_or(0.0);
    s.iter()
        .filter(|&&x| x > tol.rank * smax && x > ABS_FLOOR)
        .count()
}

/// Per-order magnitude of a product `A·B`, used to scale residual checks:
/// `scale_k = Σ_j ‖A_j‖ ‖B_{k-j}‖`.
pub fn product_scale(a: &MatrixJet, b: &MatrixJet) -> Vec<f64> {
    let na: Vec<f64> = (0..=a.order()).map(|k| a.max_abs_at(k)).collect();
    let nb: Vec<f64> = (0..=b.order()).map(|k| b.max_abs_at(k)).collect();
    convolve_scales(&na, &nb)
}

/// `product_scale` on per-order magnitudes, for chained products.
pub fn convolve_scales(na: &[f64], nb: &[f64]) -> Vec<f64> {
    let n = na.len().min(nb.len());
    (0..n)
        .map(|k| (0..=k).map(|j| na[j] * nb[k - j]).sum())
        .collect()
}

/// Largest ratio `‖R_k‖ / scale_k` (with a floor on the scale).
pub fn relative_residual(r: &MatrixJet, scale: &[f64]) -> f64 {
    let floor = scale.iter().cloned().fold(0.0, f64::max) * 1e-3;
    (0..=r.order().min(scale.len() - 1))
        .map(|k| r.max_abs_at(k) / scale[k].max(floor).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// A jet of bases for the column span of `m`, assuming constant rank.
/// The constant term of the result is orthonormal.
pub fn column_basis(m: &MatrixJet, tol: Tol) -> Result<MatrixJet> {
    if m.cols == 0 {
        return Ok(m.clone());
    }
    let (_, s, v) = full_svd(m.value());
    let r = rank_from(&s, tol);
    if r == 0 {
        return Ok(MatrixJet::zeros(m.center, m.rows, 0, m.order()));
    }
    let mut w = v.columns(0, r).into_owned();
    for (j, sj) in s.iter().take(r).enumerate() {
        w.column_mut(j).scale_mut(1.0 / sj);
    }
    let b = m.right_mul(&w);
    if r == m.cols || r == m.rows {
        // Maximal rank at the center persists nearby: nothing to check.
        return Ok(b);
    }
    // Check that every column of m stays in the span: m = B C with
    // C = (BᵀB)⁻¹ Bᵀ m.
    let bt = b.transpose();
    let gi = (&bt * &b).inverse()?;
    let btm = &bt * m;
    let c = &gi * &btm;
    let res = m - &(&b * &c);
    // Intermediate magnitudes, not just |B||C|: the inverse Gram jet can grow
    // fast with the order while C stays small, and its rounding survives.
    let nb: Vec<f64> = (0..=b.order()).map(|k| b.max_abs_at(k)).collect();
    let inner = convolve_scales(&nb, &product_scale(&gi, &btm));
    let scale: Vec<f64> = (0..=m.order())
        .map(|k| m.max_abs_at(k) + product_scale(&b, &c)[k] + inner.get(k).copied().unwrap_or(0.0))
        .collect();
    let rel = relative_residual(&res, &scale);
    if rel > tol.consistency {
        return Err(Error::RankNotConstant(format!(
            "column span of a {}x{} jet leaves its rank-{r} limit (residual {rel:.2e})",
            m.rows, m.cols
        )));
    }
    Ok(b)
}

/// A jet of bases for the kernel of `m`, assuming constant rank.
/// The constant term of the result is orthonormal.
pub fn kernel(m: &MatrixJet, tol: Tol) -> Result<MatrixJet> {
    let k = m.cols;
    if m.rows == 0 {
        return Ok(MatrixJet::identity(m.center, k, m.order()));
    }
    let (u, s, v) = full_svd(m.value());
    let r = rank_from(&s, tol);
    if r == k {
        return Ok(MatrixJet::zeros(m.center, k, 0, m.order()));
    }
    if r == 0 {
        // The kernel is everything only if the whole jet vanishes.
        if m.max_abs() > ABS_FLOOR {
            return Err(Error::RankNotConstant(format!(
                "{}x{} jet vanishes at the center but not identically",
                m.rows, m.cols
            )));
        }
        return Ok(MatrixJet::identity(m.center, k, m.order()));
    }
    let mv = m.right_mul(&v);
    let ur = u.columns(0, r).transpose();
    let n1 = mv.columns(0, r).left_mul(&ur);
    let n2 = mv.columns(r, k - r).left_mul(&ur);
    let n1i = n1.inverse()?;
    let y1 = -&(&n1i * &n2);
    let y = MatrixJet::vcat(&[&y1, &MatrixJet::identity(m.center, k - r, m.order())])?;
    let kern = y.left_mul(&v);
    let res = m * &kern;
    let nm: Vec<f64> = (0..=m.order()).map(|j| m.max_abs_at(j)).collect();
    let inner = convolve_scales(&nm, &product_scale(&n1i, &n2));
    let scale: Vec<f64> = product_scale(m, &kern)
        .iter()
        .zip(inner.iter().chain(std::iter::repeat(&0.0)))
        .map(|(a, b)| a + b)
        .collect();
    let rel = relative_residual(&res, &scale);
    if rel > tol.consistency {
        return Err(Error::RankNotConstant(format!(
            "kernel of a {}x{} jet changes dimension away from the center (residual {rel:.2e})",
            m.rows, m.cols
        )));
    }
    Ok(kern)
}

/// Intersection of two subspace jets given by full-rank bases.
pub fn intersection(a: &MatrixJet, b: &MatrixJet, tol: Tol) -> Result<MatrixJet> {
    if a.cols == 0 || b.cols == 0 {
        return Ok(MatrixJet::zeros(a.center, a.rows, 0, a.order().min(b.order())));
    }
    let k = kernel(&MatrixJet::hcat(&[a, &-b])?, tol)?;
    let x = k.rows_range(0, a.cols);
    Ok(a * &x)
}

/// Sum of two subspace jets.
pub fn sum(a: &MatrixJet, b: &MatrixJet, tol: Tol) -> Result<MatrixJet> {
    column_basis(&MatrixJet::hcat(&[a, b])?, tol)
}

/// Coordinates `C` with `target = basis · C` (least squares, series).
pub fn coordinates(basis: &MatrixJet, target: &MatrixJet) -> Result<MatrixJet> {
    let bt = basis.transpose();
    Ok(&(&bt * basis).inverse()? * &(&bt * target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(cs: &[&[f64]], rows: usize) -> MatrixJet {
        MatrixJet::new(
            0.0,
            cs.iter()
                .map(|c| DMatrix::from_row_slice(rows, c.len() / rows, c))
                .collect(),
        )
    }

    #[test]
    fn kernel_of_moving_line() {
        // m(t) = [1, t]: kernel spanned by (-t, 1).
        let m = jet(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]], 1);
        let k = kernel(&m, Tol::default()).unwrap();
        assert_eq!(k.cols, 1);
        assert!((&m * &k).max_abs() < 1e-14);
    }

    #[test]
    fn rank_jump_detected() {
        // columns f and t·e: rank 1 at t0, rank 2 elsewhere.
        let m = jet(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 0.0]], 2);
        assert!(matches!(
            column_basis(&m, Tol::default()),
            Err(Error::RankNotConstant(_))
        ));
    }

    #[test]
    fn column_basis_drops_dependent_columns() {
        let m = jet(&[&[1.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 2.0]], 2);
        let b = column_basis(&m, Tol::default()).unwrap();
        assert_eq!(b.cols, 1);
        let c = coordinates(&b, &m).unwrap();
        assert!((&(&b * &c) - &m).max_abs() < 1e-14);
    }

    #[test]
    fn intersection_dimension_formula() {
        let e = DMatrix::<f64>::identity(4, 4);
        let a = MatrixJet::constant(0.0, e.columns(0, 2).into_owned(), 2);
        let b = MatrixJet::constant(0.0, e.columns(1, 2).into_owned(), 2);
        let i = intersection(&a, &b, Tol::default()).unwrap();
        let s = sum(&a, &b, Tol::default()).unwrap();
        assert_eq!(i.cols + s.cols, a.cols + b.cols);
        assert_eq!(i.cols, 1);
    }

    #[test]
    fn full_svd_factors_are_square_orthonormal() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let (u, s, v) = full_svd(&m);
        assert_eq!(u.shape(), (2, 2));
        assert_eq!(v.shape(), (3, 3));
        assert!((v.transpose() * &v - DMatrix::identity(3, 3)).amax() < 1e-12);
        assert!(s[0] > 1.0 && s[1] < 1e-12);
    }
}
