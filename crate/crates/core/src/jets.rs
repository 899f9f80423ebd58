//! Truncated power series ("jets") in `(t - t0)` with scalar and matrix
//! coefficients.
//!
//! A jet of order `N` stores the Taylor coefficients `c_0..c_N`. Binary
//! operations truncate to the smaller order of the operands, derivatives lose
//! one order, and nothing is ever extrapolated.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CENTER_EPS: f64 = 1e-14;

fn check_center(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > CENTER_EPS * (1.0 + a.abs().max(b.abs())) {
        return Err(Error::CenterMismatch(a, b));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Scalar jet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub center: f64,
    pub coeffs: Vec<f64>,
}

impl Jet {
    pub fn new(center: f64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { center, coeffs }
    }

    pub fn constant(center: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { center, coeffs }
    }

    /// The coordinate `t - t0` itself.
    pub fn variable(center: f64, order: usize) -> Self {
        let mut j = Jet::constant(center, 0.0, order);
        if order >= 1 {
            j.coeffs[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Jet::new(self.center, self.coeffs[..=n].to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet> {
        check_center(self.center, other.center)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect();
        Ok(Jet::new(self.center, coeffs))
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet> {
        self.checked_add(&other.scale(-1.0))
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        check_center(self.center, other.center)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum())
            .collect();
        Ok(Jet::new(self.center, coeffs))
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet::new(self.center, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derive(&self) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::InsufficientOrder {
                required: 1,
                available: 0,
                stage: "derive",
            });
        }
        let coeffs = (0..self.order())
            .map(|k| (k + 1) as f64 * self.coeffs[k + 1])
            .collect();
        Ok(Jet::new(self.center, coeffs))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let h = t - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn invert(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 || !a0.is_finite() {
            return Err(Error::NotInvertible(format!("jet with constant term {a0}")));
        }
        let n = self.order();
        let mut b = vec![0.0; n + 1];
        b[0] = 1.0 / a0;
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Ok(Jet::new(self.center, b))
    }

    /// Principal square root; requires a positive constant term.
    pub fn sqrt(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 || !a0.is_finite() {
            return Err(Error::NonPositive(a0));
        }
        let n = self.order();
        let mut b = vec![0.0; n + 1];
        b[0] = a0.sqrt();
        for k in 1..=n {
            let s: f64 = (1..k).map(|j| b[j] * b[k - j]).sum();
            b[k] = (self.coeffs[k] - s) / (2.0 * b[0]);
        }
        Ok(Jet::new(self.center, b))
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.checked_add(rhs).expect("jet add")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.checked_sub(rhs).expect("jet sub")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.checked_mul(rhs).expect("jet mul")
    }
}

/// Matrix-valued jet: `coeffs[k]` is the coefficient of `(t - t0)^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixJet {
    pub center: f64,
    pub rows: usize,
    pub cols: usize,
    pub coeffs: Vec<DMatrix<f64>>,
}

impl MatrixJet {
    pub fn new(center: f64, coeffs: Vec<DMatrix<f64>>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        let (rows, cols) = coeffs[0].shape();
        assert!(
            coeffs.iter().all(|c| c.shape() == (rows, cols)),
            "inconsistent coefficient shapes"
        );
        MatrixJet {
            center,
            rows,
            cols,
            coeffs,
        }
    }

    pub fn zeros(center: f64, rows: usize, cols: usize, order: usize) -> Self {
        MatrixJet {
            center,
            rows,
            cols,
            coeffs: vec![DMatrix::zeros(rows, cols); order + 1],
        }
    }

    pub fn constant(center: f64, m: DMatrix<f64>, order: usize) -> Self {
        let (rows, cols) = m.shape();
        let mut coeffs = vec![DMatrix::zeros(rows, cols); order + 1];
        coeffs[0] = m;
        MatrixJet {
            center,
            rows,
            cols,
            coeffs,
        }
    }

    pub fn identity(center: f64, n: usize, order: usize) -> Self {
        Self::constant(center, DMatrix::identity(n, n), order)
    }

    /// Polynomial `Σ coeffs[k] (t - t0)^k`, zero-padded (or truncated) to `order`.
    pub fn from_polynomial(center: f64, coeffs: &[DMatrix<f64>], order: usize) -> Self {
        let (r, c) = coeffs[0].shape();
        let cs = (0..=order)
            .map(|k| coeffs.get(k).cloned().unwrap_or_else(|| DMatrix::zeros(r, c)))
            .collect();
        MatrixJet::new(center, cs)
    }

    /// Assembles a matrix jet from a grid of scalar jets.
    pub fn from_entries(entries: &[Vec<Jet>]) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged or empty jet grid".into()));
        }
        let center = entries[0][0].center;
        let mut order = usize::MAX;
        for e in entries.iter().flatten() {
            check_center(center, e.center)?;
            order = order.min(e.order());
        }
        let coeffs = (0..=order)
            .map(|k| DMatrix::from_fn(rows, cols, |i, j| entries[i][j].coeffs[k]))
            .collect();
        Ok(MatrixJet::new(center, coeffs))
    }

    pub fn entry(&self, i: usize, j: usize) -> Jet {
        Jet::new(self.center, self.coeffs.iter().map(|c| c[(i, j)]).collect())
    }

    pub fn from_scalar(j: &Jet) -> Self {
        MatrixJet::new(
            j.center,
            j.coeffs.iter().map(|&c| DMatrix::from_element(1, 1, c)).collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn value(&self) -> &DMatrix<f64> {
        &self.coeffs[0]
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        MatrixJet::new(self.center, self.coeffs[..=n].to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }

    /// Largest absolute coefficient over all orders.
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Largest absolute entry of the coefficient of order `k`.
    pub fn max_abs_at(&self, k: usize) -> f64 {
        self.coeffs[k].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    fn check_same_shape(&self, other: &MatrixJet) -> Result<()> {
        check_center(self.center, other.center)?;
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &MatrixJet) -> Result<MatrixJet> {
        self.check_same_shape(other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect();
        Ok(MatrixJet::new(self.center, coeffs))
    }

    pub fn checked_sub(&self, other: &MatrixJet) -> Result<MatrixJet> {
        self.check_same_shape(other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect();
        Ok(MatrixJet::new(self.center, coeffs))
    }

    /// Matrix product with Cauchy convolution of coefficients.
    pub fn checked_mul(&self, other: &MatrixJet) -> Result<MatrixJet> {
        check_center(self.center, other.center)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| {
                let mut acc = DMatrix::zeros(self.rows, other.cols);
                for j in 0..=k {
                    acc.gemm(1.0, &self.coeffs[j], &other.coeffs[k - j], 1.0);
                }
                acc
            })
            .collect();
        Ok(MatrixJet::new(self.center, coeffs))
    }

    pub fn scale(&self, s: f64) -> MatrixJet {
        MatrixJet::new(self.center, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Entrywise product with a scalar jet.
    pub fn mul_jet(&self, s: &Jet) -> Result<MatrixJet> {
        check_center(self.center, s.center)?;
        let n = self.order().min(s.order());
        let coeffs = (0..=n)
            .map(|k| {
                let mut acc = DMatrix::zeros(self.rows, self.cols);
                for j in 0..=k {
                    acc += &self.coeffs[j] * s.coeffs[k - j];
                }
                acc
            })
            .collect();
        Ok(MatrixJet::new(self.center, coeffs))
    }

    /// `M * self` for a constant matrix `M`.
    pub fn left_mul(&self, m: &DMatrix<f64>) -> MatrixJet {
        assert_eq!(m.ncols(), self.rows, "left_mul shape");
        MatrixJet::new(self.center, self.coeffs.iter().map(|c| m * c).collect())
    }

    /// `self * M` for a constant matrix `M`.
    pub fn right_mul(&self, m: &DMatrix<f64>) -> MatrixJet {
        assert_eq!(self.cols, m.nrows(), "right_mul shape");
        MatrixJet::new(self.center, self.coeffs.iter().map(|c| c * m).collect())
    }

    pub fn transpose(&self) -> MatrixJet {
        MatrixJet::new(self.center, self.coeffs.iter().map(|c| c.transpose()).collect())
    }

    pub fn symmetric_part(&self) -> MatrixJet {
        MatrixJet::new(
            self.center,
            self.coeffs.iter().map(|c| (c + c.transpose()) * 0.5).collect(),
        )
    }

    pub fn antisymmetric_part(&self) -> MatrixJet {
        MatrixJet::new(
            self.center,
            self.coeffs.iter().map(|c| (c - c.transpose()) * 0.5).collect(),
        )
    }

    pub fn derive(&self) -> Result<MatrixJet> {
        if self.order() == 0 {
            return Err(Error::InsufficientOrder {
                required: 1,
                available: 0,
                stage: "derive",
            });
        }
        let coeffs = (0..self.order())
            .map(|k| &self.coeffs[k + 1] * (k + 1) as f64)
            .collect();
        Ok(MatrixJet::new(self.center, coeffs))
    }

    pub fn derive_n(&self, n: usize) -> Result<MatrixJet> {
        if self.order() < n {
            return Err(Error::InsufficientOrder {
                required: n,
                available: self.order(),
                stage: "derive",
            });
        }
        let mut out = self.clone();
        for _ in 0..n {
            out = out.derive()?;
        }
        Ok(out)
    }

    /// Value of the truncated polynomial at `t`.
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let h = t - self.center;
        self.coeffs
            .iter()
            .rev()
            .fold(DMatrix::zeros(self.rows, self.cols), |acc, c| acc * h + c)
    }

    /// Re-expands the truncated polynomial about a new center.
    pub fn recenter(&self, new_center: f64) -> MatrixJet {
        let h = new_center - self.center;
        let n = self.order();
        let coeffs = (0..=n)
            .map(|m| {
                let mut acc = DMatrix::zeros(self.rows, self.cols);
                for k in m..=n {
                    acc += &self.coeffs[k] * (binomial(k, m) * h.powi((k - m) as i32));
                }
                acc
            })
            .collect();
        MatrixJet::new(new_center, coeffs)
    }

    /// The jet of `t ↦ X(2 t0 - t)` (time reversal about the center).
    pub fn reflect(&self) -> MatrixJet {
        MatrixJet::new(
            self.center,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 0 { c.clone() } else { -c })
                .collect(),
        )
    }

    pub fn columns(&self, start: usize, count: usize) -> MatrixJet {
        MatrixJet::new(
            self.center,
            self.coeffs
                .iter()
                .map(|c| c.columns(start, count).into_owned())
                .collect(),
        )
    }

    pub fn rows_range(&self, start: usize, count: usize) -> MatrixJet {
        MatrixJet::new(
            self.center,
            self.coeffs
                .iter()
                .map(|c| c.rows(start, count).into_owned())
                .collect(),
        )
    }

    pub fn select_columns(&self, idx: &[usize]) -> MatrixJet {
        MatrixJet::new(
            self.center,
            self.coeffs.iter().map(|c| c.select_columns(idx)).collect(),
        )
    }

    /// Horizontal concatenation `[A | B | ...]`, truncated to the smallest order.
    pub fn hcat(parts: &[&MatrixJet]) -> Result<MatrixJet> {
        let first = parts
            .first()
            .ok_or_else(|| Error::ShapeMismatch("hcat of nothing".into()))?;
        let n = parts.iter().map(|p| p.order()).min().unwrap();
        let rows = first.rows;
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        for p in parts {
            check_center(first.center, p.center)?;
            if p.rows != rows {
                return Err(Error::ShapeMismatch("hcat row counts differ".into()));
            }
        }
        let coeffs = (0..=n)
            .map(|k| {
                let mut m = DMatrix::zeros(rows, cols);
                let mut off = 0;
                for p in parts {
                    m.columns_mut(off, p.cols).copy_from(&p.coeffs[k]);
                    off += p.cols;
                }
                m
            })
            .collect();
        Ok(MatrixJet {
            center: first.center,
            rows,
            cols,
            coeffs,
        })
    }

    /// Vertical concatenation, truncated to the smallest order.
    pub fn vcat(parts: &[&MatrixJet]) -> Result<MatrixJet> {
        let ts: Vec<MatrixJet> = parts.iter().map(|p| p.transpose()).collect();
        let refs: Vec<&MatrixJet> = ts.iter().collect();
        Ok(MatrixJet::hcat(&refs)?.transpose())
    }

    /// Series inverse of a square jet with invertible constant term.
    pub fn inverse(&self) -> Result<MatrixJet> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of non-square jet".into()));
        }
        let a0inv = self.coeffs[0]
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NotInvertible("constant term of matrix jet".into()))?;
        let n = self.order();
        let mut x: Vec<DMatrix<f64>> = Vec::with_capacity(n + 1);
        x.push(a0inv.clone());
        for k in 1..=n {
            let mut s = DMatrix::zeros(self.rows, self.cols);
            for j in 1..=k {
                s.gemm(1.0, &self.coeffs[j], &x[k - j], 1.0);
            }
            x.push(-(&a0inv * s));
        }
        Ok(MatrixJet::new(self.center, x))
    }

    /// `M^{-1/2}` for a square jet whose constant term is the identity, via the
    /// binomial series (finite because `M - I` vanishes at the center).
    pub fn inv_sqrt_near_identity(&self) -> Result<MatrixJet> {
        let n = self.rows;
        if n != self.cols {
            return Err(Error::ShapeMismatch("inv_sqrt of non-square jet".into()));
        }
        let id = DMatrix::<f64>::identity(n, n);
        let dev = (&self.coeffs[0] - &id).amax();
        if dev > 1e-9 {
            return Err(Error::NotInvertible(format!(
                "inv_sqrt expects identity constant term (deviation {dev:.2e})"
            )));
        }
        let mut y = self.clone();
        y.coeffs[0] = DMatrix::zeros(n, n);
        let order = self.order();
        let mut out = MatrixJet::identity(self.center, n, order);
        let mut power = MatrixJet::identity(self.center, n, order);
        let mut c = 1.0;
        for k in 1..=order {
            c *= (-0.5 - (k as f64 - 1.0)) / k as f64;
            power = &power * &y;
            out = &out + &power.scale(c);
        }
        Ok(out)
    }

    /// Maximum over orders of the coefficient norm relative to `scale`.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

impl Add for &MatrixJet {
    type Output = MatrixJet;
    fn add(self, rhs: &MatrixJet) -> MatrixJet {
        self.checked_add(rhs).expect("matrix jet add")
    }
}

impl Sub for &MatrixJet {
    type Output = MatrixJet;
    fn sub(self, rhs: &MatrixJet) -> MatrixJet {
        self.checked_sub(rhs).expect("matrix jet sub")
    }
}

impl Mul for &MatrixJet {
    type Output = MatrixJet;
    fn mul(self, rhs: &MatrixJet) -> MatrixJet {
        self.checked_mul(rhs).expect("matrix jet mul")
    }
}

impl Neg for &MatrixJet {
    type Output = MatrixJet;
    fn neg(self) -> MatrixJet {
        self.scale(-1.0)
    }
}

/// Solves `U' = A(t) U`, `U(t0) = U0` term by term. The result has order
/// `ord(A) + 1`.
pub fn jet_ode_solve(a: &MatrixJet, u0: &DMatrix<f64>) -> Result<MatrixJet> {
    if a.rows != a.cols || u0.nrows() != a.rows {
        return Err(Error::ShapeMismatch(format!(
            "ode: A is {:?}, U0 is {:?}",
            a.shape(),
            u0.shape()
        )));
    }
    let n = a.order() + 1;
    let mut u: Vec<DMatrix<f64>> = Vec::with_capacity(n + 1);
    u.push(u0.clone());
    for k in 0..n {
        let mut s = DMatrix::zeros(a.rows, u0.ncols());
        for j in 0..=k {
            s.gemm(1.0, &a.coeffs[j], &u[k - j], 1.0);
        }
        u.push(s / (k + 1) as f64);
    }
    Ok(MatrixJet::new(a.center, u))
}

/// Taylor jet of `exp((t - t0) A) · B` about `t0`.
pub fn exp_jet(a: &DMatrix<f64>, b: &DMatrix<f64>, center: f64, order: usize) -> MatrixJet {
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut term = b.clone();
    coeffs.push(term.clone());
    for k in 1..=order {
        term = a * term / k as f64;
        coeffs.push(term.clone());
    }
    MatrixJet::new(center, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(c: &[f64]) -> Jet {
        Jet::new(0.0, c.to_vec())
    }

    #[test]
    fn product_of_conjugate_linears() {
        let p = &poly(&[1.0, 1.0, 0.0]) * &poly(&[1.0, -1.0, 0.0]);
        assert_eq!(p.coeffs, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn exp_times_exp_minus_is_one() {
        let p = &poly(&[1.0, 1.0, 0.5]) * &poly(&[1.0, -1.0, 0.5]);
        assert_eq!(p.coeffs, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn product_truncates_to_min_order() {
        let p = &poly(&[1.0, 1.0, 1.0, 1.0]) * &poly(&[1.0, 1.0]);
        assert_eq!(p.order(), 1);
    }

    #[test]
    fn center_mismatch_is_an_error() {
        let a = Jet::constant(0.0, 1.0, 2);
        let b = Jet::constant(1.0, 1.0, 2);
        assert!(matches!(a.checked_add(&b), Err(Error::CenterMismatch(..))));
    }

    #[test]
    fn derivatives() {
        assert_eq!(poly(&[0.0, 0.0, 0.0, 1.0]).derive().unwrap().coeffs, vec![0.0, 0.0, 3.0]);
        assert_eq!(Jet::constant(0.0, 5.0, 3).derive().unwrap().coeffs, vec![0.0; 3]);
        assert_eq!(poly(&[1.0, 2.0, 3.0]).derive().unwrap().coeffs, vec![2.0, 6.0]);
        assert!(Jet::constant(0.0, 1.0, 0).derive().is_err());
    }

    #[test]
    fn invert_and_sqrt() {
        assert_eq!(poly(&[1.0, 1.0, 0.0]).invert().unwrap().coeffs, vec![1.0, -1.0, 1.0]);
        assert_eq!(poly(&[1.0, 2.0, 1.0]).sqrt().unwrap().coeffs, vec![1.0, 1.0, 0.0]);
        assert_eq!(poly(&[4.0]).sqrt().unwrap().coeffs, vec![2.0]);
        assert!(poly(&[0.0, 1.0]).invert().is_err());
        assert!(matches!(poly(&[-1.0]).sqrt(), Err(Error::NonPositive(_))));
    }

    #[test]
    fn identity_is_neutral() {
        let a = MatrixJet::new(
            0.3,
            vec![
                DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
                DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 0.0, 2.0]),
            ],
        );
        let id = MatrixJet::identity(0.3, 2, 4);
        assert_eq!(&a * &id, a);
    }

    #[test]
    fn ode_scalar_exponential() {
        let a = MatrixJet::constant(0.0, DMatrix::from_element(1, 1, 2.0), 5);
        let u = jet_ode_solve(&a, &DMatrix::from_element(1, 1, 1.0)).unwrap();
        let mut fact = 1.0;
        for k in 0..=6 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((u.coeffs[k][(0, 0)] - 2f64.powi(k as i32) / fact).abs() < 1e-14);
        }
    }

    #[test]
    fn ode_zero_generator_is_constant() {
        let u0 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let u = jet_ode_solve(&MatrixJet::zeros(0.0, 2, 2, 4), &u0).unwrap();
        assert_eq!(u.coeffs[0], u0);
        assert!(u.coeffs[1..].iter().all(|c| c.amax() == 0.0));
    }

    #[test]
    fn ode_rotation_matches_trig_series() {
        let theta = 0.7;
        let a = MatrixJet::constant(
            0.0,
            DMatrix::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0]),
            11,
        );
        let u = jet_ode_solve(&a, &DMatrix::identity(2, 2)).unwrap();
        // Taylor coefficients of cos(θt) and sin(θt).
        let mut fact = 1.0;
        for k in 0..=12usize {
            if k > 0 {
                fact *= k as f64;
            }
            let p = theta.powi(k as i32) / fact;
            let (c, s) = match k % 4 {
                0 => (p, 0.0),
                1 => (0.0, p),
                2 => (-p, 0.0),
                _ => (0.0, -p),
            };
            let m = &u.coeffs[k];
            assert!((m[(0, 0)] - c).abs() < 1e-14 && (m[(1, 1)] - c).abs() < 1e-14);
            assert!((m[(1, 0)] - s).abs() < 1e-14 && (m[(0, 1)] + s).abs() < 1e-14);
        }
    }

    #[test]
    fn matrix_inverse_series() {
        let a = MatrixJet::new(
            0.0,
            vec![
                DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]),
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            ],
        );
        let p = &a * &a.inverse().unwrap();
        assert!((&p - &MatrixJet::identity(0.0, 2, 2)).max_abs() < 1e-14);
    }

    #[test]
    fn inv_sqrt_squares_back() {
        let m = MatrixJet::new(
            0.0,
            vec![
                DMatrix::identity(2, 2),
                DMatrix::from_row_slice(2, 2, &[0.3, 0.1, -0.2, 0.4]),
                DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.5, -0.1]),
                DMatrix::zeros(2, 2),
            ],
        );
        let h = m.inv_sqrt_near_identity().unwrap();
        let check = &(&h * &h) * &m;
        assert!((&check - &MatrixJet::identity(0.0, 2, 3)).max_abs() < 1e-13);
    }

    #[test]
    fn recenter_and_reflect() {
        let a = MatrixJet::new(
            1.0,
            vec![
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::from_element(1, 1, 2.0),
                DMatrix::from_element(1, 1, 3.0),
            ],
        );
        let b = a.recenter(1.5);
        assert!((b.eval(2.0)[(0, 0)] - a.eval(2.0)[(0, 0)]).abs() < 1e-13);
        assert!((a.reflect().eval(0.8)[(0, 0)] - a.eval(1.2)[(0, 0)]).abs() < 1e-13);
    }

    #[test]
    fn exp_jet_of_nilpotent_is_polynomial() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let j = exp_jet(&a, &DMatrix::identity(2, 2), 0.0, 4);
        assert_eq!(j.coeffs[1], a);
        assert!(j.coeffs[2..].iter().all(|c| c.amax() == 0.0));
    }

    fn arb_jet(order: usize) -> impl Strategy<Value = Jet> {
        prop::collection::vec(-3.0f64..3.0, order + 1).prop_map(|c| Jet::new(0.0, c))
    }

    fn arb_mjet(order: usize) -> impl Strategy<Value = MatrixJet> {
        prop::collection::vec(-2.0f64..2.0, 9 * (order + 1)).prop_map(move |v| {
            MatrixJet::new(
                0.0,
                v.chunks(9).map(|c| DMatrix::from_column_slice(3, 3, c)).collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn product_rule(a in arb_jet(6), b in arb_jet(6)) {
            let lhs = (&a * &b).derive().unwrap();
            let rhs = &(&a.derive().unwrap() * &b) + &(&a * &b.derive().unwrap());
            for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn matrix_product_rule(a in arb_mjet(5), b in arb_mjet(5)) {
            let lhs = (&a * &b).derive().unwrap();
            let rhs = &(&a.derive().unwrap() * &b) + &(&a * &b.derive().unwrap());
            prop_assert!((&lhs - &rhs).max_abs() < 1e-9);
        }

        #[test]
        fn constant_terms_commute_with_arithmetic(a in arb_mjet(3), b in arb_mjet(3)) {
            let p = &a * &b;
            prop_assert!((p.value() - a.value() * b.value()).amax() < 1e-12);
            let s = &a + &b;
            prop_assert!((s.value() - (a.value() + b.value())).amax() < 1e-12);
        }

        #[test]
        fn antisymmetric_ode_preserves_orthogonality(v in prop::collection::vec(-1.0f64..1.0, 3 * 4)) {
            let coeffs: Vec<DMatrix<f64>> = v.chunks(3).map(|c| {
                DMatrix::from_row_slice(3, 3, &[0.0, c[0], c[1], -c[0], 0.0, c[2], -c[1], -c[2], 0.0])
            }).collect();
            let a = MatrixJet::new(0.0, coeffs);
            let u = jet_ode_solve(&a, &DMatrix::identity(3, 3)).unwrap();
            let g = &u.transpose() * &u;
            prop_assert!((&g - &MatrixJet::identity(0.0, 3, g.order())).max_abs() < 1e-12);
        }

        #[test]
        fn sqrt_squares_back(a in arb_jet(6)) {
            let mut a = a;
            a.coeffs[0] = a.coeffs[0].abs() + 0.5;
            let b = a.sqrt().unwrap();
            let bb = &b * &b;
            for (x, y) in bb.coeffs.iter().zip(&a.coeffs) {
                prop_assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()));
            }
        }
    }
}
