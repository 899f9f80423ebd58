//! The standard symplectic space `R^{2n}` with `ω(x, y) = xᵀ Ω y`,
//! `Ω = [[0, I], [-I, 0]]`: pairings, skew-orthogonal complements, subspace
//! operations, Darboux checks and random symplectic maps.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::jets::MatrixJet;
use crate::subspace::{self, full_svd, numeric_rank, relative_residual, Tol};

/// The standard symplectic space of dimension `2 * half_dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticSpace {
    pub half_dim: usize,
}

impl SymplecticSpace {
    pub fn new(half_dim: usize) -> Self {
        SymplecticSpace { half_dim }
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn omega(&self) -> DMatrix<f64> {
        omega(self.half_dim)
    }

    /// The canonical vectors `e_α` (first half of the coordinates).
    pub fn e(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim()).columns(0, self.half_dim).into_owned()
    }

    /// The canonical vectors `f_α` (second half of the coordinates).
    pub fn f(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
            .columns(self.half_dim, self.half_dim)
            .into_owned()
    }
}

/// `Ω = [[0, I], [-I, 0]]`.
pub fn omega(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = 1.0;
        m[(n + i, i)] = -1.0;
    }
    m
}

/// `Ω X` without forming `Ω`.
pub fn apply_omega(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() / 2;
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    out.rows_mut(0, n).copy_from(&x.rows(n, n));
    out.rows_mut(n, n).copy_from(&(-x.rows(0, n)));
    out
}

fn apply_omega_jet(x: &MatrixJet) -> MatrixJet {
    MatrixJet::new(x.center, x.coeffs.iter().map(apply_omega).collect())
}

/// Matrix of pairings `ω(v1_i, v2_j) = V1ᵀ Ω V2`.
pub fn omega_pairing(v1: &DMatrix<f64>, v2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if v1.nrows() != v2.nrows() || !v1.nrows().is_multiple_of(2) {
        return Err(Error::ShapeMismatch(format!(
            "pairing vectors of dimension {} and {}",
            v1.nrows(),
            v2.nrows()
        )));
    }
    Ok(v1.transpose() * apply_omega(v2))
}

/// Jet version of [`omega_pairing`].
pub fn omega_pairing_jet(v1: &MatrixJet, v2: &MatrixJet) -> Result<MatrixJet> {
    if v1.rows != v2.rows || !v1.rows.is_multiple_of(2) {
        return Err(Error::ShapeMismatch(format!(
            "pairing vectors of dimension {} and {}",
            v1.rows, v2.rows
        )));
    }
    v1.transpose().checked_mul(&apply_omega_jet(v2))
}

/// Skew-orthogonal complement of a subspace jet: `kernel(Bᵀ Ω)`.
pub fn skew_complement_jet(basis: &MatrixJet, tol: Tol) -> Result<MatrixJet> {
    if basis.cols == 0 {
        return Ok(MatrixJet::identity(basis.center, basis.rows, basis.order()));
    }
    subspace::kernel(&apply_omega_jet(basis).transpose().scale(-1.0), tol)
}

/// A linear subspace of `R^{2n}` at a fixed time, stored by an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: DMatrix<f64>,
    pub rank_tol: f64,
}

impl Subspace {
    /// Column span of `m` at the given relative rank tolerance.
    pub fn span(m: &DMatrix<f64>, rank_tol: f64) -> Self {
        let dim = m.nrows();
        if m.ncols() == 0 {
            return Subspace {
                basis: DMatrix::zeros(dim, 0),
                rank_tol,
            };
        }
        let (u, s, _) = full_svd(m);
        let smax = s.first().cloned().unwrap_or(0.0);
        let r = s.iter().filter(|&&x| x > rank_tol * smax && x > 1e-13).count();
        Subspace {
            basis: u.columns(0, r).into_owned(),
            rank_tol,
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace::span(&DMatrix::zeros(ambient, 0), Tol::default().rank)
    }

    pub fn whole(ambient: usize) -> Self {
        Subspace::span(&DMatrix::identity(ambient, ambient), Tol::default().rank)
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut m = DMatrix::zeros(self.ambient_dim(), self.dim() + other.dim());
        m.columns_mut(0, self.dim()).copy_from(&self.basis);
        m.columns_mut(self.dim(), other.dim()).copy_from(&other.basis);
        Subspace::span(&m, self.rank_tol)
    }

    /// Intersection via orthogonal duality: `A ∩ B = (A^⊥ + B^⊥)^⊥`.
    pub fn intersection(&self, other: &Subspace) -> Subspace {
        self.orthogonal_complement()
            .sum(&other.orthogonal_complement())
            .orthogonal_complement()
    }

    pub fn orthogonal_complement(&self) -> Subspace {
        let dim = self.ambient_dim();
        if self.dim() == 0 {
            return Subspace::span(&DMatrix::identity(dim, dim), self.rank_tol);
        }
        let (u, _, _) = full_svd(&self.basis);
        Subspace {
            basis: u.columns(self.dim(), dim - self.dim()).into_owned(),
            rank_tol: self.rank_tol,
        }
    }

    /// `L^∠ = {v : ω(v, l) = 0 ∀ l ∈ L}`, i.e. the orthogonal complement of `Ω L`.
    pub fn skew_complement(&self) -> Subspace {
        Subspace {
            basis: apply_omega(&self.basis),
            rank_tol: self.rank_tol,
        }
        .orthogonal_complement()
    }

    /// Distance of `v`'s columns from the subspace (largest column residual).
    pub fn distance(&self, v: &DMatrix<f64>) -> f64 {
        let proj = &self.basis * (self.basis.transpose() * v);
        (v - proj).column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn contains(&self, v: &DMatrix<f64>, tol: f64) -> bool {
        self.distance(v) <= tol * v.amax().max(1.0)
    }

    pub fn same_span(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.distance(&other.basis) <= tol
            && other.distance(&self.basis) <= tol
    }

    pub fn is_isotropic(&self, tol: f64) -> bool {
        omega_pairing(&self.basis, &self.basis).unwrap().amax() <= tol
    }

    pub fn is_lagrangian(&self, tol: f64) -> bool {
        2 * self.dim() == self.ambient_dim() && self.is_isotropic(tol)
    }
}

/// Residual of the Darboux identities
/// `ω(E,E) = ω(F,F) = 0`, `ω(F,E) = I` for constant tuples.
pub fn darboux_residual(e: &DMatrix<f64>, f: &DMatrix<f64>) -> Result<f64> {
    if e.ncols() != f.ncols() || e.nrows() != 2 * e.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "Darboux tuples of shapes {:?} and {:?}",
            e.shape(),
            f.shape()
        )));
    }
    let n = e.ncols();
    let ee = omega_pairing(e, e)?.amax();
    let ff = omega_pairing(f, f)?.amax();
    let fe = (omega_pairing(f, e)? - DMatrix::<f64>::identity(n, n)).amax();
    Ok(ee.max(ff).max(fe))
}

pub fn is_darboux(e: &DMatrix<f64>, f: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(darboux_residual(e, f)? <= tol)
}

/// Darboux residual of jet tuples, maximized over all retained orders.
pub fn darboux_residual_jet(e: &MatrixJet, f: &MatrixJet) -> Result<f64> {
    if e.cols != f.cols || e.rows != 2 * e.cols {
        return Err(Error::ShapeMismatch(format!(
            "Darboux tuples of shapes {:?} and {:?}",
            e.shape(),
            f.shape()
        )));
    }
    let n = e.cols;
    let ee = omega_pairing_jet(e, e)?.max_abs();
    let ff = omega_pairing_jet(f, f)?.max_abs();
    let id = MatrixJet::identity(e.center, n, e.order().min(f.order()));
    let fe = (&omega_pairing_jet(f, e)? - &id).max_abs();
    Ok(ee.max(ff).max(fe))
}

pub fn is_darboux_jet(e: &MatrixJet, f: &MatrixJet, tol: f64) -> Result<bool> {
    Ok(darboux_residual_jet(e, f)? <= tol)
}

/// Velocity quadratic form `ω(X', X)` of a curve of Lagrangian planes given
/// by a frame jet `X` (columns span `Λ(t)`). Symmetric for Lagrangian input.
pub fn velocity_form(frame: &MatrixJet, tol: Tol) -> Result<MatrixJet> {
    let iso = omega_pairing_jet(frame, frame)?;
    let scale = subspace::product_scale(&frame.transpose(), frame);
    let rel = relative_residual(&iso, &scale);
    if rel > tol.consistency {
        return Err(Error::NonLagrangian(rel));
    }
    let q = omega_pairing_jet(&frame.derive()?, frame)?;
    let asym = q.antisymmetric_part();
    let rel = relative_residual(&asym, &subspace::product_scale(&frame.derive()?.transpose(), frame));
    if rel > tol.consistency {
        return Err(Error::NonLagrangian(rel));
    }
    Ok(q.symmetric_part())
}

/// Random symplectic matrix: a product of exponentials of Hamiltonian
/// matrices `Ω S` with random symmetric `S`, scaled so that the result is
/// well conditioned.
pub fn random_symplectic(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let dim = 2 * n;
    let om = omega(n);
    let mut s = DMatrix::identity(dim, dim);
    for _ in 0..3 {
        let a = DMatrix::from_fn(dim, dim, |_, _| normal.sample(&mut rng));
        let sym = (&a + a.transpose()) * (0.35 / (dim as f64).sqrt());
        s = (&om * sym).exp() * s;
    }
    s
}

/// `max |SᵀΩS − Ω|`.
pub fn symplectic_defect(s: &DMatrix<f64>) -> f64 {
    let n = s.nrows() / 2;
    (s.transpose() * apply_omega(s) - omega(n)).amax()
}

/// Numerical rank of the restriction of `ω` to a subspace.
pub fn omega_rank(basis: &DMatrix<f64>, rank_tol: f64) -> usize {
    numeric_rank(&omega_pairing(basis, basis).unwrap(), rank_tol)
}
