//! Flag analysis of a curve of Lagrangian planes: extensions, contractions,
//! the Young diagram, monotonicity, condition (G) and ambient reduction.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::diagram::{ReducedDiagram, YoungDiagram};
use crate::error::{Error, Result};
use crate::jets::MatrixJet;
use crate::subspace::{self, numeric_rank, product_scale, relative_residual, Tol};
use crate::symplectic::{
    apply_omega, omega_pairing, omega_pairing_jet, skew_complement_jet, velocity_form,
    SymplecticSpace, Subspace,
};

/// A curve of Lagrangian planes near `t0`, given by a `2n × n` frame jet whose
/// columns span `Λ(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveJet {
    pub frame: MatrixJet,
}

impl CurveJet {
    /// Validates shape, full rank at the center and isotropy at every order.
    pub fn new(frame: MatrixJet, tol: Tol) -> Result<Self> {
        let (rows, cols) = frame.shape();
        if rows != 2 * cols || cols == 0 {
            return Err(Error::ShapeMismatch(format!(
                "curve frame must be 2n x n, got {rows}x{cols}"
            )));
        }
        if !frame.is_finite() {
            return Err(Error::ShapeMismatch("curve frame has non-finite coefficients".into()));
        }
        if numeric_rank(frame.value(), tol.rank) != cols {
            return Err(Error::RankNotConstant("curve frame is rank deficient at the center".into()));
        }
        let iso = omega_pairing_jet(&frame, &frame)?;
        let rel = relative_residual(&iso, &product_scale(&frame.transpose(), &frame));
        if rel > tol.consistency {
            return Err(Error::NonLagrangian(rel));
        }
        Ok(CurveJet { frame })
    }

    pub(crate) fn new_unchecked(frame: MatrixJet) -> Self {
        CurveJet { frame }
    }

    pub fn half_dim(&self) -> usize {
        self.frame.cols
    }

    pub fn space(&self) -> SymplecticSpace {
        SymplecticSpace::new(self.half_dim())
    }

    pub fn center(&self) -> f64 {
        self.frame.center
    }

    pub fn order(&self) -> usize {
        self.frame.order()
    }

    /// Image under a linear map of the ambient space.
    pub fn transform(&self, s: &DMatrix<f64>) -> CurveJet {
        CurveJet {
            frame: self.frame.left_mul(s),
        }
    }

    /// The curve `t ↦ Λ(2 t0 - t)`.
    pub fn reversed(&self) -> CurveJet {
        CurveJet {
            frame: self.frame.reflect(),
        }
    }

    pub fn truncate(&self, order: usize) -> CurveJet {
        CurveJet {
            frame: self.frame.truncate(order),
        }
    }

    /// Re-expands the truncated frame about another center.
    pub fn recenter(&self, center: f64) -> CurveJet {
        CurveJet {
            frame: self.frame.recenter(center),
        }
    }
}

/// Sign behaviour of the velocity form near the center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    Indefinite,
}

/// Positive and negative inertia indices of a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub plus: usize,
    pub minus: usize,
}

impl Inertia {
    pub fn size(&self) -> usize {
        self.plus + self.minus
    }

    /// `I_{r+, r-}` as a diagonal matrix.
    pub fn signature(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size(), self.size(), |i, j| {
            if i != j {
                0.0
            } else if i < self.plus {
                1.0
            } else {
                -1.0
            }
        })
    }
}

/// Result of the flag analysis.
#[derive(Clone, Debug)]
pub struct FlagReport {
    pub young: YoungDiagram,
    pub reduced: ReducedDiagram,
    /// `dim Λ^{(i)}` for `i = 0..=p_1`.
    pub extension_dims: Vec<usize>,
    /// `dim Λ_{(i)}` for `i = 0..=p_1`.
    pub contraction_dims: Vec<usize>,
    pub monotonicity: Monotonicity,
    /// Radius around the center on which monotonicity was certified.
    pub trust_radius: f64,
    pub condition_g: bool,
    /// Per level; `None` when condition (G) fails.
    pub inertia: Option<Vec<Inertia>>,
    /// Ranks of the velocity form on `(Λ_{(p_i-1)})^{(p_i-1)}`, per level.
    pub g_ranks: Vec<usize>,
    /// Bases of the contractions `Λ_{(i)}`, `i = 0..=p_1`.
    pub contractions: Vec<MatrixJet>,
    /// Bases of the extensions `Λ^{(i)}`, `i = 0..=p_1`.
    pub extensions: Vec<MatrixJet>,
    /// Largest `|ω(v, w)|` for `v ∈ Λ_{(i)}`, `w ∈ Λ^{(i)}` (orthonormal bases at `t0`).
    pub duality_residual: f64,
}

/// `i`-th extension: span of the frame and its first `i` derivatives.
pub fn extension(basis: &MatrixJet, i: usize, tol: Tol) -> Result<MatrixJet> {
    if basis.order() < i {
        return Err(Error::InsufficientOrder {
            required: i,
            available: basis.order(),
            stage: "extension",
        });
    }
    let mut parts = vec![basis.clone()];
    for k in 1..=i {
        parts.push(parts[k - 1].derive()?);
    }
    let refs: Vec<&MatrixJet> = parts.iter().collect();
    subspace::column_basis(&MatrixJet::hcat(&refs)?, tol)
}

/// First contraction of a subspace curve: vectors admitting a section whose
/// derivative stays in the subspace.
pub fn contract_once(basis: &MatrixJet, tol: Tol) -> Result<MatrixJet> {
    if basis.cols == 0 {
        return Ok(basis.truncate(basis.order().saturating_sub(1)));
    }
    let d = basis.derive()?;
    let b = basis.truncate(d.order());
    let k = subspace::kernel(&MatrixJet::hcat(&[&d, &-&b])?, tol)?;
    let c = k.rows_range(0, basis.cols);
    if c.cols == 0 {
        return Ok(MatrixJet::zeros(b.center, b.rows, 0, b.order()));
    }
    subspace::column_basis(&(&b * &c), tol)
}

/// `i`-th contraction, computed recursively.
pub fn contraction(curve: &CurveJet, i: usize, tol: Tol) -> Result<MatrixJet> {
    let mut b = curve.frame.clone();
    for _ in 0..i {
        b = contract_once(&b, tol)?;
    }
    Ok(b)
}

fn orthonormal(m: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    Subspace::span(m, rank_tol).basis
}

/// Signs of the eigenvalues of a symmetric matrix relative to its scale.
fn inertia_of(m: &DMatrix<f64>, rel_tol: f64) -> (usize, usize, usize) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let thr = rel_tol * scale.max(f64::MIN_POSITIVE);
    let pos = eig.iter().filter(|&&x| x > thr).count();
    let neg = eig.iter().filter(|&&x| x < -thr).count();
    (pos, neg, eig.len() - pos - neg)
}

fn sign_class(q: &DMatrix<f64>, rel_tol: f64) -> Monotonicity {
    let (pos, neg, _) = inertia_of(q, rel_tol);
    match (pos, neg) {
        (_, 0) => Monotonicity::Nondecreasing,
        (0, _) => Monotonicity::Nonincreasing,
        _ => Monotonicity::Indefinite,
    }
}

/// Classifies monotonicity from the velocity-form jet: sign class at the
/// center, confirmed at recentred sample points within a trust radius.
pub fn classify_monotonicity(q: &MatrixJet, rel_tol: f64) -> (Monotonicity, f64) {
    let at_center = sign_class(q.value(), rel_tol);
    let q0 = q.max_abs_at(0).max(f64::MIN_POSITIVE);
    let mut rho = f64::INFINITY;
    for k in 1..=q.order() {
        let qk = q.max_abs_at(k);
        if qk > 0.0 {
            rho = rho.min((q0 / qk).powf(1.0 / k as f64));
        }
    }
    if !rho.is_finite() {
        rho = 1.0;
    }
    rho *= 0.5;
    if at_center == Monotonicity::Indefinite {
        return (at_center, rho);
    }
    for _ in 0..12 {
        let agree = [-1.0, -0.5, 0.5, 1.0].iter().all(|s| {
            let qs = q.eval(q.center + s * rho);
            let c = sign_class(&qs, rel_tol.max(1e-8));
            c == at_center
        });
        if agree {
            return (at_center, rho);
        }
        rho *= 0.5;
    }
    (Monotonicity::Indefinite, rho)
}

/// Computes the flag, Young diagram, monotonicity and condition (G).
pub fn analyze_flag(curve: &CurveJet, tol: Tol) -> Result<FlagReport> {
    let n = curve.half_dim();
    let q = velocity_form(&curve.frame, tol)?;
    if numeric_rank(q.value(), tol.rank) == 0 && q.value().amax() <= 1e-13 * curve.frame.max_abs() {
        return Err(Error::ZeroVelocity);
    }

    // Extensions until the dimension stalls.
    let mut extensions = vec![subspace::column_basis(&curve.frame, tol)?];
    let mut dims = vec![n];
    loop {
        let prev = extensions.last().unwrap();
        if prev.order() == 0 {
            return Err(Error::InsufficientOrder {
                required: dims.len() + 1,
                available: curve.order(),
                stage: "extension",
            });
        }
        let d = prev.derive()?;
        let next = subspace::column_basis(&MatrixJet::hcat(&[&prev.truncate(d.order()), &d])?, tol)?;
        let dim = next.cols;
        if dim == *dims.last().unwrap() {
            break;
        }
        dims.push(dim);
        extensions.push(next);
        if dim == 2 * n {
            break;
        }
    }
    let full = *dims.last().unwrap();
    if full < 2 * n {
        if dims.len() == 1 {
            return Err(Error::ZeroVelocity);
        }
        return Err(Error::IncompleteFlag {
            dim: full,
            ambient: 2 * n,
        });
    }
    let columns: Vec<usize> = dims.windows(2).map(|w| w[1] - w[0]).collect();
    if columns.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::RankNotConstant(format!(
            "extension increments {columns:?} are not nonincreasing"
        )));
    }
    let young = YoungDiagram::from_columns(&columns)?;
    let reduced = young.reduce();
    let p1 = reduced.width();

    // Contractions Λ_{(0)} ⊃ ... ⊃ Λ_{(p1)} = 0.
    let mut contractions = vec![curve.frame.clone()];
    for _ in 0..p1 {
        let next = contract_once(contractions.last().unwrap(), tol)?;
        contractions.push(next);
    }
    let contraction_dims: Vec<usize> = contractions.iter().map(|c| c.cols).collect();

    // Duality at the center.
    let mut duality: f64 = 0.0;
    for i in 0..=p1 {
        let c = orthonormal(contractions[i].value(), tol.rank);
        let e = orthonormal(extensions[i].value(), tol.rank);
        if c.ncols() > 0 && e.ncols() > 0 {
            duality = duality.max(omega_pairing(&c, &e)?.amax());
        }
        if contraction_dims[i] + dims[i] != 2 * n {
            return Err(Error::RankNotConstant(format!(
                "dim Λ_({i}) + dim Λ^({i}) = {} ≠ {}",
                contraction_dims[i] + dims[i],
                2 * n
            )));
        }
    }

    let (monotonicity, trust_radius) = classify_monotonicity(&q, tol.rank.max(1e-10));

    // Condition (G): rank and inertia of the velocity form on the
    // (p_i - 1)-th extension of Λ_{(p_i - 1)}.
    let x0 = curve.frame.value();
    let x0_pinv = x0
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::NotInvertible(e.to_string()))?;
    let q0 = q.value();
    let mut g_ranks = Vec::new();
    let mut gammas = Vec::new();
    let mut expected = 0;
    let mut condition_g = true;
    for (i, level) in reduced.levels.iter().enumerate() {
        expected += level.r;
        let sub = extension(&contractions[level.p - 1], level.p - 1, tol)?;
        let coords = &x0_pinv * sub.value();
        let form = coords.transpose() * q0 * &coords;
        let (pos, neg, _) = inertia_of(&form, 1e-8);
        g_ranks.push(pos + neg);
        gammas.push((pos, neg));
        if pos + neg != expected && i + 1 < reduced.depth() {
            condition_g = false;
        }
    }
    let inertia = if condition_g && g_ranks.last() == Some(&n.min(expected)) {
        let mut prev = (0, 0);
        let mut out = Vec::new();
        for (lvl, &(p, m)) in reduced.levels.iter().zip(&gammas) {
            let ri = Inertia {
                plus: p.saturating_sub(prev.0),
                minus: m.saturating_sub(prev.1),
            };
            if ri.size() != lvl.r {
                condition_g = false;
            }
            out.push(ri);
            prev = (p, m);
        }
        condition_g.then_some(out)
    } else {
        None
    };

    Ok(FlagReport {
        young,
        reduced,
        extension_dims: dims,
        contraction_dims,
        monotonicity,
        trust_radius,
        condition_g,
        inertia,
        g_ranks,
        contractions,
        extensions,
        duality_residual: duality,
    })
}

/// Quotients the curve by `V^∠`, where `V = Λ^{(p)}` is the stalled extension,
/// producing a curve in the symplectic space `V / V^∠` whose flag is full.
/// Returns the input unchanged when the flag already fills the space.
pub fn reduce_ambient(curve: &CurveJet, tol: Tol) -> Result<CurveJet> {
    let n = curve.half_dim();
    let mut v = subspace::column_basis(&curve.frame, tol)?;
    loop {
        let d = v.derive()?;
        let next = subspace::column_basis(&MatrixJet::hcat(&[&v.truncate(d.order()), &d])?, tol)?;
        if next.cols == v.cols {
            break;
        }
        v = next;
        if v.cols == 2 * n {
            return Ok(curve.clone());
        }
    }
    if v.cols == n {
        return Err(Error::ZeroVelocity);
    }
    // V must be constant: its skew complement at t0 must annihilate V(t).
    let vperp_jet = skew_complement_jet(&v, tol)?;
    let drift = (1..=vperp_jet.order())
        .map(|k| vperp_jet.max_abs_at(k))
        .fold(0.0, f64::max);
    let v0 = Subspace::span(v.value(), tol.rank);
    let vs = v0.skew_complement();
    let moved = (0..=v.order())
        .map(|k| {
            let c = v.coeffs[k].clone();
            omega_pairing(&vs.basis, &c).unwrap().amax()
        })
        .fold(0.0, f64::max);
    if moved > tol.consistency * v.max_abs().max(1.0) {
        return Err(Error::RankNotConstant(format!(
            "extension V is not constant (drift {drift:.2e}, ω-leak {moved:.2e})"
        )));
    }
    // Complement C of V^∠ inside V, then a symplectic basis of C.
    let c = v0.intersection(&vs.orthogonal_complement());
    let m = c.dim() / 2;
    let (e, f) = symplectic_basis(&c.basis)?;
    // Quotient coordinates of x ∈ V: (ω(x, f_k), -ω(x, e_k)).
    let coords = |x: &DMatrix<f64>| {
        let a = omega_pairing(&f, x).unwrap() * -1.0;
        let b = omega_pairing(&e, x).unwrap();
        let mut out = DMatrix::zeros(2 * m, x.ncols());
        out.rows_mut(0, m).copy_from(&a);
        out.rows_mut(m, m).copy_from(&b);
        out
    };
    let projected = MatrixJet::new(
        curve.center(),
        curve.frame.coeffs.iter().map(coords).collect(),
    );
    let basis = subspace::column_basis(&projected, tol)?;
    CurveJet::new(basis, tol)
}

/// Symplectic Gram–Schmidt: returns `(E, F)` spanning the input with
/// `ω(E_k, F_l) = δ_kl`, `ω(E, E) = ω(F, F) = 0`.
pub fn symplectic_basis(basis: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let dim = basis.nrows();
    let mut rest: Vec<DMatrix<f64>> = (0..basis.ncols())
        .map(|j| basis.columns(j, 1).into_owned())
        .collect();
    let mut es = Vec::new();
    let mut fs = Vec::new();
    let w = |x: &DMatrix<f64>, y: &DMatrix<f64>| (x.transpose() * apply_omega(y))[(0, 0)];
    while !rest.is_empty() {
        let u = rest.remove(0);
        let (idx, val) = rest
            .iter()
            .enumerate()
            .map(|(i, v)| (i, w(&u, v)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .ok_or_else(|| Error::NotInvertible("odd-dimensional symplectic complement".into()))?;
        if val.abs() < 1e-12 {
            return Err(Error::NotInvertible("degenerate symplectic complement".into()));
        }
        let v = rest.remove(idx) / val;
        for x in rest.iter_mut() {
            let a = w(x, &v);
            let b = w(x, &u);
            *x = &*x - &u * a + &v * b;
        }
        es.push(u);
        fs.push(v);
    }
    let pack = |vs: &[DMatrix<f64>]| {
        let mut m = DMatrix::zeros(dim, vs.len());
        for (j, v) in vs.iter().enumerate() {
            m.set_column(j, &v.column(0));
        }
        m
    };
    Ok((pack(&es), pack(&fs)))
}
