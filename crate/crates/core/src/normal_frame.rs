//! Normal moving frames: canonical complements and forms, horizontal
//! sections, filling, quasi-normal completion and normality checks.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagram::{CompatibleMapping, ReducedDiagram, Strictness, Superbox, Violation};
use crate::error::{Error, Result, StageExt};
use crate::flag::{analyze_flag, extension, CurveJet, FlagReport, Inertia};
use crate::jets::{jet_ode_solve, MatrixJet};
use crate::subspace::{self, product_scale, relative_residual, Tol};
use crate::symplectic::{darboux_residual_jet, omega_pairing_jet, skew_complement_jet};

/// Per-level output of the canonical-complement stage.
#[derive(Clone, Debug)]
pub struct LevelComplement {
    /// Basis of `V_i`.
    pub v: MatrixJet,
    /// Basis of `W_i`.
    pub w: MatrixJet,
    /// Canonical form `ω(v^{(p)}, v^{(p-1)})` in the basis `v`.
    pub q: MatrixJet,
    pub inertia: Inertia,
}

#[derive(Clone, Debug)]
pub struct CanonicalComplements {
    pub levels: Vec<LevelComplement>,
}

impl CanonicalComplements {
    /// `dim W_i` per level.
    pub fn w_dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.w.cols).collect()
    }
}

/// A normal moving frame and its normal mapping. Columns of `e` and `f` are
/// grouped by superbox in frame order (see [`ReducedDiagram::offset`]).
#[derive(Clone, Debug)]
pub struct NormalFrameResult {
    pub diagram: ReducedDiagram,
    pub inertia: Vec<Inertia>,
    pub e: MatrixJet,
    pub f: MatrixJet,
    pub r: CompatibleMapping,
}

impl NormalFrameResult {
    pub fn e_block(&self, a: Superbox) -> MatrixJet {
        self.e.columns(self.diagram.offset(a), self.diagram.size(a))
    }

    pub fn f_block(&self, a: Superbox) -> MatrixJet {
        self.f.columns(self.diagram.offset(a), self.diagram.size(a))
    }

    /// `I_{r+, r-}` of the level containing `a`.
    pub fn signature(&self, level: usize) -> DMatrix<f64> {
        self.inertia[level].signature()
    }

    /// Block-diagonal `n × n` matrix of level signatures, one block per superbox.
    pub fn signature_matrix(&self) -> DMatrix<f64> {
        block_signature(&self.diagram, &self.inertia)
    }

    /// Generator `M` of the structural equation `[E | F]' = [E | F] M`.
    pub fn generator(&self) -> MatrixJet {
        structural_generator(&self.diagram, &self.inertia, &self.r.matrix)
    }

    pub fn order(&self) -> usize {
        self.e.order().min(self.f.order()).min(self.r.order() + 1)
    }
}

pub(crate) fn block_signature(d: &ReducedDiagram, inertia: &[Inertia]) -> DMatrix<f64> {
    let n = d.half_dim();
    let mut s = DMatrix::zeros(n, n);
    for a in d.superboxes() {
        let o = d.offset(a);
        s.view_mut((o, o), (d.size(a), d.size(a)))
            .copy_from(&inertia[a.level].signature());
    }
    s
}

/// `M = [[L, R], [J, -S]]` with `L` the left shift of `E`, `J` the signature
/// on the first column, `S` the right shift of `F`.
pub(crate) fn structural_generator(
    d: &ReducedDiagram,
    inertia: &[Inertia],
    r: &MatrixJet,
) -> MatrixJet {
    let n = d.half_dim();
    let mut c = DMatrix::zeros(2 * n, 2 * n);
    for a in d.superboxes() {
        let (oa, s) = (d.offset(a), d.size(a));
        match d.left(a) {
            Some(la) => {
                let ol = d.offset(la);
                c.view_mut((ol, oa), (s, s)).fill_with_identity();
            }
            None => {
                c.view_mut((n + oa, oa), (s, s))
                    .copy_from(&inertia[a.level].signature());
            }
        }
        if let Some(ra) = d.right(a) {
            let or = d.offset(ra);
            let mut blk = c.view_mut((n + or, n + oa), (s, s));
            blk.fill_with_identity();
            blk.neg_mut();
        }
    }
    let coeffs = r
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, rk)| {
            let mut m = if k == 0 { c.clone() } else { DMatrix::zeros(2 * n, 2 * n) };
            m.view_mut((0, n), (n, n)).copy_from(rk);
            m
        })
        .collect();
    MatrixJet::new(r.center, coeffs)
}

/// Options for [`normal_frame_with`].
#[derive(Clone, Copy, Debug)]
pub struct NormalizeOptions {
    pub tol: Tol,
    /// Randomizes the admissible initial bases of every `V_i`. The resulting
    /// frame differs from the deterministic one by constant block matrices.
    pub gauge_seed: Option<u64>,
    /// Reject inputs whose jet order is below [`required_order`].
    pub check_order: bool,
    /// Run a second pass in coordinates adapted to the first pass's frame.
    pub refine: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            tol: Tol::default(),
            gauge_seed: None,
            check_order: true,
            refine: true,
        }
    }
}

/// Computes `V_i`, `W_i`, the canonical forms and the inertia indices.
pub fn canonical_complements(
    curve: &CurveJet,
    report: &FlagReport,
    tol: Tol,
) -> Result<CanonicalComplements> {
    if !report.condition_g {
        return Err(Error::ConditionG(format!(
            "velocity ranks {:?} do not match the diagram",
            report.g_ranks
        )));
    }
    let d = &report.reduced;
    let _ = curve;
    let mut levels = Vec::with_capacity(d.depth());
    let mut w_prev: Option<MatrixJet> = None;
    let mut expected_w = 0;
    for lvl in &d.levels {
        let p = lvl.p;
        let l = &report.contractions[p - 1];
        let v = match &w_prev {
            None => l.clone(),
            Some(w) => subspace::intersection(l, &skew_complement_jet(w, tol)?, tol)?,
        };
        if v.cols != lvl.r {
            return Err(Error::RankNotConstant(format!(
                "canonical complement has dimension {}, expected {}",
                v.cols, lvl.r
            )));
        }
        let ext = extension(l, 2 * p - 1, tol)?;
        let w = match &w_prev {
            None => ext,
            Some(w) => subspace::sum(w, &ext, tol)?,
        };
        expected_w += 2 * p * lvl.r;
        if w.cols != expected_w {
            return Err(Error::RankNotConstant(format!(
                "dim W = {}, expected {expected_w}",
                w.cols
            )));
        }
        let q = canonical_form(&v, p)?;
        let inertia = form_inertia(q.value(), tol)?;
        levels.push(LevelComplement { v, w: w.clone(), q, inertia });
        w_prev = Some(w);
    }
    Ok(CanonicalComplements { levels })
}

/// `ω(v^{(p)}, v^{(p-1)})`, symmetric for bases of `Λ_{(p-1)}`.
pub fn canonical_form(v: &MatrixJet, p: usize) -> Result<MatrixJet> {
    let hi = v.derive_n(p)?;
    let lo = v.derive_n(p - 1)?;
    let q = omega_pairing_jet(&hi, &lo)?;
    let rel = relative_residual(&q.antisymmetric_part(), &product_scale(&hi.transpose(), &lo));
    if rel > 1e-6 {
        return Err(Error::RankNotConstant(format!(
            "canonical form is not symmetric (residual {rel:.2e})"
        )));
    }
    Ok(q.symmetric_part())
}

fn form_inertia(q0: &DMatrix<f64>, tol: Tol) -> Result<Inertia> {
    let eig = SymmetricEigen::new(q0.clone()).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let floor = tol.rank.max(1e-10) * scale;
    if scale == 0.0 || eig.iter().any(|x| x.abs() <= floor) {
        return Err(Error::ConditionG(format!(
            "canonical form is degenerate (eigenvalues {:?})",
            eig.as_slice()
        )));
    }
    Ok(Inertia {
        plus: eig.iter().filter(|&&x| x > 0.0).count(),
        minus: eig.iter().filter(|&&x| x < 0.0).count(),
    })
}

/// Constant `G` with `Gᵀ Q G = I_{r+, r-}` by pivoted pseudo-Gram–Schmidt:
/// positive vectors first, each time taking the candidate of largest `|Q|`
/// norm in the required sign class.
pub fn pseudo_orthonormalize(q: &DMatrix<f64>, inertia: Inertia, pivot_tol: f64) -> Result<DMatrix<f64>> {
    let r = q.nrows();
    let scale = q.amax();
    let qf = |x: &DMatrix<f64>, y: &DMatrix<f64>| (x.transpose() * q * y)[(0, 0)];
    let mut cands: Vec<DMatrix<f64>> = (0..r)
        .map(|i| DMatrix::from_fn(r, 1, |k, _| (k == i) as i32 as f64))
        .collect();
    let mut out = DMatrix::zeros(r, r);
    for step in 0..r {
        let sign = if step < inertia.plus { 1.0 } else { -1.0 };
        let pick = |cands: &[DMatrix<f64>]| {
            cands
                .iter()
                .enumerate()
                .map(|(i, c)| (i, sign * qf(c, c)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
        };
        let (mut idx, mut val) = pick(&cands).unwrap();
        if val <= pivot_tol * scale {
            // No candidate has the required sign on its own: take the best
            // direction in their span, the top eigenvector of sign·Q there.
            let m = cands.len();
            let gram = DMatrix::from_fn(m, m, |i, j| sign * qf(&cands[i], &cands[j]));
            let eig = gram.symmetric_eigen();
            let top = eig.eigenvalues.imax();
            let w = eig.eigenvectors.column(top);
            if eig.eigenvalues[top] <= pivot_tol * scale {
                return Err(Error::ConditionG(
                    "pseudo-orthonormalization pivot below tolerance".into(),
                ));
            }
            let c = cands
                .iter()
                .zip(w.iter())
                .fold(DMatrix::zeros(r, 1), |acc, (c, wi)| acc + c * *wi);
            // Replace the candidate with the largest weight to keep the span.
            idx = w.iamax();
            val = sign * qf(&c, &c);
            cands[idx] = c;
        }
        let u = cands.remove(idx) / val.sqrt();
        for c in cands.iter_mut() {
            let k = sign * qf(c, &u);
            *c = &*c - &u * k;
        }
        out.set_column(step, &u.column(0));
    }
    Ok(out)
}

/// Flips columns of `g` so that the first significant coordinate of each
/// ambient vector `basis · g_k` is positive.
fn fix_signs(basis: &DMatrix<f64>, g: &mut DMatrix<f64>) {
    let v = basis * &*g;
    for k in 0..g.ncols() {
        let col = v.column(k);
        let thr = 1e-8 * col.amax();
        if let Some(x) = col.iter().find(|x| x.abs() > thr) {
            if *x < 0.0 {
                g.column_mut(k).neg_mut();
            }
        }
    }
}

/// Random constant element of `O(r+, r-)`: `diag(±1) · exp(I_s A)` with `A`
/// antisymmetric.
pub fn random_pseudo_orthogonal(inertia: Inertia, rng: &mut impl Rng) -> DMatrix<f64> {
    let r = inertia.size();
    let mut a = DMatrix::from_fn(r, r, |_, _| rng.random_range(-0.6..0.6));
    a = &a - a.transpose();
    let s = inertia.signature();
    let signs = DMatrix::from_fn(r, r, |i, j| {
        if i != j {
            0.0
        } else if rng.random_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    });
    signs * (&s * a).exp()
}

/// Normalizes a basis of `V_i` so that `ω(E^{(p)}, E^{(p-1)}) = I_{r+, r-}`.
fn normalize_section(
    v: &MatrixJet,
    q: &MatrixJet,
    inertia: Inertia,
    tol: Tol,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<MatrixJet> {
    let mut g0 = pseudo_orthonormalize(q.value(), inertia, tol.rank.max(1e-10))?;
    fix_signs(v.value(), &mut g0);
    if let Some(rng) = rng {
        g0 *= random_pseudo_orthogonal(inertia, rng);
    }
    let s = inertia.signature();
    let qt = q.left_mul(&g0.transpose()).right_mul(&g0);
    let h = qt.left_mul(&s).inv_sqrt_near_identity()?;
    Ok(&v.right_mul(&g0) * &h)
}

/// Corrects a normalized section by `U(t)` with `U(t0) = I` so that the
/// span of its `p`-th derivative is isotropic.
pub fn horizontal_section(e0: &MatrixJet, p: usize, inertia: Inertia) -> Result<MatrixJet> {
    if inertia.size() == 1 {
        return Ok(e0.clone());
    }
    let hi = e0.derive_n(p)?;
    let a = omega_pairing_jet(&hi, &hi)?;
    let rel = relative_residual(&a.symmetric_part(), &product_scale(&hi.transpose(), &hi));
    if rel > 1e-6 {
        return Err(Error::NotInvertible(format!(
            "ω(E^(p), E^(p)) is not antisymmetric (residual {rel:.2e})"
        )));
    }
    let gen = a.left_mul(&inertia.signature()).scale(-1.0 / (2 * p) as f64);
    let u = jet_ode_solve(&gen, &DMatrix::identity(inertia.size(), inertia.size()))?;
    Ok(e0 * &u)
}

/// Builds all `E_a` from the horizontal sections and `F` on the first column.
/// Returns per-superbox `E` and first-column `F` blocks.
pub fn fill_and_seed(
    d: &ReducedDiagram,
    inertia: &[Inertia],
    sections: &[MatrixJet],
) -> Result<(HashMap<Superbox, MatrixJet>, HashMap<Superbox, MatrixJet>)> {
    let mut e = HashMap::new();
    let mut f = HashMap::new();
    for (i, lvl) in d.levels.iter().enumerate() {
        let mut cur = sections[i].clone();
        for col in (0..lvl.p).rev() {
            if col + 1 < lvl.p {
                cur = cur.derive()?;
            }
            e.insert(Superbox::new(i, col), cur.clone());
        }
        let first = &e[&Superbox::new(i, 0)];
        f.insert(
            Superbox::new(i, 0),
            first.derive()?.right_mul(&inertia[i].signature()),
        );
    }
    Ok((e, f))
}

/// Completes `F` column by column so that the resulting frame is Darboux and
/// its mapping is quasi-normal, then reads off `R` from the structural equation.
pub fn quasi_normal_complete(
    d: &ReducedDiagram,
    e: &HashMap<Superbox, MatrixJet>,
    mut f: HashMap<Superbox, MatrixJet>,
) -> Result<(MatrixJet, MatrixJet, MatrixJet)> {
    for k in 0..d.width().saturating_sub(1) {
        let col = d.column(k);
        let movers: Vec<Superbox> = col.iter().copied().filter(|&a| d.right(a).is_some()).collect();
        let df: HashMap<Superbox, MatrixJet> = movers
            .iter()
            .map(|&a| Ok((a, f[&a].derive()?)))
            .collect::<Result<_>>()?;
        let known: Vec<Superbox> = (0..=k).flat_map(|c| d.column(c)).collect();
        let mut new = Vec::new();
        for &a in &movers {
            let fa1 = &df[&a];
            let mut acc = -fa1;
            for &b in &known {
                let rab = omega_pairing_jet(&f[&b], fa1)?;
                acc = &acc + &(&e[&b] * &rab);
            }
            for &other in &movers {
                let ro = d.right(other).unwrap();
                let rab = if other == a {
                    omega_pairing_jet(fa1, fa1)?.scale(-0.5)
                } else if other.level > a.level {
                    omega_pairing_jet(&df[&other], fa1)?.scale(-1.0)
                } else {
                    continue;
                };
                acc = &acc + &(&e[&ro] * &rab);
            }
            new.push((d.right(a).unwrap(), acc));
        }
        f.extend(new);
    }
    let boxes = d.superboxes();
    let e_all = MatrixJet::hcat(&boxes.iter().map(|a| &e[a]).collect::<Vec<_>>())?;
    let f_all = MatrixJet::hcat(&boxes.iter().map(|a| &f[a]).collect::<Vec<_>>())?;
    let mut g = Vec::with_capacity(boxes.len());
    for &a in &boxes {
        let fa1 = f[&a].derive()?;
        g.push(match d.right(a) {
            Some(ra) => &fa1 + &f[&ra],
            None => fa1,
        });
    }
    let g_all = MatrixJet::hcat(&g.iter().collect::<Vec<_>>())?;
    let r = omega_pairing_jet(&f_all, &g_all)?;
    Ok((e_all, f_all, r))
}

/// Jet-order loss of the full pipeline for a diagram, measured by running it
/// on the flat curve of that diagram.
fn pipeline_loss(d: &ReducedDiagram) -> Result<usize> {
    static CACHE: OnceLock<Mutex<HashMap<ReducedDiagram, usize>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&l) = cache.lock().unwrap().get(d) {
        return Ok(l);
    }
    let big = 6 * d.width() + 8;
    let inertia: Vec<Inertia> = d.levels.iter().map(|l| Inertia { plus: l.r, minus: 0 }).collect();
    let flat = crate::reconstruction::flat_frame(d, &inertia, 0.0, big)?;
    let opts = NormalizeOptions {
        check_order: false,
        refine: false,
        ..Default::default()
    };
    let res = normal_frame_with(&flat, opts)?;
    let loss = big - chain_identity_order(&res).min(res.r.order());
    cache.lock().unwrap().insert(d.clone(), loss);
    Ok(loss)
}

/// Smallest curve order the normalization accepts for a diagram: the
/// curvature must keep at least its value and first two derivatives.
pub fn required_order(d: &ReducedDiagram) -> Result<usize> {
    Ok((4 * d.width() + 2).max(pipeline_loss(d)? + 2))
}

/// Runs the full normalization with default options.
pub fn normal_frame(curve: &CurveJet) -> Result<NormalFrameResult> {
    normal_frame_with(curve, NormalizeOptions::default())
}

pub fn normal_frame_with(curve: &CurveJet, opts: NormalizeOptions) -> Result<NormalFrameResult> {
    let tol = opts.tol;
    let report = analyze_flag(curve, tol).stage("flag")?;
    if !opts.refine {
        return normal_frame_from_report(curve, &report, opts);
    }
    // First pass fixes a symplectic map T sending the normal frame at the
    // center to the canonical basis. The mapping is invariant under T, and
    // the second pass runs on coordinates adapted to the curve, where far
    // fewer digits cancel.
    let first = normal_frame_from_report(curve, &report, NormalizeOptions { gauge_seed: None, ..opts })?;
    let n = curve.half_dim();
    let x0 = MatrixJet::hcat(&[&first.e, &first.f])?.value().clone();
    let canon = canonical_frame(n);
    let inv = x0
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotInvertible("normal frame at the center".into()))?;
    let t = &canon * inv;
    let moved = curve.transform(&t);
    let report2 = analyze_flag(&moved, tol).stage("flag")?;
    let mut res = normal_frame_from_report(&moved, &report2, NormalizeOptions { check_order: false, ..opts })?;
    let back = x0 * canon.transpose();
    res.e = res.e.left_mul(&back);
    res.f = res.f.left_mul(&back);
    Ok(res)
}

/// `[E | F]` at the center for the canonical Darboux basis: `E` the
/// `f`-half, `F` the `e`-half.
pub fn canonical_frame(n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        x[(n + k, k)] = 1.0;
        x[(k, n + k)] = 1.0;
    }
    x
}

pub fn normal_frame_from_report(
    curve: &CurveJet,
    report: &FlagReport,
    opts: NormalizeOptions,
) -> Result<NormalFrameResult> {
    let tol = opts.tol;
    let d = &report.reduced;
    if opts.check_order {
        let req = required_order(d).stage("order")?;
        if curve.order() < req {
            return Err(Error::InsufficientOrder {
                required: req,
                available: curve.order(),
                stage: "normal_frame",
            });
        }
    }
    let report = match opts.gauge_seed {
        None => report.clone(),
        Some(seed) => regauge_contractions(report, seed),
    };
    let cc = canonical_complements(curve, &report, tol).stage("canonical_complements")?;
    let mut rng = opts.gauge_seed.map(|s| ChaCha8Rng::seed_from_u64(s ^ 0x9e37_79b9));
    let mut sections = Vec::with_capacity(d.depth());
    let inertia: Vec<Inertia> = cc.levels.iter().map(|l| l.inertia).collect();
    for (lvl, c) in d.levels.iter().zip(&cc.levels) {
        let e0 = normalize_section(&c.v, &c.q, c.inertia, tol, rng.as_mut()).stage("normalize")?;
        sections.push(horizontal_section(&e0, lvl.p, c.inertia).stage("horizontal_section")?);
    }
    let (e, f1) = fill_and_seed(d, &inertia, &sections).stage("fill")?;
    let (e, f, r) = quasi_normal_complete(d, &e, f1).stage("quasi_normal")?;
    let r = CompatibleMapping::from_matrix(d, r)?;
    Ok(NormalFrameResult {
        diagram: d.clone(),
        inertia,
        e,
        f,
        r,
    })
}

/// Replaces every contraction basis `B` by `B P(t)` with a random invertible
/// `P`; the spans, and hence every invariant, are unchanged.
fn regauge_contractions(report: &FlagReport, seed: u64) -> FlagReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = report.clone();
    for b in out.contractions.iter_mut() {
        let k = b.cols;
        if k == 0 {
            continue;
        }
        let mut coeffs = Vec::new();
        for j in 0..=b.order().min(3) {
            let mut m = DMatrix::from_fn(k, k, |_, _| rng.random_range(-0.3..0.3));
            if j == 0 {
                m += DMatrix::<f64>::identity(k, k);
            }
            coeffs.push(m);
        }
        let p = MatrixJet::from_polynomial(b.center, &coeffs, b.order());
        *b = &*b * &p;
    }
    out
}

/// Level gauges `U_i(t)` with `E^b_a = S E^a_a U_i` on every level, estimated
/// from the first superbox of each level. Constant for two normal frames of
/// curves related by `S`.
pub fn gauge_between(
    a: &NormalFrameResult,
    b: &NormalFrameResult,
    s: &DMatrix<f64>,
) -> Result<Vec<MatrixJet>> {
    if a.diagram != b.diagram {
        return Err(Error::InvalidDiagram(format!(
            "diagrams differ: {} vs {}",
            a.diagram, b.diagram
        )));
    }
    (0..a.diagram.depth())
        .map(|i| {
            let first = a.diagram.first(i);
            subspace::coordinates(&a.e_block(first).left_mul(s), &b.e_block(first))
        })
        .collect()
}

/// Mapping of the frame `E U`, `F I U I` for constant level gauges `U_i`:
/// `R(a, b) ↦ U_b⁻¹ R(a, b) I U_a I`.
pub fn apply_gauge(
    r: &CompatibleMapping,
    inertia: &[Inertia],
    u: &[DMatrix<f64>],
) -> Result<CompatibleMapping> {
    let d = &r.diagram;
    let n = d.half_dim();
    let mut ub = DMatrix::zeros(n, n);
    for a in d.superboxes() {
        let (o, k) = (d.offset(a), d.size(a));
        ub.view_mut((o, o), (k, k)).copy_from(&u[a.level]);
    }
    let inv = ub
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotInvertible("level gauge".into()))?;
    let sig = block_signature(d, inertia);
    let right = &sig * &ub * &sig;
    CompatibleMapping::from_matrix(d, r.matrix.left_mul(&inv).right_mul(&right))
}

/// Residuals of a normal frame.
#[derive(Clone, Debug, Serialize)]
pub struct NormalCheck {
    /// Relative violation of `ω(F, E) = I`, `ω(E, E) = ω(F, F) = 0`.
    pub darboux: f64,
    /// Relative residual of the structural equation.
    pub structural: f64,
    /// Relative size of `ω(X, E)` for a frame `X` of the curve (zero iff `E` spans `Λ`).
    pub span: f64,
    /// Largest `|ω(E_{a_i}, E_{a_j}^{(k)})|`, `1 ≤ k ≤ p_j - p_i + 1`, `j < i`.
    pub first_column_pairings: f64,
    /// Largest sign-insensitive mismatch between chain curvature blocks and
    /// the corresponding pairings of derivatives.
    pub chain_identity: f64,
    pub violations: Vec<Violation>,
}

impl NormalCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.darboux <= tol
            && self.structural <= tol
            && self.span <= tol
            && self.first_column_pairings <= tol
            && self.chain_identity <= tol
            && self.violations.is_empty()
    }

    pub fn worst(&self) -> f64 {
        [
            self.darboux,
            self.structural,
            self.span,
            self.first_column_pairings,
            self.chain_identity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Relative structural-equation residual of a frame `[E | F]` with generator `M`.
pub fn structural_residual(res: &NormalFrameResult) -> Result<f64> {
    let x = MatrixJet::hcat(&[&res.e, &res.f])?;
    let m = res.generator();
    let dx = x.derive()?;
    let rhs = &x * &m;
    let resid = &dx - &rhs;
    let ps = product_scale(&x, &m);
    let scale: Vec<f64> = (0..=resid.order())
        .map(|k| ps[k].max(dx.max_abs_at(k)))
        .collect();
    Ok(relative_residual(&resid, &scale))
}

fn scaled(a: &MatrixJet, b: &MatrixJet) -> f64 {
    let s = a.max_abs().max(b.max_abs()).max(1.0);
    (a - b).max_abs() / s
}

/// Order up to which the chain identity can be evaluated.
fn chain_identity_order(res: &NormalFrameResult) -> usize {
    let d = &res.diagram;
    let mut o = res.e.order();
    for i in 0..d.depth() {
        for j in 0..i {
            let gap = d.levels[j].p - d.levels[i].p;
            o = o.min(res.e.order().saturating_sub(gap + 2));
        }
    }
    o
}

/// Checks Darboux, structural equation, first-column pairings, the normal
/// pattern of `R` and the chain identity between `R` and derivative pairings.
pub fn verify_normal(res: &NormalFrameResult, curve: &CurveJet, tol: f64) -> Result<NormalCheck> {
    let d = &res.diagram;
    let darboux = {
        let raw = darboux_residual_jet(&res.e, &res.f)?;
        raw / res.e.max_abs().max(res.f.max_abs()).max(1.0).powi(2)
    };
    let structural = structural_residual(res)?;
    let span = {
        let w = omega_pairing_jet(&curve.frame, &res.e)?;
        relative_residual(&w, &product_scale(&curve.frame.transpose(), &res.e))
    };
    let mut first_column_pairings: f64 = 0.0;
    let mut chain_identity: f64 = 0.0;
    for i in 0..d.depth() {
        for j in 0..i {
            let gap = d.levels[j].p - d.levels[i].p;
            let ai = res.e_block(d.first(i));
            let aj = res.e_block(d.first(j));
            let mut der = aj.clone();
            let mut ders = vec![aj.clone()];
            for _ in 0..gap + 2 {
                der = der.derive()?;
                ders.push(der.clone());
            }
            for dk in ders.iter().take(gap + 2).skip(1) {
                let w = omega_pairing_jet(&ai, dk)?;
                first_column_pairings = first_column_pairings.max(w.max_abs() / ai.max_abs().max(1.0) / dk.max_abs().max(1.0));
            }
            if gap >= 1 {
                let chain = d.chain_pairs(i, j)?;
                let (sj, si) = (res.signature(j), res.signature(i));
                for s in 1..=gap {
                    let (x, y) = chain[s - 1];
                    let w = omega_pairing_jet(&ders[s + 2], &ai)?.left_mul(&sj).right_mul(&si);
                    let r = res.r.block(y, x);
                    let o = w.order().min(r.order());
                    let (w, r) = (w.truncate(o), r.truncate(o));
                    let mism = scaled(&r, &w).min(scaled(&r, &-&w));
                    chain_identity = chain_identity.max(mism);
                }
            }
        }
    }
    let rscale = res.r.matrix.max_abs().max(1.0);
    let violations = res.r.validate(Strictness::Normal, tol * rscale);
    Ok(NormalCheck {
        darboux,
        structural,
        span,
        first_column_pairings,
        chain_identity,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{Level, YoungDiagram};
    use crate::reconstruction::{flat_frame, frame_from_mapping};

    fn rd(levels: &[(usize, usize)]) -> ReducedDiagram {
        ReducedDiagram::from_levels(levels.iter().map(|&(p, r)| Level { p, r }).collect()).unwrap()
    }

    fn plus(d: &ReducedDiagram) -> Vec<Inertia> {
        d.levels.iter().map(|l| Inertia { plus: l.r, minus: 0 }).collect()
    }

    #[test]
    fn pseudo_orthonormal_basis() {
        let q = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, -3.0]);
        let inertia = Inertia { plus: 1, minus: 2 };
        let g = pseudo_orthonormalize(&q, inertia, 1e-10).unwrap();
        assert!((g.transpose() * &q * &g - inertia.signature()).amax() < 1e-12);
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let g = pseudo_orthonormalize(&q, Inertia { plus: 2, minus: 0 }, 1e-10).unwrap();
        assert!((g.transpose() * &q * &g - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn pseudo_orthonormal_basis_without_positive_diagonal() {
        // Indefinite, but no e_i or e_i ± e_j is positive.
        let q = DMatrix::from_row_slice(2, 2, &[-0.0434, 0.2289, 0.2289, -0.4578]);
        let inertia = Inertia { plus: 1, minus: 1 };
        let g = pseudo_orthonormalize(&q, inertia, 1e-10).unwrap();
        assert!((g.transpose() * &q * &g - inertia.signature()).amax() < 1e-12);
    }

    #[test]
    fn random_pseudo_orthogonal_preserves_signature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inertia = Inertia { plus: 2, minus: 1 };
        let o = random_pseudo_orthogonal(inertia, &mut rng);
        let s = inertia.signature();
        assert!((o.transpose() * &s * &o - s).amax() < 1e-12);
    }

    #[test]
    fn rotating_line_has_curvature_minus_one() {
        let d = rd(&[(1, 1)]);
        let r = MatrixJet::constant(0.0, DMatrix::from_element(1, 1, -1.0), 11);
        let curve = frame_from_mapping(&d, &plus(&d), &r).unwrap().0;
        let res = normal_frame(&curve).unwrap();
        assert!((res.r.matrix.value()[(0, 0)] + 1.0).abs() < 1e-10);
        for k in 1..=res.r.order() {
            assert!(res.r.matrix.max_abs_at(k) < 1e-10);
        }
        let chk = verify_normal(&res, &curve, 1e-8).unwrap();
        assert!(chk.passes(1e-8), "{chk:?}");
    }

    #[test]
    fn flat_curves_have_zero_curvature() {
        for levels in [vec![(1, 2)], vec![(2, 1)], vec![(2, 1), (1, 1)], vec![(3, 1), (1, 2)], vec![(3, 2), (2, 1), (1, 1)]] {
            let d = rd(&levels);
            let req = required_order(&d).unwrap();
            let curve = flat_frame(&d, &plus(&d), 0.0, req).unwrap();
            let res = normal_frame(&curve).unwrap();
            assert!(res.r.matrix.max_abs() < 1e-10, "{d}: {}", res.r.matrix.max_abs());
            let chk = verify_normal(&res, &curve, 1e-8).unwrap();
            assert!(chk.passes(1e-8), "{d}: {chk:?}");
            assert_eq!(res.inertia, plus(&d));
        }
    }

    #[test]
    fn required_order_for_two_columns_is_ten() {
        assert_eq!(required_order(&rd(&[(2, 1)])).unwrap(), 10);
        assert_eq!(required_order(&rd(&[(2, 1), (1, 1)])).unwrap(), 10);
        let short = flat_frame(&rd(&[(2, 1)]), &[Inertia { plus: 1, minus: 0 }], 0.0, 9).unwrap();
        let err = normal_frame(&short).unwrap_err();
        assert!(err.is_analyzability());
        assert!(err.to_string().contains("requires order ≥ 10"), "{err}");
    }

    #[test]
    fn horizontal_section_of_size_one_is_unchanged() {
        let e0 = MatrixJet::identity(0.0, 1, 4);
        let out = horizontal_section(&e0, 1, Inertia { plus: 1, minus: 0 }).unwrap();
        assert_eq!(out, e0);
    }

    #[test]
    fn young_of_flat_curve_matches() {
        let y = YoungDiagram::new(vec![2, 2, 1]).unwrap();
        let d = y.reduce();
        let c = flat_frame(&d, &plus(&d), 0.0, 8).unwrap();
        assert_eq!(analyze_flag(&c, Tol::default()).unwrap().young, y);
    }
}
