//! Curves with prescribed diagram, inertia and curvature, obtained by
//! series-integrating the structural equation, and the round-trip oracle.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagram::{CompatibleMapping, ReducedDiagram, Strictness, Superbox, YoungDiagram};
use crate::error::{Error, Result, StageExt};
use crate::flag::{CurveJet, Inertia};
use crate::jets::{jet_ode_solve, MatrixJet};
use crate::normal_frame::{
    apply_gauge, canonical_frame, gauge_between, normal_frame_with, structural_generator, NormalFrameResult,
    NormalizeOptions,
};
use crate::subspace::Tol;
use crate::symplectic::symplectic_defect;

/// Polynomial coefficients of one curvature block; coefficient `k` is a
/// list of rows. Missing higher coefficients are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrowJet {
    pub coeffs: Vec<Vec<Vec<f64>>>,
}

impl ArrowJet {
    pub fn constant(m: &DMatrix<f64>) -> Self {
        ArrowJet::from_jet(&MatrixJet::constant(0.0, m.clone(), 0))
    }

    pub fn from_jet(j: &MatrixJet) -> Self {
        ArrowJet {
            coeffs: j
                .coeffs
                .iter()
                .map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
        }
    }

    /// Zero-padded (or truncated) jet of the given order and shape.
    pub fn to_jet(&self, center: f64, rows: usize, cols: usize, order: usize) -> Result<MatrixJet> {
        let mut coeffs = Vec::with_capacity(order + 1);
        for k in 0..=order {
            match self.coeffs.get(k) {
                None => coeffs.push(DMatrix::zeros(rows, cols)),
                Some(c) => {
                    if c.len() != rows || c.iter().any(|r| r.len() != cols) {
                        return Err(Error::ShapeMismatch(format!(
                            "arrow coefficient {k} must be {rows}x{cols}"
                        )));
                    }
                    coeffs.push(DMatrix::from_fn(rows, cols, |i, j| c[i][j]));
                }
            }
        }
        Ok(MatrixJet::new(center, coeffs))
    }
}

/// Curvature block `R(a, b)`, of shape `size(b) × size(a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    pub a: Superbox,
    pub b: Superbox,
    pub jet: ArrowJet,
}

/// Diagram, inertia indices and curvature blocks on essential pairs.
/// Blocks not listed are zero; listing `(a, b)` also fixes `(b, a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSpec {
    pub diagram: YoungDiagram,
    pub inertia: Vec<(usize, usize)>,
    pub arrows: Vec<Arrow>,
}

impl CurvatureSpec {
    /// All-zero curvature with positive inertia.
    pub fn flat(diagram: YoungDiagram) -> Self {
        let inertia = diagram.reduce().levels.iter().map(|l| (l.r, 0)).collect();
        CurvatureSpec {
            diagram,
            inertia,
            arrows: Vec::new(),
        }
    }

    pub fn reduced(&self) -> ReducedDiagram {
        self.diagram.reduce()
    }

    pub fn level_inertia(&self) -> Vec<Inertia> {
        self.inertia
            .iter()
            .map(|&(plus, minus)| Inertia { plus, minus })
            .collect()
    }

    /// Lists every violation; empty when the spec is admissible.
    pub fn violations(&self) -> Vec<String> {
        let d = self.reduced();
        let mut out = Vec::new();
        if self.inertia.len() != d.depth() {
            out.push(format!(
                "inertia lists {} levels, diagram has {}",
                self.inertia.len(),
                d.depth()
            ));
        }
        for (i, (&(p, m), l)) in self.inertia.iter().zip(&d.levels).enumerate() {
            if p + m != l.r {
                out.push(format!("level {}: r+ + r- = {} but r = {}", i + 1, p + m, l.r));
            }
        }
        let ess = d.essential_pairs();
        for ar in &self.arrows {
            if !d.contains(ar.a) || !d.contains(ar.b) {
                out.push(format!("arrow ({},{}) is outside the diagram", ar.a, ar.b));
                continue;
            }
            if !ess.contains(&(ar.a, ar.b)) {
                out.push(format!("arrow ({},{}) is not an essential pair", ar.a, ar.b));
            }
            let (rows, cols) = (d.size(ar.b), d.size(ar.a));
            let j = match ar.jet.to_jet(0.0, rows, cols, ar.jet.coeffs.len().saturating_sub(1)) {
                Ok(j) => j,
                Err(e) => {
                    out.push(format!("arrow ({},{}): {e}", ar.a, ar.b));
                    continue;
                }
            };
            if !j.is_finite() {
                out.push(format!("arrow ({},{}) has non-finite entries", ar.a, ar.b));
            }
            if ar.a == ar.b && j.antisymmetric_part().max_abs() > 1e-12 {
                out.push(format!("diagonal arrow ({},{}) is not symmetric", ar.a, ar.b));
            }
            if (d.right(ar.a) == Some(ar.b) || d.right(ar.b) == Some(ar.a))
                && j.symmetric_part().max_abs() > 1e-12 {
                    out.push(format!("arrow ({},{}) is not antisymmetric", ar.a, ar.b));
                }
        }
        for (k, x) in self.arrows.iter().enumerate() {
            for y in &self.arrows[k + 1..] {
                let same = x.a == y.a && x.b == y.b;
                let transposed = x.a == y.b && x.b == y.a;
                if !(same || transposed) || !d.contains(x.a) || !d.contains(x.b) {
                    continue;
                }
                let n = x.jet.coeffs.len().max(y.jet.coeffs.len()).saturating_sub(1);
                let (Ok(jx), Ok(jy)) = (
                    x.jet.to_jet(0.0, d.size(x.b), d.size(x.a), n),
                    y.jet.to_jet(0.0, d.size(y.b), d.size(y.a), n),
                ) else {
                    continue;
                };
                let jy = if transposed { jy.transpose() } else { jy };
                if (&jx - &jy).max_abs() > 1e-12 {
                    out.push(format!("arrows ({},{}) and ({},{}) conflict", x.a, x.b, y.a, y.b));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(v))
        }
    }

    /// The symmetric mapping with the listed blocks, as polynomial jets of
    /// the given order.
    pub fn to_mapping(&self, center: f64, order: usize) -> Result<CompatibleMapping> {
        self.validate()?;
        let d = self.reduced();
        let mut m = CompatibleMapping::zeros(&d, center, order);
        for ar in &self.arrows {
            let j = ar.jet.to_jet(center, d.size(ar.b), d.size(ar.a), order)?;
            m.set_block(ar.a, ar.b, &j)?;
        }
        let bad = m.validate(Strictness::Normal, 1e-12);
        if !bad.is_empty() {
            return Err(Error::InvalidSpec(
                bad.iter()
                    .map(|v| format!("{:?} at ({},{})", v.kind, v.a, v.b))
                    .collect(),
            ));
        }
        Ok(m)
    }

    /// Spec listing the essential blocks `(a, b)`, `a ≤ b`, of a mapping.
    pub fn from_mapping(r: &CompatibleMapping, inertia: &[Inertia]) -> Self {
        let d = &r.diagram;
        let arrows = d
            .essential_pairs()
            .into_iter()
            .filter(|(a, b)| a <= b)
            .map(|(a, b)| Arrow {
                a,
                b,
                jet: ArrowJet::from_jet(&r.block(a, b)),
            })
            .collect();
        CurvatureSpec {
            diagram: d.to_young(),
            inertia: inertia.iter().map(|i| (i.plus, i.minus)).collect(),
            arrows,
        }
    }
}

/// Integrates the structural equation with mapping `r` from the canonical
/// Darboux basis at the center: `E(t0)` is the `f`-half and `F(t0)` the
/// `e`-half, in superbox order. The curve has order `ord(r) + 1`.
pub fn frame_from_mapping(
    d: &ReducedDiagram,
    inertia: &[Inertia],
    r: &MatrixJet,
) -> Result<(CurveJet, NormalFrameResult)> {
    let n = d.half_dim();
    if r.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!("mapping must be {n}x{n}")));
    }
    if inertia.len() != d.depth() || inertia.iter().zip(&d.levels).any(|(i, l)| i.size() != l.r) {
        return Err(Error::InvalidSpec(vec!["inertia does not match the diagram".into()]));
    }
    let m = structural_generator(d, inertia, r);
    let x0 = canonical_frame(n);
    let xt = jet_ode_solve(&m.transpose(), &x0.transpose())?;
    let x = xt.transpose();
    let e = x.columns(0, n);
    let f = x.columns(n, n);
    let curve = CurveJet::new(e.clone(), Tol::default())?;
    let res = NormalFrameResult {
        diagram: d.clone(),
        inertia: inertia.to_vec(),
        e,
        f,
        r: CompatibleMapping::from_matrix(d, r.clone())?,
    };
    Ok((curve, res))
}

/// The curve with zero curvature.
pub fn flat_frame(d: &ReducedDiagram, inertia: &[Inertia], center: f64, order: usize) -> Result<CurveJet> {
    let n = d.half_dim();
    let r = MatrixJet::zeros(center, n, n, order.saturating_sub(1));
    Ok(frame_from_mapping(d, inertia, &r)?.0)
}

/// Curve with the prescribed curvature, as a jet of the given order at `center`.
pub fn reconstruct(spec: &CurvatureSpec, center: f64, order: usize) -> Result<(CurveJet, NormalFrameResult)> {
    if order == 0 {
        return Err(Error::InsufficientOrder {
            required: 1,
            available: 0,
            stage: "reconstruct",
        });
    }
    let m = spec.to_mapping(center, order - 1)?;
    frame_from_mapping(&spec.reduced(), &spec.level_inertia(), &m.matrix)
}

/// Largest mismatch between two mappings after aligning the level gauges
/// estimated from the frames; `s` maps the curve of `a` to that of `b`.
pub fn mapping_mismatch(a: &NormalFrameResult, b: &NormalFrameResult, s: &DMatrix<f64>) -> Result<f64> {
    let u = gauge_between(a, b, s)?;
    let u0: Vec<DMatrix<f64>> = u.iter().map(|j| j.value().clone()).collect();
    let ra = apply_gauge(&a.r, &a.inertia, &u0)?;
    let o = ra.order().min(b.r.order());
    let scale = ra.matrix.max_abs().max(1.0);
    Ok((&ra.matrix.truncate(o) - &b.r.matrix.truncate(o)).max_abs() / scale)
}

/// Result of [`spec_roundtrip`] and [`roundtrip`].
#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    /// Relative mismatch of the curvature after gauge alignment.
    pub curvature: f64,
    /// Relative mismatch between the matched frames at every order.
    pub frame: f64,
    /// Symplectic defect of the matching map.
    pub symplectic_defect: f64,
    /// Largest deviation of the gauge from a constant.
    pub gauge_drift: f64,
}

impl RoundTrip {
    pub fn worst(&self) -> f64 {
        self.curvature.max(self.frame).max(self.symplectic_defect).max(self.gauge_drift)
    }
}

fn gauge_drift(u: &[MatrixJet]) -> f64 {
    u.iter()
        .flat_map(|j| (1..=j.order()).map(move |k| j.max_abs_at(k)))
        .fold(0.0, f64::max)
}

/// Reconstructs the spec and analyzes the result; compares recovered and
/// prescribed curvature up to the constant level gauge.
pub fn spec_roundtrip(spec: &CurvatureSpec, center: f64, order: usize, opts: NormalizeOptions) -> Result<RoundTrip> {
    let (curve, truth) = reconstruct(spec, center, order).stage("reconstruct")?;
    let found = normal_frame_with(&curve, opts)?;
    match_frames(&truth, &found, &DMatrix::identity(2 * curve.half_dim(), 2 * curve.half_dim()))
}

/// Matches two normal frames of curves related by `S` (`b` from `S·curve_a`):
/// gauge, curvature and frame agreement.
pub fn match_frames(a: &NormalFrameResult, b: &NormalFrameResult, s: &DMatrix<f64>) -> Result<RoundTrip> {
    let u = gauge_between(a, b, s)?;
    let curvature = mapping_mismatch(a, b, s)?;
    let mut frame: f64 = 0.0;
    for (i, ui) in u.iter().enumerate() {
        for c in 0..a.diagram.levels[i].p {
            let bx = Superbox::new(i, c);
            let lhs = a.e_block(bx).left_mul(s).right_mul(ui.value());
            let rhs = b.e_block(bx);
            let o = lhs.order().min(rhs.order());
            let scale = rhs.max_abs().max(1.0);
            frame = frame.max((&lhs.truncate(o) - &rhs.truncate(o)).max_abs() / scale);
        }
    }
    Ok(RoundTrip {
        curvature,
        frame,
        symplectic_defect: symplectic_defect(s),
        gauge_drift: gauge_drift(&u),
    })
}

/// Analyzes a curve, rebuilds it from its curvature, and matches the two
/// normal frames at the center by a linear map `S`.
pub fn roundtrip(curve: &CurveJet, opts: NormalizeOptions) -> Result<RoundTrip> {
    let res = normal_frame_with(curve, opts)?;
    let (_, rebuilt) = frame_from_mapping(&res.diagram, &res.inertia, &res.r.matrix).stage("reconstruct")?;
    let xa = MatrixJet::hcat(&[&res.e, &res.f])?;
    let xb = MatrixJet::hcat(&[&rebuilt.e, &rebuilt.f])?;
    let inv = xa
        .value()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotInvertible("normal frame at the center".into()))?;
    let s = xb.value() * inv;
    match_frames(&res, &rebuilt, &s)
}
