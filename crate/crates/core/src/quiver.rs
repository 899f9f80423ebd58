//! Curvature invariants: the quiver of curvature mappings, the canonical
//! splitting and complementary curve, and gauge-invariant fingerprints.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::diagram::{ReducedDiagram, Superbox};
use crate::error::{Error, Result};
use crate::flag::Inertia;
use crate::jets::MatrixJet;
use crate::normal_frame::NormalFrameResult;

/// Arrow `𝔯(a, b) = R(a, b)·I_{level(a)}`, a map from the level of `a` to the
/// level of `b`.
#[derive(Clone, Debug)]
pub struct QuiverArrow {
    pub a: Superbox,
    pub b: Superbox,
    pub value: MatrixJet,
}

#[derive(Clone, Debug)]
pub struct QuiverRep {
    pub diagram: ReducedDiagram,
    pub inertia: Vec<Inertia>,
    /// One arrow per essential ordered pair.
    pub arrows: Vec<QuiverArrow>,
}

impl QuiverRep {
    pub fn arrow(&self, a: Superbox, b: Superbox) -> Option<&MatrixJet> {
        self.arrows.iter().find(|x| x.a == a && x.b == b).map(|x| &x.value)
    }

    /// Largest violation of `𝔯(a, b)* = 𝔯(b, a)` and of antisymmetry of
    /// `𝔯(a, r(a))` with respect to the level forms `I`.
    pub fn adjoint_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in &self.arrows {
            let (ia, ib) = (
                self.inertia[x.a.level].signature(),
                self.inertia[x.b.level].signature(),
            );
            let adj = x.value.transpose().left_mul(&ia).right_mul(&ib);
            if let Some(back) = self.arrow(x.b, x.a) {
                let o = adj.order().min(back.order());
                worst = worst.max((&adj.truncate(o) - &back.truncate(o)).max_abs());
            }
            if self.diagram.right(x.a) == Some(x.b) && x.a.level == x.b.level {
                worst = worst.max((&adj + &x.value).max_abs());
            }
        }
        worst
    }

    /// Scalar gauge invariants as jets: traces of loops, of their products
    /// and powers within a level, and of round trips between two levels.
    /// All are unchanged by `𝔯(a, b) ↦ U_b⁻¹ 𝔯(a, b) U_a` and by the sign
    /// ambiguity `U_i = ±1`.
    pub fn fingerprints(&self) -> BTreeMap<String, Vec<f64>> {
        let mut out = BTreeMap::new();
        let tr = |m: &MatrixJet| -> Vec<f64> {
            m.coeffs.iter().map(|c| c.trace()).collect()
        };
        let within: Vec<&QuiverArrow> = self.arrows.iter().filter(|x| x.a.level == x.b.level).collect();
        let across: Vec<&QuiverArrow> = self.arrows.iter().filter(|x| x.a.level != x.b.level).collect();
        for x in &within {
            let r = self.diagram.size(x.a);
            let mut p = x.value.clone();
            out.insert(format!("tr {}{}", x.a, x.b), tr(&p));
            for k in 2..=r.max(2) {
                p = &p * &x.value;
                out.insert(format!("tr ({}{})^{k}", x.a, x.b), tr(&p));
            }
            for y in &within {
                if y.a.level == x.a.level && (x.a, x.b) < (y.a, y.b) {
                    out.insert(
                        format!("tr {}{}·{}{}", y.a, y.b, x.a, x.b),
                        tr(&(&y.value * &x.value)),
                    );
                }
            }
        }
        for x in &across {
            for y in &across {
                if y.a.level == x.b.level && y.b.level == x.a.level && (x.a, x.b) <= (y.a, y.b) {
                    let m = &y.value * &x.value;
                    out.insert(format!("tr {}{}·{}{}", y.a, y.b, x.a, x.b), tr(&m));
                    out.insert(format!("tr ({}{}·{}{})^2", y.a, y.b, x.a, x.b), tr(&(&m * &m)));
                }
            }
        }
        out
    }
}

/// Reads the quiver off a normal frame; nonessential blocks must vanish to
/// `tol` relative to the size of `R`.
pub fn extract_quiver(res: &NormalFrameResult, tol: f64) -> Result<QuiverRep> {
    let d = &res.diagram;
    let scale = res.r.matrix.max_abs().max(1.0);
    let stray = res.r.nonessential_magnitude();
    if stray > tol * scale {
        return Err(Error::NotNormal(stray));
    }
    let arrows = d
        .essential_pairs()
        .into_iter()
        .map(|(a, b)| QuiverArrow {
            a,
            b,
            value: res.r.block(a, b).right_mul(&res.inertia[a.level].signature()),
        })
        .collect();
    Ok(QuiverRep {
        diagram: d.clone(),
        inertia: res.inertia.clone(),
        arrows,
    })
}

/// `Λ(t) = ⊕ V_a(t)` with `V_a = span E_a`, and the complementary curve
/// `span F`.
#[derive(Clone, Debug)]
pub struct SplittingResult {
    pub subspaces: Vec<(Superbox, MatrixJet)>,
    pub complement: MatrixJet,
}

pub fn splitting_and_complement(res: &NormalFrameResult) -> SplittingResult {
    SplittingResult {
        subspaces: res
            .diagram
            .superboxes()
            .into_iter()
            .map(|a| (a, res.e_block(a)))
            .collect(),
        complement: res.f.clone(),
    }
}

/// Outcome of comparing two quivers.
#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub isomorphic: bool,
    /// Largest relative fingerprint mismatch over common jet orders.
    pub mismatch: f64,
    /// Fingerprint attaining the mismatch.
    pub worst: Option<String>,
}

/// Compares fingerprints coefficient by coefficient, relative to
/// `max(1, |value|)`.
pub fn compare_invariants(q1: &QuiverRep, q2: &QuiverRep, tol: f64) -> Result<Comparison> {
    if q1.diagram != q2.diagram || q1.inertia != q2.inertia {
        return Err(Error::InvalidDiagram(format!(
            "quivers of different shape: {} vs {}",
            q1.diagram, q2.diagram
        )));
    }
    let (f1, f2) = (q1.fingerprints(), q2.fingerprints());
    let mut mismatch: f64 = 0.0;
    let mut worst = None;
    for (k, v1) in &f1 {
        let v2 = &f2[k];
        for (x, y) in v1.iter().zip(v2) {
            let m = (x - y).abs() / x.abs().max(y.abs()).max(1.0);
            if m > mismatch {
                mismatch = m;
                worst = Some(k.clone());
            }
        }
    }
    Ok(Comparison {
        isomorphic: mismatch <= tol,
        mismatch,
        worst,
    })
}

/// Relative residual of expressing `b` in the columns of `a`, over all jet
/// orders; zero iff the spans agree as jets.
pub fn span_distance(a: &MatrixJet, b: &MatrixJet) -> Result<f64> {
    let c = crate::subspace::coordinates(a, b)?;
    let r = b - &(a * &c);
    Ok(r.max_abs() / b.max_abs().max(1e-300))
}
