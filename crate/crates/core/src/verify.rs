//! Self-checks on a single curve: flag duality, invariance under symplectic
//! maps, and reconstruction round trip.

use serde::Serialize;

use crate::error::Result;
use crate::flag::{analyze_flag, CurveJet};
use crate::normal_frame::{normal_frame_with, NormalizeOptions};
use crate::quiver::{compare_invariants, extract_quiver};
use crate::reconstruction::{match_frames, roundtrip};
use crate::symplectic::random_symplectic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Roundtrip,
    Invariance,
    Duality,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "roundtrip" => Ok(Suite::Roundtrip),
            "invariance" => Ok(Suite::Invariance),
            "duality" => Ok(Suite::Duality),
            _ => Err(format!("unknown suite {s:?}; expected roundtrip, invariance or duality")),
        }
    }
}

impl Suite {
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Duality => 1e-8,
            Suite::Invariance | Suite::Roundtrip => 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            tol,
            passed: residual <= tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        SuiteReport {
            suite,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

/// `Λ_(i) = (Λ^(i))^∠`: complementary dimensions and vanishing pairings.
pub fn duality_suite(curve: &CurveJet, opts: NormalizeOptions, tol: f64) -> Result<SuiteReport> {
    let rep = analyze_flag(curve, opts.tol)?;
    let n2 = 2 * curve.half_dim();
    let dim_defect = rep
        .extension_dims
        .iter()
        .zip(&rep.contraction_dims)
        .map(|(e, c)| (e + c).abs_diff(n2))
        .max()
        .unwrap_or(0);
    Ok(SuiteReport::new(
        Suite::Duality,
        vec![
            Check::new("dim extension + dim contraction = 2n", dim_defect as f64, 0.0),
            Check::new("pairing of contraction with extension", rep.duality_residual, tol),
        ],
    ))
}

/// Moves the curve by `count` random symplectic maps and compares diagram,
/// quiver fingerprints, curvature up to constant gauge and matched frames.
pub fn invariance_suite(
    curve: &CurveJet,
    opts: NormalizeOptions,
    seed: u64,
    count: usize,
    tol: f64,
) -> Result<SuiteReport> {
    let base = normal_frame_with(curve, opts)?;
    let q0 = extract_quiver(&base, tol)?;
    let mut checks = Vec::new();
    for k in 0..count {
        let s = random_symplectic(curve.half_dim(), seed.wrapping_add(k as u64));
        let moved = normal_frame_with(&curve.transform(&s), opts)?;
        let same_diagram = moved.diagram == base.diagram && moved.inertia == base.inertia;
        checks.push(Check::new(
            format!("map {k}: diagram and inertia"),
            if same_diagram { 0.0 } else { 1.0 },
            0.0,
        ));
        if !same_diagram {
            continue;
        }
        let q = extract_quiver(&moved, tol)?;
        checks.push(Check::new(
            format!("map {k}: fingerprints"),
            compare_invariants(&q0, &q, tol)?.mismatch,
            tol,
        ));
        let m = match_frames(&base, &moved, &s)?;
        checks.push(Check::new(format!("map {k}: curvature up to gauge"), m.curvature, tol));
        checks.push(Check::new(format!("map {k}: gauge is constant"), m.gauge_drift, tol));
        checks.push(Check::new(format!("map {k}: frames match"), m.frame, tol));
    }
    Ok(SuiteReport::new(Suite::Invariance, checks))
}

/// Rebuilds the curve from its own curvature and matches the frames.
pub fn roundtrip_suite(curve: &CurveJet, opts: NormalizeOptions, tol: f64) -> Result<SuiteReport> {
    let rt = roundtrip(curve, opts)?;
    Ok(SuiteReport::new(
        Suite::Roundtrip,
        vec![
            Check::new("curvature", rt.curvature, tol),
            Check::new("frame", rt.frame, tol),
            Check::new("symplectic defect of matching map", rt.symplectic_defect, tol),
            Check::new("gauge drift", rt.gauge_drift, tol),
        ],
    ))
}

pub fn run_suite(suite: Suite, curve: &CurveJet, opts: NormalizeOptions, seed: u64, tol: f64) -> Result<SuiteReport> {
    match suite {
        Suite::Duality => duality_suite(curve, opts, tol),
        Suite::Invariance => invariance_suite(curve, opts, seed, 10, tol),
        Suite::Roundtrip => roundtrip_suite(curve, opts, tol),
    }
}
