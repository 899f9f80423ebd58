//! JSON files: curves, curvature specs and analysis reports.
//!
//! Floats are written with 17 significant digits.

use std::collections::BTreeMap;
use std::io;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagram::{ReducedDiagram, Superbox, YoungDiagram};
use crate::error::{Error, Result};
use crate::flag::{CurveJet, FlagReport, Monotonicity};
use crate::jets::MatrixJet;
use crate::normal_frame::{NormalCheck, NormalFrameResult};
use crate::quiver::QuiverRep;
use crate::reconstruction::CurvatureSpec;
use crate::subspace::Tol;

pub const SCHEMA_VERSION: u32 = 1;

/// `serde_json` formatter printing every float as `d.dddddddddddddddde±x`.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Serializes to a single line of JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Matrix-valued jet: `coeffs[k]` is the `k`-th Taylor coefficient as rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetJson {
    pub center: f64,
    pub coeffs: Vec<Vec<Vec<f64>>>,
}

impl From<&MatrixJet> for JetJson {
    fn from(j: &MatrixJet) -> Self {
        JetJson {
            center: j.center,
            coeffs: j
                .coeffs
                .iter()
                .map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
        }
    }
}

/// Curve file: `frame[i][j]` lists the Taylor coefficients `c_0..c_N` of
/// entry `(i, j)` of the `2n × n` frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub schema_version: u32,
    pub half_dim: usize,
    pub center: f64,
    pub order: usize,
    pub frame: Vec<Vec<Vec<f64>>>,
}

impl CurveFile {
    pub fn from_curve(c: &CurveJet) -> Self {
        let f = &c.frame;
        CurveFile {
            schema_version: SCHEMA_VERSION,
            half_dim: c.half_dim(),
            center: f.center,
            order: f.order(),
            frame: (0..f.rows)
                .map(|i| (0..f.cols).map(|j| f.coeffs.iter().map(|m| m[(i, j)]).collect()).collect())
                .collect(),
        }
    }

    /// Checks the schema and builds a validated curve.
    pub fn to_curve(&self, tol: Tol) -> Result<CurveJet> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::ShapeMismatch(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let n = self.half_dim;
        if n == 0 {
            return Err(Error::ShapeMismatch("half_dim must be positive".into()));
        }
        if self.frame.len() != 2 * n {
            return Err(Error::ShapeMismatch(format!(
                "frame has {} rows, expected {}",
                self.frame.len(),
                2 * n
            )));
        }
        for (i, row) in self.frame.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ShapeMismatch(format!("frame row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, e) in row.iter().enumerate() {
                if e.len() != self.order + 1 {
                    return Err(Error::ShapeMismatch(format!(
                        "entry ({i}, {j}) has {} coefficients, expected order + 1 = {}",
                        e.len(),
                        self.order + 1
                    )));
                }
                if e.iter().any(|x| !x.is_finite()) {
                    return Err(Error::ShapeMismatch(format!("entry ({i}, {j}) is not finite")));
                }
            }
        }
        if !self.center.is_finite() {
            return Err(Error::ShapeMismatch("center is not finite".into()));
        }
        let coeffs = (0..=self.order)
            .map(|k| DMatrix::from_fn(2 * n, n, |i, j| self.frame[i][j][k]))
            .collect();
        CurveJet::new(MatrixJet::new(self.center, coeffs), tol)
    }
}

/// Curvature spec with an optional schema version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    #[serde(flatten)]
    pub spec: CurvatureSpec,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

impl SpecFile {
    pub fn new(spec: CurvatureSpec) -> Self {
        SpecFile {
            schema_version: SCHEMA_VERSION,
            spec,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureJson {
    pub a: Superbox,
    pub b: Superbox,
    pub jet: JetJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residuals {
    pub darboux: f64,
    pub structural: f64,
    pub span: f64,
    pub first_column_pairings: f64,
    pub chain_identity: f64,
    pub duality: f64,
    pub nonessential: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuiverJson {
    /// `𝔯(a, b) = R(a, b)·I` on every essential ordered pair.
    pub arrows: Vec<CurvatureJson>,
    pub fingerprints: BTreeMap<String, Vec<f64>>,
    pub adjoint_residual: f64,
}

/// Analysis file. `curvatures` holds the blocks `R(a, b)` with `a ≤ b` on
/// essential pairs, in the same convention as spec files.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisFile {
    pub schema_version: u32,
    pub diagram: YoungDiagram,
    pub reduced: ReducedDiagram,
    pub monotonicity: Monotonicity,
    pub trust_radius: f64,
    #[serde(rename = "conditionG")]
    pub condition_g: bool,
    pub inertia: Vec<(usize, usize)>,
    pub extension_dims: Vec<usize>,
    pub contraction_dims: Vec<usize>,
    pub curvatures: Vec<CurvatureJson>,
    pub quiver: QuiverJson,
    pub residuals: Residuals,
}

impl AnalysisFile {
    pub fn new(report: &FlagReport, res: &NormalFrameResult, quiver: &QuiverRep, check: &NormalCheck) -> Self {
        let curvatures = res
            .diagram
            .essential_pairs()
            .into_iter()
            .filter(|(a, b)| a <= b)
            .map(|(a, b)| CurvatureJson {
                a,
                b,
                jet: (&res.r.block(a, b)).into(),
            })
            .collect();
        AnalysisFile {
            schema_version: SCHEMA_VERSION,
            diagram: report.young.clone(),
            reduced: report.reduced.clone(),
            monotonicity: report.monotonicity,
            trust_radius: report.trust_radius,
            condition_g: report.condition_g,
            inertia: res.inertia.iter().map(|i| (i.plus, i.minus)).collect(),
            extension_dims: report.extension_dims.clone(),
            contraction_dims: report.contraction_dims.clone(),
            curvatures,
            quiver: QuiverJson {
                arrows: quiver
                    .arrows
                    .iter()
                    .map(|x| CurvatureJson {
                        a: x.a,
                        b: x.b,
                        jet: (&x.value).into(),
                    })
                    .collect(),
                fingerprints: quiver.fingerprints(),
                adjoint_residual: quiver.adjoint_residual(),
            },
            residuals: Residuals {
                darboux: check.darboux,
                structural: check.structural,
                span: check.span,
                first_column_pairings: check.first_column_pairings,
                chain_identity: check.chain_identity,
                duality: report.duality_residual,
                nonessential: res.r.nonessential_magnitude(),
            },
        }
    }
}
