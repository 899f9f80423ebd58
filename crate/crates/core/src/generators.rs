//! Test curves with known ground truth: flat models, Jacobi curves of
//! linear Hamiltonian flows, and random curves with prescribed curvature.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::diagram::{Superbox, YoungDiagram};
use crate::error::{Error, Result};
use crate::flag::{analyze_flag, CurveJet, Inertia, Monotonicity};
use crate::jets::exp_jet;
use crate::reconstruction::{flat_frame, reconstruct, Arrow, ArrowJet, CurvatureSpec};
use crate::subspace::Tol;
use crate::symplectic::{omega, random_symplectic};

/// Curve with zero curvature and positive inertia for the diagram.
pub fn flat_curve(d: &YoungDiagram, center: f64, order: usize) -> Result<CurveJet> {
    let red = d.reduce();
    let inertia: Vec<Inertia> = red.levels.iter().map(|l| Inertia { plus: l.r, minus: 0 }).collect();
    flat_frame(&red, &inertia, center, order)
}

/// Jacobi curve of the linear flow `x' = Ω H x`: the vertical plane
/// `span(f)` transported to time `t`, as a jet at `center`.
pub fn linear_hamiltonian_jacobi(h: &DMatrix<f64>, center: f64, order: usize) -> Result<CurveJet> {
    let dim = h.nrows();
    if !dim.is_multiple_of(2) || h.ncols() != dim {
        return Err(Error::ShapeMismatch(format!("H must be 2n x 2n, got {:?}", h.shape())));
    }
    if (h - h.transpose()).amax() > 1e-12 * h.amax().max(1.0) {
        return Err(Error::ShapeMismatch("H must be symmetric".into()));
    }
    let n = dim / 2;
    let a = omega(n) * h;
    let mut vert = DMatrix::zeros(dim, n);
    for k in 0..n {
        vert[(n + k, k)] = 1.0;
    }
    let start = (&a * center).exp() * vert;
    Ok(CurveJet::new_unchecked(exp_jet(&a, &start, center, order)))
}

fn random_block(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    amplitude: f64,
    degree: usize,
    shape: BlockShape,
) -> ArrowJet {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let coeffs = (0..=degree)
        .map(|k| {
            let s = amplitude / (k + 1) as f64;
            let m = DMatrix::from_fn(rows, cols, |_, _| s * normal.sample(rng));
            let m = match shape {
                BlockShape::Symmetric => (&m + m.transpose()) * 0.5,
                BlockShape::Antisymmetric => (&m - m.transpose()) * 0.5,
                BlockShape::Free => m,
            };
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        })
        .collect();
    ArrowJet { coeffs }
}

#[derive(Clone, Copy)]
enum BlockShape {
    Symmetric,
    Antisymmetric,
    Free,
}

/// Random admissible spec: every essential block gets a random polynomial
/// of the given degree with coefficients of size about `amplitude`.
pub fn random_spec(
    d: &YoungDiagram,
    inertia: &[(usize, usize)],
    seed: u64,
    amplitude: f64,
    degree: usize,
) -> CurvatureSpec {
    let red = d.reduce();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrows = Vec::new();
    for (a, b) in red.essential_pairs() {
        if a > b {
            continue;
        }
        let shape = if a == b {
            BlockShape::Symmetric
        } else if red.right(a) == Some(b) {
            BlockShape::Antisymmetric
        } else {
            BlockShape::Free
        };
        if matches!(shape, BlockShape::Antisymmetric) && red.size(a) == 1 {
            continue;
        }
        arrows.push(Arrow {
            a,
            b,
            jet: random_block(&mut rng, red.size(b), red.size(a), amplitude, degree, shape),
        });
    }
    CurvatureSpec {
        diagram: d.clone(),
        inertia: inertia.to_vec(),
        arrows,
    }
}

/// A random curve with known curvature, positioned by a random symplectic map.
#[derive(Clone, Debug)]
pub struct GeneratedCurve {
    pub curve: CurveJet,
    pub spec: CurvatureSpec,
    pub symplectic: DMatrix<f64>,
}

/// Reconstructs a random spec and moves it by a random symplectic map.
/// Specs whose curve does not show the prescribed diagram and inertia at the
/// center (or monotonicity, for definite inertia) are resampled.
pub fn random_curve(
    d: &YoungDiagram,
    inertia: &[(usize, usize)],
    seed: u64,
    amplitude: f64,
    center: f64,
    order: usize,
) -> Result<GeneratedCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let definite = inertia.iter().all(|&(_, m)| m == 0);
    let mut last_err = None;
    for attempt in 0..20 {
        let amp = amplitude * 0.8f64.powi(attempt);
        let spec = random_spec(d, inertia, rng.random(), amp, 2);
        spec.validate()?;
        let (curve, _) = reconstruct(&spec, center, order)?;
        let s = random_symplectic(curve.half_dim(), rng.random());
        let curve = curve.transform(&s);
        match analyze_flag(&curve, Tol::default()) {
            Ok(rep) => {
                let ok_diag = rep.young == *d;
                let ok_inertia = rep
                    .inertia
                    .as_ref()
                    .map(|v| v.iter().map(|i| (i.plus, i.minus)).collect::<Vec<_>>() == inertia)
                    .unwrap_or(false);
                let ok_mono = !definite || rep.monotonicity == Monotonicity::Nondecreasing;
                if ok_diag && ok_inertia && ok_mono {
                    return Ok(GeneratedCurve {
                        curve,
                        spec,
                        symplectic: s,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::ConditionG(format!("no admissible random curve for {:?} after 20 draws", d.rows()))
    }))
}

/// Superbox helper for examples: one-based `(level, column)`.
pub fn superbox(level: usize, col: usize) -> Superbox {
    Superbox::new(level - 1, col - 1)
}
