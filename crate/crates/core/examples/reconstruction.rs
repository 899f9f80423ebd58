//! A curve from prescribed curvature, and back.

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::generators::{random_spec, superbox};
use lagrangian_curves::normal_frame::{required_order, NormalizeOptions};
use lagrangian_curves::reconstruction::{reconstruct, spec_roundtrip, Arrow, ArrowJet, CurvatureSpec};

fn main() -> lagrangian_curves::Result<()> {
    // One box with R = -1: the rotating line cos t·f + sin t·e.
    let spec = CurvatureSpec {
        diagram: YoungDiagram::new(vec![1])?,
        inertia: vec![(1, 0)],
        arrows: vec![Arrow {
            a: superbox(1, 1),
            b: superbox(1, 1),
            jet: ArrowJet { coeffs: vec![vec![vec![-1.0]]] },
        }],
    };
    let (curve, _) = reconstruct(&spec, 0.0, 8)?;
    let x = curve.frame.eval(0.7);
    println!("Λ(0.7) spanned by ({:.12}, {:.12}); cos, sin = ({:.12}, {:.12})", x[(1, 0)], x[(0, 0)], 0.7f64.cos(), 0.7f64.sin());

    // Random admissible specs, monotone and mixed, through the pipeline.
    for (rows, inertia) in [(vec![2, 1], vec![(1, 0), (1, 0)]), (vec![2, 2, 1], vec![(1, 1), (1, 0)])] {
        let d = YoungDiagram::new(rows)?;
        let spec = random_spec(&d, &inertia, 5, 0.3, 2);
        let order = required_order(&d.reduce())?;
        let rt = spec_roundtrip(&spec, 0.0, order, NormalizeOptions::default())?;
        println!(
            "{d} {inertia:?}: curvature mismatch {:.1e}, frame {:.1e}, gauge drift {:.1e}",
            rt.curvature, rt.frame, rt.gauge_drift
        );
    }

    // Inadmissible specs are rejected with every violation listed.
    let bad = CurvatureSpec {
        diagram: YoungDiagram::new(vec![1, 1])?,
        inertia: vec![(2, 0)],
        arrows: vec![Arrow {
            a: superbox(1, 1),
            b: superbox(1, 1),
            jet: ArrowJet { coeffs: vec![vec![vec![0.0, 1.0], vec![2.0, 0.0]]] },
        }],
    };
    println!("invalid spec: {}", bad.validate().unwrap_err());
    Ok(())
}
