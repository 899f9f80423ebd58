//! Quiver of curvature maps, its gauge-invariant fingerprints, and the
//! canonical splitting of the curve.

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::generators::random_curve;
use lagrangian_curves::normal_frame::normal_frame;
use lagrangian_curves::quiver::{compare_invariants, extract_quiver, splitting_and_complement};
use lagrangian_curves::symplectic::random_symplectic;

fn main() -> lagrangian_curves::Result<()> {
    let d = YoungDiagram::new(vec![2, 2, 1])?;
    let g = random_curve(&d, &[(2, 0), (1, 0)], 8, 0.3, 0.0, 12)?;
    let res = normal_frame(&g.curve)?;
    let q = extract_quiver(&res, 1e-8)?;
    println!("{} arrows; adjoint residual {:.1e}", q.arrows.len(), q.adjoint_residual());
    for (name, jet) in q.fingerprints().iter().take(6) {
        println!("  {name:<24} {:+.6}", jet[0]);
    }

    let split = splitting_and_complement(&res);
    for (a, basis) in &split.subspaces {
        println!("V_{a} has dimension {}", basis.cols);
    }
    println!("complementary curve has dimension {}", split.complement.cols);

    // The same curve in other symplectic coordinates has the same quiver.
    let moved = g.curve.transform(&random_symplectic(g.curve.half_dim(), 99));
    let q2 = extract_quiver(&normal_frame(&moved)?, 1e-8)?;
    let c = compare_invariants(&q, &q2, 1e-6)?;
    println!("isomorphic after a symplectic map: {} (mismatch {:.1e})", c.isomorphic, c.mismatch);
    Ok(())
}
