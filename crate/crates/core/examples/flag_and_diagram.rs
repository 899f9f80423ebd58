//! Young diagram of a curve from its extension/contraction flag, with
//! monotonicity, condition (G) and inertia indices.

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::flag::analyze_flag;
use lagrangian_curves::generators::{flat_curve, random_curve};
use lagrangian_curves::subspace::Tol;

fn main() -> lagrangian_curves::Result<()> {
    for rows in [vec![1, 1, 1], vec![3], vec![2, 1], vec![3, 3, 1]] {
        let d = YoungDiagram::new(rows)?;
        let curve = flat_curve(&d, 0.0, 16)?;
        let rep = analyze_flag(&curve, Tol::default())?;
        println!(
            "flat {d}: found {} | dim Λ^(i) = {:?} | dim Λ_(i) = {:?} | {:?}, G = {}",
            rep.young, rep.extension_dims, rep.contraction_dims, rep.monotonicity, rep.condition_g
        );
    }

    // A curve with indefinite velocity: one positive and one negative level.
    let d = YoungDiagram::new(vec![2, 1])?;
    let g = random_curve(&d, &[(1, 0), (0, 1)], 11, 0.3, 0.0, 12)?;
    let rep = analyze_flag(&g.curve, Tol::default())?;
    println!(
        "mixed {}: {:?}, inertia {:?}, duality residual {:.1e}",
        rep.young, rep.monotonicity, rep.inertia, rep.duality_residual
    );
    Ok(())
}
