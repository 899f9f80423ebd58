//! Normal moving frame and curvature of a curve, with the checks that
//! certify it: Darboux relations, structural equation, chain identities.

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::generators::{random_curve, superbox};
use lagrangian_curves::normal_frame::{normal_frame, verify_normal};

fn main() -> lagrangian_curves::Result<()> {
    let d = YoungDiagram::new(vec![3, 1])?;
    let g = random_curve(&d, &[(1, 0), (1, 0)], 3, 0.3, 0.0, 16)?;
    let res = normal_frame(&g.curve)?;
    println!("diagram {} with inertia {:?}", res.diagram, res.inertia);

    let check = verify_normal(&res, &g.curve, 1e-8)?;
    println!(
        "darboux {:.1e}, structural {:.1e}, span {:.1e}, chain identity {:.1e}, normal: {}",
        check.darboux,
        check.structural,
        check.span,
        check.chain_identity,
        check.passes(1e-8)
    );

    // Curvature blocks R(a, b) at the center on the essential pairs; all
    // other blocks vanish for a normal frame.
    for (a, b) in res.diagram.essential_pairs().into_iter().filter(|(a, b)| a <= b) {
        println!("R({a}, {b})(t0) = {:+.6}", res.r.block(a, b).value()[(0, 0)]);
    }
    println!("first box of the top level: {}", superbox(1, 1));
    Ok(())
}
