//! The self-check suites behind `lgc verify`: duality, symplectic
//! invariance, and reconstruction round trip.

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::generators::random_curve;
use lagrangian_curves::normal_frame::NormalizeOptions;
use lagrangian_curves::verify::{run_suite, Suite};

fn main() -> lagrangian_curves::Result<()> {
    let d = YoungDiagram::new(vec![3, 1, 1])?;
    let g = random_curve(&d, &[(1, 0), (2, 0)], 21, 0.3, 0.0, 16)?;
    for suite in [Suite::Duality, Suite::Invariance, Suite::Roundtrip] {
        let rep = run_suite(suite, &g.curve, NormalizeOptions::default(), 7, suite.default_tol())?;
        let worst = rep.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
        println!("{suite:?}: {} checks, passed = {}, worst residual {worst:.1e}", rep.checks.len(), rep.passed);
    }
    Ok(())
}
