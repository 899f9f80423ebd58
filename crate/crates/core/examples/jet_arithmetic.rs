//! Truncated power series: arithmetic, derivatives, inverses and a linear ODE.

use lagrangian_curves::jets::{jet_ode_solve, Jet, MatrixJet};
use nalgebra::DMatrix;

fn main() -> lagrangian_curves::Result<()> {
    // s = t - 0.5, kept to order 6.
    let s = Jet::variable(0.5, 6);
    let one = Jet::constant(0.5, 1.0, 6);
    let x = &one + &(&s * &s);
    println!("1 + s^2       = {:?}", x.coeffs);
    println!("d/ds          = {:?}", x.derive()?.coeffs);
    println!("1 / (1 + s^2) = {:?}", x.invert()?.coeffs);
    println!("sqrt          = {:?}", x.sqrt()?.coeffs);
    println!("1 / (1 + s^2) at t = 0.6: {:.12} (exact {:.12}, order-6 truncation)", x.invert()?.eval(0.6), 1.0 / 1.01);

    // U' = A U with A the rotation generator: U = exp(tA).
    let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let u = jet_ode_solve(&MatrixJet::constant(0.0, a, 10), &DMatrix::identity(2, 2))?;
    let at1 = u.eval(0.3);
    println!("exp(0.3 A)[0,0] = {:.15}, cos 0.3 = {:.15}", at1[(0, 0)], 0.3f64.cos());

    // Orders are tracked: differentiating loses one.
    println!("order {} -> {}", u.order(), u.derive()?.order());
    Ok(())
}
