//! Jacobi curves of linear Hamiltonian systems: the vertical plane moved by
//! the flow of x' = ΩHx.

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::generators::{flat_curve, linear_hamiltonian_jacobi};
use lagrangian_curves::normal_frame::normal_frame;
use nalgebra::{DMatrix, DVector};

fn main() -> lagrangian_curves::Result<()> {
    // Harmonic oscillator H = (p² + q²)/2: curvature −1.
    let osc = linear_hamiltonian_jacobi(&DMatrix::identity(2, 2), 0.0, 12)?;
    println!("oscillator curvature: {:.12}", normal_frame(&osc)?.r.matrix.value()[(0, 0)]);

    // Free particle H = p²/2: the flat one-box curve.
    let free = linear_hamiltonian_jacobi(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0])), 0.0, 12)?;
    let flat = flat_curve(&YoungDiagram::new(vec![1])?, 0.0, 12)?;
    println!("free particle − flat line: {:.1e}", (&free.frame - &flat.frame).max_abs());

    // Two oscillators with frequencies 1 and 2: curvature diag(−1, −4).
    let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 1.0, 1.0]));
    let r = normal_frame(&linear_hamiltonian_jacobi(&h, 0.0, 12)?)?.r.matrix;
    let eig = r.value().clone().symmetric_eigenvalues();
    println!("coupled curvature eigenvalues: {:.9?}", eig.as_slice());

    // One control in two degrees of freedom: q_x' = q_y, q_y' = p_y.
    // Coordinates are (q_x, q_y, p_x, p_y).
    let mut h = DMatrix::zeros(4, 4);
    h[(3, 3)] = 1.0; // p_y²/2
    h[(1, 2)] = 1.0; // p_x q_y
    h[(2, 1)] = 1.0;
    let c = linear_hamiltonian_jacobi(&h, 0.0, 14)?;
    println!("rank-one kinetic term gives diagram {}", normal_frame(&c)?.diagram.to_young());
    Ok(())
}
