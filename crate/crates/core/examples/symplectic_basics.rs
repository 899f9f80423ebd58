//! The form ω(x, y) = xᵀΩy, Lagrangian subspaces and symplectic maps.

use lagrangian_curves::symplectic::{
    darboux_residual, omega, omega_pairing, random_symplectic, symplectic_defect, Subspace, SymplecticSpace,
};

fn main() -> lagrangian_curves::Result<()> {
    let space = SymplecticSpace::new(3);
    println!("Ω for n = 1:\n{}", omega(1));

    // Darboux means ω(F, E) = I: with E on the f-half and F on the e-half.
    let (e, f) = (space.e(), space.f());
    println!("Darboux residual of E = f, F = e: {:e}", darboux_residual(&f, &e)?);

    let s = random_symplectic(3, 42);
    println!("symplectic defect |SᵀΩS − Ω|: {:.2e}", symplectic_defect(&s));

    // A symplectic map keeps Lagrangian planes Lagrangian.
    let moved = &s * &f;
    let plane = Subspace::span(&moved, 1e-10);
    println!("image of span(f) is Lagrangian: {}", plane.is_lagrangian(1e-10));
    println!("ω on the image (should vanish):\n{:.1e}", omega_pairing(&moved, &moved)?);

    // Its skew complement is itself.
    println!("Λ^∠ = Λ: {}", plane.skew_complement().same_span(&plane, 1e-10));
    Ok(())
}
