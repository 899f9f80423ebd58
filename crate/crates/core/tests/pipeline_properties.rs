//! Property tests of the whole pipeline on random curves with prescribed
//! diagram, inertia and curvature.

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::flag::{analyze_flag, Monotonicity};
use lagrangian_curves::generators::{linear_hamiltonian_jacobi, random_curve, random_spec};
use lagrangian_curves::normal_frame::{
    canonical_complements, normal_frame, normal_frame_with, required_order, verify_normal, NormalizeOptions,
};
use lagrangian_curves::quiver::{compare_invariants, extract_quiver};
use lagrangian_curves::reconstruction::{match_frames, reconstruct, spec_roundtrip};
use lagrangian_curves::subspace::Tol;
use lagrangian_curves::symplectic::{darboux_residual_jet, omega_pairing_jet, random_symplectic, velocity_form};
use nalgebra::DMatrix;
use proptest::prelude::*;

const DIAGRAMS: &[&[usize]] = &[&[1], &[2], &[1, 1], &[2, 1], &[3], &[2, 2], &[3, 1], &[2, 1, 1], &[2, 2, 1]];

/// Diagram, inertia per level (random split of each level), seed.
fn arb_case(mixed: bool) -> impl Strategy<Value = (YoungDiagram, Vec<(usize, usize)>, u64)> {
    (0..DIAGRAMS.len(), any::<u64>(), any::<u64>()).prop_map(move |(i, split, seed)| {
        let d = YoungDiagram::new(DIAGRAMS[i].to_vec()).unwrap();
        let inertia = d
            .reduce()
            .levels
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let minus = if mixed { ((split >> (4 * k)) as usize) % (l.r + 1) } else { 0 };
                (l.r - minus, minus)
            })
            .collect();
        (d, inertia, seed)
    })
}

fn order_for(d: &YoungDiagram) -> usize {
    required_order(&d.reduce()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_curves_are_lagrangian_to_all_orders((d, inertia, seed) in arb_case(true)) {
        let g = random_curve(&d, &inertia, seed, 0.3, 0.0, order_for(&d)).unwrap();
        let w = omega_pairing_jet(&g.curve.frame, &g.curve.frame).unwrap();
        prop_assert!(w.max_abs() < 1e-9 * g.curve.frame.max_abs().powi(2).max(1.0));
        let q = velocity_form(&g.curve.frame, Tol::default()).unwrap();
        prop_assert!((&q - &q.transpose()).max_abs() < 1e-9 * q.max_abs().max(1.0));
    }

    #[test]
    fn flag_duality_and_dimensions((d, inertia, seed) in arb_case(true)) {
        let g = random_curve(&d, &inertia, seed, 0.3, 0.0, order_for(&d)).unwrap();
        let rep = analyze_flag(&g.curve, Tol::default()).unwrap();
        let n = g.curve.half_dim();
        prop_assert!(rep.duality_residual < 1e-8);
        // Dimension pairing and the symmetric first step.
        for (e, c) in rep.extension_dims.iter().zip(&rep.contraction_dims) {
            prop_assert_eq!(e + c, 2 * n);
        }
        prop_assert_eq!(rep.extension_dims[1] - n, n - rep.contraction_dims[1]);
        let cols = rep.young.columns();
        prop_assert!(cols.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn time_reversal_flips_monotonicity((d, _inertia, seed) in arb_case(false)) {
        let inertia: Vec<_> = d.reduce().levels.iter().map(|l| (l.r, 0)).collect();
        let g = random_curve(&d, &inertia, seed, 0.3, 0.0, order_for(&d)).unwrap();
        let fwd = analyze_flag(&g.curve, Tol::default()).unwrap();
        let back = analyze_flag(&g.curve.reversed(), Tol::default()).unwrap();
        prop_assert_eq!(fwd.monotonicity, Monotonicity::Nondecreasing);
        prop_assert_eq!(back.monotonicity, Monotonicity::Nonincreasing);
        prop_assert_eq!(back.young, fwd.young);
    }

    #[test]
    fn normal_frames_are_darboux_and_normal((d, inertia, seed) in arb_case(true)) {
        let g = random_curve(&d, &inertia, seed, 0.3, 0.0, order_for(&d)).unwrap();
        let res = normal_frame(&g.curve).unwrap();
        let chk = verify_normal(&res, &g.curve, 1e-8).unwrap();
        prop_assert!(chk.passes(1e-8), "{:?}", chk);
        prop_assert!(chk.chain_identity < 1e-7);
        let q = extract_quiver(&res, 1e-8).unwrap();
        prop_assert!(q.adjoint_residual() < 1e-8);
    }

    #[test]
    fn w_dimension_formula((d, inertia, seed) in arb_case(true)) {
        let g = random_curve(&d, &inertia, seed, 0.3, 0.0, order_for(&d)).unwrap();
        let rep = analyze_flag(&g.curve, Tol::default()).unwrap();
        let cc = canonical_complements(&g.curve, &rep, Tol::default()).unwrap();
        let mut expected = 0;
        for (l, w) in rep.reduced.levels.iter().zip(cc.w_dims()) {
            expected += 2 * l.p * l.r;
            prop_assert_eq!(w, expected);
        }
    }

    #[test]
    fn gauge_between_admissible_runs_is_constant((d, inertia, seed) in arb_case(true), gauge in any::<u64>()) {
        let g = random_curve(&d, &inertia, seed, 0.3, 0.0, order_for(&d)).unwrap();
        let a = normal_frame(&g.curve).unwrap();
        let b = normal_frame_with(&g.curve, NormalizeOptions { gauge_seed: Some(gauge), ..Default::default() }).unwrap();
        let m = match_frames(&a, &b, &DMatrix::identity(2 * g.curve.half_dim(), 2 * g.curve.half_dim())).unwrap();
        prop_assert!(m.gauge_drift < 1e-8, "{:?}", m);
        prop_assert!(m.curvature < 1e-8 && m.frame < 1e-8, "{:?}", m);
    }

    #[test]
    fn quiver_is_symplectic_invariant((d, inertia, seed) in arb_case(true), s_seed in any::<u64>()) {
        let g = random_curve(&d, &inertia, seed, 0.3, 0.0, order_for(&d)).unwrap();
        let q1 = extract_quiver(&normal_frame(&g.curve).unwrap(), 1e-8).unwrap();
        let moved = g.curve.transform(&random_symplectic(g.curve.half_dim(), s_seed));
        let q2 = extract_quiver(&normal_frame(&moved).unwrap(), 1e-8).unwrap();
        let c = compare_invariants(&q1, &q2, 1e-6).unwrap();
        prop_assert!(c.isomorphic, "{:?}", c);
    }

    #[test]
    fn reconstruction_is_darboux_and_round_trips((d, inertia, seed) in arb_case(true)) {
        let spec = random_spec(&d, &inertia, seed, 0.3, 2);
        let order = order_for(&d);
        let (_, truth) = reconstruct(&spec, 0.0, order).unwrap();
        let scale = truth.e.max_abs().max(truth.f.max_abs()).max(1.0).powi(2);
        prop_assert!(darboux_residual_jet(&truth.e, &truth.f).unwrap() < 1e-10 * scale);
        // Random specs may fall outside the generic stratum at t0; only
        // analyzable ones are compared.
        if let Ok(rt) = spec_roundtrip(&spec, 0.0, order, NormalizeOptions::default()) {
            prop_assert!(rt.worst() < 1e-6, "{:?}", rt);
        }
    }

    #[test]
    fn positive_hamiltonians_give_monotone_jacobi_curves(v in prop::collection::vec(-1.0f64..1.0, 16)) {
        let a = DMatrix::from_row_slice(4, 4, &v);
        let h = &a * a.transpose() + DMatrix::identity(4, 4) * 0.1;
        let c = linear_hamiltonian_jacobi(&h, 0.0, 12).unwrap();
        let rep = analyze_flag(&c, Tol::default()).unwrap();
        prop_assert_eq!(rep.young, YoungDiagram::new(vec![1, 1]).unwrap());
        prop_assert_eq!(rep.monotonicity, Monotonicity::Nondecreasing);
    }
}
