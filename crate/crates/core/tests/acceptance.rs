//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Oracles here are computed independently of the library's own
//! self-checks where practical.

use std::process::ExitCode;

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::flag::{analyze_flag, CurveJet, Monotonicity};
use lagrangian_curves::generators::{flat_curve, linear_hamiltonian_jacobi, random_curve, superbox};
use lagrangian_curves::normal_frame::{
    canonical_complements, gauge_between, normal_frame, normal_frame_with, required_order, structural_residual,
    NormalFrameResult, NormalizeOptions,
};
use lagrangian_curves::quiver::{compare_invariants, extract_quiver};
use lagrangian_curves::reconstruction::{match_frames, reconstruct, spec_roundtrip, Arrow, ArrowJet, CurvatureSpec};
use lagrangian_curves::subspace::Tol;
use lagrangian_curves::symplectic::{omega_pairing, omega_pairing_jet, random_symplectic};
use lagrangian_curves::Result;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Result<Outcome> + 'a>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

/// A curve of the test corpus with what is known about it.
struct TestCurve {
    label: String,
    curve: CurveJet,
    monotone: bool,
}

const DIAGRAMS: &[&[usize]] = &[&[1], &[2], &[1, 1], &[2, 1], &[3], &[2, 2], &[3, 1], &[2, 1, 1], &[2, 2, 1], &[3, 2, 1]];

fn yd(rows: &[usize]) -> YoungDiagram {
    YoungDiagram::new(rows.to_vec()).unwrap()
}

fn order_for(d: &YoungDiagram) -> usize {
    required_order(&d.reduce()).unwrap()
}

fn random_positive_h(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(2 * n, 2 * n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(2 * n, 2 * n) * 0.2
}

/// `q_k' = q_{k+1}`, `q_n' = p_n`: one control, so the curve is one row.
fn chain_hamiltonian(n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n - 1 {
        h[(n + k, k + 1)] = 1.0;
        h[(k + 1, n + k)] = 1.0;
    }
    h[(2 * n - 1, 2 * n - 1)] = 1.0;
    h
}

/// Mixed-inertia split of every level: alternate signs when `r ≥ 2`, and
/// negative on odd levels when `r = 1`.
fn mixed_inertia(d: &YoungDiagram) -> Vec<(usize, usize)> {
    d.reduce()
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| if l.r >= 2 { (l.r - l.r / 2, l.r / 2) } else if i % 2 == 1 { (0, 1) } else { (1, 0) })
        .collect()
}

fn positive_inertia(d: &YoungDiagram) -> Vec<(usize, usize)> {
    d.reduce().levels.iter().map(|l| (l.r, 0)).collect()
}

/// Flat, Hamiltonian and random curves across the diagrams; 50 in total.
fn corpus() -> Result<Vec<TestCurve>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();
    for rows in DIAGRAMS {
        let d = yd(rows);
        out.push(TestCurve {
            label: format!("flat {d}"),
            curve: flat_curve(&d, 0.0, order_for(&d))?,
            monotone: true,
        });
    }
    for n in 1..=4 {
        let h = random_positive_h(n, &mut rng);
        out.push(TestCurve {
            label: format!("jacobi n={n}"),
            curve: linear_hamiltonian_jacobi(&h, 0.1, 8)?,
            monotone: true,
        });
    }
    for n in 2..=4 {
        let d = yd(&[n]);
        out.push(TestCurve {
            label: format!("chain jacobi n={n}"),
            curve: linear_hamiltonian_jacobi(&chain_hamiltonian(n), 0.0, order_for(&d))?,
            monotone: true,
        });
    }
    // Indefinite kinetic energy: regular and nonmonotone.
    let mut h = DMatrix::identity(4, 4);
    h[(3, 3)] = -1.0;
    out.push(TestCurve {
        label: "jacobi indefinite".into(),
        curve: linear_hamiltonian_jacobi(&h, 0.0, 8)?,
        monotone: false,
    });
    let mut k = 0u64;
    while out.len() < 50 {
        let d = yd(DIAGRAMS[1 + (k as usize) % (DIAGRAMS.len() - 1)]);
        let mixed = k % 3 == 2;
        let inertia = if mixed { mixed_inertia(&d) } else { positive_inertia(&d) };
        let monotone = inertia.iter().all(|&(_, m)| m == 0);
        let g = random_curve(&d, &inertia, 100 + k, 0.3, 0.0, order_for(&d))?;
        out.push(TestCurve {
            label: format!("random {d} {inertia:?}"),
            curve: g.curve,
            monotone,
        });
        k += 1;
    }
    Ok(out)
}

fn orthonormal(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return m.clone();
    }
    m.clone().qr().q().columns(0, m.ncols()).into_owned()
}

/// Criterion 1: `ω(Λ_(i), Λ^(i)) = 0` at the center for orthonormal bases.
fn duality(corpus: &[TestCurve]) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut diagrams = std::collections::BTreeSet::new();
    for c in corpus {
        let rep = analyze_flag(&c.curve, Tol::default())?;
        diagrams.insert(rep.young.rows().to_vec());
        let norm = c.curve.frame.value().amax().max(1.0);
        for (con, ext) in rep.contractions.iter().zip(&rep.extensions) {
            if con.cols == 0 || ext.cols == 0 {
                continue;
            }
            let w = omega_pairing(&orthonormal(con.value()), &orthonormal(ext.value()))?;
            worst = worst.max(w.amax() / norm);
        }
    }
    outcome(
        worst < 1e-8 && corpus.len() >= 50 && diagrams.len() >= 5,
        format!("{} curves, {} diagrams, max |ω(v, w)|/|frame| = {worst:.1e} (< 1e-8)", corpus.len(), diagrams.len()),
    )
}

/// Criterion 2: flat curves of every diagram with at most 8 boxes, regular
/// curves, and one-control curves.
fn young_diagrams() -> Result<Outcome> {
    let mut checked = 0;
    let mut wrong = Vec::new();
    for size in 1..=8 {
        for d in YoungDiagram::all_with_size(size) {
            let p1 = d.rows()[0];
            let curve = flat_curve(&d, 0.0, 2 * p1 + 2)?;
            let found = analyze_flag(&curve, Tol::default())?.young;
            if found != d {
                wrong.push(format!("{d} → {found}"));
            }
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=6 {
        let regular = linear_hamiltonian_jacobi(&random_positive_h(n, &mut rng), 0.0, 6)?;
        let y = analyze_flag(&regular, Tol::default())?.young;
        if y.columns().len() != 1 {
            wrong.push(format!("regular n={n} → {y}"));
        }
        let rank_one = linear_hamiltonian_jacobi(&chain_hamiltonian(n), 0.0, 2 * n + 2)?;
        let y = analyze_flag(&rank_one, Tol::default())?.young;
        if y.rows().len() != 1 {
            wrong.push(format!("rank-one n={n} → {y}"));
        }
    }
    outcome(
        wrong.is_empty(),
        format!("{checked} flat diagrams (|D| ≤ 8), 6 regular, 6 rank-one; mismatches: {wrong:?}"),
    )
}

/// Criterion 3: structural-equation residual of every analyzed curve.
fn structural(frames: &[(String, NormalFrameResult)]) -> Result<Outcome> {
    let mut worst: (f64, &str) = (0.0, "");
    for (label, res) in frames {
        let r = structural_residual(res)?;
        if r > worst.0 {
            worst = (r, label);
        }
    }
    outcome(
        worst.0 < 1e-8,
        format!("{} curves, max relative residual {:.1e} ({}) (< 1e-8)", frames.len(), worst.0, worst.1),
    )
}

/// Criterion 4: two randomized admissible runs differ by constant `U_i` in
/// `O(r+, r-)`.
fn gauge(corpus: &[TestCurve]) -> Result<Outcome> {
    let mut drift: f64 = 0.0;
    let mut group: f64 = 0.0;
    let mut runs = 0;
    for (k, c) in corpus.iter().enumerate() {
        let n2 = 2 * c.curve.half_dim();
        let a = normal_frame_with(&c.curve, NormalizeOptions { gauge_seed: Some(k as u64), ..Default::default() })?;
        let b = normal_frame_with(&c.curve, NormalizeOptions { gauge_seed: Some(1000 + k as u64), ..Default::default() })?;
        let u = gauge_between(&a, &b, &DMatrix::identity(n2, n2))?;
        for (i, ui) in u.iter().enumerate() {
            for o in 1..=ui.order() {
                drift = drift.max(ui.max_abs_at(o));
            }
            let s = a.signature(i);
            group = group.max((ui.value().transpose() * &s * ui.value() - &s).amax());
        }
        runs += 1;
    }
    outcome(
        drift < 1e-8 && group < 1e-8,
        format!("{runs} curves, max |U_i coeff, order ≥ 1| = {drift:.1e}, max |UᵀIU − I| = {group:.1e} (< 1e-8)"),
    )
}

/// Criterion 5: rotating line, flat curves, free particle.
fn closed_forms() -> Result<Outcome> {
    let osc = linear_hamiltonian_jacobi(&DMatrix::identity(2, 2), 0.0, 12)?;
    let r = normal_frame(&osc)?.r.matrix;
    let mut rot: f64 = (r.value()[(0, 0)] + 1.0).abs();
    for k in 1..=r.order() {
        rot = rot.max(r.max_abs_at(k));
    }
    let spec = CurvatureSpec {
        diagram: yd(&[1]),
        inertia: vec![(1, 0)],
        arrows: vec![Arrow {
            a: superbox(1, 1),
            b: superbox(1, 1),
            jet: ArrowJet { coeffs: vec![vec![vec![-1.0]]] },
        }],
    };
    let (line, _) = reconstruct(&spec, 0.4, 12)?;
    let r2 = normal_frame(&line)?.r.matrix;
    rot = rot.max((r2.value()[(0, 0)] + 1.0).abs());
    let mut flat: f64 = 0.0;
    for rows in DIAGRAMS {
        let d = yd(rows);
        flat = flat.max(normal_frame(&flat_curve(&d, 0.0, order_for(&d))?)?.r.matrix.max_abs());
    }
    let free = linear_hamiltonian_jacobi(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0])), 0.0, 10)?;
    let one_box = flat_curve(&yd(&[1]), 0.0, 10)?;
    let free_diff = (&free.frame - &one_box.frame).max_abs();
    outcome(
        rot < 1e-10 && flat < 1e-10 && free_diff < 1e-12,
        format!("rotating line |R + 1| = {rot:.1e}, flat max |R| = {flat:.1e} (< 1e-10), free particle − flat = {free_diff:.1e}"),
    )
}

/// Criterion 6: analyze ∘ reconstruct recovers the spec.
fn round_trips() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut fingerprint: f64 = 0.0;
    let (mut monotone, mut mixed) = (0, 0);
    for k in 0..25u64 {
        let d = yd(DIAGRAMS[1 + (k as usize) % (DIAGRAMS.len() - 1)]);
        let is_mixed = k % 2 == 1;
        let inertia = if is_mixed { mixed_inertia(&d) } else { positive_inertia(&d) };
        let order = order_for(&d);
        // Specs drawn by the generator are admissible at the center.
        let spec = random_curve(&d, &inertia, 500 + k, 0.3, 0.0, order)?.spec;
        let rt = spec_roundtrip(&spec, 0.0, order, NormalizeOptions::default())?;
        worst = worst.max(rt.curvature).max(rt.frame).max(rt.gauge_drift);
        let (curve, truth) = reconstruct(&spec, 0.0, order)?;
        let c = compare_invariants(&extract_quiver(&truth, 1e-8)?, &extract_quiver(&normal_frame(&curve)?, 1e-8)?, 1e-6)?;
        fingerprint = fingerprint.max(c.mismatch);
        if inertia.iter().any(|&(_, m)| m > 0) {
            mixed += 1;
        } else {
            monotone += 1;
        }
    }
    outcome(
        worst < 1e-6 && fingerprint < 1e-6 && mixed > 0 && monotone > 0,
        format!("25 specs ({monotone} monotone, {mixed} mixed), max curvature/frame/gauge mismatch {worst:.1e}, fingerprints {fingerprint:.1e} (< 1e-6)"),
    )
}

/// Criterion 7: fingerprints agree after 10 random symplectic maps.
fn invariance(corpus: &[TestCurve]) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut maps = 0;
    for (k, c) in corpus.iter().enumerate().step_by(3) {
        let q0 = extract_quiver(&normal_frame(&c.curve)?, 1e-8)?;
        for j in 0..10u64 {
            let s = random_symplectic(c.curve.half_dim(), 10_000 + 17 * k as u64 + j);
            let q = extract_quiver(&normal_frame(&c.curve.transform(&s))?, 1e-8)?;
            worst = worst.max(compare_invariants(&q0, &q, 1e-6)?.mismatch);
            maps += 1;
        }
    }
    outcome(worst < 1e-6, format!("{maps} curve/map pairs, max fingerprint mismatch {worst:.1e} (< 1e-6)"))
}

/// Criterion 8: `dim W_i = 2 Σ_{k ≤ i} p_k r_k`.
fn w_dimensions(corpus: &[TestCurve]) -> Result<Outcome> {
    let mut checked = 0;
    let mut bad = Vec::new();
    for c in corpus {
        let rep = analyze_flag(&c.curve, Tol::default())?;
        if rep.reduced.depth() < 2 {
            continue;
        }
        let cc = canonical_complements(&c.curve, &rep, Tol::default())?;
        let mut expected = 0;
        for (l, w) in rep.reduced.levels.iter().zip(cc.w_dims()) {
            expected += 2 * l.p * l.r;
            if w != expected {
                bad.push(format!("{}: {w} ≠ {expected}", c.label));
            }
        }
        checked += 1;
    }
    outcome(bad.is_empty() && checked > 0, format!("{checked} curves with d ≥ 2; mismatches: {bad:?}"))
}

/// Criterion 9: chain blocks against `ω(E_{a_j}^{(s+2)}, E_{a_i})`, up to sign.
fn chain_identity(frames: &[(String, NormalFrameResult)]) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut blocks = 0;
    for (_, res) in frames {
        let d = &res.diagram;
        for i in 0..d.depth() {
            for j in 0..i {
                let gap = d.levels[j].p - d.levels[i].p;
                if gap == 0 {
                    continue;
                }
                let chain = d.chain_pairs(i, j)?;
                let ai = res.e_block(d.first(i));
                let aj = res.e_block(d.first(j));
                for s in 1..=gap {
                    let (x, y) = chain[s - 1];
                    let w = omega_pairing_jet(&aj.derive_n(s + 2)?, &ai)?
                        .left_mul(&res.signature(j))
                        .right_mul(&res.signature(i));
                    let r = res.r.block(y, x);
                    let o = w.order().min(r.order());
                    let (w, r) = (w.truncate(o), r.truncate(o));
                    let scale = r.max_abs().max(w.max_abs()).max(1.0);
                    let mism = (&r - &w).max_abs().min((&r + &w).max_abs()) / scale;
                    worst = worst.max(mism);
                    blocks += 1;
                }
            }
        }
    }
    outcome(worst < 1e-7 && blocks > 0, format!("{blocks} chain blocks, max mismatch {worst:.1e} (< 1e-7)"))
}

/// Criterion 10: condition (G) on monotone curves; a hand-built
/// nonmonotone curve with mixed inertia goes through and round-trips.
fn condition_g(corpus: &[TestCurve]) -> Result<Outcome> {
    let mut monotone = 0;
    let mut failures = Vec::new();
    for c in corpus.iter().filter(|c| c.monotone) {
        let rep = analyze_flag(&c.curve, Tol::default())?;
        if !rep.condition_g || rep.monotonicity != Monotonicity::Nondecreasing {
            failures.push(c.label.clone());
        }
        monotone += 1;
    }
    // Level 1 positive, level 2 negative, with a chain coupling.
    let spec = CurvatureSpec {
        diagram: yd(&[2, 1]),
        inertia: vec![(1, 0), (0, 1)],
        arrows: vec![
            Arrow { a: superbox(1, 1), b: superbox(1, 1), jet: ArrowJet { coeffs: vec![vec![vec![0.2]], vec![vec![-0.1]]] } },
            Arrow { a: superbox(1, 2), b: superbox(1, 2), jet: ArrowJet { coeffs: vec![vec![vec![-0.3]]] } },
            Arrow { a: superbox(1, 1), b: superbox(2, 1), jet: ArrowJet { coeffs: vec![vec![vec![0.25]], vec![vec![0.1]]] } },
            Arrow { a: superbox(2, 1), b: superbox(2, 1), jet: ArrowJet { coeffs: vec![vec![vec![0.4]]] } },
        ],
    };
    let order = order_for(&spec.diagram);
    let (curve, _) = reconstruct(&spec, 0.0, order)?;
    let moved = curve.transform(&random_symplectic(3, 77));
    let rep = analyze_flag(&moved, Tol::default())?;
    let inertia: Vec<(usize, usize)> = rep.inertia.clone().unwrap_or_default().iter().map(|i| (i.plus, i.minus)).collect();
    let rt = spec_roundtrip(&spec, 0.0, order, NormalizeOptions::default())?;
    let a = normal_frame(&curve)?;
    let b = normal_frame(&moved)?;
    let m = match_frames(&a, &b, &random_symplectic(3, 77))?;
    let mixed_ok = rep.monotonicity == Monotonicity::Indefinite
        && rep.condition_g
        && inertia == spec.inertia
        && rt.worst() < 1e-6
        && m.curvature < 1e-6;
    outcome(
        failures.is_empty() && mixed_ok,
        format!(
            "{monotone} monotone curves with G (failures {failures:?}); mixed curve: {:?}, G = {}, inertia {inertia:?}, round trip {:.1e}, moved {:.1e}",
            rep.monotonicity,
            rep.condition_g,
            rt.worst(),
            m.curvature
        ),
    )
}

fn main() -> ExitCode {
    let corpus = match corpus() {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL  corpus generation: {e}");
            return ExitCode::FAILURE;
        }
    };
    let frames: Vec<(String, NormalFrameResult)> = corpus
        .iter()
        .filter_map(|c| normal_frame(&c.curve).ok().map(|r| (c.label.clone(), r)))
        .collect();
    let all_analyzed = frames.len() == corpus.len();

    let criteria: Vec<Criterion> = vec![
        ("1 flag duality", Box::new(|| duality(&corpus))),
        ("2 Young diagrams", Box::new(young_diagrams)),
        ("3 structural equation", Box::new(|| {
            let mut o = structural(&frames)?;
            o.passed &= all_analyzed;
            Ok(o)
        })),
        ("4 gauge uniqueness", Box::new(|| gauge(&corpus))),
        ("5 closed forms", Box::new(closed_forms)),
        ("6 reconstruction round trip", Box::new(round_trips)),
        ("7 symplectic invariance", Box::new(|| invariance(&corpus))),
        ("8 dim W_i", Box::new(|| w_dimensions(&corpus))),
        ("9 chain identity", Box::new(|| chain_identity(&frames))),
        ("10 condition G and mixed inertia", Box::new(|| condition_g(&corpus))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!("{}  {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
