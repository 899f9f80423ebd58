//! Curve, spec and analysis files as used by the `lgc` binary.

use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::flag::analyze_flag;
use lagrangian_curves::generators::random_curve;
use lagrangian_curves::io::{to_json, AnalysisFile, CurveFile, SpecFile};
use lagrangian_curves::normal_frame::{normal_frame, verify_normal};
use lagrangian_curves::quiver::extract_quiver;
use lagrangian_curves::subspace::Tol;

fn main() -> lagrangian_curves::Result<()> {
    let d = YoungDiagram::new(vec![2, 1])?;
    let g = random_curve(&d, &[(1, 0), (1, 0)], 2, 0.3, 0.0, 10)?;

    let curve_text = to_json(&CurveFile::from_curve(&g.curve))?;
    println!("curve file: {} bytes, starts {}", curve_text.len(), &curve_text[..60]);
    let back: CurveFile = serde_json::from_str(&curve_text)?;
    let curve = back.to_curve(Tol::default())?;
    println!("read back exactly: {}", curve.frame == g.curve.frame);

    println!("spec file: {}", to_json(&SpecFile::new(g.spec.clone()))?.trim_end());

    let report = analyze_flag(&curve, Tol::default())?;
    let res = normal_frame(&curve)?;
    let check = verify_normal(&res, &curve, 1e-8)?;
    let quiver = extract_quiver(&res, 1e-8)?;
    let analysis = to_json(&AnalysisFile::new(&report, &res, &quiver, &check))?;
    let v: serde_json::Value = serde_json::from_str(&analysis)?;
    println!("analysis keys: {:?}", v.as_object().map(|o| o.keys().collect::<Vec<_>>()));
    Ok(())
}
