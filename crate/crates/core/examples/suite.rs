//! Runs the invariant suite programmatically with one tolerance override.

use polycalc::harness::{run_suite, Status, SuiteConfig};

fn main() -> polycalc::Result<()> {
    let cfg = SuiteConfig::from_json(r#"{ "corpus": "atoms_only", "tolerances": { "commutant": 1e-15 } }"#)?;
    let report = run_suite(&cfg)?;
    for r in &report.results {
        let observed = r.observed.map(|v| format!("{v:.2e}")).unwrap_or_else(|| "-".into());
        println!("{:5} {:32} {observed:>9}  tol {:e} ({})", r.status.as_str(), r.name, r.tolerance, r.tolerance_source.as_str());
    }
    println!("skipped: {}, all passed: {}", report.count(Status::Skip), report.all_passed());
    Ok(())
}
