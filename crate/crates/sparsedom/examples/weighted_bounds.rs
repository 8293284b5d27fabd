//! A small campaign of the maximal, Calderón–Zygmund and endpoint bounds,
//! written to a temporary directory as CSV and JSON.

use sparsedom::harness::{campaign_scenarios, run_scenarios, write_outputs, Check, RunFlags};

fn main() -> sparsedom::Result<()> {
    let mut scenarios = Vec::new();
    for check in [Check::Maximal, Check::Cz, Check::Endpoint] {
        scenarios.extend(campaign_scenarios(check, 10, 0));
    }
    let summary = run_scenarios(&scenarios, &RunFlags::default());
    for (k, v) in &summary.campaign_maxima {
        println!("{k}: max ratio {v:.4}");
    }
    let dir = std::env::temp_dir().join("sparsedom-weighted-bounds");
    write_outputs(&summary, &dir)?;
    println!("{} reports in {}", summary.reports.len(), dir.display());
    println!("all certificates pass: {}", summary.passed());
    Ok(())
}
