//! Lifetime comparison across the three protocols on a shared deployment.
//!
//! Larger cells mean fewer simultaneously active nodes, so lifetime should
//! scale inversely with active count, i.e. proportionally with cell
//! measure. The shipped configs pit GAF squares (area 0.198 R^2) against
//! rotating-subcell cells (0.44 R^2) and sliding cells (1 R^2); measured
//! ratios land near the predicted 0.2 : 0.5 : 1.0.
//!
//! The full-size configs take a few minutes unoptimized; build with
//! --release, or pass --quick to lower the battery budget instead. Quick
//! mode keeps the node count intact: thinning the deployment skews the
//! occupancy of the emptiest cell and distorts the ratios, while a smaller
//! battery only shortens every lifetime by the same factor.
//!
//! Run with: cargo run --release --example compare_protocols

use gafcell::{compare_lifetimes, RunConfig, SimConfig};

fn load(name: &str, quick: bool) -> SimConfig {
    let path = format!("{}/examples/configs/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"));
    let mut config = RunConfig::parse(&text).unwrap();
    if quick {
        config.override_key("protocol", "initial_battery", "6").unwrap();
    }
    config.to_sim_config().unwrap()
}

fn main() {
    let quick = std::env::args().any(|a| a == "--quick");
    let configs: Vec<SimConfig> =
        ["gaf.cfg", "hgaf.cfg", "ehgaf.cfg"].iter().map(|n| load(n, quick)).collect();
    let seeds = [11, 22, 33];
    println!(
        "running {} configs x {} seeds{} ...",
        configs.len(),
        seeds.len(),
        if quick { " (quick mode)" } else { "" },
    );

    let report = compare_lifetimes(&configs, &seeds).unwrap();

    println!("\n{:<28} {:>10} {:>14} {:>22}", "config", "measure", "mean lifetime", "95% CI");
    for entry in &report.entries {
        println!(
            "{:<28} {:>10.4} {:>14.1} {:>22}",
            entry.label,
            entry.cell_measure,
            entry.mean_lifetime,
            format!("{:.1}..{:.1}", entry.ci95_low, entry.ci95_high),
        );
    }

    println!("\n{:<60} {:>9} {:>10}", "ratio", "measured", "predicted");
    for ratio in &report.ratios {
        println!(
            "{:<60} {:>9.4} {:>10.4}",
            format!("{} / {}", ratio.numerator, ratio.denominator),
            ratio.measured,
            ratio.predicted,
        );
    }
}
