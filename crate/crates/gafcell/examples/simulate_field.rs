//! One full simulator run from a config, with the audit trail.
//!
//! Nodes are deployed uniformly at random, partitioned into cells, and
//! stepped through the duty-cycle machine until the first cell with members
//! has no live member (the network lifetime) or the horizon passes.
//! Periodic audits check both requirements on the live deployment.
//!
//! Run with: cargo run --example simulate_field

use gafcell::{run, series_csv, RunConfig};

fn main() {
    let config_text = "
        [field]
        width = 3
        height = 3

        [scheme]
        protocol = gaf
        shape = square
        cell_size = 0.44

        [protocol]
        discovery_duration = 1
        active_duration = 5
        sleep_duration = 5
        draw_active = 1
        draw_discovery = 0.01
        draw_sleep = 0.01
        initial_battery = 8

        [sim]
        node_count = 600
        seed = 3
        max_time = 2000
        audit_interval = 5
    ";
    let run_config = RunConfig::parse(config_text).unwrap();
    let sim_config = run_config.to_sim_config().unwrap();
    let report = run(&sim_config).unwrap();

    println!(
        "{} nodes in {} nonempty cells, step {}, horizon {}",
        report.node_count, report.nonempty_cell_count, report.time_step, sim_config.max_time,
    );
    if report.cell_death_occurred {
        println!(
            "first cell death at t = {:.1} (cell {:?}); model estimate {:.1}",
            report.lifetime_first_cell_death,
            report.first_dead_cell.unwrap(),
            report.lifetime_model_estimate,
        );
    } else {
        println!("no cell death by the horizon; model estimate {:.1}", report.lifetime_model_estimate);
    }
    println!("energy consumed: {:.1}", report.total_energy_consumed);

    let audits = &report.audits;
    println!(
        "audits: {} points, req I pass {:.1}%, req II pass {:.1}%, one-active census {:.1}% post-warmup",
        audits.points,
        audits.req1_pass_rate() * 100.0,
        audits.req2_pass_rate() * 100.0,
        audits.post_warmup_equality_rate() * 100.0,
    );

    println!("\nfirst audit samples (CSV):");
    for line in series_csv(&report).lines().take(6) {
        println!("  {line}");
    }
}
