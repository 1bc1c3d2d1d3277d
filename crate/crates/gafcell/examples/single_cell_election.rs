//! The duty-cycle state machine in one cell, stepped by hand.
//!
//! Five nodes share a cell. Each listens for the discovery window, the
//! best-ranked announcer (longest expected active time, then highest id)
//! becomes active, and the rest sleep. When the active node's window ends
//! or it dies, the next election picks a successor, so the cell burns
//! roughly one active battery at a time: the colony lasts about k times a
//! single battery.
//!
//! Run with: cargo run --example single_cell_election

use gafcell::{step, CellIndex, DiscoveryMessage, NodeRuntime, NodeState, Point, ProtocolParams};

fn state_letter(state: NodeState) -> char {
    match state {
        NodeState::Sleeping => 's',
        NodeState::Discovery => 'd',
        NodeState::Active => 'A',
    }
}

fn main() {
    let params = ProtocolParams {
        discovery_duration: 1.0,
        active_duration: 10.0,
        sleep_duration: 10.0,
        draw_active: 1.0,
        draw_discovery: 0.1,
        draw_sleep: 0.001,
        initial_battery: 30.0,
    };
    let cell = CellIndex::new(0, 0, 0);
    let k = 5;
    let mut nodes: Vec<NodeRuntime> = (0..k)
        .map(|i| {
            NodeRuntime::fresh(i as u64, Point::new(0.1 * i as f64, 0.0, 0.0), cell, &params)
        })
        .collect();

    let dt = 0.1;
    let mut pending: Vec<DiscoveryMessage> = Vec::new();
    let mut time = 0.0;
    let mut last_active_count = usize::MAX;
    println!("t      states  live active");
    while nodes.iter().any(|n| n.is_alive()) {
        let inbox = std::mem::take(&mut pending);
        for node in nodes.iter_mut() {
            let (next, outbox) = step(*node, dt, &inbox, &params).unwrap();
            *node = next;
            pending.extend(outbox);
        }
        time += dt;

        let actives =
            nodes.iter().filter(|n| n.is_alive() && n.state == NodeState::Active).count();
        // Print only when the active census changes, to keep the trace short.
        if actives != last_active_count {
            let letters: String = nodes
                .iter()
                .map(|n| if n.is_alive() { state_letter(n.state) } else { 'x' })
                .collect();
            let live = nodes.iter().filter(|n| n.is_alive()).count();
            println!("{time:<6.1} {letters:<7} {live:<4} {actives}");
            last_active_count = actives;
        }
    }

    println!(
        "\ncolony dead at t = {time:.1}; k * battery = {:.1} (election windows account for the rest)",
        k as f64 * params.initial_battery
    );
}
