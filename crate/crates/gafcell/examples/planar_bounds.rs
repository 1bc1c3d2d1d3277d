//! Maximum energy-efficient cell sizes for the 2D protocols.
//!
//! For each protocol/shape combination the engine reports the largest size
//! satisfying requirement I (adjacent active nodes stay in range) and
//! requirement II (an active node reaches everyone in its own cell); the
//! binding constraint is whichever is smaller.
//!
//! Run with: cargo run --example planar_bounds

use gafcell::{max_cell, table1, Protocol, ShapeKind, SubcellRegime};

fn main() {
    let r = 1.0;

    println!("square-cell maxima at R = {r}:");
    for protocol in [Protocol::Gaf, Protocol::Hgaf, Protocol::Ehgaf] {
        let report =
            max_cell(protocol, ShapeKind::Square, r, &SubcellRegime::Infinitesimal).unwrap();
        println!(
            "  {:<6} req I <= {:.6}  req II <= {:.6}  ->  side {:.6}, area {:.6} ({:?} binds)",
            report.protocol.label(),
            report.req1_max_size,
            report.req2_max_size,
            report.max_size,
            report.max_measure,
            report.binding,
        );
    }

    // A finite subcell costs area: the worst adjacent pair stretches to
    // sqrt(d^2 + (side + d)^2), so the side shrinks as d grows.
    println!("\nrotating protocol, square cells, finite subcells:");
    for d in [0.05, 0.2, 0.4] {
        let report =
            max_cell(Protocol::Hgaf, ShapeKind::Square, r, &SubcellRegime::Finite { subcell: d })
                .unwrap();
        println!("  d = {d:.2}  ->  side {:.6}, area {:.6}", report.max_size, report.max_measure);
    }

    // The published planar summary: area coefficients 0.2, 0.5, 1.0 for
    // squares under the three protocols, and ~1.299 for sliding triangles.
    println!("\nplanar summary (area / R^2):");
    for row in table1(r).unwrap() {
        println!(
            "  {:<6} {:<9} size {:.6}  coefficient {:.6}",
            row.protocol.label(),
            row.shape.label(),
            row.max_size,
            row.measure_coefficient,
        );
    }
}
