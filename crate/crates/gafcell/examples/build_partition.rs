//! Constructing a cell lattice, locating points, and auditing the layout.
//!
//! The deployment-independent region audits bound the worst case over every
//! possible node placement: requirement I over the active regions of
//! neighboring cells, requirement II over each cell against its own active
//! region. A lattice at the protocol's maximum cell size passes both; one
//! 5% over fails.
//!
//! Run with: cargo run --example build_partition

use gafcell::{build_partition, Dimension, Field, PartitionScheme, Point, ShapeKind};

fn main() {
    let comm_range: f64 = 1.0;
    let max_side = comm_range / 5f64.sqrt();

    let field = Field::new(
        Dimension::Two,
        Point::new(0.0, 0.0, 0.0),
        Point::new(10.0, 10.0, 0.0),
    )
    .unwrap();
    let scheme = PartitionScheme::gaf(ShapeKind::Square, 2.0).unwrap();
    let partition = build_partition(field, scheme).unwrap();
    println!("10 x 10 field, square cells of side 2: {} cells", partition.num_cells());

    for p in [Point::new(0.1, 0.1, 0.0), Point::new(5.0, 5.0, 0.0), Point::new(9.9, 9.9, 0.0)] {
        let located = partition.locate(p).unwrap();
        println!("  ({}, {}) -> cell ({}, {})", p.x, p.y, located.cell.i, located.cell.j);
    }

    // The same field at the GAF maximum passes both region audits; at 1.05
    // times the maximum, adjacent active regions can exceed the range.
    for (label, side) in [("maximum", max_side), ("5% oversized", 1.05 * max_side)] {
        let scheme = PartitionScheme::gaf(ShapeKind::Square, side).unwrap();
        let partition = build_partition(field, scheme).unwrap();
        let req1 = partition.audit_region_req1(comm_range);
        let req2 = partition.audit_region_req2(comm_range);
        println!(
            "side = {side:.6} ({label}): req I worst {:.6} ({}), req II worst {:.6} ({})",
            req1.worst_distance,
            if req1.pass { "pass" } else { "FAIL" },
            req2.worst_distance,
            if req2.pass { "pass" } else { "FAIL" },
        );
    }

    // Lattice records for external plotting: one line per clipped cell.
    let scheme = PartitionScheme::gaf(ShapeKind::RegularHexagon, 1.5).unwrap();
    let partition = build_partition(field, scheme).unwrap();
    let export = partition.export_text();
    println!("\nhexagon lattice export ({} cells), first records:", partition.num_cells());
    for line in export.lines().take(7) {
        println!("  {line}");
    }
}
