//! Closed-form cell metrics checked against the sampled distance oracle.
//!
//! The oracle samples random point pairs (vertices always included) inside
//! a cell and its face-mirror neighbor, so it cannot inherit a mistake from
//! the closed forms it is checking.
//!
//! Run with: cargo run --example shape_metrics_oracle

use gafcell::geometry::{max_distance_oracle, OracleTarget, PlacedShape, ALL_SHAPES};
use gafcell::{CellShape, Point};

fn main() {
    let samples = 100_000;
    let seed = 42;

    println!(
        "{:<13} {:>10} {:>12} {:>12} {:>13} {:>13}",
        "shape", "inradius", "circumrad", "diameter", "adj diameter", "oracle err"
    );
    for kind in ALL_SHAPES {
        let shape = CellShape::new(kind, 1.0).unwrap();
        let m = shape.metrics();

        let own = || OracleTarget::Shape(PlacedShape::at(shape, Point::ZERO));
        let neighbor =
            || OracleTarget::Shape(PlacedShape::at(shape, Point::ZERO).face_neighbor());
        let sampled_diameter = max_distance_oracle(&own(), &own(), samples, seed).unwrap();
        let sampled_adjacent =
            max_distance_oracle(&own(), &neighbor(), samples, seed + 1).unwrap();

        let err = ((sampled_diameter - m.diameter) / m.diameter)
            .abs()
            .max(((sampled_adjacent - m.adjacent_diameter) / m.adjacent_diameter).abs());
        println!(
            "{:<13} {:>10.6} {:>12.6} {:>12.6} {:>13.6} {:>13.2e}",
            kind.label(),
            m.inradius,
            m.circumradius,
            m.diameter,
            m.adjacent_diameter,
            err,
        );
    }
    println!("\n(unit size; adjacent diameter is cell plus face-mirror neighbor)");
}
