//! Chain-of-spheres field sizes checked by hit-or-miss Monte Carlo.
//!
//! A chain of n active nodes spaced one communication range apart covers
//! n balls minus the n-1 lenses where neighbors overlap. The closed form
//! for the lens is pi/12 (4R + t)(2R - t)^2; at spacing t = R it is
//! 5 pi / 12 R^3, which also caps the per-cell volume decrement.
//!
//! Run with: cargo run --example sphere_chain_monte_carlo

use gafcell::geometry::{lens_measure, SphereLensSpec};
use gafcell::{lemma1_field_size, sphere_chain_union_volume, Dimension};

fn main() {
    let r = 1.0;

    let lens = lens_measure(&SphereLensSpec::new(r, r).unwrap(), Dimension::Three);
    println!("overlap lens at spacing R: {:.9} (5 pi / 12 = {:.9})", lens, {
        5.0 * std::f64::consts::PI / 12.0
    });

    let samples = 1_000_000;
    println!("\n{:>3} {:>14} {:>14} {:>11} {:>11}", "n", "closed form", "monte carlo", "std err", "rel err");
    for n in 1..=3 {
        let closed = lemma1_field_size(n, r).unwrap();
        let estimate = sphere_chain_union_volume(n, r, samples, 7 + n as u64).unwrap();
        println!(
            "{n:>3} {closed:>14.6} {:>14.6} {:>11.6} {:>11.2e}",
            estimate.value,
            estimate.std_error,
            ((estimate.value - closed) / closed).abs(),
        );
    }

    // Consecutive chain sizes differ by ball minus lens: adding a cell to
    // the chain can add at most that much field volume.
    let s2 = lemma1_field_size(2, r).unwrap();
    let s3 = lemma1_field_size(3, r).unwrap();
    println!("\nper-cell increment: {:.9} (= ball - lens)", s3 - s2);
}
