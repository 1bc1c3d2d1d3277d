//! Deterministic fixed-step simulation tying lattices and the duty-cycle
//! machine together: seeded uniform deployment, rotation/sliding epochs,
//! cell-local message delivery, energy accounting, lifetime metrics, and
//! periodic connectivity audits.
//!
//! Lifetime is operational: the first instant some cell with member nodes
//! has no live member left (that cell can never field a relay again). The
//! proportional analytic estimate is reported alongside, never substituted.
//!
//! Audit semantics: at each audit instant every cell is represented by its
//! acting relay, which is its live Active node when one exists, otherwise
//! its best-ranked listening (Discovery) node; a handover in progress keeps
//! the radio on, so the cell stays covered through the election window.
//! Cells whose members are all asleep or dead are uncovered. Alongside
//! these position audits, deployment-independent region audits bound the
//! worst case over everywhere an active node could stand.

use crate::partition::{
    build_partition, CellIndex, Field, Partition, PartitionError, PartitionScheme,
};
use crate::bounds::Protocol;
use crate::geometry::{CellShape, Dimension};
use crate::point::Point;
use crate::protocol::{rank, step_gated, DiscoveryMessage, NodeRuntime, NodeState, ProtocolError, ProtocolParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("node count must be at least 1, got {0}")]
    InvalidNodeCount(usize),
    #[error("communication range must be positive and finite, got {0}")]
    InvalidCommRange(f64),
    #[error("time step {step} exceeds a tenth of the shortest timer duration ({limit})")]
    StepTooLarge { step: f64, limit: f64 },
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("max sim time must be positive and finite, got {0}")]
    InvalidMaxTime(f64),
    #[error("audit interval must be positive and finite, got {0}")]
    InvalidAuditInterval(f64),
    #[error("lifetime comparison needs at least 3 seeds, got {0}")]
    TooFewSeeds(usize),
    #[error("lifetime comparison needs at least 2 configurations, got {0}")]
    TooFewConfigs(usize),
    #[error("compared configurations must share {0}")]
    MismatchedComparison(&'static str),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Everything one run needs. `time_step` must be at most a tenth of the
/// shortest timer duration so window expiries are resolved crisply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub field: Field,
    pub scheme: PartitionScheme,
    pub params: ProtocolParams,
    pub comm_range: f64,
    pub node_count: usize,
    pub seed: u64,
    pub time_step: f64,
    pub max_time: f64,
    pub audit_interval: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.node_count < 1 {
            return Err(SimError::InvalidNodeCount(self.node_count));
        }
        if !(self.comm_range > 0.0 && self.comm_range.is_finite()) {
            return Err(SimError::InvalidCommRange(self.comm_range));
        }
        self.params.validate()?;
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(SimError::InvalidTimeStep(self.time_step));
        }
        let limit = self.params.min_duration() / 10.0;
        if self.time_step > limit * (1.0 + 1e-12) {
            return Err(SimError::StepTooLarge { step: self.time_step, limit });
        }
        if !(self.max_time > 0.0 && self.max_time.is_finite()) {
            return Err(SimError::InvalidMaxTime(self.max_time));
        }
        if !(self.audit_interval > 0.0 && self.audit_interval.is_finite()) {
            return Err(SimError::InvalidAuditInterval(self.audit_interval));
        }
        if self.scheme.strict() {
            self.scheme.validate_against_range(self.comm_range)?;
        }
        Ok(())
    }
}

/// Node positions drawn i.i.d. uniform over the field, deterministic per
/// seed: one ChaCha8 stream, axes in x, y, z order per node.
pub fn deploy(config: &SimConfig) -> Result<Vec<Point>, SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let origin = config.field.origin();
    let extent = config.field.extent();
    let volumetric = config.field.dimension() == Dimension::Three;
    let mut positions = Vec::with_capacity(config.node_count);
    for _ in 0..config.node_count {
        let x = rng.random_range(origin.x..=origin.x + extent.x);
        let y = rng.random_range(origin.y..=origin.y + extent.y);
        let z = if volumetric { rng.random_range(origin.z..=origin.z + extent.z) } else { 0.0 };
        positions.push(Point::new(x, y, z));
    }
    Ok(positions)
}

/// One audited instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub time: f64,
    pub active_count: u32,
    pub live_count: u32,
    /// Worst relay-to-relay distance between adjacent cells.
    pub req1_worst: f64,
    /// Worst member-to-relay distance within a cell.
    pub req2_worst: f64,
    pub req1_pass: bool,
    pub req2_pass: bool,
    pub region_req1_pass: bool,
    pub region_req2_pass: bool,
    /// Active count equals the number of cells with live members.
    pub active_matches_cells: bool,
}

/// Audit totals over a run. "Post-warmup" excludes instants before the
/// first discovery window (plus two steps of slack) has elapsed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub points: usize,
    pub post_warmup_points: usize,
    pub req1_failures: usize,
    pub req2_failures: usize,
    pub region_req1_failures: usize,
    pub region_req2_failures: usize,
    pub post_warmup_req1_failures: usize,
    pub post_warmup_req2_failures: usize,
    pub post_warmup_region_req1_failures: usize,
    pub post_warmup_region_req2_failures: usize,
    /// Instants where the total active count equals the nonempty cell count.
    pub equality_points: usize,
    pub post_warmup_equality_points: usize,
}

impl AuditSummary {
    pub fn req1_pass_rate(&self) -> f64 {
        if self.points == 0 {
            return 1.0;
        }
        1.0 - self.req1_failures as f64 / self.points as f64
    }

    pub fn req2_pass_rate(&self) -> f64 {
        if self.points == 0 {
            return 1.0;
        }
        1.0 - self.req2_failures as f64 / self.points as f64
    }

    pub fn post_warmup_equality_rate(&self) -> f64 {
        if self.post_warmup_points == 0 {
            return 1.0;
        }
        self.post_warmup_equality_points as f64 / self.post_warmup_points as f64
    }

    pub fn total_failures(&self) -> usize {
        self.req1_failures + self.req2_failures + self.region_req1_failures + self.region_req2_failures
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// First instant a cell with members had no live member; equals
    /// `end_time` when no cell died before `max_time`.
    pub lifetime_first_cell_death: f64,
    pub cell_death_occurred: bool,
    pub first_dead_cell: Option<CellIndex>,
    /// Analytic estimate: N·B divided by the steady-state draw of one
    /// active per nonempty cell with everyone else asleep.
    pub lifetime_model_estimate: f64,
    pub end_time: f64,
    pub node_count: usize,
    pub nonempty_cell_count: usize,
    pub total_energy_consumed: f64,
    pub time_step: f64,
    /// Time before which audit instants count as warmup.
    pub warmup_time: f64,
    /// Live Active nodes after every step.
    pub active_series: Vec<u32>,
    /// Audit-instant samples (the CSV rows).
    pub samples: Vec<SeriesSample>,
    pub audits: AuditSummary,
    /// Cells that emptied of live members, with the time it happened.
    pub per_cell_death_times: Vec<(CellIndex, f64)>,
}

/// The audit-instant series as CSV (header row; '.' decimals, ',' separator).
pub fn series_csv(report: &SimReport) -> String {
    let mut out = String::from("time,active_count,live_count,req1_worst,req2_worst\n");
    for s in &report.samples {
        out.push_str(&format!(
            "{:.6},{},{},{:.6},{:.6}\n",
            s.time, s.active_count, s.live_count, s.req1_worst, s.req2_worst
        ));
    }
    out
}

struct Roster {
    /// Deployed nodes erased by death, indexed by id.
    nodes: Vec<NodeRuntime>,
    /// Per cell: (member count, live member count). Members include dead
    /// nodes; the cell died when its live count hit zero.
    occupancy: BTreeMap<CellIndex, (u32, u32)>,
}

impl Roster {
    fn rebuild_occupancy(&mut self) {
        self.occupancy.clear();
        for n in &self.nodes {
            let entry = self.occupancy.entry(n.cell).or_insert((0, 0));
            entry.0 += 1;
            if n.is_alive() {
                entry.1 += 1;
            }
        }
    }

    fn first_dead_cell(&self) -> Option<CellIndex> {
        self.occupancy
            .iter()
            .find(|(_, &(members, live))| members > 0 && live == 0)
            .map(|(&c, _)| c)
    }
}

/// Execute one run. See the module docs for the step order and audit
/// semantics.
pub fn run(config: &SimConfig) -> Result<SimReport, SimError> {
    config.validate()?;
    let mut partition = build_partition(config.field, config.scheme)?;
    let positions = deploy(config)?;
    let params = &config.params;

    let mut roster = Roster { nodes: Vec::with_capacity(config.node_count), occupancy: BTreeMap::new() };
    for (id, &pos) in positions.iter().enumerate() {
        let located = partition.locate(pos)?;
        let mut node = NodeRuntime::fresh(id as u64, pos, located.cell, params);
        node.subcell = located.subcell;
        roster.nodes.push(node);
    }
    roster.rebuild_occupancy();

    let nonempty_cell_count = roster.occupancy.len();
    let model_denominator = nonempty_cell_count as f64 * params.draw_active
        + (config.node_count - nonempty_cell_count.min(config.node_count)) as f64
            * params.draw_sleep;
    let lifetime_model_estimate =
        config.node_count as f64 * params.initial_battery / model_denominator;

    let dt = config.time_step;
    let warmup_time = params.discovery_duration + 2.0 * dt;
    let epoch = config.scheme.rotation_epoch();
    let mut next_epoch = epoch.unwrap_or(f64::INFINITY);
    let mut next_audit = config.audit_interval;

    let mut pending: Vec<DiscoveryMessage> = Vec::new();
    let mut active_series: Vec<u32> = Vec::new();
    let mut samples: Vec<SeriesSample> = Vec::new();
    let mut audits = AuditSummary::default();
    let mut per_cell_death_times: Vec<(CellIndex, f64)> = Vec::new();
    let mut total_energy = 0.0f64;
    let mut death: Option<(f64, CellIndex)> = None;

    let mut step_index: u64 = 0;
    let mut time = 0.0f64;
    while time + dt <= config.max_time * (1.0 + 1e-12) {
        // Rotation/sliding epochs due at the start of this step.
        while time >= next_epoch - 1e-9 * epoch.unwrap_or(1.0) {
            partition.advance_epoch();
            if config.scheme.protocol() == Protocol::Ehgaf {
                // The lattice slid: cell and subcell assignments move.
                for node in &mut roster.nodes {
                    let located = partition.locate(node.position)?;
                    node.cell = located.cell;
                    node.subcell = located.subcell;
                }
                roster.rebuild_occupancy();
                if death.is_none() {
                    if let Some(cell) = roster.first_dead_cell() {
                        death = Some((time, cell));
                        per_cell_death_times.push((cell, time));
                    }
                }
            }
            if let Some(gate) = partition.active_subcell() {
                for node in &mut roster.nodes {
                    if node.is_alive()
                        && node.state == NodeState::Sleeping
                        && node.subcell == Some(gate)
                    {
                        node.wake_to_discovery();
                    }
                }
            }
            next_epoch += epoch.unwrap_or(f64::INFINITY);
        }
        if death.is_some() {
            break;
        }

        // Deliver last step's announcements cell-locally.
        let mut inboxes: BTreeMap<CellIndex, Vec<DiscoveryMessage>> = BTreeMap::new();
        for msg in pending.drain(..) {
            inboxes.entry(msg.cell).or_default().push(msg);
        }
        let empty: Vec<DiscoveryMessage> = Vec::new();
        let gate = partition.active_subcell();

        // Step every node in id order.
        let mut active_count: u32 = 0;
        for node in &mut roster.nodes {
            let before = *node;
            let inbox = inboxes.get(&node.cell).unwrap_or(&empty);
            let (after, outbox) = step_gated(before, dt, inbox, params, gate)?;
            total_energy += before.battery - after.battery;
            if before.is_alive() && !after.is_alive() {
                let entry = roster
                    .occupancy
                    .get_mut(&after.cell)
                    .expect("every node's cell is tracked");
                entry.1 -= 1;
                if entry.1 == 0 {
                    let when = (step_index + 1) as f64 * dt;
                    per_cell_death_times.push((after.cell, when));
                    if death.is_none() {
                        death = Some((when, after.cell));
                    }
                }
            }
            if after.is_alive() && after.state == NodeState::Active {
                active_count += 1;
            }
            pending.extend(outbox);
            *node = after;
        }

        step_index += 1;
        time = step_index as f64 * dt;
        active_series.push(active_count);

        if death.is_some() {
            break;
        }

        // Periodic audits.
        while time >= next_audit - 1e-9 * config.audit_interval {
            let sample = audit_instant(&partition, &roster, params, config.comm_range, time);
            record_audit(&mut audits, &sample, warmup_time);
            samples.push(sample);
            next_audit += config.audit_interval;
        }
    }

    let end_time = time;
    let (lifetime, first_dead_cell, cell_death_occurred) = match death {
        Some((when, cell)) => (when, Some(cell), true),
        None => (end_time, None, false),
    };

    Ok(SimReport {
        lifetime_first_cell_death: lifetime,
        cell_death_occurred,
        first_dead_cell,
        lifetime_model_estimate,
        end_time,
        node_count: config.node_count,
        nonempty_cell_count,
        total_energy_consumed: total_energy,
        time_step: dt,
        warmup_time,
        active_series,
        samples,
        audits,
        per_cell_death_times,
    })
}

fn audit_instant(
    partition: &Partition,
    roster: &Roster,
    params: &ProtocolParams,
    comm_range: f64,
    time: f64,
) -> SeriesSample {
    // Acting relay per cell: the live Active node, else the best-ranked
    // listening node (covering the cell through an election window).
    let mut relays: BTreeMap<CellIndex, (bool, crate::protocol::RankKey, Point)> = BTreeMap::new();
    let mut members: Vec<(CellIndex, Point)> = Vec::new();
    let mut live_count: u32 = 0;
    let mut active_count: u32 = 0;
    let mut nonempty: BTreeMap<CellIndex, ()> = BTreeMap::new();
    for node in &roster.nodes {
        if !node.is_alive() {
            continue;
        }
        live_count += 1;
        members.push((node.cell, node.position));
        nonempty.entry(node.cell).or_insert(());
        if node.state == NodeState::Active {
            active_count += 1;
        }
        let is_relay_candidate = matches!(node.state, NodeState::Active | NodeState::Discovery);
        if !is_relay_candidate {
            continue;
        }
        let key = rank(node, params).expect("live node ranks");
        let is_active = node.state == NodeState::Active;
        match relays.get(&node.cell) {
            Some(&(best_is_active, best_key, _))
                if (best_is_active, best_key) >= (is_active, key) => {}
            _ => {
                relays.insert(node.cell, (is_active, key, node.position));
            }
        }
    }
    let relay_points: BTreeMap<CellIndex, Point> =
        relays.into_iter().map(|(c, (_, _, p))| (c, p)).collect();

    let req1 = partition.audit_req1(&relay_points, comm_range);
    let req2 = partition.audit_req2(&relay_points, &members, comm_range);
    let region1 = partition.audit_region_req1(comm_range);
    let region2 = partition.audit_region_req2(comm_range);

    SeriesSample {
        time,
        active_count,
        live_count,
        req1_worst: req1.worst_distance,
        req2_worst: req2.worst_distance,
        req1_pass: req1.pass,
        req2_pass: req2.pass,
        region_req1_pass: region1.pass,
        region_req2_pass: region2.pass,
        active_matches_cells: active_count as usize == nonempty.len(),
    }
}

fn record_audit(audits: &mut AuditSummary, sample: &SeriesSample, warmup_time: f64) {
    audits.points += 1;
    let post = sample.time >= warmup_time;
    if post {
        audits.post_warmup_points += 1;
    }
    let count = |fail: bool, total: &mut usize, post_total: &mut usize| {
        if fail {
            *total += 1;
            if post {
                *post_total += 1;
            }
        }
    };
    count(!sample.req1_pass, &mut audits.req1_failures, &mut audits.post_warmup_req1_failures);
    count(!sample.req2_pass, &mut audits.req2_failures, &mut audits.post_warmup_req2_failures);
    count(
        !sample.region_req1_pass,
        &mut audits.region_req1_failures,
        &mut audits.post_warmup_region_req1_failures,
    );
    count(
        !sample.region_req2_pass,
        &mut audits.region_req2_failures,
        &mut audits.post_warmup_region_req2_failures,
    );
    if sample.active_matches_cells {
        audits.equality_points += 1;
        if post {
            audits.post_warmup_equality_points += 1;
        }
    }
}

/// One scheme's rows in a lifetime comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub label: String,
    pub cell_measure: f64,
    pub lifetimes: Vec<f64>,
    pub mean_lifetime: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

/// Measured-vs-predicted lifetime ratio for one config pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub numerator: String,
    pub denominator: String,
    pub measured: f64,
    pub measured_ci95_low: f64,
    pub measured_ci95_high: f64,
    /// Cell-measure ratio: the analytic prediction (active count is
    /// inversely proportional to cell measure).
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub seeds: Vec<u64>,
    pub entries: Vec<ComparisonEntry>,
    pub ratios: Vec<RatioEntry>,
}

/// Run every config under every seed and compare mean first-cell-death
/// lifetimes, pairwise, against the cell-measure prediction.
///
/// The configs must share the field, node count, communication range, and
/// protocol parameters, so the schemes are the only difference; at least
/// three seeds are required for a standard error.
pub fn compare_lifetimes(
    configs: &[SimConfig],
    seeds: &[u64],
) -> Result<ComparisonReport, SimError> {
    if configs.len() < 2 {
        return Err(SimError::TooFewConfigs(configs.len()));
    }
    if seeds.len() < 3 {
        return Err(SimError::TooFewSeeds(seeds.len()));
    }
    let head = &configs[0];
    for c in &configs[1..] {
        if c.field != head.field {
            return Err(SimError::MismatchedComparison("the field"));
        }
        if c.node_count != head.node_count {
            return Err(SimError::MismatchedComparison("the node count"));
        }
        if c.comm_range != head.comm_range {
            return Err(SimError::MismatchedComparison("the communication range"));
        }
        if c.params != head.params {
            return Err(SimError::MismatchedComparison("the protocol parameters"));
        }
    }

    let mut entries = Vec::with_capacity(configs.len());
    for config in configs {
        let scheme = config.scheme;
        let shape = CellShape::new(scheme.shape(), scheme.cell_size())
            .expect("constructible schemes have valid shapes");
        let mut lifetimes = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut c = *config;
            c.seed = seed;
            lifetimes.push(run(&c)?.lifetime_first_cell_death);
        }
        let n = lifetimes.len() as f64;
        let mean = lifetimes.iter().sum::<f64>() / n;
        let var = lifetimes.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std_error = (var / n).sqrt();
        entries.push(ComparisonEntry {
            label: format!(
                "{} {} r={}",
                scheme.protocol().label(),
                scheme.shape().label(),
                (scheme.cell_size() * 1e4).round() / 1e4
            ),
            cell_measure: shape.metrics().measure,
            lifetimes,
            mean_lifetime: mean,
            std_error,
            ci95_low: mean - 1.96 * std_error,
            ci95_high: mean + 1.96 * std_error,
        });
    }

    let mut ratios = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let (a, b) = (&entries[i], &entries[j]);
            let measured = a.mean_lifetime / b.mean_lifetime;
            // Delta-method standard error of the ratio of means.
            let rel_var = (a.std_error / a.mean_lifetime).powi(2)
                + (b.std_error / b.mean_lifetime).powi(2);
            let se = measured * rel_var.sqrt();
            ratios.push(RatioEntry {
                numerator: a.label.clone(),
                denominator: b.label.clone(),
                measured,
                measured_ci95_low: measured - 1.96 * se,
                measured_ci95_high: measured + 1.96 * se,
                predicted: a.cell_measure / b.cell_measure,
            });
        }
    }

    Ok(ComparisonReport { seeds: seeds.to_vec(), entries, ratios })
}
