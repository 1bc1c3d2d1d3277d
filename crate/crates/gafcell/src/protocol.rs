//! Per-node duty-cycle state machine.
//!
//! Every node cycles through three states: Sleeping (radio off), Discovery
//! (listening and announcing itself), and Active (serving as its cell's
//! relay). Nodes in Discovery or Active announce themselves once per step;
//! a node that hears a higher-ranked announcement from its own cell stands
//! down. Ranking prefers Active nodes over discovering ones, then longer
//! estimated active time, then the lower node id, so elections are total
//! and deterministic.
//!
//! [`step`] is the plain machine: any node may become active. The rotating
//! and sliding protocols restrict activity to one scheduled subcell per
//! cell; [`step_gated`] adds that restriction. An ineligible node never wins
//! an election and falls asleep instead, but an ineligible node that is
//! already active holds the cell until an eligible successor audibly takes
//! over, so coverage survives schedule changes and empty subcells.

use crate::partition::{CellIndex, SubcellPos};
use crate::point::Point;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("node {0} is dead and cannot be ranked")]
    DeadNode(u64),
    #[error("cannot elect from an empty set of announcements")]
    NoMessages,
    #[error("announcements span more than one cell ({0} vs {1})")]
    MixedCells(CellIndex, CellIndex),
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveDuration { name: &'static str, value: f64 },
    #[error("active power draw must be positive and finite, got {0}")]
    NonPositiveActiveDraw(f64),
    #[error("power draws must be nonnegative and finite, got {0}")]
    NegativeDraw(f64),
    #[error("sleep draw {sleep} exceeds discovery draw {discovery}")]
    SleepDrawExceedsDiscovery { sleep: f64, discovery: f64 },
    #[error("initial battery must be positive and finite, got {0}")]
    NonPositiveBattery(f64),
    #[error("step duration must be positive and finite, got {0}")]
    InvalidElapsed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    Sleeping,
    Discovery,
    Active,
}

/// Timer durations and power draws shared by every node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Time a node listens before the election decides (T_d).
    pub discovery_duration: f64,
    /// Time a node stays active before standing for re-election (T_a).
    pub active_duration: f64,
    /// Time a node sleeps before listening again (T_s).
    pub sleep_duration: f64,
    pub draw_active: f64,
    pub draw_discovery: f64,
    pub draw_sleep: f64,
    pub initial_battery: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            discovery_duration: 1.0,
            active_duration: 60.0,
            sleep_duration: 30.0,
            draw_active: 1.0,
            draw_discovery: 1.0,
            draw_sleep: 0.01,
            initial_battery: 1000.0,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let durations = [
            ("discovery_duration", self.discovery_duration),
            ("active_duration", self.active_duration),
            ("sleep_duration", self.sleep_duration),
        ];
        for (name, value) in durations {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ProtocolError::NonPositiveDuration { name, value });
            }
        }
        if !(self.draw_active > 0.0 && self.draw_active.is_finite()) {
            return Err(ProtocolError::NonPositiveActiveDraw(self.draw_active));
        }
        for draw in [self.draw_discovery, self.draw_sleep] {
            if !(draw >= 0.0 && draw.is_finite()) {
                return Err(ProtocolError::NegativeDraw(draw));
            }
        }
        if self.draw_sleep > self.draw_discovery {
            return Err(ProtocolError::SleepDrawExceedsDiscovery {
                sleep: self.draw_sleep,
                discovery: self.draw_discovery,
            });
        }
        if !(self.initial_battery > 0.0 && self.initial_battery.is_finite()) {
            return Err(ProtocolError::NonPositiveBattery(self.initial_battery));
        }
        Ok(())
    }

    pub fn draw(&self, state: NodeState) -> f64 {
        match state {
            NodeState::Sleeping => self.draw_sleep,
            NodeState::Discovery => self.draw_discovery,
            NodeState::Active => self.draw_active,
        }
    }

    /// Shortest of the three timer durations; simulation steps must be much
    /// smaller than this.
    pub fn min_duration(&self) -> f64 {
        self.discovery_duration.min(self.active_duration).min(self.sleep_duration)
    }
}

/// Self-announcement heard by same-cell neighbors during Discovery and
/// Active states. The sender's subcell rides along so schedule-gated
/// receivers can tell eligible announcers from ineligible ones; it is `None`
/// under plain GAF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryMessage {
    pub node_id: u64,
    pub cell: CellIndex,
    pub subcell: Option<SubcellPos>,
    pub est_active_time: f64,
    pub state: NodeState,
}

/// One sensor node's mutable state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeRuntime {
    pub id: u64,
    pub position: Point,
    pub battery: f64,
    pub state: NodeState,
    /// Time spent in the current state.
    pub state_timer: f64,
    pub cell: CellIndex,
    /// Subcell of `position` under the current lattice; `None` without
    /// subcells. Maintained by the caller when the lattice slides.
    pub subcell: Option<SubcellPos>,
}

impl NodeRuntime {
    /// A freshly deployed node: full battery, listening.
    pub fn fresh(id: u64, position: Point, cell: CellIndex, params: &ProtocolParams) -> Self {
        NodeRuntime {
            id,
            position,
            battery: params.initial_battery,
            state: NodeState::Discovery,
            state_timer: 0.0,
            cell,
            subcell: None,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.battery > 0.0
    }

    /// Restart the listening phase (used when the schedule reaches a
    /// sleeping node's subcell).
    pub fn wake_to_discovery(&mut self) {
        self.state = NodeState::Discovery;
        self.state_timer = 0.0;
    }
}

/// Election precedence. A greater key wins.
///
/// Order of decreasing importance: schedule eligibility, current state
/// (Active beats Discovery beats Sleeping), estimated active time, and
/// finally the lower node id.
#[derive(Debug, Clone, Copy)]
pub struct RankKey {
    pub eligible: bool,
    pub state_pref: u8,
    pub est_active_time: f64,
    pub id: u64,
}

impl RankKey {
    fn ordering(&self, other: &Self) -> Ordering {
        self.eligible
            .cmp(&other.eligible)
            .then(self.state_pref.cmp(&other.state_pref))
            .then(self.est_active_time.total_cmp(&other.est_active_time))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialEq for RankKey {
    fn eq(&self, other: &Self) -> bool {
        self.ordering(other) == Ordering::Equal
    }
}

impl Eq for RankKey {}

impl PartialOrd for RankKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.ordering(other))
    }
}

impl Ord for RankKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ordering(other)
    }
}

fn state_pref(state: NodeState) -> u8 {
    match state {
        NodeState::Sleeping => 0,
        NodeState::Discovery => 1,
        NodeState::Active => 2,
    }
}

/// Election key of a live node. Errors on a dead node.
pub fn rank(node: &NodeRuntime, params: &ProtocolParams) -> Result<RankKey, ProtocolError> {
    if !node.is_alive() {
        return Err(ProtocolError::DeadNode(node.id));
    }
    Ok(RankKey {
        eligible: true,
        state_pref: state_pref(node.state),
        est_active_time: node.battery / params.draw_active,
        id: node.id,
    })
}

/// Election key of an announcement. `active_subcell` gates eligibility for
/// the rotating protocols; pass `None` for plain GAF.
pub fn message_key(msg: &DiscoveryMessage, active_subcell: Option<SubcellPos>) -> RankKey {
    RankKey {
        eligible: active_subcell.map_or(true, |gate| msg.subcell == Some(gate)),
        state_pref: state_pref(msg.state),
        est_active_time: msg.est_active_time,
        id: msg.node_id,
    }
}

/// Pick the winner among same-cell announcements. Errors on an empty slate
/// or on announcements from different cells. The parameter block keeps the
/// call shape of [`rank`]; the outcome depends only on the announcements.
pub fn elect(
    messages: &[DiscoveryMessage],
    _params: &ProtocolParams,
) -> Result<DiscoveryMessage, ProtocolError> {
    let first = messages.first().ok_or(ProtocolError::NoMessages)?;
    for m in messages {
        if m.cell != first.cell {
            return Err(ProtocolError::MixedCells(first.cell, m.cell));
        }
    }
    Ok(*messages
        .iter()
        .max_by_key(|m| message_key(m, None))
        .expect("nonempty slate"))
}

/// Advance one node by `elapsed`, reacting to the announcements heard since
/// the previous step. Returns the updated node and its outgoing
/// announcements (at most one; none while sleeping or dead).
///
/// Battery drains at the rate of the state the step started in; a node
/// whose battery runs out mid-step consumes only the remainder and becomes
/// inert without transitioning or transmitting.
pub fn step(
    node: NodeRuntime,
    elapsed: f64,
    inbox: &[DiscoveryMessage],
    params: &ProtocolParams,
) -> Result<(NodeRuntime, Vec<DiscoveryMessage>), ProtocolError> {
    step_gated(node, elapsed, inbox, params, None)
}

/// [`step`] with a subcell schedule: only nodes inside `active_subcell` may
/// win elections. `None` disables the gate.
///
/// Gated deviations from the plain machine, chosen so that coverage never
/// lapses while the schedule moves:
/// - an ineligible discoverer falls asleep at the end of its window instead
///   of becoming active, and an ineligible sleeper rolls over instead of
///   waking;
/// - an ineligible active node keeps serving past its active window until a
///   higher-ranked eligible active announcement deposes it.
pub fn step_gated(
    node: NodeRuntime,
    elapsed: f64,
    inbox: &[DiscoveryMessage],
    params: &ProtocolParams,
    active_subcell: Option<SubcellPos>,
) -> Result<(NodeRuntime, Vec<DiscoveryMessage>), ProtocolError> {
    if !(elapsed > 0.0 && elapsed.is_finite()) {
        return Err(ProtocolError::InvalidElapsed(elapsed));
    }
    let mut node = node;
    if !node.is_alive() {
        return Ok((node, Vec::new()));
    }
    // Inbox announcements were minted one step ago, before this step's
    // drain; ranking against the same-vintage battery keeps comparisons
    // symmetric (otherwise two equal nodes would each defer to the other's
    // slightly staler, richer-looking announcement).
    let announced_battery = node.battery;
    let drain = params.draw(node.state) * elapsed;
    if drain >= node.battery {
        node.battery = 0.0;
        return Ok((node, Vec::new()));
    }
    node.battery -= drain;
    node.state_timer += elapsed;

    let eligible = active_subcell.map_or(true, |gate| node.subcell == Some(gate));
    let my_key = RankKey {
        eligible,
        state_pref: state_pref(node.state),
        est_active_time: announced_battery / params.draw_active,
        id: node.id,
    };
    let heard_better = |require_active: bool| {
        inbox.iter().any(|m| {
            m.cell == node.cell
                && m.node_id != node.id
                && (!require_active || m.state == NodeState::Active)
                && message_key(m, active_subcell) > my_key
        })
    };

    match node.state {
        NodeState::Discovery => {
            if heard_better(false) {
                node.state = NodeState::Sleeping;
                node.state_timer = 0.0;
            } else if node.state_timer >= params.discovery_duration {
                let leftover = node.state_timer - params.discovery_duration;
                if eligible {
                    // Nothing heard through the window outranked this node,
                    // so it wins its cell's election.
                    node.state = NodeState::Active;
                    node.state_timer = leftover;
                } else {
                    node.state = NodeState::Sleeping;
                    node.state_timer = 0.0;
                }
            }
        }
        NodeState::Active => {
            if heard_better(true) {
                node.state = NodeState::Sleeping;
                node.state_timer = 0.0;
            } else if node.state_timer >= params.active_duration {
                if eligible {
                    node.state = NodeState::Discovery;
                    node.state_timer -= params.active_duration;
                } else {
                    // Hold the cell: no eligible successor has taken over
                    // yet, and stepping down now would leave it uncovered.
                    node.state_timer -= params.active_duration;
                }
            }
        }
        NodeState::Sleeping => {
            if node.state_timer >= params.sleep_duration {
                if eligible {
                    node.state = NodeState::Discovery;
                    node.state_timer -= params.sleep_duration;
                } else {
                    node.state_timer = 0.0;
                }
            }
        }
    }

    let mut outbox = Vec::new();
    if matches!(node.state, NodeState::Discovery | NodeState::Active) {
        outbox.push(DiscoveryMessage {
            node_id: node.id,
            cell: node.cell,
            subcell: node.subcell,
            est_active_time: node.battery / params.draw_active,
            state: node.state,
        });
    }
    Ok((node, outbox))
}
