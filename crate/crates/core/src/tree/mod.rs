//! Settlement tree rebuilt from the event log, plus the validator.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::catalog::SOL_ID;
use crate::dynamics::Impulse;
use crate::error::{Error, Result};
use crate::strategies::ShipKind;

pub mod events;
pub mod validate;

pub use events::{events_from_str, events_to_string, read_events, write_events, EventNote, EventRecord, EVENTS_HEADER};
pub use validate::{validate, Rule, RuleResult, ValidationConfig, ValidationReport, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub star: u32,
    /// Sol for first-generation settlements.
    pub parent_star: u32,
    pub arrival_t: f64,
    pub kind: ShipKind,
    pub vehicle_id: u32,
    pub generation: usize,
    pub impulses: Vec<Impulse>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationStat {
    pub generation: usize,
    pub new: usize,
    pub cumulative: usize,
}

/// Rooted at Sol. Generation 1 holds fast-ship and pod settlements; a
/// settler's node sits one generation below its parent's.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SettlementTree {
    nodes: Vec<TreeNode>,
}

impl SettlementTree {
    pub fn from_events(events: &[EventRecord]) -> Result<Self> {
        let mut by_vehicle: BTreeMap<u32, Vec<&EventRecord>> = BTreeMap::new();
        for e in events {
            by_vehicle.entry(e.vehicle_id).or_default().push(e);
        }
        let mut pending = Vec::new();
        for (vid, mut rows) in by_vehicle {
            rows.sort_by(|a, b| a.t_myr.total_cmp(&b.t_myr).then(a.event_id.cmp(&b.event_id)));
            let kind = rows[0].vehicle_kind;
            if !kind.settles() {
                continue;
            }
            let last = rows[rows.len() - 1];
            if last.note != EventNote::Rendezvous {
                return Err(Error::EventLog {
                    record: last.event_id as usize,
                    reason: format!("vehicle {vid} does not end in a rendezvous"),
                });
            }
            pending.push(TreeNode {
                star: last.target_star,
                parent_star: rows[0].parent_star,
                arrival_t: last.t_myr,
                kind,
                vehicle_id: vid,
                generation: 0,
                impulses: rows
                    .iter()
                    .filter(|r| r.note.is_impulse())
                    .map(|r| Impulse::new(r.t_myr, r.dv()))
                    .collect(),
            });
        }
        pending.sort_by(|a, b| a.arrival_t.total_cmp(&b.arrival_t).then(a.star.cmp(&b.star)));
        let mut generation_of: HashMap<u32, usize> = HashMap::new();
        for node in &mut pending {
            node.generation = match node.kind {
                ShipKind::Settler => {
                    let g = generation_of.get(&node.parent_star).ok_or_else(|| Error::EventLog {
                        record: node.vehicle_id as usize,
                        reason: format!("settler parent {} settled after departure or never", node.parent_star),
                    })?;
                    g + 1
                }
                _ => 1,
            };
            if node.star == SOL_ID || generation_of.insert(node.star, node.generation).is_some() {
                return Err(Error::EventLog {
                    record: node.vehicle_id as usize,
                    reason: format!("star {} settled twice or is Sol", node.star),
                });
            }
        }
        Ok(SettlementTree { nodes: pending })
    }

    /// Nodes in arrival order.
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn settled_ids(&self) -> Vec<u32> {
        self.nodes.iter().map(|n| n.star).collect()
    }

    pub fn max_generation(&self) -> usize {
        self.nodes.iter().map(|n| n.generation).max().unwrap_or(0)
    }

    pub fn children(&self, star: u32) -> Vec<&TreeNode> {
        self.nodes
            .iter()
            .filter(|n| n.kind == ShipKind::Settler && n.parent_star == star)
            .collect()
    }

    /// (generation, new settlements, cumulative), one row per generation
    /// from 1 to the deepest.
    pub fn generation_stats(&self) -> Vec<GenerationStat> {
        let mut counts = vec![0usize; self.max_generation()];
        for n in &self.nodes {
            counts[n.generation - 1] += 1;
        }
        let mut cumulative = 0;
        counts
            .into_iter()
            .enumerate()
            .map(|(i, new)| {
                cumulative += new;
                GenerationStat {
                    generation: i + 1,
                    new,
                    cumulative,
                }
            })
            .collect()
    }
}
