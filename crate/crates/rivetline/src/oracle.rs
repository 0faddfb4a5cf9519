//! Exhaustive-search planner used as ground truth in tests and tooling.
//!
//! With forced colors the plant is a deterministic MDP, so breadth-first
//! search over [`FactoryState::apply`] finds a provably minimal action
//! sequence that delivers every product correctly without a single
//! collision or invalid action. Ties between equally short plans are broken
//! by lexicographic action order, making the output unique.

use crate::factory::{Action, Event, FactoryConfig, FactoryState};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

/// The eight actions sorted by name; expansion in this order makes BFS
/// return the lexicographically smallest among all shortest plans.
pub const LEX_ACTIONS: [Action; 8] = [
    Action::AssemblyPress,
    Action::Belt1Advance,
    Action::Belt2Backward,
    Action::Belt2Forward,
    Action::Belt3Advance,
    Action::Belt4Advance,
    Action::Dispatch,
    Action::TableRotate,
];

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle requires fully specified forced colors")]
    MissingColors,
    #[error("invalid factory config: {0}")]
    InvalidConfig(String),
    #[error("no clean all-correct completion is reachable")]
    Unreachable,
}

fn clean(events: &[Event]) -> bool {
    events.iter().all(|e| {
        !matches!(
            e,
            Event::Collision { .. }
                | Event::InvalidAction { .. }
                | Event::Delivered { correct: false, .. }
        )
    })
}

fn completed_all_correct(events: &[Event]) -> bool {
    events
        .iter()
        .any(|e| matches!(e, Event::Completed { all_correct: true }))
}

/// Shortest action sequence whose replay completes every product correctly
/// with zero collisions and zero invalid actions.
pub fn solve_optimal(config: &FactoryConfig) -> Result<Vec<Action>, OracleError> {
    if config.forced_colors.is_none() {
        return Err(OracleError::MissingColors);
    }
    let start = FactoryState::init(config.clone())
        .map_err(|e| OracleError::InvalidConfig(e.to_string()))?;

    // Parent pointers keyed by the canonical sensor key, which captures
    // everything BFS needs once dirty transitions are pruned.
    let start_key = start.snapshot().state_index();
    let mut parents: HashMap<String, (String, Action)> = HashMap::new();
    let mut seen: HashMap<String, FactoryState> = HashMap::new();
    seen.insert(start_key.clone(), start);
    let mut queue: VecDeque<String> = VecDeque::new();
    queue.push_back(start_key.clone());

    while let Some(key) = queue.pop_front() {
        let state = seen[&key].clone();
        for action in LEX_ACTIONS {
            let mut next = state.clone();
            let Ok(events) = next.apply(action) else { continue };
            if !clean(&events) {
                continue;
            }
            if completed_all_correct(&events) {
                let mut path = vec![action];
                let mut cursor = key.clone();
                while let Some((parent, step)) = parents.get(&cursor) {
                    path.push(*step);
                    cursor = parent.clone();
                }
                path.reverse();
                return Ok(path);
            }
            if next.is_done() {
                continue;
            }
            let next_key = next.snapshot().state_index();
            if seen.contains_key(&next_key) {
                continue;
            }
            parents.insert(next_key.clone(), (key.clone(), action));
            seen.insert(next_key.clone(), next);
            queue.push_back(next_key);
        }
    }
    Err(OracleError::Unreachable)
}
