//! Best-first tree search over the behavior graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::behavior_graph::{children, Action, BehaviorNode, BranchingMode, PlannerConfig, VehicleState, World};
use crate::cost_model::{edge_cost, heuristic_h_all, CostBreakdown, CostWeights};
use crate::error::{Error, Result};

/// Heuristic selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    H0,
    #[default]
    HAll,
}

impl std::str::FromStr for Heuristic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h0" => Ok(Self::H0),
            "hall" | "h_all" => Ok(Self::HAll),
            _ => Err(Error::InvalidInput(format!("unknown heuristic `{s}` (h0, hall)"))),
        }
    }
}

impl std::fmt::Display for Heuristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::H0 => "h0",
            Self::HAll => "hall",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Ok,
    /// The frontier emptied before any node reached the horizon.
    NoSolution,
    /// The expansion budget ran out.
    BudgetExhausted,
}

/// A search problem: a tree of fixed depth with non-negative edge costs.
pub trait SearchSpace {
    type State: Clone;
    type Edge: Clone;
    fn successors(&self, state: &Self::State) -> Vec<(Self::Edge, Self::State, f64)>;
    fn heuristic(&self, state: &Self::State) -> f64;
    fn depth(&self, state: &Self::State) -> usize;
    fn horizon(&self) -> usize;
}

/// One node of a generic search tree.
#[derive(Debug, Clone)]
pub struct TreeNode<S, E> {
    pub state: S,
    pub edge: Option<E>,
    pub parent: Option<usize>,
    pub g: f64,
    pub h: f64,
}

#[derive(Debug, Clone)]
pub struct TreeSearchResult<S, E> {
    /// Root to goal.
    pub path: Vec<TreeNode<S, E>>,
    pub total_cost: f64,
    pub expansions: usize,
    pub generated: usize,
    pub status: SearchStatus,
}

struct Entry {
    f: f64,
    k: usize,
    h: f64,
    seq: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // BinaryHeap is a max-heap: "greater" pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.k.cmp(&other.k))
            .then(other.h.total_cmp(&self.h))
            .then(other.seq.cmp(&self.seq))
    }
}

/// A* on a tree: no closed list, first goal popped wins. Ties prefer deeper
/// nodes, then smaller `h`, then insertion order.
pub fn astar<P: SearchSpace>(space: &P, root: P::State, max_expansions: usize) -> TreeSearchResult<P::State, P::Edge> {
    let h0 = space.heuristic(&root);
    let mut nodes = vec![TreeNode {
        state: root,
        edge: None,
        parent: None,
        g: 0.0,
        h: h0,
    }];
    let mut heap = BinaryHeap::new();
    heap.push(Entry { f: h0, k: space.depth(&nodes[0].state), h: h0, seq: 0 });
    let (mut expansions, mut generated) = (0, 0);
    let horizon = space.horizon();

    let finish = |nodes: &Vec<TreeNode<P::State, P::Edge>>, goal: Option<usize>, expansions, generated, status| {
        let mut path = Vec::new();
        let mut cur = goal;
        while let Some(i) = cur {
            path.push(nodes[i].clone());
            cur = nodes[i].parent;
        }
        path.reverse();
        TreeSearchResult {
            total_cost: goal.map_or(0.0, |g| nodes[g].g),
            path,
            expansions,
            generated,
            status,
        }
    };

    while let Some(Entry { seq, .. }) = heap.pop() {
        expansions += 1;
        if space.depth(&nodes[seq].state) >= horizon {
            return finish(&nodes, Some(seq), expansions, generated, SearchStatus::Ok);
        }
        if expansions > max_expansions {
            return finish(&nodes, None, expansions, generated, SearchStatus::BudgetExhausted);
        }
        let g = nodes[seq].g;
        for (edge, state, cost) in space.successors(&nodes[seq].state) {
            let h = space.heuristic(&state);
            let k = space.depth(&state);
            let id = nodes.len();
            nodes.push(TreeNode {
                state,
                edge: Some(edge),
                parent: Some(seq),
                g: g + cost,
                h,
            });
            heap.push(Entry { f: g + cost + h, k, h, seq: id });
            generated += 1;
        }
    }
    finish(&nodes, None, expansions, generated, SearchStatus::NoSolution)
}

/// The behavior graph as a search space.
pub struct BehaviorSpace<'w, 'a> {
    pub world: &'w World<'a>,
    pub cfg: &'w PlannerConfig,
    pub weights: &'w CostWeights,
    pub heuristic: Heuristic,
    pub mode: BranchingMode,
}

impl SearchSpace for BehaviorSpace<'_, '_> {
    type State = VehicleState;
    type Edge = (Action, CostBreakdown);

    fn successors(&self, state: &VehicleState) -> Vec<(Self::Edge, VehicleState, f64)> {
        children(self.world, state, self.cfg, self.mode)
            .into_iter()
            .filter_map(|(action, exp)| {
                let c = edge_cost(self.world, state, &exp.state, &action, self.weights, self.cfg).ok()?;
                Some(((action, c), exp.state, c.total))
            })
            .collect()
    }

    fn heuristic(&self, state: &VehicleState) -> f64 {
        match self.heuristic {
            Heuristic::H0 => 0.0,
            Heuristic::HAll => heuristic_h_all(self.world, state, self.weights, self.cfg).value,
        }
    }

    fn depth(&self, state: &VehicleState) -> usize {
        state.k
    }

    fn horizon(&self) -> usize {
        self.world.steps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Root to depth-T node; `parent` indexes into this vector.
    pub path: Vec<BehaviorNode>,
    pub total_cost: f64,
    pub expansions: usize,
    pub generated: usize,
    pub status: SearchStatus,
}

impl SearchResult {
    pub fn is_ok(&self) -> bool {
        self.status == SearchStatus::Ok
    }
}

/// Minimum-cost behavior sequence from `root` over the world's horizon.
pub fn plan(root: VehicleState, world: &World, cfg: &PlannerConfig, weights: &CostWeights, heuristic: Heuristic, mode: BranchingMode) -> SearchResult {
    let space = BehaviorSpace {
        world,
        cfg,
        weights,
        heuristic,
        mode,
    };
    let r = astar(&space, root, cfg.max_expansions);
    let path = r
        .path
        .iter()
        .enumerate()
        .map(|(i, n)| BehaviorNode {
            state: n.state,
            parent: i.checked_sub(1),
            action_in: n.edge.map(|e| e.0),
            g: n.g,
            h: n.h,
            cost_breakdown: n.edge.map(|e| e.1).unwrap_or_default(),
        })
        .collect();
    SearchResult {
        path,
        total_cost: r.total_cost,
        expansions: r.expansions,
        generated: r.generated,
        status: r.status,
    }
}

/// `(expansions, generated)` of a finished search.
pub fn count_expansions(result: &SearchResult) -> (usize, usize) {
    (result.expansions, result.generated)
}

/// Minimum cost-to-go by exhaustive enumeration (`None` if no path reaches
/// the horizon). Exponential; meant for small test instances.
pub fn exhaustive_cost_to_go<P: SearchSpace>(space: &P, state: &P::State) -> Option<f64> {
    if space.depth(state) >= space.horizon() {
        return Some(0.0);
    }
    space
        .successors(state)
        .into_iter()
        .filter_map(|(_, s, c)| exhaustive_cost_to_go(space, &s).map(|rest| c + rest))
        .min_by(f64::total_cmp)
}
