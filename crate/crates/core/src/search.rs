//! Enumeration of all optimal skip alignments in normal form.
//!
//! States are pairs of a model configuration and a position in the trace.
//! From a state the search appends either a log move (T3), a run of skips
//! followed by a synchronous move (T2), or, once the trace is consumed, a
//! nonempty run of skips that completes the execution (T1). Skip runs come
//! from [`Semantics::enumerate_skip_paths`], which already orders commuting
//! skips, and a run is dropped when one of its skips could be moved past the
//! rest of the run and the following synchronous move. Hence every partial result is free of
//! reduction redexes and each normal form has exactly one path.
//!
//! Phase 1 is A* to find the optimal cost; phase 2 walks the state graph
//! depth-first, pruning by `g + h > C*`, and collects every goal path.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::rc::Rc;
use std::str::FromStr;

use thiserror::Error;

use crate::alignment::{Move, SkipAlignment};
use crate::model::Model;
use crate::rewrite;
use crate::semantics::{Configuration, Semantics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Heuristic {
    Zero,
    #[default]
    ModelRemainder,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(Heuristic::Zero),
            "model-remainder" => Ok(Heuristic::ModelRemainder),
            other => Err(format!("unknown heuristic `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Upper bound on state expansions over both phases.
    pub max_states: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_states: 1_000_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("the model admits no execution")]
    NoExecution,
    #[error("search exceeded {0} states")]
    MaxStatesExceeded(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// States expanded by the best-first phase.
    pub expanded_phase1: u64,
    /// States visited by the enumeration phase.
    pub expanded_phase2: u64,
    /// Distinct states whose successors were generated.
    pub distinct_states: u64,
}

impl SearchStats {
    pub fn expanded(&self) -> u64 {
        self.expanded_phase1 + self.expanded_phase2
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub cost: u32,
    pub alignments: BTreeSet<SkipAlignment>,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SearchState {
    pub cfg: Configuration,
    /// Number of trace events consumed so far.
    pub consumed: usize,
}

#[derive(Clone, Debug)]
pub struct Successor {
    pub moves: Vec<Move>,
    pub cost: u32,
    pub state: SearchState,
}

pub fn heuristic_zero(_state: &SearchState) -> u32 {
    0
}

/// Cheapest pure-model completion minus the number of events left, which
/// could at best all be matched synchronously.
pub fn heuristic_model_remainder(model: &Model, trace_len: usize, state: &SearchState) -> u32 {
    let left = (trace_len - state.consumed) as u32;
    Semantics::skip(model).remaining_cost(&state.cfg).saturating_sub(left)
}

fn estimate(h: Heuristic, model: &Model, trace_len: usize, state: &SearchState) -> u32 {
    match h {
        Heuristic::Zero => heuristic_zero(state),
        Heuristic::ModelRemainder => heuristic_model_remainder(model, trace_len, state),
    }
}

/// Whether a partial skip alignment is free of reduction redexes and replays
/// to a configuration from which a skip alignment can still be completed.
pub fn r_test(model: &Model, partial: &[Move]) -> bool {
    let sem = Semantics::skip(model);
    let mut cfg = sem.initial();
    for mv in partial {
        if let Some(step) = mv.step() {
            match sem.apply(&cfg, step) {
                Ok(next) => cfg = next,
                Err(_) => return false,
            }
        }
    }
    sem.is_viable(&cfg) && rewrite::is_normal_form(model, partial)
}

pub fn initial_state(model: &Model) -> SearchState {
    SearchState {
        cfg: Semantics::skip(model).initial(),
        consumed: 0,
    }
}

pub fn is_goal(model: &Model, trace: &[String], state: &SearchState) -> bool {
    state.consumed == trace.len() && Semantics::skip(model).is_final(&state.cfg)
}

/// Whether some skip of `moves` (skips followed by one sync, applied at `cfg`
/// and reaching `next`) could be postponed past the sync.
fn has_unneeded_skip(sem: &Semantics<'_>, cfg: &Configuration, moves: &[Move], next: &Configuration) -> bool {
    let mut before = cfg.clone();
    for (j, mv) in moves.iter().enumerate() {
        let Move::Skip(b) = *mv else { break };
        if rewrite::skip_not_required(sem, &before, b, &moves[j + 1..], next) {
            return true;
        }
        match sem.apply_skip(&before, b) {
            Ok(c) => before = c,
            Err(_) => return false,
        }
    }
    false
}

/// All successors of `state` (T1, T2 and T3 moves).
pub fn successors(model: &Model, trace: &[String], state: &SearchState) -> Vec<Successor> {
    let sem = Semantics::skip(model);
    let mut out = Vec::new();
    if is_goal(model, trace, state) {
        return out;
    }
    let paths = sem.enumerate_skip_paths(&state.cfg);
    let skip_moves =
        |skips: &[(crate::model::BlockId, u32)]| -> Vec<Move> { skips.iter().map(|&(b, _)| Move::Skip(b)).collect() };
    match trace.get(state.consumed) {
        Some(label) => {
            // T3
            out.push(Successor {
                moves: vec![Move::log(label.as_str())],
                cost: 1,
                state: SearchState {
                    cfg: state.cfg.clone(),
                    consumed: state.consumed + 1,
                },
            });
            // T2
            let leaves: Vec<_> = model.leaves_labeled(label).collect();
            for path in &paths {
                for &leaf in &leaves {
                    let Ok(next) = sem.apply_sync(&path.config, leaf) else {
                        continue;
                    };
                    if !sem.is_viable(&next) {
                        continue;
                    }
                    let mut moves = skip_moves(&path.skips);
                    moves.push(Move::sync(label.as_str(), leaf));
                    if has_unneeded_skip(&sem, &state.cfg, &moves, &next) {
                        continue;
                    }
                    out.push(Successor {
                        moves,
                        cost: path.cost(),
                        state: SearchState {
                            cfg: next,
                            consumed: state.consumed + 1,
                        },
                    });
                }
            }
        }
        None => {
            // T1
            for path in paths {
                if path.skips.is_empty() || !sem.is_final(&path.config) {
                    continue;
                }
                out.push(Successor {
                    moves: skip_moves(&path.skips),
                    cost: path.cost(),
                    state: SearchState {
                        cfg: path.config,
                        consumed: state.consumed,
                    },
                });
            }
        }
    }
    out
}

struct Search<'a> {
    model: &'a Model,
    trace: &'a [String],
    heuristic: Heuristic,
    limits: SearchLimits,
    stats: SearchStats,
    cache: HashMap<SearchState, Rc<Vec<Successor>>>,
}

impl<'a> Search<'a> {
    fn new(model: &'a Model, trace: &'a [String], heuristic: Heuristic, limits: SearchLimits) -> Self {
        Search {
            model,
            trace,
            heuristic,
            limits,
            stats: SearchStats::default(),
            cache: HashMap::new(),
        }
    }

    fn h(&self, s: &SearchState) -> u32 {
        estimate(self.heuristic, self.model, self.trace.len(), s)
    }

    fn tick(&mut self, phase2: bool) -> Result<(), SearchError> {
        if phase2 {
            self.stats.expanded_phase2 += 1;
        } else {
            self.stats.expanded_phase1 += 1;
        }
        if self.stats.expanded() > self.limits.max_states {
            return Err(SearchError::MaxStatesExceeded(self.limits.max_states));
        }
        Ok(())
    }

    fn succ(&mut self, s: &SearchState) -> Rc<Vec<Successor>> {
        if let Some(v) = self.cache.get(s) {
            return v.clone();
        }
        self.stats.distinct_states += 1;
        let v = Rc::new(successors(self.model, self.trace, s));
        self.cache.insert(s.clone(), v.clone());
        v
    }

    fn optimal_cost(&mut self) -> Result<u32, SearchError> {
        let start = initial_state(self.model);
        let mut best: HashMap<SearchState, u32> = HashMap::new();
        let mut closed: std::collections::HashSet<SearchState> = Default::default();
        let mut heap = BinaryHeap::new();
        let mut nodes: Vec<SearchState> = Vec::new();
        let n = self.trace.len();
        let push = |heap: &mut BinaryHeap<_>, nodes: &mut Vec<SearchState>, s: SearchState, g: u32, f: u32| {
            let left = n - s.consumed;
            nodes.push(s);
            heap.push(Reverse((f, left, nodes.len() - 1, g)));
        };
        best.insert(start.clone(), 0);
        let f0 = self.h(&start);
        push(&mut heap, &mut nodes, start, 0, f0);
        while let Some(Reverse((_, _, idx, g))) = heap.pop() {
            let s = nodes[idx].clone();
            if closed.contains(&s) || best.get(&s).is_some_and(|&b| b < g) {
                continue;
            }
            if is_goal(self.model, self.trace, &s) {
                return Ok(g);
            }
            self.tick(false)?;
            closed.insert(s.clone());
            for succ in self.succ(&s).iter() {
                let g2 = g + succ.cost;
                if closed.contains(&succ.state) || best.get(&succ.state).is_some_and(|&b| b <= g2) {
                    continue;
                }
                best.insert(succ.state.clone(), g2);
                let f = g2 + self.h(&succ.state);
                push(&mut heap, &mut nodes, succ.state.clone(), g2, f);
            }
        }
        Err(SearchError::NoExecution)
    }

    /// Collects every goal path from `s` with total cost exactly `bound`.
    /// Returns whether at least one was found.
    fn collect(
        &mut self,
        s: &SearchState,
        g: u32,
        bound: u32,
        path: &mut Vec<Move>,
        dead: &mut HashMap<SearchState, u32>,
        out: &mut BTreeSet<SkipAlignment>,
    ) -> Result<bool, SearchError> {
        if is_goal(self.model, self.trace, s) {
            if g == bound {
                let fresh = out.insert(SkipAlignment(path.clone()));
                debug_assert!(fresh, "duplicate path to a normal form");
                return Ok(true);
            }
            return Ok(false);
        }
        if dead.get(s).is_some_and(|&d| d <= g) {
            return Ok(false);
        }
        self.tick(true)?;
        let mut found = false;
        for succ in self.succ(s).iter() {
            let g2 = g + succ.cost;
            if g2 + self.h(&succ.state) > bound {
                continue;
            }
            let len = path.len();
            path.extend(succ.moves.iter().cloned());
            found |= self.collect(&succ.state, g2, bound, path, dead, out)?;
            path.truncate(len);
        }
        if !found {
            let e = dead.entry(s.clone()).or_insert(g);
            *e = (*e).min(g);
        }
        Ok(found)
    }
}

pub fn optimal_cost(model: &Model, trace: &[String], heuristic: Heuristic) -> Result<u32, SearchError> {
    Search::new(model, trace, heuristic, SearchLimits::default()).optimal_cost()
}

pub fn enumerate_all_optimal(
    model: &Model,
    trace: &[String],
    heuristic: Heuristic,
) -> Result<SearchOutcome, SearchError> {
    enumerate_all_optimal_with(model, trace, heuristic, SearchLimits::default())
}

pub fn enumerate_all_optimal_with(
    model: &Model,
    trace: &[String],
    heuristic: Heuristic,
    limits: SearchLimits,
) -> Result<SearchOutcome, SearchError> {
    let mut search = Search::new(model, trace, heuristic, limits);
    let cost = search.optimal_cost()?;
    let mut alignments = BTreeSet::new();
    let start = initial_state(model);
    if search.h(&start) <= cost {
        search.collect(&start, 0, cost, &mut Vec::new(), &mut HashMap::new(), &mut alignments)?;
    }
    Ok(SearchOutcome {
        cost,
        alignments,
        stats: search.stats,
    })
}
