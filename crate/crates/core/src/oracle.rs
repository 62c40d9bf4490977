//! Brute-force reference implementation for small instances.
//!
//! The oracle never touches the configuration semantics used by the search.
//! It lists the executions of the model combinatorially (sequence =
//! concatenation, choice = union, parallel = shuffle, loop = `do (redo do)^k`
//! up to a fixed number of iterations), aligns each execution with the trace
//! by dynamic programming, and enumerates every cheapest alignment path.
//!
//! Loops are unrolled only as far as an alignment of the requested cost can
//! use. Exceeding any budget is an error, never a silent truncation.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::alignment::{self, Alignment, Move, SkipAlignment};
use crate::model::{BlockId, BlockKind, Model};
use crate::rewrite::{self, RewriteError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    /// Upper bound on executions kept for any single block.
    pub max_executions: usize,
    /// Largest number of redo iterations per loop instance the oracle will
    /// unroll. The number needed grows with trace length and cost.
    pub max_loop_unrollings: u32,
    /// Upper bound on the length of any enumerated alignment.
    pub max_alignment_len: usize,
    /// Upper bound on the number of enumerated alignments.
    pub max_alignments: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_executions: 200_000,
            max_loop_unrollings: 12,
            max_alignment_len: 32,
            max_alignments: 200_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

type Result<T> = std::result::Result<T, OracleError>;

fn exceeded(what: impl Into<String>) -> OracleError {
    OracleError::BudgetExceeded(what.into())
}

#[derive(Clone, Debug)]
struct Exec {
    leaves: Vec<BlockId>,
    visible: u32,
}

struct Executions<'m> {
    model: &'m Model,
    unroll: u32,
    max_visible: u32,
    max_executions: usize,
}

impl Executions<'_> {
    fn check(&self, v: &[Exec]) -> Result<()> {
        if v.len() > self.max_executions {
            return Err(exceeded(format!("more than {} executions", self.max_executions)));
        }
        Ok(())
    }

    fn concat(&self, xs: &[Exec], ys: &[Exec]) -> Result<Vec<Exec>> {
        let mut out = Vec::new();
        for x in xs {
            for y in ys {
                if x.visible + y.visible > self.max_visible {
                    continue;
                }
                let mut leaves = x.leaves.clone();
                leaves.extend_from_slice(&y.leaves);
                out.push(Exec {
                    leaves,
                    visible: x.visible + y.visible,
                });
            }
            self.check(&out)?;
        }
        Ok(out)
    }

    fn shuffle(&self, xs: &[Exec], ys: &[Exec]) -> Result<Vec<Exec>> {
        fn go(a: &[BlockId], b: &[BlockId], cur: &mut Vec<BlockId>, out: &mut Vec<Vec<BlockId>>) {
            if a.is_empty() && b.is_empty() {
                out.push(cur.clone());
                return;
            }
            if let Some((&h, rest)) = a.split_first() {
                cur.push(h);
                go(rest, b, cur, out);
                cur.pop();
            }
            if let Some((&h, rest)) = b.split_first() {
                cur.push(h);
                go(a, rest, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        for x in xs {
            for y in ys {
                let visible = x.visible + y.visible;
                if visible > self.max_visible {
                    continue;
                }
                let mut seqs = Vec::new();
                go(&x.leaves, &y.leaves, &mut Vec::new(), &mut seqs);
                out.extend(seqs.into_iter().map(|leaves| Exec { leaves, visible }));
                self.check(&out)?;
            }
        }
        Ok(out)
    }

    fn of(&self, b: BlockId) -> Result<Vec<Exec>> {
        let m = self.model;
        let kids = m.children(b);
        let out = match m.kind(b) {
            BlockKind::Activity(_) => vec![Exec {
                leaves: vec![b],
                visible: 1,
            }],
            BlockKind::Tau => vec![Exec {
                leaves: vec![b],
                visible: 0,
            }],
            BlockKind::Seq => {
                let mut acc = vec![Exec {
                    leaves: Vec::new(),
                    visible: 0,
                }];
                for &c in kids {
                    acc = self.concat(&acc, &self.of(c)?)?;
                }
                acc
            }
            BlockKind::Xor => {
                let mut acc = Vec::new();
                for &c in kids {
                    acc.extend(self.of(c)?);
                    self.check(&acc)?;
                }
                acc
            }
            BlockKind::And => {
                let mut acc = vec![Exec {
                    leaves: Vec::new(),
                    visible: 0,
                }];
                for &c in kids {
                    acc = self.shuffle(&acc, &self.of(c)?)?;
                }
                acc
            }
            BlockKind::Loop => {
                let body = self.of(kids[0])?;
                let redo = self.of(kids[1])?;
                let mut all = body.clone();
                let mut cur = body.clone();
                for _ in 0..self.unroll {
                    cur = self.concat(&self.concat(&cur, &redo)?, &body)?;
                    if cur.is_empty() {
                        break;
                    }
                    all.extend(cur.iter().cloned());
                    self.check(&all)?;
                }
                all
            }
        };
        Ok(out)
    }
}

/// Dynamic-programming table of suffix costs between a trace and an execution.
struct Grid<'a> {
    model: &'a Model,
    trace: &'a [String],
    exec: &'a [BlockId],
    cost: Vec<Vec<u32>>,
}

impl<'a> Grid<'a> {
    fn new(model: &'a Model, trace: &'a [String], exec: &'a [BlockId]) -> Self {
        let (n, m) = (trace.len(), exec.len());
        let mut cost = vec![vec![0u32; m + 1]; n + 1];
        for i in (0..=n).rev() {
            for j in (0..=m).rev() {
                if i == n && j == m {
                    continue;
                }
                let mut best = u32::MAX;
                if i < n {
                    best = best.min(cost[i + 1][j] + 1);
                }
                if j < m {
                    best = best.min(cost[i][j + 1] + Self::model_cost(model, exec[j]));
                    if i < n && model.label(exec[j]) == Some(trace[i].as_str()) {
                        best = best.min(cost[i + 1][j + 1]);
                    }
                }
                cost[i][j] = best;
            }
        }
        Grid {
            model,
            trace,
            exec,
            cost,
        }
    }

    fn model_cost(model: &Model, leaf: BlockId) -> u32 {
        u32::from(model.label(leaf).is_some())
    }

    fn min_cost(&self) -> u32 {
        self.cost[0][0]
    }

    /// Pushes every alignment path of cost exactly `target` onto `out`.
    fn paths(&self, target: u32, limit: usize, out: &mut BTreeSet<Alignment>) -> Result<()> {
        let mut cur = Vec::new();
        self.walk(0, 0, target, limit, &mut cur, out)
    }

    fn walk(
        &self,
        i: usize,
        j: usize,
        rem: u32,
        limit: usize,
        cur: &mut Vec<Move>,
        out: &mut BTreeSet<Alignment>,
    ) -> Result<()> {
        let (n, m) = (self.trace.len(), self.exec.len());
        if self.cost[i][j] > rem {
            return Ok(());
        }
        if i == n && j == m {
            if rem == 0 {
                out.insert(Alignment(cur.clone()));
                if out.len() > limit {
                    return Err(exceeded(format!("more than {limit} alignments")));
                }
            }
            return Ok(());
        }
        if i < n && rem > 0 {
            cur.push(Move::log(self.trace[i].as_str()));
            self.walk(i + 1, j, rem - 1, limit, cur, out)?;
            cur.pop();
        }
        if j < m {
            let leaf = self.exec[j];
            let c = Self::model_cost(self.model, leaf);
            if c <= rem {
                cur.push(Move::Model(leaf));
                self.walk(i, j + 1, rem - c, limit, cur, out)?;
                cur.pop();
            }
            if i < n && self.model.label(leaf) == Some(self.trace[i].as_str()) {
                cur.push(Move::sync(self.trace[i].as_str(), leaf));
                self.walk(i + 1, j + 1, rem, limit, cur, out)?;
                cur.pop();
            }
        }
        Ok(())
    }
}

/// A set of classical alignments sharing one cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentSet {
    pub cost: u32,
    pub alignments: BTreeSet<Alignment>,
}

/// Alignments of cost `target` (or of minimal cost) among executions with at
/// most `max_visible` visible leaves and `unroll` iterations per loop instance.
fn alignments_bounded(
    model: &Model,
    trace: &[String],
    target: Option<u32>,
    unroll: u32,
    max_visible: u32,
    budget: &OracleBudget,
) -> Result<AlignmentSet> {
    let execs = Executions {
        model,
        unroll,
        max_visible,
        max_executions: budget.max_executions,
    }
    .of(model.root())?;

    let grids: Vec<Grid> = execs.iter().map(|e| Grid::new(model, trace, &e.leaves)).collect();
    let cost = match target {
        Some(c) => c,
        None => grids
            .iter()
            .map(Grid::min_cost)
            .min()
            .ok_or_else(|| exceeded("no execution within the visible-length bound"))?,
    };
    let mut alignments = BTreeSet::new();
    for g in grids.iter().filter(|g| g.min_cost() <= cost) {
        if g.exec.len() + trace.len() > budget.max_alignment_len {
            return Err(exceeded(format!(
                "alignments longer than {} moves",
                budget.max_alignment_len
            )));
        }
        g.paths(cost, budget.max_alignments, &mut alignments)?;
    }
    Ok(AlignmentSet { cost, alignments })
}

/// Alignments of cost `target`, or of minimal cost, without truncation.
///
/// A loop iteration without synchronous moves costs at least 1 unless both
/// loop children can run silently. Dropping such an iteration keeps the
/// alignment valid, so an alignment of cost `c` has at most `|σ| + c`
/// iterations per loop instance, and an optimal one at most `|σ|`. Models
/// with silent iterations have infinitely many alignments of equal cost and
/// are rejected.
fn alignments_exact(
    model: &Model,
    trace: &[String],
    target: Option<u32>,
    budget: &OracleBudget,
) -> Result<AlignmentSet> {
    let silent_loop = model
        .ids()
        .any(|b| *model.kind(b) == BlockKind::Loop && model.children(b).iter().all(|&c| model.kappa(c) == 0));
    if silent_loop {
        return Err(exceeded("loop with silent iterations"));
    }
    let n = trace.len() as u32;
    let (unroll, max_visible) = match target {
        Some(c) => (n + c, n + c),
        None => {
            // the best loop-free execution bounds the optimal cost
            let upper = Executions {
                model,
                unroll: 0,
                max_visible: u32::MAX,
                max_executions: budget.max_executions,
            }
            .of(model.root())?
            .iter()
            .map(|e| Grid::new(model, trace, &e.leaves).min_cost())
            .min()
            .unwrap_or(n + model.kappa(model.root()));
            (n, n + upper)
        }
    };
    if unroll > budget.max_loop_unrollings && model.ids().any(|b| *model.kind(b) == BlockKind::Loop) {
        return Err(exceeded(format!(
            "needs up to {unroll} loop iterations, limit is {}",
            budget.max_loop_unrollings
        )));
    }
    alignments_bounded(model, trace, target, unroll, max_visible, budget)
}

/// All classical alignments of minimal cost.
pub fn enumerate_all_optimal_alignments(
    model: &Model,
    trace: &[String],
    budget: &OracleBudget,
) -> Result<AlignmentSet> {
    alignments_exact(model, trace, None, budget)
}

/// All classical alignments of exactly the given cost.
pub fn alignments_with_cost(model: &Model, trace: &[String], cost: u32, budget: &OracleBudget) -> Result<AlignmentSet> {
    alignments_exact(model, trace, Some(cost), budget)
}

/// The normal form coinciding with a classical alignment.
pub fn coinciding_normal_form(model: &Model, gamma: &Alignment) -> Result<SkipAlignment> {
    let delta = rewrite::transform_to_skip(model, gamma)?;
    Ok(rewrite::normalize(model, &delta))
}

/// Every optimal classical alignment paired with its coinciding normal form.
pub fn coinciding_map(
    model: &Model,
    trace: &[String],
    budget: &OracleBudget,
) -> Result<(u32, Vec<(Alignment, SkipAlignment)>)> {
    let set = enumerate_all_optimal_alignments(model, trace, budget)?;
    let pairs = set
        .alignments
        .into_iter()
        .map(|g| coinciding_normal_form(model, &g).map(|d| (g, d)))
        .collect::<Result<_>>()?;
    Ok((set.cost, pairs))
}

/// `{ normalize(transform(γ)) : γ optimal }`.
pub fn coinciding_normal_forms(
    model: &Model,
    trace: &[String],
    budget: &OracleBudget,
) -> Result<BTreeSet<SkipAlignment>> {
    Ok(coinciding_map(model, trace, budget)?
        .1
        .into_iter()
        .map(|(_, d)| d)
        .collect())
}

/// Classical alignments of the same cost as `delta` that coincide with it.
pub fn expand_coinciding(model: &Model, delta: &SkipAlignment, budget: &OracleBudget) -> Result<BTreeSet<Alignment>> {
    let trace = alignment::project_log(delta.moves());
    let cost = alignment::total_cost(model, delta.moves());
    let target = rewrite::normalize(model, delta);
    let mut out = BTreeSet::new();
    for g in alignments_with_cost(model, &trace, cost, budget)?.alignments {
        if coinciding_normal_form(model, &g)? == target {
            out.insert(g);
        }
    }
    Ok(out)
}

/// Cheapest pure-model executions of block `b` as leaf sequences.
pub fn cheapest_executions(model: &Model, b: BlockId, budget: &OracleBudget) -> Result<Vec<Vec<BlockId>>> {
    let k = model.kappa(b);
    let execs = Executions {
        model,
        unroll: budget.max_loop_unrollings,
        max_visible: k,
        max_executions: budget.max_executions,
    }
    .of(b)?;
    Ok(execs.into_iter().filter(|e| e.visible == k).map(|e| e.leaves).collect())
}

/// Replaces every skip in `delta` by each cheapest execution of its block,
/// in place.
pub fn expand_direct(model: &Model, delta: &SkipAlignment, budget: &OracleBudget) -> Result<BTreeSet<Alignment>> {
    let mut partial: Vec<Vec<Move>> = vec![Vec::new()];
    for mv in delta.moves() {
        match mv {
            Move::Skip(b) => {
                let options = cheapest_executions(model, *b, budget)?;
                let mut next = Vec::with_capacity(partial.len() * options.len());
                for p in &partial {
                    for e in &options {
                        let mut q = p.clone();
                        q.extend(e.iter().map(|&l| Move::Model(l)));
                        next.push(q);
                    }
                }
                if next.len() > budget.max_alignments {
                    return Err(exceeded(format!("more than {} alignments", budget.max_alignments)));
                }
                partial = next;
            }
            other => {
                for p in &mut partial {
                    p.push(other.clone());
                }
            }
        }
    }
    Ok(partial.into_iter().map(Alignment).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_model;

    fn b(i: u32) -> BlockId {
        BlockId(i)
    }

    fn t(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn optimal_alignments_running_example() {
        let m = parse_model("->(a,X(b,c),d)").unwrap();
        let budget = OracleBudget::default();
        let set = enumerate_all_optimal_alignments(&m, &t(&["a", "d"]), &budget).unwrap();
        assert_eq!(set.cost, 1);
        let expected: BTreeSet<_> = [3, 4]
            .into_iter()
            .map(|leaf| Alignment(vec![Move::sync("a", b(1)), Move::Model(b(leaf)), Move::sync("d", b(5))]))
            .collect();
        assert_eq!(set.alignments, expected);

        let set = enumerate_all_optimal_alignments(&m, &t(&["a", "b", "d"]), &budget).unwrap();
        assert_eq!(set.cost, 0);
        assert_eq!(set.alignments.len(), 1);

        let m = parse_model("X(a,b)").unwrap();
        let set = enumerate_all_optimal_alignments(&m, &[], &budget).unwrap();
        assert_eq!(set.cost, 1);
        assert_eq!(set.alignments.len(), 2);
    }

    #[test]
    fn coinciding_examples() {
        let budget = OracleBudget::default();
        let m = parse_model("->(a,X(b,c),d)").unwrap();
        let nf = coinciding_normal_forms(&m, &t(&["a", "d"]), &budget).unwrap();
        assert_eq!(
            nf.into_iter().collect::<Vec<_>>(),
            vec![SkipAlignment(vec![
                Move::sync("a", b(1)),
                Move::Skip(b(2)),
                Move::sync("d", b(5))
            ])]
        );
        assert_eq!(
            coinciding_normal_forms(&m, &t(&["a", "b", "d"]), &budget)
                .unwrap()
                .len(),
            1
        );

        let m = parse_model("*(a,b)").unwrap();
        let nf = coinciding_normal_forms(&m, &t(&["b"]), &budget).unwrap();
        assert_eq!(nf.len(), 2);
        assert!(nf.contains(&SkipAlignment(vec![Move::log("b"), Move::Skip(b(0))])));
    }

    #[test]
    fn expansion_examples() {
        let budget = OracleBudget::default();
        let m = parse_model("->(a,X(b,c),d)").unwrap();
        let d = SkipAlignment(vec![Move::sync("a", b(1)), Move::Skip(b(2)), Move::sync("d", b(5))]);
        assert_eq!(expand_coinciding(&m, &d, &budget).unwrap().len(), 2);
        assert_eq!(expand_direct(&m, &d, &budget).unwrap().len(), 2);

        let all_sync = SkipAlignment(vec![
            Move::sync("a", b(1)),
            Move::sync("b", b(3)),
            Move::sync("d", b(5)),
        ]);
        let e = expand_coinciding(&m, &all_sync, &budget).unwrap();
        assert_eq!(e.into_iter().collect::<Vec<_>>(), vec![Alignment(all_sync.0.clone())]);

        let m = parse_model("*(a,b)").unwrap();
        let d = SkipAlignment(vec![Move::log("b"), Move::Skip(b(0))]);
        // the log move may also come after the model move: R1 maps both to d
        let e = expand_coinciding(&m, &d, &budget).unwrap();
        assert_eq!(
            e.into_iter().collect::<Vec<_>>(),
            vec![
                Alignment(vec![Move::log("b"), Move::Model(b(1))]),
                Alignment(vec![Move::Model(b(1)), Move::log("b")]),
            ]
        );
        let direct = expand_direct(&m, &d, &budget).unwrap();
        assert_eq!(
            direct.into_iter().collect::<Vec<_>>(),
            vec![Alignment(vec![Move::log("b"), Move::Model(b(1))])]
        );
    }

    #[test]
    fn tau_loop_exceeds_budget() {
        let m = parse_model("*(tau,tau)").unwrap();
        let err = enumerate_all_optimal_alignments(&m, &[], &OracleBudget::default()).unwrap_err();
        assert!(matches!(err, OracleError::BudgetExceeded(_)));
    }

    #[test]
    fn long_model_exceeds_budget() {
        let labels: Vec<String> = (0..39).map(|i| format!("a{i}")).collect();
        let m = parse_model(&format!("->({})", labels.join(","))).unwrap();
        assert_eq!(m.len(), 40);
        let err = enumerate_all_optimal_alignments(&m, &t(&["a0"]), &OracleBudget::default()).unwrap_err();
        assert!(matches!(err, OracleError::BudgetExceeded(_)));
    }
}
