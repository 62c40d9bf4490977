//! Seeded random instances (small models with short traces) for testing
//! and benchmarking.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::alignment::Trace;
use crate::io::tree_to_text;
use crate::model::{Model, Operator, Tree};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusConfig {
    pub max_blocks: usize,
    /// Maximal number of operator levels.
    pub max_depth: usize,
    pub labels: usize,
    pub max_trace_len: usize,
    /// Probability of a tau leaf.
    pub tau_probability: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            max_blocks: 10,
            max_depth: 3,
            labels: 5,
            max_trace_len: 6,
            tau_probability: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraceKind {
    PerfectFit,
    Shuffled,
    Noisy,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: usize,
    pub tree: Tree,
    pub model: Model,
    pub trace: Trace,
    pub kind: TraceKind,
}

impl Instance {
    pub fn model_text(&self) -> String {
        tree_to_text(&self.tree)
    }
}

const OPERATORS: [Operator; 4] = [Operator::Seq, Operator::Xor, Operator::And, Operator::Loop];

fn label(rng: &mut impl Rng, cfg: &CorpusConfig) -> String {
    let i = rng.gen_range(0..cfg.labels.clamp(1, 26));
    char::from(b'a' + i as u8).to_string()
}

fn leaf(rng: &mut impl Rng, cfg: &CorpusConfig) -> Tree {
    if rng.gen_bool(cfg.tau_probability) {
        Tree::Tau
    } else {
        Tree::Activity(label(rng, cfg))
    }
}

/// Random tree with at most `budget` blocks and `depth` operator levels.
fn subtree(rng: &mut impl Rng, cfg: &CorpusConfig, depth: usize, budget: usize, root: Option<Operator>) -> Tree {
    if depth == 0 || budget < 3 || (root.is_none() && rng.gen_bool(0.4)) {
        return leaf(rng, cfg);
    }
    let op = root.unwrap_or_else(|| *OPERATORS.choose(rng).unwrap());
    let arity = if op == Operator::Loop || budget < 4 {
        2
    } else {
        rng.gen_range(2..=3)
    };
    let mut left = budget - 1;
    let mut children = Vec::with_capacity(arity);
    for k in 0..arity {
        let reserve = arity - k - 1;
        let share = if reserve == 0 {
            left
        } else {
            rng.gen_range(1..=(left - reserve).max(1))
        };
        let child = subtree(rng, cfg, depth - 1, share, None);
        left -= child.size();
        children.push(child);
    }
    Tree::Node(op, children)
}

pub fn random_tree(rng: &mut impl Rng, cfg: &CorpusConfig, root: Option<Operator>) -> Tree {
    subtree(rng, cfg, cfg.max_depth, cfg.max_blocks, root)
}

/// A loop whose do-child is itself a loop.
pub fn random_nested_loop(rng: &mut impl Rng, cfg: &CorpusConfig) -> Tree {
    let inner_budget = (cfg.max_blocks / 2).max(3);
    let inner = subtree(
        rng,
        cfg,
        cfg.max_depth.saturating_sub(1).max(1),
        inner_budget,
        Some(Operator::Loop),
    );
    let rest = cfg.max_blocks.saturating_sub(1 + inner.size()).max(1);
    let redo = subtree(rng, cfg, cfg.max_depth.saturating_sub(1), rest, None);
    Tree::Node(Operator::Loop, vec![inner, redo])
}

/// Visible labels of a random execution; loops iterate at most twice.
pub fn random_run(rng: &mut impl Rng, tree: &Tree) -> Trace {
    let mut out = Vec::new();
    run_into(rng, tree, &mut out);
    out
}

fn run_into(rng: &mut impl Rng, tree: &Tree, out: &mut Trace) {
    match tree {
        Tree::Activity(l) => out.push(l.clone()),
        Tree::Tau => {}
        Tree::Node(Operator::Seq, kids) => kids.iter().for_each(|k| run_into(rng, k, out)),
        Tree::Node(Operator::Xor, kids) => {
            let k = kids.choose(rng).unwrap();
            run_into(rng, k, out)
        }
        Tree::Node(Operator::And, kids) => {
            let mut parts: Vec<Trace> = kids.iter().map(|k| random_run(rng, k)).collect();
            for p in &mut parts {
                p.reverse();
            }
            loop {
                let open: Vec<usize> = (0..parts.len()).filter(|&i| !parts[i].is_empty()).collect();
                let Some(&i) = open.choose(rng) else { break };
                out.push(parts[i].pop().unwrap());
            }
        }
        Tree::Node(Operator::Loop, kids) => {
            run_into(rng, &kids[0], out);
            let mut iterations = 0;
            while iterations < 2 && rng.gen_bool(0.35) {
                run_into(rng, &kids[1], out);
                run_into(rng, &kids[0], out);
                iterations += 1;
            }
        }
    }
}

pub fn random_trace(rng: &mut impl Rng, tree: &Tree, kind: TraceKind, cfg: &CorpusConfig) -> Trace {
    let mut trace = random_run(rng, tree);
    for _ in 0..20 {
        if trace.len() <= cfg.max_trace_len {
            break;
        }
        trace = random_run(rng, tree);
    }
    trace.truncate(cfg.max_trace_len);
    match kind {
        TraceKind::PerfectFit => {}
        TraceKind::Shuffled => trace.shuffle(rng),
        TraceKind::Noisy => {
            for _ in 0..rng.gen_range(1..=2) {
                match rng.gen_range(0..3) {
                    0 if !trace.is_empty() => {
                        let i = rng.gen_range(0..trace.len());
                        trace.remove(i);
                    }
                    1 if !trace.is_empty() => {
                        let i = rng.gen_range(0..trace.len());
                        trace[i] = label(rng, cfg);
                    }
                    _ => {
                        let i = rng.gen_range(0..=trace.len());
                        trace.insert(i, label(rng, cfg));
                    }
                }
            }
            trace.truncate(cfg.max_trace_len);
        }
    }
    trace
}

/// `count` instances from `seed`. Root operators and trace kinds rotate so
/// every operator and kind is represented; every eighth model is a nested loop.
pub fn generate(seed: u64, count: usize, cfg: &CorpusConfig) -> Vec<Instance> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|id| {
            let tree = if id % 8 == 3 {
                random_nested_loop(&mut rng, cfg)
            } else {
                random_tree(&mut rng, cfg, Some(OPERATORS[id % 4]))
            };
            let kind = [TraceKind::PerfectFit, TraceKind::Shuffled, TraceKind::Noisy][id % 3];
            let trace = random_trace(&mut rng, &tree, kind, cfg);
            let model = Model::new(&tree).expect("generated trees are well-formed");
            Instance {
                id,
                tree,
                model,
                trace,
                kind,
            }
        })
        .collect()
}
