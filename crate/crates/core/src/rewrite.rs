//! Rewriting of alignments.
//!
//! Classical alignments are turned into skip alignments by replacing model
//! moves with leaf skips and then applying the lifting rules (L1-L4, merging a
//! complete group of sibling skips into a skip of their parent) and the cycle
//! rules (C1-C2, deleting a loop iteration made of two consecutive skips).
//! Skip alignments are brought into normal form with the reduction rules
//! R1-R3, which move skips to the right past log moves, past a run of skips
//! and the synchronous move ending it when the skip is not needed for that
//! move, and past commuting skips of smaller blocks.

use std::fmt;

use thiserror::Error;

use crate::alignment::{self, Alignment, Move, SkipAlignment};
use crate::model::{BlockId, BlockKind, Model};
use crate::semantics::{Configuration, Semantics, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    L1,
    L2,
    L3,
    L4,
    C1,
    C2,
    R1,
    R2,
    R3,
}

impl Rule {
    pub fn is_reduction(self) -> bool {
        matches!(self, Rule::R1 | Rule::R2 | Rule::R3)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A rule together with the (0-based, increasing) move positions it rewrites.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Redex {
    pub rule: Rule,
    pub positions: Vec<usize>,
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {:?}", self.rule, self.positions)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("not a valid alignment")]
    InvalidAlignment,
    #[error("redex {0} does not apply")]
    StaleRedex(Redex),
    #[error("rewriting did not produce a skip alignment")]
    NotInSkipLanguage,
}

/// Alignment whose model moves have been replaced by leaf skips, possibly
/// still outside the skip language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MixAlignment(pub Vec<Move>);

impl MixAlignment {
    pub fn moves(&self) -> &[Move] {
        &self.0
    }
}

pub fn to_mix_alignment(model: &Model, gamma: &Alignment) -> Result<MixAlignment, RewriteError> {
    let moves = gamma.moves();
    if !alignment::validate_alignment(model, &alignment::project_log(moves), moves) {
        return Err(RewriteError::InvalidAlignment);
    }
    Ok(MixAlignment(
        moves
            .iter()
            .map(|m| match m {
                Move::Model(b) => Move::Skip(*b),
                other => other.clone(),
            })
            .collect(),
    ))
}

// --- block instances ---------------------------------------------------------

#[derive(Debug)]
struct Instance {
    block: BlockId,
    children: Vec<usize>,
    /// Position of the move that executed this instance as a whole (leaves and skips).
    pos: Option<usize>,
}

/// Splits a replayable sequence into its tree of block instances.
fn instances(model: &Model, moves: &[Move]) -> Result<Vec<Instance>, RewriteError> {
    let sem = Semantics::classical(model);
    let mut cfg = sem.initial();
    let mut current: Vec<Option<usize>> = vec![None; model.len()];
    let mut out: Vec<Instance> = Vec::new();
    let mut opened = Vec::new();
    for (pos, mv) in moves.iter().enumerate() {
        let Some(step) = mv.step() else { continue };
        opened.clear();
        cfg = sem
            .apply_traced(&cfg, step, &mut opened)
            .map_err(|_| RewriteError::InvalidAlignment)?;
        for &b in &opened {
            let id = out.len();
            if let Some(p) = model.parent(b) {
                let parent = current[p.index()].ok_or(RewriteError::InvalidAlignment)?;
                out[parent].children.push(id);
            }
            out.push(Instance {
                block: b,
                children: Vec::new(),
                pos: None,
            });
            current[b.index()] = Some(id);
        }
        let own = current[step.block().index()].ok_or(RewriteError::InvalidAlignment)?;
        out[own].pos = Some(pos);
    }
    sem.finish(&cfg).map_err(|_| RewriteError::InvalidAlignment)?;
    Ok(out)
}

/// All L and C redexes of `mix`: L redexes ordered by position, then C
/// redexes from the latest to the earliest.
pub fn transformation_redexes(model: &Model, mix: &[Move]) -> Result<Vec<Redex>, RewriteError> {
    let inst = instances(model, mix)?;
    let unit_skip = |i: usize| inst[i].pos.is_some_and(|p| mix[p].is_skip());
    let mut lifts = Vec::new();
    let mut cycles = Vec::new();
    for x in &inst {
        if x.pos.is_some() || x.children.is_empty() {
            continue;
        }
        let arity = model.children(x.block).len();
        let n = x.children.len();
        if x.children.iter().all(|&c| unit_skip(c)) {
            let rule = match model.kind(x.block) {
                BlockKind::Seq if n == arity => Some(Rule::L1),
                BlockKind::Xor if n == 1 => Some(Rule::L2),
                BlockKind::And if n == arity => Some(Rule::L3),
                BlockKind::Loop if n == 1 => Some(Rule::L4),
                _ => None,
            };
            if let Some(rule) = rule {
                let positions = x.children.iter().map(|&c| inst[c].pos.unwrap()).collect();
                lifts.push(Redex { rule, positions });
            }
        }
        if *model.kind(x.block) == BlockKind::Loop {
            let body = model.children(x.block)[0];
            for w in x.children.windows(2) {
                if unit_skip(w[0]) && unit_skip(w[1]) {
                    let rule = if inst[w[0]].block == body { Rule::C2 } else { Rule::C1 };
                    cycles.push(Redex {
                        rule,
                        positions: vec![inst[w[0]].pos.unwrap(), inst[w[1]].pos.unwrap()],
                    });
                }
            }
        }
    }
    lifts.sort_by(|a, b| a.positions.cmp(&b.positions));
    cycles.sort_by(|a, b| b.positions.cmp(&a.positions));
    lifts.extend(cycles);
    Ok(lifts)
}

pub fn find_transformation_redex(model: &Model, mix: &MixAlignment) -> Option<Redex> {
    transformation_redexes(model, mix.moves()).ok()?.into_iter().next()
}

pub fn transform_to_skip(model: &Model, gamma: &Alignment) -> Result<SkipAlignment, RewriteError> {
    let mix = to_mix_alignment(model, gamma)?;
    let mut moves = mix.0;
    while let Some(redex) = transformation_redexes(model, &moves)?.into_iter().next() {
        moves = rewrite_unchecked(model, &moves, &redex);
    }
    if !alignment::validate_skip_alignment(model, &alignment::project_log(&moves), &moves) {
        return Err(RewriteError::NotInSkipLanguage);
    }
    Ok(SkipAlignment(moves))
}

// --- reduction ---------------------------------------------------------------

/// Configurations before each move under the skip semantics, followed by the
/// final one, as far as the sequence replays.
fn prefix_configs(model: &Model, moves: &[Move]) -> Vec<Configuration> {
    let sem = Semantics::skip(model);
    let mut cfg = sem.initial();
    let mut out = Vec::with_capacity(moves.len() + 1);
    for mv in moves {
        out.push(cfg.clone());
        if let Some(step) = mv.step() {
            match sem.apply(&cfg, step) {
                Ok(next) => cfg = next,
                Err(_) => return out,
            }
        }
    }
    out.push(cfg);
    out
}

fn replay_from<'a>(
    sem: &Semantics<'_>,
    cfg: &Configuration,
    moves: impl IntoIterator<Item = &'a Move>,
) -> Option<Configuration> {
    let mut cur = cfg.clone();
    for mv in moves {
        if let Some(step) = mv.step() {
            cur = sem.apply(&cur, step).ok()?;
        }
    }
    Some(cur)
}

/// Whether the skip `first` (applied at `cfg`) may be postponed past `rest`,
/// a run of skips ending in one synchronous move, reaching `after`.
pub(crate) fn skip_not_required(
    sem: &Semantics<'_>,
    cfg: &Configuration,
    first: BlockId,
    rest: &[Move],
    after: &Configuration,
) -> bool {
    let skip = Move::Skip(first);
    replay_from(sem, cfg, rest.iter().chain([&skip])).is_some_and(|c| &c == after)
}

/// The R redexes whose skip sits at position `i`.
fn redexes_at(sem: &Semantics<'_>, cfgs: &[Configuration], delta: &[Move], i: usize) -> Vec<Redex> {
    let mut out = Vec::new();
    let Move::Skip(b1) = delta[i] else { return out };
    let Some(second) = delta.get(i + 1) else { return out };
    let cfg = &cfgs[i];
    match second {
        Move::Log(_) => out.push(Redex {
            rule: Rule::R1,
            positions: vec![i, i + 1],
        }),
        Move::Skip(b2) if *b2 < b1 && sem.commutes(cfg, Step::Skip(b1), Step::Skip(*b2)) => out.push(Redex {
            rule: Rule::R3,
            positions: vec![i, i + 1],
        }),
        _ => {}
    }
    // R2: the skip jumps over the following run of skips and the sync closing it
    let Some(k) = (i + 1..delta.len()).find(|&k| !matches!(delta[k], Move::Skip(_))) else {
        return out;
    };
    if matches!(delta[k], Move::Sync { .. })
        && k + 1 < cfgs.len()
        && skip_not_required(sem, cfg, b1, &delta[i + 1..=k], &cfgs[k + 1])
    {
        out.push(Redex {
            rule: Rule::R2,
            positions: vec![i, k],
        });
    }
    out
}

/// All R redexes, ordered by position.
pub fn reduction_redexes(model: &Model, delta: &[Move]) -> Vec<Redex> {
    let sem = Semantics::skip(model);
    let cfgs = prefix_configs(model, delta);
    let mut out: Vec<Redex> = (0..delta.len().min(cfgs.len()))
        .flat_map(|i| redexes_at(&sem, &cfgs, delta, i))
        .collect();
    out.sort_by(|a, b| a.positions.cmp(&b.positions));
    out
}

pub fn find_reduction_redex(model: &Model, delta: &SkipAlignment) -> Option<Redex> {
    reduction_redexes(model, delta.moves()).into_iter().next()
}

pub fn is_normal_form(model: &Model, delta: &[Move]) -> bool {
    reduction_redexes(model, delta).is_empty()
}

fn rewrite_unchecked(model: &Model, moves: &[Move], redex: &Redex) -> Vec<Move> {
    let p = &redex.positions;
    let mut out = moves.to_vec();
    match redex.rule {
        // the skip at p[0] moves to just after p[1]
        Rule::R1 | Rule::R2 | Rule::R3 => {
            let mv = out.remove(p[0]);
            out.insert(p[1], mv);
        }
        Rule::L1 | Rule::L2 | Rule::L3 | Rule::L4 => {
            let child = moves[p[0]].skipped_block().expect("lifting acts on skips");
            let parent = model.parent(child).expect("lifted block has a parent");
            out[p[0]] = Move::Skip(parent);
            for &i in p[1..].iter().rev() {
                out.remove(i);
            }
        }
        Rule::C1 | Rule::C2 => {
            for &i in p.iter().rev() {
                out.remove(i);
            }
        }
    }
    out
}

/// Applies `redex` to `moves`, failing if it is not a current redex.
pub fn apply_rule(model: &Model, moves: &[Move], redex: &Redex) -> Result<Vec<Move>, RewriteError> {
    let current = if redex.rule.is_reduction() {
        reduction_redexes(model, moves)
    } else {
        transformation_redexes(model, moves).unwrap_or_default()
    };
    if !current.contains(redex) {
        return Err(RewriteError::StaleRedex(redex.clone()));
    }
    Ok(rewrite_unchecked(model, moves, redex))
}

/// `(|δ|+1)·|t1| + |t2|` where `t1` counts skips before log or synchronous
/// moves and `t2` counts skip pairs whose later block is smaller.
pub fn termination_measure(delta: &[Move]) -> u64 {
    let mut t1 = 0u64;
    let mut t2 = 0u64;
    let mut skips_seen: Vec<BlockId> = Vec::new();
    for mv in delta {
        match mv {
            Move::Skip(b) => {
                t2 += skips_seen.iter().filter(|&&s| *b < s).count() as u64;
                skips_seen.push(*b);
            }
            Move::Log(_) | Move::Sync { .. } => t1 += skips_seen.len() as u64,
            Move::Model(_) => {}
        }
    }
    (delta.len() as u64 + 1) * t1 + t2
}

/// Moves that undo a reduction step. A redex `[i, j]` moves the skip at `j`
/// back to position `i`, after which an R rule would move it forward again.
pub fn inverse_redexes(model: &Model, delta: &[Move]) -> Vec<Redex> {
    let sem = Semantics::skip(model);
    let cfgs = prefix_configs(model, delta);
    if cfgs.len() <= delta.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for j in 1..delta.len() {
        let Move::Skip(b) = delta[j] else { continue };
        match &delta[j - 1] {
            Move::Log(_) => out.push(Redex {
                rule: Rule::R1,
                positions: vec![j - 1, j],
            }),
            Move::Skip(a) => {
                if b > *a && sem.commutes(&cfgs[j - 1], Step::Skip(b), Step::Skip(*a)) {
                    out.push(Redex {
                        rule: Rule::R3,
                        positions: vec![j - 1, j],
                    });
                }
            }
            Move::Sync { .. } => {
                let mut i = j - 1;
                loop {
                    let skip = Move::Skip(b);
                    let moved = replay_from(&sem, &cfgs[i], [&skip].into_iter().chain(&delta[i..j]));
                    if moved.is_some_and(|c| c == cfgs[j + 1]) {
                        out.push(Redex {
                            rule: Rule::R2,
                            positions: vec![i, j],
                        });
                    }
                    if i == 0 || !matches!(delta[i - 1], Move::Skip(_)) {
                        break;
                    }
                    i -= 1;
                }
            }
            Move::Model(_) => {}
        }
    }
    out
}

/// Moves the skip at `positions[1]` back to `positions[0]`.
pub fn apply_inverse(moves: &[Move], redex: &Redex) -> Vec<Move> {
    let mut out = moves.to_vec();
    let mv = out.remove(redex.positions[1]);
    out.insert(redex.positions[0], mv);
    out
}

/// Applies R rules leftmost first until none applies.
pub fn normalize(model: &Model, delta: &SkipAlignment) -> SkipAlignment {
    normalize_with(model, delta, |_| 0)
}

/// Applies R rules until none applies; `choose` picks which of the current
/// redexes to rewrite next.
pub fn normalize_with(
    model: &Model,
    delta: &SkipAlignment,
    mut choose: impl FnMut(&[Redex]) -> usize,
) -> SkipAlignment {
    let mut moves = delta.0.clone();
    loop {
        let redexes = reduction_redexes(model, &moves);
        if redexes.is_empty() {
            return SkipAlignment(moves);
        }
        let i = choose(&redexes).min(redexes.len() - 1);
        moves = rewrite_unchecked(model, &moves, &redexes[i]);
    }
}
