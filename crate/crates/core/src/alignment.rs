//! Moves, alignments and their costs.

use std::fmt;

use crate::model::{BlockId, BlockKind, Model};
use crate::semantics::{Semantics, Step};

pub type Trace = Vec<String>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    /// Log move: the event is not matched by the model.
    Log(String),
    /// Synchronous move on an activity leaf.
    Sync { label: String, leaf: BlockId },
    /// Model move on a single leaf (classical alignments).
    Model(BlockId),
    /// Skip move over a whole block (skip alignments).
    Skip(BlockId),
}

impl Move {
    pub fn sync(label: impl Into<String>, leaf: BlockId) -> Move {
        Move::Sync {
            label: label.into(),
            leaf,
        }
    }

    pub fn log(label: impl Into<String>) -> Move {
        Move::Log(label.into())
    }

    /// Model-side component, if any.
    pub fn step(&self) -> Option<Step> {
        match self {
            Move::Log(_) => None,
            Move::Sync { leaf, .. } => Some(Step::Sync(*leaf)),
            Move::Model(leaf) => Some(Step::Model(*leaf)),
            Move::Skip(block) => Some(Step::Skip(*block)),
        }
    }

    /// Log-side component, if any.
    pub fn log_label(&self) -> Option<&str> {
        match self {
            Move::Log(label) | Move::Sync { label, .. } => Some(label),
            Move::Model(_) | Move::Skip(_) => None,
        }
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Move::Skip(_))
    }

    pub fn skipped_block(&self) -> Option<BlockId> {
        match self {
            Move::Skip(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Log(l) => write!(f, "log({l})"),
            Move::Sync { label, .. } => write!(f, "sync({label})"),
            Move::Model(b) => write!(f, "model({b})"),
            Move::Skip(b) => write!(f, "skip({b})"),
        }
    }
}

pub struct MovesDisplay<'a>(pub &'a [Move]);

impl fmt::Display for MovesDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, mv) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{mv}")?;
        }
        write!(f, ">")
    }
}

/// Classical alignment: log, synchronous and model moves.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Alignment(pub Vec<Move>);

/// Skip alignment: log, synchronous and skip moves.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SkipAlignment(pub Vec<Move>);

impl Alignment {
    pub fn moves(&self) -> &[Move] {
        &self.0
    }
}

impl SkipAlignment {
    pub fn moves(&self) -> &[Move] {
        &self.0
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        MovesDisplay(&self.0).fmt(f)
    }
}

impl fmt::Display for SkipAlignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        MovesDisplay(&self.0).fmt(f)
    }
}

/// Unit cost function: log and visible model moves cost 1, synchronous and
/// silent moves cost 0, and a skip over `B` costs the minimal skip cost of `B`.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitCost;

impl UnitCost {
    pub fn move_cost(&self, model: &Model, mv: &Move) -> u32 {
        match mv {
            Move::Log(_) => 1,
            Move::Sync { .. } => 0,
            Move::Model(leaf) => match model.kind(*leaf) {
                BlockKind::Tau => 0,
                _ => 1,
            },
            Move::Skip(block) => model.kappa(*block),
        }
    }

    pub fn total_cost(&self, model: &Model, moves: &[Move]) -> u32 {
        moves.iter().map(|mv| self.move_cost(model, mv)).sum()
    }
}

pub fn move_cost(model: &Model, mv: &Move) -> u32 {
    UnitCost.move_cost(model, mv)
}

pub fn total_cost(model: &Model, moves: &[Move]) -> u32 {
    UnitCost.total_cost(model, moves)
}

pub fn project_log(moves: &[Move]) -> Trace {
    moves.iter().filter_map(|m| m.log_label().map(str::to_owned)).collect()
}

pub fn project_model(moves: &[Move]) -> Vec<Step> {
    moves.iter().filter_map(Move::step).collect()
}

fn labels_consistent(model: &Model, moves: &[Move]) -> bool {
    moves.iter().all(|mv| match mv {
        Move::Sync { label, leaf } => leaf.index() < model.len() && model.label(*leaf) == Some(label),
        Move::Model(b) | Move::Skip(b) => b.index() < model.len(),
        Move::Log(_) => true,
    })
}

/// Whether `moves` is a skip alignment of `trace` on `model`.
pub fn validate_skip_alignment(model: &Model, trace: &[String], moves: &[Move]) -> bool {
    !moves.iter().any(|m| matches!(m, Move::Model(_)))
        && labels_consistent(model, moves)
        && project_log(moves) == trace
        && Semantics::skip(model).accepts(&project_model(moves))
}

/// Whether `moves` is a classical alignment of `trace` on `model`.
pub fn validate_alignment(model: &Model, trace: &[String], moves: &[Move]) -> bool {
    !moves.iter().any(Move::is_skip)
        && labels_consistent(model, moves)
        && project_log(moves) == trace
        && Semantics::classical(model).accepts(&project_model(moves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_model;

    fn b(i: u32) -> BlockId {
        BlockId(i)
    }

    fn t(s: &[&str]) -> Trace {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn costs() {
        let m = parse_model("->(a,X(b,c),d)").unwrap();
        assert_eq!(move_cost(&m, &Move::log("x")), 1);
        assert_eq!(move_cost(&m, &Move::sync("a", b(1))), 0);
        assert_eq!(move_cost(&m, &Move::Skip(b(2))), 1);
        assert_eq!(total_cost(&m, &[]), 0);
        let d = [Move::sync("a", b(1)), Move::Skip(b(2)), Move::sync("d", b(5))];
        assert_eq!(total_cost(&m, &d), 1);

        let m = parse_model("*(a,b)").unwrap();
        assert_eq!(total_cost(&m, &[Move::log("b"), Move::Skip(b(0))]), 2);

        let m = parse_model("->(a,tau)").unwrap();
        assert_eq!(move_cost(&m, &Move::Model(b(2))), 0);
        assert_eq!(move_cost(&m, &Move::Model(b(1))), 1);
    }

    #[test]
    fn projections() {
        let d = [Move::sync("a", b(1)), Move::Skip(b(2)), Move::sync("d", b(5))];
        assert_eq!(project_log(&d), t(&["a", "d"]));
        assert_eq!(project_log(&[]), t(&[]));
        assert_eq!(project_log(&[Move::log("x"), Move::log("y")]), t(&["x", "y"]));

        let d = [Move::sync("a", b(1)), Move::log("x"), Move::Skip(b(2))];
        assert_eq!(project_model(&d), vec![Step::Sync(b(1)), Step::Skip(b(2))]);
        assert!(project_model(&[Move::log("x")]).is_empty());
        assert_eq!(project_model(&[Move::Model(b(3))]), vec![Step::Model(b(3))]);
    }

    #[test]
    fn skip_alignment_validation() {
        let m = parse_model("->(a,X(b,c),d)").unwrap();
        let sigma = t(&["a", "d"]);
        let good = [Move::sync("a", b(1)), Move::Skip(b(2)), Move::sync("d", b(5))];
        assert!(validate_skip_alignment(&m, &sigma, &good));
        let missing = [Move::sync("a", b(1)), Move::sync("d", b(5))];
        assert!(!validate_skip_alignment(&m, &sigma, &missing));
        let too_specific = [Move::sync("a", b(1)), Move::Skip(b(3)), Move::sync("d", b(5))];
        assert!(!validate_skip_alignment(&m, &sigma, &too_specific));
        let wrong_label = [Move::sync("x", b(1)), Move::Skip(b(2)), Move::sync("d", b(5))];
        assert!(!validate_skip_alignment(&m, &t(&["x", "d"]), &wrong_label));
    }

    #[test]
    fn classical_validation() {
        let m = parse_model("->(a,X(b,c),d)").unwrap();
        let sigma = t(&["a", "d"]);
        let g = [Move::sync("a", b(1)), Move::Model(b(3)), Move::sync("d", b(5))];
        assert!(validate_alignment(&m, &sigma, &g));
        assert!(!validate_alignment(&m, &sigma, &g[..2]));
    }
}
