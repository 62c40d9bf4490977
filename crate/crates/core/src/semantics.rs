//! Execution semantics of block models.
//!
//! A [`Configuration`] records, per block, whether the current instance of
//! that block is still in the future, active, or done. Loops additionally
//! remember whether they are running their do-child or their redo-child, and
//! loop children are reset to the future whenever a new iteration starts.
//!
//! Blocks are closed lazily: a block whose work is finished stays active until
//! its parent moves on (or the run is finished), because a finished loop may
//! still choose to iterate again.
//!
//! Two flavours of replay are supported. [`Mode::Classical`] accepts any
//! execution of the model, with model moves at leaf granularity. [`Mode::Skip`]
//! accepts only the skip language: every executed (not skipped) block instance
//! must contain a synchronous move, and no loop instance may have two
//! consecutive child instances without one.

use thiserror::Error;

use crate::model::{BlockId, BlockKind, Model};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// A leaf executed synchronously with a log event.
    Sync(BlockId),
    /// A leaf executed as a model move (classical alignments only).
    Model(BlockId),
    /// A whole block executed as one skip move.
    Skip(BlockId),
}

impl Step {
    pub fn block(self) -> BlockId {
        match self {
            Step::Sync(b) | Step::Model(b) | Step::Skip(b) => b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Classical,
    Skip,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("leaf {0} is not enabled")]
    NotEnabled(BlockId),
    #[error("block {0} cannot be skipped here")]
    NotSkippable(BlockId),
    #[error("{0} is not an activity leaf")]
    NotALeaf(BlockId),
    #[error("model moves are not part of the skip language")]
    ModelMoveInSkipMode,
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("execution cannot be completed")]
    NotFinal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
enum Status {
    #[default]
    Future,
    Active,
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
enum Phase {
    #[default]
    Fresh,
    Do,
    Redo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
struct Node {
    status: Status,
    has_sync: bool,
    phase: Phase,
    /// Loops only: whether the most recently closed child instance was sync-free.
    last_child_sync_free: Option<bool>,
}

/// Execution state of a model.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    nodes: Box<[Node]>,
}

impl Configuration {
    pub fn is_future(&self, b: BlockId) -> bool {
        self.nodes[b.index()].status == Status::Future
    }

    pub fn is_active(&self, b: BlockId) -> bool {
        self.nodes[b.index()].status == Status::Active
    }

    pub fn is_done(&self, b: BlockId) -> bool {
        self.nodes[b.index()].status == Status::Done
    }

    /// Whether the loop `b` is currently in its redo-child.
    pub fn in_redo(&self, b: BlockId) -> bool {
        self.nodes[b.index()].phase == Phase::Redo
    }
}

/// Failure inside a transition; mapped to a [`SemanticsError`] by the caller.
#[derive(Debug)]
struct Blocked;

type Fire = Result<(), Blocked>;

/// A pure-skip continuation of a configuration.
#[derive(Clone, Debug)]
pub struct SkipPath {
    pub skips: Vec<(BlockId, u32)>,
    pub config: Configuration,
    /// The last skip move (of this path, or the one handed in when the path is
    /// empty) together with the configuration before it.
    pub trailing_skip: Option<(BlockId, Configuration)>,
}

impl SkipPath {
    pub fn cost(&self) -> u32 {
        self.skips.iter().map(|(_, k)| k).sum()
    }
}

#[derive(Clone, Copy)]
pub struct Semantics<'m> {
    model: &'m Model,
    mode: Mode,
}

impl<'m> Semantics<'m> {
    pub fn new(model: &'m Model, mode: Mode) -> Self {
        Semantics { model, mode }
    }

    pub fn skip(model: &'m Model) -> Self {
        Self::new(model, Mode::Skip)
    }

    pub fn classical(model: &'m Model) -> Self {
        Self::new(model, Mode::Classical)
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn initial(&self) -> Configuration {
        Configuration {
            nodes: vec![Node::default(); self.model.len()].into_boxed_slice(),
        }
    }

    pub fn apply(&self, c: &Configuration, step: Step) -> Result<Configuration, SemanticsError> {
        self.apply_traced(c, step, &mut Vec::new())
    }

    /// Like [`Semantics::apply`], also reporting every block that starts a
    /// fresh instance during the step, outermost first.
    pub fn apply_traced(
        &self,
        c: &Configuration,
        step: Step,
        opened: &mut Vec<BlockId>,
    ) -> Result<Configuration, SemanticsError> {
        let b = step.block();
        if b.index() >= self.model.len() {
            return Err(SemanticsError::UnknownBlock(b));
        }
        let mut next = c.clone();
        let n = &mut next.nodes;
        match step {
            Step::Sync(leaf) => {
                if !matches!(self.model.kind(leaf), BlockKind::Activity(_)) {
                    return Err(SemanticsError::NotALeaf(leaf));
                }
                self.fire_leaf(n, leaf, true, opened)
                    .map_err(|_| SemanticsError::NotEnabled(leaf))?;
            }
            Step::Model(leaf) => {
                if self.mode == Mode::Skip {
                    return Err(SemanticsError::ModelMoveInSkipMode);
                }
                if !self.model.is_leaf(leaf) {
                    return Err(SemanticsError::NotALeaf(leaf));
                }
                self.fire_leaf(n, leaf, false, opened)
                    .map_err(|_| SemanticsError::NotEnabled(leaf))?;
            }
            Step::Skip(block) => {
                self.fire_skip(n, block, opened)
                    .map_err(|_| SemanticsError::NotSkippable(block))?;
            }
        }
        Ok(next)
    }

    pub fn apply_sync(&self, c: &Configuration, leaf: BlockId) -> Result<Configuration, SemanticsError> {
        self.apply(c, Step::Sync(leaf))
    }

    pub fn apply_skip(&self, c: &Configuration, block: BlockId) -> Result<Configuration, SemanticsError> {
        self.apply(c, Step::Skip(block))
    }

    pub fn replay(&self, steps: &[Step]) -> Result<Configuration, SemanticsError> {
        let mut c = self.initial();
        for &step in steps {
            c = self.apply(&c, step)?;
        }
        Ok(c)
    }

    /// Whether `steps` replay to a configuration that can be closed.
    pub fn accepts(&self, steps: &[Step]) -> bool {
        self.replay(steps).and_then(|c| self.finish(&c)).is_ok()
    }

    /// Closes every open block, checking the skip-language conditions in skip mode.
    pub fn finish(&self, c: &Configuration) -> Result<Configuration, SemanticsError> {
        let mut next = c.clone();
        let root = self.model.root();
        let ok = match next.nodes[root.index()].status {
            Status::Future => false,
            Status::Done => true,
            Status::Active => self.close(&mut next.nodes, root).is_ok(),
        };
        if ok {
            Ok(next)
        } else {
            Err(SemanticsError::NotFinal)
        }
    }

    pub fn is_final(&self, c: &Configuration) -> bool {
        self.finish(c).is_ok()
    }

    /// Visible leaves that can fire synchronously right now.
    pub fn enabled_sync_leaves(&self, c: &Configuration) -> Vec<(BlockId, &'m str)> {
        self.model
            .activity_leaves()
            .filter(|&(leaf, _)| self.apply(c, Step::Sync(leaf)).is_ok())
            .collect()
    }

    /// Two steps commute at `c` when both orders are valid and end in the same
    /// configuration.
    pub fn commutes(&self, c: &Configuration, first: Step, second: Step) -> bool {
        let ab = self.apply(c, first).and_then(|x| self.apply(&x, second));
        let Ok(ab) = ab else { return false };
        let ba = self.apply(c, second).and_then(|x| self.apply(&x, first));
        matches!(ba, Ok(ba) if ba == ab)
    }

    /// Whether some continuation reaches a valid final configuration. In
    /// classical mode every reachable configuration is viable.
    pub fn is_viable(&self, c: &Configuration) -> bool {
        if self.mode == Mode::Classical {
            return true;
        }
        let root = self.model.root();
        match c.nodes[root.index()].status {
            Status::Future | Status::Done => true,
            Status::Active => self.viable_node(&c.nodes, root),
        }
    }

    /// Cost of a cheapest pure-model completion of `c`.
    pub fn remaining_cost(&self, c: &Configuration) -> u32 {
        self.remaining(&c.nodes, self.model.root())
    }

    /// All pure-skip continuations of `c` (including the empty one) whose end
    /// configuration is viable. Adjacent commuting skips appear only in block
    /// order, so every returned path is one representative of its class.
    pub fn enumerate_skip_paths(&self, c: &Configuration) -> Vec<SkipPath> {
        self.enumerate_skip_paths_after(c, None)
    }

    /// As [`Semantics::enumerate_skip_paths`], continuing after a skip move
    /// `prev` that was applied at the given configuration.
    pub fn enumerate_skip_paths_after(
        &self,
        c: &Configuration,
        prev: Option<(BlockId, &Configuration)>,
    ) -> Vec<SkipPath> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        let prev = prev.map(|(b, cfg)| (b, cfg.clone()));
        self.skip_paths_dfs(c, prev, &mut path, &mut out);
        out
    }

    fn skip_paths_dfs(
        &self,
        c: &Configuration,
        prev: Option<(BlockId, Configuration)>,
        path: &mut Vec<(BlockId, u32)>,
        out: &mut Vec<SkipPath>,
    ) {
        out.push(SkipPath {
            skips: path.clone(),
            config: c.clone(),
            trailing_skip: prev.clone(),
        });
        for b in self.model.ids() {
            let Ok(next) = self.apply_skip(c, b) else { continue };
            if !self.is_viable(&next) {
                continue;
            }
            if let Some((pb, pcfg)) = &prev {
                if b < *pb && self.commutes(pcfg, Step::Skip(*pb), Step::Skip(b)) {
                    continue;
                }
            }
            path.push((b, self.model.kappa(b)));
            self.skip_paths_dfs(&next, Some((b, c.clone())), path, out);
            path.pop();
        }
    }

    // --- transitions -------------------------------------------------------

    fn fire_leaf(&self, n: &mut [Node], leaf: BlockId, sync: bool, opened: &mut Vec<BlockId>) -> Fire {
        self.open(n, leaf, opened)?;
        n[leaf.index()].status = Status::Done;
        if sync {
            let mut cur = Some(leaf);
            while let Some(b) = cur {
                n[b.index()].has_sync = true;
                cur = self.model.parent(b);
            }
        }
        self.child_closed(n, leaf, !sync)
    }

    fn fire_skip(&self, n: &mut [Node], block: BlockId, opened: &mut Vec<BlockId>) -> Fire {
        self.open(n, block, opened)?;
        for node in &mut n[self.model.subtree(block)] {
            *node = Node {
                status: Status::Done,
                ..Node::default()
            };
        }
        self.child_closed(n, block, true)
    }

    /// Starts a fresh instance of `x`, opening ancestors and closing finished
    /// predecessors as needed.
    fn open(&self, n: &mut [Node], x: BlockId, opened: &mut Vec<BlockId>) -> Fire {
        let m = self.model;
        match m.parent(x) {
            None => {
                if n[x.index()].status != Status::Future {
                    return Err(Blocked);
                }
            }
            Some(p) => {
                if n[p.index()].status != Status::Active {
                    self.open(n, p, opened)?;
                }
                let siblings = m.children(p);
                match m.kind(p) {
                    BlockKind::Seq => {
                        if n[x.index()].status != Status::Future {
                            return Err(Blocked);
                        }
                        let i = siblings.iter().position(|&c| c == x).expect("child of parent");
                        if i > 0 {
                            self.finish_child(n, siblings[i - 1])?;
                        }
                    }
                    BlockKind::Xor => {
                        if siblings.iter().any(|c| n[c.index()].status != Status::Future) {
                            return Err(Blocked);
                        }
                    }
                    BlockKind::And => {
                        if n[x.index()].status != Status::Future {
                            return Err(Blocked);
                        }
                    }
                    BlockKind::Loop => {
                        let (body, redo) = (siblings[0], siblings[1]);
                        let phase = n[p.index()].phase;
                        if x == body {
                            match phase {
                                Phase::Fresh => {}
                                Phase::Redo => {
                                    self.finish_child(n, redo)?;
                                    self.reset(n, body);
                                }
                                Phase::Do => return Err(Blocked),
                            }
                            n[p.index()].phase = Phase::Do;
                        } else {
                            match phase {
                                Phase::Do => {
                                    self.finish_child(n, body)?;
                                    self.reset(n, redo);
                                }
                                Phase::Fresh | Phase::Redo => return Err(Blocked),
                            }
                            n[p.index()].phase = Phase::Redo;
                        }
                    }
                    BlockKind::Activity(_) | BlockKind::Tau => unreachable!("leaves have no children"),
                }
            }
        }
        opened.push(x);
        n[x.index()] = Node {
            status: Status::Active,
            ..Node::default()
        };
        Ok(())
    }

    fn reset(&self, n: &mut [Node], b: BlockId) {
        for node in &mut n[self.model.subtree(b)] {
            *node = Node::default();
        }
    }

    fn finish_child(&self, n: &mut [Node], c: BlockId) -> Fire {
        match n[c.index()].status {
            Status::Future => Err(Blocked),
            Status::Active => self.close(n, c),
            Status::Done => Ok(()),
        }
    }

    fn close(&self, n: &mut [Node], x: BlockId) -> Fire {
        let m = self.model;
        let kids = m.children(x);
        match m.kind(x) {
            BlockKind::Seq | BlockKind::And => {
                for &c in kids {
                    self.finish_child(n, c)?;
                }
            }
            BlockKind::Xor => {
                let chosen = kids
                    .iter()
                    .copied()
                    .find(|c| n[c.index()].status != Status::Future)
                    .ok_or(Blocked)?;
                self.finish_child(n, chosen)?;
            }
            BlockKind::Loop => {
                if n[x.index()].phase != Phase::Do {
                    return Err(Blocked);
                }
                self.finish_child(n, kids[0])?;
            }
            BlockKind::Activity(_) | BlockKind::Tau => {}
        }
        let sync_free = !n[x.index()].has_sync;
        if self.mode == Mode::Skip && sync_free {
            // an executed block without synchronous moves should have been one skip
            return Err(Blocked);
        }
        n[x.index()].status = Status::Done;
        self.child_closed(n, x, sync_free)
    }

    fn child_closed(&self, n: &mut [Node], child: BlockId, sync_free: bool) -> Fire {
        if self.mode == Mode::Classical {
            return Ok(());
        }
        if let Some(p) = self.model.parent(child) {
            if *self.model.kind(p) == BlockKind::Loop {
                let node = &mut n[p.index()];
                if sync_free && node.last_child_sync_free == Some(true) {
                    // pure-skip loop iteration
                    return Err(Blocked);
                }
                node.last_child_sync_free = Some(sync_free);
            }
        }
        Ok(())
    }

    fn viable_node(&self, n: &[Node], x: BlockId) -> bool {
        let m = self.model;
        let kids = m.children(x);
        let node = n[x.index()];
        let status = |c: BlockId| n[c.index()].status;
        match m.kind(x) {
            BlockKind::Seq => {
                let Some(i) = kids.iter().rposition(|&c| status(c) != Status::Future) else {
                    return false;
                };
                let cur = kids[i];
                let ok = match status(cur) {
                    Status::Active => self.viable_node(n, cur),
                    Status::Done => true,
                    Status::Future => false,
                };
                ok && (node.has_sync
                    || status(cur) == Status::Active
                    || kids[i + 1..].iter().any(|&c| m.has_visible(c)))
            }
            BlockKind::Xor => match kids.iter().copied().find(|&c| status(c) != Status::Future) {
                Some(c) if status(c) == Status::Active => self.viable_node(n, c),
                Some(_) => node.has_sync,
                None => false,
            },
            BlockKind::And => {
                let mut may_sync = node.has_sync;
                for &c in kids {
                    match status(c) {
                        Status::Active => {
                            if !self.viable_node(n, c) {
                                return false;
                            }
                            may_sync = true;
                        }
                        Status::Future => may_sync |= m.has_visible(c),
                        Status::Done => {}
                    }
                }
                may_sync
            }
            BlockKind::Loop => {
                let (body, redo) = (kids[0], kids[1]);
                match node.phase {
                    Phase::Do => match status(body) {
                        Status::Active => self.viable_node(n, body),
                        Status::Done => node.has_sync || m.has_visible(redo),
                        Status::Future => false,
                    },
                    Phase::Redo => match status(redo) {
                        Status::Active => self.viable_node(n, redo),
                        Status::Done => node.last_child_sync_free == Some(false) || m.has_visible(body),
                        Status::Future => false,
                    },
                    Phase::Fresh => false,
                }
            }
            BlockKind::Activity(_) | BlockKind::Tau => true,
        }
    }

    fn remaining(&self, n: &[Node], x: BlockId) -> u32 {
        let m = self.model;
        match n[x.index()].status {
            Status::Future => m.kappa(x),
            Status::Done => 0,
            Status::Active => {
                let kids = m.children(x);
                match m.kind(x) {
                    BlockKind::Seq | BlockKind::And => kids.iter().map(|&c| self.remaining(n, c)).sum(),
                    BlockKind::Xor => kids
                        .iter()
                        .find(|c| n[c.index()].status != Status::Future)
                        .map_or(m.kappa(x), |&c| self.remaining(n, c)),
                    BlockKind::Loop => match n[x.index()].phase {
                        Phase::Redo => self.remaining(n, kids[1]) + m.kappa(kids[0]),
                        _ => self.remaining(n, kids[0]),
                    },
                    BlockKind::Activity(_) | BlockKind::Tau => 0,
                }
            }
        }
    }
}

/// Whether a model-side sequence of synchronous leaves and skips belongs to
/// the skip language of `model`.
pub fn in_skip_language(model: &Model, steps: &[Step]) -> bool {
    Semantics::skip(model).accepts(steps)
}
