//! Block-structured process models.
//!
//! A [`Model`] is a rooted tree of blocks. Interior blocks are sequences,
//! exclusive choices, parallel blocks or binary loops; leaves are labeled
//! activities or silent (`tau`) steps. Blocks are numbered in preorder, and
//! that numbering doubles as the total block order used to sort commuting
//! skip moves.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Identifier of a block: its preorder index in the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub u32);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}", self.0)
    }
}

impl std::str::FromStr for BlockId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('B')
            .and_then(|n| n.parse().ok())
            .map(BlockId)
            .ok_or_else(|| format!("invalid block id `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    Seq,
    Xor,
    And,
    Loop,
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Seq => "->",
            Operator::Xor => "X",
            Operator::And => "+",
            Operator::Loop => "*",
        }
    }
}

/// Unvalidated block tree, as produced by the text parser or a generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tree {
    Activity(String),
    Tau,
    Node(Operator, Vec<Tree>),
}

impl Tree {
    pub fn activity(label: impl Into<String>) -> Tree {
        Tree::Activity(label.into())
    }

    pub fn node(op: Operator, children: Vec<Tree>) -> Tree {
        Tree::Node(op, children)
    }

    pub fn size(&self) -> usize {
        match self {
            Tree::Activity(_) | Tree::Tau => 1,
            Tree::Node(_, children) => 1 + children.iter().map(Tree::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Activity(_) | Tree::Tau => 0,
            Tree::Node(_, children) => 1 + children.iter().map(Tree::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Activity(String),
    Tau,
    Seq,
    Xor,
    And,
    Loop,
}

impl BlockKind {
    pub fn is_leaf(&self) -> bool {
        matches!(self, BlockKind::Activity(_) | BlockKind::Tau)
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            BlockKind::Activity(label) => Some(label),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Block {
    pub id: BlockId,
    pub kind: BlockKind,
    pub parent: Option<BlockId>,
    pub children: Vec<BlockId>,
    /// One past the last block of this block's subtree (preorder ids are contiguous).
    pub subtree_end: BlockId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("loop block at {block} must have exactly 2 children, found {found}")]
    ArityViolation { block: BlockId, found: usize },
    #[error("activity at {block} has an empty label")]
    EmptyLabel { block: BlockId },
    #[error("operator `{op}` at {block} has no children")]
    EmptyTree { block: BlockId, op: &'static str },
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
}

/// A validated block-structured model with precomputed minimal skip costs.
#[derive(Clone, Debug)]
pub struct Model {
    blocks: Vec<Block>,
    kappa: Vec<u32>,
    visible: Vec<bool>,
}

impl Model {
    /// Validates a block tree and assigns preorder ids.
    pub fn new(tree: &Tree) -> Result<Model, ModelError> {
        let mut blocks = Vec::with_capacity(tree.size());
        build(tree, None, &mut blocks)?;
        let n = blocks.len();
        let mut kappa = vec![0; n];
        let mut visible = vec![false; n];
        // children have larger ids than their parent
        for i in (0..n).rev() {
            let block = &blocks[i];
            let child_kappa = block.children.iter().map(|c| kappa[c.index()]);
            kappa[i] = match &block.kind {
                BlockKind::Activity(_) => 1,
                BlockKind::Tau => 0,
                BlockKind::Seq | BlockKind::And => child_kappa.sum(),
                BlockKind::Xor => child_kappa.min().unwrap_or(0),
                BlockKind::Loop => kappa[block.children[0].index()],
            };
            visible[i] = match &block.kind {
                BlockKind::Activity(_) => true,
                BlockKind::Tau => false,
                _ => block.children.iter().any(|c| visible[c.index()]),
            };
        }
        Ok(Model { blocks, kappa, visible })
    }

    pub fn root(&self) -> BlockId {
        BlockId(0)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.index()]
    }

    pub fn get(&self, id: BlockId) -> Result<&Block, ModelError> {
        self.blocks.get(id.index()).ok_or(ModelError::UnknownBlock(id))
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        (0..self.blocks.len() as u32).map(BlockId)
    }

    pub fn kind(&self, id: BlockId) -> &BlockKind {
        &self.block(id).kind
    }

    pub fn parent(&self, id: BlockId) -> Option<BlockId> {
        self.block(id).parent
    }

    pub fn children(&self, id: BlockId) -> &[BlockId] {
        &self.block(id).children
    }

    pub fn label(&self, id: BlockId) -> Option<&str> {
        self.kind(id).label()
    }

    pub fn is_leaf(&self, id: BlockId) -> bool {
        self.kind(id).is_leaf()
    }

    /// Preorder ids of `id` and all its descendants.
    pub fn subtree(&self, id: BlockId) -> std::ops::Range<usize> {
        id.index()..self.block(id).subtree_end.index()
    }

    pub fn is_ancestor_or_self(&self, ancestor: BlockId, id: BlockId) -> bool {
        self.subtree(ancestor).contains(&id.index())
    }

    /// Whether the subtree of `id` contains a visible activity, i.e. whether an
    /// execution of it can contain a synchronous move.
    pub fn has_visible(&self, id: BlockId) -> bool {
        self.visible[id.index()]
    }

    /// Minimal skip cost: number of visible leaf executions on a cheapest
    /// pure-model execution of the block.
    pub fn min_skip_cost(&self, id: BlockId) -> Result<u32, ModelError> {
        self.kappa.get(id.index()).copied().ok_or(ModelError::UnknownBlock(id))
    }

    pub fn kappa(&self, id: BlockId) -> u32 {
        self.kappa[id.index()]
    }

    pub fn block_order(&self, a: BlockId, b: BlockId) -> Result<Ordering, ModelError> {
        self.get(a)?;
        self.get(b)?;
        Ok(a.cmp(&b))
    }

    pub fn activity_leaves(&self) -> impl Iterator<Item = (BlockId, &str)> + '_ {
        self.blocks.iter().filter_map(|b| b.kind.label().map(|l| (b.id, l)))
    }

    pub fn leaves_labeled<'a>(&'a self, label: &'a str) -> impl Iterator<Item = BlockId> + 'a {
        self.activity_leaves()
            .filter(move |(_, l)| *l == label)
            .map(|(id, _)| id)
    }

    pub fn to_tree(&self) -> Tree {
        self.tree_at(self.root())
    }

    fn tree_at(&self, id: BlockId) -> Tree {
        let children = || self.children(id).iter().map(|&c| self.tree_at(c)).collect();
        match self.kind(id) {
            BlockKind::Activity(label) => Tree::Activity(label.clone()),
            BlockKind::Tau => Tree::Tau,
            BlockKind::Seq => Tree::Node(Operator::Seq, children()),
            BlockKind::Xor => Tree::Node(Operator::Xor, children()),
            BlockKind::And => Tree::Node(Operator::And, children()),
            BlockKind::Loop => Tree::Node(Operator::Loop, children()),
        }
    }
}

fn build(tree: &Tree, parent: Option<BlockId>, out: &mut Vec<Block>) -> Result<BlockId, ModelError> {
    let id = BlockId(out.len() as u32);
    let kind = match tree {
        Tree::Activity(label) if label.is_empty() => return Err(ModelError::EmptyLabel { block: id }),
        Tree::Activity(label) => BlockKind::Activity(label.clone()),
        Tree::Tau => BlockKind::Tau,
        Tree::Node(op, children) => {
            if children.is_empty() {
                return Err(ModelError::EmptyTree {
                    block: id,
                    op: op.symbol(),
                });
            }
            if *op == Operator::Loop && children.len() != 2 {
                return Err(ModelError::ArityViolation {
                    block: id,
                    found: children.len(),
                });
            }
            match op {
                Operator::Seq => BlockKind::Seq,
                Operator::Xor => BlockKind::Xor,
                Operator::And => BlockKind::And,
                Operator::Loop => BlockKind::Loop,
            }
        }
    };
    out.push(Block {
        id,
        kind,
        parent,
        children: Vec::new(),
        subtree_end: id,
    });
    if let Tree::Node(_, children) = tree {
        for child in children {
            let child_id = build(child, Some(id), out)?;
            out[id.index()].children.push(child_id);
        }
    }
    out[id.index()].subtree_end = BlockId(out.len() as u32);
    Ok(id)
}
