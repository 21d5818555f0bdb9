//! Constituent-code decomposition of a frozen mask.
//!
//! The decoding tree is split top-down; a span becomes a leaf as soon as it
//! matches one of the four classic node types and fits under the size cap.
//! Types are tried in the order Rate-0, Rate-1, REP, SPC, so a length-2 span
//! `[frozen, info]` is a REP node.

use std::fmt::{self, Write as _};

use crate::error::{config_err, Result};
use crate::polar_code::CodeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Rate0,
    Rate1,
    Rep,
    Spc,
    Internal,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeKind::Rate0 => "Rate0",
            NodeKind::Rate1 => "Rate1",
            NodeKind::Rep => "REP",
            NodeKind::Spc => "SPC",
            NodeKind::Internal => "Internal",
        };
        f.write_str(s)
    }
}

/// Leaf pattern of `span` (`true` = frozen), if any.
pub fn classify(span: &[bool]) -> Option<NodeKind> {
    let frozen = span.iter().filter(|&&f| f).count();
    let len = span.len();
    if frozen == len {
        Some(NodeKind::Rate0)
    } else if frozen == 0 {
        Some(NodeKind::Rate1)
    } else if frozen == len - 1 && !span[len - 1] {
        Some(NodeKind::Rep)
    } else if frozen == 1 && span[0] {
        Some(NodeKind::Spc)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub start: usize,
    pub len: usize,
    pub kind: NodeKind,
    pub children: Option<Box<(Node, Node)>>,
}

impl Node {
    fn build(mask: &[bool], start: usize, len: usize, cap: usize) -> Self {
        let span = &mask[start..start + len];
        if let Some(kind) = classify(span).filter(|_| len <= cap) {
            return Self {
                start,
                len,
                kind,
                children: None,
            };
        }
        let half = len / 2;
        Self {
            start,
            len,
            kind: NodeKind::Internal,
            children: Some(Box::new((
                Self::build(mask, start, half, cap),
                Self::build(mask, start + half, half, cap),
            ))),
        }
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Node>) {
        match &self.children {
            None => out.push(self),
            Some(pair) => {
                pair.0.collect_leaves(out);
                pair.1.collect_leaves(out);
            }
        }
    }

    fn write_text(&self, depth: usize, out: &mut String) {
        let _ = writeln!(
            out,
            "{:indent$}{} [{}, {})",
            "",
            self.kind,
            self.start,
            self.start + self.len,
            indent = 2 * depth
        );
        if let Some(pair) = &self.children {
            pair.0.write_text(depth + 1, out);
            pair.1.write_text(depth + 1, out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstituentTree {
    pub root: Node,
}

impl ConstituentTree {
    /// Leaves in bit order.
    pub fn leaves(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out
    }

    /// Number of constituent codes.
    pub fn s(&self) -> usize {
        self.leaves().len()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.root.write_text(0, &mut out);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("span_start,span_len,kind\n");
        for leaf in self.leaves() {
            let _ = writeln!(out, "{},{},{}", leaf.start, leaf.len, leaf.kind);
        }
        out
    }
}

pub fn decompose(frozen_mask: &[bool], max_leaf_size: usize) -> Result<ConstituentTree> {
    let n = frozen_mask.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(config_err(format!("mask length {n} is not a power of two")));
    }
    if max_leaf_size == 0 {
        return Err(config_err("max_leaf_size must be at least 1"));
    }
    Ok(ConstituentTree {
        root: Node::build(frozen_mask, 0, n, max_leaf_size),
    })
}

/// `S` for a code; `max_leaf_size = None` means no cap.
pub fn count_s(config: &CodeConfig, max_leaf_size: Option<usize>) -> Result<usize> {
    let cap = max_leaf_size.unwrap_or(config.n());
    Ok(decompose(config.frozen_mask(), cap)?.s())
}
