use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::seq::{BinarySequence, Bit, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Internal([usize; 2]),
    Leaf { output: Bit, id: usize },
}

/// A complete binary suffix tree with an output bit on each leaf.
///
/// Leaves are stored as forward-order words; the tree is walked with the
/// most recent symbol first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextTreeSpec {
    nodes: Vec<Node>,
    leaf_words: Vec<Word>,
}

/// Outcome of walking the tree on a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Walk {
    /// Arena index of the node where the walk stopped.
    pub node: usize,
    pub depth: usize,
    /// Set when the history ran out before a leaf was reached.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    pub state: Word,
    pub truncated: bool,
}

#[derive(Serialize)]
struct LeafEntry<'a> {
    context: &'a Word,
    output: Bit,
}

impl ContextTreeSpec {
    /// The tree whose root is its only leaf.
    pub fn single_leaf(output: Bit) -> Self {
        ContextTreeSpec {
            nodes: vec![Node::Leaf { output, id: 0 }],
            leaf_words: vec![Word::empty()],
        }
    }

    /// The full tree of depth `depth` (an order-`depth` Markov predictor).
    pub fn full(depth: usize, output: impl Fn(&Word) -> Bit) -> Result<Self> {
        if depth >= usize::BITS as usize - 1 {
            return Err(Error::InvalidTree(format!("depth {depth} too large")));
        }
        let leaves = (0..1usize << depth).map(|code| {
            let bits = (0..depth).rev().map(|i| Bit::from_bool(code >> i & 1 == 1)).collect();
            let w = Word::new(bits);
            let b = output(&w);
            (w, b)
        });
        Self::from_leaves(leaves)
    }

    /// Builds a tree from its leaves. Fails unless the leaves, read most
    /// recent symbol first, form a complete prefix-free binary trie.
    pub fn from_leaves(leaves: impl IntoIterator<Item = (Word, Bit)>) -> Result<Self> {
        #[derive(Clone, Copy)]
        enum Raw {
            Open([Option<usize>; 2]),
            Leaf(Bit, usize),
        }
        let mut raw = vec![Raw::Open([None, None])];
        let mut leaf_words = Vec::new();
        for (word, output) in leaves {
            let mut cur = 0;
            for &b in word.to_path().bits() {
                let next = match raw[cur] {
                    Raw::Leaf(..) => {
                        return Err(Error::InvalidTree(format!(
                            "leaf {word} extends another leaf"
                        )))
                    }
                    Raw::Open(ch) => ch[b.index()],
                };
                cur = match next {
                    Some(i) => i,
                    None => {
                        raw.push(Raw::Open([None, None]));
                        let i = raw.len() - 1;
                        if let Raw::Open(ch) = &mut raw[cur] {
                            ch[b.index()] = Some(i);
                        }
                        i
                    }
                };
            }
            match raw[cur] {
                Raw::Open([None, None]) => {
                    raw[cur] = Raw::Leaf(output, leaf_words.len());
                    leaf_words.push(word);
                }
                _ => {
                    return Err(Error::InvalidTree(format!(
                        "leaf {word} duplicates or prefixes another leaf"
                    )))
                }
            }
        }
        if leaf_words.is_empty() {
            return Err(Error::InvalidTree("no leaves".into()));
        }
        let nodes = raw
            .into_iter()
            .map(|r| match r {
                Raw::Leaf(output, id) => Ok(Node::Leaf { output, id }),
                Raw::Open([Some(a), Some(b)]) => Ok(Node::Internal([a, b])),
                Raw::Open(_) => Err(Error::InvalidTree("tree is not complete".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ContextTreeSpec { nodes, leaf_words })
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_words.len()
    }

    pub fn max_depth(&self) -> usize {
        self.leaf_words.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn leaf_words(&self) -> &[Word] {
        &self.leaf_words
    }

    /// Leaves with their outputs, ordered by word.
    pub fn leaves(&self) -> BTreeMap<Word, Bit> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { output, id } => Some((self.leaf_words[id].clone(), output)),
                Node::Internal(_) => None,
            })
            .collect()
    }

    pub fn output(&self, leaf: &Word) -> Option<Bit> {
        let w = self.walk_path(leaf.to_path().bits().iter().copied());
        match self.nodes[w.node] {
            Node::Leaf { output, .. } if !w.truncated && w.depth == leaf.len() => Some(output),
            _ => None,
        }
    }

    /// Same shape, outputs replaced.
    pub fn relabel(&self, output: impl Fn(&Word) -> Bit) -> Self {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match *n {
                Node::Leaf { id, .. } => Node::Leaf {
                    output: output(&self.leaf_words[id]),
                    id,
                },
                other => other,
            })
            .collect();
        ContextTreeSpec {
            nodes,
            leaf_words: self.leaf_words.clone(),
        }
    }

    fn walk_path(&self, path: impl Iterator<Item = Bit>) -> Walk {
        let mut node = 0;
        let mut depth = 0;
        let mut path = path;
        loop {
            match self.nodes[node] {
                Node::Leaf { .. } => {
                    return Walk {
                        node,
                        depth,
                        truncated: false,
                    }
                }
                Node::Internal(ch) => match path.next() {
                    Some(b) => {
                        node = ch[b.index()];
                        depth += 1;
                    }
                    None => {
                        return Walk {
                            node,
                            depth,
                            truncated: true,
                        }
                    }
                },
            }
        }
    }

    /// Walks the tree on `history = x_1..x_t`, most recent symbol first.
    #[inline]
    pub fn walk(&self, history: &[Bit]) -> Walk {
        self.walk_path(history.iter().rev().copied())
    }

    /// Leaf id and output if the walk ends at a leaf.
    #[inline]
    pub fn leaf_at(&self, walk: &Walk) -> Option<(usize, Bit)> {
        match self.nodes[walk.node] {
            Node::Leaf { output, id } => Some((id, output)),
            Node::Internal(_) => None,
        }
    }

    /// The state selected after observing `history`.
    pub fn resolve(&self, history: &[Bit]) -> Resolved {
        let w = self.walk(history);
        Resolved {
            state: Word::from(&history[history.len() - w.depth..]),
            truncated: w.truncated,
        }
    }

    /// Leaves with outputs as a JSON-ready list.
    pub fn to_json(&self) -> serde_json::Value {
        let leaves = self.leaves();
        let entries: Vec<LeafEntry> = leaves
            .iter()
            .map(|(context, &output)| LeafEntry { context, output })
            .collect();
        serde_json::to_value(entries).expect("leaf list serializes")
    }
}

/// Context of `x` at time `t`: walk `x_t, x_{t-1}, ..` until a leaf is hit
/// or `x_1` has been consumed. `t = 0` walks on the empty history.
pub fn resolve_context(tree: &ContextTreeSpec, x: &BinarySequence, t: usize) -> Result<Resolved> {
    if t > x.len() {
        return Err(Error::Range {
            what: "position",
            value: t,
            min: 0,
            max: x.len(),
        });
    }
    Ok(tree.resolve(x.prefix(t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> BinarySequence {
        BinarySequence::parse(s).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn resolve_examples() {
        let depth1 = ContextTreeSpec::full(1, |_| Bit::Zero).unwrap();
        let r = resolve_context(&depth1, &seq("0110"), 3).unwrap();
        assert_eq!(r, Resolved { state: w("1"), truncated: false });

        let depth2 = ContextTreeSpec::full(2, |_| Bit::Zero).unwrap();
        let r = resolve_context(&depth2, &seq("0110"), 1).unwrap();
        assert_eq!(r, Resolved { state: w("0"), truncated: true });

        let root = ContextTreeSpec::single_leaf(Bit::One);
        for t in 0..=4 {
            let r = resolve_context(&root, &seq("0110"), t).unwrap();
            assert_eq!(r, Resolved { state: Word::empty(), truncated: false });
        }
    }

    #[test]
    fn irregular_tree_walks_recent_first() {
        // Leaves: "0" (last bit 0), "01", "11" (last bit 1, then previous).
        let tree = ContextTreeSpec::from_leaves([
            (w("0"), Bit::Zero),
            (w("01"), Bit::One),
            (w("11"), Bit::Zero),
        ])
        .unwrap();
        assert_eq!(tree.resolve(seq("1101").bits()).state, w("01"));
        assert_eq!(tree.resolve(seq("0011").bits()).state, w("11"));
        assert_eq!(tree.resolve(seq("1").bits()), Resolved { state: w("1"), truncated: true });
        assert_eq!(tree.output(&w("01")), Some(Bit::One));
        assert_eq!(tree.output(&w("1")), None);
        assert_eq!(tree.max_depth(), 2);
    }

    #[test]
    fn rejects_malformed_trees() {
        assert!(ContextTreeSpec::from_leaves([(w("0"), Bit::Zero)]).is_err());
        assert!(ContextTreeSpec::from_leaves([
            (w("0"), Bit::Zero),
            (w("00"), Bit::Zero),
            (w("1"), Bit::Zero)
        ])
        .is_err());
        assert!(ContextTreeSpec::from_leaves(Vec::<(Word, Bit)>::new()).is_err());
        assert!(ContextTreeSpec::from_leaves([
            (w("0"), Bit::Zero),
            (w("0"), Bit::One),
            (w("1"), Bit::Zero)
        ])
        .is_err());
    }

    #[test]
    fn json_lists_leaves() {
        let t = ContextTreeSpec::full(1, |w| w.bits()[0].flip()).unwrap();
        assert_eq!(
            t.to_json().to_string(),
            r#"[{"context":"0","output":1},{"context":"1","output":0}]"#
        );
    }
}
