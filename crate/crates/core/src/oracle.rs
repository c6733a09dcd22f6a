//! Bracketing the S-state context predictability of a sequence.
//!
//! The lower end is the minority-count bound of the best context tree with
//! at most `S` leaves, less `S` for the transient states. The upper end is
//! the error count of an explicit machine: a chain of transient states
//! reproducing the first `t0` symbols, followed by the best tree with
//! `S - t0` leaves, minimized over `t0`. Both rely on a leaf-budgeted
//! tree-knapsack over a suffix-count trie.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::predictor::{
    count_machine_errors, hindsight_error, run_reference_machine, ContextTreeSpec, CountTriple,
    PrefixTreeSpec, ReferenceMachine,
};
use crate::seq::{BinarySequence, Bit, Word};

/// Largest `N` accepted by [`brute_force_kappa`].
pub const BRUTE_FORCE_MAX_N: usize = 16;
/// Largest `S` accepted by [`brute_force_kappa`].
pub const BRUTE_FORCE_MAX_S: usize = 5;

#[derive(Debug, Clone)]
struct CountNode {
    children: [Option<usize>; 2],
    depth: usize,
    counts: CountTriple,
    /// Pairs whose history ends exactly at this depth.
    boundary: CountTriple,
}

/// Counts of `(context, next symbol)` pairs for every context up to a depth
/// cap, over a window of times. Stored sparsely, most recent symbol first.
#[derive(Debug, Clone)]
pub struct SuffixCountTree {
    nodes: Vec<CountNode>,
    depth_cap: usize,
    window: Option<(usize, usize)>,
    pruned: bool,
}

/// How the tree search charges steps whose history is too short to reach a
/// leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Not counted (hindsight error).
    Excluded,
    /// Charged as a prediction of 0 (matches machine simulation).
    PredictZero,
}

impl SuffixCountTree {
    /// All contexts up to depth `depth_cap` over `t` in `window`
    /// (`t` pairs the history `x_1..x_t` with `x_{t+1}`; `t <= N - 1`).
    pub fn build(x: &BinarySequence, depth_cap: usize, window: RangeInclusive<usize>) -> Result<Self> {
        Self::build_inner(x, depth_cap, window, false)
    }

    /// As [`build`](Self::build) but never expands a context whose pairs
    /// are all followed by the same symbol. Such subtrees cannot lower any
    /// tree cost, so the search result is unchanged.
    pub fn build_pruned(
        x: &BinarySequence,
        depth_cap: usize,
        window: RangeInclusive<usize>,
    ) -> Result<Self> {
        Self::build_inner(x, depth_cap, window, true)
    }

    fn build_inner(
        x: &BinarySequence,
        depth_cap: usize,
        window: RangeInclusive<usize>,
        pruned: bool,
    ) -> Result<Self> {
        let (lo, hi) = (*window.start(), *window.end());
        let empty = lo > hi || x.is_empty();
        if !empty && hi >= x.len() {
            return Err(Error::Range {
                what: "window end",
                value: hi,
                min: 0,
                max: x.len().saturating_sub(1),
            });
        }
        let bits = x.bits();
        let mut nodes = vec![CountNode {
            children: [None, None],
            depth: 0,
            counts: CountTriple::default(),
            boundary: CountTriple::default(),
        }];
        if empty {
            return Ok(SuffixCountTree {
                nodes,
                depth_cap,
                window: None,
                pruned,
            });
        }
        // Depth-first, each node carrying the times that reach it.
        let mut stack: Vec<(usize, Vec<u32>)> = vec![(0, (lo as u32..=hi as u32).collect())];
        while let Some((id, times)) = stack.pop() {
            let depth = nodes[id].depth;
            let mut split: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
            for &t in &times {
                let t = t as usize;
                let next = bits[t];
                nodes[id].counts.record(next);
                if t == depth {
                    if depth < depth_cap {
                        nodes[id].boundary.record(next);
                    }
                } else if depth < depth_cap {
                    split[bits[t - depth - 1].index()].push(t as u32);
                }
            }
            if pruned && nodes[id].counts.is_pure() {
                continue;
            }
            for (b, ts) in split.into_iter().enumerate() {
                if ts.is_empty() {
                    continue;
                }
                nodes.push(CountNode {
                    children: [None, None],
                    depth: depth + 1,
                    counts: CountTriple::default(),
                    boundary: CountTriple::default(),
                });
                let child = nodes.len() - 1;
                nodes[id].children[b] = Some(child);
                stack.push((child, ts));
            }
        }
        Ok(SuffixCountTree {
            nodes,
            depth_cap,
            window: Some((lo, hi)),
            pruned,
        })
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> CountTriple {
        self.nodes[0].counts
    }

    fn find(&self, w: &Word) -> Option<usize> {
        let mut cur = 0;
        for &b in w.to_path().bits() {
            cur = self.nodes[cur].children[b.index()]?;
        }
        Some(cur)
    }

    /// Counts for context `w`. Contexts with no pairs report zeros; in a
    /// pruned tree, contexts below a pure one report `None`.
    pub fn counts(&self, w: &Word) -> Option<CountTriple> {
        if w.len() > self.depth_cap {
            return None;
        }
        match self.find(w) {
            Some(id) => Some(self.nodes[id].counts),
            None if !self.pruned => Some(CountTriple::default()),
            None => None,
        }
    }

    pub fn boundary(&self, w: &Word) -> Option<CountTriple> {
        self.find(w).map(|id| self.nodes[id].boundary)
    }

    /// Checks `parent = children + boundary` at every expanded node.
    pub fn is_consistent(&self) -> bool {
        self.nodes.iter().all(|n| {
            if n.children == [None, None] {
                return true;
            }
            let sum = n
                .children
                .iter()
                .flatten()
                .fold(n.boundary, |acc, &c| acc + self.nodes[c].counts);
            sum == n.counts
        })
    }

    pub fn window(&self) -> Option<(usize, usize)> {
        self.window
    }

    /// Drops the pair at time `t`; returns the nodes it touched, root first.
    fn remove_pair(&mut self, bits: &[Bit], t: usize) -> Vec<usize> {
        let next = bits[t];
        let mut path = vec![0];
        let mut cur = 0;
        loop {
            let node = &mut self.nodes[cur];
            match next {
                Bit::Zero => node.counts.n0 -= 1,
                Bit::One => node.counts.n1 -= 1,
            }
            let depth = node.depth;
            if depth == t {
                if depth < self.depth_cap {
                    match next {
                        Bit::Zero => node.boundary.n0 -= 1,
                        Bit::One => node.boundary.n1 -= 1,
                    }
                }
                break;
            }
            if depth == self.depth_cap {
                break;
            }
            match node.children[bits[t - depth - 1].index()] {
                Some(c) => {
                    cur = c;
                    path.push(c);
                }
                None => break,
            }
        }
        path
    }
}

/// Result of the leaf-budgeted tree search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestTree {
    pub min_errors: u64,
    /// Majority outputs, ties to 0.
    pub tree: ContextTreeSpec,
    /// `costs[b - 1]`: best cost with at most `b` leaves, `b = 1..=budget`.
    pub costs: Vec<u64>,
}

/// Minimum over complete suffix trees with at most `leaf_budget` leaves of
/// the summed per-leaf minority counts, with one minimizing tree.
pub fn best_tree_dp(ct: &SuffixCountTree, leaf_budget: usize) -> Result<BestTree> {
    best_tree_dp_with(ct, leaf_budget, Truncation::Excluded)
}

pub fn best_tree_dp_with(
    ct: &SuffixCountTree,
    leaf_budget: usize,
    truncation: Truncation,
) -> Result<BestTree> {
    if leaf_budget == 0 {
        return Err(Error::Domain("leaf budget must be >= 1".into()));
    }
    let n = ct.nodes.len();
    let mut cost: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut choice: Vec<Vec<u32>> = vec![Vec::new(); n];
    // Children are always pushed after their parent.
    for v in (0..n).rev() {
        let (c, p) = solve_node(ct, v, leaf_budget, truncation, &cost);
        cost[v] = c;
        choice[v] = p;
    }
    let root_costs = cost[0].clone();
    let budget = root_costs.len();
    let min_errors = root_costs[budget - 1];

    let mut leaves = Vec::new();
    let mut stack = vec![(Some(0usize), budget, Vec::<Bit>::new())];
    while let Some((node, b, path)) = stack.pop() {
        let Some(v) = node else {
            leaves.push((Word::new(path.into_iter().rev().collect()), Bit::Zero));
            continue;
        };
        let b = b.min(choice[v].len());
        let b0 = choice[v][b - 1] as usize;
        if b0 == 0 {
            let out = ct.nodes[v].counts.majority();
            leaves.push((Word::new(path.into_iter().rev().collect()), out));
            continue;
        }
        for (bit, give) in [(Bit::Zero, b0), (Bit::One, b - b0)] {
            let mut p = path.clone();
            p.push(bit);
            stack.push((ct.nodes[v].children[bit.index()], give, p));
        }
    }
    let tree = ContextTreeSpec::from_leaves(leaves)?;
    let mut costs = root_costs;
    costs.resize(leaf_budget, min_errors);
    Ok(BestTree {
        min_errors,
        tree,
        costs,
    })
}

/// `cost[b-1]` for node `v` with at most `b` leaves, and the choice per `b`:
/// 0 for a leaf, otherwise the leaves given to the 0-child. Ties keep fewer
/// leaves, then the smaller 0-side.
fn solve_node(
    ct: &SuffixCountTree,
    v: usize,
    leaf_budget: usize,
    truncation: Truncation,
    cost: &[Vec<u64>],
) -> (Vec<u64>, Vec<u32>) {
    let node = &ct.nodes[v];
    let leaf = node.counts.minority();
    let splittable = !node.counts.is_pure()
        && node.depth < ct.depth_cap
        && leaf_budget >= 2
        && node.children != [None, None];
    if !splittable {
        return (vec![leaf], vec![0]);
    }
    let trunc = match truncation {
        Truncation::Excluded => 0,
        Truncation::PredictZero => node.boundary.n1,
    };
    let zero = [0u64];
    let side = |c: Option<usize>| -> &[u64] {
        match c {
            Some(c) => &cost[c],
            None => &zero,
        }
    };
    let (c0, c1) = (side(node.children[0]), side(node.children[1]));
    let cap = (c0.len() + c1.len()).min(leaf_budget);
    let mut best = Vec::with_capacity(cap);
    let mut pick = Vec::with_capacity(cap);
    best.push(leaf);
    pick.push(0u32);
    for b in 2..=cap {
        let mut cur = best[b - 2];
        let mut cur_pick = pick[b - 2];
        let lo = b.saturating_sub(c1.len()).max(1);
        let hi = (b - 1).min(c0.len());
        for b0 in lo..=hi {
            let v = trunc + c0[b0 - 1] + c1[b - b0 - 1];
            if v < cur {
                cur = v;
                cur_pick = b0 as u32;
            }
        }
        best.push(cur);
        pick.push(cur_pick);
    }
    (best, pick)
}

/// Best tree for `x` over `window` with a depth cap of `budget - 1` (a
/// complete tree with `budget` leaves is never deeper).
pub fn best_tree_for(
    x: &BinarySequence,
    budget: usize,
    window: RangeInclusive<usize>,
    truncation: Truncation,
) -> Result<BestTree> {
    if budget == 0 {
        return Err(Error::Domain("leaf budget must be >= 1".into()));
    }
    let cap = (budget - 1).min(x.len().saturating_sub(1));
    let ct = SuffixCountTree::build_pruned(x, cap, window)?;
    best_tree_dp_with(&ct, budget, truncation)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaBracket {
    pub n: usize,
    pub s: usize,
    /// `max(0, best minority sum - S)`.
    pub lower_errors: u64,
    /// Errors of the best explicit machine found.
    pub upper_errors: u64,
    pub lower: f64,
    pub upper: f64,
    #[serde(serialize_with = "tree_json")]
    pub argmin_tree: ContextTreeSpec,
    /// `(t0, S^C)`: transient chain length and leaves of the tree.
    pub split: (usize, usize),
}

fn tree_json<S: serde::Serializer>(t: &ContextTreeSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    t.to_json().serialize(s)
}

impl KappaBracket {
    pub fn machine(&self, x: &BinarySequence) -> ReferenceMachine {
        ReferenceMachine::tight(
            PrefixTreeSpec::chain(x.prefix(self.split.0)),
            self.argmin_tree.clone(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bracket serializes")
    }
}

pub fn kappa_bracket(x: &BinarySequence, s: usize) -> Result<KappaBracket> {
    if s == 0 {
        return Err(Error::Domain("S must be >= 1".into()));
    }
    let n = x.len();
    if n == 0 {
        return Ok(KappaBracket {
            n,
            s,
            lower_errors: 0,
            upper_errors: 0,
            lower: 0.0,
            upper: 0.0,
            argmin_tree: ContextTreeSpec::single_leaf(Bit::Zero),
            split: (0, 1),
        });
    }
    let frac = |e: u64| e as f64 / n as f64;

    let lower_tree = best_tree_for(x, s, 1..=n - 1, Truncation::Excluded)?;
    let lower_errors = lower_tree.min_errors.saturating_sub(s as u64);

    let (upper_dp, t0) = upper_sweep(x, s)?;
    let tree = if t0 == n {
        ContextTreeSpec::single_leaf(Bit::Zero)
    } else {
        let b = best_tree_for(x, s - t0, t0..=n - 1, Truncation::PredictZero)?;
        debug_assert_eq!(b.min_errors, upper_dp);
        b.tree
    };
    let machine = ReferenceMachine::tight(PrefixTreeSpec::chain(x.prefix(t0)), tree.clone());
    let simulated = run_reference_machine(&machine, x).expected_errors as u64;
    assert_eq!(simulated, upper_dp, "tree search and simulation disagree");
    let split = (t0, tree.leaf_count());
    Ok(KappaBracket {
        n,
        s,
        lower_errors,
        upper_errors: simulated,
        lower: frac(lower_errors),
        upper: frac(simulated),
        argmin_tree: tree,
        split,
    })
}

/// Smallest error count over `t0 = 0..=min(S-1, N)` of a length-`t0` chain
/// followed by the best tree with `S - t0` leaves on the remaining pairs,
/// and the smallest `t0` attaining it. Each step drops one pair from the
/// count trie and re-solves only the nodes on its path.
fn upper_sweep(x: &BinarySequence, s: usize) -> Result<(u64, usize)> {
    let n = x.len();
    let cap = (s - 1).min(n - 1);
    let tr = Truncation::PredictZero;
    let mut ct = SuffixCountTree::build_pruned(x, cap, 0..=n - 1)?;
    let mut cost: Vec<Vec<u64>> = vec![Vec::new(); ct.nodes.len()];
    for v in (0..ct.nodes.len()).rev() {
        cost[v] = solve_node(&ct, v, s, tr, &cost).0;
    }
    let at = |cost: &[Vec<u64>], b: usize| cost[0][b.min(cost[0].len()) - 1];
    let mut best = (at(&cost, s), 0);
    for t0 in 1..=(s - 1).min(n) {
        let c = if t0 == n {
            0
        } else {
            for v in ct.remove_pair(x.bits(), t0 - 1).into_iter().rev() {
                cost[v] = solve_node(&ct, v, s, tr, &cost).0;
            }
            at(&cost, s - t0)
        };
        if c < best.0 {
            best = (c, t0);
        }
    }
    Ok(best)
}

/// Every complete binary suffix tree with exactly `leaves` leaves, as
/// leaf word sets.
pub fn enumerate_trees(leaves: usize) -> Vec<Vec<Word>> {
    fn shapes(b: usize) -> Vec<Vec<Vec<Bit>>> {
        if b == 1 {
            return vec![vec![Vec::new()]];
        }
        let mut out = Vec::new();
        for b0 in 1..b {
            for l in shapes(b0) {
                for r in shapes(b - b0) {
                    let mut paths = Vec::with_capacity(b);
                    for (bit, side) in [(Bit::Zero, &l), (Bit::One, &r)] {
                        for p in side {
                            let mut q = Vec::with_capacity(p.len() + 1);
                            q.push(bit);
                            q.extend_from_slice(p);
                            paths.push(q);
                        }
                    }
                    out.push(paths);
                }
            }
        }
        out
    }
    if leaves == 0 {
        return Vec::new();
    }
    shapes(leaves)
        .into_iter()
        .map(|paths| {
            paths
                .into_iter()
                .map(|p| Word::new(p.into_iter().rev().collect()))
                .collect()
        })
        .collect()
}

/// Best hindsight cost over all trees with at most `budget` leaves, by
/// enumeration. Independent of the count trie.
pub fn brute_force_best_tree(
    x: &BinarySequence,
    budget: usize,
    window: RangeInclusive<usize>,
    truncation: Truncation,
) -> Result<u64> {
    let mut best = u64::MAX;
    for b in 1..=budget {
        for leaves in enumerate_trees(b) {
            let tree = ContextTreeSpec::from_leaves(leaves.into_iter().map(|w| (w, Bit::Zero)))?;
            let h = hindsight_error(&tree, x, window.clone())?;
            let extra = match truncation {
                Truncation::Excluded => 0,
                Truncation::PredictZero => window
                    .clone()
                    .filter(|&t| tree.walk(x.prefix(t)).truncated && x.bits()[t] == Bit::One)
                    .count() as u64,
            };
            best = best.min(h.errors + extra);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteForceKappa {
    pub errors: u64,
    pub fraction: f64,
}

/// Exact minimum error over chain transients of length `t0 <= S - 1`
/// followed by any complete tree with at most `S - t0` leaves and any
/// output assignment, by direct simulation of every machine.
pub fn brute_force_kappa(x: &BinarySequence, s: usize) -> Result<BruteForceKappa> {
    if x.len() > BRUTE_FORCE_MAX_N || s > BRUTE_FORCE_MAX_S {
        return Err(Error::Refused(format!(
            "brute force limited to N <= {BRUTE_FORCE_MAX_N}, S <= {BRUTE_FORCE_MAX_S} (got N = {}, S = {s})",
            x.len()
        )));
    }
    if s == 0 {
        return Err(Error::Domain("S must be >= 1".into()));
    }
    let n = x.len();
    let mut best = u64::MAX;
    for t0 in 0..=(s - 1).min(n) {
        let chain = PrefixTreeSpec::chain(x.prefix(t0));
        for b in 1..=s - t0 {
            for leaves in enumerate_trees(b) {
                for mask in 0u32..1 << b {
                    let tree = ContextTreeSpec::from_leaves(
                        leaves
                            .iter()
                            .enumerate()
                            .map(|(i, w)| (w.clone(), Bit::from_bool(mask >> i & 1 == 1))),
                    )?;
                    let m = ReferenceMachine::tight(chain.clone(), tree);
                    best = best.min(count_machine_errors(&m, x) as u64);
                }
            }
        }
    }
    Ok(BruteForceKappa {
        errors: best,
        fraction: if n == 0 { 0.0 } else { best as f64 / n as f64 },
    })
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
    fn count_tree_examples() {
        let x = seq("001100110011");
        let ct = SuffixCountTree::build(&x, 2, 1..=11).unwrap();
        assert_eq!(ct.counts(&w("0")).unwrap(), CountTriple::new(3, 3));
        assert_eq!(ct.counts(&w("00")).unwrap(), CountTriple::new(0, 3));
        assert!(ct.is_consistent());

        let ct0 = SuffixCountTree::build(&x, 0, 1..=11).unwrap();
        let ones = x.bits()[1..].iter().filter(|&&b| b == Bit::One).count() as u64;
        assert_eq!(ct0.root(), CountTriple::new(11 - ones, ones));
        assert_eq!(ct0.node_count(), 1);

        #[allow(clippy::reversed_empty_ranges)]
        let empty = SuffixCountTree::build(&x, 2, 5..=4).unwrap();
        assert_eq!(empty.root(), CountTriple::default());
        assert_eq!(empty.counts(&w("01")), Some(CountTriple::default()));
    }

    #[test]
    fn dp_examples() {
        let x = seq("001100110011");
        let ct = SuffixCountTree::build(&x, 3, 1..=11).unwrap();
        let four = best_tree_dp(&ct, 4).unwrap();
        assert_eq!(four.min_errors, 0);
        assert_eq!(four.tree.leaf_count(), 4);
        assert_eq!(four.tree.max_depth(), 2);
        let ct1 = SuffixCountTree::build(&x, 1, 1..=11).unwrap();
        let two = best_tree_dp(&ct1, 2).unwrap();
        assert_eq!(two.min_errors, 5);
        // The split ties with the root leaf.
        assert_eq!(two.tree.leaf_count(), 1);
        let one = best_tree_dp(&ct1, 1).unwrap();
        assert_eq!(one.min_errors, ct1.root().minority());
        assert!(best_tree_dp(&ct1, 0).is_err());
    }

    #[test]
    fn dp_prefers_shallow_on_ties() {
        let x = seq("0000000000");
        let b = best_tree_for(&x, 4, 1..=9, Truncation::Excluded).unwrap();
        assert_eq!(b.min_errors, 0);
        assert_eq!(b.tree.leaf_count(), 1);
    }

    #[test]
    fn kappa_examples() {
        let alt = seq("0101010101");
        let k = kappa_bracket(&alt, 3).unwrap();
        assert!(k.upper <= 0.1 + 1e-12);
        assert!(k.lower <= k.upper);

        for s in ["1", "10", "0110", "1110001", "0100110111"] {
            let x = seq(s);
            let k = kappa_bracket(&x, x.len() + 1).unwrap();
            assert_eq!((k.lower_errors, k.upper_errors), (0, 0), "{s}");
        }

        let x = seq("1101001110");
        let k = kappa_bracket(&x, 1).unwrap();
        let ones = x.count_ones();
        assert_eq!(k.upper_errors as usize, ones.min(x.len() - ones));
        let tail_ones = x.bits()[1..].iter().filter(|&&b| b == Bit::One).count();
        let tail_min = tail_ones.min(x.len() - 1 - tail_ones) as u64;
        assert_eq!(k.lower_errors, tail_min.saturating_sub(1));
    }

    #[test]
    fn brute_force_examples() {
        let x = seq("0011");
        assert_eq!(
            brute_force_kappa(&x, 2).unwrap().errors,
            kappa_bracket(&x, 2).unwrap().upper_errors
        );
        assert_eq!(brute_force_kappa(&seq("1111"), 1).unwrap().errors, 0);
        assert!(matches!(brute_force_kappa(&seq("1111"), 6), Err(Error::Refused(_))));
        assert!(matches!(
            brute_force_kappa(&BinarySequence::new(vec![Bit::One; 17]), 2),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn enumeration_sizes_are_catalan() {
        let sizes: Vec<usize> = (1..=6).map(|b| enumerate_trees(b).len()).collect();
        assert_eq!(sizes, [1, 1, 2, 5, 14, 42]);
    }

    #[test]
    fn pruned_and_full_trees_agree() {
        let x = seq("0110100110010110100101101001011001101001");
        for cap in 0..6 {
            let a = SuffixCountTree::build(&x, cap, 1..=x.len() - 1).unwrap();
            let b = SuffixCountTree::build_pruned(&x, cap, 1..=x.len() - 1).unwrap();
            assert!(b.node_count() <= a.node_count());
            for l in 1..=cap + 1 {
                for tr in [Truncation::Excluded, Truncation::PredictZero] {
                    assert_eq!(
                        best_tree_dp_with(&a, l, tr).unwrap().costs,
                        best_tree_dp_with(&b, l, tr).unwrap().costs
                    );
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn bits(max: usize) -> impl Strategy<Value = BinarySequence> {
            proptest::collection::vec(any::<bool>(), 1..=max)
                .prop_map(|v| BinarySequence::new(v.into_iter().map(Bit::from_bool).collect()))
        }

        proptest! {
            #[test]
            fn dp_matches_enumeration(x in bits(14), l in 1usize..=4, lo in 0usize..3) {
                let n = x.len();
                let lo = lo.min(n - 1);
                for tr in [Truncation::Excluded, Truncation::PredictZero] {
                    let dp = best_tree_for(&x, l, lo..=n - 1, tr).unwrap();
                    prop_assert_eq!(dp.min_errors, brute_force_best_tree(&x, l, lo..=n - 1, tr).unwrap());
                    let h = hindsight_error(&dp.tree, &x, lo..=n - 1).unwrap();
                    prop_assert!(h.errors <= dp.min_errors);
                }
            }

            #[test]
            fn upper_matches_brute_force(x in bits(10), s in 1usize..=4) {
                let k = kappa_bracket(&x, s).unwrap();
                prop_assert_eq!(k.upper_errors, brute_force_kappa(&x, s).unwrap().errors);
                prop_assert!(k.lower_errors <= k.upper_errors);
                let m = k.machine(&x);
                prop_assert_eq!(count_machine_errors(&m, &x) as u64, k.upper_errors);
            }

            #[test]
            fn bracket_monotone_in_states(x in bits(40), s in 1usize..8) {
                let a = kappa_bracket(&x, s).unwrap();
                let b = kappa_bracket(&x, s + 1).unwrap();
                prop_assert!(b.upper_errors <= a.upper_errors);
                prop_assert!(b.lower_errors <= a.lower_errors);
            }

            #[test]
            fn count_tree_is_consistent(x in bits(40), cap in 0usize..6) {
                let ct = SuffixCountTree::build(&x, cap, 0..=x.len() - 1).unwrap();
                prop_assert!(ct.is_consistent());
                prop_assert_eq!(ct.root().n() as usize, x.len());
            }
        }
    }
}
