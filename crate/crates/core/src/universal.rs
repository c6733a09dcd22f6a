//! The growing-context universal predictor.
//!
//! After `x_1..x_t` the prediction context is the longest suffix of length
//! `k` such that (1) it has occurred at least `threshold1(k)` times along
//! `x_1..x_t` and (2) its length-`(k-1)` suffix has already served as the
//! prediction context at least `threshold2(k)` times. With no such `k` the
//! null context is used. The next bit is then drawn with probability
//! `phi(p_hat(counts), n)` from the counts collected at that context.
//!
//! The state keeps a trie, keyed most recent symbol first, of every context
//! used so far together with both one-bit extensions. Each tracked node
//! stores its exact occurrence count; positions whose walk currently ends
//! at a node sit in that node's bucket, so expanding a node on its first
//! use only redistributes its bucket.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::{
    predict_from_counts, CountTriple, LossMode, Prediction, RunReport, SequentialPredictor,
    StateReport,
};
use crate::seq::{BinarySequence, Bit, Word};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Depth-dependent thresholds `M(k)`, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum DepthSchedule {
    Constant(u64),
    /// `M(k) = 2^k`, saturating.
    Doubling,
    /// `M(1), M(2), ..`; the last entry repeats.
    Table(Vec<u64>),
}

impl DepthSchedule {
    pub fn at(&self, k: usize) -> u64 {
        let k = k.max(1);
        match self {
            DepthSchedule::Constant(m) => *m,
            DepthSchedule::Doubling => {
                if k >= 63 {
                    u64::MAX
                } else {
                    1u64 << k
                }
            }
            DepthSchedule::Table(v) => v[(k - 1).min(v.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DepthSchedule::Constant(0) => Err(Error::Domain("threshold must be >= 1".into())),
            DepthSchedule::Table(v) if v.is_empty() => {
                Err(Error::Domain("empty threshold table".into()))
            }
            DepthSchedule::Table(v) if v[0] == 0 || v.windows(2).any(|w| w[1] < w[0]) => Err(
                Error::Domain("threshold table must be positive and nondecreasing".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MSchedule {
    /// One threshold `M_N` for both conditions, chosen from the horizon.
    HorizonDependent { m: u64 },
    /// `M(k)` for condition 1 and `M(k-1)` for condition 2, `M(0) = M(1)`.
    HorizonIndependent { m: DepthSchedule },
}

impl MSchedule {
    pub fn constant(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("M must be >= 1".into()));
        }
        Ok(MSchedule::HorizonDependent { m })
    }

    pub fn depth(m: DepthSchedule) -> Result<Self> {
        m.validate()?;
        Ok(MSchedule::HorizonIndependent { m })
    }

    /// Thresholds for conditions 1 and 2 at suffix length `k >= 1`.
    #[inline]
    pub fn thresholds(&self, k: usize) -> (u64, u64) {
        match self {
            MSchedule::HorizonDependent { m } => (*m, *m),
            MSchedule::HorizonIndependent { m } => (m.at(k), m.at(k - 1)),
        }
    }
}

/// `max(2, round((N/S)^(2/3)))`.
#[allow(non_snake_case)]
pub fn optimal_M(n: usize, s: usize) -> Result<u64> {
    if n == 0 || s == 0 || s > n {
        return Err(Error::Domain(format!("need 1 <= S <= N, got N = {n}, S = {s}")));
    }
    let m = (n as f64 / s as f64).powf(2.0 / 3.0).round() as u64;
    Ok(m.max(2))
}

const ROOT: usize = 0;

#[derive(Debug, Clone)]
struct Node {
    children: Option<[usize; 2]>,
    depth: usize,
    occurrences: u64,
    /// Times used as prediction context, with the symbols that followed.
    counts: CountTriple,
    /// Positions whose walk ends at this node.
    bucket: Vec<u32>,
}

impl Node {
    fn new(depth: usize) -> Self {
        Node {
            children: None,
            depth,
            occurrences: 0,
            counts: CountTriple::default(),
            bucket: Vec::new(),
        }
    }

    #[inline]
    fn usage(&self) -> u64 {
        self.counts.n()
    }
}

/// The selected prediction context at the current time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub k0: usize,
    node: usize,
    /// Occurrence count of the context when selected.
    pub occurrences: u64,
    /// Usage of its length-`(k0-1)` suffix when selected (0 for null).
    pub parent_usage: u64,
}

#[derive(Debug, Clone)]
pub struct GrowingContextState {
    schedule: MSchedule,
    history: Vec<Bit>,
    nodes: Vec<Node>,
    pending: Option<Selection>,
}

impl GrowingContextState {
    pub fn new(schedule: MSchedule) -> Self {
        GrowingContextState {
            schedule,
            history: Vec::new(),
            nodes: vec![Node::new(0)],
            pending: None,
        }
    }

    pub fn schedule(&self) -> &MSchedule {
        &self.schedule
    }

    /// Current time `t`: number of symbols consumed.
    pub fn time(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[Bit] {
        &self.history
    }

    /// Longest suffix passing both conditions at the current time.
    pub fn select_context(&self) -> Selection {
        let t = self.history.len();
        let mut best = Selection {
            k0: 0,
            node: ROOT,
            occurrences: t as u64,
            parent_usage: 0,
        };
        let mut cur = ROOT;
        for k in 1..=t {
            let parent = &self.nodes[cur];
            let Some(children) = parent.children else {
                break;
            };
            let child = children[self.history[t - k].index()];
            let (need_occ, need_use) = self.schedule.thresholds(k);
            let occ = self.nodes[child].occurrences;
            if occ < need_occ {
                break;
            }
            if parent.usage() >= need_use {
                best = Selection {
                    k0: k,
                    node: child,
                    occurrences: occ,
                    parent_usage: parent.usage(),
                };
            }
            cur = child;
        }
        best
    }

    pub fn context_word(&self, sel: &Selection) -> Word {
        let t = self.history.len();
        Word::from(&self.history[t - sel.k0..])
    }

    fn counts_of(&self, sel: &Selection) -> CountTriple {
        self.nodes[sel.node].counts
    }

    fn pending_or_select(&mut self) -> Selection {
        match self.pending {
            Some(s) => s,
            None => {
                let s = self.select_context();
                self.pending = Some(s);
                s
            }
        }
    }

    /// Probability of a 1 at the next step, from the selected context.
    pub fn emit(&mut self) -> (f64, Selection) {
        let sel = self.pending_or_select();
        (predict_from_counts(&self.counts_of(&sel)), sel)
    }

    /// Records `x_{t+1} = bit`.
    pub fn accept_bit(&mut self, bit: Bit) -> Result<()> {
        let sel = self
            .pending
            .take()
            .ok_or(Error::Protocol("accept without a pending prediction"))?;
        let node = &mut self.nodes[sel.node];
        node.counts.record(bit);
        if node.usage() == 1 {
            self.expand(sel.node);
        }
        self.history.push(bit);
        self.record_position();
        Ok(())
    }

    /// Predicts and accepts each symbol of `bits` in turn.
    pub fn consume(&mut self, bits: &[Bit]) -> Result<()> {
        for &b in bits {
            self.emit();
            self.accept_bit(b)?;
        }
        Ok(())
    }

    fn expand(&mut self, id: usize) {
        if self.nodes[id].children.is_some() {
            return;
        }
        let depth = self.nodes[id].depth;
        let first = self.nodes.len();
        self.nodes.push(Node::new(depth + 1));
        self.nodes.push(Node::new(depth + 1));
        self.nodes[id].children = Some([first, first + 1]);
        let bucket = std::mem::take(&mut self.nodes[id].bucket);
        let mut stay = Vec::new();
        for pos in bucket {
            let i = pos as usize;
            if i > depth {
                let child = first + self.history[i - depth - 1].index();
                self.nodes[child].occurrences += 1;
                self.nodes[child].bucket.push(pos);
            } else {
                stay.push(pos);
            }
        }
        self.nodes[id].bucket = stay;
    }

    fn record_position(&mut self) {
        let t = self.history.len();
        let mut cur = ROOT;
        self.nodes[ROOT].occurrences += 1;
        for k in 1..=t {
            let Some(children) = self.nodes[cur].children else {
                break;
            };
            cur = children[self.history[t - k].index()];
            self.nodes[cur].occurrences += 1;
        }
        self.nodes[cur].bucket.push(t as u32);
    }

    fn find(&self, w: &Word) -> Option<usize> {
        let mut cur = ROOT;
        for &b in w.to_path().bits() {
            cur = self.nodes[cur].children?[b.index()];
        }
        Some(cur)
    }

    /// Tracked occurrence count of `w`, if `w` is tracked.
    pub fn occurrences(&self, w: &Word) -> Option<u64> {
        self.find(w).map(|id| self.nodes[id].occurrences)
    }

    /// Times `w` has been used as prediction context.
    pub fn usage(&self, w: &Word) -> u64 {
        self.find(w).map_or(0, |id| self.nodes[id].usage())
    }

    pub fn context_counts(&self, w: &Word) -> CountTriple {
        self.find(w).map_or_else(CountTriple::default, |id| self.nodes[id].counts)
    }

    /// All tracked words with (occurrences, usage).
    pub fn tracked(&self) -> Vec<(Word, u64, u64)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        self.collect(ROOT, &mut Vec::new(), &mut out);
        out
    }

    fn collect(&self, id: usize, path: &mut Vec<Bit>, out: &mut Vec<(Word, u64, u64)>) {
        let n = &self.nodes[id];
        out.push((
            Word::new(path.iter().rev().copied().collect()),
            n.occurrences,
            n.usage(),
        ));
        if let Some(ch) = n.children {
            for (b, &c) in [Bit::Zero, Bit::One].iter().zip(ch.iter()) {
                path.push(*b);
                self.collect(c, path, out);
                path.pop();
            }
        }
    }

    /// Forward-order word of every node, indexed by node id.
    fn node_words(&self) -> Vec<Word> {
        let mut words = vec![Word::empty(); self.nodes.len()];
        let mut stack = vec![(ROOT, Word::empty())];
        while let Some((id, w)) = stack.pop() {
            if let Some(ch) = self.nodes[id].children {
                stack.push((ch[0], w.extend_older(Bit::Zero)));
                stack.push((ch[1], w.extend_older(Bit::One)));
            }
            words[id] = w;
        }
        words
    }

    pub fn tree_stats(&self) -> TreeStats {
        let used = |id: usize| self.nodes[id].usage() > 0;
        let mut stats = TreeStats::default();
        for (id, n) in self.nodes.iter().enumerate() {
            if !used(id) {
                continue;
            }
            stats.total_contexts += 1;
            stats.max_depth = stats.max_depth.max(n.depth);
            let internal = n.children.is_some_and(|ch| ch.iter().any(|&c| used(c)));
            if internal {
                stats.internal_nodes += 1;
                if n.usage() > stats.max_internal_usage || stats.busiest_internal.is_none() {
                    stats.max_internal_usage = n.usage();
                    stats.busiest_internal = Some(id);
                }
            }
        }
        if let Some(id) = stats.busiest_internal {
            stats.busiest_internal_context = Some(self.node_words().swap_remove(id));
        }
        stats
    }
}

impl SequentialPredictor for GrowingContextState {
    fn predict(&mut self) -> Prediction {
        let (q, sel) = self.emit();
        Prediction {
            q,
            state: self.context_word(&sel),
        }
    }

    fn accept(&mut self, bit: Bit) -> Result<()> {
        self.accept_bit(bit)
    }
}

/// Shape of the set of contexts the predictor used.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TreeStats {
    pub total_contexts: usize,
    /// Used contexts that are proper suffixes of other used contexts.
    pub internal_nodes: usize,
    pub max_internal_usage: u64,
    pub max_depth: usize,
    #[serde(skip)]
    busiest_internal: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub busiest_internal_context: Option<Word>,
}

/// One step of a traced run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    /// Time the context was selected (symbols consumed so far).
    pub t: usize,
    pub k0: usize,
    pub context: Word,
    pub q: f64,
    pub next: Bit,
    pub loss: f64,
    #[serde(skip)]
    pub occurrences: u64,
    #[serde(skip)]
    pub parent_usage: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalRun {
    pub report: RunReport,
    pub tree: TreeStats,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

pub fn run_universal(x: &BinarySequence, schedule: &MSchedule, mode: LossMode) -> UniversalRun {
    run_universal_inner(x, schedule, mode, false)
}

pub fn run_universal_traced(x: &BinarySequence, schedule: &MSchedule, mode: LossMode) -> UniversalRun {
    run_universal_inner(x, schedule, mode, true)
}

fn run_universal_inner(
    x: &BinarySequence,
    schedule: &MSchedule,
    mode: LossMode,
    traced: bool,
) -> UniversalRun {
    let mut state = GrowingContextState::new(schedule.clone());
    let mut report = RunReport::empty(x.len());
    let mut node_loss: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut rng = match mode {
        LossMode::Expected => None,
        LossMode::Sampled { seed } => {
            report.sampled_errors = Some(0);
            Some(ChaCha8Rng::seed_from_u64(seed))
        }
    };
    for (t, &actual) in x.bits().iter().enumerate() {
        let (q, sel) = state.emit();
        let loss = match actual {
            Bit::One => 1.0 - q,
            Bit::Zero => q,
        };
        if let (Some(rng), Some(errs)) = (rng.as_mut(), report.sampled_errors.as_mut()) {
            let guess = Bit::from_bool(rng.random::<f64>() < q);
            *errs += u64::from(guess != actual);
        }
        if node_loss.len() <= sel.node {
            node_loss.resize(sel.node + 1, 0.0);
        }
        node_loss[sel.node] += loss;
        report.expected_errors += loss;
        report.step_losses.push(loss);
        if traced {
            trace.push(TraceRecord {
                t,
                k0: sel.k0,
                context: state.context_word(&sel),
                q,
                next: actual,
                loss,
                occurrences: sel.occurrences,
                parent_usage: sel.parent_usage,
            });
        }
        state
            .accept_bit(actual)
            .expect("emit always precedes accept");
    }
    let words = state.node_words();
    for (id, &loss) in node_loss.iter().enumerate() {
        let counts = state.nodes[id].counts;
        if counts.n() > 0 {
            report.per_state.insert(
                words[id].clone(),
                StateReport {
                    counts,
                    expected_errors: loss,
                },
            );
        }
    }
    UniversalRun {
        report,
        tree: state.tree_stats(),
        trace,
    }
}

/// Selection after consuming `x_1..x_t` from a fresh state.
pub fn select_context(x: &BinarySequence, t: usize, schedule: &MSchedule) -> Result<(usize, Word)> {
    if t > x.len() {
        return Err(Error::Range {
            what: "position",
            value: t,
            min: 0,
            max: x.len(),
        });
    }
    let mut state = GrowingContextState::new(schedule.clone());
    state.consume(x.prefix(t))?;
    let sel = state.select_context();
    Ok((sel.k0, state.context_word(&sel)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::phi;
    use crate::seq::count_ending_occurrences;
    use proptest::prelude::*;

    fn seq(s: &str) -> BinarySequence {
        BinarySequence::parse(s).unwrap()
    }

    fn hd(m: u64) -> MSchedule {
        MSchedule::constant(m).unwrap()
    }

    #[test]
    fn selection_examples() {
        assert_eq!(select_context(&seq("111"), 3, &hd(2)).unwrap(), (1, Word::parse("1").unwrap()));
        assert_eq!(select_context(&seq("1"), 1, &hd(2)).unwrap(), (0, Word::empty()));
        assert_eq!(
            select_context(&seq("11111"), 5, &hd(2)).unwrap(),
            (2, Word::parse("11").unwrap())
        );
    }

    #[test]
    fn all_ones_context_sequence() {
        let run = run_universal_traced(&seq("111111"), &hd(2), LossMode::Expected);
        let ctx: Vec<String> = run.trace.iter().map(|r| r.context.to_string()).collect();
        assert_eq!(ctx, ["ε", "ε", "1", "1", "11", "11"]);
    }

    #[test]
    fn step_examples() {
        let mut s = GrowingContextState::new(hd(2));
        let (q, sel) = s.emit();
        assert_eq!(q, 0.5);
        assert_eq!(sel.k0, 0);
        s.accept_bit(Bit::One).unwrap();
        // Null context now holds one use followed by a 1.
        let (q, sel) = s.emit();
        assert_eq!(sel.k0, 0);
        assert!((q - phi(0.75, 1).unwrap()).abs() < 1e-12);
        assert!((q - 0.9330127).abs() < 1e-6);
        s.accept_bit(Bit::One).unwrap();
        assert_eq!(s.context_counts(&Word::empty()), CountTriple::new(0, 2));
        assert!(matches!(s.accept_bit(Bit::One), Err(Error::Protocol(_))));
    }

    #[test]
    fn optimal_m_examples() {
        assert_eq!(optimal_M(1024, 16).unwrap(), 16);
        assert_eq!(optimal_M(1000, 1).unwrap(), 100);
        assert_eq!(optimal_M(50, 50).unwrap(), 2);
        assert!(optimal_M(10, 11).is_err());
        assert!(optimal_M(10, 0).is_err());
    }

    #[test]
    fn schedules() {
        let s = MSchedule::depth(DepthSchedule::Doubling).unwrap();
        assert_eq!(s.thresholds(1), (2, 2));
        assert_eq!(s.thresholds(3), (8, 4));
        assert!(MSchedule::depth(DepthSchedule::Table(vec![3, 2])).is_err());
        assert!(MSchedule::depth(DepthSchedule::Constant(0)).is_err());
        assert!(MSchedule::constant(0).is_err());
        let t = DepthSchedule::Table(vec![1, 4]);
        assert_eq!((t.at(1), t.at(2), t.at(9)), (1, 4, 4));
    }

    #[test]
    fn alternation_is_learned() {
        let x = BinarySequence::new((0..1 << 14).map(|i| Bit::from_bool(i % 2 == 0)).collect());
        let m = optimal_M(x.len(), 128).unwrap();
        let run = run_universal(&x, &hd(m), LossMode::Expected);
        assert!(run.report.error_rate() < 0.05, "{}", run.report.error_rate());
    }

    fn bits_strategy(max: usize) -> impl Strategy<Value = Vec<Bit>> {
        prop::collection::vec(
            prop_oneof![3 => Just(Bit::One), 1 => Just(Bit::Zero)],
            0..max,
        )
    }

    proptest! {
        #[test]
        fn tracked_counts_match_naive(bits in bits_strategy(120), m in 1u64..5) {
            let mut s = GrowingContextState::new(hd(m));
            for &b in &bits {
                s.emit();
                s.accept_bit(b).unwrap();
                for (w, occ, usage) in s.tracked() {
                    prop_assert_eq!(occ as usize, count_ending_occurrences(s.history(), w.bits()));
                    prop_assert!(usage <= occ);
                }
            }
        }

        #[test]
        fn selections_obey_both_conditions(bits in bits_strategy(200), m in 1u64..6, doubling in any::<bool>()) {
            let schedule = if doubling { MSchedule::depth(DepthSchedule::Doubling).unwrap() } else { hd(m) };
            let x = BinarySequence::new(bits);
            let run = run_universal_traced(&x, &schedule, LossMode::Expected);
            for r in &run.trace {
                if r.k0 > 0 {
                    let (a, b) = schedule.thresholds(r.k0);
                    prop_assert!(r.occurrences >= a);
                    prop_assert!(r.parent_usage >= b);
                }
                // Maximality: k0 + 1 fails at least one condition.
                let hist = x.prefix(r.t);
                if r.k0 < r.t {
                    let longer = &hist[r.t - r.k0 - 1..];
                    let occ = count_ending_occurrences(hist, longer) as u64;
                    let (a, b) = schedule.thresholds(r.k0 + 1);
                    let mut replay = GrowingContextState::new(schedule.clone());
                    replay.consume(hist).unwrap();
                    let parent_use = replay.usage(&r.context);
                    prop_assert!(occ < a || parent_use < b);
                }
            }
            let total: f64 = run.report.per_state.values().map(|s| s.expected_errors).sum();
            prop_assert!((total - run.report.expected_errors).abs() < 1e-9);
        }
    }
}
