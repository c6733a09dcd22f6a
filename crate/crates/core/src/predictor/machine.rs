use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::predictor::phi::CountTriple;
use crate::predictor::tree::ContextTreeSpec;
use crate::predictor::{RunReport, StateReport};
use crate::seq::{BinarySequence, Bit, Word};

/// Transient states: the root and internal nodes of a prefix tree, keyed by
/// forward-order word, each with an output bit. An empty node set means the
/// machine starts directly in context mode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixTreeSpec {
    nodes: BTreeMap<Word, Bit>,
}

impl PrefixTreeSpec {
    pub fn empty() -> Self {
        PrefixTreeSpec::default()
    }

    pub fn new(nodes: BTreeMap<Word, Bit>) -> Result<Self> {
        for w in nodes.keys() {
            if !w.is_empty() && !nodes.contains_key(&Word::from(&w.bits()[..w.len() - 1])) {
                return Err(Error::InvalidTree(format!(
                    "prefix tree node {w} has no parent"
                )));
            }
        }
        Ok(PrefixTreeSpec { nodes })
    }

    /// The chain whose internal nodes are the proper prefixes of `target`,
    /// each predicting the next symbol of `target`. `|target|` states.
    pub fn chain(target: &[Bit]) -> Self {
        let nodes = (0..target.len())
            .map(|i| (Word::from(&target[..i]), target[i]))
            .collect();
        PrefixTreeSpec { nodes }
    }

    /// Number of transient states.
    pub fn state_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn output(&self, node: &Word) -> Option<Bit> {
        self.nodes.get(node).copied()
    }

    pub fn nodes(&self) -> &BTreeMap<Word, Bit> {
        &self.nodes
    }
}

/// A transient prefix tree followed by a context tree, within a state budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceMachine {
    transient: PrefixTreeSpec,
    context_tree: ContextTreeSpec,
    budget: usize,
}

impl ReferenceMachine {
    pub fn new(transient: PrefixTreeSpec, context_tree: ContextTreeSpec, budget: usize) -> Result<Self> {
        let used = transient.state_count() + context_tree.leaf_count();
        if used > budget {
            return Err(Error::Domain(format!(
                "machine uses {used} states, budget is {budget}"
            )));
        }
        Ok(ReferenceMachine {
            transient,
            context_tree,
            budget,
        })
    }

    /// Machine with budget equal to the states it uses.
    pub fn tight(transient: PrefixTreeSpec, context_tree: ContextTreeSpec) -> Self {
        let budget = transient.state_count() + context_tree.leaf_count();
        ReferenceMachine {
            transient,
            context_tree,
            budget,
        }
    }

    pub fn pure(context_tree: ContextTreeSpec) -> Self {
        Self::tight(PrefixTreeSpec::empty(), context_tree)
    }

    pub fn transient(&self) -> &PrefixTreeSpec {
        &self.transient
    }

    pub fn context_tree(&self) -> &ContextTreeSpec {
        &self.context_tree
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn start(&self) -> MachineCursor<'_> {
        MachineCursor {
            machine: self,
            transient: if self.transient.state_count() > 0 {
                Some(Word::empty())
            } else {
                None
            },
        }
    }
}

/// Which state the machine predicts from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineState {
    Transient(Word),
    Context { state: Word, truncated: bool },
}

/// Step-by-step execution of a [`ReferenceMachine`].
#[derive(Debug, Clone)]
pub struct MachineCursor<'m> {
    machine: &'m ReferenceMachine,
    transient: Option<Word>,
}

impl MachineCursor<'_> {
    /// Prediction for `x_{t+1}` given `history = x_1..x_t`. Truncated
    /// context states predict 0.
    pub fn predict(&self, history: &[Bit]) -> (Bit, MachineState) {
        match &self.transient {
            Some(node) => {
                let out = self.machine.transient.output(node).expect("cursor on a transient node");
                (out, MachineState::Transient(node.clone()))
            }
            None => {
                let tree = &self.machine.context_tree;
                let walk = tree.walk(history);
                let out = tree.leaf_at(&walk).map_or(Bit::Zero, |(_, b)| b);
                let state = Word::from(&history[history.len() - walk.depth..]);
                (
                    out,
                    MachineState::Context {
                        state,
                        truncated: walk.truncated,
                    },
                )
            }
        }
    }

    /// Moves past the observed symbol `bit`.
    pub fn advance(&mut self, bit: Bit) {
        if let Some(node) = self.transient.take() {
            let child = node.extend_newer(bit);
            if self.machine.transient.output(&child).is_some() {
                self.transient = Some(child);
            }
        }
    }

    pub fn in_transient_mode(&self) -> bool {
        self.transient.is_some()
    }
}

/// Deterministic simulation of `m` on `x`, counting 0/1 mismatches.
/// Transient states appear under `transient_states`, context-mode states
/// (truncated ones included) under `per_state`.
pub fn run_reference_machine(m: &ReferenceMachine, x: &BinarySequence) -> RunReport {
    let mut report = RunReport::empty(x.len());
    let mut cursor = m.start();
    for t in 0..x.len() {
        let (guess, state) = cursor.predict(x.prefix(t));
        let actual = x.bits()[t];
        let loss = if guess == actual { 0.0 } else { 1.0 };
        let (table, key) = match state {
            MachineState::Transient(w) => (&mut report.transient_states, w),
            MachineState::Context { state, .. } => (&mut report.per_state, state),
        };
        let entry = table.entry(key).or_insert_with(StateReport::default);
        entry.counts.record(actual);
        entry.expected_errors += loss;
        report.expected_errors += loss;
        report.step_losses.push(loss);
        cursor.advance(actual);
    }
    report
}

/// Error count of `m` on `x` without building a report.
pub fn count_machine_errors(m: &ReferenceMachine, x: &BinarySequence) -> usize {
    let mut cursor = m.start();
    let mut errors = 0;
    for t in 0..x.len() {
        let (guess, _) = cursor.predict(x.prefix(t));
        let actual = x.bits()[t];
        errors += usize::from(guess != actual);
        cursor.advance(actual);
    }
    errors
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hindsight {
    /// Sum over leaves of `min(n0, n1)`.
    pub errors: u64,
    pub leaves: BTreeMap<Word, CountTriple>,
    /// Window steps skipped because the context was truncated.
    pub truncated_steps: usize,
}

/// Best achievable error count of a fixed context assignment: tallies the
/// pairs `(s_t, x_{t+1})` for `t` in `window` and sums the per-leaf minority
/// counts. Truncated steps are left out. `t = 0` pairs the empty history
/// with `x_1`.
pub fn hindsight_error(
    tree: &ContextTreeSpec,
    x: &BinarySequence,
    window: RangeInclusive<usize>,
) -> Result<Hindsight> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo <= hi && hi + 1 > x.len() {
        return Err(Error::Range {
            what: "window end",
            value: hi,
            min: 0,
            max: x.len().saturating_sub(1),
        });
    }
    let mut counts = vec![CountTriple::default(); tree.leaf_count()];
    let mut truncated_steps = 0;
    for t in window {
        let walk = tree.walk(x.prefix(t));
        match tree.leaf_at(&walk) {
            Some((id, _)) => counts[id].record(x.bits()[t]),
            None => truncated_steps += 1,
        }
    }
    let errors = counts.iter().map(CountTriple::minority).sum();
    let leaves = tree
        .leaf_words()
        .iter()
        .cloned()
        .zip(counts)
        .collect();
    Ok(Hindsight {
        errors,
        leaves,
        truncated_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> BinarySequence {
        BinarySequence::parse(s).unwrap()
    }

    #[test]
    fn chain_then_constant_is_error_free() {
        let m = ReferenceMachine::tight(
            PrefixTreeSpec::chain(seq("10").bits()),
            ContextTreeSpec::single_leaf(Bit::One),
        );
        let r = run_reference_machine(&m, &seq("101111"));
        assert_eq!(r.expected_errors, 0.0);
        assert_eq!(r.transient_states.len(), 2);
    }

    #[test]
    fn depth_one_alternation_misses_only_the_boundary() {
        let tree = ContextTreeSpec::full(1, |w| w.bits()[0].flip()).unwrap();
        let m = ReferenceMachine::pure(tree);
        let x = seq("010101");
        let r = run_reference_machine(&m, &x);
        assert!(r.expected_errors <= 1.0);
        // x_1 = 0 agrees with the truncated-state default.
        assert_eq!(r.expected_errors, 0.0);
        let r = run_reference_machine(&m, &seq("101010"));
        assert_eq!(r.expected_errors, 1.0);
    }

    #[test]
    fn constant_zero_on_ones() {
        let m = ReferenceMachine::pure(ContextTreeSpec::single_leaf(Bit::Zero));
        let r = run_reference_machine(&m, &seq("1111"));
        assert_eq!(r.expected_errors, 4.0);
        assert_eq!(count_machine_errors(&m, &seq("1111")), 4);
    }

    #[test]
    fn budget_enforced() {
        let tree = ContextTreeSpec::full(1, |_| Bit::Zero).unwrap();
        assert!(ReferenceMachine::new(PrefixTreeSpec::chain(seq("11").bits()), tree.clone(), 3).is_err());
        assert!(ReferenceMachine::new(PrefixTreeSpec::chain(seq("11").bits()), tree, 4).is_ok());
    }

    #[test]
    fn prefix_tree_must_be_prefix_closed() {
        let mut nodes = BTreeMap::new();
        nodes.insert(Word::parse("01").unwrap(), Bit::Zero);
        assert!(PrefixTreeSpec::new(nodes.clone()).is_err());
        nodes.insert(Word::parse("0").unwrap(), Bit::Zero);
        nodes.insert(Word::empty(), Bit::Zero);
        assert_eq!(PrefixTreeSpec::new(nodes).unwrap().state_count(), 3);
    }

    #[test]
    fn hindsight_examples() {
        let d1 = ContextTreeSpec::full(1, |_| Bit::Zero).unwrap();
        let d2 = ContextTreeSpec::full(2, |_| Bit::Zero).unwrap();
        let alt = seq("0101010101");
        let h = hindsight_error(&d1, &alt, 1..=9).unwrap();
        assert_eq!(h.errors, 0);
        assert_eq!(h.leaves[&Word::parse("0").unwrap()], CountTriple::new(0, 5));
        assert_eq!(h.leaves[&Word::parse("1").unwrap()], CountTriple::new(4, 0));

        let x = seq("001100110011");
        assert_eq!(hindsight_error(&d1, &x, 1..=11).unwrap().errors, 5);
        assert_eq!(hindsight_error(&d2, &x, 2..=11).unwrap().errors, 0);
        assert!(hindsight_error(&d1, &x, 1..=12).is_err());
    }
}
