//! Sequential prediction: the randomized output function, the count-based
//! estimator, reference machines and the generic run loop.

mod fixed;
mod machine;
mod phi;
mod tree;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use fixed::{
    phi_predictor_over_fixed_states, ConstantPredictor, MarkovResolver, NullResolver, PhiPredictor,
    StateResolver, TreeResolver,
};
pub use machine::{
    count_machine_errors, hindsight_error, run_reference_machine, Hindsight, MachineCursor,
    MachineState, PrefixTreeSpec, ReferenceMachine,
};
pub use phi::{dead_zone, p_hat, phi, predict_from_counts, CountTriple};
pub use tree::{resolve_context, ContextTreeSpec, Resolved, Walk};

use crate::error::Result;
use crate::seq::{BinarySequence, Bit, Word};

/// One emitted prediction: `q = Pr{next bit = 1}` and the state it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub q: f64,
    pub state: Word,
}

/// Online predictor. `predict` sees only the symbols accepted so far;
/// `accept` then reveals the next one.
pub trait SequentialPredictor {
    fn predict(&mut self) -> Prediction;

    fn accept(&mut self, bit: Bit) -> Result<()>;
}

impl<P: SequentialPredictor + ?Sized> SequentialPredictor for Box<P> {
    fn predict(&mut self) -> Prediction {
        (**self).predict()
    }

    fn accept(&mut self, bit: Bit) -> Result<()> {
        (**self).accept(bit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum LossMode {
    /// Accumulate `Pr{prediction != x_t}` exactly.
    Expected,
    /// Also draw each prediction from one seeded stream.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StateReport {
    pub counts: CountTriple,
    pub expected_errors: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub steps: usize,
    pub expected_errors: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_errors: Option<u64>,
    pub per_state: BTreeMap<Word, StateReport>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub transient_states: BTreeMap<Word, StateReport>,
    /// Expected loss of each step, `t = 1..N`.
    #[serde(skip)]
    pub step_losses: Vec<f64>,
}

impl RunReport {
    pub(crate) fn empty(steps: usize) -> Self {
        RunReport {
            steps,
            expected_errors: 0.0,
            sampled_errors: None,
            per_state: BTreeMap::new(),
            transient_states: BTreeMap::new(),
            step_losses: Vec::with_capacity(steps),
        }
    }

    pub fn error_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.expected_errors / self.steps as f64
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Feeds `x` through `p` step by step.
pub fn run_predictor<P: SequentialPredictor + ?Sized>(
    p: &mut P,
    x: &BinarySequence,
    mode: LossMode,
) -> Result<RunReport> {
    run_predictor_with(p, x, mode, |_, _, _| {})
}

/// As [`run_predictor`], calling `observe(t, prediction, x_t)` after each step.
pub fn run_predictor_with<P, F>(
    p: &mut P,
    x: &BinarySequence,
    mode: LossMode,
    mut observe: F,
) -> Result<RunReport>
where
    P: SequentialPredictor + ?Sized,
    F: FnMut(usize, &Prediction, Bit),
{
    let mut report = RunReport::empty(x.len());
    let mut rng = match mode {
        LossMode::Expected => None,
        LossMode::Sampled { seed } => {
            report.sampled_errors = Some(0);
            Some(ChaCha8Rng::seed_from_u64(seed))
        }
    };
    for (i, &actual) in x.bits().iter().enumerate() {
        let pred = p.predict();
        let loss = match actual {
            Bit::One => 1.0 - pred.q,
            Bit::Zero => pred.q,
        };
        if let (Some(rng), Some(errs)) = (rng.as_mut(), report.sampled_errors.as_mut()) {
            let guess = Bit::from_bool(rng.random::<f64>() < pred.q);
            *errs += u64::from(guess != actual);
        }
        report.expected_errors += loss;
        report.step_losses.push(loss);
        observe(i + 1, &pred, actual);
        let entry = report.per_state.entry(pred.state.clone()).or_default();
        entry.counts.record(actual);
        entry.expected_errors += loss;
        p.accept(actual)?;
    }
    Ok(report)
}
