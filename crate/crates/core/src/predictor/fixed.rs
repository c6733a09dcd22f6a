use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::predictor::phi::{predict_from_counts, CountTriple};
use crate::predictor::tree::ContextTreeSpec;
use crate::predictor::{run_predictor, LossMode, Prediction, RunReport, SequentialPredictor};
use crate::seq::{BinarySequence, Bit, Word};

/// Maps the observed history `x_1..x_t` to a state.
pub trait StateResolver {
    fn resolve(&self, history: &[Bit]) -> Word;
}

/// Always the null state (order-0).
#[derive(Debug, Clone, Copy, Default)]
pub struct NullResolver;

impl StateResolver for NullResolver {
    fn resolve(&self, _history: &[Bit]) -> Word {
        Word::empty()
    }
}

/// The last `order` symbols, fewer at the start of the sequence.
#[derive(Debug, Clone, Copy)]
pub struct MarkovResolver {
    pub order: usize,
}

impl StateResolver for MarkovResolver {
    fn resolve(&self, history: &[Bit]) -> Word {
        let k = self.order.min(history.len());
        Word::from(&history[history.len() - k..])
    }
}

/// Contexts of a fixed suffix tree; truncated walks become their own states.
#[derive(Debug, Clone)]
pub struct TreeResolver(pub ContextTreeSpec);

impl StateResolver for TreeResolver {
    fn resolve(&self, history: &[Bit]) -> Word {
        self.0.resolve(history).state
    }
}

/// The randomized count-based predictor run on a fixed state assignment.
#[derive(Debug, Clone)]
pub struct PhiPredictor<R> {
    resolver: R,
    history: Vec<Bit>,
    counts: HashMap<Word, CountTriple>,
    pending: Option<Word>,
}

impl<R: StateResolver> PhiPredictor<R> {
    pub fn new(resolver: R) -> Self {
        PhiPredictor {
            resolver,
            history: Vec::new(),
            counts: HashMap::new(),
            pending: None,
        }
    }

    pub fn counts(&self, state: &Word) -> CountTriple {
        self.counts.get(state).copied().unwrap_or_default()
    }
}

impl<R: StateResolver> SequentialPredictor for PhiPredictor<R> {
    fn predict(&mut self) -> Prediction {
        let state = match &self.pending {
            Some(s) => s.clone(),
            None => {
                let s = self.resolver.resolve(&self.history);
                self.pending = Some(s.clone());
                s
            }
        };
        let q = predict_from_counts(&self.counts(&state));
        Prediction { q, state }
    }

    fn accept(&mut self, bit: Bit) -> Result<()> {
        let state = self
            .pending
            .take()
            .ok_or(Error::Protocol("accept without a pending prediction"))?;
        self.counts.entry(state).or_default().record(bit);
        self.history.push(bit);
        Ok(())
    }
}

/// Deterministic constant guess.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPredictor {
    pub output: Bit,
    pending: bool,
}

impl ConstantPredictor {
    pub fn new(output: Bit) -> Self {
        ConstantPredictor {
            output,
            pending: false,
        }
    }
}

impl SequentialPredictor for ConstantPredictor {
    fn predict(&mut self) -> Prediction {
        self.pending = true;
        Prediction {
            q: f64::from(u8::from(self.output)),
            state: Word::empty(),
        }
    }

    fn accept(&mut self, _bit: Bit) -> Result<()> {
        if !std::mem::take(&mut self.pending) {
            return Err(Error::Protocol("accept without a pending prediction"));
        }
        Ok(())
    }
}

pub fn phi_predictor_over_fixed_states<R: StateResolver>(
    resolver: R,
    x: &BinarySequence,
    mode: LossMode,
) -> RunReport {
    run_predictor(&mut PhiPredictor::new(resolver), x, mode)
        .expect("run loop keeps the predict/accept protocol")
}
