//! Self-generating chain machines and the uniform prefix ensemble that
//! defeats every sequential predictor on half of the prefix positions.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::oracle::kappa_bracket;
use crate::predictor::{
    run_predictor, ContextTreeSpec, LossMode, PrefixTreeSpec, ReferenceMachine, SequentialPredictor,
};
use crate::seq::{BinarySequence, Bit, Word};

/// Ensemble members are checked with the oracle up to this length.
pub const KAPPA_CHECK_MAX_N: usize = 256;
/// Longest prefix enumerated by [`exhaustive_ensemble`].
pub const EXHAUSTIVE_MAX_PREFIX: usize = 20;

/// Tail bit shared by every ensemble member.
pub const ENSEMBLE_TAIL: Bit = Bit::One;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainMachineSpec {
    pub prefix: Word,
    pub tail_bit: Bit,
}

impl ChainMachineSpec {
    pub fn machine(&self) -> ReferenceMachine {
        chain_machine(&self.prefix, self.tail_bit)
    }
}

/// Transient chain reproducing `prefix`, then a single leaf emitting
/// `tail_bit`. Uses `|prefix| + 1` states.
pub fn chain_machine(prefix: &Word, tail_bit: Bit) -> ReferenceMachine {
    ReferenceMachine::tight(
        PrefixTreeSpec::chain(prefix.bits()),
        ContextTreeSpec::single_leaf(tail_bit),
    )
}

/// The sequence `m` produces when fed its own predictions.
pub fn self_generate(m: &ReferenceMachine, n: usize) -> BinarySequence {
    let mut cursor = m.start();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (b, _) = cursor.predict(&out);
        out.push(b);
        cursor.advance(b);
    }
    BinarySequence::new(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub a: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub prefix_len: usize,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub mean_prefix_error_rate: f64,
    pub mean_error_rate: f64,
    /// Members run through the oracle.
    pub kappa_checked: usize,
    /// Of those, members whose oracle upper end is 0 with `prefix_len + 1` states.
    pub kappa_zero_verified: usize,
}

impl EnsembleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ensemble report serializes")
    }
}

/// `aN` as an integer in `1..=N`.
pub fn prefix_length(a: f64, n: usize) -> Result<usize> {
    let an = a * n as f64;
    let r = an.round();
    if !(an.is_finite() && (an - r).abs() < 1e-9 && r >= 1.0 && r <= n as f64) {
        return Err(Error::Domain(format!(
            "a*N must be an integer in 1..=N, got a = {a}, N = {n}"
        )));
    }
    Ok(r as usize)
}

/// Prefix of sample `index`: an independent stream of the seeded generator.
pub fn sample_prefix(seed: u64, index: usize, len: usize) -> Word {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    Word::new((0..len).map(|_| Bit::from_bool(rng.random())).collect())
}

struct Member {
    prefix_errors: f64,
    errors: f64,
    kappa_zero: Option<bool>,
}

fn evaluate<P, F>(prefix: &Word, n: usize, factory: &F) -> Result<Member>
where
    P: SequentialPredictor,
    F: Fn() -> P,
{
    let x = self_generate(&chain_machine(prefix, ENSEMBLE_TAIL), n);
    let report = run_predictor(&mut factory(), &x, LossMode::Expected)?;
    let prefix_errors = report.step_losses[..prefix.len()].iter().sum();
    let kappa_zero = if n <= KAPPA_CHECK_MAX_N {
        Some(kappa_bracket(&x, prefix.len() + 1)?.upper_errors == 0)
    } else {
        None
    };
    Ok(Member {
        prefix_errors,
        errors: report.expected_errors,
        kappa_zero,
    })
}

fn summarize(a: f64, n: usize, k: usize, seed: Option<u64>, members: Vec<Result<Member>>) -> Result<EnsembleReport> {
    let members = members.into_iter().collect::<Result<Vec<_>>>()?;
    let samples = members.len();
    let denom = samples.max(1) as f64;
    let prefix_sum: f64 = members.iter().map(|m| m.prefix_errors).sum();
    let total_sum: f64 = members.iter().map(|m| m.errors).sum();
    Ok(EnsembleReport {
        a,
        n,
        prefix_len: k,
        samples,
        seed,
        mean_prefix_error_rate: prefix_sum / denom / k as f64,
        mean_error_rate: total_sum / denom / n as f64,
        kappa_checked: members.iter().filter(|m| m.kappa_zero.is_some()).count(),
        kappa_zero_verified: members.iter().filter(|m| m.kappa_zero == Some(true)).count(),
    })
}

/// Draws `samples` uniform prefixes of length `aN`, self-generates each
/// sequence and runs a fresh predictor on it in expected-loss mode.
pub fn ensemble_experiment<P, F>(
    a: f64,
    n: usize,
    samples: usize,
    factory: F,
    seed: u64,
    exec: Execution,
) -> Result<EnsembleReport>
where
    P: SequentialPredictor,
    F: Fn() -> P + Sync,
{
    let k = prefix_length(a, n)?;
    let members = map_range(0..samples, exec, |i| evaluate(&sample_prefix(seed, i, k), n, &factory));
    summarize(a, n, k, Some(seed), members)
}

/// As [`ensemble_experiment`] over all `2^(aN)` prefixes.
pub fn exhaustive_ensemble<P, F>(a: f64, n: usize, factory: F, exec: Execution) -> Result<EnsembleReport>
where
    P: SequentialPredictor,
    F: Fn() -> P + Sync,
{
    let k = prefix_length(a, n)?;
    if k > EXHAUSTIVE_MAX_PREFIX {
        return Err(Error::Refused(format!(
            "exhaustive ensemble limited to aN <= {EXHAUSTIVE_MAX_PREFIX}, got {k}"
        )));
    }
    let members = map_range(0..1usize << k, exec, |mask| {
        evaluate(&prefix_from_mask(mask, k), n, &factory)
    });
    summarize(a, n, k, None, members)
}

fn prefix_from_mask(mask: usize, k: usize) -> Word {
    Word::new((0..k).map(|i| Bit::from_bool(mask >> (k - 1 - i) & 1 == 1)).collect())
}

/// Whether the `2^k` chain machines generate pairwise distinct length-`n`
/// sequences.
pub fn chain_sequences_distinct(k: usize, n: usize) -> bool {
    let mut seen = HashSet::new();
    (0..1usize << k).all(|mask| {
        let x = self_generate(&chain_machine(&prefix_from_mask(mask, k), ENSEMBLE_TAIL), n);
        seen.insert(x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::{run_reference_machine, ConstantPredictor, MarkovResolver, PhiPredictor};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn self_generation_examples() {
        let m = chain_machine(&w("1010"), Bit::One);
        let x = self_generate(&m, 8);
        assert_eq!(x.to_ascii(), "10101111");
        assert_eq!(run_reference_machine(&m, &x).expected_errors, 0.0);
        assert_eq!(self_generate(&chain_machine(&Word::empty(), Bit::Zero), 5).to_ascii(), "00000");
        assert_eq!(self_generate(&chain_machine(&w("1"), Bit::Zero), 5).to_ascii(), "10000");
        assert!(self_generate(&m, 0).is_empty());
        assert_eq!(m.budget(), 5);
    }

    #[test]
    fn generated_sequences_have_zero_kappa() {
        for mask in 0..16 {
            let p = prefix_from_mask(mask, 4);
            let x = self_generate(&chain_machine(&p, ENSEMBLE_TAIL), 8);
            assert_eq!(kappa_bracket(&x, 5).unwrap().upper_errors, 0);
        }
    }

    #[test]
    fn exhaustive_mean_is_one_half() {
        let r = exhaustive_ensemble(1.0, 8, || ConstantPredictor::new(Bit::One), Execution::default())
            .unwrap();
        assert!((r.mean_prefix_error_rate - 0.5).abs() < 1e-12);
        let r = exhaustive_ensemble(
            0.5,
            12,
            || PhiPredictor::new(MarkovResolver { order: 1 }),
            Execution::default(),
        )
        .unwrap();
        assert!((r.mean_prefix_error_rate - 0.5).abs() < 1e-9);
        assert_eq!(r.kappa_zero_verified, 64);
    }

    #[test]
    fn prefix_length_must_be_integral() {
        assert_eq!(prefix_length(0.5, 64).unwrap(), 32);
        assert!(prefix_length(0.3, 7).is_err());
        assert!(prefix_length(0.0, 8).is_err());
        assert!(prefix_length(1.5, 8).is_err());
    }

    #[test]
    fn reproducible_and_distinct() {
        let run = |exec| {
            ensemble_experiment(0.5, 16, 3, || ConstantPredictor::new(Bit::Zero), 9, exec).unwrap()
        };
        assert_eq!(run(Execution::Sequential).to_json(), run(Execution::Parallel).to_json());
        assert_eq!(sample_prefix(1, 2, 10), sample_prefix(1, 2, 10));
        assert_ne!(sample_prefix(1, 2, 32), sample_prefix(1, 3, 32));
        assert!(chain_sequences_distinct(8, 10));
    }
}
