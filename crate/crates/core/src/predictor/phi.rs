use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seq::Bit;

/// Occurrence counts of a state: `n` visits, `n0` followed by 0, `n1` by 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CountTriple {
    pub n0: u64,
    pub n1: u64,
}

impl CountTriple {
    pub fn new(n0: u64, n1: u64) -> Self {
        CountTriple { n0, n1 }
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n0 + self.n1
    }

    #[inline]
    pub fn get(&self, b: Bit) -> u64 {
        match b {
            Bit::Zero => self.n0,
            Bit::One => self.n1,
        }
    }

    #[inline]
    pub fn record(&mut self, b: Bit) {
        match b {
            Bit::Zero => self.n0 += 1,
            Bit::One => self.n1 += 1,
        }
    }

    /// Errors of the best constant guess on this state.
    #[inline]
    pub fn minority(&self) -> u64 {
        self.n0.min(self.n1)
    }

    /// Majority symbol, ties resolved to 0.
    #[inline]
    pub fn majority(&self) -> Bit {
        Bit::from_bool(self.n1 > self.n0)
    }

    pub fn is_pure(&self) -> bool {
        self.minority() == 0
    }
}

impl std::ops::Add for CountTriple {
    type Output = CountTriple;
    fn add(self, o: CountTriple) -> CountTriple {
        CountTriple::new(self.n0 + o.n0, self.n1 + o.n1)
    }
}

impl std::ops::AddAssign for CountTriple {
    fn add_assign(&mut self, o: CountTriple) {
        self.n0 += o.n0;
        self.n1 += o.n1;
    }
}

impl Serialize for CountTriple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CountTriple", 3)?;
        st.serialize_field("n", &self.n())?;
        st.serialize_field("n0", &self.n0)?;
        st.serialize_field("n1", &self.n1)?;
        st.end()
    }
}

/// Half-width of the randomized zone around 1/2 after `n` observations.
#[inline]
pub fn dead_zone(n: u64) -> f64 {
    0.5 / ((n as f64) + 2.0).sqrt()
}

/// Randomized output function: probability of predicting 1 given the
/// estimate `alpha` and the visit count `n`. Saturates to 0 / 1 outside
/// `[1/2 - eps_n, 1/2 + eps_n]` and is linear inside, boundaries included.
pub fn phi(alpha: f64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} is not a probability")));
    }
    Ok(phi_unchecked(alpha, n))
}

#[inline]
pub(crate) fn phi_unchecked(alpha: f64, n: u64) -> f64 {
    let eps = dead_zone(n);
    if alpha < 0.5 - eps {
        0.0
    } else if alpha > 0.5 + eps {
        1.0
    } else {
        ((alpha - 0.5) / (2.0 * eps) + 0.5).clamp(0.0, 1.0)
    }
}

/// Count estimate `(n1 + 1/2) / (n + 1)`.
#[inline]
pub fn p_hat(c: &CountTriple) -> f64 {
    (c.n1 as f64 + 0.5) / (c.n() as f64 + 1.0)
}

/// `phi(p_hat(c), n(c))`: the probability the count-based predictor assigns
/// to a 1 in a state with counts `c`.
#[inline]
pub fn predict_from_counts(c: &CountTriple) -> f64 {
    phi_unchecked(p_hat(c), c.n())
}
