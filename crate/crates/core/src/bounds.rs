//! Closed-form redundancy bounds for the horizon-dependent and
//! horizon-independent predictors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::universal::DepthSchedule;

fn check(name: &'static str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::Domain(format!("{name} must be >= 1")));
    }
    Ok(())
}

/// `(2 sqrt(2/M + 1/M^2) + 1/M)(1 + M/(2N)) + (2M+1) S/N`.
pub fn main_redundancy_bound(m: u64, s: u64, n: u64) -> Result<f64> {
    check("M", m)?;
    check("S", s)?;
    check("N", n)?;
    let (m, s, n) = (m as f64, s as f64, n as f64);
    let first = 2.0 * (2.0 / m + 1.0 / (m * m)).sqrt() + 1.0 / m;
    Ok(first * (1.0 + m / (2.0 * n)) + (2.0 * m + 1.0) * s / n)
}

/// Range of `j` searched by [`psi`].
pub fn psi_range(n: u64) -> std::ops::RangeInclusive<u32> {
    let ceil_log2 = u64::BITS - (n.max(1) - 1).leading_zeros();
    1..=ceil_log2 + 1
}

/// `2 min_j (2^j/N + 1/M(j))` over `j` in [`psi_range`].
pub fn psi(n: u64, schedule: &DepthSchedule) -> Result<f64> {
    check("N", n)?;
    Ok(psi_argmin(n, schedule).1)
}

fn psi_argmin(n: u64, schedule: &DepthSchedule) -> (u32, f64) {
    psi_range(n)
        .map(|j| {
            let v = 2.0 * ((j as f64).exp2() / n as f64 + 1.0 / schedule.at(j as usize) as f64);
            (j, v)
        })
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// `2S(M(S)+1)/N + sqrt(psi (1 + psi)) + psi/2`.
pub fn horizon_independent_bound(n: u64, s: u64, schedule: &DepthSchedule) -> Result<f64> {
    check("S", s)?;
    let p = psi(n, schedule)?;
    let ms = schedule.at(s as usize) as f64;
    Ok(2.0 * s as f64 * (ms + 1.0) / n as f64 + (p * (1.0 + p)).sqrt() + p / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "S")]
    pub s: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub schedule: DepthSchedule,
    pub main_bound: f64,
    pub psi: f64,
    pub psi_argmin_j: u32,
    pub horizon_independent_bound: f64,
}

impl BoundReport {
    pub fn new(n: u64, s: u64, m: u64, schedule: DepthSchedule) -> Result<Self> {
        let main_bound = main_redundancy_bound(m, s, n)?;
        let horizon_independent_bound = horizon_independent_bound(n, s, &schedule)?;
        let (psi_argmin_j, psi) = psi_argmin(n, &schedule);
        Ok(BoundReport {
            n,
            s,
            m,
            schedule,
            main_bound,
            psi,
            psi_argmin_j,
            horizon_independent_bound,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bound report serializes")
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universal::optimal_M;

    #[test]
    fn main_bound_examples() {
        let b = main_redundancy_bound(8, 4, 1024).unwrap();
        assert!((b - 1.2267).abs() < 1e-4, "{b}");
        let n = 1000u64;
        let m1 = main_redundancy_bound(1, 5, n).unwrap();
        let want = (2.0 * 3f64.sqrt() + 1.0) * (1.0 + 1.0 / (2.0 * n as f64)) + 15.0 / n as f64;
        assert!((m1 - want).abs() < 1e-12);
        assert!(main_redundancy_bound(0, 1, 1).is_err());
    }

    #[test]
    fn main_bound_vanishes() {
        let mut prev = f64::INFINITY;
        for e in 10..=30 {
            let n = 1u64 << e;
            let m = optimal_M(n as usize, 4).unwrap();
            let b = main_redundancy_bound(m, 4, n).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn psi_examples() {
        let d = DepthSchedule::Doubling;
        assert!((psi(1024, &d).unwrap() - 0.125).abs() < 1e-12);
        assert_eq!(psi_argmin(1024, &d).0, 5);
        assert!((psi(4, &d).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(psi_argmin(4, &d).0, 1);
        assert_eq!(psi_range(1024), 1..=11);
        assert_eq!(psi_range(1), 1..=1);
        let c = DepthSchedule::Constant(10);
        assert!((psi(1 << 40, &c).unwrap() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn horizon_independent_example() {
        let b = horizon_independent_bound(1024, 4, &DepthSchedule::Doubling).unwrap();
        let want = 8.0 * 17.0 / 1024.0 + (0.125f64 * 1.125).sqrt() + 0.0625;
        assert!((b - want).abs() < 1e-12);
        assert!((b - 0.5703).abs() < 1e-4);
    }

    #[test]
    fn report_json_echoes_inputs() {
        let r = BoundReport::new(1024, 4, 8, DepthSchedule::Doubling).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["N"], 1024);
        assert_eq!(v["psi_argmin_j"], 5);
    }
}
