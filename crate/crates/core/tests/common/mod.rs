#![allow(dead_code)]

use contagion_core::{build_schedule, SwapSchedule, SymmetricCompetitorParams};

pub fn p0() -> SymmetricCompetitorParams {
    SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.1)
}

/// T = 5, quarterly payments, delta = 0.1, r = 0.05.
pub fn standard_schedule() -> SwapSchedule {
    build_schedule(5.0, 0.25, 0.1, 0.05).unwrap()
}

/// Two-sided one-sample Kolmogorov-Smirnov test against `cdf`; returns the p-value.
pub fn ks_p_value(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_tail(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
