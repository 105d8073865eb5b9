//! Swap premium of a CDS written by firm B on reference entity C.
//!
//! Unit notional, zero recovery, constant short rate, and a protection buyer
//! that never defaults. The seller pays 1 at `tau_C + settlement_lag`, but
//! only if it is itself still alive then. Premiums are paid at each `T_i`
//! while both firms survive, plus the fraction accrued since `T_{i-1}` when C
//! defaults first.
//!
//! Every leg has a closed form in `beta = b0 + c0 + r`. The accrued-premium
//! factor is available two ways: the sum of the per-period terms (default)
//! and the condensed single expression. They differ by a factor
//! `1 - e^{-beta T}`; see [`AccrualMode`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SymmetricCompetitorParams;
use crate::scalar::{one_minus_exp_times_linear, Scalar};

/// Uniform premium schedule `T_i = i * interval`, `i = 1..=n`, `T_n = maturity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapSchedule<T> {
    pub maturity: T,
    pub interval: T,
    pub n_payments: usize,
    pub payment_dates: Vec<T>,
    pub settlement_lag: T,
    pub rate: T,
}

impl<T: Scalar> SwapSchedule<T> {
    /// `T_i` for `i = 0..=n` (with `T_0 = 0`).
    pub fn date(&self, i: usize) -> T {
        if i == 0 {
            T::zero()
        } else {
            self.payment_dates[i - 1]
        }
    }

    /// Index `i` of the period `(T_{i-1}, T_i]` containing `t`, if `0 < t <= T`.
    pub fn period_of(&self, t: T) -> Option<usize> {
        if !(t > T::zero()) || t > self.date(self.n_payments) {
            return None;
        }
        let guess = (t / self.interval).ceil().to_usize().unwrap_or(1);
        let mut i = guess.clamp(1, self.n_payments);
        while i > 1 && t <= self.date(i - 1) {
            i -= 1;
        }
        while i < self.n_payments && t > self.date(i) {
            i += 1;
        }
        Some(i)
    }

    /// Simulation truncation point: maturity plus settlement lag plus one period.
    pub fn simulation_horizon(&self) -> T {
        self.maturity + self.settlement_lag + self.interval
    }
}

pub fn build_schedule<T: Scalar>(
    maturity: T,
    interval: T,
    settlement_lag: T,
    rate: T,
) -> Result<SwapSchedule<T>> {
    let mut problems = Vec::new();
    if !(maturity > T::zero()) || !maturity.is_finite() {
        problems.push(format!("maturity must be positive, got {maturity}"));
    }
    if !(interval > T::zero()) || !interval.is_finite() {
        problems.push(format!("interval must be positive, got {interval}"));
    }
    if !(settlement_lag >= T::zero()) || !settlement_lag.is_finite() {
        problems.push(format!(
            "settlement_lag must be non-negative, got {settlement_lag}"
        ));
    }
    if !(rate >= T::zero()) || !rate.is_finite() {
        problems.push(format!("rate must be non-negative, got {rate}"));
    }
    if !problems.is_empty() {
        return Err(Error::InvalidSchedule(problems.join("; ")));
    }
    let ratio = maturity / interval;
    let n = ratio.round();
    if (ratio - n).abs() > T::lit(1e-9) || n < T::one() {
        return Err(Error::InvalidSchedule(format!(
            "maturity {maturity} is not a whole number of intervals {interval} ({ratio} payments)"
        )));
    }
    let n_payments = n
        .to_usize()
        .ok_or_else(|| Error::InvalidSchedule(format!("{ratio} payments is not representable")))?;
    let payment_dates = (1..=n_payments).map(|i| T::count(i) * interval).collect();
    Ok(SwapSchedule {
        maturity,
        interval,
        n_payments,
        payment_dates,
        settlement_lag,
        rate,
    })
}

/// How the accrued-premium factor `A(T)` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum AccrualMode {
    /// Sum of the per-period accrual terms (the actual expectation).
    #[default]
    #[serde(rename = "summed")]
    SummedPerPeriod,
    /// The condensed closed form, which lacks the `1 - e^{-beta T}` factor.
    #[serde(rename = "paper")]
    PaperCondensed,
}

impl AccrualMode {
    pub fn other(self) -> Self {
        match self {
            AccrualMode::SummedPerPeriod => AccrualMode::PaperCondensed,
            AccrualMode::PaperCondensed => AccrualMode::SummedPerPeriod,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingBreakdown<T> {
    pub beta: T,
    pub annuity: T,
    pub protection: T,
    pub accrual_summed: T,
    pub accrual_condensed: T,
    /// Per-period spread paid at each `T_i` (not annualized).
    pub premium: T,
    pub mode: AccrualMode,
}

impl<T: Scalar> PricingBreakdown<T> {
    pub fn accrual(&self) -> T {
        match self.mode {
            AccrualMode::SummedPerPeriod => self.accrual_summed,
            AccrualMode::PaperCondensed => self.accrual_condensed,
        }
    }

    /// Running spread per year: `premium / interval`.
    pub fn annualized(&self, interval: T) -> T {
        self.premium / interval
    }

    /// Premium-leg value minus protection-leg value; zero at the fair premium.
    pub fn balance_residual(&self) -> T {
        self.annuity * self.premium + self.accrual() * self.premium - self.protection
    }
}

fn checked<T: Scalar>(params: &SymmetricCompetitorParams<T>) -> Result<()> {
    params.validate()
}

/// `beta = b0 + c0 + r`.
pub fn beta<T: Scalar>(params: &SymmetricCompetitorParams<T>, sched: &SwapSchedule<T>) -> T {
    params.base_b + params.base_c + sched.rate
}

/// `sum_i e^{-r T_i} P(tau_B > T_i, tau_C > T_i) = sum_i e^{-beta T_i}`, summed directly.
pub fn annuity_factor<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
) -> Result<T> {
    checked(params)?;
    let beta = beta(params, sched);
    Ok(sched.payment_dates.iter().map(|&t| (-beta * t).exp()).sum())
}

/// Geometric-series form of [`annuity_factor`].
pub fn annuity_closed_form<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
) -> Result<T> {
    checked(params)?;
    let beta = beta(params, sched);
    let x = beta * sched.interval;
    if x == T::zero() {
        return Ok(T::count(sched.n_payments));
    }
    Ok((-x).exp() * (-(-beta * sched.maturity).exp_m1()) / (-(-x).exp_m1()))
}

/// `E[e^{-r(tau_C + delta)} 1{tau_C <= T} 1{tau_B > tau_C + delta}]`.
pub fn protection_leg<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
) -> Result<T> {
    checked(params)?;
    let beta = beta(params, sched);
    let (b0, c0, b) = (params.base_b, params.base_c, params.atten_b);
    let delta = sched.settlement_lag;
    // c0 (1/b + delta) b / beta, with the b = 0 limit kept finite
    let settle = (T::one() + b * delta) * (-(sched.rate + b0) * delta).exp();
    let window = -(-beta * sched.maturity).exp_m1();
    Ok(c0 * settle * window / beta)
}

/// Present value of the premium fraction accrued in period `i` (1-based)
/// when C defaults first inside `(T_{i-1}, T_i]`.
pub fn accrual_term<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
    i: usize,
) -> Result<T> {
    checked(params)?;
    if i == 0 || i > sched.n_payments {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: sched.n_payments,
        });
    }
    let beta = beta(params, sched);
    let dt = sched.interval;
    let start = sched.date(i - 1);
    // c0/(beta dT) [T_{i-1} e^{-beta T_{i-1}} - T_i e^{-beta T_i}
    //              + (T_{i-1} - 1/beta)(e^{-beta T_i} - e^{-beta T_{i-1}})]
    // collapses to c0/(beta^2 dT) e^{-beta T_{i-1}} (1 - e^{-x}(1 + x)), x = beta dT.
    Ok(params.base_c / (beta * beta * dt)
        * (-beta * start).exp()
        * one_minus_exp_times_linear(beta * dt))
}

/// Accrued-premium factor `A(T)`.
pub fn accrual_factor<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
    mode: AccrualMode,
) -> Result<T> {
    checked(params)?;
    match mode {
        AccrualMode::SummedPerPeriod => (1..=sched.n_payments)
            .map(|i| accrual_term(params, sched, i))
            .sum(),
        AccrualMode::PaperCondensed => {
            let beta = beta(params, sched);
            let x = beta * sched.interval;
            Ok(
                params.base_c / (beta * beta * sched.interval) * one_minus_exp_times_linear(x)
                    / (-(-x).exp_m1()),
            )
        }
    }
}

/// Fair per-period premium and all of its ingredients.
pub fn swap_premium<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
    mode: AccrualMode,
) -> Result<PricingBreakdown<T>> {
    checked(params)?;
    let annuity = annuity_factor(params, sched)?;
    let protection = protection_leg(params, sched)?;
    let accrual_summed = accrual_factor(params, sched, AccrualMode::SummedPerPeriod)?;
    let accrual_condensed = accrual_factor(params, sched, AccrualMode::PaperCondensed)?;
    let accrual = match mode {
        AccrualMode::SummedPerPeriod => accrual_summed,
        AccrualMode::PaperCondensed => accrual_condensed,
    };
    Ok(PricingBreakdown {
        beta: beta(params, sched),
        annuity,
        protection,
        accrual_summed,
        accrual_condensed,
        premium: protection / (annuity + accrual),
        mode,
    })
}

/// Upper bound on the condensed-mode premium, from
/// `1 - e^{-x} - x e^{-x} >= x^2 e^{-x} / 2`.
pub fn premium_upper_bound<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
) -> Result<T> {
    let protection = protection_leg(params, sched)?;
    let beta = beta(params, sched);
    let window = -(-beta * sched.maturity).exp_m1();
    let growth = (beta * sched.interval).exp_m1();
    let denom = params.base_c * sched.interval * T::lit(0.5) + window;
    Ok(protection * growth / denom)
}

/// Both sides of `1 - e^{-x} - x e^{-x} >= x^2 e^{-x} / 2`: `(lhs, rhs)`.
pub fn accrual_inequality_sides<T: Scalar>(x: T) -> (T, T) {
    (
        one_minus_exp_times_linear(x),
        x * x * T::lit(0.5) * (-x).exp(),
    )
}
