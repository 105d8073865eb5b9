//! Intensity model for two firms whose defaults feed back into each other.
//!
//! Before either firm defaults, firm B defaults at constant rate `base_b` and
//! firm C at `base_c`. Once the partner has defaulted at time `tau`, the
//! survivor's intensity becomes
//!
//! ```text
//! base + jump / (atten * (t - tau) + 1)
//! ```
//!
//! so the contagion shock `jump` fades hyperbolically at speed `atten`. A
//! negative `jump` describes competitors (the partner's default helps the
//! survivor), a positive one copartners. `atten = 0` keeps the jump forever.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Hazard-space tolerance for inverting the post-default cumulative hazard.
pub const HAZARD_INVERSION_TOL: f64 = 1e-12;
/// Iteration cap for the safeguarded Newton/bisection inversion.
pub const HAZARD_INVERSION_MAX_ITER: usize = 200;

/// One of the two linked firms. B sells protection, C is the reference entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FirmId {
    B,
    C,
}

impl FirmId {
    pub fn partner(self) -> Self {
        match self {
            FirmId::B => FirmId::C,
            FirmId::C => FirmId::B,
        }
    }
}

/// The six intensity parameters of the general model (rates per year).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContagionParams<T> {
    pub base_b: T,
    pub base_c: T,
    pub jump_b: T,
    pub jump_c: T,
    pub atten_b: T,
    pub atten_c: T,
}

impl<T: Scalar> ContagionParams<T> {
    pub fn new(base_b: T, base_c: T, jump_b: T, jump_c: T, atten_b: T, atten_c: T) -> Self {
        Self {
            base_b,
            base_c,
            jump_b,
            jump_c,
            atten_b,
            atten_c,
        }
    }

    /// Names of every violated constraint; empty when the parameters are usable.
    pub fn violations(&self) -> Vec<String> {
        let zero = T::zero();
        let mut out = Vec::new();
        // Written as negated comparisons so NaN counts as a violation.
        if !(self.base_b > zero) {
            out.push("base_b > 0".to_owned());
        }
        if !(self.base_c > zero) {
            out.push("base_c > 0".to_owned());
        }
        if !(self.atten_b >= zero) {
            out.push("atten_b >= 0".to_owned());
        }
        if !(self.atten_c >= zero) {
            out.push("atten_c >= 0".to_owned());
        }
        if !(self.base_b + self.jump_b > zero) || !self.jump_b.is_finite() {
            out.push("base_b + jump_b > 0".to_owned());
        }
        if !(self.base_c + self.jump_c > zero) || !self.jump_c.is_finite() {
            out.push("base_c + jump_c > 0".to_owned());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// Post-default intensity of `firm` once its partner has defaulted.
    pub fn survivor_hazard(&self, firm: FirmId) -> SurvivorHazard<T> {
        match firm {
            FirmId::B => SurvivorHazard::new(self.base_b, self.jump_b, self.atten_b),
            FirmId::C => SurvivorHazard::new(self.base_c, self.jump_c, self.atten_c),
        }
    }

    pub fn base(&self, firm: FirmId) -> T {
        match firm {
            FirmId::B => self.base_b,
            FirmId::C => self.base_c,
        }
    }

    /// Default intensity of `firm` at time `t`, given the partner's default
    /// time if it has one.
    pub fn intensity(&self, firm: FirmId, t: T, partner_default: Option<T>) -> Result<T> {
        check_time("t", t)?;
        let hazard = self.survivor_hazard(firm);
        match partner_default {
            Some(tau) => {
                check_time("partner_default", tau)?;
                if tau <= t {
                    Ok(hazard.rate(t - tau))
                } else {
                    Ok(hazard.base)
                }
            }
            None => Ok(hazard.base),
        }
    }
}

/// The symmetric competitor case `-jump = atten` for both firms.
///
/// `atten_b` is `b` (so `jump_b = -b`, `atten_b = b` in the general form),
/// likewise `atten_c` is `c`. Zero gives the independent model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricCompetitorParams<T> {
    pub base_b: T,
    pub base_c: T,
    pub atten_b: T,
    pub atten_c: T,
}

impl<T: Scalar> SymmetricCompetitorParams<T> {
    pub fn new(base_b: T, base_c: T, atten_b: T, atten_c: T) -> Self {
        Self {
            base_b,
            base_c,
            atten_b,
            atten_c,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let zero = T::zero();
        let mut out = Vec::new();
        if !(self.base_b > zero) {
            out.push("base_b > 0".to_owned());
        }
        if !(self.base_c > zero) {
            out.push("base_c > 0".to_owned());
        }
        if !(self.atten_b >= zero) {
            out.push("atten_b >= 0".to_owned());
        }
        if !(self.atten_c >= zero) {
            out.push("atten_c >= 0".to_owned());
        }
        if !(self.atten_b < self.base_b) {
            out.push("atten_b < base_b".to_owned());
        }
        if !(self.atten_c < self.base_c) {
            out.push("atten_c < base_c".to_owned());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    pub fn to_general(&self) -> ContagionParams<T> {
        ContagionParams {
            base_b: self.base_b,
            base_c: self.base_c,
            jump_b: -self.atten_b,
            jump_c: -self.atten_c,
            atten_b: self.atten_b,
            atten_c: self.atten_c,
        }
    }
}

impl<T: Scalar> From<SymmetricCompetitorParams<T>> for ContagionParams<T> {
    fn from(p: SymmetricCompetitorParams<T>) -> Self {
        p.to_general()
    }
}

/// Realized default times; `+inf` means no default within the simulated horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefaultTimePair<T> {
    pub tau_b: T,
    pub tau_c: T,
}

impl<T: Scalar> DefaultTimePair<T> {
    pub fn time(&self, firm: FirmId) -> T {
        match firm {
            FirmId::B => self.tau_b,
            FirmId::C => self.tau_c,
        }
    }

    pub fn first_default(&self) -> T {
        self.tau_b.min(self.tau_c)
    }
}

/// Intensity of a firm whose partner has already defaulted, as a function
/// of the lag since that default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivorHazard<T> {
    pub base: T,
    pub jump: T,
    pub atten: T,
}

impl<T: Scalar> SurvivorHazard<T> {
    pub fn new(base: T, jump: T, atten: T) -> Self {
        Self { base, jump, atten }
    }

    /// Intensity at `lag >= 0` after the partner's default.
    pub fn rate(&self, lag: T) -> T {
        self.base + self.jump / (self.atten * lag + T::one())
    }

    /// Cumulative hazard over `[0, lag]`, assuming `lag >= 0`.
    pub fn cumulative_unchecked(&self, lag: T) -> T {
        if self.atten == T::zero() {
            (self.base + self.jump) * lag
        } else {
            self.base * lag + self.jump / self.atten * (self.atten * lag).ln_1p()
        }
    }

    pub fn cumulative(&self, lag: T) -> Result<T> {
        check_time("lag", lag)?;
        Ok(self.cumulative_unchecked(lag))
    }

    /// Lag `s` with `cumulative(s) == target`, or `None` if that lag exceeds `max_lag`.
    pub fn invert_capped(&self, target: T, max_lag: T) -> Result<Option<T>> {
        if self.cumulative_unchecked(max_lag) < target {
            return Ok(None);
        }
        self.invert(target).map(Some)
    }

    /// Lag `s >= 0` with `cumulative(s) == target`.
    ///
    /// Safeguarded Newton iteration inside a bisection bracket `[0, u]`, where
    /// `u` doubles from 1 until it encloses the target.
    pub fn invert(&self, target: T) -> Result<T> {
        if !(target >= T::zero()) {
            return Err(Error::NegativeTime {
                what: "exponential variate",
                value: target.as_f64(),
            });
        }
        if target == T::zero() {
            return Ok(T::zero());
        }
        if !target.is_finite() {
            return Ok(T::infinity());
        }
        let tol =
            T::lit(HAZARD_INVERSION_TOL).max(T::lit(4.0) * T::epsilon() * target.max(T::one()));
        let two = T::lit(2.0);

        let mut hi = T::one();
        let mut doublings = 0;
        while self.cumulative_unchecked(hi) < target {
            hi = hi * two;
            doublings += 1;
            if doublings > 2048 || !hi.is_finite() {
                return Err(Error::NoConvergence {
                    iterations: doublings,
                    target: target.as_f64(),
                });
            }
        }
        let mut lo = T::zero();
        let mut s = hi * T::lit(0.5);
        for _ in 0..HAZARD_INVERSION_MAX_ITER {
            let residual = self.cumulative_unchecked(s) - target;
            if residual.abs() <= tol {
                return Ok(s);
            }
            if residual > T::zero() {
                hi = s;
            } else {
                lo = s;
            }
            let newton = s - residual / self.rate(s);
            let next = if newton > lo && newton < hi {
                newton
            } else {
                (lo + hi) * T::lit(0.5)
            };
            if next == s || next <= lo && next >= hi {
                // Bracket collapsed to adjacent representable values.
                return Ok(s);
            }
            s = next;
        }
        Err(Error::NoConvergence {
            iterations: HAZARD_INVERSION_MAX_ITER,
            target: target.as_f64(),
        })
    }
}

/// Cumulative post-default hazard `a0 s + (a1/a2) ln(a2 s + 1)` (or `(a0 + a1) s` when `a2 = 0`).
pub fn post_contagion_hazard<T: Scalar>(a0: T, a1: T, a2: T, s: T) -> Result<T> {
    SurvivorHazard::new(a0, a1, a2).cumulative(s)
}

/// Inverse of [`post_contagion_hazard`] in its lag argument.
pub fn invert_post_contagion_hazard<T: Scalar>(a0: T, a1: T, a2: T, e: T) -> Result<T> {
    SurvivorHazard::new(a0, a1, a2).invert(e)
}

pub(crate) fn check_time<T: Scalar>(what: &'static str, value: T) -> Result<()> {
    if value >= T::zero() {
        Ok(())
    } else {
        Err(Error::NegativeTime {
            what,
            value: value.as_f64(),
        })
    }
}
