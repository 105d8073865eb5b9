//! Closed-form default-time distribution for the symmetric competitor case.
//!
//! With `-jump = atten` for both firms the joint survival surface, joint
//! density and marginals are explicit. The density has a jump across the
//! diagonal `t1 = t2` unless `c * b0 == b * c0`.
//!
//! All formulas are written with `b * (1/b - 1/x)` expanded to `1 - b/x` so
//! the independence limit `b = 0` evaluates directly.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{check_time, FirmId, SymmetricCompetitorParams};
use crate::scalar::{exp_neg_minus_one_plus, Scalar};

/// Argument of the joint survival function: `t1` for firm B, `t2` for firm C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPoint<T> {
    pub t1: T,
    pub t2: T,
}

impl<T: Scalar> EvaluationPoint<T> {
    pub fn new(t1: T, t2: T) -> Self {
        Self { t1, t2 }
    }

    pub fn check(&self) -> Result<()> {
        check_time("t1", self.t1)?;
        check_time("t2", self.t2)
    }

    pub fn on_diagonal(&self) -> bool {
        self.t1 == self.t2
    }

    /// True when the point leaves `[0, horizon]^2`. The formulas still hold
    /// there, but pricing only ever queries inside the square.
    pub fn outside_horizon(&self, horizon: T) -> bool {
        self.t1 > horizon || self.t2 > horizon
    }
}

/// Joint density value; `on_diagonal` marks the branch-ambiguous line `t1 = t2`,
/// where the `t2 < t1` branch is returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue<T> {
    pub value: T,
    pub on_diagonal: bool,
}

/// Survival gain of one firm caused by its partner's earlier default, with
/// its quadratic envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalIncrement<T> {
    pub increment: T,
    pub bound: T,
}

/// Survival formula valid for `t1 <= t2` (firm C is asked to survive longer).
pub fn survival_t1_le_t2<T: Scalar>(p: &SymmetricCompetitorParams<T>, t1: T, t2: T) -> T {
    let (b0, c0, c) = (p.base_b, p.base_c, p.atten_c);
    let lead = T::one() + c * (t2 - t1) - c / b0;
    lead * (-(b0 * t1) - c0 * t2).exp() + c / b0 * (-(b0 + c0) * t2).exp()
}

/// Survival formula valid for `t2 < t1` (firm B is asked to survive longer).
pub fn survival_t2_lt_t1<T: Scalar>(p: &SymmetricCompetitorParams<T>, t1: T, t2: T) -> T {
    let (b0, c0, b) = (p.base_b, p.base_c, p.atten_b);
    let lead = T::one() + b * (t1 - t2) - b / c0;
    lead * (-(b0 * t1) - c0 * t2).exp() + b / c0 * (-(b0 + c0) * t1).exp()
}

/// `P(tau_B > t1, tau_C > t2)`.
pub fn joint_survival<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    p: EvaluationPoint<T>,
) -> Result<T> {
    p.check()?;
    Ok(if p.t1 <= p.t2 {
        survival_t1_le_t2(params, p.t1, p.t2)
    } else {
        survival_t2_lt_t1(params, p.t1, p.t2)
    })
}

/// Mixed second derivative of [`joint_survival`], off the diagonal.
pub fn joint_density<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    p: EvaluationPoint<T>,
) -> Result<DensityValue<T>> {
    p.check()?;
    let (b0, c0, b, c) = (params.base_b, params.base_c, params.atten_b, params.atten_c);
    let kernel = b0 * c0 * (-(b0 * p.t1) - c0 * p.t2).exp();
    let value = if p.t1 < p.t2 {
        kernel * (T::one() + c * (p.t2 - p.t1) - c / c0)
    } else {
        kernel * (T::one() + b * (p.t1 - p.t2) - b / b0)
    };
    Ok(DensityValue {
        value,
        on_diagonal: p.on_diagonal(),
    })
}

/// One-sided limits of the density at `(t, t)`: `(from t2 < t1, from t1 < t2)`.
pub fn diagonal_density_limits<T: Scalar>(params: &SymmetricCompetitorParams<T>, t: T) -> (T, T) {
    let (b0, c0, b, c) = (params.base_b, params.base_c, params.atten_b, params.atten_c);
    let e = (-(b0 + c0) * t).exp();
    (c0 * (b0 - b) * e, b0 * (c0 - c) * e)
}

/// `P(tau_i > t)` for one firm.
pub fn marginal_survival<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    firm: FirmId,
    t: T,
) -> Result<T> {
    let inc = survival_increment_and_bound(params, firm, t)?;
    let own = match firm {
        FirmId::B => params.base_b,
        FirmId::C => params.base_c,
    };
    Ok((-own * t).exp() + inc.increment)
}

/// Second term of the marginal survival and its `x^2/2` envelope.
pub fn survival_increment_and_bound<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    firm: FirmId,
    t: T,
) -> Result<SurvivalIncrement<T>> {
    check_time("t", t)?;
    let (own, other, shock) = match firm {
        FirmId::B => (params.base_b, params.base_c, params.atten_b),
        FirmId::C => (params.base_c, params.base_b, params.atten_c),
    };
    let x = other * t;
    let scale = shock / other * (-own * t).exp();
    // scale * x^2/2 == shock * other * t^2 * e^{-own t} / 2
    Ok(SurvivalIncrement {
        increment: scale * exp_neg_minus_one_plus(x),
        bound: scale * (x * x * T::lit(0.5)),
    })
}

/// Joint survival of two independent exponential default times.
pub fn independent_joint_survival<T: Scalar>(b0: T, c0: T, p: EvaluationPoint<T>) -> Result<T> {
    p.check()?;
    Ok((-(b0 * p.t1) - c0 * p.t2).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p0() -> SymmetricCompetitorParams<f64> {
        SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.1)
    }

    fn pt(t1: f64, t2: f64) -> EvaluationPoint<f64> {
        EvaluationPoint::new(t1, t2)
    }

    #[test]
    fn origin_survival_is_one() {
        assert!((joint_survival(&p0(), pt(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_reduces_to_product_of_base_rates() {
        let v = joint_survival(&p0(), pt(1.0, 1.0)).unwrap();
        assert!((v - 0.7408182207).abs() < 1e-10);
        assert!((v - (-0.3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn reference_off_diagonal_value() {
        // Frozen from 2-D quadrature of the density over [1, inf) x [2, inf)
        // and confirmed by a 10^6-path simulation (see tests/oracles.rs).
        let v = joint_survival(&p0(), pt(1.0, 2.0)).unwrap();
        assert!((v - 0.609_464_702_065_289_8).abs() < 1e-13, "{v}");
    }

    #[test]
    fn negative_times_rejected() {
        assert!(joint_survival(&p0(), pt(-1.0, 0.0)).is_err());
        assert!(joint_density(&p0(), pt(1.0, -0.1)).is_err());
        assert!(marginal_survival(&p0(), FirmId::C, -0.1).is_err());
        assert!(survival_increment_and_bound(&p0(), FirmId::B, -1.0).is_err());
        assert!(independent_joint_survival(0.1, 0.2, pt(-1.0, 0.0)).is_err());
    }

    #[test]
    fn density_branch_two_direct() {
        let d = joint_density(&p0(), pt(2.0, 1.0)).unwrap();
        let expected = 0.05 * 0.1 * 0.2 * (1.0 + 1.0 / 0.05 - 1.0 / 0.1) * (-0.4f64).exp();
        assert!((d.value - expected).abs() < 1e-15);
        assert!(!d.on_diagonal);
    }

    #[test]
    fn diagonal_flag_and_convention() {
        let d = joint_density(&p0(), pt(1.5, 1.5)).unwrap();
        assert!(d.on_diagonal);
        let (lower, upper) = diagonal_density_limits(&p0(), 1.5);
        assert!((d.value - lower).abs() < 1e-16);
        let e = (-0.3f64 * 1.5).exp();
        assert!((lower - 0.2 * (0.1 - 0.05) * e).abs() < 1e-16);
        assert!((upper - 0.1 * (0.2 - 0.1) * e).abs() < 1e-16);
        // c*b0 = 0.01 = b*c0 here, so this parameter set is continuous
        assert!((lower - upper).abs() < 1e-16);
    }

    #[test]
    fn discontinuity_when_rates_unbalanced() {
        let p = SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.15);
        let t = 2.0;
        let (lower, upper) = diagonal_density_limits(&p, t);
        let gap = (0.2f64 * (0.1 - 0.05) - 0.1 * (0.2 - 0.15)).abs() * (-0.3f64 * t).exp();
        assert!(((lower - upper).abs() - gap).abs() < 1e-16);
        // one-sided limits approached through the density itself
        let eps = 1e-9;
        let below = joint_density(&p, pt(t + eps, t)).unwrap().value;
        let above = joint_density(&p, pt(t, t + eps)).unwrap().value;
        assert!((below - lower).abs() < 1e-10);
        assert!((above - upper).abs() < 1e-10);
    }

    #[test]
    fn marginal_examples() {
        assert!((marginal_survival(&p0(), FirmId::B, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let indep = SymmetricCompetitorParams::new(0.1f64, 0.2, 0.0, 0.0);
        let v = marginal_survival(&indep, FirmId::B, 3.0).unwrap();
        assert!((v - 0.7408182207).abs() < 1e-10);
        let v2 = marginal_survival(&p0(), FirmId::B, 2.0).unwrap();
        let j = joint_survival(&p0(), pt(2.0, 0.0)).unwrap();
        assert!((v2 - j).abs() < 1e-15);
    }

    #[test]
    fn increment_examples() {
        let z = survival_increment_and_bound(&p0(), FirmId::B, 0.0).unwrap();
        assert_eq!((z.increment, z.bound), (0.0, 0.0));
        let s = survival_increment_and_bound(&p0(), FirmId::B, 2.0).unwrap();
        let inc = 0.05 / 0.2 * (-0.2f64).exp() * ((-0.4f64).exp() - 1.0 + 0.4);
        let bound = 0.5 * 0.05 * 0.2 * 4.0 * (-0.2f64).exp();
        assert!((s.increment - inc).abs() < 1e-15);
        assert!((s.bound - bound).abs() < 1e-15);
    }

    #[test]
    fn independence_limit() {
        let exact = SymmetricCompetitorParams::new(0.1, 0.2, 0.0, 0.0);
        let near = SymmetricCompetitorParams::new(0.1, 0.2, 1e-8, 1e-8);
        for &(t1, t2) in &[(0.0, 0.0), (1.0, 1.0), (0.5, 3.0), (4.0, 1.0)] {
            let ind = independent_joint_survival(0.1, 0.2, pt(t1, t2)).unwrap();
            assert!((joint_survival(&exact, pt(t1, t2)).unwrap() - ind).abs() < 1e-15);
            assert!((joint_survival(&near, pt(t1, t2)).unwrap() - ind).abs() < 1e-6);
        }
    }

    #[test]
    fn finite_difference_density() {
        let p = p0();
        let h = 1e-4;
        let s = |a: f64, b: f64| joint_survival(&p, pt(a, b)).unwrap();
        let (t1, t2) = (1.5, 0.5);
        let fd = (s(t1 + h, t2 + h) - s(t1 + h, t2 - h) - s(t1 - h, t2 + h) + s(t1 - h, t2 - h))
            / (4.0 * h * h);
        let d = joint_density(&p, pt(t1, t2)).unwrap().value;
        assert!((fd - d).abs() / d < 1e-5);
    }

    #[test]
    fn single_precision_smoke() {
        let p = SymmetricCompetitorParams::new(0.1f32, 0.2, 0.05, 0.1);
        let v = joint_survival(&p, EvaluationPoint::new(1.0f32, 2.0)).unwrap();
        assert!((v - 0.609_464_7).abs() < 1e-5);
    }

    fn sym_params() -> impl Strategy<Value = SymmetricCompetitorParams<f64>> {
        (0.01f64..1.0, 0.01f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(b0, c0, fb, fc)| {
            SymmetricCompetitorParams::new(b0, c0, fb * b0 * 0.999, fc * c0 * 0.999)
        })
    }

    proptest! {
        #[test]
        fn survival_in_unit_interval_and_monotone(p in sym_params(), t1 in 0.0f64..20.0, t2 in 0.0f64..20.0) {
            let v = joint_survival(&p, pt(t1, t2)).unwrap();
            prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
            let dt = 0.01;
            prop_assert!(joint_survival(&p, pt(t1 + dt, t2)).unwrap() <= v + 1e-15);
            prop_assert!(joint_survival(&p, pt(t1, t2 + dt)).unwrap() <= v + 1e-15);
        }

        #[test]
        fn branches_agree_on_diagonal(p in sym_params(), t in 0.0f64..30.0) {
            let a = survival_t1_le_t2(&p, t, t);
            let b = survival_t2_lt_t1(&p, t, t);
            prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn density_positive_off_diagonal(p in sym_params(), t1 in 0.0f64..50.0, t2 in 0.0f64..50.0) {
            prop_assume!(t1 != t2);
            prop_assert!(joint_density(&p, pt(t1, t2)).unwrap().value > 0.0);
        }

        #[test]
        fn increment_within_bound(p in sym_params(), t in 0.0f64..100.0) {
            for firm in [FirmId::B, FirmId::C] {
                let s = survival_increment_and_bound(&p, firm, t).unwrap();
                prop_assert!(s.increment >= 0.0);
                prop_assert!(s.increment <= s.bound);
            }
        }
    }
}
