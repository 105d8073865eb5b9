//! Deterministic integration of the joint density, used to cross-check the
//! closed forms.
//!
//! Everything here integrates [`joint_density`] numerically; nothing reuses
//! the survival or pricing formulas. Integration regions are always split on
//! the diagonal `t1 = t2`, where the density may jump, and infinite ranges
//! are truncated at a point past which the density's mass is certified to be
//! below `tail_epsilon`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::closed_form::{joint_density, joint_survival, EvaluationPoint};
use crate::error::{Error, Result};
use crate::model::SymmetricCompetitorParams;
use crate::pricing::SwapSchedule;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub tail_epsilon: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> Default for QuadConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-9),
            tail_epsilon: T::lit(1e-12),
            max_subdivisions: 100_000,
        }
    }
}

impl<T: Scalar> QuadConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.abs_tol > T::zero()) {
            bad.push("abs_tol > 0".to_owned());
        }
        if !(self.rel_tol > T::zero()) {
            bad.push("rel_tol > 0".to_owned());
        }
        if !(self.tail_epsilon > T::zero()) {
            bad.push("tail_epsilon > 0".to_owned());
        }
        if self.max_subdivisions < 100 {
            bad.push("max_subdivisions >= 100".to_owned());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join(", ")))
        }
    }
}

/// Integral value with an estimated absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadEstimate<T> {
    pub value: T,
    pub error: T,
}

impl<T: Scalar> QuadEstimate<T> {
    pub fn zero() -> Self {
        Self {
            value: T::zero(),
            error: T::zero(),
        }
    }
}

impl<T: Scalar> std::ops::Add for QuadEstimate<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule, digits as tabulated.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    roundoff: T,
}

impl<T: Scalar> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Panel<T> {}
impl<T: Scalar> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .as_f64()
            .total_cmp(&other.error.as_f64())
            .then_with(|| other.a.as_f64().total_cmp(&self.a.as_f64()))
    }
}

fn kronrod_panel<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let center = (a + b) * T::lit(0.5);
    let half = (b - a) * T::lit(0.5);
    let f_center = f(center);
    let mut kronrod = f_center * T::lit(WGK[7]);
    let mut gauss = f_center * T::lit(WG[3]);
    let mut res_abs = kronrod.abs();
    let mut values = [(T::zero(), T::zero()); 7];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half * T::lit(XGK[j]);
        let lo = f(center - dx);
        let hi = f(center + dx);
        *slot = (lo, hi);
        kronrod = kronrod + T::lit(WGK[j]) * (lo + hi);
        res_abs = res_abs + T::lit(WGK[j]) * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * (lo + hi);
        }
    }
    let mean = kronrod * T::lit(0.5);
    let mut res_asc = T::lit(WGK[7]) * (f_center - mean).abs();
    for (j, &(lo, hi)) in values.iter().enumerate() {
        res_asc = res_asc + T::lit(WGK[j]) * ((lo - mean).abs() + (hi - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();

    // QUADPACK error rescaling: |K - G| grossly overstates the Kronrod error
    // on smooth panels.
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != T::zero() && error != T::zero() {
        let scale = (T::lit(200.0) * error / res_asc).powf(T::lit(1.5));
        error = res_asc * scale.min(T::one());
    }
    let roundoff = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        error = error.max(roundoff);
    }
    Panel {
        a,
        b,
        value,
        error,
        roundoff,
    }
}

/// Accuracy request for one adaptive 1-D integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_subdivisions: usize,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`,
/// always bisecting the panel with the largest error estimate.
pub fn integrate<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    tol: Tolerance<T>,
) -> Result<QuadEstimate<T>> {
    if !(b > a) {
        return Ok(QuadEstimate::zero());
    }
    let first = kronrod_panel(&mut f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut roundoff = first.roundoff;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut settled: QuadEstimate<T> = QuadEstimate::zero();
    let mut settled_roundoff = T::zero();
    let mut subdivisions = 0usize;
    loop {
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target || error <= T::lit(2.0) * roundoff {
            // Running totals drift; confirm with exact sums.
            let (v, e, r) = heap
                .iter()
                .fold((T::zero(), T::zero(), T::zero()), |acc, p| {
                    (acc.0 + p.value, acc.1 + p.error, acc.2 + p.roundoff)
                });
            let (v, e, r) = (v + settled.value, e + settled.error, r + settled_roundoff);
            value = v;
            error = e;
            roundoff = r;
            let target = tol.abs.max(tol.rel * value.abs());
            if error <= target || error <= T::lit(2.0) * roundoff {
                return Ok(QuadEstimate { value, error });
            }
        }
        let Some(worst) = heap.pop() else {
            return Ok(QuadEstimate { value, error });
        };
        if subdivisions >= tol.max_subdivisions {
            return Err(Error::QuadratureBudget {
                estimate: value.as_f64(),
                error: error.as_f64(),
            });
        }
        let mid = (worst.a + worst.b) * T::lit(0.5);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in this precision.
            settled.value = settled.value + worst.value;
            settled.error = settled.error + worst.error;
            settled_roundoff = settled_roundoff + worst.roundoff;
            if heap.is_empty() {
                return Ok(QuadEstimate { value, error });
            }
            continue;
        }
        let left = kronrod_panel(&mut f, worst.a, mid);
        let right = kronrod_panel(&mut f, mid, worst.b);
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        roundoff = roundoff - worst.roundoff + left.roundoff + right.roundoff;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// [`integrate`] over consecutive segments between sorted `breakpoints`,
/// sharing the absolute tolerance between the segments.
pub fn integrate_segments<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    breakpoints: &[T],
    tol: Tolerance<T>,
) -> Result<QuadEstimate<T>> {
    let segments = breakpoints.len().saturating_sub(1).max(1);
    let share = Tolerance {
        abs: tol.abs / T::count(segments),
        ..tol
    };
    breakpoints
        .windows(2)
        .try_fold(QuadEstimate::zero(), |acc, w| {
            Ok(acc + integrate(&mut f, w[0], w[1], share)?)
        })
}

/// Certified bound on the density mass outside `[0, l]^2`.
///
/// Off the diagonal the density is at most
/// `b0 c0 (1 + m |t1 - t2|) e^{-b0 t1 - c0 t2}` with `m = max(b, c)`;
/// integrating that envelope over `{t1 > l}` and `{t2 > l}` gives the bound.
pub fn tail_mass_bound<T: Scalar>(params: &SymmetricCompetitorParams<T>, l: T) -> T {
    let (b0, c0) = (params.base_b, params.base_c);
    let m = params.atten_b.max(params.atten_c);
    let poly = T::one() + m * (l + T::one() / b0 + T::one() / c0);
    ((-b0 * l).exp() + (-c0 * l).exp()) * poly
}

/// Smallest truncation point (to bisection accuracy) whose tail bound is below `eps`.
pub fn truncation_point<T: Scalar>(params: &SymmetricCompetitorParams<T>, eps: T) -> T {
    let mut hi = T::one();
    while tail_mass_bound(params, hi) >= eps {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return hi;
        }
    }
    let mut lo = hi * T::lit(0.5);
    if tail_mass_bound(params, lo) < eps {
        return lo;
    }
    for _ in 0..60 {
        let mid = (lo + hi) * T::lit(0.5);
        if tail_mass_bound(params, mid) < eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn density<T: Scalar>(params: &SymmetricCompetitorParams<T>, t1: T, t2: T) -> T {
    joint_density(params, EvaluationPoint::new(t1, t2))
        .map(|d| d.value)
        .unwrap_or_else(|_| T::nan())
}

/// `int_{lower}^{l} f(x, u) dx` with a breakpoint on the diagonal `x = u`.
fn inner_in_t1<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    lower: T,
    u: T,
    l: T,
    tol: Tolerance<T>,
) -> Result<QuadEstimate<T>> {
    if lower >= l {
        return Ok(QuadEstimate::zero());
    }
    let f = |x: T| density(params, x, u);
    if u > lower && u < l {
        integrate_segments(f, &[lower, u, l], tol)
    } else {
        integrate(f, lower, l, tol)
    }
}

/// Iterated integral `int_{outer} g(u) * inner(u) du`, tracking the worst
/// inner error so the reported bound covers both levels.
fn iterated<T: Scalar, W, L>(
    params: &SymmetricCompetitorParams<T>,
    outer_breaks: &[T],
    l: T,
    cfg: &QuadConfig<T>,
    weight: W,
    inner_lower: L,
) -> Result<QuadEstimate<T>>
where
    W: Fn(T) -> T,
    L: Fn(T) -> T,
{
    let span = (outer_breaks[outer_breaks.len() - 1] - outer_breaks[0]).max(T::one());
    let inner_tol = Tolerance {
        abs: cfg.abs_tol * T::lit(0.5) / span,
        rel: cfg.rel_tol * T::lit(0.1),
        max_subdivisions: cfg.max_subdivisions,
    };
    let outer_tol = Tolerance {
        abs: cfg.abs_tol * T::lit(0.5),
        rel: cfg.rel_tol,
        max_subdivisions: cfg.max_subdivisions,
    };
    let mut worst_inner = T::zero();
    let mut failure = None;
    let outer = integrate_segments(
        |u| {
            let w = weight(u);
            if w == T::zero() {
                return T::zero();
            }
            match inner_in_t1(params, inner_lower(u), u, l, inner_tol) {
                Ok(est) => {
                    worst_inner = worst_inner.max(est.error * w.abs());
                    w * est.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    T::nan()
                }
            }
        },
        outer_breaks,
        outer_tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(QuadEstimate {
        value: outer.value,
        error: outer.error + worst_inner * span + tail_mass_bound(params, l),
    })
}

/// `P(tau_B > t1, tau_C > t2)` by integrating the density over `[t1, inf) x [t2, inf)`.
pub fn survival_from_density<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    p: EvaluationPoint<T>,
    cfg: &QuadConfig<T>,
) -> Result<QuadEstimate<T>> {
    params.validate()?;
    p.check()?;
    cfg.validate()?;
    let l = truncation_point(params, cfg.tail_epsilon);
    survival_over_box(params, p, l, cfg)
}

/// Integral over `[t1, l] x [t2, l]`; exposed for truncation checks.
pub fn survival_over_box<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    p: EvaluationPoint<T>,
    l: T,
    cfg: &QuadConfig<T>,
) -> Result<QuadEstimate<T>> {
    if p.t1 >= l || p.t2 >= l {
        return Ok(QuadEstimate {
            value: T::zero(),
            error: tail_mass_bound(params, l),
        });
    }
    let mut breaks = vec![p.t2];
    if p.t1 > p.t2 {
        breaks.push(p.t1);
    }
    breaks.push(l);
    let t1 = p.t1;
    iterated(params, &breaks, l, cfg, |_| T::one(), |_| t1)
}

/// Quadrature values of the protection leg and each per-period accrual term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegIntegrals<T> {
    pub protection: QuadEstimate<T>,
    pub accrual_terms: Vec<QuadEstimate<T>>,
}

impl<T: Scalar> LegIntegrals<T> {
    pub fn accrual_sum(&self) -> QuadEstimate<T> {
        self.accrual_terms
            .iter()
            .fold(QuadEstimate::zero(), |acc, &t| acc + t)
    }
}

pub fn leg_integrals<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
    cfg: &QuadConfig<T>,
) -> Result<LegIntegrals<T>> {
    params.validate()?;
    cfg.validate()?;
    let l = truncation_point(params, cfg.tail_epsilon).max(sched.simulation_horizon());
    let (r, delta) = (sched.rate, sched.settlement_lag);

    let protection = iterated(
        params,
        &[T::zero(), sched.maturity],
        l,
        cfg,
        |u| (-r * (u + delta)).exp(),
        |u| u + delta,
    )?;

    let accrual_terms = (1..=sched.n_payments)
        .map(|i| {
            let (start, end) = (sched.date(i - 1), sched.date(i));
            let dt = sched.interval;
            iterated(
                params,
                &[start, end],
                l,
                cfg,
                |u| (-r * u).exp() * (u - start) / dt,
                |u| u,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LegIntegrals {
        protection,
        accrual_terms,
    })
}

/// `sum_i e^{-r T_i} P(tau_B > T_i, tau_C > T_i)` with each survival from the density.
pub fn annuity_from_density<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    sched: &SwapSchedule<T>,
    cfg: &QuadConfig<T>,
) -> Result<QuadEstimate<T>> {
    sched
        .payment_dates
        .iter()
        .try_fold(QuadEstimate::zero(), |acc, &t| {
            let s = survival_from_density(params, EvaluationPoint::new(t, t), cfg)?;
            let d = (-sched.rate * t).exp();
            Ok(acc
                + QuadEstimate {
                    value: d * s.value,
                    error: d * s.error,
                })
        })
}

/// Central four-point mixed difference of the joint survival function.
pub fn mixed_partial<T: Scalar>(
    params: &SymmetricCompetitorParams<T>,
    p: EvaluationPoint<T>,
    h: T,
) -> Result<T> {
    let two_h = h + h;
    if (p.t1 - p.t2).abs() < two_h {
        return Err(Error::NearDiagonal {
            t1: p.t1.as_f64(),
            t2: p.t2.as_f64(),
            min_gap: two_h.as_f64(),
        });
    }
    let s = |a: T, b: T| joint_survival(params, EvaluationPoint::new(a, b));
    let (t1, t2) = (p.t1, p.t2);
    let num = s(t1 + h, t2 + h)? - s(t1 + h, t2 - h)? - s(t1 - h, t2 + h)? + s(t1 - h, t2 - h)?;
    Ok(num / (T::lit(4.0) * h * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(abs: f64) -> Tolerance<f64> {
        Tolerance {
            abs,
            rel: 1e-14,
            max_subdivisions: 1000,
        }
    }

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x: f64| 3.0 * x * x, 0.0, 2.0, tol(1e-14)).unwrap();
        assert!((v.value - 8.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_and_kink() {
        let v = integrate(|x: f64| (-x).exp(), 0.0, 40.0, tol(1e-14)).unwrap();
        assert!((v.value - (1.0 - (-40.0f64).exp())).abs() < 1e-14);
        let k = integrate_segments(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], tol(1e-14)).unwrap();
        assert!((k.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(
            integrate(|x: f64| x, 1.0, 1.0, tol(1e-10)).unwrap().value,
            0.0
        );
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let t = Tolerance {
            abs: 1e-15,
            rel: 1e-15,
            max_subdivisions: 3,
        };
        match integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, t) {
            Err(Error::QuadratureBudget { estimate, error }) => {
                assert!(estimate.is_finite() && error > 0.0);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(QuadConfig::<f64>::default().validate().is_ok());
        let bad = QuadConfig {
            max_subdivisions: 10,
            ..QuadConfig::<f64>::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn truncation_point_meets_epsilon() {
        let p = SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.1);
        let l = truncation_point(&p, 1e-12);
        assert!(tail_mass_bound(&p, l) < 1e-12);
        assert!(tail_mass_bound(&p, l * 0.99) >= 1e-12);
    }

    #[test]
    fn mixed_partial_rejects_diagonal() {
        let p = SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.1);
        let e = mixed_partial(&p, EvaluationPoint::new(1.0, 1.0001), 1e-4);
        assert!(matches!(e, Err(Error::NearDiagonal { .. })));
    }

    fn p0() -> SymmetricCompetitorParams<f64> {
        SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.1)
    }

    #[test]
    fn total_mass_is_one() {
        let v = survival_from_density(
            &p0(),
            EvaluationPoint::new(0.0, 0.0),
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((v.value - 1.0).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn diagonal_survival_is_first_default_tail() {
        let t = 2.5;
        let v = survival_from_density(&p0(), EvaluationPoint::new(t, t), &QuadConfig::default())
            .unwrap();
        assert!((v.value - (-0.3f64 * t).exp()).abs() < 1e-9);
    }

    #[test]
    fn matches_closed_form_off_diagonal() {
        let cfg = QuadConfig::default();
        for (t1, t2) in [(1.0, 2.0), (2.0, 1.0), (0.0, 3.0), (4.0, 0.0)] {
            let p = EvaluationPoint::new(t1, t2);
            let q = survival_from_density(&p0(), p, &cfg).unwrap();
            let cf = joint_survival(&p0(), p).unwrap();
            assert!(
                (q.value - cf).abs() < 1e-8,
                "{t1} {t2}: {} vs {cf}",
                q.value
            );
            assert!(q.error < 1e-8);
        }
    }

    #[test]
    fn legs_match_closed_forms() {
        use crate::pricing::{accrual_term, build_schedule, protection_leg};
        let s = build_schedule(5.0, 0.25, 0.1, 0.05).unwrap();
        let legs = leg_integrals(&p0(), &s, &QuadConfig::default()).unwrap();
        let prot = protection_leg(&p0(), &s).unwrap();
        assert!((legs.protection.value - prot).abs() <= 1e-8 * prot);
        for (i, q) in legs.accrual_terms.iter().enumerate() {
            let cf = accrual_term(&p0(), &s, i + 1).unwrap();
            assert!((q.value - cf).abs() <= 1e-8 * cf, "term {}", i + 1);
        }
    }

    #[test]
    fn protection_vanishes_without_competitor_risk() {
        use crate::pricing::build_schedule;
        let p = SymmetricCompetitorParams::new(0.1f64, 1e-12, 0.05, 0.0);
        let s = build_schedule(1.0, 0.25, 0.0, 0.0).unwrap();
        let legs = leg_integrals(&p, &s, &QuadConfig::default()).unwrap();
        assert!(legs.protection.value.abs() < 1e-10);
    }

    #[test]
    fn mixed_partial_recovers_density() {
        for (t1, t2) in [(1.5, 0.5), (0.5, 1.5)] {
            let p = EvaluationPoint::new(t1, t2);
            let d = joint_density(&p0(), p).unwrap().value;
            let fd = mixed_partial(&p0(), p, 1e-4).unwrap();
            assert!(((fd - d) / d).abs() < 1e-4);
            // second-order scheme: halving h quarters the error
            let e1 = (mixed_partial(&p0(), p, 0.1).unwrap() - d).abs();
            let e2 = (mixed_partial(&p0(), p, 0.05).unwrap() - d).abs();
            assert!((e1 / e2 - 4.0).abs() < 0.2, "ratio {}", e1 / e2);
        }
    }

    #[test]
    fn box_regions_are_additive() {
        let cfg = QuadConfig::default();
        let l = truncation_point(&p0(), 1e-12);
        let whole = survival_over_box(&p0(), EvaluationPoint::new(1.0, 1.0), l, &cfg).unwrap();
        let a = survival_over_box(&p0(), EvaluationPoint::new(2.0, 1.0), l, &cfg).unwrap();
        let b = survival_over_box(&p0(), EvaluationPoint::new(1.0, 2.0), l, &cfg).unwrap();
        let c = survival_over_box(&p0(), EvaluationPoint::new(2.0, 2.0), l, &cfg).unwrap();
        // [1,l]^2 minus the strip pieces equals [1,2]^2
        let square = whole.value - a.value - b.value + c.value;
        let direct = joint_survival(&p0(), EvaluationPoint::new(1.0, 1.0)).unwrap()
            - joint_survival(&p0(), EvaluationPoint::new(2.0, 1.0)).unwrap()
            - joint_survival(&p0(), EvaluationPoint::new(1.0, 2.0)).unwrap()
            + joint_survival(&p0(), EvaluationPoint::new(2.0, 2.0)).unwrap();
        assert!((square - direct).abs() < 1e-9);
    }

    #[test]
    fn truncated_mass_within_certificate() {
        let cfg = QuadConfig::default();
        for l in [20.0, 40.0, 80.0] {
            let inside = survival_over_box(&p0(), EvaluationPoint::new(0.0, 0.0), l, &cfg).unwrap();
            let missing = 1.0 - inside.value;
            assert!(missing >= -1e-9 && missing <= tail_mass_bound(&p0(), l) + 1e-9);
        }
    }

    #[test]
    fn refinement_converges() {
        let p = EvaluationPoint::new(1.0, 2.0);
        let cf = joint_survival(&p0(), p).unwrap();
        let mut last = f64::INFINITY;
        for abs_tol in [1e-4, 1e-7, 1e-10] {
            let cfg = QuadConfig {
                abs_tol,
                rel_tol: abs_tol,
                ..QuadConfig::default()
            };
            let err = (survival_from_density(&p0(), p, &cfg).unwrap().value - cf).abs();
            assert!(err <= abs_tol.max(1e-12) && err <= last.max(1e-13));
            last = err;
        }
    }
}
