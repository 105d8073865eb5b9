//! Three-way comparison of closed forms, density quadrature and simulation.
//!
//! Each row pairs a closed-form value with its quadrature value (agreement
//! within a pinned tolerance) and with a Monte Carlo estimate (agreement
//! within [`MAX_Z_SCORE`] standard errors). Condensed-accrual quantities are
//! not expectations of any payoff, so they are reported beside the rows and
//! never gate the outcome.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{joint_survival, marginal_survival, EvaluationPoint};
use crate::error::Result;
use crate::mc_oracle::{Estimate, PathSample, RandomSource};
use crate::model::{FirmId, SymmetricCompetitorParams};
use crate::pricing::{
    accrual_factor, accrual_term, annuity_factor, build_schedule, premium_upper_bound,
    protection_leg, swap_premium, AccrualMode, SwapSchedule,
};
use crate::quadrature::{annuity_from_density, leg_integrals, survival_from_density, QuadConfig};

/// Absolute closed-form vs quadrature tolerance for probabilities.
pub const PROBABILITY_ABS_TOL: f64 = 1e-8;
/// Relative closed-form vs quadrature tolerance for pricing quantities.
pub const LEG_REL_TOL: f64 = 1e-8;
/// Largest accepted `|closed form - MC mean| / stderr`.
pub const MAX_Z_SCORE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    pub paths: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Never changes results.
    pub workers: Option<usize>,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            paths: 1_000_000,
            seed: 42,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub name: String,
    pub closed_form: f64,
    pub quadrature: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub abs_diff_cf_quad: f64,
    pub z_score_cf_mc: f64,
    /// Absolute closed-form vs quadrature tolerance applied to this row.
    pub tolerance: f64,
    pub pass: bool,
}

impl ValidationRow {
    fn new(
        name: String,
        closed_form: f64,
        quadrature: f64,
        mc: Estimate<f64>,
        tolerance: f64,
    ) -> Self {
        let abs_diff = (closed_form - quadrature).abs();
        let z = mc.z_score(closed_form);
        Self {
            name,
            closed_form,
            quadrature,
            mc_mean: mc.mean,
            mc_stderr: mc.stderr,
            abs_diff_cf_quad: abs_diff,
            z_score_cf_mc: z,
            tolerance,
            pass: abs_diff <= tolerance && z.abs() <= MAX_Z_SCORE,
        }
    }
}

/// Condensed-mode premium against its upper bound at one `(b, delta, T)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub atten_b: f64,
    pub settlement_lag: f64,
    pub maturity: f64,
    pub premium_paper: f64,
    pub premium_summed: f64,
    pub bound: f64,
    pub paper_within_bound: bool,
    pub summed_within_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEcho {
    pub maturity: f64,
    pub interval: f64,
    pub n_payments: usize,
    pub settlement_lag: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub params: SymmetricCompetitorParams<f64>,
    pub schedule: ScheduleEcho,
    pub paths: usize,
    pub seed: u64,
    pub rows: Vec<ValidationRow>,
    pub accrual_summed: f64,
    pub accrual_condensed: f64,
    /// Summed accrual factor over the condensed one.
    pub accrual_ratio: f64,
    /// `1 - e^{-beta T}`, the predicted value of `accrual_ratio`.
    pub one_minus_exp_beta_t: f64,
    pub premium_summed: f64,
    pub premium_paper: f64,
    pub premium_bound: f64,
    pub bound_grid: Vec<BoundCheck>,
    pub all_pass: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &ValidationRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

/// Points `(2k + 1) T / 10`, `k = 0..5`.
pub fn survival_grid(maturity: f64) -> Vec<f64> {
    (0..5)
        .map(|k| (2 * k + 1) as f64 * maturity / 10.0)
        .collect()
}

/// Points `k T / 5`, `k = 1..=5`.
pub fn marginal_grid(maturity: f64) -> Vec<f64> {
    (1..=5).map(|k| k as f64 * maturity / 5.0).collect()
}

pub fn run_validation(
    params: &SymmetricCompetitorParams<f64>,
    sched: &SwapSchedule<f64>,
    mc: McSettings,
    quad: &QuadConfig<f64>,
) -> Result<ValidationReport> {
    params.validate()?;
    quad.validate()?;
    let sample = PathSample::simulate(
        &params.to_general(),
        sched.simulation_horizon(),
        mc.paths,
        RandomSource::new(mc.seed, 0),
        mc.workers,
    )?;

    let mut rows = Vec::new();

    let grid = survival_grid(sched.maturity);
    let points: Vec<_> = grid
        .iter()
        .flat_map(|&t1| grid.iter().map(move |&t2| EvaluationPoint::new(t1, t2)))
        .collect();
    let quad_survival = points
        .par_iter()
        .map(|&p| survival_from_density(params, p, quad))
        .collect::<Result<Vec<_>>>()?;
    for (p, q) in points.iter().zip(&quad_survival) {
        rows.push(ValidationRow::new(
            format!("joint_survival({}, {})", p.t1, p.t2),
            joint_survival(params, *p)?,
            q.value,
            sample.joint_survival(*p)?,
            PROBABILITY_ABS_TOL,
        ));
    }

    for firm in [FirmId::B, FirmId::C] {
        let mgrid = marginal_grid(sched.maturity);
        let quad_marginal = mgrid
            .par_iter()
            .map(|&t| {
                let p = match firm {
                    FirmId::B => EvaluationPoint::new(t, 0.0),
                    FirmId::C => EvaluationPoint::new(0.0, t),
                };
                survival_from_density(params, p, quad)
            })
            .collect::<Result<Vec<_>>>()?;
        for (&t, q) in mgrid.iter().zip(&quad_marginal) {
            let label = match firm {
                FirmId::B => "marginal_b",
                FirmId::C => "marginal_c",
            };
            rows.push(ValidationRow::new(
                format!("{label}({t})"),
                marginal_survival(params, firm, t)?,
                q.value,
                sample.marginal_survival(firm, t)?,
                PROBABILITY_ABS_TOL,
            ));
        }
    }

    let legs_mc = sample.legs(sched)?;
    let terms_mc = sample.accrual_terms(sched)?;
    let legs_q = leg_integrals(params, sched, quad)?;
    let annuity_q = annuity_from_density(params, sched, quad)?;
    let rel = |x: f64| LEG_REL_TOL * x.abs();

    let annuity = annuity_factor(params, sched)?;
    rows.push(ValidationRow::new(
        "annuity".to_owned(),
        annuity,
        annuity_q.value,
        legs_mc.annuity,
        rel(annuity),
    ));
    let protection = protection_leg(params, sched)?;
    rows.push(ValidationRow::new(
        "protection".to_owned(),
        protection,
        legs_q.protection.value,
        legs_mc.protection,
        rel(protection),
    ));
    for (i, (q, m)) in legs_q.accrual_terms.iter().zip(&terms_mc).enumerate() {
        let cf = accrual_term(params, sched, i + 1)?;
        rows.push(ValidationRow::new(
            format!("accrual_term({})", i + 1),
            cf,
            q.value,
            *m,
            rel(cf),
        ));
    }
    let accrual_summed = accrual_factor(params, sched, AccrualMode::SummedPerPeriod)?;
    let accrual_q = legs_q.accrual_sum().value;
    rows.push(ValidationRow::new(
        "accrual_factor_summed".to_owned(),
        accrual_summed,
        accrual_q,
        legs_mc.accrual,
        rel(accrual_summed),
    ));
    let summed = swap_premium(params, sched, AccrualMode::SummedPerPeriod)?;
    let premium_q = legs_q.protection.value / (annuity_q.value + accrual_q);
    rows.push(ValidationRow::new(
        "premium_summed".to_owned(),
        summed.premium,
        premium_q,
        legs_mc.premium()?,
        rel(summed.premium),
    ));

    let paper = swap_premium(params, sched, AccrualMode::PaperCondensed)?;
    let beta = summed.beta;
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(ValidationReport {
        params: *params,
        schedule: ScheduleEcho {
            maturity: sched.maturity,
            interval: sched.interval,
            n_payments: sched.n_payments,
            settlement_lag: sched.settlement_lag,
            rate: sched.rate,
        },
        paths: mc.paths,
        seed: mc.seed,
        rows,
        accrual_summed,
        accrual_condensed: paper.accrual_condensed,
        accrual_ratio: accrual_summed / paper.accrual_condensed,
        one_minus_exp_beta_t: -(-beta * sched.maturity).exp_m1(),
        premium_summed: summed.premium,
        premium_paper: paper.premium,
        premium_bound: premium_upper_bound(params, sched)?,
        bound_grid: bound_grid(params, sched)?,
        all_pass,
    })
}

/// Condensed premium vs its bound on `b in {1/4, 1/2, 3/4} b0`,
/// `delta in {0, 0.1, 0.5}`, `T in {4, 20, 40} dT`.
pub fn bound_grid(
    params: &SymmetricCompetitorParams<f64>,
    sched: &SwapSchedule<f64>,
) -> Result<Vec<BoundCheck>> {
    let mut out = Vec::with_capacity(27);
    for frac in [0.25, 0.5, 0.75] {
        let p = SymmetricCompetitorParams {
            atten_b: frac * params.base_b,
            ..*params
        };
        for delta in [0.0, 0.1, 0.5] {
            for periods in [4.0, 20.0, 40.0] {
                let s =
                    build_schedule(periods * sched.interval, sched.interval, delta, sched.rate)?;
                let paper = swap_premium(&p, &s, AccrualMode::PaperCondensed)?.premium;
                let summed = swap_premium(&p, &s, AccrualMode::SummedPerPeriod)?.premium;
                let bound = premium_upper_bound(&p, &s)?;
                out.push(BoundCheck {
                    atten_b: p.atten_b,
                    settlement_lag: delta,
                    maturity: s.maturity,
                    premium_paper: paper,
                    premium_summed: summed,
                    bound,
                    paper_within_bound: paper <= bound,
                    summed_within_bound: summed <= bound,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(survival_grid(5.0), vec![0.5, 1.5, 2.5, 3.5, 4.5]);
        assert_eq!(marginal_grid(5.0), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn row_pass_logic() {
        let mc = Estimate::new(0.5, 0.01, 100);
        assert!(ValidationRow::new("a".into(), 0.5, 0.5, mc, 1e-8).pass);
        assert!(!ValidationRow::new("b".into(), 0.5, 0.5 + 1e-7, mc, 1e-8).pass);
        assert!(!ValidationRow::new("c".into(), 0.45, 0.45, mc, 1e-8).pass);
    }

    #[test]
    fn bound_grid_shape() {
        let p = SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.1);
        let s = build_schedule(5.0, 0.25, 0.1, 0.05).unwrap();
        let g = bound_grid(&p, &s).unwrap();
        assert_eq!(g.len(), 27);
        assert!(g.iter().all(|c| c.paper_within_bound));
    }
}
