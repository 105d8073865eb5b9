use contagion_core::mc_oracle::LegEstimates;
use contagion_core::validation::{ScheduleEcho, ValidationReport};
use contagion_core::{
    joint_density, joint_survival, marginal_survival, run_validation, survival_increment_and_bound,
    swap_premium, AccrualMode, ContagionParams, Estimate, EvaluationPoint, FirmId, McSettings,
    PathSample, PricingBreakdown, RandomSource, SwapSchedule, SymmetricCompetitorParams,
};
use serde::Serialize;

use crate::cli::{GridArgs, SweepArgs};
use crate::config::{schedule_from, ConfigError, Format, ModelConfig, ScheduleConfig, Settings};
use crate::output::{json, num, sig6, Csv};

/// Why a command stopped early; selects the exit code.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<contagion_core::Error> for Failure {
    fn from(e: contagion_core::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

/// Rendered output plus whether the run passed.
pub struct Rendered {
    pub text: String,
    pub summary: String,
    pub pass: bool,
}

fn echo(s: &SwapSchedule) -> ScheduleEcho {
    ScheduleEcho {
        maturity: s.maturity,
        interval: s.interval,
        n_payments: s.n_payments,
        settlement_lag: s.settlement_lag,
        rate: s.rate,
    }
}

#[derive(Debug, Serialize)]
struct PriceOutput {
    params: SymmetricCompetitorParams,
    schedule: ScheduleEcho,
    accrual: AccrualMode,
    premium: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    annualized_premium: Option<f64>,
    summed: PricingBreakdown,
    paper: PricingBreakdown,
}

pub fn price(settings: &Settings) -> Result<Rendered, Failure> {
    let params = settings.config.model.symmetric()?;
    let sched = settings.schedule()?;
    let summed = swap_premium(&params, &sched, AccrualMode::SummedPerPeriod)?;
    let paper = swap_premium(&params, &sched, AccrualMode::PaperCondensed)?;
    let selected = match settings.accrual {
        AccrualMode::SummedPerPeriod => summed,
        AccrualMode::PaperCondensed => paper,
    };
    let annualized = settings
        .annualized
        .then(|| selected.annualized(sched.interval));
    let out = PriceOutput {
        params,
        schedule: echo(&sched),
        accrual: settings.accrual,
        premium: selected.premium,
        annualized_premium: annualized,
        summed,
        paper,
    };

    let mut pairs = vec![
        ("beta", summed.beta),
        ("annuity", summed.annuity),
        ("protection", summed.protection),
        ("accrual_summed", summed.accrual_summed),
        ("accrual_condensed", summed.accrual_condensed),
        ("premium_summed", summed.premium),
        ("premium_paper", paper.premium),
        ("premium", selected.premium),
    ];
    if let Some(a) = annualized {
        pairs.push(("annualized_premium", a));
    }
    let text = match settings.format_or(Format::Json) {
        Format::Json => json(&out),
        Format::Csv => {
            let mut csv = Csv::new(&["quantity", "value"]);
            for (k, v) in &pairs {
                csv.row([k.to_string(), num(*v)]);
            }
            csv.into_string()
        }
    };
    let summary = pairs
        .iter()
        .map(|(k, v)| format!("{k:<20} {}\n", sig6(*v)))
        .collect();
    Ok(Rendered {
        text,
        summary,
        pass: true,
    })
}

#[derive(Debug, Serialize)]
struct CurveRow {
    t1: f64,
    t2: f64,
    joint_survival: f64,
    /// `None` on the diagonal, where the density is discontinuous.
    joint_density: Option<f64>,
    marginal_b: f64,
    marginal_c: f64,
    increment_b: f64,
    bound_b: f64,
    increment_c: f64,
    bound_c: f64,
}

fn grid(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>, ConfigError> {
    if steps == 0 {
        return Err(ConfigError("grid needs at least one step".into()));
    }
    let ordered = t_min >= 0.0 && t_max >= t_min && t_max.is_finite();
    if !ordered {
        return Err(ConfigError(format!(
            "grid needs 0 <= t_min <= t_max, got [{t_min}, {t_max}]"
        )));
    }
    if steps == 1 {
        return Ok(vec![t_min]);
    }
    let h = (t_max - t_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                t_max
            } else {
                t_min + k as f64 * h
            }
        })
        .collect())
}

pub fn curves(settings: &Settings, args: &GridArgs) -> Result<Rendered, Failure> {
    let params = settings.config.model.symmetric()?;
    let ts = grid(args.t_min, args.t_max, args.steps)?;
    let mut rows = Vec::with_capacity(ts.len() * ts.len());
    for &t1 in &ts {
        for &t2 in &ts {
            let p = EvaluationPoint::new(t1, t2);
            let d = joint_density(&params, p)?;
            let ib = survival_increment_and_bound(&params, FirmId::B, t1)?;
            let ic = survival_increment_and_bound(&params, FirmId::C, t2)?;
            rows.push(CurveRow {
                t1,
                t2,
                joint_survival: joint_survival(&params, p)?,
                joint_density: (!d.on_diagonal).then_some(d.value),
                marginal_b: marginal_survival(&params, FirmId::B, t1)?,
                marginal_c: marginal_survival(&params, FirmId::C, t2)?,
                increment_b: ib.increment,
                bound_b: ib.bound,
                increment_c: ic.increment,
                bound_c: ic.bound,
            });
        }
    }
    let text = match settings.format_or(Format::Csv) {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "t1",
                "t2",
                "joint_survival",
                "joint_density",
                "marginal_b",
                "marginal_c",
                "increment_b",
                "bound_b",
                "increment_c",
                "bound_c",
            ]);
            for r in &rows {
                csv.row([
                    num(r.t1),
                    num(r.t2),
                    num(r.joint_survival),
                    r.joint_density.map(num).unwrap_or_default(),
                    num(r.marginal_b),
                    num(r.marginal_c),
                    num(r.increment_b),
                    num(r.bound_b),
                    num(r.increment_c),
                    num(r.bound_c),
                ]);
            }
            csv.into_string()
        }
    };
    let diagonal = rows.iter().filter(|r| r.joint_density.is_none()).count();
    Ok(Rendered {
        text,
        summary: format!("{} grid points, {diagonal} on the diagonal\n", rows.len()),
        pass: true,
    })
}

#[derive(Debug, Serialize)]
struct CurveEstimate {
    t: f64,
    joint_survival: Estimate,
    marginal_b: Estimate,
    marginal_c: Estimate,
}

#[derive(Debug, Serialize)]
struct SimulateOutput {
    model: ModelConfig,
    schedule: ScheduleEcho,
    paths: usize,
    seed: u64,
    horizon: f64,
    legs: LegEstimates<f64>,
    premium: Estimate,
    curve: Vec<CurveEstimate>,
}

pub fn simulate(settings: &Settings) -> Result<Rendered, Failure> {
    let model = settings.config.model;
    let params: ContagionParams = model.general();
    let sched = settings.schedule()?;
    let mc = settings.config.mc;
    let horizon = sched.simulation_horizon();
    let sample = PathSample::simulate(
        &params,
        horizon,
        mc.paths,
        RandomSource::new(mc.seed, 0),
        settings.workers,
    )?;
    let legs = sample.legs(&sched)?;
    let premium = legs.premium()?;
    let curve = sched
        .payment_dates
        .iter()
        .map(|&t| {
            Ok(CurveEstimate {
                t,
                joint_survival: sample.joint_survival(EvaluationPoint::new(t, t))?,
                marginal_b: sample.marginal_survival(FirmId::B, t)?,
                marginal_c: sample.marginal_survival(FirmId::C, t)?,
            })
        })
        .collect::<Result<Vec<_>, contagion_core::Error>>()?;
    let out = SimulateOutput {
        model,
        schedule: echo(&sched),
        paths: mc.paths,
        seed: mc.seed,
        horizon,
        legs,
        premium,
        curve,
    };

    let text = match settings.format_or(Format::Json) {
        Format::Json => json(&out),
        Format::Csv => {
            let mut csv = Csv::new(&["quantity", "t", "mean", "stderr", "ci_low", "ci_high"]);
            let mut push = |name: &str, t: Option<f64>, e: &Estimate| {
                csv.row([
                    name.to_string(),
                    t.map(num).unwrap_or_default(),
                    num(e.mean),
                    num(e.stderr),
                    num(e.ci_low),
                    num(e.ci_high),
                ]);
            };
            push("annuity", None, &out.legs.annuity);
            push("protection", None, &out.legs.protection);
            push("accrual", None, &out.legs.accrual);
            push("premium", None, &out.premium);
            for c in &out.curve {
                push("joint_survival", Some(c.t), &c.joint_survival);
                push("marginal_b", Some(c.t), &c.marginal_b);
                push("marginal_c", Some(c.t), &c.marginal_c);
            }
            csv.into_string()
        }
    };
    let mut summary = format!("{} paths, seed {}\n", mc.paths, mc.seed);
    for (k, e) in [
        ("annuity", &out.legs.annuity),
        ("protection", &out.legs.protection),
        ("accrual", &out.legs.accrual),
        ("premium", &out.premium),
    ] {
        summary.push_str(&format!("{k:<12} {} ± {}\n", sig6(e.mean), sig6(e.stderr)));
    }
    Ok(Rendered {
        text,
        summary,
        pass: true,
    })
}

pub fn validate(settings: &Settings) -> Result<Rendered, Failure> {
    let params = settings.config.model.symmetric()?;
    let sched = settings.schedule()?;
    let mc = McSettings {
        paths: settings.config.mc.paths,
        seed: settings.config.mc.seed,
        workers: settings.workers,
    };
    let report = run_validation(&params, &sched, mc, &settings.config.quad)?;
    let text = match settings.format_or(Format::Json) {
        Format::Json => json(&report),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "name",
                "closed_form",
                "quadrature",
                "mc_mean",
                "mc_stderr",
                "abs_diff_cf_quad",
                "z_score_cf_mc",
                "tolerance",
                "pass",
            ]);
            for r in &report.rows {
                csv.row([
                    r.name.clone(),
                    num(r.closed_form),
                    num(r.quadrature),
                    num(r.mc_mean),
                    num(r.mc_stderr),
                    num(r.abs_diff_cf_quad),
                    num(r.z_score_cf_mc),
                    num(r.tolerance),
                    r.pass.to_string(),
                ]);
            }
            csv.into_string()
        }
    };
    Ok(Rendered {
        text,
        summary: validation_table(&report),
        pass: report.all_pass,
    })
}

fn validation_table(report: &ValidationReport) -> String {
    let mut s = format!(
        "{:<28} {:>12} {:>12} {:>12} {:>12} {:>8}  pass\n",
        "quantity", "closed form", "|cf - quad|", "mc mean", "mc stderr", "z"
    );
    for r in &report.rows {
        s.push_str(&format!(
            "{:<28} {:>12} {:>12} {:>12} {:>12} {:>8}  {}\n",
            r.name,
            sig6(r.closed_form),
            sig6(r.abs_diff_cf_quad),
            sig6(r.mc_mean),
            sig6(r.mc_stderr),
            sig6(r.z_score_cf_mc),
            if r.pass { "yes" } else { "NO" }
        ));
    }
    let held = report
        .bound_grid
        .iter()
        .filter(|b| b.paper_within_bound)
        .count();
    s.push_str(&format!(
        "accrual_ratio {}  vs  1 - exp(-beta T) {}\n\
         premium summed {}  paper {}  paper bound {}\n\
         paper premium within bound on {held}/{} grid points\n\
         {}\n",
        sig6(report.accrual_ratio),
        sig6(report.one_minus_exp_beta_t),
        sig6(report.premium_summed),
        sig6(report.premium_paper),
        sig6(report.premium_bound),
        report.bound_grid.len(),
        if report.all_pass {
            "all rows pass"
        } else {
            "VALIDATION FAILED"
        }
    ));
    s
}

#[derive(Debug, Serialize)]
struct SweepRow {
    param: String,
    value: f64,
    premium_summed: f64,
    premium_paper: f64,
    protection: f64,
    annuity: f64,
    accrual_summed: f64,
    accrual_condensed: f64,
}

fn with_param(
    params: &SymmetricCompetitorParams,
    sched: &ScheduleConfig,
    name: &str,
    value: f64,
) -> Result<(SymmetricCompetitorParams, ScheduleConfig), ConfigError> {
    let (mut p, mut s) = (*params, *sched);
    match name {
        "b0" => p.base_b = value,
        "c0" => p.base_c = value,
        "b" => p.atten_b = value,
        "c" => p.atten_c = value,
        "r" => s.rate = value,
        "T" | "maturity" => s.maturity = value,
        "dT" | "interval" => s.interval = value,
        "delta" => s.settlement_lag = value,
        other => {
            return Err(ConfigError(format!(
                "unknown sweep parameter {other:?}; expected one of b0, c0, b, c, r, T, dT, delta"
            )))
        }
    }
    p.validate()
        .map_err(|e| ConfigError(format!("{name} = {value}: {e}")))?;
    Ok((p, s))
}

pub fn sweep(settings: &Settings, args: &SweepArgs) -> Result<Rendered, Failure> {
    let params = settings.config.model.symmetric()?;
    if args.steps == 0 {
        return Err(ConfigError("sweep needs at least one step".into()).into());
    }
    let values: Vec<f64> = if args.steps == 1 {
        vec![args.from]
    } else {
        let h = (args.to - args.from) / (args.steps - 1) as f64;
        (0..args.steps)
            .map(|k| {
                if k + 1 == args.steps {
                    args.to
                } else {
                    args.from + k as f64 * h
                }
            })
            .collect()
    };
    let mut rows = Vec::with_capacity(values.len());
    for value in values {
        let (p, s) = with_param(&params, &settings.config.schedule, &args.param, value)?;
        let sched =
            schedule_from(&s).map_err(|e| ConfigError(format!("{} = {value}: {e}", args.param)))?;
        let summed = swap_premium(&p, &sched, AccrualMode::SummedPerPeriod)?;
        let paper = swap_premium(&p, &sched, AccrualMode::PaperCondensed)?;
        rows.push(SweepRow {
            param: args.param.clone(),
            value,
            premium_summed: summed.premium,
            premium_paper: paper.premium,
            protection: summed.protection,
            annuity: summed.annuity,
            accrual_summed: summed.accrual_summed,
            accrual_condensed: summed.accrual_condensed,
        });
    }
    let text = match settings.format_or(Format::Csv) {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "param",
                "value",
                "premium_summed",
                "premium_paper",
                "protection",
                "annuity",
                "accrual_summed",
                "accrual_condensed",
            ]);
            for r in &rows {
                csv.row([
                    r.param.clone(),
                    num(r.value),
                    num(r.premium_summed),
                    num(r.premium_paper),
                    num(r.protection),
                    num(r.annuity),
                    num(r.accrual_summed),
                    num(r.accrual_condensed),
                ]);
            }
            csv.into_string()
        }
    };
    let summary = rows
        .iter()
        .map(|r| {
            format!(
                "{} = {:<10} premium {} (paper {})\n",
                r.param,
                sig6(r.value),
                sig6(r.premium_summed),
                sig6(r.premium_paper)
            )
        })
        .collect();
    Ok(Rendered {
        text,
        summary,
        pass: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(grid(2.0, 3.0, 1).unwrap(), vec![2.0]);
        assert!(grid(0.0, 1.0, 0).is_err());
        assert!(grid(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn sweep_parameter_names() {
        let p = SymmetricCompetitorParams::new(0.1, 0.2, 0.05, 0.1);
        let s = ScheduleConfig::default();
        assert_eq!(
            with_param(&p, &s, "delta", 0.5).unwrap().1.settlement_lag,
            0.5
        );
        assert_eq!(with_param(&p, &s, "b", 0.02).unwrap().0.atten_b, 0.02);
        assert!(with_param(&p, &s, "sigma", 1.0).is_err());
        assert!(with_param(&p, &s, "b", 0.2).is_err());
    }
}
