//! Exact simulation of the two default times and Monte Carlo estimators.
//!
//! Until the first default both intensities are constant, so the first
//! default time is exponential with rate `base_b + base_c` and the defaulter
//! is C with probability `base_c / (base_b + base_c)`. After that the
//! survivor's intensity is a deterministic function of the lag, and its
//! residual lifetime is drawn by inverting its cumulative hazard at a unit
//! exponential. No time stepping, no thinning.
//!
//! Each path draws from its own ChaCha stream keyed by `(seed, stream_id)`
//! and selected by the path index, and reductions run over fixed-size blocks
//! combined in block order. Results are therefore bitwise identical for any
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::EvaluationPoint;
use crate::error::{Error, Result};
use crate::model::{ContagionParams, DefaultTimePair, FirmId};
use crate::pricing::SwapSchedule;
use crate::scalar::Scalar;

/// Paths per reduction block. Fixed so that summation order never depends
/// on the thread count.
pub const BLOCK_SIZE: usize = 4096;

/// Seed and substream selector for a family of per-path generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Generator for path `path`.
    pub fn path_rng(&self, path: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(path);
        rng
    }
}

/// Unit exponential by inversion, `-ln(1 - u)` with `u` in `[0, 1)`.
fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

/// Intermediate draws of one path, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleTrace<T> {
    pub pair: DefaultTimePair<T>,
    pub first_default: T,
    /// `None` when nobody defaulted before the horizon.
    pub first_defaulter: Option<FirmId>,
    /// Unit exponential driving the survivor's residual lifetime.
    pub survivor_draw: T,
    /// Survivor's residual lifetime, `+inf` if beyond the horizon.
    pub survivor_lag: T,
}

/// Draws one `(tau_B, tau_C)` pair; defaults after `horizon` are reported as `+inf`.
pub fn sample_default_times<T: Scalar, R: Rng + ?Sized>(
    params: &ContagionParams<T>,
    horizon: T,
    rng: &mut R,
) -> Result<DefaultTimePair<T>> {
    sample_traced(params, horizon, rng).map(|t| t.pair)
}

pub fn sample_traced<T: Scalar, R: Rng + ?Sized>(
    params: &ContagionParams<T>,
    horizon: T,
    rng: &mut R,
) -> Result<SampleTrace<T>> {
    let total = params.base_b + params.base_c;
    let first = T::lit(unit_exponential(rng)) / total;
    let u: f64 = rng.random();
    let survivor_draw = T::lit(unit_exponential(rng));
    let inf = T::infinity();
    if first > horizon {
        return Ok(SampleTrace {
            pair: DefaultTimePair {
                tau_b: inf,
                tau_c: inf,
            },
            first_default: first,
            first_defaulter: None,
            survivor_draw,
            survivor_lag: inf,
        });
    }
    let defaulter = if T::lit(u) < params.base_c / total {
        FirmId::C
    } else {
        FirmId::B
    };
    let survivor = defaulter.partner();
    let lag = params
        .survivor_hazard(survivor)
        .invert_capped(survivor_draw, horizon - first)?
        .unwrap_or(inf);
    let survivor_time = first + lag;
    let pair = match defaulter {
        FirmId::C => DefaultTimePair {
            tau_b: survivor_time,
            tau_c: first,
        },
        FirmId::B => DefaultTimePair {
            tau_b: first,
            tau_c: survivor_time,
        },
    };
    Ok(SampleTrace {
        pair,
        first_default: first,
        first_defaulter: Some(defaulter),
        survivor_draw,
        survivor_lag: lag,
    })
}

/// Monte Carlo mean with standard error and a `mean ± 3 stderr` interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub mean: T,
    pub stderr: T,
    pub n: usize,
    pub ci_low: T,
    pub ci_high: T,
}

impl<T: Scalar> Estimate<T> {
    pub fn new(mean: T, stderr: T, n: usize) -> Self {
        let half = T::lit(3.0) * stderr;
        Self {
            mean,
            stderr,
            n,
            ci_low: mean - half,
            ci_high: mean + half,
        }
    }

    /// `(mean - reference) / stderr`; zero-variance estimates score 0 on an
    /// exact match and `±inf` otherwise.
    pub fn z_score(&self, reference: T) -> T {
        let diff = self.mean - reference;
        if self.stderr > T::zero() {
            diff / self.stderr
        } else if diff == T::zero() {
            T::zero()
        } else {
            diff.signum() * T::infinity()
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// First and second moments of a fixed-length payoff vector.
#[derive(Debug, Clone, PartialEq)]
struct Moments<T, const K: usize> {
    n: usize,
    sums: [CompensatedSum<T>; K],
    cross: [[CompensatedSum<T>; K]; K],
}

impl<T: Scalar, const K: usize> Moments<T, K> {
    fn new() -> Self {
        Self {
            n: 0,
            sums: [CompensatedSum::new(); K],
            cross: [[CompensatedSum::new(); K]; K],
        }
    }

    fn push(&mut self, x: [T; K]) {
        self.n += 1;
        for k in 0..K {
            self.sums[k].add(x[k]);
            for l in k..K {
                self.cross[k][l].add(x[k] * x[l]);
            }
        }
    }

    fn merge(&mut self, other: &Self) {
        self.n += other.n;
        for k in 0..K {
            self.sums[k].merge(&other.sums[k]);
            for l in k..K {
                self.cross[k][l].merge(&other.cross[k][l]);
            }
        }
    }

    fn mean(&self, k: usize) -> T {
        self.sums[k].value() / T::count(self.n)
    }

    /// Unbiased sample covariance.
    fn covariance(&self, k: usize, l: usize) -> T {
        let (k, l) = if k <= l { (k, l) } else { (l, k) };
        if self.n < 2 {
            return T::zero();
        }
        let n = T::count(self.n);
        let centered = self.cross[k][l].value() - self.sums[k].value() * self.sums[l].value() / n;
        let cov = centered / (n - T::one());
        if k == l {
            cov.max(T::zero())
        } else {
            cov
        }
    }

    fn estimate(&self, k: usize) -> Estimate<T> {
        let se = (self.covariance(k, k) / T::count(self.n.max(1))).sqrt();
        Estimate::new(self.mean(k), se, self.n)
    }
}

/// Runs `f` on a rayon pool with `workers` threads, or on the global pool.
fn with_workers<R: Send, F: FnOnce() -> R + Send>(workers: Option<usize>, f: F) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Simulated default-time pairs for paths `0..n` of one random source.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample<T> {
    pub pairs: Vec<DefaultTimePair<T>>,
    pub horizon: T,
    workers: Option<usize>,
}

impl<T: Scalar> PathSample<T> {
    pub fn simulate(
        params: &ContagionParams<T>,
        horizon: T,
        n: usize,
        source: RandomSource,
        workers: Option<usize>,
    ) -> Result<Self> {
        params.validate()?;
        if !(horizon > T::zero()) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if n == 0 {
            return Err(Error::Config("path count must be at least 1".to_owned()));
        }
        let blocks = n.div_ceil(BLOCK_SIZE);
        let chunks = with_workers(workers, || {
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let start = b * BLOCK_SIZE;
                    let end = (start + BLOCK_SIZE).min(n);
                    (start..end)
                        .map(|i| {
                            let mut rng = source.path_rng(i as u64);
                            sample_default_times(params, horizon, &mut rng)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })??;
        Ok(Self {
            pairs: chunks.into_iter().flatten().collect(),
            horizon,
            workers,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn reduce<const K: usize, F>(&self, payoff: F) -> Result<Moments<T, K>>
    where
        F: Fn(&DefaultTimePair<T>) -> [T; K] + Sync,
    {
        let partials = with_workers(self.workers, || {
            self.pairs
                .par_chunks(BLOCK_SIZE)
                .map(|chunk| {
                    let mut m = Moments::<T, K>::new();
                    for pair in chunk {
                        m.push(payoff(pair));
                    }
                    m
                })
                .collect::<Vec<_>>()
        })?;
        let mut total = Moments::new();
        for m in &partials {
            total.merge(m);
        }
        Ok(total)
    }

    fn bernoulli<F>(&self, event: F) -> Result<Estimate<T>>
    where
        F: Fn(&DefaultTimePair<T>) -> bool + Sync,
    {
        let m = self.reduce(|p| [if event(p) { T::one() } else { T::zero() }])?;
        let n = T::count(m.n);
        let p = m.mean(0);
        let se = (p * (T::one() - p) / n).max(T::zero()).sqrt();
        Ok(Estimate::new(p, se, m.n))
    }

    fn check_within_horizon(&self, t: T) -> Result<()> {
        if t > self.horizon {
            Err(Error::Config(format!(
                "query time {t} exceeds simulation horizon {}",
                self.horizon
            )))
        } else {
            Ok(())
        }
    }

    /// Fraction of paths with `tau_B > t1` and `tau_C > t2`.
    pub fn joint_survival(&self, p: EvaluationPoint<T>) -> Result<Estimate<T>> {
        p.check()?;
        self.check_within_horizon(p.t1.max(p.t2))?;
        self.bernoulli(|pair| pair.tau_b > p.t1 && pair.tau_c > p.t2)
    }

    pub fn marginal_survival(&self, firm: FirmId, t: T) -> Result<Estimate<T>> {
        crate::model::check_time("t", t)?;
        self.check_within_horizon(t)?;
        self.bernoulli(|pair| pair.time(firm) > t)
    }

    fn check_schedule(&self, sched: &SwapSchedule<T>) -> Result<()> {
        self.check_within_horizon(sched.maturity + sched.settlement_lag)
    }

    /// Annuity, protection and accrual legs estimated on common paths.
    pub fn legs(&self, sched: &SwapSchedule<T>) -> Result<LegEstimates<T>> {
        self.check_schedule(sched)?;
        let m = self.reduce(|pair| leg_payoffs(pair, sched))?;
        let mut covariance = [[T::zero(); 3]; 3];
        for (k, row) in covariance.iter_mut().enumerate() {
            for (l, cell) in row.iter_mut().enumerate() {
                *cell = m.covariance(k, l);
            }
        }
        Ok(LegEstimates {
            annuity: m.estimate(0),
            protection: m.estimate(1),
            accrual: m.estimate(2),
            covariance,
        })
    }

    /// Per-period accrual payoffs, one estimate per payment period.
    pub fn accrual_terms(&self, sched: &SwapSchedule<T>) -> Result<Vec<Estimate<T>>> {
        self.check_schedule(sched)?;
        (1..=sched.n_payments)
            .map(|i| {
                let m = self.reduce(|pair| match accrual_payoff(pair, sched) {
                    Some((period, v)) if period == i => [v],
                    _ => [T::zero()],
                })?;
                Ok(m.estimate(0))
            })
            .collect()
    }

    /// Ratio estimator `protection / (annuity + accrual)` with a delta-method stderr.
    pub fn premium(&self, sched: &SwapSchedule<T>) -> Result<Estimate<T>> {
        self.legs(sched)?.premium()
    }
}

/// Discounted payoffs `[annuity, protection, accrual]` of one path.
pub fn leg_payoffs<T: Scalar>(pair: &DefaultTimePair<T>, sched: &SwapSchedule<T>) -> [T; 3] {
    let r = sched.rate;
    let first = pair.first_default();
    let annuity = sched
        .payment_dates
        .iter()
        .take_while(|&&t| first > t)
        .map(|&t| (-r * t).exp())
        .fold(T::zero(), |a, x| a + x);
    let (tau_b, tau_c) = (pair.tau_b, pair.tau_c);
    let settle = tau_c + sched.settlement_lag;
    let protection = if tau_c <= sched.maturity && tau_b > settle {
        (-r * settle).exp()
    } else {
        T::zero()
    };
    let accrual = accrual_payoff(pair, sched).map_or(T::zero(), |(_, v)| v);
    [annuity, protection, accrual]
}

/// Period index and discounted accrued fraction, when C defaults first within the schedule.
fn accrual_payoff<T: Scalar>(
    pair: &DefaultTimePair<T>,
    sched: &SwapSchedule<T>,
) -> Option<(usize, T)> {
    if !(pair.tau_b > pair.tau_c) {
        return None;
    }
    let tau = pair.tau_c;
    let i = sched.period_of(tau)?;
    let frac = (tau - sched.date(i - 1)) / sched.interval;
    Some((i, (-sched.rate * tau).exp() * frac))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegEstimates<T> {
    pub annuity: Estimate<T>,
    pub protection: Estimate<T>,
    pub accrual: Estimate<T>,
    /// Sample covariance of `[annuity, protection, accrual]` payoffs.
    pub covariance: [[T; 3]; 3],
}

impl<T: Scalar> LegEstimates<T> {
    pub fn premium(&self) -> Result<Estimate<T>> {
        let denom = self.annuity.mean + self.accrual.mean;
        if !(denom > T::zero()) {
            return Err(Error::Config(format!(
                "premium denominator is not positive ({denom})"
            )));
        }
        let ratio = self.protection.mean / denom;
        // gradient of P / (A + C) in (A, P, C) order
        let g = [-ratio / denom, T::one() / denom, -ratio / denom];
        let mut var = T::zero();
        for k in 0..3 {
            for l in 0..3 {
                var = var + g[k] * self.covariance[k][l] * g[l];
            }
        }
        let n = self.protection.n;
        let se = (var.max(T::zero()) / T::count(n.max(1))).sqrt();
        Ok(Estimate::new(ratio, se, n))
    }
}

/// Simulates `n` paths up to `max(t1, t2, 1)` and estimates the joint survival.
pub fn estimate_joint_survival<T: Scalar>(
    params: &ContagionParams<T>,
    p: EvaluationPoint<T>,
    n: usize,
    source: RandomSource,
) -> Result<Estimate<T>> {
    let horizon = p.t1.max(p.t2).max(T::one());
    PathSample::simulate(params, horizon, n, source, None)?.joint_survival(p)
}

pub fn estimate_legs<T: Scalar>(
    params: &ContagionParams<T>,
    sched: &SwapSchedule<T>,
    n: usize,
    source: RandomSource,
) -> Result<LegEstimates<T>> {
    PathSample::simulate(params, sched.simulation_horizon(), n, source, None)?.legs(sched)
}

pub fn estimate_premium<T: Scalar>(
    params: &ContagionParams<T>,
    sched: &SwapSchedule<T>,
    n: usize,
    source: RandomSource,
) -> Result<Estimate<T>> {
    estimate_legs(params, sched, n, source)?.premium()
}
