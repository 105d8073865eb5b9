//! Two-firm default contagion with geometrically attenuating shocks.
//!
//! Firm B (a CDS protection seller) and firm C (the reference entity) default
//! at constant rates until one of them defaults; the survivor's intensity
//! then jumps by `jump` and decays back as `jump / (atten * lag + 1)`.
//!
//! The crate provides
//!
//! - [`model`]: parameters, intensities and the survivor's cumulative hazard,
//! - [`closed_form`]: joint/marginal survival and joint density in the
//!   symmetric competitor case `-jump = atten`,
//! - [`pricing`]: the fair CDS swap premium and its legs,
//! - [`mc_oracle`]: exact simulation of the default times with estimators,
//! - [`quadrature`]: numerical integration of the joint density,
//! - [`validation`]: a three-way comparison report of the above.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod mc_oracle;
pub mod model;
pub mod pricing;
pub mod quadrature;
pub mod scalar;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use closed_form::{
    independent_joint_survival, joint_density, joint_survival, marginal_survival,
    survival_increment_and_bound,
};
pub use mc_oracle::{estimate_joint_survival, estimate_legs, estimate_premium, RandomSource};
pub use model::{invert_post_contagion_hazard, post_contagion_hazard, FirmId};
pub use pricing::{
    accrual_factor, accrual_term, annuity_factor, build_schedule, premium_upper_bound,
    protection_leg, swap_premium, AccrualMode,
};
pub use quadrature::{leg_integrals, mixed_partial, survival_from_density};
pub use validation::{run_validation, McSettings, ValidationReport, ValidationRow};

pub type ContagionParams = model::ContagionParams<f64>;
pub type SymmetricCompetitorParams = model::SymmetricCompetitorParams<f64>;
pub type DefaultTimePair = model::DefaultTimePair<f64>;
pub type EvaluationPoint = closed_form::EvaluationPoint<f64>;
pub type SurvivalIncrement = closed_form::SurvivalIncrement<f64>;
pub type SwapSchedule = pricing::SwapSchedule<f64>;
pub type PricingBreakdown = pricing::PricingBreakdown<f64>;
pub type QuadConfig = quadrature::QuadConfig<f64>;
pub type QuadEstimate = quadrature::QuadEstimate<f64>;
pub type Estimate = mc_oracle::Estimate<f64>;
pub type PathSample = mc_oracle::PathSample<f64>;
