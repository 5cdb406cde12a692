//! High-SNR closed forms of the SOP.
//!
//! Dropping the `+1` in the eavesdropper-side affine factor makes `N/D`
//! independent of the integration variable, so the remaining integral is an
//! exponential CDF. Case boundaries are the exact ones from
//! [`crate::analytic::case_thresholds`].

use crate::analytic::{
    case_thresholds, far_d1_branch, far_d2_branch, near_d1_branch, near_d2_branch, Branch,
};
use crate::error::{Error, Result};
use crate::estimate::SopEstimate;
use crate::model::{DecodingOrder, SecrecyTargets, SystemParams, User};

/// `exp(-num / (sum(terms) * mean))`. A sum that cancels to rounding level
/// is reported as degenerate.
fn decay_factor(num: f64, terms: &[f64], mean: f64, what: &str) -> Result<f64> {
    let sum: f64 = terms.iter().sum();
    let magnitude: f64 = terms.iter().map(|t| t.abs()).sum();
    if !(sum.abs() > 1e-12 * magnitude) || !sum.is_finite() {
        return Err(Error::degenerate(format!("{what}: exponent denominator vanishes")));
    }
    Ok((-num / (sum * mean)).exp())
}

fn combine(branch: Branch, eaves_mean: f64, factor: impl FnOnce() -> Result<f64>) -> Result<SopEstimate> {
    let raw = match branch {
        Branch::Certain => 1.0,
        Branch::HalfLine => 1.0 - factor()?,
        Branch::Truncated { upper } => {
            let covered = if upper.is_infinite() && upper > 0.0 {
                1.0
            } else {
                -(-upper.max(0.0) / eaves_mean).exp_m1()
            };
            1.0 - covered * factor()?
        }
    };
    if raw.is_nan() {
        return Err(Error::degenerate("closed form evaluates to NaN"));
    }
    Ok(SopEstimate::asymptotic(raw))
}

/// High-SNR SOP of the near user under D2.
pub fn asy_near_d2(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Result<SopEstimate> {
    let th = case_thresholds(targets, alpha, params)?;
    let (p, beta, rho, l1) = (
        targets.pi_near(),
        params.residual_interference(),
        params.transmit_snr(),
        params.mean_gain_near(),
    );
    let ab = 1.0 - alpha;
    combine(near_d2_branch(&th, alpha), params.mean_gain_far(), || {
        let num = (p - 1.0) * ab * rho + alpha * rho * p;
        let terms = [
            alpha * rho * rho * ab,
            -(p - 1.0) * ab * ab * beta * rho * rho,
            -p * beta * alpha * ab * rho * rho,
        ];
        decay_factor(num, &terms, l1, "near user, D2")
    })
}

/// High-SNR SOP of the far user under D2.
pub fn asy_far_d2(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Result<SopEstimate> {
    let th = case_thresholds(targets, alpha, params)?;
    let (p, beta, rho, l2) = (
        targets.pi_far(),
        params.residual_interference(),
        params.transmit_snr(),
        params.mean_gain_far(),
    );
    let ab = 1.0 - alpha;
    combine(far_d2_branch(&th, alpha), params.mean_gain_near(), || {
        let num = (p - 1.0) * alpha * rho + ab * rho * p;
        let terms = [
            ab * rho * rho * alpha,
            -(p - 1.0) * alpha * alpha * rho * rho * beta,
            -ab * p * rho * rho * alpha * beta,
        ];
        decay_factor(num, &terms, l2, "far user, D2")
    })
}

/// High-SNR SOP of the near user under D1.
pub fn asy_near_d1(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Result<SopEstimate> {
    let th = case_thresholds(targets, alpha, params)?;
    let (p, beta, rho, l1) = (
        targets.pi_near(),
        params.residual_interference(),
        params.transmit_snr(),
        params.mean_gain_near(),
    );
    let ab = 1.0 - alpha;
    let branch = near_d1_branch(&th, alpha);
    if beta == 0.0 && branch != Branch::Certain {
        return Err(Error::degenerate("T_1[C] is undefined for beta = 0"));
    }
    combine(branch, params.mean_gain_far(), || {
        let num = (p - 1.0) * beta * ab * rho + alpha * rho * p;
        let terms = [
            beta * alpha * rho * rho * ab,
            -(p - 1.0) * ab * ab * beta * beta * rho * rho,
            -p * beta * alpha * ab * rho * rho,
        ];
        decay_factor(num, &terms, l1, "near user, D1")
    })
}

/// High-SNR SOP of the far user under D1.
pub fn asy_far_d1(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Result<SopEstimate> {
    let th = case_thresholds(targets, alpha, params)?;
    let (p, rho, l2) = (targets.pi_far(), params.transmit_snr(), params.mean_gain_far());
    let ab = 1.0 - alpha;
    combine(far_d1_branch(&th, alpha), params.mean_gain_near(), || {
        let num = (p - 1.0) * alpha * rho + ab * rho * p;
        let terms = [
            alpha * rho * rho * ab,
            -(p - 1.0) * alpha * alpha * rho * rho,
            -p * alpha * ab * rho * rho,
        ];
        decay_factor(num, &terms, l2, "far user, D1")
    })
}

pub fn asymptotic_sop(
    order: DecodingOrder,
    user: User,
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
) -> Result<SopEstimate> {
    match (order, user) {
        (DecodingOrder::D2, User::Near) => asy_near_d2(targets, alpha, params),
        (DecodingOrder::D2, User::Far) => asy_far_d2(targets, alpha, params),
        (DecodingOrder::D1, User::Near) => asy_near_d1(targets, alpha, params),
        (DecodingOrder::D1, User::Far) => asy_far_d1(targets, alpha, params),
        (other, _) => Err(Error::AnalyticUnavailable(other)),
    }
}
