//! Exact SOP for the decoding orders D2 and D1.
//!
//! Conditioned on the eavesdropper-side gain `y`, the outage event for each
//! user reduces to `g * D(y) < N(y)` for the legitimate gain `g`, where `N`
//! and `D` are affine in `y`. With exponential gains this leaves a single
//! integral over `y`, split into cases by the sign pattern of `D`.

use crate::error::{Error, Result};
use crate::estimate::SopEstimate;
use crate::model::{check_alpha, DecodingOrder, SecrecyTargets, SystemParams, User};
use crate::quadrature::{guarded_exp, integrate_decaying_split, QuadratureConfig, UpperLimit};

/// Case boundaries and integration limits.
///
/// Gain limits `t*` follow IEEE arithmetic: a zero denominator yields an
/// infinite limit, which the SOP routing treats as the half-line case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseThresholds {
    pub alpha_1a: f64,
    pub alpha_1b: f64,
    pub alpha_2a: f64,
    pub alpha_2b: f64,
    /// `alpha_1[C]`
    pub alpha_1c: f64,
    /// `alpha_2[C] = 1 / Pi_2`
    pub alpha_2c: f64,
    pub t1: f64,
    pub t2: f64,
    /// `T_1[C]`, undefined (NaN) for `beta = 0`.
    pub t1c: f64,
    pub t2c: f64,
}

pub fn case_thresholds(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Result<CaseThresholds> {
    check_alpha(alpha)?;
    let (p1, p2) = (targets.pi_near(), targets.pi_far());
    let beta = params.residual_interference();
    let rho = params.transmit_snr();
    let a = alpha;
    let ab = 1.0 - alpha;

    let alpha_1a = beta * (p1 - 1.0) / (1.0 + beta * (p1 - 1.0));
    let alpha_1c = (p1 - 1.0) * beta / (1.0 + beta * (p1 - 1.0));
    let alpha_2b = 1.0 / (1.0 + beta * (p2 - 1.0));
    let alpha_2c = 1.0 / p2;
    // At beta = 1 the printed ratios become x/0. For Pi = 1 the coefficient
    // of y in D vanishes for every alpha, so the half-line case always applies.
    let (alpha_1b, alpha_2a) = if beta >= 1.0 {
        (
            if p1 > 1.0 { f64::INFINITY } else { 0.0 },
            if p2 > 1.0 { f64::NEG_INFINITY } else { 1.0 },
        )
    } else {
        (beta * (p1 - 1.0) / (1.0 - beta), (1.0 - p2 * beta) / (1.0 - beta))
    };

    let t1 = (a - (p1 - 1.0) * beta * ab) / (ab * rho * ((p1 - 1.0) * beta * ab + a * p1 * beta - a));
    let t2 = (ab - (p2 - 1.0) * beta * a) / (a * rho * ((p2 - 1.0) * beta * a + ab * p2 * beta - ab));
    let t1c = if beta == 0.0 {
        f64::NAN
    } else {
        (a - (p1 - 1.0) * beta * ab) / (ab * rho * beta * ((p1 - 1.0) * beta * ab + a * (p1 - 1.0)))
    };
    let t2c = (ab - (p2 - 1.0) * a) / (a * rho * ((p2 - 1.0) * a + ab * (p2 - 1.0)));

    Ok(CaseThresholds {
        alpha_1a,
        alpha_1b,
        alpha_2a,
        alpha_2b,
        alpha_1c,
        alpha_2c,
        t1,
        t2,
        t1c,
        t2c,
    })
}

/// `c0 + c1 * y`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub c0: f64,
    pub c1: f64,
}

impl Affine {
    pub fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }

    pub fn at(&self, y: f64) -> f64 {
        self.c0 + self.c1 * y
    }

    fn scale(self, k: f64) -> Self {
        Self::new(self.c0 * k, self.c1 * k)
    }

    fn plus(self, other: Self) -> Self {
        Self::new(self.c0 + other.c0, self.c1 + other.c1)
    }

    fn minus(self, other: Self) -> Self {
        self.plus(other.scale(-1.0))
    }
}

/// `N(y)` and `D(y)` of one user's outage condition plus the two exponential
/// means: `legit_mean` for the gain whose CDF is taken in closed form and
/// `eaves_mean` for the integration variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandCoefficients {
    pub numerator: Affine,
    pub denominator: Affine,
    pub legit_mean: f64,
    pub eaves_mean: f64,
}

/// `D(y)` magnitudes below this fraction of its terms count as zero.
const ZERO_DENOMINATOR: f64 = 1e-14;

impl IntegrandCoefficients {
    /// Near user under D2, integrating over `|h_2|^2`.
    pub fn near_d2(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Self {
        let (p, beta, rho) = (targets.pi_near(), params.residual_interference(), params.transmit_snr());
        let ab = 1.0 - alpha;
        let inner = Affine::new(1.0, ab * rho);
        let numerator = inner.scale(p - 1.0).plus(Affine::new(0.0, alpha * rho * p));
        let denominator = inner
            .scale(alpha * rho)
            .minus(inner.scale((p - 1.0) * beta * ab * rho))
            .minus(Affine::new(0.0, p * beta * alpha * ab * rho * rho));
        Self {
            numerator,
            denominator,
            legit_mean: params.mean_gain_near(),
            eaves_mean: params.mean_gain_far(),
        }
    }

    /// Far user under D2, integrating over `|h_1|^2`.
    pub fn far_d2(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Self {
        let (p, beta, rho) = (targets.pi_far(), params.residual_interference(), params.transmit_snr());
        let ab = 1.0 - alpha;
        let inner = Affine::new(1.0, alpha * rho);
        let numerator = inner.scale(p - 1.0).plus(Affine::new(0.0, ab * rho * p));
        let denominator = inner
            .scale(ab * rho)
            .minus(inner.scale((p - 1.0) * beta * alpha * rho))
            .minus(Affine::new(0.0, p * beta * alpha * ab * rho * rho));
        Self {
            numerator,
            denominator,
            legit_mean: params.mean_gain_far(),
            eaves_mean: params.mean_gain_near(),
        }
    }

    /// Near user under D1.
    pub fn near_d1(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Self {
        let (p, beta, rho) = (targets.pi_near(), params.residual_interference(), params.transmit_snr());
        let ab = 1.0 - alpha;
        let inner = Affine::new(1.0, beta * ab * rho);
        let numerator = inner.scale(p - 1.0).plus(Affine::new(0.0, alpha * rho * p));
        let denominator = inner
            .scale(alpha * rho)
            .minus(inner.scale((p - 1.0) * beta * ab * rho))
            .minus(Affine::new(0.0, p * beta * alpha * ab * rho * rho));
        Self {
            numerator,
            denominator,
            legit_mean: params.mean_gain_near(),
            eaves_mean: params.mean_gain_far(),
        }
    }

    /// Far user under D1.
    pub fn far_d1(targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> Self {
        let (p, rho) = (targets.pi_far(), params.transmit_snr());
        let ab = 1.0 - alpha;
        let inner = Affine::new(1.0, alpha * rho);
        let numerator = inner.scale(p - 1.0).plus(Affine::new(0.0, ab * rho * p));
        let denominator = inner
            .scale(ab * rho)
            .minus(inner.scale((p - 1.0) * alpha * rho))
            .minus(Affine::new(0.0, p * alpha * ab * rho * rho));
        Self {
            numerator,
            denominator,
            legit_mean: params.mean_gain_far(),
            eaves_mean: params.mean_gain_near(),
        }
    }

    /// Lengths over which the integrand changes shape: where the constant and
    /// linear parts of `N` and of `D` trade places, and the reciprocal slope
    /// of the exponent at the origin.
    pub fn length_scales(&self) -> Vec<f64> {
        let (n, d) = (self.numerator, self.denominator);
        let mut scales = vec![(n.c0 / n.c1).abs(), (d.c0 / d.c1).abs()];
        if d.c0 != 0.0 {
            let slope = (n.c1 * d.c0 - n.c0 * d.c1) / (d.c0 * d.c0 * self.legit_mean);
            scales.push(1.0 / slope.abs());
        }
        scales.retain(|s| s.is_finite() && *s > 0.0);
        scales
    }

    /// Conditional non-outage probability times the eavesdropper-gain PDF:
    /// `exp(-N/(D legit_mean) - y/eaves_mean) / eaves_mean`, zero where `D <= 0`.
    pub fn integrand(&self, y: f64) -> f64 {
        let d = self.denominator.at(y);
        let scale = self.denominator.c0.abs() + (self.denominator.c1 * y).abs();
        if d <= ZERO_DENOMINATOR * scale {
            return 0.0;
        }
        let exponent = -self.numerator.at(y) / (d * self.legit_mean) - y / self.eaves_mean;
        guarded_exp(exponent) / self.eaves_mean
    }
}

/// Which piece of a piecewise SOP expression applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// Outage is certain; SOP = 1.
    Certain,
    /// Integrate over `[0, upper]`.
    Truncated { upper: f64 },
    /// Integrate over `[0, inf)`.
    HalfLine,
}

pub fn near_d2_branch(th: &CaseThresholds, alpha: f64) -> Branch {
    if alpha >= th.alpha_1b {
        Branch::HalfLine
    } else if alpha > th.alpha_1a {
        Branch::Truncated { upper: th.t1 }
    } else {
        Branch::Certain
    }
}

pub fn far_d2_branch(th: &CaseThresholds, alpha: f64) -> Branch {
    if alpha <= th.alpha_2a {
        Branch::HalfLine
    } else if alpha < th.alpha_2b {
        Branch::Truncated { upper: th.t2 }
    } else {
        Branch::Certain
    }
}

pub fn near_d1_branch(th: &CaseThresholds, alpha: f64) -> Branch {
    if alpha > th.alpha_1c {
        Branch::Truncated { upper: th.t1c }
    } else {
        Branch::Certain
    }
}

pub fn far_d1_branch(th: &CaseThresholds, alpha: f64) -> Branch {
    if alpha < th.alpha_2c {
        Branch::Truncated { upper: th.t2c }
    } else {
        Branch::Certain
    }
}

fn evaluate(coeffs: &IntegrandCoefficients, branch: Branch, cfg: &QuadratureConfig) -> Result<SopEstimate> {
    let half_line = UpperLimit::Infinite {
        decay_scale: coeffs.eaves_mean,
    };
    let cutoff = cfg.tail_cutoff_mean_multiples * coeffs.eaves_mean;
    let upper = match branch {
        Branch::Certain => return Ok(SopEstimate::analytic(1.0)),
        Branch::HalfLine => half_line,
        Branch::Truncated { upper } if upper.is_nan() => {
            return Err(Error::degenerate("integration limit is undefined"));
        }
        Branch::Truncated { upper } if upper >= cutoff => half_line,
        Branch::Truncated { upper } => UpperLimit::Finite(upper.max(0.0)),
    };
    let breakpoints: Vec<f64> = coeffs
        .length_scales()
        .iter()
        .flat_map(|s| [1e-2, 1e-1, 1.0, 1e1, 1e2].map(|k| k * s))
        .collect();
    let integral = integrate_decaying_split(|y| coeffs.integrand(y), 0.0, upper, &breakpoints, cfg)?;
    Ok(SopEstimate::analytic(1.0 - integral.value))
}

/// SOP of the near user under D2.
pub fn sop_near_d2(
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &QuadratureConfig,
) -> Result<SopEstimate> {
    let th = case_thresholds(targets, alpha, params)?;
    let coeffs = IntegrandCoefficients::near_d2(targets, alpha, params);
    evaluate(&coeffs, near_d2_branch(&th, alpha), cfg)
}

/// SOP of the far user under D2.
pub fn sop_far_d2(
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &QuadratureConfig,
) -> Result<SopEstimate> {
    let th = case_thresholds(targets, alpha, params)?;
    let coeffs = IntegrandCoefficients::far_d2(targets, alpha, params);
    evaluate(&coeffs, far_d2_branch(&th, alpha), cfg)
}

/// SOP of the near user under the conventional order D1. Undefined for
/// perfect SIC (`beta = 0`).
pub fn sop_near_d1(
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &QuadratureConfig,
) -> Result<SopEstimate> {
    let th = case_thresholds(targets, alpha, params)?;
    let branch = near_d1_branch(&th, alpha);
    if params.residual_interference() == 0.0 && branch != Branch::Certain {
        return Err(Error::degenerate("T_1[C] is undefined for beta = 0"));
    }
    let coeffs = IntegrandCoefficients::near_d1(targets, alpha, params);
    evaluate(&coeffs, branch, cfg)
}

/// SOP of the far user under D1.
pub fn sop_far_d1(
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &QuadratureConfig,
) -> Result<SopEstimate> {
    let th = case_thresholds(targets, alpha, params)?;
    let coeffs = IntegrandCoefficients::far_d1(targets, alpha, params);
    evaluate(&coeffs, far_d1_branch(&th, alpha), cfg)
}

/// Exact SOP for `user` under `order`; only D1 and D2 have closed forms.
pub fn analytic_sop(
    order: DecodingOrder,
    user: User,
    targets: &SecrecyTargets,
    alpha: f64,
    params: &SystemParams,
    cfg: &QuadratureConfig,
) -> Result<SopEstimate> {
    match (order, user) {
        (DecodingOrder::D2, User::Near) => sop_near_d2(targets, alpha, params, cfg),
        (DecodingOrder::D2, User::Far) => sop_far_d2(targets, alpha, params, cfg),
        (DecodingOrder::D1, User::Near) => sop_near_d1(targets, alpha, params, cfg),
        (DecodingOrder::D1, User::Far) => sop_far_d1(targets, alpha, params, cfg),
        (other, _) => Err(Error::AnalyticUnavailable(other)),
    }
}
