//! Cross-checks between the exact, high-SNR and simulated SOPs.

use std::io::Write;

use crate::error::{Error, Result};
use crate::estimate::Method;
use crate::exec::Execution;
use crate::experiments::{linspace, Axis, Evaluator, Scenario};
use crate::model::{DecodingOrder, User};
use crate::monte_carlo::estimate_many;

/// Grid and envelopes for [`run_validation`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPlan {
    pub scenario: Scenario,
    pub orders: Vec<DecodingOrder>,
    /// Power allocation of the simulation check.
    pub alpha: f64,
    /// Both users' thresholds take each value in turn.
    pub thresholds: Vec<f64>,
    pub received_snr_db: Vec<f64>,
    pub sigma_multiplier: f64,
    /// The simulation envelope is `max(sigma_multiplier * stderr, mc_floor)`.
    pub mc_floor: f64,
    pub asymptotic_alpha: f64,
    pub asymptotic_received_snr_db: Vec<f64>,
    pub asymptotic_tolerance: f64,
    /// The tolerance applies from this SNR upward; lower SNRs only feed the
    /// trend check.
    pub asymptotic_from_db: f64,
}

impl Default for ValidationPlan {
    fn default() -> Self {
        Self {
            scenario: Scenario {
                threshold_near: 0.5,
                threshold_far: 0.5,
                ..Scenario::default()
            },
            orders: vec![DecodingOrder::D2, DecodingOrder::D1],
            alpha: 0.33,
            thresholds: linspace(0.1, 2.0, 20),
            received_snr_db: vec![10.0, 20.0],
            sigma_multiplier: 3.0,
            mc_floor: 5e-3,
            asymptotic_alpha: 0.5,
            asymptotic_received_snr_db: vec![20.0, 30.0, 40.0, 50.0],
            asymptotic_tolerance: 1e-2,
            asymptotic_from_db: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Exact versus simulated at one grid point.
    Simulation,
    /// Exact versus high-SNR at one SNR.
    Asymptotic,
    /// Gap sequence over the asymptotic SNRs does not grow.
    AsymptoticTrend,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Simulation => "mc_vs_analytic",
            CheckKind::Asymptotic => "asymptotic_vs_analytic",
            CheckKind::AsymptoticTrend => "asymptotic_trend",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckRow {
    pub kind: CheckKind,
    pub order: DecodingOrder,
    pub user: User,
    pub alpha: f64,
    /// NaN for the trend row.
    pub rho_r_db: f64,
    pub threshold: f64,
    /// Exact SOP; the largest gap for the trend row.
    pub reference: f64,
    /// Simulated or high-SNR SOP; the largest gap increase for the trend row.
    pub candidate: f64,
    pub standard_error: f64,
    pub gap: f64,
    /// `+inf` when the row is informational.
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<CheckRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::invalid(format!("CSV output failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "check",
            "order",
            "user",
            "alpha",
            "rho_r_db",
            "threshold",
            "reference",
            "candidate",
            "stderr",
            "gap",
            "tolerance",
            "pass",
        ])
        .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.kind.name().to_string(),
                r.order.to_string(),
                r.user.index().to_string(),
                r.alpha.to_string(),
                r.rho_r_db.to_string(),
                r.threshold.to_string(),
                r.reference.to_string(),
                r.candidate.to_string(),
                r.standard_error.to_string(),
                r.gap.to_string(),
                r.tolerance.to_string(),
                r.pass.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("CSV output failed: {e}")))?;
        Ok(())
    }
}

impl ValidationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::invalid("validation needs at least one decoding order"));
        }
        if let Some(o) = self.orders.iter().find(|o| !o.has_analytic()) {
            return Err(Error::invalid(format!("cannot validate {o}: analytic SOP unavailable")));
        }
        if self.thresholds.is_empty() || self.received_snr_db.is_empty() {
            return Err(Error::invalid("simulation check grid is empty"));
        }
        if !(self.sigma_multiplier > 0.0) || !(self.mc_floor >= 0.0) || !(self.asymptotic_tolerance >= 0.0) {
            return Err(Error::invalid("envelopes must be non-negative"));
        }
        for alpha in [self.alpha, self.asymptotic_alpha] {
            crate::model::check_alpha(alpha)?;
        }
        Ok(())
    }
}

fn simulation_rows(plan: &ValidationPlan, eval: &Evaluator) -> Result<Vec<CheckRow>> {
    let mut points = Vec::new();
    for &rho in &plan.received_snr_db {
        for &t in &plan.thresholds {
            points.push((rho, t));
        }
    }
    let queries: Vec<(DecodingOrder, User)> = plan
        .orders
        .iter()
        .flat_map(|&o| User::BOTH.map(|u| (o, u)))
        .collect();
    let inner = Evaluator {
        execution: Execution::Sequential,
        ..*eval
    };
    let per_point = eval.execution.map(&points, |&(rho, t)| -> Result<Vec<CheckRow>> {
        let s = plan.scenario.with(Axis::RhoR, rho).with(Axis::Threshold, t);
        let params = s.params()?;
        let targets = s.targets()?;
        let mc = estimate_many(&queries, &targets, plan.alpha, &params, &eval.simulation, inner.execution)?;
        queries
            .iter()
            .zip(mc)
            .map(|(&(order, user), sim)| {
                let exact = inner.sop(Method::Analytic, order, user, &targets, plan.alpha, &params)?;
                let gap = (exact.value - sim.value).abs();
                let tolerance = (plan.sigma_multiplier * sim.standard_error).max(plan.mc_floor);
                Ok(CheckRow {
                    kind: CheckKind::Simulation,
                    order,
                    user,
                    alpha: plan.alpha,
                    rho_r_db: rho,
                    threshold: t,
                    reference: exact.value,
                    candidate: sim.value,
                    standard_error: sim.standard_error,
                    gap,
                    tolerance,
                    pass: gap <= tolerance,
                })
            })
            .collect()
    });
    Ok(per_point.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

fn asymptotic_rows(plan: &ValidationPlan, eval: &Evaluator) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let alpha = plan.asymptotic_alpha;
    for &order in &plan.orders {
        for user in User::BOTH {
            let mut gaps = Vec::new();
            for &rho in &plan.asymptotic_received_snr_db {
                let s = plan.scenario.with(Axis::RhoR, rho);
                let params = s.params()?;
                let targets = s.targets()?;
                let exact = eval.sop(Method::Analytic, order, user, &targets, alpha, &params)?;
                let asy = eval.sop(Method::Asymptotic, order, user, &targets, alpha, &params)?;
                let gap = (exact.value - asy.value).abs();
                let tolerance = if rho >= plan.asymptotic_from_db {
                    plan.asymptotic_tolerance
                } else {
                    f64::INFINITY
                };
                gaps.push(gap);
                rows.push(CheckRow {
                    kind: CheckKind::Asymptotic,
                    order,
                    user,
                    alpha,
                    rho_r_db: rho,
                    threshold: targets.threshold(user),
                    reference: exact.value,
                    candidate: asy.value,
                    standard_error: 0.0,
                    gap,
                    tolerance,
                    pass: gap <= tolerance,
                });
            }
            let worst_rise = gaps
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max);
            let worst_rise = if worst_rise.is_finite() { worst_rise } else { 0.0 };
            rows.push(CheckRow {
                kind: CheckKind::AsymptoticTrend,
                order,
                user,
                alpha,
                rho_r_db: f64::NAN,
                threshold: plan.scenario.targets()?.threshold(user),
                reference: gaps.iter().copied().fold(0.0, f64::max),
                candidate: worst_rise,
                standard_error: 0.0,
                gap: worst_rise.max(0.0),
                tolerance: 0.0,
                pass: worst_rise <= 0.0,
            });
        }
    }
    Ok(rows)
}

/// Runs the simulation and high-SNR checks; the report passes only if every
/// row lies inside its envelope.
pub fn run_validation(plan: &ValidationPlan, eval: &Evaluator) -> Result<ValidationReport> {
    plan.validate()?;
    let mut rows = simulation_rows(plan, eval)?;
    rows.extend(asymptotic_rows(plan, eval)?);
    Ok(ValidationReport { rows })
}
