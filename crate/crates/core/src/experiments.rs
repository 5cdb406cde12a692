//! Parameter sweeps, optimal power-allocation search and CSV output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::analytic_sop;
use crate::asymptotic::asymptotic_sop;
use crate::error::{Error, Result};
use crate::estimate::{Method, SopEstimate};
use crate::exec::Execution;
use crate::model::{check_alpha, linear_to_db, DecodingOrder, SecrecyTargets, SystemParams, User};
use crate::monte_carlo::{estimate_many, SimulationConfig};
use crate::quadrature::QuadratureConfig;

/// How the transmit SNR of a scenario is pinned down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrSpec {
    /// `rho_t` in dB; unaffected by distance changes.
    TransmitDb(f64),
    /// Average received SNR at the far user in dB; `rho_t` follows `lambda_2`.
    ReceivedDb(f64),
}

/// A scenario before it is resolved into [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub path_loss_constant: f64,
    pub path_loss_exponent: f64,
    pub distance_near: f64,
    pub distance_far: f64,
    pub residual_interference: f64,
    pub snr: SnrSpec,
    pub threshold_near: f64,
    pub threshold_far: f64,
    pub alpha: Option<f64>,
}

impl Default for Scenario {
    /// Two users at 50 m and 100 m, `L_p = 1`, `e = 3`, `beta = 0.1`, 10 dB
    /// received SNR.
    fn default() -> Self {
        Self {
            path_loss_constant: 1.0,
            path_loss_exponent: 3.0,
            distance_near: 50.0,
            distance_far: 100.0,
            residual_interference: 0.1,
            snr: SnrSpec::ReceivedDb(10.0),
            threshold_near: 0.5,
            threshold_far: 0.1,
            alpha: None,
        }
    }
}

impl Scenario {
    pub fn params(&self) -> Result<SystemParams> {
        match self.snr {
            SnrSpec::TransmitDb(db) => SystemParams::new(
                self.path_loss_constant,
                self.path_loss_exponent,
                self.distance_near,
                self.distance_far,
                crate::model::db_to_linear(db),
                self.residual_interference,
            ),
            SnrSpec::ReceivedDb(db) => SystemParams::from_received_snr_db(
                self.path_loss_constant,
                self.path_loss_exponent,
                self.distance_near,
                self.distance_far,
                db,
                self.residual_interference,
            ),
        }
    }

    pub fn targets(&self) -> Result<SecrecyTargets> {
        SecrecyTargets::new(self.threshold_near, self.threshold_far)
    }

    pub fn alpha(&self) -> Result<f64> {
        let alpha = self
            .alpha
            .ok_or_else(|| Error::invalid("power allocation alpha is not set"))?;
        check_alpha(alpha)?;
        Ok(alpha)
    }

    /// Copy with `axis` set to `value`.
    pub fn with(&self, axis: Axis, value: f64) -> Self {
        let mut s = *self;
        match axis {
            Axis::Threshold => {
                s.threshold_near = value;
                s.threshold_far = value;
            }
            Axis::ThresholdNear => s.threshold_near = value,
            Axis::ThresholdFar => s.threshold_far = value,
            Axis::RhoR => s.snr = SnrSpec::ReceivedDb(value),
            Axis::RhoT => s.snr = SnrSpec::TransmitDb(value),
            Axis::Alpha => s.alpha = Some(value),
            Axis::D2 => s.distance_far = value,
            Axis::Beta => s.residual_interference = value,
        }
        s
    }
}

/// A swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Both secrecy thresholds together (bits/s/Hz).
    Threshold,
    ThresholdNear,
    ThresholdFar,
    /// Received SNR at the far user (dB).
    RhoR,
    /// Transmit SNR (dB).
    RhoT,
    Alpha,
    /// Far-user distance (m).
    D2,
    Beta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Threshold => "threshold",
            Axis::ThresholdNear => "threshold_near",
            Axis::ThresholdFar => "threshold_far",
            Axis::RhoR => "rho_r",
            Axis::RhoT => "rho_t",
            Axis::Alpha => "alpha",
            Axis::D2 => "d2",
            Axis::Beta => "beta",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "threshold" => Axis::Threshold,
            "threshold_near" => Axis::ThresholdNear,
            "threshold_far" => Axis::ThresholdFar,
            "rho_r" => Axis::RhoR,
            "rho_t" => Axis::RhoT,
            "alpha" => Axis::Alpha,
            "d2" => Axis::D2,
            "beta" => Axis::Beta,
            other => return Err(Error::invalid(format!("unknown sweep axis `{other}`"))),
        })
    }
}

impl Serialize for Axis {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Interior grid `i / (n + 1)`, `i = 1..=n`, on (0, 1).
pub fn interior_alpha_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// Shared evaluation settings for all SOP methods.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Evaluator {
    pub quadrature: QuadratureConfig,
    pub simulation: SimulationConfig,
    pub execution: Execution,
}

impl Evaluator {
    pub fn sop(
        &self,
        method: Method,
        order: DecodingOrder,
        user: User,
        targets: &SecrecyTargets,
        alpha: f64,
        params: &SystemParams,
    ) -> Result<SopEstimate> {
        match method {
            Method::Analytic => analytic_sop(order, user, targets, alpha, params, &self.quadrature),
            Method::Asymptotic => asymptotic_sop(order, user, targets, alpha, params),
            Method::MonteCarlo => {
                Ok(estimate_many(&[(order, user)], targets, alpha, params, &self.simulation, self.execution)?[0])
            }
        }
    }
}

/// One fully-specified sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub axis: Axis,
    pub grid: Vec<f64>,
    /// Optional outer axis, one curve per value.
    pub series: Option<(Axis, Vec<f64>)>,
    pub methods: Vec<Method>,
    pub orders: Vec<DecodingOrder>,
    pub users: Vec<User>,
}

fn check_grid(axis: Axis, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("grid for `{axis}` is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("grid for `{axis}` has non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("grid for `{axis}` must be strictly increasing")));
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_grid(self.axis, &self.grid)?;
        if let Some((axis, values)) = &self.series {
            if *axis == self.axis {
                return Err(Error::invalid("series axis must differ from the swept axis"));
            }
            check_grid(*axis, values)?;
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("sweep needs at least one method"));
        }
        if self.orders.is_empty() {
            return Err(Error::invalid("sweep needs at least one decoding order"));
        }
        if self.users.is_empty() {
            return Err(Error::invalid("sweep needs at least one user"));
        }
        let closed_form = self.methods.iter().any(|m| *m != Method::MonteCarlo);
        if let Some(order) = self.orders.iter().find(|o| !o.has_analytic()) {
            if closed_form {
                return Err(Error::invalid(format!(
                    "analytic and asymptotic methods are unavailable for {order}"
                )));
            }
        }
        if self.axis != Axis::Alpha && !matches!(self.series, Some((Axis::Alpha, _))) {
            self.scenario.alpha()?;
        }
        for point in self.points() {
            point.params()?;
            point.targets()?;
            point.alpha()?;
        }
        Ok(())
    }

    /// Grid scenarios, series-major.
    pub fn points(&self) -> Vec<Scenario> {
        let outer: Vec<Scenario> = match &self.series {
            None => vec![self.scenario],
            Some((axis, values)) => values.iter().map(|&v| self.scenario.with(*axis, v)).collect(),
        };
        outer
            .iter()
            .flat_map(|s| self.grid.iter().map(move |&v| s.with(self.axis, v)))
            .collect()
    }

    /// `(method, order, user)` per output cell, in column order.
    pub fn columns(&self) -> Vec<(Method, DecodingOrder, User)> {
        let mut cols = Vec::new();
        for &m in &self.methods {
            for &o in &self.orders {
                for &u in &self.users {
                    cols.push((m, o, u));
                }
            }
        }
        cols
    }
}

/// Parameter values of one evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub alpha: f64,
    pub rho_t_db: f64,
    pub rho_r_db: f64,
    pub distance_near: f64,
    pub distance_far: f64,
    pub beta: f64,
    pub threshold_near: f64,
    pub threshold_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: PointValues,
    /// Same order as [`SweepSpec::columns`].
    pub cells: Vec<SopEstimate>,
}

impl SweepRow {
    pub fn cell(&self, spec: &SweepSpec, method: Method, order: DecodingOrder, user: User) -> Option<SopEstimate> {
        spec.columns()
            .iter()
            .position(|c| *c == (method, order, user))
            .map(|i| self.cells[i])
    }
}

fn evaluate_point(spec: &SweepSpec, eval: &Evaluator, point: &Scenario) -> Result<SweepRow> {
    let params = point.params()?;
    let targets = point.targets()?;
    let alpha = point.alpha()?;
    let columns = spec.columns();
    let mut cells = vec![None; columns.len()];

    let mc: Vec<(usize, (DecodingOrder, User))> = columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.0 == Method::MonteCarlo)
        .map(|(i, c)| (i, (c.1, c.2)))
        .collect();
    if !mc.is_empty() {
        let queries: Vec<_> = mc.iter().map(|(_, q)| *q).collect();
        let estimates = estimate_many(&queries, &targets, alpha, &params, &eval.simulation, eval.execution)?;
        for ((i, _), e) in mc.iter().zip(estimates) {
            cells[*i] = Some(e);
        }
    }
    for (i, &(m, o, u)) in columns.iter().enumerate() {
        if cells[i].is_none() {
            cells[i] = Some(eval.sop(m, o, u, &targets, alpha, &params)?);
        }
    }
    Ok(SweepRow {
        point: PointValues {
            alpha,
            rho_t_db: linear_to_db(params.transmit_snr()),
            rho_r_db: linear_to_db(params.received_snr()),
            distance_near: params.distance_near(),
            distance_far: params.distance_far(),
            beta: params.residual_interference(),
            threshold_near: targets.threshold_near(),
            threshold_far: targets.threshold_far(),
        },
        cells: cells.into_iter().map(|c| c.expect("every cell evaluated")).collect(),
    })
}

/// Evaluates every `(method, order, user)` at every grid point.
pub fn run_sweep(spec: &SweepSpec, eval: &Evaluator) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = spec.points();
    eval.execution
        .map(&points, |p| evaluate_point(spec, eval, p))
        .into_iter()
        .collect()
}

/// A `d2` sweep; every grid distance must exceed `d1`.
pub fn distance_sensitivity(spec: &SweepSpec, eval: &Evaluator) -> Result<Vec<SweepRow>> {
    let distances = if spec.axis == Axis::D2 {
        &spec.grid
    } else {
        match &spec.series {
            Some((Axis::D2, values)) => values,
            _ => return Err(Error::invalid("distance sensitivity needs a d2 axis")),
        }
    };
    if let Some(d) = distances.iter().find(|&&d| d <= spec.scenario.distance_near) {
        return Err(Error::invalid(format!(
            "far-user distance {d} must exceed the near-user distance {}",
            spec.scenario.distance_near
        )));
    }
    run_sweep(spec, eval)
}

/// What the power-allocation search minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    User(User),
    /// `max(s_1, s_2)`.
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalAlpha {
    pub alpha: f64,
    pub sop: SopEstimate,
    /// Index of `alpha` in the search grid.
    pub index: usize,
    pub grid: Vec<f64>,
    /// Objective value at each grid point.
    pub objective: Vec<f64>,
}

/// Grid search over `alpha = i / (n + 1)`; ties go to the smaller `alpha`.
#[allow(clippy::too_many_arguments)]
pub fn optimal_alpha(
    eval: &Evaluator,
    method: Method,
    order: DecodingOrder,
    objective: Objective,
    targets: &SecrecyTargets,
    params: &SystemParams,
    grid_resolution: usize,
) -> Result<OptimalAlpha> {
    if grid_resolution < 11 {
        return Err(Error::invalid("optimal alpha search needs at least 11 grid points"));
    }
    let grid = interior_alpha_grid(grid_resolution);
    let users: &[User] = match objective {
        Objective::User(User::Near) => &[User::Near],
        Objective::User(User::Far) => &[User::Far],
        Objective::Both => &User::BOTH,
    };
    let inner = Evaluator {
        execution: Execution::Sequential,
        ..*eval
    };
    let evaluated: Vec<Result<SopEstimate>> = eval.execution.map(&grid, |&alpha| {
        let mut worst: Option<SopEstimate> = None;
        for &u in users {
            let s = inner.sop(method, order, u, targets, alpha, params)?;
            if worst.is_none_or(|w| s.value > w.value) {
                worst = Some(s);
            }
        }
        Ok(worst.expect("at least one user"))
    });
    let estimates: Vec<SopEstimate> = evaluated.into_iter().collect::<Result<_>>()?;
    if estimates.iter().all(|e| e.value >= 1.0) {
        return Err(Error::NoFeasibleAlpha);
    }
    let mut best = 0;
    for (i, e) in estimates.iter().enumerate() {
        if e.value < estimates[best].value {
            best = i;
        }
    }
    Ok(OptimalAlpha {
        alpha: grid[best],
        sop: estimates[best],
        index: best,
        objective: estimates.iter().map(|e| e.value).collect(),
        grid,
    })
}

fn column_name(method: Method, order: DecodingOrder, user: User) -> String {
    format!("{}_{}_u{}", method.tag(), order, user.index())
}

/// Writes a header row naming every column, then one row per grid point.
/// Numbers use the shortest representation that round-trips exactly.
pub fn write_sweep_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::invalid(format!("CSV output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "alpha",
        "rho_t_db",
        "rho_r_db",
        "distance_near",
        "distance_far",
        "beta",
        "threshold_near",
        "threshold_far",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for (m, o, u) in spec.columns() {
        header.push(column_name(m, o, u));
        if m == Method::MonteCarlo {
            header.push(format!("{}_stderr", column_name(m, o, u)));
        }
    }
    w.write_record(&header).map_err(io)?;
    let columns = spec.columns();
    for row in rows {
        let p = &row.point;
        let mut record: Vec<String> = [
            p.alpha,
            p.rho_t_db,
            p.rho_r_db,
            p.distance_near,
            p.distance_far,
            p.beta,
            p.threshold_near,
            p.threshold_far,
        ]
        .iter()
        .map(|v| v.to_string())
        .collect();
        for (cell, (m, _, _)) in row.cells.iter().zip(&columns) {
            record.push(cell.value.to_string());
            if *m == Method::MonteCarlo {
                record.push(cell.standard_error.to_string());
            }
        }
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("CSV output failed: {e}")))?;
    Ok(())
}

/// Sweep presets for the four validation figures.
pub mod presets {
    use super::*;

    /// SOP versus secrecy threshold at `alpha = 0.33`, one curve per received
    /// SNR in {10, 20} dB, exact and simulated, both users under D2.
    pub fn threshold_validation() -> SweepSpec {
        SweepSpec {
            scenario: Scenario {
                alpha: Some(0.33),
                ..Scenario::default()
            },
            axis: Axis::Threshold,
            grid: linspace(0.1, 2.0, 20),
            series: Some((Axis::RhoR, vec![10.0, 20.0])),
            methods: vec![Method::Analytic, Method::MonteCarlo],
            orders: vec![DecodingOrder::D2],
            users: User::BOTH.to_vec(),
        }
    }

    /// Exact versus high-SNR SOP at `alpha = 0.5` over received SNR.
    pub fn asymptotic_convergence() -> SweepSpec {
        SweepSpec {
            scenario: Scenario {
                alpha: Some(0.5),
                threshold_near: 0.5,
                threshold_far: 0.5,
                ..Scenario::default()
            },
            axis: Axis::RhoR,
            grid: linspace(0.0, 50.0, 11),
            series: None,
            methods: vec![Method::Analytic, Method::Asymptotic],
            orders: vec![DecodingOrder::D2],
            users: User::BOTH.to_vec(),
        }
    }

    /// Simulated SOP of all four decoding orders versus `alpha` at 10 dB.
    pub fn decoding_orders() -> SweepSpec {
        SweepSpec {
            scenario: Scenario {
                threshold_near: 0.5,
                threshold_far: 0.1,
                ..Scenario::default()
            },
            axis: Axis::Alpha,
            grid: linspace(0.02, 0.98, 25),
            series: None,
            methods: vec![Method::MonteCarlo],
            orders: DecodingOrder::ALL.to_vec(),
            users: User::BOTH.to_vec(),
        }
    }

    /// Exact SOP versus `alpha` with `d1 = 40` m, `rho_t = 70` dB, one curve
    /// per far-user distance.
    pub fn distance_tradeoff() -> SweepSpec {
        SweepSpec {
            scenario: Scenario {
                distance_near: 40.0,
                snr: SnrSpec::TransmitDb(70.0),
                threshold_near: 1.0,
                threshold_far: 0.5,
                ..Scenario::default()
            },
            axis: Axis::Alpha,
            grid: interior_alpha_grid(201),
            series: Some((Axis::D2, vec![60.0, 80.0, 100.0])),
            methods: vec![Method::Analytic],
            orders: vec![DecodingOrder::D2],
            users: User::BOTH.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_eval() -> Evaluator {
        Evaluator {
            simulation: SimulationConfig::new(2_000, 5),
            ..Evaluator::default()
        }
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.1, 2.0, 20);
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[19], 2.0);
        assert_eq!(interior_alpha_grid(3), vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn threshold_preset_has_forty_rows() {
        let spec = presets::threshold_validation();
        let rows = run_sweep(&spec, &quick_eval()).unwrap();
        assert_eq!(rows.len(), 40);
        assert_eq!(rows[0].point.rho_r_db.round(), 10.0);
        assert_eq!(rows[39].point.rho_r_db.round(), 20.0);
        assert!(rows.iter().all(|r| r.cells.len() == 4));
    }

    #[test]
    fn validation_rejects_degenerate_specs() {
        let mut spec = presets::threshold_validation();
        spec.methods.clear();
        assert!(matches!(spec.validate(), Err(Error::Invalid(_))));

        let mut spec = presets::threshold_validation();
        spec.orders.push(DecodingOrder::D3);
        assert!(spec.validate().is_err());

        let mut spec = presets::threshold_validation();
        spec.grid = vec![0.5, 0.2];
        assert!(spec.validate().is_err());

        let mut spec = presets::threshold_validation();
        spec.scenario.alpha = None;
        assert!(spec.validate().is_err());

        let mut spec = presets::decoding_orders();
        spec.grid = vec![0.0, 0.5];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let spec = presets::threshold_validation();
        let rows = run_sweep(&spec, &quick_eval()).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&spec, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 41);
        assert!(lines[0].starts_with("alpha,rho_t_db,rho_r_db"));
        assert!(lines[0].ends_with("mc_D2_u2,mc_D2_u2_stderr"));
        let fields = lines[0].split(',').count();
        assert!(lines[1..].iter().all(|l| l.split(',').count() == fields));
    }

    #[test]
    fn distance_sweep_requires_far_user_beyond_near() {
        let mut spec = presets::distance_tradeoff();
        spec.series = Some((Axis::D2, vec![30.0, 60.0]));
        assert!(distance_sensitivity(&spec, &quick_eval()).is_err());
        let mut spec = presets::distance_tradeoff();
        spec.series = Some((Axis::D2, vec![100.0]));
        spec.grid = vec![0.4];
        let rows = distance_sensitivity(&spec, &quick_eval()).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn optimal_alpha_requires_resolution() {
        let params = Scenario::default().params().unwrap();
        let targets = Scenario::default().targets().unwrap();
        let r = optimal_alpha(
            &quick_eval(),
            Method::Analytic,
            DecodingOrder::D2,
            Objective::User(User::Near),
            &targets,
            &params,
            5,
        );
        assert!(r.is_err());
    }

    #[test]
    fn hopeless_targets_have_no_feasible_alpha() {
        let params = Scenario::default().params().unwrap();
        let targets = SecrecyTargets::new(30.0, 30.0).unwrap();
        let r = optimal_alpha(
            &quick_eval(),
            Method::Analytic,
            DecodingOrder::D2,
            Objective::Both,
            &targets,
            &params,
            21,
        );
        assert_eq!(r.unwrap_err(), Error::NoFeasibleAlpha);
    }
}
