use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noma_sop::analytic::case_thresholds;
use noma_sop::experiments::{optimal_alpha, run_sweep, write_sweep_csv, Evaluator, Objective};
use noma_sop::model::{linear_to_db, pa_bounds, secrecy_rates, sinr_set};
use noma_sop::monte_carlo::{sample_channels, shard_rng};
use noma_sop::validation::{run_validation, CheckKind};
use noma_sop::{
    ChannelRealization, DecodingOrder, Error, Execution, Method, ScenarioFile, User,
};

/// Secrecy outage probability of two-user NOMA with untrusted users.
#[derive(Parser)]
#[command(name = "noma-sop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// SINRs, rates, case thresholds and SOPs at one operating point.
    Point(PointArgs),
    /// Run the scenario's [sweep] section and write CSV.
    Sweep(RunArgs),
    /// Check exact SOPs against simulation and the high-SNR forms.
    Validate(RunArgs),
    /// Grid search for the power allocation that minimises the SOP.
    Optimal(OptimalArgs),
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; the built-in default scenario if omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Monte Carlo sample count (overrides the file).
    #[arg(long)]
    samples: Option<u64>,
    /// Monte Carlo seed (overrides the file).
    #[arg(long)]
    seed: Option<u64>,
    /// Write results here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "D2")]
    order: DecodingOrder,
    /// Power allocation to the near user (overrides the file).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    /// Report SINRs for these channel gains `g1,g2` instead of a random draw.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    gains: Option<Vec<f64>>,
}

#[derive(Args)]
struct OptimalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "D2")]
    order: DecodingOrder,
    #[arg(long, value_enum, default_value = "analytic")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "both")]
    objective: ObjectiveArg,
    /// Number of interior grid points.
    #[arg(long, default_value_t = 201)]
    resolution: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Analytic,
    Asymptotic,
    Mc,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Analytic => vec![Method::Analytic],
            MethodArg::Asymptotic => vec![Method::Asymptotic],
            MethodArg::Mc => vec![Method::MonteCarlo],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Near,
    Far,
    Both,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Convergence { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("I/O error: {e}"),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load(common: &Common) -> Result<(ScenarioFile, Evaluator), Failure> {
    let mut file = match &common.scenario {
        Some(path) => ScenarioFile::load(path)?,
        None => ScenarioFile::default(),
    };
    if let Some(n) = common.samples {
        file.simulation.samples = n;
    }
    if let Some(s) = common.seed {
        file.simulation.seed = s;
    }
    let simulation = file.simulation();
    simulation.validate()?;
    let quadrature = file.quadrature();
    quadrature.validate()?;
    let eval = Evaluator {
        quadrature,
        simulation,
        execution: if common.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    Ok((file, eval))
}

/// Writes `render`'s output to `out` atomically, or to standard output.
fn emit(out: Option<&Path>, render: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Outcome {
    match out {
        None => {
            let mut buf = Vec::new();
            render(&mut buf)?;
            io::stdout().write_all(&buf)?;
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            render(tmp.as_file_mut())?;
            tmp.as_file_mut().flush()?;
            tmp.persist(path).map_err(|e| Failure::from(e.error))?;
            Ok(())
        }
    }
}

fn point(args: &PointArgs) -> Outcome {
    let (file, eval) = load(&args.common)?;
    let mut scenario = file.scenario()?;
    if let Some(a) = args.alpha {
        scenario.alpha = Some(a);
    }
    let alpha = scenario.alpha()?;
    let params = scenario.params()?;
    let targets = scenario.targets()?;
    let order = args.order;
    let methods = args.method.methods();
    if args.method != MethodArg::All && !order.has_analytic() && methods[0] != Method::MonteCarlo {
        return Err(Error::AnalyticUnavailable(order).into());
    }

    let mut r = String::new();
    let _ = writeln!(
        r,
        "system: d1 = {} m, d2 = {} m, L_p = {}, e = {}, beta = {}",
        params.distance_near(),
        params.distance_far(),
        params.path_loss_constant(),
        params.path_loss_exponent(),
        params.residual_interference()
    );
    let _ = writeln!(
        r,
        "        lambda1 = {:e}, lambda2 = {:e}, rho_t = {:.4} dB, rho_r = {:.4} dB",
        params.mean_gain_near(),
        params.mean_gain_far(),
        linear_to_db(params.transmit_snr()),
        linear_to_db(params.received_snr())
    );
    let _ = writeln!(
        r,
        "point:  order {order}, alpha = {alpha}, thresholds U1 = {}, U2 = {} bits/s/Hz",
        targets.threshold_near(),
        targets.threshold_far()
    );

    let th = case_thresholds(&targets, alpha, &params)?;
    let _ = writeln!(r, "case thresholds:");
    for (name, v) in [
        ("alpha_1a", th.alpha_1a),
        ("alpha_1b", th.alpha_1b),
        ("alpha_2a", th.alpha_2a),
        ("alpha_2b", th.alpha_2b),
        ("alpha_1c", th.alpha_1c),
        ("alpha_2c", th.alpha_2c),
        ("T1", th.t1),
        ("T2", th.t2),
        ("T1c", th.t1c),
        ("T2c", th.t2c),
    ] {
        if name.starts_with('T') {
            let _ = writeln!(r, "  {name:<9}{v:e}");
        } else {
            let _ = writeln!(r, "  {name:<9}{v}");
        }
    }

    let (ch, origin) = match &args.gains {
        Some(g) => (ChannelRealization::new(g[0], g[1])?, "given".to_string()),
        None => {
            let mut rng = shard_rng(eval.simulation.seed, 0);
            (sample_channels(&params, &mut rng), format!("drawn with seed {}", eval.simulation.seed))
        }
    };
    let _ = writeln!(r, "realization ({origin}): g1 = {:e}, g2 = {:e}", ch.gain_near, ch.gain_far);
    match pa_bounds(&ch, &params) {
        Ok((lo, hi)) => {
            let _ = writeln!(r, "  positive secrecy rates for alpha in ({lo}, {})", hi.min(1.0));
        }
        Err(e) => {
            let _ = writeln!(r, "  PA bounds unavailable: {e}");
        }
    }
    let sinr = sinr_set(order, &ch, alpha, &params)?;
    let rates = secrecy_rates(&sinr);
    for user in User::BOTH {
        let _ = writeln!(
            r,
            "  {user}: SINR at {user} = {:.6}, SINR at {} = {:.6}, secrecy rate = {} bits/s/Hz",
            sinr.get(user, user),
            user.other(),
            sinr.get(user, user.other()),
            rates.rate(user)
        );
    }

    let _ = writeln!(r, "secrecy outage probability:");
    for method in methods {
        if method != Method::MonteCarlo && !order.has_analytic() {
            let _ = writeln!(r, "  {:<11}unavailable for {order}", method.tag());
            continue;
        }
        let mut line = format!("  {:<11}", method.tag());
        for user in User::BOTH {
            let s = eval.sop(method, order, user, &targets, alpha, &params)?;
            let _ = write!(line, "{user} = {}", s.value);
            if method == Method::MonteCarlo {
                let _ = write!(line, " (stderr {})", s.standard_error);
            }
            line.push_str("   ");
        }
        let _ = writeln!(r, "{}", line.trim_end());
    }
    emit(args.common.out.as_deref(), |w| Ok(w.write_all(r.as_bytes())?))
}

fn sweep(args: &RunArgs) -> Outcome {
    let (file, eval) = load(&args.common)?;
    let spec = file.sweep_spec()?;
    let rows = run_sweep(&spec, &eval)?;
    emit(args.common.out.as_deref(), |w| Ok(write_sweep_csv(&spec, &rows, w)?))
}

fn validate(args: &RunArgs) -> Outcome {
    let (file, eval) = load(&args.common)?;
    let plan = file.validation_plan()?;
    let report = run_validation(&plan, &eval)?;
    emit(args.common.out.as_deref(), |w| Ok(report.write_csv(w)?))?;
    let total = report.rows.len();
    let failed: Vec<_> = report.failures().collect();
    if failed.is_empty() {
        eprintln!("validation passed: {total} checks");
        return Ok(());
    }
    eprintln!("{:<24}{:<6}{:<6}{:>10}{:>11}{:>14}{:>14}{:>12}", "check", "order", "user", "rho_r_db", "threshold", "reference", "candidate", "tolerance");
    for f in &failed {
        let rho = if f.kind == CheckKind::AsymptoticTrend { "-".to_string() } else { f.rho_r_db.to_string() };
        eprintln!(
            "{:<24}{:<6}{:<6}{:>10}{:>11}{:>14.6e}{:>14.6e}{:>12.3e}",
            f.kind.name(),
            f.order.to_string(),
            f.user.to_string(),
            rho,
            f.threshold,
            f.reference,
            f.candidate,
            f.tolerance
        );
    }
    Err(Failure {
        code: 3,
        message: format!("validation failed: {} of {total} checks outside their envelope", failed.len()),
    })
}

fn optimal(args: &OptimalArgs) -> Outcome {
    let (file, eval) = load(&args.common)?;
    let scenario = file.scenario()?;
    let params = scenario.params()?;
    let targets = scenario.targets()?;
    let method = match args.method {
        MethodArg::All => {
            return Err(Failure {
                code: 1,
                message: "optimal needs a single method".into(),
            })
        }
        m => m.methods()[0],
    };
    if method != Method::MonteCarlo && !args.order.has_analytic() {
        return Err(Error::AnalyticUnavailable(args.order).into());
    }
    let objective = match args.objective {
        ObjectiveArg::Near => Objective::User(User::Near),
        ObjectiveArg::Far => Objective::User(User::Far),
        ObjectiveArg::Both => Objective::Both,
    };
    let best = optimal_alpha(&eval, method, args.order, objective, &targets, &params, args.resolution)?;
    let text = format!(
        "alpha* = {}\nsop* = {}\ngrid index = {} of {}\n",
        best.alpha,
        best.sop.value,
        best.index,
        best.grid.len()
    );
    emit(args.common.out.as_deref(), |w| Ok(w.write_all(text.as_bytes())?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Point(a) => point(a),
        Command::Sweep(a) => sweep(a),
        Command::Validate(a) => validate(a),
        Command::Optimal(a) => optimal(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
