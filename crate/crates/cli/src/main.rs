use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use synckron::dynamics::{seeded_initial_state, witness_check, WitnessCheckOptions};
use synckron::io::{
    load_initial_state, load_network, load_oscillator, write_trajectory_csv, ReductionReport,
    WitnessReport,
};
use synckron::spectral::default_zero_tol;
use synckron::sweep::{run_sweep, SweepConfig};
use synckron::{
    assemble_descriptor, consistent_initial_state, reduce, simulate, sync_verdict, witness_nonsync,
    CouplingNetwork, Error, OscillatorModel, SimOptions, SpectralVerdict, Tolerances, VerdictClass,
};

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_FAILS: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

/// Synchronization analysis for identical linear oscillators coupled through
/// damper/spring networks with interior nodes.
///
/// Exit status: 0 success (or "synchronizes" for check), 1 input error,
/// 2 numerical failure, 3 verdict fails, 4 verdict inconclusive.
#[derive(Debug, Parser)]
#[command(name = "synckron", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a network (and optionally an oscillator); print a summary as JSON.
    Validate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        oscillator: Option<PathBuf>,
    },
    /// Kron-reduce the network onto its boundary nodes; print Γ, Λ, lifts and residuals as JSON.
    Reduce {
        #[arg(long)]
        network: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Spectral synchronization verdict: exit 0 synchronizes, 3 fails, 4 inconclusive.
    Check {
        #[arg(long)]
        network: PathBuf,
        /// Print the verdict as JSON instead of text.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Integrate the coupled array and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Build a periodic non-synchronizing solution for a failing network; print it as JSON.
    Witness {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        oscillator: PathBuf,
        /// Also integrate the witness and report its periodicity check.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Randomized agreement sweep between the spectral verdict and simulation; writes a JSON report.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
struct TolArgs {
    /// Eigenvalues within zero_tol·max(1, ‖Γ‖∞) of the imaginary axis count as on it.
    #[arg(long, default_value_t = 1e-8)]
    zero_tol: f64,
    /// Absolute bound on the interior constraint residual.
    #[arg(long, default_value_t = 1e-6)]
    dae_tol: f64,
    /// Relative singular-value cutoff for the pseudoinverse.
    #[arg(long, default_value_t = 1e-10)]
    rank_tol: f64,
    /// Relative bound on the reduction's defining-equation residual.
    #[arg(long, default_value_t = 1e-8)]
    certify_tol: f64,
    /// Relative symmetry tolerance for M and K.
    #[arg(long, default_value_t = 1e-9)]
    symmetry_tol: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Result<Tolerances, Error> {
        let t = Tolerances {
            symmetry: self.symmetry_tol,
            rank: self.rank_tol,
            certify: self.certify_tol,
            zero: self.zero_tol,
            dae: self.dae_tol,
        };
        for (name, v) in [
            ("symmetry_tol", t.symmetry),
            ("rank_tol", t.rank),
            ("certify_tol", t.certify),
            ("zero_tol", t.zero),
            ("dae_tol", t.dae),
        ] {
            positive(name, v)?;
        }
        Ok(t)
    }
}

#[derive(Debug, Args)]
#[group(id = "start", multiple = false)]
struct StartArgs {
    /// Seed for a random unit-norm initial state [default: 0 when no start is given].
    #[arg(long, group = "start")]
    seed: Option<u64>,
    /// JSON file {"x": [..], "v": [..], "g": [..]}; g is optional and completed when absent.
    #[arg(long, group = "start")]
    initial: Option<PathBuf>,
    /// Start from the non-synchronizing witness.
    #[arg(long, group = "start")]
    witness: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    oscillator: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Write every k-th step.
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    start: StartArgs,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 200)]
    cases: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Largest network size.
    #[arg(long, default_value_t = 6)]
    max_p: usize,
    /// Largest oscillator dimension.
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    #[arg(long, default_value_t = 200.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Tail-to-head sync-distance ratio that counts as decay.
    #[arg(long, default_value_t = 1e-3)]
    decay_ratio_tol: f64,
    /// Synchronizing margins at or below this are redrawn.
    #[arg(long, default_value_t = 1e-6)]
    gray_band: f64,
    /// Also build and integrate a witness for every failing case.
    #[arg(long)]
    witness: bool,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
}

fn positive(name: &str, v: f64) -> Result<f64, Error> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn load_pair(network: &Path, oscillator: &Path) -> Result<(CouplingNetwork, OscillatorModel)> {
    Ok((load_network(network)?, load_oscillator(oscillator)?))
}

fn verdict_for(
    net: &CouplingNetwork,
    tol: &Tolerances,
) -> Result<(synckron::ReducedCoupling, SpectralVerdict)> {
    let reduced = reduce(net, tol)?;
    let zero = default_zero_tol(&reduced.gamma, tol.zero);
    let verdict = sync_verdict(&reduced.gamma, Some(zero))?;
    Ok((reduced, verdict))
}

#[derive(Serialize)]
struct ValidateSummary {
    p: usize,
    q: usize,
    interior: usize,
    labels: Vec<String>,
    dampers: usize,
    springs: usize,
    oscillator_dim: Option<usize>,
}

fn cmd_validate(network: &Path, oscillator: Option<&Path>) -> Result<u8> {
    let net = load_network(network)?;
    let n = oscillator.map(load_oscillator).transpose()?.map(|o| o.n());
    print_json(
        &ValidateSummary {
            p: net.p(),
            q: net.q(),
            interior: net.interior(),
            labels: net.labels().to_vec(),
            dampers: net.dampers().len(),
            springs: net.springs().len(),
            oscillator_dim: n,
        },
        None,
    )?;
    Ok(0)
}

fn cmd_reduce(network: &Path, tol: &TolArgs) -> Result<u8> {
    let tol = tol.tolerances()?;
    let net = load_network(network)?;
    let reduced = reduce(&net, &tol)?;
    print_json(&ReductionReport::new(&net, &reduced), None)?;
    Ok(0)
}

fn class_name(class: VerdictClass) -> &'static str {
    match class {
        VerdictClass::Synchronizes => "synchronizes",
        VerdictClass::Fails => "fails",
        VerdictClass::Inconclusive => "inconclusive-leaning-fail",
    }
}

fn cmd_check(network: &Path, json: bool, tol: &TolArgs) -> Result<u8> {
    let tol = tol.tolerances()?;
    let net = load_network(network)?;
    let (_, verdict) = verdict_for(&net, &tol)?;
    if json {
        print_json(&verdict, None)?;
    } else {
        let mut out = output(None)?;
        writeln!(out, "verdict: {}", class_name(verdict.class))?;
        writeln!(out, "margin: {}", verdict.margin)?;
        writeln!(out, "zero_tol: {:e}", verdict.zero_tol)?;
        writeln!(
            out,
            "multiplicity_at_origin: {}",
            verdict.multiplicity_at_origin
        )?;
        writeln!(out, "spectrum:")?;
        for (k, z) in verdict.eigenvalues.iter().enumerate() {
            writeln!(out, "  lambda_{} = {} {:+}j", k + 1, z.re, z.im)?;
        }
        out.flush()?;
    }
    Ok(match verdict.class {
        VerdictClass::Synchronizes => 0,
        VerdictClass::Fails => EXIT_FAILS,
        VerdictClass::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    let tol = args.tol.tolerances()?;
    let (net, osc) = load_pair(&args.network, &args.oscillator)?;
    let sys = assemble_descriptor(&net, &osc, &tol)?;
    let initial = if let Some(path) = &args.start.initial {
        let (x, v, g) = load_initial_state(path)?.parts();
        consistent_initial_state(&sys, &x, &v, g.as_ref(), tol.dae)?.state
    } else if args.start.witness {
        let (reduced, verdict) = verdict_for(&net, &tol)?;
        witness_nonsync(&net, &osc, &reduced, &verdict)?.initial_state
    } else {
        seeded_initial_state(&sys, args.start.seed.unwrap_or(0), tol.dae)?.state
    };
    let opts = SimOptions {
        horizon: args.horizon,
        dt: args.dt,
        record_every: args.record_every,
        dae_tol: tol.dae,
    };
    let traj = simulate(&sys, &initial, &opts)?;
    let mut out = output(args.out.as_deref())?;
    write_trajectory_csv(&mut out, &traj)?;
    out.flush()?;
    Ok(0)
}

#[derive(Serialize)]
struct WitnessOutput {
    #[serde(flatten)]
    witness: WitnessReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<synckron::dynamics::WitnessCheck>,
}

fn cmd_witness(network: &Path, oscillator: &Path, check: bool, tol: &TolArgs) -> Result<u8> {
    let tol = tol.tolerances()?;
    let (net, osc) = load_pair(network, oscillator)?;
    let (reduced, verdict) = verdict_for(&net, &tol)?;
    let witness = witness_nonsync(&net, &osc, &reduced, &verdict)?;
    let check = if check {
        let sys = assemble_descriptor(&net, &osc, &tol)?;
        Some(witness_check(
            &sys,
            &witness,
            &WitnessCheckOptions::default(),
            tol.dae,
        )?)
    } else {
        None
    };
    print_json(
        &WitnessOutput {
            witness: (&witness).into(),
            check,
        },
        None,
    )?;
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8> {
    let cfg = SweepConfig {
        cases: args.cases,
        seed: args.seed,
        max_p: args.max_p,
        max_n: args.max_n,
        horizon: positive("horizon", args.horizon)?,
        dt: positive("dt", args.dt)?,
        decay_ratio_tol: positive("decay_ratio_tol", args.decay_ratio_tol)?,
        gray_band: positive("gray_band", args.gray_band)?,
        witness: args.witness,
        tolerances: args.tol.tolerances()?,
        ..SweepConfig::default()
    };
    let report = run_sweep(&cfg)?;
    print_json(&report, args.out.as_deref())?;
    eprintln!(
        "sweep: {}/{} cases agree, {} disagreements",
        report.agreements,
        report.cases,
        report.disagreements.len()
    );
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate {
            network,
            oscillator,
        } => cmd_validate(network, oscillator.as_deref()),
        Command::Reduce { network, tol } => cmd_reduce(network, tol),
        Command::Check { network, json, tol } => cmd_check(network, *json, tol),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Witness {
            network,
            oscillator,
            check,
            tol,
        } => cmd_witness(network, oscillator, *check, tol),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err
                .downcast_ref::<Error>()
                .is_some_and(|e| !e.is_input_error());
            ExitCode::from(if numerical {
                EXIT_NUMERICAL
            } else {
                EXIT_INPUT
            })
        }
    }
}
