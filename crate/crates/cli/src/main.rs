//! `phasebal` — simulate a low-voltage radial feeder, search phase
//! reconnections with the crowding GA, validate data files and export the
//! builtin scenarios.
//!
//! Exit codes: 0 success, 1 input/validation error, 2 solver
//! non-convergence on a simulate run, 3 internal error.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phasebal::report::{self, SimulationSummary};
use phasebal::scenarios::{self, Scheme};
use phasebal::{
    ga, io, metrics, GaConfig, LoadProfile, Network, ObjectiveWeights, PhaseAssignment,
    SolverOptions,
};

#[derive(Parser)]
#[command(
    name = "phasebal",
    version,
    about = "Phase rebalancing for low-voltage radial feeders",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a feeder and print the per-phase end-of-line report
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        solver: SolverFlags,
        /// Apply a reconnection plan (CSV from `optimize`) before solving
        #[arg(long, value_name = "FILE")]
        apply_solution: Option<PathBuf>,
        /// Export per-snapshot bus voltages along the feeder (CSV)
        #[arg(long, value_name = "FILE")]
        export_voltage_profile: Option<PathBuf>,
        /// Config file with [weights], [ga] and [solver] sections
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Search phase reconnections with the crowding GA
    Optimize {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        ga: GaFlags,
        /// Directory for solution.csv and history.csv
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
        /// Config file with [weights], [ga] and [solver] sections
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Check a network file (and optionally a profile) against the
    /// structural invariants
    Validate {
        /// Network description file (TOML)
        #[arg(long, value_name = "FILE")]
        network: PathBuf,
        /// Load profile file (CSV)
        #[arg(long, value_name = "FILE")]
        profile: Option<PathBuf>,
    },
    /// Write a builtin scenario as network and profile files
    ExportScenario {
        /// Builtin scenario: 112233, 123123 or 111
        #[arg(long, value_name = "SCHEME")]
        scenario: Scheme,
        /// Customer count of the feeder
        #[arg(long, default_value_t = 60)]
        customers: usize,
        /// Constant active power per customer, watts
        #[arg(long, default_value_t = 200.0)]
        load_watts: f64,
        /// Reactive power as a fraction of active power
        #[arg(long, default_value_t = 0.10)]
        reactive_fraction: f64,
        /// Snapshot count of the fabricated profile
        #[arg(long, default_value_t = 1)]
        snapshots: usize,
        /// Output directory
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Builtin scenario: 112233, 123123 or 111
    #[arg(long, value_name = "SCHEME", conflicts_with = "network")]
    scenario: Option<Scheme>,
    /// Network description file (TOML)
    #[arg(long, value_name = "FILE")]
    network: Option<PathBuf>,
    /// Customer count of the builtin scenario
    #[arg(long, default_value_t = 60)]
    customers: usize,
    /// Load profile file (CSV); without it a constant profile is fabricated
    #[arg(long, value_name = "FILE")]
    profile: Option<PathBuf>,
    /// Constant profile: active power per customer, watts
    #[arg(long, default_value_t = 200.0)]
    load_watts: f64,
    /// Constant profile: reactive power as a fraction of active power
    #[arg(long, default_value_t = 0.10)]
    reactive_fraction: f64,
    /// Constant profile: snapshot count
    #[arg(long, default_value_t = 1)]
    snapshots: usize,
}

#[derive(Args)]
struct SolverFlags {
    /// Convergence tolerance relative to the source voltage
    #[arg(long)]
    tolerance: Option<f64>,
    /// Sweep iteration cap
    #[arg(long)]
    max_iterations: Option<u32>,
}

#[derive(Args)]
struct GaFlags {
    /// Imbalance weight
    #[arg(long)]
    alpha: Option<f64>,
    /// Voltage-drop weight
    #[arg(long)]
    beta: Option<f64>,
    /// Change-count weight
    #[arg(long)]
    gamma: Option<f64>,
    /// Imbalance full-scale value, percent
    #[arg(long)]
    b_max: Option<f64>,
    /// Voltage-drop full-scale value, percent
    #[arg(long)]
    dv_max: Option<f64>,
    /// Change-count full-scale value
    #[arg(long)]
    n_max: Option<f64>,
    /// RNG seed; identical seeds reproduce runs bit for bit
    #[arg(long)]
    seed: Option<u64>,
    /// Population size (even, >= 4)
    #[arg(long)]
    population: Option<usize>,
    /// Stop after this many generations without improvement
    #[arg(long)]
    stall: Option<u32>,
    /// Hard generation cap
    #[arg(long)]
    max_generations: Option<u32>,
    /// Per-gene mutation probability (crowding default: 0)
    #[arg(long)]
    mutation_prob: Option<f64>,
}

enum Failure {
    /// Bad inputs: parse errors, invariant violations, missing files.
    Validation(String),
    /// The simulate run did not converge.
    NonConvergence(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

impl From<io::FileError> for Failure {
    fn from(e: io::FileError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<phasebal::Error> for Failure {
    fn from(e: phasebal::Error) -> Self {
        Failure::Internal(anyhow::Error::new(e))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::NonConvergence(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            input,
            solver,
            apply_solution,
            export_voltage_profile,
            config,
        } => cmd_simulate(input, solver, apply_solution, export_voltage_profile, config),
        Command::Optimize {
            input,
            solver,
            ga,
            out_dir,
            config,
        } => cmd_optimize(input, solver, ga, out_dir, config),
        Command::Validate { network, profile } => cmd_validate(network, profile),
        Command::ExportScenario {
            scenario,
            customers,
            load_watts,
            reactive_fraction,
            snapshots,
            out_dir,
        } => cmd_export_scenario(
            scenario,
            customers,
            load_watts,
            reactive_fraction,
            snapshots,
            out_dir,
        ),
    }
}

/// Resolves defaults, config file and flags into the effective parameters.
fn effective_config(
    config_path: Option<&Path>,
    solver_flags: &SolverFlags,
    ga_flags: Option<&GaFlags>,
) -> Result<(ObjectiveWeights, GaConfig, SolverOptions), Failure> {
    let mut weights = ObjectiveWeights::default();
    let mut ga_config = GaConfig::default();
    let mut solver = SolverOptions::default();

    if let Some(path) = config_path {
        let file = config::ConfigFile::read(path).map_err(|e| Failure::Validation(format!("{e:#}")))?;
        file.apply(&mut weights, &mut ga_config, &mut solver);
    }

    config::set(&mut solver.tolerance, solver_flags.tolerance);
    config::set(&mut solver.max_iterations, solver_flags.max_iterations);

    if let Some(flags) = ga_flags {
        config::set(&mut weights.alpha, flags.alpha);
        config::set(&mut weights.beta, flags.beta);
        config::set(&mut weights.gamma, flags.gamma);
        config::set(&mut weights.b_max, flags.b_max);
        config::set(&mut weights.dv_max, flags.dv_max);
        config::set(&mut weights.n_max, flags.n_max);
        config::set(&mut ga_config.rng_seed, flags.seed);
        config::set(&mut ga_config.population_size, flags.population);
        config::set(&mut ga_config.stall_generations, flags.stall);
        config::set(&mut ga_config.max_generations, flags.max_generations);
        config::set(&mut ga_config.mutation_probability, flags.mutation_prob);
    }

    weights
        .validate()
        .map_err(|e| Failure::Validation(e.to_string()))?;
    ga_config.weights = weights;
    ga_config.solver = solver;
    Ok((weights, ga_config, solver))
}

/// Loads or builds the network and profile named by the input flags.
fn resolve_input(input: &InputArgs) -> Result<(Network, LoadProfile, String), Failure> {
    let (network, label) = match (&input.network, input.scenario) {
        (Some(path), _) => {
            let network = io::read_network(path)?;
            (network, format!("network {}", path.display()))
        }
        (None, Some(scheme)) => {
            if input.customers == 0 {
                return Err(Failure::Validation(
                    "--customers must be at least 1".into(),
                ));
            }
            let network = scenarios::scenario_network(scheme, input.customers);
            (
                network,
                format!("scenario {} ({} customers)", scheme, input.customers),
            )
        }
        (None, None) => {
            return Err(Failure::Validation(
                "pick an input: --scenario <SCHEME> or --network <FILE>".into(),
            ))
        }
    };

    let profile = match &input.profile {
        Some(path) => {
            let profile = io::read_profile(path)?;
            let violations = network.validate_profile(&profile);
            if !violations.is_empty() {
                return Err(Failure::Validation(format!(
                    "{} does not cover the network:\n  {}",
                    path.display(),
                    violations
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join("\n  ")
                )));
            }
            profile
        }
        None => {
            if input.snapshots == 0 {
                return Err(Failure::Validation(
                    "--snapshots must be at least 1".into(),
                ));
            }
            if input.load_watts < 0.0 {
                return Err(Failure::Validation(
                    "--load-watts must not be negative".into(),
                ));
            }
            scenarios::constant_profile(
                &network,
                input.load_watts,
                input.reactive_fraction,
                input.snapshots,
            )
        }
    };
    let label = format!("{label}, {} snapshot(s)", profile.len());
    Ok((network, profile, label))
}

/// Prints one summary block, paper precision: voltages 1 decimal, percents 2.
fn format_summary(summary: &SimulationSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<26}{:>10}{:>10}{:>10}",
        "Phase", "A", "B", "C"
    );
    let p = &summary.per_phase;
    let _ = writeln!(
        out,
        "{:<26}{:>10.1}{:>10.1}{:>10.1}",
        "End-of-line voltage [V]", p[0].end_voltage_v, p[1].end_voltage_v, p[2].end_voltage_v
    );
    let _ = writeln!(
        out,
        "{:<26}{:>10.2}{:>10.2}{:>10.2}",
        "Voltage drop [%]", p[0].drop_percent, p[1].drop_percent, p[2].drop_percent
    );
    let _ = writeln!(
        out,
        "{:<26}{:>10.1}{:>10.1}{:>10.1}",
        "Phase current [A]", p[0].current_a, p[1].current_a, p[2].current_a
    );
    let _ = writeln!(
        out,
        "{:<26}{:>10}{:>10}{:>10}",
        "Customers", p[0].customers, p[1].customers, p[2].customers
    );
    let _ = writeln!(out, "{:<26}{:>10.2}", "Imbalance B [%]", summary.imbalance_b);
    let _ = writeln!(
        out,
        "{:<26}{:>10.2}",
        "Max voltage drop [%]", summary.max_drop_percent
    );
    out
}

fn cmd_simulate(
    input: InputArgs,
    solver: SolverFlags,
    apply_solution: Option<PathBuf>,
    export_voltage_profile: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<(), Failure> {
    let (_, _, options) = effective_config(config.as_deref(), &solver, None)?;
    let (network, profile, label) = resolve_input(&input)?;

    let assignment = match &apply_solution {
        Some(path) => io::read_solution(path, &network)?,
        None => PhaseAssignment::initial(&network),
    };

    let (summary, results) = report::summarize(&network, &assignment, &profile, &options)?;

    println!("{label}");
    if let Some(path) = &apply_solution {
        let changes = metrics::change_count(&PhaseAssignment::initial(&network), &assignment)?;
        println!("with plan {} ({changes} reconnections)", path.display());
    }
    println!();
    print!("{}", format_summary(&summary));

    if let Some(path) = &export_voltage_profile {
        io::write_voltage_profile(path, &network, &results)?;
        println!("\nWrote {}", path.display());
    }

    if !summary.converged {
        return Err(Failure::NonConvergence(
            "load flow did not converge; the feeder is overloaded under this profile".into(),
        ));
    }
    Ok(())
}

fn cmd_optimize(
    input: InputArgs,
    solver: SolverFlags,
    ga_flags: GaFlags,
    out_dir: PathBuf,
    config: Option<PathBuf>,
) -> Result<(), Failure> {
    let (weights, ga_config, options) =
        effective_config(config.as_deref(), &solver, Some(&ga_flags))?;
    let (network, profile, label) = resolve_input(&input)?;

    println!("Optimizing {label}");
    println!(
        "  population {}, stall window {}, max {} generations, seed {}, mutation {}",
        ga_config.population_size,
        ga_config.stall_generations,
        ga_config.max_generations,
        ga_config.rng_seed,
        ga_config.mutation_probability
    );
    println!(
        "  weights alpha={} beta={} gamma={} (B_max={} dV_max={} N_max={})",
        weights.alpha, weights.beta, weights.gamma, weights.b_max, weights.dv_max, weights.n_max
    );

    let result = ga::run(&network, &profile, &ga_config).map_err(Failure::from)?;

    let initial = PhaseAssignment::initial(&network);
    let before_report = metrics::evaluate(&network, &initial, &profile, &weights, &options)?;
    let (before, _) = report::summarize(&network, &initial, &profile, &options)?;
    let (after, _) = report::summarize(&network, &result.best, &profile, &options)?;

    println!("\nBefore:");
    print!("{}", format_summary(&before));
    println!("\nAfter ({} reconnections):", result.best_report.changes);
    print!("{}", format_summary(&after));

    println!();
    println!("{:<26}{:>10}{:>10}", "Objectives", "Before", "After");
    println!(
        "{:<26}{:>10.2}{:>10.2}",
        "Imbalance B [%]", before_report.imbalance_b, result.best_report.imbalance_b
    );
    println!(
        "{:<26}{:>10.2}{:>10.2}",
        "Max voltage drop [%]", before_report.voltage_drop, result.best_report.voltage_drop
    );
    println!(
        "{:<26}{:>10}{:>10}",
        "Changes N", before_report.changes, result.best_report.changes
    );
    println!(
        "{:<26}{:>10.5}{:>10.5}",
        "Fitness f(S)", before_report.fitness, result.best_report.fitness
    );
    println!(
        "\nStopped after {} generations (stall window {}).",
        result.generations_run, ga_config.stall_generations
    );

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Internal(anyhow::Error::new(e).context("creating output directory")))?;
    let solution_path = out_dir.join("solution.csv");
    let history_path = out_dir.join("history.csv");
    io::write_solution(&solution_path, &initial, &result.best)?;
    io::write_history(&history_path, &result.history)?;
    println!(
        "Wrote {} ({} reconnections)",
        solution_path.display(),
        result.best_report.changes
    );
    println!(
        "Wrote {} ({} generations)",
        history_path.display(),
        result.history.len()
    );
    Ok(())
}

fn cmd_validate(network_path: PathBuf, profile_path: Option<PathBuf>) -> Result<(), Failure> {
    let network = io::read_network(&network_path)?;
    if let Some(path) = &profile_path {
        let profile = io::read_profile(path)?;
        let violations = network.validate_profile(&profile);
        if !violations.is_empty() {
            return Err(Failure::Validation(format!(
                "{} does not cover the network:\n  {}",
                path.display(),
                violations
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("\n  ")
            )));
        }
        println!(
            "OK: {} and {} are consistent ({} buses, {} segments, {} customers, {} snapshots)",
            network_path.display(),
            path.display(),
            network.buses.len(),
            network.segments.len(),
            network.customers.len(),
            profile.len()
        );
    } else {
        println!(
            "OK: {} is valid ({} buses, {} segments, {} customers)",
            network_path.display(),
            network.buses.len(),
            network.segments.len(),
            network.customers.len()
        );
    }
    Ok(())
}

fn cmd_export_scenario(
    scheme: Scheme,
    customers: usize,
    load_watts: f64,
    reactive_fraction: f64,
    snapshots: usize,
    out_dir: PathBuf,
) -> Result<(), Failure> {
    if customers == 0 {
        return Err(Failure::Validation("--customers must be at least 1".into()));
    }
    if snapshots == 0 {
        return Err(Failure::Validation("--snapshots must be at least 1".into()));
    }
    let network = scenarios::scenario_network(scheme, customers);
    let profile = scenarios::constant_profile(&network, load_watts, reactive_fraction, snapshots);

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Internal(anyhow::Error::new(e).context("creating output directory")))?;
    let network_path = out_dir.join(format!("network-{}.toml", scheme));
    let profile_path = out_dir.join(format!("profile-{}.csv", scheme));
    io::write_network(&network_path, &network)?;
    io::write_profile(&profile_path, &profile)?;
    println!("Wrote {}", network_path.display());
    println!("Wrote {}", profile_path.display());
    Ok(())
}
