use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qtraj_cli::scenario::Setting;
use qtraj_cli::{run, RunOptions, Scenario, Task};
use qtraj_core::algebra::text::{infer_dim, parse_series, ParseContext};
use qtraj_core::algebra::{Param, HBAR};
use qtraj_core::flow::DEFAULT_HBAR_ORDER;
use qtraj_core::moyal::{star, StarProductSpec};

#[derive(Parser)]
#[command(name = "qtraj", version, about = "Exact checks of quantum Hamiltonian flows and their intertwiners")]
struct Cli {
    /// Truncation order in h.
    #[arg(long, global = true)]
    hbar_order: Option<u32>,
    /// Truncation order in t.
    #[arg(long, global = true)]
    t_order: Option<u32>,
    /// Also write the output to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Record wall time per task.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct SystemArgs {
    /// harmonic, coupled2 or x2p2
    #[arg(long, required_unless_present = "hamiltonian", conflicts_with = "hamiltonian")]
    builtin: Option<String>,
    /// Polynomial literal, e.g. "p^2/2 + x^4"
    #[arg(long)]
    hamiltonian: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Constant value, e.g. --const k=3/4
    #[arg(long = "const", value_name = "NAME=VALUE")]
    constants: Vec<String>,
    /// Degree bound of the test monomials.
    #[arg(long)]
    degree: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Moyal product of two polynomial literals.
    Star { f: String, g: String },
    /// Heisenberg evolution of observables.
    Evolve {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long = "observable")]
        observables: Vec<String>,
    },
    /// Quantum flow of the coordinates.
    Flow {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Quantum and classical canonicity of the flow.
    Check {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Verify an intertwiner for the flow.
    VerifyS {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        s_operator: Option<String>,
    },
    /// Search for an intertwiner order by order in h.
    SolveS {
        #[command(flatten)]
        system: SystemArgs,
        /// Largest derivative order in the ansatz.
        #[arg(long)]
        order: Option<u32>,
        /// Largest coefficient degree in the ansatz.
        #[arg(long)]
        coeff_degree: Option<u32>,
    },
    /// Quantum composition of the flow at two times.
    Compose {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        s_operator: Option<String>,
        #[arg(long)]
        t1_order: Option<u32>,
        #[arg(long)]
        t2_order: Option<u32>,
    },
    /// Run a scenario file.
    Run { scenario: PathBuf },
}

fn flag(name: &str, value: impl ToString) -> Setting {
    Setting::new(format!("--{}", name.replace('_', "-")), name, value.to_string())
}

impl SystemArgs {
    fn settings(&self, cli: &Cli, task: Task) -> Result<Vec<Setting>, String> {
        let mut out = vec![flag("tasks", task)];
        if let Some(b) = &self.builtin {
            out.push(flag("builtin", b));
        }
        if let Some(h) = &self.hamiltonian {
            out.push(flag("hamiltonian", h));
        }
        if let Some(d) = self.dim {
            out.push(flag("dim", d));
        }
        if let Some(d) = self.degree {
            out.push(flag("test_degree", d));
        }
        if let Some(k) = cli.hbar_order {
            out.push(flag("hbar_order", k));
        }
        if let Some(l) = cli.t_order {
            out.push(flag("t_order", l));
        }
        for c in &self.constants {
            let (name, value) = c.split_once('=').ok_or_else(|| format!("--const expects NAME=VALUE, got `{c}`"))?;
            out.push(Setting::new("--const", name.trim(), value.trim()));
        }
        Ok(out)
    }
}

fn scenario(cli: &Cli) -> Result<Scenario, String> {
    let with = |system: &SystemArgs, task: Task, extra: Vec<Option<Setting>>| {
        let mut settings = system.settings(cli, task)?;
        settings.extend(extra.into_iter().flatten());
        Scenario::from_settings(&settings).map_err(|e| e.to_string())
    };
    match &cli.command {
        Command::Star { .. } => unreachable!("handled separately"),
        Command::Evolve { system, observables } => {
            let obs = (!observables.is_empty()).then(|| flag("observables", observables.join(", ")));
            with(system, Task::Evolve, vec![obs])
        }
        Command::Flow { system } => with(system, Task::Flow, vec![]),
        Command::Check { system } => with(system, Task::Canonicity, vec![]),
        Command::VerifyS { system, s_operator } => {
            with(system, Task::VerifyS, vec![s_operator.as_ref().map(|s| flag("s_operator", s))])
        }
        Command::SolveS {
            system,
            order,
            coeff_degree,
        } => with(
            system,
            Task::SolveS,
            vec![order.map(|r| flag("solve_order", r)), coeff_degree.map(|c| flag("solve_degree", c))],
        ),
        Command::Compose {
            system,
            s_operator,
            t1_order,
            t2_order,
        } => with(
            system,
            Task::Compose,
            vec![
                s_operator.as_ref().map(|s| flag("s_operator", s)),
                t1_order.map(|l| flag("t1_order", l)),
                t2_order.map(|l| flag("t2_order", l)),
            ],
        ),
        Command::Run { scenario } => Scenario::load(scenario)
            .and_then(|s| s.with_orders(cli.hbar_order, cli.t_order))
            .map_err(|e| e.to_string()),
    }
}

fn star_text(cli: &Cli, f: &str, g: &str) -> Result<String, String> {
    let dim = infer_dim(f).max(infer_dim(g));
    let k = cli.hbar_order.unwrap_or(DEFAULT_HBAR_ORDER);
    let ctx = ParseContext::new(dim).with_params(&[Param::new(HBAR, k)]);
    let f = parse_series(f, &ctx).map_err(|e| format!("first operand: {e}"))?;
    let g = parse_series(g, &ctx).map_err(|e| format!("second operand: {e}"))?;
    let fg = star(&StarProductSpec::Moyal, &f, &g).map_err(|e| e.to_string())?;
    Ok(match cli.format {
        Format::Text => format!("{fg}\n"),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&fg).expect("series serialize")),
    })
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    print!("{text}");
    if let Some(path) = &cli.out {
        std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Star { f, g } => star_text(&cli, f, g).and_then(|t| emit(&cli, &t)).map(|()| true),
        _ => scenario(&cli).and_then(|sc| {
            let report = run(&sc, &RunOptions { timing: cli.timing });
            let text = match cli.format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json(),
            };
            emit(&cli, &text).map(|()| report.passed)
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
