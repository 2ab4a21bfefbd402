//! Command-line front end for `hyponorm`: JSON documents, reports and the
//! `analyze`, `orbit`, `xcheck` and `example` subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyponorm::xcheck::Fault;

pub mod catalog;
pub mod commands;
pub mod documents;
pub mod failure;

pub use catalog::ExampleName;
pub use commands::Output;
pub use documents::{InputDocument, LambdaValue, OptionsDocument, ReportDocument, SystemDocument};
pub use failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    /// Pretty-printed JSON.
    Structured,
}

#[derive(Debug, Parser)]
#[command(
    name = "hyponorm",
    version,
    about = "Lambda-hyponormality and weak-hypercyclicity certificates"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Tolerances {
    /// Support threshold, relative to each function's maximum.
    #[arg(long)]
    pub support_tol: Option<f64>,
    /// PSD slack, relative to the spectral radius of T*T.
    #[arg(long)]
    pub psd_tol: Option<f64>,
    /// Length of the J_n table.
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Assert that the pointwise bound also holds beyond a prefix window.
    #[arg(long)]
    pub tail_bound_asserted: bool,
}

impl Tolerances {
    pub fn overrides(&self) -> OptionsDocument {
        OptionsDocument {
            support_tol: self.support_tol,
            psd_tol: self.psd_tol,
            max_n: self.max_n,
            tail_bound_asserted: self.tail_bound_asserted.then_some(true),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a system or matrix document.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Orbit norms, lambda_n floors and growth certificates for one vector.
    Orbit {
        input: PathBuf,
        /// Comma-separated entries such as "1, 2-0.5i, 3i".
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Cross-check the pointwise criteria against dense oracles on a seeded corpus.
    Xcheck {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Relative agreement required between the two lambda computations.
        #[arg(long, default_value_t = 1e-6)]
        lambda_tol: f64,
        #[command(flatten)]
        tol: Tolerances,
        /// Skew one oracle to check that failures are reported.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Emit or run a built-in example.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
        /// Analyze the emitted document instead of printing it.
        #[arg(long)]
        run: bool,
        /// Window size for paper-discrete.
        #[arg(long, default_value_t = 200)]
        window: usize,
        /// Quadrature nodes for paper-continuous.
        #[arg(long, default_value_t = 4096)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-6)]
        quad_tol: f64,
        #[command(flatten)]
        tol: Tolerances,
    },
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Analyze { input, tol } => {
            let text = read(input)?;
            let report = commands::analyze_text(&text, &input.display().to_string(), &tol.overrides())?;
            Ok(commands::report_output(&report))
        }
        Command::Orbit {
            input,
            vector,
            steps,
            tol,
        } => {
            let text = read(input)?;
            commands::orbit_text(&text, &input.display().to_string(), vector, *steps, &tol.overrides())
        }
        Command::Xcheck {
            seed,
            count,
            lambda_tol,
            tol,
            inject_fault,
        } => {
            let fault = if *inject_fault { Fault::SkewLambda } else { Fault::None };
            commands::xcheck(*seed, *count, *lambda_tol, &tol.overrides(), fault)
        }
        Command::Example {
            name,
            run,
            window,
            nodes,
            quad_tol,
            tol,
        } => match name {
            ExampleName::PaperContinuous => commands::paper_continuous(*nodes, *quad_tol),
            ExampleName::PaperDiscrete => {
                commands::example_document(catalog::paper_discrete(*window)?, *run, &tol.overrides())
            }
            ExampleName::CycleDemo => commands::example_document(catalog::cycle_demo(), *run, &tol.overrides()),
        },
    }
}

/// Renders `output` in the chosen format to stdout or `--output`.
pub fn emit(cli: &Cli, output: &Output) -> Result<(), Failure> {
    let body = match cli.format {
        Format::Text => &output.text,
        Format::Structured => &output.structured,
    };
    match &cli.output {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}
