use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisemix::experiments::FigureId;

#[derive(Debug, Parser)]
#[command(name = "noisemix", version, about = "Relaxation and dephasing dynamics of two- and three-level atoms")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Time step (units of 1/ω).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dt: Option<f64>,

    /// Final time ωt.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub horizon: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,

    #[arg(long, global = true, value_enum)]
    pub system: Option<SystemArg>,

    /// Output file (directory for `figure`); standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the correlation kernel G(τ).
    Kernel {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        tau_max: f64,
        #[arg(long, default_value_t = 501)]
        points: usize,
    },
    /// Solve for the O-operator coefficient F(t) (qubit) or Q(t) (Λ atom).
    Coeff {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Use the general Volterra solver even for exponential kernels.
        #[arg(long)]
        volterra: bool,
        /// Run both solvers and report their sup-norm difference.
        #[arg(long, conflicts_with = "volterra")]
        compare: bool,
    },
    /// Propagate the master equation from a pure state.
    Evolve {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Closed-form fidelity of a pure initial state.
    Fidelity {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Qubit fidelity averaged over initial states.
    AverageFidelity {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Quantum-state-diffusion ensemble estimate of the fidelity.
    Trajectories {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        state: StateArgs,
        /// Number of trajectories (default 2000).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Upper bound on trajectory grid nodes.
        #[arg(long, default_value_t = 2048)]
        max_nodes: usize,
    },
    /// Write the curves of a published figure as CSV files plus a manifest.
    Figure {
        /// fig1a, fig1b, fig1c, fig2a, fig2b or fig3
        id: FigureId,
        #[command(flatten)]
        diagram: DiagramArgs,
    },
    /// Region diagram of the Λ atom over (ωt, Γ_α/ω).
    Diagram {
        #[command(flatten)]
        diagram: DiagramArgs,
    },
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Ou,
    Composite,
    Markov,
    Zero,
}

/// Kernel overrides; unspecified values come from the configuration.
#[derive(Debug, Clone, Args, Default)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub kernel: Option<KernelKind>,
    /// Relaxation strength Γ_β/ω.
    #[arg(long, allow_negative_numbers = true)]
    pub strength: Option<f64>,
    /// Relaxation memory rate γ_β/ω.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Dephasing strength Γ_α/ω.
    #[arg(long, allow_negative_numbers = true)]
    pub dephasing_strength: Option<f64>,
    /// Dephasing memory rate γ_α/ω (composite kernel only).
    #[arg(long, allow_negative_numbers = true)]
    pub dephasing_gamma: Option<f64>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct StateArgs {
    /// Initial amplitudes, upper level first, e.g. `1,1` or `0.6,0:0.8`
    /// (`re:im`); rescaled to unit norm. Defaults to the configured state,
    /// else an equal superposition of the upper and first lower level.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DiagramArgs {
    #[arg(long, default_value_t = 100)]
    pub time_points: usize,
    #[arg(long, default_value_t = 60)]
    pub rate_points: usize,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub rate_min: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    pub rate_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Qubit,
    Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    PaperFormula,
    HaarIntegral,
}
