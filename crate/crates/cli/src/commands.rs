//! Subcommand implementations. Each one resolves its inputs from the
//! configuration plus flag overrides, calls into the library, and emits one
//! table (or, for `figure`, a directory of tables and a manifest).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::info;
use noisemix::coeffs::{solve_coefficient, solve_riccati, solve_volterra, CoefficientSolution};
use noisemix::dynamics::{
    average_fidelity_qubit, fidelity_lambda, fidelity_qubit, propagate_lambda, propagate_qubit, AverageVariant,
    DensityMatrix, FidelityTrace, PureState,
};
use noisemix::experiments::{
    classify_regions, reproduce_figure_with, ClaimCheck, Curve, CurveKind, DiagramConfig, FigureId, RegionCode,
    ScenarioParams, System,
};
use noisemix::kernels::KernelSpec;
use noisemix::trajectories::{coarsen_for_trajectories, run_qsd_ensemble, EnsembleSpec};
use noisemix::{Cx, TimeGrid64};
use serde::Serialize;

use crate::args::{Cli, Command, DiagramArgs, FormatArg, KernelArgs, KernelKind, StateArgs, SystemArg, VariantArg};
use crate::config::{
    parse_config, EnsembleConfig, Format, GridConfig, Initial, KernelConfig, OuConfig, RunConfig,
};
use crate::error::CliError;
use crate::output::{emit, write_atomic, Cell, Table};

pub const DEFAULT_TRAJECTORIES: usize = 2000;

fn bad(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Validation { key: key.to_string(), reason: reason.into() }
}

/// Loads the configuration file (if any) and applies the global flags.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(dt) = cli.dt {
        config.grid.dt = dt;
    }
    if let Some(h) = cli.horizon {
        config.grid.horizon = h;
    }
    if let Some(w) = cli.omega {
        config.omega = w;
    }
    if let Some(s) = cli.system {
        let system = match s {
            SystemArg::Qubit => System::Qubit,
            SystemArg::Lambda => System::Lambda,
        };
        if system != config.system {
            // A configured state belongs to the other system.
            config.initial = None;
        }
        config.system = system;
    }
    if let Some(f) = cli.format {
        config.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(out) = &cli.out {
        config.output.path = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

/// Runs one invocation on a dedicated thread pool of `--threads` workers
/// (all available cores by default).
pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = effective_config(&cli)?;
    let threads = match cli.threads {
        Some(0) => return Err(bad("threads", "must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| bad("threads", e.to_string()))?;
    pool.install(|| dispatch(&cli.command, &config))
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<(), CliError> {
    let out = config.output.path.as_deref();
    let format = config.output.format;
    match command {
        Command::Kernel { kernel, tau_max, points } => {
            let spec = resolve_kernel(config, kernel)?;
            emit(&kernel_table(&spec, *tau_max, *points)?, format, out)
        }
        Command::Coeff { kernel, volterra, compare } => {
            let spec = resolve_kernel(config, kernel)?;
            let grid = config.time_grid()?;
            let kind = config.system.kind();
            if *compare {
                let ric = solve_riccati(&spec, config.omega, grid, kind)?;
                let vol = solve_volterra(&spec, config.omega, grid, kind)?;
                let (table, sup) = comparison_table(&ric, &vol);
                eprintln!("sup_norm_difference = {sup:.6e}");
                emit(&table, format, out)
            } else {
                let sol = if *volterra {
                    solve_volterra(&spec, config.omega, grid, kind)?
                } else {
                    solve_coefficient(&spec, config.omega, grid, kind)?
                };
                emit(&coefficient_table(&sol), format, out)
            }
        }
        Command::Evolve { kernel, state } => {
            let spec = resolve_kernel(config, kernel)?;
            let psi = resolve_state(config, state)?;
            let coeff = solve_coefficient(&spec, config.omega, config.time_grid()?, config.system.kind())?;
            emit(&evolve_table(config, &coeff, &psi)?, format, out)
        }
        Command::Fidelity { kernel, state } => {
            let spec = resolve_kernel(config, kernel)?;
            let psi = resolve_state(config, state)?;
            let coeff = solve_coefficient(&spec, config.omega, config.time_grid()?, config.system.kind())?;
            let trace = closed_form_fidelity(config.system, &psi, &coeff)?;
            emit(&trace_table(&trace, "fidelity"), format, out)
        }
        Command::AverageFidelity { kernel, variant } => {
            if config.system != System::Qubit {
                return Err(bad("system", "state-averaged fidelity is defined for the qubit only"));
            }
            let spec = resolve_kernel(config, kernel)?;
            let variant = match variant {
                Some(VariantArg::PaperFormula) => AverageVariant::PaperFormula,
                Some(VariantArg::HaarIntegral) => AverageVariant::HaarIntegral,
                None => config.average_variant,
            };
            let coeff = solve_coefficient(&spec, config.omega, config.time_grid()?, config.system.kind())?;
            let trace = average_fidelity_qubit(&coeff, variant)?;
            emit(&trace_table(&trace, variant.name()), format, out)
        }
        Command::Trajectories { kernel, state, n, seed, max_nodes } => {
            let spec = resolve_kernel(config, kernel)?;
            let psi = resolve_state(config, state)?;
            let configured = config.ensemble.unwrap_or(EnsembleConfig { count: DEFAULT_TRAJECTORIES, seed: 0 });
            let ensemble = EnsembleSpec::new(n.unwrap_or(configured.count), seed.unwrap_or(configured.seed))
                .map_err(|e| bad("n", e.to_string()))?;
            emit(&trajectory_table(config, &spec, &psi, ensemble, *max_nodes)?, format, out)
        }
        Command::Figure { id, diagram } => {
            let dir = out.ok_or_else(|| bad("out", "`figure` needs an output directory"))?;
            write_figure(*id, config, diagram, dir)
        }
        Command::Diagram { diagram } => {
            let cfg = diagram_config(config, diagram)?;
            let d = classify_regions(&cfg)?;
            emit(&diagram_table(&d), format, out)
        }
        Command::Config => {
            let text = config.to_toml();
            match out {
                Some(p) => write_atomic(p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

/// Applies kernel flags on top of the configured kernel.
pub fn resolve_kernel(config: &RunConfig, args: &KernelArgs) -> Result<KernelSpec<f64>, CliError> {
    let base = config.kernel;
    let default_beta = OuConfig { strength: 1.0, memory_rate: 0.1 };
    let (mut beta, alpha_strength, alpha_rate, base_kind) = match base {
        KernelConfig::Ou { strength, memory_rate } => (OuConfig { strength, memory_rate }, None, None, KernelKind::Ou),
        KernelConfig::Composite { beta, alpha } => {
            (beta, Some(alpha.strength), Some(alpha.memory_rate), KernelKind::Composite)
        }
        KernelConfig::MarkovDephasedOu { beta, dephasing_strength } => {
            (beta, Some(dephasing_strength), None, KernelKind::Markov)
        }
        KernelConfig::Zero => (default_beta, None, None, KernelKind::Zero),
    };
    beta.strength = args.strength.unwrap_or(beta.strength);
    beta.memory_rate = args.gamma.unwrap_or(beta.memory_rate);
    let dephasing_strength = args.dephasing_strength.or(alpha_strength).unwrap_or(1.0);
    let dephasing_rate = args.dephasing_gamma.or(alpha_rate).unwrap_or(1.0);
    let resolved = match args.kernel.unwrap_or(base_kind) {
        KernelKind::Ou => KernelConfig::Ou { strength: beta.strength, memory_rate: beta.memory_rate },
        KernelKind::Composite => KernelConfig::Composite {
            beta,
            alpha: OuConfig { strength: dephasing_strength, memory_rate: dephasing_rate },
        },
        KernelKind::Markov => KernelConfig::MarkovDephasedOu { beta, dephasing_strength },
        KernelKind::Zero => KernelConfig::Zero,
    };
    resolved.validate()?;
    Ok(resolved.to_spec())
}

/// Parses `a,b[,c]` where each amplitude is `re` or `re:im`.
pub fn parse_state(text: &str, dim: usize) -> Result<PureState<f64>, CliError> {
    let amps = text
        .split(',')
        .map(|part| {
            let mut it = part.trim().splitn(2, ':');
            let re = it.next().unwrap_or("").trim().parse::<f64>();
            let im = it.next().map_or(Ok(0.0), |s| s.trim().parse::<f64>());
            match (re, im) {
                (Ok(re), Ok(im)) => Ok(Cx::new(re, im)),
                _ => Err(bad("state", format!("cannot parse amplitude `{part}`"))),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if amps.len() != dim {
        return Err(bad("state", format!("expected {dim} amplitudes, got {}", amps.len())));
    }
    PureState::normalized(amps).map_err(|e| bad("state", e.to_string()))
}

fn resolve_state(config: &RunConfig, args: &StateArgs) -> Result<PureState<f64>, CliError> {
    let dim = config.system.kind().dim();
    if let Some(text) = &args.state {
        return parse_state(text, dim);
    }
    match config.initial_state()? {
        Initial::State(psi) => Ok(psi),
        Initial::Average => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = vec![Cx::new(0.0, 0.0); dim];
            amps[0] = Cx::new(h, 0.0);
            amps[1] = Cx::new(h, 0.0);
            Ok(PureState::new(amps)?)
        }
    }
}

fn closed_form_fidelity(
    system: System,
    psi: &PureState<f64>,
    coeff: &CoefficientSolution<f64>,
) -> Result<FidelityTrace<f64>, CliError> {
    Ok(match system {
        System::Qubit => fidelity_qubit(psi.upper_population(), coeff)?,
        System::Lambda => fidelity_lambda(psi, coeff)?,
    })
}

fn kernel_table(spec: &KernelSpec<f64>, tau_max: f64, points: usize) -> Result<Table, CliError> {
    if points < 2 {
        return Err(bad("points", "need at least 2"));
    }
    if !(tau_max > 0.0) || !tau_max.is_finite() {
        return Err(bad("tau_max", format!("must be finite and > 0, got {tau_max}")));
    }
    let mut t = Table::new(["tau", "kernel"]);
    for k in 0..points {
        let tau = tau_max * k as f64 / (points - 1) as f64;
        t.push_nums([tau, spec.eval(tau)]);
    }
    Ok(t)
}

fn coefficient_table(sol: &CoefficientSolution<f64>) -> Table {
    let mut t = Table::new(["t", "re", "im", "integral_re", "integral_im"]);
    for (n, v) in sol.values.iter().enumerate() {
        t.push_nums([sol.grid.time(n), v.re, v.im, sol.integral[n].re, sol.integral[n].im]);
    }
    t
}

fn comparison_table(ric: &CoefficientSolution<f64>, vol: &CoefficientSolution<f64>) -> (Table, f64) {
    let mut t = Table::new(["t", "riccati_re", "riccati_im", "volterra_re", "volterra_im", "abs_diff"]);
    let mut sup: f64 = 0.0;
    for (n, (a, b)) in ric.values.iter().zip(&vol.values).enumerate() {
        let d = (a - b).norm();
        sup = sup.max(d);
        t.push_nums([ric.grid.time(n), a.re, a.im, b.re, b.im, d]);
    }
    (t, sup)
}

fn trace_table(trace: &FidelityTrace<f64>, column: &str) -> Table {
    let mut t = Table::new(["t", column]);
    for (n, v) in trace.values.iter().enumerate() {
        t.push_nums([trace.grid.time(n), *v]);
    }
    t
}

fn evolve_table(config: &RunConfig, coeff: &CoefficientSolution<f64>, psi: &PureState<f64>) -> Result<Table, CliError> {
    let rho0 = DensityMatrix::from_pure(psi);
    let trace = match config.system {
        System::Qubit => propagate_qubit(coeff, &rho0, config.omega)?,
        System::Lambda => propagate_lambda(coeff, &rho0)?,
    };
    let dim = psi.dim();
    let mut columns = vec!["t".to_string(), "trace".into(), "fidelity".into()];
    for i in 0..dim {
        for j in i..dim {
            columns.push(format!("rho{i}{j}_re"));
            columns.push(format!("rho{i}{j}_im"));
        }
    }
    let mut t = Table::new(columns);
    for (n, rho) in trace.states.iter().enumerate() {
        let time = trace.grid.time(n);
        // The qubit is propagated in the lab frame, the Λ atom in the frame
        // rotating with H_sys; compare against ψ₀ in the same frame.
        let fid = match config.system {
            System::Qubit => rho.expectation(&psi.free_evolved(config.omega, time)),
            System::Lambda => rho.expectation(psi),
        };
        let mut row = vec![time, rho.trace().re, fid];
        for i in 0..dim {
            for j in i..dim {
                let v = rho.get(i, j);
                row.extend([v.re, v.im]);
            }
        }
        t.push_nums(row);
    }
    Ok(t)
}

fn trajectory_table(
    config: &RunConfig,
    spec: &KernelSpec<f64>,
    psi: &PureState<f64>,
    ensemble: EnsembleSpec,
    max_nodes: usize,
) -> Result<Table, CliError> {
    let grid = config.time_grid()?;
    let coeff = solve_coefficient(spec, config.omega, grid, config.system.kind())?;
    let coarse = coarsen_for_trajectories(grid, max_nodes)?;
    let stride = grid.stride_to(&coarse).expect("coarsened grid divides the coefficient grid");
    info!("{} trajectories on {} nodes (seed {})", ensemble.count, coarse.len(), ensemble.seed);
    let result = run_qsd_ensemble(spec, config.omega, &coeff, psi, coarse, ensemble)?;
    let closed = closed_form_fidelity(config.system, psi, &coeff)?;
    let mut t = Table::new(["t", "fidelity_mean", "fidelity_std_err", "closed_form"]);
    for n in 0..coarse.len() {
        t.push_nums([
            coarse.time(n),
            result.fidelity.values[n],
            result.fidelity_std_err[n],
            closed.values[n * stride],
        ]);
    }
    Ok(t)
}

fn diagram_config(config: &RunConfig, args: &DiagramArgs) -> Result<DiagramConfig, CliError> {
    let mut d = DiagramConfig {
        time_points: args.time_points,
        rate_points: args.rate_points,
        rate_min: args.rate_min,
        rate_max: args.rate_max,
        time_max: config.grid.horizon,
        dt: config.grid.dt,
        omega: config.omega,
        ..DiagramConfig::default()
    };
    if let Some(beta) = config.kernel_spec().relaxation() {
        d.relaxation = beta;
    }
    if config.system == System::Lambda {
        if let Initial::State(psi) = config.initial_state()? {
            d.initial = psi;
        }
    }
    d.validate().map_err(|e| match e {
        noisemix::Error::InvalidParameter { name, reason } => bad(name, reason),
        other => other.into(),
    })?;
    Ok(d)
}

fn diagram_table(d: &noisemix::experiments::RegionDiagram) -> Table {
    let mut t = Table::new(["omega_t", "gamma_alpha", "region", "tie"]);
    for (k, rate) in d.rate_axis.iter().enumerate() {
        for (j, time) in d.time_axis.iter().enumerate() {
            t.push(vec![
                Cell::Num(*time),
                Cell::Num(*rate),
                Cell::Text(d.labels[k][j].label().into()),
                Cell::Int(d.ties[k][j] as i64),
            ]);
        }
    }
    t
}

#[derive(Debug, Serialize)]
struct CurveEntry {
    file: String,
    label: String,
    curve: CurveKind,
    params: ScenarioParams,
    /// Set when the values are identical to an earlier file's.
    #[serde(skip_serializing_if = "Option::is_none")]
    identical_to: Option<String>,
}

#[derive(Debug, Serialize)]
struct DiagramEntry {
    file: String,
    time_points: usize,
    rate_points: usize,
    time_max: f64,
    rate_min: f64,
    rate_max: f64,
    relaxation: noisemix::OuParams64,
    legend: BTreeMap<&'static str, &'static str>,
    precedence: &'static str,
}

#[derive(Debug, Serialize)]
struct Manifest {
    figure: String,
    grid: GridConfig,
    columns: Vec<&'static str>,
    variants: BTreeMap<&'static str, &'static str>,
    curves: Vec<CurveEntry>,
    claims: Vec<ClaimCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagram: Option<DiagramEntry>,
}

fn curve_file(id: FigureId, curve: &Curve) -> String {
    format!("{id}_{}_{}.csv", curve.label.replace('=', "_"), curve.kind.letter())
}

fn curve_table(curve: &Curve) -> Table {
    let mut t = Table::new(["t", "paper_formula", "haar_integral"]);
    for n in 0..curve.times.len() {
        t.push_nums([curve.times[n], curve.paper_formula[n], curve.haar_integral[n]]);
    }
    t
}

/// Writes every curve CSV, then the manifest. Files are written atomically,
/// and the manifest last, so a present manifest implies complete data.
fn write_figure(id: FigureId, config: &RunConfig, args: &DiagramArgs, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}", dir.display()), e))?;
    let grid: TimeGrid64 = config.time_grid()?;
    let diagram_cfg = diagram_config(config, args)?;
    let data = reproduce_figure_with(id, grid, &diagram_cfg)?;

    let mut curves: Vec<CurveEntry> = Vec::new();
    for (k, curve) in data.curves.iter().enumerate() {
        let file = curve_file(id, curve);
        let identical_to = data.curves[..k]
            .iter()
            .find(|c| c.kind == curve.kind && c.paper_formula == curve.paper_formula && c.haar_integral == curve.haar_integral)
            .map(|c| curve_file(id, c));
        write_atomic(&dir.join(&file), &curve_table(curve).to_csv())?;
        curves.push(CurveEntry { file, label: curve.label.clone(), curve: curve.kind, params: curve.params, identical_to });
    }

    let diagram = match &data.diagram {
        Some(d) => {
            let file = format!("{id}_regions.csv");
            write_atomic(&dir.join(&file), &diagram_table(d).to_csv())?;
            Some(DiagramEntry {
                file,
                time_points: diagram_cfg.time_points,
                rate_points: diagram_cfg.rate_points,
                time_max: diagram_cfg.time_max,
                rate_min: diagram_cfg.rate_min,
                rate_max: diagram_cfg.rate_max,
                relaxation: diagram_cfg.relaxation,
                legend: RegionCode::ALL.iter().map(|c| (c.label(), c.legend())).collect(),
                precedence: "ties resolved as i > iii > ii > iv",
            })
        }
        None => None,
    };

    let manifest = Manifest {
        figure: id.to_string(),
        grid: config.grid,
        columns: vec!["t", "paper_formula", "haar_integral"],
        variants: BTreeMap::from([
            ("paper_formula", "1/2 + [exp(-2 Re int F) + Re exp(-int F)]/4"),
            ("haar_integral", "1/2 + exp(-2 Re int F)/6 + Re exp(-int F)/3"),
        ]),
        curves,
        claims: data.claims(),
        diagram,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&dir.join("manifest.json"), &text)?;
    info!("wrote {} to {}", id, dir.display());
    Ok(())
}

/// Where `figure` writes a given curve; exposed for tests.
pub fn figure_files(id: FigureId) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = id
        .scenarios()
        .iter()
        .flat_map(|(label, _)| {
            CurveKind::ALL.iter().map(move |k| format!("{id}_{}_{}.csv", label.replace('=', "_"), k.letter()).into())
        })
        .collect();
    if id == FigureId::Fig3 {
        files.push(format!("{id}_regions.csv").into());
    }
    files.push("manifest.json".into());
    files
}
