//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails if any criterion fails, except those listed in `KNOWN_RED`,
//! which are reported as failures but do not break the build.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use noisemix::coeffs::{solve_coefficient, solve_riccati, solve_volterra, CoefficientKind, CoefficientSolution, TimeGrid};
use noisemix::dynamics::{
    average_fidelity_qubit, fidelity_lambda, fidelity_qubit, propagate_lambda, propagate_qubit, propagate_qubit_on,
    AverageVariant, DensityMatrix, FidelityTrace, PureState,
};
use noisemix::experiments::{
    build_triple, classify_regions, detect_crossing, reproduce_figure, CurveKind, DiagramConfig, Dephasing, FigureId,
    Initial, RegionCode, ScenarioParams, System, TIE_TOLERANCE,
};
use noisemix::kernels::{eval_composite_kernel, KernelSpec, OuParams};
use noisemix::trajectories::{coarsen_for_trajectories, run_qsd_ensemble, EnsembleSpec};
use noisemix::Cx;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Criteria that fail for reasons documented with the project's design notes.
const KNOWN_RED: &[(&str, &str)] = &[(
    "4a",
    "the curves cross near the stated time, but C lies below D before the crossing, not above",
)];

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn grid() -> TimeGrid<f64> {
    TimeGrid::with_horizon(1e-3, 8.0).unwrap()
}

fn ou(strength: f64, rate: f64) -> OuParams<f64> {
    OuParams::new(strength, rate).unwrap()
}

fn markov(gamma_beta: f64, gamma_alpha: f64) -> ScenarioParams {
    ScenarioParams { relaxation: ou(1.0, gamma_beta), dephasing: Dephasing::Markov { strength: gamma_alpha }, omega: 1.0 }
}

fn in_window(trace: &FidelityTrace<f64>, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    trace
        .values
        .iter()
        .enumerate()
        .map(move |(n, v)| (trace.grid.time(n), *v))
        .filter(move |(t, _)| *t > lo && *t <= hi + 1e-12)
}

fn sup_on(a: &FidelityTrace<f64>, b: &FidelityTrace<f64>, lo: f64, hi: f64) -> f64 {
    in_window(a, lo, hi).zip(in_window(b, lo, hi)).map(|((_, x), (_, y))| (x - y).abs()).fold(0.0, f64::max)
}

fn figure_trace(id: FigureId, label: &str, kind: CurveKind, variant: AverageVariant) -> FidelityTrace<f64> {
    static CACHE: OnceLock<Vec<(FigureId, noisemix::experiments::FigureDataset)>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        [FigureId::Fig1a, FigureId::Fig1b, FigureId::Fig1c, FigureId::Fig2a, FigureId::Fig2b]
            .into_par_iter()
            .map(|id| (id, reproduce_figure(id).unwrap()))
            .collect()
    });
    let data = &all.iter().find(|(i, _)| *i == id).unwrap().1;
    data.curve(label, kind).unwrap().trace(variant)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let params = markov(0.1, 4.0);
    let mut report = Vec::new();
    let mut matching = Vec::new();
    for variant in AverageVariant::ALL {
        let triple = build_triple(params, System::Qubit, &Initial::Average(variant), grid()).unwrap();
        let min = in_window(&triple.c, 0.0, 4.0).map(|(_, v)| v).fold(f64::INFINITY, f64::min);
        report.push(format!("{} min C = {min:.4}", variant.name()));
        if min >= 0.95 {
            matching.push(variant.name());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        !matching.is_empty() && elapsed < 1.0,
        format!("{}; matching variant: {}; {elapsed:.2} s", report.join(", "), matching.join(", ")),
    )
}

fn criterion_2() -> Verdict {
    let mut pass = true;
    let mut report = Vec::new();
    for variant in AverageVariant::ALL {
        let mut taus = Vec::new();
        for label in ["Gamma_alpha=1", "Gamma_alpha=2", "Gamma_alpha=4"] {
            let c = figure_trace(FigureId::Fig1a, label, CurveKind::C, variant);
            let r = figure_trace(FigureId::Fig1a, label, CurveKind::R, variant);
            taus.push(detect_crossing(&c, &r, (0.0, 8.0)));
        }
        let ok = taus.iter().all(|t| t.is_some_and(|t| (2.5..=4.5).contains(&t)))
            && taus.windows(2).all(|w| w[0] <= w[1]);
        pass &= ok;
        let shown: Vec<String> = taus.iter().map(|t| t.map_or("none".into(), |t| format!("{t:.3}"))).collect();
        report.push(format!("{}: tau = [{}]", variant.name(), shown.join(", ")));
    }
    verdict(pass, report.join("; "))
}

fn criterion_3() -> Verdict {
    let v = AverageVariant::PaperFormula;
    let c = figure_trace(FigureId::Fig1c, "Gamma_alpha=4", CurveKind::C, v);
    let r = figure_trace(FigureId::Fig1c, "Gamma_alpha=4", CurveKind::R, v);
    let d = figure_trace(FigureId::Fig1c, "Gamma_alpha=4", CurveKind::D, v);
    let tau = detect_crossing(&c, &d, (0.0, 8.0));
    let margin = in_window(&c, 0.0, 8.0).zip(in_window(&r, 0.0, 8.0)).map(|((_, c), (_, r))| c - r).fold(f64::INFINITY, f64::min);
    verdict(
        tau.is_some_and(|t| (t - 1.8).abs() <= 0.4) && margin > 0.0,
        format!("paper_formula: C-D crossing at {tau:?}, min(C - R) on (0, 8] = {margin:.3e}"),
    )
}

fn fig2b(label: &str, kind: CurveKind) -> FidelityTrace<f64> {
    figure_trace(FigureId::Fig2b, label, kind, AverageVariant::PaperFormula)
}

fn criterion_4a() -> Verdict {
    let c = fig2b("gamma_beta=0.1", CurveKind::C);
    let d = fig2b("gamma_beta=0.1", CurveKind::D);
    let tau = detect_crossing(&c, &d, (0.0, 8.0));
    let before: Vec<f64> = match tau {
        Some(t) => in_window(&c, 0.0, t).zip(in_window(&d, 0.0, t)).map(|((_, c), (_, d))| c - d).collect(),
        None => Vec::new(),
    };
    let above = !before.is_empty() && before.iter().all(|x| *x > -TIE_TOLERANCE);
    let worst = before.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        tau.is_some_and(|t| (t - 3.6).abs() <= 0.5) && above,
        format!("C-D crossing at {tau:?}; min(C - D) before it = {worst:.3e} (C above D required)"),
    )
}

fn criterion_4b() -> Verdict {
    let c = fig2b("gamma_beta=0.3", CurveKind::C);
    let r = fig2b("gamma_beta=0.3", CurveKind::R);
    let d = fig2b("gamma_beta=0.3", CurveKind::D);
    let below: Vec<f64> = in_window(&c, 0.0, 8.0)
        .zip(in_window(&r, 0.0, 8.0).zip(in_window(&d, 0.0, 8.0)))
        .filter(|((_, c), ((_, r), (_, d)))| *c < r - TIE_TOLERANCE && *c < d - TIE_TOLERANCE)
        .map(|((t, _), _)| t)
        .collect();
    let span = match (below.first(), below.last()) {
        (Some(a), Some(b)) => format!("[{a:.3}, {b:.3}]"),
        _ => "empty".into(),
    };
    verdict(!below.is_empty(), format!("C below both R and D on {} nodes within {span}", below.len()))
}

fn criterion_4c() -> Verdict {
    let c = fig2b("gamma_beta=0.9", CurveKind::C);
    let r = fig2b("gamma_beta=0.9", CurveKind::R);
    let sup = sup_on(&c, &r, 0.0, 6.0);
    verdict(sup <= 0.02, format!("sup |C - R| on (0, 6] = {sup:.4}"))
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let diagram = classify_regions(&DiagramConfig::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let counts: Vec<usize> = RegionCode::ALL.iter().map(|c| diagram.count(*c)).collect();
    let widths: Vec<f64> = (0..diagram.rate_axis.len()).map(|k| diagram.width(k, RegionCode::I)).collect();
    let monotone = widths.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let iv_rates = diagram.rates_with(RegionCode::IV);
    let iv_max = iv_rates.iter().copied().fold(f64::NAN, f64::max);
    let pass = counts.iter().all(|&n| n > 0) && monotone && !iv_rates.is_empty() && iv_max <= 1.0 && elapsed < 60.0;
    verdict(
        pass,
        format!(
            "cells i/ii/iii/iv = {counts:?}; width(i) {:.2} -> {:.2}, non-decreasing: {monotone}; iv at Gamma_alpha <= {iv_max:.3}; {elapsed:.2} s",
            widths[0],
            widths[widths.len() - 1]
        ),
    )
}

/// Every distinct kernel behind the figures: relaxation and composite
/// kernels of Figs. 1-2 and a spread of the Fig. 3 dephasing rates.
fn figure_kernels() -> Vec<KernelSpec<f64>> {
    let mut kernels: Vec<KernelSpec<f64>> = Vec::new();
    let mut scenarios: Vec<ScenarioParams> = [FigureId::Fig1a, FigureId::Fig1b, FigureId::Fig1c, FigureId::Fig2a, FigureId::Fig2b]
        .iter()
        .flat_map(|id| id.scenarios().into_iter().map(|(_, p)| p))
        .collect();
    scenarios.extend([0.1, 1.0, 3.0, 6.0].map(|ga| markov(0.1, ga)));
    for p in scenarios {
        for k in [p.relaxation_kernel(), p.composite_kernel()] {
            if !kernels.contains(&k) {
                kernels.push(k);
            }
        }
    }
    kernels
}

struct Sweep {
    kernels: usize,
    qubit_sup: f64,
    lambda_sup: f64,
    trace_drift: f64,
    hermiticity: f64,
    initial_fidelity: f64,
    population_decay: f64,
    stationary: f64,
}

fn diagram_state() -> PureState<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::lambda(Cx::new(h, 0.0), Cx::new(h, 0.0), Cx::new(0.0, 0.0)).unwrap()
}

/// Closed forms against the master equations over every figure kernel; shared
/// by the equivalence and invariant criteria.
fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let states: Vec<PureState<f64>> = (0..10)
            .map(|_| {
                let theta = (1.0 - 2.0 * rng.random::<f64>()).acos();
                let phi = std::f64::consts::TAU * rng.random::<f64>();
                PureState::bloch(theta, phi)
            })
            .collect();
        let lambda_states = [diagram_state(), PureState::basis(3, 0)];
        let kernels = figure_kernels();
        let rows: Vec<[f64; 7]> = kernels
            .par_iter()
            .map(|kernel| {
                let g = grid();
                let f = solve_coefficient(kernel, 1.0, g, CoefficientKind::TwoLevelF).unwrap();
                let q = solve_coefficient(kernel, 1.0, g, CoefficientKind::ThreeLevelQ).unwrap();
                let mut row = [0.0f64; 7];
                let mut track = |i: usize, x: f64| row[i] = row[i].max(x);
                for psi in &states {
                    let closed = fidelity_qubit(psi.upper_population(), &f).unwrap();
                    let rho = propagate_qubit(&f, &DensityMatrix::from_pure(psi), 1.0).unwrap();
                    for (n, s) in rho.states.iter().enumerate() {
                        let e = s.expectation(&psi.free_evolved(1.0, g.time(n)));
                        track(0, (e - closed.values[n]).abs());
                        if n == 0 {
                            track(4, (e - 1.0).abs());
                        }
                    }
                    track(4, (closed.values[0] - 1.0).abs());
                    track(2, rho.max_trace_drift());
                    track(3, rho.max_hermiticity_deviation());
                }
                for variant in AverageVariant::ALL {
                    track(4, (average_fidelity_qubit(&f, variant).unwrap().values[0] - 1.0).abs());
                }
                for psi in &lambda_states {
                    let closed = fidelity_lambda(psi, &q).unwrap();
                    let rho = propagate_lambda(&q, &DensityMatrix::from_pure(psi)).unwrap();
                    for (s, c) in rho.states.iter().zip(&closed.values) {
                        track(1, (s.expectation(psi) - c).abs());
                    }
                    track(4, (closed.values[0] - 1.0).abs());
                    track(2, rho.max_trace_drift());
                    track(3, rho.max_hermiticity_deviation());
                }
                let up = propagate_lambda(&q, &DensityMatrix::from_pure(&PureState::basis(3, 0))).unwrap();
                for (n, s) in up.states.iter().enumerate() {
                    track(5, (s.get(0, 0).re - (-4.0 * q.real_integral[n]).exp()).abs());
                }
                let ground = DensityMatrix::from_pure(&PureState::ground());
                let dark = DensityMatrix::from_pure(&PureState::basis(3, 1));
                let g_tr = propagate_qubit(&f, &ground, 1.0).unwrap();
                let d_tr = propagate_lambda(&q, &dark).unwrap();
                g_tr.states.iter().for_each(|s| track(6, s.max_abs_diff(&ground)));
                d_tr.states.iter().for_each(|s| track(6, s.max_abs_diff(&dark)));
                row
            })
            .collect();
        let max = |i: usize| rows.iter().map(|r| r[i]).fold(0.0, f64::max);
        Sweep {
            kernels: kernels.len(),
            qubit_sup: max(0),
            lambda_sup: max(1),
            trace_drift: max(2),
            hermiticity: max(3),
            initial_fidelity: max(4),
            population_decay: max(5),
            stationary: max(6),
        }
    })
}

fn criterion_6() -> Verdict {
    let s = sweep();
    verdict(
        s.qubit_sup <= 1e-6 && s.lambda_sup <= 1e-6,
        format!(
            "{} kernels, 10 random qubit states: closed form vs master equation {:.2e}; Λ atom (diagram state and |1⟩): {:.2e}",
            s.kernels, s.qubit_sup, s.lambda_sup
        ),
    )
}

fn criterion_7() -> Verdict {
    let kernels: Vec<KernelSpec<f64>> = figure_kernels().into_iter().filter(|k| k.ou_form().is_some()).collect();
    let sups: Vec<f64> = kernels
        .par_iter()
        .flat_map(|k| {
            [CoefficientKind::TwoLevelF, CoefficientKind::ThreeLevelQ].into_par_iter().map(move |kind| {
                let a = solve_riccati(k, 1.0, grid(), kind).unwrap();
                let b = solve_volterra(k, 1.0, grid(), kind).unwrap();
                coefficient_sup(&a, &b)
            })
        })
        .collect();
    let worst = sups.iter().copied().fold(0.0, f64::max);
    verdict(worst <= 1e-4, format!("{} exponential kernels x (F, Q): sup |Riccati - Volterra| = {worst:.2e}", kernels.len()))
}

fn coefficient_sup(a: &CoefficientSolution<f64>, b: &CoefficientSolution<f64>) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let kernel = markov(0.1, 4.0).composite_kernel();
    let g = grid();
    let coeff = solve_coefficient(&kernel, 1.0, g, CoefficientKind::TwoLevelF).unwrap();
    let coarse = coarsen_for_trajectories(g, 2048).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = PureState::qubit(Cx::new(h, 0.0), Cx::new(h, 0.0)).unwrap();
    let rho = propagate_qubit_on(&coeff, &DensityMatrix::from_pure(&psi), 1.0, coarse).unwrap();
    let reference: Vec<f64> =
        rho.states.iter().enumerate().map(|(n, s)| s.expectation(&psi.free_evolved(1.0, coarse.time(n)))).collect();
    let error = |count: usize| {
        let res = run_qsd_ensemble(&kernel, 1.0, &coeff, &psi, coarse, EnsembleSpec::new(count, 7).unwrap()).unwrap();
        res.fidelity.values.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let e2000 = error(2000);
    let e500 = error(500);
    let e8000 = error(8000);
    let ratio = e500 / e8000;
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        e2000 <= 0.02 && e8000 < e500 && (2.0..=8.0).contains(&ratio) && elapsed < 120.0,
        format!(
            "{} nodes, seed 7: sup error N=500 {e500:.4}, N=2000 {e2000:.4}, N=8000 {e8000:.4}; ratio {ratio:.2} (sqrt(16) = 4, accepted [2, 8]); {elapsed:.1} s",
            coarse.len()
        ),
    )
}

fn criterion_9() -> Verdict {
    let beta = ou(1.0, 0.1);
    let mut worst: f64 = 0.0;
    for ga in [1.0, 2.0, 4.0] {
        let markov = KernelSpec::MarkovDephasedOu { beta, dephasing_strength: ga };
        let alpha = ou(ga, 1e4);
        for k in 0..=5000 {
            let tau = k as f64 * 1e-3;
            let exact = markov.eval(tau);
            worst = worst.max((eval_composite_kernel(beta, alpha, tau) - exact).abs() / exact);
        }
    }
    verdict(worst <= 1e-3, format!("max relative deviation on [0, 5], Gamma_alpha in {{1, 2, 4}}: {worst:.2e}"))
}

fn criterion_10() -> Verdict {
    let s = sweep();
    verdict(
        s.trace_drift <= 1e-9
            && s.hermiticity <= 1e-9
            && s.initial_fidelity <= 1e-12
            && s.population_decay <= 1e-6
            && s.stationary <= 1e-9,
        format!(
            "trace drift {:.1e}, Hermiticity {:.1e}, |F(0) - 1| {:.1e}, Λ upper population vs exp(-4 int Re Q) {:.1e}, ground/dark drift {:.1e}",
            s.trace_drift, s.hermiticity, s.initial_fidelity, s.population_decay, s.stationary
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_noisemix")).args(args).arg("--out").arg(out).status().unwrap();
    assert!(status.success(), "noisemix {args:?} failed");
    std::fs::read(out).unwrap_or_default()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_11() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut checks = Vec::new();
    for (name, args) in [
        ("trajectories", vec!["trajectories", "--seed", "7", "--n", "300", "--kernel", "markov", "--dephasing-strength", "4"]),
        ("trajectories-lambda", vec!["trajectories", "--system", "lambda", "--seed", "11", "--n", "200"]),
        ("diagram", vec!["diagram"]),
    ] {
        let outputs: Vec<Vec<u8>> = ["1", "4", "1"]
            .iter()
            .enumerate()
            .map(|(k, threads)| {
                let mut a = args.clone();
                a.extend(["--threads", threads]);
                run_cli(&a, &tmp.path().join(format!("{name}-{k}.csv")))
            })
            .collect();
        checks.push((name, !outputs[0].is_empty() && outputs.iter().all(|o| *o == outputs[0])));
    }
    let dirs: Vec<_> = ["1", "3"]
        .iter()
        .map(|threads| {
            let dir = tmp.path().join(format!("fig2a-{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_noisemix"))
                .args(["figure", "fig2a", "--threads", threads, "--out"])
                .arg(&dir)
                .status()
                .unwrap();
            assert!(status.success());
            read_dir_sorted(&dir)
        })
        .collect();
    checks.push(("figure fig2a", dirs[0].len() == 10 && dirs[0] == dirs[1]));
    let pass = checks.iter().all(|(_, ok)| *ok);
    let shown: Vec<String> = checks.iter().map(|(n, ok)| format!("{n}: {}", if *ok { "identical" } else { "DIFFERS" })).collect();
    verdict(pass, format!("threads 1/4/1 (figure: 1/3): {}", shown.join(", ")))
}

fn main() {
    let criteria: Vec<(&str, &str, Check)> = vec![
        ("1", "Fig. 1a composite fidelity stays above 0.95 on (0, 4]", criterion_1),
        ("2", "Fig. 1a C-R crossing in [2.5, 4.5], non-decreasing in Gamma_alpha", criterion_2),
        ("3", "Fig. 1c C-D crossing at 1.8 +/- 0.4 and C > R throughout", criterion_3),
        ("4a", "Fig. 2b gamma_beta=0.1: C > D up to 3.6 +/- 0.5", criterion_4a),
        ("4b", "Fig. 2b gamma_beta=0.3: C below R and D somewhere", criterion_4b),
        ("4c", "Fig. 2b gamma_beta=0.9: sup |C - R| <= 0.02 on (0, 6]", criterion_4c),
        ("5", "Fig. 3 region diagram structure and runtime", criterion_5),
        ("6", "closed-form fidelities agree with the master equations", criterion_6),
        ("7", "Riccati and Volterra solvers agree on exponential kernels", criterion_7),
        ("8", "trajectory ensemble reproduces the master equation", criterion_8),
        ("9", "composite kernel tends to the Markov-dephased kernel", criterion_9),
        ("10", "structural invariants of the propagation", criterion_10),
        ("11", "seeded output is independent of thread count", criterion_11),
    ];
    let mut unexpected = 0;
    for (id, title, check) in criteria {
        let v = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| verdict(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let known = KNOWN_RED.iter().find(|(k, _)| *k == id);
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>3} {status}  {title} -- {}", v.detail);
        match (v.pass, known) {
            (false, Some((_, why))) => println!("              known failure: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => println!("              listed as a known failure but now passes"),
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
