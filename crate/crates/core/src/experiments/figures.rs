//! Published parameter sets, emitted as plot-ready curves.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::crossing::{detect_crossing, TIE_TOLERANCE};
use super::regions::{classify_regions, DiagramConfig, RegionDiagram};
use super::scenario::{Dephasing, Initial, ScenarioParams, ScenarioSolution, System};
use crate::coeffs::TimeGrid;
use crate::dynamics::{AverageVariant, FidelityTrace};
use crate::error::{invalid, Error, Result};
use crate::kernels::OuParams;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig2a,
    Fig2b,
    Fig3,
}

impl FigureId {
    pub const ALL: [FigureId; 6] =
        [FigureId::Fig1a, FigureId::Fig1b, FigureId::Fig1c, FigureId::Fig2a, FigureId::Fig2b, FigureId::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1a => "fig1a",
            FigureId::Fig1b => "fig1b",
            FigureId::Fig1c => "fig1c",
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig3 => "fig3",
        }
    }

    /// `(label, params)` of every R/D/C triple in the figure; empty for fig3.
    pub fn scenarios(self) -> Vec<(String, ScenarioParams)> {
        let ou = |s: f64, g: f64| OuParams { strength: s, memory_rate: g };
        let markov = |gamma_beta: f64| -> Vec<(String, ScenarioParams)> {
            [1.0, 2.0, 4.0]
                .iter()
                .map(|&ga| {
                    (
                        format!("Gamma_alpha={ga}"),
                        ScenarioParams {
                            relaxation: ou(1.0, gamma_beta),
                            dephasing: Dephasing::Markov { strength: ga },
                            omega: 1.0,
                        },
                    )
                })
                .collect()
        };
        match self {
            FigureId::Fig1a => markov(0.1),
            FigureId::Fig1b => markov(0.5),
            FigureId::Fig1c => markov(2.0),
            FigureId::Fig2a => [0.1, 0.5, 2.0]
                .iter()
                .map(|&ga| {
                    (
                        format!("gamma_alpha={ga}"),
                        ScenarioParams { relaxation: ou(1.0, 0.1), dephasing: Dephasing::Ou(ou(2.0, ga)), omega: 1.0 },
                    )
                })
                .collect(),
            FigureId::Fig2b => [0.1, 0.3, 0.9]
                .iter()
                .map(|&gb| {
                    (
                        format!("gamma_beta={gb}"),
                        ScenarioParams { relaxation: ou(1.0, gb), dephasing: Dephasing::Ou(ou(1.0, 0.1)), omega: 1.0 },
                    )
                })
                .collect(),
            FigureId::Fig3 => Vec::new(),
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| invalid("figure", format!("unknown figure `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveKind {
    R,
    D,
    C,
}

impl CurveKind {
    pub const ALL: [CurveKind; 3] = [CurveKind::R, CurveKind::D, CurveKind::C];

    pub fn letter(self) -> &'static str {
        match self {
            CurveKind::R => "R",
            CurveKind::D => "D",
            CurveKind::C => "C",
        }
    }
}

/// One average-fidelity curve, evaluated with both averaging conventions.
#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub label: String,
    pub kind: CurveKind,
    pub params: ScenarioParams,
    pub times: Vec<f64>,
    pub paper_formula: Vec<f64>,
    pub haar_integral: Vec<f64>,
    #[serde(skip)]
    pub grid: TimeGrid<f64>,
}

impl Curve {
    pub fn values(&self, variant: AverageVariant) -> &[f64] {
        match variant {
            AverageVariant::PaperFormula => &self.paper_formula,
            AverageVariant::HaarIntegral => &self.haar_integral,
        }
    }

    pub fn trace(&self, variant: AverageVariant) -> FidelityTrace<f64> {
        FidelityTrace { grid: self.grid, values: self.values(variant).to_vec() }
    }
}

#[derive(Debug, Clone)]
pub struct FigureDataset {
    pub id: FigureId,
    pub curves: Vec<Curve>,
    pub diagram: Option<RegionDiagram>,
}

impl FigureDataset {
    pub fn curve(&self, label: &str, kind: CurveKind) -> Option<&Curve> {
        self.curves.iter().find(|c| c.label == label && c.kind == kind)
    }
}

fn triple_curves(label: String, params: ScenarioParams, grid: TimeGrid<f64>) -> Result<Vec<Curve>> {
    let sol = ScenarioSolution::solve(params, System::Qubit, grid)?;
    let paper = sol.triple(&Initial::Average(AverageVariant::PaperFormula))?;
    let haar = sol.triple(&Initial::Average(AverageVariant::HaarIntegral))?;
    let times: Vec<f64> = grid.times().collect();
    let pick = |kind: CurveKind, t: &super::ScenarioTriple| match kind {
        CurveKind::R => t.r.values.clone(),
        CurveKind::D => t.d.values.clone(),
        CurveKind::C => t.c.values.clone(),
    };
    Ok(CurveKind::ALL
        .iter()
        .map(|&kind| Curve {
            label: label.clone(),
            kind,
            params,
            times: times.clone(),
            paper_formula: pick(kind, &paper),
            haar_integral: pick(kind, &haar),
            grid,
        })
        .collect())
}

/// Figure data on the default grid (`dt = 1e-3`, `ωt ∈ [0, 8]`).
pub fn reproduce_figure(id: FigureId) -> Result<FigureDataset> {
    let grid = TimeGrid::with_horizon(DEFAULT_DT, DEFAULT_HORIZON)?;
    reproduce_figure_with(id, grid, &DiagramConfig::default())
}

pub fn reproduce_figure_with(id: FigureId, grid: TimeGrid<f64>, diagram: &DiagramConfig) -> Result<FigureDataset> {
    if id == FigureId::Fig3 {
        return Ok(FigureDataset { id, curves: Vec::new(), diagram: Some(classify_regions(diagram)?) });
    }
    let per_triple: Vec<Result<Vec<Curve>>> =
        id.scenarios().into_par_iter().map(|(label, params)| triple_curves(label, params, grid)).collect();
    let mut curves = Vec::new();
    for c in per_triple {
        curves.extend(c?);
    }
    Ok(FigureDataset { id, curves, diagram: None })
}

/// Outcome of one quantitative statement about a figure, for one averaging
/// variant.
#[derive(Debug, Clone, Serialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub variant: AverageVariant,
    /// The measured quantity (a minimum, a crossing time, a sup-norm, ...);
    /// `None` when a required crossing does not exist.
    pub value: Option<f64>,
    pub satisfied: bool,
}

fn sup_diff_on(a: &FidelityTrace<f64>, b: &FidelityTrace<f64>, window: (f64, f64)) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .enumerate()
        .filter(|(n, _)| (window.0..=window.1).contains(&a.grid.time(*n)))
        .map(|(_, (x, y))| (x - y).abs())
        .fold(0.0, f64::max)
}

impl FigureDataset {
    fn trace(&self, label: &str, kind: CurveKind, variant: AverageVariant) -> Option<FidelityTrace<f64>> {
        self.curve(label, kind).map(|c| c.trace(variant))
    }

    /// Checks the quantitative statements made about this figure's curves,
    /// once per averaging variant.
    pub fn claims(&self) -> Vec<ClaimCheck> {
        let mut out = Vec::new();
        for variant in AverageVariant::ALL {
            let get = |label: &str, kind| self.trace(label, kind, variant);
            let mut push = |claim: String, value: Option<f64>, ok: &dyn Fn(f64) -> bool| {
                out.push(ClaimCheck { claim, variant, value, satisfied: value.is_some_and(ok) })
            };
            match self.id {
                FigureId::Fig1a => {
                    if let Some(c) = get("Gamma_alpha=4", CurveKind::C) {
                        let min = c
                            .values
                            .iter()
                            .enumerate()
                            .filter(|(n, _)| (1e-12..=4.0).contains(&c.grid.time(*n)))
                            .map(|(_, v)| *v)
                            .fold(f64::INFINITY, f64::min);
                        push("Gamma_alpha=4: min C over (0, 4] >= 0.95".into(), Some(min), &|m| m >= 0.95);
                    }
                    for label in ["Gamma_alpha=1", "Gamma_alpha=2", "Gamma_alpha=4"] {
                        if let (Some(c), Some(r)) = (get(label, CurveKind::C), get(label, CurveKind::R)) {
                            let tau = detect_crossing(&c, &r, (0.0, c.grid.horizon()));
                            push(format!("{label}: C-R crossing in [2.5, 4.5]"), tau, &|t| (2.5..=4.5).contains(&t));
                        }
                    }
                }
                FigureId::Fig1c => {
                    if let (Some(c), Some(r), Some(d)) = (
                        get("Gamma_alpha=4", CurveKind::C),
                        get("Gamma_alpha=4", CurveKind::R),
                        get("Gamma_alpha=4", CurveKind::D),
                    ) {
                        let tau = detect_crossing(&c, &d, (0.0, c.grid.horizon()));
                        push("Gamma_alpha=4: C-D crossing at 1.8 +/- 0.4".into(), tau, &|t| (t - 1.8).abs() <= 0.4);
                        let margin = c.values.iter().zip(&r.values).skip(1).map(|(c, r)| c - r).fold(f64::INFINITY, f64::min);
                        push("Gamma_alpha=4: C > R on (0, horizon]".into(), Some(margin), &|m| m > 0.0);
                    }
                }
                FigureId::Fig2b => {
                    if let (Some(c), Some(d)) = (get("gamma_beta=0.1", CurveKind::C), get("gamma_beta=0.1", CurveKind::D)) {
                        let tau = detect_crossing(&c, &d, (0.0, c.grid.horizon()));
                        let before = tau.map(|t| {
                            c.values
                                .iter()
                                .zip(&d.values)
                                .enumerate()
                                .filter(|(n, _)| c.grid.time(*n) < t)
                                .all(|(_, (c, d))| c - d > -TIE_TOLERANCE)
                        });
                        let ok = tau.is_some_and(|t| (t - 3.6).abs() <= 0.5) && before == Some(true);
                        out.push(ClaimCheck {
                            claim: "gamma_beta=0.1: C > D up to a crossing at 3.6 +/- 0.5".into(),
                            variant,
                            value: tau,
                            satisfied: ok,
                        });
                    }
                    if let (Some(c), Some(r)) = (get("gamma_beta=0.9", CurveKind::C), get("gamma_beta=0.9", CurveKind::R)) {
                        let sup = sup_diff_on(&c, &r, (0.0, 6.0));
                        out.push(ClaimCheck {
                            claim: "gamma_beta=0.9: sup |C - R| over [0, 6] <= 0.02".into(),
                            variant,
                            value: Some(sup),
                            satisfied: sup <= 0.02,
                        });
                    }
                }
                _ => {}
            }
        }
        out
    }
}
