//! Classification of the `(ωt, Γ_α/ω)` plane by the ordering of C, R and D.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::crossing::TIE_TOLERANCE;
use super::scenario::{Dephasing, Initial, ScenarioParams, ScenarioSolution, System};
use crate::coeffs::{solve_coefficient, TimeGrid};
use crate::dynamics::{fidelity_lambda, PureState};
use crate::error::{invalid, Result};
use crate::kernels::OuParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionCode {
    /// `C > R` and `C > D`
    I,
    /// `D ≥ C > R`
    II,
    /// `R ≥ C ≥ D`
    III,
    /// `C < R` and `C < D`
    IV,
}

impl RegionCode {
    pub const ALL: [RegionCode; 4] = [RegionCode::I, RegionCode::II, RegionCode::III, RegionCode::IV];

    pub fn label(self) -> &'static str {
        match self {
            RegionCode::I => "i",
            RegionCode::II => "ii",
            RegionCode::III => "iii",
            RegionCode::IV => "iv",
        }
    }

    pub fn legend(self) -> &'static str {
        match self {
            RegionCode::I => "C>R and C>D",
            RegionCode::II => "D>=C>R",
            RegionCode::III => "R>=C>=D",
            RegionCode::IV => "C<R and C<D",
        }
    }
}

/// Region of one cell. Comparisons within `TIE_TOLERANCE` count as satisfied
/// both ways; when several codes fit, precedence is i > iii > ii > iv. The
/// flag reports whether any comparison was a tie.
pub fn classify(c: f64, r: f64, d: f64) -> (RegionCode, bool) {
    let at_least = |x: f64, y: f64| x >= y - TIE_TOLERANCE;
    let tie = (c - r).abs() < TIE_TOLERANCE || (c - d).abs() < TIE_TOLERANCE;
    let code = if at_least(c, r) && at_least(c, d) {
        RegionCode::I
    } else if at_least(r, c) && at_least(c, d) {
        RegionCode::III
    } else if at_least(d, c) && at_least(c, r) {
        RegionCode::II
    } else {
        RegionCode::IV
    };
    (code, tie)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionDiagram {
    pub time_axis: Vec<f64>,
    pub rate_axis: Vec<f64>,
    /// `labels[rate][time]`
    pub labels: Vec<Vec<RegionCode>>,
    pub ties: Vec<Vec<bool>>,
}

impl RegionDiagram {
    fn time_cell(&self) -> f64 {
        match self.time_axis.as_slice() {
            [a, b, ..] => b - a,
            [a] => *a,
            [] => 0.0,
        }
    }

    /// Total ωt-extent of `code` in row `rate_index`.
    pub fn width(&self, rate_index: usize, code: RegionCode) -> f64 {
        self.labels[rate_index].iter().filter(|&&c| c == code).count() as f64 * self.time_cell()
    }

    pub fn count(&self, code: RegionCode) -> usize {
        self.labels.iter().flatten().filter(|&&c| c == code).count()
    }

    /// Rates at which `code` occurs.
    pub fn rates_with(&self, code: RegionCode) -> Vec<f64> {
        self.rate_axis
            .iter()
            .zip(&self.labels)
            .filter(|(_, row)| row.contains(&code))
            .map(|(r, _)| *r)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramConfig {
    pub relaxation: OuParams<f64>,
    pub omega: f64,
    pub initial: PureState<f64>,
    pub time_points: usize,
    pub rate_points: usize,
    pub time_max: f64,
    pub rate_min: f64,
    pub rate_max: f64,
    pub dt: f64,
}

impl Default for DiagramConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            relaxation: OuParams { strength: 1.0, memory_rate: 0.1 },
            omega: 1.0,
            initial: PureState::lambda(h.into(), h.into(), 0.0.into()).expect("normalized"),
            time_points: 100,
            rate_points: 60,
            time_max: 8.0,
            rate_min: 0.1,
            rate_max: 6.0,
            dt: 1e-3,
        }
    }
}

impl DiagramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.time_points < 50 || self.rate_points < 50 {
            return Err(invalid(
                "resolution",
                format!("diagram needs at least 50x50 cells, got {}x{}", self.time_points, self.rate_points),
            ));
        }
        if !(self.rate_min >= 0.0 && self.rate_max > self.rate_min) {
            return Err(invalid("rate_range", format!("invalid range [{}, {}]", self.rate_min, self.rate_max)));
        }
        if self.initial.dim() != 3 {
            return Err(invalid("initial", "diagram is defined for the Λ atom"));
        }
        self.relaxation.validate()
    }
}

/// Region diagram of the Λ atom under relaxation mixed with Markovian dephasing.
pub fn classify_regions(config: &DiagramConfig) -> Result<RegionDiagram> {
    config.validate()?;
    let grid = TimeGrid::with_horizon(config.dt, config.time_max)?;
    let time_axis: Vec<f64> =
        (1..=config.time_points).map(|k| config.time_max * k as f64 / config.time_points as f64).collect();
    let nodes: Vec<usize> = time_axis.iter().map(|t| ((t / config.dt).round() as usize).min(grid.count)).collect();
    let span = config.rate_max - config.rate_min;
    let rate_axis: Vec<f64> =
        (0..config.rate_points).map(|k| config.rate_min + span * k as f64 / (config.rate_points - 1) as f64).collect();

    let relaxation = solve_coefficient(
        &crate::kernels::KernelSpec::Ou(config.relaxation),
        config.omega,
        grid,
        System::Lambda.kind(),
    )?;
    let r = fidelity_lambda(&config.initial, &relaxation)?;
    let initial = Initial::State(config.initial.clone());

    let rows: Vec<Result<(Vec<RegionCode>, Vec<bool>)>> = rate_axis
        .par_iter()
        .map(|&rate| {
            let params = ScenarioParams {
                relaxation: config.relaxation,
                dephasing: Dephasing::Markov { strength: rate },
                omega: config.omega,
            };
            let triple = ScenarioSolution::solve(params, System::Lambda, grid)?.triple(&initial)?;
            Ok(nodes
                .iter()
                .map(|&n| classify(triple.c.values[n], r.values[n], triple.d.values[n]))
                .unzip())
        })
        .collect();

    let (labels, ties) = rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    Ok(RegionDiagram { time_axis, rate_axis, labels, ties })
}
