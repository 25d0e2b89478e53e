//! Noise-mixing comparisons: R/D/C triples, crossing times, region diagrams
//! and the published parameter sets.

mod crossing;
mod figures;
mod regions;
mod scenario;

pub use crossing::{detect_crossing, TIE_TOLERANCE};
pub use figures::{ClaimCheck, reproduce_figure, reproduce_figure_with, DEFAULT_DT, DEFAULT_HORIZON, Curve, CurveKind, FigureDataset, FigureId};
pub use regions::{classify, classify_regions, DiagramConfig, RegionCode, RegionDiagram};
pub use scenario::{build_triple, Dephasing, Initial, ScenarioParams, ScenarioSolution, ScenarioTriple, System};
