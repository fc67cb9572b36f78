//! Finite subdivision rules as combinatorial data: subdivision of cell
//! complexes, expansion complexes grown from seeds, tile growth series and
//! fat-flow moduli of the annuli around the seed.

#![allow(clippy::needless_range_loop)]

pub mod complex;
pub mod error;
pub mod expansion;
pub mod growth;
pub mod io;
pub mod modulus;
pub mod render;
pub mod rules;
pub mod subdivision;

pub use complex::{AdjacencyMode, CellComplex, Side, Tile, TileGraph, TypeId};
pub use error::{Error, Result};
pub use expansion::{Annulus, Ball, ExpansionTower, Seed, SeedRegion};
pub use growth::{DegreeEstimate, GrowthTable, SeriesPoly};
pub use modulus::{HyperbolicityReport, ModulusReport, SolverReport, Verdict, WeightAssignment};
pub use render::RenderSpec;
pub use rules::{RuleFamily, SubdivisionRule, SubdivisionTemplate, Subtile, TileType};
pub use subdivision::{Limits, SubdividedComplex};
