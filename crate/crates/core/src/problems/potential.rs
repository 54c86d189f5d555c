//! Named potential presets sampled onto problem grids.

use super::{Grid, ProblemError};

/// Real bounded potential, specified as a named preset so configurations stay
/// reproducible without an expression parser.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// q(x) = value everywhere.
    Constant(f64),
    /// q(x) = base - depth for x within `width` of the left/inner edge,
    /// q(x) = base beyond.
    Well { base: f64, depth: f64, width: f64 },
    /// q(x) = amplitude * cos(2x) + shift, the Mathieu/Hill lattice potential
    /// (period pi).
    Mathieu { amplitude: f64, shift: f64 },
    /// Tabulated samples, one per grid node.
    Samples(Vec<f64>),
}

impl Potential {
    /// Samples on all grid nodes 0..=N.
    pub(crate) fn sample_on(&self, grid: &Grid) -> Result<Vec<f64>, ProblemError> {
        let n = grid.cells + 1;
        let values: Vec<f64> = match self {
            Potential::Constant(c) => vec![*c; n],
            Potential::Well { base, depth, width } => {
                if *width <= 0.0 {
                    return Err(ProblemError::InvalidConfig(
                        "well width must be positive".into(),
                    ));
                }
                (0..n)
                    .map(|i| {
                        if grid.node(i) - grid.start < *width {
                            base - depth
                        } else {
                            *base
                        }
                    })
                    .collect()
            }
            Potential::Mathieu { amplitude, shift } => (0..n)
                .map(|i| amplitude * (2.0 * grid.node(i)).cos() + shift)
                .collect(),
            Potential::Samples(v) => {
                if v.len() != n {
                    return Err(ProblemError::InvalidConfig(format!(
                        "potential sample count {} does not match node count {n}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::InvalidConfig(
                "potential contains non-finite values".into(),
            ));
        }
        Ok(values)
    }
}
