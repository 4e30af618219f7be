use std::fmt;

use serde::{Deserialize, Serialize};

use super::PlantError;

/// Minimum number of grid intervals.
pub const MIN_INTERVALS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryTag {
    /// `f(0) = f(1) = 0`.
    DirichletBoth,
    /// Value at `x = 0` is injected by the boundary condition.
    InflowLeft,
    Free,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryTag::DirichletBoth => "dirichlet-both",
            BoundaryTag::InflowLeft => "inflow-left",
            BoundaryTag::Free => "free",
        })
    }
}

/// A grid function on `[0, 1]` with `N + 1` equispaced nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    values: Vec<f64>,
    tag: BoundaryTag,
}

impl Field {
    pub fn new(values: Vec<f64>, tag: BoundaryTag) -> Result<Self, PlantError> {
        let n = values.len().saturating_sub(1);
        if n < MIN_INTERVALS {
            return Err(PlantError::GridTooSmall(n));
        }
        if tag == BoundaryTag::DirichletBoth {
            for &e in [values[0], values[n]].iter() {
                if e.abs() > 1e-12 {
                    return Err(PlantError::NonZeroBoundary(e));
                }
            }
        }
        let mut f = Field { values, tag };
        f.enforce_boundary();
        Ok(f)
    }

    /// Samples `f` at the nodes; Dirichlet endpoints are set to exactly 0.
    pub fn from_fn(n: usize, tag: BoundaryTag, f: impl Fn(f64) -> f64) -> Self {
        let mut field = Field {
            values: (0..=n).map(|i| f(i as f64 / n as f64)).collect(),
            tag,
        };
        field.enforce_boundary();
        field
    }

    pub(crate) fn from_raw(values: Vec<f64>, tag: BoundaryTag) -> Self {
        Field { values, tag }
    }

    pub fn zeros(n: usize, tag: BoundaryTag) -> Self {
        Field {
            values: vec![0.0; n + 1],
            tag,
        }
    }

    fn enforce_boundary(&mut self) {
        if self.tag == BoundaryTag::DirichletBoth {
            let n = self.values.len() - 1;
            self.values[0] = 0.0;
            self.values[n] = 0.0;
        }
    }

    /// Number of intervals `N`.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n() as f64
    }

    pub fn tag(&self) -> BoundaryTag {
        self.tag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
