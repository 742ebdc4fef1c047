use serde::{Deserialize, Serialize};

use crate::driver::TimeGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transform::{Alpha, Phase};

/// Which sampler produced a [`SolutionPath`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TimeChange,
    EulerMaruyama,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::TimeChange => "timechange",
            Scheme::EulerMaruyama => "em",
        }
    }
}

/// `(X, Y)` on a time grid plus the metadata needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPath<T> {
    pub grid: TimeGrid<T>,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub alpha: Alpha<T>,
    pub start: Phase<T>,
    pub scheme: Scheme,
    pub seed: u64,
    pub stream_id: u64,
    /// Number of driver increments the sampler consumed.
    pub driver_steps: usize,
}

impl<T: Real> SolutionPath<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn times(&self) -> &[T] {
        self.grid.times()
    }

    pub fn horizon(&self) -> T {
        self.grid.horizon()
    }

    /// `|(x_k, y_k)|_∞` at grid index `k`.
    #[inline]
    pub fn norm_inf(&self, k: usize) -> T {
        self.x[k].abs().max(self.y[k].abs())
    }

    /// Smallest `ℓ∞` norm over the grid.
    pub fn min_norm_inf(&self) -> T {
        (0..self.len())
            .map(|k| self.norm_inf(k))
            .fold(T::infinity(), T::min)
    }

    /// Subsample onto a coarser grid whose times all appear in this path's grid.
    pub fn restrict_to(&self, coarse: &TimeGrid<T>) -> Result<Self> {
        let idx = coarse.embedding_in(&self.grid)?;
        Ok(Self {
            grid: coarse.clone(),
            x: idx.iter().map(|&j| self.x[j]).collect(),
            y: idx.iter().map(|&j| self.y[j]).collect(),
            alpha: self.alpha,
            start: self.start,
            scheme: self.scheme,
            seed: self.seed,
            stream_id: self.stream_id,
            driver_steps: self.driver_steps,
        })
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::LengthMismatch(format!(
                "paths on different grids ({} vs {} points)",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}
