use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SolutionPath;
use crate::scalar::Real;

/// A point estimate with its standard error (absent below two samples).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub stderr: Option<T>,
}

/// Aggregated Monte Carlo statistics, keyed by observable name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct McSummary<T> {
    pub n_paths: usize,
    pub estimates: BTreeMap<String, Estimate<T>>,
    /// Sorted samples per observable.
    pub empirical_cdfs: BTreeMap<String, Vec<T>>,
}

impl<T: Real> McSummary<T> {
    pub fn new(n_paths: usize) -> Self {
        Self {
            n_paths,
            estimates: BTreeMap::new(),
            empirical_cdfs: BTreeMap::new(),
        }
    }

    pub fn insert_mean(&mut self, name: impl Into<String>, samples: &[T]) {
        let (value, stderr) = mean_stderr(samples);
        self.estimates.insert(name.into(), Estimate { value, stderr });
    }

    /// Fraction of `hits` among `n_paths` with the binomial standard error.
    pub fn insert_fraction(&mut self, name: impl Into<String>, hits: usize) {
        let n = T::from_usize_lossy(self.n_paths);
        let p = T::from_usize_lossy(hits) / n;
        let stderr = (self.n_paths >= 2).then(|| (p * (T::one() - p) / n).sqrt());
        self.estimates.insert(name.into(), Estimate { value: p, stderr });
    }

    pub fn insert_cdf(&mut self, name: impl Into<String>, mut samples: Vec<T>) {
        samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in samples"));
        self.empirical_cdfs.insert(name.into(), samples);
    }

    pub fn get(&self, name: &str) -> Option<&Estimate<T>> {
        self.estimates.get(name)
    }
}

/// Sample mean and `stdev / √n` (population of at least two).
pub fn mean_stderr<T: Real>(samples: &[T]) -> (T, Option<T>) {
    let n = samples.len();
    if n == 0 {
        return (T::nan(), None);
    }
    let nf = T::from_usize_lossy(n);
    let mean = samples.iter().fold(T::zero(), |a, &b| a + b) / nf;
    if n < 2 {
        return (mean, None);
    }
    let ss = samples
        .iter()
        .fold(T::zero(), |a, &b| a + (b - mean) * (b - mean));
    let var = ss / T::from_usize_lossy(n - 1);
    (mean, Some((var / nf).sqrt()))
}

/// Key under which [`origin_proximity`] stores the fraction for `eps`.
pub fn origin_key<T: Real>(eps: T) -> String {
    format!("frac_min_norm_below_{eps:e}")
}

/// For each `eps`, the fraction of paths whose minimum `ℓ∞` norm is below it.
pub fn origin_proximity<T: Real>(paths: &[SolutionPath<T>], epsilons: &[T]) -> Result<McSummary<T>> {
    if paths.is_empty() {
        return Err(Error::Empty("path collection".into()));
    }
    let mins: Vec<T> = paths.iter().map(SolutionPath::min_norm_inf).collect();
    let mut s = McSummary::new(paths.len());
    for &eps in epsilons {
        let hits = mins.iter().filter(|&&m| m < eps).count();
        s.insert_fraction(origin_key(eps), hits);
    }
    s.insert_cdf("min_norm_inf", mins);
    Ok(s)
}
