use serde::{Deserialize, Serialize};

use crate::path::SolutionPath;
use crate::scalar::Real;
use crate::schemes::TruncationSpec;

/// A grid stopping time, or the horizon sentinel when the event never happens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopTime<T> {
    At { index: usize, time: T },
    Horizon(T),
}

impl<T: Real> StopTime<T> {
    pub fn time(&self) -> T {
        match *self {
            StopTime::At { time, .. } => time,
            StopTime::Horizon(t) => t,
        }
    }

    pub fn occurred(&self) -> bool {
        matches!(self, StopTime::At { .. })
    }

    fn first<F: Fn(usize) -> bool>(times: &[T], hit: F) -> Self {
        match (0..times.len()).find(|&k| hit(k)) {
            Some(index) => StopTime::At {
                index,
                time: times[index],
            },
            None => StopTime::Horizon(*times.last().expect("non-empty grid")),
        }
    }
}

/// First grid time with `|(x, y)|_∞ <= 2^-n` or `>= 2^n`.
pub fn tau_n<T: Real>(path: &SolutionPath<T>, trunc: &TruncationSpec<T>) -> StopTime<T> {
    StopTime::first(path.times(), |k| trunc.exits(path.norm_inf(k)))
}

/// Pairwise exit time: the smaller norm at or below `2^-n`, or the larger at or above `2^n`.
///
/// `None` when the two paths are on different grids.
pub fn tau_n_pair<T: Real>(
    p1: &SolutionPath<T>,
    p2: &SolutionPath<T>,
    trunc: &TruncationSpec<T>,
) -> Option<StopTime<T>> {
    p1.check_same_grid(p2).ok()?;
    Some(StopTime::first(p1.times(), |k| {
        let (a, b) = (p1.norm_inf(k), p2.norm_inf(k));
        a.min(b) <= trunc.inner || a.max(b) >= trunc.outer
    }))
}

/// First grid time with `|X¹| ∨ |X²| >= level`.
pub fn eta_pair<T: Real>(p1: &SolutionPath<T>, p2: &SolutionPath<T>, level: T) -> Option<StopTime<T>> {
    p1.check_same_grid(p2).ok()?;
    Some(StopTime::first(p1.times(), |k| {
        p1.x[k].abs().max(p2.x[k].abs()) >= level
    }))
}

/// Zero set of `x` after the initial time.
///
/// A grid node with `x` exactly zero counts as a crossing at that node; a step
/// whose endpoints have strictly opposite signs contributes the root of the
/// linear interpolant. The initial time is never reported.
pub fn sigma_times<T: Real>(path: &SolutionPath<T>) -> Vec<T> {
    let t = path.times();
    let x = &path.x;
    let mut out: Vec<T> = Vec::new();
    let mut push = |s: T| {
        if out.last().is_none_or(|&l| s > l) {
            out.push(s);
        }
    };
    for k in 0..x.len() - 1 {
        let (a, b) = (x[k], x[k + 1]);
        if b == T::zero() {
            push(t[k + 1]);
        } else if (a < T::zero() && b > T::zero()) || (a > T::zero() && b < T::zero()) {
            let w = a / (a - b);
            push(t[k] + w * (t[k + 1] - t[k]));
        }
    }
    out
}
