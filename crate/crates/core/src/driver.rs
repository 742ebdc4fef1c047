//! Joint sampling of a Brownian motion `B` and its running integral
//! `I_t = ∫_0^t B_s ds` on a time grid.
//!
//! Over a step of length `d` starting from `(B_k, I_k)` the pair
//! `(ΔB, ΔI - B_k d)` is centred Gaussian with covariance
//! `[[d, d²/2], [d²/2, d³/3]]`. Steps are drawn from that law directly through
//! the 2x2 Cholesky factor, so the driver carries no integration bias.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::NormalStream;
use crate::scalar::Real;

/// Strictly increasing sampling times starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    times: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(times: Vec<T>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 times, got {}",
                times.len()
            )));
        }
        if times[0] != T::zero() {
            return Err(Error::InvalidGrid(format!("first time is {}, not 0", times[0])));
        }
        if let Some(k) = times
            .windows(2)
            .position(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(Error::InvalidGrid(format!(
                "times not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(Self { times })
    }

    /// `n_steps + 1` equally spaced times on `[0, horizon]`.
    pub fn uniform(horizon: T, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "uniform grid needs horizon > 0 and n_steps >= 1 (got {horizon}, {n_steps})"
            )));
        }
        let n = T::from_usize_lossy(n_steps);
        let times = (0..=n_steps)
            .map(|k| T::from_usize_lossy(k) / n * horizon)
            .collect();
        Self::new(times)
    }

    #[inline]
    pub fn times(&self) -> &[T] {
        &self.times
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    #[inline]
    pub fn horizon(&self) -> T {
        *self.times.last().expect("grid has at least two times")
    }

    #[inline]
    pub fn step(&self, k: usize) -> T {
        self.times[k + 1] - self.times[k]
    }

    /// Largest step length.
    pub fn max_step(&self) -> T {
        (0..self.n_steps())
            .map(|k| self.step(k))
            .fold(T::zero(), T::max)
    }

    /// Split every step into `factor` equal pieces. `factor == 1` returns an identical grid.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidGrid("refinement factor must be >= 1".into()));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let f = T::from_usize_lossy(factor);
        let mut times = Vec::with_capacity(self.n_steps() * factor + 1);
        for w in self.times.windows(2) {
            let d = w[1] - w[0];
            for j in 0..factor {
                times.push(w[0] + d * (T::from_usize_lossy(j) / f));
            }
        }
        times.push(self.horizon());
        Self::new(times)
    }

    /// Indices into `fine` of every time of `self`; errors unless `fine` contains them all.
    pub fn embedding_in(&self, fine: &TimeGrid<T>) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(self.len());
        let mut j = 0;
        for &t in &self.times {
            while j < fine.len() && fine.times[j] < t {
                j += 1;
            }
            if j == fine.len() || fine.times[j] != t {
                return Err(Error::NotARefinement(format!("time {t} missing from new grid")));
            }
            idx.push(j);
        }
        Ok(idx)
    }

    pub(crate) fn push_uniform_until(&mut self, target: T, step: T) {
        let start = self.horizon();
        let mut k = 1usize;
        loop {
            let t = start + step * T::from_usize_lossy(k);
            self.times.push(t);
            if t >= target {
                break;
            }
            k += 1;
        }
    }
}

/// A Brownian path `b` and its running integral `ib` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverPath<T> {
    pub grid: TimeGrid<T>,
    pub b: Vec<T>,
    pub ib: Vec<T>,
    pub seed: u64,
    pub stream_id: u64,
}

/// Exact step of `(B, I)` from standard normals `z1, z2`: returns `(ΔB, ΔI - B_k d)`.
#[inline]
pub fn joint_increment<T: Real>(d: T, z1: T, z2: T) -> (T, T) {
    let sd = d.sqrt();
    let half = T::lit(0.5);
    let db = sd * z1;
    let di = d * sd * (half * z1 + z2 / (T::lit(2.0) * T::lit(3.0).sqrt()));
    (db, di)
}

impl<T: Real> DriverPath<T> {
    /// Driver with no noise: `b ≡ 0`, `ib ≡ 0`.
    pub fn zero(grid: TimeGrid<T>) -> Self {
        let n = grid.len();
        Self {
            grid,
            b: vec![T::zero(); n],
            ib: vec![T::zero(); n],
            seed: 0,
            stream_id: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Brownian increment over step `k`.
    #[inline]
    pub fn db(&self, k: usize) -> T {
        self.b[k + 1] - self.b[k]
    }

    /// Append times beyond the current horizon, drawing only the new steps.
    ///
    /// Sampling `[t_0..t_n]` then extending to `t_m` gives the same path as
    /// sampling `[t_0..t_m]` directly.
    pub fn extend(&mut self, more: &[T]) -> Result<()> {
        let mut times = self.grid.times.clone();
        times.extend_from_slice(more);
        let grid = TimeGrid::new(times)?;
        let start = self.grid.n_steps();
        let mut rng = NormalStream::at(self.seed, self.stream_id, start as u64);
        self.grid = grid;
        self.fill_from(start, &mut rng);
        Ok(())
    }

    fn fill_from(&mut self, start_step: usize, rng: &mut NormalStream) {
        let n = self.grid.len();
        self.b.reserve(n - self.b.len());
        self.ib.reserve(n - self.ib.len());
        for k in start_step..self.grid.n_steps() {
            let (z1, z2) = rng.next_pair();
            let d = self.grid.step(k);
            let (db, di) = joint_increment(d, T::lit(z1), T::lit(z2));
            let bk = self.b[k];
            self.b.push(bk + db);
            self.ib.push(self.ib[k] + bk * d + di);
        }
    }
}

/// Sample `(B, ∫B)` on `grid`; a pure function of `(grid, seed, stream_id)`.
pub fn sample_driver<T: Real>(grid: &TimeGrid<T>, seed: u64, stream_id: u64) -> DriverPath<T> {
    let mut path = DriverPath {
        grid: TimeGrid {
            times: grid.times.clone(),
        },
        b: vec![T::zero()],
        ib: vec![T::zero()],
        seed,
        stream_id,
    };
    let mut rng = NormalStream::at(seed, stream_id, 0);
    path.fill_from(0, &mut rng);
    path
}

/// Covariance `[[d, d²/2], [d²/2, d³/3]]` of `(B, I)` over a step of length `d` from a zero state.
#[inline]
fn step_cov<T: Real>(d: T) -> [[T; 2]; 2] {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    [[d, d * d / two], [d * d / two, d * d * d / three]]
}

/// Draw `(B, I)` at `a + u` given the state at `a` and the state at `a + u + w`.
fn conditional_step<T: Real>(
    (b_a, i_a): (T, T),
    (b_e, i_e): (T, T),
    u: T,
    w: T,
    (z1, z2): (T, T),
) -> (T, T) {
    let tau = u + w;
    let su = step_cov(u);
    // Σ(u) A(w)ᵀ with A(w) = [[1, 0], [w, 1]]
    let c = [
        [su[0][0], su[0][0] * w + su[0][1]],
        [su[1][0], su[1][0] * w + su[1][1]],
    ];
    // Σ(τ)⁻¹
    let t2 = tau * tau;
    let si = [
        [T::lit(4.0) / tau, -T::lit(6.0) / t2],
        [-T::lit(6.0) / t2, T::lit(12.0) / (t2 * tau)],
    ];
    let k = [
        [
            c[0][0] * si[0][0] + c[0][1] * si[1][0],
            c[0][0] * si[0][1] + c[0][1] * si[1][1],
        ],
        [
            c[1][0] * si[0][0] + c[1][1] * si[1][0],
            c[1][0] * si[0][1] + c[1][1] * si[1][1],
        ],
    ];
    let prior = (b_a, i_a + b_a * u);
    let r = (b_e - b_a, i_e - i_a - b_a * tau);
    let mean = (
        prior.0 + k[0][0] * r.0 + k[0][1] * r.1,
        prior.1 + k[1][0] * r.0 + k[1][1] * r.1,
    );
    // P = Σ(u) - K (Σ(u) A(w)ᵀ)ᵀ
    let p00 = su[0][0] - (k[0][0] * c[0][0] + k[0][1] * c[0][1]);
    let p10 = su[1][0] - (k[1][0] * c[0][0] + k[1][1] * c[0][1]);
    let p11 = su[1][1] - (k[1][0] * c[1][0] + k[1][1] * c[1][1]);
    let l00 = p00.max(T::zero()).sqrt();
    let l10 = if l00 > T::zero() { p10 / l00 } else { T::zero() };
    let l11 = (p11 - l10 * l10).max(T::zero()).sqrt();
    (mean.0 + l00 * z1, mean.1 + l10 * z1 + l11 * z2)
}

const REFINE_DOMAIN: u64 = 0x7265_6669_6e65_0000;

/// Refine `path` onto `new_grid`, keeping every original value.
///
/// Inserted points are drawn from the law of `(B, I)` conditioned on both
/// neighbouring original nodes, so the refined path is again an exact joint
/// sample and re-integrating `b` on ever finer grids converges to `ib`.
///
/// The draws use a stream derived from `(seed, new grid size, stream_id)`, so
/// passing the seed that produced `path` does not reuse its normals, and
/// refining the same path to different sizes gives independent insertions.
pub fn refine_driver<T: Real>(
    path: &DriverPath<T>,
    new_grid: &TimeGrid<T>,
    seed: u64,
) -> Result<DriverPath<T>> {
    let embed = path.grid.embedding_in(new_grid)?;
    if new_grid.len() == path.grid.len() {
        return Ok(path.clone());
    }
    let ft = new_grid.times();
    let mut b = vec![T::zero(); ft.len()];
    let mut ib = vec![T::zero(); ft.len()];
    let domain = REFINE_DOMAIN ^ (ft.len() as u64);
    let mut rng = NormalStream::derived(seed, domain, path.stream_id);
    for (k, w) in embed.windows(2).enumerate() {
        let (j0, j1) = (w[0], w[1]);
        b[j0] = path.b[k];
        ib[j0] = path.ib[k];
        let end = (path.b[k + 1], path.ib[k + 1]);
        for j in j0 + 1..j1 {
            let (z1, z2) = rng.next_pair();
            let u = ft[j] - ft[j - 1];
            let rem = ft[j1] - ft[j];
            let (bj, ij) = conditional_step((b[j - 1], ib[j - 1]), end, u, rem, (T::lit(z1), T::lit(z2)));
            b[j] = bj;
            ib[j] = ij;
        }
    }
    let last = *embed.last().expect("non-empty embedding");
    b[last] = *path.b.last().expect("non-empty path");
    ib[last] = *path.ib.last().expect("non-empty path");
    Ok(DriverPath {
        grid: new_grid.clone(),
        b,
        ib,
        seed: path.seed,
        stream_id: path.stream_id,
    })
}
