//! Gradient-MUSIC: frequency estimation from an approximate Fourier subspace.
//!
//! Given an orthonormal basis `W` of an `r`-dimensional subspace of `C^m`,
//! the noise-space objective
//!
//! ```text
//! q(t) = ‖φ(t) − W W* φ(t)‖² / m,    φ(t) = (1, e^{it}, …, e^{i(m−1)t})
//! ```
//!
//! vanishes exactly at the frequencies when `W = range(Φ(m, x))` and has
//! deep, narrow wells near them otherwise. Frequencies are recovered by
//! picking the `r` best grid minima of `q` (evaluated for the whole grid with
//! one FFT per basis column) and polishing each with Armijo gradient descent.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use faer::{Col, Mat};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{OrthonormalBasis, C64};
use crate::par::{map_range, map_slice, Parallelism};
use crate::torus::{canonicalize, circ_dist, FrequencySet};

pub use crate::params::SpectralParams;

/// Tuning knobs. `None` fields resolve against the ambient dimension `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientMusicConfig {
    /// Grid points per `2π/m`.
    pub grid_density: usize,
    /// Minimum wrap distance between initializers; default `4π/m`.
    pub exclusion_radius: Option<f64>,
    pub max_iters: usize,
    /// Stop once `|q′| ≤ grad_tol`; default `1e-12 · m²`.
    pub grad_tol: Option<f64>,
    pub armijo_shrink: f64,
    pub armijo_slope: f64,
    #[serde(skip)]
    pub parallelism: Parallelism,
}

impl Default for GradientMusicConfig {
    fn default() -> Self {
        Self {
            grid_density: 16,
            exclusion_radius: None,
            max_iters: 100,
            grad_tol: None,
            armijo_shrink: 0.5,
            armijo_slope: 1e-4,
            parallelism: Parallelism::default(),
        }
    }
}

impl GradientMusicConfig {
    pub fn exclusion_radius_for(&self, m: usize) -> f64 {
        self.exclusion_radius.unwrap_or(4.0 * PI / m as f64)
    }

    pub fn grad_tol_for(&self, m: usize) -> f64 {
        self.grad_tol.unwrap_or(1e-12 * (m * m) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_density < 4 {
            return Err(invalid(format!("grid_density must be >= 4, got {}", self.grid_density)));
        }
        if let Some(e) = self.exclusion_radius {
            if !(e > 0.0 && e.is_finite()) {
                return Err(invalid(format!("exclusion_radius must be positive, got {e}")));
            }
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be >= 1"));
        }
        if let Some(g) = self.grad_tol {
            if !(g >= 0.0) {
                return Err(invalid(format!("grad_tol must be nonnegative, got {g}")));
            }
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return Err(invalid("armijo_shrink must lie in (0, 1)"));
        }
        if !(self.armijo_slope > 0.0 && self.armijo_slope < 1.0) {
            return Err(invalid("armijo_slope must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// The MUSIC objective for a fixed subspace `W ⊂ C^m`.
#[derive(Debug, Clone)]
pub struct MusicLandscape {
    m: usize,
    w: Mat<C64>,
    /// Columns of `W`, each of length `m`.
    columns: Vec<Vec<C64>>,
}

impl MusicLandscape {
    pub fn new(w: &OrthonormalBasis) -> Result<Self> {
        let (m, r) = (w.ambient(), w.dim());
        if r == 0 || r >= m {
            return Err(invalid(format!(
                "MUSIC needs 1 <= r < m, got r = {r}, m = {m}"
            )));
        }
        let columns = (0..r).map(|k| w.matrix().column(k)).collect();
        Ok(Self { m, w: w.matrix().to_faer(), columns })
    }

    pub fn ambient(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// `(q(t), q′(t))` from the explicit residual `ρ = φ − W W* φ`, which
    /// keeps full relative accuracy where `q` is tiny.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        let m = self.m;
        let phi = phases(m, t);
        let c = self.w.adjoint() * &phi;
        let rho = &phi - &self.w * &c;
        let mf = m as f64;
        let q = rho.squared_norm_l2() / mf;
        // Re⟨φ′, ρ⟩ with φ′_j = i j φ_j reduces to Σ_j j · Im(conj(φ_j) ρ_j).
        let g = (0..m).map(|j| j as f64 * (phi[j].conj() * rho[j]).im).sum::<f64>();
        (q, 2.0 * g / mf)
    }

    pub fn objective(&self, t: f64) -> f64 {
        self.evaluate(t).0
    }

    pub fn gradient(&self, t: f64) -> f64 {
        self.evaluate(t).1
    }

    /// `Ĺ = (2/m) Σ_{j<m} j²`, the curvature scale used for the initial step.
    pub fn curvature_bound(&self) -> f64 {
        let m = self.m as f64;
        2.0 / m * ((m - 1.0) * m * (2.0 * m - 1.0) / 6.0)
    }

    /// `q` on the uniform grid `t_l = 2πl/N`, `N = grid_density · m`.
    ///
    /// `(W* φ(t_l))_k` is an inverse DFT of the conjugated, zero-padded `k`-th
    /// column, so the whole grid costs `r` FFTs of length `N`.
    pub fn grid_values(&self, grid_density: usize, par: Parallelism) -> Vec<f64> {
        let n_grid = grid_density * self.m;
        let plan: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(n_grid);
        let spectra = map_slice(par, &self.columns, |col| {
            let mut buf = vec![C64::new(0.0, 0.0); n_grid];
            for (b, w) in buf.iter_mut().zip(col) {
                *b = w.conj();
            }
            plan.process(&mut buf);
            buf.iter().map(|z| z.norm_sqr()).collect::<Vec<f64>>()
        });
        let mf = self.m as f64;
        (0..n_grid)
            .map(|l| {
                let captured: f64 = spectra.iter().map(|s| s[l]).sum();
                (1.0 - captured / mf).clamp(0.0, 1.0)
            })
            .collect()
    }
}

/// `(e^{ijt})_{j<m}` by complex multiplication, resynchronised with an exact
/// `from_polar` every 32 entries so rounding cannot accumulate.
fn phases(m: usize, t: f64) -> Col<C64> {
    let step = C64::from_polar(1.0, t);
    let mut out = Col::<C64>::zeros(m);
    let mut cur = C64::new(1.0, 0.0);
    for j in 0..m {
        if j % 32 == 0 {
            cur = C64::from_polar(1.0, j as f64 * t);
        }
        out[j] = cur;
        cur *= step;
    }
    out
}

/// Free-function form of [`MusicLandscape::objective`].
pub fn objective(landscape: &MusicLandscape, t: f64) -> f64 {
    landscape.objective(t)
}

/// Free-function form of [`MusicLandscape::gradient`].
pub fn objective_gradient(landscape: &MusicLandscape, t: f64) -> f64 {
    landscape.gradient(t)
}

/// Grid indices ordered for seeding: discrete local minima of `q` first (by
/// increasing `q`), then every other grid point (by increasing `q`).
fn ranked_candidates(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let is_local_min = |l: usize| {
        let prev = values[(l + n - 1) % n];
        let next = values[(l + 1) % n];
        values[l] < prev && values[l] <= next
    };
    let by_value = |a: &usize, b: &usize| values[*a].total_cmp(&values[*b]).then(a.cmp(b));
    let (mut minima, mut rest): (Vec<usize>, Vec<usize>) = (0..n).partition(|&l| is_local_min(l));
    minima.sort_by(by_value);
    rest.sort_by(by_value);
    minima.extend(rest);
    minima
}

/// Walks a ranked candidate list, handing out grid points that respect the
/// exclusion radius with respect to everything already placed.
struct Seeder {
    order: Vec<usize>,
    next: usize,
    step: f64,
    radius: f64,
}

impl Seeder {
    fn new(values: &[f64], radius: f64) -> Self {
        Self { order: ranked_candidates(values), next: 0, step: TAU / values.len() as f64, radius }
    }

    fn next_admissible(&mut self, placed: &[f64]) -> Option<f64> {
        while self.next < self.order.len() {
            let t = self.order[self.next] as f64 * self.step;
            self.next += 1;
            if placed.iter().all(|&p| circ_dist(p, t) >= self.radius) {
                return Some(t);
            }
        }
        None
    }
}

/// Picks `r` grid points greedily by increasing `q`, skipping any point closer
/// than the exclusion radius to one already picked.
pub fn grid_initializers(
    landscape: &MusicLandscape,
    r: usize,
    cfg: &GradientMusicConfig,
) -> Result<FrequencySet> {
    cfg.validate()?;
    let seeds = initial_seeds(landscape, r, cfg)?.0;
    FrequencySet::new(seeds)
}

fn initial_seeds(
    landscape: &MusicLandscape,
    r: usize,
    cfg: &GradientMusicConfig,
) -> Result<(Vec<f64>, Seeder)> {
    if r == 0 || r >= landscape.ambient() {
        return Err(invalid(format!(
            "need 1 <= r < m, got r = {r}, m = {}",
            landscape.ambient()
        )));
    }
    let values = landscape.grid_values(cfg.grid_density, cfg.parallelism);
    let mut seeder = Seeder::new(&values, cfg.exclusion_radius_for(landscape.ambient()));
    let mut seeds = Vec::with_capacity(r);
    while seeds.len() < r {
        match seeder.next_admissible(&seeds) {
            Some(t) => seeds.push(t),
            None => return Err(Error::InitializationFailure { requested: r, found: seeds.len() }),
        }
    }
    Ok((seeds, seeder))
}

/// Outcome of one descent run.
#[derive(Debug, Clone)]
pub struct DescentTrace {
    pub point: f64,
    pub objective: f64,
    pub gradient: f64,
    pub iterations: usize,
    /// Objective after the start and after every accepted step.
    pub accepted: Vec<f64>,
}

/// Armijo-backtracking gradient descent on `q` from `t0`.
pub fn descend(landscape: &MusicLandscape, t0: f64, cfg: &GradientMusicConfig) -> f64 {
    descend_traced(landscape, t0, cfg).point
}

pub fn descend_traced(landscape: &MusicLandscape, t0: f64, cfg: &GradientMusicConfig) -> DescentTrace {
    let tol = cfg.grad_tol_for(landscape.ambient());
    let step0 = 1.0 / landscape.curvature_bound();
    let mut t = t0;
    let (mut q, mut g) = landscape.evaluate(t);
    let mut accepted = vec![q];
    let mut iterations = 0;
    'outer: while iterations < cfg.max_iters && g.abs() > tol {
        iterations += 1;
        let mut step = step0;
        loop {
            let cand = t - step * g;
            let (qc, gc) = landscape.evaluate(cand);
            if qc <= q - cfg.armijo_slope * step * g * g {
                t = cand;
                q = qc;
                g = gc;
                accepted.push(q);
                break;
            }
            step *= cfg.armijo_shrink;
            // no representable progress left
            if step * g.abs() <= f64::EPSILON * t.abs().max(1.0) {
                break 'outer;
            }
        }
    }
    DescentTrace { point: canonicalize(t), objective: q, gradient: g, iterations, accepted }
}

/// Recovers `r = dim(W)` frequencies from the subspace `W`.
///
/// Descents that end within half the exclusion radius of each other are
/// merged (the lower objective survives) and the lost slot is re-seeded from
/// the next admissible grid candidate.
pub fn estimate_frequencies(w: &OrthonormalBasis, cfg: &GradientMusicConfig) -> Result<FrequencySet> {
    cfg.validate()?;
    let landscape = MusicLandscape::new(w)?;
    let r = landscape.dim();
    let radius = cfg.exclusion_radius_for(landscape.ambient());
    let (seeds, mut seeder) = initial_seeds(&landscape, r, cfg)?;

    let run = |starts: &[f64]| {
        map_slice(cfg.parallelism, starts, |&t0| {
            let tr = descend_traced(&landscape, t0, cfg);
            (tr.point, tr.objective)
        })
    };
    let mut found = run(&seeds);
    loop {
        found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
        let mut kept: Vec<(f64, f64)> = Vec::with_capacity(r);
        for &(t, q) in &found {
            if kept.iter().all(|&(k, _)| circ_dist(k, t) >= radius / 2.0) {
                kept.push((t, q));
            }
        }
        if kept.len() == r {
            found = kept;
            break;
        }
        let mut placed: Vec<f64> = kept.iter().map(|k| k.0).collect();
        let mut reseeds = Vec::with_capacity(r - kept.len());
        while placed.len() < r {
            match seeder.next_admissible(&placed) {
                Some(t) => {
                    placed.push(t);
                    reseeds.push(t);
                }
                None => {
                    return Err(Error::EstimationFailure(format!(
                        "only {} distinct frequencies after exhausting grid candidates, need {r}",
                        kept.len()
                    )))
                }
            }
        }
        kept.extend(run(&reseeds));
        found = kept;
    }
    FrequencySet::new(found.into_iter().map(|f| f.0))
}

/// `|{k : σ_k ≥ θ · scale}|`.
pub fn detect_rank(sigma: &[f64], scale: f64, theta: f64) -> usize {
    sigma.iter().filter(|&&s| s >= theta * scale).count()
}

/// Default singular-value threshold fraction for [`detect_rank`].
pub const DEFAULT_RANK_THETA: f64 = 0.25;

/// Evaluates `q` at arbitrary points, possibly in parallel.
pub fn objective_many(landscape: &MusicLandscape, ts: &[f64], par: Parallelism) -> Vec<f64> {
    map_range(par, ts.len(), |i| landscape.objective(ts[i]))
}
