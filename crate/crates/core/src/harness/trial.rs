use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gen::{
    gen_amplitudes, gen_frequencies, gen_hankel_noise, gen_toeplitz_noise, gen_vector_noise,
    rng_for, trial_seed,
};
use crate::baselines::{alternating_projection, AltProjConfig};
use crate::error::{invalid, Result};
use crate::estimators::{
    fourier_subspace_estimate, hankel_estimate, toeplitz_estimate, RankChoice,
};
use crate::linalg::{
    eps_rank, fourier_matrix, orthonormal_range, reverse_columns, sin_theta, singular_values,
    hankel_from_params, toeplitz_from_params, ComplexMatrix, HankelMatrix, ToeplitzMatrix, C64,
};
use crate::music::GradientMusicConfig;
use crate::par::Parallelism;
use crate::params::SpectralParams;
use crate::torus::matching_distance_inf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Toeplitz,
    Hankel,
    Subspace,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Toeplitz => "toeplitz",
            Self::Hankel => "hankel",
            Self::Subspace => "subspace",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "gradient-music")]
    GradientMusic,
    #[serde(rename = "alt-proj")]
    AltProj,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::GradientMusic => "gradient-music",
            Self::AltProj => "alt-proj",
        }
    }

    pub fn supports(self, kind: ProblemKind) -> bool {
        !(self == Self::AltProj && kind == ProblemKind::Subspace)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: usize,
    pub r: usize,
    pub beta: f64,
    pub sigma: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub kind: ProblemKind,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.trials == 0 {
            return Err(invalid("r and trials must be >= 1"));
        }
        if !(self.beta >= 1.0) || !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(invalid(format!(
                "need beta >= 1 and finite sigma >= 0, got beta = {}, sigma = {}",
                self.beta, self.sigma
            )));
        }
        if 2.0 * self.beta * self.r as f64 > self.n as f64 {
            return Err(invalid(format!(
                "r = {} exceeds n/(2 beta) = {}",
                self.r,
                self.n as f64 / (2.0 * self.beta)
            )));
        }
        Ok(())
    }

    /// Guaranteed minimum separation `2πβ/n` of generated instances.
    pub fn separation(&self) -> f64 {
        2.0 * PI * self.beta / self.n as f64
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrialConfig {
    pub music: GradientMusicConfig,
    pub altproj: AltProjConfig,
}

impl TrialConfig {
    /// Gradient-MUSIC settings for one spec. The default exclusion radius is
    /// capped at half the generator's guaranteed separation so that
    /// neighbouring frequencies at small β cannot suppress each other's seeds.
    pub fn music_for(&self, spec: &ProblemSpec) -> GradientMusicConfig {
        let mut cfg = self.music;
        if cfg.exclusion_radius.is_none() {
            let m = match spec.kind {
                ProblemKind::Subspace => spec.n.div_ceil(2),
                _ => spec.n,
            };
            cfg.exclusion_radius = Some((4.0 * PI / m as f64).min(spec.separation() / 2.0));
        }
        cfg
    }
}

#[derive(Debug, Clone)]
pub enum Observation {
    Toeplitz { truth: ToeplitzMatrix, noise: ToeplitzMatrix, observed: ComplexMatrix },
    Hankel { truth: HankelMatrix, noise: HankelMatrix, observed: ComplexMatrix },
    Subspace { clean: Vec<C64>, noise: Vec<C64>, observed: Vec<C64> },
}

/// One noisy problem instance together with its ground truth.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub params: SpectralParams,
    pub observation: Observation,
}

impl Instance {
    /// `‖E‖₂` for matrix kinds, `‖z‖₂` for the subspace kind.
    pub fn noise_norm(&self) -> Result<f64> {
        match &self.observation {
            Observation::Toeplitz { noise, .. } => noise.dense().spectral_norm(),
            Observation::Hankel { noise, .. } => noise.dense().spectral_norm(),
            Observation::Subspace { noise, .. } => {
                Ok(noise.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            }
        }
    }
}

pub fn generate_instance(spec: &ProblemSpec, seed: u64) -> Result<Instance> {
    spec.validate()?;
    let mut rng = rng_for(seed);
    let n = spec.n;
    let x = gen_frequencies(n, spec.r, spec.beta, &mut rng)?;
    let a = gen_amplitudes(spec.r, &mut rng);
    let params = SpectralParams::new(x, a)?;
    let observation = match spec.kind {
        ProblemKind::Toeplitz => {
            let truth = toeplitz_from_params(n, &params);
            let noise = gen_toeplitz_noise(n, spec.sigma, &mut rng);
            let observed = truth.add(&noise)?.dense();
            Observation::Toeplitz { truth, noise, observed }
        }
        ProblemKind::Hankel => {
            let truth = hankel_from_params(n, &params)?;
            let noise = gen_hankel_noise(n, spec.sigma, &mut rng);
            let observed = truth.dense().add(&noise.dense())?;
            Observation::Hankel { truth, noise, observed }
        }
        ProblemKind::Subspace => {
            let clean = fourier_matrix(n, &params.x)
                .matmul(&ComplexMatrix::from_fn(spec.r, 1, |k, _| params.a[k]))?
                .column(0);
            let noise = gen_vector_noise(n, spec.sigma, &mut rng);
            let observed = clean.iter().zip(&noise).map(|(c, z)| c + z).collect();
            Observation::Subspace { clean, noise, observed }
        }
    };
    Ok(Instance { seed, params, observation })
}

/// One CSV row. Fields that do not apply to a trial are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: Method,
    pub kind: ProblemKind,
    pub n: usize,
    pub r: usize,
    pub beta: f64,
    pub sigma: f64,
    pub trial: usize,
    pub seed: u64,
    pub rel_error_fro: Option<f64>,
    pub rel_error_spec: Option<f64>,
    pub sin_theta_fro: Option<f64>,
    pub time_sec: f64,
    pub eps_rank_1e6: Option<usize>,
    pub eps_rank_1e2: Option<usize>,
    #[serde(skip)]
    pub failure: Option<String>,
}

impl TrialRecord {
    fn blank(spec: &ProblemSpec, trial: usize, seed: u64, method: Method) -> Self {
        Self {
            method,
            kind: spec.kind,
            n: spec.n,
            r: spec.r,
            beta: spec.beta,
            sigma: spec.sigma,
            trial,
            seed,
            rel_error_fro: None,
            rel_error_spec: None,
            sin_theta_fro: None,
            time_sec: 0.0,
            eps_rank_1e6: None,
            eps_rank_1e2: None,
            failure: None,
        }
    }

    /// The record's primary error: relative Frobenius error for matrix
    /// kinds, `‖sin Θ‖_F` for the subspace kind.
    pub fn error(&self) -> Option<f64> {
        match self.kind {
            ProblemKind::Subspace => self.sin_theta_fro,
            _ => self.rel_error_fro,
        }
    }
}

/// A record plus quantities the CSV does not carry.
#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub record: TrialRecord,
    /// `‖Ŝ − S‖₂` for matrix kinds.
    pub abs_error_spec: Option<f64>,
    /// `‖E‖₂` or `‖z‖₂`.
    pub noise_norm: Option<f64>,
    /// Matching distance between estimated and true frequencies.
    pub frequency_error: Option<f64>,
}

pub fn run_trial(spec: &ProblemSpec, trial: usize, method: Method, cfg: &TrialConfig) -> TrialRecord {
    run_trial_detailed(spec, trial, method, cfg).record
}

/// Never fails: generation and method errors land in `record.failure`.
pub fn run_trial_detailed(
    spec: &ProblemSpec,
    trial: usize,
    method: Method,
    cfg: &TrialConfig,
) -> TrialDetail {
    let seed = trial_seed(spec.master_seed, trial as u64);
    let mut detail = TrialDetail {
        record: TrialRecord::blank(spec, trial, seed, method),
        abs_error_spec: None,
        noise_norm: None,
        frequency_error: None,
    };
    if let Err(e) = fill(spec, method, cfg, &mut detail) {
        detail.record.failure = Some(e.to_string());
    }
    detail
}

fn fill(spec: &ProblemSpec, method: Method, cfg: &TrialConfig, d: &mut TrialDetail) -> Result<()> {
    if !method.supports(spec.kind) {
        return Err(invalid(format!("{method} does not apply to {} problems", spec.kind)));
    }
    let inst = generate_instance(spec, d.record.seed)?;
    // trials already run inside the bench's parallel map
    let music = GradientMusicConfig { parallelism: Parallelism::Sequential, ..cfg.music_for(spec) };
    let rank = RankChoice::Fixed(spec.r);
    d.noise_norm = Some(inst.noise_norm()?);

    let (estimate, truth) = match &inst.observation {
        Observation::Toeplitz { truth, observed, .. } => {
            let start = Instant::now();
            let out = match method {
                Method::GradientMusic => {
                    let est = toeplitz_estimate(observed, rank, &music);
                    d.record.time_sec = start.elapsed().as_secs_f64();
                    let est = est?;
                    d.frequency_error = Some(matching_distance_inf(&est.x_hat, &inst.params.x)?);
                    est.t_hat
                }
                Method::AltProj => {
                    let est = alternating_projection(observed, spec.r, &cfg.altproj);
                    d.record.time_sec = start.elapsed().as_secs_f64();
                    est?
                }
            };
            let rel_fro = out.sub(truth)?.fro_norm() / truth.fro_norm();
            (out.dense(), (truth.dense(), rel_fro))
        }
        Observation::Hankel { truth, observed, .. } => {
            let start = Instant::now();
            let out = match method {
                Method::GradientMusic => {
                    let est = hankel_estimate(observed, rank, &music);
                    d.record.time_sec = start.elapsed().as_secs_f64();
                    let est = est?;
                    d.frequency_error = Some(matching_distance_inf(&est.x_hat, &inst.params.x)?);
                    est.h_hat
                }
                Method::AltProj => {
                    let est = alternating_projection(&reverse_columns(observed), spec.r, &cfg.altproj);
                    d.record.time_sec = start.elapsed().as_secs_f64();
                    // (T J)_{jk} = t_{j+k-n+1}, so T's generator is the Hankel one
                    HankelMatrix::new(spec.n, est?.generator().to_vec())?
                }
            };
            let diff = HankelMatrix::new(
                spec.n,
                out.generator().iter().zip(truth.generator()).map(|(a, b)| a - b).collect(),
            )?;
            let rel_fro = diff.fro_norm() / truth.fro_norm();
            (out.dense(), (truth.dense(), rel_fro))
        }
        Observation::Subspace { observed, .. } => {
            let start = Instant::now();
            let est = fourier_subspace_estimate(observed, rank, &music);
            d.record.time_sec = start.elapsed().as_secs_f64();
            let est = est?;
            d.frequency_error = Some(matching_distance_inf(&est.x_hat, &inst.params.x)?);
            let u = orthonormal_range(&fourier_matrix(spec.n, &inst.params.x))?;
            d.record.sin_theta_fro = Some(sin_theta(&u, &est.u_hat)?.frobenius);
            return Ok(());
        }
    };

    let (truth_dense, rel_fro) = truth;
    let diff = estimate.sub(&truth_dense)?;
    let abs_spec = diff.spectral_norm()?;
    d.abs_error_spec = Some(abs_spec);
    d.record.rel_error_fro = Some(rel_fro);
    d.record.rel_error_spec = Some(abs_spec / truth_dense.spectral_norm()?);
    let sv = singular_values(&estimate)?;
    d.record.eps_rank_1e6 = Some(eps_rank(&sv, 1e-6));
    d.record.eps_rank_1e2 = Some(eps_rank(&sv, 1e-2));
    Ok(())
}
