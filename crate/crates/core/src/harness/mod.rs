//! Instance generation, trial execution and reporting for the benchmark
//! experiments, plus the presets behind the `bench` CLI subcommand.

mod gen;
mod report;
mod trial;

pub use gen::{
    complex_normal, frequencies_from_offsets, gen_amplitudes, gen_frequencies,
    gen_hankel_noise, gen_perturbed_subspace, gen_toeplitz_noise, gen_vector_noise, rng_for,
    trial_seed, TrialRng, RNG_DESCRIPTION,
};
pub use report::{
    preset, read_csv, run_bench, summarize, to_markdown, write_csv, BenchReport, CellSummary,
    Preset,
};
pub use trial::{
    generate_instance, run_trial, run_trial_detailed, Instance, Method, Observation,
    ProblemKind, ProblemSpec, TrialConfig, TrialDetail, TrialRecord,
};
