use std::f64::consts::{PI, TAU};

use gmusic_core::baselines::project_toeplitz;
use gmusic_core::harness::{
    gen_frequencies, gen_perturbed_subspace, rng_for, run_bench, Method, ProblemKind, ProblemSpec,
    TrialConfig,
};
use gmusic_core::linalg::{fourier_matrix, orthonormal_range, sin_theta, singular_values, ComplexMatrix, C64};
use gmusic_core::music::{estimate_frequencies, GradientMusicConfig, MusicLandscape};
use gmusic_core::torus::{matching_distance_inf, wrap_distance};
use gmusic_core::{FrequencySet, OrthonormalBasis, Parallelism};
use proptest::prelude::*;
use rand::Rng;

fn random_basis(m: usize, r: usize, seed: u64) -> OrthonormalBasis {
    let mut rng = rng_for(seed);
    let a = ComplexMatrix::from_fn(m, r, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    orthonormal_range(&a).unwrap()
}

fn random_unitary(r: usize, seed: u64) -> ComplexMatrix {
    random_basis(r, r, seed).into_matrix()
}

fn brute_matching(x: &[f64], y: &[f64]) -> f64 {
    fn rec(x: &[f64], y: &mut Vec<f64>, k: usize, best: &mut f64, cur: f64) {
        if k == x.len() {
            *best = best.min(cur);
            return;
        }
        for i in k..y.len() {
            y.swap(k, i);
            let d = wrap_distance(x[k], y[k]).unwrap();
            rec(x, y, k + 1, best, cur.max(d));
            y.swap(k, i);
        }
    }
    let mut best = f64::INFINITY;
    rec(x, &mut y.to_vec(), 0, &mut best, 0.0);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wrap_distance_is_a_metric(u in -20.0f64..20.0, v in -20.0f64..20.0, w in -20.0f64..20.0) {
        let d = |a, b| wrap_distance(a, b).unwrap();
        prop_assert!(d(u, u) < 1e-12);
        prop_assert!((d(u, v) - d(v, u)).abs() < 1e-12);
        prop_assert!(d(u, v) <= PI + 1e-12);
        prop_assert!(d(u, w) <= d(u, v) + d(v, w) + 1e-12);
        prop_assert!((d(u + 2.0 * PI, v) - d(u, v)).abs() < 1e-9);
    }

    #[test]
    fn matching_agrees_with_permutation_search(
        x in prop::collection::vec(0.0f64..TAU, 1..=6),
        seed in any::<u64>(),
    ) {
        let mut rng = rng_for(seed);
        let y: Vec<f64> = x.iter().map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let (Ok(fx), Ok(fy)) = (FrequencySet::new(x.clone()), FrequencySet::new(y.clone())) else {
            return Ok(());
        };
        let fast = matching_distance_inf(&fx, &fy).unwrap();
        prop_assert!((fast - brute_matching(&fx.values(), &fy.values())).abs() < 1e-12);
    }

    #[test]
    fn fourier_sandwich(n in 16usize..96, beta in 1.5f64..8.0, seed in any::<u64>()) {
        let rmax = (n as f64 / (2.0 * beta)) as usize;
        prop_assume!(rmax >= 1);
        let mut rng = rng_for(seed);
        let x = gen_frequencies(n, rng.random_range(1..=rmax), beta, &mut rng).unwrap();
        prop_assert!(x.min_separation() >= 2.0 * PI * beta / n as f64 - 1e-12);
        let sv = singular_values(&fourier_matrix(n, &x)).unwrap();
        let lo = (n as f64 * (1.0 - 1.0 / beta)).sqrt();
        let hi = (n as f64 * (1.0 + 1.0 / beta)).sqrt();
        prop_assert!(sv.iter().all(|&s| s >= lo - 1e-9 && s <= hi + 1e-9), "{sv:?} vs [{lo}, {hi}]");
    }

    #[test]
    fn objective_is_periodic_and_basis_free(m in 4usize..64, seed in any::<u64>(), t in 0.0f64..6.3) {
        let r = 1 + (seed as usize) % (m - 1);
        let w = random_basis(m, r, seed);
        let mixed = OrthonormalBasis::new(w.matrix().matmul(&random_unitary(r, seed ^ 1)).unwrap()).unwrap();
        let (l, lm) = (MusicLandscape::new(&w).unwrap(), MusicLandscape::new(&mixed).unwrap());
        prop_assert!((l.objective(t) - l.objective(t + 2.0 * PI)).abs() < 1e-12);
        prop_assert!((l.objective(t) - lm.objective(t)).abs() < 1e-10);
        prop_assert!((l.gradient(t) - lm.gradient(t)).abs() < 1e-10 * (m * m) as f64);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&l.objective(t)));
    }

    #[test]
    fn gradient_matches_finite_differences(m in 4usize..128, seed in any::<u64>(), t in 0.0f64..6.3) {
        let r = 1 + (seed as usize) % (m / 2);
        let l = MusicLandscape::new(&random_basis(m, r, seed)).unwrap();
        let h = 1e-6;
        let fd = (l.objective(t + h) - l.objective(t - h)) / (2.0 * h);
        prop_assert!((l.gradient(t) - fd).abs() <= 1e-5 * (m * m) as f64);
    }

    #[test]
    fn sin_theta_is_symmetric_and_basis_free(m in 4usize..40, seed in any::<u64>()) {
        let r = 1 + (seed as usize) % (m / 2);
        let (u, w) = (random_basis(m, r, seed), random_basis(m, r, seed ^ 7));
        let a = sin_theta(&u, &w).unwrap();
        let b = sin_theta(&w, &u).unwrap();
        prop_assert!((a.spectral - b.spectral).abs() < 1e-10);
        prop_assert!((a.frobenius - b.frobenius).abs() < 1e-10);
        let mixed = OrthonormalBasis::new(w.matrix().matmul(&random_unitary(r, seed ^ 3)).unwrap()).unwrap();
        let c = sin_theta(&u, &mixed).unwrap();
        prop_assert!((a.frobenius - c.frobenius).abs() < 1e-10);
        prop_assert!(a.spectral <= a.frobenius + 1e-12 && a.spectral <= 1.0);
    }

    #[test]
    fn toeplitz_projection_is_nonexpansive(n in 1usize..12, seed in any::<u64>()) {
        let mut rng = rng_for(seed);
        let mut draw = || ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (a, b) = (draw(), draw());
        let (pa, pb) = (project_toeplitz(&a).unwrap(), project_toeplitz(&b).unwrap());
        prop_assert!(pa.sub(&pb).unwrap().fro_norm() <= a.sub(&b).unwrap().fro_norm() + 1e-12);
        let again = project_toeplitz(&pa.dense()).unwrap();
        prop_assert!(again.sub(&pa).unwrap().fro_norm() <= 1e-12 * (1.0 + pa.fro_norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modulation_equivariance(seed in any::<u64>(), shift in 0.0f64..TAU) {
        let m = 96;
        let mut rng = rng_for(seed);
        let x = gen_frequencies(m, 5, 4.0, &mut rng).unwrap();
        let w = orthonormal_range(&fourier_matrix(m, &x)).unwrap();
        let modulated = ComplexMatrix::from_fn(m, 5, |j, k| {
            w.matrix()[(j, k)] * C64::from_polar(1.0, j as f64 * shift)
        });
        let cfg = GradientMusicConfig::default();
        let base = estimate_frequencies(&w, &cfg).unwrap();
        let moved = estimate_frequencies(&OrthonormalBasis::new(modulated).unwrap(), &cfg).unwrap();
        let d = matching_distance_inf(&base.shifted(shift).unwrap(), &moved).unwrap();
        prop_assert!(d <= 1e-8, "d = {d}");
    }

    #[test]
    fn perturbation_contract(seed in any::<u64>(), s in 1e-4f64..1e-2) {
        let m = 128;
        let mut rng = rng_for(seed);
        let x = gen_frequencies(m, 6, 4.0, &mut rng).unwrap();
        let u = orthonormal_range(&fourier_matrix(m, &x)).unwrap();
        let sines: Vec<f64> = (0..6).map(|k| if k == 0 { s } else { rng.random_range(0.0..=s) }).collect();
        let w = gen_perturbed_subspace(&u, &sines, &mut rng).unwrap();
        let xh = estimate_frequencies(&w, &GradientMusicConfig::default()).unwrap();
        let d = matching_distance_inf(&x, &xh).unwrap();
        prop_assert!(d <= 10.0 / m as f64 * s, "d = {d}, bound {}", 10.0 / m as f64 * s);
    }
}

#[test]
fn bench_records_do_not_depend_on_scheduling() {
    let specs = [
        ProblemSpec { n: 48, r: 3, beta: 4.0, sigma: 0.2, trials: 3, master_seed: 77, kind: ProblemKind::Toeplitz },
        ProblemSpec { n: 48, r: 3, beta: 4.0, sigma: 0.2, trials: 2, master_seed: 77, kind: ProblemKind::Hankel },
        ProblemSpec { n: 96, r: 3, beta: 8.0, sigma: 0.05, trials: 2, master_seed: 77, kind: ProblemKind::Subspace },
    ];
    let methods = [Method::GradientMusic, Method::AltProj];
    let cfg = TrialConfig::default();
    let strip = |par| {
        let mut recs = run_bench(&specs, &methods, &cfg, par).unwrap().records;
        for r in &mut recs {
            r.time_sec = 0.0;
        }
        recs
    };
    let seq = strip(Parallelism::Sequential);
    assert_eq!(seq.len(), 3 * 2 + 2 * 2 + 2);
    assert_eq!(seq, strip(Parallelism::Rayon));
    assert!(seq.iter().all(|r| r.failure.is_none()));
}
