use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::Serialize;

use super::gen::RNG_DESCRIPTION;
use super::trial::{run_trial, Method, ProblemKind, ProblemSpec, TrialConfig, TrialRecord};
use crate::error::{invalid, Result};
use crate::par::{map_slice, Parallelism};

/// A named experiment: which cells to run and with which methods.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub specs: Vec<ProblemSpec>,
    pub methods: Vec<Method>,
}

pub fn preset(name: &str, trials: usize, master_seed: u64) -> Result<Preset> {
    let spec = |kind, n, r, beta, sigma| ProblemSpec { n, r, beta, sigma, trials, master_seed, kind };
    let both = vec![Method::GradientMusic, Method::AltProj];
    let p = match name {
        "table1" => Preset {
            name: "table1",
            specs: [(200, 20), (500, 50), (1000, 100)]
                .map(|(n, r)| spec(ProblemKind::Toeplitz, n, r, 4.0, 0.1))
                .to_vec(),
            methods: both,
        },
        "table2" => Preset {
            name: "table2",
            specs: [(200, 40), (500, 100), (1000, 200)]
                .map(|(n, r)| spec(ProblemKind::Toeplitz, n, r, 2.0, 1.0))
                .to_vec(),
            methods: both,
        },
        "scaling-toeplitz" => Preset {
            name: "scaling-toeplitz",
            specs: [100, 200, 400]
                .map(|n| spec(ProblemKind::Toeplitz, n, n / 10, 4.0, 0.1))
                .to_vec(),
            methods: vec![Method::GradientMusic],
        },
        "scaling-subspace" => Preset {
            name: "scaling-subspace",
            // σ = 0.5/√r gives E‖z‖₂ ≈ 0.5 √(n/r)
            specs: [200, 400, 800]
                .map(|n| spec(ProblemKind::Subspace, n, 10, 8.0, 0.5 / 10f64.sqrt()))
                .to_vec(),
            methods: vec![Method::GradientMusic],
        },
        other => return Err(invalid(format!("unknown preset `{other}`"))),
    };
    Ok(p)
}

/// Per-cell statistics. `error` is the relative Frobenius error for matrix
/// problems and `‖sin Θ‖_F` for subspace problems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub method: Method,
    pub kind: ProblemKind,
    pub n: usize,
    pub r: usize,
    pub beta: f64,
    pub sigma: f64,
    pub trials: usize,
    pub failures: Vec<String>,
    pub avg_error: Option<f64>,
    pub max_error: Option<f64>,
    pub avg_time: Option<f64>,
    pub max_time: Option<f64>,
    pub median_eps_rank_1e6: Option<f64>,
    pub max_eps_rank_1e6: Option<usize>,
    pub median_eps_rank_1e2: Option<f64>,
    pub max_eps_rank_1e2: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub master_seed: Option<u64>,
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellSummary>,
}

/// Runs every supported `(spec, method, trial)` combination. Trials are
/// independent, so they are spread over the rayon pool when `par` allows;
/// the record order is fixed regardless.
pub fn run_bench(
    specs: &[ProblemSpec],
    methods: &[Method],
    cfg: &TrialConfig,
    par: Parallelism,
) -> Result<BenchReport> {
    for s in specs {
        s.validate()?;
    }
    let tasks: Vec<(ProblemSpec, Method, usize)> = specs
        .iter()
        .flat_map(|s| {
            methods
                .iter()
                .filter(|m| m.supports(s.kind))
                .flat_map(move |&m| (0..s.trials).map(move |t| (*s, m, t)))
        })
        .collect();
    let records = map_slice(par, &tasks, |(s, m, t)| run_trial(s, *t, *m, cfg));
    let cells = summarize(&records);
    let master_seed = specs.first().map(|s| s.master_seed);
    Ok(BenchReport { master_seed, records, cells })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn max_f(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::max)
}

fn median(v: &[usize]) -> Option<f64> {
    let mut s = v.to_vec();
    s.sort_unstable();
    let k = s.len();
    match k {
        0 => None,
        _ if k % 2 == 1 => Some(s[k / 2] as f64),
        _ => Some((s[k / 2 - 1] + s[k / 2]) as f64 / 2.0),
    }
}

/// Groups records into cells in order of first appearance.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let key = |r: &TrialRecord| (r.method, r.kind, r.n, r.r, r.beta.to_bits(), r.sigma.to_bits());
    let mut keys = Vec::new();
    for r in records {
        if !keys.contains(&key(r)) {
            keys.push(key(r));
        }
    }
    keys.into_iter()
        .map(|k| {
            let group: Vec<&TrialRecord> = records.iter().filter(|r| key(r) == k).collect();
            let ok: Vec<&&TrialRecord> = group.iter().filter(|r| r.failure.is_none()).collect();
            let errors: Vec<f64> = ok.iter().filter_map(|r| r.error()).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.time_sec).collect();
            let e6: Vec<usize> = ok.iter().filter_map(|r| r.eps_rank_1e6).collect();
            let e2: Vec<usize> = ok.iter().filter_map(|r| r.eps_rank_1e2).collect();
            let first = group[0];
            CellSummary {
                method: first.method,
                kind: first.kind,
                n: first.n,
                r: first.r,
                beta: first.beta,
                sigma: first.sigma,
                trials: group.len(),
                failures: group
                    .iter()
                    .filter_map(|r| r.failure.as_ref().map(|f| format!("trial {}: {f}", r.trial)))
                    .collect(),
                avg_error: mean(&errors),
                max_error: max_f(&errors),
                avg_time: mean(&times),
                max_time: max_f(&times),
                median_eps_rank_1e6: median(&e6),
                max_eps_rank_1e6: e6.iter().copied().max(),
                median_eps_rank_1e2: median(&e2),
                max_eps_rank_1e2: e2.iter().copied().max(),
            }
        })
        .collect()
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record([
            "method", "kind", "n", "r", "beta", "sigma", "trial", "seed", "rel_error_fro",
            "rel_error_spec", "sin_theta_fro", "time_sec", "eps_rank_1e6", "eps_rank_1e2",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    Ok(rd.deserialize().collect::<std::result::Result<_, _>>()?)
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| x.to_string())
}

fn fmt_sci(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.3e}"))
}

type RowFn = Box<dyn Fn(&CellSummary) -> String>;

/// Markdown tables in the layout of the published experiment tables: one
/// table per `(kind, β, σ)` group, one block of rows per method, one column
/// per `(n, r)`.
pub fn to_markdown(report: &BenchReport) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Benchmark results\n");
    let _ = writeln!(md, "RNG: {RNG_DESCRIPTION}.");
    if let Some(seed) = report.master_seed {
        let _ = writeln!(md, "Master seed: {seed}.");
    }
    let _ = writeln!(md);
    if report.cells.is_empty() {
        let _ = writeln!(md, "No cells were run.");
        return md;
    }

    let mut groups: Vec<(ProblemKind, u64, u64)> = Vec::new();
    for c in &report.cells {
        let g = (c.kind, c.beta.to_bits(), c.sigma.to_bits());
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    for g in groups {
        let cells: Vec<&CellSummary> = report
            .cells
            .iter()
            .filter(|c| (c.kind, c.beta.to_bits(), c.sigma.to_bits()) == g)
            .collect();
        let first = cells[0];
        let mut cols: Vec<(usize, usize)> = Vec::new();
        for c in &cells {
            if !cols.contains(&(c.n, c.r)) {
                cols.push((c.n, c.r));
            }
        }
        let _ = writeln!(md, "## {} problems, β = {}, σ = {}\n", first.kind, first.beta, first.sigma);
        let header: Vec<String> = cols.iter().map(|(n, r)| format!("(n,r) = ({n},{r})")).collect();
        let _ = writeln!(md, "| | {} |", header.join(" | "));
        let _ = writeln!(md, "|---|{}", "---|".repeat(cols.len()));

        let mut methods: Vec<Method> = cells.iter().map(|c| c.method).collect();
        methods.dedup();
        for method in methods {
            let at = |n: usize, r: usize| cells.iter().find(|c| c.method == method && c.n == n && c.r == r);
            let _ = writeln!(md, "| **{method}** |{}", " |".repeat(cols.len()));
            let error_label = if first.kind == ProblemKind::Subspace { "sin-theta error" } else { "error" };
            let mut rows: Vec<(String, RowFn)> = vec![
                (format!("average {error_label}"), Box::new(|c| fmt_sci(c.avg_error))),
                (format!("max {error_label}"), Box::new(|c| fmt_sci(c.max_error))),
                ("average time (sec)".into(), Box::new(|c| fmt_sci(c.avg_time))),
                ("max time (sec)".into(), Box::new(|c| fmt_sci(c.max_time))),
            ];
            if first.kind != ProblemKind::Subspace {
                rows.push(("median 1e-6-rank".into(), Box::new(|c| fmt_opt(c.median_eps_rank_1e6))));
                rows.push(("max 1e-6-rank".into(), Box::new(|c| fmt_opt(c.max_eps_rank_1e6))));
                rows.push(("median 1e-2-rank".into(), Box::new(|c| fmt_opt(c.median_eps_rank_1e2))));
                rows.push(("max 1e-2-rank".into(), Box::new(|c| fmt_opt(c.max_eps_rank_1e2))));
            }
            rows.push(("failed trials".into(), Box::new(|c| c.failures.len().to_string())));
            for (label, f) in rows {
                let vals: Vec<String> =
                    cols.iter().map(|&(n, r)| at(n, r).map_or_else(|| "-".into(), |c| f(c))).collect();
                let _ = writeln!(md, "| {label} | {} |", vals.join(" | "));
            }
        }
        let _ = writeln!(md);
        for c in cells.iter().filter(|c| !c.failures.is_empty()) {
            let _ = writeln!(md, "Failures for {} at (n,r) = ({},{}):\n", c.method, c.n, c.r);
            for f in &c.failures {
                let _ = writeln!(md, "- {f}");
            }
            let _ = writeln!(md);
        }
    }
    md
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_experiment_layouts() {
        let t1 = preset("table1", 10, 0).unwrap();
        let cols: Vec<_> = t1.specs.iter().map(|s| (s.n, s.r)).collect();
        assert_eq!(cols, [(200, 20), (500, 50), (1000, 100)]);
        assert!(t1.specs.iter().all(|s| s.beta == 4.0 && s.sigma == 0.1 && s.trials == 10));
        let t2 = preset("table2", 10, 0).unwrap();
        let cols: Vec<_> = t2.specs.iter().map(|s| (s.n, s.r)).collect();
        assert_eq!(cols, [(200, 40), (500, 100), (1000, 200)]);
        assert!(t2.specs.iter().all(|s| s.beta == 2.0 && s.sigma == 1.0));
        for name in ["table1", "table2", "scaling-toeplitz", "scaling-subspace"] {
            assert!(preset(name, 1, 0).unwrap().specs.iter().all(|s| s.validate().is_ok()));
        }
        assert!(preset("table3", 1, 0).is_err());
    }

    #[test]
    fn empty_bench() {
        let rep = run_bench(&[], &[Method::GradientMusic], &TrialConfig::default(), Parallelism::Sequential)
            .unwrap();
        assert!(rep.records.is_empty() && rep.cells.is_empty());
        assert!(to_markdown(&rep).contains("No cells"));
        let mut buf = Vec::new();
        write_csv(&rep.records, &mut buf).unwrap();
        assert!(read_csv(buf.as_slice()).unwrap().is_empty());
    }

    #[test]
    fn csv_round_trip_and_header() {
        let spec = ProblemSpec { n: 40, r: 2, beta: 4.0, sigma: 0.1, trials: 2, master_seed: 1, kind: ProblemKind::Toeplitz };
        let sub = ProblemSpec { n: 64, r: 2, beta: 8.0, kind: ProblemKind::Subspace, ..spec };
        let rep = run_bench(&[spec, sub], &[Method::GradientMusic, Method::AltProj], &TrialConfig::default(), Parallelism::Sequential)
            .unwrap();
        assert_eq!(rep.records.len(), 6);
        assert_eq!(rep.cells.len(), 3);
        let mut buf = Vec::new();
        write_csv(&rep.records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "method,kind,n,r,beta,sigma,trial,seed,rel_error_fro,rel_error_spec,sin_theta_fro,time_sec,eps_rank_1e6,eps_rank_1e2"
        );
        let mut expected = rep.records.clone();
        for r in &mut expected {
            r.failure = None;
        }
        assert_eq!(read_csv(buf.as_slice()).unwrap(), expected);
        let md = to_markdown(&rep);
        assert!(md.contains("median 1e-6-rank") && md.contains("(n,r) = (40,2)"));
    }

    #[test]
    fn median_of_counts() {
        assert_eq!(median(&[3, 1, 2]), Some(2.0));
        assert_eq!(median(&[55, 56, 1, 100]), Some(55.5));
        assert_eq!(median(&[]), None);
    }
}
