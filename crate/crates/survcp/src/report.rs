//! Report files: a structured JSON report embedding everything needed to
//! reproduce a run byte-identically (config, resolved parameters, seeds,
//! score and quantile conventions), a flat CSV summary table, and a
//! per-subject prediction CSV for dataset runs.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use survcp_core::metrics::summarize;

use crate::config::{RunConfig, SimulateConfig};
use crate::csvio::format_upper;
use crate::experiment::{SimRep, SimulationOutput, SplitOutcome};

/// The fixed conventions behind every number in a report; recorded so a
/// reimplementation can match results exactly.
#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub classifier_score: &'static str,
    pub cdf_score: &'static str,
    pub one_sided_score: &'static str,
    pub quantile_rank: &'static str,
    pub p_value: &'static str,
    pub rng: &'static str,
    pub normal_sampler: &'static str,
}

pub fn conventions() -> Conventions {
    Conventions {
        classifier_score: "estimated P(event=1 | x); classify event when score >= q_delta",
        cdf_score: "|1/2 - F(t|x)|, larger is less conforming",
        one_sided_score: "1/2 - F(t|x)",
        quantile_rank: "k-th smallest with k = ceil((1-alpha)(m+1)); +inf when k > m",
        p_value: "(1 + #{calibration scores >= test score}) / (1 + m)",
        rng: "ChaCha20, one stream per replication/split of the root seed",
        normal_sampler: "Box-Muller over 53-bit uniforms",
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
    /// Number of replications contributing (groups can be empty in some).
    pub n: usize,
}

fn metric_summary(values: impl IntoIterator<Item = Option<f64>>) -> Option<MetricSummary> {
    let vals: Vec<Option<f64>> = values.into_iter().collect();
    let n = vals.iter().flatten().count();
    summarize(vals).map(|(mean, sd)| MetricSummary { mean, sd, n })
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub replications: usize,
    pub two_sided_proportion: MetricSummary,
    pub coverage_one_sided: Option<MetricSummary>,
    pub coverage_two_sided: Option<MetricSummary>,
    pub avg_lpb_one_sided: Option<MetricSummary>,
    pub avg_length_two_sided: Option<MetricSummary>,
    pub cov_lo: Option<MetricSummary>,
    pub cov_up: Option<MetricSummary>,
    /// Coverage of the latent survival time by the emitted set.
    pub true_coverage: MetricSummary,
    /// Pooled over replications: censored test points in the two-sided group.
    pub censored_classified_rate: f64,
    /// Pooled: event test points outside the two-sided interval.
    pub event_outside_two_sided_rate: f64,
    pub replications_with_warnings: usize,
}

pub fn method_summary(name: &str, reps: &[SimRep]) -> MethodSummary {
    let m = |f: &dyn Fn(&SimRep) -> Option<f64>| metric_summary(reps.iter().map(f));
    let pooled = |num: &dyn Fn(&SimRep) -> usize, den: &dyn Fn(&SimRep) -> usize| {
        let d: usize = reps.iter().map(den).sum();
        if d == 0 {
            0.0
        } else {
            reps.iter().map(num).sum::<usize>() as f64 / d as f64
        }
    };
    MethodSummary {
        method: name.to_owned(),
        replications: reps.len(),
        two_sided_proportion: m(&|r| Some(r.metrics.two_sided_proportion))
            .expect("at least one replication"),
        coverage_one_sided: m(&|r| r.metrics.coverage_one_sided),
        coverage_two_sided: m(&|r| r.metrics.coverage_two_sided),
        avg_lpb_one_sided: m(&|r| r.metrics.avg_lpb_one_sided),
        avg_length_two_sided: m(&|r| r.metrics.avg_length_two_sided),
        cov_lo: m(&|r| r.metrics.cov_lo),
        cov_up: m(&|r| r.metrics.cov_up),
        true_coverage: m(&|r| Some(r.true_coverage)).expect("at least one replication"),
        censored_classified_rate: pooled(&|r| r.censored_classified, &|r| r.censored_total),
        event_outside_two_sided_rate: pooled(&|r| r.event_outside_c1, &|r| r.event_total),
        replications_with_warnings: reps.iter().filter(|r| !r.warnings.is_empty()).count(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub config: SimulateConfig,
    pub resolved_t0: f64,
    pub conventions: Conventions,
    pub methods: Vec<MethodSummary>,
}

pub fn simulate_report(cfg: &SimulateConfig, out: &SimulationOutput) -> SimulateReport {
    let mut methods = Vec::new();
    if let Some(reps) = &out.twosided {
        methods.push(method_summary("twosided", reps));
    }
    if let Some(reps) = &out.scp {
        methods.push(method_summary("scp", reps));
    }
    SimulateReport {
        config: cfg.clone(),
        resolved_t0: out.t0,
        conventions: conventions(),
        methods,
    }
}

/// Writes `report.json` and `table.csv` into `dir`.
pub fn write_simulate_report(dir: &Path, report: &SimulateReport) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;

    let mut w = csv::Writer::from_path(dir.join("table.csv"))?;
    w.write_record([
        "method",
        "two_sided_prop_mean",
        "two_sided_prop_sd",
        "one_sided_cov_mean",
        "one_sided_cov_sd",
        "two_sided_cov_mean",
        "two_sided_cov_sd",
        "avg_lpb_mean",
        "avg_length_mean",
    ])?;
    for m in &report.methods {
        let opt = |s: &Option<MetricSummary>, f: &dyn Fn(&MetricSummary) -> f64| {
            s.as_ref().map(|v| format!("{:.4}", f(v))).unwrap_or_default()
        };
        w.write_record([
            m.method.clone(),
            format!("{:.4}", m.two_sided_proportion.mean),
            format!("{:.4}", m.two_sided_proportion.sd),
            opt(&m.coverage_one_sided, &|v| v.mean),
            opt(&m.coverage_one_sided, &|v| v.sd),
            opt(&m.coverage_two_sided, &|v| v.mean),
            opt(&m.coverage_two_sided, &|v| v.sd),
            opt(&m.avg_lpb_one_sided, &|v| v.mean),
            opt(&m.avg_length_two_sided, &|v| v.mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplitRow {
    pub split: usize,
    pub n_test: usize,
    pub two_sided_proportion: f64,
    pub cov_lo: f64,
    pub cov_up: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMethodReport {
    pub method: String,
    pub cov_lo: MetricSummary,
    pub cov_up: MetricSummary,
    pub two_sided_proportion: MetricSummary,
    pub splits: Vec<SplitRow>,
}

fn run_method_report(name: &str, outcomes: &[SplitOutcome]) -> RunMethodReport {
    let m = |f: &dyn Fn(&SplitOutcome) -> f64| {
        metric_summary(outcomes.iter().map(|o| Some(f(o)))).expect("at least one split")
    };
    RunMethodReport {
        method: name.to_owned(),
        cov_lo: m(&|o| o.cov_lo),
        cov_up: m(&|o| o.cov_up),
        two_sided_proportion: m(&|o| o.two_sided_proportion),
        splits: outcomes
            .iter()
            .map(|o| SplitRow {
                split: o.split,
                n_test: o.n_test,
                two_sided_proportion: o.two_sided_proportion,
                cov_lo: o.cov_lo,
                cov_up: o.cov_up,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub data_rows: usize,
    pub covariates: Vec<String>,
    pub conventions: Conventions,
    pub methods: Vec<RunMethodReport>,
}

pub fn run_report(
    cfg: &RunConfig,
    data_rows: usize,
    covariates: Vec<String>,
    twosided: Option<&[SplitOutcome]>,
    scp: Option<&[SplitOutcome]>,
) -> RunReport {
    let mut methods = Vec::new();
    if let Some(o) = twosided {
        methods.push(run_method_report("twosided", o));
    }
    if let Some(o) = scp {
        methods.push(run_method_report("scp", o));
    }
    RunReport {
        config: cfg.clone(),
        data_rows,
        covariates,
        conventions: conventions(),
        methods,
    }
}

/// Writes `report.json` and `predictions.csv` into `dir`.
pub fn write_run_report(
    dir: &Path,
    report: &RunReport,
    twosided: Option<&[SplitOutcome]>,
    scp: Option<&[SplitOutcome]>,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;

    let mut w = csv::Writer::from_path(dir.join("predictions.csv"))?;
    w.write_record(["method", "split", "id", "lower", "upper", "event_class"])?;
    for (name, outcomes) in [("twosided", twosided), ("scp", scp)] {
        let Some(outcomes) = outcomes else { continue };
        for o in outcomes {
            for p in &o.predictions {
                w.write_record([
                    name.to_owned(),
                    o.split.to_string(),
                    p.id.to_string(),
                    format!("{}", p.lower),
                    format_upper(p.upper),
                    if p.event_class { "1".into() } else { "0".into() },
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
}
