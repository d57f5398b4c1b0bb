//! Experiment drivers: the synthetic simulation study and the CSV-dataset
//! splitting protocol. Replications and splits run in parallel; each draws
//! from its own random stream of the root seed, so results are reproducible
//! and order-independent.

use rayon::prelude::*;
use survcp_core::conformal::calibrate;
use survcp_core::data::{split_dataset, Interval, Prediction, SplitIndices};
use survcp_core::estimators::{
    fit_cox, fit_logistic, fit_weibull_aft, CoxModel, SurvivalModel, WeibullAftModel,
};
use survcp_core::metrics::{evaluate_censored, evaluate_synthetic, ExperimentReport};
use survcp_core::rng::{Seed, StreamRng};
use survcp_core::scp::{default_time_grid, scp_calibrate, scp_predict};
use survcp_core::synth::{calibrate_t0, generate, SyntheticSample};
use survcp_core::SurvivalDataset;

use crate::config::{ModelKind, RunConfig, SimulateConfig};
use crate::DataError;

/// Stream index reserved for the censoring-parameter search (replication
/// streams are small multiples of the replication index).
const T0_STREAM: u64 = u64::MAX;

/// Either fitted conditional-CDF model, behind one dispatchable type.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Cox(CoxModel),
    Weibull(WeibullAftModel),
}

impl SurvivalModel for FittedModel {
    fn cdf(&self, x: &[f64], t: f64) -> f64 {
        match self {
            FittedModel::Cox(m) => m.cdf(x, t),
            FittedModel::Weibull(m) => m.cdf(x, t),
        }
    }
    fn inverse_cdf(&self, x: &[f64], u: f64) -> f64 {
        match self {
            FittedModel::Cox(m) => m.inverse_cdf(x, u),
            FittedModel::Weibull(m) => m.inverse_cdf(x, u),
        }
    }
}

pub fn fit_model(
    kind: ModelKind,
    data: &SurvivalDataset,
    rows: &[usize],
) -> survcp_core::Result<FittedModel> {
    match kind {
        ModelKind::Cox => fit_cox(data, rows, 0.0).map(FittedModel::Cox),
        ModelKind::WeibullAft => fit_weibull_aft(data, rows).map(FittedModel::Weibull),
    }
}

/// One replication of the synthetic study, evaluated against the latent
/// survival times and the censored-data coverage envelope.
#[derive(Debug, Clone)]
pub struct SimRep {
    pub metrics: ExperimentReport,
    /// Fraction of test points whose latent time lies in the emitted set.
    pub true_coverage: f64,
    pub censored_total: usize,
    /// Censored test points placed in the two-sided group.
    pub censored_classified: usize,
    pub event_total: usize,
    /// Event test points whose latent time falls outside the two-sided
    /// interval (evaluated on every event row, regardless of classification).
    pub event_outside_c1: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub t0: f64,
    pub twosided: Option<Vec<SimRep>>,
    pub scp: Option<Vec<SimRep>>,
}

/// Censoring parameter achieving the configured censoring rate, resolved on
/// a stream reserved away from the replication streams.
pub fn resolve_t0(cfg: &SimulateConfig) -> anyhow::Result<f64> {
    Ok(calibrate_t0(
        cfg.censoring_rate,
        Seed::new(cfg.seed).with_stream(T0_STREAM),
    )?)
}

pub fn run_simulation(cfg: &SimulateConfig) -> anyhow::Result<SimulationOutput> {
    cfg.validate()?;
    let t0 = resolve_t0(cfg)?;
    let reps: Vec<(Option<SimRep>, Option<SimRep>)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| simulate_rep(cfg, t0, rep))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let (two, scp): (Vec<_>, Vec<_>) = reps.into_iter().unzip();
    Ok(SimulationOutput {
        t0,
        twosided: cfg.method.includes_twosided().then(|| two.into_iter().flatten().collect()),
        scp: cfg.method.includes_scp().then(|| scp.into_iter().flatten().collect()),
    })
}

/// One replication: fresh training and test samples, a train/calibration
/// split, one survival-model fit shared by every method (so method contrasts
/// are paired), then per-method calibration and prediction.
fn simulate_rep(
    cfg: &SimulateConfig,
    t0: f64,
    rep: usize,
) -> anyhow::Result<(Option<SimRep>, Option<SimRep>)> {
    let base = Seed::new(cfg.seed);
    let r = rep as u64;
    let sample = generate(cfg.n, t0, base.with_stream(4 * r))?;
    let test = generate(cfg.n_test, t0, base.with_stream(4 * r + 1))?;
    let split = split_dataset(&sample.dataset, cfg.train_fraction, base.with_stream(4 * r + 2))?;
    let model = fit_model(cfg.model, &sample.dataset, &split.train)?;

    let two = if cfg.method.includes_twosided() {
        let clf = fit_logistic(&sample.dataset, &split.train, sample.dataset.event())?;
        let pred = calibrate(&sample.dataset, &split, &model, &clf, cfg.alpha, cfg.alpha_split)?;
        let preds: Vec<Prediction> = (0..test.dataset.n())
            .map(|i| pred.predict(test.dataset.row(i)))
            .collect();
        let klass: Vec<bool> = preds.iter().map(|p| p.event_class()).collect();
        Some(summarize_rep(
            &preds,
            &klass,
            &test,
            |x| pred.two_sided_interval(x),
            pred.warnings.clone(),
        ))
    } else {
        None
    };

    let scp = if cfg.method.includes_scp() {
        let cal = scp_calibrate(&sample.dataset, &split, &model, cfg.alpha)?;
        let grid = default_time_grid(&sample.dataset, &split.train);
        let preds: Vec<Prediction> = (0..test.dataset.n())
            .map(|i| Prediction::TwoSided(scp_predict(&cal, &model, test.dataset.row(i), &grid)))
            .collect();
        // no classification step: the finite-upper indicator defines groups
        let klass: Vec<bool> = preds.iter().map(|p| p.has_finite_upper()).collect();
        Some(summarize_rep(
            &preds,
            &klass,
            &test,
            |x| scp_predict(&cal, &model, x, &grid),
            Vec::new(),
        ))
    } else {
        None
    };

    Ok((two, scp))
}

fn summarize_rep(
    preds: &[Prediction],
    klass: &[bool],
    test: &SyntheticSample,
    two_sided_set: impl Fn(&[f64]) -> Interval,
    warnings: Vec<String>,
) -> SimRep {
    let n = preds.len();
    let mut metrics = evaluate_synthetic(preds, &test.true_time);
    let observed: Vec<(f64, bool)> = (0..n)
        .map(|i| (test.dataset.time()[i], test.dataset.event()[i]))
        .collect();
    let (lo, up) = evaluate_censored(preds, &observed, klass);
    metrics.cov_lo = Some(lo);
    metrics.cov_up = Some(up);

    let miscovered = preds
        .iter()
        .zip(&test.true_time)
        .filter(|(p, &t)| !p.contains(t))
        .count();
    let mut censored_total = 0;
    let mut censored_classified = 0;
    let mut event_total = 0;
    let mut event_outside_c1 = 0;
    for i in 0..n {
        if test.dataset.event()[i] {
            event_total += 1;
            if !two_sided_set(test.dataset.row(i)).contains(test.true_time[i]) {
                event_outside_c1 += 1;
            }
        } else {
            censored_total += 1;
            if klass[i] {
                censored_classified += 1;
            }
        }
    }
    SimRep {
        metrics,
        true_coverage: 1.0 - miscovered as f64 / n as f64,
        censored_total,
        censored_classified,
        event_total,
        event_outside_c1,
        warnings,
    }
}

/// Per-subject prediction emitted by the dataset runner.
#[derive(Debug, Clone, Copy)]
pub struct PredictionRow {
    /// Row index in the input file.
    pub id: usize,
    pub lower: f64,
    pub upper: f64,
    pub event_class: bool,
}

/// One train/calibration/test split of a CSV dataset, evaluated with the
/// censored coverage envelope.
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub split: usize,
    pub n_test: usize,
    pub two_sided_proportion: f64,
    pub cov_lo: f64,
    pub cov_up: f64,
    pub predictions: Vec<PredictionRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub twosided: Option<Vec<SplitOutcome>>,
    pub scp: Option<Vec<SplitOutcome>>,
}

pub fn run_splits(cfg: &RunConfig, data: &SurvivalDataset) -> anyhow::Result<RunOutput> {
    cfg.validate()?;
    let n = data.n();
    let n_train = ((cfg.ratios[0] * n as f64).round() as usize).max(2);
    let n_cal = ((cfg.ratios[1] * n as f64).round() as usize).max(2);
    if n_train + n_cal + 1 > n {
        return Err(DataError(format!(
            "dataset too small: {n} rows cannot hold a {}/{} train/calibration split \
             plus at least one test row",
            n_train, n_cal
        ))
        .into());
    }

    let outcomes: Vec<(Option<SplitOutcome>, Option<SplitOutcome>)> = (0..cfg.splits)
        .into_par_iter()
        .map(|s| run_one_split(cfg, data, s, n_train, n_cal))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let (two, scp): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    Ok(RunOutput {
        twosided: cfg.method.includes_twosided().then(|| two.into_iter().flatten().collect()),
        scp: cfg.method.includes_scp().then(|| scp.into_iter().flatten().collect()),
    })
}

fn run_one_split(
    cfg: &RunConfig,
    data: &SurvivalDataset,
    s: usize,
    n_train: usize,
    n_cal: usize,
) -> anyhow::Result<(Option<SplitOutcome>, Option<SplitOutcome>)> {
    let n = data.n();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = StreamRng::new(Seed::new(cfg.seed).with_stream(s as u64));
    rng.shuffle(&mut order);

    let mut train = order[..n_train].to_vec();
    let mut cal = order[n_train..n_train + n_cal].to_vec();
    let mut test = order[n_train + n_cal..].to_vec();
    train.sort_unstable();
    cal.sort_unstable();
    test.sort_unstable();
    let cal0: Vec<usize> = cal.iter().copied().filter(|&i| !data.event()[i]).collect();
    let cal1: Vec<usize> = cal.iter().copied().filter(|&i| data.event()[i]).collect();
    let split = SplitIndices { train: train.clone(), cal, cal0, cal1 };

    let model = fit_model(cfg.model, data, &split.train)?;
    let observed: Vec<(f64, bool)> =
        test.iter().map(|&i| (data.time()[i], data.event()[i])).collect();

    let two = if cfg.method.includes_twosided() {
        let clf = fit_logistic(data, &split.train, data.event())?;
        let pred = calibrate(data, &split, &model, &clf, cfg.alpha, cfg.alpha_split)?;
        let preds: Vec<Prediction> =
            test.iter().map(|&i| pred.predict(data.row(i))).collect();
        let klass: Vec<bool> = preds.iter().map(|p| p.event_class()).collect();
        Some(split_outcome(s, &test, &preds, &klass, &observed, pred.warnings.clone()))
    } else {
        None
    };

    let scp = if cfg.method.includes_scp() {
        let cal = scp_calibrate(data, &split, &model, cfg.alpha)?;
        let grid = default_time_grid(data, &split.train);
        let preds: Vec<Prediction> = test
            .iter()
            .map(|&i| Prediction::TwoSided(scp_predict(&cal, &model, data.row(i), &grid)))
            .collect();
        let klass: Vec<bool> = preds.iter().map(|p| p.has_finite_upper()).collect();
        Some(split_outcome(s, &test, &preds, &klass, &observed, Vec::new()))
    } else {
        None
    };

    Ok((two, scp))
}

fn split_outcome(
    s: usize,
    test: &[usize],
    preds: &[Prediction],
    klass: &[bool],
    observed: &[(f64, bool)],
    warnings: Vec<String>,
) -> SplitOutcome {
    let (cov_lo, cov_up) = evaluate_censored(preds, observed, klass);
    let n_two = preds.iter().filter(|p| p.has_finite_upper()).count();
    let predictions = test
        .iter()
        .zip(preds)
        .zip(klass)
        .map(|((&id, p), &k)| PredictionRow {
            id,
            lower: p.lower(),
            upper: p.upper(),
            event_class: k,
        })
        .collect();
    SplitOutcome {
        split: s,
        n_test: preds.len(),
        two_sided_proportion: n_two as f64 / preds.len() as f64,
        cov_lo,
        cov_up,
        predictions,
        warnings,
    }
}
