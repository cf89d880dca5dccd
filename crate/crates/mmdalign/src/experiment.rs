//! End-to-end experiments: the two-component mixture benchmark, the
//! mirrored-blob anti-alignment scenario and the binary-task embedding grid.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use mmdalign_core::{
    evaluate, select_by_labeled_error, select_by_mmd, train_logistic, AdaptationResult, Dataset, DomainPair,
    KernelConfig, LinearClassifier, OptimizerConfig, RankTolerance, RestartRun, StopReason, TrainConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::generate::{
    labeled_subset, make_affine_domain, mirrored_blobs, permutation, simulate_shared_space, MixtureSpec,
};
use crate::io::{write_report, write_sweep_csv};
use crate::report::{ExperimentReport, RestartSummary, ScenarioResult, TaskResult, TaskStatus};
use crate::sweep::{angle_sweep, global_minimum, local_minima, SweepRow, DEFAULT_GRID};

/// Independent stream `stream` of a master seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Kernel, optimizer, restart and classifier settings shared by all runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignSettings {
    pub sigma_sq: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub f_tol: f64,
    pub backtracking: bool,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub sufficient_decrease: f64,
    pub restarts: usize,
    pub labeled_fraction: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for AlignSettings {
    fn default() -> Self {
        let o = OptimizerConfig::default();
        let t = TrainConfig::default();
        AlignSettings {
            sigma_sq: KernelConfig::default().sigma_sq(),
            tau: o.tau,
            max_iters: o.max_iters,
            f_tol: o.f_tol,
            backtracking: o.backtracking,
            backtrack_factor: o.backtrack_factor,
            max_backtracks: o.max_backtracks,
            sufficient_decrease: o.sufficient_decrease,
            restarts: 10,
            labeled_fraction: 0.1,
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            l2: t.l2,
        }
    }
}

impl AlignSettings {
    pub fn kernel(&self) -> Result<KernelConfig> {
        Ok(KernelConfig::new(self.sigma_sq)?)
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig> {
        let o = OptimizerConfig {
            tau: self.tau,
            max_iters: self.max_iters,
            f_tol: self.f_tol,
            backtracking: self.backtracking,
            backtrack_factor: self.backtrack_factor,
            max_backtracks: self.max_backtracks,
            sufficient_decrease: self.sufficient_decrease,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn train(&self) -> Result<TrainConfig> {
        let t = TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel()?;
        self.optimizer()?;
        self.train()?;
        if self.restarts < 1 {
            return Err(AppError::Usage("restarts must be at least 1".into()));
        }
        if !(self.labeled_fraction > 0.0 && self.labeled_fraction <= 1.0) {
            return Err(AppError::Usage("labeled fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::MaxIterations => "max_iterations",
        StopReason::ObjectiveTolerance => "objective_tolerance",
        StopReason::Stationary => "stationary",
        StopReason::BacktrackingExhausted => "backtracking_exhausted",
    }
}

/// Multi-restart alignment of one domain pair with both selection rules.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub p: usize,
    /// Trained on the whitened source; `None` when the source is unlabeled.
    pub classifier: Option<LinearClassifier>,
    /// Classifier accuracy on the whitened, unrotated target.
    pub whitening_accuracy: Option<f64>,
    /// MMD² between the whitened domains before any rotation.
    pub mmd_unaligned: f64,
    pub runs: Vec<RestartRun>,
    pub restarts: Vec<RestartSummary>,
    pub unsupervised: usize,
    pub semisupervised: Option<usize>,
}

impl PairOutcome {
    pub fn result(&self, index: usize) -> &AdaptationResult {
        self.runs[index]
            .result
            .as_ref()
            .expect("selected restarts succeeded")
    }

    pub fn accuracy(&self, index: usize) -> Option<f64> {
        self.restarts[index].target_accuracy
    }

    fn scenario(&self, name: &str, index: usize, with_restarts: bool) -> ScenarioResult {
        let r = self.result(index);
        ScenarioResult {
            name: name.into(),
            accuracy: self.accuracy(index),
            mmd_before: Some(r.mmd_before),
            mmd_after: Some(r.mmd_after),
            selected_restart: Some(index),
            restarts: if with_restarts { self.restarts.clone() } else { Vec::new() },
        }
    }
}

/// Whitens both domains to a shared `p`, aligns from every restart seed and
/// selects by MMD and, when `labeled_b` is given, by labeled-target error.
/// Target labels in `x_b` are only used for reporting accuracy.
pub fn align_pair(
    x_a: &Dataset,
    x_b: &Dataset,
    labeled_b: Option<&Dataset>,
    p: usize,
    settings: &AlignSettings,
    seed: u64,
) -> Result<PairOutcome> {
    settings.validate()?;
    let kcfg = settings.kernel()?;
    let ocfg = settings.optimizer()?;
    let mut pair = DomainPair::fit(x_a, x_b, p, RankTolerance::default())?;
    let classifier = match x_a.labels() {
        Some(_) => Some(train_logistic(pair.z_a(), &settings.train()?)?),
        None => None,
    };
    let has_target_labels = x_b.labels().is_some();
    let whitening_accuracy = match &classifier {
        Some(c) if has_target_labels => Some(evaluate(c, pair.z_b_prime())?),
        _ => None,
    };
    let eye = nalgebra::DMatrix::identity(pair.p(), pair.p());
    let mmd_unaligned = pair.objective(&kcfg)?.value(&eye)?;
    let runs = pair.align_restarts(&kcfg, &ocfg, settings.restarts, seed)?;
    let unsupervised = select_by_mmd(&runs)?;
    let mut restarts = Vec::with_capacity(runs.len());
    for run in &runs {
        let mut s = RestartSummary {
            index: run.index,
            seed: run.seed,
            mmd_before: None,
            mmd_after: None,
            iterations: None,
            stop: None,
            labeled_error: None,
            target_accuracy: None,
            error: None,
        };
        match &run.result {
            Ok(res) => {
                s.mmd_before = Some(res.mmd_before);
                s.mmd_after = Some(res.mmd_after);
                s.iterations = Some(res.trace.iterations.len() - 1);
                s.stop = Some(stop_name(res.trace.stop).into());
                if let (Some(c), true) = (&classifier, has_target_labels) {
                    s.target_accuracy = Some(evaluate(c, &res.z_b)?);
                }
            }
            Err(e) => s.error = Some(e.to_string()),
        }
        restarts.push(s);
    }
    let semisupervised = match (labeled_b, &classifier) {
        (Some(lb), Some(c)) => {
            let (selected, records) = select_by_labeled_error(&runs, c, lb)?;
            for rec in records {
                if let Ok(m) = rec.outcome {
                    restarts[rec.index].labeled_error = Some(m.labeled_error);
                }
            }
            Some(selected)
        }
        _ => None,
    };
    Ok(PairOutcome {
        p: pair.p(),
        classifier,
        whitening_accuracy,
        mmd_unaligned,
        runs,
        restarts,
        unsupervised,
        semisupervised,
    })
}

/// Raw-feature classifier trained on the source and scored on the target.
pub fn baseline_accuracy(x_a: &Dataset, x_b: &Dataset, settings: &AlignSettings) -> Result<f64> {
    let clf = train_logistic(x_a, &settings.train()?)?;
    Ok(evaluate(&clf, x_b)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub n: usize,
    pub n_source: usize,
    pub obs_dim: usize,
    pub p: usize,
    pub grid: usize,
    pub align: AlignSettings,
}

impl SimConfig {
    pub fn new(seed: u64) -> Self {
        SimConfig {
            seed,
            n: 600,
            n_source: 300,
            obs_dim: 5,
            p: 2,
            grid: DEFAULT_GRID,
            align: AlignSettings::default(),
        }
    }
}

/// Seeds of the mixture benchmark, all derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSeeds {
    pub data: u64,
    pub split: u64,
    pub map_source: u64,
    pub map_target: u64,
    pub restarts: u64,
    pub labeled: u64,
}

impl SimSeeds {
    pub fn from_master(seed: u64) -> Self {
        SimSeeds {
            data: derive_seed(seed, 0),
            split: derive_seed(seed, 1),
            map_source: derive_seed(seed, 2),
            map_target: derive_seed(seed, 3),
            restarts: derive_seed(seed, 4),
            labeled: derive_seed(seed, 5),
        }
    }
}

/// Everything the mixture benchmark produces, before it is written out.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub report: ExperimentReport,
    pub sweep: Vec<SweepRow>,
    pub pair: PairOutcome,
    pub latent_source: Dataset,
    pub latent_target: Dataset,
    pub x_source: Dataset,
    pub x_target: Dataset,
}

/// Latent mixture sample, split, and the two observed domains.
pub fn simulate_domains(cfg: &SimConfig) -> Result<(Dataset, Dataset, Dataset, Dataset)> {
    let seeds = SimSeeds::from_master(cfg.seed);
    if cfg.n_source == 0 || cfg.n_source >= cfg.n {
        return Err(AppError::Usage("source size must lie strictly between 0 and n".into()));
    }
    let z = simulate_shared_space(&MixtureSpec::two_component_benchmark(cfg.n, seeds.data))?;
    let perm = permutation(cfg.n, seeds.split);
    let z_a = z.select_rows(&perm[..cfg.n_source])?;
    let z_b = z.select_rows(&perm[cfg.n_source..])?;
    let (x_a, _) = make_affine_domain(&z_a, cfg.obs_dim, seeds.map_source)?;
    let (x_b, _) = make_affine_domain(&z_b, cfg.obs_dim, seeds.map_target)?;
    Ok((z_a, z_b, x_a, x_b))
}

/// Mixture benchmark: baseline, whitening only, unsupervised and
/// semi-supervised alignment, the angle sweep's global minimum and a
/// classifier trained directly on the latent sample.
pub fn simulated_experiment(cfg: &SimConfig) -> Result<SimRun> {
    let seeds = SimSeeds::from_master(cfg.seed);
    let (z_a, z_b, x_a, x_b) = simulate_domains(cfg)?;
    let s = &cfg.align;

    let labeled_idx = labeled_subset(x_b.nrows(), s.labeled_fraction, seeds.labeled);
    let labeled_b = x_b.select_rows(&labeled_idx)?;
    let pair = align_pair(&x_a, &x_b, Some(&labeled_b), cfg.p, s, seeds.restarts)?;
    let semi = pair.semisupervised.expect("source and labeled target are present");
    let classifier = pair.classifier.as_ref().expect("source is labeled");

    let sweep = if pair.p == 2 {
        let base = pair.result(pair.unsupervised);
        let z_b_prime = base.model_b.project(x_b.values(), None)?;
        let z_b_prime = Dataset::with_labels(z_b_prime, x_b.labels().unwrap_or_default().to_vec())?;
        angle_sweep(&base.z_a, &z_b_prime, cfg.grid, &s.kernel()?)?
    } else {
        Vec::new()
    };

    let mut report = ExperimentReport::new("simulated", serde_json::to_value(cfg)?);
    report.seeds.insert("master".into(), cfg.seed);
    report.seeds.insert("data".into(), seeds.data);
    report.seeds.insert("split".into(), seeds.split);
    report.seeds.insert("map_source".into(), seeds.map_source);
    report.seeds.insert("map_target".into(), seeds.map_target);
    report.seeds.insert("restarts".into(), seeds.restarts);
    report.seeds.insert("labeled".into(), seeds.labeled);

    report
        .scenarios
        .push(ScenarioResult::accuracy_only("baseline", baseline_accuracy(&x_a, &x_b, s)?));
    let mut whitening = ScenarioResult::accuracy_only("whitening_only", pair.whitening_accuracy.unwrap_or(0.0));
    whitening.mmd_before = Some(pair.mmd_unaligned);
    report.scenarios.push(whitening);
    report.scenarios.push(pair.scenario("unsupervised", pair.unsupervised, true));
    report.scenarios.push(pair.scenario("semisupervised", semi, false));

    if let Some(best) = global_minimum(&sweep) {
        let base = pair.result(pair.unsupervised);
        let q = best.family.matrix(best.alpha);
        let z = base.model_b.project(x_b.values(), Some(&q))?;
        let z = Dataset::with_labels(z, x_b.labels().unwrap_or_default().to_vec())?;
        let mut sc = ScenarioResult::accuracy_only("sweep_global_minimum", evaluate(classifier, &z)?);
        sc.mmd_after = Some(best.mmd2);
        report.scenarios.push(sc);
        let minima = local_minima(&sweep);
        report.extras.insert("sweep_local_minima".into(), minima.len().into());
        report.extras.insert("sweep_minima".into(), serde_json::to_value(&minima)?);
        report.extras.insert("sweep_global_minimum".into(), serde_json::to_value(best)?);
    }

    let oracle = train_logistic(&z_a, &s.train()?)?;
    report
        .scenarios
        .push(ScenarioResult::accuracy_only("latent_oracle", evaluate(&oracle, &z_b)?));
    report.extras.insert("p".into(), pair.p.into());
    report.extras.insert("labeled_instances".into(), labeled_idx.len().into());

    Ok(SimRun {
        report,
        sweep,
        pair,
        latent_source: z_a,
        latent_target: z_b,
        x_source: x_a,
        x_target: x_b,
    })
}

/// Runs the mixture benchmark and writes `report.json` and `sweep.csv`
/// into `out_dir`. The runtime is recorded only when `timing` is set, so
/// outputs are byte-identical across reruns otherwise.
pub fn run_simulated_experiment(cfg: &SimConfig, out_dir: &Path, timing: bool) -> Result<ExperimentReport> {
    let start = Instant::now();
    let run = simulated_experiment(cfg)?;
    let mut report = run.report;
    if timing {
        report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    std::fs::create_dir_all(out_dir).map_err(|e| AppError::io(out_dir, e))?;
    write_sweep_csv(&run.sweep, &out_dir.join("sweep.csv"))?;
    write_report(&report, &out_dir.join("report.json"))?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorConfig {
    pub seed: u64,
    pub per_class: usize,
    pub separation: f64,
    pub align: AlignSettings,
}

impl MirrorConfig {
    pub fn new(seed: u64) -> Self {
        MirrorConfig {
            seed,
            per_class: 100,
            separation: 3.0,
            align: AlignSettings::default(),
        }
    }
}

/// Two domains drawn from the mirrored-blob latent distribution and mapped
/// by random square affine maps. Its MMD has an optimum with the class
/// sides swapped, which only labeled target instances can rule out.
pub fn mirror_experiment(cfg: &MirrorConfig) -> Result<(ExperimentReport, PairOutcome)> {
    let z_a = mirrored_blobs(cfg.per_class, cfg.separation, derive_seed(cfg.seed, 0))?;
    let z_b = mirrored_blobs(cfg.per_class, cfg.separation, derive_seed(cfg.seed, 1))?;
    let (x_a, _) = make_affine_domain(&z_a, 2, derive_seed(cfg.seed, 2))?;
    let (x_b, _) = make_affine_domain(&z_b, 2, derive_seed(cfg.seed, 3))?;
    let labeled_idx = labeled_subset(x_b.nrows(), cfg.align.labeled_fraction, derive_seed(cfg.seed, 5));
    let labeled_b = x_b.select_rows(&labeled_idx)?;
    let pair = align_pair(&x_a, &x_b, Some(&labeled_b), 2, &cfg.align, derive_seed(cfg.seed, 4))?;
    let mut report = ExperimentReport::new("mirror", serde_json::to_value(cfg)?);
    report.seeds.insert("master".into(), cfg.seed);
    report.scenarios.push(pair.scenario("unsupervised", pair.unsupervised, true));
    if let Some(semi) = pair.semisupervised {
        report.scenarios.push(pair.scenario("semisupervised", semi, false));
    }
    Ok((report, pair))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub seed: u64,
    pub p: usize,
    pub align: AlignSettings,
}

impl EmbedConfig {
    pub fn new(seed: u64) -> Self {
        EmbedConfig {
            seed,
            p: 5,
            align: AlignSettings::default(),
        }
    }
}

fn class_rows(ds: &Dataset, classes: [i64; 2]) -> Vec<usize> {
    let labels = ds.labels().unwrap_or_default();
    (0..labels.len()).filter(|&i| classes.contains(&labels[i])).collect()
}

fn count(ds: &Dataset, class: i64) -> usize {
    ds.labels().unwrap_or_default().iter().filter(|&&l| l == class).count()
}

fn run_task(source: &Dataset, target: &Dataset, classes: [i64; 2], cfg: &EmbedConfig, seed: u64) -> TaskResult {
    for &c in &classes {
        let (ns, nt) = (count(source, c), count(target, c));
        if ns < 2 || nt < 2 {
            return TaskResult::empty(
                classes,
                seed,
                TaskStatus::Skipped,
                Some(format!("class {c} has {ns} source and {nt} target instances")),
            );
        }
    }
    match task_inner(source, target, classes, cfg, seed) {
        Ok(t) => t,
        Err(e) => TaskResult::empty(classes, seed, TaskStatus::Failed, Some(e.to_string())),
    }
}

fn task_inner(source: &Dataset, target: &Dataset, classes: [i64; 2], cfg: &EmbedConfig, seed: u64) -> Result<TaskResult> {
    let x_a = source.select_rows(&class_rows(source, classes))?;
    let x_b = target.select_rows(&class_rows(target, classes))?;
    let labeled_idx = labeled_subset(x_b.nrows(), cfg.align.labeled_fraction, derive_seed(seed, 1));
    let labeled_b = x_b.select_rows(&labeled_idx)?;
    let baseline = baseline_accuracy(&x_a, &x_b, &cfg.align)?;
    let pair = align_pair(&x_a, &x_b, Some(&labeled_b), cfg.p, &cfg.align, derive_seed(seed, 0))?;
    let unsup = pair.accuracy(pair.unsupervised);
    let semi = pair.semisupervised.and_then(|i| pair.accuracy(i));
    let sel = pair.result(pair.unsupervised);
    Ok(TaskResult {
        classes,
        status: TaskStatus::Ok,
        reason: None,
        seed,
        n_source: x_a.nrows(),
        n_target: x_b.nrows(),
        n_labeled: labeled_idx.len(),
        p: Some(pair.p),
        baseline: Some(baseline),
        unsupervised: unsup,
        semisupervised: semi,
        delta_unsupervised: unsup.map(|a| a - baseline),
        delta_semisupervised: semi.map(|a| a - baseline),
        mmd_before: Some(sel.mmd_before),
        mmd_after: Some(sel.mmd_after),
        selected_unsupervised: Some(pair.unsupervised),
        selected_semisupervised: pair.semisupervised,
    })
}

/// Every unordered class pair becomes a binary task with baseline,
/// unsupervised and semi-supervised scenarios. Tasks run in parallel and
/// are reported in class order; tasks that cannot run are recorded as
/// skipped or failed.
pub fn embedding_experiment(source: &Dataset, target: &Dataset, cfg: &EmbedConfig) -> Result<ExperimentReport> {
    cfg.align.validate()?;
    let (Some(ls), Some(lt)) = (source.labels(), target.labels()) else {
        return Err(AppError::Data("both embedding files need a label column".into()));
    };
    let classes: Vec<i64> = ls
        .iter()
        .chain(lt)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(AppError::Data("embedding files need at least two classes".into()));
    }
    let mut pairs = Vec::new();
    for (i, &a) in classes.iter().enumerate() {
        for &b in &classes[i + 1..] {
            pairs.push([a, b]);
        }
    }
    let tasks: Vec<TaskResult> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &c)| run_task(source, target, c, cfg, derive_seed(cfg.seed, k as u64)))
        .collect();

    let mut report = ExperimentReport::new("embedding", serde_json::to_value(cfg)?);
    report.seeds.insert("master".into(), cfg.seed);
    let ok: Vec<&TaskResult> = tasks.iter().filter(|t| t.status == TaskStatus::Ok).collect();
    let improved = |f: fn(&TaskResult) -> Option<f64>| ok.iter().filter(|t| f(t).is_some_and(|d| d > 0.0)).count();
    let mean = |f: fn(&TaskResult) -> Option<f64>| {
        let v: Vec<f64> = ok.iter().filter_map(|t| f(t)).collect();
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    for (name, f) in [
        ("baseline", (|t: &TaskResult| t.baseline) as fn(&TaskResult) -> Option<f64>),
        ("unsupervised", |t| t.unsupervised),
        ("semisupervised", |t| t.semisupervised),
    ] {
        report.scenarios.push(ScenarioResult {
            name: name.into(),
            accuracy: mean(f),
            mmd_before: None,
            mmd_after: None,
            selected_restart: None,
            restarts: Vec::new(),
        });
    }
    report.extras.insert("tasks_total".into(), tasks.len().into());
    report.extras.insert("tasks_ok".into(), ok.len().into());
    report
        .extras
        .insert("improved_unsupervised".into(), improved(|t| t.delta_unsupervised).into());
    report
        .extras
        .insert("improved_semisupervised".into(), improved(|t| t.delta_semisupervised).into());
    report.tasks = tasks;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_distinct() {
        let s = SimSeeds::from_master(42);
        let all = [s.data, s.split, s.map_source, s.map_target, s.restarts, s.labeled];
        let set: BTreeSet<u64> = all.iter().copied().collect();
        assert_eq!(set.len(), all.len());
        assert_eq!(derive_seed(1, 2), derive_seed(1, 2));
    }

    #[test]
    fn settings_validation() {
        assert!(AlignSettings::default().validate().is_ok());
        let bad = AlignSettings { restarts: 0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(AppError::Usage(_))));
        let bad = AlignSettings { sigma_sq: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn identical_domains_need_no_correction() {
        let z = simulate_shared_space(&MixtureSpec::two_component_benchmark(120, 3)).unwrap();
        let (x, _) = make_affine_domain(&z, 3, 4).unwrap();
        let settings = AlignSettings { restarts: 2, max_iters: 50, ..Default::default() };
        let pair = align_pair(&x, &x, None, 2, &settings, 1).unwrap();
        assert_eq!(pair.unsupervised, 0);
        assert!(pair.result(0).mmd_after < 1e-12);
        let q = pair.result(0).q_b.as_matrix();
        assert!((q - nalgebra::DMatrix::identity(2, 2)).amax() < 1e-6);
    }

    #[test]
    fn unlabeled_tasks_are_rejected() {
        let x = Dataset::new(nalgebra::DMatrix::zeros(4, 2)).unwrap();
        assert!(embedding_experiment(&x, &x, &EmbedConfig::new(0)).is_err());
    }

    #[test]
    fn small_classes_are_skipped() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 7919) % 101) as f64 / 10.0).collect();
        let mut labels = vec![0; 10];
        labels.extend(vec![1; 9]);
        labels.push(2);
        let ds = Dataset::with_labels(nalgebra::DMatrix::from_row_slice(20, 2, &v), labels).unwrap();
        let cfg = EmbedConfig {
            p: 2,
            align: AlignSettings { restarts: 1, max_iters: 5, epochs: 20, ..Default::default() },
            ..EmbedConfig::new(0)
        };
        let r = embedding_experiment(&ds, &ds, &cfg).unwrap();
        assert_eq!(r.tasks.len(), 3);
        assert_eq!(r.tasks[0].status, TaskStatus::Ok);
        assert_eq!(r.tasks[1].status, TaskStatus::Skipped);
        assert_eq!(r.tasks[2].status, TaskStatus::Skipped);
    }
}
