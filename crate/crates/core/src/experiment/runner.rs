use std::fs;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::manifest::{RunManifest, RunRecorder};
use crate::attacks::{attack_curve, curves_csv, epsilon_grid, recover_weights_exact, AttackContext, AttackCurve};
use crate::crossbar::{CrossbarInstance, QueryMode};
use crate::data::{DatasetKind, LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::model::{LinearLayerModel, Pairing, TrainConfig};
use crate::rng;
use crate::sidechannel::{
    correlation_study, extract_column_norms, heatmap_csv, sensitivity_heatmap, CorrelationReport,
};
use crate::surrogate::{power_benefit_study, PowerStudy, TransferResult};

/// Seed label for the oracle of `run` with `pairing`.
pub fn oracle_seed_label(pairing: Pairing, run: usize) -> String {
    format!("oracle/{pairing}/run{run}")
}

/// Heat-map grid for `dataset`: colour planes stacked vertically.
pub fn heatmap_layout(dataset: DatasetKind) -> (usize, usize) {
    let (_, w) = dataset.plane_shape();
    (dataset.feature_dim() / w, w)
}

/// Trains the oracles, runs the selected experiment, writes its artifacts
/// into `output_dir` and finally `manifest.json`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    if !cfg.data_dir.is_dir() {
        return Err(Error::MissingData {
            path: cfg.data_dir.clone(),
            reason: "data_dir is not a directory".into(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    pool.install(|| {
        let mut rec = RunRecorder::new(&cfg.output_dir, cfg.seed)?;
        let (train, test) = rec.time("load", |rec| load(cfg, rec))?;
        log::info!("{}: {} train / {} test samples", cfg.dataset, train.len(), test.len());
        let ctx = Ctx {
            cfg,
            train: &train,
            test: &test,
        };
        match cfg.experiment {
            ExperimentKind::Table1 => table1(&ctx, &mut rec)?,
            ExperimentKind::Fig3Heatmaps => fig3(&ctx, &mut rec)?,
            ExperimentKind::Fig4SinglePixel => fig4(&ctx, &mut rec)?,
            ExperimentKind::Fig5Surrogate => fig5(&ctx, &mut rec)?,
            ExperimentKind::RecoveryCheck => recovery(&ctx, &mut rec)?,
        }
        rec.finish(cfg)
    })
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    train: &'a LabeledDataset,
    test: &'a LabeledDataset,
}

impl Ctx<'_> {
    fn split(&self, split: Split) -> &LabeledDataset {
        match split {
            Split::Train => self.train,
            Split::Test => self.test,
        }
    }

    fn oracles(&self, rec: &mut RunRecorder, pairing: Pairing, runs: usize) -> Result<Vec<LinearLayerModel>> {
        let seeds: Vec<u64> = (0..runs).map(|r| rec.seed(&oracle_seed_label(pairing, r))).collect();
        let cfg = self.cfg;
        let train = self.train;
        if let Some(dir) = &cfg.model_dir {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        rec.time(&format!("train {pairing} x{runs}"), |_| {
            seeds
                .par_iter()
                .enumerate()
                .map(|(run, &s)| {
                    let tc = cfg.train.resolve(cfg.dataset, pairing, s);
                    let Some(dir) = &cfg.model_dir else {
                        return LinearLayerModel::fit(pairing, train, &tc);
                    };
                    let path = dir.join(model_file_name(cfg, pairing, run, &tc));
                    if path.is_file() {
                        let m = LinearLayerModel::load(&path)?;
                        if m.pairing() == pairing && m.weights().shape() == (train.num_classes(), train.feature_dim()) {
                            log::info!("loaded {}", path.display());
                            return Ok(m);
                        }
                        log::warn!("{} does not match this config; retraining", path.display());
                    }
                    let m = LinearLayerModel::fit(pairing, train, &tc)?;
                    m.save(&path)?;
                    Ok(m)
                })
                .collect()
        })
    }
}

/// Cache file for one oracle. The hash covers everything that determines
/// the trained weights.
pub fn model_file_name(cfg: &ExperimentConfig, pairing: Pairing, run: usize, tc: &TrainConfig) -> String {
    let key = format!(
        "{}|{pairing}|{}|{:?}|{}|{}|{:e}|{}",
        cfg.dataset, cfg.seed, cfg.data.train_limit, tc.epochs, tc.batch_size, tc.learning_rate, tc.seed
    );
    format!("{}_{pairing}_run{run}_{:016x}.model", cfg.dataset, rng::fnv1a64(&key))
}

fn load(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<(LabeledDataset, LabeledDataset)> {
    let (mut train, mut test) = cfg.dataset.load(&cfg.data_dir)?;
    if let Some(n) = cfg.data.train_limit.filter(|&n| n < train.len()) {
        train = train.shuffled_subset(n, rec.seed("data/train_subset"))?;
    }
    if let Some(n) = cfg.data.test_limit.filter(|&n| n < test.len()) {
        test = test.shuffled_subset(n, rec.seed("data/test_subset"))?;
    }
    Ok((train, test))
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Serialize(e.to_string()))
}

#[derive(Serialize)]
struct Table1Row<'a> {
    dataset: DatasetKind,
    pairing: Pairing,
    split: Split,
    report: &'a CorrelationReport,
}

fn table1(ctx: &Ctx<'_>, rec: &mut RunRecorder) -> Result<()> {
    let cfg = ctx.cfg;
    let mut reports = Vec::new();
    for &pairing in &cfg.table1.pairings {
        let models = ctx.oracles(rec, pairing, cfg.table1.runs)?;
        for split in [Split::Train, Split::Test] {
            let ds = ctx.split(split);
            let r = rec.time(&format!("correlation {pairing} {}", split.as_str()), |_| {
                correlation_study(&models, ds)
            })?;
            reports.push((pairing, split, r));
        }
    }
    let mut csv = String::from("dataset,pairing,split,mean_correlation,correlation_of_mean\n");
    for (pairing, split, r) in &reports {
        csv.push_str(&format!(
            "{},{pairing},{},{:.16e},{:.16e}\n",
            cfg.dataset,
            split.as_str(),
            r.mean_correlation,
            r.correlation_of_mean
        ));
    }
    rec.write(
        "table1.csv",
        &csv,
        "dataset, pairing, split, mean_correlation (mean over samples of per-sample Pearson r), correlation_of_mean (Pearson r of the mean sensitivity map); both averaged over runs",
    )?;
    let rows: Vec<Table1Row<'_>> = reports
        .iter()
        .map(|(pairing, split, report)| Table1Row {
            dataset: cfg.dataset,
            pairing: *pairing,
            split: *split,
            report,
        })
        .collect();
    rec.write("table1.json", &json(&rows)?, "per-run correlations behind table1.csv")
}

fn fig3(ctx: &Ctx<'_>, rec: &mut RunRecorder) -> Result<()> {
    let layout = heatmap_layout(ctx.cfg.dataset);
    for &pairing in &ctx.cfg.fig3.pairings {
        let model = ctx.oracles(rec, pairing, 1)?.remove(0);
        let (sens, norms) = rec.time(&format!("heatmaps {pairing}"), |_| {
            let sens = sensitivity_heatmap(&model, ctx.test)?;
            let norms = extract_column_norms(&CrossbarInstance::compile(&model)?)?.norms;
            Ok((sens, norms))
        })?;
        let grid = "row-major grid, no header; colour planes stacked vertically";
        rec.write(
            &format!("fig3_{pairing}_sensitivity.csv"),
            &heatmap_csv(&sens, layout)?,
            &format!("mean |dL/du_j| over the test set; {grid}"),
        )?;
        rec.write(
            &format!("fig3_{pairing}_norms.csv"),
            &heatmap_csv(&norms, layout)?,
            &format!("column 1-norms extracted from power readings; {grid}"),
        )?;
    }
    Ok(())
}

fn fig4(ctx: &Ctx<'_>, rec: &mut RunRecorder) -> Result<()> {
    let cfg = ctx.cfg;
    let f = &cfg.fig4;
    let models = ctx.oracles(rec, cfg.pairing, f.runs)?;
    let seeds: Vec<u64> = (0..f.runs).map(|r| rec.seed(&format!("fig4/run{r}"))).collect();
    let strengths = epsilon_grid(f.epsilon_count, f.epsilon_max);
    let test = ctx.test;

    let curves: Vec<AttackCurve> = rec.time("attacks", |_| {
        let setups: Vec<(CrossbarInstance, crate::sidechannel::ColumnNormProfile)> = models
            .iter()
            .map(|m| {
                let x = CrossbarInstance::compile(m)?;
                let p = extract_column_norms(&x)?;
                Ok((x, p))
            })
            .collect::<Result<_>>()?;
        let mut cells = Vec::new();
        for &n in &f.n_pixels {
            for &s in &f.strategies {
                for run in 0..f.runs {
                    cells.push((n, s, run));
                }
            }
        }
        cells
            .par_iter()
            .map(|&(n, s, run)| {
                let (x, p) = &setups[run];
                let actx = AttackContext::new(x)
                    .with_profile(p)
                    .with_white_box(&models[run])
                    .with_clip(f.clip);
                attack_curve(&actx, test, s, &strengths, seeds[run], run, n)
            })
            .collect()
    })?;

    for &s in &f.strategies {
        let single: Vec<AttackCurve> = curves
            .iter()
            .filter(|c| c.strategy == s && c.n_pixels == 1)
            .cloned()
            .collect();
        if !single.is_empty() {
            rec.write(
                &format!("fig4_{s}.csv"),
                &curves_csv(&single),
                "strategy, epsilon (attack strength), accuracy (oracle test accuracy), seed (attack stream), run (oracle index)",
            )?;
        }
    }
    if f.n_pixels.iter().any(|&n| n != 1) {
        let mut csv = String::from("strategy,n_pixels,epsilon,accuracy,seed,run\n");
        for c in &curves {
            for (eps, acc) in c.strengths.iter().zip(&c.accuracy) {
                csv.push_str(&format!(
                    "{},{},{eps:.16e},{acc:.16e},{},{}\n",
                    c.strategy, c.n_pixels, c.seed, c.run
                ));
            }
        }
        rec.write(
            "fig4_multipixel.csv",
            &csv,
            "strategy, n_pixels (pixels attacked per image), epsilon, accuracy, seed, run",
        )?;
    }
    Ok(())
}

fn improvement_csv(r: &TransferResult) -> String {
    let mut s = String::from("dataset,mode,q,best_lambda,delta,t,p_value,significant\n");
    for i in &r.improvements {
        s.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.dataset,
            r.mode.as_str(),
            i.q,
            i.best_lambda,
            i.delta,
            i.t,
            i.p_value,
            i.significant
        ));
    }
    s
}

fn fig5(ctx: &Ctx<'_>, rec: &mut RunRecorder) -> Result<()> {
    let cfg = ctx.cfg;
    let f = &cfg.fig5;
    let oracles = ctx.oracles(rec, Pairing::LinearMse, f.runs)?;
    let qs = f.query_grid(cfg.dataset);
    for &mode in &f.modes {
        let study = PowerStudy {
            dataset: cfg.dataset.as_str(),
            oracles: &oracles,
            train: ctx.train,
            test: ctx.test,
            mode,
            epsilon: f.epsilon,
            surrogate_train: cfg.train.resolve(cfg.dataset, Pairing::LinearMse, 0),
            clip: f.clip,
            seed: rec.seed(&format!("fig5/{}", mode.as_str())),
        };
        let result = rec.time(&format!("surrogates {}", mode.as_str()), |_| {
            power_benefit_study(&study, &f.lambdas, &qs)
        })?;
        let m = mode.as_str();
        rec.write(
            &format!("fig5_{m}.csv"),
            &result.to_csv(),
            "dataset, mode, lambda (power loss weight), q (queries), run, surrogate_acc (surrogate test accuracy), oracle_adv_acc (oracle accuracy on transferred FGSM examples)",
        )?;
        rec.write(
            &format!("fig5_{m}_improvement.csv"),
            &improvement_csv(&result),
            "dataset, mode, q, best_lambda, delta (degradation gain of best_lambda over lambda=0), t, p_value (two-sided pooled t-test), significant (p < 0.05)",
        )?;
        rec.write(
            &format!("fig5_{m}.json"),
            &result.to_json()?,
            "full TransferResult with per-run values and summaries",
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RecoveryRow {
    source: &'static str,
    queries: usize,
    relative_error: f64,
}

fn recovery(ctx: &Ctx<'_>, rec: &mut RunRecorder) -> Result<()> {
    let cfg = ctx.cfg;
    let oracle = ctx.oracles(rec, Pairing::LinearMse, 1)?.remove(0);
    let n = oracle.inputs();
    let q = cfg.recovery.queries.unwrap_or(n);
    let seed = rec.seed("recovery/queries");
    let x = CrossbarInstance::compile(&oracle)?;
    let rows = rec.time("recovery", |_| {
        use rand::Rng;
        let mut r = rng::stream(seed);
        let uniform: Vec<_> = (0..q)
            .map(|_| {
                let u: Vec<f64> = (0..n).map(|_| r.random_range(0.0..=1.0)).collect();
                x.oracle_query(&u, QueryMode::RawOutput, false)
            })
            .collect::<Result<_>>()?;
        let mut rows = vec![row("uniform", &uniform, &oracle)?];
        if q <= ctx.train.len() {
            let picked = ctx.train.shuffled_subset(q, rng::derive_seed(seed, "train"))?;
            let from_train: Vec<_> = (0..q)
                .map(|i| x.oracle_query(picked.input(i), QueryMode::RawOutput, false))
                .collect::<Result<_>>()?;
            rows.push(row("train", &from_train, &oracle)?);
        }
        Ok(rows)
    })?;
    let mut csv = String::from("source,queries,relative_error\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{:.16e}\n", r.source, r.queries, r.relative_error));
    }
    rec.write(
        "recovery.csv",
        &csv,
        "source (uniform random inputs or training images), queries, relative_error (Frobenius, recovered vs true weights)",
    )?;
    rec.write("recovery.json", &json(&rows)?, "same rows as recovery.csv")
}

fn row(
    source: &'static str,
    queries: &[crate::crossbar::QueryRecord],
    oracle: &LinearLayerModel,
) -> Result<RecoveryRow> {
    let w = recover_weights_exact(queries, oracle.inputs())?;
    let err = w.sub(oracle.weights())?.frobenius_norm() / oracle.weights().frobenius_norm();
    Ok(RecoveryRow {
        source,
        queries: queries.len(),
        relative_error: err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts() {
        assert_eq!(heatmap_layout(DatasetKind::Mnist), (28, 28));
        assert_eq!(heatmap_layout(DatasetKind::Cifar10), (96, 32));
    }

    #[test]
    fn missing_data_dir_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(ExperimentKind::Table1);
        cfg.data_dir = dir.path().join("nope");
        cfg.output_dir = dir.path().join("out");
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.category(), crate::error::ErrorCategory::Data);
        cfg.data_dir = dir.path().to_path_buf();
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.category(), crate::error::ErrorCategory::Data);
        assert!(err.to_string().contains("train-images-idx3-ubyte"), "{err}");
    }

    #[test]
    fn strategies_name_their_files() {
        let names: Vec<String> = crate::attacks::PixelAttackStrategy::ALL
            .iter()
            .map(|s| format!("fig4_{s}.csv"))
            .collect();
        assert_eq!(
            names,
            [
                "fig4_rp.csv",
                "fig4_plus.csv",
                "fig4_minus.csv",
                "fig4_rd.csv",
                "fig4_worst.csv"
            ]
        );
    }
}
