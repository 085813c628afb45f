//! Black-box transfer attack: query the oracle, fit a linear surrogate to its
//! outputs (optionally matching measured power as well), craft FGSM examples
//! on the surrogate and replay them against the oracle.

use rand::seq::index;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossbar::{CrossbarInstance, QueryMode, QueryRecord, QueryResponse};
use crate::data::{DatasetKind, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Matrix};
use crate::model::{one_hot, sign, ClipPolicy, LinearLayerModel, Pairing, TrainConfig};
use crate::rng;
use crate::stats::{mean, sample_std, two_sample_t_test};

/// Settings for one surrogate fit and the transfer attack that follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    /// Weight of the power-matching term.
    pub lambda: f64,
    pub query_count: usize,
    pub query_mode: QueryMode,
    pub train: TrainConfig,
    pub runs: usize,
    pub attack_epsilon: f64,
}

impl SurrogateConfig {
    /// Trained like a linear oracle on `dataset`, no power term.
    pub fn new(dataset: DatasetKind, query_count: usize, query_mode: QueryMode, seed: u64) -> Self {
        Self {
            lambda: 0.0,
            query_count,
            query_mode,
            train: TrainConfig::default_for(dataset, Pairing::LinearMse, seed),
            runs: 10,
            attack_epsilon: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.query_count == 0 {
            return Err(Error::InvalidArgument("query_count must be at least 1".into()));
        }
        if !(self.attack_epsilon >= 0.0 && self.attack_epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "attack_epsilon must be finite and >= 0, got {}",
                self.attack_epsilon
            )));
        }
        self.train.validate()
    }
}

/// `q` distinct training inputs drawn with `seed`, each answered per `mode`
/// together with a power reading.
pub fn collect_queries(
    oracle: &CrossbarInstance,
    ds_train: &LabeledDataset,
    q: usize,
    mode: QueryMode,
    seed: u64,
) -> Result<Vec<QueryRecord>> {
    if q > ds_train.len() {
        return Err(Error::InvalidArgument(format!(
            "query count {q} exceeds training set size {}",
            ds_train.len()
        )));
    }
    let mut r = rng::stream(seed);
    index::sample(&mut r, ds_train.len(), q)
        .into_iter()
        .map(|i| oracle.oracle_query(ds_train.input(i), mode, true))
        .collect()
}

/// Supply current the surrogate would draw if compiled to a crossbar,
/// `sum_j u_j sum_i |w_ij|`.
pub fn surrogate_power_prediction(s: &LinearLayerModel, u: &[f64]) -> f64 {
    dot(u, &s.weights().column_abs_sums())
}

fn target_of(rec: &QueryRecord, outputs: usize) -> Result<Vec<f64>> {
    match &rec.response {
        QueryResponse::Output(y) if y.len() == outputs => Ok(y.clone()),
        QueryResponse::Label(l) if *l < outputs => Ok(one_hot(*l, outputs)),
        QueryResponse::Output(y) => Err(Error::DimensionMismatch {
            op: "surrogate target",
            left: (outputs, 1),
            right: (y.len(), 1),
        }),
        QueryResponse::Label(l) => Err(Error::InvalidArgument(format!("label {l} outside {outputs} classes"))),
    }
}

fn check_queries(queries: &[QueryRecord], inputs: usize, outputs: usize, lambda: f64) -> Result<Vec<Vec<f64>>> {
    if queries.is_empty() {
        return Err(Error::Empty("surrogate queries"));
    }
    queries
        .iter()
        .map(|rec| {
            if rec.input.len() != inputs {
                return Err(Error::DimensionMismatch {
                    op: "surrogate query",
                    left: (outputs, inputs),
                    right: (rec.input.len(), 1),
                });
            }
            if lambda > 0.0 && rec.power.is_none() {
                return Err(Error::InvalidArgument(
                    "power-weighted training needs power readings".into(),
                ));
            }
            target_of(rec, outputs)
        })
        .collect()
}

/// Batch-mean composite loss and, if `grad` is given, its gradient with
/// respect to the weights (overwriting `grad`).
fn batch_objective(
    w: &Matrix,
    batch: &[usize],
    queries: &[QueryRecord],
    targets: &[Vec<f64>],
    lambda: f64,
    mut grad: Option<&mut Matrix>,
) -> f64 {
    let m = w.rows();
    let inv_b = 1.0 / batch.len() as f64;
    let out_scale = 2.0 / m as f64;
    let norms = if lambda > 0.0 { w.column_abs_sums() } else { Vec::new() };
    let mut power_coef = if lambda > 0.0 && grad.is_some() {
        vec![0.0; w.cols()]
    } else {
        Vec::new()
    };
    if let Some(g) = grad.as_deref_mut() {
        g.as_mut_slice().fill(0.0);
    }
    let mut y = vec![0.0; m];
    let mut total = 0.0;
    for &s in batch {
        let u = &queries[s].input;
        let t = &targets[s];
        w.matvec_into(u, &mut y);
        let mut l = 0.0;
        for i in 0..m {
            let r = y[i] - t[i];
            l += r * r;
            if let Some(g) = grad.as_deref_mut() {
                let c = out_scale * r * inv_b;
                if c != 0.0 {
                    axpy(c, u, g.row_mut(i));
                }
            }
        }
        l /= m as f64;
        if lambda > 0.0 {
            let p = queries[s].power.expect("checked");
            let d = dot(u, &norms) - p;
            l += lambda * d * d;
            if grad.is_some() {
                axpy(2.0 * lambda * d * inv_b, u, &mut power_coef);
            }
        }
        total += l;
    }
    if let Some(g) = grad {
        if lambda > 0.0 {
            for i in 0..m {
                let wr = w.row(i);
                for ((gij, &wij), &a) in g.row_mut(i).iter_mut().zip(wr).zip(&power_coef) {
                    *gij += a * sign(wij);
                }
            }
        }
    }
    total * inv_b
}

/// Mean over `queries` of `(1/M)||W u - y||^2 + lambda (p_hat - p)^2`.
pub fn surrogate_loss(w: &Matrix, queries: &[QueryRecord], lambda: f64) -> Result<f64> {
    let targets = check_queries(queries, w.cols(), w.rows(), lambda)?;
    let all: Vec<usize> = (0..queries.len()).collect();
    Ok(batch_objective(w, &all, queries, &targets, lambda, None))
}

/// Gradient of [`surrogate_loss`]. The power term uses `sgn(0) = 0`.
pub fn surrogate_loss_gradient(w: &Matrix, queries: &[QueryRecord], lambda: f64) -> Result<Matrix> {
    let targets = check_queries(queries, w.cols(), w.rows(), lambda)?;
    let all: Vec<usize> = (0..queries.len()).collect();
    let mut g = Matrix::zeros(w.rows(), w.cols());
    batch_objective(w, &all, queries, &targets, lambda, Some(&mut g));
    Ok(g)
}

/// Fits a linear surrogate with `outputs` outputs by mini-batch SGD on the
/// composite loss from all-zero weights. With `lambda = 0` power readings
/// are never read.
pub fn train_surrogate(queries: &[QueryRecord], outputs: usize, cfg: &SurrogateConfig) -> Result<LinearLayerModel> {
    cfg.validate()?;
    let inputs = queries.first().ok_or(Error::Empty("surrogate queries"))?.input.len();
    let targets = check_queries(queries, inputs, outputs, cfg.lambda)?;
    let tc = &cfg.train;
    let mut w = Matrix::zeros(outputs, inputs);
    let mut r = rng::stream(rng::derive_seed(tc.seed, "shuffle"));
    let mut order: Vec<usize> = (0..queries.len()).collect();
    let mut grad = Matrix::zeros(outputs, inputs);
    for epoch in 0..tc.epochs {
        order.shuffle(&mut r);
        for (b, batch) in order.chunks(tc.batch_size).enumerate() {
            let loss = batch_objective(&w, batch, queries, &targets, cfg.lambda, Some(&mut grad));
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: b, loss });
            }
            axpy(-tc.learning_rate, grad.as_slice(), w.as_mut_slice());
        }
    }
    if !w.is_finite() {
        return Err(Error::NonFinite("surrogate weights"));
    }
    LinearLayerModel::new(w, Pairing::LinearMse)
}

/// Oracle accuracy on FGSM examples crafted from the surrogate's gradients
/// with one-hot true labels.
pub fn transfer_attack_eval(
    oracle: &CrossbarInstance,
    surrogate: &LinearLayerModel,
    ds_test: &LabeledDataset,
    epsilon: f64,
    clip: ClipPolicy,
) -> Result<f64> {
    if surrogate.inputs() != oracle.inputs() || surrogate.outputs() != oracle.outputs() {
        return Err(Error::DimensionMismatch {
            op: "transfer_attack_eval",
            left: (oracle.outputs(), oracle.inputs()),
            right: surrogate.weights().shape(),
        });
    }
    if ds_test.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for i in 0..ds_test.len() {
        let label = ds_test.label(i);
        let adv = surrogate.fgsm_example(ds_test.input(i), &one_hot(label, surrogate.outputs()), epsilon, clip)?;
        let pred = match clip {
            ClipPolicy::Clip => oracle.label(&adv)?,
            ClipPolicy::Unclipped => oracle.label_unbounded(&adv),
        };
        if pred == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds_test.len() as f64)
}

/// Raw values for one (lambda, Q, run) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRun {
    pub lambda: f64,
    pub q: usize,
    pub run: usize,
    pub seed: u64,
    pub surrogate_acc: f64,
    pub oracle_clean_acc: f64,
    pub oracle_adv_acc: f64,
}

impl TransferRun {
    pub fn degradation(&self) -> f64 {
        self.oracle_clean_acc - self.oracle_adv_acc
    }
}

/// Per-(lambda, Q) means and sample standard deviations over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub lambda: f64,
    pub q: usize,
    pub surrogate_acc_mean: f64,
    pub surrogate_acc_std: f64,
    pub oracle_adv_acc_mean: f64,
    pub oracle_adv_acc_std: f64,
    pub degradation_mean: f64,
}

/// Degradation gain of the best nonzero lambda over lambda = 0 at one Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub q: usize,
    pub best_lambda: f64,
    pub delta: f64,
    pub t: f64,
    pub p_value: f64,
    pub significant: bool,
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub dataset: String,
    pub mode: QueryMode,
    pub epsilon: f64,
    pub lambdas: Vec<f64>,
    pub qs: Vec<usize>,
    pub runs: Vec<TransferRun>,
    pub cells: Vec<CellSummary>,
    pub improvements: Vec<Improvement>,
}

impl TransferResult {
    /// Rebuilds the summaries from the raw per-run values.
    pub fn from_runs(
        dataset: &str,
        mode: QueryMode,
        epsilon: f64,
        lambdas: &[f64],
        qs: &[usize],
        runs: Vec<TransferRun>,
    ) -> Result<Self> {
        let pick = |lambda: f64, q: usize| -> Vec<&TransferRun> {
            runs.iter().filter(|r| r.lambda == lambda && r.q == q).collect()
        };
        let mut cells = Vec::new();
        for &q in qs {
            for &lambda in lambdas {
                let rs = pick(lambda, q);
                let sa: Vec<f64> = rs.iter().map(|r| r.surrogate_acc).collect();
                let oa: Vec<f64> = rs.iter().map(|r| r.oracle_adv_acc).collect();
                let dg: Vec<f64> = rs.iter().map(|r| r.degradation()).collect();
                cells.push(CellSummary {
                    lambda,
                    q,
                    surrogate_acc_mean: mean(&sa),
                    surrogate_acc_std: sample_std(&sa),
                    oracle_adv_acc_mean: mean(&oa),
                    oracle_adv_acc_std: sample_std(&oa),
                    degradation_mean: mean(&dg),
                });
            }
        }
        let mut improvements = Vec::new();
        for &q in qs {
            let base: Vec<f64> = pick(0.0, q).iter().map(|r| r.degradation()).collect();
            let best = cells
                .iter()
                .filter(|c| c.q == q && c.lambda != 0.0)
                .fold(None::<&CellSummary>, |acc, c| match acc {
                    Some(b) if b.degradation_mean >= c.degradation_mean => Some(b),
                    _ => Some(c),
                });
            let imp = match best {
                None => Improvement {
                    q,
                    best_lambda: 0.0,
                    delta: 0.0,
                    t: 0.0,
                    p_value: 1.0,
                    significant: false,
                },
                Some(b) => {
                    let with: Vec<f64> = pick(b.lambda, q).iter().map(|r| r.degradation()).collect();
                    let tt = two_sample_t_test(&with, &base)?;
                    Improvement {
                        q,
                        best_lambda: b.lambda,
                        delta: mean(&with) - mean(&base),
                        t: tt.t,
                        p_value: tt.p,
                        significant: tt.p < SIGNIFICANCE_LEVEL,
                    }
                }
            };
            improvements.push(imp);
        }
        Ok(Self {
            dataset: dataset.to_string(),
            mode,
            epsilon,
            lambdas: lambdas.to_vec(),
            qs: qs.to_vec(),
            runs,
            cells,
            improvements,
        })
    }

    pub fn improvement_at(&self, q: usize) -> Option<&Improvement> {
        self.improvements.iter().find(|i| i.q == q)
    }

    /// CSV with header `dataset,mode,lambda,q,run,surrogate_acc,oracle_adv_acc`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dataset,mode,lambda,q,run,surrogate_acc,oracle_adv_acc\n");
        for r in &self.runs {
            s.push_str(&format!(
                "{},{},{:.16e},{},{},{:.16e},{:.16e}\n",
                self.dataset,
                self.mode.as_str(),
                r.lambda,
                r.q,
                r.run,
                r.surrogate_acc,
                r.oracle_adv_acc
            ));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Inputs shared by every cell of a power-benefit sweep.
#[derive(Debug, Clone, Copy)]
pub struct PowerStudy<'a> {
    pub dataset: &'a str,
    /// One oracle per run.
    pub oracles: &'a [LinearLayerModel],
    pub train: &'a LabeledDataset,
    pub test: &'a LabeledDataset,
    pub mode: QueryMode,
    pub epsilon: f64,
    /// Surrogate optimiser settings; the seed is replaced per cell.
    pub surrogate_train: TrainConfig,
    pub clip: ClipPolicy,
    pub seed: u64,
}

/// Sweeps `lambdas x qs x runs`. Queries and surrogate initialisation depend
/// on (run, Q) only, so every lambda sees the same queries. Cells run on the
/// current rayon pool and are reduced in grid order.
pub fn power_benefit_study(study: &PowerStudy<'_>, lambdas: &[f64], qs: &[usize]) -> Result<TransferResult> {
    if !lambdas.contains(&0.0) {
        return Err(Error::InvalidArgument(
            "lambda grid must contain 0 as the baseline".into(),
        ));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(format!("lambda {bad} is not finite and >= 0")));
    }
    if study.oracles.len() < 2 {
        return Err(Error::InvalidArgument(
            "power-benefit study needs at least 2 runs".into(),
        ));
    }
    let oracles: Vec<(CrossbarInstance, f64)> = study
        .oracles
        .par_iter()
        .map(|o| Ok((CrossbarInstance::compile(o)?, o.accuracy(study.test)?)))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for &q in qs {
        for run in 0..oracles.len() {
            for &lambda in lambdas {
                cells.push((q, run, lambda));
            }
        }
    }
    let runs: Vec<TransferRun> = cells
        .par_iter()
        .map(|&(q, run, lambda)| {
            let (oracle, clean) = &oracles[run];
            let seed = rng::derive_seed(study.seed, &format!("surrogate/run{run}/q{q}"));
            let queries = collect_queries(oracle, study.train, q, study.mode, rng::derive_seed(seed, "queries"))?;
            let cfg = SurrogateConfig {
                lambda,
                query_count: q,
                query_mode: study.mode,
                train: TrainConfig {
                    seed: rng::derive_seed(seed, "train"),
                    ..study.surrogate_train
                },
                runs: oracles.len(),
                attack_epsilon: study.epsilon,
            };
            let s = train_surrogate(&queries, oracle.outputs(), &cfg)?;
            Ok(TransferRun {
                lambda,
                q,
                run,
                seed,
                surrogate_acc: s.accuracy(study.test)?,
                oracle_clean_acc: *clean,
                oracle_adv_acc: transfer_attack_eval(oracle, &s, study.test, study.epsilon, study.clip)?,
            })
        })
        .collect::<Result<_>>()?;
    TransferResult::from_runs(study.dataset, study.mode, study.epsilon, lambdas, qs, runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Split;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> Matrix {
        let mut r = rng::stream(seed);
        let data = (0..m * n).map(|_| r.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(m, n, data).unwrap()
    }

    fn random_dataset(n: usize, features: usize, classes: usize, seed: u64) -> LabeledDataset {
        let mut r = rng::stream(seed);
        let data = (0..n * features).map(|_| r.random_range(0.0..=1.0)).collect();
        let labels = (0..n).map(|_| r.random_range(0..classes)).collect();
        LabeledDataset::new(
            Matrix::from_vec(n, features, data).unwrap(),
            labels,
            classes,
            Split::Train,
        )
        .unwrap()
    }

    fn oracle(seed: u64) -> (LinearLayerModel, CrossbarInstance) {
        let m = LinearLayerModel::new(random_matrix(3, 8, seed), Pairing::LinearMse).unwrap();
        let x = CrossbarInstance::compile(&m).unwrap();
        (m, x)
    }

    #[test]
    fn power_prediction_examples() {
        let s = LinearLayerModel::new(Matrix::from_rows(&[[1.0, -1.0]]), Pairing::LinearMse).unwrap();
        assert_eq!(surrogate_power_prediction(&s, &[0.5, 0.5]), 1.0);
        let z = LinearLayerModel::zeros(Pairing::LinearMse, 3, 4);
        assert_eq!(surrogate_power_prediction(&z, &[0.3; 4]), 0.0);
    }

    #[test]
    fn queries_follow_mode_and_seed() {
        let (_, x) = oracle(1);
        let ds = random_dataset(50, 8, 3, 2);
        let one = collect_queries(&x, &ds, 1, QueryMode::RawOutput, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].power, Some(x.total_current(&one[0].input).unwrap()));
        let labels = collect_queries(&x, &ds, 10, QueryMode::LabelOnly, 4).unwrap();
        assert!(labels.iter().all(|r| r.label().is_some() && r.output().is_none()));
        assert_eq!(labels, collect_queries(&x, &ds, 10, QueryMode::LabelOnly, 4).unwrap());
        assert!(collect_queries(&x, &ds, 51, QueryMode::RawOutput, 0).is_err());
    }

    #[test]
    fn lambda_zero_ignores_power() {
        let (_, x) = oracle(3);
        let ds = random_dataset(40, 8, 3, 4);
        let q = collect_queries(&x, &ds, 30, QueryMode::RawOutput, 5).unwrap();
        let mut scrambled = q.clone();
        for (k, r) in scrambled.iter_mut().enumerate() {
            r.power = if k % 2 == 0 { None } else { Some(-1e9) };
        }
        let cfg = SurrogateConfig::new(DatasetKind::Mnist, 30, QueryMode::RawOutput, 9);
        let a = train_surrogate(&q, 3, &cfg).unwrap();
        let b = train_surrogate(&scrambled, 3, &cfg).unwrap();
        assert_eq!(a, b);
        let powered = SurrogateConfig { lambda: 1e-3, ..cfg };
        assert!(train_surrogate(&scrambled, 3, &powered).is_err());
    }

    #[test]
    fn enough_raw_queries_recover_the_oracle() {
        let (m, x) = oracle(6);
        let ds = random_dataset(200, 8, 3, 7);
        let q = collect_queries(&x, &ds, 200, QueryMode::RawOutput, 8).unwrap();
        let cfg = SurrogateConfig {
            train: TrainConfig {
                epochs: 400,
                batch_size: 16,
                learning_rate: 0.2,
                seed: 1,
            },
            ..SurrogateConfig::new(DatasetKind::Mnist, 200, QueryMode::RawOutput, 1)
        };
        let s = train_surrogate(&q, 3, &cfg).unwrap();
        let err = s.weights().sub(m.weights()).unwrap().frobenius_norm() / m.weights().frobenius_norm();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn self_transfer_equals_white_box_fgsm() {
        let (m, x) = oracle(10);
        let ds = random_dataset(100, 8, 3, 11);
        let transfer = transfer_attack_eval(&x, &m, &ds, 0.2, ClipPolicy::Clip).unwrap();
        let mut correct = 0;
        for i in 0..ds.len() {
            let adv = m
                .fgsm_example(ds.input(i), &one_hot(ds.label(i), 3), 0.2, ClipPolicy::Clip)
                .unwrap();
            if m.predict(&adv).unwrap() == ds.label(i) {
                correct += 1;
            }
        }
        assert_eq!(transfer, correct as f64 / 100.0);
        let clean = m.accuracy(&ds).unwrap();
        assert_eq!(transfer_attack_eval(&x, &m, &ds, 0.0, ClipPolicy::Clip).unwrap(), clean);
    }

    #[test]
    fn baseline_only_grid_has_zero_improvement() {
        let oracles: Vec<_> = (0..3).map(|k| oracle(20 + k).0).collect();
        let train = random_dataset(60, 8, 3, 30);
        let test = random_dataset(40, 8, 3, 31);
        let study = PowerStudy {
            dataset: "toy",
            oracles: &oracles,
            train: &train,
            test: &test,
            mode: QueryMode::RawOutput,
            epsilon: 0.1,
            surrogate_train: TrainConfig {
                epochs: 5,
                ..TrainConfig::default_for(DatasetKind::Mnist, Pairing::LinearMse, 0)
            },
            clip: ClipPolicy::Clip,
            seed: 3,
        };
        let r = power_benefit_study(&study, &[0.0], &[5, 10]).unwrap();
        assert_eq!(r.runs.len(), 6);
        for imp in &r.improvements {
            assert_eq!((imp.delta, imp.p_value), (0.0, 1.0));
        }
        assert!(power_benefit_study(&study, &[1e-3], &[5]).is_err());

        let full = power_benefit_study(&study, &[0.0, 1e-3], &[10]).unwrap();
        let again = power_benefit_study(&study, &[0.0, 1e-3], &[10]).unwrap();
        assert_eq!(full.to_csv(), again.to_csv());
        let rebuilt =
            TransferResult::from_runs("toy", full.mode, 0.1, &full.lambdas, &full.qs, full.runs.clone()).unwrap();
        assert_eq!(rebuilt, full);
        let json: TransferResult = serde_json::from_str(&full.to_json().unwrap()).unwrap();
        assert_eq!(json, full);
        assert!(full
            .to_csv()
            .starts_with("dataset,mode,lambda,q,run,surrogate_acc,oracle_adv_acc\ntoy,raw_output,"));
        for r in &full.runs {
            assert!((0.0..=1.0).contains(&r.surrogate_acc) && (0.0..=1.0).contains(&r.oracle_adv_acc));
        }
        let p = full.improvements[0].p_value;
        assert!((0.0..=1.0).contains(&p));
    }

    fn fd_check(w: &Matrix, q: &[QueryRecord], lambda: f64) -> f64 {
        let g = surrogate_loss_gradient(w, q, lambda).unwrap();
        let h = 1e-6;
        let mut num = Matrix::zeros(w.rows(), w.cols());
        for k in 0..w.as_slice().len() {
            let mut p = w.clone();
            p.as_mut_slice()[k] += h;
            let mut n = w.clone();
            n.as_mut_slice()[k] -= h;
            num.as_mut_slice()[k] =
                (surrogate_loss(&p, q, lambda).unwrap() - surrogate_loss(&n, q, lambda).unwrap()) / (2.0 * h);
        }
        g.sub(&num).unwrap().frobenius_norm() / num.frobenius_norm().max(1e-300)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn composite_gradient_matches_finite_differences(seed in any::<u64>(), lambda in 0.0f64..0.1, raw in any::<bool>()) {
            let (_, x) = oracle(seed);
            let ds = random_dataset(12, 8, 3, seed ^ 1);
            let mode = if raw { QueryMode::RawOutput } else { QueryMode::LabelOnly };
            let q = collect_queries(&x, &ds, 12, mode, seed).unwrap();
            // Weights bounded away from zero keep the sign term differentiable.
            let mut w = random_matrix(3, 8, seed ^ 2);
            for v in w.as_mut_slice() {
                *v = v.signum() * (0.05 + v.abs());
            }
            prop_assert!(fd_check(&w, &q, lambda) < 1e-5);
        }

        #[test]
        fn prediction_matches_compiled_current(seed in any::<u64>()) {
            let s = LinearLayerModel::new(random_matrix(4, 9, seed), Pairing::LinearMse).unwrap();
            let x = CrossbarInstance::compile(&s).unwrap();
            let mut r = rng::stream(seed ^ 3);
            let u: Vec<f64> = (0..9).map(|_| r.random_range(0.0..=1.0)).collect();
            let a = surrogate_power_prediction(&s, &u);
            let b = x.total_current(&u).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
