//! Evasion attacks that use the power side channel: single- and multi-pixel
//! perturbations guided by extracted column norms, a white-box worst case
//! for comparison, and exact weight recovery from raw-output queries.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::crossbar::CrossbarInstance;
use crate::crossbar::QueryRecord;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{matmul, pseudoinverse, top_n_indices, Matrix};
use crate::model::{one_hot, sign, ClipPolicy, LinearLayerModel};
use crate::rng;
use crate::sidechannel::ColumnNormProfile;

/// How the attacked pixels and their directions are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PixelAttackStrategy {
    /// A random pixel per image, `+eps` or `-eps` with equal probability.
    #[serde(rename = "rp")]
    RandomPixel,
    /// The largest-norm pixel, `+eps`.
    #[serde(rename = "plus")]
    PlusNorm,
    /// The largest-norm pixel, `-eps`.
    #[serde(rename = "minus")]
    MinusNorm,
    /// The largest-norm pixel, random direction per image.
    #[serde(rename = "rd")]
    RandomDirectionNorm,
    /// White-box: the pixel with the largest `|dL/du_j|` per image, moved
    /// along the gradient sign.
    #[serde(rename = "worst")]
    WorstCase,
}

impl PixelAttackStrategy {
    pub const ALL: [PixelAttackStrategy; 5] = [
        PixelAttackStrategy::RandomPixel,
        PixelAttackStrategy::PlusNorm,
        PixelAttackStrategy::MinusNorm,
        PixelAttackStrategy::RandomDirectionNorm,
        PixelAttackStrategy::WorstCase,
    ];

    /// Short legend label.
    pub fn as_str(self) -> &'static str {
        match self {
            PixelAttackStrategy::RandomPixel => "rp",
            PixelAttackStrategy::PlusNorm => "plus",
            PixelAttackStrategy::MinusNorm => "minus",
            PixelAttackStrategy::RandomDirectionNorm => "rd",
            PixelAttackStrategy::WorstCase => "worst",
        }
    }

    fn needs_profile(self) -> bool {
        matches!(
            self,
            PixelAttackStrategy::PlusNorm | PixelAttackStrategy::MinusNorm | PixelAttackStrategy::RandomDirectionNorm
        )
    }
}

impl fmt::Display for PixelAttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PixelAttackStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`; valid: rp, plus, minus, rd, worst")))
    }
}

/// What the attacker has to work with.
#[derive(Debug, Clone, Copy)]
pub struct AttackContext<'a> {
    pub oracle: &'a CrossbarInstance,
    /// Extracted column norms; required by the norm-guided strategies.
    pub profile: Option<&'a ColumnNormProfile>,
    /// White-box model; required by `WorstCase` only.
    pub white_box: Option<&'a LinearLayerModel>,
    pub clip: ClipPolicy,
}

impl<'a> AttackContext<'a> {
    pub fn new(oracle: &'a CrossbarInstance) -> Self {
        Self {
            oracle,
            profile: None,
            white_box: None,
            clip: ClipPolicy::Clip,
        }
    }

    pub fn with_profile(mut self, profile: &'a ColumnNormProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn with_white_box(mut self, model: &'a LinearLayerModel) -> Self {
        self.white_box = Some(model);
        self
    }

    pub fn with_clip(mut self, clip: ClipPolicy) -> Self {
        self.clip = clip;
        self
    }

    fn check(&self, strategy: PixelAttackStrategy, ds: &LabeledDataset, epsilon: f64, n_pixels: usize) -> Result<()> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        if ds.feature_dim() != self.oracle.inputs() {
            return Err(Error::DimensionMismatch {
                op: "attack dataset",
                left: (self.oracle.outputs(), self.oracle.inputs()),
                right: (ds.num_classes(), ds.feature_dim()),
            });
        }
        if n_pixels > self.oracle.inputs() {
            return Err(Error::InvalidArgument(format!(
                "n_pixels {n_pixels} exceeds input size {}",
                self.oracle.inputs()
            )));
        }
        if strategy.needs_profile() {
            let p = self
                .profile
                .ok_or_else(|| Error::InvalidArgument(format!("strategy `{strategy}` needs a column-norm profile")))?;
            if p.norms.len() != self.oracle.inputs() {
                return Err(Error::DimensionMismatch {
                    op: "profile",
                    left: (self.oracle.inputs(), 1),
                    right: (p.norms.len(), 1),
                });
            }
        }
        if strategy == PixelAttackStrategy::WorstCase {
            let m = self
                .white_box
                .ok_or_else(|| Error::InvalidArgument("strategy `worst` needs white-box model access".into()))?;
            if m.inputs() != self.oracle.inputs() {
                return Err(Error::DimensionMismatch {
                    op: "white-box model",
                    left: (self.oracle.outputs(), self.oracle.inputs()),
                    right: m.weights().shape(),
                });
            }
        }
        Ok(())
    }

    fn oracle_label(&self, u: &[f64]) -> Result<usize> {
        match self.clip {
            ClipPolicy::Clip => self.oracle.label(u),
            ClipPolicy::Unclipped => Ok(self.oracle.label_unbounded(u)),
        }
    }
}

/// Perturbs one image. `rng` must be the image's own stream.
pub fn perturb_image<R: Rng>(
    ctx: &AttackContext<'_>,
    u: &[f64],
    label: usize,
    strategy: PixelAttackStrategy,
    epsilon: f64,
    n_pixels: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = u.len();
    let mut moves: Vec<(usize, f64)> = Vec::with_capacity(n_pixels);
    match strategy {
        PixelAttackStrategy::RandomPixel => {
            while moves.len() < n_pixels {
                let j = rng.random_range(0..n);
                if moves.iter().any(|&(k, _)| k == j) {
                    continue;
                }
                let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                moves.push((j, dir));
            }
        }
        PixelAttackStrategy::PlusNorm | PixelAttackStrategy::MinusNorm | PixelAttackStrategy::RandomDirectionNorm => {
            let profile = ctx.profile.ok_or(Error::InvalidArgument("missing profile".into()))?;
            for j in profile.top(n_pixels) {
                let dir = match strategy {
                    PixelAttackStrategy::PlusNorm => 1.0,
                    PixelAttackStrategy::MinusNorm => -1.0,
                    _ => {
                        if rng.random_bool(0.5) {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                moves.push((j, dir));
            }
        }
        PixelAttackStrategy::WorstCase => {
            let model = ctx
                .white_box
                .ok_or(Error::InvalidArgument("missing white-box model".into()))?;
            let g = model.input_sensitivity(u, &one_hot(label, model.outputs()))?;
            let mag: Vec<f64> = g.iter().map(|v| v.abs()).collect();
            for j in top_n_indices(&mag, n_pixels) {
                moves.push((j, sign(g[j])));
            }
        }
    }
    let mut adv = u.to_vec();
    for (j, dir) in moves {
        adv[j] = ctx.clip.apply(u[j] + dir * epsilon);
    }
    Ok(adv)
}

/// Oracle accuracy on `ds` after perturbing the single pixel chosen by
/// `strategy` in every image.
pub fn single_pixel_attack(
    ctx: &AttackContext<'_>,
    ds: &LabeledDataset,
    strategy: PixelAttackStrategy,
    epsilon: f64,
    seed: u64,
) -> Result<f64> {
    multi_pixel_attack(ctx, ds, strategy, epsilon, seed, 1)
}

/// Oracle accuracy on `ds` after perturbing `n_pixels` pixels per image.
/// Norm-guided strategies use the top-`n_pixels` columns by extracted
/// 1-norm; each image draws from its own seeded stream.
pub fn multi_pixel_attack(
    ctx: &AttackContext<'_>,
    ds: &LabeledDataset,
    strategy: PixelAttackStrategy,
    epsilon: f64,
    seed: u64,
    n_pixels: usize,
) -> Result<f64> {
    ctx.check(strategy, ds, epsilon, n_pixels)?;
    if ds.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for i in 0..ds.len() {
        let mut r = rng::stream(rng::item_seed(seed, i));
        let adv = perturb_image(ctx, ds.input(i), ds.label(i), strategy, epsilon, n_pixels, &mut r)?;
        if ctx.oracle_label(&adv)? == ds.label(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

/// Oracle accuracy versus attack strength for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackCurve {
    pub strategy: PixelAttackStrategy,
    pub strengths: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub seed: u64,
    pub run: usize,
    pub n_pixels: usize,
}

/// `count` evenly spaced strengths over `[0, max]`.
pub fn epsilon_grid(count: usize, max: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|k| max * k as f64 / (count - 1) as f64).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn attack_curve(
    ctx: &AttackContext<'_>,
    ds: &LabeledDataset,
    strategy: PixelAttackStrategy,
    strengths: &[f64],
    seed: u64,
    run: usize,
    n_pixels: usize,
) -> Result<AttackCurve> {
    if strengths.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("attack strengths must be ascending".into()));
    }
    let accuracy = strengths
        .iter()
        .map(|&eps| multi_pixel_attack(ctx, ds, strategy, eps, seed, n_pixels))
        .collect::<Result<Vec<_>>>()?;
    Ok(AttackCurve {
        strategy,
        strengths: strengths.to_vec(),
        accuracy,
        seed,
        run,
        n_pixels,
    })
}

/// CSV with header `strategy,epsilon,accuracy,seed,run`, one line per point.
pub fn curves_csv(curves: &[AttackCurve]) -> String {
    let mut s = String::from("strategy,epsilon,accuracy,seed,run\n");
    for c in curves {
        for (eps, acc) in c.strengths.iter().zip(&c.accuracy) {
            s.push_str(&format!("{},{eps:.16e},{acc:.16e},{},{}\n", c.strategy, c.seed, c.run));
        }
    }
    s
}

/// Least-squares weights from raw-output queries of a linear oracle:
/// stacking inputs as `U` (Q x N) and outputs as `Y` (Q x M), `W^T = U^+ Y`.
pub fn recover_weights_exact(queries: &[QueryRecord], n_inputs: usize) -> Result<Matrix> {
    let first = queries.first().ok_or(Error::Empty("recover_weights_exact"))?;
    let m = first
        .output()
        .ok_or_else(|| Error::InvalidArgument("weight recovery needs raw-output queries".into()))?
        .len();
    let q = queries.len();
    let mut u = Matrix::zeros(q, n_inputs);
    let mut y = Matrix::zeros(q, m);
    for (k, rec) in queries.iter().enumerate() {
        let out = rec
            .output()
            .ok_or_else(|| Error::InvalidArgument("weight recovery needs raw-output queries".into()))?;
        if rec.input.len() != n_inputs || out.len() != m {
            return Err(Error::DimensionMismatch {
                op: "recover_weights_exact",
                left: (m, n_inputs),
                right: (out.len(), rec.input.len()),
            });
        }
        u.row_mut(k).copy_from_slice(&rec.input);
        y.row_mut(k).copy_from_slice(out);
    }
    let wt = matmul(&pseudoinverse(&u)?, &y)?;
    Ok(wt.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossbar::QueryMode;
    use crate::data::Split;
    use crate::model::Pairing;
    use crate::sidechannel::extract_column_norms;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_model(pairing: Pairing, m: usize, n: usize, seed: u64) -> LinearLayerModel {
        let mut r = rng::stream(seed);
        let data = (0..m * n).map(|_| r.random_range(-1.0..1.0)).collect();
        LinearLayerModel::new(Matrix::from_vec(m, n, data).unwrap(), pairing).unwrap()
    }

    fn random_dataset(n: usize, features: usize, classes: usize, seed: u64) -> LabeledDataset {
        let mut r = rng::stream(seed);
        let data = (0..n * features).map(|_| r.random_range(0.0..=1.0)).collect();
        let labels = (0..n).map(|_| r.random_range(0..classes)).collect();
        LabeledDataset::new(
            Matrix::from_vec(n, features, data).unwrap(),
            labels,
            classes,
            Split::Test,
        )
        .unwrap()
    }

    struct Fixture {
        model: LinearLayerModel,
        oracle: CrossbarInstance,
        profile: ColumnNormProfile,
        ds: LabeledDataset,
    }

    fn fixture(seed: u64) -> Fixture {
        let model = random_model(Pairing::SoftmaxCe, 4, 12, seed);
        let oracle = CrossbarInstance::compile(&model).unwrap();
        let profile = extract_column_norms(&oracle).unwrap();
        let ds = random_dataset(100, 12, 4, seed ^ 7);
        Fixture {
            model,
            oracle,
            profile,
            ds,
        }
    }

    impl Fixture {
        fn ctx(&self) -> AttackContext<'_> {
            AttackContext::new(&self.oracle)
                .with_profile(&self.profile)
                .with_white_box(&self.model)
        }
    }

    #[test]
    fn zero_strength_gives_clean_accuracy() {
        let f = fixture(1);
        let clean = f.model.accuracy(&f.ds).unwrap();
        for s in PixelAttackStrategy::ALL {
            assert_eq!(single_pixel_attack(&f.ctx(), &f.ds, s, 0.0, 3).unwrap(), clean, "{s}");
        }
    }

    #[test]
    fn missing_inputs_are_errors() {
        let f = fixture(2);
        let bare = AttackContext::new(&f.oracle);
        assert!(single_pixel_attack(&bare, &f.ds, PixelAttackStrategy::PlusNorm, 0.1, 0).is_err());
        assert!(single_pixel_attack(&bare, &f.ds, PixelAttackStrategy::WorstCase, 0.1, 0).is_err());
        assert!(single_pixel_attack(&bare, &f.ds, PixelAttackStrategy::RandomPixel, 0.1, 0).is_ok());
        assert!(multi_pixel_attack(&f.ctx(), &f.ds, PixelAttackStrategy::PlusNorm, 0.1, 0, 13).is_err());
        assert!(single_pixel_attack(&f.ctx(), &f.ds, PixelAttackStrategy::PlusNorm, -0.1, 0).is_err());
    }

    #[test]
    fn one_pixel_multi_equals_single() {
        let f = fixture(3);
        for s in PixelAttackStrategy::ALL {
            let a = single_pixel_attack(&f.ctx(), &f.ds, s, 0.4, 11).unwrap();
            let b = multi_pixel_attack(&f.ctx(), &f.ds, s, 0.4, 11, 1).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn norm_strategies_hit_the_argmax_pixel() {
        let f = fixture(4);
        let j = f.profile.argmax();
        let u = vec![0.5; 12];
        let mut r = rng::stream(0);
        let plus = perturb_image(&f.ctx(), &u, 0, PixelAttackStrategy::PlusNorm, 0.25, 1, &mut r).unwrap();
        let minus = perturb_image(&f.ctx(), &u, 0, PixelAttackStrategy::MinusNorm, 0.25, 1, &mut r).unwrap();
        for k in 0..12 {
            if k == j {
                assert_eq!(plus[k], 0.75);
                assert_eq!(minus[k], 0.25);
            } else {
                assert_eq!(plus[k], 0.5);
                assert_eq!(minus[k], 0.5);
            }
        }
    }

    #[test]
    fn worst_case_moves_along_gradient() {
        let f = fixture(5);
        let u = f.ds.input(0);
        let label = f.ds.label(0);
        let g = f.model.input_sensitivity(u, &one_hot(label, 4)).unwrap();
        let mag: Vec<f64> = g.iter().map(|v| v.abs()).collect();
        let j = crate::linalg::argmax_tiebreak_low(&mag).unwrap();
        let ctx = f.ctx().with_clip(ClipPolicy::Unclipped);
        let mut r = rng::stream(0);
        let adv = perturb_image(&ctx, u, label, PixelAttackStrategy::WorstCase, 0.3, 1, &mut r).unwrap();
        assert_eq!(adv[j], u[j] + 0.3 * sign(g[j]));
    }

    /// The single-coordinate FGSM pick cannot beat a brute-force search over
    /// every (pixel, direction) pair.
    #[test]
    fn exhaustive_search_is_at_least_as_strong_as_worst_case() {
        let f = fixture(6);
        let eps = 0.5;
        let worst = single_pixel_attack(&f.ctx(), &f.ds, PixelAttackStrategy::WorstCase, eps, 0).unwrap();
        let mut survived = 0;
        for i in 0..f.ds.len() {
            let u = f.ds.input(i);
            let fooled = (0..u.len()).any(|j| {
                [1.0, -1.0].iter().any(|d| {
                    let mut adv = u.to_vec();
                    adv[j] = (u[j] + d * eps).clamp(0.0, 1.0);
                    f.oracle.label(&adv).unwrap() != f.ds.label(i)
                })
            });
            if !fooled && f.oracle.label(u).unwrap() == f.ds.label(i) {
                survived += 1;
            }
        }
        let exhaustive = survived as f64 / f.ds.len() as f64;
        assert!(exhaustive <= worst, "{exhaustive} > {worst}");
    }

    /// Monte Carlo estimate of the chance that every random direction matches
    /// the gradient-sign direction on all `n` attacked pixels.
    #[test]
    fn random_directions_match_worst_case_with_prob_half_pow_n() {
        let f = fixture(7);
        let u = vec![0.5; 12];
        let trials = 20_000;
        for n in 1..=4usize {
            let truth: Vec<f64> = (0..n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let top = f.profile.top(n);
            let ctx = f.ctx().with_clip(ClipPolicy::Unclipped);
            let mut hits = 0;
            for t in 0..trials {
                let mut r = rng::stream(rng::item_seed(99, t));
                let adv = perturb_image(&ctx, &u, 0, PixelAttackStrategy::RandomDirectionNorm, 0.1, n, &mut r).unwrap();
                if top.iter().zip(&truth).all(|(&j, &d)| sign(adv[j] - u[j]) == d) {
                    hits += 1;
                }
            }
            let p = 0.5f64.powi(n as i32);
            let est = hits as f64 / trials as f64;
            let sd = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((est - p).abs() < 4.0 * sd, "n={n}: {est} vs {p}");
        }
    }

    #[test]
    fn curve_and_csv() {
        let f = fixture(8);
        let eps = epsilon_grid(21, 1.0);
        assert_eq!(eps.len(), 21);
        assert_eq!(eps[20], 1.0);
        assert!((eps[1] - 0.05).abs() < 1e-15);
        let c = attack_curve(&f.ctx(), &f.ds, PixelAttackStrategy::PlusNorm, &eps[..3], 5, 2, 1).unwrap();
        assert!(c.accuracy.iter().all(|a| (0.0..=1.0).contains(a)));
        let csv = curves_csv(&[c]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "strategy,epsilon,accuracy,seed,run");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("plus,0.0000000000000000e0,"));
        assert!(lines[1].ends_with(",5,2"));
        assert!(attack_curve(&f.ctx(), &f.ds, PixelAttackStrategy::PlusNorm, &[0.2, 0.1], 0, 0, 1).is_err());
    }

    #[test]
    fn recovery_from_basis_queries_is_exact() {
        let m = random_model(Pairing::LinearMse, 3, 6, 9);
        let x = CrossbarInstance::compile(&m).unwrap();
        let queries: Vec<_> = (0..6)
            .map(|j| {
                let mut u = vec![0.0; 6];
                u[j] = 1.0;
                x.oracle_query(&u, QueryMode::RawOutput, false).unwrap()
            })
            .collect();
        let w = recover_weights_exact(&queries, 6).unwrap();
        let err = w.sub(m.weights()).unwrap().frobenius_norm() / m.weights().frobenius_norm();
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn recovery_from_random_full_rank_queries() {
        let m = random_model(Pairing::LinearMse, 5, 20, 10);
        let x = CrossbarInstance::compile(&m).unwrap();
        let mut r = rng::stream(11);
        let queries: Vec<_> = (0..20)
            .map(|_| {
                let u: Vec<f64> = (0..20).map(|_| r.random_range(0.0..=1.0)).collect();
                x.oracle_query(&u, QueryMode::RawOutput, true).unwrap()
            })
            .collect();
        let w = recover_weights_exact(&queries, 20).unwrap();
        let err = w.sub(m.weights()).unwrap().frobenius_norm() / m.weights().frobenius_norm();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn recovery_from_one_query_interpolates_it() {
        let m = random_model(Pairing::LinearMse, 3, 5, 12);
        let x = CrossbarInstance::compile(&m).unwrap();
        let u = [0.1, 0.9, 0.4, 0.0, 0.7];
        let q = x.oracle_query(&u, QueryMode::RawOutput, false).unwrap();
        let w = recover_weights_exact(std::slice::from_ref(&q), 5).unwrap();
        let y = w.matvec(&u).unwrap();
        for (a, b) in y.iter().zip(q.output().unwrap()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn recovery_errors() {
        assert!(recover_weights_exact(&[], 3).is_err());
        let m = random_model(Pairing::LinearMse, 2, 3, 1);
        let x = CrossbarInstance::compile(&m).unwrap();
        let q = x.oracle_query(&[0.1, 0.2, 0.3], QueryMode::LabelOnly, true).unwrap();
        assert!(recover_weights_exact(&[q], 3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn attacks_touch_only_chosen_pixels_and_stay_in_range(
            seed in any::<u64>(),
            eps in 0.0f64..1.5,
            n_pixels in 0usize..6,
            which in 0usize..5,
        ) {
            let f = fixture(seed);
            let strategy = PixelAttackStrategy::ALL[which];
            let u = f.ds.input(0);
            let mut r = rng::stream(seed);
            let adv = perturb_image(&f.ctx(), u, f.ds.label(0), strategy, eps, n_pixels, &mut r).unwrap();
            let changed = adv.iter().zip(u).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
            prop_assert!(changed <= n_pixels);
            prop_assert!(adv.iter().all(|v| (0.0..=1.0).contains(v)));
            for (a, b) in adv.iter().zip(u) {
                prop_assert!((a - b).abs() <= eps + 1e-15);
            }
        }

        #[test]
        fn attacks_are_reproducible(seed in any::<u64>(), which in 0usize..5) {
            let f = fixture(seed % 16);
            let s = PixelAttackStrategy::ALL[which];
            let a = multi_pixel_attack(&f.ctx(), &f.ds, s, 0.3, seed, 2).unwrap();
            let b = multi_pixel_attack(&f.ctx(), &f.ds, s, 0.3, seed, 2).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
