//! Fully connected regressor from a flattened 81x6 window to fault distance.
//!
//! Hidden layers use ReLU, the output is linear, the loss is the mean squared
//! error on labels scaled by the line length, and training uses Adam.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{normalize_features, split_train_val, SampleSet};
use crate::error::{Error, Result};
use crate::records::{SampleMatrix, WINDOW_LEN};

pub const MODEL_MAGIC: [u8; 4] = *b"FLMD";
/// Largest tolerated fraction of diverged repetitions.
pub const MAX_DIVERGENT_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub layers: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    /// Fraction of a dataset used for training by the repeated locator.
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_train_fraction() -> f64 {
    0.8
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            layers: vec![WINDOW_LEN, 256, 128, 64, 32, 16, 1],
            learning_rate: 1e-3,
            batch_size: 128,
            epochs: 70,
            seed: 0,
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_eps(),
            train_fraction: default_train_fraction(),
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("mlp config: {m}")));
        if self.layers.len() < 2 || self.layers.iter().any(|&n| n == 0) {
            return bad("need at least two non-empty layers");
        }
        if *self.layers.last().unwrap_or(&0) != 1 {
            return bad("output layer must have one unit");
        }
        if !(self.learning_rate > 0.0) || self.batch_size == 0 || self.epochs == 0 {
            return bad("learning rate, batch size and epochs must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !(self.epsilon > 0.0)
        {
            return bad("Adam moments out of range");
        }
        Ok(())
    }
}

/// Floating-point type the network can run in.
pub trait Real:
    Copy
    + Default
    + PartialOrd
    + Send
    + Sync
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::AddAssign
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    /// `c = alpha * a * b + beta * c` with explicit row/column strides.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        rsa: isize,
        csa: isize,
        b: &[Self],
        rsb: isize,
        csb: isize,
        beta: Self,
        c: &mut [Self],
        rsc: isize,
        csc: isize,
    );
}

macro_rules! impl_real {
    ($t:ty, $gemm:path) => {
        impl Real for $t {
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                rsa: isize,
                csa: isize,
                b: &[Self],
                rsb: isize,
                csb: isize,
                beta: Self,
                c: &mut [Self],
                rsc: isize,
                csc: isize,
            ) {
                if m == 0 || n == 0 {
                    return;
                }
                // Bounds of every operand are implied by the strides the
                // callers pass; check the extreme element before going raw.
                let last = |r: usize, cc: usize, rs: isize, cs: isize| {
                    (r.saturating_sub(1) as isize * rs + cc.saturating_sub(1) as isize * cs)
                        as usize
                };
                assert!(k == 0 || last(m, k, rsa, csa) < a.len());
                assert!(k == 0 || last(k, n, rsb, csb) < b.len());
                assert!(last(m, n, rsc, csc) < c.len());
                // SAFETY: the asserts above keep every accessed element in bounds.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        alpha,
                        a.as_ptr(),
                        rsa,
                        csa,
                        b.as_ptr(),
                        rsb,
                        csb,
                        beta,
                        c.as_mut_ptr(),
                        rsc,
                        csc,
                    )
                }
            }
        }
    };
}

impl_real!(f32, matrixmultiply::sgemm);
impl_real!(f64, matrixmultiply::dgemm);

/// One dense layer, weights `out x in` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<T>,
    pub b: Vec<T>,
}

/// Layer stack with ReLU between layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub layers: Vec<Dense<T>>,
}

/// Parameter gradients, shaped like the network.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    pub w: Vec<Vec<T>>,
    pub b: Vec<Vec<T>>,
}

impl<T: Real> Network<T> {
    /// Uniform `+-1/sqrt(fan_in)` initialisation.
    pub fn init(sizes: &[usize], rng: &mut impl Rng) -> Self {
        let layers = sizes
            .windows(2)
            .map(|p| {
                let (n_in, n_out) = (p[0], p[1]);
                let s = 1.0 / (n_in as f64).sqrt();
                let mut draw = || T::from_f64(rng.gen_range(-s..s));
                let w = (0..n_in * n_out).map(|_| draw()).collect();
                let b = (0..n_out).map(|_| draw()).collect();
                Dense { n_in, n_out, w, b }
            })
            .collect();
        Network { layers }
    }

    pub fn n_in(&self) -> usize {
        self.layers.first().map_or(0, |l| l.n_in)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.layers.iter().map(|l| l.n_in).collect();
        s.extend(self.layers.last().map(|l| l.n_out));
        s
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Outputs for `rows` inputs stored row-major in `x`, plus the
    /// pre-activation of every layer (kept for back-propagation).
    pub fn forward(&self, x: &[T], rows: usize) -> (Vec<T>, Vec<Vec<T>>) {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act: Vec<T> = x.to_vec();
        for (li, l) in self.layers.iter().enumerate() {
            let mut z = vec![T::default(); rows * l.n_out];
            for r in 0..rows {
                z[r * l.n_out..(r + 1) * l.n_out].copy_from_slice(&l.b);
            }
            // z (rows x out) += act (rows x in) * w^T (in x out)
            T::gemm(
                rows,
                l.n_in,
                l.n_out,
                T::from_f64(1.0),
                &act,
                l.n_in as isize,
                1,
                &l.w,
                1,
                l.n_in as isize,
                T::from_f64(1.0),
                &mut z,
                l.n_out as isize,
                1,
            );
            act = if li + 1 < self.layers.len() {
                z.iter()
                    .map(|&v| if v > T::default() { v } else { T::default() })
                    .collect()
            } else {
                z.clone()
            };
            pre.push(z);
        }
        (act, pre)
    }

    /// Mean squared error over the batch and its parameter gradients.
    pub fn loss_and_gradients(&self, x: &[T], y: &[T]) -> (f64, Gradients<T>) {
        let rows = y.len();
        let (out, pre) = self.forward(x, rows);
        let inv = 1.0 / rows as f64;
        let mut loss = 0.0;
        let mut delta: Vec<T> = out
            .iter()
            .zip(y)
            .map(|(&o, &t)| {
                let e = (o - t).to_f64();
                loss += e * e * inv;
                T::from_f64(2.0 * e * inv)
            })
            .collect();
        let n = self.layers.len();
        let mut gw: Vec<Vec<T>> = vec![Vec::new(); n];
        let mut gb: Vec<Vec<T>> = vec![Vec::new(); n];
        for li in (0..n).rev() {
            let l = &self.layers[li];
            // Input activation of this layer.
            let a_in: Vec<T> = if li == 0 {
                x.to_vec()
            } else {
                pre[li - 1]
                    .iter()
                    .map(|&v| if v > T::default() { v } else { T::default() })
                    .collect()
            };
            // dW (out x in) = delta^T (out x rows) * a_in (rows x in)
            let mut dw = vec![T::default(); l.n_out * l.n_in];
            T::gemm(
                l.n_out,
                rows,
                l.n_in,
                T::from_f64(1.0),
                &delta,
                1,
                l.n_out as isize,
                &a_in,
                l.n_in as isize,
                1,
                T::default(),
                &mut dw,
                l.n_in as isize,
                1,
            );
            let mut db = vec![T::default(); l.n_out];
            for r in 0..rows {
                for (j, d) in db.iter_mut().enumerate() {
                    *d += delta[r * l.n_out + j];
                }
            }
            if li > 0 {
                // delta_prev (rows x in) = delta (rows x out) * W (out x in), masked by ReLU'.
                let mut dp = vec![T::default(); rows * l.n_in];
                T::gemm(
                    rows,
                    l.n_out,
                    l.n_in,
                    T::from_f64(1.0),
                    &delta,
                    l.n_out as isize,
                    1,
                    &l.w,
                    l.n_in as isize,
                    1,
                    T::default(),
                    &mut dp,
                    l.n_in as isize,
                    1,
                );
                for (d, &z) in dp.iter_mut().zip(&pre[li - 1]) {
                    if !(z > T::default()) {
                        *d = T::default();
                    }
                }
                delta = dp;
            }
            gw[li] = dw;
            gb[li] = db;
        }
        (loss, Gradients { w: gw, b: gb })
    }

    /// Mean squared error without gradients.
    pub fn loss(&self, x: &[T], y: &[T]) -> f64 {
        let (out, _) = self.forward(x, y.len());
        out.iter()
            .zip(y)
            .map(|(&o, &t)| (o - t).to_f64().powi(2))
            .sum::<f64>()
            / y.len().max(1) as f64
    }
}

/// Adam state for one network.
struct Adam<T> {
    m: Gradients<T>,
    v: Gradients<T>,
    step: i32,
}

impl<T: Real> Adam<T> {
    fn new(net: &Network<T>) -> Self {
        let zeros = || Gradients {
            w: net
                .layers
                .iter()
                .map(|l| vec![T::default(); l.w.len()])
                .collect(),
            b: net
                .layers
                .iter()
                .map(|l| vec![T::default(); l.b.len()])
                .collect(),
        };
        Adam {
            m: zeros(),
            v: zeros(),
            step: 0,
        }
    }

    fn update(&mut self, net: &mut Network<T>, g: &Gradients<T>, cfg: &MlpConfig) {
        self.step += 1;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let lr_t =
            cfg.learning_rate * (1.0 - b2.powi(self.step)).sqrt() / (1.0 - b1.powi(self.step));
        let (b1t, b2t) = (T::from_f64(b1), T::from_f64(b2));
        let (c1, c2) = (T::from_f64(1.0 - b1), T::from_f64(1.0 - b2));
        let (lr, eps) = (T::from_f64(lr_t), T::from_f64(cfg.epsilon));
        let apply = |p: &mut [T], g: &[T], m: &mut [T], v: &mut [T]| {
            for k in 0..p.len() {
                m[k] = b1t * m[k] + c1 * g[k];
                v[k] = b2t * v[k] + c2 * g[k] * g[k];
                p[k] = p[k] - lr * m[k] / (v[k].sqrt() + eps);
            }
        };
        for (li, l) in net.layers.iter_mut().enumerate() {
            apply(&mut l.w, &g.w[li], &mut self.m.w[li], &mut self.v.w[li]);
            apply(&mut l.b, &g.b[li], &mut self.m.b[li], &mut self.v.b[li]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// A trained regressor with everything needed to apply it to a raw window.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: MlpConfig,
    pub network: Network<f32>,
    pub line_length_km: f64,
    pub voltage_base: f64,
    pub current_base: f64,
    pub log: Vec<EpochLog>,
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    config: MlpConfig,
    sizes: Vec<usize>,
    line_length_km: f64,
    voltage_base: f64,
    current_base: f64,
    log: Vec<EpochLog>,
}

/// Normalization and label scale shared by training and prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub line_length_km: f64,
    pub voltage_base: f64,
    pub current_base: f64,
}

/// Trains for exactly `cfg.epochs` epochs. Features must already be
/// normalized; labels are in km and are scaled by the line length here.
pub fn train(
    train_set: &SampleSet,
    val_set: &SampleSet,
    cfg: &MlpConfig,
    scaling: Scaling,
) -> Result<TrainedModel> {
    cfg.validate()?;
    let n_in = cfg.layers[0];
    if train_set.is_empty() {
        return Err(Error::DatasetTooSmall("empty training set".into()));
    }
    if train_set.features.len() != train_set.len() * n_in
        || val_set.features.len() != val_set.len() * n_in
    {
        return Err(Error::Dimension(format!(
            "samples must have {n_in} features"
        )));
    }
    if !(scaling.line_length_km > 0.0) {
        return Err(Error::InvalidParameter(
            "line length must be positive".into(),
        ));
    }
    let scale = 1.0 / scaling.line_length_km as f32;
    let ty: Vec<f32> = train_set.labels_km.iter().map(|&y| y * scale).collect();
    let vy: Vec<f32> = val_set.labels_km.iter().map(|&y| y * scale).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Network::<f32>::init(&cfg.layers, &mut rng);
    let mut adam = Adam::new(&net);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut xb: Vec<f32> = Vec::with_capacity(cfg.batch_size * n_in);
    let mut yb: Vec<f32> = Vec::with_capacity(cfg.batch_size);
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            xb.clear();
            yb.clear();
            for &k in chunk {
                xb.extend_from_slice(train_set.row(k));
                yb.push(ty[k]);
            }
            let (loss, g) = net.loss_and_gradients(&xb, &yb);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            sum += loss * chunk.len() as f64;
            adam.update(&mut net, &g, cfg);
        }
        let train_loss = sum / train_set.len() as f64;
        let val_loss = if val_set.is_empty() {
            f64::NAN
        } else {
            net.loss(&val_set.features, &vy)
        };
        if !train_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        log::debug!("epoch {epoch}: train {train_loss:.3e} val {val_loss:.3e}");
        log.push(EpochLog {
            epoch,
            train_loss,
            val_loss,
        });
    }
    Ok(TrainedModel {
        config: cfg.clone(),
        network: net,
        line_length_km: scaling.line_length_km,
        voltage_base: scaling.voltage_base,
        current_base: scaling.current_base,
        log,
    })
}

impl TrainedModel {
    pub fn scaling(&self) -> Scaling {
        Scaling {
            line_length_km: self.line_length_km,
            voltage_base: self.voltage_base,
            current_base: self.current_base,
        }
    }

    /// Distance in km for an already normalized flattened window, clamped
    /// to the line.
    pub fn predict_features(&self, x: &[f32]) -> Result<f64> {
        if x.len() != self.network.n_in() {
            return Err(Error::Dimension(format!(
                "model expects {} inputs, got {}",
                self.network.n_in(),
                x.len()
            )));
        }
        let (out, _) = self.network.forward(x, 1);
        let km = out[0] as f64 * self.line_length_km;
        if !km.is_finite() {
            return Err(Error::Indeterminate("non-finite network output".into()));
        }
        Ok(km.clamp(0.0, self.line_length_km))
    }

    /// Distance for a window normalized with this model's bases.
    pub fn predict(&self, sample: &SampleMatrix) -> Result<f64> {
        let x: Vec<f32> = sample.data().iter().map(|&v| v as f32).collect();
        self.predict_features(&x)
    }

    /// Distance for a window in physical units.
    pub fn predict_raw(&self, sample: &SampleMatrix) -> Result<f64> {
        let mut x: Vec<f32> = sample.data().iter().map(|&v| v as f32).collect();
        normalize_features(&mut x, self.voltage_base, self.current_base);
        self.predict_features(&x)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = serde_json::to_vec(&ModelHeader {
            config: self.config.clone(),
            sizes: self.network.sizes(),
            line_length_km: self.line_length_km,
            voltage_base: self.voltage_base,
            current_base: self.current_base,
            log: self.log.clone(),
        })?;
        w.write_all(&MODEL_MAGIC)?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        let mut blob = Vec::with_capacity(4 * self.network.param_count());
        for l in &self.network.layers {
            for x in l.w.iter().chain(&l.b) {
                blob.extend_from_slice(&x.to_le_bytes());
            }
        }
        w.write_all(&blob)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head)
            .map_err(|e| Error::Format(format!("model header: {e}")))?;
        if head[..4] != MODEL_MAGIC {
            return Err(Error::Format("not a model file (bad magic)".into()));
        }
        let hlen = u32::from_le_bytes([head[4], head[5], head[6], head[7]]) as usize;
        let mut hbuf = vec![0u8; hlen];
        r.read_exact(&mut hbuf)
            .map_err(|e| Error::Format(format!("model header: {e}")))?;
        let h: ModelHeader = serde_json::from_slice(&hbuf)?;
        let mut blob = Vec::new();
        r.read_to_end(&mut blob)?;
        let expected: usize = h.sizes.windows(2).map(|p| p[0] * p[1] + p[1]).sum();
        if blob.len() != 4 * expected {
            return Err(Error::Format(format!(
                "weight blob has {} bytes, expected {}",
                blob.len(),
                4 * expected
            )));
        }
        let mut vals = blob
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        let layers = h
            .sizes
            .windows(2)
            .map(|p| Dense {
                n_in: p[0],
                n_out: p[1],
                w: vals.by_ref().take(p[0] * p[1]).collect(),
                b: vals.by_ref().take(p[1]).collect(),
            })
            .collect::<Vec<_>>();
        if layers
            .iter()
            .any(|l| l.w.iter().chain(&l.b).any(|x| !x.is_finite()))
        {
            return Err(Error::Format("non-finite weight in model file".into()));
        }
        Ok(TrainedModel {
            config: h.config,
            network: Network { layers },
            line_length_km: h.line_length_km,
            voltage_base: h.voltage_base,
            current_base: h.current_base,
            log: h.log,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(fs::read(path)?.as_slice())
    }

    /// Per-epoch losses as CSV.
    pub fn log_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss\n");
        for e in &self.log {
            s.push_str(&format!(
                "{},{:.9e},{:.9e}\n",
                e.epoch, e.train_loss, e.val_loss
            ));
        }
        s
    }
}

/// Outcome of repeated train-and-predict runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedLocation {
    pub mean_km: f64,
    pub std_km: f64,
    /// Prediction of each successful run, in seed order.
    pub predictions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub diverged: usize,
}

/// One repetition of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub seed: u64,
    pub model: Option<TrainedModel>,
    /// Epoch at which training diverged, when it did.
    pub diverged_at: Option<usize>,
}

/// Models trained with seeds `seed, seed + 1, ...`, each on its own
/// train/validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub runs: Vec<EnsembleRun>,
}

/// Trains `reps` models in parallel. Diverged runs are kept as such; more
/// than 10% of them is an error.
pub fn train_ensemble(
    data: &SampleSet,
    cfg: &MlpConfig,
    scaling: Scaling,
    reps: usize,
) -> Result<Ensemble> {
    if reps == 0 {
        return Err(Error::InvalidParameter(
            "need at least one repetition".into(),
        ));
    }
    let runs: Vec<EnsembleRun> = (0..reps as u64)
        .into_par_iter()
        .map(|r| -> Result<EnsembleRun> {
            let seed = cfg.seed.wrapping_add(r);
            let (ti, vi) = split_train_val(data.len(), cfg.train_fraction, seed)?;
            let run_cfg = MlpConfig {
                seed,
                ..cfg.clone()
            };
            match train(&data.subset(&ti), &data.subset(&vi), &run_cfg, scaling) {
                Ok(m) => Ok(EnsembleRun {
                    seed,
                    model: Some(m),
                    diverged_at: None,
                }),
                Err(Error::Divergence { epoch }) => Ok(EnsembleRun {
                    seed,
                    model: None,
                    diverged_at: Some(epoch),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let failed = runs.iter().filter(|r| r.model.is_none()).count();
    if failed == reps || failed as f64 > MAX_DIVERGENT_FRACTION * reps as f64 {
        return Err(Error::TooManyDivergent {
            failed,
            total: reps,
        });
    }
    Ok(Ensemble { runs })
}

impl Ensemble {
    /// Predictions of every successful run for a normalized window.
    pub fn locate(&self, query: &[f32]) -> Result<RepeatedLocation> {
        let mut predictions = Vec::new();
        let mut seeds = Vec::new();
        for r in &self.runs {
            if let Some(m) = &r.model {
                predictions.push(m.predict_features(query)?);
                seeds.push(r.seed);
            }
        }
        let n = predictions.len() as f64;
        if predictions.is_empty() {
            return Err(Error::TooManyDivergent {
                failed: self.runs.len(),
                total: self.runs.len(),
            });
        }
        let mean_km = predictions.iter().sum::<f64>() / n;
        let std_km = (predictions
            .iter()
            .map(|p| (p - mean_km).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        Ok(RepeatedLocation {
            mean_km,
            std_km,
            predictions,
            seeds,
            diverged: self.runs.len() - n as usize,
        })
    }
}

/// Repeated train-and-predict for one normalized window.
pub fn locate_repeated(
    data: &SampleSet,
    cfg: &MlpConfig,
    scaling: Scaling,
    query: &[f32],
    reps: usize,
) -> Result<RepeatedLocation> {
    train_ensemble(data, cfg, scaling, reps)?.locate(query)
}
