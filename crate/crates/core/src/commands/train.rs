use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use crate::commands::load_language;
use crate::corpus::{
    batch_windows, build_stream, build_vocab, make_windows, parse_manifest, split_lines, LabelSet, Window,
};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::model_file::save_model;
use crate::network::{forward_batch, train_step, Dropout, ModelConfig, ModelParams, Optimizer};
use crate::numerics::{argmax, cross_entropy, AdamConfig, Rng};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Single,
    Double,
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "32" => Ok(Precision::Single),
            "64" => Ok(Precision::Double),
            other => Err(format!("precision must be 32 or 64, got `{other}`")),
        }
    }
}

/// Everything the training loop needs besides the data.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSettings {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub window: usize,
    pub keep_prob: f64,
    pub batch: usize,
    pub adam: AdamConfig,
    pub max_steps: usize,
    pub eval_every: usize,
    /// Evaluations without dev-loss improvement before stopping; 0 never
    /// stops early.
    pub patience: usize,
    pub seed: u64,
    /// Codepoints seen fewer times in the training stream map to UNK.
    pub min_count: usize,
}

impl TrainSettings {
    pub fn new(max_steps: usize) -> Self {
        TrainSettings {
            embed_dim: ModelConfig::DEFAULT_EMBED,
            hidden_dim: ModelConfig::DEFAULT_HIDDEN,
            window: ModelConfig::DEFAULT_WINDOW,
            keep_prob: ModelConfig::DEFAULT_KEEP_PROB,
            batch: 64,
            adam: AdamConfig::default(),
            max_steps,
            eval_every: 1000,
            patience: 10,
            seed: 0,
            min_count: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("batch", self.batch), ("max_steps", self.max_steps), ("eval_every", self.eval_every)] {
            if v == 0 {
                return Err(Error::Parameter(format!("{name} must be at least 1")));
            }
        }
        if self.min_count == 0 {
            return Err(Error::Parameter("min_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// One dev evaluation during training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalPoint {
    pub step: usize,
    /// Mean batch loss since the previous evaluation.
    pub train_loss: f64,
    /// Mean cross-entropy per dev character.
    pub dev_loss: f64,
    pub dev_acc: f64,
}

impl fmt::Display for EvalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step:{} train_loss:{:.6} dev_loss:{:.6} dev_acc:{:.6}",
            self.step, self.train_loss, self.dev_loss, self.dev_acc
        )
    }
}

pub struct TrainOutcome<T> {
    /// Parameters of the evaluation with the lowest dev loss.
    pub model: Model<T>,
    pub evals: Vec<EvalPoint>,
    /// Training loss of every step, in order.
    pub losses: Vec<f64>,
    pub best_step: usize,
    pub steps: usize,
}

/// Mean per-character loss and accuracy of `params` on `windows`, padding
/// excluded.
pub fn evaluate_windows<T: Scalar>(
    params: &ModelParams<T>,
    config: &ModelConfig,
    windows: &[Window],
    batch: usize,
) -> Result<(f64, f64)> {
    let (mut loss, mut hits, mut n) = (0.0, 0usize, 0usize);
    for chunk in windows.chunks(batch.max(1)) {
        let ids: Vec<&[u32]> = chunk.iter().map(|w| w.char_ids.as_slice()).collect();
        let trace = forward_batch(params, config, &ids, Dropout::Off)?;
        for (b, w) in chunk.iter().enumerate() {
            for t in 0..config.window {
                if !w.loss_mask[t] {
                    continue;
                }
                let p = trace.posterior(b, t);
                loss += cross_entropy(p, w.gold[t] as usize)?.as_f64();
                hits += usize::from(argmax(p) == w.gold[t] as usize);
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::Input("evaluation set has no characters".into()));
    }
    Ok((loss / n as f64, hits as f64 / n as f64))
}

/// Trains a fresh model on tagged lines.
///
/// The training lines are reshuffled into a new stream every epoch. Dev is
/// scored every `eval_every` steps and after the last step; the returned
/// model is the best-scoring checkpoint. `on_eval` sees every evaluation
/// together with the current model and may return `true` to stop.
pub fn train_lines<T: Scalar>(
    train: &[(String, String)],
    dev: &[(String, String)],
    labels: LabelSet,
    settings: &TrainSettings,
    on_eval: &mut dyn FnMut(&EvalPoint, &Model<T>) -> bool,
) -> Result<TrainOutcome<T>> {
    settings.validate()?;
    if labels.len() < 2 {
        return Err(Error::Input("training needs at least two languages".into()));
    }
    let root = Rng::new(settings.seed);
    let mut init_rng = root.derive(1);
    let mut order_rng = root.derive(2);
    let mut dropout_rng = root.derive(3);

    let first = build_stream(train, &labels, true, &mut order_rng)?;
    if first.is_empty() {
        return Err(Error::Input("training data has no characters".into()));
    }
    let vocab = build_vocab([&first], settings.min_count);
    let dev_stream = build_stream(dev, &labels, false, &mut order_rng)?;
    if dev_stream.is_empty() {
        return Err(Error::Input("dev data has no characters".into()));
    }
    let config = ModelConfig {
        embed_dim: settings.embed_dim,
        hidden_dim: settings.hidden_dim,
        window: settings.window,
        vocab_size: vocab.len(),
        label_count: labels.len(),
        keep_prob: settings.keep_prob,
    };
    config.validate()?;
    let dev_windows = make_windows(&dev_stream, &vocab, config.window);
    let mut params = ModelParams::<T>::init(&config, &mut init_rng)?;
    let mut optimizer = Optimizer::new(&params, settings.adam);

    let mut best = (f64::INFINITY, params.clone(), 0usize);
    let mut evals = Vec::new();
    let mut losses = Vec::with_capacity(settings.max_steps);
    let mut since_eval = Vec::new();
    let mut stale = 0;
    let mut step = 0;
    let mut stream = Some(first);
    'epochs: loop {
        let s = match stream.take() {
            Some(s) => s,
            None => build_stream(train, &labels, true, &mut order_rng)?,
        };
        let windows = make_windows(&s, &vocab, config.window);
        for b in batch_windows(windows.len(), settings.batch, &mut order_rng, true) {
            let loss = train_step(&mut params, &config, &b.windows(&windows), &mut optimizer, &mut dropout_rng)?;
            step += 1;
            losses.push(loss.as_f64());
            since_eval.push(loss.as_f64());
            let last = step == settings.max_steps;
            if step % settings.eval_every == 0 || last {
                let (dev_loss, dev_acc) = evaluate_windows(&params, &config, &dev_windows, settings.batch)?;
                let point = EvalPoint {
                    step,
                    train_loss: since_eval.iter().sum::<f64>() / since_eval.len() as f64,
                    dev_loss,
                    dev_acc,
                };
                since_eval.clear();
                evals.push(point);
                if dev_loss < best.0 {
                    best = (dev_loss, params.clone(), step);
                    stale = 0;
                } else {
                    stale += 1;
                }
                let current = Model {
                    config,
                    vocab: vocab.clone(),
                    labels: labels.clone(),
                    params: params.clone(),
                };
                let stop = on_eval(&point, &current);
                if last || stop || (settings.patience > 0 && stale >= settings.patience) {
                    break 'epochs;
                }
            }
        }
    }
    let (_, best_params, best_step) = best;
    Ok(TrainOutcome {
        model: Model::new(config, vocab, labels, best_params)?,
        evals,
        losses,
        best_step,
        steps: step,
    })
}

/// Options of the `train` command.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainRunConfig {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub dev_fraction: f64,
    pub precision: Precision,
    pub settings: TrainSettings,
}

/// Builds the corpus from a manifest, trains, writes the best checkpoint to
/// `out` and one log line per evaluation to `log`.
pub fn cmd_train(run: &TrainRunConfig, log: &mut dyn Write) -> Result<Vec<EvalPoint>> {
    let entries = parse_manifest(&run.manifest)?;
    if entries.len() < 2 {
        return Err(Error::Input(format!(
            "{}: training needs at least two languages, manifest lists {}",
            run.manifest.display(),
            entries.len()
        )));
    }
    let labels = LabelSet::new(entries.iter().map(|e| e.tag.clone()))?;
    let mut pairs = Vec::new();
    for entry in &entries {
        let lang = load_language(entry)?;
        if lang.lines.is_empty() {
            return Err(Error::Input(format!("no usable lines for language `{}`", lang.tag)));
        }
        pairs.extend(lang.lines.into_iter().map(|l| (entry.tag.clone(), l)));
    }
    let (train, dev, _) = split_lines(pairs, run.dev_fraction, 0.0, &mut Rng::new(run.settings.seed).derive(0))?;
    match run.precision {
        Precision::Single => train_and_save::<f32>(&train, &dev, labels, run, log),
        Precision::Double => train_and_save::<f64>(&train, &dev, labels, run, log),
    }
}

fn train_and_save<T: Scalar>(
    train: &[(String, String)],
    dev: &[(String, String)],
    labels: LabelSet,
    run: &TrainRunConfig,
    log: &mut dyn Write,
) -> Result<Vec<EvalPoint>> {
    let mut write_err = None;
    let mut on_eval = |p: &EvalPoint, _: &Model<T>| {
        if let Err(e) = writeln!(log, "{p}") {
            write_err = Some(e);
            return true;
        }
        false
    };
    let out = train_lines::<T>(train, dev, labels, &run.settings, &mut on_eval)?;
    if let Some(e) = write_err {
        return Err(Error::io("<log>", e));
    }
    save_model(&out.model, &run.out)?;
    Ok(out.evals)
}
