use crate::corpus::{window_ids, LabelSet, Vocabulary};
use crate::error::{Error, Result};
use crate::network::{forward_batch, Dropout, ModelConfig, ModelParams};
use crate::scalar::Scalar;

/// Windows evaluated together during inference.
pub const INFERENCE_BATCH: usize = 64;

/// Trained tagger together with its vocabulary and label set.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub labels: LabelSet,
    pub params: ModelParams<T>,
}

impl<T: Scalar> Model<T> {
    pub fn new(config: ModelConfig, vocab: Vocabulary, labels: LabelSet, params: ModelParams<T>) -> Result<Self> {
        config.validate()?;
        if vocab.len() != config.vocab_size {
            return Err(Error::Invariant(format!(
                "vocabulary has {} entries but config expects {}",
                vocab.len(),
                config.vocab_size
            )));
        }
        if labels.len() != config.label_count {
            return Err(Error::Invariant(format!(
                "label set has {} tags but config expects {}",
                labels.len(),
                config.label_count
            )));
        }
        params.check_shapes(&config)?;
        Ok(Model {
            config,
            vocab,
            labels,
            params,
        })
    }

    /// Per-character posteriors (`ids.len() x label_count`, row-major) with
    /// padding positions stripped.
    pub fn posteriors(&self, ids: &[u32]) -> Result<Vec<T>> {
        self.run(ids, false)
    }

    /// Per-character logits, padding stripped.
    pub fn logits(&self, ids: &[u32]) -> Result<Vec<T>> {
        self.run(ids, true)
    }

    fn run(&self, ids: &[u32], logits: bool) -> Result<Vec<T>> {
        let l = self.config.label_count;
        let windows = window_ids(ids, self.config.window);
        let mut out = Vec::with_capacity(ids.len() * l);
        for chunk in windows.chunks(INFERENCE_BATCH) {
            let refs: Vec<&[u32]> = chunk.iter().map(|(w, _)| w.as_slice()).collect();
            let trace = forward_batch(&self.params, &self.config, &refs, Dropout::Off)?;
            for (b, (_, real)) in chunk.iter().enumerate() {
                for t in 0..*real {
                    out.extend_from_slice(if logits {
                        trace.logits_at(b, t)
                    } else {
                        trace.posterior(b, t)
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn cast<U: Scalar>(&self) -> Model<U> {
        Model {
            config: self.config,
            vocab: self.vocab.clone(),
            labels: self.labels.clone(),
            params: self.params.cast(),
        }
    }
}
