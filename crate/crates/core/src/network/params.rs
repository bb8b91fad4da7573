use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng, Vector};
use crate::scalar::Scalar;

/// Shape hyperparameters of the tagger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    /// Hidden units per direction.
    pub hidden_dim: usize,
    pub window: usize,
    pub vocab_size: usize,
    pub label_count: usize,
    /// Keep probability of the dropout on embedding vectors.
    pub keep_prob: f64,
}

impl ModelConfig {
    pub const DEFAULT_EMBED: usize = 200;
    pub const DEFAULT_HIDDEN: usize = 500;
    pub const DEFAULT_WINDOW: usize = 200;
    pub const DEFAULT_KEEP_PROB: f64 = 0.5;

    pub fn new(vocab_size: usize, label_count: usize) -> Self {
        ModelConfig {
            embed_dim: Self::DEFAULT_EMBED,
            hidden_dim: Self::DEFAULT_HIDDEN,
            window: Self::DEFAULT_WINDOW,
            vocab_size,
            label_count,
            keep_prob: Self::DEFAULT_KEEP_PROB,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("window", self.window),
            ("vocab_size", self.vocab_size),
            ("label_count", self.label_count),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Parameter(format!("{name} must be at least 1")));
            }
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return Err(Error::Parameter(format!(
                "keep_prob must lie in (0, 1], got {}",
                self.keep_prob
            )));
        }
        Ok(())
    }
}

/// Weights of one GRU direction.
///
/// `w_*` map the embedding into the gate (`hidden x embed`), `v_*` are the
/// recurrent weights (`hidden x hidden`) and `b_*` the biases. `z` is the
/// update gate, `r` the reset gate and `h` the candidate state.
#[derive(Clone, Debug, PartialEq)]
pub struct GruBlock<T> {
    pub w_z: Matrix<T>,
    pub w_r: Matrix<T>,
    pub w_h: Matrix<T>,
    pub v_z: Matrix<T>,
    pub v_r: Matrix<T>,
    pub v_h: Matrix<T>,
    pub b_z: Vector<T>,
    pub b_r: Vector<T>,
    pub b_h: Vector<T>,
}

impl<T: Scalar> GruBlock<T> {
    pub fn zeros(embed: usize, hidden: usize) -> Self {
        GruBlock {
            w_z: Matrix::zeros(hidden, embed),
            w_r: Matrix::zeros(hidden, embed),
            w_h: Matrix::zeros(hidden, embed),
            v_z: Matrix::zeros(hidden, hidden),
            v_r: Matrix::zeros(hidden, hidden),
            v_h: Matrix::zeros(hidden, hidden),
            b_z: Vector::zeros(hidden),
            b_r: Vector::zeros(hidden),
            b_h: Vector::zeros(hidden),
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.w_z.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_z.rows()
    }

    fn tensors(&self) -> [&[T]; 9] {
        [
            self.w_z.as_slice(),
            self.w_r.as_slice(),
            self.w_h.as_slice(),
            self.v_z.as_slice(),
            self.v_r.as_slice(),
            self.v_h.as_slice(),
            self.b_z.as_slice(),
            self.b_r.as_slice(),
            self.b_h.as_slice(),
        ]
    }

    fn tensors_mut(&mut self) -> [&mut [T]; 9] {
        [
            self.w_z.as_mut_slice(),
            self.w_r.as_mut_slice(),
            self.w_h.as_mut_slice(),
            self.v_z.as_mut_slice(),
            self.v_r.as_mut_slice(),
            self.v_h.as_mut_slice(),
            self.b_z.as_mut_slice(),
            self.b_r.as_mut_slice(),
            self.b_h.as_mut_slice(),
        ]
    }
}

const BLOCK_NAMES: [&str; 9] = ["w_z", "w_r", "w_h", "v_z", "v_r", "v_h", "b_z", "b_r", "b_h"];

/// Every trainable tensor. Gradients use the same type.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    /// `vocab_size x embed_dim`.
    pub embedding: Matrix<T>,
    pub forward: GruBlock<T>,
    pub backward: GruBlock<T>,
    /// `label_count x hidden_dim`, applied to forward states.
    pub out_fwd: Matrix<T>,
    /// `label_count x hidden_dim`, applied to backward states.
    pub out_bwd: Matrix<T>,
    pub out_bias: Vector<T>,
}

/// Name and `(rows, cols)` of every tensor, in the canonical order used by
/// [`ModelParams::tensors`] and the model file. Vectors have one column.
pub fn tensor_layout(config: &ModelConfig) -> Vec<(String, usize, usize)> {
    let (e, h, l) = (config.embed_dim, config.hidden_dim, config.label_count);
    let mut out = vec![("embedding".to_string(), config.vocab_size, e)];
    for dir in ["fwd", "bwd"] {
        for (i, name) in BLOCK_NAMES.iter().enumerate() {
            let shape = match i {
                0..=2 => (h, e),
                3..=5 => (h, h),
                _ => (h, 1),
            };
            out.push((format!("{dir}.{name}"), shape.0, shape.1));
        }
    }
    out.push(("out_fwd".into(), l, h));
    out.push(("out_bwd".into(), l, h));
    out.push(("out_bias".into(), l, 1));
    out
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(config: &ModelConfig) -> Self {
        let (e, h, l) = (config.embed_dim, config.hidden_dim, config.label_count);
        ModelParams {
            embedding: Matrix::zeros(config.vocab_size, e),
            forward: GruBlock::zeros(e, h),
            backward: GruBlock::zeros(e, h),
            out_fwd: Matrix::zeros(l, h),
            out_bwd: Matrix::zeros(l, h),
            out_bias: Vector::zeros(l),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let (e, h) = (self.forward.embed_dim(), self.forward.hidden_dim());
        ModelParams {
            embedding: Matrix::zeros(self.embedding.rows(), self.embedding.cols()),
            forward: GruBlock::zeros(e, h),
            backward: GruBlock::zeros(e, h),
            out_fwd: Matrix::zeros(self.out_fwd.rows(), h),
            out_bwd: Matrix::zeros(self.out_bwd.rows(), h),
            out_bias: Vector::zeros(self.out_bias.len()),
        }
    }

    /// Uniform fan-based initialization: every matrix is drawn from
    /// `[-s, s]` with `s = sqrt(6 / (rows + cols))`; biases start at zero.
    pub fn init(config: &ModelConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let mut p = Self::zeros(config);
        let fill = |m: &mut Matrix<T>, rng: &mut Rng| {
            let s = init_bound(m.rows(), m.cols());
            for x in m.as_mut_slice() {
                *x = T::of(rng.uniform_range(-s, s));
            }
        };
        fill(&mut p.embedding, rng);
        for block in [&mut p.forward, &mut p.backward] {
            for m in [
                &mut block.w_z,
                &mut block.w_r,
                &mut block.w_h,
                &mut block.v_z,
                &mut block.v_r,
                &mut block.v_h,
            ] {
                fill(m, rng);
            }
        }
        fill(&mut p.out_fwd, rng);
        fill(&mut p.out_bwd, rng);
        Ok(p)
    }

    /// All tensors as flat slices in canonical order (see [`tensor_layout`]).
    pub fn tensors(&self) -> Vec<&[T]> {
        let mut out = vec![self.embedding.as_slice()];
        out.extend(self.forward.tensors());
        out.extend(self.backward.tensors());
        out.push(self.out_fwd.as_slice());
        out.push(self.out_bwd.as_slice());
        out.push(self.out_bias.as_slice());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = vec![self.embedding.as_mut_slice()];
        out.extend(self.forward.tensors_mut());
        out.extend(self.backward.tensors_mut());
        out.push(self.out_fwd.as_mut_slice());
        out.push(self.out_bwd.as_mut_slice());
        out.push(self.out_bias.as_mut_slice());
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// Checks every tensor shape against `config`.
    pub fn check_shapes(&self, config: &ModelConfig) -> Result<()> {
        for ((_, rows, cols), t) in tensor_layout(config).into_iter().zip(self.tensors()) {
            if t.len() != rows * cols {
                return Err(Error::Dimension {
                    op: "check_shapes",
                    left: (rows, cols),
                    right: (t.len(), 1),
                });
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        let block = |b: &GruBlock<T>| GruBlock {
            w_z: b.w_z.cast(),
            w_r: b.w_r.cast(),
            w_h: b.w_h.cast(),
            v_z: b.v_z.cast(),
            v_r: b.v_r.cast(),
            v_h: b.v_h.cast(),
            b_z: b.b_z.cast(),
            b_r: b.b_r.cast(),
            b_h: b.b_h.cast(),
        };
        ModelParams {
            embedding: self.embedding.cast(),
            forward: block(&self.forward),
            backward: block(&self.backward),
            out_fwd: self.out_fwd.cast(),
            out_bwd: self.out_bwd.cast(),
            out_bias: self.out_bias.cast(),
        }
    }
}

pub(crate) fn init_bound(rows: usize, cols: usize) -> f64 {
    (6.0 / (rows + cols) as f64).sqrt()
}
