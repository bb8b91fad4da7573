use crate::error::{Error, Result};
use crate::network::{GruBlock, ModelConfig, ModelParams};
use crate::numerics::{fill_dropout_mask, gemm, sigmoid, softmax_in_place, MatMut, MatRef, Rng};
use crate::scalar::Scalar;
use crate::corpus::PAD;

/// How dropout is applied to the embedding vectors of a forward pass.
pub enum Dropout<'a, T> {
    Off,
    /// Fresh inverted-dropout masks, one per timestep and window.
    Sample { rng: &'a mut Rng, keep_prob: f64 },
    /// Replay masks laid out like [`ForwardTrace::dropout`].
    Fixed(&'a [T]),
}

/// Activations of one recurrent direction, each `(window * batch) x hidden`
/// in time-major row order.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionTrace<T> {
    pub z: Vec<T>,
    pub r: Vec<T>,
    pub cand: Vec<T>,
    pub h: Vec<T>,
}

/// Cached forward pass over a batch of windows.
///
/// Row `t * batch + b` of every buffer belongs to timestep `t` of window `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace<T> {
    pub batch: usize,
    pub window: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub label_count: usize,
    pub char_ids: Vec<u32>,
    /// Dropout masks (`rows x embed`) when dropout was active.
    pub dropout: Option<Vec<T>>,
    /// Embedding vectors after dropout.
    pub inputs: Vec<T>,
    pub fwd: DirectionTrace<T>,
    pub bwd: DirectionTrace<T>,
    pub logits: Vec<T>,
    pub posteriors: Vec<T>,
    /// Non-padding positions per window.
    pub valid_len: Vec<usize>,
}

impl<T: Scalar> ForwardTrace<T> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.batch * self.window
    }

    #[inline]
    pub fn row_index(&self, b: usize, t: usize) -> usize {
        t * self.batch + b
    }

    pub fn posterior(&self, b: usize, t: usize) -> &[T] {
        let r = self.row_index(b, t);
        &self.posteriors[r * self.label_count..(r + 1) * self.label_count]
    }

    pub fn logits_at(&self, b: usize, t: usize) -> &[T] {
        let r = self.row_index(b, t);
        &self.logits[r * self.label_count..(r + 1) * self.label_count]
    }
}

/// Forward pass over one window. In `train_mode` a fresh dropout mask with
/// the configured keep probability multiplies each embedding vector.
pub fn forward_window<T: Scalar>(
    params: &ModelParams<T>,
    config: &ModelConfig,
    char_ids: &[u32],
    train_mode: bool,
    rng: &mut Rng,
) -> Result<ForwardTrace<T>> {
    let dropout = if train_mode {
        Dropout::Sample {
            rng,
            keep_prob: config.keep_prob,
        }
    } else {
        Dropout::Off
    };
    forward_batch(params, config, &[char_ids], dropout)
}

/// Forward pass over a batch of equally sized windows.
pub fn forward_batch<T: Scalar>(
    params: &ModelParams<T>,
    config: &ModelConfig,
    windows: &[&[u32]],
    dropout: Dropout<'_, T>,
) -> Result<ForwardTrace<T>> {
    config.validate()?;
    if windows.is_empty() {
        return Err(Error::Input("forward pass over an empty batch".into()));
    }
    let (bsz, tl) = (windows.len(), config.window);
    let (e, h, l) = (config.embed_dim, config.hidden_dim, config.label_count);
    let n = bsz * tl;

    let mut char_ids = vec![PAD; n];
    let mut valid_len = vec![0usize; bsz];
    for (b, w) in windows.iter().enumerate() {
        if w.len() != tl {
            return Err(Error::Dimension {
                op: "forward_batch",
                left: (tl, 1),
                right: (w.len(), 1),
            });
        }
        for (t, &id) in w.iter().enumerate() {
            if id as usize >= config.vocab_size {
                return Err(Error::Vocabulary {
                    id,
                    size: config.vocab_size,
                });
            }
            char_ids[t * bsz + b] = id;
            if id != PAD {
                valid_len[b] += 1;
            }
        }
    }

    let mut inputs = vec![T::zero(); n * e];
    for (row, &id) in char_ids.iter().enumerate() {
        inputs[row * e..(row + 1) * e].copy_from_slice(params.embedding.row(id as usize));
    }

    let masks = match dropout {
        Dropout::Off => None,
        Dropout::Sample { rng, keep_prob } => {
            let mut m = vec![T::zero(); n * e];
            for b in 0..bsz {
                for t in 0..tl {
                    let row = t * bsz + b;
                    fill_dropout_mask(rng, &mut m[row * e..(row + 1) * e], keep_prob)?;
                }
            }
            Some(m)
        }
        Dropout::Fixed(m) => {
            if m.len() != n * e {
                return Err(Error::Dimension {
                    op: "forward_batch dropout",
                    left: (n, e),
                    right: (m.len(), 1),
                });
            }
            Some(m.to_vec())
        }
    };
    if let Some(m) = &masks {
        for (x, &k) in inputs.iter_mut().zip(m) {
            *x *= k;
        }
    }

    let fwd = run_direction(&params.forward, &inputs, bsz, tl, false)?;
    let bwd = run_direction(&params.backward, &inputs, bsz, tl, true)?;

    let mut logits = Vec::with_capacity(n * l);
    for _ in 0..n {
        logits.extend_from_slice(&params.out_bias);
    }
    gemm(
        T::one(),
        MatRef::new(&fwd.h, n, h),
        params.out_fwd.view().t(),
        T::one(),
        MatMut::new(&mut logits, n, l),
    )?;
    gemm(
        T::one(),
        MatRef::new(&bwd.h, n, h),
        params.out_bwd.view().t(),
        T::one(),
        MatMut::new(&mut logits, n, l),
    )?;
    let mut posteriors = logits.clone();
    for row in posteriors.chunks_mut(l) {
        softmax_in_place(row);
    }

    Ok(ForwardTrace {
        batch: bsz,
        window: tl,
        embed_dim: e,
        hidden_dim: h,
        label_count: l,
        char_ids,
        dropout: masks,
        inputs,
        fwd,
        bwd,
        logits,
        posteriors,
        valid_len,
    })
}

fn bias_rows<T: Scalar>(bias: &[T], rows: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(rows * bias.len());
    for _ in 0..rows {
        out.extend_from_slice(bias);
    }
    out
}

/// Runs one direction over all timesteps. The reverse direction starts at
/// the last timestep with a zero state.
pub(crate) fn run_direction<T: Scalar>(
    block: &GruBlock<T>,
    inputs: &[T],
    bsz: usize,
    tl: usize,
    reverse: bool,
) -> Result<DirectionTrace<T>> {
    let (e, h) = (block.embed_dim(), block.hidden_dim());
    let n = bsz * tl;
    let x = MatRef::new(inputs, n, e);

    let mut z = bias_rows(&block.b_z, n);
    let mut r = bias_rows(&block.b_r, n);
    let mut cand = bias_rows(&block.b_h, n);
    gemm(T::one(), x, block.w_z.view().t(), T::one(), MatMut::new(&mut z, n, h))?;
    gemm(T::one(), x, block.w_r.view().t(), T::one(), MatMut::new(&mut r, n, h))?;
    gemm(T::one(), x, block.w_h.view().t(), T::one(), MatMut::new(&mut cand, n, h))?;

    let mut hs = vec![T::zero(); n * h];
    let mut hp = vec![T::zero(); bsz * h];
    let mut rh = vec![T::zero(); bsz * h];
    let blk = bsz * h;
    for step in 0..tl {
        let t = if reverse { tl - 1 - step } else { step };
        let span = t * blk..(t + 1) * blk;

        let zt = &mut z[span.clone()];
        gemm(T::one(), MatRef::new(&hp, bsz, h), block.v_z.view().t(), T::one(), MatMut::new(zt, bsz, h))?;
        zt.iter_mut().for_each(|v| *v = sigmoid(*v));

        let rt = &mut r[span.clone()];
        gemm(T::one(), MatRef::new(&hp, bsz, h), block.v_r.view().t(), T::one(), MatMut::new(rt, bsz, h))?;
        rt.iter_mut().for_each(|v| *v = sigmoid(*v));

        for ((o, &a), &b) in rh.iter_mut().zip(rt.iter()).zip(&hp) {
            *o = a * b;
        }
        let ct = &mut cand[span.clone()];
        gemm(T::one(), MatRef::new(&rh, bsz, h), block.v_h.view().t(), T::one(), MatMut::new(ct, bsz, h))?;
        ct.iter_mut().for_each(|v| *v = v.tanh());

        let zt = &z[span.clone()];
        let ht = &mut hs[span];
        for i in 0..blk {
            ht[i] = (T::one() - zt[i]) * hp[i] + zt[i] * ct[i];
        }
        hp.copy_from_slice(ht);
    }
    Ok(DirectionTrace { z, r, cand, h: hs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::gru_step;

    fn tiny(labels: usize) -> ModelConfig {
        ModelConfig {
            embed_dim: 4,
            hidden_dim: 5,
            window: 9,
            vocab_size: 12,
            label_count: labels,
            keep_prob: 0.5,
        }
    }

    fn ids(rng: &mut Rng, cfg: &ModelConfig) -> Vec<u32> {
        (0..cfg.window).map(|_| rng.below(cfg.vocab_size) as u32).collect()
    }

    /// Unbatched straight-line evaluation built on `gru_step`.
    fn oracle_logits(p: &ModelParams<f64>, cfg: &ModelConfig, ids: &[u32]) -> Vec<Vec<f64>> {
        let xs: Vec<Vec<f64>> = ids.iter().map(|&i| p.embedding.row(i as usize).to_vec()).collect();
        let mut hf = vec![vec![0.0; cfg.hidden_dim]; ids.len()];
        let mut state = vec![0.0; cfg.hidden_dim];
        for t in 0..ids.len() {
            state = gru_step(&p.forward, &xs[t], &state).unwrap().into_vec();
            hf[t] = state.clone();
        }
        let mut hb = vec![vec![0.0; cfg.hidden_dim]; ids.len()];
        let mut state = vec![0.0; cfg.hidden_dim];
        for t in (0..ids.len()).rev() {
            state = gru_step(&p.backward, &xs[t], &state).unwrap().into_vec();
            hb[t] = state.clone();
        }
        (0..ids.len())
            .map(|t| {
                (0..cfg.label_count)
                    .map(|k| {
                        let mut s = p.out_bias[k];
                        for j in 0..cfg.hidden_dim {
                            s += p.out_fwd.get(k, j) * hf[t][j] + p.out_bwd.get(k, j) * hb[t][j];
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn logits_match_unbatched_oracle() {
        let cfg = tiny(3);
        let mut rng = Rng::new(21);
        let mut p = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
        for x in p.out_bias.iter_mut().chain(p.forward.b_z.iter_mut()).chain(p.backward.b_h.iter_mut()) {
            *x = rng.uniform_range(-0.3, 0.3);
        }
        let windows: Vec<Vec<u32>> = (0..3).map(|_| ids(&mut rng, &cfg)).collect();
        let refs: Vec<&[u32]> = windows.iter().map(|w| w.as_slice()).collect();
        let trace = forward_batch(&p, &cfg, &refs, Dropout::Off).unwrap();
        for (b, w) in windows.iter().enumerate() {
            let expect = oracle_logits(&p, &cfg, w);
            for t in 0..cfg.window {
                for (g, e) in trace.logits_at(b, t).iter().zip(&expect[t]) {
                    assert!((g - e).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn posteriors_are_distributions() {
        let cfg = ModelConfig {
            window: 200,
            ..tiny(5)
        };
        let mut rng = Rng::new(1);
        let p = ModelParams::<f32>::init(&cfg, &mut rng).unwrap();
        let w = ids(&mut rng, &cfg);
        let trace = forward_window(&p, &cfg, &w, false, &mut rng).unwrap();
        for t in 0..200 {
            let post = trace.posterior(0, t);
            let s: f32 = post.iter().sum();
            assert!((s - 1.0).abs() < 1e-6);
            assert!(post.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn zero_params_give_uniform_posteriors() {
        let cfg = tiny(4);
        let p = ModelParams::<f64>::zeros(&cfg);
        let w: Vec<u32> = (0..cfg.window as u32).map(|i| i % 12).collect();
        let trace = forward_window(&p, &cfg, &w, false, &mut Rng::new(0)).unwrap();
        assert!(trace.posteriors.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn inference_is_pure() {
        let cfg = tiny(3);
        let mut rng = Rng::new(8);
        let p = ModelParams::<f32>::init(&cfg, &mut rng).unwrap();
        let w = ids(&mut rng, &cfg);
        let a = forward_window(&p, &cfg, &w, false, &mut Rng::new(1)).unwrap();
        let b = forward_window(&p, &cfg, &w, false, &mut Rng::new(2)).unwrap();
        assert_eq!(a, b);
        let c = forward_window(&p, &cfg, &w, true, &mut Rng::new(1)).unwrap();
        assert!(c.dropout.is_some());
        assert_ne!(a.logits, c.logits);
    }

    #[test]
    fn batching_does_not_change_results() {
        let cfg = tiny(3);
        let mut rng = Rng::new(12);
        let p = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
        let a = ids(&mut rng, &cfg);
        let b = ids(&mut rng, &cfg);
        let both = forward_batch(&p, &cfg, &[&a, &b], Dropout::Off).unwrap();
        let solo = forward_batch(&p, &cfg, &[&b], Dropout::Off).unwrap();
        for t in 0..cfg.window {
            for (x, y) in both.logits_at(1, t).iter().zip(solo.logits_at(0, t)) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gates_in_open_interval() {
        let cfg = tiny(3);
        let mut rng = Rng::new(31);
        let p = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
        let w = ids(&mut rng, &cfg);
        let tr = forward_window(&p, &cfg, &w, true, &mut rng).unwrap();
        for d in [&tr.fwd, &tr.bwd] {
            assert!(d.z.iter().chain(&d.r).all(|&g| g > 0.0 && g < 1.0));
            assert!(d.h.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn rejects_bad_ids_and_lengths() {
        let cfg = tiny(3);
        let p = ModelParams::<f64>::zeros(&cfg);
        let mut w = vec![2u32; cfg.window];
        w[3] = 12;
        assert!(matches!(
            forward_window(&p, &cfg, &w, false, &mut Rng::new(0)),
            Err(Error::Vocabulary { id: 12, .. })
        ));
        assert!(forward_window(&p, &cfg, &w[..4], false, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn valid_len_counts_non_padding() {
        let cfg = tiny(3);
        let p = ModelParams::<f32>::zeros(&cfg);
        let mut w = vec![3u32; cfg.window];
        w[7] = PAD;
        w[8] = PAD;
        let tr = forward_window(&p, &cfg, &w, false, &mut Rng::new(0)).unwrap();
        assert_eq!(tr.valid_len, vec![cfg.window - 2]);
    }
}
