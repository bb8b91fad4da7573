#![allow(dead_code)]

use charlid::network::{forward_batch, Dropout, ModelConfig, ModelParams};
use charlid::numerics::Rng;

/// Configuration used for gradient verification.
pub fn tiny_config() -> ModelConfig {
    ModelConfig {
        embed_dim: 4,
        hidden_dim: 6,
        window: 12,
        vocab_size: 10,
        label_count: 3,
        keep_prob: 0.5,
    }
}

/// Loss recomputed from posteriors alone: per-window mean cross-entropy over
/// masked-in steps, then the mean over windows.
pub fn reference_loss(
    params: &ModelParams<f64>,
    config: &ModelConfig,
    ids: &[&[u32]],
    gold: &[&[u32]],
    mask: &[&[bool]],
    dropout: Option<&[f64]>,
) -> f64 {
    let d = match dropout {
        Some(m) => Dropout::Fixed(m),
        None => Dropout::Off,
    };
    let tr = forward_batch(params, config, ids, d).unwrap();
    let mut total = 0.0;
    for b in 0..ids.len() {
        let mut s = 0.0;
        let mut n = 0usize;
        for t in 0..config.window {
            if mask[b][t] {
                s -= tr.posterior(b, t)[gold[b][t] as usize].ln();
                n += 1;
            }
        }
        if n > 0 {
            total += s / n as f64;
        }
    }
    total / ids.len() as f64
}

/// Per-tensor normwise relative error `|a - n| / max(|a|, |n|)` between the
/// analytic gradient and central finite differences.
pub fn finite_difference_errors(
    params: &ModelParams<f64>,
    analytic: &ModelParams<f64>,
    config: &ModelConfig,
    ids: &[&[u32]],
    gold: &[&[u32]],
    mask: &[&[bool]],
    dropout: Option<&[f64]>,
    step: f64,
) -> Vec<(usize, f64, f64)> {
    let mut probe = params.clone();
    let count = params.tensors().len();
    let mut out = Vec::new();
    for ti in 0..count {
        let len = params.tensors()[ti].len();
        let mut numeric = vec![0.0; len];
        for i in 0..len {
            let orig = probe.tensors()[ti][i];
            probe.tensors_mut()[ti][i] = orig + step;
            let up = reference_loss(&probe, config, ids, gold, mask, dropout);
            probe.tensors_mut()[ti][i] = orig - step;
            let down = reference_loss(&probe, config, ids, gold, mask, dropout);
            probe.tensors_mut()[ti][i] = orig;
            numeric[i] = (up - down) / (2.0 * step);
        }
        let a = analytic.tensors()[ti];
        let diff: f64 = a.iter().zip(&numeric).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nn: f64 = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
        let denom = na.max(nn);
        let rel = if denom == 0.0 { 0.0 } else { diff / denom };
        out.push((ti, rel, na));
    }
    out
}

pub fn random_ids(rng: &mut Rng, n: usize, vocab: usize) -> Vec<u32> {
    (0..n).map(|_| rng.below(vocab) as u32).collect()
}

/// A model that labels every character by a fixed lookup, ignoring context.
///
/// Each `(tag, chars)` pair assigns the tag to those characters. The forward
/// direction copies a scaled one-hot embedding into its state at every step
/// (update gate saturated open); the backward direction is silenced.
pub fn lookup_model(groups: &[(&str, &str)], window: usize) -> charlid::Model<f32> {
    use charlid::corpus::{LabelSet, Vocabulary};
    let labels = LabelSet::new(groups.iter().map(|g| g.0)).unwrap();
    let mut cps = Vec::new();
    let mut owner = Vec::new();
    for (i, (_, chars)) in groups.iter().enumerate() {
        for c in chars.chars() {
            cps.push(c);
            owner.push(i);
        }
    }
    let vocab = Vocabulary::from_codepoints(cps).unwrap();
    let l = groups.len();
    let config = ModelConfig {
        embed_dim: l,
        hidden_dim: l,
        window,
        vocab_size: vocab.len(),
        label_count: l,
        keep_prob: 1.0,
    };
    let mut p = ModelParams::<f32>::zeros(&config);
    for (k, &o) in owner.iter().enumerate() {
        p.embedding.set(k + 2, o, 3.0);
    }
    for i in 0..l {
        p.forward.w_h.set(i, i, 1.0);
        p.forward.b_z.as_mut_slice()[i] = 20.0;
        p.out_fwd.set(i, i, 10.0);
    }
    charlid::Model::new(config, vocab, labels, p).unwrap()
}
