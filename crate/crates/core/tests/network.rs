mod common;

use charlid::network::{backward_batch, forward_batch, tensor_layout, Dropout, ModelParams};
use charlid::numerics::Rng;
use common::*;

#[test]
fn gradients_match_finite_differences_with_dropout_and_padding() {
    let cfg = tiny_config();
    let mut rng = Rng::new(2718);
    let mut params = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
    // Nonzero biases so their gradients are exercised away from zero.
    for t in params.tensors_mut() {
        if t.len() == cfg.hidden_dim || t.len() == cfg.label_count {
            for x in t.iter_mut() {
                *x = rng.uniform_range(-0.5, 0.5);
            }
        }
    }
    let ids: Vec<Vec<u32>> = (0..2).map(|_| random_ids(&mut rng, 12, 10)).collect();
    let gold: Vec<Vec<u32>> = (0..2).map(|_| random_ids(&mut rng, 12, 3)).collect();
    let mut mask = vec![vec![true; 12]; 2];
    mask[1][9..].iter_mut().for_each(|m| *m = false);
    let id_refs: Vec<&[u32]> = ids.iter().map(|v| v.as_slice()).collect();
    let gold_refs: Vec<&[u32]> = gold.iter().map(|v| v.as_slice()).collect();
    let mask_refs: Vec<&[bool]> = mask.iter().map(|v| v.as_slice()).collect();

    let trace = forward_batch(
        &params,
        &cfg,
        &id_refs,
        Dropout::Sample {
            rng: &mut rng,
            keep_prob: cfg.keep_prob,
        },
    )
    .unwrap();
    let masks = trace.dropout.clone().unwrap();
    let (grads, loss) = backward_batch(&params, &trace, &gold_refs, &mask_refs).unwrap();
    let reference = reference_loss(&params, &cfg, &id_refs, &gold_refs, &mask_refs, Some(&masks));
    assert!((loss - reference).abs() < 1e-12);

    let layout = tensor_layout(&cfg);
    for (ti, rel, norm) in
        finite_difference_errors(&params, &grads, &cfg, &id_refs, &gold_refs, &mask_refs, Some(&masks), 1e-5)
    {
        assert!(rel < 1e-4, "{}: relative error {rel:e}", layout[ti].0);
        assert!(norm > 0.0, "{}: zero gradient", layout[ti].0);
    }
}
