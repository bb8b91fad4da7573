use crate::error::{Error, Result};
use crate::network::forward::DirectionTrace;
use crate::network::{ForwardTrace, GruBlock, ModelParams};
use crate::numerics::{cross_entropy, gemm, MatMut, MatRef};
use crate::scalar::Scalar;

/// Loss and exact gradients for a batch traced by [`forward_batch`](crate::network::forward_batch).
///
/// The loss of a window is the mean cross-entropy over its masked-in
/// timesteps; the batch loss is the mean over windows. Gradients flow
/// through the dropout masks recorded in the trace.
pub fn backward_batch<T: Scalar>(
    params: &ModelParams<T>,
    trace: &ForwardTrace<T>,
    gold: &[&[u32]],
    loss_mask: &[&[bool]],
) -> Result<(ModelParams<T>, T)> {
    let (bsz, tl) = (trace.batch, trace.window);
    let (e, h, l) = (trace.embed_dim, trace.hidden_dim, trace.label_count);
    let n = bsz * tl;
    if gold.len() != bsz || loss_mask.len() != bsz {
        return Err(Error::Dimension {
            op: "backward_batch",
            left: (bsz, tl),
            right: (gold.len(), loss_mask.len()),
        });
    }
    for (g, m) in gold.iter().zip(loss_mask) {
        if g.len() != tl || m.len() != tl {
            return Err(Error::Dimension {
                op: "backward_batch",
                left: (bsz, tl),
                right: (g.len(), m.len()),
            });
        }
    }

    let mut dlogits = vec![T::zero(); n * l];
    let mut total = T::zero();
    let batch_scale = T::one() / T::of(bsz as f64);
    for b in 0..bsz {
        let count = loss_mask[b].iter().filter(|&&m| m).count();
        if count == 0 {
            continue;
        }
        let scale = batch_scale / T::of(count as f64);
        let mut window_loss = T::zero();
        for t in 0..tl {
            if !loss_mask[b][t] {
                continue;
            }
            let g = gold[b][t] as usize;
            let post = trace.posterior(b, t);
            window_loss += cross_entropy(post, g)?;
            let row = trace.row_index(b, t);
            let d = &mut dlogits[row * l..(row + 1) * l];
            for (k, (dv, &p)) in d.iter_mut().zip(post).enumerate() {
                *dv = (p - if k == g { T::one() } else { T::zero() }) * scale;
            }
        }
        total += window_loss / T::of(count as f64);
    }
    let loss = total * batch_scale;

    let mut grads = params.zeros_like();

    let dl = MatRef::new(&dlogits, n, l);
    for row in dlogits.chunks(l) {
        for (acc, &v) in grads.out_bias.iter_mut().zip(row) {
            *acc += v;
        }
    }
    gemm(T::one(), dl.t(), MatRef::new(&trace.fwd.h, n, h), T::zero(), grads.out_fwd.view_mut())?;
    gemm(T::one(), dl.t(), MatRef::new(&trace.bwd.h, n, h), T::zero(), grads.out_bwd.view_mut())?;

    let mut dh_fwd = vec![T::zero(); n * h];
    let mut dh_bwd = vec![T::zero(); n * h];
    gemm(T::one(), dl, params.out_fwd.view(), T::zero(), MatMut::new(&mut dh_fwd, n, h))?;
    gemm(T::one(), dl, params.out_bwd.view(), T::zero(), MatMut::new(&mut dh_bwd, n, h))?;

    let mut dx = vec![T::zero(); n * e];
    direction_backward(
        &params.forward,
        &trace.fwd,
        &trace.inputs,
        &dh_fwd,
        bsz,
        tl,
        false,
        &mut grads.forward,
        &mut dx,
    )?;
    direction_backward(
        &params.backward,
        &trace.bwd,
        &trace.inputs,
        &dh_bwd,
        bsz,
        tl,
        true,
        &mut grads.backward,
        &mut dx,
    )?;

    if let Some(mask) = &trace.dropout {
        for (d, &k) in dx.iter_mut().zip(mask) {
            *d *= k;
        }
    }
    for (row, &id) in trace.char_ids.iter().enumerate() {
        let target = grads.embedding.row_mut(id as usize);
        for (acc, &v) in target.iter_mut().zip(&dx[row * e..(row + 1) * e]) {
            *acc += v;
        }
    }
    Ok((grads, loss))
}

/// Backpropagation through time for one direction. Accumulates the input
/// gradient into `dx`.
#[allow(clippy::too_many_arguments)]
fn direction_backward<T: Scalar>(
    block: &GruBlock<T>,
    tr: &DirectionTrace<T>,
    inputs: &[T],
    dh_out: &[T],
    bsz: usize,
    tl: usize,
    reverse: bool,
    grads: &mut GruBlock<T>,
    dx: &mut [T],
) -> Result<()> {
    let (e, h) = (block.embed_dim(), block.hidden_dim());
    let n = bsz * tl;
    let blk = bsz * h;
    let one = T::one();

    // Previous state and reset-scaled previous state for every row.
    let mut h_prev = vec![T::zero(); n * h];
    let mut rh = vec![T::zero(); n * h];
    for t in 0..tl {
        let prev = if reverse {
            (t + 1 < tl).then_some(t + 1)
        } else {
            t.checked_sub(1)
        };
        if let Some(p) = prev {
            h_prev[t * blk..(t + 1) * blk].copy_from_slice(&tr.h[p * blk..(p + 1) * blk]);
        }
        for i in t * blk..(t + 1) * blk {
            rh[i] = tr.r[i] * h_prev[i];
        }
    }

    let mut da_z = vec![T::zero(); n * h];
    let mut da_r = vec![T::zero(); n * h];
    let mut da_h = vec![T::zero(); n * h];
    let mut carry = vec![T::zero(); blk];
    let mut dh = vec![T::zero(); blk];
    let mut drh = vec![T::zero(); blk];

    for step in (0..tl).rev() {
        let t = if reverse { tl - 1 - step } else { step };
        let s = t * blk;
        for i in 0..blk {
            dh[i] = dh_out[s + i] + carry[i];
        }
        // Candidate and update-gate paths; `carry` becomes d h_prev.
        for i in 0..blk {
            let (z, c, hp) = (tr.z[s + i], tr.cand[s + i], h_prev[s + i]);
            let g = dh[i];
            da_h[s + i] = g * z * (one - c * c);
            da_z[s + i] = g * (c - hp) * z * (one - z);
            carry[i] = g * (one - z);
        }
        gemm(
            one,
            MatRef::new(&da_h[s..s + blk], bsz, h),
            block.v_h.view(),
            T::zero(),
            MatMut::new(&mut drh, bsz, h),
        )?;
        for i in 0..blk {
            let (r, hp) = (tr.r[s + i], h_prev[s + i]);
            da_r[s + i] = drh[i] * hp * r * (one - r);
            carry[i] += drh[i] * r;
        }
        gemm(
            one,
            MatRef::new(&da_z[s..s + blk], bsz, h),
            block.v_z.view(),
            one,
            MatMut::new(&mut carry, bsz, h),
        )?;
        gemm(
            one,
            MatRef::new(&da_r[s..s + blk], bsz, h),
            block.v_r.view(),
            one,
            MatMut::new(&mut carry, bsz, h),
        )?;
    }

    let x = MatRef::new(inputs, n, e);
    let az = MatRef::new(&da_z, n, h);
    let ar = MatRef::new(&da_r, n, h);
    let ah = MatRef::new(&da_h, n, h);
    gemm(one, az.t(), x, T::zero(), grads.w_z.view_mut())?;
    gemm(one, ar.t(), x, T::zero(), grads.w_r.view_mut())?;
    gemm(one, ah.t(), x, T::zero(), grads.w_h.view_mut())?;
    gemm(one, az.t(), MatRef::new(&h_prev, n, h), T::zero(), grads.v_z.view_mut())?;
    gemm(one, ar.t(), MatRef::new(&h_prev, n, h), T::zero(), grads.v_r.view_mut())?;
    gemm(one, ah.t(), MatRef::new(&rh, n, h), T::zero(), grads.v_h.view_mut())?;
    for (bias, da) in [
        (&mut grads.b_z, &da_z),
        (&mut grads.b_r, &da_r),
        (&mut grads.b_h, &da_h),
    ] {
        for row in da.chunks(h) {
            for (acc, &v) in bias.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }
    gemm(one, az, block.w_z.view(), one, MatMut::new(dx, n, e))?;
    gemm(one, ar, block.w_r.view(), one, MatMut::new(dx, n, e))?;
    gemm(one, ah, block.w_h.view(), one, MatMut::new(dx, n, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{forward_batch, Dropout, ModelConfig};
    use crate::numerics::Rng;

    fn cfg() -> ModelConfig {
        ModelConfig {
            embed_dim: 3,
            hidden_dim: 4,
            window: 6,
            vocab_size: 7,
            label_count: 3,
            keep_prob: 0.5,
        }
    }

    #[test]
    fn empty_mask_means_zero() {
        let c = cfg();
        let mut rng = Rng::new(4);
        let p = ModelParams::<f64>::init(&c, &mut rng).unwrap();
        let ids = [1u32, 2, 3, 4, 5, 6];
        let tr = forward_batch(&p, &c, &[&ids], Dropout::Off).unwrap();
        let (g, loss) = backward_batch(&p, &tr, &[&[0; 6]], &[&[false; 6]]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn output_bias_gradient_is_residual() {
        let c = cfg();
        let mut rng = Rng::new(9);
        let p = ModelParams::<f64>::init(&c, &mut rng).unwrap();
        let ids = [3u32, 1, 4, 1, 5, 2];
        let gold = [0u32, 1, 2, 2, 1, 0];
        let mut mask = [false; 6];
        mask[4] = true;
        let tr = forward_batch(&p, &c, &[&ids], Dropout::Off).unwrap();
        let (g, _) = backward_batch(&p, &tr, &[&gold], &[&mask]).unwrap();
        let post = tr.posterior(0, 4);
        for k in 0..3 {
            let expect = post[k] - if k == 1 { 1.0 } else { 0.0 };
            assert!((g.out_bias[k] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn length_mismatch() {
        let c = cfg();
        let p = ModelParams::<f64>::zeros(&c);
        let ids = [1u32; 6];
        let tr = forward_batch(&p, &c, &[&ids], Dropout::Off).unwrap();
        assert!(backward_batch(&p, &tr, &[&[0; 5]], &[&[true; 5]]).is_err());
        assert!(backward_batch(&p, &tr, &[], &[]).is_err());
    }
}
