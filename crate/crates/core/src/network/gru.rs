use crate::error::{Error, Result};
use crate::network::GruBlock;
use crate::numerics::{dot, sigmoid, Vector};
use crate::scalar::Scalar;

/// Single GRU transition.
///
/// ```text
/// z  = σ(W_z x + V_z h_prev + b_z)
/// r  = σ(W_r x + V_r h_prev + b_r)
/// h~ = tanh(W_h x + V_h (r ⊙ h_prev) + b_h)
/// h  = (1 - z) ⊙ h_prev + z ⊙ h~
/// ```
pub fn gru_step<T: Scalar>(block: &GruBlock<T>, x: &[T], h_prev: &[T]) -> Result<Vector<T>> {
    let (e, h) = (block.embed_dim(), block.hidden_dim());
    if x.len() != e || h_prev.len() != h {
        return Err(Error::Dimension {
            op: "gru_step",
            left: (e, h),
            right: (x.len(), h_prev.len()),
        });
    }
    let z: Vec<T> = (0..h)
        .map(|i| sigmoid(dot(block.w_z.row(i), x) + dot(block.v_z.row(i), h_prev) + block.b_z[i]))
        .collect();
    let r: Vec<T> = (0..h)
        .map(|i| sigmoid(dot(block.w_r.row(i), x) + dot(block.v_r.row(i), h_prev) + block.b_r[i]))
        .collect();
    let rh: Vec<T> = r.iter().zip(h_prev).map(|(&a, &b)| a * b).collect();
    let out = (0..h)
        .map(|i| {
            let cand = (dot(block.w_h.row(i), x) + dot(block.v_h.row(i), &rh) + block.b_h[i]).tanh();
            (T::one() - z[i]) * h_prev[i] + z[i] * cand
        })
        .collect();
    Ok(Vector::from_vec(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn random_block(rng: &mut Rng, e: usize, h: usize) -> GruBlock<f64> {
        let mut b = GruBlock::zeros(e, h);
        for m in [
            &mut b.w_z, &mut b.w_r, &mut b.w_h, &mut b.v_z, &mut b.v_r, &mut b.v_h,
        ] {
            for x in m.as_mut_slice() {
                *x = rng.uniform_range(-0.8, 0.8);
            }
        }
        for v in [&mut b.b_z, &mut b.b_r, &mut b.b_h] {
            for x in v.iter_mut() {
                *x = rng.uniform_range(-0.5, 0.5);
            }
        }
        b
    }

    /// Independent scalar-loop evaluation of the four GRU formulas.
    fn oracle(b: &GruBlock<f64>, x: &[f64], hp: &[f64]) -> Vec<f64> {
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let n = hp.len();
        let mut z = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 0..n {
            let mut az = b.b_z[i];
            let mut ar = b.b_r[i];
            for j in 0..x.len() {
                az += b.w_z.get(i, j) * x[j];
                ar += b.w_r.get(i, j) * x[j];
            }
            for j in 0..n {
                az += b.v_z.get(i, j) * hp[j];
                ar += b.v_r.get(i, j) * hp[j];
            }
            z[i] = sig(az);
            r[i] = sig(ar);
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut a = b.b_h[i];
            for j in 0..x.len() {
                a += b.w_h.get(i, j) * x[j];
            }
            for j in 0..n {
                a += b.v_h.get(i, j) * r[j] * hp[j];
            }
            out[i] = (1.0 - z[i]) * hp[i] + z[i] * a.tanh();
        }
        out
    }

    #[test]
    fn zero_params_halve_state() {
        let b = GruBlock::<f64>::zeros(3, 4);
        let p = [0.4, -2.0, 1.0, 0.0];
        let out = gru_step(&b, &[1.0, 2.0, 3.0], &p).unwrap();
        for (o, v) in out.iter().zip(p) {
            assert_eq!(*o, 0.5 * v);
        }
        let zero = gru_step(&b, &[1.0, 2.0, 3.0], &[0.0; 4]).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_scalar_oracle() {
        let mut rng = Rng::new(99);
        for _ in 0..10 {
            let b = random_block(&mut rng, 5, 7);
            let x: Vec<f64> = (0..5).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
            let hp: Vec<f64> = (0..7).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
            let got = gru_step(&b, &x, &hp).unwrap();
            for (g, w) in got.iter().zip(oracle(&b, &x, &hp)) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn state_stays_in_convex_bound() {
        let mut rng = Rng::new(3);
        let b = random_block(&mut rng, 4, 6);
        let mut h = vec![0.0; 6];
        for _ in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| rng.uniform_range(-3.0, 3.0)).collect();
            let bound = h.iter().fold(1.0f64, |m, v: &f64| m.max(v.abs()));
            h = gru_step(&b, &x, &h).unwrap().into_vec();
            assert!(h.iter().all(|v| v.abs() <= bound));
        }
    }

    #[test]
    fn shape_errors() {
        let b = GruBlock::<f64>::zeros(3, 4);
        assert!(gru_step(&b, &[1.0; 2], &[0.0; 4]).is_err());
        assert!(gru_step(&b, &[1.0; 3], &[0.0; 5]).is_err());
    }
}
