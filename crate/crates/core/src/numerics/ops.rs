use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::scalar::Scalar;

/// Floor applied to probabilities inside the log of the cross-entropy.
pub const LOG_FLOOR: f64 = 1e-12;

#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub fn softmax<T: Scalar>(x: &[T]) -> Result<Vector<T>> {
    if x.is_empty() {
        return Err(Error::Input("softmax of an empty vector".into()));
    }
    let mut out = x.to_vec();
    softmax_in_place(&mut out);
    Ok(Vector::from_vec(out))
}

/// Max-subtracted softmax. `x` must be nonempty.
pub(crate) fn softmax_in_place<T: Scalar>(x: &mut [T]) {
    let max = x.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for v in x.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    let inv = T::one() / sum;
    for v in x.iter_mut() {
        *v *= inv;
    }
}

/// `-ln(max(probs[gold], 1e-12))`.
pub fn cross_entropy<T: Scalar>(probs: &[T], gold: usize) -> Result<T> {
    let p = *probs.get(gold).ok_or(Error::Index {
        index: gold,
        len: probs.len(),
    })?;
    Ok(-p.max(T::of(LOG_FLOOR)).ln())
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax<T: PartialOrd + Copy>(x: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate().skip(1) {
        if *v > x[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest};

    #[test]
    fn uniform_softmax() {
        let p = softmax(&[0.0f64, 0.0, 0.0]).unwrap();
        for v in p.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_softmax() {
        let p = softmax(&[2f64.ln(), 0.0, 0.0]).unwrap();
        let expect = [0.5, 0.25, 0.25];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_softmax_errors() {
        assert!(softmax::<f32>(&[]).is_err());
    }

    #[test]
    fn cross_entropy_values() {
        assert_eq!(cross_entropy(&[0.0f64, 1.0, 0.0], 1).unwrap(), 0.0);
        let k = 7;
        let u = vec![1.0f64 / k as f64; k];
        assert!((cross_entropy(&u, 3).unwrap() - (k as f64).ln()).abs() < 1e-12);
        let v = cross_entropy(&[0.5f64, 0.25, 0.25], 1).unwrap();
        assert!((v - 4f64.ln()).abs() < 1e-12);
        assert!((v - 1.386294).abs() < 1e-6);
    }

    #[test]
    fn cross_entropy_floor_and_range() {
        let v = cross_entropy(&[1.0f64, 0.0], 1).unwrap();
        assert!((v - (1e12f64).ln()).abs() < 1e-9);
        assert!(matches!(
            cross_entropy(&[1.0f64], 1),
            Err(Error::Index { index: 1, len: 1 })
        ));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!(sigmoid(-800.0f64) >= 0.0);
        assert!(sigmoid(800.0f64) <= 1.0);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one(x in prop::collection::vec(-1e4f64..1e4, 1..40)) {
            let p = softmax(&x).unwrap();
            let s: f64 = p.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-6);
            prop_assert!(p.iter().all(|v| *v >= 0.0 && v.is_finite()));
        }

        #[test]
        fn softmax_f32_sums_to_one(x in prop::collection::vec(-1e4f32..1e4, 1..40)) {
            let p = softmax(&x).unwrap();
            let s: f32 = p.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-6);
        }

        #[test]
        fn softmax_shift_invariant(x in prop::collection::vec(-50f64..50.0, 1..20), c in -100f64..100.0) {
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let a = softmax(&x).unwrap();
            let b = softmax(&shifted).unwrap();
            for (p, q) in a.iter().zip(b.iter()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }

        #[test]
        fn cross_entropy_nonnegative(x in prop::collection::vec(-20f64..20.0, 1..10), g in 0usize..10) {
            let p = softmax(&x).unwrap();
            let gold = g % p.len();
            let ce = cross_entropy(&p, gold).unwrap();
            prop_assert!(ce >= 0.0);
            prop_assert_eq!(ce == 0.0, p[gold] == 1.0);
        }
    }
}
