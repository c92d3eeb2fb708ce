//! Physicist's Hermite polynomials `H_k`.
//!
//! Evaluation uses the upward three-term recurrence
//! `H_{n+1}(x) = 2x H_n(x) - 2n H_{n-1}(x)`, which follows from
//! `H_{n+1} = 2x H_n - H'_n` together with `H'_n = 2n H_{n-1}`.
//! The normalized polynomials `H*_k = H_k / √(√π 2^k k!)` are orthonormal
//! under the weight `e^{-x²}`.

use crate::error::{Error, Result};

/// Default upper bound on the polynomial order.
pub const MAX_HERMITE_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HermiteOrder(usize);

impl HermiteOrder {
    pub fn new(k: usize) -> Result<Self> {
        Self::with_bound(k, MAX_HERMITE_ORDER)
    }

    pub fn with_bound(k: usize, max: usize) -> Result<Self> {
        if k > max {
            return Err(Error::OrderTooLarge { order: k, max });
        }
        Ok(Self(k))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// `H_k(x)` together with its first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteTriple {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl HermiteTriple {
    fn scaled(self, s: f64) -> Self {
        Self {
            value: self.value * s,
            d1: self.d1 * s,
            d2: self.d2 * s,
        }
    }
}

/// `H_0(x) ..= H_kmax(x)`.
pub fn hermite_sequence(kmax: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(kmax + 1);
    h.push(1.0);
    if kmax >= 1 {
        h.push(2.0 * x);
    }
    for n in 1..kmax {
        let next = 2.0 * x * h[n] - 2.0 * n as f64 * h[n - 1];
        h.push(next);
    }
    h
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("hermite argument"))
    }
}

fn check_result(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("hermite value"))
    }
}

pub fn hermite_eval(k: HermiteOrder, x: f64) -> Result<f64> {
    check_x(x)?;
    check_result(hermite_sequence(k.get(), x)[k.get()])
}

/// `(H_k, H_k', H_k'')` with `H_k' = 2k H_{k-1}` and `H_k'' = 4k(k-1) H_{k-2}`.
pub fn hermite_derivs(k: HermiteOrder, x: f64) -> Result<HermiteTriple> {
    check_x(x)?;
    let h = hermite_sequence(k.get(), x);
    let t = triple_from_sequence(&h, k.get());
    check_result(t.value)?;
    check_result(t.d1)?;
    check_result(t.d2)?;
    Ok(t)
}

pub(crate) fn triple_from_sequence(h: &[f64], k: usize) -> HermiteTriple {
    let kf = k as f64;
    HermiteTriple {
        value: h[k],
        d1: if k >= 1 { 2.0 * kf * h[k - 1] } else { 0.0 },
        d2: if k >= 2 { 4.0 * kf * (kf - 1.0) * h[k - 2] } else { 0.0 },
    }
}

/// Natural log of `√(√π 2^k k!)`.
pub fn ln_hermite_norm(k: HermiteOrder) -> f64 {
    let kf = k.get() as f64;
    let ln_fact: f64 = (2..=k.get()).map(|i| (i as f64).ln()).sum();
    0.5 * (0.5 * std::f64::consts::PI.ln() + kf * std::f64::consts::LN_2 + ln_fact)
}

/// `√(√π 2^k k!)`, the weighted L² norm of `H_k`.
pub fn hermite_norm(k: HermiteOrder) -> Result<f64> {
    let v = ln_hermite_norm(k).exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("hermite norm"))
    }
}

/// `hermite_derivs` divided by `hermite_norm`.
pub fn normalized_hermite_derivs(k: HermiteOrder, x: f64) -> Result<HermiteTriple> {
    let t = hermite_derivs(k, x)?;
    Ok(t.scaled(1.0 / hermite_norm(k)?))
}

/// Normalized triples for orders `1..=kmax` at a single argument, sharing one
/// recurrence pass.
pub(crate) fn normalized_triples(kmax: usize, x: f64, inv_norms: &[f64]) -> Vec<HermiteTriple> {
    let h = hermite_sequence(kmax, x);
    (1..=kmax)
        .map(|k| triple_from_sequence(&h, k).scaled(inv_norms[k]))
        .collect()
}

/// `1 / hermite_norm(k)` for `k = 0..=kmax`.
pub(crate) fn inverse_norms(kmax: usize) -> Vec<f64> {
    (0..=kmax).map(|k| (-ln_hermite_norm(HermiteOrder(k))).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ord(k: usize) -> HermiteOrder {
        HermiteOrder::new(k).unwrap()
    }

    // Explicit sum n! Σ_m (-1)^m / (m! (n-2m)!) (2x)^{n-2m}, in f64.
    fn explicit(n: usize, x: f64) -> f64 {
        let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * fact(n) / (fact(m) * fact(n - 2 * m)) * (2.0 * x).powi((n - 2 * m) as i32)
            })
            .sum()
    }

    #[test]
    fn base_cases() {
        assert_eq!(hermite_eval(ord(0), 123.0).unwrap(), 1.0);
        assert_eq!(hermite_eval(ord(2), 1.0).unwrap(), 2.0);
        let t = hermite_derivs(ord(1), 3.0).unwrap();
        assert_eq!((t.value, t.d1, t.d2), (6.0, 2.0, 0.0));
        let t = hermite_derivs(ord(0), 5.0).unwrap();
        assert_eq!((t.value, t.d1, t.d2), (1.0, 0.0, 0.0));
    }

    #[test]
    fn order_bound() {
        assert!(matches!(HermiteOrder::new(65), Err(Error::OrderTooLarge { .. })));
        assert!(HermiteOrder::new(64).is_ok());
        assert!(HermiteOrder::with_bound(5, 4).is_err());
        assert!(hermite_eval(ord(3), f64::NAN).is_err());
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for n in 0..=12 {
            for &x in &[-2.3, -0.8, 0.0, 0.37, 1.1, 2.9] {
                let r = hermite_eval(ord(n), x).unwrap();
                let e = explicit(n, x);
                assert!((r - e).abs() <= 1e-10 * e.abs().max(1.0), "n={n} x={x}: {r} vs {e}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (k, x, h) = (ord(6), -0.8, 1e-4);
        let f = |x: f64| hermite_eval(k, x).unwrap();
        let t = hermite_derivs(k, x).unwrap();
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        assert!((t.d1 - d1).abs() <= 1e-7 * t.d1.abs(), "{} vs {d1}", t.d1);
        // Second differences lose ~half the digits; use a wider step.
        let h2 = 1e-3;
        let d2w = (f(x + h2) - 2.0 * f(x) + f(x - h2)) / (h2 * h2);
        let richardson = (4.0 * d2 - d2w) / 3.0;
        assert!((t.d2 - d2w).abs() <= 1e-5 * t.d2.abs(), "{} vs {d2w}", t.d2);
        assert!((t.d2 - richardson).abs() <= 1e-5 * t.d2.abs());
    }

    #[test]
    fn norm_closed_forms() {
        assert!((hermite_norm(ord(0)).unwrap() - PI.powf(0.25)).abs() < 1e-15);
        assert!((hermite_norm(ord(0)).unwrap() - 1.331336).abs() < 1e-6);
        let h0 = normalized_hermite_derivs(ord(0), 0.4).unwrap();
        assert!((h0.value - 0.751126).abs() < 1e-6);
        assert_eq!((h0.d1, h0.d2), (0.0, 0.0));
        assert!((hermite_norm(ord(1)).unwrap() - (2.0 * PI.sqrt()).sqrt()).abs() < 1e-15);
        let h1 = normalized_hermite_derivs(ord(1), 0.0).unwrap();
        assert_eq!(h1.value, 0.0);
        assert!((h1.d1 - 2.0 / (2.0 * PI.sqrt()).sqrt()).abs() < 1e-15);
        assert!(hermite_norm(ord(64)).unwrap().is_finite());
    }

    #[test]
    fn normalized_is_scaled_raw() {
        for k in 0..=10 {
            for &x in &[-3.0, -1.2, 0.0, 0.5, 2.7] {
                let raw = hermite_derivs(ord(k), x).unwrap();
                let nrm = normalized_hermite_derivs(ord(k), x).unwrap();
                let inv = 1.0 / hermite_norm(ord(k)).unwrap();
                for (a, b) in [(raw.value, nrm.value), (raw.d1, nrm.d1), (raw.d2, nrm.d2)] {
                    assert_eq!(a * inv, b);
                }
            }
        }
    }

    #[test]
    fn parity() {
        for k in 0..=20 {
            for &x in &[0.25, 0.5, 1.5, 3.0] {
                let a = hermite_eval(ord(k), -x).unwrap();
                let b = hermite_eval(ord(k), x).unwrap();
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - s * b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
