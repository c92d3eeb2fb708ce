//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

/// Gauss–Hermite nodes and weights for `∫ f(x) e^{-x²} dx`, by Newton
/// iteration on the orthonormal Hermite functions.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `H_n(x)` for rational `x` from the explicit sum, in exact arithmetic.
pub fn hermite_exact(n: usize, x: &BigRational) -> BigRational {
    let two_x = x * BigRational::from_integer(BigInt::from(2));
    let mut sum = BigRational::zero();
    for m in 0..=n / 2 {
        let coef = BigRational::new(factorial(n), factorial(m) * factorial(n - 2 * m));
        let mut term = coef;
        for _ in 0..(n - 2 * m) {
            term *= &two_x;
        }
        if m % 2 == 1 {
            term = -term;
        }
        sum += term;
    }
    sum
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

/// AUC as the normalized Mann–Whitney U statistic (ties count one half).
pub fn mann_whitney_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut u, mut np, mut nn) = (0.0, 0usize, 0usize);
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            nn += 1;
            continue;
        }
        np += 1;
        for (j, &lj) in labels.iter().enumerate() {
            if !lj {
                if scores[i] > scores[j] {
                    u += 1.0;
                } else if scores[i] == scores[j] {
                    u += 0.5;
                }
            }
        }
    }
    u / (np * nn) as f64
}

/// Brute-force IPF, `(1/N) Σ exp(-|x-c|²/2σ²)`.
pub fn ipf_brute(centers: &[Vec<f64>], sigma: f64, x: &[f64]) -> f64 {
    centers
        .iter()
        .map(|c| {
            let r2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (-r2 / (2.0 * sigma * sigma)).exp()
        })
        .sum::<f64>()
        / centers.len() as f64
}

/// Central-difference gradient and Laplacian of `f` at `x` with step `h`.
pub fn central_differences(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> (Vec<f64>, f64) {
    let f0 = f(x);
    let mut grad = Vec::with_capacity(x.len());
    let mut lap = 0.0;
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        grad.push((fp - fm) / (2.0 * h));
        lap += (fp - 2.0 * f0 + fm) / (h * h);
    }
    (grad, lap)
}

/// Brute-force max-scaled RMSE.
pub fn calibration_brute(u: &[f64], e: &[f64]) -> f64 {
    let mu = u.iter().cloned().fold(0.0, f64::max);
    let me = e.iter().cloned().fold(0.0, f64::max);
    let mut s = 0.0;
    for i in 0..u.len() {
        let a = if mu > 0.0 { u[i] / mu } else { u[i] };
        let b = if me > 0.0 { e[i] / me } else { e[i] };
        s += (a - b) * (a - b);
    }
    (s / u.len() as f64).sqrt()
}
