//! Bessel functions of order 0 and 1, sphere constants.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Surface area of the unit sphere in ℝ^d.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball in ℝ^d.
pub fn ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

fn bessel_trapezoid(n: u32, x: f64) -> f64 {
    // periodic trapezoid rule for (1/2π)∫ cos(nθ - x sin θ) dθ, exponentially accurate
    let m = ((1.3 * x).ceil() as usize + 40) / 2;
    let big_n = 2 * m;
    let h = 2.0 * PI / big_n as f64;
    let f = |th: f64| (n as f64 * th - x * th.sin()).cos();
    let mut s = f(0.0) + f(PI);
    for k in 1..m {
        s += 2.0 * f(k as f64 * h);
    }
    s / big_n as f64
}

fn bessel_hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let j = (2 * k - 1) as f64;
        term *= (mu - j * j) / (k as f64 * 8.0 * x);
        if term.abs() > last || term == 0.0 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (n as f64 / 2.0 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-4 {
        let q = 0.25 * x * x;
        1.0 - q + 0.25 * q * q
    } else if x <= 50.0 {
        bessel_trapezoid(0, x)
    } else {
        bessel_hankel(0, x)
    }
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    let v = if x < 1e-4 {
        0.5 * x * (1.0 - x * x / 8.0)
    } else if x <= 50.0 {
        bessel_trapezoid(1, x)
    } else {
        bessel_hankel(1, x)
    };
    s * v
}

/// k-th positive zero of J0 (k ≥ 1).
pub fn bessel_j0_zero(k: usize) -> f64 {
    let b = (k as f64 - 0.25) * PI;
    let b2 = b * b;
    let mut x = b + 1.0 / (8.0 * b) - 31.0 / (384.0 * b * b2) + 3779.0 / (15360.0 * b * b2 * b2);
    for _ in 0..4 {
        let dx = bessel_j0(x) / bessel_j1(x);
        x += dx;
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    x
}
