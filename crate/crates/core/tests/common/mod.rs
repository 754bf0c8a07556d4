#![allow(dead_code)]

use std::f64::consts::PI;

pub fn sphere(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    // Start from 64 panels so that narrow features are seen.
    let n = 64;
    (0..n)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / n as f64;
            let hi = a + (b - a) * (i + 1) as f64 / n as f64;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(f, lo, hi, fa, fm, fb, whole, 1e-13, 40)
        })
        .sum()
}

/// Independent oracle for `int rho(h) |h|^alpha dh`: adaptive Simpson in `u = ln t`,
/// with a power-law model below `t0`.
pub fn radial_integral(density: &dyn Fn(f64) -> f64, dim: usize, alpha: f64, outer: f64) -> f64 {
    let n = dim as f64;
    let t0 = 1e-9 * outer;
    let g = |u: f64| {
        let t = u.exp();
        sphere(dim) * t.powf(n + alpha) * density(t)
    };
    let body = adaptive(&g, t0.ln(), outer.ln());
    let (a, b) = (density(t0), density(t0 / 2.0));
    let core = if a > 0.0 && b > 0.0 {
        let e = (a / b).log2();
        sphere(dim) * a * t0.powf(n + alpha) / (n + alpha + e)
    } else {
        0.0
    };
    body + core
}
