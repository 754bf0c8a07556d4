//! One-dimensional quadrature helpers shared by the kernel and functional code.

use gauss_quad::GaussLegendre;
use std::sync::OnceLock;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20).expect("degree 20 is valid"))
}

/// 20-point Gauss-Legendre on `[a, b]`.
pub fn gauss(a: f64, b: f64, f: impl FnMut(f64) -> f64) -> f64 {
    if a == b {
        return 0.0;
    }
    rule().integrate(a, b, f)
}

/// Gauss-Legendre on each interval between consecutive `breaks`, each split into `panels`.
pub fn gauss_panels(breaks: &[f64], panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let step = (w[1] - w[0]) / panels as f64;
        for k in 0..panels {
            let a = w[0] + k as f64 * step;
            acc += gauss(a, a + step, &mut f);
        }
    }
    acc
}

/// Integral over `[lo, hi]` with `0 < lo < hi < inf` on geometric panels of ratio <= 2.
pub fn gauss_geometric(lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let n = ((hi / lo).log2().ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / n as f64);
    let mut acc = 0.0;
    let mut a = lo;
    for k in 0..n {
        let b = if k + 1 == n { hi } else { a * ratio };
        acc += gauss(a, b, &mut f);
        a = b;
    }
    acc
}

/// `int_lo^hi r^e dr` for `0 <= lo <= hi <= inf`; `+inf` when divergent.
pub fn power_integral(lo: f64, hi: f64, e: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if (e + 1.0).abs() < 1e-14 {
        if lo == 0.0 || hi.is_infinite() {
            return f64::INFINITY;
        }
        return (hi / lo).ln();
    }
    let a = e + 1.0;
    if hi.is_infinite() && a >= 0.0 {
        return f64::INFINITY;
    }
    if lo == 0.0 && a <= 0.0 {
        return f64::INFINITY;
    }
    let top = if hi.is_infinite() { 0.0 } else { hi.powf(a) };
    let bottom = if lo == 0.0 { 0.0 } else { lo.powf(a) };
    // (top - bottom)/a, written to keep precision on narrow intervals.
    if lo > 0.0 && hi.is_finite() {
        let t = a * ((hi - lo) / lo).ln_1p();
        return bottom * t.exp_m1() / a;
    }
    (top - bottom) / a
}

/// Surface measure of the unit sphere in R^N.
pub fn sphere_area(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        n => {
            let half = n as f64 / 2.0;
            2.0 * PI.powf(half) / statrs::function::gamma::gamma(half)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_is_exact_for_polynomials() {
        let v = gauss(0.0, 2.0, |x| x.powi(7));
        assert!((v - 2f64.powi(8) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn power_integrals() {
        assert!((power_integral(1.0, 2.0, -1.0) - 2f64.ln()).abs() < 1e-15);
        assert!((power_integral(0.0, 1.0, -0.5) - 2.0).abs() < 1e-15);
        assert!((power_integral(1.0, f64::INFINITY, -2.0) - 1.0).abs() < 1e-15);
        assert!(power_integral(0.0, 1.0, -1.0).is_infinite());
        assert!(power_integral(1.0, f64::INFINITY, -0.5).is_infinite());
        let (lo, hi) = (1000.0, 1000.001);
        let narrow = power_integral(lo, hi, 1.0);
        assert!((narrow - (hi - lo) * (hi + lo) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn geometric_panels() {
        let v = gauss_geometric(1e-6, 1.0, |r| r.powf(-0.5));
        assert!((v - 2.0 * (1.0 - 1e-3)).abs() < 1e-12);
    }

    #[test]
    fn spheres() {
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
