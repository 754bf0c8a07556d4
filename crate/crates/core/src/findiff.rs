//! M-th order forward differences on lattice shifts.

use crate::error::{precondition, Error, Result};
use crate::gridfn::{GridFunction, LpAccum, LpExponent};

/// Largest supported difference order; the alternating binomial sum loses about
/// M decimal digits.
pub const MAX_ORDER: u32 = 6;

/// A nonzero lattice vector `h = spacing * steps`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeShift {
    pub steps: Vec<i64>,
}

impl LatticeShift {
    pub fn new(steps: Vec<i64>) -> Result<Self> {
        if steps.is_empty() || steps.iter().all(|&s| s == 0) {
            return precondition("shift must be a nonzero lattice vector");
        }
        Ok(LatticeShift { steps })
    }

    pub fn along(dim: usize, axis: usize, k: i64) -> Result<Self> {
        let mut steps = vec![0; dim];
        steps[axis] = k;
        LatticeShift::new(steps)
    }

    /// Nearest lattice vector to `h`, if `h` lies on the lattice of `spacing`.
    pub fn from_vector(h: &[f64], spacing: f64) -> Result<Self> {
        let mut steps = Vec::with_capacity(h.len());
        for &v in h {
            let k = v / spacing;
            if (k - k.round()).abs() > 1e-6 {
                return precondition(format!("shift component {v} is not a multiple of {spacing}"));
            }
            steps.push(k.round() as i64);
        }
        LatticeShift::new(steps)
    }

    pub fn length_in_cells(&self) -> f64 {
        self.steps.iter().map(|&s| (s * s) as f64).sum::<f64>().sqrt()
    }

    pub fn length(&self, spacing: f64) -> f64 {
        spacing * self.length_in_cells()
    }
}

/// `(-1)^(M-j) C(M, j)` for `j = 0..=M`.
pub fn difference_coefficients(order: u32) -> Vec<f64> {
    (0..=order)
        .map(|j| {
            let sign = if (order - j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(order, j)
        })
        .collect()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_order(order: u32) -> Result<()> {
    if order == 0 {
        return precondition("difference order M must be positive");
    }
    if order > MAX_ORDER {
        return precondition(format!("difference order M must be at most {MAX_ORDER}"));
    }
    Ok(())
}

fn check_shift(f: &GridFunction, h: &LatticeShift, order: u32) -> Result<()> {
    check_order(order)?;
    if h.steps.len() != f.dim() {
        return Err(Error::Lattice(format!(
            "shift has {} components, function is {}-dimensional",
            h.steps.len(),
            f.dim()
        )));
    }
    for (axis, ((lo, hi), &s)) in f.margins().into_iter().zip(&h.steps).enumerate() {
        let needed = (order as i64 * s.abs()) as usize;
        let available = if s > 0 { lo } else { hi };
        if s != 0 && available < needed {
            return Err(Error::Margin {
                axis,
                needed,
                available,
            });
        }
    }
    Ok(())
}

/// Calls `sink(flat_index, value)` for every box node, reading `f` with zero extension.
pub(crate) fn for_each_difference(
    f: &GridFunction,
    steps: &[i64],
    coeffs: &[f64],
    mut sink: impl FnMut(usize, f64),
) {
    let vals = f.values();
    if f.dim() == 1 {
        let n = vals.len() as i64;
        let k = steps[0];
        for i in 0..n {
            let mut v = 0.0;
            for (j, c) in coeffs.iter().enumerate() {
                let idx = i + j as i64 * k;
                if idx >= 0 && idx < n {
                    v += c * vals[idx as usize];
                }
            }
            sink(i as usize, v);
        }
        return;
    }
    let shape = f.shape();
    let strides = f.strides();
    let dim = f.dim();
    let mut idx = vec![0i64; dim];
    for flat in 0..vals.len() {
        let mut rem = flat;
        for d in (0..dim).rev() {
            idx[d] = (rem % shape[d]) as i64;
            rem /= shape[d];
        }
        let mut v = 0.0;
        'terms: for (j, c) in coeffs.iter().enumerate() {
            let mut off = 0usize;
            for d in 0..dim {
                let t = idx[d] + j as i64 * steps[d];
                if t < 0 || t >= shape[d] as i64 {
                    continue 'terms;
                }
                off += t as usize * strides[d];
            }
            v += c * vals[off];
        }
        sink(flat, v);
    }
}

/// `Delta_h^M f` on the same lattice. Needs a zero margin of `M |h|` on the faces
/// the shift points away from.
pub fn forward_difference(f: &GridFunction, h: &LatticeShift, order: u32) -> Result<GridFunction> {
    check_shift(f, h, order)?;
    let coeffs = difference_coefficients(order);
    let mut out = vec![0.0; f.len()];
    for_each_difference(f, &h.steps, &coeffs, |i, v| out[i] = v);
    GridFunction::new(f.origin().to_vec(), f.spacing(), f.shape().to_vec(), out)
}

/// `Delta_h^M f` restricted to the nodes whose whole stencil lies inside the box.
///
/// Useful for functions that are not compactly supported, such as polynomials.
pub fn forward_difference_interior(
    f: &GridFunction,
    h: &LatticeShift,
    order: u32,
) -> Result<GridFunction> {
    check_order(order)?;
    if h.steps.len() != f.dim() {
        return Err(Error::Lattice("shift dimension differs from the function".into()));
    }
    let coeffs = difference_coefficients(order);
    let dim = f.dim();
    let mut lo = vec![0usize; dim];
    let mut hi = vec![0usize; dim];
    for d in 0..dim {
        let reach = order as i64 * h.steps[d];
        let n = f.shape()[d] as i64;
        let a = (-reach).max(0);
        let b = (n - 1 - reach).min(n - 1);
        if b - a + 1 < 2 {
            return precondition("box too small for an interior difference of this shift");
        }
        lo[d] = a as usize;
        hi[d] = b as usize;
    }
    let shape: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| b - a + 1).collect();
    let total: usize = shape.iter().product();
    let strides = f.strides();
    let mut values = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..dim).rev() {
            idx[d] = lo[d] + rem % shape[d];
            rem /= shape[d];
        }
        let mut v = 0.0;
        for (j, c) in coeffs.iter().enumerate() {
            let off: i64 = (0..dim)
                .map(|d| (idx[d] as i64 + j as i64 * h.steps[d]) * strides[d] as i64)
                .sum();
            v += c * f.values()[off as usize];
        }
        values.push(v);
    }
    let origin: Vec<f64> = (0..dim)
        .map(|d| f.origin()[d] + lo[d] as f64 * f.spacing())
        .collect();
    GridFunction::new(origin, f.spacing(), shape, values)
}

/// `||Delta_h^M f||_p` without materializing the difference.
pub fn diff_lp_norm(f: &GridFunction, h: &LatticeShift, order: u32, p: LpExponent) -> Result<f64> {
    check_shift(f, h, order)?;
    Ok(diff_lp_norm_unchecked(f, &h.steps, &difference_coefficients(order), p))
}

pub(crate) fn diff_lp_norm_unchecked(f: &GridFunction, steps: &[i64], coeffs: &[f64], p: LpExponent) -> f64 {
    let acc = LpAccum::new(p);
    let mut s = 0.0;
    for_each_difference(f, steps, coeffs, |_, v| s = acc.term(s, v));
    acc.finish(s, f.cell_volume())
}

/// `||Delta_h^M f||_p` for any `|h|` beyond the support diameter, where the
/// translates `f(. + j h)` have disjoint supports.
pub fn disjoint_translate_norm(f: &GridFunction, order: u32, p: LpExponent) -> f64 {
    let norm = crate::gridfn::lp_norm(f, p);
    match p {
        LpExponent::Finite(p) => {
            let s: f64 = (0..=order).map(|j| binomial(order, j).powf(p)).sum();
            s.powf(1.0 / p) * norm
        }
        LpExponent::Infinity => binomial(order, order / 2) * norm,
    }
}

/// Smallest lattice distance (in cells) beyond which translates are disjoint.
pub(crate) fn disjoint_distance_cells(f: &GridFunction) -> f64 {
    match f.support_indices() {
        None => 0.0,
        Some(b) => b
            .iter()
            .map(|&(lo, hi)| ((hi - lo + 1) as f64).powi(2))
            .sum::<f64>()
            .sqrt(),
    }
}
