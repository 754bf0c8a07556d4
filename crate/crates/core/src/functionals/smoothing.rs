//! `||rho_eps * f - f||_p / eps^s` by direct lattice convolution.

use crate::error::{precondition, Result};
use crate::gridfn::{lp_norm, GridFunction, LpExponent};
use crate::kernels::{KernelFamily, KernelInstance};

/// Kernel mass assigned to each lattice cell within `radius_cells`.
fn cell_weights(k: &KernelInstance, dx: f64, dim: usize, radius_cells: i64) -> Vec<(Vec<i64>, f64)> {
    let mut out = Vec::new();
    if dim == 1 {
        for j in -radius_cells..=radius_cells {
            let m = if j == 0 {
                k.radial_moment(0.0, 0.5 * dx, 0.0)
            } else {
                let a = (j.abs() as f64 - 0.5) * dx;
                0.5 * k.radial_moment(a, a + dx, 0.0)
            };
            if m > 0.0 {
                out.push((vec![j], m));
            }
        }
        return out;
    }
    // Tensor 4-point Gauss rule inside each cell.
    const G: [f64; 4] = [-0.861136311594053, -0.339981043584856, 0.339981043584856, 0.861136311594053];
    const W: [f64; 4] = [0.347854845137454, 0.652145154862546, 0.652145154862546, 0.347854845137454];
    let n = radius_cells;
    let cell = dx.powi(dim as i32);
    let mut idx = vec![-n; dim];
    loop {
        let mut acc = 0.0;
        let pts = 4usize.pow(dim as u32);
        for t in 0..pts {
            let mut rem = t;
            let mut r2 = 0.0;
            let mut w = 1.0;
            for &i in idx.iter() {
                let g = rem % 4;
                rem /= 4;
                let x = (i as f64 + 0.5 * G[g]) * dx;
                r2 += x * x;
                w *= 0.5 * W[g];
            }
            acc += w * k.density(r2.sqrt());
        }
        if acc > 0.0 {
            out.push((idx.clone(), acc * cell));
        }
        let mut d = 0;
        loop {
            if d == dim {
                let total: f64 = out.iter().map(|(_, m)| m).sum();
                for (_, m) in out.iter_mut() {
                    *m /= total;
                }
                return out;
            }
            idx[d] += 1;
            if idx[d] <= n {
                break;
            }
            idx[d] = -n;
            d += 1;
        }
    }
}

/// `rho_eps * f` on the lattice of `f`.
pub fn convolve(f: &GridFunction, k: &KernelInstance) -> Result<GridFunction> {
    let dx = f.spacing();
    let radius = k.effective_radius();
    let radius_cells = (radius / dx).ceil() as i64 + 1;
    let need = radius_cells as usize;
    let avail = f.margins().into_iter().map(|(a, b)| a.min(b)).min().unwrap_or(0);
    if avail + 1 < need {
        return precondition(format!(
            "convolution reach {radius} exceeds the zero margin ({} samples)",
            avail
        ));
    }
    let weights = cell_weights(k, dx, f.dim(), radius_cells);
    let shape = f.shape();
    let strides = f.strides();
    let vals = f.values();
    let mut out = vec![0.0; vals.len()];
    let mut idx = vec![0i64; f.dim()];
    for (flat, o) in out.iter_mut().enumerate() {
        let mut rem = flat;
        for d in (0..f.dim()).rev() {
            idx[d] = (rem % shape[d]) as i64;
            rem /= shape[d];
        }
        let mut acc = 0.0;
        'w: for (off, m) in &weights {
            let mut lin = 0usize;
            for d in 0..f.dim() {
                let t = idx[d] - off[d];
                if t < 0 || t >= shape[d] as i64 {
                    continue 'w;
                }
                lin += t as usize * strides[d];
            }
            acc += m * vals[lin];
        }
        *o = acc;
    }
    GridFunction::new(f.origin().to_vec(), dx, shape.to_vec(), out)
}

/// `||rho_eps * f - f||_p / eps^s`.
pub fn smoothing_functional(
    f: &GridFunction,
    family: &KernelFamily,
    epsilon: f64,
    s: f64,
    p: LpExponent,
) -> Result<f64> {
    let k = family.instantiate(epsilon)?;
    let g = convolve(f, &k)?;
    let diff: Vec<f64> = g.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
    let d = GridFunction::new(f.origin().to_vec(), f.spacing(), f.shape().to_vec(), diff)?;
    Ok(lp_norm(&d, p) / epsilon.powf(s))
}
