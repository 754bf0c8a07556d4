//! Kernel constructions: radial averaging over dilations, and stacking clipped copies.

use super::{Kernel, Shape};
use crate::error::{precondition, Error, Result};
use crate::quad::sphere_area;

/// An annulus `inner <= |z| <= outer` on which a kernel is bounded below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
    pub infimum: f64,
}

const SCAN_ANNULI: usize = 64;

/// `rho*(z) = C / (1 - theta0) int_{theta0}^1 rho(theta z) dtheta` with
/// `C = (1 - theta0) / int_{theta0}^1 theta^{-N} dtheta`.
///
/// Also returns an annulus where `rho*` has a positive infimum.
pub fn radialize(base: &Kernel, theta0: f64) -> Result<(Kernel, Annulus)> {
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return precondition(format!("theta0 must lie in (0, 1), got {theta0}"));
    }
    let n = base.dim as f64;
    let int_theta = if base.dim == 1 {
        -theta0.ln()
    } else {
        (theta0.powf(1.0 - n) - 1.0) / (n - 1.0)
    };
    let c = (1.0 - theta0) / int_theta;
    let kernel = Kernel::from_shape(
        base.dim,
        Shape::Radialized {
            base: Box::new(base.clone()),
            theta0,
            c,
        },
        format!("radialize({},{theta0})", base.label),
    )?;

    // A base annulus [c1, c2] with c2 = c1 / sqrt(theta0) that carries mass makes
    // rho* positive on [c2, c1 / theta0].
    let ratio = theta0.sqrt();
    let top = base.effective_radius();
    let mut annulus = None;
    for k in 0..SCAN_ANNULI {
        let c2 = top * ratio.powi(k as i32);
        let c1 = c2 * ratio;
        if base.radial_moment(c1, c2, 0.0) > 1e-12 {
            annulus = Some((c2, c1 / theta0));
            break;
        }
    }
    let (inner, outer) = annulus.ok_or_else(|| {
        Error::Numerical(format!(
            "no mass-carrying annulus found in {SCAN_ANNULI} scans below radius {top}"
        ))
    })?;
    let infimum = (0..=200)
        .map(|i| kernel.density(inner + (outer - inner) * i as f64 / 200.0))
        .fold(f64::INFINITY, f64::min);
    if !(infimum > 0.0) {
        return Err(Error::Numerical(format!(
            "radialized kernel vanishes on the annulus [{inner}, {outer}]"
        )));
    }
    Ok((kernel, Annulus { inner, outer, infimum }))
}

/// A continuous nondecreasing radial minorant of a stacked kernel, already
/// divided by the normalization constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Minorant {
    /// `slope (t - start)_+`.
    Linear { slope: f64, start: f64 },
    /// `height min(1, (t - start)_+ / (end - start))`.
    Ramp { height: f64, start: f64, end: f64 },
}

impl Minorant {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Minorant::Linear { slope, start } => slope * (t - start).max(0.0),
            Minorant::Ramp { height, start, end } => height * ((t - start).max(0.0) / (end - start)).min(1.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClipStack {
    pub kernel: Kernel,
    /// Index of the last copy; copies are `j = 0..=levels`.
    pub levels: usize,
    pub thetas: Vec<f64>,
    /// Mass of the unnormalized stack over `B_{r2}`.
    pub normalizer: f64,
    pub minorant: Minorant,
    pub trivial: bool,
}

/// Stacks `theta_j^{-N} Psi(t / theta_j)`, `Psi = alpha 1_{(r1, r2)}`,
/// `theta_j = (r1/r2)^j`, so that the copies tile `(r2 theta_{k+1}, r2)`.
pub fn clip_stack(dim: usize, r1: f64, r2: f64, alpha: f64) -> Result<ClipStack> {
    if !(r1 > 0.0 && r2 > r1 && alpha > 0.0 && r2.is_finite()) {
        return precondition("clip_stack needs 0 < r1 < r2 and alpha > 0");
    }
    let n = dim as f64;
    let trivial = r1 < r2 / 4.0;
    let levels = if trivial {
        0
    } else {
        let bound = (0.2f64).ln() / (r1 / r2).ln();
        (bound.floor() as usize) + 1
    };
    let thetas: Vec<f64> = (0..=levels).map(|j| (r1 / r2).powi(j as i32)).collect();
    let copy_mass = alpha * sphere_area(dim) * (r2.powf(n) - r1.powf(n)) / n;
    let normalizer = copy_mass * thetas.len() as f64;
    let minorant = if trivial {
        Minorant::Ramp {
            height: alpha / normalizer,
            start: r1,
            end: r2 / 4.0,
        }
    } else {
        Minorant::Linear {
            slope: 5.0 * alpha / (4.0 * r2) / normalizer,
            start: r2 / 5.0,
        }
    };
    let kernel = Kernel::from_shape(
        dim,
        Shape::Stack {
            alpha,
            r1,
            r2,
            thetas: thetas.clone(),
            c: normalizer,
        },
        format!("clipstack({r1},{r2},{alpha})"),
    )?;
    Ok(ClipStack {
        kernel,
        levels,
        thetas,
        normalizer,
        minorant,
        trivial,
    })
}
