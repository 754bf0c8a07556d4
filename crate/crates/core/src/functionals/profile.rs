//! Radial profiles of `h -> ||Delta_h^M f||` over lattice shifts, and the radial
//! product-trapezoid quadrature built on them.
//!
//! The integrand is sampled at every lattice radius up to the profile reach; between
//! consecutive radii it is interpolated linearly, with the weight handled through
//! its exact moments. Below one lattice spacing a power-law model of the difference
//! norm is integrated in closed form (or on geometric bins), and beyond the reach the
//! disjoint-translate value is used.

use crate::error::{precondition, Result};
use crate::findiff::{binomial, difference_coefficients, disjoint_distance_cells, for_each_difference};
use crate::gridfn::{lp_norm, GridFunction, LpAccum, LpExponent};
use crate::kernels::KernelInstance;
use crate::omega::{InnerForm, InnerOmega};
use crate::quad::{power_integral, sphere_area};
use rayon::prelude::*;

/// Which shifts are evaluated in each radial bin (2D and 3D only; 1D uses all).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplePolicy {
    AllLatticePoints,
    /// At most `n` shifts per bin, evenly spread in angle.
    Stratified(usize),
}

/// Discretization of the h-integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HQuadrature {
    /// Largest sampled `|h|`; defaults to the zero margin divided by `M`.
    pub h_max: Option<f64>,
    /// Radius below which the power-law core model is used; defaults to one spacing.
    pub inner_cutoff: Option<f64>,
    pub policy: SamplePolicy,
}

impl Default for HQuadrature {
    fn default() -> Self {
        HQuadrature {
            h_max: None,
            inner_cutoff: None,
            policy: SamplePolicy::Stratified(64),
        }
    }
}

impl HQuadrature {
    pub fn with_h_max(h_max: f64) -> Self {
        HQuadrature {
            h_max: Some(h_max),
            ..Default::default()
        }
    }

    /// Dyadic reporting shells `[h_max 2^{-j-1}, h_max 2^{-j})` down to one spacing.
    pub fn shell_boundaries(h_max: f64, spacing: f64) -> Vec<f64> {
        let mut b = vec![h_max];
        while *b.last().unwrap() / 2.0 >= spacing * (1.0 - 1e-12) {
            b.push(b.last().unwrap() / 2.0);
        }
        b
    }
}

/// What is stored per shift.
#[derive(Debug, Clone)]
pub(crate) enum ProfileKind {
    /// `||Delta_h^M f||_p`.
    Lp(LpExponent),
    /// `int Omega(|Delta_h^M f(x)| / |h|^s) dx`; for `Omega = t^p` the factor
    /// `|h|^{-s p}` is left to the integrand and `int |Delta_h^M f|^p dx` is stored.
    Inner { omega: InnerOmega, s: f64, abs_values: Vec<f64> },
}

#[derive(Debug, Clone)]
pub(crate) struct Node {
    /// Nominal radius of the bin.
    pub radius: f64,
    /// `(|h|, value)` for every sampled shift in the bin.
    pub samples: Vec<(f64, f64)>,
}

/// A radial profile of per-shift values, computed once and shared by all
/// functionals of one `(f, M, p)`.
#[derive(Debug, Clone)]
pub struct DifferenceProfile {
    pub(crate) dim: usize,
    pub(crate) spacing: f64,
    pub(crate) order: u32,
    pub(crate) reach: f64,
    pub(crate) nodes: Vec<Node>,
    pub(crate) kind: ProfileKind,
    /// `|h|` beyond which the translates `f(. + j h)` are disjoint.
    pub(crate) diameter: f64,
    /// `||f||` scaled by the binomial factor: the exact `L^p` value beyond `diameter`.
    pub(crate) far_lp: f64,
    /// `||f||_p` for `L^p` profiles.
    pub(crate) f_norm: f64,
    pub(crate) cell_volume: f64,
    /// Exponent `a` of the model `v(r) = v_1 (r / r_1)^a` below the first node.
    pub(crate) core_exponent: f64,
    pub(crate) measured_exponent: f64,
}

/// Required zero margin (in length units) for shifts up to `h_max`.
pub fn max_reach(f: &GridFunction, order: u32) -> f64 {
    let m = f
        .margins()
        .into_iter()
        .map(|(a, b)| a.min(b))
        .min()
        .unwrap_or(0);
    (m / order as usize) as f64 * f.spacing()
}

fn shifts_by_bin(dim: usize, kmax: usize, policy: SamplePolicy) -> Vec<Vec<Vec<i64>>> {
    let mut bins: Vec<Vec<Vec<i64>>> = vec![Vec::new(); kmax];
    if dim == 1 {
        for k in 1..=kmax {
            bins[k - 1].push(vec![k as i64]);
        }
        return bins;
    }
    let lim = kmax as i64 + 1;
    let mut push = |v: Vec<i64>| {
        let r = v.iter().map(|x| (x * x) as f64).sum::<f64>().sqrt();
        let k = r.round() as usize;
        if k >= 1 && k <= kmax {
            bins[k - 1].push(v);
        }
    };
    // Half space: the first nonzero component is positive, since
    // ||Delta_{-h} f|| = ||Delta_h f||.
    if dim == 2 {
        for a in 0..=lim {
            for b in -lim..=lim {
                if a > 0 || b > 0 {
                    push(vec![a, b]);
                }
            }
        }
    } else {
        for a in 0..=lim {
            for b in -lim..=lim {
                for c in -lim..=lim {
                    if a > 0 || (a == 0 && b > 0) || (a == 0 && b == 0 && c > 0) {
                        push(vec![a, b, c]);
                    }
                }
            }
        }
    }
    for bin in bins.iter_mut() {
        bin.sort_by(|u, v| angle_key(u).partial_cmp(&angle_key(v)).unwrap().then(u.cmp(v)));
        if let SamplePolicy::Stratified(n) = policy {
            if n > 0 && bin.len() > n {
                let len = bin.len();
                let picked: Vec<Vec<i64>> = (0..n).map(|i| bin[i * len / n].clone()).collect();
                *bin = picked;
            }
        }
    }
    bins
}

fn angle_key(v: &[i64]) -> (f64, f64) {
    let x = v[0] as f64;
    let y = v[1] as f64;
    let z = v.get(2).copied().unwrap_or(0) as f64;
    (y.atan2(x), z.atan2((x * x + y * y).sqrt()))
}

impl DifferenceProfile {
    /// Profile of `||Delta_h^M f||_p` for `|h|` up to `reach`.
    pub fn lp(f: &GridFunction, order: u32, p: LpExponent, reach: f64, policy: SamplePolicy) -> Result<Self> {
        DifferenceProfile::build(f, order, ProfileKind::Lp(p), reach, policy)
    }

    /// Profile of `int Omega(|Delta_h^M f| / |h|^s) dx`.
    pub fn inner(
        f: &GridFunction,
        order: u32,
        omega: InnerOmega,
        s: f64,
        reach: f64,
        policy: SamplePolicy,
    ) -> Result<Self> {
        let abs_values = f.values().iter().filter(|v| **v != 0.0).map(|v| v.abs()).collect();
        DifferenceProfile::build(f, order, ProfileKind::Inner { omega, s, abs_values }, reach, policy)
    }

    fn build(f: &GridFunction, order: u32, kind: ProfileKind, reach: f64, policy: SamplePolicy) -> Result<Self> {
        if order == 0 || order > crate::findiff::MAX_ORDER {
            return precondition("difference order must be in 1..=6");
        }
        let dx = f.spacing();
        let kmax = (reach / dx + 1e-9).floor() as usize;
        if kmax < 2 {
            return precondition(format!(
                "profile reach {reach} must cover at least two lattice spacings of {dx}"
            ));
        }
        let allowed = max_reach(f, order);
        if reach > allowed * (1.0 + 1e-12) + 1e-15 {
            let m = f.margins().into_iter().map(|(a, b)| a.min(b)).min().unwrap_or(0);
            return Err(crate::Error::Margin {
                axis: 0,
                needed: order as usize * kmax,
                available: m,
            });
        }
        let coeffs = difference_coefficients(order);
        let bins = shifts_by_bin(f.dim(), kmax, policy);
        let flat: Vec<(usize, Vec<i64>)> = bins
            .iter()
            .enumerate()
            .flat_map(|(k, b)| b.iter().map(move |v| (k, v.clone())))
            .collect();
        let cell = f.cell_volume();
        let values: Vec<(usize, f64, f64)> = flat
            .par_iter()
            .map(|(k, steps)| {
                let r = dx * steps.iter().map(|x| (x * x) as f64).sum::<f64>().sqrt();
                let v = match &kind {
                    ProfileKind::Lp(p) => {
                        let acc = LpAccum::new(*p);
                        let mut s = 0.0;
                        for_each_difference(f, steps, &coeffs, |_, d| s = acc.term(s, d));
                        acc.finish(s, cell)
                    }
                    ProfileKind::Inner { omega, s, .. } => {
                        let scale = if omega.form == InnerForm::Power { 1.0 } else { r.powf(-s) };
                        let mut acc = 0.0;
                        for_each_difference(f, steps, &coeffs, |_, d| {
                            if d != 0.0 {
                                acc += omega.eval(d.abs() * scale)
                            }
                        });
                        acc * cell
                    }
                };
                (*k, r, v)
            })
            .collect();
        let mut nodes: Vec<Node> = (0..kmax)
            .map(|k| Node {
                radius: (k + 1) as f64 * dx,
                samples: Vec::new(),
            })
            .collect();
        for (k, r, v) in values {
            nodes[k].samples.push((r, v));
        }
        let (far_lp, f_norm) = match &kind {
            ProfileKind::Lp(p) => (crate::findiff::disjoint_translate_norm(f, order, *p), lp_norm(f, *p)),
            ProfileKind::Inner { .. } => (f64::NAN, f64::NAN),
        };
        let target = match &kind {
            ProfileKind::Lp(_) => order as f64,
            ProfileKind::Inner { omega, .. } if omega.form == InnerForm::Power => order as f64 * omega.p,
            ProfileKind::Inner { omega, s, .. } => (order as f64 - s) * omega.p,
        };
        let mut prof = DifferenceProfile {
            dim: f.dim(),
            spacing: dx,
            order,
            reach: kmax as f64 * dx,
            nodes,
            kind,
            diameter: disjoint_distance_cells(f) * dx,
            far_lp,
            f_norm,
            cell_volume: cell,
            core_exponent: target,
            measured_exponent: target,
        };
        let v1 = prof.node_value(0, 0.0);
        let v2 = prof.node_value(1, 0.0);
        if v1 > 0.0 && v2 > 0.0 {
            let a = (v2 / v1).log2();
            prof.measured_exponent = a;
            if (a - target).abs() > 0.1 * target.max(1.0) {
                prof.core_exponent = a.clamp(0.0, target.max(0.0));
            }
        }
        Ok(prof)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn reach(&self) -> f64 {
        self.reach
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn core_exponent(&self) -> f64 {
        self.core_exponent
    }

    /// Mean of `value * (radius / |h|)^b` over the bin: the value rescaled to the
    /// nominal radius under a local `r^b` law.
    fn node_value(&self, k: usize, b: f64) -> f64 {
        let node = &self.nodes[k];
        let n = node.samples.len() as f64;
        node.samples
            .iter()
            .map(|(r, v)| if b == 0.0 { *v } else { v * (node.radius / r).powf(b) })
            .sum::<f64>()
            / n
    }

    /// Every sampled `(|h|, value)`, ordered by radius bin.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().flat_map(|n| n.samples.iter().copied())
    }

    /// Per-shift value at `|h| = r >= diameter` (exact) or the best available estimate.
    pub(crate) fn far_value(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::Lp(_) => self.far_lp,
            ProfileKind::Inner { omega, s, abs_values } => {
                let scale = if omega.form == InnerForm::Power { 1.0 } else { r.powf(-s) };
                let mut acc = 0.0;
                for j in 0..=self.order {
                    let c = binomial(self.order, j) * scale;
                    acc += abs_values.iter().map(|v| omega.eval(c * v)).sum::<f64>();
                }
                acc * self.cell_volume
            }
        }
    }

    /// Radial power `-s p` left out of a power-law inner profile, else 0.
    pub fn inner_radial_power(&self) -> f64 {
        match &self.kind {
            ProfileKind::Inner { omega, s, .. } if omega.form == InnerForm::Power => -s * omega.p,
            _ => 0.0,
        }
    }

    /// Whether the sampled range reaches the disjoint-translate regime.
    pub fn tail_is_exact(&self) -> bool {
        self.reach >= self.diameter
    }

    pub(crate) fn last_value(&self) -> f64 {
        self.node_value(self.nodes.len() - 1, 0.0)
    }

}

/// A radial weight on `(0, inf)` known through its moments `int_lo^hi w(r) r^beta dr`.
pub trait RadialWeight: Sync {
    fn moment(&self, lo: f64, hi: f64, beta: f64) -> f64;
    /// Radius beyond which the weight vanishes (or is negligible).
    fn outer_radius(&self) -> f64;
}

impl RadialWeight for KernelInstance {
    fn moment(&self, lo: f64, hi: f64, beta: f64) -> f64 {
        self.radial_moment(lo, hi, beta)
    }
    fn outer_radius(&self) -> f64 {
        self.effective_radius()
    }
}

/// `sigma_N r^{-1 - s q}`: the Besov weight `dh / |h|^{N + s q}` in polar form.
#[derive(Debug, Clone, Copy)]
pub struct BesovWeight {
    pub dim: usize,
    pub exponent: f64,
}

impl RadialWeight for BesovWeight {
    fn moment(&self, lo: f64, hi: f64, beta: f64) -> f64 {
        sphere_area(self.dim) * power_integral(lo, hi, -1.0 - self.exponent + beta)
    }
    fn outer_radius(&self) -> f64 {
        f64::INFINITY
    }
}

/// `F(v, r) = G(v, r) r^b`; the quadrature interpolates `G` linearly between nodes
/// and integrates `r^b` against the weight exactly.
pub trait Integrand: Sync {
    fn radial_power(&self) -> f64;
    fn g(&self, v: f64, r: f64) -> f64;
    /// `(c, alpha)` when `G(v, r) = c v^alpha`.
    fn power_law(&self) -> Option<(f64, f64)>;
}

/// Quadrature output with the contributions used for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub core: f64,
    pub tail: f64,
    /// Bias bound from the core model and an unresolved tail.
    pub tolerance: f64,
    /// `(shell index j, contribution)` over dyadic shells of the profile reach.
    pub shells: Vec<(usize, f64)>,
}

const BINS_PER_OCTAVE: f64 = 16.0;

fn segment(w: &dyn RadialWeight, b: f64, ra: f64, ga: f64, rb: f64, gb: f64) -> f64 {
    let w0 = w.moment(ra, rb, b);
    if w0 == 0.0 {
        return 0.0;
    }
    if ga == gb {
        return ga * w0;
    }
    let w1 = w.moment(ra, rb, b + 1.0);
    let d = rb - ra;
    // Linear G on [ra, rb], written around the left end to limit cancellation.
    let slope = (gb - ga) / d;
    ga * w0 + slope * (w1 - ra * w0)
}

fn geometric_integral(
    w: &dyn RadialWeight,
    integrand: &dyn Integrand,
    b: f64,
    lo: f64,
    hi: f64,
    value: &dyn Fn(f64) -> f64,
) -> f64 {
    let n = (((hi / lo).log2() * BINS_PER_OCTAVE).ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / n as f64);
    let mut acc = 0.0;
    let mut a = lo;
    let mut ga = integrand.g(value(a), a);
    for i in 0..n {
        let c = if i + 1 == n { hi } else { a * ratio };
        let gc = integrand.g(value(c), c);
        acc += segment(w, b, a, ga, c, gc);
        a = c;
        ga = gc;
    }
    acc
}

impl DifferenceProfile {
    fn core_integral(&self, w: &dyn RadialWeight, integrand: &dyn Integrand, b: f64, r1: f64, v1: f64, a: f64) -> f64 {
        if let Some((c, alpha)) = integrand.power_law() {
            if v1 == 0.0 {
                return 0.0;
            }
            return c * v1.powf(alpha) * r1.powf(-a * alpha) * w.moment(0.0, r1, b + a * alpha);
        }
        let value = |r: f64| v1 * (r / r1).powf(a);
        let step = 2f64.powf(-1.0 / BINS_PER_OCTAVE);
        let mut acc = 0.0;
        let mut hi = r1;
        let mut g_hi = integrand.g(value(hi), hi);
        let mut quiet = 0;
        while hi > 1e-290 {
            let mut octave = 0.0;
            for _ in 0..BINS_PER_OCTAVE as usize {
                let lo = hi * step;
                let g_lo = integrand.g(value(lo), lo);
                octave += segment(w, b, lo, g_lo, hi, g_hi);
                hi = lo;
                g_hi = g_lo;
            }
            acc += octave;
            if octave.abs() <= 1e-17 * acc.abs() || w.moment(0.0, hi, 0.0) == 0.0 {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        acc
    }

    fn tail_integral(&self, w: &dyn RadialWeight, integrand: &dyn Integrand, b: f64, r0: f64, value: &dyn Fn(f64) -> f64, constant: bool) -> Result<f64> {
        if constant {
            if let Some((c, alpha)) = integrand.power_law() {
                let v = value(r0);
                if v == 0.0 {
                    return Ok(0.0);
                }
                return Ok(c * v.powf(alpha) * w.moment(r0, f64::INFINITY, b));
            }
        }
        let outer = w.outer_radius();
        if r0 >= outer {
            return Ok(0.0);
        }
        if !outer.is_finite() {
            return precondition("a non-power integrand needs a weight with bounded support");
        }
        Ok(geometric_integral(w, integrand, b, r0, outer, value))
    }

    /// `int_0^inf w(r) F(v(r), r) dr` with `v` the (angular-mean) profile.
    pub fn integrate(&self, w: &dyn RadialWeight, integrand: &dyn Integrand) -> Result<QuadratureResult> {
        self.integrate_from(w, integrand, 1)
    }

    /// As [`integrate`](Self::integrate) with the core model used below node `first`.
    pub fn integrate_from(&self, w: &dyn RadialWeight, integrand: &dyn Integrand, first: usize) -> Result<QuadratureResult> {
        let first = first.max(1);
        if first >= self.nodes.len() {
            return precondition("inner cutoff lies beyond the profile reach");
        }
        let b = integrand.radial_power();
        let outer = w.outer_radius();
        let gs: Vec<f64> = (first - 1..self.nodes.len())
            .map(|k| integrand_node(self, integrand, k, b))
            .collect();
        let shells = HQuadrature::shell_boundaries(self.reach, self.spacing);
        let mut shell_acc = vec![0.0; shells.len()];
        let mut cells = 0.0;
        for i in 0..gs.len() - 1 {
            let k = first - 1 + i;
            let (ra, rb) = (self.nodes[k].radius, self.nodes[k + 1].radius);
            if ra >= outer {
                break;
            }
            let c = segment(w, b, ra, gs[i], rb, gs[i + 1]);
            cells += c;
            let mid = 0.5 * (ra + rb);
            let j = shells.iter().rposition(|&s| mid < s).unwrap_or(0);
            shell_acc[j.min(shells.len() - 1)] += c;
        }

        // Core below the first node.
        let r1 = self.nodes[first - 1].radius;
        let v1 = self.node_value(first - 1, self.core_exponent);
        let core = self.core_integral(w, integrand, b, r1, v1, self.core_exponent);
        let mut tolerance = 0.0;
        if (self.measured_exponent - self.core_exponent).abs() > 1e-12 && self.measured_exponent.is_finite() {
            let alt = self.core_integral(w, integrand, b, r1, v1, self.measured_exponent.max(0.0));
            if alt.is_finite() && core.is_finite() {
                tolerance += (alt - core).abs();
            }
        }

        // Tail beyond the last node.
        let r_last = self.nodes.last().unwrap().radius;
        let constant = matches!(self.kind, ProfileKind::Lp(_)) || self.inner_radial_power() != 0.0;
        let tail = self.tail_integral(w, integrand, b, r_last, &|r| self.far_value(r), constant)?;
        if !self.tail_is_exact() {
            let last = self.last_value();
            let alt = self.tail_integral(w, integrand, b, r_last, &|_| last, true)?;
            tolerance += (alt - tail).abs();
        }
        let value = core + cells + tail;
        if value.is_nan() {
            return Err(crate::Error::Numerical("quadrature produced NaN".into()));
        }
        Ok(QuadratureResult {
            value,
            core,
            tail,
            tolerance,
            shells: shell_acc.into_iter().enumerate().collect(),
        })
    }
}

fn integrand_node(p: &DifferenceProfile, f: &dyn Integrand, k: usize, b: f64) -> f64 {
    let node = &p.nodes[k];
    let n = node.samples.len() as f64;
    node.samples
        .iter()
        .map(|(r, v)| {
            let g = f.g(*v, *r);
            if b == 0.0 || *r == node.radius {
                g
            } else {
                g * (r / node.radius).powf(b)
            }
        })
        .sum::<f64>()
        / n
}
