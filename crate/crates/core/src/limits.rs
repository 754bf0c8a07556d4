//! Limit sweeps: Bourgain-Brezis-Mironescu (r -> 1), Maz'ya-Shaposhnikova (r -> 0),
//! the Lipschitz endpoint and the D_omega / Nikol'skii equivalence ratio.

use crate::error::{precondition, Result};
use crate::functionals::{
    besov_from_profile, d_omega_sweep, d_omega_sweep_on, max_reach, nikolskii_from_profile, DifferenceProfile, HQuadrature,
    SamplePolicy, SemiNormSpec,
};
use crate::gridfn::{GridFunction, LpExponent};
use crate::kernels::KernelFamily;
use crate::omega::OmegaFn;
use crate::quad::sphere_area;
use statrs::function::gamma::ln_gamma;

/// Values of a functional along a parameter grid, with extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub parameter: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
    /// Max over the last fifth of the grid (limsup surrogate).
    pub tail_max: f64,
    pub tail_min: f64,
    /// Linear least squares in the small parameter over the 4 finest nodes.
    pub extrapolated: f64,
    /// Linear extrapolation through the 2 finest nodes.
    pub richardson: f64,
    /// Max residual of the 4-node fit.
    pub fit_residual: f64,
    pub target: Option<f64>,
    pub relative_error: Option<f64>,
    pub method: &'static str,
}

impl SweepReport {
    /// `small` maps grid values to the small parameter of the limit.
    pub fn new(
        parameter: &str,
        grid: Vec<f64>,
        values: Vec<f64>,
        small: impl Fn(f64) -> f64,
        target: Option<f64>,
    ) -> Result<Self> {
        if grid.len() != values.len() || grid.is_empty() {
            return precondition("sweep grid and values differ in length");
        }
        let monotone = grid.windows(2).all(|w| w[1] > w[0]) || grid.windows(2).all(|w| w[1] < w[0]);
        if !monotone {
            return precondition("sweep grid must be strictly monotone");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::Numerical(format!("{parameter} sweep produced non-finite values")));
        }
        let n = grid.len();
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tail = n.div_ceil(5);
        let tail_max = values[n - tail..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tail_min = values[n - tail..].iter().copied().fold(f64::INFINITY, f64::min);
        // Order nodes from coarse to fine by the small parameter.
        let mut pts: Vec<(f64, f64)> = grid.iter().map(|&g| small(g)).zip(values.iter().copied()).collect();
        pts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let fine = &pts[n.saturating_sub(4)..];
        let (a, b) = linear_fit(fine);
        let fit_residual = fine.iter().map(|(t, v)| (v - (a + b * t)).abs()).fold(0.0, f64::max);
        let richardson = if n >= 2 {
            let (t1, v1) = pts[n - 2];
            let (t2, v2) = pts[n - 1];
            v2 - t2 * (v1 - v2) / (t1 - t2)
        } else {
            pts[0].1
        };
        let relative_error = target.map(|t| rel_err(a, t));
        Ok(SweepReport {
            parameter: parameter.to_string(),
            grid,
            values,
            sup,
            tail_max,
            tail_min,
            extrapolated: a,
            richardson,
            fit_residual,
            target,
            relative_error,
            method: "lsq4",
        })
    }

    /// `sweep,<name>,param,value,target,relerr` rows plus a summary line.
    pub fn to_csv(&self, name: &str) -> String {
        let mut out = String::from("sweep,name,param,value,target,relerr\n");
        for (g, v) in self.grid.iter().zip(&self.values) {
            let (t, e) = match self.target {
                Some(t) => (format!("{t}"), format!("{}", rel_err(*v, t))),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!("sweep,{name},{g},{v},{t},{e}\n"));
        }
        out.push_str(&format!(
            "# summary,{name},extrapolated={},method={},richardson={},sup={},tail_max={},tail_min={}\n",
            self.extrapolated, self.method, self.richardson, self.sup, self.tail_max, self.tail_min
        ));
        out
    }
}

fn rel_err(v: f64, t: f64) -> f64 {
    if t == 0.0 {
        v.abs()
    } else {
        (v - t).abs() / t.abs()
    }
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (pts[0].1, 0.0);
    }
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (mv - b * mt, b)
}

/// `K_{p,N} = int_{S^{N-1}} |sigma . e|^p = 2 pi^{(N-1)/2} Gamma((p+1)/2) / Gamma((N+p)/2)`.
pub fn bbm_constant(p: f64, dim: usize) -> Result<f64> {
    if !(p >= 1.0) || !(1..=3).contains(&dim) {
        return precondition("bbm_constant needs p >= 1 and N in 1..=3");
    }
    if dim == 1 {
        return Ok(2.0);
    }
    let n = dim as f64;
    let lg = ln_gamma((p + 1.0) / 2.0) - ln_gamma((n + p) / 2.0);
    Ok(2.0 * std::f64::consts::PI.powf((n - 1.0) / 2.0) * lg.exp())
}

/// Gradient norm with the discrete total variation in the 1D, p = 1 case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientNorm {
    pub value: f64,
    pub total_variation: Option<f64>,
}

/// `|| |grad f| ||_p` from centered differences (one-sided at the box faces).
pub fn gradient_lp_norm(f: &GridFunction, p: LpExponent) -> GradientNorm {
    let dx = f.spacing();
    let shape = f.shape();
    let strides = f.strides();
    let vals = f.values();
    let dim = f.dim();
    let mut mags = Vec::with_capacity(vals.len());
    let mut idx = vec![0usize; dim];
    for flat in 0..vals.len() {
        let mut rem = flat;
        for d in (0..dim).rev() {
            idx[d] = rem % shape[d];
            rem /= shape[d];
        }
        let mut g2 = 0.0;
        for d in 0..dim {
            let i = idx[d];
            let (a, b, h) = if i == 0 {
                (flat, flat + strides[d], dx)
            } else if i + 1 == shape[d] {
                (flat - strides[d], flat, dx)
            } else {
                (flat - strides[d], flat + strides[d], 2.0 * dx)
            };
            g2 += ((vals[b] - vals[a]) / h).powi(2);
        }
        mags.push(g2.sqrt());
    }
    let g = GridFunction::new(f.origin().to_vec(), dx, shape.to_vec(), mags).expect("same lattice");
    let value = crate::gridfn::lp_norm(&g, p);
    let total_variation = (dim == 1 && p == LpExponent::Finite(1.0))
        .then(|| vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum());
    GradientNorm { value, total_variation }
}

/// Lattice Lipschitz constant `max |f_{i+e} - f_i| / spacing`.
pub fn lipschitz_constant(f: &GridFunction) -> f64 {
    let dx = f.spacing();
    let mut best = 0.0f64;
    let shape = f.shape();
    let strides = f.strides();
    let vals = f.values();
    for d in 0..f.dim() {
        for flat in 0..vals.len() {
            let i = (flat / strides[d]) % shape[d];
            if i + 1 < shape[d] {
                best = best.max((vals[flat + strides[d]] - vals[flat]).abs() / dx);
            }
        }
    }
    best
}

fn check_open_unit(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return precondition("smoothness grid must lie in (0, 1)");
    }
    Ok(())
}

fn profile(f: &GridFunction, order: u32, p: LpExponent, quad: &HQuadrature) -> Result<DifferenceProfile> {
    let reach = quad.h_max.unwrap_or_else(|| max_reach(f, order));
    DifferenceProfile::lp(f, order, p, reach, quad.policy)
}

/// `(1 - r) p [f]^p_{W^{r,p}}` along `r_grid`, against `K_{p,N} ||grad f||_p^p`.
pub fn bbm_sweep(f: &GridFunction, p: f64, r_grid: &[f64], order: u32, quad: &HQuadrature) -> Result<SweepReport> {
    check_open_unit(r_grid)?;
    let pe = LpExponent::finite(p)?;
    let prof = profile(f, order, pe, quad)?;
    let values = r_grid
        .iter()
        .map(|&r| Ok((1.0 - r) * p * besov_from_profile(&prof, r, p, 1)?.value.powf(p)))
        .collect::<Result<Vec<_>>>()?;
    let g = gradient_lp_norm(f, pe);
    let grad = g.total_variation.unwrap_or(g.value);
    let target = bbm_constant(p, f.dim())? * grad.powf(p);
    SweepReport::new("r", r_grid.to_vec(), values, |r| 1.0 - r, Some(target))
}

/// `r p [f]^p_{W^{r,p}}` along `r_grid`, against `2 sigma_N ||f||_p^p`.
pub fn ms_sweep(f: &GridFunction, p: f64, r_grid: &[f64], quad: &HQuadrature) -> Result<SweepReport> {
    check_open_unit(r_grid)?;
    let pe = LpExponent::finite(p)?;
    let prof = profile(f, 1, pe, quad)?;
    if !prof.tail_is_exact() {
        return precondition(format!(
            "outer cutoff {} is below the support diameter; the |h| tail would be unresolved",
            prof.reach()
        ));
    }
    let values = r_grid
        .iter()
        .map(|&r| Ok(r * p * besov_from_profile(&prof, r, p, 1)?.value.powf(p)))
        .collect::<Result<Vec<_>>>()?;
    let target = 2.0 * sphere_area(f.dim()) * crate::gridfn::lp_norm(f, pe).powf(p);
    SweepReport::new("r", r_grid.to_vec(), values, |r| r, Some(target))
}

/// Lipschitz endpoint sweep with its comparator.
#[derive(Debug, Clone, PartialEq)]
pub struct LipSweep {
    pub report: SweepReport,
    /// `q^{-1/q} Lip(f)`.
    pub comparator: f64,
    /// `values / comparator`.
    pub ratios: Vec<f64>,
}

/// `(1 - r)^{1/q} (||f||_inf + [f]_{B^r_{inf,q}})` along `r_grid`.
pub fn lip_sweep(f: &GridFunction, q: f64, r_grid: &[f64], quad: &HQuadrature) -> Result<LipSweep> {
    check_open_unit(r_grid)?;
    if !(q >= 1.0) {
        return precondition("lip_sweep needs q >= 1");
    }
    let prof = profile(f, 1, LpExponent::Infinity, quad)?;
    let sup = crate::gridfn::lp_norm(f, LpExponent::Infinity);
    let values = r_grid
        .iter()
        .map(|&r| Ok((1.0 - r).powf(1.0 / q) * (sup + besov_from_profile(&prof, r, q, 1)?.value)))
        .collect::<Result<Vec<_>>>()?;
    let comparator = q.powf(-1.0 / q) * lipschitz_constant(f);
    let ratios = values
        .iter()
        .map(|v| if comparator > 0.0 { v / comparator } else { 0.0 })
        .collect();
    let report = SweepReport::new("r", r_grid.to_vec(), values, |r| 1.0 - r, None)?;
    Ok(LipSweep { report, comparator, ratios })
}

/// D_omega along an epsilon grid and its ratio to `omega(Nikol'skii semi-norm)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoSweep {
    pub report: SweepReport,
    pub nikolskii: f64,
    /// `sup_eps D_omega / omega(nikolskii)`.
    pub ratio: f64,
    pub limsup_ratio: f64,
    /// Largest relative quadrature tolerance along the grid.
    pub tolerance: f64,
}

pub fn theo_ratio_sweep(
    f: &GridFunction,
    family: &KernelFamily,
    omega: &OmegaFn,
    spec: &SemiNormSpec,
    eps_grid: &[f64],
    quad: &HQuadrature,
) -> Result<TheoSweep> {
    let prof = profile(f, spec.order, spec.p, quad)?;
    theo_ratio_on(f, &prof, family, omega, spec.s, eps_grid)
}

/// [`theo_ratio_sweep`] on a precomputed profile of `f`, shared across kernels and omegas.
pub fn theo_ratio_on(
    f: &GridFunction,
    prof: &DifferenceProfile,
    family: &KernelFamily,
    omega: &OmegaFn,
    s: f64,
    eps_grid: &[f64],
) -> Result<TheoSweep> {
    let sweep = d_omega_sweep_on(f, prof, family, eps_grid, omega, s)?;
    let grid: Vec<f64> = sweep.iter().map(|(e, _)| *e).collect();
    let values: Vec<f64> = sweep.iter().map(|(_, e)| e.value).collect();
    let tolerance = sweep
        .iter()
        .map(|(_, e)| if e.value > 0.0 { e.tolerance / e.value } else { 0.0 })
        .fold(0.0, f64::max);
    let nik = nikolskii_from_profile(prof, s).value;
    let report = SweepReport::new("epsilon", grid, values, |e| e, None)?;
    let denom = omega.eval(nik);
    let (ratio, limsup_ratio) = if denom > 0.0 {
        (report.sup / denom, report.tail_max / denom)
    } else {
        (0.0, 0.0)
    };
    Ok(TheoSweep {
        report,
        nikolskii: nik,
        ratio,
        limsup_ratio,
        tolerance,
    })
}

/// `D_omega` at `eps_k = h_max 2^{-k}` for `k` in `ks`; every node must fit the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySweep {
    pub ks: Vec<u32>,
    pub report: SweepReport,
    /// Value at the last `k` over the value at the first.
    pub ratio: f64,
}

pub fn approx_decay(
    f: &GridFunction,
    family: &KernelFamily,
    omega: &OmegaFn,
    spec: &SemiNormSpec,
    h_max: f64,
    ks: std::ops::RangeInclusive<u32>,
    quad: &HQuadrature,
) -> Result<DecaySweep> {
    let ks: Vec<u32> = ks.collect();
    if ks.len() < 2 {
        return precondition("approx decay needs at least two levels");
    }
    let eps: Vec<f64> = ks.iter().map(|&k| h_max * 0.5f64.powi(k as i32)).collect();
    let sweep = d_omega_sweep(f, family, &eps, omega, spec, quad)?;
    if sweep.len() != eps.len() {
        return precondition(format!(
            "only {} of {} epsilon nodes fit the lattice; refine the spacing or widen the margin",
            sweep.len(),
            eps.len()
        ));
    }
    let values: Vec<f64> = sweep.iter().map(|(_, e)| e.value).collect();
    let ratio = if values[0] > 0.0 { values[values.len() - 1] / values[0] } else { 0.0 };
    let report = SweepReport::new("epsilon", eps, values, |e| e, None)?;
    Ok(DecaySweep { ks, report, ratio })
}

/// One member of the built-in test-function corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub generator: &'static str,
    pub bx: &'static str,
    pub spacing: f64,
    pub s: f64,
    pub p: f64,
    pub order: u32,
}

impl CorpusEntry {
    pub fn sample(&self) -> Result<GridFunction> {
        self.sample_at(self.spacing)
    }

    pub fn sample_at(&self, spacing: f64) -> Result<GridFunction> {
        let g = crate::gridfn::Generator::parse(self.generator)?;
        GridFunction::sample(&g, &crate::gridfn::GridBox::parse(self.bx)?, spacing, 0.0)
    }

    /// Largest shift and kernel scale used for this entry: the coarse-lattice reach, floored.
    pub fn h_max(&self) -> Result<f64> {
        Ok(max_reach(&self.sample()?, self.order).floor())
    }

    pub fn spec(&self) -> Result<SemiNormSpec> {
        let p = LpExponent::finite(self.p)?;
        SemiNormSpec::new(self.s, p, LpExponent::Infinity, self.order)
    }
}

/// Twelve functions with finite Nikol'skii semi-norm at the listed `(s, p, M)`.
pub fn corpus() -> Vec<CorpusEntry> {
    let e = |name, generator, bx, spacing, s, p, order| CorpusEntry {
        name,
        generator,
        bx,
        spacing,
        s,
        p,
        order,
    };
    let dx = 1.0 / 512.0;
    vec![
        e("indicator-half", "indicator(0,1)", "-3:4", dx, 0.5, 1.0, 1),
        e("indicator-one", "indicator(0,1)", "-3:4", dx, 1.0, 1.0, 1),
        e("indicator-p2", "indicator(0,1)", "-3:4", dx, 0.5, 2.0, 1),
        e("tent", "tent()", "-4:4", dx, 0.5, 2.0, 1),
        e("tent-m2", "tent()", "-7:7", dx, 1.0, 1.0, 2),
        e("bump", "bump()", "-4:4", dx, 0.5, 2.0, 1),
        e("gaussian", "gaussian(0.5)", "-6:6", dx, 0.75, 2.0, 1),
        e("cosbump-m2", "cosbump()", "-7:7", dx, 1.5, 2.0, 2),
        e("ramp", "ramp(1,1)", "-3:6", dx, 0.5, 1.0, 1),
        e("smoothtent-m2", "smoothtent()", "-8:8", dx, 1.0, 2.0, 2),
        e("tent-2d", "tent(dim=2)", "-3:3,-3:3", 1.0 / 16.0, 0.5, 2.0, 1),
        e("bump-2d", "bump(dim=2)", "-5:5,-5:5", 1.0 / 16.0, 1.0, 1.0, 2),
    ]
}

/// Default policy for sweeps (all points in 1D, stratified in higher dimension).
pub fn default_quadrature() -> HQuadrature {
    HQuadrature {
        policy: SamplePolicy::Stratified(64),
        ..Default::default()
    }
}
