//! Explicit sequences: the non-limiting dyadic bump function, the Cesaro-bounded
//! coefficient sequence and two concentrating sequences.

use crate::error::{precondition, Result};
use crate::findiff::{diff_lp_norm, forward_difference, LatticeShift};
use crate::functionals::{d_omega, HQuadrature, SemiNormSpec};
use crate::gridfn::{lp_distance, lp_norm, lp_norm_on, Generator, GridBox, GridFunction, LpExponent};
use crate::kernels::{KernelFamily, KernelInstance};
use crate::omega::OmegaFn;
use rayon::prelude::*;

/// `2 / (e ln 2)`.
pub fn cesaro_bound() -> f64 {
    2.0 / (std::f64::consts::E * std::f64::consts::LN_2)
}

/// `u_j = k` if `j = 2^k` with `k >= 1`, else 0, for `j = 1..=J`.
pub fn cesaro_sequence(j_max: u64) -> Result<Vec<u64>> {
    if j_max < 2 {
        return precondition("cesaro sequence needs J >= 2");
    }
    if j_max > 1 << 26 {
        return precondition("cesaro sequence materialized only up to J = 2^26; use cesaro_sum");
    }
    let mut u = vec![0; j_max as usize];
    let mut k = 1;
    while (1u64 << k) <= j_max {
        u[((1u64 << k) - 1) as usize] = k as u64;
        k += 1;
    }
    Ok(u)
}

/// `eps * sum_{j <= J} 2^{-j eps} u_j`, summed over the nonzero entries only.
pub fn cesaro_sum(j_max: u64, eps: f64) -> f64 {
    let mut s = 0.0;
    let mut k = 1u32;
    while k < 64 && (1u64 << k) <= j_max {
        let term = k as f64 * (-(2f64.powi(k as i32)) * eps * std::f64::consts::LN_2).exp();
        s += term;
        k += 1;
    }
    eps * s
}

#[derive(Debug, Clone)]
pub struct CesaroCheck {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
    pub argmax: f64,
    pub bound: f64,
}

impl CesaroCheck {
    pub fn holds(&self) -> bool {
        self.sup <= self.bound
    }
}

/// Log-spaced grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// The default grid: 60 log-spaced points on `[1e-4, 4]`.
pub fn cesaro_grid() -> Vec<f64> {
    log_grid(1e-4, 4.0, 60)
}

pub fn cesaro_bound_check(j_max: u64, grid: &[f64]) -> Result<CesaroCheck> {
    if j_max < 2 {
        return precondition("cesaro check needs J >= 2");
    }
    if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0)) {
        return precondition("epsilon grid must be nonempty and positive");
    }
    let values: Vec<f64> = grid.iter().map(|&e| cesaro_sum(j_max, e)).collect();
    let (i, sup) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    Ok(CesaroCheck {
        grid: grid.to_vec(),
        values,
        sup,
        argmax: grid[i],
        bound: cesaro_bound(),
    })
}

/// Samples per `2^{-j}` on each level's local grid.
pub const LEVEL_SAMPLES: usize = 64;
/// Half-width of the integration window used for the lower-bound constant.
pub const LOWER_BOUND_WINDOW: f64 = 0.1;
const MAX_LEVEL: u64 = 14;

#[derive(Debug, Clone)]
pub struct BumpLevel {
    pub j: u32,
    pub coefficient: u64,
    pub amplitude: f64,
    pub center: f64,
    pub scale: f64,
}

/// `f(x) = sum_j u_j^{1/q} 2^{-j(s - 1/p)} psi(2^j (x - m_j))` with `m_j = 2(M+2)j`
/// and `psi(t) = exp(1 - 1/(1-t^2))`.
#[derive(Debug, Clone)]
pub struct DyadicBumpFunction {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub order: u32,
    pub levels: Vec<BumpLevel>,
    pub samples_per_level: usize,
}

fn bump() -> Generator {
    Generator::Bump { dim: 1, radius: 1.0 }
}

impl DyadicBumpFunction {
    /// Radius of the bump profile support.
    pub const ETA: f64 = 1.0;

    /// Ball around `m_j` holding the support of `Delta_h^M f_j` for `|h| <= 2^{-j}`.
    pub fn window(&self, level: usize) -> GridBox {
        let l = &self.levels[level];
        let r = (self.order as f64 + Self::ETA) * l.scale;
        GridBox::new(vec![l.center - r], vec![l.center + r]).expect("valid window")
    }

    /// Smallest gap between consecutive windows.
    pub fn min_gap(&self) -> f64 {
        (1..self.levels.len())
            .map(|i| self.window(i).lo[0] - self.window(i - 1).hi[0])
            .fold(f64::INFINITY, f64::min)
    }

    fn level_generator(&self, level: usize) -> Generator {
        let l = &self.levels[level];
        Generator::Scale(
            l.amplitude,
            Box::new(Generator::Shift(
                vec![l.center],
                Box::new(Generator::Dilate(1.0 / l.scale, Box::new(bump()))),
            )),
        )
    }

    /// The j-th term alone on its own grid of spacing `2^{-j}/K`.
    pub fn local_grid(&self, level: usize) -> Result<GridFunction> {
        let l = &self.levels[level];
        let dx = l.scale / self.samples_per_level as f64;
        let half = (self.order as f64 + Self::ETA + 1.0) * l.scale;
        let bx = GridBox::new(vec![l.center - half], vec![l.center + half])?;
        GridFunction::sample(&self.level_generator(level), &bx, dx, self.order as f64 * l.scale)
    }

    /// All levels sampled on one lattice of the given spacing (a power of 2).
    pub fn global_grid(&self, spacing: f64) -> Result<GridFunction> {
        let first = self.levels.first().expect("at least one level");
        let last = self.levels.last().expect("at least one level");
        let bx = GridBox::new(vec![(first.center - 2.0).floor()], vec![(last.center + 2.0).ceil()])?;
        let gen = (1..self.levels.len()).fold(self.level_generator(0), |acc, i| {
            Generator::Sum(Box::new(acc), Box::new(self.level_generator(i)))
        });
        GridFunction::sample(&gen, &bx, spacing, self.order as f64)
    }

    /// `2^{js} max_{h in K_j} ||Delta_h^M f_j||_p` over lattice shifts `k in [K/2, K]`,
    /// with the shift maximizing it.
    pub fn shell_value(&self, level: usize) -> Result<(f64, f64)> {
        let g = self.local_grid(level)?;
        let l = &self.levels[level];
        let k = self.samples_per_level as i64;
        let p = LpExponent::finite(self.p)?;
        let order = self.order;
        let best = (k / 2..=k)
            .into_par_iter()
            .map(|c| {
                let h = LatticeShift::along(1, 0, c)?;
                Ok((diff_lp_norm(&g, &h, order, p)?, c))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
        let weight = 2f64.powf(l.j as f64 * self.s);
        Ok((weight * best.0, best.1 as f64 * g.spacing()))
    }
}

#[derive(Debug, Clone)]
pub struct NonlimitDiagnostics {
    /// `(j, u_j, shell value, c u_j^{1/q})` per level.
    pub shells: Vec<(u32, u64, f64, f64)>,
    /// The frozen lower-bound constant `c`.
    pub c: f64,
    /// `(eps, eps sum_j (u_j^{1/q} 2^{-j eps})^q)`.
    pub quark_side: Vec<(f64, f64)>,
    /// `2 q^{-1} / (e ln 2)`.
    pub quark_bound: f64,
}

impl NonlimitDiagnostics {
    pub fn quark_sup(&self) -> f64 {
        self.quark_side.iter().map(|x| x.1).fold(0.0, f64::max)
    }
    pub fn lower_bound_holds(&self) -> bool {
        self.shells.iter().all(|s| s.2 >= s.3 * (1.0 - 1e-9))
    }
}

pub fn nonlimit_function(s: f64, p: f64, q: f64, order: u32, j_max: u64) -> Result<DyadicBumpFunction> {
    if !(s > 0.0) || !(p >= 1.0) || !(q >= 1.0) || !q.is_finite() || !p.is_finite() {
        return precondition("nonlimit function needs s > 0 and finite p, q >= 1");
    }
    if order == 0 || order > crate::findiff::MAX_ORDER {
        return precondition(format!("order must be in 1..={}", crate::findiff::MAX_ORDER));
    }
    if j_max > MAX_LEVEL {
        return precondition(format!(
            "J = {j_max} exceeds {MAX_LEVEL}: level spacing 2^-J/{LEVEL_SAMPLES} loses the relative \
             precision of centers near 2(M+2)J in double precision difference stencils"
        ));
    }
    let u = cesaro_sequence(j_max)?;
    let levels = u
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| {
            let j = (i + 1) as u32;
            BumpLevel {
                j,
                coefficient: c,
                amplitude: (c as f64).powf(1.0 / q) * 2f64.powf(-(j as f64) * (s - 1.0 / p)),
                center: 2.0 * (order as f64 + 2.0) * j as f64,
                scale: 2f64.powi(-(j as i32)),
            }
        })
        .collect();
    let f = DyadicBumpFunction {
        s,
        p,
        q,
        order,
        levels,
        samples_per_level: LEVEL_SAMPLES,
    };
    assert!(f.min_gap() > 0.0, "level windows overlap");
    Ok(f)
}

/// `sup_{1/2 <= h <= 1} (int_{-w}^{w} |Delta_h^M psi|^p)^{1/p}` on a grid of spacing 1/1024.
pub fn lower_bound_constant(order: u32, p: f64, window: f64) -> Result<f64> {
    let k = 1024i64;
    let half = order as f64 + 2.0;
    let psi = GridFunction::sample(&bump(), &GridBox::new(vec![-half], vec![half])?, 1.0 / k as f64, order as f64)?;
    let region = GridBox::new(vec![-window], vec![window])?;
    let p = LpExponent::finite(p)?;
    let vals = (k / 2..=k)
        .into_par_iter()
        .map(|c| {
            let d = forward_difference(&psi, &LatticeShift::along(1, 0, c)?, order)?;
            lp_norm_on(&d, p, &region)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

pub fn nonlimit_diagnostics(f: &DyadicBumpFunction, grid: &[f64]) -> Result<NonlimitDiagnostics> {
    let c = lower_bound_constant(f.order, f.p, LOWER_BOUND_WINDOW)?;
    let mut shells = Vec::new();
    for (i, l) in f.levels.iter().enumerate() {
        let (v, _) = f.shell_value(i)?;
        shells.push((l.j, l.coefficient, v, c * (l.coefficient as f64).powf(1.0 / f.q)));
    }
    let quark_side = grid
        .iter()
        .map(|&e| {
            let s: f64 = f
                .levels
                .iter()
                .map(|l| ((l.coefficient as f64).powf(1.0 / f.q) * 2f64.powf(-(l.j as f64) * e)).powf(f.q))
                .sum();
            (e, e * s)
        })
        .collect();
    Ok(NonlimitDiagnostics {
        shells,
        c,
        quark_side,
        quark_bound: cesaro_bound() / f.q,
    })
}

fn profile_radius(profile: &Generator) -> Result<f64> {
    if profile.dim() != 1 {
        return precondition("concentration profiles are one-dimensional");
    }
    match profile.support() {
        Some((lo, hi)) => Ok(lo[0].abs().max(hi[0].abs())),
        None => precondition("concentration profile must be compactly supported"),
    }
}

/// `n^{a/p} Phi(n^a x)` on a lattice of spacing `2^{-ceil(log2 n^a)}/256`, so the
/// lattices of a sequence are nested. The box is `[-B, B]`, `B = ceil(R) + M + 1`.
fn concentrate(profile: &Generator, rate: f64, p: f64, order: u32, n: u64) -> Result<GridFunction> {
    if n == 0 {
        return precondition("sequence index n must be >= 1");
    }
    let radius = profile_radius(profile)?;
    let lambda = (n as f64).powf(rate);
    let level = lambda.log2().ceil().max(0.0) as i32;
    let dx = 2f64.powi(-level) / 256.0;
    let b = radius.ceil() + order as f64 + 1.0;
    let gen = Generator::Scale(
        lambda.powf(1.0 / p),
        Box::new(Generator::Dilate(lambda, Box::new(profile.clone()))),
    );
    GridFunction::sample(&gen, &GridBox::new(vec![-b], vec![b])?, dx, 0.0)
}

/// `f_n(x) = n^{(M-s)/(Mp)} Phi(n^{(M-s)/M} x)`.
pub fn noncompact_sequence(order: u32, s: f64, p: f64, n: u64, profile: &Generator) -> Result<GridFunction> {
    if !(s > 0.0 && s < order as f64) {
        return precondition("noncompact sequence needs 0 < s < M");
    }
    concentrate(profile, (order as f64 - s) / order as f64, p, order, n)
}

/// `f_n(x) = n^{gamma/(Mp)} Phi(n^{gamma/M} x)` and `rho_n = mspow` at `eps = 1/n`.
pub fn noncompact_besov_sequence(
    order: u32,
    s: f64,
    p: f64,
    q: f64,
    gamma: f64,
    n: u64,
    profile: &Generator,
) -> Result<(GridFunction, KernelInstance)> {
    if !(0.0..=1.0 / q + 1e-12).contains(&gamma) {
        return precondition(format!("gamma must lie in [0, 1/q] = [0, {}], got {gamma}", 1.0 / q));
    }
    if !(s > 0.0 && s < order as f64) {
        return precondition("noncompact sequence needs 0 < s < M");
    }
    let f = concentrate(profile, gamma / order as f64, p, order, n)?;
    let k = KernelFamily::mspow(1)?.instantiate(1.0 / n as f64)?;
    Ok((f, k))
}

#[derive(Debug, Clone)]
pub struct ConcentrationSweep {
    pub ns: Vec<u64>,
    pub norms: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `ln value` against `ln n`.
    pub fitted_exponent: f64,
    pub max_min_ratio: f64,
}

impl ConcentrationSweep {
    fn new(ns: Vec<u64>, norms: Vec<f64>, values: Vec<f64>) -> Self {
        let pts: Vec<(f64, f64)> = ns.iter().zip(&values).map(|(&n, &v)| ((n as f64).ln(), v.ln())).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        ConcentrationSweep {
            ns,
            norms,
            values,
            fitted_exponent: if sxx > 0.0 { sxy / sxx } else { 0.0 },
            max_min_ratio: hi / lo,
        }
    }
}

/// `int rho_n(h) ||Delta_h^M f_n||_p^p / |h|^{sp} dh` with `rho_n = family(1/n)`.
pub fn noncompact_sweep(
    order: u32,
    s: f64,
    p: f64,
    ns: &[u64],
    family: &KernelFamily,
    profile: &Generator,
    quad: &HQuadrature,
) -> Result<ConcentrationSweep> {
    let lp = LpExponent::finite(p)?;
    let spec = SemiNormSpec::new(s, lp, lp, order)?;
    let omega = OmegaFn::power(p)?;
    let mut norms = Vec::new();
    let mut values = Vec::new();
    for &n in ns {
        let f = noncompact_sequence(order, s, p, n, profile)?;
        norms.push(lp_norm(&f, lp));
        values.push(d_omega(&f, family, 1.0 / n as f64, &omega, &spec, quad)?.value);
    }
    Ok(ConcentrationSweep::new(ns.to_vec(), norms, values))
}

/// `int_{B_1} rho_n(h) ||Delta_h^M f_n||_p^q / |h|^{sq} dh` along `ns`.
#[allow(clippy::too_many_arguments)]
pub fn noncompact_besov_sweep(
    order: u32,
    s: f64,
    p: f64,
    q: f64,
    gamma: f64,
    ns: &[u64],
    profile: &Generator,
    quad: &HQuadrature,
) -> Result<ConcentrationSweep> {
    let lp = LpExponent::finite(p)?;
    let spec = SemiNormSpec::new(s, lp, LpExponent::finite(q)?, order)?;
    let omega = OmegaFn::power(q)?;
    let family = KernelFamily::mspow(1)?;
    let mut norms = Vec::new();
    let mut values = Vec::new();
    for &n in ns {
        let (f, _) = noncompact_besov_sequence(order, s, p, q, gamma, n, profile)?;
        norms.push(lp_norm(&f, lp));
        values.push(d_omega(&f, &family, 1.0 / n as f64, &omega, &spec, quad)?.value);
    }
    Ok(ConcentrationSweep::new(ns.to_vec(), norms, values))
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub matrix: Vec<Vec<f64>>,
    pub min_off_diagonal: f64,
    /// Spacing of the common lattice the distances were computed on.
    pub spacing: f64,
}

/// Pairwise `L^p(region)` distances after subsampling every member to the coarsest lattice.
pub fn compactness_probe(seq: &[GridFunction], region: &GridBox, p: LpExponent) -> Result<ProbeReport> {
    if seq.len() < 2 {
        return precondition("compactness probe needs at least two functions");
    }
    let coarse = seq.iter().map(|f| f.spacing()).fold(0.0, f64::max);
    let origin = seq[0].origin().to_vec();
    let mut common = Vec::with_capacity(seq.len());
    for f in seq {
        let ratio = coarse / f.spacing();
        let factor = ratio.round();
        if (ratio - factor).abs() > 1e-9 * ratio || !(factor as u64).is_power_of_two() {
            return precondition(format!(
                "spacing {} is not nested in {coarse} by a power of 2",
                f.spacing()
            ));
        }
        for (a, b) in f.origin().iter().zip(&origin) {
            let k = (a - b) / coarse;
            if (k - k.round()).abs() > 1e-9 {
                return precondition("origins do not share the coarsest lattice");
            }
        }
        common.push(f.subsample(factor as usize)?);
    }
    let n = common.len();
    let mut matrix = vec![vec![0.0; n]; n];
    let mut min = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let d = lp_distance(&common[i], &common[j], p, region)?;
            matrix[i][j] = d;
            matrix[j][i] = d;
            min = min.min(d);
        }
    }
    Ok(ProbeReport {
        matrix,
        min_off_diagonal: min,
        spacing: coarse,
    })
}
