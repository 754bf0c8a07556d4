//! Besov and Nikol'skii semi-norms, the nonlocal functional `D_omega`, its inner
//! variant, the smoothing functional and the quark sequence norm.

mod profile;
mod quark;
mod smoothing;

pub use profile::{
    max_reach, BesovWeight, DifferenceProfile, HQuadrature, Integrand, QuadratureResult, RadialWeight,
    SamplePolicy,
};
pub use quark::{quark_sequence_norm, QuarkIndex};
pub use smoothing::{convolve, smoothing_functional};

use crate::error::{precondition, Result};
use crate::findiff::MAX_ORDER;
use crate::gridfn::{GridFunction, LpExponent};
use crate::kernels::{KernelFamily, KernelInstance};
use crate::omega::{InnerOmega, OmegaFn};

/// The scale `(s, p, q, M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiNormSpec {
    pub s: f64,
    pub p: LpExponent,
    pub q: LpExponent,
    pub order: u32,
}

impl SemiNormSpec {
    /// Requires `0 < s <= M`; `s = M` is the Lipschitz/Sobolev endpoint.
    pub fn new(s: f64, p: LpExponent, q: LpExponent, order: u32) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return precondition(format!("M must be in 1..={MAX_ORDER}, got {order}"));
        }
        if !(s > 0.0 && s <= order as f64) {
            return precondition(format!("need 0 < s <= M, got s = {s}, M = {order}"));
        }
        Ok(SemiNormSpec { s, p, q, order })
    }

    pub fn with_q(self, q: LpExponent) -> Self {
        SemiNormSpec { q, ..self }
    }
}

/// `c v^alpha r^b`.
#[derive(Debug, Clone, Copy)]
pub struct PowerIntegrand {
    pub c: f64,
    pub alpha: f64,
    pub b: f64,
}

impl Integrand for PowerIntegrand {
    fn radial_power(&self) -> f64 {
        self.b
    }
    fn g(&self, v: f64, _r: f64) -> f64 {
        if v == 0.0 {
            0.0
        } else if self.alpha == 1.0 {
            self.c * v
        } else if self.alpha == 2.0 {
            self.c * v * v
        } else {
            self.c * v.powf(self.alpha)
        }
    }
    fn power_law(&self) -> Option<(f64, f64)> {
        Some((self.c, self.alpha))
    }
}

/// `omega(v / r^s)`.
pub struct OmegaQuotient<'a> {
    pub omega: &'a OmegaFn,
    pub s: f64,
}

impl Integrand for OmegaQuotient<'_> {
    fn radial_power(&self) -> f64 {
        match self.omega.power_exponent() {
            Some(a) => -self.s * a,
            None => 0.0,
        }
    }
    fn g(&self, v: f64, r: f64) -> f64 {
        match self.omega.power_exponent() {
            Some(a) => PowerIntegrand { c: 1.0, alpha: a, b: 0.0 }.g(v, r),
            None => self.omega.eval(v * r.powf(-self.s)),
        }
    }
    fn power_law(&self) -> Option<(f64, f64)> {
        self.omega.power_exponent().map(|a| (1.0, a))
    }
}

/// `omega(v r^b)`.
pub struct OmegaOfValue<'a> {
    pub omega: &'a OmegaFn,
    pub b: f64,
}

impl Integrand for OmegaOfValue<'_> {
    fn radial_power(&self) -> f64 {
        match self.omega.power_exponent() {
            Some(a) => self.b * a,
            None => 0.0,
        }
    }
    fn g(&self, v: f64, r: f64) -> f64 {
        match self.omega.power_exponent() {
            Some(a) => PowerIntegrand { c: 1.0, alpha: a, b: 0.0 }.g(v, r),
            None if self.b == 0.0 => self.omega.eval(v),
            None => self.omega.eval(v * r.powf(self.b)),
        }
    }
    fn power_law(&self) -> Option<(f64, f64)> {
        self.omega.power_exponent().map(|a| (1.0, a))
    }
}

/// Value with its quadrature diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub tolerance: f64,
    /// `(j, contribution)` over dyadic shells `[h_max 2^{-j-1}, h_max 2^{-j})`.
    pub shells: Vec<(usize, f64)>,
    pub core: f64,
    pub tail: f64,
    pub h_max: f64,
}

fn resolve_reach(f: &GridFunction, order: u32, quad: &HQuadrature) -> Result<(f64, usize)> {
    let reach = quad.h_max.unwrap_or_else(|| max_reach(f, order));
    let first = match quad.inner_cutoff {
        None => 1,
        Some(c) => {
            if c < f.spacing() * (1.0 - 1e-12) {
                return precondition(format!(
                    "inner cutoff {c} is below the grid spacing {}",
                    f.spacing()
                ));
            }
            (c / f.spacing() - 1e-9).ceil() as usize
        }
    };
    Ok((reach, first))
}

/// `[f]_{B^s_{p,q}} = (int ||Delta_h^M f||_p^q dh / |h|^{N + s q})^{1/q}`.
pub fn besov_seminorm(f: &GridFunction, spec: &SemiNormSpec, quad: &HQuadrature) -> Result<Evaluation> {
    let q = match spec.q {
        LpExponent::Finite(q) => q,
        LpExponent::Infinity => return precondition("besov_seminorm needs finite q; use nikolskii_seminorm"),
    };
    if spec.s >= spec.order as f64 {
        return precondition(format!("Besov semi-norm needs s < M, got s = {}, M = {}", spec.s, spec.order));
    }
    let (reach, first) = resolve_reach(f, spec.order, quad)?;
    let prof = DifferenceProfile::lp(f, spec.order, spec.p, reach, quad.policy)?;
    besov_from_profile(&prof, spec.s, q, first)
}

/// Besov semi-norm from a precomputed profile.
pub fn besov_from_profile(prof: &DifferenceProfile, s: f64, q: f64, first: usize) -> Result<Evaluation> {
    let w = BesovWeight {
        dim: prof.dim(),
        exponent: s * q,
    };
    let r = prof.integrate_from(&w, &PowerIntegrand { c: 1.0, alpha: q, b: 0.0 }, first)?;
    let value = r.value.max(0.0).powf(1.0 / q);
    let tolerance = (r.value + r.tolerance).max(0.0).powf(1.0 / q) - value;
    Ok(Evaluation {
        value,
        tolerance,
        shells: r.shells,
        core: r.core,
        tail: r.tail,
        h_max: prof.reach(),
    })
}

/// The sup semi-norm with its location.
#[derive(Debug, Clone, PartialEq)]
pub struct NikolskiiReport {
    pub value: f64,
    pub argmax_radius: f64,
    /// Dyadic shell index `j` of the argmax.
    pub argmax_shell: usize,
    /// `(j, max over h in shell j of ||Delta_h^M f|| / |h|^s)`.
    pub shell_max: Vec<(usize, f64)>,
    /// Upper bound on the ratio beyond the sampled range (0 when exact).
    pub tail_bound: f64,
    pub h_max: f64,
}

impl NikolskiiReport {
    /// `limsup` version: maximum over shells `j >= j0`.
    pub fn limsup(&self, j0: usize) -> f64 {
        self.shell_max
            .iter()
            .filter(|(j, _)| *j >= j0)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }
}

/// `sup_h ||Delta_h^M f||_p / |h|^s` over the sampled lattice shifts.
pub fn nikolskii_seminorm(f: &GridFunction, spec: &SemiNormSpec, quad: &HQuadrature) -> Result<NikolskiiReport> {
    let (reach, _) = resolve_reach(f, spec.order, quad)?;
    let prof = DifferenceProfile::lp(f, spec.order, spec.p, reach, quad.policy)?;
    Ok(nikolskii_from_profile(&prof, spec.s))
}

pub fn nikolskii_from_profile(prof: &DifferenceProfile, s: f64) -> NikolskiiReport {
    let shells = HQuadrature::shell_boundaries(prof.reach(), prof.spacing());
    let mut shell_max = vec![0.0f64; shells.len()];
    let mut best = 0.0;
    let mut arg = prof.spacing();
    for (r, v) in prof.samples() {
        let ratio = v / r.powf(s);
        if ratio > best {
            best = ratio;
            arg = r;
        }
        let j = shells.iter().rposition(|&b| r <= b * (1.0 + 1e-12)).unwrap_or(0);
        let j = j.min(shells.len() - 1);
        shell_max[j] = shell_max[j].max(ratio);
    }
    let argmax_shell = shells.iter().rposition(|&b| arg <= b * (1.0 + 1e-12)).unwrap_or(0);
    let tail_bound = if prof.tail_is_exact() {
        0.0
    } else {
        let bound = 2f64.powi(prof.order() as i32) * prof.f_norm / prof.reach().powf(s);
        (bound - best).max(0.0)
    };
    NikolskiiReport {
        value: best,
        argmax_radius: arg,
        argmax_shell: argmax_shell.min(shells.len() - 1),
        shell_max: shell_max.into_iter().enumerate().collect(),
        tail_bound,
        h_max: prof.reach(),
    }
}

/// Checks the kernel fits the zero margin and the lattice resolves it.
pub fn check_kernel_fit(f: &GridFunction, k: &KernelInstance, order: u32) -> Result<()> {
    let eps = k.resolution_scale();
    if eps < 4.0 * f.spacing() * (1.0 - 1e-12) {
        return precondition(format!(
            "kernel scale {eps} is below four grid spacings ({})",
            4.0 * f.spacing()
        ));
    }
    let r = mass_radius(k, 0.9999);
    let allowed = max_reach(f, order);
    if r > allowed * (1.0 + 1e-9) {
        return precondition(format!(
            "kernel 99.99% mass radius {r:.6} exceeds margin/M = {allowed:.6}; a zero margin of at least {:.6} is required",
            r * order as f64
        ));
    }
    Ok(())
}

/// Radius of the centered ball carrying `fraction` of the kernel mass.
pub fn mass_radius(k: &KernelInstance, fraction: f64) -> f64 {
    let mut hi = k.effective_radius();
    if k.radial_moment(0.0, hi, 0.0) < fraction {
        return hi;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if k.radial_moment(0.0, mid, 0.0) >= fraction {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Profile reach needed for one kernel instance.
fn kernel_reach(f: &GridFunction, k: &KernelInstance, order: u32, quad: &HQuadrature) -> f64 {
    let cap = quad.h_max.unwrap_or_else(|| max_reach(f, order));
    let want = k.effective_radius() + 2.0 * f.spacing();
    want.min(cap).max(2.0 * f.spacing())
}

/// `D_omega(rho_eps, f) = int rho_eps(h) omega(||Delta_h^M f||_p / |h|^s) dh`.
pub fn d_omega(
    f: &GridFunction,
    family: &KernelFamily,
    epsilon: f64,
    omega: &OmegaFn,
    spec: &SemiNormSpec,
    quad: &HQuadrature,
) -> Result<Evaluation> {
    let k = family.instantiate(epsilon)?;
    check_kernel_fit(f, &k, spec.order)?;
    let reach = kernel_reach(f, &k, spec.order, quad);
    let prof = DifferenceProfile::lp(f, spec.order, spec.p, reach, quad.policy)?;
    d_omega_from_profile(&prof, &k, omega, spec.s)
}

pub fn d_omega_from_profile(prof: &DifferenceProfile, k: &KernelInstance, omega: &OmegaFn, s: f64) -> Result<Evaluation> {
    let r = prof.integrate(k, &OmegaQuotient { omega, s })?;
    Ok(Evaluation {
        value: r.value,
        tolerance: r.tolerance,
        shells: r.shells,
        core: r.core,
        tail: r.tail,
        h_max: prof.reach(),
    })
}

/// `int rho_eps(h) omega(int Omega(|Delta_h^M f(x)| / |h|^s) dx) dh`.
#[allow(clippy::too_many_arguments)]
pub fn d_omega_inner(
    f: &GridFunction,
    family: &KernelFamily,
    epsilon: f64,
    omega: &OmegaFn,
    inner: &InnerOmega,
    s: f64,
    order: u32,
    quad: &HQuadrature,
) -> Result<Evaluation> {
    if !(s > 0.0) {
        return precondition("s must be positive");
    }
    let k = family.instantiate(epsilon)?;
    check_kernel_fit(f, &k, order)?;
    let reach = kernel_reach(f, &k, order, quad);
    let prof = DifferenceProfile::inner(f, order, *inner, s, reach, quad.policy)?;
    let r = prof.integrate(
        &k,
        &OmegaOfValue {
            omega,
            b: prof.inner_radial_power(),
        },
    )?;
    Ok(Evaluation {
        value: r.value,
        tolerance: r.tolerance,
        shells: r.shells,
        core: r.core,
        tail: r.tail,
        h_max: prof.reach(),
    })
}

/// Geometric grid `h_max 2^{-k}`, `k = 0..=kmax`.
pub fn dyadic_eps_grid(h_max: f64, kmax: usize) -> Vec<f64> {
    (0..=kmax).map(|k| h_max * 0.5f64.powi(k as i32)).collect()
}

/// `D_omega` along an epsilon grid, sharing one difference profile. Grid points that
/// violate the kernel-fit preconditions are skipped.
pub fn d_omega_sweep(
    f: &GridFunction,
    family: &KernelFamily,
    eps: &[f64],
    omega: &OmegaFn,
    spec: &SemiNormSpec,
    quad: &HQuadrature,
) -> Result<Vec<(f64, Evaluation)>> {
    let mut kernels = Vec::new();
    for &e in eps {
        let k = family.instantiate(e)?;
        if check_kernel_fit(f, &k, spec.order).is_ok() {
            kernels.push(k);
        }
    }
    if kernels.is_empty() {
        return precondition("no epsilon in the grid satisfies the kernel-fit preconditions");
    }
    let reach = kernels
        .iter()
        .map(|k| kernel_reach(f, k, spec.order, quad))
        .fold(0.0, f64::max);
    let prof = DifferenceProfile::lp(f, spec.order, spec.p, reach, quad.policy)?;
    sweep_kernels(&prof, &kernels, omega, spec.s)
}

/// [`d_omega_sweep`] on a precomputed profile of `f`. Nodes that violate the
/// kernel-fit preconditions are skipped.
pub fn d_omega_sweep_on(
    f: &GridFunction,
    prof: &DifferenceProfile,
    family: &KernelFamily,
    eps: &[f64],
    omega: &OmegaFn,
    s: f64,
) -> Result<Vec<(f64, Evaluation)>> {
    let mut kernels = Vec::new();
    for &e in eps {
        let k = family.instantiate(e)?;
        if check_kernel_fit(f, &k, prof.order()).is_ok() {
            kernels.push(k);
        }
    }
    if kernels.is_empty() {
        return precondition("no epsilon in the grid satisfies the kernel-fit preconditions");
    }
    sweep_kernels(prof, &kernels, omega, s)
}

fn sweep_kernels(
    prof: &DifferenceProfile,
    kernels: &[KernelInstance],
    omega: &OmegaFn,
    s: f64,
) -> Result<Vec<(f64, Evaluation)>> {
    kernels
        .iter()
        .map(|k| Ok((k.epsilon(), d_omega_from_profile(prof, k, omega, s)?)))
        .collect()
}
