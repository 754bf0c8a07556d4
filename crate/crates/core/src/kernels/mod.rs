//! Radial mollifier kernels, their scaling families, and radial moments.

mod claims;

pub use claims::{clip_stack, radialize, Annulus, ClipStack, Minorant};

use crate::error::{parse_err, precondition, Result};
use crate::quad::{self, power_integral, sphere_area};
use crate::spec::{Arg, Expr};

/// Volume of the unit ball in R^N.
pub fn ball_volume(dim: usize) -> f64 {
    sphere_area(dim) / dim as f64
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Shape {
    /// Constant on `|h| < r`.
    Uniform { r: f64 },
    /// `(2 pi sigma^2)^{-N/2} exp(-|h|^2 / (2 sigma^2))`.
    Gaussian { sigma: f64 },
    /// `c exp(1 - 1/(1 - (|h|/r)^2))` on `|h| < r`.
    Bump { r: f64, c: f64 },
    /// `c |h|^e` on `lo < |h| < hi`.
    Power { c: f64, e: f64, lo: f64, hi: f64 },
    /// `c |h|^a J(|h|)` for a radial base `J`.
    Weighted { a: f64, j: Box<Kernel>, c: f64 },
    /// Average of the base over dilations `theta in [theta0, 1]`.
    Radialized { base: Box<Kernel>, theta0: f64, c: f64 },
    /// Constant `alpha theta_j^{-N} / c` on `(theta_j r1, theta_j r2)`.
    Stack { alpha: f64, r1: f64, r2: f64, thetas: Vec<f64>, c: f64 },
}

/// A radial probability density on R^N, described by its profile `t -> rho(|h| = t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    dim: usize,
    shape: Shape,
    label: String,
}

const NUMERIC_REL_FLOOR: f64 = 1e-15;

impl Kernel {
    pub(crate) fn from_shape(dim: usize, shape: Shape, label: impl Into<String>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return precondition("kernel dimension must be 1..=3");
        }
        let k = Kernel {
            dim,
            shape,
            label: label.into(),
        };
        let mass = k.mass();
        if !((mass - 1.0).abs() <= 1e-6) {
            return precondition(format!("kernel `{}` has mass {mass}, expected 1", k.label));
        }
        Ok(k)
    }

    pub fn uniform(dim: usize, r: f64) -> Result<Self> {
        positive(r, "uniform radius")?;
        Kernel::from_shape(dim, Shape::Uniform { r }, format!("uniform(r={r})"))
    }

    pub fn gaussian(dim: usize, sigma: f64) -> Result<Self> {
        positive(sigma, "sigma")?;
        Kernel::from_shape(dim, Shape::Gaussian { sigma }, format!("gaussian(sigma={sigma})"))
    }

    pub fn bump(dim: usize, r: f64) -> Result<Self> {
        positive(r, "bump radius")?;
        let raw = Kernel {
            dim,
            shape: Shape::Bump { r, c: 1.0 },
            label: String::new(),
        };
        let c = 1.0 / raw.mass();
        Kernel::from_shape(dim, Shape::Bump { r, c }, format!("bump(r={r})"))
    }

    /// `c |h|^e` on `lo < |h| < hi`, normalized to unit mass.
    pub fn power_shell(dim: usize, e: f64, lo: f64, hi: f64, label: impl Into<String>) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return precondition("power shell needs 0 <= lo < hi < inf");
        }
        let raw = sphere_area(dim) * power_integral(lo, hi, dim as f64 - 1.0 + e);
        if !raw.is_finite() || raw <= 0.0 {
            return precondition(format!("power shell |h|^{e} is not integrable near 0"));
        }
        Kernel::from_shape(dim, Shape::Power { c: 1.0 / raw, e, lo, hi }, label)
    }

    /// `1/(sigma_N ln 2 |h|^N)` on `1 < |h| < 2`.
    pub fn choice2(dim: usize) -> Result<Self> {
        Kernel::power_shell(dim, -(dim as f64), 1.0, 2.0, "choice2()")
    }

    /// `a/(sigma_N |h|^{N-a})` on `|h| < 1` with `a = (s - r) q`.
    pub fn imbnikol(dim: usize, s: f64, r: f64, q: f64) -> Result<Self> {
        let a = (s - r) * q;
        if !(a > 0.0) {
            return precondition(format!("imbnikol needs (s - r) q > 0, got {a}"));
        }
        Kernel::power_shell(dim, a - dim as f64, 0.0, 1.0, format!("imbnikol(r={r},q={q},s={s})"))
    }

    /// `|u|^{s q} J(u) / int |u|^{s q} J`.
    pub fn kpp(j: Kernel, s: f64, q: f64) -> Result<Self> {
        let a = s * q;
        if !(a >= 0.0) {
            return precondition("kpp needs s q >= 0");
        }
        let label = format!("kpp(J={},q={q},s={s})", j.label);
        let dim = j.dim;
        if let Shape::Uniform { r } = j.shape {
            return Kernel::power_shell(dim, a, 0.0, r, label);
        }
        let raw = Kernel {
            dim,
            shape: Shape::Weighted { a, j: Box::new(j.clone()), c: 1.0 },
            label: String::new(),
        };
        let c = 1.0 / raw.mass();
        Kernel::from_shape(dim, Shape::Weighted { a, j: Box::new(j), c }, label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_radial(&self) -> bool {
        true
    }

    /// Radius outside which the density vanishes (`inf` for the Gaussian).
    pub fn support_radius(&self) -> f64 {
        match &self.shape {
            Shape::Uniform { r } | Shape::Bump { r, .. } => *r,
            Shape::Gaussian { .. } => f64::INFINITY,
            Shape::Power { hi, .. } => *hi,
            Shape::Weighted { j, .. } => j.support_radius(),
            Shape::Radialized { base, theta0, .. } => base.support_radius() / theta0,
            Shape::Stack { r2, .. } => *r2,
        }
    }

    /// Radius beyond which the remaining mass is below `1e-16`.
    pub fn effective_radius(&self) -> f64 {
        match &self.shape {
            Shape::Gaussian { sigma } => 12.0 * sigma,
            Shape::Weighted { j, .. } if !j.support_radius().is_finite() => 1.25 * j.effective_radius(),
            Shape::Radialized { base, theta0, .. } => base.effective_radius() / theta0,
            _ => self.support_radius(),
        }
    }

    /// `rho(h)` as a function of `t = |h|`.
    pub fn density(&self, t: f64) -> f64 {
        let t = t.abs();
        match &self.shape {
            Shape::Uniform { r } => {
                if t < *r {
                    1.0 / (ball_volume(self.dim) * r.powi(self.dim as i32))
                } else {
                    0.0
                }
            }
            Shape::Gaussian { sigma } => {
                let n = self.dim as f64;
                (2.0 * std::f64::consts::PI * sigma * sigma).powf(-n / 2.0)
                    * (-t * t / (2.0 * sigma * sigma)).exp()
            }
            Shape::Bump { r, c } => {
                let u = t / r;
                if u < 1.0 {
                    c * (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
            Shape::Power { c, e, lo, hi } => {
                if t > *lo && t < *hi {
                    c * t.powf(*e)
                } else {
                    0.0
                }
            }
            Shape::Weighted { a, j, c } => c * t.powf(*a) * j.density(t),
            Shape::Radialized { base, theta0, c } => {
                if t < 1e-300 {
                    return c * base.density(0.0);
                }
                c / ((1.0 - theta0) * t * sphere_area(self.dim))
                    * base.radial_moment(theta0 * t, t, 1.0 - self.dim as f64)
            }
            Shape::Stack { alpha, r1, r2, thetas, c } => {
                for th in thetas {
                    if t > th * r1 && t < th * r2 {
                        return alpha * th.powf(-(self.dim as f64)) / c;
                    }
                }
                0.0
            }
        }
    }

    /// Radii where the profile is not smooth.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut b = match &self.shape {
            Shape::Uniform { r } | Shape::Bump { r, .. } => vec![*r],
            Shape::Gaussian { .. } => vec![],
            Shape::Power { lo, hi, .. } => vec![*lo, *hi],
            Shape::Weighted { j, .. } => j.breakpoints(),
            Shape::Radialized { base, theta0, .. } => {
                let mut v = base.breakpoints();
                let extra: Vec<f64> = v.iter().map(|x| x / theta0).collect();
                v.extend(extra);
                v
            }
            Shape::Stack { r1, r2, thetas, .. } => {
                thetas.iter().flat_map(|th| [th * r1, th * r2]).collect()
            }
        };
        b.retain(|x| *x > 0.0 && x.is_finite());
        b.sort_by(|a, c| a.partial_cmp(c).unwrap());
        b.dedup();
        b
    }

    /// `int_{lo < |h| < hi} rho(h) |h|^beta dh`, `+inf` when divergent.
    pub fn radial_moment(&self, lo: f64, hi: f64, beta: f64) -> f64 {
        let lo = lo.max(0.0);
        let hi = hi.min(self.effective_radius());
        if !(hi > lo) {
            return 0.0;
        }
        let n = self.dim as f64;
        let area = sphere_area(self.dim);
        match &self.shape {
            Shape::Uniform { r } => {
                area / (ball_volume(self.dim) * r.powf(n)) * power_integral(lo, hi.min(*r), n - 1.0 + beta)
            }
            Shape::Power { c, e, lo: a, hi: b } => {
                let (l, h) = (lo.max(*a), hi.min(*b));
                if h <= l {
                    0.0
                } else {
                    c * area * power_integral(l, h, n - 1.0 + e + beta)
                }
            }
            Shape::Stack { alpha, r1, r2, thetas, c } => thetas
                .iter()
                .map(|th| {
                    let (l, h) = (lo.max(th * r1), hi.min(th * r2));
                    if h <= l {
                        0.0
                    } else {
                        alpha * th.powf(-n) / c * area * power_integral(l, h, n - 1.0 + beta)
                    }
                })
                .sum(),
            Shape::Radialized { base, theta0, c } => {
                // Fubini: the radialized moment is a theta-average of base moments.
                let th0 = *theta0;
                let mut cuts = vec![th0, 1.0];
                for b in base.breakpoints() {
                    for edge in [lo, hi] {
                        if edge > 0.0 {
                            let th = b / edge;
                            if th > th0 && th < 1.0 {
                                cuts.push(th);
                            }
                        }
                    }
                }
                cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                cuts.dedup();
                let f = |th: f64| th.powf(-n - beta) * base.radial_moment(th * lo, th * hi, beta);
                c / (1.0 - th0) * quad::gauss_panels(&cuts, 2, f)
            }
            _ => self.numeric_moment(lo, hi, beta),
        }
    }

    fn numeric_moment(&self, lo: f64, hi: f64, beta: f64) -> f64 {
        let n = self.dim as f64;
        let area = sphere_area(self.dim);
        let g = |t: f64| area * t.powf(n - 1.0 + beta) * self.density(t);
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
        cuts.push(hi);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a == 0.0 {
                let floor = b * NUMERIC_REL_FLOOR;
                acc += quad::gauss(0.0, floor, g) + quad::gauss_geometric(floor, b, g);
            } else {
                acc += quad::gauss_geometric(a, b, g);
            }
        }
        acc
    }

    pub fn mass(&self) -> f64 {
        self.radial_moment(0.0, f64::INFINITY, 0.0)
    }

    /// `int rho(z) |z|^alpha dz`.
    pub fn moment(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0) {
            return precondition("moment order must be nonnegative");
        }
        Ok(self.radial_moment(0.0, f64::INFINITY, alpha))
    }
}

fn positive(v: f64, what: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        precondition(format!("{what} must be positive, got {v}"))
    }
}

/// How a family produces `rho_eps`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalingRule {
    /// `rho_eps(h) = eps^{-N} rho(h/eps)`.
    Scaling,
    /// `rho_eps(h) = eps / (sigma_N |h|^{N - eps})` on `|h| < 1`.
    MsPower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFamily {
    pub base: Kernel,
    pub rule: ScalingRule,
}

/// `rho_eps`, evaluable pointwise and through radial moments.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInstance {
    kernel: Kernel,
    scale: f64,
    epsilon: f64,
}

/// Parsing context: the ambient dimension and the smoothness used by `kpp`/`imbnikol`.
#[derive(Debug, Clone, Copy)]
pub struct KernelContext {
    pub dim: usize,
    pub s: Option<f64>,
}

impl KernelFamily {
    pub fn scaling(base: Kernel) -> Self {
        KernelFamily { base, rule: ScalingRule::Scaling }
    }

    pub fn mspow(dim: usize) -> Result<Self> {
        Ok(KernelFamily {
            base: Kernel::power_shell(dim, 1.0 - dim as f64, 0.0, 1.0, "mspow()")?,
            rule: ScalingRule::MsPower,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn label(&self) -> &str {
        &self.base.label
    }

    pub fn parse(text: &str, ctx: KernelContext) -> Result<Self> {
        KernelFamily::from_expr(&Expr::parse(text)?, ctx)
    }

    pub fn from_expr(e: &Expr, ctx: KernelContext) -> Result<Self> {
        if e.name == "mspow" {
            e.check(&[], 0)?;
            return KernelFamily::mspow(ctx.dim);
        }
        Ok(KernelFamily::scaling(parse_kernel(e, ctx)?))
    }

    pub fn instantiate(&self, epsilon: f64) -> Result<KernelInstance> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return precondition(format!("epsilon must be positive, got {epsilon}"));
        }
        match self.rule {
            ScalingRule::Scaling => Ok(KernelInstance {
                kernel: self.base.clone(),
                scale: epsilon,
                epsilon,
            }),
            ScalingRule::MsPower => {
                let n = self.base.dim as f64;
                Ok(KernelInstance {
                    kernel: Kernel::power_shell(self.base.dim, epsilon - n, 0.0, 1.0, "mspow()")?,
                    scale: 1.0,
                    epsilon,
                })
            }
        }
    }
}

fn parse_kernel(e: &Expr, ctx: KernelContext) -> Result<Kernel> {
    let dim = ctx.dim;
    let s_of = |e: &Expr| -> Result<f64> {
        match (e.keyword("s"), ctx.s) {
            (Some(_), _) => e.num("s", 99, None),
            (None, Some(s)) => Ok(s),
            (None, None) => parse_err(format!("`{}` needs s", e.name)),
        }
    };
    match e.name.as_str() {
        "uniform" => {
            e.check(&["r"], 1)?;
            Kernel::uniform(dim, e.num("r", 0, Some(1.0))?)
        }
        "gaussian" => {
            e.check(&["sigma"], 1)?;
            Kernel::gaussian(dim, e.num("sigma", 0, Some(1.0))?)
        }
        "bump" => {
            e.check(&["r"], 1)?;
            Kernel::bump(dim, e.num("r", 0, Some(1.0))?)
        }
        "choice2" => {
            e.check(&[], 0)?;
            Kernel::choice2(dim)
        }
        "imbnikol" => {
            e.check(&["r", "q", "s"], 2)?;
            Kernel::imbnikol(dim, s_of(e)?, e.num("r", 0, None)?, e.num("q", 1, None)?)
        }
        "kpp" => {
            e.check(&["J", "q", "s"], 2)?;
            let j = match e.arg("J", 0) {
                Some(Arg::Expr(j)) => parse_kernel(j, ctx)?,
                None => Kernel::uniform(dim, 1.0)?,
                _ => return parse_err("kpp: J must be a kernel"),
            };
            Kernel::kpp(j, s_of(e)?, e.num("q", 1, None)?)
        }
        "radialize" => {
            e.check(&["base", "theta0"], 2)?;
            let base = parse_kernel(e.expr("base", 0)?, ctx)?;
            Ok(radialize(&base, e.num("theta0", 1, None)?)?.0)
        }
        "clipstack" => {
            e.check(&["r1", "r2", "alpha"], 3)?;
            Ok(clip_stack(
                dim,
                e.num("r1", 0, None)?,
                e.num("r2", 1, None)?,
                e.num("alpha", 2, Some(1.0))?,
            )?
            .kernel)
        }
        other => parse_err(format!("unknown kernel `{other}`")),
    }
}

impl KernelInstance {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim
    }

    pub fn density(&self, t: f64) -> f64 {
        let n = self.kernel.dim as i32;
        self.kernel.density(t / self.scale) / self.scale.powi(n)
    }

    pub fn support_radius(&self) -> f64 {
        self.kernel.support_radius() * self.scale
    }

    /// Length scale the lattice must resolve: `eps` for scaling families, 1 for `mspow`.
    pub fn resolution_scale(&self) -> f64 {
        self.scale
    }

    pub fn effective_radius(&self) -> f64 {
        self.kernel.effective_radius() * self.scale
    }

    /// `int_{lo < |h| < hi} rho_eps(h) |h|^beta dh`.
    pub fn radial_moment(&self, lo: f64, hi: f64, beta: f64) -> f64 {
        let v = self.kernel.radial_moment(lo / self.scale, hi / self.scale, beta);
        if beta == 0.0 {
            v
        } else {
            v * self.scale.powf(beta)
        }
    }

    pub fn mass(&self) -> f64 {
        self.kernel.mass()
    }

    pub fn moment(&self, alpha: f64) -> Result<f64> {
        Ok(self.kernel.moment(alpha)? * self.scale.powf(alpha))
    }

    /// Mass outside the ball of radius `delta`.
    pub fn mass_outside(&self, delta: f64) -> f64 {
        (1.0 - self.radial_moment(0.0, delta, 0.0)).max(0.0)
    }
}
