//! Closed-form test functions.

use crate::error::{parse_err, precondition, Result};
use crate::quad;
use crate::spec::{Arg, Expr};

/// Axis-aligned closed box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 3 {
            return precondition("box needs 1..=3 axes");
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return precondition("box must have lo < hi on each axis");
        }
        Ok(GridBox { lo, hi })
    }

    /// A cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        GridBox::new(vec![lo; dim], vec![hi; dim])
    }

    /// Parses `lo:hi[,lo:hi...]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for axis in text.split(',') {
            let parts: Vec<&str> = axis.split(':').collect();
            if parts.len() != 2 {
                return parse_err(format!("bad box axis `{axis}`, expected lo:hi"));
            }
            let a = parts[0].trim().parse::<f64>();
            let b = parts[1].trim().parse::<f64>();
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    lo.push(a);
                    hi.push(b);
                }
                _ => return parse_err(format!("bad box axis `{axis}`")),
            }
        }
        GridBox::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// A named closed-form function of `x in R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Indicator of the closed box.
    Indicator { lo: Vec<f64>, hi: Vec<f64> },
    /// `max(0, 1 - |x|/w)`.
    Tent { dim: usize, width: f64 },
    /// `exp(1 - 1/(1 - (|x|/r)^2))` on `|x| < r`.
    Bump { dim: usize, radius: f64 },
    /// `exp(-|x|^2/sigma^2)`, set to exactly 0 beyond `cutoff * sigma`.
    Gaussian { dim: usize, sigma: f64, cutoff: f64 },
    /// `(1 + cos(pi |x|/r))/2` on `|x| < r`.
    CosBump { dim: usize, radius: f64 },
    /// 1D trapezoid: rises on `[0, w]`, flat for `plateau`, falls over `w`.
    Ramp { width: f64, plateau: f64 },
    /// 1D tent of half-width 1 convolved with a normalized bump of radius `delta`.
    SmoothTent { delta: f64 },
    /// 1D polynomial `sum c_k x^k` (not compactly supported).
    Poly { coeffs: Vec<f64> },
    Sum(Box<Generator>, Box<Generator>),
    Scale(f64, Box<Generator>),
    /// `f(x - a)`.
    Shift(Vec<f64>, Box<Generator>),
    /// `f(lambda x)`.
    Dilate(f64, Box<Generator>),
    /// `f(x_1) g(x_2, ...)`.
    Product(Box<Generator>, Box<Generator>),
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn bump1(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

impl Generator {
    pub fn parse(text: &str) -> Result<Self> {
        Generator::from_expr(&Expr::parse(text)?)
    }

    pub fn from_expr(e: &Expr) -> Result<Self> {
        let dim = |e: &Expr| -> Result<usize> {
            let d = e.num("dim", 99, Some(1.0))?;
            if !(1.0..=3.0).contains(&d) || d.fract() != 0.0 {
                return parse_err(format!("`{}`: dim must be 1, 2 or 3", e.name));
            }
            Ok(d as usize)
        };
        let positive = |v: f64, what: &str| -> Result<f64> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                precondition(format!("{what} must be positive, got {v}"))
            }
        };
        let sub = |e: &Expr, slot: usize| -> Result<Box<Generator>> {
            Ok(Box::new(Generator::from_expr(e.expr("f", slot)?)?))
        };
        let g = match e.name.as_str() {
            "indicator" => {
                let nums: Vec<f64> = e
                    .positional()
                    .map(|a| match a {
                        Arg::Num(v) => Ok(*v),
                        _ => parse_err("indicator takes numbers"),
                    })
                    .collect::<Result<_>>()?;
                let nums = if nums.is_empty() { vec![0.0, 1.0] } else { nums };
                if nums.len() % 2 != 0 || nums.len() > 6 {
                    return parse_err("indicator takes lo,hi pairs per axis");
                }
                let lo: Vec<f64> = nums.iter().step_by(2).copied().collect();
                let hi: Vec<f64> = nums.iter().skip(1).step_by(2).copied().collect();
                if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
                    return precondition("indicator needs lo < hi");
                }
                Generator::Indicator { lo, hi }
            }
            "tent" => {
                e.check(&["w", "dim"], 1)?;
                Generator::Tent {
                    dim: dim(e)?,
                    width: positive(e.num("w", 0, Some(1.0))?, "tent width")?,
                }
            }
            "bump" => {
                e.check(&["r", "dim"], 1)?;
                Generator::Bump {
                    dim: dim(e)?,
                    radius: positive(e.num("r", 0, Some(1.0))?, "bump radius")?,
                }
            }
            "gaussian" => {
                e.check(&["sigma", "cutoff", "dim"], 2)?;
                Generator::Gaussian {
                    dim: dim(e)?,
                    sigma: positive(e.num("sigma", 0, Some(1.0))?, "sigma")?,
                    cutoff: positive(e.num("cutoff", 1, Some(6.0))?, "cutoff")?,
                }
            }
            "cosbump" => {
                e.check(&["r", "dim"], 1)?;
                Generator::CosBump {
                    dim: dim(e)?,
                    radius: positive(e.num("r", 0, Some(1.0))?, "radius")?,
                }
            }
            "ramp" => {
                e.check(&["w", "plateau"], 2)?;
                Generator::Ramp {
                    width: positive(e.num("w", 0, Some(1.0))?, "ramp width")?,
                    plateau: e.num("plateau", 1, Some(1.0))?.max(0.0),
                }
            }
            "smoothtent" => {
                e.check(&["delta"], 1)?;
                Generator::SmoothTent {
                    delta: positive(e.num("delta", 0, Some(0.25))?, "delta")?,
                }
            }
            "poly" => {
                let coeffs: Vec<f64> = e
                    .positional()
                    .map(|a| match a {
                        Arg::Num(v) => Ok(*v),
                        _ => parse_err("poly takes numbers"),
                    })
                    .collect::<Result<_>>()?;
                Generator::Poly { coeffs }
            }
            "sum" => {
                let a = Generator::from_expr(e.expr("f", 0)?)?;
                let b = Generator::from_expr(e.expr("g", 1)?)?;
                if a.dim() != b.dim() {
                    return precondition("sum of generators of different dimension");
                }
                Generator::Sum(Box::new(a), Box::new(b))
            }
            "scale" => Generator::Scale(e.num("c", 0, None)?, sub(e, 1)?),
            "dilate" => Generator::Dilate(positive(e.num("lambda", 0, None)?, "lambda")?, sub(e, 1)?),
            "shift" => {
                let mut a = Vec::new();
                let mut inner = None;
                for arg in e.positional() {
                    match arg {
                        Arg::Num(v) => a.push(*v),
                        Arg::Expr(x) => inner = Some(Generator::from_expr(x)?),
                    }
                }
                let inner = inner.ok_or_else(|| crate::Error::Parse("shift needs a function".into()))?;
                if a.len() != inner.dim() {
                    return parse_err("shift needs one offset per axis");
                }
                Generator::Shift(a, Box::new(inner))
            }
            "product" => {
                let a = Generator::from_expr(e.expr("f", 0)?)?;
                let b = Generator::from_expr(e.expr("g", 1)?)?;
                if a.dim() != 1 || a.dim() + b.dim() > 3 {
                    return precondition("product needs a 1D first factor and total dim <= 3");
                }
                Generator::Product(Box::new(a), Box::new(b))
            }
            other => return parse_err(format!("unknown generator `{other}`")),
        };
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        match self {
            Generator::Indicator { lo, .. } => lo.len(),
            Generator::Tent { dim, .. }
            | Generator::Bump { dim, .. }
            | Generator::Gaussian { dim, .. }
            | Generator::CosBump { dim, .. } => *dim,
            Generator::Ramp { .. } | Generator::SmoothTent { .. } | Generator::Poly { .. } => 1,
            Generator::Sum(a, _) | Generator::Scale(_, a) | Generator::Shift(_, a) | Generator::Dilate(_, a) => {
                a.dim()
            }
            Generator::Product(a, b) => a.dim() + b.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Generator::Indicator { lo, hi } => {
                let inside = x.iter().zip(lo.iter().zip(hi)).all(|(&v, (&a, &b))| {
                    let tol = 1e-9 * (1.0 + a.abs().max(b.abs()));
                    v >= a - tol && v <= b + tol
                });
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Generator::Tent { width, .. } => (1.0 - norm(x) / width).max(0.0),
            Generator::Bump { radius, .. } => bump1(norm(x) / radius),
            Generator::Gaussian { sigma, cutoff, .. } => {
                let r = norm(x) / sigma;
                if r >= *cutoff {
                    0.0
                } else {
                    (-r * r).exp()
                }
            }
            Generator::CosBump { radius, .. } => {
                let r = norm(x) / radius;
                if r < 1.0 {
                    0.5 * (1.0 + (std::f64::consts::PI * r).cos())
                } else {
                    0.0
                }
            }
            Generator::Ramp { width, plateau } => {
                let t = x[0];
                let top = width + plateau;
                if t <= 0.0 || t >= top + width {
                    0.0
                } else if t < *width {
                    t / width
                } else if t <= top {
                    1.0
                } else {
                    (top + width - t) / width
                }
            }
            Generator::SmoothTent { delta } => {
                let t = x[0];
                if t.abs() >= 1.0 + delta {
                    return 0.0;
                }
                let mass = bump_mass();
                // Split at the tent kinks that fall inside the mollifier window.
                let mut cuts = vec![-1.0, 1.0];
                for k in [-1.0, 0.0, 1.0] {
                    let u = (t - k) / delta;
                    if u > -1.0 && u < 1.0 {
                        cuts.push(u);
                    }
                }
                cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let acc = quad::gauss_panels(&cuts, 4, |u| {
                    bump1(u) * (1.0 - (t - delta * u).abs()).max(0.0)
                });
                acc / mass
            }
            Generator::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |a, c| a * x[0] + c),
            Generator::Sum(a, b) => a.eval(x) + b.eval(x),
            Generator::Scale(c, a) => c * a.eval(x),
            Generator::Shift(off, a) => {
                let y: Vec<f64> = x.iter().zip(off).map(|(v, o)| v - o).collect();
                a.eval(&y)
            }
            Generator::Dilate(l, a) => {
                let y: Vec<f64> = x.iter().map(|v| v * l).collect();
                a.eval(&y)
            }
            Generator::Product(a, b) => a.eval(&x[..1]) * b.eval(&x[1..]),
        }
    }

    /// Closed bounding box of the support, `None` if unbounded.
    pub fn support(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let ball = |dim: usize, r: f64| Some((vec![-r; dim], vec![r; dim]));
        match self {
            Generator::Indicator { lo, hi } => Some((lo.clone(), hi.clone())),
            Generator::Tent { dim, width } => ball(*dim, *width),
            Generator::Bump { dim, radius } | Generator::CosBump { dim, radius } => ball(*dim, *radius),
            Generator::Gaussian { dim, sigma, cutoff } => ball(*dim, sigma * cutoff),
            Generator::Ramp { width, plateau } => Some((vec![0.0], vec![2.0 * width + plateau])),
            Generator::SmoothTent { delta } => ball(1, 1.0 + delta),
            Generator::Poly { coeffs } => {
                if coeffs.iter().all(|c| *c == 0.0) {
                    ball(1, 0.0)
                } else {
                    None
                }
            }
            Generator::Sum(a, b) => {
                let (al, ah) = a.support()?;
                let (bl, bh) = b.support()?;
                Some((
                    al.iter().zip(&bl).map(|(x, y)| x.min(*y)).collect(),
                    ah.iter().zip(&bh).map(|(x, y)| x.max(*y)).collect(),
                ))
            }
            Generator::Scale(_, a) => a.support(),
            Generator::Shift(off, a) => {
                let (l, h) = a.support()?;
                Some((
                    l.iter().zip(off).map(|(v, o)| v + o).collect(),
                    h.iter().zip(off).map(|(v, o)| v + o).collect(),
                ))
            }
            Generator::Dilate(lam, a) => {
                let (l, h) = a.support()?;
                Some((l.iter().map(|v| v / lam).collect(), h.iter().map(|v| v / lam).collect()))
            }
            Generator::Product(a, b) => {
                let (mut l, mut h) = a.support()?;
                let (bl, bh) = b.support()?;
                l.extend(bl);
                h.extend(bh);
                Some((l, h))
            }
        }
    }
}

fn bump_mass() -> f64 {
    static MASS: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *MASS.get_or_init(|| quad::gauss_panels(&[-1.0, 0.0, 1.0], 16, bump1))
}
