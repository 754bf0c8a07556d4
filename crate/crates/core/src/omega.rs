//! Increasing moduli `omega` with their rough-subadditivity constants, and inner
//! moduli `Omega` sandwiched between two multiples of `t^p`.

use crate::error::{parse_err, precondition, Result};
use crate::spec::Expr;

#[derive(Debug, Clone, PartialEq)]
pub enum OmegaForm {
    Power(f64),
    Log1p,
    /// `t tanh t`.
    TTanh,
    Arsinh,
    /// `outer(inner(t))`.
    Comp(Box<OmegaFn>, Box<OmegaFn>),
}

/// An increasing modulus with `omega(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaFn {
    form: OmegaForm,
    a_omega: f64,
    a_exact: bool,
}

/// Log grid on `[1e-6, 1e6]` used to estimate constants.
pub fn default_grid() -> Vec<f64> {
    (0..=240).map(|i| 10f64.powf(-6.0 + i as f64 * 0.05)).collect()
}

impl OmegaFn {
    fn build(form: OmegaForm) -> Result<Self> {
        let mut w = OmegaFn {
            form,
            a_omega: f64::NAN,
            a_exact: false,
        };
        match w.closed_form_constant() {
            Some(a) => {
                w.a_omega = a;
                w.a_exact = true;
            }
            None => w.a_omega = subadditivity_constant(&w, &default_grid())?,
        }
        w.validate()?;
        Ok(w)
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return precondition(format!("power exponent must be positive, got {alpha}"));
        }
        OmegaFn::build(OmegaForm::Power(alpha))
    }

    pub fn identity() -> Self {
        OmegaFn::power(1.0).expect("identity is valid")
    }

    pub fn log1p() -> Self {
        OmegaFn::build(OmegaForm::Log1p).expect("log1p is valid")
    }

    pub fn ttanh() -> Self {
        OmegaFn::build(OmegaForm::TTanh).expect("t tanh t is valid")
    }

    pub fn arsinh() -> Self {
        OmegaFn::build(OmegaForm::Arsinh).expect("arsinh is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        OmegaFn::from_expr(&Expr::parse(text)?)
    }

    pub fn from_expr(e: &Expr) -> Result<Self> {
        match e.name.as_str() {
            "pow" | "power" => {
                e.check(&["a"], 1)?;
                OmegaFn::power(e.num("a", 0, None)?)
            }
            "id" => Ok(OmegaFn::identity()),
            "log1p" => Ok(OmegaFn::log1p()),
            "ttanh" => Ok(OmegaFn::ttanh()),
            "arsinh" => Ok(OmegaFn::arsinh()),
            "comp" => {
                e.check(&["f", "g"], 2)?;
                let f = OmegaFn::from_expr(e.expr("f", 0)?)?;
                let g = OmegaFn::from_expr(e.expr("g", 1)?)?;
                Ok(compose(&f, &g))
            }
            other => parse_err(format!("unknown omega `{other}`")),
        }
    }

    pub fn form(&self) -> &OmegaForm {
        &self.form
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.form {
            OmegaForm::Power(a) => {
                if *a == 1.0 {
                    t
                } else if *a == 2.0 {
                    t * t
                } else {
                    t.powf(*a)
                }
            }
            OmegaForm::Log1p => t.ln_1p(),
            OmegaForm::TTanh => t * t.tanh(),
            OmegaForm::Arsinh => t.asinh(),
            OmegaForm::Comp(f, g) => f.eval(g.eval(t)),
        }
    }

    /// `alpha` when `omega(t) = t^alpha` identically.
    pub fn power_exponent(&self) -> Option<f64> {
        match &self.form {
            OmegaForm::Power(a) => Some(*a),
            OmegaForm::Comp(f, g) => Some(f.power_exponent()? * g.power_exponent()?),
            _ => None,
        }
    }

    pub fn is_concave(&self) -> bool {
        match &self.form {
            OmegaForm::Power(a) => *a <= 1.0,
            OmegaForm::Log1p | OmegaForm::Arsinh => true,
            OmegaForm::TTanh => false,
            OmegaForm::Comp(f, g) => f.is_concave() && g.is_concave(),
        }
    }

    fn closed_form_constant(&self) -> Option<f64> {
        if let Some(a) = self.power_exponent() {
            return Some(if a <= 1.0 { 1.0 } else { 2f64.powf(a - 1.0) });
        }
        self.is_concave().then_some(1.0)
    }

    /// The rough-subadditivity constant: exact where a closed form is known,
    /// otherwise a grid estimate (a lower bound).
    pub fn a_omega(&self) -> f64 {
        self.a_omega
    }

    pub fn a_is_exact(&self) -> bool {
        self.a_exact
    }

    fn validate(&self) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return precondition("omega(0) must be 0");
        }
        let grid = default_grid();
        check_increasing(self, &grid)?;
        if !(self.eval(1e8) > self.eval(1e4)) {
            return precondition("omega must be unbounded");
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match &self.form {
            OmegaForm::Power(a) => format!("pow({a})"),
            OmegaForm::Log1p => "log1p".into(),
            OmegaForm::TTanh => "ttanh".into(),
            OmegaForm::Arsinh => "arsinh".into(),
            OmegaForm::Comp(f, g) => format!("comp({},{})", f.label(), g.label()),
        }
    }
}

fn check_increasing(w: &OmegaFn, grid: &[f64]) -> Result<()> {
    let mut prev = w.eval(0.0);
    for &t in grid {
        let v = w.eval(t);
        if !(v > prev) || !v.is_finite() {
            return precondition(format!("omega is not strictly increasing near t = {t}"));
        }
        prev = v;
    }
    Ok(())
}

/// `max omega(t1 + t2) / (omega(t1) + omega(t2))` over pairs from `grid` and `0`.
pub fn subadditivity_constant(w: &OmegaFn, grid: &[f64]) -> Result<f64> {
    let mut g: Vec<f64> = grid.to_vec();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if g.is_empty() || g[0] <= 0.0 {
        return precondition("grid must be positive");
    }
    if g[g.len() - 1] / g[0] < 1e6 * (1.0 - 1e-12) {
        return precondition("grid must cover at least 6 decades");
    }
    check_increasing(w, &g)?;
    let vals: Vec<f64> = g.iter().map(|&t| w.eval(t)).collect();
    let mut best: f64 = 1.0;
    for i in 0..g.len() {
        for j in i..g.len() {
            let r = w.eval(g[i] + g[j]) / (vals[i] + vals[j]);
            best = best.max(r);
        }
    }
    Ok(best)
}

/// `outer o inner`.
pub fn compose(outer: &OmegaFn, inner: &OmegaFn) -> OmegaFn {
    OmegaFn::build(OmegaForm::Comp(Box::new(outer.clone()), Box::new(inner.clone())))
        .expect("a composition of increasing unbounded moduli is valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerForm {
    /// `t^p`.
    Power,
    /// `t^p (1 + e^{-t}) / 2`.
    SoftPower,
}

/// `Omega` with `m1 t^p <= Omega(t) <= m2 t^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOmega {
    pub form: InnerForm,
    pub p: f64,
    pub m1: f64,
    pub m2: f64,
}

impl InnerOmega {
    pub fn new(form: InnerForm, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return precondition(format!("inner omega needs p >= 1, got {p}"));
        }
        let (m1, m2) = match form {
            InnerForm::Power => (1.0, 1.0),
            InnerForm::SoftPower => (0.5, 1.0),
        };
        let w = InnerOmega { form, p, m1, m2 };
        w.verify_sandwich()?;
        Ok(w)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let e = Expr::parse(text)?;
        e.check(&["p"], 1)?;
        let p = e.num("p", 0, None)?;
        match e.name.as_str() {
            "pow" | "power" => InnerOmega::new(InnerForm::Power, p),
            "softpow" => InnerOmega::new(InnerForm::SoftPower, p),
            other => parse_err(format!("unknown inner omega `{other}`")),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let base = if self.p == 2.0 { t * t } else { t.powf(self.p) };
        match self.form {
            InnerForm::Power => base,
            InnerForm::SoftPower => base * (1.0 + (-t).exp()) / 2.0,
        }
    }

    /// Checks `m1 <= Omega(t)/t^p <= m2` on the log grid `[1e-6, 1e6]`.
    pub fn verify_sandwich(&self) -> Result<()> {
        for t in default_grid() {
            let r = self.eval(t) / t.powf(self.p);
            if r < self.m1 * (1.0 - 1e-12) || r > self.m2 * (1.0 + 1e-12) {
                return precondition(format!("Omega(t)/t^p = {r} leaves [m1, m2] at t = {t}"));
            }
        }
        Ok(())
    }
}
