//! Command-line front end: parses an experiment, runs it and emits CSV.

use crate::counterexamples as cx;
use crate::error::{parse_err, precondition, Error, Result};
use crate::functionals::{
    besov_seminorm, d_omega, d_omega_inner, dyadic_eps_grid, max_reach, nikolskii_seminorm, Evaluation,
    HQuadrature, SemiNormSpec,
};
use crate::gridfn::{Generator, GridBox, GridFunction, LpExponent};
use crate::kernels::{KernelContext, KernelFamily};
use crate::limits::{approx_decay, bbm_sweep, default_quadrature, lip_sweep, ms_sweep, theo_ratio_sweep};
use crate::omega::{InnerOmega, OmegaFn};
use crate::spec::Expr;
use clap::{Parser, ValueEnum};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandName {
    Seminorm,
    Dfunc,
    SweepBbm,
    SweepMs,
    SweepLip,
    TheoRatio,
    ApproxDecay,
    Counterexample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CounterKind {
    Nonlimit,
    Cesaro,
    Noncompact,
    Noncpctb,
}

/// One experiment. Also readable from a `key=value` file via `--config`.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "besovlab", version, about = "Besov-Nikol'skii semi-norms and nonlocal functionals on sampled functions")]
#[command(args_override_self = true)]
pub struct ExperimentConfig {
    pub command: CommandName,
    /// Counterexample to build (counterexample command only).
    pub kind: Option<CounterKind>,
    /// Function generator, e.g. `indicator(0,1)` or `tent(dim=2)`.
    #[arg(long)]
    pub f: Option<String>,
    /// Kernel family, e.g. `uniform`, `gaussian(0.25)`, `choice2`, `kpp(J=uniform,q=2)`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Outer omega, e.g. `id`, `pow(0.5)`, `log1p`.
    #[arg(long)]
    pub omega: Option<String>,
    /// Inner Omega for the inner-integrand functional, e.g. `pow(2)`.
    #[arg(long)]
    pub inner: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long = "M")]
    pub order: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Sampling box `lo:hi[,lo:hi...]`; defaults to the support padded by M+2.
    #[arg(long = "box")]
    pub bx: Option<String>,
    /// `start:end:geom[:n]` or `start:end:lin[:n]`.
    #[arg(long)]
    pub rgrid: Option<String>,
    /// Largest shift and top of the epsilon grid.
    #[arg(long)]
    pub hmax: Option<f64>,
    /// Depth of the dyadic epsilon grid `hmax 2^-k`, `k = 0..=kmax`.
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long)]
    pub kfrom: Option<u32>,
    #[arg(long)]
    pub kto: Option<u32>,
    #[arg(long = "J")]
    pub j: Option<u64>,
    /// Comma-separated sequence indices.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Also write the CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to BESOVLAB_THREADS, then 1.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

impl ExperimentConfig {
    /// Parses command-line arguments (without the program name), expanding `--config`.
    pub fn from_args<I: IntoIterator<Item = String>>(args: I) -> std::result::Result<Self, clap::Error> {
        let mut rest = Vec::new();
        let mut file = None;
        let mut it = args.into_iter();
        while let Some(a) = it.next() {
            if a == "--config" {
                file = it.next();
            } else if let Some(v) = a.strip_prefix("--config=") {
                file = Some(v.to_string());
            } else {
                rest.push(a);
            }
        }
        let mut argv = vec!["besovlab".to_string()];
        if let Some(path) = file {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                clap::Error::raw(clap::error::ErrorKind::Io, format!("cannot read config {path}: {e}\n"))
            })?;
            let pairs = parse_pairs(text.lines())
                .map_err(|e| clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e}\n")))?;
            let cli_has_command = rest.first().is_some_and(|a| !a.starts_with('-'));
            argv.extend(pairs_to_args(&pairs, !cli_has_command));
        }
        argv.extend(rest);
        ExperimentConfig::try_parse_from(argv)
    }

    /// Reads the `# config:` echo line back.
    pub fn from_echo(line: &str) -> std::result::Result<Self, clap::Error> {
        let body = line.trim().strip_prefix("# config:").unwrap_or(line).trim();
        let pairs = parse_pairs(body.split_whitespace())
            .map_err(|e| clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e}\n")))?;
        let mut argv = vec!["besovlab".to_string()];
        argv.extend(pairs_to_args(&pairs, true));
        ExperimentConfig::try_parse_from(argv)
    }

    /// Set fields as `key=value` pairs, command first.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v = vec![("command".to_string(), value_name(&self.command))];
        let mut put = |k: &str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k.to_string(), x));
            }
        };
        put("kind", self.kind.as_ref().map(value_name));
        put("f", self.f.clone());
        put("kernel", self.kernel.clone());
        put("omega", self.omega.clone());
        put("inner", self.inner.clone());
        put("s", self.s.map(|x| x.to_string()));
        put("p", self.p.clone());
        put("q", self.q.clone());
        put("M", self.order.map(|x| x.to_string()));
        put("epsilon", self.epsilon.map(|x| x.to_string()));
        put("spacing", self.spacing.map(|x| x.to_string()));
        put("box", self.bx.clone());
        put("rgrid", self.rgrid.clone());
        put("hmax", self.hmax.map(|x| x.to_string()));
        put("kmax", self.kmax.map(|x| x.to_string()));
        put("kfrom", self.kfrom.map(|x| x.to_string()));
        put("kto", self.kto.map(|x| x.to_string()));
        put("J", self.j.map(|x| x.to_string()));
        put("n", self.n.clone());
        put("gamma", self.gamma.map(|x| x.to_string()));
        put("out", self.out.as_ref().map(|x| x.display().to_string()));
        put("threads", self.threads.map(|x| x.to_string()));
        v
    }

    pub fn echo(&self) -> String {
        let body: Vec<String> = self.to_pairs().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# config: {}", body.join(" "))
    }

    /// Canonical spelling of expression-valued fields (no whitespace).
    pub fn normalize(&mut self) -> Result<()> {
        for field in [&mut self.f, &mut self.kernel, &mut self.omega, &mut self.inner] {
            if let Some(text) = field {
                *text = Expr::parse(text)?.to_string();
            }
        }
        if let Some(b) = &mut self.bx {
            *b = b.split_whitespace().collect();
        }
        if let Some(r) = &mut self.rgrid {
            *r = r.split_whitespace().collect();
        }
        if let Some(n) = &mut self.n {
            *n = n.split_whitespace().collect();
        }
        Ok(())
    }
}

fn parse_pairs<'a>(lines: impl Iterator<Item = &'a str>) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return parse_err(format!("config line `{line}` is not key=value"));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn pairs_to_args(pairs: &[(String, String)], positional: bool) -> Vec<String> {
    let mut args = Vec::new();
    for key in ["command", "kind"] {
        if let Some((_, v)) = pairs.iter().find(|(k, _)| k == key) {
            if positional {
                args.push(v.clone());
            }
        }
    }
    for (k, v) in pairs {
        if k != "command" && k != "kind" {
            args.push(format!("--{k}={v}"));
        }
    }
    args
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => EXIT_CONFIG,
        Error::Precondition(_) | Error::Margin { .. } | Error::Lattice(_) => EXIT_PRECONDITION,
        Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

/// Parses `start:end:geom[:n]` or `start:end:lin[:n]` (default 8 nodes).
pub fn parse_rgrid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return parse_err(format!("grid `{text}` is not start:end:geom|lin[:n]"));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}` in grid")));
    let (a, b) = (num(parts[0])?, num(parts[1])?);
    let n = match parts.get(3) {
        Some(s) => s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad node count `{s}`")))?,
        None => 8,
    };
    if n < 2 {
        return parse_err("grid needs at least 2 nodes");
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    match parts[2].trim() {
        "lin" => Ok((0..n).map(|i| a + (b - a) * t(i)).collect()),
        "geom" => {
            if !(a > 0.0 && b > 0.0) {
                return parse_err("geometric grid needs positive end points");
            }
            Ok((0..n).map(|i| a * (b / a).powf(t(i))).collect())
        }
        other => parse_err(format!("grid spacing `{other}` is neither geom nor lin")),
    }
}

fn parse_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad index `{s}` in --n"))))
        .collect()
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::Parse(format!("missing --{flag}")))
}

fn lp(text: Option<&String>, default: &str) -> Result<LpExponent> {
    LpExponent::parse(text.map(String::as_str).unwrap_or(default))
}

fn finite(e: LpExponent, flag: &str) -> Result<f64> {
    match e {
        LpExponent::Finite(v) => Ok(v),
        LpExponent::Infinity => precondition(format!("--{flag} must be finite here")),
    }
}

/// Validated inputs shared by the function-based commands.
struct Inputs {
    f: GridFunction,
    order: u32,
    quad: HQuadrature,
}

fn sample(cfg: &ExperimentConfig, order: u32) -> Result<Inputs> {
    let gen = Generator::parse(required(&cfg.f, "f")?)?;
    let dim = gen.dim();
    let spacing = cfg.spacing.unwrap_or(if dim == 1 { 1.0 / 1024.0 } else { 1.0 / 32.0 });
    let bx = match &cfg.bx {
        Some(b) => GridBox::parse(b)?,
        None => match gen.support() {
            Some((lo, hi)) => {
                let pad = order as f64 + 2.0;
                GridBox::new(
                    lo.iter().map(|v| v.floor() - pad).collect(),
                    hi.iter().map(|v| v.ceil() + pad).collect(),
                )?
            }
            None => return precondition("generator is not compactly supported; pass --box"),
        },
    };
    let f = GridFunction::sample(&gen, &bx, spacing, 0.0)?;
    let mut quad = default_quadrature();
    if let Some(h) = cfg.hmax {
        if !(h > 0.0) {
            return precondition("--hmax must be positive");
        }
        let allowed = max_reach(&f, order);
        if h > allowed * (1.0 + 1e-9) {
            return precondition(format!("--hmax {h} exceeds the zero margin / M = {allowed}"));
        }
        quad.h_max = Some(h);
    }
    Ok(Inputs { f, order, quad })
}

fn h_top(cfg: &ExperimentConfig, inp: &Inputs) -> f64 {
    cfg.hmax.unwrap_or_else(|| max_reach(&inp.f, inp.order).floor().max(inp.f.spacing()))
}

fn family(cfg: &ExperimentConfig, dim: usize, s: Option<f64>, default: &str) -> Result<KernelFamily> {
    KernelFamily::parse(cfg.kernel.as_deref().unwrap_or(default), KernelContext { dim, s })
}

fn omega(cfg: &ExperimentConfig) -> Result<OmegaFn> {
    OmegaFn::parse(cfg.omega.as_deref().unwrap_or("id"))
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Table { w }
    }
    fn row(&mut self, fields: Vec<String>) {
        self.w.write_record(fields).expect("in-memory write");
    }
    fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }
}

const MAIN_HEADER: [&str; 9] = ["quantity", "s", "p", "q", "M", "epsilon", "value", "tolerance", "shell_argmax"];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn argmax_shell(shells: &[(usize, f64)]) -> String {
    shells
        .iter()
        .fold(None::<(usize, f64)>, |a, &(j, v)| match a {
            Some((_, best)) if best >= v => a,
            _ => Some((j, v)),
        })
        .map(|(j, _)| j.to_string())
        .unwrap_or_default()
}

fn check_finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("{what} is not finite")))
    }
}

fn eval_rows(t: &mut Table, name: &str, head: [String; 4], eps: Option<f64>, e: &Evaluation) -> Result<()> {
    let [s, p, q, m] = head;
    t.row(vec![
        name.into(),
        s.clone(),
        p.clone(),
        q.clone(),
        m.clone(),
        fmt_opt(eps),
        check_finite(e.value, name)?.to_string(),
        e.tolerance.to_string(),
        argmax_shell(&e.shells),
    ]);
    for (j, v) in &e.shells {
        t.row(vec![
            "shell".into(),
            s.clone(),
            p.clone(),
            q.clone(),
            m.clone(),
            fmt_opt(eps),
            v.to_string(),
            String::new(),
            j.to_string(),
        ]);
    }
    Ok(())
}

fn run_seminorm(cfg: &ExperimentConfig) -> Result<String> {
    let order = cfg.order.unwrap_or(1);
    let s = *required(&cfg.s, "s")?;
    let p = lp(cfg.p.as_ref(), "1")?;
    let q = lp(cfg.q.as_ref(), "inf")?;
    let spec = SemiNormSpec::new(s, p, q, order)?;
    let inp = sample(cfg, order)?;
    let head = [s.to_string(), p.to_string(), q.to_string(), order.to_string()];
    let mut t = Table::new(&MAIN_HEADER);
    if q.is_finite() {
        let e = besov_seminorm(&inp.f, &spec, &inp.quad)?;
        eval_rows(&mut t, "besov", head, None, &e)?;
    } else {
        let r = nikolskii_seminorm(&inp.f, &spec, &inp.quad)?;
        let [s, p, q, m] = head;
        t.row(vec![
            "nikolskii".into(),
            s.clone(),
            p.clone(),
            q.clone(),
            m.clone(),
            String::new(),
            check_finite(r.value, "nikolskii")?.to_string(),
            r.tail_bound.to_string(),
            r.argmax_shell.to_string(),
        ]);
        for (j, v) in &r.shell_max {
            t.row(vec![
                "shell_max".into(),
                s.clone(),
                p.clone(),
                q.clone(),
                m.clone(),
                String::new(),
                v.to_string(),
                String::new(),
                j.to_string(),
            ]);
        }
    }
    Ok(t.finish())
}

fn run_dfunc(cfg: &ExperimentConfig) -> Result<String> {
    let order = cfg.order.unwrap_or(1);
    let s = *required(&cfg.s, "s")?;
    let p = lp(cfg.p.as_ref(), "1")?;
    let eps = *required(&cfg.epsilon, "epsilon")?;
    let inp = sample(cfg, order)?;
    let fam = family(cfg, inp.f.dim(), Some(s), "uniform")?;
    let w = omega(cfg)?;
    let mut t = Table::new(&MAIN_HEADER);
    let head = [s.to_string(), p.to_string(), String::new(), order.to_string()];
    let e = match &cfg.inner {
        Some(inner) => {
            let inner = InnerOmega::parse(inner)?;
            d_omega_inner(&inp.f, &fam, eps, &w, &inner, s, order, &inp.quad)?
        }
        None => {
            let spec = SemiNormSpec::new(s, p, LpExponent::Infinity, order)?;
            d_omega(&inp.f, &fam, eps, &w, &spec, &inp.quad)?
        }
    };
    eval_rows(&mut t, "d_omega", head, Some(eps), &e)?;
    Ok(t.finish())
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<String> {
    match cfg.command {
        CommandName::SweepBbm => {
            let order = cfg.order.unwrap_or(1);
            let p = finite(lp(cfg.p.as_ref(), "1")?, "p")?;
            let grid = parse_rgrid(cfg.rgrid.as_deref().unwrap_or("0.8:0.99:lin:8"))?;
            let inp = sample(cfg, order)?;
            Ok(bbm_sweep(&inp.f, p, &grid, order, &inp.quad)?.to_csv("bbm"))
        }
        CommandName::SweepMs => {
            let p = finite(lp(cfg.p.as_ref(), "1")?, "p")?;
            let grid = parse_rgrid(cfg.rgrid.as_deref().unwrap_or("0.2:0.01:geom:8"))?;
            let inp = sample(cfg, 1)?;
            Ok(ms_sweep(&inp.f, p, &grid, &inp.quad)?.to_csv("ms"))
        }
        _ => {
            let q = finite(lp(cfg.q.as_ref(), "1")?, "q")?;
            let grid = parse_rgrid(cfg.rgrid.as_deref().unwrap_or("0.8:0.99:lin:8"))?;
            let inp = sample(cfg, 1)?;
            let r = lip_sweep(&inp.f, q, &grid, &inp.quad)?;
            let mut out = r.report.to_csv("lip");
            let ratios: Vec<String> = r.ratios.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("# comparator={},ratios={}\n", r.comparator, ratios.join(";")));
            Ok(out)
        }
    }
}

fn run_theo(cfg: &ExperimentConfig) -> Result<String> {
    let order = cfg.order.unwrap_or(1);
    let s = *required(&cfg.s, "s")?;
    let p = lp(cfg.p.as_ref(), "1")?;
    let spec = SemiNormSpec::new(s, p, LpExponent::Infinity, order)?;
    let inp = sample(cfg, order)?;
    let fam = family(cfg, inp.f.dim(), Some(s), "uniform")?;
    let w = omega(cfg)?;
    let top = h_top(cfg, &inp);
    if cfg.command == CommandName::TheoRatio {
        let grid = dyadic_eps_grid(top, cfg.kmax.unwrap_or(12) as usize);
        let r = theo_ratio_sweep(&inp.f, &fam, &w, &spec, &grid, &inp.quad)?;
        let mut out = r.report.to_csv("theo");
        out.push_str(&format!(
            "# theo,nikolskii={},ratio={},limsup_ratio={},tolerance={}\n",
            r.nikolskii, r.ratio, r.limsup_ratio, r.tolerance
        ));
        Ok(out)
    } else {
        let (a, b) = (cfg.kfrom.unwrap_or(2), cfg.kto.unwrap_or(10));
        if b <= a {
            return precondition("--kto must exceed --kfrom");
        }
        let r = approx_decay(&inp.f, &fam, &w, &spec, top, a..=b, &inp.quad)?;
        let mut out = r.report.to_csv("decay");
        out.push_str(&format!("# decay,kfrom={a},kto={b},ratio={}\n", r.ratio));
        Ok(out)
    }
}

const CX_HEADER: [&str; 4] = ["quantity", "index", "value", "reference"];

fn run_counterexample(cfg: &ExperimentConfig) -> Result<String> {
    let kind = cfg
        .kind
        .ok_or_else(|| Error::Parse("counterexample needs a kind: nonlimit, cesaro, noncompact or noncpctb".into()))?;
    let mut t = Table::new(&CX_HEADER);
    let mut notes = Vec::new();
    match kind {
        CounterKind::Cesaro => {
            let j = cfg.j.unwrap_or(1 << 40);
            let c = cx::cesaro_bound_check(j, &cx::cesaro_grid())?;
            for (e, v) in c.grid.iter().zip(&c.values) {
                t.row(vec!["cesaro".into(), e.to_string(), v.to_string(), c.bound.to_string()]);
            }
            notes.push(format!("# cesaro,sup={},argmax={},bound={},holds={}", c.sup, c.argmax, c.bound, c.holds()));
        }
        CounterKind::Nonlimit => {
            let s = cfg.s.unwrap_or(0.5);
            let p = finite(lp(cfg.p.as_ref(), "2")?, "p")?;
            let q = finite(lp(cfg.q.as_ref(), "2")?, "q")?;
            let f = cx::nonlimit_function(s, p, q, cfg.order.unwrap_or(1), cfg.j.unwrap_or(10))?;
            let d = cx::nonlimit_diagnostics(&f, &cx::cesaro_grid())?;
            for (j, _, v, lower) in &d.shells {
                t.row(vec!["shell".into(), j.to_string(), v.to_string(), lower.to_string()]);
            }
            for (e, v) in &d.quark_side {
                t.row(vec!["quark".into(), e.to_string(), v.to_string(), d.quark_bound.to_string()]);
            }
            notes.push(format!(
                "# nonlimit,c={},quark_sup={},quark_bound={},lower_bound_holds={}",
                d.c,
                d.quark_sup(),
                d.quark_bound,
                d.lower_bound_holds()
            ));
        }
        CounterKind::Noncompact => {
            let order = cfg.order.unwrap_or(1);
            let s = cfg.s.unwrap_or(0.5);
            let p = finite(lp(cfg.p.as_ref(), "2")?, "p")?;
            let ns = parse_list(cfg.n.as_deref().unwrap_or("1,4,16,64,256"))?;
            let profile = Generator::parse(cfg.f.as_deref().unwrap_or("bump()"))?;
            let fam = family(cfg, 1, Some(s), "uniform")?;
            let sw = cx::noncompact_sweep(order, s, p, &ns, &fam, &profile, &default_quadrature())?;
            for ((n, v), norm) in sw.ns.iter().zip(&sw.values).zip(&sw.norms) {
                t.row(vec!["functional".into(), n.to_string(), v.to_string(), norm.to_string()]);
            }
            let seq = ns
                .iter()
                .map(|&n| cx::noncompact_sequence(order, s, p, n, &profile))
                .collect::<Result<Vec<_>>>()?;
            let probe = cx::compactness_probe(&seq, &GridBox::cube(1, -1.0, 1.0)?, LpExponent::Finite(p))?;
            for i in 0..ns.len() {
                for j in i + 1..ns.len() {
                    t.row(vec![
                        "distance".into(),
                        format!("{}:{}", ns[i], ns[j]),
                        probe.matrix[i][j].to_string(),
                        String::new(),
                    ]);
                }
            }
            notes.push(format!(
                "# noncompact,max_min_ratio={},min_distance={}",
                sw.max_min_ratio, probe.min_off_diagonal
            ));
        }
        CounterKind::Noncpctb => {
            let order = cfg.order.unwrap_or(1);
            let s = cfg.s.unwrap_or(0.5);
            let p = finite(lp(cfg.p.as_ref(), "2")?, "p")?;
            let q = finite(lp(cfg.q.as_ref(), "2")?, "q")?;
            let gamma = cfg.gamma.unwrap_or(0.0);
            let ns = parse_list(cfg.n.as_deref().unwrap_or("4,8,16,32,64"))?;
            let profile = Generator::parse(cfg.f.as_deref().unwrap_or("bump()"))?;
            let sw = cx::noncompact_besov_sweep(order, s, p, q, gamma, &ns, &profile, &default_quadrature())?;
            for ((n, v), norm) in sw.ns.iter().zip(&sw.values).zip(&sw.norms) {
                t.row(vec!["functional".into(), n.to_string(), v.to_string(), norm.to_string()]);
            }
            notes.push(format!(
                "# noncpctb,fitted_exponent={},expected_exponent={},max_min_ratio={}",
                sw.fitted_exponent,
                -(1.0 - gamma * q),
                sw.max_min_ratio
            ));
        }
    }
    let mut out = t.finish();
    for n in notes {
        out.push_str(&n);
        out.push('\n');
    }
    Ok(out)
}

fn threads(cfg: &ExperimentConfig) -> Result<usize> {
    if let Some(t) = cfg.threads {
        return if t == 0 { parse_err("--threads must be at least 1") } else { Ok(t) };
    }
    match std::env::var("BESOVLAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(t),
            _ => parse_err(format!("BESOVLAB_THREADS=`{v}` is not a positive integer")),
        },
        Err(_) => Ok(1),
    }
}

/// Runs a parsed experiment and returns the CSV text, config comment first.
pub fn run(cfg: &ExperimentConfig) -> Result<String> {
    let mut cfg = cfg.clone();
    cfg.normalize()?;
    let n = threads(&cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start {n} threads: {e}")))?;
    let body = pool.install(|| match cfg.command {
        CommandName::Seminorm => run_seminorm(&cfg),
        CommandName::Dfunc => run_dfunc(&cfg),
        CommandName::SweepBbm | CommandName::SweepMs | CommandName::SweepLip => run_sweep(&cfg),
        CommandName::TheoRatio | CommandName::ApproxDecay => run_theo(&cfg),
        CommandName::Counterexample => run_counterexample(&cfg),
    })?;
    let text = format!("{}\n{body}", cfg.echo());
    if let Some(path) = &cfg.out {
        std::fs::write(path, &text)
            .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(text)
}

/// Full front end: returns the process exit code.
pub fn main_with<I: IntoIterator<Item = String>>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cfg = match ExperimentConfig::from_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    match run(&cfg) {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "besovlab: {e}");
            exit_code(&e)
        }
    }
}
