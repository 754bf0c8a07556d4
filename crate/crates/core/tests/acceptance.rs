//! Acceptance criteria 1-9: one PASS/FAIL line each, with tolerances pinned below.

mod common;

use besovlab::counterexamples::*;
use besovlab::findiff::*;
use besovlab::functionals::*;
use besovlab::gridfn::*;
use besovlab::kernels::*;
use besovlab::limits::*;
use besovlab::omega::*;
use common::radial_integral;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const MS_NODE_TOL: f64 = 0.02;
const MS_LIMIT_TOL: f64 = 0.02;
const BBM_TOL: f64 = 0.05;
const THEO_TOL: f64 = 0.02;
const TWO_SIDED_TOL: f64 = 0.03;
const REFINE_FACTOR: f64 = 1.5;
const DECAY_LEVEL: f64 = 0.05;
const NO_DECAY_TOL: f64 = 0.10;
const SHELL_RATIO_TOL: f64 = 0.10;
const NORM_TOL: f64 = 0.01;
const BOUNDED_RATIO: f64 = 4.0;
const PROBE_FRACTION: f64 = 0.5;
const EXPONENT_TOL: f64 = 0.15;
const KERNEL_TOL: f64 = 1e-6;
const OMEGA_TOL: f64 = 1e-12;
/// Iterated-difference bounds C(M), M = 1, 2.
const ITERATED_C: [(u32, f64); 2] = [(1, 2.4), (2, 5.5)];

const FAMILIES: [&str; 4] = ["uniform", "gaussian(0.25)", "bump", "choice2"];
const OMEGAS: [&str; 3] = ["id", "pow(0.5)", "log1p"];
/// Frozen lower bands c* of the corpus ratio, rows by family, columns by omega.
const C_STAR: [[f64; 3]; 4] = [[0.70, 0.80, 0.77], [0.54, 0.70, 0.64], [0.68, 0.79, 0.76], [0.87, 0.91, 0.90]];

struct Criterion {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Criterion { notes: Vec::new(), failures: Vec::new() }
    }
    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }
    fn note(&mut self, what: String) {
        self.notes.push(what);
    }
}

fn lp(p: f64) -> LpExponent {
    LpExponent::finite(p).unwrap()
}

fn sample(gen: &str, bx: &str, dx: f64) -> GridFunction {
    GridFunction::sample(&Generator::parse(gen).unwrap(), &GridBox::parse(bx).unwrap(), dx, 0.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1(c: &mut Criterion) {
    let f = sample("indicator(0,1)", "-3:4", 1e-3);
    let grid: Vec<f64> = (0..8).map(|i| 0.2 * (0.05f64).powf(i as f64 / 7.0)).collect();
    let rep = ms_sweep(&f, 1.0, &grid, &HQuadrature::default()).unwrap();
    let worst = grid
        .iter()
        .zip(&rep.values)
        .map(|(r, v)| rel(*v, 4.0 * (1.0 + r / (1.0 - r))))
        .fold(0.0, f64::max);
    c.check(worst <= MS_NODE_TOL, format!("max node error {:.4}", worst));
    c.check(rel(rep.extrapolated, 4.0) <= MS_LIMIT_TOL, format!("extrapolated {:.5}", rep.extrapolated));
}

fn criterion_2(c: &mut Criterion) {
    let q = default_quadrature();
    let r_grid = [0.8, 0.85, 0.9, 0.93, 0.96, 0.98, 0.99];
    let tent = bbm_sweep(&sample("tent()", "-3:3", 1.0 / 1024.0), 1.0, &r_grid, 1, &q).unwrap();
    c.check(rel(tent.extrapolated, 4.0) <= BBM_TOL, format!("tent {:.4}", tent.extrapolated));
    let want = 2.0 * (PI / 2.0).sqrt();
    let gauss = bbm_sweep(&sample("gaussian(1)", "-9:9", 1.0 / 512.0), 2.0, &r_grid, 1, &q).unwrap();
    c.check(rel(gauss.extrapolated, want) <= BBM_TOL, format!("gaussian {:.4} vs {want:.4}", gauss.extrapolated));
}

/// Ratio and per-node excess for every (entry, family, omega) at two spacings.
struct CorpusRun {
    name: &'static str,
    family: usize,
    omega: usize,
    ratio: [f64; 2],
    worst_node: f64,
}

fn corpus_runs() -> Vec<CorpusRun> {
    let policy = default_quadrature().policy;
    let mut out = Vec::new();
    for e in corpus() {
        let spec = e.spec().unwrap();
        let grid = dyadic_eps_grid(e.h_max().unwrap(), 12);
        let fs = [e.sample().unwrap(), e.sample_at(e.spacing / 2.0).unwrap()];
        let profs: Vec<DifferenceProfile> = fs
            .iter()
            .map(|f| DifferenceProfile::lp(f, e.order, spec.p, max_reach(f, e.order), policy).unwrap())
            .collect();
        for (fi, fam) in FAMILIES.iter().enumerate() {
            let fam = KernelFamily::parse(fam, KernelContext { dim: fs[0].dim(), s: Some(e.s) }).unwrap();
            for (wi, w) in OMEGAS.iter().enumerate() {
                let w = OmegaFn::parse(w).unwrap();
                let mut ratio = [0.0; 2];
                let mut worst_node = 0.0f64;
                for k in 0..2 {
                    let t = theo_ratio_on(&fs[k], &profs[k], &fam, &w, e.s, &grid).unwrap();
                    ratio[k] = t.ratio;
                    let bound = w.eval(t.nikolskii);
                    for v in &t.report.values {
                        worst_node = worst_node.max(v / bound);
                    }
                }
                out.push(CorpusRun { name: e.name, family: fi, omega: wi, ratio, worst_node });
            }
        }
    }
    out
}

fn criterion_3(c: &mut Criterion, runs: &[CorpusRun]) {
    let violations: Vec<&CorpusRun> = runs.iter().filter(|r| r.worst_node > 1.0 + THEO_TOL).collect();
    let worst = runs.iter().map(|r| r.worst_node).fold(0.0, f64::max);
    c.note(format!("{} combinations x 2 spacings, worst node {:.4}", runs.len(), worst));
    c.check(
        violations.is_empty(),
        format!(
            "{} violations{}",
            violations.len(),
            violations
                .iter()
                .map(|r| format!(" {}/{}/{}", r.name, FAMILIES[r.family], OMEGAS[r.omega]))
                .collect::<String>()
        ),
    );
}

fn criterion_4(c: &mut Criterion, runs: &[CorpusRun]) {
    let f = sample("indicator(0,1)", "-3:4", 1.0 / 2048.0);
    let fam = KernelFamily::parse("choice2", KernelContext { dim: 1, s: Some(1.0) }).unwrap();
    let spec = SemiNormSpec::new(1.0, lp(1.0), LpExponent::Infinity, 1).unwrap();
    let t = theo_ratio_sweep(&f, &fam, &OmegaFn::identity(), &spec, &dyadic_eps_grid(3.0, 10), &default_quadrature()).unwrap();
    c.check((t.ratio - 1.0).abs() <= TWO_SIDED_TOL, format!("indicator/choice2 ratio {:.4}", t.ratio));
    let mut out_of_band = Vec::new();
    let mut unstable = Vec::new();
    let mut spread = 1.0f64;
    for r in runs {
        let band = C_STAR[r.family][r.omega];
        for v in r.ratio {
            if !(v >= band && v <= 1.0 + THEO_TOL) {
                out_of_band.push(format!("{}/{}/{}={v:.3}", r.name, FAMILIES[r.family], OMEGAS[r.omega]));
            }
        }
        let m = r.ratio[0].max(r.ratio[1]) / r.ratio[0].min(r.ratio[1]);
        spread = spread.max(m);
        if !(m <= REFINE_FACTOR) {
            unstable.push(r.name);
        }
    }
    c.check(out_of_band.is_empty(), format!("{} ratios outside [c*, 1.02] {}", out_of_band.len(), out_of_band.join(" ")));
    c.check(unstable.is_empty(), format!("max refinement factor {spread:.4}"));
}

fn criterion_5(c: &mut Criterion) {
    let q = default_quadrature();
    let fam = KernelFamily::parse("uniform", KernelContext { dim: 1, s: Some(0.5) }).unwrap();
    let half = SemiNormSpec::new(0.5, lp(2.0), LpExponent::Infinity, 1).unwrap();
    let pow2 = OmegaFn::power(2.0).unwrap();
    let dx = 2f64.powi(-11);
    for gen in ["bump()", "gaussian(0.5)", "smoothtent()"] {
        let f = sample(gen, "-6:6", dx);
        let d = approx_decay(&f, &fam, &pow2, &half, 2.0, 2..=10, &q).unwrap();
        c.check(d.ratio <= DECAY_LEVEL, format!("{gen} {:.5}", d.ratio));
    }
    let ind = sample("indicator(0,1)", "-6:6", dx);
    let bv = SemiNormSpec::new(0.5, lp(1.0), LpExponent::Infinity, 1).unwrap();
    let d = approx_decay(&ind, &fam, &pow2, &bv, 2.0, 2..=10, &q).unwrap();
    c.check(d.ratio <= DECAY_LEVEL, format!("indicator s=1/2 {:.5}", d.ratio));
    let one = SemiNormSpec::new(1.0, lp(1.0), LpExponent::Infinity, 1).unwrap();
    let d = approx_decay(&ind, &fam, &OmegaFn::identity(), &one, 2.0, 2..=10, &q).unwrap();
    let worst = d.report.values.iter().map(|v| rel(*v, 2.0)).fold(0.0, f64::max);
    c.check(worst <= NO_DECAY_TOL, format!("indicator s=1 max deviation {:.4}", worst));
}

fn criterion_6(c: &mut Criterion) {
    let grid = cesaro_grid();
    let check = cesaro_bound_check(1 << 62, &grid).unwrap();
    c.check(grid.len() == 60, format!("{} nodes", grid.len()));
    c.check(check.sup <= cesaro_bound(), format!("sup {:.5} <= {:.5}", check.sup, check.bound));
    c.check(check.sup >= 0.60, format!("argmax eps {:.3}", check.argmax));
}

fn criterion_7(c: &mut Criterion) {
    let f = nonlimit_function(0.5, 2.0, 2.0, 1, 10).unwrap();
    let d = nonlimit_diagnostics(&f, &cesaro_grid()).unwrap();
    let above = d.quark_side.iter().filter(|x| x.1 > d.quark_bound).count();
    c.check(above == 0, format!("quark sup {:.4} <= {:.4}", d.quark_sup(), d.quark_bound));
    let base = d.shells[0].2;
    let shells: Vec<String> = d.shells.iter().map(|s| format!("{:.4}", s.2)).collect();
    let ok = d.shells.len() == 3
        && d.shells.iter().zip([1.0, 2f64.sqrt(), 3f64.sqrt()]).all(|(s, w)| rel(s.2 / base, w) <= SHELL_RATIO_TOL);
    c.check(ok, format!("shells {}", shells.join(":")));
    c.check(d.lower_bound_holds(), format!("c = {:.4}", d.c));
}

fn criterion_8(c: &mut Criterion) {
    let bump = Generator::parse("bump()").unwrap();
    let q = default_quadrature();
    let phi = lp_norm(&sample("bump()", "-2:2", 1.0 / 8192.0), lp(2.0));
    let ns = [1, 4, 16, 64, 256];
    let fam = KernelFamily::parse("uniform", KernelContext { dim: 1, s: Some(0.5) }).unwrap();
    let sw = noncompact_sweep(1, 0.5, 2.0, &ns, &fam, &bump, &q).unwrap();
    let spread = sw.norms.iter().map(|v| rel(*v, phi)).fold(0.0, f64::max);
    c.check(spread <= NORM_TOL, format!("norm spread {:.4}", spread));
    c.check(sw.max_min_ratio <= BOUNDED_RATIO, format!("functional max/min {:.3}", sw.max_min_ratio));
    let seq: Vec<GridFunction> = ns.iter().map(|&n| noncompact_sequence(1, 0.5, 2.0, n, &bump).unwrap()).collect();
    let probe = compactness_probe(&seq, &GridBox::parse("-1:1").unwrap(), lp(2.0)).unwrap();
    c.check(
        probe.min_off_diagonal >= PROBE_FRACTION * phi,
        format!("probe min {:.4} >= {:.4}", probe.min_off_diagonal, PROBE_FRACTION * phi),
    );
    let ns = [4, 8, 16, 32, 64];
    for gamma in [0.0, 0.25] {
        let sw = noncompact_besov_sweep(1, 0.5, 2.0, 2.0, gamma, &ns, &bump, &q).unwrap();
        let want = -(1.0 - gamma * 2.0);
        c.check(
            (sw.fitted_exponent - want).abs() <= EXPONENT_TOL,
            format!("gamma={gamma} slope {:.3} vs {want}", sw.fitted_exponent),
        );
    }
    let sw = noncompact_besov_sweep(1, 0.5, 2.0, 2.0, 0.5, &ns, &bump, &q).unwrap();
    c.check(sw.max_min_ratio <= BOUNDED_RATIO, format!("gamma=1/q max/min {:.3}", sw.max_min_ratio));
}

fn padded(vals: &[f64], pad: usize) -> GridFunction {
    let mut v = vec![0.0; vals.len() + 2 * pad];
    v[pad..pad + vals.len()].copy_from_slice(vals);
    GridFunction::new(vec![0.0], 0.125, vec![v.len()], v).unwrap()
}

fn criterion_9(c: &mut Criterion) {
    // Polynomial annihilation, exact.
    let mut exact = true;
    for m in 1..=MAX_ORDER {
        for deg in 0..m {
            let coeffs: Vec<String> = (0..=deg).map(|i| (i as i64 + 1).to_string()).collect();
            let f = sample(&format!("poly({})", coeffs.join(",")), "-2:2", 0.0625);
            for k in [1, 3, -2] {
                let d = forward_difference_interior(&f, &LatticeShift::along(1, 0, k).unwrap(), m).unwrap();
                exact &= d.values().iter().all(|&v| v == 0.0);
            }
        }
    }
    c.check(exact, "polynomial annihilation".into());
    // Triangle identity and iterated-difference ratio on random pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let exps = [lp(1.0), lp(2.0), LpExponent::Infinity];
    let (mut tri_bad, mut worst_iter) = (0, [0.0f64; 2]);
    for _ in 0..100 {
        let vals: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = rng.gen_range(1..=12i64);
        let z = rng.gen_range(-12..=12i64);
        if z == 0 || z == h || h + z == 0 {
            continue;
        }
        let p = exps[rng.gen_range(0..3)];
        let f = padded(&vals, 110);
        let d = |k: i64, m: u32| diff_lp_norm(&f, &LatticeShift::along(1, 0, k).unwrap(), m, p).unwrap();
        if d(h, 1) > (d(z, 1) + d(z - h, 1)) * (1.0 + 1e-12) {
            tri_bad += 1;
        }
        for (i, (m, _)) in ITERATED_C.iter().enumerate() {
            worst_iter[i] = worst_iter[i].max(d(h + z, 2 * m) / (d(h, *m) + d(z, *m)));
        }
    }
    for w in (1..200).map(|i| PI * i as f64 / 200.0) {
        let vals: Vec<f64> = (0..40).map(|i| (w * i as f64).sin()).collect();
        let f = padded(&vals, 110);
        let d = |k: i64, m: u32| diff_lp_norm(&f, &LatticeShift::along(1, 0, k).unwrap(), m, lp(2.0)).unwrap();
        for (i, (m, _)) in ITERATED_C.iter().enumerate() {
            worst_iter[i] = worst_iter[i].max(d(2, 2 * m) / (2.0 * d(1, *m)));
        }
    }
    c.check(tri_bad == 0, format!("triangle violations {tri_bad}"));
    for (i, (m, cm)) in ITERATED_C.iter().enumerate() {
        c.check(worst_iter[i] <= *cm, format!("C({m}) ratio {:.3} <= {cm}", worst_iter[i]));
    }
    // Kernel masses and moments against an independent oracle.
    let mut kernel_err = 0.0f64;
    for dim in 1..=3 {
        for text in FAMILIES.iter().chain(&["imbnikol(0.2,2)", "kpp(uniform,2)", "mspow"]) {
            let fam = KernelFamily::parse(text, KernelContext { dim, s: Some(0.6) }).unwrap();
            for eps in [1.0, 0.1] {
                let k = fam.instantiate(eps).unwrap();
                let oracle = radial_integral(&|t| k.density(t), dim, 0.0, k.effective_radius());
                kernel_err = kernel_err.max((k.mass() - 1.0).abs()).max((oracle - 1.0).abs());
                let m1 = radial_integral(&|t| k.density(t), dim, 1.0, k.effective_radius());
                kernel_err = kernel_err.max((k.moment(1.0).unwrap() - m1).abs() / m1.max(1.0));
            }
        }
    }
    let u = KernelFamily::parse("uniform", KernelContext { dim: 1, s: None }).unwrap().instantiate(1.0).unwrap();
    kernel_err = kernel_err.max((u.moment(2.0).unwrap() - 1.0 / 3.0).abs());
    c.check(kernel_err <= KERNEL_TOL, format!("kernel mass/moment error {kernel_err:.1e}"));
    // Radialization, clip stack and the disjoint cover.
    let (mut claim_err, mut cover_ok) = (0.0f64, true);
    for dim in 1..=3 {
        for (base, th) in [(Kernel::gaussian(dim, 1.0).unwrap(), 0.5), (Kernel::bump(dim, 1.0).unwrap(), 0.3)] {
            let (k, ann) = radialize(&base, th).unwrap();
            let oracle = radial_integral(&|t| k.density(t), dim, 0.0, k.effective_radius());
            claim_err = claim_err.max((k.mass() - 1.0).abs()).max((oracle - 1.0).abs());
            cover_ok &= ann.infimum > 0.0;
        }
        for (r1, r2, alpha) in [(0.3, 1.0, 1.0), (0.5, 1.0, 2.0), (0.9, 3.0, 1.0)] {
            let cs = clip_stack(dim, r1, r2, alpha).unwrap();
            let oracle = radial_integral(&|t| cs.kernel.density(t), dim, 0.0, r2);
            claim_err = claim_err.max((oracle - 1.0).abs());
            let copies: Vec<(f64, f64)> = cs.thetas.iter().map(|t| (t * r1, t * r2)).collect();
            for i in 0..20_000 {
                let t = r2 * (i as f64 + 0.5) / 20_000.0;
                let hits = copies.iter().filter(|(lo, hi)| t > *lo && t < *hi).count();
                cover_ok &= hits <= 1 && (t < r2 / 5.0 || (hits == 1 && cs.kernel.density(t) > 0.0));
            }
        }
    }
    c.check(claim_err <= KERNEL_TOL, format!("radialize/clip_stack mass error {claim_err:.1e}"));
    c.check(cover_ok, "disjoint cover".into());
    // Subadditivity constants.
    let g = default_grid();
    for (text, want) in [("pow(0.5)", 1.0), ("pow(2)", 2.0), ("log1p", 1.0)] {
        let est = subadditivity_constant(&OmegaFn::parse(text).unwrap(), &g).unwrap();
        c.check((est - want).abs() <= OMEGA_TOL, format!("A({text}) = {est}"));
    }
}

fn main() {
    let total = Instant::now();
    let mut failed = 0;
    let mut report = |n: u32, title: &str, limit: Duration, started: Instant, c: Criterion| {
        let elapsed = started.elapsed();
        let mut c = c;
        c.check(elapsed < limit, format!("{:.2}s < {}s", elapsed.as_secs_f64(), limit.as_secs()));
        let status = if c.failures.is_empty() { "PASS" } else { "FAIL" };
        if !c.failures.is_empty() {
            failed += 1;
        }
        println!("{status} criterion {n}: {title}: {}", c.notes.join("; "));
        for f in &c.failures {
            println!("     failed check: {f}");
        }
    };
    let secs = Duration::from_secs;
    let t = Instant::now();
    let mut c = Criterion::new();
    criterion_1(&mut c);
    report(1, "MS limit", secs(10), t, c);
    let t = Instant::now();
    let mut c = Criterion::new();
    criterion_2(&mut c);
    report(2, "BBM limit", secs(60), t, c);
    let t = Instant::now();
    let runs = corpus_runs();
    let sweep_time = t.elapsed();
    let mut c = Criterion::new();
    criterion_3(&mut c, &runs);
    report(3, "D_omega upper bound", secs(300), t, c);
    let t = Instant::now() - sweep_time;
    let mut c = Criterion::new();
    criterion_4(&mut c, &runs);
    report(4, "two-sided ratio", secs(300), t, c);
    let t = Instant::now();
    let mut c = Criterion::new();
    criterion_5(&mut c);
    report(5, "approximation decay", secs(300), t, c);
    let t = Instant::now();
    let mut c = Criterion::new();
    criterion_6(&mut c);
    report(6, "Cesaro bound", secs(1), t, c);
    let t = Instant::now();
    let mut c = Criterion::new();
    criterion_7(&mut c);
    report(7, "non-limiting function", secs(120), t, c);
    let t = Instant::now();
    let mut c = Criterion::new();
    criterion_8(&mut c);
    report(8, "non-compactness", secs(180), t, c);
    let t = Instant::now();
    let mut c = Criterion::new();
    criterion_9(&mut c);
    report(9, "property suites", secs(300), t, c);
    println!("acceptance: {} of 9 criteria passed in {:.1}s", 9 - failed, total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
