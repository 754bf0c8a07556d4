use besovlab::omega::*;
use proptest::prelude::*;

fn builtins() -> Vec<OmegaFn> {
    [
        "id",
        "pow(0.5)",
        "pow(0.25)",
        "pow(2)",
        "pow(3)",
        "log1p",
        "ttanh",
        "arsinh",
        "comp(log1p,pow(2))",
        "comp(pow(0.5),log1p)",
        "comp(pow(2),pow(0.5))",
    ]
    .iter()
    .map(|t| OmegaFn::parse(t).unwrap())
    .collect()
}

#[test]
fn documented_subadditivity_constants() {
    let g = default_grid();
    for (text, want) in [("pow(0.5)", 1.0), ("pow(2)", 2.0), ("log1p", 1.0)] {
        let w = OmegaFn::parse(text).unwrap();
        let est = subadditivity_constant(&w, &g).unwrap();
        assert!((est - want).abs() < 1e-12, "{text}: {est}");
        assert!((w.a_omega() - want).abs() < 1e-12);
    }
    // t^2 attains its constant on the diagonal t1 = t2.
    let sq = OmegaFn::power(2.0).unwrap();
    assert!((sq.eval(2.0) / (2.0 * sq.eval(1.0)) - 2.0).abs() < 1e-15);
}

#[test]
fn compositions() {
    let g = default_grid();
    let id = compose(&OmegaFn::power(2.0).unwrap(), &OmegaFn::power(0.5).unwrap());
    for t in [1e-3, 0.7, 42.0] {
        assert!((id.eval(t) - t).abs() < 1e-12 * t);
    }
    assert_eq!(id.a_omega(), 1.0);
    let lp = OmegaFn::parse("comp(log1p,pow(2))").unwrap();
    assert_eq!(lp.eval(0.0), 0.0);
    let est = subadditivity_constant(&lp, &g).unwrap();
    assert!(est.is_finite() && est >= 1.0 && est <= 2.0 + 1e-12, "{est}");
    let pl = OmegaFn::parse("comp(pow(0.5),log1p)").unwrap();
    assert!((subadditivity_constant(&pl, &g).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn estimate_is_a_lower_bound_of_closed_forms() {
    let g = default_grid();
    for w in builtins() {
        let est = subadditivity_constant(&w, &g).unwrap();
        if w.a_is_exact() {
            assert!(est <= w.a_omega() * (1.0 + 1e-12), "{}: {est} > {}", w.label(), w.a_omega());
        } else {
            assert_eq!(est, w.a_omega());
        }
    }
}

#[test]
fn dilation_remark() {
    // omega(2^s x) <= (2A)^M omega(x) for s <= M.
    let g = default_grid();
    for w in builtins() {
        let a = w.a_omega();
        for m in 1..=3u32 {
            let bound = (2.0 * a).powi(m as i32);
            for k in 1..=8 {
                let s = m as f64 * k as f64 / 8.0;
                for &x in &g {
                    let lhs = w.eval(2f64.powf(s) * x);
                    assert!(lhs <= bound * w.eval(x) * (1.0 + 1e-12), "{} M={m} s={s} x={x}", w.label());
                }
            }
        }
    }
}

#[test]
fn rejects_invalid_inputs() {
    assert!(OmegaFn::power(-1.0).is_err());
    assert!(OmegaFn::parse("cos").is_err());
    let short: Vec<f64> = (0..20).map(|i| 1.0 + i as f64).collect();
    assert!(subadditivity_constant(&OmegaFn::log1p(), &short).is_err());
    assert!(subadditivity_constant(&OmegaFn::log1p(), &[0.0, 1.0, 1e7]).is_err());
}

#[test]
fn inner_sandwich() {
    for text in ["pow(1)", "pow(2)", "pow(3.5)", "softpow(1)", "softpow(2)", "softpow(4)"] {
        let w = InnerOmega::parse(text).unwrap();
        w.verify_sandwich().unwrap();
        for t in default_grid() {
            let r = w.eval(t) / t.powf(w.p);
            assert!(r >= w.m1 * (1.0 - 1e-12) && r <= w.m2 * (1.0 + 1e-12), "{text} t={t}: {r}");
        }
    }
    let soft = InnerOmega::parse("softpow(2)").unwrap();
    assert_eq!((soft.m1, soft.m2), (0.5, 1.0));
    assert!(InnerOmega::parse("pow(0.9)").is_err());
}

proptest! {
    #[test]
    fn rough_subadditivity_holds_with_closed_form(t1 in 1e-6f64..1e6, t2 in 1e-6f64..1e6, code in 0usize..8) {
        let w = &builtins()[code];
        prop_assume!(w.a_is_exact());
        let lhs = w.eval(t1 + t2);
        prop_assert!(lhs <= w.a_omega() * (w.eval(t1) + w.eval(t2)) * (1.0 + 1e-12));
    }

    #[test]
    fn increasing(t in 1e-6f64..1e6, code in 0usize..11) {
        let w = &builtins()[code];
        prop_assert!(w.eval(t * 1.001) > w.eval(t));
    }
}
