use besovlab::gridfn::*;
use proptest::prelude::*;

fn sample(gen: &str, bx: &str, dx: f64) -> GridFunction {
    GridFunction::sample(&Generator::parse(gen).unwrap(), &GridBox::parse(bx).unwrap(), dx, 0.0).unwrap()
}

fn lp(p: f64) -> LpExponent {
    LpExponent::finite(p).unwrap()
}

#[test]
fn indicator_samples() {
    let f = sample("indicator(0,1)", "-2:3", 0.001);
    assert_eq!(f.len(), 5001);
    for (i, v) in f.values().iter().enumerate() {
        let x = f.coordinate(i)[0];
        let want = if (-1e-9..=1.0 + 1e-9).contains(&x) { 1.0 } else { 0.0 };
        assert_eq!(*v, want, "x = {x}");
    }
    assert!((lp_norm(&f, lp(1.0)) - 1.0).abs() <= 0.001 + 1e-12);
}

#[test]
fn tent_and_bump_samples() {
    let t = sample("tent()", "-2:2", 1.0 / 64.0);
    assert_eq!(lp_norm(&t, LpExponent::Infinity), 1.0);
    let b = sample("bump()", "-2:2", 1.0 / 64.0);
    for (i, v) in b.values().iter().enumerate() {
        let x = b.coordinate(i)[0];
        assert!((0.0..=1.0).contains(v));
        if x.abs() >= 1.0 {
            assert_eq!(*v, 0.0);
        }
    }
}

#[test]
fn gaussian_l2_norm() {
    // Closed form: int exp(-2x^2) = sqrt(pi/2).
    let f = sample("gaussian(1)", "-8:8", 1.0 / 256.0);
    let want = (std::f64::consts::PI / 2.0).powf(0.25);
    assert!((lp_norm(&f, lp(2.0)) - want).abs() < 1e-5, "{}", lp_norm(&f, lp(2.0)));
}

#[test]
fn rejects_bad_boxes() {
    let g = Generator::parse("indicator(0,1)").unwrap();
    assert!(GridFunction::sample(&g, &GridBox::parse("0.5:3").unwrap(), 0.01, 0.0).is_err());
    assert!(GridFunction::sample(&g, &GridBox::parse("-2:3").unwrap(), 0.0, 0.0).is_err());
    assert!(GridFunction::sample(&g, &GridBox::parse("-2:3").unwrap(), 0.3, 0.0).is_err());
    assert!(GridFunction::sample(&g, &GridBox::parse("-2:3").unwrap(), 0.01, 2.5).is_err());
    assert!(GridFunction::sample(&g, &GridBox::parse("-2:3").unwrap(), 0.01, 1.5).is_ok());
}

#[test]
fn distances() {
    let a = sample("indicator(0,1)", "-3:3", 0.001);
    let b = sample("indicator(1,2)", "-3:3", 0.001);
    let region = GridBox::parse("-3:3").unwrap();
    assert_eq!(lp_distance(&a, &a, lp(1.0), &region).unwrap(), 0.0);
    let d = lp_distance(&a, &b, lp(1.0), &region).unwrap();
    assert!((d - 2.0).abs() <= 2.0 * 0.001 + 1e-12, "{d}");
    // Lattices that differ by a non-lattice offset are rejected.
    let c = sample("indicator(0,1)", "-2.0005:3.0005", 0.001);
    assert!(lp_distance(&a, &c, lp(1.0), &region).is_err());
    let e = sample("indicator(0,1)", "-3:3", 0.002);
    assert!(lp_distance(&a, &e, lp(1.0), &region).is_err());
}

#[test]
fn restricted_norm() {
    let f = sample("indicator(0,1)", "-3:3", 1.0 / 100.0);
    let all = lp_norm(&f, lp(1.0));
    let half = lp_norm_on(&f, lp(1.0), &GridBox::parse("-3:0.495").unwrap()).unwrap();
    assert_eq!(lp_norm_on(&f, lp(1.0), &GridBox::parse("-10:10").unwrap()).unwrap(), all);
    assert!((half - 0.5).abs() < 1e-12, "{half}");
}

#[test]
fn text_round_trip_through_file() {
    let f = sample("sum(bump(),scale(0.3,tent(0.5)))", "-2:2", 1.0 / 37.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    std::fs::write(&path, write_text(&f)).unwrap();
    let g = read_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(f, g);
    let two = sample("tent(dim=2)", "-2:2,-2:2", 0.25);
    assert_eq!(read_text(&write_text(&two)).unwrap(), two);
    assert_eq!(to_csv(&two).lines().count(), two.len() + 1);
    assert!(read_text("gridfn v2 dim=1").is_err());
}

#[test]
fn refinement_is_first_order() {
    for (gen, bx) in [("tent()", "-2:2"), ("bump()", "-2:2"), ("ramp(1,1)", "-1:4"), ("smoothtent()", "-3:3")] {
        for p in [1.0, 2.0] {
            for dx in [1.0 / 64.0, 1.0 / 256.0] {
                let a = lp_norm(&sample(gen, bx, dx), lp(p));
                let b = lp_norm(&sample(gen, bx, dx / 2.0), lp(p));
                assert!((a - b).abs() <= dx, "{gen} p={p} dx={dx}: {a} vs {b}");
            }
        }
    }
}

fn unit_box(vals: &[f64]) -> GridFunction {
    // Cell midpoints of [0, 1]: the rectangle-rule measure is exactly 1.
    let dx = 1.0 / vals.len() as f64;
    GridFunction::new(vec![dx / 2.0], dx, vec![vals.len()], vals.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn homogeneity(vals in prop::collection::vec(-10.0f64..10.0, 2..200), c in -50.0f64..50.0, p in 1.0f64..6.0) {
        let f = GridFunction::new(vec![0.0], 0.1, vec![vals.len()], vals.clone()).unwrap();
        let g = f.scaled(c).unwrap();
        for e in [lp(p), LpExponent::Infinity] {
            let a = lp_norm(&g, e);
            let b = c.abs() * lp_norm(&f, e);
            prop_assert!((a - b).abs() <= 1e-13 * b.max(1e-300), "{a} {b}");
        }
    }

    #[test]
    fn holder_monotone(a in -3.0f64..3.0, w in 0.1f64..20.0, phase in 0.0f64..6.3, n in 16usize..400) {
        let dx = 1.0 / n as f64;
        let vals: Vec<f64> = (0..n).map(|i| a * (w * (i as f64 + 0.5) * dx + phase).sin()).collect();
        let f = unit_box(&vals);
        let lip = a.abs() * w;
        let tol = 2.0 * dx * lip + 1e-12;
        let n1 = lp_norm(&f, lp(1.0));
        let n2 = lp_norm(&f, lp(2.0));
        let ni = lp_norm(&f, LpExponent::Infinity);
        prop_assert!(n1 <= n2 + tol && n2 <= ni + tol, "{n1} {n2} {ni}");
    }
}
