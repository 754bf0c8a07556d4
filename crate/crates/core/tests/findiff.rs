use besovlab::findiff::*;
use besovlab::functionals::{max_reach, nikolskii_from_profile, DifferenceProfile, SamplePolicy};
use besovlab::gridfn::*;
use besovlab::limits::corpus;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Frozen bounds on `||D^{2M}_{h1+h2} f|| / (||D^M_{h1} f|| + ||D^M_{h2} f||)`, about 15%
/// above the brute-force maxima 2.00 (M = 1) and 4.76 (M = 2); sines peak at 128/27 for M = 2.
const ITERATED_C: [(u32, f64); 2] = [(1, 2.4), (2, 5.5)];
/// Frozen bound on the order-M over order-2M Nikol'skii quotient; observed at most 0.71.
const ORDER_REDUCTION_C: f64 = 1.0;

fn lp(p: f64) -> LpExponent {
    LpExponent::finite(p).unwrap()
}

fn shift(k: i64) -> LatticeShift {
    LatticeShift::along(1, 0, k).unwrap()
}

fn padded(vals: &[f64], pad: usize) -> GridFunction {
    let mut v = vec![0.0; vals.len() + 2 * pad];
    v[pad..pad + vals.len()].copy_from_slice(vals);
    GridFunction::new(vec![0.0], 0.125, vec![v.len()], v).unwrap()
}

fn exponent(code: u8) -> LpExponent {
    match code {
        0 => lp(1.0),
        1 => lp(1.5),
        2 => lp(2.0),
        _ => LpExponent::Infinity,
    }
}

fn poly(coeffs: &[f64], bx: &str, dx: f64) -> GridFunction {
    let text: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
    let g = Generator::parse(&format!("poly({})", text.join(","))).unwrap();
    GridFunction::sample(&g, &GridBox::parse(bx).unwrap(), dx, 0.0).unwrap()
}

#[test]
fn linear_and_quadratic() {
    let x = poly(&[0.0, 1.0], "-2:2", 0.125);
    let d = forward_difference_interior(&x, &LatticeShift::from_vector(&[0.5], 0.125).unwrap(), 1).unwrap();
    assert!(d.values().iter().all(|&v| v == 0.5));
    let x2 = poly(&[0.0, 0.0, 1.0], "-2:2", 0.125);
    let d2 = forward_difference_interior(&x2, &LatticeShift::from_vector(&[1.0], 0.125).unwrap(), 2).unwrap();
    assert!(d2.values().iter().all(|&v| v == 2.0));
    assert_eq!(d2.len(), x2.len() - 16);
}

#[test]
fn polynomial_annihilation_exact() {
    // Integer coefficients on a dyadic lattice keep every sum exact.
    for m in 1..=MAX_ORDER {
        for deg in 0..m {
            let coeffs: Vec<f64> = (0..=deg).map(|i| (i as f64 + 1.0) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let f = poly(&coeffs, "-2:2", 0.0625);
            for k in [1, 2, 3, -2] {
                let d = forward_difference_interior(&f, &shift(k), m).unwrap();
                assert!(d.values().iter().all(|&v| v == 0.0), "M={m} deg={deg} k={k}");
            }
        }
    }
    // In 2D, x^a y^b with a + b < M along a diagonal shift.
    let n = 33;
    let dx = 0.0625;
    let mut vals = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (-1.0 + i as f64 * dx, -1.0 + j as f64 * dx);
            vals.push(3.0 * x * x * y - x * y + 2.0 * y - 5.0);
        }
    }
    let f = GridFunction::new(vec![-1.0, -1.0], dx, vec![n, n], vals).unwrap();
    let d = forward_difference_interior(&f, &LatticeShift::new(vec![2, -1]).unwrap(), 4).unwrap();
    assert!(d.values().iter().all(|&v| v == 0.0));
    assert!(forward_difference_interior(&f, &LatticeShift::new(vec![2, -1]).unwrap(), 3)
        .unwrap()
        .values()
        .iter()
        .any(|&v| v != 0.0));
}

#[test]
fn indicator_difference_norms() {
    let f = GridFunction::sample(
        &Generator::parse("indicator(0,1)").unwrap(),
        &GridBox::parse("-4:5").unwrap(),
        1.0 / 256.0,
        0.0,
    )
    .unwrap();
    let dx = f.spacing();
    let a = diff_lp_norm(&f, &LatticeShift::from_vector(&[0.25], dx).unwrap(), 1, lp(1.0)).unwrap();
    assert!((a - 0.5).abs() < 1e-12, "{a}");
    let b = diff_lp_norm(&f, &LatticeShift::from_vector(&[-3.0], dx).unwrap(), 1, lp(1.0)).unwrap();
    assert!((b - 2.0 * (1.0 + dx)).abs() < 1e-12, "{b}");
    assert!((b - disjoint_translate_norm(&f, 1, lp(1.0))).abs() < 1e-12);
}

#[test]
fn constants_are_annihilated() {
    let c = GridFunction::new(vec![0.0], 0.1, vec![50], vec![3.25; 50]).unwrap();
    for m in 1..=4 {
        for k in [1, 5] {
            let d = forward_difference_interior(&c, &shift(k), m).unwrap();
            assert_eq!(lp_norm(&d, lp(2.0)), 0.0);
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    let f = padded(&[1.0, 2.0, 3.0], 2);
    assert!(forward_difference(&f, &shift(1), 0).is_err());
    assert!(forward_difference(&f, &shift(2), 2).is_err());
    assert!(LatticeShift::new(vec![0, 0]).is_err());
    assert!(LatticeShift::from_vector(&[0.3], 0.125).is_err());
}

#[test]
fn triangle_identity_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let vals: Vec<f64> = (0..60).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = padded(&vals, 50);
    let mut checked = 0;
    while checked < 100 {
        let h = rng.gen_range(-24..=24i64);
        let z = rng.gen_range(-24..=24i64);
        if h == 0 || z == 0 || z == h {
            continue;
        }
        for code in 0..4 {
            let p = exponent(code);
            let dh = diff_lp_norm(&f, &shift(h), 1, p).unwrap();
            let dz = diff_lp_norm(&f, &shift(z), 1, p).unwrap();
            let dzh = diff_lp_norm(&f, &shift(z - h), 1, p).unwrap();
            let tol = 1e-12 * (dz + dzh + dh);
            assert!(dh <= dz + dzh + tol, "h={h} z={z}: {dh} > {dz} + {dzh}");
            assert!(dz <= dh + dzh + tol, "h={h} z={z}: {dz} > {dh} + {dzh}");
        }
        checked += 1;
    }
}

#[test]
fn order_reduction_on_corpus() {
    for c in corpus().into_iter().filter(|c| c.order == 1 && !c.bx.contains(',')) {
        let f = c.sample().unwrap();
        let p = lp(c.p);
        let one = DifferenceProfile::lp(&f, 1, p, max_reach(&f, 1), SamplePolicy::AllLatticePoints).unwrap();
        let two = DifferenceProfile::lp(&f, 2, p, max_reach(&f, 2), SamplePolicy::AllLatticePoints).unwrap();
        for s in [0.25, 0.5, 0.75] {
            let a = nikolskii_from_profile(&one, s).value;
            let b = nikolskii_from_profile(&two, s).value;
            assert!(a <= ORDER_REDUCTION_C * b, "{} s={s}: {a} > {b}", c.name);
        }
    }
}

fn random_function() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-1.0f64..1.0, 40),
        prop::collection::vec(prop::bool::ANY.prop_map(|b| b as u8 as f64), 40),
        (0.05f64..1.5).prop_map(|w| (0..40).map(|i| (i as f64 * w).sin()).collect()),
    ]
}

proptest! {
    #[test]
    fn iterated_difference_bound(vals in random_function(), h1 in 1i64..12, h2 in -11i64..12, code in 0u8..4) {
        prop_assume!(h2 != 0 && h1 + h2 != 0);
        let p = exponent(code);
        for (m, c) in ITERATED_C {
            let f = padded(&vals, 4 * m as usize * 12 + 2);
            let num = diff_lp_norm(&f, &shift(h1 + h2), 2 * m, p).unwrap();
            let den = diff_lp_norm(&f, &shift(h1), m, p).unwrap() + diff_lp_norm(&f, &shift(h2), m, p).unwrap();
            prop_assert!(num <= c * den + 1e-12, "M={m}: {num} > {c} * {den}");
        }
    }

    #[test]
    fn coarse_upper_bound(vals in random_function(), k in -10i64..11, m in 1u32..=MAX_ORDER, code in 0u8..4) {
        prop_assume!(k != 0);
        let p = exponent(code);
        let f = padded(&vals, 6 * 10 + 1);
        let d = diff_lp_norm(&f, &shift(k), m, p).unwrap();
        let bound = 2f64.powi(m as i32) * lp_norm(&f, p);
        prop_assert!(d <= bound * (1.0 + 1e-12), "{d} > {bound}");
        let coeff_sum: f64 = difference_coefficients(m).iter().map(|c| c.abs()).sum();
        prop_assert_eq!(coeff_sum, 2f64.powi(m as i32));
    }
}
