mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use varband::penalty::{
    newton_root, penalty_value, prox_general, prox_objective as lib_prox_objective, prox_single_pass, prox_unit,
    subgradient_distance, taper_formula, HierarchicalProx, WeightScheme,
};

const SCHEMES: [WeightScheme; 2] = [WeightScheme::Quadratic, WeightScheme::Unit];

fn instance(g: &mut rand_chacha::ChaCha8Rng, max_r: usize) -> (Vec<f64>, f64) {
    let r = g.gen_range(2..=max_r);
    let y = random_vec(g, r, 1.0);
    let tau = 10f64.powf(g.gen_range(-2.0..1.5));
    (y, tau)
}

#[test]
fn weights_follow_definition() {
    for l in 1..8 {
        for m in 1..=l {
            assert_eq!(WeightScheme::Unit.weight::<f64>(l, m), 1.0);
            let q: f64 = WeightScheme::Quadratic.weight(l, m);
            assert!((q - weight(WeightScheme::Quadratic, l, m)).abs() < 1e-16);
        }
        assert_eq!(WeightScheme::Quadratic.weight::<f64>(l, l), 1.0);
    }
}

#[test]
fn penalty_examples() {
    for s in SCHEMES {
        assert_eq!(penalty_value(&[0.0, 0.0, 0.0, 2.5], s), 0.0);
        assert_eq!(penalty_value(&[3.0], s), 0.0);
    }
    assert_eq!(penalty_value(&[-0.7, 4.0], WeightScheme::Unit), 0.7);
    let q = penalty_value(&[1.0, 1.0, 9.0], WeightScheme::Quadratic);
    assert!((q - (1.0 + 17f64.sqrt() / 4.0)).abs() < 1e-15);
}

#[test]
fn penalty_matches_definition() {
    let mut g = rng(10);
    for _ in 0..200 {
        let (y, _) = instance(&mut g, 10);
        for s in SCHEMES {
            assert!((penalty_value(&y, s) - penalty_oracle(&y, s)).abs() <= 1e-12);
        }
    }
}

#[test]
fn unit_prox_full_shrinkage_and_identity() {
    let out = prox_unit(&[1.0, 0.0, 3.0], 2.0);
    assert_eq!(out.gamma, vec![0.0, 0.0, 3.0]);
    assert_eq!(out.zero_prefix, 2);
    let y = [0.3, -1.2, 0.8, 2.0f64];
    let out = prox_unit(&y, 1e-14);
    for (a, b) in out.gamma.iter().zip(&y) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn unit_prox_matches_general_and_oracle() {
    let mut g = rng(11);
    let y = random_vec(&mut g, 6, 1.0);
    let fast = prox_unit(&y, 0.3).gamma;
    let general = prox_general(&y, 0.3, WeightScheme::Unit).unwrap().gamma;
    let oracle = prox_oracle(&y, 0.3, WeightScheme::Unit);
    for i in 0..6 {
        assert!((fast[i] - general[i]).abs() <= 1e-10);
        assert!((fast[i] - oracle.gamma[i]).abs() <= 1e-6);
    }
}

#[test]
fn zero_offdiagonal_input_is_fixed() {
    for s in SCHEMES {
        let y = [0.0, 0.0, 0.0, -1.5];
        let out = prox_general(&y, 0.8, s).unwrap();
        assert_eq!(out.gamma, y.to_vec());
        assert_eq!(out.zero_prefix, 3);
    }
}

#[test]
fn general_prox_matches_oracle_objective() {
    let mut g = rng(12);
    for _ in 0..100 {
        let (y, tau) = instance(&mut g, 8);
        for s in SCHEMES {
            let got = prox_general(&y, tau, s).unwrap().gamma;
            let oracle = prox_oracle(&y, tau, s);
            let f_got = prox_objective(&y, tau, s, &got);
            let f_ref = prox_objective(&y, tau, s, &oracle.gamma);
            assert!(oracle.gap <= 1e-9, "oracle gap {}", oracle.gap);
            assert!(f_got <= f_ref + 1e-9, "{f_got} vs {f_ref}");
            assert!(f_got >= f_ref - oracle.gap - 1e-9);
        }
    }
}

#[test]
fn library_and_oracle_objectives_agree() {
    let mut g = rng(13);
    for _ in 0..50 {
        let (y, tau) = instance(&mut g, 8);
        let gamma = random_vec(&mut g, y.len(), 1.0);
        for s in SCHEMES {
            let a = lib_prox_objective(&y, tau, s, &gamma);
            let b = prox_objective(&y, tau, s, &gamma);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn subgradient_distance_matches_oracle() {
    let mut g = rng(14);
    for _ in 0..100 {
        let (y, tau) = instance(&mut g, 7);
        let r = y.len();
        let j = g.gen_range(0..r);
        let mut point = random_vec(&mut g, r, 1.0);
        point[..j].iter_mut().for_each(|v| *v = 0.0);
        let c = random_vec(&mut g, r, 0.5);
        for s in SCHEMES {
            let got = subgradient_distance(&c, &point, tau, s).unwrap();
            let want = subgradient_distance_oracle(&c, &point, tau, s);
            assert!(got >= want - 1e-9, "{got} < {want}");
            assert!(got <= want + 1e-6 * (1.0 + want), "{got} vs {want}");
        }
    }
}

#[test]
fn newton_root_closed_forms() {
    let nu: f64 = newton_root(&[3.0], &[1.0], 0.5).unwrap();
    assert!((nu - 5.0).abs() <= 1e-12);
    let nu: f64 = newton_root(&[3.0, 4.0], &[1.0, 1.0], 1.0).unwrap();
    assert!((nu - 4.0).abs() <= 1e-12);
}

#[test]
fn newton_root_requires_a_positive_root() {
    assert!(newton_root(&[0.5], &[1.0], 1.0).is_err());
    assert!(newton_root(&[3.0], &[1.0], 0.0).is_err());
}

#[test]
fn newton_root_matches_bisection() {
    let mut g = rng(15);
    let w: Vec<f64> = (1..=5).map(|m| weight(WeightScheme::Quadratic, 5, m)).collect();
    for _ in 0..200 {
        let z = random_vec(&mut g, 5, 1.0);
        let d_inv_z = z.iter().zip(&w).map(|(a, b)| (a / b).powi(2)).sum::<f64>().sqrt();
        let tau = d_inv_z * g.gen_range(0.01..0.99);
        let h = |nu: f64| z.iter().zip(&w).map(|(zm, wm)| wm * wm * zm * zm / (wm * wm + nu).powi(2)).sum::<f64>();
        let dz = z.iter().zip(&w).map(|(a, b)| (a * b).powi(2)).sum::<f64>().sqrt();
        let (lo, hi) = ((dz / tau - 1.0).max(0.0), dz / tau);
        let want = bisect_decreasing(|nu| h(nu) - tau * tau, lo, hi);
        let got = newton_root(&z, &w, tau).unwrap();
        assert!(got >= lo - 1e-12 && got <= hi + 1e-12);
        assert!((got - want).abs() <= 1e-10 * (1.0 + want), "{got} vs {want}");
        assert!((h(got) - tau * tau).abs() <= 1e-12 * tau * tau * 10.0);
    }
}

#[test]
fn taper_extremes() {
    for s in SCHEMES {
        let y = [0.01, -0.02, 0.01, 1.0f64];
        assert_eq!(taper_formula(&y, 100.0, s).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
        let y = [0.4, -1.0, 2.0, 0.5f64];
        for (a, b) in taper_formula(&y, 1e-13, s).unwrap().iter().zip(&y) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn taper_matches_general_prox_for_unit_weights() {
    let mut g = rng(16);
    for _ in 0..500 {
        let (y, tau) = instance(&mut g, 10);
        let t = taper_formula(&y, tau, WeightScheme::Unit).unwrap();
        let p = prox_general(&y, tau, WeightScheme::Unit).unwrap().gamma;
        for (a, b) in t.iter().zip(&p) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn single_pass_and_taper_coincide() {
    let mut g = rng(17);
    for _ in 0..300 {
        let (y, tau) = instance(&mut g, 10);
        for s in SCHEMES {
            let t = taper_formula(&y, tau, s).unwrap();
            let p = prox_single_pass(&y, tau, s).unwrap().gamma;
            for (a, b) in t.iter().zip(&p) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            }
        }
    }
}

#[test]
fn warm_dual_start_reaches_the_same_point() {
    let mut g = rng(18);
    for _ in 0..100 {
        let (y, tau) = instance(&mut g, 9);
        let mut prox = HierarchicalProx::new(y.len(), WeightScheme::Quadratic);
        let y0 = random_vec(&mut g, y.len(), 1.0);
        prox.apply(&y0, tau).unwrap();
        let warm = prox.apply(&y, tau).unwrap().to_vec();
        let cold = prox_general(&y, tau, WeightScheme::Quadratic).unwrap().gamma;
        let fw = prox_objective(&y, tau, WeightScheme::Quadratic, &warm);
        let fc = prox_objective(&y, tau, WeightScheme::Quadratic, &cold);
        assert!((fw - fc).abs() <= 1e-10 * (1.0 + fc.abs()));
    }
}

#[test]
fn single_precision_prox() {
    let y: Vec<f32> = vec![0.4, -1.0, 2.0, 0.5];
    let g32 = prox_general(&y, 0.3f32, WeightScheme::Quadratic).unwrap();
    let y64: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let g64 = prox_general(&y64, 0.3, WeightScheme::Quadratic).unwrap();
    for (a, b) in g32.gamma.iter().zip(&g64.gamma) {
        assert!((*a as f64 - b).abs() <= 1e-4);
    }
}

fn prox_input() -> impl Strategy<Value = (Vec<f64>, f64, bool)> {
    (prop::collection::vec(-3.0..3.0f64, 2..12), -2.0..1.5f64, any::<bool>())
        .prop_map(|(y, lt, unit)| (y, 10f64.powf(lt), unit))
}

fn scheme_of(unit: bool) -> WeightScheme {
    if unit {
        WeightScheme::Unit
    } else {
        WeightScheme::Quadratic
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn zero_set_is_a_prefix((y, tau, unit) in prox_input()) {
        let out = prox_general(&y, tau, scheme_of(unit)).unwrap();
        let r = y.len();
        let j = out.zero_prefix;
        prop_assert!(out.gamma[..j].iter().all(|v| *v == 0.0));
        prop_assert!(out.gamma[j..r - 1].iter().all(|v| *v != 0.0 || y.iter().any(|x| *x == 0.0)));
    }

    #[test]
    fn diagonal_is_untouched((y, tau, unit) in prox_input()) {
        let out = prox_general(&y, tau, scheme_of(unit)).unwrap();
        prop_assert_eq!(out.gamma[y.len() - 1], y[y.len() - 1]);
    }

    #[test]
    fn shrinkage_is_monotone((y, tau, unit) in prox_input()) {
        let out = prox_general(&y, tau, scheme_of(unit)).unwrap();
        for m in 0..y.len() - 1 {
            let (gm, ym) = (out.gamma[m], y[m]);
            prop_assert!(gm.abs() <= ym.abs() * (1.0 + 1e-12));
            prop_assert!(gm == 0.0 || gm.signum() == ym.signum());
        }
    }

    #[test]
    fn prox_output_is_stationary((y, tau, unit) in prox_input()) {
        let s = scheme_of(unit);
        let out = prox_general(&y, tau, s).unwrap();
        let c: Vec<f64> = y.iter().zip(&out.gamma).map(|(a, b)| a - b).collect();
        let d = subgradient_distance(&c, &out.gamma, tau, s).unwrap();
        prop_assert!(d <= 1e-8, "residual {}", d);
    }

    #[test]
    fn unit_fast_path_equals_general((y, tau, _u) in prox_input()) {
        let a = prox_unit(&y, tau);
        let b = prox_general(&y, tau, WeightScheme::Unit).unwrap();
        prop_assert_eq!(a.zero_prefix, b.zero_prefix);
        for (u, v) in a.gamma.iter().zip(&b.gamma) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn taper_equals_prox_on_unit_weights((y, tau, _u) in prox_input()) {
        let t = taper_formula(&y, tau, WeightScheme::Unit).unwrap();
        let p = prox_general(&y, tau, WeightScheme::Unit).unwrap().gamma;
        for (a, b) in t.iter().zip(&p) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }
}
