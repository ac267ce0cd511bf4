use super::*;
use crate::par::ExecPolicy;
use crate::quadrature::adaptive_gk;
use proptest::prelude::*;

fn bump() -> Multiplier {
    Multiplier::gaussian_bump(4.0, 0.5, [2.0, 6.0]).unwrap()
}

#[test]
fn smooth_step_is_a_partition_pair() {
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-15);
    }
    assert_eq!(smooth_step(-0.1), 0.0);
    assert_eq!(smooth_step(1.1), 1.0);
}

#[test]
fn vanishes_outside_support() {
    let f = bump();
    assert_eq!(f.eval(1.99).norm(), 0.0);
    assert_eq!(f.eval(6.01).norm(), 0.0);
    assert!((f.eval(4.0).re - 1.0).abs() < 1e-15);
    let p = Multiplier::poly_bump(2.0, 1.0, 3.0).unwrap();
    assert!((p.eval(2.0).re - 1.0).abs() < 1e-15);
    assert_eq!(p.eval(0.5).norm(), 0.0);
}

#[test]
fn json_round_trip_and_validation() {
    let f = bump();
    let g = Multiplier::from_json(&f.to_json()).unwrap();
    assert_eq!(f, g);
    let h = Multiplier::from_json(r#"{"family":"heat","t":1.0,"cutoff":40.0,"support":[0,40]}"#).unwrap();
    assert_eq!(h.support, [0.0, 40.0]);
    assert!(Multiplier::from_json(r#"{"family":"heat","t":1.0,"cutoff":40.0,"support":[0,10]}"#).is_err());
    assert!(Multiplier::from_json(r#"{"family":"poly_bump","p":-1,"a":1,"b":2}"#).is_err());
    let t = Multiplier::from_json(r#"{"family":"table","x":[1,2,3],"y":[0,1,0]}"#).unwrap();
    assert!((t.eval(2.0).re - 1.0).abs() < 1e-15);
}

#[test]
fn spline_reproduces_nodes_and_lines() {
    let x: Vec<f64> = (0..8).map(|i| 1.0 + 0.5 * i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
    let t = Multiplier::table(x.clone(), y.clone()).unwrap();
    for v in [1.1, 2.37, 4.4] {
        assert!((t.eval(v).re - (2.0 * v - 1.0)).abs() < 1e-12);
    }
    for (a, b) in x.iter().zip(&y) {
        assert!((t.eval(*a).re - b).abs() < 1e-12);
    }
}

#[test]
fn sobolev_of_zero_is_zero() {
    let r = sobolev_norm(&Multiplier::zero(), 1.0, SobolevGrid::default());
    assert_eq!(r.norm, 0.0);
}

#[test]
fn sobolev_s0_is_l2() {
    let f = bump();
    let r = sobolev_norm(&f, 0.0, SobolevGrid::default());
    let direct = adaptive_gk(|x| f.eval(x).norm_sqr(), 2.0, 6.0, 1e-14, 1e-13).sqrt();
    assert!((r.norm - direct).abs() / direct < 1e-6, "{} vs {}", r.norm, direct);
    assert!(!r.unresolved);
}

#[test]
fn gaussian_w1_closed_form() {
    // |ĝ|² = (w/2) e^{−wξ²/2} for g = e^{−x²/w}
    let w: f64 = 0.5;
    let exact = (std::f64::consts::PI * w / 2.0).sqrt() * (1.0 + 1.0 / w);
    let r = sobolev_norm(&bump(), 1.0, SobolevGrid::default());
    let rel = (r.norm * r.norm - exact).abs() / exact;
    assert!(rel < 1e-4, "rel {rel}");
}

#[test]
fn mw_dilation_invariance() {
    let f = Multiplier::poly_bump(3.0, 1.0, 2.0).unwrap();
    let grid = SobolevGrid { n: 1024, pad: 4 };
    let base = mw_norm(&f, 1.0, BumpSpec::MwWindow, grid, ExecPolicy::Parallel);
    assert!(base.norm > 0.0);
    for c in [2.0, 0.25] {
        let g = f.clone().dilated(c).unwrap();
        let m = mw_norm(&g, 1.0, BumpSpec::MwWindow, grid, ExecPolicy::Sequential);
        assert!((m.norm - base.norm).abs() / base.norm < 1e-10, "c={c}: {} vs {}", m.norm, base.norm);
    }
    // the sup sits inside the scan, away from its ends
    let first = base.scan.first().unwrap().1;
    let last = base.scan.last().unwrap().1;
    assert!(first < base.norm && last < base.norm);
    assert_eq!(last, 0.0);
}

#[test]
fn chi_partition_of_unity() {
    let chi = BumpSpec::DyadicCutoffChi;
    let mut rng = rand::rng();
    for _ in 0..500 {
        let t: f64 = 2f64.powf(rand::Rng::random_range(&mut rng, -20.0..20.0));
        let s: f64 = (-30..=30).map(|k| chi.eval(2f64.powi(-k) * t)).sum();
        assert!((s - 1.0).abs() < 1e-12, "t={t} sum={s}");
    }
    assert_eq!(chi.eval(0.5), 0.0);
    assert_eq!(chi.eval(2.0), 0.0);
    assert!(BumpSpec::MwWindow.eval(1.0) > 0.3);
}

#[test]
fn truncation_support_and_reconstruction() {
    let f = bump();
    assert!(truncate_dyadic(&f, 0.0, BumpSpec::DyadicCutoffChi).is_err());
    assert!(truncate_dyadic(&f, 1.0, BumpSpec::MwWindow).is_err());
    let fm = truncate_dyadic(&f, 4.0, BumpSpec::DyadicCutoffChi).unwrap();
    assert_eq!(fm.eval(&[4.0], 1.9).norm(), 0.0);
    assert_eq!(fm.eval(&[4.0], 8.1).norm(), 0.0);
    assert!(fm.eval(&[4.0], 4.0).norm() > 0.0);
    // Σ_{k ≤ kK} F_{2^k} = F whenever |η| ≤ 2^{kK − 1}
    let k_top = 5;
    for &eta in &[1e-3, 0.37, 1.0, 5.5, 16.0] {
        for &lam in &[2.5, 3.9, 5.2] {
            let s: Complex64 = (-40..=k_top)
                .map(|k| truncate_dyadic(&f, 2f64.powi(k), BumpSpec::DyadicCutoffChi).unwrap().eval(&[lam], eta))
                .sum();
            assert!((s - f.eval(lam)).norm() < 1e-12);
        }
    }
}

#[test]
fn h1_threshold_kills_the_spectrum() {
    // H₁: b = |η|, r = 1, so C = 1 and the threshold is 2 K_hi
    let f = bump();
    let m_thr = vanishing_threshold(1.0, f.k_hi());
    assert_eq!(m_thr, 12.0);
    let fm = truncate_dyadic(&f, m_thr * 1.01, BumpSpec::DyadicCutoffChi).unwrap();
    // |η| ≥ M/2 > K_hi ≥ (2n+1)|η| is impossible, so every symbol value is zero
    for i in 1..400 {
        let eta = i as f64 * 0.1;
        for n in 0..50 {
            assert_eq!(fm.symbol(&[n], &[], &[eta], &[1], eta).norm(), 0.0);
        }
    }
}

#[test]
fn symbol_support_consistency_and_lattice_size() {
    let f = bump();
    let h = JointMultiplier::Spectral(f.clone());
    let ranks = [1, 2];
    for b in [[0.3, 0.7], [1.0, 0.25], [0.05, 0.11]] {
        let lat = h.levels(&b, &ranks);
        let bound: f64 = b.iter().map(|bj| f.k_hi() / (2.0 * bj) + 1.0).product();
        assert!(lat.len() as f64 <= bound);
        // exhaustive below K_hi, μ on a small grid for the first block
        let caps: Vec<usize> = b.iter().map(|bj| (f.k_hi() / (2.0 * bj)).ceil() as usize + 1).collect();
        for n0 in 0..=caps[0] {
            for n1 in 0..=caps[1] {
                for mu in [0.0, 0.4, 1.3] {
                    let lam = (2 * n0 + 1) as f64 * b[0] + mu + (2 * n1 + 2) as f64 * b[1];
                    let v = h.symbol(&[n0, n1], &[mu], &b, &ranks, 1.0);
                    if !(f.k_lo()..=f.k_hi()).contains(&lam) {
                        assert_eq!(v.norm(), 0.0);
                    }
                    if v.norm() > 0.0 {
                        assert!(lat.contains(&vec![n0, n1]));
                    }
                }
            }
        }
    }
}

#[test]
fn tensor_levels_and_rho_range() {
    let f1 = Multiplier::gaussian_bump(2.0, 0.5, [1.0, 3.0]).unwrap();
    let f2 = Multiplier::gaussian_bump(3.0, 0.5, [2.0, 4.0]).unwrap();
    let h = JointMultiplier::Tensor(vec![f1.clone(), f2.clone()]);
    let lat = h.levels(&[0.5, 1.0], &[1, 1]);
    // n₁ ≤ (3/0.5 − 1)/2 = 2, n₂ ≤ (4 − 1)/2 = 1
    assert_eq!(lat.len(), 3 * 2);
    let v = h.eval(&[2.0, 3.0], 0.0);
    assert!((v - f1.eval(2.0) * f2.eval(3.0)).norm() < 1e-15);
    let (lo, hi) = JointMultiplier::Spectral(f1).rho_range(&[1.0], &[1]).unwrap();
    assert_eq!((lo, hi), (0.0, 3.0));
    assert!(JointMultiplier::Spectral(Multiplier::zero()).rho_range(&[1.0], &[1]).is_none());
}

#[test]
fn mixed_norm_factorizes_for_tensors() {
    let f1 = Multiplier::gaussian_bump(2.0, 0.5, [1.0, 3.0]).unwrap();
    let f2 = Multiplier::poly_bump(3.0, 1.0, 2.5).unwrap();
    let (n, pad) = (128, 4);
    let (s1, s2) = (0.8, 1.3);
    let joint = mixed_sobolev_norm_2d(|a, b| f1.eval(a) * f2.eval(b), [1.0, 3.0], [1.0, 2.5], [s1, s2], n, pad);
    let a = sobolev_norm_fn(|x| f1.eval(x), 1.0, 3.0, s1, n, pad);
    let b = sobolev_norm_fn(|x| f2.eval(x), 1.0, 2.5, s2, n, pad);
    assert!((joint - a * b).abs() / (a * b) < 1e-10);
    let iso = isotropic_sobolev_norm_2d(|a, b| f1.eval(a) * f2.eval(b), [1.0, 3.0], [1.0, 2.5], s1 + s2, n, pad);
    assert!(joint <= iso);
}

#[test]
fn differences() {
    assert_eq!(difference_op(|_| 3.5, &[2], &[4]), 0.0);
    let f = |n: &[i64]| (n[0] as f64).powi(3) - 2.0 * n[0] as f64;
    let d2 = difference_op(f, &[2], &[3]);
    assert_eq!(d2, f(&[5]) - 2.0 * f(&[4]) + f(&[3]));
    assert_eq!(difference_op(|n| (n[0] * n[1]) as f64, &[1, 1], &[7, -2]), 1.0);
    let seq: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
    assert!(difference_seq(&seq, 2).iter().all(|&v| v == 2.0));
}

#[test]
fn discrete_continuous_exact_cases() {
    let r = discrete_to_continuous_check(|x| x[0].sin(), |x| x[0].cos(), &[1], &[0.7], 0, 0);
    assert!(r.holds && (r.lhs - r.rhs).abs() < 1e-10);
    let r = discrete_to_continuous_check(|x| x[0] * x[0], |_| 2.0, &[2], &[3.0], 0, 0);
    assert!((r.lhs - 2.0).abs() < 1e-12 && (r.rhs - 2.0).abs() < 1e-12);
    let e = std::f64::consts::E;
    let r = discrete_to_continuous_check(|x| (x[0] + x[1]).exp(), |x| (x[0] + x[1]).exp(), &[1, 1], &[0.0, 0.0], 0, 0);
    assert!(((r.lhs - (e - 1.0).powi(2)).abs()) < 1e-12);
    assert!((r.lhs - r.rhs).abs() < 1e-6 && r.cauchy_schwarz_holds);
    let mc = discrete_to_continuous_check(|x| (x[0] + x[1]).exp(), |x| (x[0] + x[1]).exp(), &[1, 1], &[0.0, 0.0], 100_000, 9);
    assert!(mc.holds && mc.cauchy_schwarz_holds);
}

proptest! {
    #[test]
    fn difference_commutes_with_shift(c in prop::collection::vec(-3.0f64..3.0, 5), n in 0i64..20, p in 0u32..4) {
        let f = |k: &[i64]| c.iter().enumerate().map(|(i, a)| a * (k[0] as f64 * 0.3).powi(i as i32)).sum::<f64>();
        let shifted = |k: &[i64]| f(&[k[0] + 1]);
        let a = difference_op(shifted, &[p], &[n]);
        let b = difference_op(f, &[p], &[n + 1]);
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn d2c_identity_on_polynomials(c in prop::collection::vec(-2.0f64..2.0, 4), b0 in 0u32..3, b1 in 0u32..3, x in 0.0f64..5.0, y in 0.0f64..5.0) {
        // f = Σ c_i x^i y^{3−i}
        let f = |p: &[f64]| c.iter().enumerate().map(|(i, a)| a * p[0].powi(i as i32) * p[1].powi(3 - i as i32)).sum::<f64>();
        let df = |p: &[f64]| {
            c.iter().enumerate().map(|(i, a)| {
                let (i, j) = (i as i32, 3 - i as i32);
                let fall = |e: i32, k: u32| (0..k as i32).map(|t| (e - t) as f64).product::<f64>();
                if i < b0 as i32 || j < b1 as i32 { 0.0 } else {
                    a * fall(i, b0) * fall(j, b1) * p[0].powi(i - b0 as i32) * p[1].powi(j - b1 as i32)
                }
            }).sum::<f64>()
        };
        let r = discrete_to_continuous_check(f, df, &[b0, b1], &[x, y], 0, 0);
        prop_assert!((r.lhs - r.rhs).abs() <= 1e-9 * (1.0 + r.lhs.abs()));
        prop_assert!(r.cauchy_schwarz_holds);
    }

    #[test]
    fn sobolev_monotone_in_s(center in 2.5f64..5.5, width in 0.2f64..2.0) {
        let f = Multiplier::gaussian_bump(center, width, [2.0, 6.0]).unwrap();
        let g = SobolevGrid { n: 512, pad: 4 };
        let a = sobolev_norm(&f, 0.3, g).norm;
        let b = sobolev_norm(&f, 0.9, g).norm;
        prop_assert!(a <= b);
    }
}
