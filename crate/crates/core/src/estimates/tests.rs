use super::*;
use crate::group::build_heisenberg_reiter;
use crate::kernel::plancherel_spectral_norm;
use crate::multiplier::Multiplier;
use crate::quadrature::adaptive_gk;

fn h1() -> (StratifiedGroup2, LayerDecomposition) {
    build_heisenberg_reiter(1, 1, None).unwrap()
}

#[test]
fn ws_recipe_on_h1_at_s_1_6() {
    let (g, _) = h1();
    let w = WeightSpec::w_s(&g, 1.6).unwrap();
    let rec = w.recipe.as_ref().unwrap();
    assert!((w.r - 0.45).abs() < 1e-12);
    assert!((rec.eps - 0.05 / 3.0).abs() < 1e-12);
    assert!((rec.alpha1 - (1.0 + 0.05 / 3.0)).abs() < 1e-12);
    assert!((rec.alpha2 - (0.1 + 0.05 / 3.0)).abs() < 1e-12);
    assert!((w.alpha - rec.alpha1 - rec.alpha2).abs() < 1e-15);
    assert!(rec.inequalities.iter().all(|i| i.holds));
}

#[test]
fn ws_recipe_is_infeasible_at_or_below_half_dimension() {
    let (g, _) = h1();
    for s in [1.4, 1.5] {
        match WeightSpec::w_s(&g, s) {
            Err(Error::InfeasibleWeight { violated, .. }) => assert!(violated.contains("dim G")),
            other => panic!("s = {s}: expected infeasible, got {other:?}"),
        }
    }
    // feasible just above the threshold, on bigger groups too
    for (d1, d2) in [(1, 1), (1, 2), (2, 3)] {
        let (g, _) = build_heisenberg_reiter(d1, d2, None).unwrap();
        let half = (g.dim_v() + g.dim_z()) as f64 / 2.0;
        assert!(WeightSpec::w_s(&g, half + 0.01).is_ok());
        assert!(WeightSpec::w_s(&g, half).is_err());
    }
}

#[test]
fn weight_spec_validates_exponents() {
    assert!(WeightSpec::new(-1.0, 0.0, 1).is_err());
    assert!(WeightSpec::new(1.0, 0.5, 1).is_err());
    assert!(WeightSpec::new(1.0, 0.49, 1).is_ok());
    let (g, _) = h1();
    assert_eq!(WeightSpec::unit().eval(&g, &[3.0, 4.0], &[9.0]), 1.0);
    let w = WeightSpec::new(1.0, 0.25, 1).unwrap();
    // |(z,u)|_δ = 5 + 3
    assert!((w.eval(&g, &[3.0, 4.0], &[-9.0]) - 9.0 * 10f64.powf(0.25)).abs() < 1e-12);
}

/// `‖w⁻¹‖²` on H₁ reduces to `8π/((2α−1)(2α−2)) ∫_0^∞ v(1+v)^{2−2α}(1+v²)^{−2r} dv`.
fn w_inv_h1_reduced(alpha: f64, r: f64) -> f64 {
    let f = |v: f64| v * (1.0 + v).powf(2.0 - 2.0 * alpha) * (1.0 + v * v).powf(-2.0 * r);
    let cut = 1e4;
    let head = adaptive_gk(f, 0.0, cut, 1e-14, 1e-12);
    // beyond the cut, f = v^{-p-1}(1 + (2−2α)/v + O(v^{-2})) with p = 2α + 4r − 4
    let p = 2.0 * alpha + 4.0 * r - 4.0;
    let tail = cut.powf(-p) / p + (2.0 - 2.0 * alpha) * cut.powf(-p - 1.0) / (p + 1.0);
    8.0 * std::f64::consts::PI / ((2.0 * alpha - 1.0) * (2.0 * alpha - 2.0)) * (head + tail)
}

#[test]
fn w_inv_norm_matches_the_one_dimensional_reduction() {
    for (alpha, r) in [(2.0, 0.3), (1.5, 0.4)] {
        let w = WeightSpec::new(alpha, r, 1).unwrap();
        let got = w_inv_l2_norm(2, 1, &w).norm_sq;
        let want = w_inv_h1_reduced(alpha, r);
        assert!((got - want).abs() < 1e-6 * want, "alpha={alpha} r={r}: {got} vs {want}");
    }
    let (g, _) = h1();
    let ws = WeightSpec::w_s(&g, 1.6).unwrap();
    let n = w_inv_l2_norm(2, 1, &ws);
    let want = w_inv_h1_reduced(ws.alpha, ws.r);
    assert!((n.norm_sq - want).abs() < 1e-4 * want, "{} vs {want}", n.norm_sq);
    assert!(n.decay_observed);
    for q in &n.last_ratios {
        assert!((q - n.ratio_limit).abs() < 1e-3);
    }
}

#[test]
fn w_inv_norm_is_infinite_without_decay() {
    let w = WeightSpec::new(1.0, 0.0, 1).unwrap();
    let n = w_inv_l2_norm(2, 1, &w);
    assert!(n.norm_sq.is_infinite());
    assert!(!n.decay_observed);
}

#[test]
fn loglog_slope_recovers_powers() {
    let pts: Vec<(f64, f64)> = (0..5).map(|k| (2f64.powi(-k), 3.0 * 2f64.powi(-k).powf(0.7))).collect();
    assert!((loglog_slope(&pts) - 0.7).abs() < 1e-12);
}

fn small_plan(g: &StratifiedGroup2, dec: &LayerDecomposition, h: &JointMultiplier) -> LatticePlan {
    let mut plan = LatticePlan::for_group(g, dec, h, 16.0, 32.0);
    plan.max_doublings = 0;
    plan
}

#[test]
fn unit_weight_matches_plancherel_and_weights_are_monotone() {
    let (g, dec) = h1();
    let f = Multiplier::gaussian_bump(2.5, 0.2, [1.0, 4.0]).unwrap();
    let h = JointMultiplier::Spectral(f);
    let quad = QuadratureSpec::default();
    let plan = small_plan(&g, &dec, &h);
    let ws: Vec<WeightSpec> = vec![
        WeightSpec::unit(),
        WeightSpec::new(0.5, 0.0, 1).unwrap(),
        WeightSpec::new(1.0, 0.0, 1).unwrap(),
        WeightSpec::new(1.0, 0.3, 1).unwrap(),
    ];
    let fns: Vec<Box<Weight2<'_>>> = ws
        .iter()
        .map(|w| {
            let w = w.clone();
            let g = g.clone();
            Box::new(move |z: &[f64], u: &[f64]| w.eval(&g, z, u).powi(2)) as Box<Weight2<'_>>
        })
        .collect();
    let refs: Vec<&Weight2<'_>> = fns.iter().map(|b| b.as_ref()).collect();
    let sk = sample_kernel(&g, &dec, &h, &plan, &quad, ExecPolicy::Parallel, &refs).unwrap();
    let spec = plancherel_spectral_norm(&g, &dec, &h, &quad).unwrap().norm;
    let plain = sk.integrals[0].value;
    assert!((plain - spec * spec).abs() < 0.04 * spec * spec, "{plain} vs {}", spec * spec);
    for pair in sk.integrals.windows(2) {
        assert!(pair[0].value <= pair[1].value);
    }
    let direct = weighted_l2(&g, &sk.lattice, &sk.grid, &ws[3]).unwrap();
    assert!((direct.value - sk.integrals[3].value).abs() <= 1e-12 * direct.value);
}

#[test]
fn zero_kernel_has_zero_weighted_norm() {
    let (g, dec) = h1();
    let h = JointMultiplier::Spectral(Multiplier::zero());
    let plan = small_plan(&g, &dec, &h);
    let w2 = |_: &[f64], _: &[f64]| 1.0;
    let sk = sample_kernel(&g, &dec, &h, &plan, &QuadratureSpec::default(), ExecPolicy::Sequential, &[&w2]).unwrap();
    assert_eq!(sk.integrals[0].value, 0.0);
}

#[test]
fn narrow_lattice_asks_to_be_widened() {
    let (g, dec) = h1();
    let h = JointMultiplier::Spectral(Multiplier::gaussian_bump(2.5, 0.2, [1.0, 4.0]).unwrap());
    let mut plan = LatticePlan::for_group(&g, &dec, &h, 1.0, 1.0);
    plan.max_doublings = 0;
    let w2 = |_: &[f64], _: &[f64]| 1.0;
    let err = sample_kernel(&g, &dec, &h, &plan, &QuadratureSpec::default(), ExecPolicy::Parallel, &[&w2]).unwrap_err();
    assert!(matches!(err, Error::WidenLattice { .. }), "{err}");
}

#[test]
fn truncation_above_threshold_gives_zero() {
    let (g, dec) = h1();
    let f = Multiplier::gaussian_bump(2.5, 0.2, [1.0, 4.0]).unwrap();
    // threshold is 2·4/1 = 8 on H₁
    let (v, _) = scaling_lhs(
        &g,
        &dec,
        &f,
        0.0,
        8.5,
        &ScalingLattice::default(),
        &QuadratureSpec::default(),
        ExecPolicy::Parallel,
    )
    .unwrap();
    assert_eq!(v, 0.0);
    let err = scaling_experiment(
        &g,
        &dec,
        &f,
        0.0,
        &[8.5, 4.0],
        &ScalingLattice::default(),
        &QuadratureSpec::default(),
        ExecPolicy::Parallel,
    )
    .unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
}

