use super::io::{group_to_json, parse_group};
use super::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn h1() -> (StratifiedGroup2, LayerDecomposition) {
    build_heisenberg_reiter(1, 1, None).unwrap()
}

/// Quaternionic H-type algebra: v = ℍ, z = Im ℍ, J_{e_m} = left
/// multiplication by i, j, k.
fn quaternion_h_type() -> StratifiedGroup2 {
    // columns are images of 1, i, j, k
    let li = [[0., -1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., -1.], [0., 0., 1., 0.]];
    let lj = [[0., 0., -1., 0.], [0., 0., 0., 1.], [1., 0., 0., 0.], [0., -1., 0., 0.]];
    let lk = [[0., 0., 0., -1.], [0., 0., -1., 0.], [0., 1., 0., 0.], [1., 0., 0., 0.]];
    let mut triples = Vec::new();
    for (m, l) in [li, lj, lk].iter().enumerate() {
        for a in 0..4 {
            for b in a + 1..4 {
                // η([e_a, e_b]) = ⟨J e_a, e_b⟩ = (J)_{b a}
                if l[b][a] != 0.0 {
                    triples.push((a, b, m, l[b][a]));
                }
            }
        }
    }
    StratifiedGroup2::from_triples("Htype-quaternion", 4, 3, &triples, DMatrix::identity(4, 4)).unwrap()
}

fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
    let v = random_sphere(n * n, 1, seed).remove(0);
    let a = DMatrix::from_row_slice(n, n, &v);
    &a * a.transpose() + DMatrix::identity(n, n) * 0.5
}

#[test]
fn heisenberg_dimensions() {
    let (g, _) = h1();
    assert_eq!(g.dimensions(), (3, 4));
    for (d1, d2) in [(1, 2), (2, 1), (2, 3), (3, 2)] {
        let (g, dec) = build_heisenberg_reiter(d1, d2, None).unwrap();
        assert_eq!(g.dimensions(), (d1 * d2 + d1 + d2, d1 * d2 + d1 + 2 * d2));
        assert_eq!(dec.tdone(), if d2 > 1 { d1 } else { 0 });
    }
    let (g, _) = build_n32();
    assert_eq!(g.dimensions(), (6, 9));
}

#[test]
fn h1_bracket_matches_matrix_model() {
    // upper-triangular 3x3 model: X = E12, Y = E23, [X, Y] = E13 ↔ U
    let e = |i: usize, j: usize| {
        let mut m = DMatrix::<f64>::zeros(3, 3);
        m[(i, j)] = 1.0;
        m
    };
    let (x, y) = (e(0, 1), e(1, 2));
    let comm = &x * &y - &y * &x;
    let (g, _) = h1();
    assert_eq!(g.bracket(&[1.0, 0.0], &[0.0, 1.0]), vec![comm[(0, 2)]]);
    assert_eq!(g.bracket(&[0.0, 1.0], &[1.0, 0.0]), vec![-comm[(0, 2)]]);
}

#[test]
fn h1_j_map_is_rotation() {
    let (g, _) = h1();
    let j = g.j_map(&[1.0]);
    assert_eq!(j, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    // ⟨J(x,y),(x',y')⟩ = x y' − x' y on basis pairs
    let basis = [[1.0, 0.0], [0.0, 1.0]];
    for p in &basis {
        for q in &basis {
            let jp = &j * nalgebra::DVector::from_column_slice(p);
            let lhs = jp[0] * q[0] + jp[1] * q[1];
            assert_eq!(lhs, p[0] * q[1] - q[0] * p[1]);
        }
    }
    assert_eq!(g.j_map(&[0.0]), DMatrix::zeros(2, 2));
}

#[test]
fn n32_j_map_and_b() {
    let (g, dec) = build_n32();
    for eta in random_sphere(3, 100, 11) {
        let eta: Vec<f64> = eta.iter().map(|x| 2.5 * x).collect();
        let j = g.j_map(&eta);
        // ⟨J x, y⟩ = η([x,y]) reproduces the skew matrix of η-coefficients, negated
        let c = DMatrix::from_row_slice(
            3,
            3,
            &[0.0, eta[0], eta[1], -eta[0], 0.0, eta[2], -eta[1], -eta[2], 0.0],
        );
        assert!((&j + &c).norm() < 1e-14);
        assert_eq!(crate::linalg::rank(&j, 1e-10), 2);
        let (lam, _) = crate::linalg::sym_eigen_desc(&(-(&j * &j)));
        let n2: f64 = eta.iter().map(|x| x * x).sum();
        assert!((lam[0] - n2).abs() < 1e-12 && (lam[1] - n2).abs() < 1e-12 && lam[2].abs() < 1e-12);
        let sd = spectral_data(&g, &dec, &eta, 1e-10).unwrap();
        assert!((sd.b[0] - n2.sqrt()).abs() < 1e-12);
    }
    assert!(spectral_data(&g, &dec, &[0.0, 0.0, 0.0], 1e-10).is_err());
}

#[test]
fn spectral_data_examples() {
    let (g, dec) = h1();
    let sd = spectral_data(&g, &dec, &[2.0], 1e-10).unwrap();
    assert!((sd.b[0] - 2.0).abs() < 1e-14);
    assert!((&sd.p_eta[0] - DMatrix::identity(2, 2)).norm() < 1e-14);
    assert!(sd.p_bar[0].norm() < 1e-14);

    let (g, dec) = build_n32();
    let sd = spectral_data(&g, &dec, &[3.0, 0.0, 0.0], 1e-10).unwrap();
    assert!((sd.b[0] - 3.0).abs() < 1e-14);
    let want = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    assert!((&sd.p_eta[0] - &want).norm() < 1e-13);
    let want_bar = DMatrix::identity(3, 3) - want;
    assert!((&sd.p_bar[0] - &want_bar).norm() < 1e-13);
}

#[test]
fn spectral_data_rejects_violations() {
    let (a, da) = h1();
    let g = direct_product(&a, &a);
    let dec = juxtapose(&g, &da, &da, 2).unwrap();
    match spectral_data(&g, &dec, &[1.0, 0.0], 1e-10) {
        Err(Error::AssumptionViolated { block, spread, .. }) => {
            assert_eq!(block, 1);
            assert!(spread > 0.5);
        }
        other => panic!("expected violation, got {other:?}"),
    }
    assert!(spectral_data(&g, &dec, &[1.0, 1.0], 1e-10).is_ok());
}

#[test]
fn assumption_matrix() {
    let policy = ExecPolicy::default();
    let mut cases: Vec<(StratifiedGroup2, LayerDecomposition)> = vec![
        h1(),
        build_heisenberg_reiter(1, 2, None).unwrap(),
        build_heisenberg_reiter(2, 3, None).unwrap(),
        build_n32(),
    ];
    let (n, _) = build_n32();
    let (nc, dnc) = complexify(&n);
    let dnc = dnc.expect("N32 has rank-2 J");
    assert_eq!(dnc.ranks(), &[2]);
    cases.push((nc, dnc));
    let (a, da) = h1();
    cases.push(glue_centers(&a, &da, &a, &da, &DMatrix::identity(1, 1)).unwrap());
    let (h13, d13) = build_heisenberg_reiter(1, 3, None).unwrap();
    let (n32, d32) = build_n32();
    cases.push(glue_centers(&h13, &d13, &n32, &d32, &DMatrix::identity(3, 3)).unwrap());
    let q = quaternion_h_type();
    let dq = LayerDecomposition::new(&q, vec![vec![0, 1, 2, 3]], vec![2]).unwrap();
    cases.push((q, dq));
    for (g, dec) in &cases {
        let rep = check_assumption_a(g, dec, 200, 1e-10, 1, policy);
        assert!(rep.holds, "{}: {:?}", g.label(), rep);
        assert!(rep.max_residual <= 1e-10);
    }

    let prod = direct_product(&a, &a);
    let dprod = juxtapose(&prod, &da, &da, 2).unwrap();
    let rep = check_assumption_a(&prod, &dprod, 200, 1e-10, 1, policy);
    assert!(!rep.holds);
    let w = rep.failure_witness.unwrap();
    assert_eq!(w.iter().filter(|x| **x != 0.0).count(), 1, "witness {w:?} is an axis");
}

#[test]
fn glued_h1_h1_shape() {
    let (a, da) = h1();
    let (g, dec) = glue_centers(&a, &da, &a, &da, &DMatrix::identity(1, 1)).unwrap();
    assert_eq!((g.dim_v(), g.dim_z()), (4, 1));
    assert_eq!(dec.ranks(), &[1, 1]);
    // J_η is block diagonal with two rank-2 blocks
    let j = g.j_map(&[1.0]);
    assert!(j.view((0, 2), (2, 2)).norm() == 0.0 && j.view((2, 0), (2, 2)).norm() == 0.0);
    assert_eq!(crate::linalg::rank(&j, 1e-10), 4);
}

#[test]
fn glue_rejects_bad_input() {
    let (a, da) = h1();
    let (n, dn) = build_n32();
    assert!(glue_centers(&a, &da, &n, &dn, &DMatrix::identity(3, 3)).is_err());
    let (h13, d13) = build_heisenberg_reiter(1, 3, None).unwrap();
    let mut phi = DMatrix::identity(3, 3);
    phi[(2, 2)] = 0.0;
    assert!(glue_centers(&h13, &d13, &n, &dn, &phi).is_err());
}

#[test]
fn complexification_doubles_and_duplicates() {
    let (n, _) = build_n32();
    let (nc, _) = complexify(&n);
    assert_eq!(nc.dim_v(), 6);
    assert_eq!(nc.dim_z(), 6);
    let eta_r = [0.3, -1.1, 0.4];
    let mut eta = eta_r.to_vec();
    eta.extend([0.0; 3]);
    let jt = nc.j_map(&eta);
    let jr = n.j_map(&eta_r);
    // J̃ = J_{η_R} × (−J_{η_R})
    assert!((jt.view((0, 0), (3, 3)) - &jr).norm() < 1e-14);
    assert!((jt.view((3, 3), (3, 3)) + &jr).norm() < 1e-14);
    let (lt, _) = crate::linalg::sym_eigen_desc(&(-(&jt * &jt)));
    let (lr, _) = crate::linalg::sym_eigen_desc(&(-(&jr * &jr)));
    for i in 0..3 {
        assert!((lt[2 * i] - lr[i]).abs() < 1e-12 && (lt[2 * i + 1] - lr[i]).abs() < 1e-12);
    }
}

#[test]
fn direct_product_rank_jumps() {
    let (a, _) = h1();
    let g = direct_product(&a, &a);
    assert_eq!(crate::linalg::rank(&g.j_map(&[1.0, 0.0]), 1e-10), 2);
    let k = g.j_map(&[1.0, 0.0]);
    assert!(k.view((2, 2), (2, 2)).norm() == 0.0, "kernel is the second factor");
    assert_eq!(crate::linalg::rank(&g.j_map(&[1.0, 1.0]), 1e-10), 4);
    let ranks = sampled_j_ranks(&g, 100, 3);
    assert!(ranks.iter().all(|&r| r == 4));
    let (d, q) = a.dimensions();
    assert_eq!(g.dimensions(), (2 * d, 2 * q));
}

#[test]
fn homogeneous_norm_examples() {
    let (g, _) = h1();
    assert_eq!(g.homogeneous_norm(&[0.0, 0.0], &[0.0]), 0.0);
    assert!((g.homogeneous_norm(&[3.0, 4.0], &[25.0]) - 10.0).abs() < 1e-14);
}

#[test]
fn rank2_promotion_on_examples() {
    for (g, _) in [build_n32(), build_heisenberg_reiter(1, 2, None).unwrap(), h1()] {
        let dec = promote_rank2(&g).expect("rank-2 group");
        let rep = check_assumption_a(&g, &dec, 50, 1e-10, 9, ExecPolicy::Sequential);
        assert!(rep.holds);
    }
    let (h21, _) = build_heisenberg_reiter(2, 1, None).unwrap();
    assert!(promote_rank2(&h21).is_none());
}

#[test]
fn json_round_trip_and_validation() {
    let (h13, d13) = build_heisenberg_reiter(1, 3, None).unwrap();
    let (n, dn) = build_n32();
    let (g, dec) = glue_centers(&h13, &d13, &n, &dn, &DMatrix::identity(3, 3)).unwrap();
    let s = group_to_json(&g, Some(&dec));
    let (g2, dec2) = parse_group(&s).unwrap();
    assert_eq!(group_to_json(&g2, dec2.as_ref()), s);

    let bad = r#"{"label":"x","dim_v":2,"dim_z":1,"bracket":[[0,1,0,1.0],[1,0,0,1.0]],"gram":"identity"}"#;
    let err = parse_group(bad).unwrap_err().to_string();
    assert!(err.contains("antisymmetric"), "{err}");
    let diag = r#"{"label":"x","dim_v":2,"dim_z":1,"bracket":[[0,1,0,1.0],[1,1,0,2.0]],"gram":"identity"}"#;
    assert!(parse_group(diag).unwrap_err().to_string().contains("antisymmetric"));
    let not_strat = r#"{"label":"x","dim_v":2,"dim_z":2,"bracket":[[0,1,0,1.0]],"gram":"identity"}"#;
    assert!(parse_group(not_strat).is_err());
}

#[test]
fn metric_blocks_validated() {
    let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(build_heisenberg_reiter(1, 1, Some(&[bad])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn j_is_gram_skew_and_linear(seed in 0u64..10_000, d1 in 1usize..3, d2 in 1usize..4) {
        let metric: Vec<DMatrix<f64>> = (0..d1).map(|j| random_spd(d2 + 1, seed * 7 + j as u64)).collect();
        let (g, dec) = build_heisenberg_reiter(d1, d2, Some(&metric)).unwrap();
        let etas = random_sphere(d2, 2, seed);
        let (e1, e2) = (&etas[0], &etas[1]);
        let j1 = g.j_map(e1);
        let gj = g.gram() * &j1;
        prop_assert!((&gj + gj.transpose()).norm() <= 1e-12 * (1.0 + gj.norm()));
        // −J² is gram-selfadjoint, PSD, of even rank 2|r|
        let a = -(g.j_orth(e1) * g.j_orth(e1));
        prop_assert!((&a - a.transpose()).norm() <= 1e-12 * (1.0 + a.norm()));
        let (lam, _) = crate::linalg::sym_eigen_desc(&a);
        prop_assert!(lam.iter().all(|&l| l >= -1e-10 * lam[0]));
        let rk = crate::linalg::rank(&g.j_orth(e1), RANK_THRESHOLD);
        prop_assert_eq!(rk, 2 * dec.total_rank());
        let sum: Vec<f64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
        prop_assert!((g.j_map(&sum) - (j1.clone() + g.j_map(e2))).norm() <= 1e-12 * (1.0 + j1.norm()));
        let scaled: Vec<f64> = e1.iter().map(|x| 3.7 * x).collect();
        prop_assert!((g.j_map(&scaled) - j1 * 3.7).norm() <= 1e-11);
        let rep = check_assumption_a(&g, &dec, 10, 1e-9, seed, ExecPolicy::Sequential);
        prop_assert!(rep.holds, "{:?}", rep);
    }

    #[test]
    fn spectral_data_homogeneity(seed in 0u64..10_000, lambda in 0.05f64..20.0) {
        let (g, dec) = build_heisenberg_reiter(2, 3, None).unwrap();
        let eta = random_sphere(3, 1, seed).remove(0);
        let s1 = spectral_data(&g, &dec, &eta, 1e-10).unwrap();
        let scaled: Vec<f64> = eta.iter().map(|x| lambda * x).collect();
        let s2 = spectral_data(&g, &dec, &scaled, 1e-10).unwrap();
        for j in 0..dec.len() {
            prop_assert!((s2.b[j] - lambda * s1.b[j]).abs() <= 1e-12 * lambda.max(1.0));
            prop_assert!((&s2.p_eta[j] - &s1.p_eta[j]).norm() <= 1e-10);
            // J² P_j = −b² P_j^η
            let jo = g.j_orth(&eta);
            let p = &dec.projections()[j];
            let lhs = &jo * &jo * p;
            let rhs = &s1.p_eta[j] * (-(s1.b[j] * s1.b[j]));
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }
    }
}
