use itertools::Itertools;
use proptest::prelude::*;

use rigidity::falsifier::{random_configuration, DEFAULT_FALSIFIER_TOL, FalsifyError};
use rigidity::gale::{configuration_from_gale, gale_from_representation, stress_from_gale};
use rigidity::graph::{brute_force_connectivity, min_separator, random_gnp};
use rigidity::numeric::{
    max_abs, maximal_submatrix_regularity, null_space_basis, numeric_rank, random_orthogonal,
    symmetric_eigen_bounds,
};
use rigidity::ortho::{build_orthogonal_representation, DEFAULT_MAX_RETRIES};
use rigidity::{
    construct_universally_rigid_framework, equivalence_and_congruence, generate,
    reflection_counterexample, verify_certificate, vertex_connectivity, ConstructOptions, Family,
    Graph, Matrix, RegularityMode, ToleranceProfile,
};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs = (0..n).tuple_combinations::<(usize, usize)>();
            let edges = pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e);
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-10.0f64..10.0, r * c)
            .prop_map(move |data| Matrix::from_row_slice(r, c, &data))
    })
}

fn det_abs(m: &Matrix) -> f64 {
    m.clone().lu().determinant().abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn connectivity_matches_brute_force(g in graph_strategy(8)) {
        prop_assert_eq!(vertex_connectivity(&g).unwrap(), brute_force_connectivity(&g).unwrap());
    }

    #[test]
    fn min_separator_disconnects(g in graph_strategy(8)) {
        prop_assume!(!g.is_complete());
        let kappa = vertex_connectivity(&g).unwrap();
        let sep = min_separator(&g).unwrap();
        prop_assert_eq!(sep.nodes.len(), kappa);
        prop_assert!(!sep.part_one.is_empty() && !sep.part_two.is_empty());
        let mut all: Vec<usize> = sep.nodes.iter().chain(&sep.part_one).chain(&sep.part_two).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..g.node_count()).collect::<Vec<_>>());
        for &a in &sep.part_one {
            for &b in &sep.part_two {
                prop_assert!(!g.has_edge(a, b));
            }
        }
    }

    #[test]
    fn rank_is_invariant_under_permutation_and_rotation(m in matrix_strategy(7, 7), seed in any::<u64>()) {
        let tol = ToleranceProfile::default();
        let rank = numeric_rank(&m, &tol);
        let mut permuted = m.clone();
        permuted.swap_rows(0, m.nrows() - 1);
        let q = random_orthogonal(m.ncols(), seed);
        prop_assert_eq!(numeric_rank(&permuted, &tol), rank);
        prop_assert_eq!(numeric_rank(&(&m * q), &tol), rank);
        let low = Matrix::from_fn(m.nrows(), m.ncols() + 1, |i, j| if j < m.ncols() { m[(i, j)] } else { m[(i, 0)] - m[(i, m.ncols() - 1)] });
        prop_assert_eq!(numeric_rank(&low, &tol), rank);
    }

    #[test]
    fn eigen_bounds_of_rotated_diagonal(d in proptest::collection::vec(-5.0f64..5.0, 1..8), seed in any::<u64>()) {
        let q = random_orthogonal(d.len(), seed);
        let m = &q * Matrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())) * q.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let (lo, hi) = symmetric_eigen_bounds(&m).unwrap();
        let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
        let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((lo - dmin).abs() < 1e-9 && (hi - dmax).abs() < 1e-9);
    }

    #[test]
    fn null_space_is_orthonormal_and_complementary(m in matrix_strategy(6, 8)) {
        let tol = ToleranceProfile::default();
        let basis = null_space_basis(&m, &tol);
        prop_assert_eq!(basis.nrows(), m.ncols());
        prop_assert_eq!(basis.ncols() + numeric_rank(&m, &tol), m.ncols());
        if basis.ncols() > 0 {
            let gram = basis.transpose() * &basis;
            prop_assert!(max_abs(&(gram - Matrix::identity(basis.ncols(), basis.ncols()))) < 1e-10);
            prop_assert!(max_abs(&(&m * &basis)) <= 1e-9 * max_abs(&m).max(1.0) * m.ncols() as f64);
        }
    }

    #[test]
    fn regularity_agrees_with_determinants(n in 2usize..8, k in 1usize..5, seed in any::<u64>(), dup in any::<bool>()) {
        prop_assume!(k <= n);
        let tol = ToleranceProfile::default();
        let mut m = random_configuration(n, k, seed).p;
        if dup {
            m.row_mut(n - 1).fill(0.0);
        }
        let report = maximal_submatrix_regularity(&m, RegularityMode::Exhaustive, &tol).unwrap();
        let scale = max_abs(&m).powi(k as i32);
        let min_det = (0..n)
            .combinations(k)
            .map(|rows| det_abs(&m.select_rows(rows.iter())))
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(report.subsets_tested as u128, rigidity::numeric::binomial(n, k));
        if dup {
            prop_assert!(!report.pass);
            prop_assert!(min_det <= 1e-12 * scale);
        } else if report.pass {
            prop_assert!(min_det > 0.0);
        }
    }
}

#[test]
fn circulant_representations_rarely_need_retries() {
    let tol = ToleranceProfile::default();
    let mut first_try = 0;
    let mut runs = 0;
    for n in 6..=10 {
        for k in 1..=2 {
            let g = generate(Family::Circulant, &[n, k]).unwrap();
            for seed in 0..10 {
                runs += 1;
                let rep = build_orthogonal_representation(&g, 2 * k - 1, seed, DEFAULT_MAX_RETRIES, &tol)
                    .unwrap();
                if rep.retries_used == 0 {
                    first_try += 1;
                }
            }
        }
    }
    assert_eq!(runs, 100);
    assert!(first_try >= 95, "{first_try}/100 on first attempt");
}

#[test]
fn gale_pairs_have_complementary_rank_and_matching_independence() {
    let tol = ToleranceProfile::default();
    let cases = [
        (generate(Family::CompleteBipartite, &[3, 3]).unwrap(), 2),
        (generate(Family::Circulant, &[8, 2]).unwrap(), 3),
        (generate(Family::Cycle, &[6]).unwrap(), 1),
    ];
    for (g, r) in cases {
        let n = g.node_count();
        let cert = construct_universally_rigid_framework(&g, r, 3, &ConstructOptions::default())
            .unwrap()
            .certificate;
        assert_eq!(numeric_rank(&cert.z, &tol), n - r - 1);
        let mut homogeneous = Matrix::from_element(n, r + 1, 1.0);
        homogeneous.columns_mut(0, r).copy_from(&cert.p);
        assert_eq!(numeric_rank(&homogeneous, &tol), r + 1);

        // For a Gale pair, |det [P e]_I| / |det Z_J| is the same for every
        // (r+1)-subset I with complement J, so one side is singular exactly
        // when the other is.
        let ratios: Vec<f64> = (0..n)
            .combinations(r + 1)
            .map(|subset| {
                let rest: Vec<usize> = (0..n).filter(|i| !subset.contains(i)).collect();
                det_abs(&homogeneous.select_rows(subset.iter()))
                    / det_abs(&cert.z.select_rows(rest.iter()))
            })
            .collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        assert!(lo.is_finite() && lo > 0.0);
        assert!((hi - lo) <= 1e-6 * hi, "ratios spread from {lo} to {hi}");
    }
}

#[test]
fn rotating_the_gale_matrix_keeps_the_certificate() {
    let tol = ToleranceProfile::default();
    let g = generate(Family::Circulant, &[9, 2]).unwrap();
    let cert = construct_universally_rigid_framework(&g, 3, 5, &ConstructOptions::default())
        .unwrap()
        .certificate;
    let q = random_orthogonal(cert.z.ncols(), 99);
    let x = &cert.x * &q;
    let gd = gale_from_representation(&x, &cert.xi, &tol).unwrap();
    let omega = stress_from_gale(&gd);
    assert!(max_abs(&(&omega - &cert.omega)) <= 1e-12 * max_abs(&cert.omega));
    let mut rotated = cert.clone();
    rotated.x = x;
    rotated.z = gd.z.clone();
    rotated.p = configuration_from_gale(&gd, &tol).unwrap().p;
    rotated.omega = omega;
    assert!(verify_certificate(&rotated, RegularityMode::Exhaustive).unwrap().pass);
}

#[test]
fn falsifier_is_sound_on_random_graphs() {
    let mut low = 0;
    let mut high = 0;
    let mut seed = 0u64;
    while low < 50 || high < 50 {
        seed += 1;
        let r = 1 + (seed % 2) as usize;
        let n = 5 + (seed % 5) as usize;
        let g = random_gnp(n, 0.3 + 0.5 * ((seed * 13 % 10) as f64 / 10.0), seed);
        if g.is_complete() {
            continue;
        }
        let kappa = vertex_connectivity(&g).unwrap();
        let p = random_configuration(n, r, seed);
        let outcome = reflection_counterexample(&g, &p, r, DEFAULT_FALSIFIER_TOL);
        if kappa == r && low < 50 {
            low += 1;
            let w = outcome.unwrap();
            assert!(w.max_edge_length_error <= 1e-9);
            assert!(w.congruence_gap >= 1e-6);
            assert_eq!(equivalence_and_congruence(&g, &p, &w.p_prime, 1e-9).unwrap(), (true, false));
        } else if kappa > r && high < 50 {
            high += 1;
            assert!(matches!(outcome, Err(FalsifyError::Connected { .. })), "{outcome:?}");
        }
    }
}
