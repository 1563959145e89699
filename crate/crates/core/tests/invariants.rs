//! Cross-module invariants: stability, symmetry quotient, metric axioms,
//! oracle equivalence, and the dual routes for Rips components.

use pdflow_core::*;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_torus(rng: &mut ChaCha8Rng, max_side: usize) -> GridField {
    let nx = rng.random_range(2..=max_side);
    let ny = rng.random_range(2..=max_side);
    let values = (0..nx * ny).map(|_| rng.random_range(-1.0..1.0)).collect();
    GridField::new(nx, ny, values, Boundary::Torus, None).unwrap()
}

fn random_diagram(rng: &mut ChaCha8Rng, max_pts: usize, essentials: &[usize]) -> DiagramSet {
    let mut pts = Vec::new();
    for (dim, &n_ess) in essentials.iter().enumerate().take(2) {
        for _ in 0..rng.random_range(0..=max_pts) {
            let b = rng.random_range(-2.0..2.0);
            let d = b + rng.random_range(0.01..3.0);
            pts.push(PersistencePoint::new(dim, b, d));
        }
        for _ in 0..n_ess {
            pts.push(PersistencePoint::new(
                dim,
                rng.random_range(-2.0..2.0),
                f64::INFINITY,
            ));
        }
    }
    DiagramSet::new(pts).unwrap()
}

#[test]
fn stability_bound_holds_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for eps in [1e-3, 1e-1, 1.0] {
        for _ in 0..40 {
            let f = random_torus(&mut rng, 12);
            let margin = eps * (1.0 - 1e-9);
            let g_values: Vec<f64> = f
                .values()
                .iter()
                .map(|v| v + rng.random_range(-margin..=margin))
                .collect();
            let g = GridField::new(f.nx(), f.ny(), g_values, Boundary::Torus, None).unwrap();
            let sup = f.sup_norm_diff(&g).unwrap();
            assert!(sup <= eps, "perturbation construction exceeded eps");
            let d = bottleneck(&field_persistence(&f), &field_persistence(&g)).unwrap();
            assert!(d <= sup, "d_B {d} > sup-norm {sup}");
            assert!(d <= eps);
        }
    }
}

#[test]
fn symmetry_quotient_exact_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..25 {
        let nx = rng.random_range(2..=10);
        let ny = *[8usize, 16].choose(&mut rng).unwrap();
        let values = (0..nx * ny).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = GridField::new(nx, ny, values, Boundary::Torus, None).unwrap();
        let base = field_persistence(&f);
        let shift = f.shifted(
            rng.random_range(0..nx as i64),
            rng.random_range(0..ny as i64),
        );
        let rotated = f.rotated_pi();
        let reflected = f.flipped_x().shifted(0, (ny / 8) as i64);
        for (name, g) in [
            ("shift", shift),
            ("rotation", rotated),
            ("reflect+shift", reflected),
        ] {
            let d = bottleneck(&base, &field_persistence(&g)).unwrap();
            assert_eq!(d, 0.0, "{name} moved the diagram");
        }
    }
}

#[test]
fn symmetry_composed_with_noise_within_2eps() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let eps = 0.05;
    for _ in 0..20 {
        let f = random_torus(&mut rng, 10);
        let noisy = |field: &GridField, rng: &mut ChaCha8Rng| {
            let values: Vec<f64> = field
                .values()
                .iter()
                .map(|v| v + rng.random_range(-eps..=eps))
                .collect();
            GridField::new(field.nx(), field.ny(), values, Boundary::Torus, None).unwrap()
        };
        let a = noisy(&f, &mut rng);
        let b = noisy(&f.rotated_pi(), &mut rng);
        let d = bottleneck(&field_persistence(&a), &field_persistence(&b)).unwrap();
        assert!(d <= 2.0 * eps, "{d} > 2 eps");
    }
}

#[test]
fn metric_axioms_on_random_diagrams() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..60 {
        let ess = [rng.random_range(0..2usize), rng.random_range(0..2usize)];
        let a = random_diagram(&mut rng, 4, &ess);
        let b = random_diagram(&mut rng, 4, &ess);
        let c = random_diagram(&mut rng, 4, &ess);
        for metric in [Metric::Bottleneck, Metric::W1, Metric::W2] {
            let dab = metric.distance(&a, &b).unwrap();
            let dba = metric.distance(&b, &a).unwrap();
            let dac = metric.distance(&a, &c).unwrap();
            let dbc = metric.distance(&b, &c).unwrap();
            let daa = metric.distance(&a, &a).unwrap();
            assert!(dab >= 0.0);
            assert_eq!(daa, 0.0, "{metric}: identity failed");
            assert!(
                (dab - dba).abs() <= 1e-9,
                "{metric}: symmetry failed {dab} vs {dba}"
            );
            assert!(
                dac <= dab + dbc + 1e-9,
                "{metric}: triangle failed {dac} > {dab} + {dbc}"
            );
        }
    }
}

#[test]
fn bottleneck_below_wasserstein() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..80 {
        let ess = [rng.random_range(0..2usize), 0];
        let a = random_diagram(&mut rng, 5, &ess);
        let b = random_diagram(&mut rng, 5, &ess);
        let db = bottleneck(&a, &b).unwrap();
        let w1 = wasserstein(&a, &b, 1).unwrap();
        let w2 = wasserstein(&a, &b, 2).unwrap();
        assert!(db <= w1 + 1e-9, "d_B {db} > W1 {w1}");
        assert!(db <= w2 + 1e-9, "d_B {db} > W2 {w2}");
    }
}

#[test]
fn fast_paths_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for trial in 0..120 {
        let ess = [rng.random_range(0..2usize), rng.random_range(0..2usize)];
        let a = random_diagram(&mut rng, 3, &ess);
        let b = random_diagram(&mut rng, 3, &ess);
        let mut expected_b: f64 = 0.0;
        let mut expected_w1 = 0.0;
        let mut expected_w2 = 0.0;
        for dim in 0..=1 {
            let pa: Vec<PersistencePoint> = a.points_in_dim(dim).copied().collect();
            let pb: Vec<PersistencePoint> = b.points_in_dim(dim).copied().collect();
            expected_b =
                expected_b.max(brute_force_matching(&pa, &pb, MatchCost::Bottleneck)
                    .unwrap()
                    .cost);
            expected_w1 += brute_force_matching(&pa, &pb, MatchCost::SumPower(1))
                .unwrap()
                .cost;
            expected_w2 += brute_force_matching(&pa, &pb, MatchCost::SumPower(2))
                .unwrap()
                .cost;
        }
        let db = bottleneck(&a, &b).unwrap();
        let w1 = wasserstein(&a, &b, 1).unwrap();
        let w2 = wasserstein(&a, &b, 2).unwrap();
        assert!((db - expected_b).abs() <= 1e-9, "trial {trial}: bottleneck");
        assert!((w1 - expected_w1).abs() <= 1e-9, "trial {trial}: W1");
        assert!(
            (w2 - expected_w2.sqrt()).abs() <= 1e-9,
            "trial {trial}: W2"
        );
    }
}

/// Rips components via the boundary-matrix route must match single-linkage
/// union-find merges at half-distance, the independent route.
#[test]
fn rips_pd0_matches_single_linkage() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..25 {
        let n = rng.random_range(3..25usize);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)))
            .collect();
        let dm = DistanceMatrix::from_fn(n, "euclidean", |i, j| {
            (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)
        })
        .unwrap();

        // independent single-linkage: Kruskal over edges sorted by distance
        let mut edges: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((dm.get(i, j), i, j));
            }
        }
        edges.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut merge_scales = Vec::new();
        for (d, i, j) in edges {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
                if d > 0.0 {
                    merge_scales.push(d / 2.0);
                }
            }
        }

        let ds = rips_persistence(&dm).unwrap();
        let mut deaths: Vec<f64> = ds
            .points_in_dim(0)
            .filter(|p| !p.is_essential())
            .map(|p| p.death)
            .collect();
        deaths.sort_by(|a, b| a.partial_cmp(b).unwrap());
        merge_scales.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(deaths, merge_scales);
        assert_eq!(ds.essential_counts(), [1, 0, 0]);
        assert!(ds.points_in_dim(0).all(|p| p.birth == 0.0));
    }
}

/// Rips diagrams must reproduce the Betti numbers of every flag complex in
/// the filtration, computed here by brute force (DFS components and dense
/// GF(2) elimination) on small clouds.
#[test]
fn rips_rank_function_matches_flag_complex_betti() {
    fn boolean_rank(mut m: Vec<Vec<bool>>) -> usize {
        let mut rank = 0;
        let cols = m.first().map_or(0, Vec::len);
        let mut row = 0;
        for c in 0..cols {
            if let Some(p) = (row..m.len()).find(|&r| m[r][c]) {
                m.swap(row, p);
                for r in 0..m.len() {
                    if r != row && m[r][c] {
                        let pivot_row = m[row].clone();
                        for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                            *x ^= p;
                        }
                    }
                }
                row += 1;
                rank += 1;
            }
        }
        rank
    }

    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..20 {
        let n = rng.random_range(3..8usize);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)))
            .collect();
        let dm = DistanceMatrix::from_fn(n, "euclidean", |i, j| {
            (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)
        })
        .unwrap();
        let ds = rips_persistence(&dm).unwrap();

        let mut scales: Vec<f64> = dm.pairwise().map(|d| d / 2.0).collect();
        scales.push(0.0);
        scales.sort_by(|a, b| a.partial_cmp(b).unwrap());
        scales.dedup();
        for &theta in &scales {
            // flag complex at this scale
            let edge_in = |i: usize, j: usize| dm.get(i, j) / 2.0 <= theta;
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if edge_in(i, j) {
                        edges.push((i, j));
                    }
                }
            }
            let mut triangles = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        if edge_in(i, j) && edge_in(i, k) && edge_in(j, k) {
                            triangles.push((i, j, k));
                        }
                    }
                }
            }
            // beta_0 by DFS
            let mut adj = vec![Vec::new(); n];
            for &(i, j) in &edges {
                adj[i].push(j);
                adj[j].push(i);
            }
            let mut seen = vec![false; n];
            let mut beta0 = 0;
            for s in 0..n {
                if seen[s] {
                    continue;
                }
                beta0 += 1;
                let mut stack = vec![s];
                while let Some(v) = stack.pop() {
                    if std::mem::replace(&mut seen[v], true) {
                        continue;
                    }
                    stack.extend(adj[v].iter().copied());
                }
            }
            // beta_1 = E - rank d1 - rank d2 over GF(2)
            let edge_index: std::collections::HashMap<(usize, usize), usize> = edges
                .iter()
                .copied()
                .enumerate()
                .map(|(e, ij)| (ij, e))
                .collect();
            let d1: Vec<Vec<bool>> = edges
                .iter()
                .map(|&(i, j)| {
                    let mut row = vec![false; n];
                    row[i] = true;
                    row[j] = true;
                    row
                })
                .collect();
            let d2: Vec<Vec<bool>> = triangles
                .iter()
                .map(|&(i, j, k)| {
                    let mut row = vec![false; edges.len()];
                    row[edge_index[&(i, j)]] = true;
                    row[edge_index[&(i, k)]] = true;
                    row[edge_index[&(j, k)]] = true;
                    row
                })
                .collect();
            let rank1 = boolean_rank(d1);
            let rank2 = boolean_rank(d2);
            let beta1 = edges.len() - rank1 - rank2;

            let betti = ds.betti_at(theta);
            assert_eq!(betti[0], beta0, "beta_0 at {theta}");
            assert_eq!(betti[1], beta1, "beta_1 at {theta}");
        }
    }
}

#[test]
fn subsample_theorem_quick() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for _ in 0..15 {
        let n = rng.random_range(15..50usize);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)))
            .collect();
        let dm = DistanceMatrix::from_fn(n, "euclidean", |i, j| {
            (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)
        })
        .unwrap();
        let mut dists: Vec<f64> = dm.pairwise().collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let delta = dists[dists.len() / 2];
        let sub = subsample(&dm, delta).unwrap();
        let sub_dm = DistanceMatrix::from_fn(sub.kept.len(), "euclidean", |a, b| {
            dm.get(sub.kept[a], sub.kept[b])
        })
        .unwrap();
        let full = rips_persistence(&dm).unwrap();
        let small = rips_persistence(&sub_dm).unwrap();
        let d = bottleneck(&full, &small).unwrap();
        assert!(d < delta, "d_B {d} >= delta {delta}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantize_monotone_and_idempotent(
        values in proptest::collection::vec(-1000.0f64..1000.0, 4..40),
        levels in 2u32..512,
    ) {
        prop_assume!(values.iter().any(|&v| v != values[0]));
        let n = values.len();
        let f = GridField::new(n, 1, values.clone(), Boundary::Bounded, None).unwrap();
        let q = f.quantize(levels).unwrap();
        for a in 0..n {
            for b in 0..n {
                if values[a] <= values[b] {
                    prop_assert!(q.values()[a] <= q.values()[b]);
                }
            }
        }
        for &v in q.values() {
            prop_assert!(v.fract() == 0.0 && v >= 0.0 && v <= (levels - 1) as f64);
        }
        let qq = q.quantize(levels).unwrap();
        prop_assert_eq!(q.values(), qq.values());
    }

    #[test]
    fn sup_norm_is_a_metric(
        a in proptest::collection::vec(-50.0f64..50.0, 6),
        b in proptest::collection::vec(-50.0f64..50.0, 6),
        c in proptest::collection::vec(-50.0f64..50.0, 6),
    ) {
        let mk = |v: Vec<f64>| GridField::new(3, 2, v, Boundary::Bounded, None).unwrap();
        let (fa, fb, fc) = (mk(a), mk(b), mk(c));
        let dab = fa.sup_norm_diff(&fb).unwrap();
        let dba = fb.sup_norm_diff(&fa).unwrap();
        let dac = fa.sup_norm_diff(&fc).unwrap();
        let dbc = fb.sup_norm_diff(&fc).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(fa.sup_norm_diff(&fa).unwrap(), 0.0);
        prop_assert!(dac <= dab + dbc + 1e-12);
    }
}
