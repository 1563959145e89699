//! Exact bottleneck and degree-p Wasserstein distances between diagram sets.
//!
//! Points are compared in the L-infinity norm. Finite points may match the
//! diagonal; essential (infinite-death) points match only essential points of
//! the same dimension, by birth. A mismatch in essential counts means the
//! diagrams come from different domains, so it is reported as an error
//! rather than a large number.

use std::str::FromStr;

use crate::diagram::{DiagramSet, PersistencePoint};
use crate::error::MetricError;

/// The three metrics used throughout the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Bottleneck,
    W1,
    W2,
}

impl Metric {
    pub fn distance(self, a: &DiagramSet, b: &DiagramSet) -> Result<f64, MetricError> {
        match self {
            Metric::Bottleneck => bottleneck(a, b),
            Metric::W1 => wasserstein(a, b, 1),
            Metric::W2 => wasserstein(a, b, 2),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Bottleneck => "bottleneck",
            Metric::W1 => "w1",
            Metric::W2 => "w2",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bottleneck" => Ok(Metric::Bottleneck),
            "w1" => Ok(Metric::W1),
            "w2" => Ok(Metric::W2),
            other => Err(format!(
                "unknown metric `{other}` (expected bottleneck, w1, or w2)"
            )),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// L-infinity distance from a finite point to its nearest diagonal point,
/// `(death - birth) / 2`.
pub fn diagonal_distance(p: &PersistencePoint) -> Result<f64, MetricError> {
    if p.is_essential() {
        return Err(MetricError::InfiniteDeath);
    }
    Ok((p.death - p.birth) / 2.0)
}

/// An optimal pairing for one homology dimension. Indices refer to the
/// diagrams' per-dimension point lists in sorted order.
#[derive(Debug, Clone)]
pub struct Matching {
    pub dim: usize,
    pub pairs: Vec<(usize, usize)>,
    pub diagonal_a: Vec<usize>,
    pub diagonal_b: Vec<usize>,
    /// Max displacement for the bottleneck cost; sum of p-th powers of
    /// displacements for Wasserstein costs.
    pub cost: f64,
}

/// Cost regime for `brute_force_matching`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchCost {
    /// Minimize the maximum displacement.
    Bottleneck,
    /// Minimize the sum of displacements raised to this power.
    SumPower(u32),
}

#[inline]
fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Per-dimension view of a diagram: finite points and essential births, with
/// their indices in the sorted per-dimension list.
struct DimView {
    finite: Vec<(usize, (f64, f64))>,
    essential: Vec<(usize, f64)>,
}

fn dim_view(ds: &DiagramSet, dim: usize) -> DimView {
    let mut finite = Vec::new();
    let mut essential = Vec::new();
    for (idx, p) in ds.points_in_dim(dim).enumerate() {
        if p.is_essential() {
            essential.push((idx, p.birth));
        } else {
            finite.push((idx, (p.birth, p.death)));
        }
    }
    DimView { finite, essential }
}

fn check_essentials(
    dim: usize,
    a: &DimView,
    b: &DimView,
) -> Result<(), MetricError> {
    if a.essential.len() != b.essential.len() {
        return Err(MetricError::EssentialMismatch {
            dim,
            left: a.essential.len(),
            right: b.essential.len(),
        });
    }
    Ok(())
}

/// Essential points pair by birth; the sorted order is optimal both for the
/// max and for any convex sum of displacements.
fn essential_sorted(a: &DimView, b: &DimView) -> Vec<((usize, f64), (usize, f64))> {
    let mut ea = a.essential.clone();
    let mut eb = b.essential.clone();
    ea.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
    eb.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
    ea.into_iter().zip(eb).collect()
}

/// Maximum bipartite matching by augmenting paths.
/// `adj[l]` lists right-neighbors of left node `l`.
fn max_matching(adj: &[Vec<usize>], n_right: usize) -> (usize, Vec<usize>, Vec<usize>) {
    const FREE: usize = usize::MAX;
    let n_left = adj.len();
    let mut match_l = vec![FREE; n_left];
    let mut match_r = vec![FREE; n_right];
    let mut visited = vec![false; n_right];

    fn try_augment(
        l: usize,
        adj: &[Vec<usize>],
        visited: &mut [bool],
        match_l: &mut [usize],
        match_r: &mut [usize],
    ) -> bool {
        for &r in &adj[l] {
            if visited[r] {
                continue;
            }
            visited[r] = true;
            if match_r[r] == FREE
                || try_augment(match_r[r], adj, visited, match_l, match_r)
            {
                match_l[l] = r;
                match_r[r] = l;
                return true;
            }
        }
        false
    }

    let mut size = 0;
    for l in 0..n_left {
        visited.iter_mut().for_each(|v| *v = false);
        if try_augment(l, adj, &mut visited, &mut match_l, &mut match_r) {
            size += 1;
        }
    }
    (size, match_l, match_r)
}

/// Feasibility of bottleneck cost `c` on the finite parts: every point whose
/// diagonal distance exceeds `c` must be matched across at distance <= `c`.
/// By the Mendelsohn-Dulmage theorem it suffices that each side's must-match
/// set can be saturated independently.
fn feasible(fin_a: &[(f64, f64)], fin_b: &[(f64, f64)], c: f64, diag_a: &[f64], diag_b: &[f64]) -> bool {
    let must_a: Vec<usize> = (0..fin_a.len()).filter(|&i| diag_a[i] > c).collect();
    let must_b: Vec<usize> = (0..fin_b.len()).filter(|&j| diag_b[j] > c).collect();

    if must_a.len() > fin_b.len() || must_b.len() > fin_a.len() {
        return false;
    }
    let adj_a: Vec<Vec<usize>> = must_a
        .iter()
        .map(|&i| {
            (0..fin_b.len())
                .filter(|&j| linf(fin_a[i], fin_b[j]) <= c)
                .collect()
        })
        .collect();
    let (size_a, _, _) = max_matching(&adj_a, fin_b.len());
    if size_a < must_a.len() {
        return false;
    }
    let adj_b: Vec<Vec<usize>> = must_b
        .iter()
        .map(|&j| {
            (0..fin_a.len())
                .filter(|&i| linf(fin_a[i], fin_b[j]) <= c)
                .collect()
        })
        .collect();
    let (size_b, _, _) = max_matching(&adj_b, fin_a.len());
    size_b == must_b.len()
}

/// Bottleneck cost of the finite parts: binary search over the candidate
/// costs (all pairwise distances and all diagonal distances). The result is
/// always a member of that set.
fn bottleneck_finite(fin_a: &[(f64, f64)], fin_b: &[(f64, f64)]) -> f64 {
    let diag_a: Vec<f64> = fin_a.iter().map(|p| (p.1 - p.0) / 2.0).collect();
    let diag_b: Vec<f64> = fin_b.iter().map(|p| (p.1 - p.0) / 2.0).collect();
    let mut candidates = vec![0.0];
    candidates.extend_from_slice(&diag_a);
    candidates.extend_from_slice(&diag_b);
    for &a in fin_a {
        for &b in fin_b {
            candidates.push(linf(a, b));
        }
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());
    candidates.dedup();

    let mut lo = 0;
    let mut hi = candidates.len() - 1;
    debug_assert!(feasible(fin_a, fin_b, candidates[hi], &diag_a, &diag_b));
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(fin_a, fin_b, candidates[mid], &diag_a, &diag_b) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Bottleneck distance: max over dimensions of the optimal sup-displacement.
pub fn bottleneck(a: &DiagramSet, b: &DiagramSet) -> Result<f64, MetricError> {
    let max_dim = a.max_dim().max(b.max_dim());
    let mut worst = 0.0f64;
    for dim in 0..=max_dim {
        let (va, vb) = (dim_view(a, dim), dim_view(b, dim));
        check_essentials(dim, &va, &vb)?;
        for ((_, ba), (_, bb)) in essential_sorted(&va, &vb) {
            worst = worst.max((ba - bb).abs());
        }
        let fin_a: Vec<(f64, f64)> = va.finite.iter().map(|&(_, p)| p).collect();
        let fin_b: Vec<(f64, f64)> = vb.finite.iter().map(|&(_, p)| p).collect();
        worst = worst.max(bottleneck_finite(&fin_a, &fin_b));
    }
    Ok(worst)
}

/// Exact min-cost assignment (Hungarian algorithm with potentials) on a
/// square cost matrix. Returns the column assigned to each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // row matched to column j (1-based, 0 = free)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Augmented assignment for the Wasserstein cost of the finite parts:
/// rows are A's points plus one diagonal slot per B point, columns are B's
/// points plus one diagonal slot per A point. Returns (cost, assignment).
fn wasserstein_finite(
    fin_a: &[(f64, f64)],
    fin_b: &[(f64, f64)],
    p: u32,
) -> (f64, Vec<usize>) {
    let (n, m) = (fin_a.len(), fin_b.len());
    let size = n + m;
    if size == 0 {
        return (0.0, Vec::new());
    }
    let pw = |x: f64| x.powi(p as i32);
    let cost: Vec<Vec<f64>> = (0..size)
        .map(|r| {
            (0..size)
                .map(|c| match (r < n, c < m) {
                    (true, true) => pw(linf(fin_a[r], fin_b[c])),
                    (true, false) => pw((fin_a[r].1 - fin_a[r].0) / 2.0),
                    (false, true) => pw((fin_b[c].1 - fin_b[c].0) / 2.0),
                    (false, false) => 0.0,
                })
                .collect()
        })
        .collect();
    let assignment = hungarian(&cost);
    let total = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| cost[r][c])
        .sum();
    (total, assignment)
}

/// Degree-p Wasserstein distance: per-dimension optimal sums of p-th powers
/// of displacements, summed over dimensions inside the 1/p root.
pub fn wasserstein(a: &DiagramSet, b: &DiagramSet, p: u32) -> Result<f64, MetricError> {
    assert!(p >= 1, "Wasserstein degree must be >= 1");
    let max_dim = a.max_dim().max(b.max_dim());
    let mut total = 0.0f64;
    for dim in 0..=max_dim {
        let (va, vb) = (dim_view(a, dim), dim_view(b, dim));
        check_essentials(dim, &va, &vb)?;
        for ((_, ba), (_, bb)) in essential_sorted(&va, &vb) {
            total += (ba - bb).abs().powi(p as i32);
        }
        let fin_a: Vec<(f64, f64)> = va.finite.iter().map(|&(_, pt)| pt).collect();
        let fin_b: Vec<(f64, f64)> = vb.finite.iter().map(|&(_, pt)| pt).collect();
        total += wasserstein_finite(&fin_a, &fin_b, p).0;
    }
    Ok(total.powf(1.0 / f64::from(p)))
}

/// Optimal per-dimension matchings for the bottleneck distance, alongside
/// the distance itself.
pub fn bottleneck_matching(
    a: &DiagramSet,
    b: &DiagramSet,
) -> Result<(f64, Vec<Matching>), MetricError> {
    let max_dim = a.max_dim().max(b.max_dim());
    let mut matchings = Vec::new();
    let mut worst = 0.0f64;
    for dim in 0..=max_dim {
        let (va, vb) = (dim_view(a, dim), dim_view(b, dim));
        check_essentials(dim, &va, &vb)?;
        let mut cost = 0.0f64;
        let mut pairs = Vec::new();
        for ((ia, ba), (ib, bb)) in essential_sorted(&va, &vb) {
            cost = cost.max((ba - bb).abs());
            pairs.push((ia, ib));
        }
        let fin_a: Vec<(f64, f64)> = va.finite.iter().map(|&(_, pt)| pt).collect();
        let fin_b: Vec<(f64, f64)> = vb.finite.iter().map(|&(_, pt)| pt).collect();
        let c_star = bottleneck_finite(&fin_a, &fin_b);
        cost = cost.max(c_star);

        // Extract one realizing bijection: perfect matching on the augmented
        // graph at cost c_star.
        let (n, m) = (fin_a.len(), fin_b.len());
        let diag_ok_a: Vec<bool> = fin_a.iter().map(|pt| (pt.1 - pt.0) / 2.0 <= c_star).collect();
        let diag_ok_b: Vec<bool> = fin_b.iter().map(|pt| (pt.1 - pt.0) / 2.0 <= c_star).collect();
        let adj: Vec<Vec<usize>> = (0..n + m)
            .map(|l| {
                let mut nbrs = Vec::new();
                if l < n {
                    for (j, &fb) in fin_b.iter().enumerate() {
                        if linf(fin_a[l], fb) <= c_star {
                            nbrs.push(j);
                        }
                    }
                    if diag_ok_a[l] {
                        nbrs.push(m + l);
                    }
                } else {
                    let j = l - n;
                    if diag_ok_b[j] {
                        nbrs.push(j);
                    }
                    for k in 0..n {
                        nbrs.push(m + k);
                    }
                }
                nbrs
            })
            .collect();
        let (size, match_l, _) = max_matching(&adj, n + m);
        debug_assert_eq!(size, n + m, "optimal cost must be feasible");

        let mut diagonal_a = Vec::new();
        let mut diagonal_b = Vec::new();
        for (l, &r) in match_l.iter().enumerate().take(n + m) {
            if l < n {
                if r < m {
                    pairs.push((va.finite[l].0, vb.finite[r].0));
                } else {
                    diagonal_a.push(va.finite[l].0);
                }
            } else if r < m {
                diagonal_b.push(vb.finite[r].0);
            }
        }
        pairs.sort_unstable();
        worst = worst.max(cost);
        matchings.push(Matching {
            dim,
            pairs,
            diagonal_a,
            diagonal_b,
            cost,
        });
    }
    Ok((worst, matchings))
}

/// Optimal per-dimension matchings for the degree-p Wasserstein distance,
/// alongside the distance itself.
pub fn wasserstein_matching(
    a: &DiagramSet,
    b: &DiagramSet,
    p: u32,
) -> Result<(f64, Vec<Matching>), MetricError> {
    let max_dim = a.max_dim().max(b.max_dim());
    let mut matchings = Vec::new();
    let mut total = 0.0f64;
    for dim in 0..=max_dim {
        let (va, vb) = (dim_view(a, dim), dim_view(b, dim));
        check_essentials(dim, &va, &vb)?;
        let mut cost = 0.0f64;
        let mut pairs = Vec::new();
        for ((ia, ba), (ib, bb)) in essential_sorted(&va, &vb) {
            cost += (ba - bb).abs().powi(p as i32);
            pairs.push((ia, ib));
        }
        let fin_a: Vec<(f64, f64)> = va.finite.iter().map(|&(_, pt)| pt).collect();
        let fin_b: Vec<(f64, f64)> = vb.finite.iter().map(|&(_, pt)| pt).collect();
        let (fin_cost, assignment) = wasserstein_finite(&fin_a, &fin_b, p);
        cost += fin_cost;
        let (n, m) = (fin_a.len(), fin_b.len());
        let mut diagonal_a = Vec::new();
        let mut diagonal_b = Vec::new();
        for (r, &c) in assignment.iter().enumerate() {
            if r < n {
                if c < m {
                    pairs.push((va.finite[r].0, vb.finite[c].0));
                } else {
                    diagonal_a.push(va.finite[r].0);
                }
            } else if c < m {
                diagonal_b.push(vb.finite[c].0);
            }
        }
        pairs.sort_unstable();
        total += cost;
        matchings.push(Matching {
            dim,
            pairs,
            diagonal_a,
            diagonal_b,
            cost,
        });
    }
    Ok((total.powf(1.0 / f64::from(p)), matchings))
}

const BRUTE_FORCE_MAX: usize = 12;

/// Exhaustive optimal matching between two small point multisets of one
/// dimension. The oracle the fast paths are tested against.
pub fn brute_force_matching(
    a_pts: &[PersistencePoint],
    b_pts: &[PersistencePoint],
    cost: MatchCost,
) -> Result<Matching, MetricError> {
    let fin_a: Vec<(f64, f64)> = a_pts
        .iter()
        .filter(|p| !p.is_essential())
        .map(|p| (p.birth, p.death))
        .collect();
    let fin_b: Vec<(f64, f64)> = b_pts
        .iter()
        .filter(|p| !p.is_essential())
        .map(|p| (p.birth, p.death))
        .collect();
    let ess_a: Vec<f64> = a_pts.iter().filter(|p| p.is_essential()).map(|p| p.birth).collect();
    let ess_b: Vec<f64> = b_pts.iter().filter(|p| p.is_essential()).map(|p| p.birth).collect();
    if ess_a.len() != ess_b.len() {
        return Err(MetricError::EssentialMismatch {
            dim: a_pts.first().or(b_pts.first()).map_or(0, |p| p.dim),
            left: ess_a.len(),
            right: ess_b.len(),
        });
    }
    let size = fin_a.len() + fin_b.len();
    if size > BRUTE_FORCE_MAX {
        return Err(MetricError::TooLarge {
            size,
            max: BRUTE_FORCE_MAX,
        });
    }

    let combine = |acc: f64, x: f64| match cost {
        MatchCost::Bottleneck => acc.max(x),
        MatchCost::SumPower(p) => acc + x.powi(p as i32),
    };

    // Enumerate essential permutations and finite augmented bijections.
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for rest in permutations(n - 1) {
            for pos in 0..=rest.len() {
                let mut perm = rest.clone();
                perm.insert(pos, n - 1);
                out.push(perm);
            }
        }
        out
    }

    struct Search<'s> {
        fin_a: &'s [(f64, f64)],
        fin_b: &'s [(f64, f64)],
        combine: &'s dyn Fn(f64, f64) -> f64,
        best: f64,
        best_assign: Vec<Option<usize>>,
        used_b: Vec<bool>,
        assign: Vec<Option<usize>>,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, acc: f64) {
            // both cost regimes only grow as points are assigned
            if acc > self.best {
                return;
            }
            if i == self.fin_a.len() {
                let mut total = acc;
                for (j, &used) in self.used_b.iter().enumerate() {
                    if !used {
                        let d = (self.fin_b[j].1 - self.fin_b[j].0) / 2.0;
                        total = (self.combine)(total, d);
                    }
                }
                if total < self.best {
                    self.best = total;
                    self.best_assign = self.assign.clone();
                }
                return;
            }
            for j in 0..self.fin_b.len() {
                if self.used_b[j] {
                    continue;
                }
                self.used_b[j] = true;
                self.assign[i] = Some(j);
                let c = (self.combine)(acc, linf(self.fin_a[i], self.fin_b[j]));
                self.run(i + 1, c);
                self.used_b[j] = false;
                self.assign[i] = None;
            }
            let diag = (self.fin_a[i].1 - self.fin_a[i].0) / 2.0;
            self.run(i + 1, (self.combine)(acc, diag));
        }
    }

    // Optimal essential pairing by explicit enumeration.
    let mut ess_best = f64::INFINITY;
    let mut ess_perm = Vec::new();
    for perm in permutations(ess_a.len()) {
        let mut c = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            c = combine(c, (ess_a[i] - ess_b[j]).abs());
        }
        if c < ess_best {
            ess_best = c;
            ess_perm = perm;
        }
    }
    if ess_a.is_empty() {
        ess_best = 0.0;
    }

    let mut search = Search {
        fin_a: &fin_a,
        fin_b: &fin_b,
        combine: &combine,
        best: f64::INFINITY,
        best_assign: vec![None; fin_a.len()],
        used_b: vec![false; fin_b.len()],
        assign: vec![None; fin_a.len()],
    };
    search.run(0, ess_best);

    // Map back to indices over the full input slices.
    let fin_idx_a: Vec<usize> = a_pts
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_essential())
        .map(|(i, _)| i)
        .collect();
    let fin_idx_b: Vec<usize> = b_pts
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_essential())
        .map(|(i, _)| i)
        .collect();
    let ess_idx_a: Vec<usize> = a_pts
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_essential())
        .map(|(i, _)| i)
        .collect();
    let ess_idx_b: Vec<usize> = b_pts
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_essential())
        .map(|(i, _)| i)
        .collect();

    let mut pairs = Vec::new();
    let mut diagonal_a = Vec::new();
    let mut diagonal_b = Vec::new();
    for (i, &j) in ess_perm.iter().enumerate() {
        pairs.push((ess_idx_a[i], ess_idx_b[j]));
    }
    let mut used_b = vec![false; fin_b.len()];
    for (i, assignment) in search.best_assign.iter().enumerate() {
        match assignment {
            Some(j) => {
                pairs.push((fin_idx_a[i], fin_idx_b[*j]));
                used_b[*j] = true;
            }
            None => diagonal_a.push(fin_idx_a[i]),
        }
    }
    for (j, used) in used_b.iter().enumerate() {
        if !used {
            diagonal_b.push(fin_idx_b[j]);
        }
    }
    pairs.sort_unstable();

    Ok(Matching {
        dim: a_pts.first().or(b_pts.first()).map_or(0, |p| p.dim),
        pairs,
        diagonal_a,
        diagonal_b,
        cost: search.best,
    })
}
