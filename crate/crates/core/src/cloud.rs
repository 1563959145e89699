//! A time series of diagram sets as a point cloud in diagram space:
//! distance matrices, speed profiles, Vietoris-Rips persistence, cluster
//! detection, greedy metric subsampling, and the two-scale change-count
//! estimator.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::diagram::{DiagramSet, PersistencePoint};
use crate::dsu::DisjointSets;
use crate::error::CloudError;
use crate::metrics::Metric;
use crate::reduce::{self, FilteredComplex};

/// Symmetric pairwise distances for a finite point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
    metric_label: String,
}

impl DistanceMatrix {
    /// Validates symmetry, zero diagonal, and non-negative finite entries.
    pub fn new(n: usize, data: Vec<f64>, metric_label: impl Into<String>) -> Result<Self, CloudError> {
        assert_eq!(data.len(), n * n, "distance matrix must be n*n");
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(CloudError::NonZeroDiagonal { i });
            }
            for j in (i + 1)..n {
                let d = data[i * n + j];
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(CloudError::BadEntry { i, j });
                }
                if d != data[j * n + i] {
                    return Err(CloudError::Asymmetric { i, j });
                }
            }
        }
        Ok(DistanceMatrix {
            n,
            data,
            metric_label: metric_label.into(),
        })
    }

    /// Builds from a distance function evaluated once per unordered pair.
    pub fn from_fn(
        n: usize,
        metric_label: impl Into<String>,
        mut dist: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, CloudError> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix::new(n, data, metric_label)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric_label(&self) -> &str {
        &self.metric_label
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// All off-diagonal pairwise distances, each unordered pair once.
    pub fn pairwise(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| self.get(i, j)))
    }

    /// CSV body plus a `<path>.meta` sidecar carrying the metric label.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), CloudError> {
        let path = path.as_ref();
        let mut s = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}", self.get(i, j));
            }
            s.push('\n');
        }
        fs::write(path, s).map_err(|source| CloudError::Io {
            path: path.to_owned(),
            source,
        })?;
        let meta = sidecar_path(path);
        fs::write(&meta, format!("metric {}\n", self.metric_label)).map_err(|source| {
            CloudError::Io { path: meta, source }
        })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, CloudError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CloudError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| CloudError::Format {
                    path: path.to_owned(),
                    line: lineno + 1,
                    msg: e.to_string(),
                })?;
            rows.push(row);
        }
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(CloudError::Format {
                path: path.to_owned(),
                line: 1,
                msg: format!("expected a square {n}x{n} matrix"),
            });
        }
        let meta = sidecar_path(path);
        let metric_label = match fs::read_to_string(&meta) {
            Ok(text) => text
                .split_whitespace()
                .nth(1)
                .unwrap_or("unknown")
                .to_string(),
            Err(_) => "unknown".to_string(),
        };
        DistanceMatrix::new(n, rows.concat(), metric_label)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta");
    std::path::PathBuf::from(os)
}

/// Full pairwise distance matrix of a diagram series. Entries are computed
/// independently per pair, so the result is identical under any parallel
/// schedule.
pub fn distance_matrix(series: &[DiagramSet], metric: Metric) -> Result<DistanceMatrix, CloudError> {
    let n = series.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let computed: Vec<((usize, usize), Result<f64, _>)> = pairs
        .into_par_iter()
        .map(|(i, j)| ((i, j), metric.distance(&series[i], &series[j])))
        .collect();
    let mut data = vec![0.0; n * n];
    for ((i, j), res) in computed {
        let d = res.map_err(|source| CloudError::PairDistance { i, j, source })?;
        data[i * n + j] = d;
        data[j * n + i] = d;
    }
    DistanceMatrix::new(n, data, metric.label())
}

/// `distance_matrix` on a dedicated thread pool of the given size.
pub fn distance_matrix_with_threads(
    series: &[DiagramSet],
    metric: Metric,
    threads: usize,
) -> Result<DistanceMatrix, CloudError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction");
    pool.install(|| distance_matrix(series, metric))
}

/// Distance between consecutive diagrams divided by the sampling interval:
/// the average speed of the pattern in diagram space.
pub fn speed_profile(
    series: &[DiagramSet],
    metric: Metric,
    dt: f64,
) -> Result<Vec<f64>, CloudError> {
    if series.len() < 2 {
        return Err(CloudError::TooShort(series.len()));
    }
    series
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            metric
                .distance(&w[0], &w[1])
                .map(|d| d / dt)
                .map_err(|source| CloudError::PairDistance { i, j: i + 1, source })
        })
        .collect()
}

/// Default cap on Rips input size; the 2-skeleton has ~n^3/6 triangles.
pub const RIPS_MAX_POINTS: usize = 2000;

/// The Vietoris-Rips filtration of a distance matrix up to the 2-skeleton.
/// An edge appears at half the distance between its endpoints (balls of
/// radius theta touch); a triangle at the max of its edges' scales.
pub struct RipsFiltration {
    n: usize,
    /// Half-distances by lexicographic (i < j) edge id.
    edge_scales: Vec<f64>,
    /// Edge ids sorted by (scale, id) ascending.
    edge_order: Vec<u32>,
}

impl RipsFiltration {
    pub fn build(dm: &DistanceMatrix, max_points: usize) -> Result<Self, CloudError> {
        let n = dm.len();
        if n > max_points {
            return Err(CloudError::TooManyPoints { n, max: max_points });
        }
        let n_edges = n * (n - 1) / 2;
        let mut edge_scales = vec![0.0; n_edges];
        for i in 0..n {
            for j in (i + 1)..n {
                edge_scales[lex_edge_id(i, j, n)] = dm.get(i, j) / 2.0;
            }
        }
        let mut edge_order: Vec<u32> = (0..n_edges as u32).collect();
        edge_order.sort_by(|&a, &b| {
            edge_scales[a as usize]
                .partial_cmp(&edge_scales[b as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        Ok(RipsFiltration {
            n,
            edge_scales,
            edge_order,
        })
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_scales.len()
    }

    /// Scale of appearance of edge `(i, j)`.
    pub fn edge_scale(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        self.edge_scales[lex_edge_id(i, j, self.n)]
    }

    /// The full filtration in reduction order: vertices at scale zero, then
    /// edges and triangles by (scale, dimension, lexicographic id).
    fn to_complex(&self) -> FilteredComplex {
        let n = self.n;
        let n_edges = self.edge_scales.len();
        let mut edge_rank = vec![0u32; n_edges];
        for (r, &e) in self.edge_order.iter().enumerate() {
            edge_rank[e as usize] = (n + r) as u32;
        }
        struct Tri {
            scale: f64,
            edges: [u32; 3],
            id: u32,
        }
        let mut triangles = Vec::new();
        let mut tid = 0u32;
        for i in 0..n {
            for j in (i + 1)..n {
                let eij = lex_edge_id(i, j, n);
                for k in (j + 1)..n {
                    let eik = lex_edge_id(i, k, n);
                    let ejk = lex_edge_id(j, k, n);
                    let scale = self.edge_scales[eij]
                        .max(self.edge_scales[eik])
                        .max(self.edge_scales[ejk]);
                    triangles.push(Tri {
                        scale,
                        edges: [eij as u32, eik as u32, ejk as u32],
                        id: tid,
                    });
                    tid += 1;
                }
            }
        }
        triangles.sort_by(|a, b| {
            a.scale
                .partial_cmp(&b.scale)
                .unwrap()
                .then(a.id.cmp(&b.id))
        });

        let total = n + n_edges + triangles.len();
        let mut dims = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        let mut boundaries = Vec::with_capacity(total);
        for _ in 0..n {
            dims.push(0);
            values.push(0.0);
            boundaries.push(Vec::new());
        }
        for &e in &self.edge_order {
            let (i, j) = unrank_edge(e as usize, n);
            dims.push(1);
            values.push(self.edge_scales[e as usize]);
            boundaries.push(vec![i as u32, j as u32]);
        }
        for t in &triangles {
            dims.push(2);
            values.push(t.scale);
            let mut bd: Vec<u32> = t.edges.iter().map(|&e| edge_rank[e as usize]).collect();
            bd.sort_unstable();
            boundaries.push(bd);
        }
        FilteredComplex {
            dims,
            values,
            boundaries,
        }
    }

    /// Persistence diagrams of the filtration: components and loops.
    pub fn persistence(&self) -> DiagramSet {
        self.diagrams(false)
    }

    /// Same diagrams through the plain left-to-right reduction; test oracle
    /// for the twist-order path.
    #[doc(hidden)]
    pub fn persistence_naive(&self) -> DiagramSet {
        self.diagrams(true)
    }

    fn diagrams(&self, naive: bool) -> DiagramSet {
        let cx = self.to_complex();
        let reduction = if naive {
            reduce::reduce_standard(&cx)
        } else {
            reduce::reduce_twist(&cx)
        };
        let mut points = Vec::new();
        for &(birth_cell, death_cell) in &reduction.pairs {
            let birth = cx.values[birth_cell as usize];
            let death = cx.values[death_cell as usize];
            if birth < death {
                points.push(PersistencePoint::new(
                    cx.dims[birth_cell as usize] as usize,
                    birth,
                    death,
                ));
            }
        }
        for &cell in &reduction.essential {
            // the 2-skeleton leaves no essential loops: the full complex on
            // n vertices is simply connected
            if cx.dims[cell as usize] < 2 {
                points.push(PersistencePoint::new(
                    cx.dims[cell as usize] as usize,
                    cx.values[cell as usize],
                    f64::INFINITY,
                ));
            }
        }
        DiagramSet::new(points).expect("reduction produces birth < death pairs")
    }
}

fn lex_edge_id(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn unrank_edge(e: usize, n: usize) -> (usize, usize) {
    // invert lex_edge_id
    let mut i = 0;
    let mut base = 0;
    loop {
        let row = n - i - 1;
        if e < base + row {
            return (i, i + 1 + e - base);
        }
        base += row;
        i += 1;
    }
}

/// Rips persistence with the default size guard.
pub fn rips_persistence(dm: &DistanceMatrix) -> Result<DiagramSet, CloudError> {
    Ok(RipsFiltration::build(dm, RIPS_MAX_POINTS)?.persistence())
}

/// Connected components of the graph with an edge wherever
/// `d(i, j) <= 2 * theta_c`, matching the Rips scale convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster label per point, numbered by first appearance.
    pub labels: Vec<usize>,
    /// Merge scales at or above `theta_c`: the deaths the surviving clusters
    /// would suffer at larger thresholds, each half a merge distance.
    pub separations: Vec<f64>,
}

pub fn cluster(dm: &DistanceMatrix, theta_c: f64) -> Clustering {
    let n = dm.len();
    let mut dsu = DisjointSets::new(n);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if dm.get(i, j) <= 2.0 * theta_c {
                dsu.union(i, j);
            } else {
                edges.push((i, j));
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        let root = dsu.find(i);
        if labels[root] == usize::MAX {
            labels[root] = next;
            next += 1;
        }
        labels[i] = labels[root];
    }

    // Merge scales above the cutoff: single linkage over the remaining edges.
    let mut remaining: Vec<(f64, usize, usize)> =
        edges.iter().map(|&(i, j)| (dm.get(i, j), i, j)).collect();
    remaining.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut separations = Vec::new();
    for (d, i, j) in remaining {
        if dsu.union(i, j) {
            separations.push(d / 2.0);
        }
    }
    Clustering { labels, separations }
}

/// Indices kept by the greedy sequential subsample at radius `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleResult {
    pub kept: Vec<usize>,
    pub delta: f64,
}

/// Greedy pass in index order: keep a point iff it is at distance >= delta
/// from every point already kept. The result is delta-sparse by
/// construction, and delta-dense because every discarded point was within
/// delta of an earlier kept one.
pub fn subsample(dm: &DistanceMatrix, delta: f64) -> Result<SubsampleResult, CloudError> {
    subsample_by(dm.len(), delta, |i, j| dm.get(i, j))
}

/// `subsample` against a distance oracle, for clouds too large to hold a
/// full matrix.
pub fn subsample_by(
    n: usize,
    delta: f64,
    mut dist: impl FnMut(usize, usize) -> f64,
) -> Result<SubsampleResult, CloudError> {
    if !(delta > 0.0) {
        return Err(CloudError::BadDelta(delta));
    }
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..n {
        if kept.iter().all(|&k| dist(k, i) >= delta) {
            kept.push(i);
        }
    }
    Ok(SubsampleResult { kept, delta })
}

/// Two-scale decomposition of Wasserstein distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleEstimate {
    /// Estimated count of features that change significantly.
    pub n_big: i64,
    /// Estimated count of features that change very little.
    pub k_small: i64,
    /// False when the counts are inconsistent with the two-scale hypothesis
    /// (negative k), which rejects the decomposition.
    pub valid: bool,
}

/// Solves `w2 ~ sqrt(n * d_big^2)` and `w1 ~ n * d_big + k * d_small` for
/// integer n and k, rounding n first. Nonsensical counts are returned as-is
/// with `valid` cleared.
pub fn estimate_change_counts(
    d_big: f64,
    d_small: f64,
    w1: f64,
    w2: f64,
) -> Result<ScaleEstimate, CloudError> {
    if !(d_big > d_small && d_small > 0.0) {
        return Err(CloudError::BadScales { d_big, d_small });
    }
    let n_big = (w2 / d_big).powi(2).round() as i64;
    let k_small = ((w1 - n_big as f64 * d_big) / d_small).round() as i64;
    Ok(ScaleEstimate {
        n_big,
        k_small,
        valid: n_big >= 0 && k_small >= 0,
    })
}
