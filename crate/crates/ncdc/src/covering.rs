//! Metric-entropy toolkit: covering and packing numbers of finite point
//! clouds (exact on small instances, greedy beyond), the arithmetic they
//! satisfy (monotonicity, unions, neighborhoods, Minkowski sums), ball
//! covering bounds, a verifier for the localized covering inequality of a
//! map with a spectral gap, the binding/fringe construction for derivative
//! distance operators, and empirical box-counting fits.
//!
//! Covering numbers of a finite cloud depend on which centers are allowed.
//! This module fixes a deterministic candidate family — the points
//! themselves, all pairwise midpoints, and the minimax centers of all
//! 3-subsets — and documents its exact covering numbers as exact *for that
//! family* (an upper bound for fully unrestricted centers, a lower bound
//! never: every candidate cover is a valid cover). All the inequalities
//! verified here are compatible with this convention.

use crate::derivation::{partial_deriv_presplit, BlockShape, TensorElement, TensorKey, TensorMatrix};
use crate::error::{NcError, Result};
use crate::ncpoly::{Letter, Monomial, PolyTuple, Polynomial};
use crate::projections::{meet, op_norm, product_projection, ProductSide};
use crate::repn::{
    complex_gaussian_matrix, eval_tuple, eval_word, hs_norm, real_derivative, real_linear_matrix,
    realify_tuple, tuple_dist, unrealify, MatrixTuple,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest cloud size for which exact (branch-and-bound / clique) searches
/// are attempted; beyond it only the greedy heuristics are available.
pub const EXACT_LIMIT: usize = 24;

/// Absolute slack added to closed-ball membership tests so that points at
/// distance exactly `ε` from a center count as covered.
const DIST_SLACK: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Point clouds and metrics
// ---------------------------------------------------------------------------

/// Which distance the cloud carries. Points are always stored as flat real
/// vectors; the metric tells how to read them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Plain Euclidean distance on the raw vectors.
    Euclidean,
    /// Normalized `ℓ²` distance of matrix tuples: the vector is a stacked
    /// realified tuple over `M_k` and the distance is
    /// `(Σ_j ‖x_j − y_j‖₂²)^{1/2}` with the normalized Hilbert–Schmidt norm
    /// per coordinate (Euclidean distance divided by `√k`).
    L2Normalized {
        /// Matrix size.
        k: usize,
    },
    /// Max over coordinates of the operator norm of the difference; the
    /// vector is a stacked realified `n`-tuple over `M_k`.
    OperatorNorm {
        /// Matrix size.
        k: usize,
        /// Tuple length.
        n: usize,
    },
}

/// A finite set of points with a metric.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<DVector<f64>>,
    metric: Metric,
}

impl PointCloud {
    /// Builds a cloud, validating uniform dimension, finite entries, and
    /// (for matrix metrics) that the dimension matches the declared shape.
    pub fn new(points: Vec<DVector<f64>>, metric: Metric) -> Result<Self> {
        if points.is_empty() {
            return Err(NcError::Range("point cloud must be nonempty".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(NcError::Range("points must have positive dimension".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(NcError::Dimension(format!(
                    "point {} has dimension {}, expected {}",
                    i,
                    p.len(),
                    dim
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(NcError::Range(format!("point {} has non-finite entries", i)));
            }
        }
        match metric {
            Metric::Euclidean => {}
            Metric::L2Normalized { k } => {
                if k == 0 {
                    return Err(NcError::Range("matrix size k must be positive".into()));
                }
            }
            Metric::OperatorNorm { k, n } => {
                if dim != 2 * k * k * n {
                    return Err(NcError::Dimension(format!(
                        "operator-norm metric needs dimension 2nk² = {}, got {}",
                        2 * k * k * n,
                        dim
                    )));
                }
            }
        }
        Ok(PointCloud { points, metric })
    }

    /// Cloud over stacked realified matrix tuples.
    pub fn from_tuples(tuples: &[MatrixTuple], metric: Metric) -> Result<Self> {
        if tuples.is_empty() {
            return Err(NcError::Range("point cloud must be nonempty".into()));
        }
        let points = tuples.iter().map(realify_tuple).collect();
        PointCloud::new(points, metric)
    }

    /// The points.
    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    /// The metric.
    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false (clouds are nonempty by construction).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance between two arbitrary vectors under this cloud's metric.
    pub fn dist(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self.metric {
            Metric::Euclidean => (a - b).norm(),
            Metric::L2Normalized { k } => (a - b).norm() / (k as f64).sqrt(),
            Metric::OperatorNorm { k, n } => {
                let d = 2 * k * k;
                let diff = a - b;
                (0..n)
                    .map(|j| {
                        let m = unrealify(&diff.rows(j * d, d).into_owned(), k);
                        op_norm(&m)
                    })
                    .fold(0.0, f64::max)
            }
        }
    }

    /// A cloud on a subset of the points (same metric).
    pub fn subset(&self, indices: &[usize]) -> Result<PointCloud> {
        let points = indices
            .iter()
            .map(|&i| {
                self.points
                    .get(i)
                    .cloned()
                    .ok_or_else(|| NcError::Range(format!("point index {} out of range", i)))
            })
            .collect::<Result<Vec<_>>>()?;
        PointCloud::new(points, self.metric)
    }
}

/// The deterministic candidate-center family: the points, all pairwise
/// midpoints, and for every 3-subset its minimax center (the midpoint of
/// the farthest pair when that already covers the third point, otherwise
/// the circumcenter in the spanned plane when the three points are
/// affinely independent).
pub fn candidate_centers(cloud: &PointCloud) -> Vec<DVector<f64>> {
    let pts = &cloud.points;
    let mut out: Vec<DVector<f64>> = pts.to_vec();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            out.push((&pts[i] + &pts[j]) * 0.5);
        }
    }
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            for l in (j + 1)..pts.len() {
                if let Some(c) = three_point_center(cloud, &pts[i], &pts[j], &pts[l]) {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Minimax center of three points, when it is not already a pair midpoint.
fn three_point_center(
    cloud: &PointCloud,
    a: &DVector<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
) -> Option<DVector<f64>> {
    // If the midpoint of the farthest pair covers the third point, the pair
    // midpoint (already a candidate) is the minimax center: skip.
    let dab = cloud.dist(a, b);
    let dac = cloud.dist(a, c);
    let dbc = cloud.dist(b, c);
    let (p, q, r, sep) = if dab >= dac && dab >= dbc {
        (a, b, c, dab)
    } else if dac >= dbc {
        (a, c, b, dac)
    } else {
        (b, c, a, dbc)
    };
    let mid = (p + q) * 0.5;
    if cloud.dist(&mid, r) <= sep * 0.5 + DIST_SLACK {
        return None;
    }
    // Circumcenter in the plane spanned by the three points (Euclidean
    // formula, used as a deterministic candidate under every metric).
    let u = b - a;
    let v = c - a;
    let uu = u.dot(&u);
    let uv = u.dot(&v);
    let vv = v.dot(&v);
    let det = uu * vv - uv * uv;
    let scale = uu.max(vv);
    if det.abs() <= 1e-12 * scale * scale {
        return None;
    }
    let alpha = 0.5 * (uu * vv - vv * uv) / det;
    let beta = 0.5 * (uu * vv - uu * uv) / det;
    Some(a + u * alpha + v * beta)
}

// ---------------------------------------------------------------------------
// Covering and packing numbers
// ---------------------------------------------------------------------------

/// Search strategy for [`kcover`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    /// Minimum cover over the candidate-center family (≤ [`EXACT_LIMIT`]
    /// points).
    Exact,
    /// Farthest-point heuristic with centers restricted to the points;
    /// an upper bound, any cloud size.
    Greedy,
}

/// Minimum number of closed `ε`-balls covering the cloud. Exact mode is a
/// minimum over the deterministic candidate-center family; greedy mode is
/// the farthest-point upper bound.
pub fn kcover(cloud: &PointCloud, eps: f64, mode: CoverMode) -> Result<usize> {
    if eps <= 0.0 {
        return Err(NcError::Range("covering radius must be positive".into()));
    }
    match mode {
        CoverMode::Greedy => Ok(greedy_cover(cloud, eps)),
        CoverMode::Exact => {
            if cloud.len() > EXACT_LIMIT {
                return Err(NcError::Range(format!(
                    "exact cover limited to {} points, got {}",
                    EXACT_LIMIT,
                    cloud.len()
                )));
            }
            let centers = candidate_centers(cloud);
            kcover_with_centers(cloud, eps, &centers)
        }
    }
}

/// Minimum cover with centers restricted to an explicit list (exact search;
/// cloud limited to [`EXACT_LIMIT`] points). Errors when no center covers
/// some point.
pub fn kcover_with_centers(
    cloud: &PointCloud,
    eps: f64,
    centers: &[DVector<f64>],
) -> Result<usize> {
    if eps <= 0.0 {
        return Err(NcError::Range("covering radius must be positive".into()));
    }
    let n = cloud.len();
    if n > EXACT_LIMIT {
        return Err(NcError::Range(format!(
            "exact cover limited to {} points, got {}",
            EXACT_LIMIT,
            n
        )));
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut masks: Vec<u64> = Vec::with_capacity(centers.len());
    for c in centers {
        let mut m = 0u64;
        for (i, p) in cloud.points.iter().enumerate() {
            if cloud.dist(c, p) <= eps + DIST_SLACK {
                m |= 1u64 << i;
            }
        }
        if m != 0 {
            masks.push(m);
        }
    }
    let union = masks.iter().fold(0u64, |a, m| a | m);
    if union != full {
        return Err(NcError::Numerical(
            "no candidate center covers some point at this radius".into(),
        ));
    }
    Ok(min_set_cover(&masks, full))
}

/// Farthest-point greedy cover with centers restricted to the points.
fn greedy_cover(cloud: &PointCloud, eps: f64) -> usize {
    let n = cloud.len();
    let mut mind = vec![f64::INFINITY; n];
    let mut next = 0usize;
    let mut count = 0usize;
    loop {
        count += 1;
        let center = cloud.points[next].clone();
        for (i, p) in cloud.points.iter().enumerate() {
            let d = cloud.dist(&center, p);
            if d < mind[i] {
                mind[i] = d;
            }
        }
        let (arg, far) = mind
            .iter()
            .copied()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
        if far <= eps + DIST_SLACK {
            return count;
        }
        next = arg;
    }
}

/// Exact minimum set cover by branch-and-bound over coverage bitmasks.
fn min_set_cover(masks: &[u64], full: u64) -> usize {
    // Dominance pruning: drop any mask contained in another.
    let mut sorted: Vec<u64> = masks.to_vec();
    sorted.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    let mut kept: Vec<u64> = Vec::with_capacity(sorted.len());
    'outer: for m in sorted {
        for &k in &kept {
            if m & !k == 0 {
                continue 'outer;
            }
        }
        kept.push(m);
    }
    // Greedy upper bound.
    let mut best = {
        let mut uncovered = full;
        let mut count = 0usize;
        while uncovered != 0 {
            let m = kept
                .iter()
                .copied()
                .max_by_key(|m| (m & uncovered).count_ones())
                .unwrap();
            uncovered &= !m;
            count += 1;
        }
        count
    };
    let maxcover = kept.iter().map(|m| m.count_ones()).max().unwrap() as usize;
    dfs_cover(full, &kept, 0, maxcover, &mut best);
    best
}

fn dfs_cover(uncovered: u64, masks: &[u64], depth: usize, maxcover: usize, best: &mut usize) {
    if uncovered == 0 {
        if depth < *best {
            *best = depth;
        }
        return;
    }
    let need = (uncovered.count_ones() as usize).div_ceil(maxcover);
    if depth + need >= *best {
        return;
    }
    // Branch on the uncovered point with the fewest covering candidates.
    let mut pick = 0usize;
    let mut fewest = usize::MAX;
    let mut bits = uncovered;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let count = masks.iter().filter(|m| *m & (1u64 << i) != 0).count();
        if count < fewest {
            fewest = count;
            pick = i;
        }
    }
    let bit = 1u64 << pick;
    for m in masks.iter().filter(|m| *m & bit != 0) {
        dfs_cover(uncovered & !m, masks, depth + 1, maxcover, best);
    }
}

/// Maximum size of an `ε`-separated subset (all pairwise distances ≥ `ε`).
/// Exact (maximum clique on the separation graph) for ≤ [`EXACT_LIMIT`]
/// points, greedy lower bound beyond.
pub fn spack(cloud: &PointCloud, eps: f64) -> Result<usize> {
    if eps <= 0.0 {
        return Err(NcError::Range("separation radius must be positive".into()));
    }
    let n = cloud.len();
    let sep = |i: usize, j: usize| cloud.dist(&cloud.points[i], &cloud.points[j]) >= eps - DIST_SLACK;
    if n > EXACT_LIMIT {
        // Greedy: scan in order, keep points separated from all kept ones.
        let mut kept: Vec<usize> = Vec::new();
        for i in 0..n {
            if kept.iter().all(|&j| sep(i, j)) {
                kept.push(i);
            }
        }
        return Ok(kept.len());
    }
    let mut adj = vec![0u64; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if sep(i, j) {
                adj[i] |= 1u64 << j;
                adj[j] |= 1u64 << i;
            }
        }
    }
    let mut best = 1usize;
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    max_clique(0, full, 0, &adj, &mut best);
    Ok(best)
}

/// Bron–Kerbosch with pivoting on bitmask sets.
fn max_clique(r: usize, mut p: u64, mut x: u64, adj: &[u64], best: &mut usize) {
    if p == 0 && x == 0 {
        if r > *best {
            *best = r;
        }
        return;
    }
    if r + p.count_ones() as usize <= *best {
        return;
    }
    // Pivot: vertex of p ∪ x with the most neighbors in p.
    let mut pivot = 0usize;
    let mut most = -1i64;
    let mut bits = p | x;
    while bits != 0 {
        let u = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let cnt = (p & adj[u]).count_ones() as i64;
        if cnt > most {
            most = cnt;
            pivot = u;
        }
    }
    let mut cand = p & !adj[pivot];
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        let bit = 1u64 << v;
        cand &= !bit;
        max_clique(r + 1, p & adj[v], x & adj[v], adj, best);
        p &= !bit;
        x |= bit;
    }
}

// ---------------------------------------------------------------------------
// Covering arithmetic verifiers
// ---------------------------------------------------------------------------

/// Results of the neighborhood-law checks inside [`verify_chain`]; only run
/// when the fattened cloud still fits the exact-search limit.
#[derive(Debug, Clone, Serialize)]
pub struct FatteningCheck {
    /// Fattening radius `δ = ε/4`.
    pub delta: f64,
    /// `K_ε` of the fattened cloud.
    pub k_fat: usize,
    /// `K_{ε−δ}` of the original cloud (must dominate `k_fat`).
    pub k_shrunk: usize,
    /// `S_ε` of the fattened cloud.
    pub s_fat: usize,
    /// `S_{ε−2δ}` of the original cloud (must dominate `s_fat`).
    pub s_shrunk: usize,
    /// Both neighborhood inequalities hold.
    pub ok: bool,
}

/// Report of the full covering/packing arithmetic chain on one instance:
/// subset monotonicity, union subadditivity, monotonicity in the radius,
/// neighborhood laws (when sizes permit), and the sandwich
/// `K_ε ≤ S_ε ≤ K_{ε/2}`.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    /// Radius at which the chain was checked.
    pub eps: f64,
    /// `K_ε` of the cloud.
    pub k_eps: usize,
    /// `S_ε` of the cloud.
    pub s_eps: usize,
    /// `K_{ε/2}` of the cloud.
    pub k_half: usize,
    /// `K`/`S` of the first half of the points never exceed the full cloud's.
    pub subset_ok: bool,
    /// `K_ε(X) ≤ K_ε(A) + K_ε(B)` for the even/odd split `X = A ∪ B`.
    pub union_ok: bool,
    /// `K` and `S` do not increase when the radius doubles.
    pub radius_monotone_ok: bool,
    /// Neighborhood laws, when the fattened instance is small enough.
    pub fattening: Option<FatteningCheck>,
    /// `K_ε ≤ S_ε ≤ K_{ε/2}`.
    pub sandwich_ok: bool,
    /// Conjunction of everything checked.
    pub holds: bool,
}

/// Verifies the covering/packing arithmetic chain exactly on a small cloud.
pub fn verify_chain(cloud: &PointCloud, eps: f64) -> Result<ChainReport> {
    if cloud.len() > EXACT_LIMIT {
        return Err(NcError::Range(format!(
            "chain verification needs ≤ {} points",
            EXACT_LIMIT
        )));
    }
    let k_eps = kcover(cloud, eps, CoverMode::Exact)?;
    let s_eps = spack(cloud, eps)?;
    let k_half = kcover(cloud, eps / 2.0, CoverMode::Exact)?;

    // Subset monotonicity. The subset is covered with the *full* cloud's
    // candidate centers so that both sides range over one center family.
    let half: Vec<usize> = (0..cloud.len().div_ceil(2)).collect();
    let sub = cloud.subset(&half)?;
    let centers = candidate_centers(cloud);
    let k_sub = kcover_with_centers(&sub, eps, &centers)?;
    let s_sub = spack(&sub, eps)?;
    let subset_ok = k_sub <= k_eps && s_sub <= s_eps;

    // Union subadditivity on the even/odd split.
    let union_ok = if cloud.len() >= 2 {
        let evens: Vec<usize> = (0..cloud.len()).step_by(2).collect();
        let odds: Vec<usize> = (1..cloud.len()).step_by(2).collect();
        let ka = kcover(&cloud.subset(&evens)?, eps, CoverMode::Exact)?;
        let kb = kcover(&cloud.subset(&odds)?, eps, CoverMode::Exact)?;
        k_eps <= ka + kb
    } else {
        true
    };

    // Monotonicity in the radius.
    let k_double = kcover(cloud, 2.0 * eps, CoverMode::Exact)?;
    let s_double = spack(cloud, 2.0 * eps)?;
    let radius_monotone_ok = k_double <= k_eps && s_double <= s_eps;

    // Neighborhood laws with an explicit finite δ-fattening: every point
    // gains two companions at metric distance exactly δ along the first
    // coordinate direction.
    let fattening = if 3 * cloud.len() <= EXACT_LIMIT {
        let delta = eps / 4.0;
        let offset = match cloud.metric {
            Metric::Euclidean => delta,
            Metric::L2Normalized { k } => delta * (k as f64).sqrt(),
            // A single real entry perturbs one matrix coordinate by δ·E₁₁,
            // whose operator norm is δ.
            Metric::OperatorNorm { .. } => delta,
        };
        let mut fat_points = cloud.points.clone();
        for p in &cloud.points {
            for sign in [1.0, -1.0] {
                let mut q = p.clone();
                q[0] += sign * offset;
                fat_points.push(q);
            }
        }
        let fat = PointCloud::new(fat_points, cloud.metric)?;
        let k_fat = kcover(&fat, eps, CoverMode::Exact)?;
        let k_shrunk = kcover(cloud, eps - delta, CoverMode::Exact)?;
        let s_fat = spack(&fat, eps)?;
        let s_shrunk = spack(cloud, eps - 2.0 * delta)?;
        let ok = k_fat <= k_shrunk && s_fat <= s_shrunk;
        Some(FatteningCheck { delta, k_fat, k_shrunk, s_fat, s_shrunk, ok })
    } else {
        None
    };

    let sandwich_ok = k_eps <= s_eps && s_eps <= k_half;
    let holds = subset_ok
        && union_ok
        && radius_monotone_ok
        && sandwich_ok
        && fattening.as_ref().map_or(true, |f| f.ok);
    Ok(ChainReport {
        eps,
        k_eps,
        s_eps,
        k_half,
        subset_ok,
        union_ok,
        radius_monotone_ok,
        fattening,
        sandwich_ok,
        holds,
    })
}

/// Report of the Minkowski-sumset covering chain
/// `S_{2nε}(⊞Aᵢ) ≤ K_{nε}(⊞Aᵢ) ≤ Π K_ε(Aᵢ) ≤ Π S_ε(Aᵢ)`.
#[derive(Debug, Clone, Serialize)]
pub struct SumsetReport {
    /// Base radius `ε`.
    pub eps: f64,
    /// Number of summands.
    pub n_factors: usize,
    /// `S_{2nε}` of the sumset.
    pub s_sum: usize,
    /// `K_{nε}` of the sumset.
    pub k_sum: usize,
    /// Per-factor covering numbers `K_ε(Aᵢ)`.
    pub k_factors: Vec<usize>,
    /// Per-factor packing numbers `S_ε(Aᵢ)`.
    pub s_factors: Vec<usize>,
    /// The full chain holds.
    pub holds: bool,
}

/// Forms the Minkowski sumset of the clouds and verifies the sumset chain
/// exactly. All clouds must share metric and dimension, and the product of
/// their sizes must stay within the exact-search limit.
pub fn sumset_verify(clouds: &[PointCloud], eps: f64) -> Result<SumsetReport> {
    if clouds.len() < 2 {
        return Err(NcError::Range("sumset check needs at least two clouds".into()));
    }
    let metric = clouds[0].metric;
    let dim = clouds[0].points[0].len();
    let mut size = 1usize;
    for c in clouds {
        if c.metric != metric || c.points[0].len() != dim {
            return Err(NcError::Dimension("sumset clouds must share metric and dimension".into()));
        }
        size = size.saturating_mul(c.len());
    }
    if size > EXACT_LIMIT {
        return Err(NcError::Range(format!(
            "sumset has {} points, exact limit is {}",
            size, EXACT_LIMIT
        )));
    }
    // Cartesian sums of points, and of candidate centers (so that sums of
    // factor covers are available as centers for the sumset cover).
    let mut sums: Vec<DVector<f64>> = vec![DVector::zeros(dim)];
    let mut center_sums: Vec<DVector<f64>> = vec![DVector::zeros(dim)];
    for c in clouds {
        sums = sums
            .iter()
            .flat_map(|s| c.points.iter().map(move |p| s + p))
            .collect();
        let cands = candidate_centers(c);
        center_sums = center_sums
            .iter()
            .flat_map(|s| cands.iter().map(move |p| s + p))
            .collect();
    }
    let sumset = PointCloud::new(sums, metric)?;
    let n = clouds.len() as f64;
    let mut centers = candidate_centers(&sumset);
    centers.extend(center_sums);

    let s_sum = spack(&sumset, 2.0 * n * eps)?;
    let k_sum = kcover_with_centers(&sumset, n * eps, &centers)?;
    let k_factors = clouds
        .iter()
        .map(|c| kcover(c, eps, CoverMode::Exact))
        .collect::<Result<Vec<_>>>()?;
    let s_factors = clouds.iter().map(|c| spack(c, eps)).collect::<Result<Vec<_>>>()?;
    let prod_k: usize = k_factors.iter().product();
    let prod_s: usize = s_factors.iter().product();
    let holds = s_sum <= k_sum && k_sum <= prod_k && prod_k <= prod_s;
    Ok(SumsetReport {
        eps,
        n_factors: clouds.len(),
        s_sum,
        k_sum,
        k_factors,
        s_factors,
        holds,
    })
}

/// Evaluation of the dimension-dependent ball-covering bound
/// `C_r · d^{5/2} · (α/ε)^d`.
#[derive(Debug, Clone, Serialize)]
pub struct RogersBound {
    /// The bound itself (may overflow to `inf` for huge `d`; see
    /// `log_value`).
    pub value: f64,
    /// Natural log of the bound, computed stably.
    pub log_value: f64,
    /// Whether `d ≥ max{α/ε, 9}`, the regime in which the bound is asserted;
    /// outside it the value is still returned but flagged.
    pub in_regime: bool,
}

/// Covering bound for a `d`-dimensional ball of radius `α` at scale `ε`,
/// with a caller-supplied leading constant.
pub fn rogers_bound(d: usize, eps: f64, alpha: f64, c_r: f64) -> Result<RogersBound> {
    if d == 0 || eps <= 0.0 || alpha <= 0.0 || c_r <= 0.0 {
        return Err(NcError::Range("ball covering bound needs positive inputs".into()));
    }
    let df = d as f64;
    let log_value = c_r.ln() + 2.5 * df.ln() + df * (alpha / eps).ln();
    Ok(RogersBound {
        value: log_value.exp(),
        log_value,
        in_regime: df >= (alpha / eps).max(9.0),
    })
}

// ---------------------------------------------------------------------------
// Localized covering inequality for a map with a spectral gap
// ---------------------------------------------------------------------------

/// Instance data for [`lemma42_verify`]: a finite set `E` of matrix tuples,
/// a polynomial map `f`, a base point `x₀`, an orthogonal projection `Q` on
/// the realified input space, a gap parameter `β`, a shrink factor `t`, and
/// the covering radius `ε`.
#[derive(Debug, Clone)]
pub struct Lemma42Instance {
    /// The finite set `E`.
    pub points: Vec<MatrixTuple>,
    /// The map, one output coordinate per entry.
    pub f: PolyTuple,
    /// Base point at which the derivative is taken.
    pub x0: MatrixTuple,
    /// Orthogonal projection on `ℝ^{2nk²}` (realified input space).
    pub q: DMatrix<f64>,
    /// Lower bound asserted for `‖Df(x₀)Qζ‖/‖Qζ‖`.
    pub beta: f64,
    /// Shrink factor; must lie in `(1 − β/(8(‖Df(x₀)‖+1)), 1)`.
    pub t: f64,
    /// Covering radius.
    pub eps: f64,
    /// Number of random convex combinations of `E` probed for derivative
    /// oscillation.
    pub hull_samples: usize,
    /// Seed for the hull sampling.
    pub seed: u64,
}

/// Report of [`lemma42_verify`]. When the hypotheses fail, `holds` is
/// `None` and the instance counts as skipped, never as passed.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma42Report {
    /// All hypotheses verified.
    pub hypotheses_ok: bool,
    /// `min ‖Df(x₀)Qζ‖/‖Qζ‖ − β` over the range probes (must be ≥ 0).
    pub gap_margin: f64,
    /// `max ‖Df(ξ) − Df(x₀)‖` over hull samples (must be < β/4).
    pub oscillation: f64,
    /// Admissible open interval for `t`.
    pub t_interval: (f64, f64),
    /// `K_ε(E)`.
    pub lhs: usize,
    /// `K_{(1−t)ε}(Q^⊥(E−x₀)) · S_{βε/4}(f(E))`.
    pub rhs: usize,
    /// The two factors of `rhs`.
    pub rhs_factors: (usize, usize),
    /// `lhs ≤ rhs`, or `None` when the hypotheses failed.
    pub holds: Option<bool>,
}

/// Largest singular value of a real matrix.
fn real_op_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// Verifies the localized covering inequality
/// `K_ε(E) ≤ K_{(1−t)ε}(Q^⊥(E − x₀)) · S_{βε/4}(f(E))`
/// on a fully computable instance: the derivative must expand by at least
/// `β` on the range of `Q`, its oscillation over the convex hull of `E`
/// must stay below `β/4`, and `t` must lie in the stated interval. All
/// covering/packing numbers are exact small-instance searches.
pub fn lemma42_verify(inst: &Lemma42Instance) -> Result<Lemma42Report> {
    if inst.points.is_empty() {
        return Err(NcError::Range("instance needs at least one point".into()));
    }
    if inst.points.len() > EXACT_LIMIT {
        return Err(NcError::Range(format!(
            "instance limited to {} points",
            EXACT_LIMIT
        )));
    }
    if inst.beta <= 0.0 || inst.eps <= 0.0 {
        return Err(NcError::Range("β and ε must be positive".into()));
    }
    let k = inst.x0.k();
    let n = inst.x0.n();
    let d = 2 * k * k * n;
    if inst.q.nrows() != d || inst.q.ncols() != d {
        return Err(NcError::Dimension(format!("projection must be {d}×{d}")));
    }
    let d0 = real_derivative(&inst.f, &inst.x0)?;

    // Hypothesis 1: expansion on the range of Q, probed on its columns.
    let mut gap_margin = f64::INFINITY;
    for j in 0..d {
        let col = inst.q.column(j).into_owned();
        let norm = col.norm();
        if norm > 1e-12 {
            let image = &d0 * &col;
            gap_margin = gap_margin.min(image.norm() / norm - inst.beta);
        }
    }
    if !gap_margin.is_finite() {
        gap_margin = 0.0; // Q = 0: the hypothesis is vacuous.
    }

    // Hypothesis 2: derivative oscillation over random hull points.
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
    let mut oscillation: f64 = 0.0;
    for _ in 0..inst.hull_samples {
        let mut weights: Vec<f64> = (0..inst.points.len()).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let mats: Vec<DMatrix<Complex64>> = (0..n)
            .map(|j| {
                let mut acc = DMatrix::<Complex64>::zeros(k, k);
                for (w, pt) in weights.iter().zip(&inst.points) {
                    acc += pt.mats()[j].map(|z| z * *w);
                }
                acc
            })
            .collect();
        let xi = MatrixTuple::new(k, mats)?;
        let dxi = real_derivative(&inst.f, &xi)?;
        oscillation = oscillation.max(real_op_norm(&(&dxi - &d0)));
    }

    // Hypothesis 3: t in the admissible interval.
    let t_lo = 1.0 - inst.beta / (8.0 * (real_op_norm(&d0) + 1.0));
    let t_interval = (t_lo, 1.0);
    let hypotheses_ok =
        gap_margin >= 0.0 && oscillation < inst.beta / 4.0 && inst.t > t_lo && inst.t < 1.0;

    // Both sides, exactly.
    let metric = Metric::L2Normalized { k };
    let e_cloud = PointCloud::from_tuples(&inst.points, metric)?;
    let x0_vec = realify_tuple(&inst.x0);
    let q_perp = DMatrix::<f64>::identity(d, d) - &inst.q;
    let a_points: Vec<DVector<f64>> =
        inst.points.iter().map(|p| &q_perp * (realify_tuple(p) - &x0_vec)).collect();
    let a_cloud = PointCloud::new(a_points, metric)?;
    let f_points: Vec<DVector<f64>> = inst
        .points
        .iter()
        .map(|p| {
            let imgs = eval_tuple(&inst.f, p)?;
            let tuple = MatrixTuple::new(k, imgs)?;
            Ok(realify_tuple(&tuple))
        })
        .collect::<Result<Vec<_>>>()?;
    let f_cloud = PointCloud::new(f_points, metric)?;

    let lhs = kcover(&e_cloud, inst.eps, CoverMode::Exact)?;
    let k_a = kcover(&a_cloud, (1.0 - inst.t) * inst.eps, CoverMode::Exact)?;
    let s_f = spack(&f_cloud, inst.beta * inst.eps / 4.0)?;
    let rhs = k_a.saturating_mul(s_f);

    Ok(Lemma42Report {
        hypotheses_ok,
        gap_margin,
        oscillation,
        t_interval,
        lhs,
        rhs,
        rhs_factors: (k_a, s_f),
        holds: hypotheses_ok.then_some(lhs <= rhs),
    })
}

// ---------------------------------------------------------------------------
// Bindings for derivative distance operators
// ---------------------------------------------------------------------------

/// The headline constant `B = 2np·c(F)²·(2n)^{2c(F)}` used in the binding
/// bounds, where `c(F)` and `n`, `p` are the complexity statistic, arity,
/// and length of the tuple.
pub fn b_constant(f: &PolyTuple) -> f64 {
    let (c, _) = f.stats();
    let n = f.arity() as f64;
    let p = f.len() as f64;
    2.0 * n * p * c * c * (2.0 * n).powf(2.0 * c)
}

/// Per-pair measurements recorded by [`build_binding`].
#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    /// Operator norm of `(T_{x,y} − DF(ξ₀)) ∘ Θ` on the realified spaces —
    /// the achieved binding constant for this pair.
    pub achieved: f64,
    /// Normalized trace of the compression projection `e`.
    pub trace: f64,
    /// `‖T_{x,y}(x−y) − (F(x)−F(y))‖₂` (mean-value identity residual).
    pub mean_value_residual: f64,
    /// `‖x−y‖₂`, the scale controlling the first-stage projections.
    pub eps_step1: f64,
    /// `‖x−ξ₀‖₂`, the scale controlling the second-stage projections.
    pub eps_step2: f64,
    /// Number of expanded difference terms across both stages.
    pub n_terms: usize,
    /// Every per-term fringe piece had rank ≤ `2k(1−tr e)` (within 1e−8).
    pub fringe_piece_rank_ok: bool,
    /// Largest per-term fringe piece rank observed.
    pub fringe_piece_rank_max: usize,
    /// Rank of the summed fringe sample per output coordinate (max over
    /// coordinates); recorded, the rank guarantee is per piece.
    pub fringe_sample_rank: usize,
    /// The rank budget `2k(1−tr e)`.
    pub fringe_rank_allowed: f64,
    /// `‖Σ pieces − (S−T₀)(ζ−eζe)‖₂` — consistency of the term
    /// decomposition with the assembled operator.
    pub fringe_sum_consistency: f64,
    /// Residual of `f(x)−f(y)−DF(ξ₀)(x−y)−A(x−y)` against the fringe
    /// sample, where `A = (S−T₀)Θ(S)`.
    pub residual_identity: f64,
    /// The compression projection (not serialized).
    #[serde(skip)]
    pub projection: DMatrix<Complex64>,
}

/// A binding of the distance operators of `F` over a ball, focused on the
/// derivative at the center: for every sampled distance operator `S`, a
/// compression `Θ(S): ξ ↦ (eξe)ᵢ` with `‖(S − DF(ξ₀))Θ(S)‖ ≤ epsilon`.
#[derive(Debug, Clone, Serialize)]
pub struct Binding {
    /// Realified derivative at the center, `2pk² × 2nk²` (not serialized).
    #[serde(skip)]
    pub focus: DMatrix<f64>,
    /// Per-pair measurements.
    pub pairs: Vec<PairReport>,
    /// Achieved binding constant: max of the per-pair norms.
    pub epsilon: f64,
    /// Asserted bound `B·R^{deg F}·ρ^{1/2}`.
    pub bound: f64,
    /// Smallest projection trace over the pairs.
    pub trace_floor: f64,
    /// Asserted trace bound `1 − B·ρ^{1/B}`.
    pub trace_bound: f64,
    /// The constant `B`.
    pub b_constant: f64,
    /// `deg F`.
    pub deg: usize,
}

impl Binding {
    /// Whether all asserted inequalities hold over the sampled pairs.
    pub fn ok(&self) -> bool {
        self.epsilon <= self.bound && self.trace_floor >= self.trace_bound
    }
}

/// All substitutions of a word replacing each letter `X_l^(*)` by either
/// itself or its shifted copy `X_{n+l}^(*)`, with the count of shifted
/// letters.
fn expand_word(w: &Monomial, n: u32) -> Vec<(Monomial, usize)> {
    let mut acc: Vec<(Vec<Letter>, usize)> = vec![(Vec::new(), 0)];
    for &l in &w.0 {
        let mut next = Vec::with_capacity(acc.len() * 2);
        for (prefix, h) in &acc {
            let mut keep = prefix.clone();
            keep.push(l);
            next.push((keep, *h));
            let mut shift = prefix.clone();
            shift.push(Letter::new(l.gen + n, l.starred));
            next.push((shift, h + 1));
        }
        acc = next;
    }
    acc.into_iter().map(|(ls, h)| (Monomial(ls), h)).collect()
}

/// Number of shifted (index > n) letters in both legs of a key.
fn h_count(key: &TensorKey, n: u32) -> usize {
    key.w.0.iter().chain(key.v.0.iter()).filter(|l| l.gen > n).count()
}

/// The 2n-variable expansion of `∂_j f` under `X_l → X_l + X_{n+l}`. With
/// `integral = true` each term is divided by `h+1`, where `h` counts the
/// shifted letters: this is exactly the symbolic form of
/// `∫₀¹ ∂_j f(X + tH) dt`, since a term with `h` shifted letters carries
/// `t^h` under `X_l → X_l + t·X_{n+l}`.
fn expanded_entry(f: &Polynomial, j: u32, n: u32, integral: bool) -> Result<TensorElement> {
    let d = partial_deriv_presplit(f, j)?;
    let mut out = TensorElement::zero();
    for (key, lam) in d.terms() {
        for (w, hw) in expand_word(&key.w, n) {
            for (v, hv) in expand_word(&key.v, n) {
                let h = hw + hv;
                let c = if integral { *lam / (h as f64 + 1.0) } else { *lam };
                out.add_term(w.clone(), v, key.d, c);
            }
        }
    }
    Ok(out)
}

/// The symbolic distance-operator matrix: `p×n` over 2n variables, entry
/// `(i,j)` the integral expansion of `∂_j f_i`. Evaluating it at the tuple
/// `(x, y−x)` yields `∫₀¹ DF(x + t(y−x)) dt`.
fn distance_operator_matrix(f: &PolyTuple, integral: bool) -> Result<TensorMatrix> {
    let n = f.arity();
    let mut tm = TensorMatrix::zero(f.len(), n, BlockShape::Plain);
    for (i, entry) in f.entries().iter().enumerate() {
        for j in 1..=n as u32 {
            tm.set(i, j as usize - 1, expanded_entry(entry, j, n as u32, integral)?);
        }
    }
    Ok(tm)
}

/// Keeps only the terms with at least one shifted letter — the part of the
/// expansion that vanishes when the perturbation is zero.
fn difference_terms(tm: &TensorMatrix, n: u32) -> Vec<(usize, usize, TensorKey, Complex64)> {
    let mut out = Vec::new();
    for i in 0..tm.rows() {
        for j in 0..tm.cols() {
            for (key, lam) in tm.get(i, j).terms() {
                if h_count(key, n) >= 1 {
                    out.push((i, j, key.clone(), *lam));
                }
            }
        }
    }
    out
}

/// Evaluates the letters of a word at a tuple, in order.
fn letter_matrices(w: &Monomial, xi: &MatrixTuple) -> Result<Vec<DMatrix<Complex64>>> {
    w.0.iter()
        .map(|l| {
            let m = xi
                .mats()
                .get(l.gen as usize - 1)
                .ok_or_else(|| NcError::Arity(format!("generator {} exceeds tuple arity", l.gen)))?;
            Ok(if l.starred { m.adjoint() } else { m.clone() })
        })
        .collect()
}

/// The per-term compression: a projection `e` controlling
/// `‖w(ξ)·e‖∞` and `‖e·v(ξ)‖∞` simultaneously via the two-sided product
/// construction (single-sided or trivial when a leg is empty).
fn term_projection(key: &TensorKey, xi: &MatrixTuple, c: f64) -> Result<DMatrix<Complex64>> {
    let ws = letter_matrices(&key.w, xi)?;
    let vs = letter_matrices(&key.v, xi)?;
    let k = xi.k();
    Ok(match (ws.is_empty(), vs.is_empty()) {
        (true, true) => DMatrix::identity(k, k),
        (false, true) => product_projection(&ws, c, ProductSide::Right)?.p,
        (true, false) => product_projection(&vs, c, ProductSide::Left)?.p,
        (false, false) => {
            let split = vs.len();
            let mut zs = vs;
            zs.extend(ws);
            product_projection(&zs, c, ProductSide::TwoSided(split))?.p
        }
    })
}

/// Realification of the complex-linear conjugation `ζ ↦ eζe` as a
/// `2k²×2k²` real block matrix.
fn conjugation_real(e: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = e.kronecker(&e.transpose());
    let kk = n.nrows();
    let mut out = DMatrix::<f64>::zeros(2 * kk, 2 * kk);
    for r in 0..kk {
        for s in 0..kk {
            let z = n[(r, s)];
            out[(r, s)] = z.re;
            out[(r, kk + s)] = -z.im;
            out[(kk + r, s)] = z.im;
            out[(kk + r, kk + s)] = z.re;
        }
    }
    out
}

/// Rank at an absolute-with-floor tolerance of `1e−8`.
fn rank_at_tol(m: &DMatrix<Complex64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let tol = 1e-8 * top.max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Constructs a binding for the distance operators of `F` over the
/// normalized-`ℓ²` ball of radius `ρ` around `ξ₀`, focused on `DF(ξ₀)`.
///
/// For each sampled pair `(x, y)` in the ball, the distance operator
/// `T_{x,y} = ∫₀¹ DF(x + t(y−x)) dt` is formed symbolically (exact integral
/// coefficients, no quadrature), the difference `T_{x,y} − DF(ξ₀)` is split
/// as `(T_{x,y} − DF(x)) + (DF(x) − DF(ξ₀))`, and every expanded term of
/// both stages receives a two-sided product projection with cut-off
/// constant `C = ε^{−1/(4 deg F)}` at that stage's scale `ε`. The meet `e`
/// of all per-term projections defines `Θ(T): ξ ↦ (eξᵢe)`, and the achieved
/// binding constant is the operator norm of the realified composite
/// `(T_{x,y} − DF(ξ₀)) ∘ Θ`.
///
/// The report also records, per pair: the mean-value identity residual
/// `‖T_{x,y}(x−y) − (F(x)−F(y))‖₂`, and a fringe sample
/// `(S−T₀)(ζ − eζe)` at `ζ = x−y` decomposed into its per-term pieces, each
/// of which has rank ≤ `2k(1−tr e)` (the summed sample's rank is recorded
/// but only the per-piece bound is guaranteed).
///
/// `r_bound` is the declared operator-norm bound `R > 1` on the center (and
/// hence, up to the ball radius, on the sampled points).
pub fn build_binding(
    f: &PolyTuple,
    xi0: &MatrixTuple,
    rho: f64,
    r_bound: f64,
    sample_pairs: usize,
    seed: u64,
) -> Result<Binding> {
    if !(0.0..1.0).contains(&rho) || rho <= 0.0 {
        return Err(NcError::Range("ball radius ρ must lie in (0,1)".into()));
    }
    if r_bound <= 1.0 {
        return Err(NcError::Range("norm bound R must exceed 1".into()));
    }
    if f.arity() != xi0.n() {
        return Err(NcError::Arity(format!(
            "tuple has {} coordinates but the map has arity {}",
            xi0.n(),
            f.arity()
        )));
    }
    let k = xi0.k();
    let sqrt_k = (k as f64).sqrt();
    for (j, m) in xi0.mats().iter().enumerate() {
        if op_norm(m) + sqrt_k * rho >= r_bound {
            return Err(NcError::Precondition(format!(
                "coordinate {} leaves the operator-norm ball of radius R = {} once perturbed",
                j + 1,
                r_bound
            )));
        }
    }
    let n = f.arity();
    let p = f.len();
    let deg = f.entries().iter().map(|q| q.degree()).max().unwrap_or(0);
    let b = b_constant(f);
    let bound = b * r_bound.powi(deg as i32) * rho.sqrt();
    let trace_bound = 1.0 - b * rho.powf(1.0 / b);

    let focus = real_derivative(f, xi0)?;
    let integral_matrix = distance_operator_matrix(f, true)?;
    let point_matrix = distance_operator_matrix(f, false)?;
    let step1_terms = difference_terms(&integral_matrix, n as u32);
    let step2_terms = difference_terms(&point_matrix, n as u32);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_in_ball = |rng: &mut ChaCha8Rng| -> Result<MatrixTuple> {
        let dirs: Vec<DMatrix<Complex64>> =
            (0..n).map(|_| complex_gaussian_matrix(k, rng)).collect();
        let dir = MatrixTuple::new(k, dirs)?;
        let norm = tuple_dist(&dir, &MatrixTuple::new(k, vec![DMatrix::zeros(k, k); n])?)?;
        let radius = rho * rng.gen::<f64>();
        let scale = if norm > 0.0 { radius / norm } else { 0.0 };
        let mats = xi0
            .mats()
            .iter()
            .zip(dir.mats())
            .map(|(base, d)| base + d.map(|z| z * scale))
            .collect();
        MatrixTuple::new(k, mats)
    };

    let dim = 2 * k * k;
    let mut pairs = Vec::with_capacity(sample_pairs);
    for _ in 0..sample_pairs {
        let x = sample_in_ball(&mut rng)?;
        let y = sample_in_ball(&mut rng)?;
        let eps1 = tuple_dist(&x, &y)?.max(1e-300);
        let eps2 = tuple_dist(&x, xi0)?.max(1e-300);
        let h1: Vec<DMatrix<Complex64>> =
            y.mats().iter().zip(x.mats()).map(|(a, b)| a - b).collect();
        let xh1 = MatrixTuple::new(k, [x.mats().to_vec(), h1].concat())?;
        let h2: Vec<DMatrix<Complex64>> =
            x.mats().iter().zip(xi0.mats()).map(|(a, b)| a - b).collect();
        let xh2 = MatrixTuple::new(k, [xi0.mats().to_vec(), h2].concat())?;

        // Meet of all per-term two-sided compressions across both stages.
        let mut e = DMatrix::<Complex64>::identity(k, k);
        let exponent = -1.0 / (4.0 * (deg.max(1)) as f64);
        let c1 = eps1.powf(exponent).max(1.0 + 1e-9);
        let c2 = eps2.powf(exponent).max(1.0 + 1e-9);
        for (_, _, key, _) in &step1_terms {
            e = meet(&e, &term_projection(key, &xh1, c1)?)?;
        }
        for (_, _, key, _) in &step2_terms {
            e = meet(&e, &term_projection(key, &xh2, c2)?)?;
        }
        let trace = e.trace().re / k as f64;

        // Achieved constant: operator norm of (S − T₀) ∘ Θ on the realified
        // spaces, with S = T_{x,y} evaluated from the symbolic integral.
        let s_mat = real_linear_matrix(&integral_matrix, &xh1)?;
        let diff = &s_mat - &focus;
        let conj = conjugation_real(&e);
        let mut theta = DMatrix::<f64>::zeros(n * dim, n * dim);
        for j in 0..n {
            theta.view_mut((j * dim, j * dim), (dim, dim)).copy_from(&conj);
        }
        let achieved = real_op_norm(&(&diff * &theta));

        // Mean-value identity: T_{x,y}(x−y) = F(x) − F(y), exactly up to
        // floating point.
        let zeta: Vec<DMatrix<Complex64>> =
            x.mats().iter().zip(y.mats()).map(|(a, b)| a - b).collect();
        let zeta_tuple = MatrixTuple::new(k, zeta.clone())?;
        let zeta_vec = realify_tuple(&zeta_tuple);
        let applied = &s_mat * &zeta_vec;
        let fx = eval_tuple(f, &x)?;
        let fy = eval_tuple(f, &y)?;
        let mut mv = 0.0;
        for i in 0..p {
            let got = unrealify(&applied.rows(i * dim, dim).into_owned(), k);
            mv += hs_norm(&(&got - (&fx[i] - &fy[i]))).powi(2);
        }
        let mean_value_residual = mv.sqrt();

        // Fringe sample at ζ = x − y: per-term pieces and their ranks.
        let eta: Vec<DMatrix<Complex64>> = zeta.iter().map(|z| z - &e * z * &e).collect();
        let mut piece_rank_max = 0usize;
        let mut rows: Vec<DMatrix<Complex64>> = vec![DMatrix::zeros(k, k); p];
        let apply_terms = |terms: &[(usize, usize, TensorKey, Complex64)],
                               xi: &MatrixTuple,
                               rows: &mut Vec<DMatrix<Complex64>>,
                               piece_rank_max: &mut usize|
         -> Result<()> {
            for (i, j, key, lam) in terms {
                let w = eval_word(&key.w, xi)?;
                let v = eval_word(&key.v, xi)?;
                let arg = if key.d == 1 { eta[*j].adjoint() } else { eta[*j].clone() };
                let piece = (w * arg * v).map(|z| z * lam);
                *piece_rank_max = (*piece_rank_max).max(rank_at_tol(&piece));
                rows[*i] += piece;
            }
            Ok(())
        };
        apply_terms(&step1_terms, &xh1, &mut rows, &mut piece_rank_max)?;
        apply_terms(&step2_terms, &xh2, &mut rows, &mut piece_rank_max)?;
        let allowed = 2.0 * k as f64 * (1.0 - trace);
        let fringe_piece_rank_ok = (piece_rank_max as f64) <= allowed + 1e-8;
        let fringe_sample_rank = rows.iter().map(rank_at_tol).max().unwrap_or(0);

        // Consistency: the summed pieces equal the assembled operator
        // applied to ζ − eζe.
        let eta_tuple = MatrixTuple::new(k, eta)?;
        let assembled = &diff * realify_tuple(&eta_tuple);
        let mut cons = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let got = unrealify(&assembled.rows(i * dim, dim).into_owned(), k);
            cons += hs_norm(&(&got - row)).powi(2);
        }
        let fringe_sum_consistency = cons.sqrt();

        // Residual identity: f(x)−f(y)−DF(ξ₀)(x−y)−A(x−y) equals the fringe
        // sample, with A = (S−T₀)Θ.
        let focus_applied = &focus * &zeta_vec;
        let a_applied = &diff * (&theta * &zeta_vec);
        let mut resid = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let d0 = unrealify(&focus_applied.rows(i * dim, dim).into_owned(), k);
            let az = unrealify(&a_applied.rows(i * dim, dim).into_owned(), k);
            let lhs = &fx[i] - &fy[i] - d0 - az;
            resid += hs_norm(&(lhs - row)).powi(2);
        }
        let residual_identity = resid.sqrt();

        pairs.push(PairReport {
            achieved,
            trace,
            mean_value_residual,
            eps_step1: eps1,
            eps_step2: eps2,
            n_terms: step1_terms.len() + step2_terms.len(),
            fringe_piece_rank_ok,
            fringe_piece_rank_max: piece_rank_max,
            fringe_sample_rank,
            fringe_rank_allowed: allowed,
            fringe_sum_consistency,
            residual_identity,
            projection: e,
        });
    }

    let epsilon = pairs.iter().map(|p| p.achieved).fold(0.0, f64::max);
    let trace_floor = pairs.iter().map(|p| p.trace).fold(1.0, f64::min);
    Ok(Binding {
        focus,
        pairs,
        epsilon,
        bound,
        trace_floor,
        trace_bound,
        b_constant: b,
        deg,
    })
}

/// The fringe covering bound, reported per `k²` as a base and an exponent
/// coefficient: `K_ε(fringe) ≤ base^(coefficient·k²)` with
/// `base = D_p·(B·R^B + 1)²·√p / ε` and `coefficient = 16·B³·ρ^{1/(2B)}`.
#[derive(Debug, Clone, Serialize)]
pub struct FringeBound {
    /// The base of the bound.
    pub base: f64,
    /// The exponent coefficient multiplying `k²`.
    pub coefficient: f64,
    /// `coefficient · ln(base)` — the log of the bound per `k²`.
    pub log_bound_per_k2: f64,
}

/// Evaluates the fringe covering bound from its parameters. `d_p` is the
/// caller-supplied quasi-norm ball constant.
pub fn fringe_cover_bound(
    b: f64,
    r: f64,
    rho: f64,
    p: usize,
    eps: f64,
    d_p: f64,
) -> Result<FringeBound> {
    if b <= 0.0 || r <= 0.0 || !(0.0..1.0).contains(&rho) || rho <= 0.0 {
        return Err(NcError::Range("need B, R > 0 and ρ ∈ (0,1)".into()));
    }
    if p == 0 || eps <= 0.0 || d_p <= 0.0 {
        return Err(NcError::Range("need p ≥ 1, ε > 0, D_p > 0".into()));
    }
    let base = d_p * (b * r.powf(b) + 1.0).powi(2) * (p as f64).sqrt() / eps;
    let coefficient = 16.0 * b.powi(3) * rho.powf(1.0 / (2.0 * b));
    Ok(FringeBound { base, coefficient, log_bound_per_k2: coefficient * base.ln() })
}

// ---------------------------------------------------------------------------
// Empirical box-counting fit
// ---------------------------------------------------------------------------

/// Covering/packing numbers across a radius grid with a least-squares
/// log-log slope.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringReport {
    /// Radius grid (as given).
    pub grid: Vec<f64>,
    /// Covering numbers at each radius.
    pub k: Vec<usize>,
    /// Packing numbers at each radius.
    pub s: Vec<usize>,
    /// Least-squares slope of `log K_ε` against `|log ε|`.
    pub slope: f64,
    /// Fit intercept.
    pub intercept: f64,
    /// Root-mean-square fit residual.
    pub residual: f64,
    /// Fixed caveat describing what the slope is (and is not).
    pub label: String,
}

impl CoveringReport {
    /// Plot-ready CSV: one `eps,K,S` row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,K,S\n");
        for ((e, k), s) in self.grid.iter().zip(&self.k).zip(&self.s) {
            out.push_str(&format!("{e},{k},{s}\n"));
        }
        out
    }
}

/// Computes covering/packing numbers over a radius grid (exact when the
/// cloud is small, greedy otherwise) and fits `log K_ε` against `|log ε|`.
/// The slope is an empirical box-counting statistic of the finite cloud,
/// not an estimator of any asymptotic entropy dimension.
pub fn dim_fit(cloud: &PointCloud, grid: &[f64]) -> Result<CoveringReport> {
    if grid.len() < 3 {
        return Err(NcError::Range("slope fit needs at least 3 grid radii".into()));
    }
    if grid.iter().any(|&e| e <= 0.0) {
        return Err(NcError::Range("grid radii must be positive".into()));
    }
    let mode = if cloud.len() <= EXACT_LIMIT { CoverMode::Exact } else { CoverMode::Greedy };
    let mut k = Vec::with_capacity(grid.len());
    let mut s = Vec::with_capacity(grid.len());
    for &eps in grid {
        k.push(kcover(cloud, eps, mode)?);
        s.push(spack(cloud, eps)?);
    }
    // Least squares of log K against |log ε|.
    let xs: Vec<f64> = grid.iter().map(|e| e.ln().abs()).collect();
    let ys: Vec<f64> = k.iter().map(|&v| (v as f64).ln()).collect();
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(NcError::Range("degenerate radius grid for slope fit".into()));
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(CoveringReport {
        grid: grid.to_vec(),
        k,
        s,
        slope,
        intercept,
        residual,
        label: "empirical box-counting slope of a finite cloud; not an entropy-dimension estimator"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::parse;
    use crate::repn::{sample, SampleKind};

    fn line_cloud(xs: &[f64]) -> PointCloud {
        PointCloud::new(xs.iter().map(|&x| DVector::from_vec(vec![x])).collect(), Metric::Euclidean)
            .unwrap()
    }

    fn random_cloud(dim: usize, count: usize, seed: u64, scale: f64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| DVector::from_fn(dim, |_, _| (rng.gen::<f64>() - 0.5) * scale))
            .collect();
        PointCloud::new(points, Metric::Euclidean).unwrap()
    }

    #[test]
    fn cover_two_points_center_restricted_vs_midpoint() {
        let cloud = line_cloud(&[0.0, 1.0]);
        let restricted =
            kcover_with_centers(&cloud, 0.6, cloud.points()).unwrap();
        assert_eq!(restricted, 2);
        assert_eq!(kcover(&cloud, 0.6, CoverMode::Exact).unwrap(), 1);
    }

    #[test]
    fn cover_singleton_and_collinear() {
        assert_eq!(kcover(&line_cloud(&[3.0]), 0.1, CoverMode::Exact).unwrap(), 1);
        let cloud = line_cloud(&[0.0, 1.0, 2.0]);
        let restricted = kcover_with_centers(&cloud, 1.1, cloud.points()).unwrap();
        assert_eq!(restricted, 1);
    }

    #[test]
    fn greedy_cover_upper_bounds_exact() {
        let cloud = random_cloud(3, 18, 7, 2.0);
        for eps in [0.3, 0.6, 1.2] {
            let exact = kcover(&cloud, eps, CoverMode::Exact).unwrap();
            let greedy = kcover(&cloud, eps, CoverMode::Greedy).unwrap();
            assert!(exact <= greedy, "exact {exact} > greedy {greedy} at eps {eps}");
        }
    }

    #[test]
    fn packing_small_examples() {
        let cloud = line_cloud(&[0.0, 1.0]);
        assert_eq!(spack(&cloud, 0.6).unwrap(), 2);
        assert_eq!(spack(&cloud, 1.5).unwrap(), 1);
        let square = PointCloud::new(
            vec![
                DVector::from_vec(vec![0.0, 0.0]),
                DVector::from_vec(vec![1.0, 0.0]),
                DVector::from_vec(vec![0.0, 1.0]),
                DVector::from_vec(vec![1.0, 1.0]),
            ],
            Metric::Euclidean,
        )
        .unwrap();
        assert_eq!(spack(&square, 1.0).unwrap(), 4);
    }

    #[test]
    fn chain_on_two_points_and_singleton() {
        let rep = verify_chain(&line_cloud(&[0.0, 1.0]), 0.6).unwrap();
        assert_eq!((rep.k_eps, rep.s_eps, rep.k_half), (1, 2, 2));
        assert!(rep.holds);
        let single = verify_chain(&line_cloud(&[5.0]), 0.3).unwrap();
        assert_eq!((single.k_eps, single.s_eps, single.k_half), (1, 1, 1));
        assert!(single.holds);
    }

    #[test]
    fn chain_on_random_clouds_over_grid() {
        for seed in 0..10u64 {
            let cloud = random_cloud(3, 8, seed, 2.0);
            for j in 0..5 {
                let eps = 1.2 * 0.5f64.powi(j);
                let rep = verify_chain(&cloud, eps).unwrap();
                assert!(rep.holds, "chain failed at seed {seed}, eps {eps}: {rep:?}");
                assert!(rep.fattening.is_some());
            }
        }
    }

    #[test]
    fn sumset_two_intervals() {
        let a = line_cloud(&[0.0, 1.0]);
        let rep = sumset_verify(&[a.clone(), a], 0.6).unwrap();
        assert!(rep.k_sum <= 1);
        assert!(rep.holds);
    }

    #[test]
    fn sumset_with_singleton_factor_and_random_sets() {
        let a = line_cloud(&[0.0, 1.0, 2.5]);
        let b = line_cloud(&[4.0]);
        assert!(sumset_verify(&[a, b], 0.7).unwrap().holds);
        for seed in 0..10u64 {
            let a = random_cloud(2, 4, 100 + seed, 1.5);
            let b = random_cloud(2, 4, 200 + seed, 1.5);
            let rep = sumset_verify(&[a, b], 0.4).unwrap();
            assert!(rep.holds, "sumset chain failed at seed {seed}: {rep:?}");
        }
    }

    #[test]
    fn ball_bound_arithmetic() {
        let r = rogers_bound(16, 0.5, 1.0, 1.0).unwrap();
        assert!((r.value - 67_108_864.0).abs() / 67_108_864.0 < 1e-12);
        assert!(r.in_regime);
        let unit = rogers_bound(9, 1.0, 1.0, 2.5).unwrap();
        assert!((unit.value - 2.5 * 9f64.powf(2.5)).abs() < 1e-9 * unit.value);
        let one = rogers_bound(12, 0.25, 1.0, 1.0).unwrap();
        let two = rogers_bound(12, 0.25, 2.0, 1.0).unwrap();
        assert!((two.value / one.value - 2f64.powi(12)).abs() < 1e-6 * 2f64.powi(12));
        assert!(!rogers_bound(4, 0.5, 1.0, 1.0).unwrap().in_regime);
    }

    fn disk_instance(seed: u64) -> Lemma42Instance {
        // k = 1, n = 2: points are pairs of complex numbers near the origin;
        // the map keeps the first coordinate.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tuples = Vec::new();
        for _ in 0..10 {
            let mats = (0..2)
                .map(|_| {
                    DMatrix::from_vec(
                        1,
                        1,
                        vec![Complex64::new(
                            0.2 * (rng.gen::<f64>() - 0.5),
                            0.2 * (rng.gen::<f64>() - 0.5),
                        )],
                    )
                })
                .collect();
            tuples.push(MatrixTuple::new(1, mats).unwrap());
        }
        let x0 = tuples[0].clone();
        let mut q = DMatrix::<f64>::zeros(4, 4);
        q[(0, 0)] = 1.0;
        q[(1, 1)] = 1.0;
        Lemma42Instance {
            points: tuples,
            f: PolyTuple::new(vec![parse("X1", 2).unwrap()]).unwrap(),
            x0,
            q,
            beta: 1.0,
            t: 0.95,
            eps: 0.1,
            hull_samples: 20,
            seed,
        }
    }

    #[test]
    fn gap_inequality_on_disk_instances() {
        for seed in 0..6u64 {
            let rep = lemma42_verify(&disk_instance(seed)).unwrap();
            assert!(rep.hypotheses_ok, "hypotheses failed at seed {seed}: {rep:?}");
            assert_eq!(rep.holds, Some(true), "inequality failed at seed {seed}: {rep:?}");
        }
    }

    #[test]
    fn gap_inequality_singleton_both_sides_one() {
        let mut inst = disk_instance(3);
        inst.points.truncate(1);
        inst.x0 = inst.points[0].clone();
        let rep = lemma42_verify(&inst).unwrap();
        assert_eq!(rep.lhs, 1);
        assert_eq!(rep.rhs, 1);
        assert_eq!(rep.holds, Some(true));
    }

    #[test]
    fn gap_inequality_identity_reduction() {
        // f the identity, Q the whole space, β = 1: the inequality reduces
        // to K_ε(E) ≤ K_{(1−t)ε}(E−x₀)·S_{ε/4}(E).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tuples: Vec<MatrixTuple> = (0..8)
            .map(|_| {
                MatrixTuple::new(
                    1,
                    vec![DMatrix::from_vec(
                        1,
                        1,
                        vec![Complex64::new(
                            0.1 * (rng.gen::<f64>() - 0.5),
                            0.1 * (rng.gen::<f64>() - 0.5),
                        )],
                    )],
                )
                .unwrap()
            })
            .collect();
        let inst = Lemma42Instance {
            x0: tuples[0].clone(),
            points: tuples,
            f: PolyTuple::new(vec![parse("X1", 1).unwrap()]).unwrap(),
            q: DMatrix::identity(2, 2),
            beta: 1.0,
            t: 0.95,
            eps: 0.05,
            hull_samples: 10,
            seed: 11,
        };
        let rep = lemma42_verify(&inst).unwrap();
        assert!(rep.hypotheses_ok);
        assert_eq!(rep.holds, Some(true));
    }

    #[test]
    fn b_constant_of_square() {
        let f = PolyTuple::new(vec![parse("X1^2", 1).unwrap()]).unwrap();
        assert_eq!(b_constant(&f), 128.0);
    }

    #[test]
    fn binding_linear_map_is_exact() {
        // Degree-1 map: every distance operator equals the focus, the
        // binding constant vanishes, and no compression is needed.
        let f = PolyTuple::new(vec![parse("2 X1 + X2'", 2).unwrap()]).unwrap();
        let xi0 = sample(SampleKind::GueSelfadjoint, 4, 2, 5).unwrap();
        let binding = build_binding(&f, &xi0, 0.05, 4.0, 4, 9).unwrap();
        assert!(binding.epsilon < 1e-12, "epsilon = {}", binding.epsilon);
        for pair in &binding.pairs {
            assert!((pair.trace - 1.0).abs() < 1e-12);
            assert!(pair.mean_value_residual < 1e-9);
        }
        assert!(binding.ok());
    }

    #[test]
    fn binding_square_instance_bounds() {
        let f = PolyTuple::new(vec![parse("X1^2", 1).unwrap()]).unwrap();
        let xi0 = sample(SampleKind::GueSelfadjoint, 8, 1, 2).unwrap();
        let binding = build_binding(&f, &xi0, 0.01, 2.0, 6, 42).unwrap();
        assert_eq!(binding.deg, 2);
        assert!((binding.bound - 128.0 * 4.0 * 0.1).abs() < 1e-9);
        assert!(binding.ok(), "epsilon {} bound {}", binding.epsilon, binding.bound);
        for pair in &binding.pairs {
            assert!(pair.mean_value_residual < 1e-9, "mv {}", pair.mean_value_residual);
            assert!(pair.fringe_sum_consistency < 1e-9);
            assert!(pair.residual_identity < 1e-9);
            assert!(pair.fringe_piece_rank_ok);
        }
    }

    #[test]
    fn binding_cubic_exercises_projections() {
        // Degree 3 in two variables: nonempty inner words, so the two-sided
        // product compressions are non-trivial.
        let f = PolyTuple::new(vec![parse("X1 X2 X1", 2).unwrap(), parse("X2^3", 2).unwrap()])
            .unwrap();
        let xi0 = sample(SampleKind::GueSelfadjoint, 6, 2, 8).unwrap();
        let binding = build_binding(&f, &xi0, 0.01, 3.0, 4, 17).unwrap();
        assert!(binding.ok(), "epsilon {} bound {}", binding.epsilon, binding.bound);
        for pair in &binding.pairs {
            assert!(pair.mean_value_residual < 1e-9, "mv {}", pair.mean_value_residual);
            assert!(pair.fringe_sum_consistency < 1e-9, "cons {}", pair.fringe_sum_consistency);
            assert!(pair.residual_identity < 1e-9);
            assert!(pair.fringe_piece_rank_ok,
                "piece rank {} > allowed {}", pair.fringe_piece_rank_max, pair.fringe_rank_allowed);
        }
    }

    #[test]
    fn fringe_bound_arithmetic() {
        let fb = fringe_cover_bound(1.0, 1.0, 0.01, 1, 0.5, 1.0).unwrap();
        assert!((fb.base - 8.0).abs() < 1e-12);
        assert!((fb.coefficient - 1.6).abs() < 1e-12);
        let doubled = fringe_cover_bound(1.0, 1.0, 0.01, 1, 1.0, 1.0).unwrap();
        assert!((doubled.base - 4.0).abs() < 1e-12);
        let tiny = fringe_cover_bound(1.0, 1.0, 1e-12, 1, 0.5, 1.0).unwrap();
        assert!(tiny.coefficient < 1e-4);
    }

    #[test]
    fn slope_of_segment_near_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let points: Vec<DVector<f64>> =
            (0..10_000).map(|_| DVector::from_vec(vec![rng.gen::<f64>()])).collect();
        let cloud = PointCloud::new(points, Metric::Euclidean).unwrap();
        let rep = dim_fit(&cloud, &[0.2, 0.1, 0.05]).unwrap();
        assert!((rep.slope - 1.0).abs() < 0.2, "slope {}", rep.slope);
        assert!(rep.label.contains("empirical"));
    }

    #[test]
    fn slope_of_square_near_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points: Vec<DVector<f64>> = (0..10_000)
            .map(|_| DVector::from_vec(vec![rng.gen::<f64>(), rng.gen::<f64>()]))
            .collect();
        let cloud = PointCloud::new(points, Metric::Euclidean).unwrap();
        let rep = dim_fit(&cloud, &[0.2, 0.1, 0.05]).unwrap();
        assert!((rep.slope - 2.0).abs() < 0.3, "slope {}", rep.slope);
    }

    #[test]
    fn slope_of_singleton_is_zero() {
        let cloud = line_cloud(&[1.0]);
        let rep = dim_fit(&cloud, &[0.2, 0.1, 0.05]).unwrap();
        assert_eq!(rep.slope, 0.0);
        assert_eq!(rep.k, vec![1, 1, 1]);
    }

    #[test]
    fn operator_norm_metric_reads_tuples() {
        let x = sample(SampleKind::HaarUnitary, 3, 2, 1).unwrap();
        let y = sample(SampleKind::HaarUnitary, 3, 2, 2).unwrap();
        let cloud = PointCloud::from_tuples(
            &[x.clone(), y.clone()],
            Metric::OperatorNorm { k: 3, n: 2 },
        )
        .unwrap();
        let d = cloud.dist(&cloud.points()[0], &cloud.points()[1]);
        let expect = x
            .mats()
            .iter()
            .zip(y.mats())
            .map(|(a, b)| op_norm(&(a - b)))
            .fold(0.0, f64::max);
        assert!((d - expect).abs() < 1e-12);
    }

    #[test]
    fn csv_has_one_row_per_radius() {
        let cloud = line_cloud(&[0.0, 0.3, 0.7, 1.0]);
        let rep = dim_fit(&cloud, &[0.5, 0.25, 0.125]).unwrap();
        assert_eq!(rep.to_csv().lines().count(), 4);
    }
}
