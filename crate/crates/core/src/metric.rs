//! Finite metric measure spaces with geodesic (shortest-path) metrics,
//! open balls, greedy nets and volume-regularity diagnostics.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Exhaustive triangle-inequality validation up to this size, sampled above.
const TRIANGLE_EXHAUSTIVE_CAP: usize = 300;
const TRIANGLE_SAMPLES: usize = 100_000;

#[derive(Debug, Clone)]
pub struct MetricMeasureSpace {
    n: usize,
    dist: Vec<f64>,
    measure: Vec<f64>,
    basepoint: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapKey(f64);

impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn dijkstra(adj: &[Vec<(usize, f64, f64)>], source: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((HeapKey(0.0), source)));
    while let Some(Reverse((HeapKey(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len, _) in &adj[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse((HeapKey(nd), w)));
            }
        }
    }
    dist
}

/// All-pairs shortest-path metric of a connected weighted graph, with the
/// graph's vertex measure. The triangle inequality is checked exhaustively
/// for small spaces and on sampled triples above the cap.
pub fn geodesic_space(g: &WeightedGraph, basepoint: usize) -> Result<MetricMeasureSpace> {
    let n = g.vertex_count();
    if basepoint >= n {
        return Err(Error::InvalidArgument(format!(
            "basepoint {basepoint} outside 0..{n}"
        )));
    }
    let adj = g.adjacency();
    let mut dist = vec![0.0; n * n];
    for v in 0..n {
        let row = dijkstra(&adj, v);
        for (w, d) in row.into_iter().enumerate() {
            if !d.is_finite() {
                // connectivity is enforced at graph construction, so this
                // indicates internal corruption rather than bad input
                return Err(Error::InvalidGraph(format!(
                    "no path between {v} and {w}"
                )));
            }
            dist[v * n + w] = d;
        }
    }
    let space = MetricMeasureSpace {
        n,
        dist,
        measure: g.measure().to_vec(),
        basepoint,
    };
    space.validate_metric(0)?;
    Ok(space)
}

impl MetricMeasureSpace {
    pub fn from_matrix(
        dist: Vec<f64>,
        measure: Vec<f64>,
        basepoint: usize,
    ) -> Result<MetricMeasureSpace> {
        let n = measure.len();
        if dist.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "distance matrix has {} entries for {} points",
                dist.len(),
                n
            )));
        }
        if basepoint >= n {
            return Err(Error::InvalidArgument(format!(
                "basepoint {basepoint} outside 0..{n}"
            )));
        }
        for m in &measure {
            if !(*m > 0.0) {
                return Err(Error::InvalidArgument("non-positive measure".into()));
            }
        }
        let s = MetricMeasureSpace {
            n,
            dist,
            measure,
            basepoint,
        };
        s.validate_metric(0)?;
        Ok(s)
    }

    fn validate_metric(&self, seed: u64) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "nonzero diagonal at {i}"
                )));
            }
            for j in 0..i {
                let dij = self.d(i, j);
                if dij != self.d(j, i) {
                    return Err(Error::InvalidArgument(format!(
                        "asymmetric distance at ({i},{j})"
                    )));
                }
                if !(dij > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "non-positive distance {dij} at ({i},{j})"
                    )));
                }
            }
        }
        let check = |i: usize, j: usize, k: usize| -> Result<()> {
            let slack = self.d(i, j) + self.d(j, k) - self.d(i, k);
            // geodesic matrices satisfy this exactly; allow only rounding noise
            if slack < -1e-12 * self.d(i, k).max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "triangle inequality violated at ({i},{j},{k}) by {slack:e}"
                )));
            }
            Ok(())
        };
        if n <= TRIANGLE_EXHAUSTIVE_CAP {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        check(i, j, k)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..TRIANGLE_SAMPLES {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                let k = rng.random_range(0..n);
                check(i, j, k)?;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.measure[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    /// Open ball: strictly d(center, z) < r.
    pub fn ball(&self, center: usize, r: f64) -> Vec<usize> {
        (0..self.n).filter(|&z| self.d(center, z) < r).collect()
    }

    /// Closed ball: d(center, z) <= r.
    pub fn closed_ball(&self, center: usize, r: f64) -> Vec<usize> {
        (0..self.n).filter(|&z| self.d(center, z) <= r).collect()
    }

    pub fn ball_mass(&self, center: usize, r: f64) -> f64 {
        (0..self.n)
            .filter(|&z| self.d(center, z) < r)
            .map(|z| self.measure[z])
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m = m.max(self.d(i, j));
            }
        }
        m
    }

    /// Greedy farthest-point net. The traversal starts at `seed % n` and is
    /// fully deterministic; ties break toward the lowest vertex id. Points are
    /// added while the worst covering radius exceeds eps, which yields a net
    /// that covers at radius eps and is pairwise more than eps separated.
    pub fn epsilon_net(&self, eps: f64, seed: u64) -> Result<Vec<usize>> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be > 0, got {eps}")));
        }
        let start = (seed as usize) % self.n;
        let mut net = vec![start];
        let mut nearest: Vec<f64> = (0..self.n).map(|v| self.d(start, v)).collect();
        loop {
            let mut far = 0usize;
            let mut far_d = -1.0;
            for v in 0..self.n {
                if nearest[v] > far_d {
                    far_d = nearest[v];
                    far = v;
                }
            }
            if far_d <= eps {
                break;
            }
            net.push(far);
            for v in 0..self.n {
                let d = self.d(far, v);
                if d < nearest[v] {
                    nearest[v] = d;
                }
            }
        }
        Ok(net)
    }

    /// Covering radius of a point subset: sup over the space of the distance
    /// to the nearest subset point.
    pub fn covering_radius(&self, subset: &[usize]) -> f64 {
        let mut worst = 0.0f64;
        for v in 0..self.n {
            let mut best = f64::INFINITY;
            for &s in subset {
                best = best.min(self.d(v, s));
            }
            worst = worst.max(best);
        }
        worst
    }

    pub fn min_separation(&self, subset: &[usize]) -> f64 {
        let mut best = f64::INFINITY;
        for (i, &a) in subset.iter().enumerate() {
            for &b in subset.iter().skip(i + 1) {
                best = best.min(self.d(a, b));
            }
        }
        best
    }

    /// Smallest positive pairwise distance; the mesh scale of the space.
    pub fn mesh(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.d(i, j);
                if d > 0.0 {
                    best = best.min(d);
                }
            }
        }
        best
    }
}

/// Gaps |diam_n - diam_N| of a sequence of diameters against the last entry.
pub fn diameter_sequence_gaps(diams: &[f64]) -> Vec<f64> {
    match diams.last() {
        None => Vec::new(),
        Some(&last) => diams[..diams.len() - 1]
            .iter()
            .map(|d| (d - last).abs())
            .collect(),
    }
}

/// Piecewise-power volume profile, continuous and increasing:
/// V(r) = (r/x0)^a_small for r <= x0, (r/x0)^a_large beyond.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VolumeProfile {
    pub exponent_small: f64,
    pub exponent_large: f64,
    pub crossover_scale: f64,
    pub c_v: f64,
}

impl VolumeProfile {
    pub fn new(exponent_small: f64, exponent_large: f64, crossover_scale: f64, c_v: f64) -> Self {
        assert!(exponent_small > 0.0 && exponent_large > 0.0 && crossover_scale > 0.0);
        assert!(c_v >= 1.0);
        VolumeProfile {
            exponent_small,
            exponent_large,
            crossover_scale,
            c_v,
        }
    }

    pub fn power(alpha: f64) -> Self {
        Self::new(alpha, alpha, 1.0, 1.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let x = r / self.crossover_scale;
        if x <= 1.0 {
            x.powf(self.exponent_small)
        } else {
            x.powf(self.exponent_large)
        }
    }

    /// Checks the doubling sandwich
    /// C_v^{-1}(R/r)^a <= V(R)/V(r) <= C_v (R/r)^a' on a sampled grid,
    /// with a = min, a' = max of the two exponents.
    pub fn doubling_ok(&self, r_grid: &[f64]) -> bool {
        let a = self.exponent_small.min(self.exponent_large);
        let ap = self.exponent_small.max(self.exponent_large);
        for (i, &r) in r_grid.iter().enumerate() {
            for &rr in &r_grid[i..] {
                if rr < r {
                    continue;
                }
                let ratio = self.eval(rr) / self.eval(r);
                let lo = (rr / r).powf(a) / self.c_v;
                let hi = (rr / r).powf(ap) * self.c_v;
                if ratio < lo * (1.0 - 1e-12) || ratio > hi * (1.0 + 1e-12) {
                    return false;
                }
            }
        }
        true
    }
}

/// Annulus-decay exponent from a doubling constant.
pub fn annulus_gamma(c_v: f64) -> f64 {
    (1.0 + c_v.powi(-4)).ln() / 3f64.ln()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub measured_c_v: f64,
    pub gamma: f64,
    pub worst_center: usize,
    pub worst_radius: f64,
    pub pass: bool,
}

/// Smallest constant C making C^{-1}V(r) <= m(B(x,r)) <= C V(r) over all
/// centers and sampled radii; pass iff it stays at or under `bound`.
pub fn volume_regularity(
    space: &MetricMeasureSpace,
    v: &VolumeProfile,
    r_grid: &[f64],
    bound: f64,
) -> RegularityReport {
    let mut worst = 1.0f64;
    let mut worst_center = 0;
    let mut worst_radius = r_grid.first().copied().unwrap_or(0.0);
    for x in 0..space.len() {
        for &r in r_grid {
            let mb = space.ball_mass(x, r);
            let vr = v.eval(r);
            let c = (mb / vr).max(vr / mb);
            if c > worst {
                worst = c;
                worst_center = x;
                worst_radius = r;
            }
        }
    }
    RegularityReport {
        measured_c_v: worst,
        gamma: annulus_gamma(worst),
        worst_center,
        worst_radius,
        pass: worst <= bound,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnulusCheck {
    pub ratio: f64,
    pub gamma: f64,
    pub bound: f64,
    pub within: bool,
}

/// Mass ratio of the open annulus B(z,R) minus the closed ball of radius r,
/// against the bound 6^gamma ((R-r)/R)^gamma valid for length spaces.
pub fn annulus_ratio(
    space: &MetricMeasureSpace,
    z: usize,
    r: f64,
    big_r: f64,
    c_v: f64,
) -> Result<AnnulusCheck> {
    if !(r >= 0.0) || !(big_r > r) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= r < R, got r={r}, R={big_r}"
        )));
    }
    let ball_mass = space.ball_mass(z, big_r);
    if ball_mass <= 0.0 {
        return Err(Error::EmptyBall {
            center: z,
            radius: big_r,
        });
    }
    let annulus_mass: f64 = (0..space.len())
        .filter(|&y| {
            let d = space.d(z, y);
            d > r && d < big_r
        })
        .map(|y| space.mass(y))
        .sum();
    let ratio = annulus_mass / ball_mass;
    let gamma = annulus_gamma(c_v);
    let bound = 6f64.powf(gamma) * ((big_r - r) / big_r).powf(gamma);
    Ok(AnnulusCheck {
        ratio,
        gamma,
        bound,
        within: ratio <= bound,
    })
}
