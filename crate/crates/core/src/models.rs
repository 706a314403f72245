//! Generators for the model spaces: finite windows of the pre-carpet and of
//! the Sierpinski gasket cable system, plus the exact rescaling transform
//! that produces sequence members, and text-file ingestion of generic
//! weighted graphs.

use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

pub const DEFAULT_VERTEX_CAP: usize = 200_000;

/// Hausdorff dimension of the Sierpinski carpet: log 8 / log 3.
pub fn alpha_sc() -> f64 {
    8f64.ln() / 3f64.ln()
}

/// Hausdorff dimension of the Sierpinski gasket: log 3 / log 2.
pub fn alpha_sg() -> f64 {
    3f64.ln() / 2f64.ln()
}

/// Walk dimension of the Sierpinski gasket: log 5 / log 2.
pub fn beta_sg() -> f64 {
    5f64.ln() / 2f64.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    PreCarpet,
    GasketCable,
    GenericGraph,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractalModelSpec {
    pub family: ModelFamily,
    pub level: u32,
    /// Window side in unit cells (carpet); ignored for the gasket.
    pub window: u32,
    /// Cable subdivision (gasket); ignored for the carpet.
    pub subdivision: u32,
    /// Contraction ratio: 3 for the carpet, 2 for the gasket.
    pub contraction: u32,
    pub alpha: f64,
    /// Walk-dimension exponent. None means "fit empirically" (carpet).
    pub beta: Option<f64>,
}

impl FractalModelSpec {
    pub fn pre_carpet(level: u32, window: u32) -> Self {
        FractalModelSpec {
            family: ModelFamily::PreCarpet,
            level,
            window,
            subdivision: 1,
            contraction: 3,
            alpha: alpha_sc(),
            beta: None,
        }
    }

    pub fn gasket_cable(level: u32, subdivision: u32) -> Self {
        FractalModelSpec {
            family: ModelFamily::GasketCable,
            level,
            window: 1,
            subdivision,
            contraction: 2,
            alpha: alpha_sg(),
            beta: Some(beta_sg()),
        }
    }
}

/// The carpet cell offsets: the eight sub-squares retained at each stage,
/// in the order used by the similitude construction.
const CARPET_OFFSETS: [(i64, i64); 8] = [
    (0, 0),
    (1, 0),
    (2, 0),
    (2, 1),
    (2, 2),
    (1, 2),
    (0, 2),
    (0, 1),
];

/// Retained cells of the depth-d carpet pattern inside [0, 3^d)^2, generated
/// by iterating the similitudes from the unit cell.
pub fn carpet_cells(depth: u32) -> Vec<(i64, i64)> {
    let mut cells = vec![(0i64, 0i64)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(cells.len() * 8);
        for &(i, j) in &cells {
            for &(qi, qj) in &CARPET_OFFSETS {
                next.push((3 * i + qi, 3 * j + qj));
            }
        }
        cells = next;
    }
    cells.sort_unstable();
    cells
}

fn graph_from_cells(
    cells: &[(i64, i64)],
    cap: usize,
) -> Result<(WeightedGraph, usize)> {
    let mut vset: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut eset: BTreeSet<((i64, i64), (i64, i64))> = BTreeSet::new();
    for &(i, j) in cells {
        let c = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
        for p in c {
            vset.insert(p);
        }
        let mut put = |p: (i64, i64), q: (i64, i64)| {
            let (a, b) = if p <= q { (p, q) } else { (q, p) };
            eset.insert((a, b));
        };
        put(c[0], c[1]);
        put(c[0], c[2]);
        put(c[1], c[3]);
        put(c[2], c[3]);
    }
    if vset.len() > cap {
        return Err(Error::CapExceeded {
            requested: vset.len(),
            cap,
        });
    }
    let index: BTreeMap<(i64, i64), usize> = vset
        .iter()
        .enumerate()
        .map(|(k, &p)| (p, k))
        .collect();
    let edges: Vec<Edge> = eset
        .iter()
        .map(|&(p, q)| Edge {
            a: index[&p],
            b: index[&q],
            length: 1.0,
            conductance: 1.0,
        })
        .collect();
    let n = vset.len();
    let measure = WeightedGraph::cable_measure(n, &edges);
    let coords: Vec<[f64; 2]> = vset.iter().map(|&(x, y)| [x as f64, y as f64]).collect();
    let g = WeightedGraph::new(n, edges, measure)?.with_coords(coords)?;
    let basepoint = index[&(0, 0)];
    Ok((g, basepoint))
}

/// Pre-carpet window at unit mesh: the level-n carpet pattern over a window
/// of `window` unit cells per side, with unit edge lengths and conductances
/// and cable vertex measure. Basepoint is the corner (0,0).
pub fn pre_carpet_unit_mesh(
    level: u32,
    window: u32,
    cap: usize,
) -> Result<(WeightedGraph, usize)> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be >= 1".into()));
    }
    let mut depth = level;
    let mut span = 3i64.pow(level);
    let target = window as i64 * 3i64.pow(level);
    while span < target {
        depth += 1;
        span *= 3;
    }
    let cells: Vec<(i64, i64)> = carpet_cells(depth)
        .into_iter()
        .filter(|&(i, j)| i < target && j < target)
        .collect();
    let approx_vertices = cells.len() + 4 * (target as usize) + 4;
    if approx_vertices > cap.saturating_mul(2) {
        return Err(Error::CapExceeded {
            requested: approx_vertices,
            cap,
        });
    }
    graph_from_cells(&cells, cap)
}

/// Pre-carpet window of the scaled space: lattice spacing 3^{-level}, edge
/// length 3^{-level}, unit conductance, cable vertex measure.
pub fn pre_carpet(level: u32, window: u32, cap: usize) -> Result<(WeightedGraph, usize)> {
    let (g, bp) = pre_carpet_unit_mesh(level, window, cap)?;
    let s = 3f64.powi(-(level as i32));
    Ok((g.scaled(s, s, 1.0), bp))
}

/// Gasket cable window at level n: the graph of the side-2^n gasket with
/// unit cables, each cable split into `subdivision` segments of length
/// 1/subdivision and conductance subdivision (cable convention: conductance
/// is the reciprocal length). Vertex measure is the cable measure. The
/// basepoint is the corner (0,0).
pub fn gasket_cable(
    level: u32,
    subdivision: u32,
    cap: usize,
) -> Result<(WeightedGraph, usize)> {
    if subdivision == 0 {
        return Err(Error::InvalidArgument("subdivision must be >= 1".into()));
    }
    let m = subdivision as i64;
    // triangular-lattice integer coordinates scaled by the subdivision:
    // the key (p, q) is the point (u, v) = (p/m, q/m) where the actual
    // planar position is u*(1,0) + v*(1/2, sqrt(3)/2).
    let mut tris = vec![(0i64, 0i64, 1i64 << level)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(tris.len() * 3);
        for &(u, v, s) in &tris {
            let h = s / 2;
            next.push((u, v, h));
            next.push((u + h, v, h));
            next.push((u, v + h, h));
        }
        tris = next;
    }
    let mut vset: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut eset: BTreeSet<((i64, i64), (i64, i64))> = BTreeSet::new();
    let mut base_edge = |p: (i64, i64), q: (i64, i64)| {
        let (a, b) = if p <= q { (p, q) } else { (q, p) };
        eset.insert((a, b));
    };
    for &(u, v, s) in &tris {
        debug_assert_eq!(s, 1);
        let c0 = (u * m, v * m);
        let c1 = ((u + s) * m, v * m);
        let c2 = (u * m, (v + s) * m);
        base_edge(c0, c1);
        base_edge(c0, c2);
        base_edge(c1, c2);
    }
    // split each unit cable into m segments
    let mut sub_edges: BTreeSet<((i64, i64), (i64, i64))> = BTreeSet::new();
    for &(p, q) in &eset {
        let dp = ((q.0 - p.0) / m, (q.1 - p.1) / m);
        let mut prev = p;
        vset.insert(p);
        for k in 1..=m {
            let cur = (p.0 + dp.0 * k, p.1 + dp.1 * k);
            vset.insert(cur);
            let (a, b) = if prev <= cur { (prev, cur) } else { (cur, prev) };
            sub_edges.insert((a, b));
            prev = cur;
        }
        vset.insert(q);
    }
    if vset.len() > cap {
        return Err(Error::CapExceeded {
            requested: vset.len(),
            cap,
        });
    }
    let index: BTreeMap<(i64, i64), usize> =
        vset.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let seg_len = 1.0 / subdivision as f64;
    let edges: Vec<Edge> = sub_edges
        .iter()
        .map(|&(p, q)| Edge {
            a: index[&p],
            b: index[&q],
            length: seg_len,
            conductance: subdivision as f64,
        })
        .collect();
    let n = vset.len();
    let measure = WeightedGraph::cable_measure(n, &edges);
    let root3_half = 3f64.sqrt() / 2.0;
    let coords: Vec<[f64; 2]> = vset
        .iter()
        .map(|&(p, q)| {
            let u = p as f64 / m as f64;
            let v = q as f64 / m as f64;
            [u + 0.5 * v, root3_half * v]
        })
        .collect();
    let g = WeightedGraph::new(n, edges, measure)?.with_coords(coords)?;
    let basepoint = index[&(0, 0)];
    Ok((g, basepoint))
}

/// The exact rescaling of a metric measure Dirichlet graph:
/// distances by l^{-n}, measures by l^{-alpha n}, conductances by
/// l^{(beta-alpha) n}. The generator of the rescaled form is exactly
/// l^{beta n} times the original one, so the heat kernels satisfy
/// p^(n)(t,x,y) = l^{alpha n} p(l^{beta n} t, x, y).
pub fn rescale(g: &WeightedGraph, l: f64, alpha: f64, beta: f64, n: i32) -> WeightedGraph {
    let nf = n as f64;
    g.scaled(
        l.powf(-nf),
        l.powf(-alpha * nf),
        l.powf((beta - alpha) * nf),
    )
}

pub fn ingest_graph<P: AsRef<Path>>(path: P) -> Result<WeightedGraph> {
    WeightedGraph::read_from_path(path)
}

impl FractalModelSpec {
    /// Generate the window graph for this model. Returns the graph and the
    /// basepoint vertex id.
    pub fn generate(&self, cap: usize) -> Result<(WeightedGraph, usize)> {
        match self.family {
            ModelFamily::PreCarpet => pre_carpet(self.level, self.window, cap),
            ModelFamily::GasketCable => gasket_cable(self.level, self.subdivision, cap),
            ModelFamily::GenericGraph => Err(Error::InvalidArgument(
                "generic_graph models are ingested from a file, not generated".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::geodesic_space;
    use approx::assert_relative_eq;

    /// Independent enumeration oracle: a unit cell (i,j) of the pre-carpet
    /// is retained iff no base-3 digit position has digit 1 in both i and j.
    fn carpet_cell_retained(mut i: i64, mut j: i64) -> bool {
        while i > 0 || j > 0 {
            if i % 3 == 1 && j % 3 == 1 {
                return false;
            }
            i /= 3;
            j /= 3;
        }
        true
    }

    fn oracle_cells(depth: u32) -> Vec<(i64, i64)> {
        let span = 3i64.pow(depth);
        let mut out = Vec::new();
        for i in 0..span {
            for j in 0..span {
                if carpet_cell_retained(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn carpet_cells_match_digit_oracle() {
        for depth in 0..=3 {
            assert_eq!(carpet_cells(depth), oracle_cells(depth), "depth {depth}");
        }
    }

    #[test]
    fn pre_carpet_level0_is_square() {
        let (g, bp) = pre_carpet(0, 1, 1000).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(bp, 0);
    }

    #[test]
    fn pre_carpet_level1_counts_and_geodesics() {
        let (g, bp) = pre_carpet(1, 1, 1000).unwrap();
        assert_eq!(g.vertex_count(), 16);
        assert_eq!(g.edge_count(), 24);
        let s = geodesic_space(&g, bp).unwrap();
        // far corner (1,1) is the last vertex in lexicographic order
        let far = g
            .coords()
            .unwrap()
            .iter()
            .position(|c| (c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12)
            .unwrap();
        assert_relative_eq!(s.d(bp, far), 2.0, epsilon = 1e-12);
        for e in g.edges() {
            assert_relative_eq!(e.length, 1.0 / 3.0, epsilon = 1e-15);
            assert_eq!(e.conductance, 1.0);
        }
    }

    #[test]
    fn pre_carpet_level2_counts_from_oracle() {
        let (g, _) = pre_carpet(2, 1, 10_000).unwrap();
        // independent corner/edge enumeration from the oracle cells
        let cells = oracle_cells(2);
        let mut vs = std::collections::BTreeSet::new();
        let mut es = std::collections::BTreeSet::new();
        for &(i, j) in &cells {
            for p in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                vs.insert(p);
            }
            let mut norm = |p: (i64, i64), q: (i64, i64)| {
                es.insert(if p <= q { (p, q) } else { (q, p) });
            };
            norm((i, j), (i + 1, j));
            norm((i, j), (i, j + 1));
            norm((i + 1, j), (i + 1, j + 1));
            norm((i, j + 1), (i + 1, j + 1));
        }
        assert_eq!(g.vertex_count(), vs.len());
        assert_eq!(g.edge_count(), es.len());
        assert_eq!(g.vertex_count(), 96);
        assert_eq!(g.edge_count(), 168);
        // stable across runs
        let (g2, _) = pre_carpet(2, 1, 10_000).unwrap();
        assert_eq!(g2.vertex_count(), g.vertex_count());
        assert_eq!(g2.edge_count(), g.edge_count());
    }

    #[test]
    fn gasket_counts() {
        let (g0, _) = gasket_cable(0, 1, 1000).unwrap();
        assert_eq!((g0.vertex_count(), g0.edge_count()), (3, 3));
        let (g1, _) = gasket_cable(1, 1, 1000).unwrap();
        assert_eq!((g1.vertex_count(), g1.edge_count()), (6, 9));
        let (g12, _) = gasket_cable(1, 2, 1000).unwrap();
        assert_eq!((g12.vertex_count(), g12.edge_count()), (15, 18));
        // closed form 3(3^n+1)/2 vertices, 3^{n+1} edges
        for n in 0..4u32 {
            let (g, _) = gasket_cable(n, 1, 100_000).unwrap();
            let v = 3 * (3usize.pow(n) + 1) / 2;
            let e = 3usize.pow(n + 1);
            assert_eq!((g.vertex_count(), g.edge_count()), (v, e));
        }
    }

    #[test]
    fn gasket_measure_is_cable() {
        let (g, _) = gasket_cable(1, 1, 1000).unwrap();
        assert_relative_eq!(g.total_mass(), 9.0, epsilon = 1e-12);
        let (g2, _) = gasket_cable(1, 2, 1000).unwrap();
        assert_relative_eq!(g2.total_mass(), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn rescale_semigroup_property() {
        let (g, _) = gasket_cable(1, 1, 1000).unwrap();
        let a = rescale(&rescale(&g, 2.0, alpha_sg(), beta_sg(), 1), 2.0, alpha_sg(), beta_sg(), 2);
        let b = rescale(&g, 2.0, alpha_sg(), beta_sg(), 3);
        for (ea, eb) in a.edges().iter().zip(b.edges()) {
            assert_relative_eq!(ea.length, eb.length, max_relative = 1e-12);
            assert_relative_eq!(ea.conductance, eb.conductance, max_relative = 1e-12);
        }
        for (ma, mb) in a.measure().iter().zip(b.measure()) {
            assert_relative_eq!(ma, mb, max_relative = 1e-12);
        }
    }

    #[test]
    fn rescale_n0_is_identity() {
        let (g, _) = gasket_cable(1, 1, 1000).unwrap();
        let r = rescale(&g, 2.0, alpha_sg(), beta_sg(), 0);
        assert_eq!(r.edges(), g.edges());
    }

    #[test]
    fn cap_is_enforced() {
        match pre_carpet(3, 1, 100) {
            Err(Error::CapExceeded { cap, .. }) => assert_eq!(cap, 100),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_round_trip() {
        let (g, _) = gasket_cable(1, 1, 1000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        g.write_to_path(&path).unwrap();
        let h = ingest_graph(&path).unwrap();
        assert_eq!(g.vertex_count(), h.vertex_count());
        assert_eq!(g.edge_count(), h.edge_count());
        let s = geodesic_space(&h, 0).unwrap();
        assert!(s.diameter() > 0.0);
    }

    #[test]
    fn four_cycle_file() {
        let text = "V 0 1\nV 1 1\nV 2 1\nV 3 1\nE 0 1 1 1\nE 1 2 1 1\nE 2 3 1 1\nE 3 0 1 1\n";
        let g = WeightedGraph::read(text.as_bytes()).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        let s = geodesic_space(&g, 0).unwrap();
        assert_relative_eq!(s.diameter(), 2.0);
    }
}
