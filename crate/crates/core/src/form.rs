//! Graph Dirichlet forms and their parts on balls with Dirichlet boundary
//! condition.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::metric::MetricMeasureSpace;
use crate::scale::ScaleFunction;
use crate::metric::VolumeProfile;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// The energy form E(u) = 1/2 sum_{x,y} c(x,y) (u(x)-u(y))^2 on a weighted
/// graph, together with the reference vertex measure.
#[derive(Debug, Clone)]
pub struct GraphDirichletForm {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    measure: Vec<f64>,
}

impl GraphDirichletForm {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        GraphDirichletForm {
            n: g.vertex_count(),
            edges: g
                .edges()
                .iter()
                .map(|e| (e.a, e.b, e.conductance))
                .collect(),
            measure: g.measure().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b, c)| {
                let d = u[a] - u[b];
                c * d * d
            })
            .sum()
    }

    /// Dense energy matrix L = D - C restricted to `subset` (Dirichlet
    /// condition: rows and columns outside the subset are deleted, which is
    /// the same as extending functions by zero).
    pub fn laplacian_dense(&self, subset: &[usize]) -> DMatrix<f64> {
        let k = subset.len();
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in subset.iter().enumerate() {
            local[v] = i;
        }
        let mut l = DMatrix::<f64>::zeros(k, k);
        for &(a, b, c) in &self.edges {
            let (la, lb) = (local[a], local[b]);
            if la != usize::MAX {
                l[(la, la)] += c;
            }
            if lb != usize::MAX {
                l[(lb, lb)] += c;
            }
            if la != usize::MAX && lb != usize::MAX {
                l[(la, lb)] -= c;
                l[(lb, la)] -= c;
            }
        }
        l
    }
}

/// The part of a Dirichlet form on an open ball: functions vanish outside
/// the interior vertex set.
#[derive(Debug, Clone)]
pub struct BallPart {
    pub form: GraphDirichletForm,
    pub interior: Vec<usize>,
    pub center: usize,
    pub radius: f64,
}

/// Part of the form on the open ball B(p, R). The interior is exactly the
/// open ball; boundary vertices are absorbing.
pub fn assemble_part(
    form: &GraphDirichletForm,
    space: &MetricMeasureSpace,
    p: usize,
    r: f64,
) -> Result<BallPart> {
    let interior = space.ball(p, r);
    if interior.is_empty() {
        return Err(Error::EmptyBall {
            center: p,
            radius: r,
        });
    }
    Ok(BallPart {
        form: form.clone(),
        interior,
        center: p,
        radius: r,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutoffReport {
    pub energy: f64,
    /// E(phi) * Psi(r) / V(r); bounded for capacity-regular spaces.
    pub ratio: f64,
    pub radius: f64,
    pub kappa: f64,
}

/// Tent cutoff phi(y) = clamp((r - d(x,y)) / ((1-kappa) r), 0, 1), its energy
/// and the capacity ratio E(phi) Psi(r) / V(r).
pub fn cutoff_capacity(
    form: &GraphDirichletForm,
    space: &MetricMeasureSpace,
    x: usize,
    r: f64,
    kappa: f64,
    psi: &ScaleFunction,
    v: &VolumeProfile,
) -> Result<CutoffReport> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa must lie in (0,1), got {kappa}"
        )));
    }
    if space.ball(x, r).is_empty() {
        return Err(Error::EmptyBall {
            center: x,
            radius: r,
        });
    }
    let denom = (1.0 - kappa) * r;
    let phi: Vec<f64> = (0..space.len())
        .map(|y| ((r - space.d(x, y)) / denom).clamp(0.0, 1.0))
        .collect();
    let energy = form.energy(&phi);
    let ratio = energy * psi.eval(r) / v.eval(r);
    Ok(CutoffReport {
        energy,
        ratio,
        radius: r,
        kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::metric::geodesic_space;
    use approx::assert_relative_eq;

    fn star4() -> WeightedGraph {
        // center vertex 0 with 4 unit edges
        let edges = (1..=4)
            .map(|i| Edge {
                a: 0,
                b: i,
                length: 1.0,
                conductance: 1.0,
            })
            .collect();
        WeightedGraph::new(5, edges, vec![1.0; 5]).unwrap()
    }

    #[test]
    fn energy_of_constant_vanishes() {
        let g = star4();
        let f = GraphDirichletForm::from_graph(&g);
        assert_eq!(f.energy(&[3.0; 5]), 0.0);
        assert!(f.energy(&[1.0, 0.0, 0.0, 0.0, 0.0]) > 0.0);
    }

    #[test]
    fn part_interior_cases() {
        let g = crate::metric::tests::path_graph(3);
        let f = GraphDirichletForm::from_graph(&g);
        let s = geodesic_space(&g, 1).unwrap();
        // R beyond the diameter: part is the full form
        let full = assemble_part(&f, &s, 1, 10.0).unwrap();
        assert_eq!(full.interior, vec![0, 1, 2]);
        // strict ball of radius 1 around the middle vertex
        let small = assemble_part(&f, &s, 1, 1.0).unwrap();
        assert_eq!(small.interior, vec![1]);
        let l = f.laplacian_dense(&small.interior);
        assert_relative_eq!(l[(0, 0)], 2.0);
    }

    #[test]
    fn star_cutoff_energy() {
        let g = star4();
        let f = GraphDirichletForm::from_graph(&g);
        let s = geodesic_space(&g, 0).unwrap();
        let psi = ScaleFunction::power(2.0);
        let v = VolumeProfile::power(1.0);
        let rep = cutoff_capacity(&f, &s, 0, 1.0, 0.5, &psi, &v).unwrap();
        // phi = 1 at the center, 0 at the leaves: energy = 4 * 1^2
        assert_relative_eq!(rep.energy, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn cutoff_degenerate_flat() {
        let g = star4();
        let f = GraphDirichletForm::from_graph(&g);
        let s = geodesic_space(&g, 0).unwrap();
        let psi = ScaleFunction::power(2.0);
        let v = VolumeProfile::power(1.0);
        // r far beyond the diameter and kappa near 1: phi is 1 everywhere
        let rep = cutoff_capacity(&f, &s, 0, 100.0, 0.99, &psi, &v).unwrap();
        assert_relative_eq!(rep.energy, 0.0, epsilon = 1e-12);
    }
}
