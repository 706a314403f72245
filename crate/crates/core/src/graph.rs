//! Weighted graphs: the discrete substrate for every metric measure space
//! in the lab.
//!
//! A graph carries positive edge lengths (feeding the geodesic metric),
//! positive edge conductances (feeding the Dirichlet form) and a positive
//! vertex measure. Generators use the cable convention: the measure of a
//! vertex is half the total length of its incident edges.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub conductance: f64,
}

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    measure: Vec<f64>,
    coords: Option<Vec<[f64; 2]>>,
}

impl WeightedGraph {
    /// Build a graph and validate every structural invariant: no self loops,
    /// no duplicate edges, strictly positive weights, connectedness.
    pub fn new(n: usize, edges: Vec<Edge>, measure: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if measure.len() != n {
            return Err(Error::InvalidGraph(format!(
                "measure has {} entries for {} vertices",
                measure.len(),
                n
            )));
        }
        for (i, &m) in measure.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "vertex {i} has non-positive measure {m}"
                )));
            }
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for e in &edges {
            if e.a == e.b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", e.a)));
            }
            if e.a >= n || e.b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a vertex outside 0..{}",
                    e.a, e.b, n
                )));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive length {}",
                    e.a, e.b, e.length
                )));
            }
            if !(e.conductance > 0.0) || !e.conductance.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive conductance {}",
                    e.a, e.b, e.conductance
                )));
            }
            let (a, b) = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
            normalized.push(Edge { a, b, ..*e });
        }
        normalized.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
        for w in normalized.windows(2) {
            if w[0].a == w[1].a && w[0].b == w[1].b {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    w[0].a, w[0].b
                )));
            }
        }
        let g = WeightedGraph {
            n,
            edges: normalized,
            measure,
            coords: None,
        };
        if let Some(component) = g.smallest_component_if_disconnected() {
            return Err(Error::Disconnected { component });
        }
        Ok(g)
    }

    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Result<Self> {
        if coords.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "coords has {} entries for {} vertices",
                coords.len(),
                self.n
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn total_mass(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.a == v || e.b == v)
            .count()
    }

    /// Adjacency lists as (neighbor, length, conductance).
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.a].push((e.b, e.length, e.conductance));
            adj[e.b].push((e.a, e.length, e.conductance));
        }
        adj
    }

    /// Cable measure: m(v) = half the total length incident to v.
    pub fn cable_measure(n: usize, edges: &[Edge]) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for e in edges {
            m[e.a] += 0.5 * e.length;
            m[e.b] += 0.5 * e.length;
        }
        m
    }

    /// Scale every quantity of the graph in place:
    /// lengths by `len`, measures by `mass`, conductances by `cond`.
    pub fn scaled(&self, len: f64, mass: f64, cond: f64) -> WeightedGraph {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                a: e.a,
                b: e.b,
                length: e.length * len,
                conductance: e.conductance * cond,
            })
            .collect();
        let measure = self.measure.iter().map(|m| m * mass).collect();
        let coords = self
            .coords
            .as_ref()
            .map(|cs| cs.iter().map(|c| [c[0] * len, c[1] * len]).collect());
        WeightedGraph {
            n: self.n,
            edges,
            measure,
            coords,
        }
    }

    fn smallest_component_if_disconnected(&self) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.n];
        let mut sizes: Vec<Vec<usize>> = Vec::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(w, _, _) in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            sizes.push(members);
        }
        if sizes.len() <= 1 {
            None
        } else {
            sizes.into_iter().min_by_key(|c| c.len())
        }
    }

    /// Write in the line-oriented text format:
    /// `V <id> <measure>` then `E <a> <b> <length> <conductance>`.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, m) in self.measure.iter().enumerate() {
            writeln!(w, "V {} {}", i, m)?;
        }
        for e in &self.edges {
            writeln!(w, "E {} {} {} {}", e.a, e.b, e.length, e.conductance)?;
        }
        Ok(())
    }

    pub fn write_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(f))
    }

    /// Parse the text format. Arbitrary integer vertex ids are accepted and
    /// remapped onto 0..n in ascending id order, so a file written by
    /// [`WeightedGraph::write`] round-trips byte-identically (modulo comments).
    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut raw_measure: BTreeMap<u64, f64> = BTreeMap::new();
        let mut raw_edges: Vec<(u64, u64, f64, f64, usize)> = Vec::new();
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = ln + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let parse_f = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad {what} '{s}'"),
                })
            };
            let parse_id = |s: &str| -> Result<u64> {
                s.parse::<u64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad vertex id '{s}'"),
                })
            };
            match toks[0] {
                "V" => {
                    if toks.len() != 3 {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: "expected `V <id> <measure>`".into(),
                        });
                    }
                    let id = parse_id(toks[1])?;
                    let m = parse_f(toks[2], "measure")?;
                    if raw_measure.insert(id, m).is_some() {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("duplicate vertex id {id}"),
                        });
                    }
                }
                "E" => {
                    if toks.len() != 5 {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: "expected `E <id> <id> <length> <conductance>`".into(),
                        });
                    }
                    let a = parse_id(toks[1])?;
                    let b = parse_id(toks[2])?;
                    let len = parse_f(toks[3], "length")?;
                    let c = parse_f(toks[4], "conductance")?;
                    raw_edges.push((a, b, len, c, lineno));
                }
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("unknown record '{other}'"),
                    });
                }
            }
        }
        let ids: Vec<u64> = raw_measure.keys().cloned().collect();
        let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::with_capacity(raw_edges.len());
        for (a, b, len, c, lineno) in raw_edges {
            let ia = *index.get(&a).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("edge references undeclared vertex {a}"),
            })?;
            let ib = *index.get(&b).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("edge references undeclared vertex {b}"),
            })?;
            if !(len > 0.0) {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("non-positive length {len}"),
                });
            }
            if !(c > 0.0) {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("non-positive conductance {c}"),
                });
            }
            edges.push(Edge {
                a: ia,
                b: ib,
                length: len,
                conductance: c,
            });
        }
        let measure = ids.iter().map(|id| raw_measure[id]).collect();
        WeightedGraph::new(ids.len(), edges, measure)
    }

    pub fn read_from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f))
    }

    /// Planar coordinates as CSV `id,x,y`.
    pub fn write_coords_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "id,x,y")?;
        if let Some(cs) = &self.coords {
            for (i, c) in cs.iter().enumerate() {
                writeln!(w, "{},{},{}", i, c[0], c[1])?;
            }
        }
        Ok(())
    }
}
