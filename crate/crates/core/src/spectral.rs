//! Spectra of Dirichlet parts, Hilbert-Schmidt heat kernels, semigroups and
//! their structural identities.
//!
//! The generalized eigenproblem L phi = lambda M phi is symmetrized with the
//! inverse square root of the diagonal measure matrix. Dense solves carry the
//! complete spectrum up to a size cap; above the cap a Krylov iteration with
//! full reorthogonalization and an explicit Rayleigh-Ritz projection returns
//! the lowest part of the spectrum with a reported truncation bound.

use crate::error::{Error, Result};
use crate::form::BallPart;
use crate::metric::MetricMeasureSpace;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_DENSE_CAP: usize = 3000;

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Ascending eigenvalues of the part.
    pub lambdas: Vec<f64>,
    /// Columns are eigenvectors on the interior, orthonormal in the
    /// m-weighted inner product.
    pub vectors: DMatrix<f64>,
    /// Global vertex ids of the interior, in ascending order.
    pub interior: Vec<usize>,
    /// Size of the ambient vertex set (for zero extension).
    pub full_size: usize,
    /// Interior vertex measures, aligned with `interior`.
    pub measure: Vec<f64>,
    /// True iff every eigenpair of the part is present.
    pub complete: bool,
}

impl SpectralData {
    pub fn count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn interior_size(&self) -> usize {
        self.interior.len()
    }

    /// Max-norm defect of the m-weighted Gram matrix against the identity.
    pub fn gram_defect(&self) -> f64 {
        let k = self.count();
        let n = self.interior_size();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in i..k {
                let mut s = 0.0;
                for v in 0..n {
                    s += self.vectors[(v, i)] * self.vectors[(v, j)] * self.measure[v];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Worst eigen-residual ||L phi - lambda M phi||_2, measured relative to
    /// max(1, lambda_max).
    pub fn residual_defect(&self, part: &BallPart) -> f64 {
        let l = part.form.laplacian_dense(&self.interior);
        let n = self.interior_size();
        let scale = self.lambdas.last().copied().unwrap_or(1.0).max(1.0);
        let mut worst = 0.0f64;
        for j in 0..self.count() {
            let mut r2 = 0.0;
            for v in 0..n {
                let mut lv = 0.0;
                for w in 0..n {
                    lv += l[(v, w)] * self.vectors[(w, j)];
                }
                let resid = lv - self.lambdas[j] * self.measure[v] * self.vectors[(v, j)];
                r2 += resid * resid;
            }
            worst = worst.max(r2.sqrt() / scale);
        }
        worst
    }

    /// Heat kernel truncation bound (interior - k) * exp(-lambda_k t) for
    /// partial spectra; zero when complete.
    pub fn truncation_bound(&self, t: f64) -> f64 {
        if self.complete {
            0.0
        } else {
            let lam = self.lambdas.last().copied().unwrap_or(0.0);
            (self.interior_size() - self.count()) as f64 * (-lam * t).exp()
        }
    }
}

fn interior_measure(part: &BallPart) -> Vec<f64> {
    part.interior
        .iter()
        .map(|&v| part.form.measure()[v])
        .collect()
}

fn finish_spectral(
    part: &BallPart,
    m: Vec<f64>,
    mut pairs: Vec<(f64, Vec<f64>)>,
    complete: bool,
) -> SpectralData {
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let k = pairs.len();
    let n = part.interior.len();
    let mut vectors = DMatrix::<f64>::zeros(n, k);
    let mut lambdas = Vec::with_capacity(k);
    for (j, (lam, v)) in pairs.into_iter().enumerate() {
        // eigenvalues of a PSD pencil: anything below zero is rounding noise
        lambdas.push(lam.max(0.0));
        // map back from the symmetrized problem and fix the sign so the
        // largest-magnitude entry is positive
        let mut phi: Vec<f64> = v.iter().zip(&m).map(|(x, mm)| x / mm.sqrt()).collect();
        let mut best = 0usize;
        for i in 0..n {
            if phi[i].abs() > phi[best].abs() + 1e-14 {
                best = i;
            }
        }
        if phi[best] < 0.0 {
            for x in phi.iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..n {
            vectors[(i, j)] = phi[i];
        }
    }
    SpectralData {
        lambdas,
        vectors,
        interior: part.interior.clone(),
        full_size: part.form.len(),
        measure: m,
        complete: complete && k == n,
    }
}

/// Complete dense solve of the part's generalized eigenproblem, truncated to
/// the lowest k pairs.
fn spectrum_dense(part: &BallPart, k: usize) -> Result<SpectralData> {
    let m = interior_measure(part);
    let inv_sqrt: Vec<f64> = m.iter().map(|x| 1.0 / x.sqrt()).collect();
    let l = part.form.laplacian_dense(&part.interior);
    let n = part.interior.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = l[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let eig = a.symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            (
                eig.eigenvalues[j],
                eig.eigenvectors.column(j).iter().cloned().collect(),
            )
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.truncate(k);
    Ok(finish_spectral(part, m, pairs, k == n))
}

/// Sparse application of A = M^{-1/2} (D - C) M^{-1/2}.
struct SymOp {
    n: usize,
    diag: Vec<f64>,
    off: Vec<(usize, usize, f64)>,
}

impl SymOp {
    fn new(part: &BallPart, m: &[f64]) -> SymOp {
        let n = part.interior.len();
        let inv_sqrt: Vec<f64> = m.iter().map(|x| 1.0 / x.sqrt()).collect();
        let mut local = vec![usize::MAX; part.form.len()];
        for (i, &v) in part.interior.iter().enumerate() {
            local[v] = i;
        }
        let mut diag = vec![0.0f64; n];
        let mut off = Vec::new();
        for &(a, b, c) in part.form.edges() {
            let (la, lb) = (local[a], local[b]);
            if la != usize::MAX {
                diag[la] += c * inv_sqrt[la] * inv_sqrt[la];
            }
            if lb != usize::MAX {
                diag[lb] += c * inv_sqrt[lb] * inv_sqrt[lb];
            }
            if la != usize::MAX && lb != usize::MAX {
                off.push((la, lb, -c * inv_sqrt[la] * inv_sqrt[lb]));
            }
        }
        SymOp { n, diag, off }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            y[i] = self.diag[i] * x[i];
        }
        for &(a, b, w) in &self.off {
            y[a] += w * x[b];
            y[b] += w * x[a];
        }
    }

    fn norm_scale(&self) -> f64 {
        self.diag.iter().fold(1.0f64, |m, &d| m.max(d.abs())) * 2.0
    }
}

/// Krylov iteration with full reorthogonalization and explicit
/// Rayleigh-Ritz extraction, for the lowest `k_want` eigenpairs.
fn spectrum_lanczos(part: &BallPart, k_want: usize, seed: u64) -> Result<SpectralData> {
    let n = part.interior.len();
    let m = interior_measure(part);
    let op = SymOp::new(part, &m);
    let scale = op.norm_scale();
    let block = 8usize.min(n);
    let max_dim = (4 * k_want + 8 * block).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a_c205);

    let orthonormalize = |v: &mut Vec<f64>, basis: &[Vec<f64>]| -> f64 {
        let mut norm = 0.0;
        for pass in 0..2 {
            for b in basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
            norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if pass == 1 && norm > 1e-10 {
                for x in v.iter_mut() {
                    *x /= norm;
                }
            }
        }
        norm
    };

    let mut q: Vec<Vec<f64>> = Vec::new();
    for _ in 0..block {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        if orthonormalize(&mut v, &q) > 1e-10 {
            q.push(v);
        }
    }
    let mut processed = 0usize;
    let mut target_dim = (2 * k_want + 2 * block).min(max_dim);

    loop {
        // expand the basis by pushing A onto unprocessed columns
        while processed < q.len() && q.len() < target_dim {
            let mut w = vec![0.0; n];
            op.apply(&q[processed], &mut w);
            processed += 1;
            if orthonormalize(&mut w, &q) > 1e-9 * scale.max(1.0) {
                q.push(w);
            }
        }
        while q.len() < target_dim && processed >= q.len() {
            // Krylov space exhausted: inject a fresh random direction
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            if orthonormalize(&mut v, &q) > 1e-10 {
                q.push(v);
            } else {
                break;
            }
        }
        let dim = q.len();
        if dim < k_want {
            return Err(Error::Solver(format!(
                "Krylov basis collapsed at dimension {dim} < requested {k_want}"
            )));
        }
        // explicit projection T = Q^T A Q
        let mut aq: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for v in q.iter() {
            let mut w = vec![0.0; n];
            op.apply(v, &mut w);
            aq.push(w);
        }
        let mut t = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let dot: f64 = q[i].iter().zip(&aq[j]).map(|(x, y)| x * y).sum();
                t[(i, j)] = dot;
                t[(j, i)] = dot;
            }
        }
        let eig = t.symmetric_eigen();
        let mut idx: Vec<usize> = (0..dim).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        // assemble the lowest k_want Ritz pairs and check residuals
        let mut pairs = Vec::with_capacity(k_want);
        let mut worst_resid = 0.0f64;
        for &i in idx.iter().take(k_want) {
            let theta = eig.eigenvalues[i];
            let mut x = vec![0.0; n];
            for (r, qr) in q.iter().enumerate() {
                let c = eig.eigenvectors[(r, i)];
                if c != 0.0 {
                    for (xx, yy) in x.iter_mut().zip(qr) {
                        *xx += c * yy;
                    }
                }
            }
            let mut ax = vec![0.0; n];
            op.apply(&x, &mut ax);
            let resid: f64 = ax
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - theta * b) * (a - theta * b))
                .sum::<f64>()
                .sqrt();
            worst_resid = worst_resid.max(resid / scale.max(1.0));
            pairs.push((theta, x));
        }
        if worst_resid <= 1e-10 || dim >= max_dim {
            if worst_resid > 1e-7 {
                return Err(Error::Solver(format!(
                    "Ritz residual {worst_resid:e} after Krylov dimension {dim}"
                )));
            }
            return Ok(finish_spectral(part, m, pairs, false));
        }
        target_dim = (dim + 4 * block).min(max_dim);
    }
}

/// Eigenpairs of the part: complete dense solve when the interior fits under
/// `dense_cap`, Krylov iteration for the lowest `k` otherwise.
pub fn spectrum_with(
    part: &BallPart,
    k: usize,
    dense_cap: usize,
    seed: u64,
) -> Result<SpectralData> {
    let n = part.interior.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a part with interior {n}"
        )));
    }
    if n <= dense_cap {
        spectrum_dense(part, k)
    } else {
        spectrum_lanczos(part, k, seed)
    }
}

/// Complete spectrum through the dense path (requires interior <= cap).
pub fn spectrum(part: &BallPart, k: usize) -> Result<SpectralData> {
    spectrum_with(part, k, DEFAULT_DENSE_CAP, 0)
}

pub fn full_spectrum(part: &BallPart) -> Result<SpectralData> {
    spectrum(part, part.interior.len())
}

/// Heat kernel matrix on the interior at time t: the density with respect to
/// the measure, p(t,x,y) = sum_j exp(-lambda_j t) phi_j(x) phi_j(y).
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub values: DMatrix<f64>,
    pub interior: Vec<usize>,
    pub full_size: usize,
    pub t: f64,
    pub truncation_bound: f64,
}

impl KernelMatrix {
    /// Zero-extended dense kernel over the ambient vertex set.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let mut out = DMatrix::<f64>::zeros(self.full_size, self.full_size);
        for (li, &gi) in self.interior.iter().enumerate() {
            for (lj, &gj) in self.interior.iter().enumerate() {
                out[(gi, gj)] = self.values[(li, lj)];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.values.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.values[(i, j)] - self.values[(j, i)]).abs());
            }
        }
        worst
    }
}

pub fn heat_kernel(spec: &SpectralData, t: f64) -> Result<KernelMatrix> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t must be positive, got {t}"
        )));
    }
    let n = spec.interior_size();
    let k = spec.count();
    let mut e = DMatrix::<f64>::zeros(n, k);
    for j in 0..k {
        let w = (-spec.lambdas[j] * t * 0.5).exp();
        for i in 0..n {
            e[(i, j)] = spec.vectors[(i, j)] * w;
        }
    }
    let values = &e * e.transpose();
    Ok(KernelMatrix {
        values,
        interior: spec.interior.clone(),
        full_size: spec.full_size,
        t,
        truncation_bound: spec.truncation_bound(t),
    })
}

/// Rows of the heat kernel for the given local interior indices, without
/// materializing the full matrix.
pub fn kernel_rows(spec: &SpectralData, t: f64, rows: &[usize]) -> DMatrix<f64> {
    let n = spec.interior_size();
    let k = spec.count();
    let weights: Vec<f64> = spec.lambdas.iter().map(|l| (-l * t).exp()).collect();
    let mut out = DMatrix::<f64>::zeros(rows.len(), n);
    for (ri, &r) in rows.iter().enumerate() {
        for j in 0..k {
            let c = spec.vectors[(r, j)] * weights[j];
            if c != 0.0 {
                for i in 0..n {
                    out[(ri, i)] += c * spec.vectors[(i, j)];
                }
            }
        }
    }
    out
}

/// Diagonal p(t, x, x) for a single interior point across a time grid.
pub fn kernel_diagonal(spec: &SpectralData, local_x: usize, ts: &[f64]) -> Vec<f64> {
    ts.iter()
        .map(|&t| {
            (0..spec.count())
                .map(|j| {
                    let p = spec.vectors[(local_x, j)];
                    (-spec.lambdas[j] * t).exp() * p * p
                })
                .sum()
        })
        .collect()
}

/// Semigroup action P_t f = sum_j e^{-lambda_j t} <f, phi_j>_m phi_j, with f
/// given on the full vertex set and the result zero-extended.
pub fn semigroup_apply(spec: &SpectralData, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    if f.len() != spec.full_size {
        return Err(Error::InvalidArgument(format!(
            "function has {} entries, expected {}",
            f.len(),
            spec.full_size
        )));
    }
    let n = spec.interior_size();
    let mut out = vec![0.0; spec.full_size];
    let mut coeffs = vec![0.0; spec.count()];
    for j in 0..spec.count() {
        let mut c = 0.0;
        for i in 0..n {
            c += f[spec.interior[i]] * spec.vectors[(i, j)] * spec.measure[i];
        }
        coeffs[j] = c * (-spec.lambdas[j] * t).exp();
    }
    for i in 0..n {
        let mut v = 0.0;
        for j in 0..spec.count() {
            v += coeffs[j] * spec.vectors[(i, j)];
        }
        out[spec.interior[i]] = v;
    }
    Ok(out)
}

/// Chapman-Kolmogorov defect || K_{t+s} - K_t M K_s ||_max on the interior.
pub fn chapman_kolmogorov_defect(spec: &SpectralData, t: f64, s: f64) -> Result<f64> {
    let kt = heat_kernel(spec, t)?;
    let ks = heat_kernel(spec, s)?;
    let kts = heat_kernel(spec, t + s)?;
    let n = spec.interior_size();
    let mut weighted = ks.values.clone();
    for i in 0..n {
        for j in 0..n {
            weighted[(i, j)] *= spec.measure[i];
        }
    }
    let composed = &kt.values * weighted;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((composed[(i, j)] - kts.values[(i, j)]).abs());
        }
    }
    Ok(worst)
}

/// Per-point conservativeness defect 1 - sum_y p(t,x,y) m(y); errors on a
/// defect below -1e-10 (positivity/mass breach).
pub fn conservativeness_defect(kernel: &KernelMatrix, measure: &[f64]) -> Result<Vec<f64>> {
    let n = kernel.interior.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut mass = 0.0;
        for j in 0..n {
            mass += kernel.values[(i, j)] * measure[kernel.interior[j]];
        }
        let defect = 1.0 - mass;
        if defect < -1e-10 {
            return Err(Error::PositivityBreach {
                vertex: kernel.interior[i],
                value: defect,
            });
        }
        out.push(defect);
    }
    Ok(out)
}

/// Slope of log(-log defect) against log(Psi(R)/t); near 1/(beta'-1) when
/// the exit-tail form defect = c exp(-gamma (Psi(R)/t)^{1/(beta'-1)}) holds.
pub fn defect_tail_exponent(defects: &[f64], ts: &[f64], psi_r: f64) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&d, &t) in defects.iter().zip(ts) {
        if d > 1e-300 && d < 0.5 {
            xs.push((psi_r / t).ln());
            ys.push((-d.ln()).ln());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    Some(least_squares_slope(&xs, &ys))
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Nested-ball kernel family: kernels for an ascending list of radii at a
/// fixed time, zero-extended, with entrywise monotonicity enforced and the
/// sup gaps between successive radii reported.
#[derive(Debug, Clone)]
pub struct KernelFamily {
    pub radii: Vec<f64>,
    pub kernels: Vec<KernelMatrix>,
    pub sup_gaps: Vec<f64>,
}

pub fn kernel_limit_in_r(
    form: &crate::form::GraphDirichletForm,
    space: &MetricMeasureSpace,
    p: usize,
    radii: &[f64],
    t: f64,
    dense_cap: usize,
) -> Result<KernelFamily> {
    if radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("radii must be ascending".into()));
    }
    let mut kernels: Vec<KernelMatrix> = Vec::new();
    let mut sup_gaps = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let part = crate::form::assemble_part(form, space, p, r)?;
        let spec = spectrum_with(&part, part.interior.len(), dense_cap, 17)?;
        let k = heat_kernel(&spec, t)?;
        if let Some(prev) = kernels.last() {
            let a = prev.full_matrix();
            let b = k.full_matrix();
            let scale = k.max_abs().max(1.0);
            let mut gap = 0.0f64;
            for x in 0..space.len() {
                for y in 0..space.len() {
                    let diff = b[(x, y)] - a[(x, y)];
                    if diff < -1e-12 * scale {
                        return Err(Error::MonotonicityViolation {
                            x,
                            y,
                            violation: -diff,
                            r_small: radii[i - 1],
                            r_large: r,
                        });
                    }
                    gap = gap.max(diff.abs());
                }
            }
            sup_gaps.push(gap);
        }
        kernels.push(k);
    }
    Ok(KernelFamily {
        radii: radii.to_vec(),
        kernels,
        sup_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{assemble_part, GraphDirichletForm};
    use crate::metric::geodesic_space;
    use crate::testutil::{path_graph, random_graph, two_vertex_graph};
    use approx::assert_relative_eq;

    fn full_part(g: &crate::graph::WeightedGraph) -> BallPart {
        let f = GraphDirichletForm::from_graph(g);
        let s = geodesic_space(g, 0).unwrap();
        assemble_part(&f, &s, 0, s.diameter() + 1.0).unwrap()
    }

    #[test]
    fn single_interior_vertex() {
        let g = path_graph(3);
        let f = GraphDirichletForm::from_graph(&g);
        let s = geodesic_space(&g, 1).unwrap();
        let part = assemble_part(&f, &s, 1, 1.0).unwrap();
        let spec = full_spectrum(&part).unwrap();
        assert_eq!(spec.count(), 1);
        assert_relative_eq!(spec.lambdas[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(spec.vectors[(0, 0)], 1.0, epsilon = 1e-12);
        let k = heat_kernel(&spec, 0.7).unwrap();
        assert_relative_eq!(k.values[(0, 0)], (-1.4f64).exp(), epsilon = 1e-12);
        let defects = conservativeness_defect(&k, g.measure()).unwrap();
        assert_relative_eq!(defects[0], 1.0 - (-1.4f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn dirichlet_path_cosine_spectrum() {
        // path v0..v4 with Dirichlet condition at both ends: interior 3,
        // lambda_j = 2(1 - cos(j pi / 4))
        let g = path_graph(5);
        let f = GraphDirichletForm::from_graph(&g);
        let s = geodesic_space(&g, 2).unwrap();
        let part = assemble_part(&f, &s, 2, 2.0).unwrap();
        assert_eq!(part.interior, vec![1, 2, 3]);
        let spec = full_spectrum(&part).unwrap();
        let expect: Vec<f64> = (1..=3)
            .map(|j| 2.0 * (1.0 - (j as f64 * std::f64::consts::PI / 4.0).cos()))
            .collect();
        for (a, b) in spec.lambdas.iter().zip(&expect) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
        assert!(spec.gram_defect() <= 1e-10);
        assert!(spec.residual_defect(&part) <= 1e-8);
    }

    #[test]
    fn two_vertex_explicit_kernel() {
        let g = two_vertex_graph();
        let part = full_part(&g);
        let spec = full_spectrum(&part).unwrap();
        assert_relative_eq!(spec.lambdas[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(spec.lambdas[1], 2.0, epsilon = 1e-12);
        for t in [0.1, 0.5, 2.0] {
            let k = heat_kernel(&spec, t).unwrap();
            let e = (-2.0 * t).exp();
            assert_relative_eq!(k.values[(0, 0)], 0.5 + 0.5 * e, epsilon = 1e-12);
            assert_relative_eq!(k.values[(0, 1)], 0.5 - 0.5 * e, epsilon = 1e-12);
            let defects = conservativeness_defect(&k, g.measure()).unwrap();
            assert!(defects.iter().all(|d| d.abs() <= 1e-12));
        }
    }

    #[test]
    fn chapman_kolmogorov_against_expm_oracle() {
        let g = random_graph(5, 42);
        let part = full_part(&g);
        let spec = full_spectrum(&part).unwrap();
        assert!(chapman_kolmogorov_defect(&spec, 0.3, 0.7).unwrap() <= 1e-10);

        // independent oracle: dense scaled Taylor expansion of exp(-t M^{-1} L)
        let f = GraphDirichletForm::from_graph(&g);
        let ids: Vec<usize> = (0..5).collect();
        let l = f.laplacian_dense(&ids);
        let mut generator = DMatrix::<f64>::zeros(5, 5);
        for i in 0..5 {
            for j in 0..5 {
                generator[(i, j)] = -l[(i, j)] / g.measure()[i];
            }
        }
        let t = 1.0;
        let scaled = generator * (t / 1024.0);
        let mut em = DMatrix::<f64>::identity(5, 5);
        let mut term = DMatrix::<f64>::identity(5, 5);
        for k in 1..24 {
            term = &term * &scaled / (k as f64);
            em += &term;
        }
        for _ in 0..10 {
            em = &em * &em;
        }
        // kernel density = expm * M^{-1}
        let kk = heat_kernel(&spec, t).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_relative_eq!(
                    kk.values[(i, j)],
                    em[(i, j)] / g.measure()[j],
                    epsilon = 1e-9,
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn kernel_symmetry_and_positivity() {
        let g = random_graph(12, 7);
        let part = full_part(&g);
        let spec = full_spectrum(&part).unwrap();
        let k = heat_kernel(&spec, 0.4).unwrap();
        assert_eq!(k.symmetry_defect(), 0.0);
        for v in k.values.iter() {
            assert!(*v > 0.0, "full-space kernel must be strictly positive");
        }
    }

    #[test]
    fn semigroup_markov_and_identity() {
        let g = random_graph(20, 3);
        let part = full_part(&g);
        let spec = full_spectrum(&part).unwrap();
        let ones = vec![1.0; 20];
        // P_0 f = f
        let f0: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let p0 = semigroup_apply(&spec, 0.0, &f0).unwrap();
        for (a, b) in p0.iter().zip(&f0) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
        // P_t 1 = 1
        let p1 = semigroup_apply(&spec, 0.5, &ones).unwrap();
        for v in &p1 {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-10);
        }
        // Markov bounds
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let pf = semigroup_apply(&spec, 0.5, &f).unwrap();
        for v in &pf {
            assert!(*v >= -1e-10 && *v <= 1.0 + 1e-10);
        }
        // contraction in the m-weighted norm
        let norm = |u: &[f64]| -> f64 {
            u.iter()
                .zip(g.measure())
                .map(|(x, m)| x * x * m)
                .sum::<f64>()
                .sqrt()
        };
        assert!(norm(&pf) <= norm(&f) + 1e-12);
    }

    #[test]
    fn nested_ball_monotonicity() {
        let g = path_graph(9);
        let f = GraphDirichletForm::from_graph(&g);
        let s = geodesic_space(&g, 4).unwrap();
        let fam =
            kernel_limit_in_r(&f, &s, 4, &[1.0, 2.0, 3.0, 4.0, 10.0, 11.0], 0.5, 3000).unwrap();
        // identical interiors for R beyond the diameter: zero gap
        assert_relative_eq!(*fam.sup_gaps.last().unwrap(), 0.0, epsilon = 1e-15);
        assert!(fam.sup_gaps[0] > 0.0);
    }

    #[test]
    fn eigenvalue_domain_monotonicity() {
        let g = path_graph(9);
        let f = GraphDirichletForm::from_graph(&g);
        let s = geodesic_space(&g, 4).unwrap();
        let p1 = assemble_part(&f, &s, 4, 2.0).unwrap();
        let p2 = assemble_part(&f, &s, 4, 4.0).unwrap();
        let s1 = full_spectrum(&p1).unwrap();
        let s2 = full_spectrum(&p2).unwrap();
        for j in 0..s1.count().min(s2.count()) {
            assert!(
                s2.lambdas[j] <= s1.lambdas[j] + 1e-12,
                "lambda_{j} increased for the larger ball"
            );
        }
    }

    #[test]
    fn krylov_matches_dense_on_lowest_modes() {
        let g = random_graph(60, 11);
        let part = full_part(&g);
        let dense = full_spectrum(&part).unwrap();
        let partial = spectrum_with(&part, 10, 30, 5).unwrap();
        assert!(!partial.complete);
        for j in 0..10 {
            assert_relative_eq!(partial.lambdas[j], dense.lambdas[j], epsilon = 1e-8);
        }
        assert!(partial.gram_defect() <= 1e-9);
        // kernels built from the partial spectrum agree where the truncation
        // bound is negligible
        let t = 2.0;
        assert!(partial.truncation_bound(t) < 1e-10);
        let kd = heat_kernel(&dense, t).unwrap();
        let kp = heat_kernel(&partial, t).unwrap();
        let mut worst = 0.0f64;
        for i in 0..60 {
            for j in 0..60 {
                worst = worst.max((kd.values[(i, j)] - kp.values[(i, j)]).abs());
            }
        }
        assert!(worst < 1e-8, "partial kernel deviates by {worst}");
    }

    #[test]
    fn kernel_rows_match_full() {
        let g = random_graph(15, 9);
        let part = full_part(&g);
        let spec = full_spectrum(&part).unwrap();
        let k = heat_kernel(&spec, 0.6).unwrap();
        let rows = kernel_rows(&spec, 0.6, &[0, 3, 7]);
        for (ri, &r) in [0usize, 3, 7].iter().enumerate() {
            for j in 0..15 {
                assert_relative_eq!(rows[(ri, j)], k.values[(r, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_time() {
        let g = two_vertex_graph();
        let part = full_part(&g);
        let spec = full_spectrum(&part).unwrap();
        assert!(heat_kernel(&spec, 0.0).is_err());
        assert!(heat_kernel(&spec, -1.0).is_err());
        assert!(semigroup_apply(&spec, -0.1, &[1.0, 1.0]).is_err());
    }
}
