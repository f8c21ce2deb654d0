//! Laplacian spectrum: Fiedler number, Fiedler vector and its multiplicity,
//! the Clarke subgradient element `(v_u − v_v)²`, and a brute-force Cheeger
//! constant for small graphs.

use crate::error::{NetError, Result};
use crate::graph::{support_is_connected, Conductivities, Network};
use crate::linalg::{symmetric_eigenvalues, DenseMatrix, SymmetricEigen};

/// Eigenvalues within `max(abs, rel·λ₁)` of `λ₁` count toward its
/// multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for GapTolerance {
    fn default() -> Self {
        GapTolerance { abs: 1e-8, rel: 1e-8 }
    }
}

impl GapTolerance {
    pub fn width(&self, fiedler: f64) -> f64 {
        self.abs.max(self.rel * fiedler.abs())
    }
}

#[derive(Clone, Debug)]
pub struct SpectralResult {
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Second smallest eigenvalue (0 for a single vertex).
    pub fiedler: f64,
    /// Unit vector in the `fiedler` eigenspace, orthogonal to the constant
    /// vector, with its first non-negligible entry positive.
    pub fiedler_vector: Vec<f64>,
    pub multiplicity: usize,
    pub simple: bool,
}

impl SpectralResult {
    /// `λ_k` (0-based) if it exists.
    pub fn eigenvalue(&self, k: usize) -> Option<f64> {
        self.eigenvalues.get(k).copied()
    }
}

/// Eigenvalues with the Fiedler number and its multiplicity, without vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSummary {
    pub eigenvalues: Vec<f64>,
    pub fiedler: f64,
    pub multiplicity: usize,
}

impl EigenSummary {
    fn from_values(eigenvalues: Vec<f64>, tol: GapTolerance) -> EigenSummary {
        let (fiedler, multiplicity) = match eigenvalues.get(1) {
            Some(&f) => {
                let width = tol.width(f);
                (f, eigenvalues.iter().filter(|&&x| (x - f).abs() <= width).count())
            }
            None => (0.0, 1),
        };
        EigenSummary {
            eigenvalues,
            fiedler,
            multiplicity,
        }
    }

    pub fn eigenvalue(&self, k: usize) -> Option<f64> {
        self.eigenvalues.get(k).copied()
    }
}

impl From<&SpectralResult> for EigenSummary {
    fn from(s: &SpectralResult) -> EigenSummary {
        EigenSummary {
            eigenvalues: s.eigenvalues.clone(),
            fiedler: s.fiedler,
            multiplicity: s.multiplicity,
        }
    }
}

fn check_symmetric(mat: &DenseMatrix) -> Result<()> {
    if !mat.is_finite() {
        return Err(NetError::InvalidParameter("matrix has non-finite entries".into()));
    }
    let asym = mat.max_asymmetry();
    if asym > 1e-12 * mat.max_abs().max(1.0) {
        return Err(NetError::NonSymmetric(asym));
    }
    Ok(())
}

/// Eigenvalues, Fiedler number and multiplicity of a symmetric matrix.
pub fn eigen_summary(mat: &DenseMatrix, tol: GapTolerance) -> Result<EigenSummary> {
    check_symmetric(mat)?;
    Ok(EigenSummary::from_values(symmetric_eigenvalues(mat), tol))
}

/// Matrix Laplacian `D − C`. With `use_lengths` the weights are `C_e / L_e`.
pub fn laplacian(net: &Network, c: &Conductivities, use_lengths: bool) -> Result<DenseMatrix> {
    net.check_conductivities(c)?;
    let mut lap = DenseMatrix::zeros(net.vertex_count());
    for (id, e) in net.edges().iter().enumerate() {
        let w = if use_lengths { c.get(id) / e.length } else { c.get(id) };
        lap[(e.u, e.u)] += w;
        lap[(e.v, e.v)] += w;
        lap[(e.u, e.v)] -= w;
        lap[(e.v, e.u)] -= w;
    }
    Ok(lap)
}

pub fn spectral_decompose(mat: &DenseMatrix) -> Result<SpectralResult> {
    spectral_decompose_with(mat, GapTolerance::default())
}

pub fn spectral_decompose_with(mat: &DenseMatrix, tol: GapTolerance) -> Result<SpectralResult> {
    check_symmetric(mat)?;
    let n = mat.dim();
    let eig = SymmetricEigen::new(mat);
    if n < 2 {
        return Ok(SpectralResult {
            fiedler: 0.0,
            fiedler_vector: vec![0.0; n],
            multiplicity: 1,
            simple: true,
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
        });
    }
    let fiedler = eig.values[1];
    let width = tol.width(fiedler);
    let cluster: Vec<usize> = (0..n)
        .filter(|&k| (eig.values[k] - fiedler).abs() <= width)
        .collect();
    let multiplicity = cluster.len();

    // First cluster member with a usable component orthogonal to 𝟏. For a
    // connected support this is eigenvector 1 itself.
    let mut fiedler_vector = None;
    for &k in cluster.iter().filter(|&&k| k >= 1).chain(cluster.iter().filter(|&&k| k == 0)) {
        let v = &eig.vectors[k];
        let mean = v.iter().sum::<f64>() / n as f64;
        let w: Vec<f64> = v.iter().map(|x| x - mean).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            fiedler_vector = Some(w.into_iter().map(|x| x / norm).collect::<Vec<_>>());
            break;
        }
    }
    let mut fiedler_vector = fiedler_vector.unwrap_or_else(|| eig.vectors[1].clone());
    fix_sign(&mut fiedler_vector);

    Ok(SpectralResult {
        fiedler,
        fiedler_vector,
        multiplicity,
        simple: multiplicity == 1,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
    })
}

fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-9 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Fiedler number `f[C]` of the raw conductivity Laplacian.
pub fn fiedler(net: &Network, c: &Conductivities) -> Result<f64> {
    Ok(spectral_decompose(&laplacian(net, c, false)?)?.fiedler)
}

/// Per-edge `(v_u − v_v)²` for the Fiedler vector `v` of `spec`. Valid as a
/// Clarke subgradient element for any multiplicity.
pub fn subgradient_from(net: &Network, spec: &SpectralResult) -> Vec<f64> {
    let v = &spec.fiedler_vector;
    net.edges()
        .iter()
        .map(|e| {
            let d = v[e.u] - v[e.v];
            d * d
        })
        .collect()
}

/// Clarke subgradient element of `f` at `C`. Requires a connected support.
pub fn fiedler_subgradient(net: &Network, c: &Conductivities) -> Result<Vec<f64>> {
    net.check_conductivities(c)?;
    if !support_is_connected(net, c) {
        return Err(NetError::DisconnectedSupport);
    }
    let spec = spectral_decompose(&laplacian(net, c, false)?)?;
    Ok(subgradient_from(net, &spec))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeReport {
    pub pass: bool,
    /// Largest amount by which the inequality was violated (≤ 0 when it
    /// held everywhere).
    pub worst_violation: f64,
}

/// Checks `f(αC¹ + (1−α)C²) ≥ α f(C¹) + (1−α) f(C²) − 1e−9` at
/// `α = i/(samples+1)`, `i = 1..=samples`.
pub fn fiedler_concavity_probe(
    net: &Network,
    c1: &Conductivities,
    c2: &Conductivities,
    samples: usize,
) -> Result<ProbeReport> {
    let f1 = fiedler(net, c1)?;
    let f2 = fiedler(net, c2)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=samples {
        let alpha = i as f64 / (samples + 1) as f64;
        let fm = fiedler(net, &c1.lerp(c2, alpha))?;
        worst = worst.max(alpha * f1 + (1.0 - alpha) * f2 - fm);
    }
    if samples == 0 {
        worst = 0.0;
    }
    Ok(ProbeReport {
        pass: worst <= 1e-9,
        worst_violation: worst,
    })
}

/// Vertex limit for [`cheeger_bruteforce`].
pub const CHEEGER_MAX_VERTICES: usize = 16;

/// Cheeger constant of the unweighted support graph of `C`:
/// `min |∂W| / |W|` over nonempty `W` with `|W| ≤ |V|/2`.
pub fn cheeger_bruteforce(net: &Network, c: &Conductivities) -> Result<f64> {
    net.check_conductivities(c)?;
    let n = net.vertex_count();
    if n > CHEEGER_MAX_VERTICES {
        return Err(NetError::TooLarge {
            limit: CHEEGER_MAX_VERTICES,
            actual: n,
        });
    }
    if n < 2 {
        return Ok(0.0);
    }
    let support: Vec<(usize, usize)> = net
        .edges()
        .iter()
        .enumerate()
        .filter(|(id, _)| c.get(*id) > 0.0)
        .map(|(_, e)| (e.u, e.v))
        .collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if 2 * size > n {
            continue;
        }
        let boundary = support
            .iter()
            .filter(|&&(u, v)| ((mask >> u) & 1) != ((mask >> v) & 1))
            .count();
        best = best.min(boundary as f64 / size as f64);
    }
    Ok(best)
}

/// Maximum vertex degree of the support of `C`.
pub fn max_degree(net: &Network, c: &Conductivities) -> usize {
    let mut deg = vec![0usize; net.vertex_count()];
    for (id, e) in net.edges().iter().enumerate() {
        if c.get(id) > 0.0 {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
    }
    deg.into_iter().max().unwrap_or(0)
}
