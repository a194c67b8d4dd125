//! Monte Carlo evaluation of Gauss-type configuration integrals.
//!
//! Every factor of an integrand is the pullback of the unit-volume form of a
//! sphere S^p along a Gauss map u(w) = w/‖w‖, where w is a difference of two
//! configuration points (θ: ambient points ψ(x) or y in ℝⁿ⁺², p = n+1;
//! η: knot points in ℝⁿ, p = n−1).  At a configuration point the density of
//! the wedge ω_1 ∧ … ∧ ω_r against the coordinate volume is
//!
//! ```text
//!   ε · det M / Π_e (‖w_e‖^{p_e+1} · vol S^{p_e})
//! ```
//!
//! where M stacks, per factor, the block [w_e | Dw_e] (one radial column per
//! factor, then the configuration Jacobian columns) and ε = Π_i (−1)^{p_i (r−i)}
//! moves the radial columns into place.  Factors are evaluated in a canonical
//! order and the graded sign of the reordering is applied afterwards, so the
//! sign identities under factor swaps and edge reversals hold bit-exactly.
//!
//! Integration is over the open configuration space: samples closer than the
//! cutoff δ are dropped, noncompact ℝⁿ factors are sampled through the
//! tangent substitution x = tan(π(u − ½)) per coordinate, and batches own
//! independent ChaCha8 streams so estimates are bit-reproducible.

use crate::diagram::{EdgeKind, JacobiDiagram};
use crate::Error;
use nalgebra::{DMatrix, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative singular-value threshold below which a density matrix counts as
/// rank-deficient and the density is returned as exactly 0.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Volume of the unit sphere S^p ⊂ ℝ^{p+1}.
pub fn sphere_volume(p: usize) -> f64 {
    match p {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (p as f64 - 1.0) * sphere_volume(p - 2),
    }
}

/// Unit vector (b − a)/‖b − a‖.
pub fn gauss_direction(a: &[f64], b: &[f64]) -> Result<Vec<f64>, Error> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!("dimension mismatch {} vs {}", a.len(), b.len())));
    }
    let w: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let r = norm(&w);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Validation("coincident points have no Gauss direction".into()));
    }
    Ok(w.into_iter().map(|x| x / r).collect())
}

fn norm(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

/// A long embedding ℝⁿ → ℝⁿ⁺², standard (x ↦ (x, 0, 0)) outside a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Embedding {
    /// x ↦ (x, 0, 0).
    StandardPlane { n: usize },
    /// x ↦ (x + A·x₂·g(x)·e₁, A·g(x), A·x₁·g(x)) with g(x) = exp(−‖x‖²), an
    /// unknotted bump (injective for |A| < 1).  The tangential shear matters:
    /// for a graph x ↦ (x, f(x)) three rays from one ambient point keep
    /// x₂ − x₁ and its variations in one plane, so every C_{3,1} density
    /// vanishes identically.
    Bump { n: usize, amplitude: f64 },
}

impl Embedding {
    /// Source dimension n.
    pub fn n(&self) -> usize {
        match self {
            Embedding::StandardPlane { n } | Embedding::Bump { n, .. } => *n,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let n = self.n();
        if n < 1 {
            return Err(Error::Validation("embedding source dimension must be ≥ 1".into()));
        }
        if let Embedding::Bump { amplitude, .. } = self {
            if !(amplitude.abs() < 1.0) {
                return Err(Error::Validation("bump amplitude must satisfy |A| < 1".into()));
            }
        }
        Ok(())
    }

    /// ψ(x) ∈ ℝⁿ⁺².
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        match self {
            Embedding::StandardPlane { .. } => p.extend([0.0, 0.0]),
            Embedding::Bump { amplitude, .. } => {
                let g = (-x.iter().map(|c| c * c).sum::<f64>()).exp();
                p[0] += amplitude * x.get(1).copied().unwrap_or(0.0) * g;
                p.extend([amplitude * g, amplitude * x[0] * g]);
            }
        }
        p
    }

    /// Dψ(x), an (n+2)×n matrix.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut j = DMatrix::zeros(n + 2, n);
        for i in 0..n {
            j[(i, i)] = 1.0;
        }
        if let Embedding::Bump { amplitude, .. } = self {
            let g = (-x.iter().map(|c| c * c).sum::<f64>()).exp();
            let x2 = x.get(1).copied().unwrap_or(0.0);
            for i in 0..n {
                j[(0, i)] += amplitude * (-2.0 * x[i] * x2 * g + if i == 1 { g } else { 0.0 });
                j[(n, i)] = amplitude * (-2.0 * x[i] * g);
                j[(n + 1, i)] = amplitude * (-2.0 * x[i] * x[0] * g + if i == 0 { g } else { 0.0 });
            }
        }
        j
    }
}

// ---------------------------------------------------------------------------
// Wedge densities
// ---------------------------------------------------------------------------

/// An endpoint of a Gauss factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    /// The i-th knot point x_i ∈ ℝⁿ (enters θ-factors through ψ).
    Knot(usize),
    /// The i-th ambient point y_i ∈ ℝⁿ⁺².
    Ambient(usize),
}

/// One Gauss factor of an integrand, directed `from → to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    /// u(P_to − P_from)*ω_{n+1}.
    Theta { from: Point, to: Point },
    /// u′(x_to − x_from)*ω_{n−1}; both endpoints are knot points.
    Eta { from: usize, to: usize },
}

impl Factor {
    /// Form degree p of the factor for knots ℝⁿ → ℝⁿ⁺².
    pub fn degree(&self, n: usize) -> usize {
        match self {
            Factor::Theta { .. } => n + 1,
            Factor::Eta { .. } => n - 1,
        }
    }

    /// Order key independent of the edge direction.
    fn key(&self) -> (u8, Point, Point) {
        let (k, a, b) = match *self {
            Factor::Theta { from, to } => (0, from, to),
            Factor::Eta { from, to } => (1, Point::Knot(from), Point::Knot(to)),
        };
        (k, a.min(b), a.max(b))
    }

    /// The same factor with its direction reversed.
    pub fn reversed(&self) -> Factor {
        match *self {
            Factor::Theta { from, to } => Factor::Theta { from: to, to: from },
            Factor::Eta { from, to } => Factor::Eta { from: to, to: from },
        }
    }
}

/// A point of C_{q,s}: q knot points in ℝⁿ and s ambient points in ℝⁿ⁺².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub knot: Vec<Vec<f64>>,
    pub ambient: Vec<Vec<f64>>,
}

impl Configuration {
    /// Coordinate dimension q·n + s·(n+2).
    pub fn dim(&self, n: usize) -> usize {
        self.knot.len() * n + self.ambient.len() * (n + 2)
    }

    /// Smallest pairwise distance among knot points and among ambient points
    /// (knot points measured through ψ against ambient points).
    pub fn min_separation(&self, emb: &Embedding) -> f64 {
        let images: Vec<Vec<f64>> = self.knot.iter().map(|x| emb.eval(x)).chain(self.ambient.iter().cloned()).collect();
        let mut m = f64::INFINITY;
        for i in 0..self.knot.len() {
            for j in i + 1..self.knot.len() {
                m = m.min(dist(&self.knot[i], &self.knot[j]));
            }
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if i < self.knot.len() && j < self.knot.len() {
                    continue;
                }
                m = m.min(dist(&images[i], &images[j]));
            }
        }
        m
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The wedge factors of a diagram: edges in list order, except that the two
/// ingoing θ-edges of each internal vertex occupy their slots in orientation
/// order.  External vertex v is knot point v; internal vertex v is ambient
/// point v − #external.
pub fn diagram_factors(d: &JacobiDiagram) -> Result<Vec<Factor>, Error> {
    if !d.is_valid() {
        return Err(Error::Validation(format!("invalid diagram: {:?}", d.validate())));
    }
    let ext = d.external_count();
    let point = |v: usize| if d.is_external(v) { Point::Knot(v) } else { Point::Ambient(v - ext) };
    let mut order: Vec<usize> = (0..d.edges().len()).collect();
    for [a, b] in d.orientation().values() {
        let (lo, hi) = (*a.min(b), *a.max(b));
        order[lo] = *a;
        order[hi] = *b;
    }
    Ok(order
        .into_iter()
        .map(|i| {
            let e = d.edges()[i];
            match e.kind {
                EdgeKind::Theta => Factor::Theta { from: point(e.src), to: point(e.dst) },
                EdgeKind::Eta => Factor::Eta { from: e.src, to: e.dst },
            }
        })
        .collect())
}

/// Density of ω(Γ) at a configuration point.
pub fn form_density(d: &JacobiDiagram, emb: &Embedding, cfg: &Configuration) -> Result<f64, Error> {
    if cfg.knot.len() != d.external_count() || cfg.ambient.len() != d.internal_count() {
        return Err(Error::Validation(format!(
            "configuration has {}+{} points, diagram needs {}+{}",
            cfg.knot.len(),
            cfg.ambient.len(),
            d.external_count(),
            d.internal_count()
        )));
    }
    wedge_density(&diagram_factors(d)?, emb, cfg)
}

fn check_degree(factors: &[Factor], emb: &Embedding, cfg: &Configuration) -> Result<(), Error> {
    emb.validate()?;
    let n = emb.n();
    if cfg.knot.iter().any(|x| x.len() != n) || cfg.ambient.iter().any(|y| y.len() != n + 2) {
        return Err(Error::Validation("configuration point has the wrong dimension".into()));
    }
    let deg: usize = factors.iter().map(|f| f.degree(n)).sum();
    if deg != cfg.dim(n) {
        return Err(Error::Validation(format!("form degree {deg} ≠ configuration dimension {}", cfg.dim(n))));
    }
    for f in factors {
        let ok = match *f {
            Factor::Theta { from, to } => from != to && [from, to].iter().all(|p| in_range(*p, cfg)),
            Factor::Eta { from, to } => from != to && from < cfg.knot.len() && to < cfg.knot.len(),
        };
        if !ok {
            return Err(Error::Validation(format!("factor {f:?} has a bad endpoint")));
        }
    }
    Ok(())
}

fn in_range(p: Point, cfg: &Configuration) -> bool {
    match p {
        Point::Knot(i) => i < cfg.knot.len(),
        Point::Ambient(i) => i < cfg.ambient.len(),
    }
}

/// Density of ω_1 ∧ … ∧ ω_r (in the given order) at a configuration point.
///
/// Returns exactly 0 when two factors share an endpoint pair (their Gauss maps
/// agree up to the antipode) or when the stacked matrix is numerically
/// rank-deficient.
pub fn wedge_density(factors: &[Factor], emb: &Embedding, cfg: &Configuration) -> Result<f64, Error> {
    check_degree(factors, emb, cfg)?;
    let n = emb.n();
    let mut idx: Vec<usize> = (0..factors.len()).collect();
    idx.sort_by_key(|&i| factors[i].key());
    if idx.windows(2).any(|w| factors[w[0]].key() == factors[w[1]].key()) {
        return Ok(0.0);
    }
    // graded sign of the reordering input → canonical
    let mut sign = 1.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if idx[a] > idx[b] && (factors[idx[a]].degree(n) * factors[idx[b]].degree(n)) % 2 == 1 {
                sign = -sign;
            }
        }
    }
    let canonical: Vec<Factor> = idx.iter().map(|&i| factors[i]).collect();
    Ok(sign * ordered_density(&canonical, emb, cfg, true)?)
}

/// The raw block determinant in the given factor order, without the
/// canonical reordering or the shared-endpoint shortcut.
pub fn raw_wedge_density(factors: &[Factor], emb: &Embedding, cfg: &Configuration) -> Result<f64, Error> {
    check_degree(factors, emb, cfg)?;
    ordered_density(factors, emb, cfg, false)
}

fn ordered_density(factors: &[Factor], emb: &Embedding, cfg: &Configuration, rank_check: bool) -> Result<f64, Error> {
    let n = emb.n();
    let q = cfg.knot.len();
    let col_of = |p: Point| match p {
        Point::Knot(i) => i * n,
        Point::Ambient(i) => q * n + i * (n + 2),
    };
    let psi: Vec<Vec<f64>> = cfg.knot.iter().map(|x| emb.eval(x)).collect();
    let jac: Vec<DMatrix<f64>> = cfg.knot.iter().map(|x| emb.jacobian(x)).collect();
    let r = factors.len();
    let size = r + cfg.dim(n);
    let mut m = DMatrix::<f64>::zeros(size, size);
    let mut row = 0;
    let mut scale = 1.0;
    for (e, f) in factors.iter().enumerate() {
        let p = f.degree(n);
        let w: Vec<f64> = match *f {
            Factor::Theta { from, to } => {
                let at = |pt: Point| match pt {
                    Point::Knot(i) => psi[i].clone(),
                    Point::Ambient(i) => cfg.ambient[i].clone(),
                };
                let (a, b) = (at(from), at(to));
                for (pt, s) in [(to, 1.0), (from, -1.0)] {
                    let c0 = r + col_of(pt);
                    match pt {
                        Point::Knot(i) => {
                            for rr in 0..n + 2 {
                                for cc in 0..n {
                                    m[(row + rr, c0 + cc)] += s * jac[i][(rr, cc)];
                                }
                            }
                        }
                        Point::Ambient(_) => {
                            for rr in 0..n + 2 {
                                m[(row + rr, c0 + rr)] += s;
                            }
                        }
                    }
                }
                b.iter().zip(&a).map(|(x, y)| x - y).collect()
            }
            Factor::Eta { from, to } => {
                for (i, s) in [(to, 1.0), (from, -1.0)] {
                    for rr in 0..n {
                        m[(row + rr, r + i * n + rr)] += s;
                    }
                }
                cfg.knot[to].iter().zip(&cfg.knot[from]).map(|(x, y)| x - y).collect()
            }
        };
        let len = norm(&w);
        if len == 0.0 || !len.is_finite() {
            return Err(Error::Validation("coincident points have no Gauss direction".into()));
        }
        for (i, x) in w.iter().enumerate() {
            m[(row + i, e)] = *x;
        }
        scale *= len.powi(p as i32 + 1) * sphere_volume(p);
        if (p * (r - 1 - e)) % 2 == 1 {
            scale = -scale;
        }
        row += p + 1;
    }
    if rank_check {
        let sv = m.clone().singular_values();
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
        if lo <= RANK_TOLERANCE * hi {
            return Ok(0.0);
        }
    }
    Ok(m.determinant() / scale)
}

// ---------------------------------------------------------------------------
// Batched estimation
// ---------------------------------------------------------------------------

/// Sampling parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MCConfig {
    /// Total number of samples N.
    pub samples: u64,
    pub seed: u64,
    /// Diagonal cutoff: samples with two points closer than δ are dropped.
    pub delta: f64,
    /// Number of batches (independent streams) used for the error bar.
    pub batches: usize,
    /// Average each sample with its mirror image (normal coordinates of the
    /// ambient points negated); unbiased because the proposal is symmetric.
    #[serde(default)]
    pub antithetic: bool,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 42, delta: 1e-6, batches: 64, antithetic: false }
    }
}

impl MCConfig {
    pub fn with_samples(samples: u64, seed: u64) -> Self {
        Self { samples, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.samples < 1 {
            return Err(Error::Validation("sample count must be ≥ 1".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Validation("cutoff δ must be > 0".into()));
        }
        if self.batches < 2 || self.batches as u64 > self.samples {
            return Err(Error::Validation("need 2 ≤ batches ≤ samples".into()));
        }
        Ok(())
    }
}

/// A Monte Carlo estimate with batch error bars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean, from the spread of the batch means.
    pub stderr: f64,
    pub batch_means: Vec<f64>,
    /// Samples surviving the diagonal cutoff.
    pub n_effective: u64,
    pub n_requested: u64,
    /// Set when the first and second halves of the batches disagree on the
    /// spread by more than a factor 4 (heavy tails).
    pub nonconvergent: bool,
}

impl Estimate {
    fn from_batches(batch_means: Vec<f64>, n_effective: u64, n_requested: u64) -> Self {
        let b = batch_means.len() as f64;
        let mean = batch_means.iter().sum::<f64>() / b;
        let sd = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0).max(1.0)).sqrt()
        };
        let s = sd(&batch_means);
        let stderr = s / b.sqrt();
        let half = batch_means.len() / 2;
        let nonconvergent = if half >= 2 {
            let (s1, s2) = (sd(&batch_means[..half]), sd(&batch_means[half..]));
            !stderr.is_finite() || s1 > 4.0 * s2 || s2 > 4.0 * s1
        } else {
            !stderr.is_finite()
        };
        Self { mean, stderr, batch_means, n_effective, n_requested, nonconvergent }
    }

    /// Linear combination Σ c_i E_i computed batch by batch (all estimates
    /// must come from the same sample stream).
    pub fn combine(parts: &[(f64, &Estimate)]) -> Estimate {
        let nb = parts[0].1.batch_means.len();
        let means = (0..nb).map(|b| parts.iter().map(|(c, e)| c * e.batch_means[b]).sum()).collect();
        let eff = parts.iter().map(|(_, e)| e.n_effective).min().unwrap_or(0);
        Estimate::from_batches(means, eff, parts[0].1.n_requested)
    }
}

/// Runs `f` over `cfg.samples` draws split into batches; batch b draws from
/// stream b of a ChaCha8 generator seeded with `cfg.seed`.  `None` marks a
/// sample removed by the cutoff (it contributes 0 to the integral).
pub fn run_batched<const K: usize, F>(cfg: &MCConfig, f: F) -> Result<[Estimate; K], Error>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<[f64; K]>, Error> + Sync,
{
    cfg.validate()?;
    let nb = cfg.batches as u64;
    let per = cfg.samples / nb;
    let extra = cfg.samples % nb;
    let results: Vec<Result<([f64; K], u64, u64), Error>> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b);
            let count = per + u64::from(b < extra);
            let mut sums = [0.0; K];
            let mut kept = 0;
            for _ in 0..count {
                if let Some(v) = f(&mut rng)? {
                    kept += 1;
                    for (s, x) in sums.iter_mut().zip(v) {
                        *s += x;
                    }
                }
            }
            Ok((sums, kept, count))
        })
        .collect();
    let mut batch_means = vec![Vec::with_capacity(cfg.batches); K];
    let mut eff = 0;
    for r in results {
        let (sums, kept, count) = r?;
        eff += kept;
        for (k, s) in sums.iter().enumerate() {
            batch_means[k].push(s / count as f64);
        }
    }
    Ok(batch_means
        .into_iter()
        .map(|m| Estimate::from_batches(m, eff, cfg.samples))
        .collect::<Vec<_>>()
        .try_into()
        .expect("K estimates"))
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let r = norm(&v);
        if r > 1e-12 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

// ---------------------------------------------------------------------------
// Linking of closed pieces
// ---------------------------------------------------------------------------

/// A round p-sphere (p ∈ {1, 3}) in ℝᵐ: centre + radius·(unit vector in the
/// span of `basis`).  Orientation: (outward normal, tangent frame) is
/// positive in the ordered basis; `reversed` flips it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpherePiece {
    pub center: Vec<f64>,
    pub radius: f64,
    /// p + 1 orthonormal vectors of ℝᵐ.
    pub basis: Vec<Vec<f64>>,
    #[serde(default)]
    pub reversed: bool,
}

impl SpherePiece {
    /// Sphere dimension p.
    pub fn dim(&self) -> usize {
        self.basis.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let m = self.center.len();
        if !matches!(self.dim(), 1 | 3) {
            return Err(Error::Validation(format!("sphere pieces of dimension {} are not supported", self.dim())));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Validation("radius must be > 0".into()));
        }
        for (i, u) in self.basis.iter().enumerate() {
            if u.len() != m {
                return Err(Error::Validation("basis vector has the wrong dimension".into()));
            }
            for (j, v) in self.basis.iter().enumerate() {
                let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                if (d - if i == j { 1.0 } else { 0.0 }).abs() > 1e-9 {
                    return Err(Error::Validation("basis is not orthonormal".into()));
                }
            }
        }
        Ok(())
    }

    /// Volume radius^p · vol S^p.
    pub fn volume(&self) -> f64 {
        self.radius.powi(self.dim() as i32) * sphere_volume(self.dim())
    }

    fn lift(&self, c: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.center.len()];
        for (ci, b) in c.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += ci * bi;
            }
        }
        x
    }

    /// Euclidean distance from x to the sphere.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        let c: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let par: Vec<f64> = self.basis.iter().map(|b| b.iter().zip(&c).map(|(u, v)| u * v).sum()).collect();
        let perp2 = (c.iter().map(|v| v * v).sum::<f64>() - par.iter().map(|v| v * v).sum::<f64>()).max(0.0);
        (perp2 + (norm(&par) - self.radius).powi(2)).sqrt()
    }

    /// Deterministic scan points (equally spaced for circles, seeded for
    /// 3-spheres) and their typical spacing.
    fn scan(&self) -> (Vec<Vec<f64>>, f64) {
        let lift = |u: &[f64]| -> Vec<f64> {
            self.lift(u).iter().zip(&self.center).map(|(x, c)| c + self.radius * x).collect()
        };
        if self.dim() == 1 {
            let m = 4096;
            let pts = (0..m).map(|i| {
                let s = 2.0 * PI * i as f64 / m as f64;
                lift(&[s.cos(), s.sin()])
            });
            (pts.collect(), self.volume() / m as f64)
        } else {
            let m = 65536;
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let pts = (0..m).map(|_| lift(&unit_vector(&mut rng, 4)));
            (pts.collect(), (self.volume() / m as f64).cbrt())
        }
    }

    /// A uniform point and an oriented unit tangent frame there.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Vec<f64>>) {
        let u = unit_vector(rng, self.dim() + 1);
        let frame: Vec<Vec<f64>> = match self.dim() {
            1 => vec![vec![-u[1], u[0]]],
            _ => {
                let (a, b, c, d) = (u[0], u[1], u[2], u[3]);
                // left multiplication by i, j, k on the unit quaternion u
                vec![vec![-b, a, -d, c], vec![-c, d, a, -b], vec![-d, -c, b, a]]
            }
        };
        let mut tangents: Vec<Vec<f64>> = frame.iter().map(|t| self.lift(t)).collect();
        if self.reversed {
            for x in tangents[0].iter_mut() {
                *x = -*x;
            }
        }
        let p = self.lift(&u).iter().zip(&self.center).map(|(x, c)| c + self.radius * x).collect();
        (p, tangents)
    }
}

/// The Hopf pair in ℝ⁵: the unit circle in the e₁e₂-plane and the unit
/// 3-sphere centred at e₁ inside the hyperplane x₂ = 0.  The squared distance
/// between points is 1 + 2(1 + u₀)(1 − cos s) ≥ 1, so the integrand is
/// bounded; the orientations give linking number +1.
pub fn hopf_pair() -> (SpherePiece, SpherePiece) {
    let e = |i: usize| {
        let mut v = vec![0.0; 5];
        v[i] = 1.0;
        v
    };
    let circle = SpherePiece { center: vec![0.0; 5], radius: 1.0, basis: vec![e(0), e(1)], reversed: false };
    let sphere = SpherePiece { center: e(0), radius: 1.0, basis: vec![e(0), e(2), e(3), e(4)], reversed: true };
    (circle, sphere)
}

/// Normalized Gauss integral (1/vol S^{m−1}) ∫_{A×B} u(b − a)*ω_{m−1}, the
/// degree of (a, b) ↦ (b − a)/‖b − a‖.
pub fn linking_estimate(a: &SpherePiece, b: &SpherePiece, cfg: &MCConfig) -> Result<Estimate, Error> {
    a.validate()?;
    b.validate()?;
    let m = a.center.len();
    if b.center.len() != m || a.dim() + b.dim() + 1 != m {
        return Err(Error::Validation(format!(
            "pieces of dimensions {} and {} do not link in ℝ^{m}",
            a.dim(),
            b.dim()
        )));
    }
    // overlap pre-scan of the lower-dimensional piece against the other
    let (lo, hi) = if a.dim() <= b.dim() { (a, b) } else { (b, a) };
    let (pts, spacing) = lo.scan();
    let closest = pts.iter().map(|x| hi.distance_to(x)).fold(f64::INFINITY, f64::min);
    if closest < (4.0 * spacing).max(cfg.delta) {
        return Err(Error::Validation(format!("pieces overlap (closest scanned distance {closest:.3e})")));
    }
    let weight = a.volume() * b.volume() / sphere_volume(m - 1);
    let [e] = run_batched(cfg, |rng| {
        let (pa, ta) = a.sample(rng);
        let (pb, tb) = b.sample(rng);
        let w: Vec<f64> = pb.iter().zip(&pa).map(|(x, y)| x - y).collect();
        let r = norm(&w);
        if r < cfg.delta {
            return Ok(None);
        }
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            mat[(i, 0)] = w[i];
            for (c, t) in ta.iter().enumerate() {
                mat[(i, 1 + c)] = -t[i];
            }
            for (c, t) in tb.iter().enumerate() {
                mat[(i, 1 + ta.len() + c)] = t[i];
            }
        }
        Ok(Some([mat.determinant() / r.powi(m as i32) * weight]))
    })?;
    Ok(e)
}

// ---------------------------------------------------------------------------
// The unit integral at one crossing of a wheel embedding
// ---------------------------------------------------------------------------

/// Largest ε accepted by [`phi_difference_estimate`].
pub const MAX_PHI_EPS: f64 = 0.25;

/// Local model of one crossing of the wheel embedding ψ^S(W_k), n = 3.
///
/// Around crossing j the annulus A_j = {ε/2 ≤ ‖a − c‖ ≤ 2ε/3} (c at
/// (j+1, 0, 0)) is mapped to a ρ-thickened arc γ(s) = (0, 0, 0, r cos πs,
/// ±r sin πs) with r = ε/2 and ρ = r/4, s = (‖a − c‖ − ε/2)/(ε/6); the sign
/// selects the clasped (+) or unclasped (−) arc, which agree on ∂A_j.  The
/// disk D_j is the ball of radius ε² about its centre, scaled by λ = R/ε²
/// onto the flat ball of radius R = 1/ε in ℝ³ × 0.  Φ_j is the integral over
/// A_j × D_j of u(ψa − ψd)*ω₄ ∧ u′(c − a)*ω₂.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingModel {
    pub eps: f64,
    pub r: f64,
    pub rho: f64,
    pub t0: f64,
    pub t1: f64,
    /// Image radius of D_j.
    pub big_r: f64,
    pub lambda: f64,
}

impl CrossingModel {
    pub fn new(eps: f64) -> Result<Self, Error> {
        if !(eps > 0.0 && eps <= MAX_PHI_EPS) {
            return Err(Error::Validation(format!("ε = {eps} outside the stable range (0, {MAX_PHI_EPS}]")));
        }
        let r = eps / 2.0;
        let big_r = 1.0 / eps;
        Ok(Self { eps, r, rho: r / 4.0, t0: eps / 2.0, t1: 2.0 * eps / 3.0, big_r, lambda: big_r / (eps * eps) })
    }

    /// Integrand of Φ_j(clasped) − Φ_j(unclasped) divided by the proposal
    /// density, for annulus point c + t·v and disk image point y.
    fn sample_value(&self, t: f64, v: [f64; 3], y: [f64; 3], p_ad: f64) -> f64 {
        let s = (t - self.t0) / (self.t1 - self.t0);
        let th = PI * s;
        let vol = sphere_volume(4) * sphere_volume(2);
        let mut total = 0.0;
        for sgn in [1.0, -1.0] {
            let psi_a = [self.rho * v[0], self.rho * v[1], self.rho * v[2], self.r * th.cos(), sgn * self.r * th.sin()];
            let dg = [0.0, 0.0, 0.0, -self.r * PI * th.sin(), sgn * self.r * PI * th.cos()];
            let dsdt = 1.0 / (self.t1 - self.t0);
            let mut m = SMatrix::<f64, 8, 8>::zeros();
            let w = [psi_a[0] - y[0], psi_a[1] - y[1], psi_a[2] - y[2], psi_a[3], psi_a[4]];
            for i in 0..5 {
                m[(i, 0)] = w[i];
                for c in 0..3 {
                    let mut jac = dg[i] * dsdt * v[c];
                    if i < 3 {
                        jac += self.rho / t * (if i == c { 1.0 } else { 0.0 } - v[i] * v[c]);
                    }
                    m[(i, 2 + c)] = jac;
                }
                if i < 3 {
                    m[(i, 5 + i)] = -self.lambda;
                }
            }
            for i in 0..3 {
                m[(5 + i, 1)] = -t * v[i];
                m[(5 + i, 2 + i)] = -1.0;
            }
            let wl = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            total += sgn * m.determinant() / (wl.powi(5) * t.powi(3) * vol);
        }
        total / p_ad
    }
}

/// Estimate of Φ_j(ψ^S) − Φ_j(ψ^{S∪{j}}) for the wheel embedding of W_k (n = 3).
///
/// The local model is identical at every crossing, so k and j only select
/// which crossing is modelled.  `swapped` exchanges the two embeddings; it
/// negates every sample exactly.  Sampling: a uniform on A_j, y on the image ball with radial density ∝ (r² + ‖y‖²)^{−5/2}.
pub fn phi_difference_estimate(k: usize, j: usize, eps: f64, cfg: &MCConfig, swapped: bool) -> Result<Estimate, Error> {
    if k < 2 || j < 1 || j > k {
        return Err(Error::Validation(format!("need k ≥ 2 and 1 ≤ j ≤ k, got k = {k}, j = {j}")));
    }
    let md = CrossingModel::new(eps)?;
    let (t0, t1, r, big_r) = (md.t0, md.t1, md.r, md.big_r);
    let p_a = 1.0 / (4.0 / 3.0 * PI * (t1.powi(3) - t0.powi(3)));
    let f_r = big_r.powi(3) / (r * r + big_r * big_r).powf(1.5);
    let sign = if swapped { -1.0 } else { 1.0 };
    let [e] = run_batched(cfg, |rng| {
        let v = unit_vector(rng, 3);
        let u: f64 = rng.gen();
        let t = (t0.powi(3) + u * (t1.powi(3) - t0.powi(3))).cbrt();
        let sc = (rng.gen::<f64>() * f_r).cbrt();
        let rad = r * sc / (1.0 - sc * sc).sqrt();
        let dir = unit_vector(rng, 3);
        let y = [rad * dir[0], rad * dir[1], rad * dir[2]];
        let p_y = 3.0 * r * r / (4.0 * PI * (r * r + rad * rad).powf(2.5)) / f_r;
        let p_ad = p_a * p_y * md.lambda.powi(3);
        Ok(Some([sign * md.sample_value(t, [v[0], v[1], v[2]], y, p_ad)]))
    })?;
    Ok(e)
}

// ---------------------------------------------------------------------------
// The degree-2 combination
// ---------------------------------------------------------------------------

/// θ₁₄θ₂₄θ₃₄η₁₂ on C_{3,1} (point 4 is the ambient point).
pub fn z2_term_one() -> Vec<Factor> {
    let t = |i: usize| Factor::Theta { from: Point::Knot(i), to: Point::Ambient(0) };
    vec![t(0), t(1), t(2), Factor::Eta { from: 0, to: 1 }]
}

/// θ₁₃θ₂₄η₁₂η₃₄ on C_{4,0}.
pub fn z2_term_two() -> Vec<Factor> {
    let t = |a: usize, b: usize| Factor::Theta { from: Point::Knot(a), to: Point::Knot(b) };
    vec![t(0, 2), t(1, 3), Factor::Eta { from: 0, to: 1 }, Factor::Eta { from: 2, to: 3 }]
}

/// θ₁₃θ₂₄η₁₂η₂₃ on C_{4,0}.
pub fn z2_term_three() -> Vec<Factor> {
    let t = |a: usize, b: usize| Factor::Theta { from: Point::Knot(a), to: Point::Knot(b) };
    vec![t(0, 2), t(1, 3), Factor::Eta { from: 0, to: 1 }, Factor::Eta { from: 1, to: 2 }]
}

/// Coefficients of the three terms in z₂.
pub const Z2_COEFFS: [f64; 3] = [0.5, -0.5, 0.25];

/// z₂ estimate and its three term estimates (same sample stream).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Z2Report {
    pub estimate: Estimate,
    pub terms: [Estimate; 3],
    /// True if any term shows heavy-tailed batch spread.
    pub nonconvergent: bool,
}

/// Cauchy draw x = tan(π(u − ½)) and its density.
fn cauchy(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let x = (PI * (rng.gen::<f64>() - 0.5)).tan();
    (x, 1.0 / (PI * (1.0 + x * x)))
}

fn cauchy_point(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<f64>, f64) {
    let mut p = 1.0;
    let x = (0..dim)
        .map(|_| {
            let (x, d) = cauchy(rng);
            p *= d;
            x
        })
        .collect();
    (x, p)
}

fn mirrored(c: &Configuration, n: usize) -> Configuration {
    Configuration {
        knot: c.knot.clone(),
        ambient: c
            .ambient
            .iter()
            .map(|y| y.iter().enumerate().map(|(i, v)| if i < n { *v } else { -v }).collect())
            .collect(),
    }
}

/// Monte Carlo estimate of
/// z₂ = ½∫_{C_{3,1}} θ₁₄θ₂₄θ₃₄η₁₂ − ½∫_{C_{4,0}} θ₁₃θ₂₄η₁₂η₃₄ + ¼∫_{C_{4,0}} θ₁₃θ₂₄η₁₂η₂₃
/// over the open configuration spaces (tangent substitution per coordinate).
/// Heavy-tailed variance is reported through `nonconvergent`, not as an error.
pub fn z2_estimate(emb: &Embedding, cfg: &MCConfig) -> Result<Z2Report, Error> {
    emb.validate()?;
    let n = emb.n();
    if n != 3 {
        return Err(Error::Validation(format!("z₂ is implemented for n = 3, got n = {n}")));
    }
    let terms = [z2_term_one(), z2_term_two(), z2_term_three()];
    let eval = |c31: &Configuration, c40: &Configuration| -> Result<Option<[f64; 3]>, Error> {
        if c31.min_separation(emb) < cfg.delta || c40.min_separation(emb) < cfg.delta {
            return Ok(None);
        }
        Ok(Some([
            wedge_density(&terms[0], emb, c31)?,
            wedge_density(&terms[1], emb, c40)?,
            wedge_density(&terms[2], emb, c40)?,
        ]))
    };
    let [t1, t2, t3] = run_batched(cfg, |rng| {
        let mut p31 = 1.0;
        let mut knot = Vec::new();
        for _ in 0..3 {
            let (x, p) = cauchy_point(rng, n);
            p31 *= p;
            knot.push(x);
        }
        let (y, py) = cauchy_point(rng, n + 2);
        p31 *= py;
        let c31 = Configuration { knot, ambient: vec![y] };
        let mut p40 = 1.0;
        let mut knot = Vec::new();
        for _ in 0..4 {
            let (x, p) = cauchy_point(rng, n);
            p40 *= p;
            knot.push(x);
        }
        let c40 = Configuration { knot, ambient: vec![] };
        let Some(v) = eval(&c31, &c40)? else { return Ok(None) };
        let mut out = [v[0] / p31, v[1] / p40, v[2] / p40];
        if cfg.antithetic {
            if let Some(w) = eval(&mirrored(&c31, n), &mirrored(&c40, n))? {
                out = [(out[0] + w[0] / p31) / 2.0, (out[1] + w[1] / p40) / 2.0, (out[2] + w[2] / p40) / 2.0];
            }
        }
        Ok(Some(out))
    })?;
    let estimate = Estimate::combine(&[(Z2_COEFFS[0], &t1), (Z2_COEFFS[1], &t2), (Z2_COEFFS[2], &t3)]);
    let nonconvergent = estimate.nonconvergent || t1.nonconvergent || t2.nonconvergent || t3.nonconvergent;
    Ok(Z2Report { estimate, terms: [t1, t2, t3], nonconvergent })
}
