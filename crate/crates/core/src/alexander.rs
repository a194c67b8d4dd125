//! Ribbon presentations, their knot groups, and the normalized Alexander
//! polynomial via Fox calculus.
//!
//! A presentation has disks D_0..D_p (D_0 based) joined by bands; a band from
//! D_a to D_b passing through disks d_1, …, d_r with signs s_1, …, s_r gives
//! the relator x_b · (w x_a w⁻¹)⁻¹ with w = x_{d_1}^{s_1} ⋯ x_{d_r}^{s_r}.
//! Each piercing is a crossing; unclasping deletes it.

use crate::laurent::{at_exp, interpolate_integer, LaurentPolynomial};
use crate::linalg::Q;
use crate::Error;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One band passing through a disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piercing {
    pub disk: usize,
    /// +1 or −1.
    pub sign: i8,
}

/// A band from one disk boundary to another, with its ordered piercings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub from: usize,
    pub to: usize,
    #[serde(default)]
    pub piercings: Vec<Piercing>,
}

/// Disks D_0..D_{disks−1} and the bands joining them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RibbonPresentation {
    pub disks: usize,
    #[serde(default)]
    pub based: usize,
    #[serde(default)]
    pub bands: Vec<Band>,
}

/// A crossing: piercing number `piercing` along band `band` (both 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingId {
    pub band: usize,
    pub piercing: usize,
}

/// Result of [`validate_presentation`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PresentationReport {
    pub ok: bool,
    pub issues: Vec<String>,
}

/// Structural checks: indices in range, signs ±1, bands joining distinct
/// disks, and a disk–band graph that is a tree (so the ribbon is a disk).
pub fn validate_presentation(p: &RibbonPresentation) -> PresentationReport {
    let mut issues = Vec::new();
    if p.disks == 0 {
        issues.push("presentation needs at least one disk".to_string());
    }
    if p.based >= p.disks.max(1) {
        issues.push(format!("based disk {} does not exist", p.based));
    }
    for (i, b) in p.bands.iter().enumerate() {
        for end in [b.from, b.to] {
            if end >= p.disks {
                issues.push(format!("band {i} attaches to missing disk {end}"));
            }
        }
        if b.from == b.to {
            issues.push(format!("band {i} joins disk {} to itself", b.from));
        }
        for (j, pc) in b.piercings.iter().enumerate() {
            if pc.disk >= p.disks {
                issues.push(format!("band {i} piercing {j} references missing disk {}", pc.disk));
            }
            if pc.sign != 1 && pc.sign != -1 {
                issues.push(format!("band {i} piercing {j} has sign {} (expected ±1)", pc.sign));
            }
        }
    }
    if issues.is_empty() {
        if p.bands.len() + 1 != p.disks {
            issues.push(format!("{} disks need {} bands for a disk-band tree, found {}", p.disks, p.disks - 1, p.bands.len()));
        } else if !tree_connected(p) {
            issues.push("disk-band incidence graph is disconnected".to_string());
        }
    }
    PresentationReport { ok: issues.is_empty(), issues }
}

fn tree_connected(p: &RibbonPresentation) -> bool {
    let mut seen = vec![false; p.disks];
    let mut stack = vec![p.based];
    seen[p.based] = true;
    while let Some(v) = stack.pop() {
        for b in &p.bands {
            for (x, y) in [(b.from, b.to), (b.to, b.from)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|s| *s)
}

fn require_valid(p: &RibbonPresentation) -> Result<(), Error> {
    let r = validate_presentation(p);
    if r.ok {
        Ok(())
    } else {
        Err(Error::Validation(r.issues.join("; ")))
    }
}

impl RibbonPresentation {
    /// The trivial knot: one disk, no bands.
    pub fn trivial() -> Self {
        Self { disks: 1, based: 0, bands: Vec::new() }
    }

    /// All crossings in band order.
    pub fn crossings(&self) -> Vec<CrossingId> {
        self.bands
            .iter()
            .enumerate()
            .flat_map(|(band, b)| (0..b.piercings.len()).map(move |piercing| CrossingId { band, piercing }))
            .collect()
    }

    pub fn crossing_count(&self) -> usize {
        self.bands.iter().map(|b| b.piercings.len()).sum()
    }

    pub fn has_crossing(&self, c: CrossingId) -> bool {
        self.bands.get(c.band).is_some_and(|b| c.piercing < b.piercings.len())
    }

    pub fn piercing(&self, c: CrossingId) -> Option<Piercing> {
        self.bands.get(c.band).and_then(|b| b.piercings.get(c.piercing)).copied()
    }

    /// Bands incident to disk `d` (as an end).
    pub fn bands_at(&self, d: usize) -> Vec<usize> {
        (0..self.bands.len()).filter(|&i| self.bands[i].from == d || self.bands[i].to == d).collect()
    }
}

/// A word in the free group: (generator, ±1) letters.
pub type Word = Vec<(usize, i8)>;

/// Meridian generators (one per disk) and one relator per band.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupPresentation {
    pub generators: usize,
    pub relators: Vec<Word>,
}

fn free_reduce(w: Word) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for l in w {
        match out.last() {
            Some(&(g, e)) if g == l.0 && e == -l.1 => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

/// The Wirtinger-type presentation: relator x_b · w · x_a⁻¹ · w⁻¹ per band.
pub fn knot_group(p: &RibbonPresentation) -> Result<GroupPresentation, Error> {
    require_valid(p)?;
    let relators = p
        .bands
        .iter()
        .map(|b| {
            let w: Word = b.piercings.iter().map(|pc| (pc.disk, pc.sign)).collect();
            let winv: Word = w.iter().rev().map(|&(g, e)| (g, -e)).collect();
            let mut r = vec![(b.to, 1)];
            r.extend(&w);
            r.push((b.from, -1));
            r.extend(winv);
            free_reduce(r)
        })
        .collect();
    Ok(GroupPresentation { generators: p.disks, relators })
}

/// Abelianized Fox derivative ∂word/∂x_gen with every generator sent to t.
pub fn fox_derivative(word: &[(usize, i8)], generator: usize, generators: usize) -> Result<LaurentPolynomial, Error> {
    if generator >= generators {
        return Err(Error::Validation(format!("unknown generator {generator}")));
    }
    let mut out = LaurentPolynomial::zero();
    let mut prefix = 0i64; // exponent of the abelianized prefix
    for &(g, e) in word {
        if g >= generators {
            return Err(Error::Validation(format!("unknown generator {g}")));
        }
        if g == generator {
            // ∂x/∂x = 1, ∂x⁻¹/∂x = −x⁻¹
            let term = if e > 0 { LaurentPolynomial::monomial(1, prefix) } else { LaurentPolynomial::monomial(-1, prefix - 1) };
            out = &out + &term;
        }
        prefix += e as i64;
    }
    Ok(out)
}

/// Relator-by-generator matrix of Fox derivatives.
pub fn alexander_matrix(p: &RibbonPresentation) -> Result<Vec<Vec<LaurentPolynomial>>, Error> {
    let g = knot_group(p)?;
    g.relators
        .iter()
        .map(|r| (0..g.generators).map(|x| fox_derivative(r, x, g.generators)).collect())
        .collect()
}

/// Exact determinant of a square Laurent matrix by evaluation at integer
/// points and interpolation.
pub fn laurent_determinant(m: &[Vec<LaurentPolynomial>]) -> Result<LaurentPolynomial, Error> {
    let n = m.len();
    if n == 0 {
        return Ok(LaurentPolynomial::one());
    }
    // shift each row into ℤ[t]
    let mut shift = 0i64;
    let mut rows: Vec<Vec<LaurentPolynomial>> = Vec::with_capacity(n);
    let mut degree = 0i64;
    for row in m {
        if row.len() != n {
            return Err(Error::Validation("Alexander matrix is not square".into()));
        }
        let lo = row.iter().filter(|e| !e.is_zero()).map(|e| e.lo).min().unwrap_or(0);
        let hi = row.iter().filter_map(|e| e.hi()).max().unwrap_or(lo);
        shift += lo;
        degree += hi - lo;
        rows.push(row.iter().map(|e| e.shift(-lo)).collect());
    }
    let values: Vec<Q> = (0..=degree)
        .map(|x| {
            let tx = Q::from_integer(BigInt::from(x));
            let mat: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|e| e.eval(&tx)).collect()).collect();
            det_q(mat)
        })
        .collect();
    let coeffs = interpolate_integer(&values)?;
    Ok(LaurentPolynomial::new(shift, coeffs))
}

/// Determinant over ℚ by Gaussian elimination.
pub fn det_q(mut m: Vec<Vec<Q>>) -> Q {
    let n = m.len();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else { return Q::zero() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &piv;
            for j in c..n {
                let v = &m[c][j] * &f;
                m[r][j] -= v;
            }
        }
    }
    det
}

/// Determinant of the Alexander matrix with generator column `col` removed.
pub fn raw_alexander_determinant(p: &RibbonPresentation, col: usize) -> Result<LaurentPolynomial, Error> {
    if col >= p.disks {
        return Err(Error::Validation(format!("column {col} out of range")));
    }
    let m = alexander_matrix(p)?;
    let minor: Vec<Vec<LaurentPolynomial>> =
        m.into_iter().map(|row| row.into_iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e).collect()).collect();
    laurent_determinant(&minor)
}

/// Multiplies by the unique unit ±t^m making Δ(1) = 1 and Δ′(1) = 0.
pub fn normalize(raw: &LaurentPolynomial) -> Result<LaurentPolynomial, Error> {
    let v = raw.eval_one();
    if v != 1 && v != -1 {
        return Err(Error::Structural(format!("degenerate Alexander matrix: Δ(1) = {v}, expected ±1")));
    }
    let p = raw.scale(v);
    // (t^m p)'(1) = m + p'(1) with p(1) = 1
    let m = -p.derivative().eval_one();
    let out = p.shift(m);
    debug_assert_eq!(out.derivative().eval_one(), 0);
    Ok(out)
}

/// Normalized Δ_K, deleting the based generator's column.
pub fn alexander_polynomial(p: &RibbonPresentation) -> Result<LaurentPolynomial, Error> {
    alexander_polynomial_deleting(p, p.based)
}

/// Normalized Δ_K, deleting an arbitrary generator column.
pub fn alexander_polynomial_deleting(p: &RibbonPresentation, col: usize) -> Result<LaurentPolynomial, Error> {
    normalize(&raw_alexander_determinant(p, col)?)
}

/// Default truncation order for α series.
pub const DEFAULT_ALPHA_ORDER: usize = 12;

/// α_2..α_N: coefficients of log Δ(e^h) for a normalized Δ.
pub fn alpha_from_delta(delta: &LaurentPolynomial, order: usize) -> Result<Vec<Q>, Error> {
    if order < 2 {
        return Err(Error::Validation(format!("series order {order} must be at least 2")));
    }
    let log = at_exp(delta, order).log()?;
    if !log.coeffs[1].is_zero() {
        return Err(Error::Structural("α_1 ≠ 0: Δ is not normalized".into()));
    }
    Ok(log.coeffs[2..].to_vec())
}

/// α_2..α_N of the knot presented by `p`.
pub fn alpha_coefficients(p: &RibbonPresentation, order: usize) -> Result<Vec<Q>, Error> {
    alpha_from_delta(&alexander_polynomial(p)?, order)
}

/// α_j (j ≥ 2) of the knot presented by `p`.
pub fn alpha(p: &RibbonPresentation, j: usize) -> Result<Q, Error> {
    if j < 2 {
        return Ok(Q::zero());
    }
    Ok(alpha_coefficients(p, j)?.pop().expect("order ≥ 2"))
}

/// Deletes one crossing.
pub fn unclasp(p: &RibbonPresentation, c: CrossingId) -> Result<RibbonPresentation, Error> {
    unclasp_many(p, &[c])
}

/// Deletes a set of crossings at once (ids refer to `p`; repeats are ignored).
pub fn unclasp_many(p: &RibbonPresentation, cs: &[CrossingId]) -> Result<RibbonPresentation, Error> {
    let set: BTreeSet<CrossingId> = cs.iter().copied().collect();
    for c in &set {
        if !p.has_crossing(*c) {
            return Err(Error::Validation(format!("no crossing at band {} piercing {}", c.band, c.piercing)));
        }
    }
    let mut out = p.clone();
    for (bi, b) in out.bands.iter_mut().enumerate() {
        let mut j = 0;
        b.piercings.retain(|_| {
            let keep = !set.contains(&CrossingId { band: bi, piercing: j });
            j += 1;
            keep
        });
    }
    Ok(out)
}

/// Disk re-indexing used by [`connected_sum`]: position i holds the new index
/// of disk i of the second summand.
pub fn connected_sum_reindex(p: &RibbonPresentation, q: &RibbonPresentation) -> Vec<usize> {
    let mut next = p.disks;
    (0..q.disks)
        .map(|i| {
            if i == q.based {
                p.based
            } else {
                next += 1;
                next - 1
            }
        })
        .collect()
}

/// P # Q: disjoint union with the two based disks merged into P's.
pub fn connected_sum(p: &RibbonPresentation, q: &RibbonPresentation) -> RibbonPresentation {
    let map = connected_sum_reindex(p, q);
    let mut bands = p.bands.clone();
    bands.extend(q.bands.iter().map(|b| Band {
        from: map[b.from],
        to: map[b.to],
        piercings: b.piercings.iter().map(|pc| Piercing { disk: map[pc.disk], sign: pc.sign }).collect(),
    }));
    RibbonPresentation { disks: p.disks + q.disks - 1, based: p.based, bands }
}

/// W_k: bands B_j from D_0 to D_j, B_j piercing D_{j−1} (D_0 replaced by D_k).
/// All piercings are positive for odd k; for even k the last one is negative,
/// which makes Δ = 1 + t⁻¹(t−1)^k (normalized) and α_k = 1.
pub fn wheel_presentation(k: usize) -> RibbonPresentation {
    assert!(k >= 1, "wheel presentation needs k ≥ 1");
    let bands = (1..=k)
        .map(|j| {
            let prev = if j == 1 { k } else { j - 1 };
            let sign = if k % 2 == 0 && j == k { -1 } else { 1 };
            Band { from: 0, to: j, piercings: vec![Piercing { disk: prev, sign }] }
        })
        .collect();
    RibbonPresentation { disks: k + 1, based: 0, bands }
}

/// W_k with every piercing positive.
pub fn positive_wheel_presentation(k: usize) -> RibbonPresentation {
    let mut p = wheel_presentation(k);
    for b in &mut p.bands {
        for pc in &mut b.piercings {
            pc.sign = 1;
        }
    }
    p
}

/// Size bounds for [`random_presentation`].
#[derive(Clone, Copy, Debug)]
pub struct RandomBounds {
    /// Total disks including D_0 (≥ 2).
    pub max_disks: usize,
    pub max_piercings_per_band: usize,
    /// Resample until at least this many crossings exist.
    pub min_crossings: usize,
}

impl Default for RandomBounds {
    fn default() -> Self {
        Self { max_disks: 6, max_piercings_per_band: 3, min_crossings: 0 }
    }
}

/// A random valid presentation: a random disk-band tree with random signed
/// piercings.
pub fn random_presentation<R: Rng>(rng: &mut R, bounds: &RandomBounds) -> RibbonPresentation {
    let cap = (bounds.max_disks - 1) * bounds.max_piercings_per_band;
    assert!(bounds.max_disks >= 2 && bounds.min_crossings <= cap, "bounds admit no presentation");
    loop {
        let disks = rng.gen_range(2..=bounds.max_disks);
        let bands: Vec<Band> = (1..disks)
            .map(|i| {
                let other = rng.gen_range(0..i);
                let (from, to) = if rng.gen_bool(0.5) { (other, i) } else { (i, other) };
                let np = rng.gen_range(0..=bounds.max_piercings_per_band);
                let piercings = (0..np)
                    .map(|_| Piercing { disk: rng.gen_range(0..disks), sign: if rng.gen_bool(0.5) { 1 } else { -1 } })
                    .collect();
                Band { from, to, piercings }
            })
            .collect();
        let p = RibbonPresentation { disks, based: 0, bands };
        if p.crossing_count() >= bounds.min_crossings {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    fn tm1_pow(k: u32) -> LaurentPolynomial {
        LaurentPolynomial::from_poly(&[-1, 1]).pow(k)
    }

    #[test]
    fn fox_rules() {
        assert_eq!(fox_derivative(&[(0, 1)], 0, 1).unwrap(), LaurentPolynomial::one());
        assert_eq!(fox_derivative(&[(0, -1)], 0, 1).unwrap(), LaurentPolynomial::monomial(-1, -1));
        assert_eq!(fox_derivative(&[(0, 1), (1, 1), (0, -1)], 1, 2).unwrap(), LaurentPolynomial::monomial(1, 1));
        assert!(fox_derivative(&[(3, 1)], 0, 2).is_err());
        assert!(fox_derivative(&[(0, 1)], 2, 2).is_err());
    }

    #[test]
    fn trivial_knot() {
        let p = RibbonPresentation::trivial();
        assert!(validate_presentation(&p).ok);
        assert_eq!(knot_group(&p).unwrap().relators.len(), 0);
        assert_eq!(alexander_polynomial(&p).unwrap(), LaurentPolynomial::one());
        assert!(alpha_coefficients(&p, 12).unwrap().iter().all(|a| a.is_zero()));
    }

    #[test]
    fn wheel_two_group_by_hand() {
        let g = knot_group(&wheel_presentation(2)).unwrap();
        // band 1: x1 · x2 · x0⁻¹ · x2⁻¹ ; band 2: x2 · x1⁻¹ · x0⁻¹ · x1
        assert_eq!(g.relators[0], vec![(1, 1), (2, 1), (0, -1), (2, -1)]);
        assert_eq!(g.relators[1], vec![(2, 1), (1, -1), (0, -1), (1, 1)]);
    }

    #[test]
    fn odd_wheels_hit_the_golden_value() {
        for k in [3u32, 5] {
            let d = alexander_polynomial(&wheel_presentation(k as usize)).unwrap();
            assert_eq!(d, &LaurentPolynomial::one() + &tm1_pow(k));
        }
    }

    #[test]
    fn even_wheels_are_shifted() {
        for k in [2u32, 4, 6] {
            let d = alexander_polynomial(&wheel_presentation(k as usize)).unwrap();
            assert_eq!(d, &LaurentPolynomial::one() + &tm1_pow(k).shift(-1));
            let pos = alexander_polynomial(&positive_wheel_presentation(k as usize)).unwrap();
            assert_eq!(pos, &LaurentPolynomial::one() - &tm1_pow(k));
        }
    }

    #[test]
    fn validation_failures() {
        let mut p = wheel_presentation(2);
        p.bands[0].piercings[0].disk = 9;
        assert!(!validate_presentation(&p).ok);
        let mut p = wheel_presentation(2);
        p.bands[1].from = 1;
        p.bands[1].to = 1;
        assert!(!validate_presentation(&p).ok);
        let p = RibbonPresentation { disks: 3, based: 0, bands: vec![Band { from: 0, to: 1, piercings: vec![] }] };
        assert!(!validate_presentation(&p).ok);
    }

    #[test]
    fn unclasping() {
        let w = wheel_presentation(3);
        let all = unclasp_many(&w, &w.crossings()).unwrap();
        assert_eq!(all.crossing_count(), 0);
        assert_eq!(alexander_polynomial(&all).unwrap(), LaurentPolynomial::one());
        assert!(unclasp(&all, CrossingId { band: 0, piercing: 0 }).is_err());
        let c = CrossingId { band: 1, piercing: 0 };
        assert_eq!(unclasp_many(&w, &[c, c]).unwrap(), unclasp(&w, c).unwrap());
    }

    #[test]
    fn alpha_of_wheel_three() {
        let a = alpha_coefficients(&wheel_presentation(3), 6).unwrap();
        assert_eq!(a[1], q(1)); // α_3 of W_3
        assert_eq!(a[0], q(0));
    }
}
