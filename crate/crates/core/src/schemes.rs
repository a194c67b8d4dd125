//! k-schemes: alternating sums over unclasping subsets of marked crossings.
//!
//! [P; c_1, …, c_m] = Σ_{S ⊂ {c_i}} (−1)^{|S|} [K_{P^S}], where P^S is P with
//! the crossings of S unclasped.  An invariant is of type k when it vanishes
//! on every (k+1)-scheme.

use crate::alexander::{
    alpha, random_presentation, unclasp_many, validate_presentation, Band, CrossingId, RandomBounds,
    RibbonPresentation,
};
use crate::laurent::LaurentPolynomial;
use crate::linalg::Q;
use crate::Error;
use num_traits::Zero;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Largest number of marks [`expand`] accepts.
pub const MAX_MARKS: usize = 12;

/// A ribbon presentation with distinct marked crossings c_1..c_m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkedPresentation {
    pub disks: usize,
    #[serde(default)]
    pub based: usize,
    #[serde(default)]
    pub bands: Vec<Band>,
    #[serde(default)]
    pub marks: Vec<CrossingId>,
}

impl MarkedPresentation {
    pub fn new(p: RibbonPresentation, marks: Vec<CrossingId>) -> Self {
        Self { disks: p.disks, based: p.based, bands: p.bands, marks }
    }

    /// Every crossing of `p` marked.
    pub fn all_marked(p: RibbonPresentation) -> Self {
        let marks = p.crossings();
        Self::new(p, marks)
    }

    pub fn presentation(&self) -> RibbonPresentation {
        RibbonPresentation { disks: self.disks, based: self.based, bands: self.bands.clone() }
    }

    /// Unclasps mark `i` and drops it; later piercings on the same band shift
    /// down so the remaining marks name the same crossings.
    pub fn unclasp_mark(&self, i: usize) -> Result<MarkedPresentation, Error> {
        let c = *self.marks.get(i).ok_or_else(|| Error::Validation(format!("no mark {i}")))?;
        let p = unclasp_many(&self.presentation(), &[c])?;
        let marks = self
            .marks
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, d)| {
                if d.band == c.band && d.piercing > c.piercing {
                    CrossingId { band: d.band, piercing: d.piercing - 1 }
                } else {
                    *d
                }
            })
            .collect();
        Ok(MarkedPresentation::new(p, marks))
    }

    /// Presentation valid, marks distinct and present.
    pub fn validate(&self) -> Result<(), Error> {
        let p = self.presentation();
        let r = validate_presentation(&p);
        if !r.ok {
            return Err(Error::Validation(r.issues.join("; ")));
        }
        let mut seen = BTreeSet::new();
        for c in &self.marks {
            if !seen.insert(*c) {
                return Err(Error::Validation(format!("duplicate mark at band {} piercing {}", c.band, c.piercing)));
            }
            if !p.has_crossing(*c) {
                return Err(Error::Validation(format!("mark at band {} piercing {} is not a crossing", c.band, c.piercing)));
            }
        }
        Ok(())
    }
}

/// One signed term of a scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeTerm {
    pub sign: i8,
    pub disks: usize,
    pub based: usize,
    pub bands: Vec<Band>,
}

impl SchemeTerm {
    pub fn new(sign: i8, p: RibbonPresentation) -> Self {
        Self { sign, disks: p.disks, based: p.based, bands: p.bands }
    }

    pub fn presentation(&self) -> RibbonPresentation {
        RibbonPresentation { disks: self.disks, based: self.based, bands: self.bands.clone() }
    }
}

/// An expanded scheme: a formal signed sum of presentations.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    pub terms: Vec<SchemeTerm>,
}

impl Scheme {
    /// Formal union s ⊎ t.
    pub fn union(&self, other: &Scheme) -> Scheme {
        Scheme { terms: self.terms.iter().chain(&other.terms).cloned().collect() }
    }

    /// s − t as a formal sum.
    pub fn minus(&self, other: &Scheme) -> Scheme {
        let neg = other.terms.iter().map(|t| SchemeTerm { sign: -t.sign, ..t.clone() });
        Scheme { terms: self.terms.iter().cloned().chain(neg).collect() }
    }

    /// Net sign per distinct presentation, zero entries dropped.
    pub fn collected(&self) -> Vec<(i64, RibbonPresentation)> {
        let mut acc: Vec<(i64, RibbonPresentation)> = Vec::new();
        for t in &self.terms {
            let p = t.presentation();
            match acc.iter_mut().find(|(_, q)| *q == p) {
                Some(e) => e.0 += t.sign as i64,
                None => acc.push((t.sign as i64, p)),
            }
        }
        acc.retain(|(c, _)| *c != 0);
        acc.sort_by(|a, b| format!("{:?}", a.1).cmp(&format!("{:?}", b.1)));
        acc
    }
}

/// All 2^m unclasped variants with sign (−1)^{|S|}, subsets in bitmask order.
pub fn expand(mp: &MarkedPresentation) -> Result<Scheme, Error> {
    if mp.marks.len() > MAX_MARKS {
        return Err(Error::Resource(format!("{} marks exceed the limit of {MAX_MARKS}", mp.marks.len())));
    }
    mp.validate()?;
    let p = mp.presentation();
    let m = mp.marks.len();
    let terms = (0u32..1 << m)
        .map(|mask| {
            let s: Vec<CrossingId> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| mp.marks[i]).collect();
            let sign = if s.len() % 2 == 0 { 1 } else { -1 };
            Ok(SchemeTerm::new(sign, unclasp_many(&p, &s)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Scheme { terms })
}

/// Σ sign · f(term), evaluated in parallel, summed in term order.
pub fn evaluate<F>(f: F, s: &Scheme) -> Result<Q, Error>
where
    F: Fn(&RibbonPresentation) -> Result<Q, Error> + Sync,
{
    let vals = s.terms.par_iter().map(|t| f(&t.presentation())).collect::<Result<Vec<Q>, Error>>()?;
    Ok(s.terms.iter().zip(vals).fold(Q::zero(), |acc, (t, v)| acc + Q::from_integer(t.sign.into()) * v))
}

/// Σ sign · Δ(term) as a Laurent polynomial.
pub fn evaluate_alexander(s: &Scheme) -> Result<LaurentPolynomial, Error> {
    let vals = s
        .terms
        .par_iter()
        .map(|t| crate::alexander::alexander_polynomial(&t.presentation()))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(s.terms.iter().zip(vals).fold(LaurentPolynomial::zero(), |acc, (t, v)| &acc + &v.scale(t.sign as i64)))
}

/// Scalar invariants usable on schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invariant {
    /// α_j, j ≥ 2.
    Alpha(usize),
}

impl Invariant {
    pub fn eval(&self, p: &RibbonPresentation) -> Result<Q, Error> {
        match self {
            Invariant::Alpha(j) => alpha(p, *j),
        }
    }
}

/// Whether every marked crossing pierces a disk D_j ≠ D_0 whose only band
/// joins it to D_0.
pub fn is_star_like(mp: &MarkedPresentation) -> bool {
    let p = mp.presentation();
    mp.marks.iter().all(|c| {
        let Some(pc) = p.piercing(*c) else { return false };
        let d = pc.disk;
        if d == p.based {
            return false;
        }
        let bands = p.bands_at(d);
        bands.len() == 1 && {
            let b = &p.bands[bands[0]];
            (b.from == p.based && b.to == d) || (b.to == p.based && b.from == d)
        }
    })
}

/// Result of [`finite_type_report`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteTypeReport {
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    /// (sample index, value as "num/den") for every nonzero evaluation.
    pub nonzero: Vec<(usize, String)>,
}

impl FiniteTypeReport {
    pub fn all_zero(&self) -> bool {
        self.nonzero.is_empty()
    }
}

/// A seeded random (m)-marked presentation (random crossings chosen as marks).
pub fn random_marked(rng: &mut ChaCha8Rng, m: usize) -> MarkedPresentation {
    let bounds = RandomBounds { min_crossings: m, ..RandomBounds::default() };
    let p = random_presentation(rng, &bounds);
    let all = p.crossings();
    let marks = sample(rng, all.len(), m).into_iter().map(|i| all[i]).collect();
    MarkedPresentation::new(p, marks)
}

/// Evaluates `inv` on `samples` seeded random (k+1)-schemes and records every
/// nonzero value (none are expected for an invariant of type k).
pub fn finite_type_report(inv: Invariant, k: usize, samples: usize, seed: u64) -> Result<FiniteTypeReport, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus: Vec<MarkedPresentation> = (0..samples).map(|_| random_marked(&mut rng, k + 1)).collect();
    let vals = corpus
        .par_iter()
        .map(|mp| evaluate(|p| inv.eval(p), &expand(mp)?))
        .collect::<Result<Vec<Q>, Error>>()?;
    let nonzero = vals.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.to_string())).collect();
    Ok(FiniteTypeReport { k, samples, seed, nonzero })
}
