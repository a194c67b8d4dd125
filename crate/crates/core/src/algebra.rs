//! Exact linear algebra on the span of degree-k diagrams.
//!
//! The ambient space has one basis vector per isomorphism class (up to vertex
//! orientation), with Γ̄ = −Γ; classes admitting an orientation-reversing
//! automorphism vanish.  Diagrams with the L pattern are excluded from the
//! basis (they are shown to lie in the relation span separately).
//!
//! Relation conventions (each a signed sum set to zero):
//!
//! * **STU** — internal v with inputs (p₁, p₂) emitting to an external j with
//!   η-edge j → k.  T inserts j′ on the path j → j′ → k with p₁ → j, p₂ → j′;
//!   U swaps p₁ and p₂.  Relation `S + T − U`.
//! * **ST** — an origin or middle j fed by a, with η-edge j → x where x is an
//!   end emitting to b.  T deletes j, adds an internal v with inputs (a, x)
//!   emitting to b, and reconnects j's η-predecessor to x.  Relation `S − T`.
//! * **SU** — an end x (η-edge i → x) emitting to an origin b.  U replaces
//!   i → x by i → b.  Relation `S + U`.
//! * **C** — two consecutive θ-attachments along an η-path are swapped,
//!   `D − D′`, whenever the internal-vertex term that would complete the STU
//!   triple is zero.

use crate::canon::{canonicalize, CanonicalForm};
use crate::cycle::cycle_structure;
use crate::diagram::{DiagramBuilder, EdgeKind, JacobiDiagram};
use crate::enumerate::{enumerate_with, DiagramClass, EnumerateOptions};
use crate::linalg::{dot, q, Rref, SparseRow, Q};
use crate::patterns::{has_l_pattern, has_y_pattern, has_yl_subgraph};
use crate::Error;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

/// Tag of a generating relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    ST,
    SU,
    STU,
    C,
}

impl RelationKind {
    pub const ALL: [RelationKind; 4] = [RelationKind::ST, RelationKind::SU, RelationKind::STU, RelationKind::C];

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "ST" => Ok(RelationKind::ST),
            "SU" => Ok(RelationKind::SU),
            "STU" => Ok(RelationKind::STU),
            "C" => Ok(RelationKind::C),
            _ => Err(Error::Validation(format!("unknown relation kind {s:?}"))),
        }
    }
}

/// Term coefficients of each relation kind, in the order listed in the module docs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationConventions {
    pub stu: [i64; 3],
    pub st: [i64; 2],
    pub su: [i64; 2],
    pub c: [i64; 2],
}

impl Default for RelationConventions {
    fn default() -> Self {
        RelationConventions { stu: [1, 1, -1], st: [1, -1], su: [1, 1], c: [1, -1] }
    }
}

/// Sparse exact combination of canonical diagrams of one degree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiagramVector {
    pub degree: usize,
    pub coeffs: BTreeMap<CanonicalForm, Q>,
}

impl DiagramVector {
    pub fn zero(degree: usize) -> Self {
        DiagramVector { degree, coeffs: BTreeMap::new() }
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// self += c·other
    pub fn add_scaled(&mut self, c: &Q, other: &DiagramVector) {
        for (k, v) in &other.coeffs {
            let e = self.coeffs.entry(k.clone()).or_insert_with(Q::zero);
            *e += c * v;
            if e.is_zero() {
                self.coeffs.remove(k);
            }
        }
    }
    /// Scales so the first coefficient is positive (for deduplication up to sign).
    fn normalized_sign(&self) -> DiagramVector {
        let mut v = self.clone();
        if v.coeffs.values().next().map_or(false, |c| c.is_negative()) {
            for c in v.coeffs.values_mut() {
                *c = -c.clone();
            }
        }
        v
    }
}

/// One relation instance: raw terms and its image in the basis.
#[derive(Clone, Debug)]
pub struct Relation {
    pub kind: RelationKind,
    pub terms: Vec<(JacobiDiagram, Q)>,
    pub vector: DiagramVector,
}

/// A deduplicated list of relation instances.
#[derive(Clone, Debug, Default)]
pub struct RelationSet(pub Vec<Relation>);

/// JSON form of one relation term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub diagram: JacobiDiagram,
    pub coeff_num: i64,
    pub coeff_den: i64,
}

/// JSON form of one relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationJson {
    pub kind: RelationKind,
    pub terms: Vec<TermJson>,
}

impl RelationSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn to_json(&self) -> Vec<RelationJson> {
        self.0
            .iter()
            .map(|r| RelationJson {
                kind: r.kind,
                terms: r
                    .terms
                    .iter()
                    .map(|(d, c)| TermJson {
                        diagram: d.clone(),
                        coeff_num: c.numer().to_i64().expect("small coefficient"),
                        coeff_den: c.denom().to_i64().expect("small coefficient"),
                    })
                    .collect(),
            })
            .collect()
    }
}

/// The basis of the degree-k diagram space.
#[derive(Clone, Debug)]
pub struct DiagramSpace {
    pub k: usize,
    pub keep_l: bool,
    pub classes: Vec<DiagramClass>,
    index: HashMap<CanonicalForm, usize>,
}

impl DiagramSpace {
    pub fn new(k: usize, keep_l: bool) -> Result<Self, Error> {
        let classes = enumerate_with(k, EnumerateOptions { keep_l })?;
        let index = classes.iter().enumerate().map(|(i, c)| (c.form.clone(), i)).collect();
        Ok(DiagramSpace { k, keep_l, classes, index })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
    pub fn index_of(&self, f: &CanonicalForm) -> Option<usize> {
        self.index.get(f).copied()
    }

    /// Classes that are not forced to zero by an orientation-reversing automorphism.
    pub fn nonzero_count(&self) -> usize {
        self.classes.iter().filter(|c| !c.orientation_reversing).count()
    }

    /// Image of a diagram: ±(its class), or zero for antisymmetric classes and
    /// (outside the extended space) L-pattern diagrams.
    pub fn vector_of(&self, d: &JacobiDiagram) -> Result<DiagramVector, Error> {
        let mut v = DiagramVector::zero(self.k);
        if d.degree() != self.k {
            return Err(Error::Validation(format!("degree {} diagram in degree-{} space", d.degree(), self.k)));
        }
        let bad = d.validate();
        if !bad.is_empty() {
            return Err(Error::Structural(format!("relation produced an invalid diagram: {}", bad[0])));
        }
        if !self.keep_l && has_l_pattern(d) {
            return Ok(v);
        }
        let c = canonicalize(d);
        if c.orientation_reversing {
            return Ok(v);
        }
        if self.index_of(&c.form).is_none() {
            return Err(Error::Structural(format!("class {} missing from the enumeration", c.form)));
        }
        v.coeffs.insert(c.form, q(c.sign as i64));
        Ok(v)
    }

    /// Sparse row of a vector in basis coordinates.
    pub fn row(&self, v: &DiagramVector) -> SparseRow {
        v.coeffs.iter().map(|(f, c)| (self.index[f], c.clone())).collect()
    }
}

/// Mutable copy of a diagram keyed by vertex names, used by the rewrite rules.
#[derive(Clone, Debug)]
struct Draft {
    ext: Vec<usize>,
    int: Vec<usize>,
    eta: Vec<(usize, usize)>,
    theta: Vec<(usize, usize)>,
    inputs: BTreeMap<usize, (usize, usize)>,
    fresh: usize,
}

impl Draft {
    fn of(d: &JacobiDiagram) -> Self {
        let mut eta = Vec::new();
        let mut theta = Vec::new();
        for e in d.edges() {
            match e.kind {
                EdgeKind::Eta => eta.push((e.src, e.dst)),
                EdgeKind::Theta => theta.push((e.src, e.dst)),
            }
        }
        Draft {
            ext: d.external_vertices().collect(),
            int: d.internal_vertices().collect(),
            eta,
            theta,
            inputs: d.internal_vertices().filter_map(|v| d.inputs(v).map(|p| (v, p))).collect(),
            fresh: d.vertex_count(),
        }
    }

    fn fresh(&mut self) -> usize {
        self.fresh += 1;
        self.fresh - 1
    }

    fn build(&self) -> JacobiDiagram {
        let mut b = DiagramBuilder::new();
        for &v in &self.ext {
            b.external(v);
        }
        for &v in &self.int {
            let (p, q) = self.inputs[&v];
            b.internal(v, p, q);
        }
        for &(a, c) in &self.eta {
            b.eta(a, c);
        }
        for &(a, c) in &self.theta {
            b.theta(a, c);
        }
        b.build()
    }
}

fn qi(x: i64) -> Q {
    q(x)
}

/// STU instances rooted at each internal vertex emitting to an external vertex.
fn stu_instances(d: &JacobiDiagram, conv: &RelationConventions) -> Vec<Vec<(JacobiDiagram, Q)>> {
    let mut out = Vec::new();
    for v in d.internal_vertices() {
        let j = d.theta_out(v)[0];
        if d.is_internal(j) {
            continue;
        }
        let Some(k) = d.eta_succ(j) else { continue };
        let (p1, p2) = d.inputs(v).expect("oriented");
        let mut base = Draft::of(d);
        let new = base.fresh();
        base.theta.retain(|&(a, b)| a != v && b != v);
        base.eta.retain(|&e| e != (j, k));
        base.eta.push((j, new));
        base.eta.push((new, k));
        base.ext.push(new);
        base.int.retain(|&u| u != v);
        base.inputs.remove(&v);
        let mut t = base.clone();
        t.theta.push((p1, j));
        t.theta.push((p2, new));
        let mut u = base;
        u.theta.push((p2, j));
        u.theta.push((p1, new));
        out.push(vec![(d.clone(), qi(conv.stu[0])), (t.build(), qi(conv.stu[1])), (u.build(), qi(conv.stu[2]))]);
    }
    out
}

/// ST instances: collapse of an η-edge into an end emitting a θ-edge.
fn st_instances(d: &JacobiDiagram, conv: &RelationConventions) -> Vec<Vec<(JacobiDiagram, Q)>> {
    let mut out = Vec::new();
    for j in d.external_vertices() {
        let Some(x) = d.eta_succ(j) else { continue };
        if d.eta_succ(x).is_some() {
            continue;
        }
        let xo = d.theta_out(x);
        let Some(&b) = xo.first() else { continue };
        let a = d.theta_in(j)[0];
        if a == x {
            continue;
        }
        let mut t = Draft::of(d);
        let v = t.fresh();
        t.theta.retain(|&(p, r)| r != j && p != x);
        t.theta.extend([(a, v), (x, v), (v, b)]);
        let pred = d.eta_pred(j);
        t.eta.retain(|&(p, r)| p != j && r != j);
        if let Some(i) = pred {
            t.eta.push((i, x));
        }
        if let Some(o) = t.inputs.get_mut(&b) {
            if o.0 == x {
                o.0 = v;
            }
            if o.1 == x {
                o.1 = v;
            }
        }
        t.inputs.insert(v, (a, x));
        t.ext.retain(|&e| e != j);
        t.int.push(v);
        out.push(vec![(d.clone(), qi(conv.st[0])), (t.build(), qi(conv.st[1]))]);
    }
    out
}

/// SU instances: an end emitting to an origin takes over its η-edge.
fn su_instances(d: &JacobiDiagram, conv: &RelationConventions) -> Vec<Vec<(JacobiDiagram, Q)>> {
    let mut out = Vec::new();
    for x in d.external_vertices() {
        if d.eta_succ(x).is_some() {
            continue;
        }
        let Some(i) = d.eta_pred(x) else { continue };
        let Some(&b) = d.theta_out(x).first() else { continue };
        if d.is_internal(b) || d.eta_pred(b).is_some() {
            continue;
        }
        let mut u = Draft::of(d);
        u.eta.retain(|&e| e != (i, x));
        u.eta.push((i, b));
        out.push(vec![(d.clone(), qi(conv.su[0])), (u.build(), qi(conv.su[1]))]);
    }
    out
}

/// The internal-vertex diagram S whose STU triple has T = d at the η-edge j → j′.
fn stu_source(d: &JacobiDiagram, j: usize, jp: usize) -> Option<JacobiDiagram> {
    let p = d.theta_in(j)[0];
    let pp = d.theta_in(jp)[0];
    let after = d.eta_succ(jp)?;
    if after == j {
        return None;
    }
    let mut s = Draft::of(d);
    let v = s.fresh();
    s.theta.retain(|&(_, r)| r != j && r != jp);
    s.theta.extend([(p, v), (pp, v), (v, j)]);
    s.eta.retain(|&(a, b)| a != jp && b != jp);
    s.eta.push((j, after));
    s.ext.retain(|&e| e != jp);
    s.int.push(v);
    s.inputs.insert(v, (p, pp));
    // any internal vertex fed by jp? impossible: jp only emits an η-edge.
    Some(s.build())
}

/// C instances: swap of adjacent θ-attachments whose STU partner vanishes.
fn c_instances(
    d: &JacobiDiagram,
    conv: &RelationConventions,
    space: &DiagramSpace,
) -> Result<Vec<Vec<(JacobiDiagram, Q)>>, Error> {
    let mut out = Vec::new();
    for j in d.external_vertices() {
        let Some(jp) = d.eta_succ(j) else { continue };
        if d.theta_in(j).len() != 1 || d.theta_in(jp).len() != 1 {
            continue;
        }
        let Some(s) = stu_source(d, j, jp) else { continue };
        if !s.is_valid() || !space.vector_of(&s)?.is_zero() {
            continue;
        }
        let (p, pp) = (d.theta_in(j)[0], d.theta_in(jp)[0]);
        let mut sw = Draft::of(d);
        for e in sw.theta.iter_mut() {
            if *e == (p, j) {
                *e = (pp, j);
            } else if *e == (pp, jp) {
                *e = (p, jp);
            }
        }
        out.push(vec![(d.clone(), qi(conv.c[0])), (sw.build(), qi(conv.c[1]))]);
    }
    Ok(out)
}

/// Relation instances of the requested kinds, generated from every class
/// representative of `space` and deduplicated up to sign.
pub fn relations_in(
    space: &DiagramSpace,
    kinds: &[RelationKind],
    conv: &RelationConventions,
) -> Result<RelationSet, Error> {
    let mut seen: BTreeSet<(RelationKind, Vec<(CanonicalForm, Q)>)> = BTreeSet::new();
    let mut out = Vec::new();
    for class in &space.classes {
        let d = &class.diagram;
        for &kind in kinds {
            let instances = match kind {
                RelationKind::STU => stu_instances(d, conv),
                RelationKind::ST => st_instances(d, conv),
                RelationKind::SU => su_instances(d, conv),
                RelationKind::C => c_instances(d, conv, space)?,
            };
            for terms in instances {
                let mut v = DiagramVector::zero(space.k);
                for (t, c) in &terms {
                    v.add_scaled(c, &space.vector_of(t)?);
                }
                if v.is_zero() {
                    continue;
                }
                let key = (kind, v.normalized_sign().coeffs.into_iter().collect());
                if seen.insert(key) {
                    out.push(Relation { kind, terms, vector: v });
                }
            }
        }
    }
    Ok(RelationSet(out))
}

/// Per kind: (raw instances matched, instances whose vector vanishes).
pub fn raw_instance_counts(
    space: &DiagramSpace,
    conv: &RelationConventions,
) -> Result<BTreeMap<RelationKind, (usize, usize)>, Error> {
    let mut out = BTreeMap::new();
    for kind in RelationKind::ALL {
        let e = out.entry(kind).or_insert((0, 0));
        for class in &space.classes {
            let d = &class.diagram;
            let instances = match kind {
                RelationKind::STU => stu_instances(d, conv),
                RelationKind::ST => st_instances(d, conv),
                RelationKind::SU => su_instances(d, conv),
                RelationKind::C => c_instances(d, conv, space)?,
            };
            for terms in instances {
                let mut v = DiagramVector::zero(space.k);
                for (t, c) in &terms {
                    v.add_scaled(c, &space.vector_of(t)?);
                }
                e.0 += 1;
                if v.is_zero() {
                    e.1 += 1;
                }
            }
        }
    }
    Ok(out)
}

/// All relation instances of the given kinds in degree k (default conventions).
pub fn relation_vectors(k: usize, kinds: &[RelationKind]) -> Result<RelationSet, Error> {
    let space = DiagramSpace::new(k, false)?;
    relations_in(&space, kinds, &RelationConventions::default())
}

/// dim A_k = (nonzero classes) − rank(relations).
pub fn quotient_dimension(k: usize) -> Result<usize, Error> {
    let t = WeightTable::get(k)?;
    Ok(t.space.nonzero_count() - t.rank)
}

/// Relation span and the annihilating functional w_k.
#[derive(Debug)]
pub struct WeightTable {
    pub space: DiagramSpace,
    pub relations: RelationSet,
    pub rank: usize,
    span: Rref,
    /// w_k on each class representative (standard orientation), normalized by w(wheel) = 1.
    pub weights: Vec<Q>,
}

impl WeightTable {
    /// Builds the table for an arbitrary space and conventions.
    pub fn build(space: DiagramSpace, conv: &RelationConventions) -> Result<Self, Error> {
        let relations = relations_in(&space, &RelationKind::ALL, conv)?;
        let mut span = Rref::new();
        for r in &relations.0 {
            span.insert(&space.row(&r.vector));
        }
        let rank = span.rank();
        // zero classes are never hit by vectors; pin them to zero explicitly
        let mut full = span.clone();
        for (i, c) in space.classes.iter().enumerate() {
            if c.orientation_reversing {
                full.insert(&SparseRow::from([(i, Q::one())]));
            }
        }
        let ann = full.annihilator(space.len());
        if ann.len() != 1 {
            return Err(Error::Structural(format!(
                "annihilator of the degree-{} relations has dimension {}",
                space.k,
                ann.len()
            )));
        }
        let mut w = ann.into_iter().next().unwrap();
        let wheel = canonicalize(&crate::diagram::wheel_diagram(space.k));
        let i = space.index_of(&wheel.form).ok_or_else(|| Error::Structural("wheel missing".into()))?;
        let norm = w[i].clone() * q(wheel.sign as i64);
        if norm.is_zero() {
            return Err(Error::Structural("w vanishes on the wheel".into()));
        }
        for x in w.iter_mut() {
            *x = &*x / &norm;
        }
        Ok(WeightTable { space, relations, rank, span, weights: w })
    }

    /// Cached table for degree k with default conventions.
    pub fn get(k: usize) -> Result<Arc<WeightTable>, Error> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<WeightTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&k) {
            return Ok(t.clone());
        }
        let t = Arc::new(WeightTable::build(DiagramSpace::new(k, false)?, &RelationConventions::default())?);
        cache.lock().unwrap().insert(k, t.clone());
        Ok(t)
    }

    /// w on an arbitrary degree-k diagram via its class coordinate.
    pub fn weight(&self, d: &JacobiDiagram) -> Result<Q, Error> {
        let v = self.space.vector_of(d)?;
        Ok(dot(&self.space.row(&v), &self.weights))
    }

    /// Whether a vector lies in the relation span.
    pub fn in_span(&self, v: &DiagramVector) -> bool {
        self.span.contains(&self.space.row(v))
    }

    /// w applied to a vector.
    pub fn apply(&self, v: &DiagramVector) -> Q {
        dot(&self.space.row(v), &self.weights)
    }
}

/// Whether `d` is a chord diagram: no internal vertex and no cycle made only of η-edges.
pub fn is_chord_diagram(d: &JacobiDiagram) -> bool {
    if d.internal_count() > 0 {
        return false;
    }
    // follow η-successors from each vertex; a repeat means an η-cycle
    for start in 0..d.vertex_count() {
        let mut v = start;
        for _ in 0..=d.vertex_count() {
            match d.eta_succ(v) {
                Some(n) => v = n,
                None => break,
            }
            if v == start {
                return false;
            }
        }
    }
    true
}

/// (−1)^{k₂} for a chord diagram.
pub fn chord_weight(d: &JacobiDiagram) -> Result<Q, Error> {
    let cs = cycle_structure(d)?;
    Ok(q(if cs.k2() % 2 == 0 { 1 } else { -1 }))
}

/// w_k(d): 0 on Y/L diagrams, (−1)^{k₂} on chord diagrams, and otherwise the
/// value forced by STU-reduction towards chord diagrams.  Diagrams that admit
/// no STU step (all internal outputs internal, or a pure η-cycle) are read
/// from the relation-span table.
pub fn weight_w(d: &JacobiDiagram) -> Result<Q, Error> {
    let bad = d.validate();
    if !bad.is_empty() {
        return Err(Error::Validation(format!("invalid diagram: {}", bad[0])));
    }
    let bound = crate::enumerate::max_k(crate::enumerate::DEFAULT_MAX_K);
    reduce_weight(d, bound, 0)
}

fn reduce_weight(d: &JacobiDiagram, bound: usize, depth: usize) -> Result<Q, Error> {
    if depth > 4 * d.vertex_count() + 8 {
        return Err(Error::Structural("STU reduction did not terminate".into()));
    }
    if has_yl_subgraph(d).is_some() {
        return Ok(Q::zero());
    }
    if is_chord_diagram(d) {
        return chord_weight(d);
    }
    let conv = RelationConventions::default();
    if let Some(inst) = stu_instances(d, &conv).into_iter().next() {
        // c₀·S + c₁·T + c₂·U = 0
        let c0 = inst[0].1.clone();
        let mut acc = Q::zero();
        for (t, c) in &inst[1..] {
            acc += c * reduce_weight(t, bound, depth + 1)?;
        }
        return Ok(-acc / c0);
    }
    if d.degree() > bound {
        return Err(Error::Resource(format!("degree {} beyond table bound {bound}", d.degree())));
    }
    WeightTable::get(d.degree())?.weight(d)
}

/// Confirms w(Γ̄) = −w(Γ) for a diagram with internal vertices (vacuous otherwise).
pub fn weight_antisymmetry_check(d: &JacobiDiagram) -> Result<bool, Error> {
    if d.internal_count() == 0 {
        return Ok(true);
    }
    let a = weight_w(d)?;
    let b = weight_w(&d.reverse_vertex_orientation())?;
    Ok(a == -b)
}

/// Kind of derived relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivedKind {
    IHX,
    Y,
    L,
}

/// Outcome of a derived-relation check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedReport {
    pub kind: DerivedKind,
    pub k: usize,
    pub instances: usize,
    /// Instances whose vector is already zero in the antisymmetric span.
    pub trivially_zero: usize,
    pub in_span: usize,
}

impl DerivedReport {
    pub fn holds(&self) -> bool {
        self.in_span == self.instances
    }
}

/// IHX triples (I, H, X) at each internal→internal θ-edge u → v: with u fed
/// by (a, b) and c the other input of v, H and X cyclically permute (a, b, c),
/// keeping the slot of u at v.
pub fn ihx_instances(d: &JacobiDiagram) -> Vec<[JacobiDiagram; 3]> {
    let mut out = Vec::new();
    for u in d.internal_vertices() {
        let v = d.theta_out(u)[0];
        if !d.is_internal(v) {
            continue;
        }
        let (a, b) = d.inputs(u).expect("oriented");
        let (v1, v2) = d.inputs(v).expect("oriented");
        let (c, u_first) = if v1 == u { (v2, true) } else { (v1, false) };
        let make = |x: usize, y: usize, z: usize| {
            let mut t = Draft::of(d);
            t.theta.retain(|&(p, r)| !(r == u || (r == v && p != u)));
            t.theta.extend([(x, u), (y, u), (z, v)]);
            t.inputs.insert(u, (x, y));
            t.inputs.insert(v, if u_first { (u, z) } else { (z, u) });
            t.build()
        };
        out.push([make(a, b, c), make(b, c, a), make(c, a, b)]);
    }
    out
}

/// Signs (I, H, X) of the IHX combination checked by [`derived_relation_check`].
pub const IHX_SIGNS: [i64; 3] = [1, 1, 1];

/// Checks that every instance of a derived relation lies in the relation span.
pub fn derived_relation_check(k: usize, kind: DerivedKind) -> Result<DerivedReport, Error> {
    let mut rep = DerivedReport { kind, k, instances: 0, trivially_zero: 0, in_span: 0 };
    match kind {
        DerivedKind::IHX | DerivedKind::Y => {
            let table = WeightTable::get(k)?;
            let extended = DiagramSpace::new(k, true)?;
            for class in &extended.classes {
                let d = &class.diagram;
                let vectors: Vec<DiagramVector> = if kind == DerivedKind::IHX {
                    ihx_instances(d)
                        .into_iter()
                        .filter(|t| t.iter().all(|x| x.is_valid()))
                        .map(|t| {
                            let mut v = DiagramVector::zero(k);
                            for (x, s) in t.iter().zip(IHX_SIGNS) {
                                v.add_scaled(&q(s), &table.space.vector_of(x)?);
                            }
                            Ok(v)
                        })
                        .collect::<Result<_, Error>>()?
                } else if has_y_pattern(d) {
                    vec![table.space.vector_of(d)?]
                } else {
                    vec![]
                };
                for v in vectors {
                    rep.instances += 1;
                    if v.is_zero() {
                        rep.trivially_zero += 1;
                    }
                    if table.in_span(&v) {
                        rep.in_span += 1;
                    }
                }
            }
        }
        DerivedKind::L => {
            let table = WeightTable::build(DiagramSpace::new(k, true)?, &RelationConventions::default())?;
            for class in &table.space.classes {
                if !has_l_pattern(&class.diagram) {
                    continue;
                }
                rep.instances += 1;
                let v = table.space.vector_of(&class.diagram)?;
                if v.is_zero() {
                    rep.trivially_zero += 1;
                }
                if table.in_span(&v) {
                    rep.in_span += 1;
                }
            }
        }
    }
    Ok(rep)
}

/// z_k = ½ Σ I(Γ)·w_k(Γ)/|Aut Γ| over the supplied (diagram, integral) pairs;
/// diagrams not listed contribute nothing.
pub fn z_combination(k: usize, values: &[(JacobiDiagram, f64)]) -> Result<f64, Error> {
    let mut z = 0.0;
    for (d, i) in values {
        if d.degree() != k {
            return Err(Error::Validation(format!("degree {} diagram in a degree-{k} sum", d.degree())));
        }
        let w = weight_w(d)?;
        let aut = crate::canon::automorphism_count(d, true) as f64;
        z += i * rational_to_f64(&w) / aut;
    }
    Ok(z / 2.0)
}

/// Lossy conversion of an exact rational.
pub fn rational_to_f64(x: &Q) -> f64 {
    let n = x.numer().to_f64().unwrap_or(f64::NAN);
    let d = x.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact integer matrix of the relation vectors (rows) in basis coordinates,
/// with denominators cleared; used for independent rank checks.
pub fn relation_matrix(table: &WeightTable) -> Vec<Vec<BigInt>> {
    let n = table.space.len();
    table
        .relations
        .0
        .iter()
        .map(|r| {
            let row = table.space.row(&r.vector);
            let mut dense = vec![BigInt::zero(); n];
            for (c, v) in row {
                assert!(v.is_integer(), "relation coefficients are integers");
                dense[c] = v.to_integer();
            }
            dense
        })
        .collect()
}
