//! Enumeration of connected degree-k diagrams up to isomorphism.
//!
//! For each split (q external, s internal) with q + s = 2k, the η-edges form
//! a disjoint union of directed paths and cycles on the external vertices
//! (t = (q − s)/2 edges).  One labeled representative per multiset of
//! component lengths is generated; θ-edges are then a bijection from θ
//! sources (leaves, internal outputs, optionally ends) to θ sinks (η-out
//! vertices and the two input slots of each internal vertex).  Classes are
//! deduplicated by canonical form; diagrams containing the L pattern are
//! excluded from the basis unless requested.

use crate::canon::{canonicalize, CanonicalForm};
use crate::diagram::{Edge, JacobiDiagram};
use crate::patterns::has_l_pattern;
use crate::Error;
use std::collections::BTreeMap;

/// Default upper bound on the enumeration degree.
pub const DEFAULT_MAX_K: usize = 4;

/// One enumerated isomorphism class.
#[derive(Clone, Debug)]
pub struct DiagramClass {
    pub form: CanonicalForm,
    /// Representative in canonical labels, standard orientation.
    pub diagram: JacobiDiagram,
    pub aut: usize,
    /// An automorphism reverses the vertex orientation: the class is zero.
    pub orientation_reversing: bool,
    /// Number of isomorphism classes of oriented diagrams in this class.
    pub oriented_count: usize,
}

/// Options controlling which diagrams enter the enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumerateOptions {
    /// Keep diagrams containing the L pattern (used to test the L relation).
    pub keep_l: bool,
}

/// The bound on k: `BCRLAB_MAX_K` if set, else `default`.
pub fn max_k(default: usize) -> usize {
    std::env::var("BCRLAB_MAX_K").ok().and_then(|s| s.parse().ok()).unwrap_or(default)
}

/// Connected degree-k diagrams up to isomorphism, sorted by canonical form.
pub fn enumerate_connected(k: usize) -> Result<Vec<DiagramClass>, Error> {
    enumerate_with(k, EnumerateOptions::default())
}

/// As [`enumerate_connected`] with explicit options.
pub fn enumerate_with(k: usize, opts: EnumerateOptions) -> Result<Vec<DiagramClass>, Error> {
    let bound = max_k(DEFAULT_MAX_K);
    if k < 1 {
        return Err(Error::Validation(format!("degree must be positive, got {k}")));
    }
    if k > bound {
        return Err(Error::Resource(format!("degree {k} exceeds the enumeration bound {bound} (BCRLAB_MAX_K)")));
    }
    let mut found: BTreeMap<CanonicalForm, JacobiDiagram> = BTreeMap::new();
    for s in 0..=2 * k {
        let q = 2 * k - s;
        if q < s || (q - s) % 2 == 1 {
            continue;
        }
        let t = (q - s) / 2;
        for shape in eta_shapes(q, t) {
            raw_for_shape(q, s, &shape, &mut |d| {
                if !d.is_connected() || (!opts.keep_l && has_l_pattern(&d)) {
                    return;
                }
                let c = canonicalize(&d);
                found.entry(c.form).or_insert(d);
            });
        }
    }
    Ok(found
        .into_iter()
        .map(|(form, raw)| {
            let c = canonicalize(&raw);
            let oriented_count = oriented_classes(&raw);
            DiagramClass {
                diagram: form.diagram(),
                form,
                aut: c.aut,
                orientation_reversing: c.orientation_reversing,
                oriented_count,
            }
        })
        .collect())
}

/// Counts oriented isomorphism classes among the 2^s orientations of `d`.
fn oriented_classes(d: &JacobiDiagram) -> usize {
    let internals: Vec<usize> = d.internal_vertices().collect();
    let mut seen = std::collections::BTreeSet::new();
    for mask in 0..(1usize << internals.len()) {
        let mut x = d.clone();
        for (i, v) in internals.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x = x.reverse_vertex_orientation_at(*v).expect("internal vertex has orientation");
            }
        }
        seen.insert(oriented_key(&x));
    }
    seen.len()
}

/// Canonical key including orientation: the least (form, orientation bits) over
/// all canonical labelings.
fn oriented_key(d: &JacobiDiagram) -> (CanonicalForm, Vec<bool>) {
    let c = canonicalize(d);
    let target = c.form.diagram();
    crate::canon::isomorphisms(d, &target)
        .into_iter()
        .map(|p| {
            let r = d.relabel(&p);
            let bits = r.internal_vertices().map(|v| r.inputs(v).map_or(false, |(a, b)| a > b)).collect();
            (c.form.clone(), bits)
        })
        .min()
        .expect("isomorphic to its own canonical form")
}

/// A component of an η-structure: a path with `l ≥ 1` edges or a cycle of length `l ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Comp {
    Cycle(usize),
    Path(usize),
}

/// Multisets of components using exactly `t` edges and at most `q` vertices.
fn eta_shapes(q: usize, t: usize) -> Vec<Vec<Comp>> {
    let mut parts = Vec::new();
    for l in 2..=t {
        parts.push(Comp::Cycle(l));
    }
    for l in 1..=t {
        parts.push(Comp::Path(l));
    }
    let mut out = Vec::new();
    fn rec(parts: &[Comp], start: usize, edges_left: usize, verts_left: usize, cur: &mut Vec<Comp>, out: &mut Vec<Vec<Comp>>) {
        if edges_left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..parts.len() {
            let (e, v) = match parts[i] {
                Comp::Cycle(l) => (l, l),
                Comp::Path(l) => (l, l + 1),
            };
            if e <= edges_left && v <= verts_left {
                cur.push(parts[i]);
                rec(parts, i, edges_left - e, verts_left - v, cur, out);
                cur.pop();
            }
        }
    }
    rec(&parts, 0, t, q, &mut Vec::new(), &mut out);
    out
}

/// Calls `emit` on every labeled diagram with the given η-shape.
fn raw_for_shape(q: usize, s: usize, shape: &[Comp], emit: &mut dyn FnMut(JacobiDiagram)) {
    let mut eta = Vec::new();
    let mut next = 0;
    for c in shape {
        match *c {
            Comp::Cycle(l) => {
                for i in 0..l {
                    eta.push(Edge::eta(next + i, next + (i + 1) % l));
                }
                next += l;
            }
            Comp::Path(l) => {
                for i in 0..l {
                    eta.push(Edge::eta(next + i, next + i + 1));
                }
                next += l + 1;
            }
        }
    }
    let has_out = |v: usize| eta.iter().any(|e| e.src == v);
    let has_in = |v: usize| eta.iter().any(|e| e.dst == v);
    // sinks: (vertex, slot) — slot 0 for η-out externals, 1/2 for internal inputs.
    let mut sinks: Vec<usize> = (0..q).filter(|&v| has_out(v)).collect();
    let mut mandatory: Vec<usize> = (0..q).filter(|&v| !has_out(v) && !has_in(v)).collect();
    for v in q..q + s {
        sinks.push(v);
        sinks.push(v);
        mandatory.push(v);
    }
    let ends: Vec<usize> = (0..q).filter(|&v| has_in(v) && !has_out(v)).collect();
    if mandatory.len() > sinks.len() {
        return;
    }
    let extra = sinks.len() - mandatory.len();
    for chosen in combinations(&ends, extra) {
        let mut sources = mandatory.clone();
        sources.extend(chosen);
        let mut used = vec![false; sources.len()];
        let mut pick = vec![0usize; sinks.len()];
        assign(q, s, &eta, &sinks, &sources, &mut used, &mut pick, 0, emit);
    }
}

#[allow(clippy::too_many_arguments)]
fn assign(
    q: usize,
    s: usize,
    eta: &[Edge],
    sinks: &[usize],
    sources: &[usize],
    used: &mut [bool],
    pick: &mut [usize],
    i: usize,
    emit: &mut dyn FnMut(JacobiDiagram),
) {
    if i == sinks.len() {
        let mut edges = eta.to_vec();
        let mut inputs = BTreeMap::new();
        for (j, &v) in sinks.iter().enumerate() {
            edges.push(Edge::theta(sources[pick[j]], v));
        }
        for v in q..q + s {
            let ins: Vec<usize> =
                sinks.iter().enumerate().filter(|(_, &x)| x == v).map(|(j, _)| sources[pick[j]]).collect();
            inputs.insert(v, (ins[0], ins[1]));
        }
        emit(JacobiDiagram::from_sources(q, s, edges, &inputs));
        return;
    }
    let v = sinks[i];
    let second_slot = i > 0 && sinks[i - 1] == v;
    for j in 0..sources.len() {
        if used[j] || sources[j] == v {
            continue;
        }
        // inputs of an internal vertex are unordered here: keep them increasing
        if second_slot && sources[pick[i - 1]] > sources[j] {
            continue;
        }
        used[j] = true;
        pick[i] = j;
        assign(q, s, eta, sinks, sources, used, pick, i + 1, emit);
        used[j] = false;
    }
}

fn combinations(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(items: &[usize], r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, r, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, r, 0, &mut Vec::new(), &mut out);
    out
}
