//! Canonical labeling and automorphism counting.
//!
//! Colour refinement by (class, incidence) followed by individualization and
//! backtracking.  Every leaf of the search tree is a discrete labeling; the
//! lexicographically least edge list over all leaves is the canonical key,
//! and the number of leaves attaining it equals the automorphism count
//! (refinement commutes with relabeling, so automorphisms permute leaves).

use crate::diagram::{Edge, EdgeKind, JacobiDiagram, VertexClass};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Isomorphism-class key of a diagram, ignoring vertex-orientation data.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub n_ext: usize,
    pub n_int: usize,
    /// Sorted (kind, src, dst) triples in canonical labels; kind 0 = θ, 1 = η.
    pub edges: Vec<(u8, u8, u8)>,
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{}i:", self.n_ext, self.n_int)?;
        for (i, (k, a, b)) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}{}{}", if *k == 0 { 't' } else { 'h' }, a + 1, b + 1)?;
            let _ = b;
        }
        Ok(())
    }
}

impl CanonicalForm {
    /// Degree of the represented diagrams.
    pub fn degree(&self) -> usize {
        (self.n_ext + self.n_int) / 2
    }

    /// The diagram in canonical labels with standard orientation
    /// (each internal vertex lists its inputs in increasing order).
    pub fn diagram(&self) -> JacobiDiagram {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|(k, a, b)| Edge {
                src: *a as usize,
                dst: *b as usize,
                kind: if *k == 0 { EdgeKind::Theta } else { EdgeKind::Eta },
            })
            .collect();
        let mut inputs = std::collections::BTreeMap::new();
        for v in self.n_ext..self.n_ext + self.n_int {
            let mut ins: Vec<usize> =
                edges.iter().filter(|e| e.kind == EdgeKind::Theta && e.dst == v).map(|e| e.src).collect();
            ins.sort();
            if ins.len() == 2 {
                inputs.insert(v, (ins[0], ins[1]));
            }
        }
        JacobiDiagram::from_sources(self.n_ext, self.n_int, edges, &inputs)
    }
}

/// Result of canonicalizing one diagram.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub form: CanonicalForm,
    /// A relabeling `perm[old] = new` into canonical labels.
    pub perm: Vec<usize>,
    /// Orientation sign of the input relative to the standard orientation of `form`.
    pub sign: i32,
    /// Number of automorphisms (edge directions respected).
    pub aut: usize,
    /// True when some automorphism reverses the vertex orientation, so the
    /// class is zero in the antisymmetric span.
    pub orientation_reversing: bool,
}

/// Canonicalizes a diagram (edge directions respected).
pub fn canonicalize(d: &JacobiDiagram) -> Canonical {
    let leaves = search(d, true);
    let best = leaves.iter().map(|(k, _)| k).min().cloned().expect("at least one leaf");
    let mins: Vec<&Vec<usize>> = leaves.iter().filter(|(k, _)| *k == best).map(|(_, p)| p).collect();
    let signs: Vec<i32> = mins.iter().map(|p| d.relabel(p).orientation_sign()).collect();
    let orientation_reversing = signs.iter().any(|s| *s != signs[0]);
    Canonical {
        form: CanonicalForm { n_ext: d.external_count(), n_int: d.internal_count(), edges: best },
        perm: mins[0].clone(),
        sign: signs[0],
        aut: mins.len(),
        orientation_reversing,
    }
}

/// Number of automorphisms; with `oriented_edges = false`, edge directions may
/// be reversed (Aut′).
pub fn automorphism_count(d: &JacobiDiagram, oriented_edges: bool) -> usize {
    let leaves = search(d, oriented_edges);
    let best = leaves.iter().map(|(k, _)| k).min().cloned().expect("leaf");
    leaves.iter().filter(|(k, _)| *k == best).count()
}

/// All isomorphisms from `a` to `b` (as `perm[a-vertex] = b-vertex`),
/// respecting classes and edge kinds and directions; orientation is ignored.
pub fn isomorphisms(a: &JacobiDiagram, b: &JacobiDiagram) -> Vec<Vec<usize>> {
    let la = search(a, true);
    let lb = search(b, true);
    let best_a = la.iter().map(|(k, _)| k).min().cloned();
    let best_b = lb.iter().map(|(k, _)| k).min().cloned();
    if best_a.is_none() || best_a != best_b || a.external_count() != b.external_count() {
        return Vec::new();
    }
    let best = best_a.unwrap();
    let pb = &lb.iter().find(|(k, _)| *k == best).unwrap().1;
    let mut inv_b = vec![0; pb.len()];
    for (v, &c) in pb.iter().enumerate() {
        inv_b[c] = v;
    }
    la.iter().filter(|(k, _)| *k == best).map(|(_, pa)| pa.iter().map(|&c| inv_b[c]).collect()).collect()
}

type Key = Vec<(u8, u8, u8)>;

fn key_of(d: &JacobiDiagram, perm: &[usize], directed: bool) -> Key {
    let mut k: Key = d
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (perm[e.src] as u8, perm[e.dst] as u8);
            let kind = if e.kind == EdgeKind::Theta { 0 } else { 1 };
            if directed || a <= b {
                (kind, a, b)
            } else {
                (kind, b, a)
            }
        })
        .collect();
    k.sort();
    k
}

/// Runs the individualization–refinement search; returns (key, perm) per leaf.
fn search(d: &JacobiDiagram, directed: bool) -> Vec<(Key, Vec<usize>)> {
    let n = d.vertex_count();
    let mut nbrs: Vec<Vec<(u8, usize)>> = vec![Vec::new(); n];
    for e in d.edges() {
        let k = if e.kind == EdgeKind::Theta { 0u8 } else { 2u8 };
        if directed {
            nbrs[e.src].push((k, e.dst));
            nbrs[e.dst].push((k + 1, e.src));
        } else {
            nbrs[e.src].push((k, e.dst));
            nbrs[e.dst].push((k, e.src));
        }
    }
    let init: Vec<usize> = (0..n).map(|v| if d.classes()[v] == VertexClass::External { 0 } else { 1 }).collect();
    let cells = refine(&nbrs, init);
    let mut out = Vec::new();
    descend(d, &nbrs, cells, directed, &mut out);
    out
}

/// Refines a cell assignment to an equitable ordered partition.
fn refine(nbrs: &[Vec<(u8, usize)>], mut cell: Vec<usize>) -> Vec<usize> {
    let n = cell.len();
    loop {
        let count_before = distinct(&cell);
        let mut sigs: Vec<(usize, Vec<(u8, usize)>, usize)> = (0..n)
            .map(|v| {
                let mut s: Vec<(u8, usize)> = nbrs[v].iter().map(|(k, w)| (*k, cell[*w])).collect();
                s.sort();
                (cell[v], s, v)
            })
            .collect();
        sigs.sort();
        let mut next = vec![0; n];
        let mut c = 0;
        for i in 0..n {
            if i > 0 && (sigs[i].0 != sigs[i - 1].0 || sigs[i].1 != sigs[i - 1].1) {
                c = i;
            }
            next[sigs[i].2] = c;
        }
        cell = next;
        if distinct(&cell) == count_before {
            return cell;
        }
    }
}

fn distinct(cell: &[usize]) -> usize {
    let mut v = cell.to_vec();
    v.sort();
    v.dedup();
    v.len()
}

fn descend(
    d: &JacobiDiagram,
    nbrs: &[Vec<(u8, usize)>],
    cell: Vec<usize>,
    directed: bool,
    out: &mut Vec<(Key, Vec<usize>)>,
) {
    let n = cell.len();
    // Cells are labeled by their first position, so a discrete partition is a permutation.
    let mut sizes = vec![0usize; n];
    for &c in &cell {
        sizes[c] += 1;
    }
    let target = (0..n).find(|&c| sizes[c] > 1);
    match target {
        None => {
            let key = key_of(d, &cell, directed);
            out.push((key, cell));
        }
        Some(c) => {
            for v in 0..n {
                if cell[v] == c {
                    let mut next = cell.clone();
                    // individualize v: it keeps label c, the rest of its cell moves to c+1
                    for w in 0..n {
                        if cell[w] == c && w != v {
                            next[w] = c + 1;
                        }
                    }
                    let refined = refine(nbrs, next);
                    descend(d, nbrs, refined, directed, out);
                }
            }
        }
    }
}
