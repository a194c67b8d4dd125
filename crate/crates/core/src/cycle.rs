//! Cycle structure, chord types and axial-symmetry signs.
//!
//! In an admissible diagram every vertex has at most one outgoing edge, so a
//! connected diagram with as many edges as vertices contains exactly one
//! (directed) cycle.  Chords (θ-edges between external vertices) are of type
//! (i) when they lie on the cycle and type (ii) otherwise; k₁ and k₂ count them.

use crate::canon::isomorphisms;
use crate::diagram::{EdgeKind, JacobiDiagram};
use crate::patterns::has_yl_subgraph;
use crate::Error;
use serde::Serialize;

/// A maximal run of same-kind edges along the cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleSegment {
    pub kind: EdgeKind,
    pub edges: Vec<usize>,
}

/// The unique cycle of a diagram and its chord split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleStructure {
    /// Edge indices in cycle order, starting from the least vertex on the cycle.
    pub edges: Vec<usize>,
    /// Vertices in cycle order.
    pub vertices: Vec<usize>,
    /// The cycle split into maximal θ-runs and η-runs (cyclically).
    pub segments: Vec<CycleSegment>,
    /// Chord edge indices on the cycle (type i).
    pub on_cycle: Vec<usize>,
    /// Chord edge indices off the cycle (type ii).
    pub off_cycle: Vec<usize>,
}

impl CycleStructure {
    pub fn k1(&self) -> usize {
        self.on_cycle.len()
    }
    pub fn k2(&self) -> usize {
        self.off_cycle.len()
    }
    pub fn len(&self) -> usize {
        self.edges.len()
    }
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// All directed cycles of a diagram whose vertices have out-degree ≤ 1,
/// each as a list of edge indices.
fn functional_cycles(d: &JacobiDiagram) -> Result<Vec<Vec<usize>>, Error> {
    let n = d.vertex_count();
    let mut succ: Vec<Option<usize>> = vec![None; n];
    for (i, e) in d.edges().iter().enumerate() {
        if succ[e.src].is_some() {
            return Err(Error::Structural(format!("vertex {} has out-degree above one", e.src + 1)));
        }
        succ[e.src] = Some(i);
    }
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    let mut cycles = Vec::new();
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        loop {
            if state[v] == 1 {
                let pos = path.iter().position(|&(x, _)| x == v).expect("on path");
                cycles.push(path[pos..].iter().map(|&(_, e)| e).collect());
                break;
            }
            if state[v] == 2 {
                break;
            }
            state[v] = 1;
            match succ[v] {
                Some(e) => {
                    path.push((v, e));
                    v = d.edges()[e].dst;
                }
                None => break,
            }
        }
        for (x, _) in &path {
            state[*x] = 2;
        }
        state[start] = 2;
    }
    Ok(cycles)
}

/// The unique cycle and the (k₁, k₂) chord split.
pub fn cycle_structure(d: &JacobiDiagram) -> Result<CycleStructure, Error> {
    if let Some(w) = has_yl_subgraph(d) {
        return Err(Error::Structural(format!("diagram has a {} subgraph at {:?}", w.pattern, w.vertices)));
    }
    let cycles = functional_cycles(d)?;
    if cycles.len() != 1 {
        return Err(Error::Structural(format!("expected one cycle, found {}", cycles.len())));
    }
    let mut edges = cycles.into_iter().next().unwrap();
    let start = (0..edges.len()).min_by_key(|&i| d.edges()[edges[i]].src).unwrap();
    edges.rotate_left(start);
    let vertices: Vec<usize> = edges.iter().map(|&e| d.edges()[e].src).collect();
    let is_chord = |i: usize| {
        let e = d.edges()[i];
        e.kind == EdgeKind::Theta && d.is_external(e.src) && d.is_external(e.dst)
    };
    let on_cycle: Vec<usize> = edges.iter().copied().filter(|&e| is_chord(e)).collect();
    let off_cycle: Vec<usize> = (0..d.edges().len()).filter(|&e| is_chord(e) && !edges.contains(&e)).collect();
    Ok(CycleStructure { segments: segments(d, &edges), edges, vertices, on_cycle, off_cycle })
}

fn segments(d: &JacobiDiagram, cycle: &[usize]) -> Vec<CycleSegment> {
    let kind = |e: usize| d.edges()[e].kind;
    let n = cycle.len();
    // start at a kind change so no run wraps around
    let start = (0..n).find(|&i| kind(cycle[i]) != kind(cycle[(i + n - 1) % n])).unwrap_or(0);
    let mut out: Vec<CycleSegment> = Vec::new();
    for j in 0..n {
        let e = cycle[(start + j) % n];
        match out.last_mut() {
            Some(s) if s.kind == kind(e) => s.edges.push(e),
            _ => out.push(CycleSegment { kind: kind(e), edges: vec![e] }),
        }
    }
    out
}

/// Γ ↦ Γ*: reverses every edge on the unique cycle.  An internal vertex on the
/// cycle keeps its orientation slot, now occupied by the reversed out-edge.
pub fn reverse_cycle(d: &JacobiDiagram) -> Result<JacobiDiagram, Error> {
    let cycles = functional_cycles(d)?;
    if cycles.len() != 1 {
        return Err(Error::Structural(format!("expected one cycle, found {}", cycles.len())));
    }
    let cycle = &cycles[0];
    let mut edges = d.edges().to_vec();
    let mut orientation = d.orientation().clone();
    for &e in cycle {
        let old = d.edges()[e];
        edges[e].src = old.dst;
        edges[e].dst = old.src;
        // old.dst loses in-edge e and gains in-edge (its old out-edge on the cycle)
        if let Some(o) = orientation.get_mut(&old.dst) {
            let out_edge = *cycle.iter().find(|&&f| d.edges()[f].src == old.dst).expect("cycle continues");
            for slot in o.iter_mut() {
                if *slot == e {
                    *slot = out_edge;
                }
            }
        }
    }
    Ok(JacobiDiagram::from_parts(d.classes().to_vec(), edges, orientation))
}

/// Outcome of the axial-symmetry test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryVerdict {
    /// An axial symmetry reverses the sign of the integral, so I(Γ) = 0.
    ForcesZero,
    NoConclusion,
}

/// Parity of the knot dimension n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

fn perm_sign(p: &[usize]) -> i32 {
    let mut seen = vec![false; p.len()];
    let mut s = 1;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            s = -s;
        }
    }
    s
}

/// Signs of every axial symmetry Γ* ≅ Γ for n odd: each is the product of the
/// configuration-space permutation sign (all blocks odd-dimensional), a factor
/// −1 per internal vertex whose orientation is reversed, and (−1)^L for the L
/// reversed Gauss factors on the cycle (antipodal maps of odd spheres).
pub fn axial_symmetry_signs(d: &JacobiDiagram) -> Result<Vec<i32>, Error> {
    let cs = cycle_structure(d)?;
    let star = reverse_cycle(d)?;
    let reversed = if cs.len() % 2 == 0 { 1 } else { -1 };
    Ok(isomorphisms(&star, d)
        .into_iter()
        .map(|phi| {
            let image = star.relabel(&phi);
            let mut flips = 1;
            for v in d.internal_vertices() {
                if image.inputs(v) != d.inputs(v) {
                    flips = -flips;
                }
            }
            perm_sign(&phi) * flips * reversed
        })
        .collect())
}

/// Whether an axial symmetry forces I(Γ) = 0 (odd degree, n odd).
pub fn symmetry_sign(d: &JacobiDiagram, n_parity: Parity) -> Result<SymmetryVerdict, Error> {
    if n_parity == Parity::Even || d.degree() % 2 == 0 {
        return Ok(SymmetryVerdict::NoConclusion);
    }
    if axial_symmetry_signs(d)?.contains(&-1) {
        Ok(SymmetryVerdict::ForcesZero)
    } else {
        Ok(SymmetryVerdict::NoConclusion)
    }
}
