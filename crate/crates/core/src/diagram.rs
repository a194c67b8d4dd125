//! Jacobi diagrams: directed graphs with θ- and η-edges.
//!
//! Vertices are either *external* (points on the knot, in ℝⁿ) or *internal*
//! (points of the ambient ℝⁿ⁺²).  θ-edges carry ambient Gauss factors and
//! η-edges carry knot-domain Gauss factors.  Internal vertices are trivalent
//! (two ingoing θ-edges, one outgoing) and carry a *vertex orientation*: an
//! ordering of their two ingoing θ-edges.
//!
//! Vertices are stored 0-based with all external vertices first; the JSON
//! form uses ids starting at 1.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Whether a vertex lies on the knot or in the ambient space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexClass {
    External,
    Internal,
}

/// Edge kind: θ (ambient Gauss map) or η (domain Gauss map).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Theta,
    Eta,
}

/// A directed edge between two vertices (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn theta(src: usize, dst: usize) -> Self {
        Edge { src, dst, kind: EdgeKind::Theta }
    }
    pub fn eta(src: usize, dst: usize) -> Self {
        Edge { src, dst, kind: EdgeKind::Eta }
    }
}

/// A Jacobi diagram with vertex-orientation data at internal vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JacobiDiagram {
    classes: Vec<VertexClass>,
    edges: Vec<Edge>,
    /// Internal vertex → (first ingoing θ-edge index, second ingoing θ-edge index).
    orientation: BTreeMap<usize, [usize; 2]>,
}

/// A violated incidence rule found by [`JacobiDiagram::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    OddVertexCount(usize),
    NoVertices,
    ExternalAfterInternal(usize),
    EdgeOutOfRange(usize),
    SelfLoop(usize),
    EtaAtInternal(usize),
    InternalValence { vertex: usize, theta_in: usize, theta_out: usize },
    EtaInDegree(usize),
    EtaOutDegree(usize),
    ExternalValence(usize),
    IsolatedVertex(usize),
    /// An external vertex with more than one θ endpoint.
    MultipleThetaEndpoints(usize),
    /// θ-in must be paired with η-out at an external vertex (and vice versa).
    UnpairedThetaIn(usize),
    RepeatedInput(usize),
    BadOrientation(usize),
    Disconnected,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            OddVertexCount(n) => write!(f, "odd vertex count {n}"),
            NoVertices => write!(f, "diagram has no vertices"),
            ExternalAfterInternal(v) => write!(f, "external vertex {} listed after an internal one", v + 1),
            EdgeOutOfRange(e) => write!(f, "edge {e} references a missing vertex"),
            SelfLoop(e) => write!(f, "edge {e} is a loop"),
            EtaAtInternal(v) => write!(f, "internal vertex {} carries an η-edge", v + 1),
            InternalValence { vertex, theta_in, theta_out } => write!(
                f,
                "internal vertex {} has {theta_in} ingoing / {theta_out} outgoing θ-edges (need 2/1)",
                vertex + 1
            ),
            EtaInDegree(v) => write!(f, "external vertex {} has more than one ingoing η-edge", v + 1),
            EtaOutDegree(v) => write!(f, "external vertex {} has more than one outgoing η-edge", v + 1),
            ExternalValence(v) => write!(f, "external vertex {} has valence above 3", v + 1),
            IsolatedVertex(v) => write!(f, "vertex {} has no incident edge", v + 1),
            MultipleThetaEndpoints(v) => write!(f, "external vertex {} has several θ endpoints", v + 1),
            UnpairedThetaIn(v) => write!(f, "external vertex {} violates the θ-in ⇔ η-out pairing", v + 1),
            RepeatedInput(v) => write!(f, "internal vertex {} has both inputs from one vertex", v + 1),
            BadOrientation(v) => write!(f, "orientation data at vertex {} is not a bijection of its inputs", v + 1),
            Disconnected => write!(f, "diagram is disconnected"),
        }
    }
}

/// Incidence summary of one vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Incidence {
    pub eta_in: usize,
    pub eta_out: usize,
    pub theta_in: usize,
    pub theta_out: usize,
}

impl Incidence {
    pub fn valence(&self) -> usize {
        self.eta_in + self.eta_out + self.theta_in + self.theta_out
    }
}

impl JacobiDiagram {
    /// Builds a diagram from vertex classes, edges and orientation (edge-index pairs).
    ///
    /// No validation is performed; call [`validate`](Self::validate).
    pub fn from_parts(
        classes: Vec<VertexClass>,
        edges: Vec<Edge>,
        orientation: BTreeMap<usize, [usize; 2]>,
    ) -> Self {
        JacobiDiagram { classes, edges, orientation }
    }

    /// Builds a diagram whose internal-vertex orientations are given by input
    /// *source vertices* rather than edge indices.
    ///
    /// # Panics
    /// If a listed source does not feed the vertex through a θ-edge.
    pub fn from_sources(
        n_ext: usize,
        n_int: usize,
        edges: Vec<Edge>,
        inputs: &BTreeMap<usize, (usize, usize)>,
    ) -> Self {
        let mut classes = vec![VertexClass::External; n_ext];
        classes.extend(std::iter::repeat(VertexClass::Internal).take(n_int));
        let mut orientation = BTreeMap::new();
        for (&v, &(p1, p2)) in inputs {
            let find = |p: usize| {
                edges
                    .iter()
                    .position(|e| e.kind == EdgeKind::Theta && e.src == p && e.dst == v)
                    .unwrap_or_else(|| panic!("no θ-edge {p}→{v}"))
            };
            orientation.insert(v, [find(p1), find(p2)]);
        }
        JacobiDiagram { classes, edges, orientation }
    }

    pub fn classes(&self) -> &[VertexClass] {
        &self.classes
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn orientation(&self) -> &BTreeMap<usize, [usize; 2]> {
        &self.orientation
    }
    pub fn vertex_count(&self) -> usize {
        self.classes.len()
    }
    pub fn external_count(&self) -> usize {
        self.classes.iter().filter(|c| **c == VertexClass::External).count()
    }
    pub fn internal_count(&self) -> usize {
        self.vertex_count() - self.external_count()
    }
    pub fn is_external(&self, v: usize) -> bool {
        self.classes[v] == VertexClass::External
    }
    pub fn is_internal(&self, v: usize) -> bool {
        self.classes[v] == VertexClass::Internal
    }
    /// Degree = half the number of vertices.
    pub fn degree(&self) -> usize {
        self.vertex_count() / 2
    }
    pub fn internal_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(move |&v| self.is_internal(v))
    }
    pub fn external_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(move |&v| self.is_external(v))
    }

    pub fn incidence(&self, v: usize) -> Incidence {
        let mut inc = Incidence::default();
        for e in &self.edges {
            match e.kind {
                EdgeKind::Eta => {
                    if e.src == v {
                        inc.eta_out += 1
                    }
                    if e.dst == v {
                        inc.eta_in += 1
                    }
                }
                EdgeKind::Theta => {
                    if e.src == v {
                        inc.theta_out += 1
                    }
                    if e.dst == v {
                        inc.theta_in += 1
                    }
                }
            }
        }
        inc
    }

    /// Target of the (unique) outgoing η-edge of `v`.
    pub fn eta_succ(&self, v: usize) -> Option<usize> {
        self.edges.iter().find(|e| e.kind == EdgeKind::Eta && e.src == v).map(|e| e.dst)
    }
    /// Source of the (unique) ingoing η-edge of `v`.
    pub fn eta_pred(&self, v: usize) -> Option<usize> {
        self.edges.iter().find(|e| e.kind == EdgeKind::Eta && e.dst == v).map(|e| e.src)
    }
    /// Targets of the outgoing θ-edges of `v`.
    pub fn theta_out(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Theta && e.src == v).map(|e| e.dst).collect()
    }
    /// Sources of the ingoing θ-edges of `v`.
    pub fn theta_in(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Theta && e.dst == v).map(|e| e.src).collect()
    }

    /// The two inputs of an internal vertex, in orientation order.
    pub fn inputs(&self, v: usize) -> Option<(usize, usize)> {
        let [a, b] = *self.orientation.get(&v)?;
        Some((self.edges.get(a)?.src, self.edges.get(b)?.src))
    }

    /// A leaf: external vertex with no η-edges and no ingoing θ-edge.
    pub fn is_leaf(&self, v: usize) -> bool {
        if !self.is_external(v) {
            return false;
        }
        let i = self.incidence(v);
        i.eta_in == 0 && i.eta_out == 0 && i.theta_in == 0
    }

    /// Checks every incidence rule and returns the violations (empty = valid).
    ///
    /// Admissible external vertices: leaf {θ-out}, origin {θ-in, η-out},
    /// middle {η-in, θ-in, η-out}, end {η-in, θ-out} and bare end {η-in}.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.vertex_count();
        if n == 0 {
            out.push(Violation::NoVertices);
            return out;
        }
        if n % 2 == 1 {
            out.push(Violation::OddVertexCount(n));
        }
        let mut seen_internal = false;
        for v in 0..n {
            match self.classes[v] {
                VertexClass::Internal => seen_internal = true,
                VertexClass::External if seen_internal => out.push(Violation::ExternalAfterInternal(v)),
                _ => {}
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.src >= n || e.dst >= n {
                out.push(Violation::EdgeOutOfRange(i));
            } else if e.src == e.dst {
                out.push(Violation::SelfLoop(i));
            }
        }
        if !out.is_empty() && out.iter().any(|v| matches!(v, Violation::EdgeOutOfRange(_))) {
            return out;
        }
        for v in 0..n {
            let inc = self.incidence(v);
            if inc.valence() == 0 {
                out.push(Violation::IsolatedVertex(v));
                continue;
            }
            if self.is_internal(v) {
                if inc.eta_in + inc.eta_out > 0 {
                    out.push(Violation::EtaAtInternal(v));
                }
                if inc.theta_in != 2 || inc.theta_out != 1 {
                    out.push(Violation::InternalValence { vertex: v, theta_in: inc.theta_in, theta_out: inc.theta_out });
                } else {
                    let ins = self.theta_in(v);
                    if ins[0] == ins[1] {
                        out.push(Violation::RepeatedInput(v));
                    }
                    let ok = match self.orientation.get(&v) {
                        Some([a, b]) => {
                            a != b
                                && [*a, *b].iter().all(|&i| {
                                    self.edges.get(i).map_or(false, |e| e.kind == EdgeKind::Theta && e.dst == v)
                                })
                        }
                        None => false,
                    };
                    if !ok {
                        out.push(Violation::BadOrientation(v));
                    }
                }
            } else {
                if inc.eta_in > 1 {
                    out.push(Violation::EtaInDegree(v));
                }
                if inc.eta_out > 1 {
                    out.push(Violation::EtaOutDegree(v));
                }
                if inc.valence() > 3 {
                    out.push(Violation::ExternalValence(v));
                }
                if inc.theta_in + inc.theta_out > 1 {
                    out.push(Violation::MultipleThetaEndpoints(v));
                }
                if (inc.theta_in == 1) != (inc.eta_out == 1) {
                    out.push(Violation::UnpairedThetaIn(v));
                }
            }
        }
        for v in self.orientation.keys() {
            if *v >= n || !self.is_internal(*v) {
                out.push(Violation::BadOrientation(*v));
            }
        }
        if !self.is_connected() {
            out.push(Violation::Disconnected);
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Weak connectivity of the underlying graph.
    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            if e.src < n && e.dst < n {
                adj[e.src].push(e.dst);
                adj[e.dst].push(e.src);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Swaps the orientation at internal vertex `v`; returns `None` if `v`
    /// carries no orientation data.
    pub fn reverse_vertex_orientation_at(&self, v: usize) -> Option<JacobiDiagram> {
        let mut d = self.clone();
        let o = d.orientation.get_mut(&v)?;
        o.swap(0, 1);
        Some(d)
    }

    /// Swaps the orientation at the first internal vertex; identity when there
    /// is none.
    pub fn reverse_vertex_orientation(&self) -> JacobiDiagram {
        match self.orientation.keys().next() {
            Some(&v) => self.reverse_vertex_orientation_at(v).expect("present"),
            None => self.clone(),
        }
    }

    /// Applies a vertex relabeling `perm[old] = new`, keeping orientation data.
    pub fn relabel(&self, perm: &[usize]) -> JacobiDiagram {
        let n = self.vertex_count();
        let mut classes = vec![VertexClass::External; n];
        for v in 0..n {
            classes[perm[v]] = self.classes[v];
        }
        let edges = self.edges.iter().map(|e| Edge { src: perm[e.src], dst: perm[e.dst], kind: e.kind }).collect();
        let orientation = self.orientation.iter().map(|(v, o)| (perm[*v], *o)).collect();
        JacobiDiagram { classes, edges, orientation }
    }

    /// Reorders edges by `order` (new position i holds old edge `order[i]`).
    pub fn permute_edges(&self, order: &[usize]) -> JacobiDiagram {
        let mut inv = vec![0; order.len()];
        for (i, &o) in order.iter().enumerate() {
            inv[o] = i;
        }
        let edges = order.iter().map(|&o| self.edges[o]).collect();
        let orientation = self.orientation.iter().map(|(v, [a, b])| (*v, [inv[*a], inv[*b]])).collect();
        JacobiDiagram { classes: self.classes.clone(), edges, orientation }
    }

    /// Returns a copy with edge `i` reversed (its orientation slot, if any, is dropped
    /// from the vertex it no longer enters).
    pub fn with_edge_reversed(&self, i: usize) -> JacobiDiagram {
        let mut d = self.clone();
        let e = &mut d.edges[i];
        std::mem::swap(&mut e.src, &mut e.dst);
        d
    }

    /// Sign (+1/−1) of the orientation relative to the *standard* one in which
    /// every internal vertex lists its inputs in increasing vertex order.
    pub fn orientation_sign(&self) -> i32 {
        let mut s = 1;
        for v in self.orientation.keys() {
            if let Some((a, b)) = self.inputs(*v) {
                if a > b {
                    s = -s;
                }
            }
        }
        s
    }

    /// Returns the copy carrying the standard orientation.
    pub fn with_standard_orientation(&self) -> JacobiDiagram {
        let mut d = self.clone();
        let keys: Vec<usize> = d.orientation.keys().copied().collect();
        for v in keys {
            if let Some((a, b)) = d.inputs(v) {
                if a > b {
                    d.orientation.get_mut(&v).unwrap().swap(0, 1);
                }
            }
        }
        d
    }
}

/// JSON form of a vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexJson {
    pub id: usize,
    pub class: VertexClass,
}

/// JSON form of an edge (1-based ids).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

/// JSON form of a diagram; `orientation` maps internal ids to edge indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    #[serde(default)]
    pub orientation: BTreeMap<String, [usize; 2]>,
}

/// Error converting JSON into a diagram.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DiagramParseError {
    #[error("vertex ids must be 1..=n in order; found {0} at position {1}")]
    VertexIds(usize, usize),
    #[error("edge endpoint {0} is not a vertex id")]
    UnknownVertex(usize),
    #[error("orientation key {0:?} is not a vertex id")]
    BadOrientationKey(String),
    #[error("orientation edge index {0} out of range")]
    BadEdgeIndex(usize),
}

impl JacobiDiagram {
    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            vertices: self.classes.iter().enumerate().map(|(i, c)| VertexJson { id: i + 1, class: *c }).collect(),
            edges: self.edges.iter().map(|e| EdgeJson { src: e.src + 1, dst: e.dst + 1, kind: e.kind }).collect(),
            orientation: self.orientation.iter().map(|(v, o)| ((v + 1).to_string(), *o)).collect(),
        }
    }

    pub fn from_json(j: &DiagramJson) -> Result<Self, DiagramParseError> {
        let n = j.vertices.len();
        for (i, v) in j.vertices.iter().enumerate() {
            if v.id != i + 1 {
                return Err(DiagramParseError::VertexIds(v.id, i));
            }
        }
        let mut edges = Vec::new();
        for e in &j.edges {
            for x in [e.src, e.dst] {
                if x == 0 || x > n {
                    return Err(DiagramParseError::UnknownVertex(x));
                }
            }
            edges.push(Edge { src: e.src - 1, dst: e.dst - 1, kind: e.kind });
        }
        let mut orientation = BTreeMap::new();
        for (k, o) in &j.orientation {
            let id: usize = k.parse().map_err(|_| DiagramParseError::BadOrientationKey(k.clone()))?;
            if id == 0 || id > n {
                return Err(DiagramParseError::BadOrientationKey(k.clone()));
            }
            for &i in o {
                if i >= edges.len() {
                    return Err(DiagramParseError::BadEdgeIndex(i));
                }
            }
            orientation.insert(id - 1, *o);
        }
        Ok(JacobiDiagram { classes: j.vertices.iter().map(|v| v.class).collect(), edges, orientation })
    }
}

impl Serialize for JacobiDiagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for JacobiDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = DiagramJson::deserialize(d)?;
        JacobiDiagram::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Incrementally assembles a diagram from arbitrarily named vertices.
///
/// On [`build`](DiagramBuilder::build) external vertices are numbered first, in
/// insertion order, followed by internal ones.
#[derive(Clone, Debug, Default)]
pub struct DiagramBuilder {
    names: Vec<(usize, VertexClass)>,
    edges: Vec<(usize, usize, EdgeKind)>,
    inputs: BTreeMap<usize, (usize, usize)>,
}

impl DiagramBuilder {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn external(&mut self, name: usize) -> &mut Self {
        self.names.push((name, VertexClass::External));
        self
    }
    pub fn internal(&mut self, name: usize, first: usize, second: usize) -> &mut Self {
        self.names.push((name, VertexClass::Internal));
        self.inputs.insert(name, (first, second));
        self
    }
    pub fn theta(&mut self, a: usize, b: usize) -> &mut Self {
        self.edges.push((a, b, EdgeKind::Theta));
        self
    }
    pub fn eta(&mut self, a: usize, b: usize) -> &mut Self {
        self.edges.push((a, b, EdgeKind::Eta));
        self
    }
    /// Sets (or replaces) the ordered inputs of an internal vertex.
    pub fn set_inputs(&mut self, name: usize, first: usize, second: usize) -> &mut Self {
        self.inputs.insert(name, (first, second));
        self
    }

    pub fn build(&self) -> JacobiDiagram {
        let mut index = BTreeMap::new();
        let mut n_ext = 0;
        for (name, c) in &self.names {
            if *c == VertexClass::External {
                index.insert(*name, n_ext);
                n_ext += 1;
            }
        }
        let mut next = n_ext;
        for (name, c) in &self.names {
            if *c == VertexClass::Internal {
                index.insert(*name, next);
                next += 1;
            }
        }
        let edges: Vec<Edge> =
            self.edges.iter().map(|(a, b, k)| Edge { src: index[a], dst: index[b], kind: *k }).collect();
        let inputs = self.inputs.iter().map(|(v, (p, q))| (index[v], (index[p], index[q]))).collect();
        JacobiDiagram::from_sources(n_ext, next - n_ext, edges, &inputs)
    }
}

/// The wheel diagram Γ_k: external vertices d_1,a_1,…,d_k,a_k with θ-chords
/// d_i → a_i and η-edges a_i → d_{i+1 mod k}.
pub fn wheel_diagram(k: usize) -> JacobiDiagram {
    assert!(k >= 1, "wheel needs k ≥ 1");
    let mut b = DiagramBuilder::new();
    for v in 0..2 * k {
        b.external(v);
    }
    for i in 0..k {
        b.theta(2 * i, 2 * i + 1);
        b.eta(2 * i + 1, (2 * i + 2) % (2 * k));
    }
    b.build()
}

/// Named degree-2 diagrams Γ_1,…,Γ_5 (index 1..=5).
///
/// * Γ_1: one internal vertex fed by an η-path end and a leaf, emitting to the path start.
/// * Γ_2: triangle — η-path 1→1′→2, chord 2→1, leaf 3→1′.
/// * Γ_3: the wheel Γ_2 (two chords on an alternating 4-cycle).
/// * Γ_4: two internal vertices feeding each other, each with one leaf input.
/// * Γ_5: η 2-cycle with a leaf hair on each vertex.
pub fn degree_two(index: usize) -> JacobiDiagram {
    let mut b = DiagramBuilder::new();
    match index {
        1 => {
            // x1 → x2 (η), x2 → v, x3 → v, v → x1; orientation (x2, x3).
            b.external(1).external(2).external(3).internal(4, 2, 3);
            b.theta(4, 1).eta(1, 2).theta(2, 4).theta(3, 4);
        }
        2 => {
            b.external(1).external(11).external(2).external(3);
            b.eta(1, 11).eta(11, 2).theta(2, 1).theta(3, 11);
        }
        3 => return wheel_diagram(2),
        4 => {
            b.external(1).external(2).internal(3, 1, 4).internal(4, 2, 3);
            b.theta(1, 3).theta(2, 4).theta(3, 4).theta(4, 3);
        }
        5 => {
            b.external(1).external(2).external(3).external(4);
            b.eta(1, 2).eta(2, 1).theta(3, 1).theta(4, 2);
        }
        _ => panic!("degree-two diagrams are indexed 1..=5"),
    }
    b.build()
}
