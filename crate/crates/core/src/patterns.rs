//! Local subgraph patterns (the Y and L shapes) and a small matcher.
//!
//! Patterns are data: a list of role vertices with optional exact incidence
//! constraints, plus edges between roles.  The default set ships in
//! `data/patterns.json`; alternative conventions can be loaded at run time.

use crate::diagram::{EdgeKind, JacobiDiagram, VertexClass};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// One vertex of a pattern graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternVertex {
    pub role: String,
    pub class: VertexClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_out: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_out: Option<usize>,
}

/// One edge of a pattern graph, between roles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternEdge {
    pub src: String,
    pub dst: String,
    pub kind: EdgeKind,
}

/// A named pattern graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pattern {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub vertices: Vec<PatternVertex>,
    pub edges: Vec<PatternEdge>,
}

/// A pattern occurrence: pattern name and matched diagram vertices (by role order).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub pattern: String,
    pub vertices: Vec<usize>,
}

/// The ordered set of degeneracy patterns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PatternSet(pub Vec<Pattern>);

const DEFAULT_PATTERNS: &str = include_str!("../data/patterns.json");

impl PatternSet {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// The built-in Y/L patterns.
    pub fn builtin() -> &'static PatternSet {
        static SET: OnceLock<PatternSet> = OnceLock::new();
        SET.get_or_init(|| PatternSet::from_json(DEFAULT_PATTERNS).expect("bundled pattern file parses"))
    }

    pub fn get(&self, name: &str) -> Option<&Pattern> {
        self.0.iter().find(|p| p.name == name)
    }

    /// First occurrence of any pattern in `d`.
    pub fn find_any(&self, d: &JacobiDiagram) -> Option<Witness> {
        self.0.iter().find_map(|p| p.find(d))
    }
}

impl Pattern {
    fn role_index(&self, r: &str) -> usize {
        self.vertices.iter().position(|v| v.role == r).unwrap_or_else(|| panic!("unknown role {r}"))
    }

    fn admits(&self, pv: &PatternVertex, d: &JacobiDiagram, v: usize) -> bool {
        if d.classes()[v] != pv.class {
            return false;
        }
        let inc = d.incidence(v);
        let ok = |c: Option<usize>, x: usize| c.map_or(true, |c| c == x);
        ok(pv.eta_in, inc.eta_in)
            && ok(pv.eta_out, inc.eta_out)
            && ok(pv.theta_in, inc.theta_in)
            && ok(pv.theta_out, inc.theta_out)
    }

    /// Finds one injective occurrence of the pattern in `d`.
    pub fn find(&self, d: &JacobiDiagram) -> Option<Witness> {
        let edges: Vec<(usize, usize, EdgeKind)> =
            self.edges.iter().map(|e| (self.role_index(&e.src), self.role_index(&e.dst), e.kind)).collect();
        let mut assign = vec![usize::MAX; self.vertices.len()];
        if self.extend(d, &edges, &mut assign, 0) {
            Some(Witness { pattern: self.name.clone(), vertices: assign })
        } else {
            None
        }
    }

    fn extend(&self, d: &JacobiDiagram, edges: &[(usize, usize, EdgeKind)], assign: &mut Vec<usize>, i: usize) -> bool {
        if i == self.vertices.len() {
            return true;
        }
        for v in 0..d.vertex_count() {
            if assign[..i].contains(&v) || !self.admits(&self.vertices[i], d, v) {
                continue;
            }
            assign[i] = v;
            let consistent = edges.iter().all(|&(a, b, k)| {
                if a > i || b > i {
                    return true;
                }
                d.edges().iter().any(|e| e.kind == k && e.src == assign[a] && e.dst == assign[b])
            });
            if consistent && self.extend(d, edges, assign, i + 1) {
                return true;
            }
        }
        assign[i] = usize::MAX;
        false
    }
}

/// Whether `d` contains a Y or L subgraph (built-in encodings), with a witness.
pub fn has_yl_subgraph(d: &JacobiDiagram) -> Option<Witness> {
    PatternSet::builtin().find_any(d)
}

/// Whether `d` contains the L pattern (leaf feeding an η-path origin).
pub fn has_l_pattern(d: &JacobiDiagram) -> bool {
    PatternSet::builtin().get("L").and_then(|p| p.find(d)).is_some()
}

/// Whether `d` contains the Y pattern (internal vertex fed by two leaves).
pub fn has_y_pattern(d: &JacobiDiagram) -> bool {
    PatternSet::builtin().get("Y").and_then(|p| p.find(d)).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{degree_two, wheel_diagram, DiagramBuilder};

    #[test]
    fn builtin_parses() {
        let s = PatternSet::builtin();
        assert!(s.get("Y").is_some() && s.get("L").is_some());
    }

    #[test]
    fn named_diagrams_are_not_degenerate() {
        for i in 1..=5 {
            assert!(has_yl_subgraph(&degree_two(i)).is_none(), "Γ_{i}");
        }
        assert!(has_yl_subgraph(&wheel_diagram(4)).is_none());
    }

    #[test]
    fn l_pattern_detected() {
        // leaf 3 feeds the origin 1 of the η-path 1 → 2 → 4.
        let mut b = DiagramBuilder::new();
        b.external(1).external(2).external(3).external(4);
        b.theta(3, 1).eta(1, 2).eta(2, 4).theta(4, 2);
        let d = b.build();
        assert!(d.is_valid(), "{:?}", d.validate());
        let w = has_yl_subgraph(&d).expect("L");
        assert_eq!(w.pattern, "L");
        assert_eq!(w.vertices, vec![2, 0]);
    }

    #[test]
    fn y_pattern_detected() {
        // leaves 1, 2 feed internal 4, which emits into the η 2-cycle 3 ⇄ 5.
        let mut b = DiagramBuilder::new();
        b.external(1).external(2).external(3).external(5).external(6).internal(4, 1, 2);
        b.theta(1, 4).theta(2, 4).theta(4, 3).eta(3, 5).eta(5, 3).theta(6, 5);
        let d = b.build();
        assert!(d.is_valid(), "{:?}", d.validate());
        assert!(has_y_pattern(&d));
    }
}
