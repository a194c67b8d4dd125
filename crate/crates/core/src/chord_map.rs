//! Singular-disk data and the chord diagram Γ(γ).
//!
//! For a star-like presentation whose every crossing is marked, branch j is
//! the band B_j from D_0 to D_j with crossings U_{j1}, …, U_{jm_j} in band
//! order.  Step 1 lays out one η-path U_{j1} → … → U_{jm_j} → D_j per branch;
//! Step 2 adds a θ-edge D_i → U_{jp} whenever crossing U_{jp} pierces D_i.

pub use crate::algebra::is_chord_diagram;
use crate::algebra::weight_w;
use crate::alexander::CrossingId;
use crate::diagram::{DiagramBuilder, JacobiDiagram};
use crate::linalg::Q;
use crate::schemes::{is_star_like, MarkedPresentation};
use crate::Error;
use num_traits::Zero;
use std::collections::BTreeSet;

/// A star-like marked presentation with every crossing marked and every band
/// attached to the based disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularDiskData {
    marked: MarkedPresentation,
    /// Per band: (far disk D_j, crossings U_{j1}..U_{jm_j} in band order).
    branches: Vec<(usize, Vec<CrossingId>)>,
}

impl SingularDiskData {
    pub fn new(mp: MarkedPresentation) -> Result<Self, Error> {
        mp.validate()?;
        if !is_star_like(&mp) {
            return Err(Error::Validation("presentation is not star-like".into()));
        }
        let p = mp.presentation();
        let marks: BTreeSet<CrossingId> = mp.marks.iter().copied().collect();
        if let Some(c) = p.crossings().into_iter().find(|c| !marks.contains(c)) {
            return Err(Error::Validation(format!("crossing at band {} piercing {} is unmarked", c.band, c.piercing)));
        }
        let mut branches = Vec::with_capacity(p.bands.len());
        for (j, b) in p.bands.iter().enumerate() {
            let far = if b.from == p.based {
                b.to
            } else if b.to == p.based {
                b.from
            } else {
                return Err(Error::Validation(format!("band {j} does not hang off the based disk")));
            };
            branches.push((far, (0..b.piercings.len()).map(|piercing| CrossingId { band: j, piercing }).collect()));
        }
        if branches.len() != mp.marks.len() {
            return Err(Error::Validation(format!(
                "{} branches for {} marked crossings; a degree-k datum needs k of each",
                branches.len(),
                mp.marks.len()
            )));
        }
        Ok(Self { marked: mp, branches })
    }

    /// Number of marked crossings k.
    pub fn k(&self) -> usize {
        self.marked.marks.len()
    }

    pub fn marked(&self) -> &MarkedPresentation {
        &self.marked
    }

    /// Branch lengths m_j.
    pub fn branch_lengths(&self) -> Vec<usize> {
        self.branches.iter().map(|(_, cs)| cs.len()).collect()
    }
}

/// Γ(γ) by Steps 1–2.  Vertices are numbered branch by branch: U_{j1}..U_{jm_j}, D_j.
pub fn chord_diagram_of(g: &SingularDiskData) -> Result<JacobiDiagram, Error> {
    let p = g.marked.presentation();
    let mut b = DiagramBuilder::new();
    let mut head_of_disk = vec![None; p.disks];
    let mut crossing_vertex = std::collections::BTreeMap::new();
    let mut next = 0usize;
    for (far, cs) in &g.branches {
        let mut prev = None;
        for c in cs {
            b.external(next);
            crossing_vertex.insert(*c, next);
            if let Some(u) = prev {
                b.eta(u, next);
            }
            prev = Some(next);
            next += 1;
        }
        b.external(next);
        if let Some(u) = prev {
            b.eta(u, next);
        }
        head_of_disk[*far] = Some(next);
        next += 1;
    }
    for (c, u) in &crossing_vertex {
        let disk = p.piercing(*c).expect("validated crossing").disk;
        let head = head_of_disk[disk].expect("star-like crossings pierce branch disks");
        b.theta(head, *u);
    }
    let d = b.build();
    if !d.is_connected() {
        return Err(Error::Validation("singular-disk datum yields a disconnected diagram".into()));
    }
    Ok(d)
}

/// The pairing value: w_k(Γ(γ)) for even k, 0 for odd k.  A Γ(γ) that is not
/// an admissible diagram (a disk pierced twice gives a head with two θ-edges)
/// pairs to 0.
pub fn pairing_value(g: &SingularDiskData) -> Result<Q, Error> {
    if g.k() % 2 == 1 {
        return Ok(Q::zero());
    }
    let d = chord_diagram_of(g)?;
    if !d.is_valid() {
        return Ok(Q::zero());
    }
    weight_w(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alexander::wheel_presentation;
    use crate::canon::canonicalize;
    use crate::diagram::wheel_diagram;
    use crate::linalg::q;

    fn wheel_datum(k: usize) -> SingularDiskData {
        SingularDiskData::new(MarkedPresentation::all_marked(wheel_presentation(k))).unwrap()
    }

    #[test]
    fn wheel_two_by_hand() {
        // U_1 → D_1, U_2 → D_2 (η); D_2 → U_1 (B_1 pierces D_2), D_1 → U_2 (θ)
        let d = chord_diagram_of(&wheel_datum(2)).unwrap();
        let mut b = DiagramBuilder::new();
        b.external(0).external(1).external(2).external(3);
        b.eta(0, 1).eta(2, 3).theta(3, 0).theta(1, 2);
        assert_eq!(d, b.build());
        assert_eq!(canonicalize(&d).form, canonicalize(&wheel_diagram(2)).form);
        assert!(is_chord_diagram(&d));
        assert_eq!(pairing_value(&wheel_datum(2)).unwrap(), q(1));
    }

    #[test]
    fn odd_k_pairs_to_zero() {
        assert_eq!(pairing_value(&wheel_datum(3)).unwrap(), q(0));
    }

    #[test]
    fn rejects_non_star_like_and_unmarked() {
        let w = wheel_presentation(2);
        assert!(SingularDiskData::new(MarkedPresentation::new(w.clone(), vec![])).is_err());
        let mut chain = w;
        chain.bands[1].from = 1;
        assert!(SingularDiskData::new(MarkedPresentation::all_marked(chain)).is_err());
    }
}
