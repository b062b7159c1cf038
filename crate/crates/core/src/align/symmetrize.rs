//! Symmetrization of a direct and an inverse alignment.

use std::collections::BTreeSet;

use crate::align::{require_same_pair, AlignerKind, AlignmentLink, AlignmentSet};
use crate::error::Result;

/// Links present in both alignments.
pub fn intersect(direct: &AlignmentSet, inverse: &AlignmentSet) -> Result<AlignmentSet> {
    require_same_pair(direct, inverse)?;
    Ok(AlignmentSet {
        pair_id: direct.pair_id.clone(),
        links: direct.links.intersection(&inverse.links).copied().collect(),
        aligner: AlignerKind::Intersection,
    })
}

/// Links present in either alignment.
pub fn union_align(direct: &AlignmentSet, inverse: &AlignmentSet) -> Result<AlignmentSet> {
    require_same_pair(direct, inverse)?;
    Ok(AlignmentSet {
        pair_id: direct.pair_id.clone(),
        links: direct.links.union(&inverse.links).copied().collect(),
        aligner: AlignerKind::Union,
    })
}

const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Grow-diag symmetrization (without the final step).
///
/// Starting from the intersection, repeatedly scans the current links in
/// (c_index, a_index) order and adds any 8-neighborhood link that lies in the
/// union and touches at least one currently unaligned token, until a full
/// pass adds nothing. Additions take effect immediately within a pass.
pub fn grow_diag(direct: &AlignmentSet, inverse: &AlignmentSet) -> Result<AlignmentSet> {
    require_same_pair(direct, inverse)?;
    let union: BTreeSet<AlignmentLink> = direct.links.union(&inverse.links).copied().collect();
    let mut links: BTreeSet<AlignmentLink> =
        direct.links.intersection(&inverse.links).copied().collect();

    let mut aligned_c: BTreeSet<usize> = links.iter().map(|l| l.c_index).collect();
    let mut aligned_a: BTreeSet<usize> = links.iter().map(|l| l.a_index).collect();

    loop {
        let mut grown = false;
        let snapshot: Vec<AlignmentLink> = links.iter().copied().collect();
        for link in snapshot {
            for (dc, da) in NEIGHBORS {
                let c = link.c_index as isize + dc;
                let a = link.a_index as isize + da;
                if c < 0 || a < 0 {
                    continue;
                }
                let cand = AlignmentLink::new(c as usize, a as usize);
                if links.contains(&cand) || !union.contains(&cand) {
                    continue;
                }
                if !aligned_c.contains(&cand.c_index) || !aligned_a.contains(&cand.a_index) {
                    links.insert(cand);
                    aligned_c.insert(cand.c_index);
                    aligned_a.insert(cand.a_index);
                    grown = true;
                }
            }
        }
        if !grown {
            break;
        }
    }

    Ok(AlignmentSet {
        pair_id: direct.pair_id.clone(),
        links,
        aligner: AlignerKind::GrowDiag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[(usize, usize)]) -> AlignmentSet {
        let mut s = AlignmentSet::new("00000001", AlignerKind::Direct);
        s.links = pairs.iter().map(|&(c, a)| AlignmentLink::new(c, a)).collect();
        s
    }

    #[test]
    fn grow_diag_extends_along_union() {
        // Seed {(1,1)}; union adds {(1,2),(3,3)}. (1,2) is adjacent with a
        // fresh a-token; (3,3) is not adjacent to anything grown.
        let direct = set(&[(1, 1), (1, 2), (3, 3)]);
        let inverse = set(&[(1, 1)]);
        let grown = grow_diag(&direct, &inverse).unwrap();
        assert_eq!(grown.links, set(&[(1, 1), (1, 2)]).links);
    }

    #[test]
    fn grow_diag_empty_seed_stays_empty() {
        let direct = set(&[(0, 0), (1, 1)]);
        let inverse = set(&[(2, 2)]);
        let grown = grow_diag(&direct, &inverse).unwrap();
        assert!(grown.links.is_empty());
    }

    #[test]
    fn pair_id_mismatch_is_an_error() {
        let mut other = set(&[(0, 0)]);
        other.pair_id = "00000002".into();
        assert!(intersect(&set(&[(0, 0)]), &other).is_err());
    }
}
