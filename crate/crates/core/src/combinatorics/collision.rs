//! Merge collisions: quotients of a motif under vertex coincidences.
//!
//! When latent positions are drawn from a step function with finitely many
//! atoms, several motif vertices can land on the same atom. A partition of
//! `V(S)` into cells records which ones coincide. Cells must be independent
//! sets (a merged edge would be a self-dyad, probability 0), and the quotient
//! has an edge between two cells iff some cross pair is an edge of `S`.
//!
//! Under the empirical graphon a quotient only contributes when every cross
//! pair between two cells agrees (all edges or all non-edges); mixed cell
//! pairs force `A_ij (1 - A_ij) = 0`. Those partitions are counted separately
//! as `consistent`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::motif::{canonical_key_of_mask, pair_index, CanonicalKey, Motif};

/// Largest motif whose partitions are enumerated.
pub const MAX_COLLISION_BASE: usize = 6;

/// One quotient class on `cells` vertices.
#[derive(Clone, Debug, Serialize)]
pub struct CollisionEntry {
    pub cells: usize,
    /// `None` for the single-vertex quotient (only possible when `S` has no
    /// edges).
    #[serde(serialize_with = "serialize_quotient")]
    pub quotient: Option<Motif>,
    /// Independent-cell partitions producing this class.
    pub multiplicity: u64,
    /// Those among them whose cell pairs are all-edge or all-non-edge.
    pub consistent: u64,
}

fn serialize_quotient<S: serde::Serializer>(m: &Option<Motif>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => s.serialize_str(&m.literal()),
        None => s.serialize_str("1;"),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CollisionLevel {
    pub cells: usize,
    pub entries: Vec<CollisionEntry>,
}

/// `M(S, j)` for `j = 1..=q`; levels with no entries are kept (empty).
#[derive(Clone, Debug, Serialize)]
pub struct MergeCollisionCatalog {
    #[serde(serialize_with = "crate::census::serialize_motif")]
    base: Motif,
    levels: Vec<CollisionLevel>,
}

impl MergeCollisionCatalog {
    pub fn base(&self) -> &Motif {
        &self.base
    }

    pub fn levels(&self) -> &[CollisionLevel] {
        &self.levels
    }

    pub fn level(&self, cells: usize) -> Option<&CollisionLevel> {
        self.levels.iter().find(|l| l.cells == cells)
    }

    /// Number of independent-cell partitions of `V(S)`.
    pub fn partition_count(&self) -> u64 {
        self.levels.iter().flat_map(|l| &l.entries).map(|e| e.multiplicity).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Calls `f` with every set partition of `0..q` as a restricted growth
/// string (`cell[v]` is the cell of `v`; cells numbered by first use).
pub fn for_each_partition(q: usize, mut f: impl FnMut(&[usize], usize)) {
    let mut cell = vec![0usize; q];
    fn rec(v: usize, used: usize, cell: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], usize)) {
        if v == cell.len() {
            f(cell, used);
            return;
        }
        for c in 0..=used {
            cell[v] = c;
            rec(v + 1, used.max(c + 1), cell, f);
        }
    }
    if q == 0 {
        return;
    }
    rec(1, 1, &mut cell, &mut f);
}

/// Enumerates independent-cell partitions of `V(S)` and groups quotients.
pub fn merge_collision_catalog(motif: &Motif) -> Result<MergeCollisionCatalog> {
    let q = motif.vertex_count();
    if q > MAX_COLLISION_BASE {
        return Err(Error::UnsupportedMotifSize(q));
    }
    // (cells, key) -> (multiplicity, consistent)
    let mut groups: BTreeMap<(usize, Option<CanonicalKey>), (u64, u64)> = BTreeMap::new();
    for_each_partition(q, |cell, j| {
        for b in 1..q {
            for a in 0..b {
                if cell[a] == cell[b] && motif.has_edge(a, b) {
                    return;
                }
            }
        }
        // Per cell pair: seen an edge / seen a non-edge.
        let mut seen = [[(false, false); MAX_COLLISION_BASE]; MAX_COLLISION_BASE];
        for b in 1..q {
            for a in 0..b {
                let (x, y) = (cell[a].min(cell[b]), cell[a].max(cell[b]));
                if x == y {
                    continue;
                }
                if motif.has_edge(a, b) {
                    seen[x][y].0 = true;
                } else {
                    seen[x][y].1 = true;
                }
            }
        }
        let mut mask = 0u32;
        let mut consistent = true;
        for y in 1..j {
            for x in 0..y {
                let (edge, non_edge) = seen[x][y];
                if edge {
                    mask |= 1 << pair_index(x, y);
                }
                consistent &= !(edge && non_edge);
            }
        }
        let key = (j >= 2).then(|| canonical_key_of_mask(j, mask));
        let slot = groups.entry((j, key)).or_insert((0, 0));
        slot.0 += 1;
        slot.1 += u64::from(consistent);
    });
    let levels = (1..=q)
        .map(|j| CollisionLevel {
            cells: j,
            entries: groups
                .range((j, None)..)
                .take_while(|((c, _), _)| *c == j)
                .map(|(&(cells, key), &(multiplicity, consistent))| CollisionEntry {
                    cells,
                    quotient: key.map(Motif::from_key),
                    multiplicity,
                    consistent,
                })
                .collect(),
        })
        .collect();
    Ok(MergeCollisionCatalog {
        base: motif.clone(),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell(q: usize) -> u64 {
        let mut count = 0;
        for_each_partition(q, |_, _| count += 1);
        count
    }

    #[test]
    fn partition_enumeration() {
        assert_eq!((1..=6).map(bell).collect::<Vec<_>>(), vec![1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn path3_catalog() {
        let cat = merge_collision_catalog(&Motif::path(3)).unwrap();
        assert!(cat.level(1).unwrap().entries.is_empty());
        let two = &cat.level(2).unwrap().entries;
        assert_eq!(two.len(), 1);
        assert!(two[0].quotient.as_ref().unwrap().is_isomorphic(&Motif::k2()));
        assert_eq!((two[0].multiplicity, two[0].consistent), (1, 1));
        let three = &cat.level(3).unwrap().entries;
        assert_eq!(three.len(), 1);
        assert!(three[0].quotient.as_ref().unwrap().is_isomorphic(&Motif::path(3)));
        assert_eq!(three[0].multiplicity, 1);
    }

    #[test]
    fn k2_cannot_merge() {
        let cat = merge_collision_catalog(&Motif::k2()).unwrap();
        assert!(cat.level(1).unwrap().entries.is_empty());
        assert_eq!(cat.partition_count(), 1);
    }

    #[test]
    fn edgeless_motifs_merge_freely() {
        let cat = merge_collision_catalog(&Motif::empty(3)).unwrap();
        assert_eq!(cat.partition_count(), 5);
        let one = &cat.level(1).unwrap().entries;
        assert_eq!(one.len(), 1);
        assert!(one[0].quotient.is_none());
        assert!(cat.to_json().unwrap().contains("\"1;\""));
    }

    #[test]
    fn multiplicities_sum_to_independent_partitions() {
        for m in crate::motif::all_motifs(5).unwrap() {
            let cat = merge_collision_catalog(&m).unwrap();
            let mut direct = 0;
            for_each_partition(5, |cell, _| {
                let ok = m.edges().iter().all(|&(a, b)| cell[a] != cell[b]);
                direct += u64::from(ok);
            });
            assert_eq!(cat.partition_count(), direct, "{m}");
        }
    }

    #[test]
    fn mixed_cell_pairs_are_not_consistent() {
        // Path 0-1-2-3: merging {0, 3} leaves cell pair ({0,3}, {1}) with edge
        // 0-1 and non-edge 1-3.
        let cat = merge_collision_catalog(&Motif::path(4)).unwrap();
        let three: u64 = cat.level(3).unwrap().entries.iter().map(|e| e.multiplicity).sum();
        let three_ok: u64 = cat.level(3).unwrap().entries.iter().map(|e| e.consistent).sum();
        // Independent pairs to merge: {0,2}, {1,3}, {0,3}.
        assert_eq!(three, 3);
        assert_eq!(three_ok, 0);
        assert!(merge_collision_catalog(&Motif::path(7)).is_err());
    }
}
