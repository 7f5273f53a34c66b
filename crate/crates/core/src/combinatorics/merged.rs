//! Merged copy sets: graphs on `k` vertices covered by two copies of `R`.
//!
//! For `W` on `k` vertices, `D(W)` counts ordered pairs of ordered
//! `p`-tuples `(i, j)` with `i ∪ j = [k]` and both `W(i)`, `W(j)`
//! isomorphic to `R`. Since the tuple order inside a subset does not affect
//! isomorphism, `D(W) = (p!)^2 · #{(A, B) : |A| = |B| = p, A ∪ B = [k],
//! W[A] ≃ R, W[B] ≃ R}`.
//!
//! With this coefficient the second moment of the motif density is
//!
//! ```text
//! E[P_R(G_n)^2] = (C(n,p) p! N(R))^-2 Σ_{k=p}^{2p} C(n,k) Σ_[W] N(W) D(W) P_W
//! ```
//!
//! where the inner sum runs over isomorphism classes.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::census::serialize_motif;
use crate::error::{Error, Result};
use crate::motif::{canonical_key_of_mask, pair_index, CanonicalKey, Motif};
use crate::util::factorial;

/// Largest base motif for which catalogs are built (`2p` stays within the
/// canonical labeling range).
pub const MAX_MERGED_BASE: usize = 4;

/// One isomorphism class `W` with its coefficient `D(W)`.
#[derive(Clone, Debug, Serialize)]
pub struct MergedEntry {
    #[serde(serialize_with = "serialize_motif")]
    pub motif: Motif,
    pub labeled_copies: u64,
    pub coefficient: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MergedLevel {
    pub vertices: usize,
    pub entries: Vec<MergedEntry>,
}

/// `MC(R, k)` for `k = p..=2p`, one entry per class, ordered by canonical key.
#[derive(Clone, Debug, Serialize)]
pub struct MergedCopyCatalog {
    #[serde(serialize_with = "serialize_motif")]
    base: Motif,
    levels: Vec<MergedLevel>,
}

impl MergedCopyCatalog {
    pub fn base(&self) -> &Motif {
        &self.base
    }

    pub fn levels(&self) -> &[MergedLevel] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Option<&MergedLevel> {
        self.levels.iter().find(|l| l.vertices == k)
    }

    /// `D(W)` for a class in the catalog, or `None` if `W` is not a merge.
    pub fn coefficient(&self, w: &Motif) -> Option<u64> {
        let key = w.canonical_key();
        self.level(w.vertex_count())?
            .entries
            .iter()
            .find(|e| e.motif.canonical_key() == key)
            .map(|e| e.coefficient)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Builds `MC(R, k)` for every `k` by overlaying a second labeled copy of
/// `R` on the fixed first copy and trying every set of cross dyads.
pub fn merged_copy_catalog(motif: &Motif) -> Result<MergedCopyCatalog> {
    let p = motif.vertex_count();
    if p > MAX_MERGED_BASE {
        return Err(Error::UnsupportedMotifSize(p));
    }
    let base = Motif::from_mask(p, motif.mask());
    let levels = (p..=2 * p)
        .map(|k| {
            let keys = merged_classes(&base, k);
            let entries = keys
                .into_iter()
                .map(|key| {
                    let w = Motif::from_key(key);
                    let coefficient = merge_coefficient(&base, &w);
                    MergedEntry {
                        labeled_copies: w.labeled_copy_count(),
                        motif: w,
                        coefficient,
                    }
                })
                .collect();
            MergedLevel { vertices: k, entries }
        })
        .collect();
    Ok(MergedCopyCatalog {
        base: motif.clone(),
        levels,
    })
}

/// Catalog shared across calls, keyed by the base motif's class.
pub fn cached_merged_copy_catalog(motif: &Motif) -> Result<Arc<MergedCopyCatalog>> {
    static CACHE: OnceLock<Mutex<HashMap<CanonicalKey, Arc<MergedCopyCatalog>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = motif.canonical_key();
    if let Some(found) = cache.lock().expect("catalog cache").get(&key) {
        return Ok(found.clone());
    }
    let built = Arc::new(merged_copy_catalog(&Motif::from_key(key))?);
    cache.lock().expect("catalog cache").entry(key).or_insert(built.clone());
    Ok(built)
}

/// All labeled permutations of `0..p`.
fn permutations(p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..p).collect();
    permute(&mut perm, 0, &mut out);
    out
}

fn permute(perm: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
    if i == perm.len() {
        out.push(perm.clone());
        return;
    }
    for j in i..perm.len() {
        perm.swap(i, j);
        permute(perm, i + 1, out);
        perm.swap(i, j);
    }
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// Canonical keys of every class in `MC(R, k)`.
fn merged_classes(base: &Motif, k: usize) -> BTreeSet<CanonicalKey> {
    let p = base.vertex_count();
    let overlap = 2 * p - k;
    let first = base.mask();
    let perms = permutations(p);
    let mut labeled: BTreeSet<u32> = BTreeSet::new();
    for shared in subsets(p, overlap) {
        let only_first: Vec<usize> = (0..p).filter(|v| !shared.contains(v)).collect();
        let second: Vec<usize> = shared.iter().copied().chain(p..k).collect();
        let fresh: Vec<usize> = (p..k).collect();
        let cross: Vec<u32> = only_first
            .iter()
            .flat_map(|&a| fresh.iter().map(move |&b| 1u32 << pair_index(a.min(b), a.max(b))))
            .collect();
        let mut copies: BTreeSet<u32> = BTreeSet::new();
        'perm: for perm in &perms {
            let mut mask = first;
            for y in 1..p {
                for x in 0..y {
                    let (u, v) = (second[perm[x]], second[perm[y]]);
                    let bit = 1u32 << pair_index(u.min(v), u.max(v));
                    let edge = base.has_edge(x, y);
                    if u < p && v < p {
                        // Both endpoints shared: the first copy already fixes the pair.
                        if (first & bit != 0) != edge {
                            continue 'perm;
                        }
                    } else if edge {
                        mask |= bit;
                    }
                }
            }
            copies.insert(mask);
        }
        for &mask in &copies {
            for choice in 0u32..1 << cross.len() {
                let mut m = mask;
                for (i, bit) in cross.iter().enumerate() {
                    if choice >> i & 1 == 1 {
                        m |= bit;
                    }
                }
                labeled.insert(m);
            }
        }
    }
    let labeled: Vec<u32> = labeled.into_iter().collect();
    labeled.par_iter().map(|&m| canonical_key_of_mask(k, m)).collect::<Vec<_>>().into_iter().collect()
}

/// `D(W)` by counting covering pairs of `p`-subsets of `V(W)`.
pub fn merge_coefficient(base: &Motif, w: &Motif) -> u64 {
    let p = base.vertex_count();
    let k = w.vertex_count();
    if k < p || k > 2 * p {
        return 0;
    }
    let key = base.canonical_key();
    let copies: Vec<u32> = (0u32..1 << k)
        .filter(|m| m.count_ones() as usize == p)
        .filter(|&m| {
            let nodes: Vec<usize> = (0..k).filter(|&i| m >> i & 1 == 1).collect();
            induced_key(w, &nodes) == key
        })
        .collect();
    let full = (1u32 << k) - 1;
    let mut pairs = 0u64;
    for &a in &copies {
        for &b in &copies {
            if a | b == full {
                pairs += 1;
            }
        }
    }
    let pf = factorial(p);
    pairs * pf * pf
}

fn induced_key(w: &Motif, nodes: &[usize]) -> CanonicalKey {
    let mut mask = 0u32;
    for (y, &v) in nodes.iter().enumerate() {
        for (x, &u) in nodes.iter().enumerate().take(y) {
            if w.has_edge(u, v) {
                mask |= 1 << pair_index(x, y);
            }
        }
    }
    canonical_key_of_mask(nodes.len(), mask)
}
