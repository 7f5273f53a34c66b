//! Small labeled patterns (motifs) and their isomorphism classes.
//!
//! A motif on `p <= 8` vertices is stored as one adjacency byte per vertex.
//! Labeled graphs on `p` vertices are also encoded as a `u32` *pair mask*
//! with bit `b(b-1)/2 + a` set when `{a, b}` (`a < b`) is an edge.
//!
//! Canonical labels are the minimum adjacency code over vertex orderings.
//! Orderings are restricted to those compatible with a color refinement
//! (iterated degree signatures), which is isomorphism-invariant, and the
//! search prunes prefixes that already exceed the best code. The number of
//! orderings attaining the minimum equals the automorphism count.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::factorial;

pub const MIN_MOTIF_NODES: usize = 2;
pub const MAX_MOTIF_NODES: usize = 8;

/// Index of the unordered pair `{a, b}` in a pair mask.
#[inline]
pub fn pair_index(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    b * (b - 1) / 2 + a
}

#[inline]
pub fn pair_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

/// Canonical identifier of an isomorphism class of graphs on `p` vertices.
///
/// `code` is the minimum adjacency code: pairs are read in the order
/// `(0,1), (0,2), (1,2), (0,3), ...` with the first pair as the most
/// significant bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalKey {
    pub p: u8,
    pub code: u32,
}

impl CanonicalKey {
    /// Byte-string form: `[p, code as little-endian u32]`.
    pub fn to_bytes(self) -> [u8; 5] {
        let c = self.code.to_le_bytes();
        [self.p, c[0], c[1], c[2], c[3]]
    }

    /// Pair mask of the canonical representative.
    pub fn to_mask(self) -> u32 {
        let pairs = pair_count(self.p as usize);
        (0..pairs)
            .filter(|&t| self.code >> (pairs - 1 - t) & 1 == 1)
            .fold(0u32, |m, t| m | 1 << t)
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}-{:07x}", self.p, self.code)
    }
}

/// A labeled pattern graph on `2..=8` vertices.
#[derive(Clone, Debug)]
pub struct Motif {
    p: usize,
    adj: [u8; MAX_MOTIF_NODES],
    edge_count: usize,
    key: CanonicalKey,
    aut: u64,
    name: Option<String>,
}

impl PartialEq for Motif {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.adj == other.adj
    }
}

impl Eq for Motif {}

impl Motif {
    /// Builds a motif from an edge list on vertices `0..p`.
    pub fn new(p: usize, edges: &[(usize, usize)]) -> Result<Motif> {
        check_size(p)?;
        let mut mask = 0u32;
        for &(a, b) in edges {
            if a >= p || b >= p {
                return Err(Error::invalid(format!("motif edge ({a}, {b}) out of range for {p} vertices")));
            }
            if a == b {
                return Err(Error::invalid(format!("motif self-loop at vertex {a}")));
            }
            let bit = 1u32 << pair_index(a, b);
            if mask & bit != 0 {
                return Err(Error::invalid(format!("duplicate motif edge ({a}, {b})")));
            }
            mask |= bit;
        }
        Ok(Motif::from_mask(p, mask))
    }

    /// Builds a motif from a pair mask. Panics if `p` is out of range.
    pub fn from_mask(p: usize, mask: u32) -> Motif {
        assert!((MIN_MOTIF_NODES..=MAX_MOTIF_NODES).contains(&p), "motif size {p}");
        let mut adj = [0u8; MAX_MOTIF_NODES];
        for b in 1..p {
            for a in 0..b {
                if mask >> pair_index(a, b) & 1 == 1 {
                    adj[a] |= 1 << b;
                    adj[b] |= 1 << a;
                }
            }
        }
        let edge_count = mask.count_ones() as usize;
        let (code, aut) = canonical_form(p, &adj);
        Motif {
            p,
            adj,
            edge_count,
            key: CanonicalKey { p: p as u8, code },
            aut,
            name: None,
        }
    }

    /// Canonical representative of a class.
    pub fn from_key(key: CanonicalKey) -> Motif {
        Motif::from_mask(key.p as usize, key.to_mask())
    }

    /// Parses an inline literal `"name: p; a-b,c-d"`. The name is optional
    /// (`"3; 0-1,1-2"`) and the edge list may be empty (`"e2: 2;"`).
    pub fn parse(literal: &str) -> Result<Motif> {
        let bad = |msg: &str| Error::invalid(format!("motif literal `{literal}`: {msg}"));
        let (name, rest) = match literal.split_once(':') {
            Some((name, rest)) => (Some(name.trim().to_string()), rest),
            None => (None, literal),
        };
        let (size, edges) = rest.split_once(';').unwrap_or((rest, ""));
        let p: usize = size.trim().parse().map_err(|_| bad("expected vertex count before `;`"))?;
        let mut list = Vec::new();
        for token in edges.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (a, b) = token.split_once('-').ok_or_else(|| bad("edges look like `a-b`"))?;
            let a = a.trim().parse().map_err(|_| bad("bad vertex index"))?;
            let b = b.trim().parse().map_err(|_| bad("bad vertex index"))?;
            list.push((a, b));
        }
        let motif = Motif::new(p, &list)?;
        Ok(match name {
            Some(n) if !n.is_empty() => motif.with_name(n),
            _ => motif,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Motif {
        self.name = Some(name.into());
        self
    }

    pub fn complete(p: usize) -> Motif {
        Motif::from_mask(p, (1u32 << pair_count(p)) - 1)
    }

    pub fn empty(p: usize) -> Motif {
        Motif::from_mask(p, 0)
    }

    pub fn path(p: usize) -> Motif {
        let edges: Vec<_> = (1..p).map(|i| (i - 1, i)).collect();
        Motif::new(p, &edges).expect("path motif")
    }

    pub fn star(p: usize) -> Motif {
        let edges: Vec<_> = (1..p).map(|i| (0, i)).collect();
        Motif::new(p, &edges).expect("star motif")
    }

    pub fn cycle(p: usize) -> Motif {
        let mut edges: Vec<_> = (1..p).map(|i| (i - 1, i)).collect();
        edges.push((p - 1, 0));
        Motif::new(p, &edges).expect("cycle motif")
    }

    /// A single edge.
    pub fn k2() -> Motif {
        Motif::complete(2).with_name("k2")
    }

    /// The path on three vertices.
    pub fn two_star() -> Motif {
        Motif::path(3).with_name("2star")
    }

    pub fn triangle() -> Motif {
        Motif::complete(3).with_name("triangle")
    }

    pub fn vertex_count(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn non_edge_count(&self) -> usize {
        pair_count(self.p) - self.edge_count
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    /// Adjacency bitmask of vertex `a`.
    #[inline]
    pub fn neighbors_mask(&self, a: usize) -> u8 {
        self.adj[a]
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].count_ones() as usize
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for a in 0..self.p {
            for b in (a + 1)..self.p {
                if self.has_edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Pair mask of this labeling.
    pub fn mask(&self) -> u32 {
        self.edges().into_iter().fold(0, |m, (a, b)| m | 1 << pair_index(a, b))
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        self.key
    }

    /// Number of vertex permutations preserving the edge set.
    pub fn automorphism_count(&self) -> u64 {
        self.aut
    }

    /// `N(R)`: number of labeled graphs on `0..p` isomorphic to this motif,
    /// i.e. `p! / |Aut(R)|`.
    pub fn labeled_copy_count(&self) -> u64 {
        factorial(self.p) / self.aut
    }

    pub fn is_connected(&self) -> bool {
        let mut seen: u8 = 1;
        let mut frontier: u8 = 1;
        while frontier != 0 {
            let mut next = 0u8;
            for a in 0..self.p {
                if frontier >> a & 1 == 1 {
                    next |= self.adj[a];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen.count_ones() as usize == self.p
    }

    pub fn is_isomorphic(&self, other: &Motif) -> bool {
        self.key == other.key
    }

    /// Same motif with vertex `a` renamed `perm[a]`.
    pub fn relabel(&self, perm: &[usize]) -> Motif {
        assert_eq!(perm.len(), self.p);
        let mask = self
            .edges()
            .into_iter()
            .fold(0u32, |m, (a, b)| m | 1 << pair_index(perm[a], perm[b]));
        let mut m = Motif::from_mask(self.p, mask);
        m.name = self.name.clone();
        m
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Name if one was given, otherwise the canonical key.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.key.to_string())
    }

    /// Inline literal form understood by [`Motif::parse`].
    pub fn literal(&self) -> String {
        let edges: Vec<String> = self.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
        format!("{}: {}; {}", self.label(), self.p, edges.join(","))
    }
}

impl fmt::Display for Motif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

fn check_size(p: usize) -> Result<()> {
    if (MIN_MOTIF_NODES..=MAX_MOTIF_NODES).contains(&p) {
        Ok(())
    } else {
        Err(Error::UnsupportedMotifSize(p))
    }
}

/// Canonical key of a motif. Errors if the vertex count is outside `2..=8`.
pub fn canonical_label(motif: &Motif) -> Result<CanonicalKey> {
    check_size(motif.vertex_count())?;
    Ok(motif.canonical_key())
}

/// `N(R) = p! / |Aut(R)|`.
pub fn labeled_copy_count(motif: &Motif) -> u64 {
    motif.labeled_copy_count()
}

/// Canonical key of an arbitrary labeled pair mask on `p` vertices.
pub fn canonical_key_of_mask(p: usize, mask: u32) -> CanonicalKey {
    let mut adj = [0u8; MAX_MOTIF_NODES];
    for b in 1..p {
        for a in 0..b {
            if mask >> pair_index(a, b) & 1 == 1 {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
    }
    CanonicalKey {
        p: p as u8,
        code: canonical_form(p, &adj).0,
    }
}

/// One representative per isomorphism class on `p` vertices, ordered by
/// canonical key.
pub fn all_motifs(p: usize) -> Result<Vec<Motif>> {
    check_size(p)?;
    // 2^21 labeled graphs at p = 7 is fine; 2^28 at p = 8 is not.
    if p == 8 {
        return Err(Error::CensusTooLarge("class enumeration is limited to p <= 7".into()));
    }
    let keys: BTreeSet<CanonicalKey> = (0..1u32 << pair_count(p))
        .map(|mask| canonical_key_of_mask(p, mask))
        .collect();
    Ok(keys.into_iter().map(Motif::from_key).collect())
}

/// Connected classes on `p` vertices, ordered by canonical key.
pub fn connected_motifs(p: usize) -> Result<Vec<Motif>> {
    Ok(all_motifs(p)?.into_iter().filter(Motif::is_connected).collect())
}

/// Iterated degree refinement. Returns a color per vertex; colors are ranks
/// of sorted signatures, hence invariant under relabeling.
fn refine_colors(p: usize, adj: &[u8; MAX_MOTIF_NODES]) -> [u8; MAX_MOTIF_NODES] {
    let mut colors = [0u8; MAX_MOTIF_NODES];
    for a in 0..p {
        colors[a] = adj[a].count_ones() as u8;
    }
    let mut classes = rank_in_place(&mut colors, p, |c, a| vec![c[a]]);
    loop {
        let snapshot = colors;
        let next = rank_in_place(&mut colors, p, |_, a| {
            let mut sig = vec![snapshot[a]];
            let mut nb: Vec<u8> = (0..p).filter(|&b| adj[a] >> b & 1 == 1).map(|b| snapshot[b]).collect();
            nb.sort_unstable();
            sig.extend(nb);
            sig
        });
        if next == classes {
            return colors;
        }
        classes = next;
    }
}

fn rank_in_place<F>(colors: &mut [u8; MAX_MOTIF_NODES], p: usize, sig: F) -> usize
where
    F: Fn(&[u8; MAX_MOTIF_NODES], usize) -> Vec<u8>,
{
    let sigs: Vec<Vec<u8>> = (0..p).map(|a| sig(colors, a)).collect();
    let mut distinct = sigs.clone();
    distinct.sort();
    distinct.dedup();
    for a in 0..p {
        colors[a] = distinct.binary_search(&sigs[a]).expect("signature present") as u8;
    }
    distinct.len()
}

struct Search<'a> {
    p: usize,
    adj: &'a [u8; MAX_MOTIF_NODES],
    colors: [u8; MAX_MOTIF_NODES],
    slot_color: [u8; MAX_MOTIF_NODES],
    order: [usize; MAX_MOTIF_NODES],
    best: Option<u32>,
    hits: u64,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, used: u8, prefix: u32) {
        if depth == self.p {
            match self.best {
                Some(b) if prefix > b => {}
                Some(b) if prefix == b => self.hits += 1,
                _ => {
                    self.best = Some(prefix);
                    self.hits = 1;
                }
            }
            return;
        }
        let total = pair_count(self.p);
        let len = pair_count(depth + 1);
        for v in 0..self.p {
            if used >> v & 1 == 1 || self.colors[v] != self.slot_color[depth] {
                continue;
            }
            let mut code = prefix;
            for s in 0..depth {
                code = code << 1 | u32::from(self.adj[self.order[s]] >> v & 1);
            }
            if let Some(b) = self.best {
                let best_prefix = b >> (total - len);
                if code > best_prefix {
                    continue;
                }
            }
            self.order[depth] = v;
            self.run(depth + 1, used | 1 << v, code);
        }
    }
}

/// Minimum adjacency code and automorphism count.
fn canonical_form(p: usize, adj: &[u8; MAX_MOTIF_NODES]) -> (u32, u64) {
    let colors = refine_colors(p, adj);
    let mut slot_color = [0u8; MAX_MOTIF_NODES];
    let mut sorted: Vec<u8> = colors[..p].to_vec();
    sorted.sort_unstable();
    slot_color[..p].copy_from_slice(&sorted);
    let mut search = Search {
        p,
        adj,
        colors,
        slot_color,
        order: [0; MAX_MOTIF_NODES],
        best: None,
        hits: 0,
    };
    search.run(0, 0, 0);
    (search.best.expect("at least one ordering"), search.hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All permutations of `0..p` (test oracle).
    fn permutations(p: usize) -> Vec<Vec<usize>> {
        fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if cur.len() == used.len() {
                out.push(cur.clone());
                return;
            }
            for v in 0..used.len() {
                if !used[v] {
                    used[v] = true;
                    cur.push(v);
                    go(cur, used, out);
                    cur.pop();
                    used[v] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(&mut Vec::new(), &mut vec![false; p], &mut out);
        out
    }

    fn permuted_mask(p: usize, mask: u32, perm: &[usize]) -> u32 {
        let mut out = 0;
        for b in 1..p {
            for a in 0..b {
                if mask >> pair_index(a, b) & 1 == 1 {
                    out |= 1 << pair_index(perm[a], perm[b]);
                }
            }
        }
        out
    }

    fn brute_aut(m: &Motif) -> u64 {
        let mask = m.mask();
        permutations(m.vertex_count())
            .iter()
            .filter(|perm| permuted_mask(m.vertex_count(), mask, perm) == mask)
            .count() as u64
    }

    #[test]
    fn triangle_relabeling_keeps_key() {
        let t = Motif::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let r = t.relabel(&[2, 0, 1]);
        assert_eq!(canonical_label(&t).unwrap(), canonical_label(&r).unwrap());
    }

    #[test]
    fn distinguishes_small_classes() {
        assert_ne!(Motif::path(4).canonical_key(), Motif::star(4).canonical_key());
        assert_ne!(Motif::path(3).canonical_key(), Motif::complete(3).canonical_key());
        assert_eq!(connected_motifs(3).unwrap().len(), 2);
        assert_eq!(connected_motifs(4).unwrap().len(), 6);
        assert_eq!(all_motifs(4).unwrap().len(), 11);
        assert_eq!(all_motifs(5).unwrap().len(), 34);
        assert_eq!(connected_motifs(5).unwrap().len(), 21);
    }

    #[test]
    fn labeled_copy_counts() {
        assert_eq!(labeled_copy_count(&Motif::k2()), 1);
        assert_eq!(labeled_copy_count(&Motif::two_star()), 3);
        assert_eq!(labeled_copy_count(&Motif::triangle()), 1);
        assert_eq!(Motif::path(4).labeled_copy_count(), 12);
        assert_eq!(Motif::star(4).labeled_copy_count(), 4);
        assert_eq!(Motif::cycle(4).labeled_copy_count(), 3);
    }

    #[test]
    fn automorphisms_match_full_enumeration() {
        for p in 2..=5 {
            for m in all_motifs(p).unwrap() {
                assert_eq!(m.automorphism_count(), brute_aut(&m), "{m}");
            }
        }
    }

    #[test]
    fn key_equality_iff_isomorphic_exhaustive_p4() {
        let p = 4;
        let perms = permutations(p);
        for m1 in 0..1u32 << pair_count(p) {
            let orbit: BTreeSet<u32> = perms.iter().map(|q| permuted_mask(p, m1, q)).collect();
            let k1 = canonical_key_of_mask(p, m1);
            for m2 in 0..1u32 << pair_count(p) {
                let same = canonical_key_of_mask(p, m2) == k1;
                assert_eq!(same, orbit.contains(&m2));
            }
        }
    }

    #[test]
    fn key_round_trips_through_mask() {
        for m in all_motifs(5).unwrap() {
            let again = Motif::from_mask(5, m.canonical_key().to_mask());
            assert_eq!(again.canonical_key(), m.canonical_key());
        }
        assert_eq!(Motif::k2().canonical_key().to_bytes(), [2, 1, 0, 0, 0]);
    }

    #[test]
    fn parse_literals() {
        let m = Motif::parse("2star: 3; 0-1,1-2").unwrap();
        assert_eq!(m.name(), Some("2star"));
        assert_eq!(m.canonical_key(), Motif::path(3).canonical_key());
        let e = Motif::parse("e2: 2;").unwrap();
        assert_eq!(e.edge_count(), 0);
        assert!(Motif::parse("x: 9; 0-1").is_err());
        assert!(Motif::parse("x: 3; 0-0").is_err());
        assert!(Motif::parse("x: 3; 0-1,1-0").is_err());
        assert!(Motif::parse("x: three; 0-1").is_err());
        let round = Motif::parse(&m.literal()).unwrap();
        assert_eq!(round, m);
    }

    #[test]
    fn size_range_enforced() {
        assert!(matches!(Motif::new(1, &[]), Err(Error::UnsupportedMotifSize(1))));
        assert!(matches!(Motif::new(9, &[]), Err(Error::UnsupportedMotifSize(9))));
        assert!(Motif::new(8, &[(0, 7)]).is_ok());
    }

    #[test]
    fn connectivity() {
        assert!(Motif::path(5).is_connected());
        assert!(!Motif::new(4, &[(0, 1), (2, 3)]).unwrap().is_connected());
        assert!(!Motif::empty(2).is_connected());
    }
}
