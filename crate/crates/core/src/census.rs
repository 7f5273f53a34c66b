//! Exact induced-subgraph counting and motif densities.
//!
//! Counts are numbers of vertex *subsets* whose induced subgraph is
//! isomorphic to the motif; ordered-tuple counts are that value times `p!`.
//!
//! * `p <= 3`: closed forms from edge, wedge and triangle totals.
//! * `p >= 4`: ordered embeddings `(v_1, .., v_p)` with `G(v) = R` exactly
//!   are counted by a depth-first search whose candidate sets are bitset
//!   intersections of adjacency rows (or their complements), then divided by
//!   `|Aut(R)|`.
//! * [`census`] enumerates all connected `p`-subsets with ESU and classifies
//!   them by canonical key.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::{canonical_key_of_mask, pair_index, CanonicalKey, Motif};
use crate::util::{binom_f64, binom_u128, factorial};

/// Density of one motif in one graph.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    #[serde(serialize_with = "serialize_motif")]
    pub motif: Motif,
    /// `P_R(G)`: ordered matches over `C(n,p) p! N(R)`.
    pub raw_density: f64,
    /// `P_R(G) / rho_hat^|E(R)|`; `None` when the graph has no edges.
    pub normalized_density: Option<f64>,
    pub edge_density: f64,
    pub subset_count: u64,
    pub ordered_match_count: u128,
}

pub(crate) fn serialize_motif<S: serde::Serializer>(m: &Motif, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.literal())
}

/// Edge, wedge and triangle totals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallCounts {
    pub nodes: u64,
    pub edges: u64,
    /// `sum_v C(deg v, 2)`: paths of length two, counted by center.
    pub wedges: u64,
    pub triangles: u64,
}

impl SmallCounts {
    pub fn of(graph: &Graph) -> SmallCounts {
        let n = graph.node_count();
        let (deg2, tri3): (u64, u64) = (0..n)
            .into_par_iter()
            .map(|u| {
                let d = graph.degree(u) as u64;
                let t: u64 = graph
                    .neighbors(u)
                    .filter(|&v| v > u)
                    .map(|v| graph.common_neighbors(u, v) as u64)
                    .sum();
                (d * d.saturating_sub(1) / 2, t)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        SmallCounts {
            nodes: n as u64,
            edges: graph.edge_count() as u64,
            wedges: deg2,
            triangles: tri3 / 3,
        }
    }

    /// Number of triples spanning exactly `e` edges (`e` in `0..=3`).
    pub fn triples_with_edges(&self, e: usize) -> u64 {
        let t3 = self.triangles;
        let t2 = self.wedges - 3 * t3;
        // Each edge lies in n-2 triples: t1 + 2 t2 + 3 t3 = E (n - 2).
        let t1 = self.edges * self.nodes.saturating_sub(2) - 2 * t2 - 3 * t3;
        match e {
            3 => t3,
            2 => t2,
            1 => t1,
            0 => binom_u128(self.nodes, 3) as u64 - t1 - t2 - t3,
            _ => 0,
        }
    }
}

/// Number of `p`-subsets of `graph` inducing a copy of `motif`.
pub fn count_induced_copies(graph: &Graph, motif: &Motif) -> Result<u64> {
    let n = graph.node_count();
    let p = motif.vertex_count();
    if p > n {
        return Err(Error::MotifTooLarge { motif: p, graph: n });
    }
    match p {
        2 => {
            let e = graph.edge_count() as u64;
            Ok(if motif.edge_count() == 1 { e } else { binom_u128(n as u64, 2) as u64 - e })
        }
        3 => Ok(SmallCounts::of(graph).triples_with_edges(motif.edge_count())),
        _ => {
            guard_embedding_work(graph, motif)?;
            let ordered = count_embeddings(graph, motif);
            Ok((ordered / u128::from(motif.automorphism_count())) as u64)
        }
    }
}

/// Ordered tuples of distinct nodes matching `motif` exactly.
pub fn ordered_match_count(graph: &Graph, motif: &Motif) -> Result<u128> {
    Ok(u128::from(count_induced_copies(graph, motif)?) * u128::from(factorial(motif.vertex_count())))
}

/// `P_R(G)` from a subset count.
pub fn density_from_count(n: usize, motif: &Motif, subsets: u64) -> f64 {
    subsets as f64 / (binom_f64(n, motif.vertex_count()) * motif.labeled_copy_count() as f64)
}

/// Raw, normalized and edge densities of `motif` in `graph`.
pub fn motif_density(graph: &Graph, motif: &Motif) -> Result<DensityReport> {
    let subsets = count_induced_copies(graph, motif)?;
    let raw = density_from_count(graph.node_count(), motif, subsets);
    let rho = graph.edge_density();
    let normalized = (rho > 0.0).then(|| raw / rho.powi(motif.edge_count() as i32));
    Ok(DensityReport {
        motif: motif.clone(),
        raw_density: raw,
        normalized_density: normalized,
        edge_density: rho,
        subset_count: subsets,
        ordered_match_count: u128::from(subsets) * u128::from(factorial(motif.vertex_count())),
    })
}

/// Raw densities for several motifs sharing one pass of the small counts.
pub fn raw_densities(graph: &Graph, motifs: &[Motif]) -> Result<Vec<f64>> {
    let n = graph.node_count();
    let small = if motifs.iter().any(|m| m.vertex_count() == 3) {
        Some(SmallCounts::of(graph))
    } else {
        None
    };
    motifs
        .iter()
        .map(|m| {
            let count = match (m.vertex_count(), &small) {
                (3, Some(s)) if n >= 3 => s.triples_with_edges(m.edge_count()),
                _ => count_induced_copies(graph, m)?,
            };
            Ok(density_from_count(n, m, count))
        })
        .collect()
}

const EMBEDDING_WORK_LIMIT: f64 = 2.0e10;

fn guard_embedding_work(graph: &Graph, motif: &Motif) -> Result<()> {
    let n = graph.node_count() as f64;
    let reach = (2.0 * graph.edge_count() as f64 / n.max(1.0)) + 1.0;
    let order = embedding_order(motif);
    let mut work = 1.0;
    for (t, &a) in order.iter().enumerate() {
        let anchored = order[..t].iter().any(|&b| motif.has_edge(a, b));
        work *= if anchored { reach } else { n };
    }
    if work > EMBEDDING_WORK_LIMIT {
        return Err(Error::CensusTooLarge(format!(
            "counting {} on {} nodes needs ~{work:.1e} steps",
            motif.label(),
            graph.node_count()
        )));
    }
    Ok(())
}

/// Motif vertices ordered so that each vertex has as many earlier
/// neighbors as possible (connected motifs get a connected order).
fn embedding_order(motif: &Motif) -> Vec<usize> {
    let p = motif.vertex_count();
    let mut order = Vec::with_capacity(p);
    let mut placed = 0u8;
    while order.len() < p {
        let next = (0..p)
            .filter(|&a| placed >> a & 1 == 0)
            .max_by_key(|&a| {
                let back = (motif.neighbors_mask(a) & placed).count_ones();
                (back, motif.degree(a), usize::MAX - a)
            })
            .expect("unplaced vertex");
        placed |= 1 << next;
        order.push(next);
    }
    order
}

struct Embedder<'a> {
    graph: &'a Graph,
    p: usize,
    words: usize,
    /// relation[d][t]: does order[d] connect to order[t]?
    relation: Vec<Vec<bool>>,
    /// cand[d * p + t] is the candidate bitset for position t after placing
    /// positions 0..d.
    cand: Vec<Vec<u64>>,
}

impl Embedder<'_> {
    fn count_from(&mut self, depth: usize) -> u128 {
        let words = self.words;
        if depth == self.p - 1 {
            let row = &self.cand[depth * self.p + depth];
            return row.iter().map(|w| u128::from(w.count_ones())).sum();
        }
        let mut total = 0u128;
        let choices = self.cand[depth * self.p + depth].clone();
        for (wi, &word) in choices.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let v = wi * 64 + w.trailing_zeros() as usize;
                w &= w - 1;
                let row = self.graph.row(v);
                let mut empty = false;
                for t in (depth + 1)..self.p {
                    let (src, dst) = (depth * self.p + t, (depth + 1) * self.p + t);
                    let edge = self.relation[depth][t];
                    let mut any = 0u64;
                    for k in 0..words {
                        let r = if edge { row[k] } else { !row[k] };
                        let val = self.cand[src][k] & r;
                        self.cand[dst][k] = val;
                        any |= val;
                    }
                    self.cand[dst][v / 64] &= !(1u64 << (v % 64));
                    if any == 0 {
                        empty = true;
                        break;
                    }
                }
                if !empty {
                    total += self.count_from(depth + 1);
                }
            }
        }
        total
    }
}

/// Ordered embeddings of `motif` (distinct nodes, exact induced match).
fn count_embeddings(graph: &Graph, motif: &Motif) -> u128 {
    let n = graph.node_count();
    let p = motif.vertex_count();
    let words = graph.row_words();
    let order = embedding_order(motif);
    let relation: Vec<Vec<bool>> = (0..p)
        .map(|d| (0..p).map(|t| motif.has_edge(order[d], order[t])).collect())
        .collect();
    let mut full = vec![u64::MAX; words];
    if n % 64 != 0 {
        full[words - 1] = (1u64 << (n % 64)) - 1;
    }
    if n == 0 {
        full = vec![0; words];
    }
    (0..n)
        .into_par_iter()
        .map_init(
            || Embedder {
                graph,
                p,
                words,
                relation: relation.clone(),
                cand: vec![vec![0u64; words]; p * p],
            },
            |emb, v0| {
                let row = graph.row(v0);
                for t in 1..p {
                    let edge = emb.relation[0][t];
                    let dst = p + t;
                    for k in 0..words {
                        let r = if edge { row[k] } else { !row[k] };
                        emb.cand[dst][k] = full[k] & r;
                    }
                    emb.cand[dst][v0 / 64] &= !(1u64 << (v0 % 64));
                }
                emb.count_from(1)
            },
        )
        .sum()
}

/// Census of all connected induced subgraphs on `p` nodes, via ESU.
/// Returns `(class representative, subset count)` sorted by canonical key.
pub fn census(graph: &Graph, p: usize) -> Result<Vec<(Motif, u64)>> {
    if !(2..=8).contains(&p) {
        return Err(Error::UnsupportedMotifSize(p));
    }
    let n = graph.node_count();
    if p > n {
        return Err(Error::MotifTooLarge { motif: p, graph: n });
    }
    let words = graph.row_words();
    let counts = (0..n)
        .into_par_iter()
        .fold(
            || (HashMap::<u32, CanonicalKey>::new(), HashMap::<CanonicalKey, u64>::new()),
            |(mut memo, mut counts), root| {
                let mut above = vec![0u64; words];
                for v in (root + 1)..n {
                    above[v / 64] |= 1 << (v % 64);
                }
                let mut ext: Vec<u64> = graph.row(root).iter().zip(&above).map(|(a, b)| a & b).collect();
                let mut closed: Vec<u64> = graph.row(root).to_vec();
                closed[root / 64] |= 1 << (root % 64);
                let mut esu = Esu {
                    graph,
                    p,
                    above: &above,
                    memo: &mut memo,
                    counts: &mut counts,
                    sub: vec![root],
                };
                esu.extend(&mut ext, &closed);
                (memo, counts)
            },
        )
        .map(|(_, c)| c)
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let sorted: BTreeMap<CanonicalKey, u64> = counts.into_iter().collect();
    Ok(sorted.into_iter().map(|(k, c)| (Motif::from_key(k), c)).collect())
}

struct Esu<'a> {
    graph: &'a Graph,
    p: usize,
    above: &'a [u64],
    memo: &'a mut HashMap<u32, CanonicalKey>,
    counts: &'a mut HashMap<CanonicalKey, u64>,
    sub: Vec<usize>,
}

impl Esu<'_> {
    fn extend(&mut self, ext: &mut [u64], closed: &[u64]) {
        if self.sub.len() == self.p {
            let mut mask = 0u32;
            for b in 1..self.p {
                for a in 0..b {
                    if self.graph.has_edge(self.sub[a], self.sub[b]) {
                        mask |= 1 << pair_index(a, b);
                    }
                }
            }
            let p = self.p;
            let key = *self.memo.entry(mask).or_insert_with(|| canonical_key_of_mask(p, mask));
            *self.counts.entry(key).or_insert(0) += 1;
            return;
        }
        loop {
            let Some(wi) = ext.iter().position(|&x| x != 0) else { break };
            let w = wi * 64 + ext[wi].trailing_zeros() as usize;
            ext[wi] &= ext[wi] - 1;
            let row = self.graph.row(w);
            let mut next_ext: Vec<u64> = ext
                .iter()
                .zip(row)
                .zip(closed)
                .zip(self.above)
                .map(|(((e, r), c), a)| e | (r & !c & a))
                .collect();
            let mut next_closed: Vec<u64> = closed.iter().zip(row).map(|(c, r)| c | r).collect();
            next_closed[w / 64] |= 1 << (w % 64);
            self.sub.push(w);
            self.extend(&mut next_ext, &next_closed);
            self.sub.pop();
        }
    }
}
