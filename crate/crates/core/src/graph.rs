//! Undirected graphs on dense bitset adjacency, clique solvers, and
//! edge-list text I/O.
//!
//! The exact solver is a branch-and-bound with greedy-coloring upper bounds
//! over 64-bit word masks. Dense G(m, 1/2) instances around m = 200 solve in
//! milliseconds; the default vertex cap guards against accidental blowups.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Default vertex cap for the exact clique solver.
pub const EXACT_CLIQUE_CAP_DEFAULT: usize = 400;

/// Default subset budget for exhaustive clique counting.
pub const ENUMERATION_BUDGET_DEFAULT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    m: usize,
    words: usize,
    adj: Vec<u64>, // m rows of `words` words each
}

impl Graph {
    pub fn new(m: usize) -> Self {
        let words = m.div_ceil(64);
        Graph {
            m,
            words,
            adj: vec![0; m * words],
        }
    }

    pub fn complete(m: usize) -> Self {
        let mut g = Graph::new(m);
        for u in 0..m {
            for v in (u + 1)..m {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.m
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.m && v < self.m && u != v);
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    fn row(&self, u: usize) -> &[u64] {
        &self.adj[u * self.words..(u + 1) * self.words]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.m).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Write as "u v" pairs, one per line, 1-based, u < v.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for u in 0..self.m {
            for v in (u + 1)..self.m {
                if self.has_edge(u, v) {
                    writeln!(w, "{} {}", u + 1, v + 1)?;
                }
            }
        }
        Ok(())
    }

    /// Read an edge list ("u v" per line, 1-based). The vertex count is
    /// `m` if given, otherwise the largest index seen.
    pub fn read_edge_list<R: BufRead>(r: R, m: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_v = 0usize;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut it = t.split_whitespace();
            let parse = |s: Option<&str>| -> Result<usize> {
                s.and_then(|x| x.parse::<usize>().ok())
                    .filter(|&x| x >= 1)
                    .ok_or_else(|| {
                        Error::invalid(format!("edge list line {}: expected two 1-based indices", lineno + 1))
                    })
            };
            let u = parse(it.next())?;
            let v = parse(it.next())?;
            if u == v {
                return Err(Error::invalid(format!("edge list line {}: self loop", lineno + 1)));
            }
            max_v = max_v.max(u).max(v);
            edges.push((u - 1, v - 1));
        }
        let m = m.unwrap_or(max_v);
        if max_v > m {
            return Err(Error::invalid(format!(
                "edge list references vertex {max_v} but m = {m}"
            )));
        }
        let mut g = Graph::new(m);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        Ok(g)
    }
}

// ---------------------------------------------------------------------------
// bitset scratch helpers
// ---------------------------------------------------------------------------

#[inline]
fn mask_and(dst: &mut [u64], a: &[u64], b: &[u64]) {
    for ((d, x), y) in dst.iter_mut().zip(a).zip(b) {
        *d = x & y;
    }
}

#[inline]
fn mask_is_empty(a: &[u64]) -> bool {
    a.iter().all(|&w| w == 0)
}

#[inline]
fn mask_count(a: &[u64]) -> usize {
    a.iter().map(|w| w.count_ones() as usize).sum()
}

#[inline]
fn mask_clear(a: &mut [u64], v: usize) {
    a[v / 64] &= !(1 << (v % 64));
}

#[inline]
fn mask_set(a: &mut [u64], v: usize) {
    a[v / 64] |= 1 << (v % 64);
}

#[inline]
fn mask_test(a: &[u64], v: usize) -> bool {
    a[v / 64] >> (v % 64) & 1 == 1
}

fn mask_iter(a: &[u64]) -> impl Iterator<Item = usize> + '_ {
    a.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            }
        })
    })
}

#[inline]
fn mask_first(a: &[u64]) -> Option<usize> {
    a.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(wi, &w)| wi * 64 + w.trailing_zeros() as usize)
}

// ---------------------------------------------------------------------------
// exact max clique: branch and bound with greedy coloring bounds
// ---------------------------------------------------------------------------

struct Bnb<'g> {
    g: &'g Graph,
    words: usize,
    best: usize,
    current: Vec<usize>,
    /// Stop as soon as a clique of this size is found (existence queries).
    target: Option<usize>,
    satisfied: bool,
}

impl<'g> Bnb<'g> {
    fn new(g: &'g Graph, seed_size: usize, target: Option<usize>) -> Self {
        Bnb {
            g,
            words: g.words,
            best: seed_size,
            current: Vec::new(),
            target,
            satisfied: false,
        }
    }

    /// Greedy coloring of the candidate set; returns vertices ordered by
    /// color class with their color numbers (1-based), ascending.
    fn color_sort(&self, cand: &[u64]) -> Vec<(usize, usize)> {
        let mut uncolored = cand.to_vec();
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(mask_count(cand));
        let mut color = 0;
        let mut class = vec![0u64; self.words];
        while !mask_is_empty(&uncolored) {
            color += 1;
            class.copy_from_slice(&uncolored);
            while let Some(v) = mask_first(&class) {
                out.push((v, color));
                mask_clear(&mut uncolored, v);
                mask_clear(&mut class, v);
                // remove neighbors of v from this color class
                let row = self.g.row(v);
                for (c, r) in class.iter_mut().zip(row) {
                    *c &= !r;
                }
            }
        }
        out
    }

    fn expand(&mut self, cand: &mut [u64]) {
        if self.satisfied {
            return;
        }
        let order = self.color_sort(cand);
        let mut next = vec![0u64; self.words];
        for &(v, color) in order.iter().rev() {
            if self.current.len() + color <= self.best {
                return; // color bound: nothing left here can beat best
            }
            self.current.push(v);
            mask_and(&mut next, cand, self.g.row(v));
            if mask_is_empty(&next) {
                if self.current.len() > self.best {
                    self.best = self.current.len();
                    if let Some(t) = self.target {
                        if self.best >= t {
                            self.satisfied = true;
                            self.current.pop();
                            return;
                        }
                    }
                }
            } else {
                let mut next_owned = next.clone();
                self.expand(&mut next_owned[..]);
                if self.satisfied {
                    self.current.pop();
                    return;
                }
            }
            self.current.pop();
            mask_clear(cand, v);
        }
    }
}

fn full_mask(g: &Graph) -> Vec<u64> {
    let mut m = vec![0u64; g.words];
    for v in 0..g.m {
        mask_set(&mut m, v);
    }
    m
}

/// Size of the largest clique (no certificate tie-breaking).
pub fn clique_number_capped(g: &Graph, cap: usize) -> Result<usize> {
    if g.m > cap {
        return Err(Error::CliqueSizeCap { cap, got: g.m });
    }
    if g.m == 0 {
        return Ok(0);
    }
    let mut bnb = Bnb::new(g, 0, None);
    let mut cand = full_mask(g);
    bnb.expand(&mut cand);
    Ok(bnb.best)
}

pub fn clique_number(g: &Graph) -> Result<usize> {
    clique_number_capped(g, EXACT_CLIQUE_CAP_DEFAULT)
}

/// True iff the subgraph induced by `within` contains a clique of >= t
/// vertices.
fn has_clique_within(g: &Graph, within: &[u64], t: usize) -> bool {
    if t == 0 {
        return true;
    }
    if mask_count(within) < t {
        return false;
    }
    let mut bnb = Bnb::new(g, t - 1, Some(t));
    let mut cand = within.to_vec();
    bnb.expand(&mut cand);
    bnb.satisfied
}

/// A maximum clique; among maximum cliques, the lexicographically smallest
/// vertex sequence. Deterministic.
pub fn max_clique_exact_capped(g: &Graph, cap: usize) -> Result<Vec<usize>> {
    let k = clique_number_capped(g, cap)?;
    // Lexicographic construction: fix the smallest feasible vertex at each
    // position, restricting candidates to larger-labelled neighbors.
    let mut fixed: Vec<usize> = Vec::with_capacity(k);
    let mut cand = full_mask(g);
    while fixed.len() < k {
        let need = k - fixed.len();
        let mut chosen = None;
        for v in mask_iter(&cand).collect::<Vec<_>>() {
            // candidates after picking v: neighbors of v with larger labels
            let mut next = vec![0u64; g.words];
            mask_and(&mut next, &cand, g.row(v));
            for u in 0..=v {
                if mask_test(&next, u) {
                    mask_clear(&mut next, u);
                }
            }
            if has_clique_within(g, &next, need - 1) {
                chosen = Some((v, next));
                break;
            }
        }
        let (v, next) = chosen.expect("a maximum clique must exist");
        fixed.push(v);
        cand = next;
    }
    Ok(fixed)
}

pub fn max_clique_exact(g: &Graph) -> Result<Vec<usize>> {
    max_clique_exact_capped(g, EXACT_CLIQUE_CAP_DEFAULT)
}

/// Seeded randomized greedy: scan vertices in a shuffled order, keep every
/// vertex compatible with the clique so far; best of `restarts` rounds.
/// Returns a maximal clique (never larger than the exact clique number).
pub fn max_clique_greedy(g: &Graph, restarts: usize, seed: u64) -> Vec<usize> {
    if g.m == 0 {
        return Vec::new();
    }
    let mut rng = SplitMix64::new(seed);
    let mut order: Vec<usize> = (0..g.m).collect();
    let mut best: Vec<usize> = Vec::new();
    for _ in 0..restarts.max(1) {
        rng.shuffle(&mut order);
        let mut clique: Vec<usize> = Vec::new();
        let mut cand = full_mask(g);
        for &v in &order {
            if mask_test(&cand, v) {
                clique.push(v);
                let mut next = vec![0u64; g.words];
                mask_and(&mut next, &cand, g.row(v));
                cand = next;
            }
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best.sort_unstable();
    best
}

/// Exact number of s-cliques, by masked recursion over ascending vertices.
/// Errors if C(m, s) exceeds the budget.
pub fn count_cliques_exhaustive(g: &Graph, s: usize, budget: u64) -> Result<u64> {
    let ln_count = crate::numeric::ln_choose(g.m as u64, s as u64);
    if ln_count > (budget as f64).ln() {
        return Err(Error::EnumerationBudget {
            m: g.m,
            s,
            ln_count,
            budget,
        });
    }
    if s == 0 {
        return Ok(1);
    }
    if s > g.m {
        return Ok(0);
    }
    fn rec(g: &Graph, common: &[u64], lowest: usize, depth: usize) -> u64 {
        if depth == 0 {
            return 1;
        }
        let mut total = 0;
        for v in mask_iter(common).collect::<Vec<_>>() {
            if v < lowest {
                continue;
            }
            if depth == 1 {
                total += 1;
                continue;
            }
            let mut next = vec![0u64; common.len()];
            mask_and(&mut next, common, g.row(v));
            total += rec(g, &next, v + 1, depth - 1);
        }
        total
    }
    Ok(rec(g, &full_mask(g), 0, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(m: usize) -> Graph {
        let mut g = Graph::new(m);
        for v in 1..m {
            g.add_edge(v - 1, v);
        }
        g
    }

    #[test]
    fn complete_graph_clique_is_everything() {
        let g = Graph::complete(7);
        assert_eq!(max_clique_exact(&g).unwrap(), vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(max_clique_greedy(&g, 1, 0), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn edgeless_graph() {
        let g = Graph::new(5);
        assert_eq!(clique_number(&g).unwrap(), 1);
        assert_eq!(max_clique_exact(&g).unwrap(), vec![0]);
        assert_eq!(max_clique_greedy(&g, 3, 1).len(), 1);
        assert_eq!(count_cliques_exhaustive(&g, 2, 1000).unwrap(), 0);
    }

    #[test]
    fn lexicographic_tie_break() {
        // Two maximum cliques {1,2} and {0,3} (0-based {0,3} vs {1,2}):
        // smallest sorted sequence wins.
        let mut g = Graph::new(4);
        g.add_edge(1, 2);
        g.add_edge(0, 3);
        assert_eq!(max_clique_exact(&g).unwrap(), vec![0, 3]);

        // Three-vertex path: ties {0,1} vs {1,2} resolve to {0,1}.
        let mut g = Graph::new(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        assert_eq!(max_clique_exact(&g).unwrap(), vec![0, 1]);
    }

    #[test]
    fn exact_matches_brute_force_on_small_random_graphs() {
        // Oracle: enumerate all subsets of a 12-vertex graph.
        for seed in 0..20u64 {
            let spec = crate::random_graph::GnpSpec {
                m: 12,
                p: 0.5,
                seed,
            };
            let g = crate::random_graph::gen_gnp(&spec).unwrap();
            let mut best = 1usize;
            for mask in 1u32..(1 << 12) {
                let verts: Vec<usize> = (0..12).filter(|&v| mask >> v & 1 == 1).collect();
                let is_clique = verts
                    .iter()
                    .enumerate()
                    .all(|(a, &u)| verts[a + 1..].iter().all(|&v| g.has_edge(u, v)));
                if is_clique {
                    best = best.max(verts.len());
                }
            }
            assert_eq!(clique_number(&g).unwrap(), best, "seed {seed}");
            // greedy never exceeds exact
            let greedy = max_clique_greedy(&g, 5, seed);
            assert!(greedy.len() <= best);
            // greedy output is a clique
            for (a, &u) in greedy.iter().enumerate() {
                for &v in &greedy[a + 1..] {
                    assert!(g.has_edge(u, v));
                }
            }
        }
    }

    #[test]
    fn exact_certificate_is_a_maximum_clique() {
        for seed in 100..110u64 {
            let g = crate::random_graph::gen_gnp(&crate::random_graph::GnpSpec {
                m: 60,
                p: 0.5,
                seed,
            })
            .unwrap();
            let k = clique_number(&g).unwrap();
            let c = max_clique_exact(&g).unwrap();
            assert_eq!(c.len(), k);
            for (a, &u) in c.iter().enumerate() {
                for &v in &c[a + 1..] {
                    assert!(g.has_edge(u, v));
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::new(500);
        match max_clique_exact(&g) {
            Err(Error::CliqueSizeCap { cap, got }) => {
                assert_eq!((cap, got), (EXACT_CLIQUE_CAP_DEFAULT, 500));
            }
            other => panic!("expected size-cap error, got {other:?}"),
        }
        assert!(max_clique_exact_capped(&g, 512).is_ok());
    }

    #[test]
    fn counting_matches_closed_forms() {
        let g = Graph::complete(8);
        assert_eq!(count_cliques_exhaustive(&g, 3, 1 << 20).unwrap(), 56); // C(8,3)
        assert_eq!(count_cliques_exhaustive(&g, 0, 1 << 20).unwrap(), 1);

        // triangle plus isolated vertex
        let mut g = Graph::new(4);
        g.add_edge(0, 1);
        g.add_edge(0, 2);
        g.add_edge(1, 2);
        assert_eq!(count_cliques_exhaustive(&g, 3, 1 << 20).unwrap(), 1);

        // path graph has no triangles, m-1 edges
        let g = path_graph(6);
        assert_eq!(count_cliques_exhaustive(&g, 2, 1 << 20).unwrap(), 5);
        assert_eq!(count_cliques_exhaustive(&g, 3, 1 << 20).unwrap(), 0);

        // budget error
        let g = Graph::new(100);
        assert!(count_cliques_exhaustive(&g, 50, 1000).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = crate::random_graph::gen_gnp(&crate::random_graph::GnpSpec {
            m: 20,
            p: 0.3,
            seed: 5,
        })
        .unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = Graph::read_edge_list(buf.as_slice(), Some(20)).unwrap();
        assert_eq!(g, back);
    }
}
