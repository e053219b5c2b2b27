//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use rand::Rng;
use surfdyn::canon::{adjust, condense, CollapseChoices, CondensedGraph};
use surfdyn::document::{GraphDocument, Loaded};
use surfdyn::nielsen::RelationSet;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every input graph of the corpus, by file stem; frozen outputs are skipped.
pub fn corpus() -> Vec<(String, GraphDocument)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(corpus_dir()).expect("corpus directory") {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if !name.ends_with(".json") || name.ends_with(".expected.json") {
            continue;
        }
        let doc = GraphDocument::parse(&fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        out.push((name.trim_end_matches(".json").to_string(), doc));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn condensed(doc: &GraphDocument) -> CondensedGraph {
    match doc.load().unwrap() {
        Loaded::Input(g) => condense(&adjust(&g, &CollapseChoices::default()).unwrap()).unwrap(),
        Loaded::Adjusted(a) => condense(&a).unwrap(),
        Loaded::Condensed(c) => c,
    }
}

/// `|det(Aⁿ - I)| = |1 - tr(Aⁿ) + det(A)ⁿ|` with traces from `tₙ = t₁tₙ₋₁ - d·tₙ₋₂`.
pub fn periodic_count_oracle(m: [[i64; 2]; 2], n: u32) -> u64 {
    let t1 = i128::from(m[0][0] + m[1][1]);
    let d = i128::from(m[0][0] * m[1][1] - m[0][1] * m[1][0]);
    let (mut prev, mut cur) = (2i128, t1);
    for _ in 1..n {
        let next = t1 * cur - d * prev;
        prev = cur;
        cur = next;
    }
    (1 - cur + d.pow(n)).unsigned_abs() as u64
}

/// Random consistent generator set on at most `max_nodes` nodes.
pub fn random_relations<R: Rng>(rng: &mut R, max_nodes: u32) -> RelationSet {
    const PERIODS: [u64; 6] = [1, 2, 3, 4, 6, 12];
    let n = rng.gen_range(1..=max_nodes);
    let mut rels = RelationSet::new();
    for id in 0..n {
        rels.add_node(id, PERIODS[rng.gen_range(0..PERIODS.len())]);
    }
    let edges = rng.gen_range(0..=2 * n);
    for _ in 0..edges {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (pa, pb) = (rels.periods[&a], rels.periods[&b]);
        if pa == pb {
            rels.add_pn(a, b);
        } else if pa > pb && pa % pb == 0 {
            rels.add_collapse(a, b);
        }
    }
    rels
}

pub type Edges = BTreeSet<(u32, u32)>;

/// Iterates the four closure rules until nothing changes; returns `(pn, ⊢)`.
pub fn naive_closure(rels: &RelationSet) -> (Edges, Edges) {
    let nodes: Vec<u32> = rels.periods.keys().copied().collect();
    let mut pn: BTreeSet<(u32, u32)> = nodes.iter().map(|&a| (a, a)).collect();
    for &(a, b) in &rels.pn {
        pn.insert((a, b));
        pn.insert((b, a));
    }
    let mut col: BTreeSet<(u32, u32)> = rels.collapse.keys().copied().collect();
    loop {
        let before = (pn.len(), col.len());
        for &a in &nodes {
            for &b in &nodes {
                for &c in &nodes {
                    if pn.contains(&(a, b)) && pn.contains(&(b, c)) {
                        pn.insert((a, c));
                    }
                    if pn.contains(&(a, b)) && col.contains(&(b, c)) {
                        col.insert((a, c));
                    }
                    if col.contains(&(a, b)) && (pn.contains(&(b, c)) || col.contains(&(b, c))) {
                        col.insert((a, c));
                    }
                }
            }
        }
        if (pn.len(), col.len()) == before {
            break;
        }
    }
    let pn = pn.into_iter().filter(|&(a, b)| a < b).collect();
    (pn, col)
}
