//! Periodic Nielsen relations between orbits.
//!
//! Two relations live on the orbit records of an inventory: `pn`, periodic
//! Nielsen equivalence between orbits of equal period, and `⊢`, the collapse
//! of an orbit onto one of smaller period. The generators come from the
//! structure of the graph; [`close_relations`] closes them under
//!
//! * `pn` is an equivalence relation,
//! * `x pn y` and `y ⊢ z` imply `x ⊢ z`,
//! * `x ⊢ y` and `y pn z` imply `x ⊢ z`,
//! * `x ⊢ y` and `y ⊢ z` imply `x ⊢ z`.
//!
//! Classes are the `pn` classes. A class is collapsible when a member collapses,
//! essential when its index is nonzero, and persistent (equivalently,
//! unremovable) when it is uncollapsible and essential. Periodic and strong
//! Nielsen classes coincide on everything computed here, so one flag serves both.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::annulus::classify_annulus;
use crate::canon::{
    AdjustedGraph, AnnulusInterior, Carrier, Census, CondensedGraph, IndexValue, Inventory, OrbitKind, OrbitRecord,
};
use crate::error::{Error, Result};
use crate::graph::{ComponentData, ComponentGraph};

/// Nodes with periods, `pn` edges and `⊢` edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelationSet {
    pub periods: BTreeMap<u32, u64>,
    /// Unordered pairs, stored with the smaller id first.
    pub pn: BTreeSet<(u32, u32)>,
    /// `(x, y)` for `x ⊢ y`, with the multiplier `period(x) / period(y)`.
    #[serde(serialize_with = "collapse_edges")]
    pub collapse: BTreeMap<(u32, u32), u64>,
}

fn collapse_edges<S: serde::Serializer>(edges: &BTreeMap<(u32, u32), u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Edge {
        from: u32,
        to: u32,
        multiplier: u64,
    }
    s.collect_seq(edges.iter().map(|(&(from, to), &multiplier)| Edge { from, to, multiplier }))
}

impl RelationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: u32, period: u64) -> &mut Self {
        self.periods.insert(id, period);
        self
    }

    pub fn add_pn(&mut self, a: u32, b: u32) -> &mut Self {
        if a != b {
            self.pn.insert((a.min(b), a.max(b)));
        }
        self
    }

    /// Records `x ⊢ y`; the multiplier is filled in from the periods.
    pub fn add_collapse(&mut self, x: u32, y: u32) -> &mut Self {
        let m = match (self.periods.get(&x), self.periods.get(&y)) {
            (Some(&px), Some(&py)) if py > 0 => px / py,
            _ => 0,
        };
        self.collapse.insert((x, y), m);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.pn.is_empty() && self.collapse.is_empty()
    }

    pub fn collapses_from(&self, x: u32) -> bool {
        self.collapse.keys().any(|&(a, _)| a == x)
    }

    fn period(&self, id: u32) -> Result<u64> {
        self.periods.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    fn check(&self) -> Result<()> {
        for &(a, b) in &self.pn {
            let (pa, pb) = (self.period(a)?, self.period(b)?);
            if pa != pb {
                return Err(Error::RelationPeriods { a, b, pa, pb });
            }
        }
        for &(a, b) in self.collapse.keys() {
            let (pa, pb) = (self.period(a)?, self.period(b)?);
            if pb == 0 || pa <= pb || pa % pb != 0 {
                return Err(Error::RelationPeriods { a, b, pa, pb });
            }
        }
        Ok(())
    }
}

fn find(parent: &mut BTreeMap<u32, u32>, x: u32) -> u32 {
    let p = parent[&x];
    if p == x {
        return x;
    }
    let r = find(parent, p);
    parent.insert(x, r);
    r
}

/// Least relation set containing `rels` and closed under the four rules.
pub fn close_relations(rels: &RelationSet) -> Result<RelationSet> {
    rels.check()?;
    let mut parent: BTreeMap<u32, u32> = rels.periods.keys().map(|&k| (k, k)).collect();
    for &(a, b) in &rels.pn {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent.insert(ra.max(rb), ra.min(rb));
        }
    }
    let nodes: Vec<u32> = rels.periods.keys().copied().collect();
    let mut classes: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &n in &nodes {
        let r = find(&mut parent, n);
        classes.entry(r).or_default().push(n);
    }
    let roots: Vec<u32> = classes.keys().copied().collect();
    let pos: BTreeMap<u32, usize> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let n = roots.len();
    let mut reach = vec![vec![false; n]; n];
    for &(x, y) in rels.collapse.keys() {
        let (cx, cy) = (pos[&find(&mut parent, x)], pos[&find(&mut parent, y)]);
        reach[cx][cy] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = RelationSet {
        periods: rels.periods.clone(),
        ..RelationSet::default()
    };
    for members in classes.values() {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                out.add_pn(a, b);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !reach[i][j] {
                continue;
            }
            for &x in &classes[&roots[i]] {
                for &y in &classes[&roots[j]] {
                    out.add_collapse(x, y);
                }
            }
        }
    }
    out.check()?;
    Ok(out)
}

/// Either stage of the rewrite pipeline.
#[derive(Clone, Copy, Debug)]
pub enum Stage<'a> {
    Adjusted(&'a AdjustedGraph),
    Condensed(&'a CondensedGraph),
}

impl<'a> From<&'a AdjustedGraph> for Stage<'a> {
    fn from(g: &'a AdjustedGraph) -> Self {
        Self::Adjusted(g)
    }
}

impl<'a> From<&'a CondensedGraph> for Stage<'a> {
    fn from(g: &'a CondensedGraph) -> Self {
        Self::Condensed(g)
    }
}

impl Stage<'_> {
    pub fn graph(&self) -> &ComponentGraph {
        match self {
            Self::Adjusted(a) => &a.graph,
            Self::Condensed(c) => &c.graph,
        }
    }

    fn interiors(&self) -> &BTreeMap<crate::graph::AnnulusId, AnnulusInterior> {
        match self {
            Self::Adjusted(a) => &a.interiors,
            Self::Condensed(c) => &c.interiors,
        }
    }

    pub fn inventory(&self, max_period: u64, census: Option<&Census>) -> Result<Inventory> {
        match self {
            Self::Adjusted(a) => a.inventory(max_period, census),
            Self::Condensed(c) => Ok(c.inventory(max_period, census)),
        }
    }
}

/// Generator edges between the records of `inventory`.
fn generators(stage: Stage<'_>, inventory: &Inventory) -> Result<RelationSet> {
    let g = stage.graph();
    let orbits = g.orbits()?;
    let mut rels = RelationSet::new();
    for r in &inventory.records {
        rels.add_node(r.id, r.period);
    }
    let by_carrier = |kind: &[OrbitKind], carrier: Carrier| -> Vec<&OrbitRecord> {
        inventory
            .records
            .iter()
            .filter(|r| r.carrier == carrier && kind.contains(&r.kind))
            .collect()
    };
    let circle_rep = |c| orbits.circle_orbit(c).map_or(c, |o| o.representative());

    // inside a finite-order component: regular points are equivalent to each
    // other and collapse onto every branch orbit
    for orbit in &orbits.pieces {
        let rep = orbit.representative();
        if g.pieces[&rep].data.is_pseudo_anosov() {
            continue;
        }
        let interior = by_carrier(&[OrbitKind::FiniteOrderRegular], Carrier::Piece { piece: rep });
        let branches = by_carrier(&[OrbitKind::FiniteOrderBranch], Carrier::Piece { piece: rep });
        for co in &orbits.circles {
            let c = co.representative();
            if !orbit.members.contains(&g.circles[&c].owner) {
                continue;
            }
            for p in by_carrier(&[OrbitKind::FiniteOrderRegular], Carrier::Circle { circle: c }) {
                for i in &interior {
                    rels.add_pn(i.id, p.id);
                }
            }
        }
        for i in &interior {
            for b in &branches {
                rels.add_collapse(i.id, b.id);
            }
        }
    }

    // across untwisted annuli
    let sides = [OrbitKind::PeripheralPA, OrbitKind::FiniteOrderRegular];
    for ao in &orbits.annuli {
        let a = &g.annuli[&ao.representative()];
        let Ok(class) = classify_annulus(a) else { continue };
        if class.twisted {
            continue;
        }
        let s0 = by_carrier(&sides, Carrier::Circle { circle: circle_rep(a.sides[0]) });
        if class.flipped {
            if let Some(AnnulusInterior::TwoOrbits { .. }) = stage.interiors().get(&a.id) {
                for x in &s0 {
                    for y in by_carrier(&[OrbitKind::FlipAnnulusInterior], Carrier::Annulus { annulus: a.id, slot: 0 }) {
                        rels.add_collapse(x.id, y.id);
                    }
                }
            }
        } else {
            let s1 = by_carrier(&sides, Carrier::Circle { circle: circle_rep(a.sides[1]) });
            for x in &s0 {
                for y in &s1 {
                    rels.add_pn(x.id, y.id);
                }
            }
        }
    }
    Ok(rels)
}

/// Generator edges among orbits of period at most `max_period`.
pub fn base_relations<'a>(stage: impl Into<Stage<'a>>, max_period: u64) -> Result<RelationSet> {
    let stage = stage.into();
    let inventory = stage.inventory(max_period, None)?;
    generators(stage, &inventory)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NielsenClassRecord {
    pub id: u32,
    pub period: u64,
    pub members: Vec<u32>,
    pub kinds: Vec<OrbitKind>,
    pub collapsible: bool,
    pub index: IndexValue,
    /// `None` when the index is not determined.
    pub essential: Option<bool>,
    pub persistent: Option<bool>,
    pub unremovable: Option<bool>,
    /// Number of classes this record stands for (census entries).
    pub multiplicity: u64,
}

/// Index of a class: the sum of its members' indices when all are integers.
pub fn class_index(members: &[&OrbitRecord]) -> IndexValue {
    match members {
        [one] => one.index,
        _ => {
            let mut sum = 0;
            for m in members {
                match m.index {
                    IndexValue::Integer(i) => sum += i,
                    _ => return IndexValue::Undefined,
                }
            }
            IndexValue::Integer(sum)
        }
    }
}

pub fn collapsible(class: &NielsenClassRecord, rels: &RelationSet) -> bool {
    class.members.iter().any(|&m| rels.collapses_from(m))
}

pub fn essential(class: &NielsenClassRecord) -> Option<bool> {
    class.index.is_nonzero()
}

/// Everything the relation calculus says about one stage.
#[derive(Clone, Debug, Serialize)]
pub struct NielsenReport {
    pub inventory: Inventory,
    pub generators: RelationSet,
    pub closed: RelationSet,
    pub classes: Vec<NielsenClassRecord>,
}

pub fn analyze<'a>(stage: impl Into<Stage<'a>>, max_period: u64, census: Option<&Census>) -> Result<NielsenReport> {
    let stage = stage.into();
    let inventory = stage.inventory(max_period, census)?;
    let generators = generators(stage, &inventory)?;
    let closed = close_relations(&generators)?;
    let records: BTreeMap<u32, &OrbitRecord> = inventory.records.iter().map(|r| (r.id, r)).collect();

    let mut seen = BTreeSet::new();
    let mut classes = Vec::new();
    for r in &inventory.records {
        if seen.contains(&r.id) {
            continue;
        }
        let mut members: Vec<u32> = closed
            .pn
            .iter()
            .filter_map(|&(a, b)| if a == r.id { Some(b) } else if b == r.id { Some(a) } else { None })
            .collect();
        members.push(r.id);
        members.sort_unstable();
        seen.extend(members.iter().copied());
        let member_records: Vec<&OrbitRecord> = members.iter().map(|m| records[m]).collect();
        let mut class = NielsenClassRecord {
            id: classes.len() as u32,
            period: r.period,
            kinds: member_records.iter().map(|m| m.kind).collect(),
            members,
            collapsible: false,
            index: class_index(&member_records),
            essential: None,
            persistent: None,
            unremovable: None,
            multiplicity: if member_records.len() == 1 { r.multiplicity } else { 1 },
        };
        class.collapsible = collapsible(&class, &closed);
        class.essential = essential(&class);
        class.persistent = if class.collapsible { Some(false) } else { class.essential };
        class.unremovable = class.persistent;
        classes.push(class);
    }
    Ok(NielsenReport {
        inventory,
        generators,
        closed,
        classes,
    })
}

/// Per-class collapsibility, essentiality and persistence.
pub fn persistence_report<'a>(
    stage: impl Into<Stage<'a>>,
    max_period: u64,
    census: Option<&Census>,
) -> Result<Vec<NielsenClassRecord>> {
    Ok(analyze(stage, max_period, census)?.classes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PonCount {
    pub count: u64,
    /// False when the count is only a lower bound.
    pub exact: bool,
}

/// Number of uncollapsible essential period-`n` classes.
pub fn pon_count<'a>(stage: impl Into<Stage<'a>>, n: u64, census: Option<&Census>) -> Result<PonCount> {
    let stage = stage.into();
    let report = analyze(stage, n, census)?;
    let mut exact = report.inventory.is_exact();
    let mut count = 0;
    for c in report.classes.iter().filter(|c| c.period == n) {
        match c.persistent {
            Some(true) => count += c.multiplicity,
            Some(false) => {}
            None => exact = false,
        }
    }
    // a census only speaks for the periods up to its largest entry
    let g = stage.graph();
    for p in g.pieces.values() {
        if let ComponentData::PseudoAnosov(pa) = &p.data {
            let table = census.and_then(|c| c.get(&p.id)).or(pa.census.as_ref());
            if let Some(t) = table {
                if t.keys().next_back().is_none_or(|&last| last < n) {
                    exact = false;
                }
            }
        }
    }
    Ok(PonCount { count, exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(periods: &[u64], pn: &[(u32, u32)], col: &[(u32, u32)]) -> RelationSet {
        let mut r = RelationSet::new();
        for (i, &p) in periods.iter().enumerate() {
            r.add_node(i as u32, p);
        }
        for &(a, b) in pn {
            r.add_pn(a, b);
        }
        for &(a, b) in col {
            r.add_collapse(a, b);
        }
        r
    }

    #[test]
    fn rule_two_adds_collapse() {
        let closed = close_relations(&set(&[2, 2, 1], &[(0, 1)], &[(1, 2)])).unwrap();
        assert!(closed.collapse.contains_key(&(0, 2)));
        assert_eq!(closed.collapse[&(0, 2)], 2);
    }

    #[test]
    fn empty_closes_to_empty() {
        assert!(close_relations(&RelationSet::new()).unwrap().is_empty());
    }

    #[test]
    fn contradictory_periods_rejected() {
        let err = close_relations(&set(&[2, 3], &[(0, 1)], &[])).unwrap_err();
        assert!(matches!(err, Error::RelationPeriods { pa: 2, pb: 3, .. }));
        let err = close_relations(&set(&[2, 3], &[], &[(0, 1)])).unwrap_err();
        assert!(matches!(err, Error::RelationPeriods { .. }));
        let mut r = RelationSet::new();
        r.pn.insert((0, 9));
        assert!(matches!(close_relations(&r), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn zero_sum_class_is_inessential() {
        let a = OrbitRecord {
            id: 0,
            kind: OrbitKind::FiniteOrderRegular,
            period: 1,
            index: IndexValue::Integer(1),
            points_per_orbit: 1,
            multiplicity: 1,
            carrier: Carrier::Piece { piece: crate::graph::PieceId(0) },
            continuum: false,
            absorbed: vec![],
        };
        let mut b = a.clone();
        b.id = 1;
        b.index = IndexValue::Integer(-1);
        assert_eq!(class_index(&[&a, &b]), IndexValue::Integer(0));
        let class = NielsenClassRecord {
            id: 0,
            period: 1,
            members: vec![0, 1],
            kinds: vec![a.kind, b.kind],
            collapsible: false,
            index: class_index(&[&a, &b]),
            essential: None,
            persistent: None,
            unremovable: None,
            multiplicity: 1,
        };
        assert_eq!(essential(&class), Some(false));
    }
}
