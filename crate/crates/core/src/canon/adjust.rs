use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::inventory::{Carrier, Census, IndexValue, Inventory, OrbitKind, OrbitRecord};
use crate::annulus::{boundary_orbit_with_choice, classify_annulus, BoundaryOrbit, CollapseChoice};
use crate::error::{Error, Result};
use crate::graph::{
    euler_characteristic, AnnulusId, Attachment, BranchPoint, CircleId, ComponentData, ComponentGraph,
    FiniteOrderData, PieceId, SurfacePiece,
};

/// Periodic content of the inside of a reducing annulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum AnnulusInterior {
    /// No periodic points.
    Empty,
    /// Two periodic orbits of the annulus return time, in different classes.
    TwoOrbits { period: u32, indices: [i64; 2] },
    /// As `TwoOrbits`, with the boundary orbits identified to the first one.
    Pinched { period: u32, indices: [i64; 2] },
}

/// Collapse choice for circles whose boundary orbit is a fixed point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CollapseChoices {
    pub default: CollapseChoice,
    pub overrides: BTreeMap<CircleId, CollapseChoice>,
}

impl CollapseChoices {
    pub fn uniform(choice: CollapseChoice) -> Self {
        Self {
            default: choice,
            overrides: BTreeMap::new(),
        }
    }

    pub fn for_circle(&self, c: CircleId) -> CollapseChoice {
        self.overrides.get(&c).copied().unwrap_or(self.default)
    }
}

/// One untwisted annulus between finite-order pieces removed by merging.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub annulus: AnnulusId,
    pub pieces: [PieceId; 2],
    pub into: PieceId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdjustedGraph {
    pub graph: ComponentGraph,
    pub interiors: BTreeMap<AnnulusId, AnnulusInterior>,
    pub collapses: BTreeMap<CircleId, BoundaryOrbit>,
    pub merges: Vec<MergeEvent>,
}

/// Adjusted form of a valid graph whose annulus rotations are all known.
pub fn adjust(graph: &ComponentGraph, choices: &CollapseChoices) -> Result<AdjustedGraph> {
    let report = graph.validate();
    if !report.is_valid() {
        return Err(Error::Invalid(report));
    }
    for a in graph.annuli.values() {
        classify_annulus(a)?;
    }
    let (merged, merges) = merge_finite_order(graph)?;
    let report = merged.validate();
    if !report.is_valid() {
        return Err(Error::Invalid(report));
    }
    let interiors = merged
        .annuli
        .values()
        .map(|a| {
            let interior = if a.flipped {
                AnnulusInterior::TwoOrbits {
                    period: a.return_time,
                    indices: [1, 1],
                }
            } else {
                AnnulusInterior::Empty
            };
            (a.id, interior)
        })
        .collect();
    let collapses = collapse_records(&merged, choices)?;
    Ok(AdjustedGraph {
        graph: merged,
        interiors,
        collapses,
        merges,
    })
}

pub(crate) fn collapse_records(
    graph: &ComponentGraph,
    choices: &CollapseChoices,
) -> Result<BTreeMap<CircleId, BoundaryOrbit>> {
    let mut out = BTreeMap::new();
    for c in graph.circles.values() {
        if !graph.pieces[&c.owner].data.is_pseudo_anosov() {
            continue;
        }
        let rho = graph.effective_rotation(c.id).ok_or(Error::MissingRotation(c.id))?;
        let prongs = c.prongs.ok_or(Error::MissingProngs(c.id))?;
        out.insert(c.id, boundary_orbit_with_choice(prongs, rho, choices.for_circle(c.id))?);
    }
    Ok(out)
}

fn full_period(graph: &ComponentGraph, ell: &BTreeMap<PieceId, u64>, p: PieceId) -> u64 {
    let m = graph.pieces[&p].data.as_finite_order().map_or(0, |d| u64::from(d.period));
    ell[&p] * m
}

fn find(parent: &mut BTreeMap<PieceId, PieceId>, x: PieceId) -> PieceId {
    let p = parent[&x];
    if p == x {
        return x;
    }
    let r = find(parent, p);
    parent.insert(x, r);
    r
}

/// Merges finite-order pieces across untwisted annuli.
fn merge_finite_order(graph: &ComponentGraph) -> Result<(ComponentGraph, Vec<MergeEvent>)> {
    let orbits = graph.orbits()?;
    let ell: BTreeMap<PieceId, u64> = orbits
        .pieces
        .iter()
        .flat_map(|o| o.members.iter().map(move |&p| (p, o.len() as u64)))
        .collect();
    let is_fo = |c: CircleId| !graph.owner_data(c).is_some_and(ComponentData::is_pseudo_anosov);

    let mut eliminated = Vec::new();
    for a in graph.annuli.values() {
        if classify_annulus(a)?.twisted || !is_fo(a.sides[0]) || !is_fo(a.sides[1]) {
            continue;
        }
        let (p, q) = (graph.circles[&a.sides[0]].owner, graph.circles[&a.sides[1]].owner);
        let (pp, pq) = (full_period(graph, &ell, p), full_period(graph, &ell, q));
        if pp != pq {
            return Err(Error::PeriodMismatch {
                annulus: a.id,
                a: p,
                b: q,
                pa: pp,
                pb: pq,
            });
        }
        eliminated.push(a.id);
    }
    if eliminated.is_empty() {
        return Ok((graph.clone(), Vec::new()));
    }

    let mut parent: BTreeMap<PieceId, PieceId> = graph.pieces.keys().map(|&p| (p, p)).collect();
    for id in &eliminated {
        let a = &graph.annuli[id];
        let ra = find(&mut parent, graph.circles[&a.sides[0]].owner);
        let rb = find(&mut parent, graph.circles[&a.sides[1]].owner);
        // keep the least id as root so merged pieces are named by it
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent.insert(hi, lo);
    }
    let keys: Vec<PieceId> = parent.keys().copied().collect();
    let mut groups: BTreeMap<PieceId, Vec<PieceId>> = BTreeMap::new();
    for p in keys {
        let root = find(&mut parent, p);
        groups.entry(root).or_default().push(p);
    }
    let new_id = |parent: &mut BTreeMap<PieceId, PieceId>, p: PieceId| find(parent, p);

    let removed_circles: BTreeSet<CircleId> = eliminated
        .iter()
        .flat_map(|id| graph.annuli[id].sides)
        .collect();
    let eliminated_set: BTreeSet<AnnulusId> = eliminated.iter().copied().collect();

    let mut out = ComponentGraph {
        ambient: graph.ambient,
        junctions: graph.junctions.clone(),
        ..ComponentGraph::default()
    };
    for (&root, members) in &groups {
        if members.len() == 1 {
            out.pieces.insert(root, graph.pieces[&root].clone());
            continue;
        }
        let chi: i64 = members.iter().map(|m| graph.pieces[m].euler_characteristic()).sum();
        let boundary: Vec<CircleId> = members
            .iter()
            .flat_map(|m| graph.pieces[m].boundary.iter().copied())
            .filter(|c| !removed_circles.contains(c))
            .collect();
        let genus = (2 - chi - boundary.len() as i64) / 2;
        debug_assert_eq!(euler_characteristic(genus as u32, boundary.len()), chi);
        out.pieces.insert(
            root,
            SurfacePiece {
                id: root,
                genus: genus as u32,
                boundary,
                // period and branch points are filled in once the new orbits are known
                data: ComponentData::finite_order(0, Vec::new()),
            },
        );
    }
    for &root in groups.keys() {
        let image = graph.piece_permutation.apply(root);
        let target = new_id(&mut parent, image);
        out.piece_permutation.set(root, target);
    }
    for c in graph.circles.values() {
        if removed_circles.contains(&c.id) {
            continue;
        }
        let mut c = c.clone();
        c.owner = new_id(&mut parent, c.owner);
        out.circle_permutation.set(c.id, graph.circle_permutation.apply(c.id));
        out.circles.insert(c.id, c);
    }
    for a in graph.annuli.values() {
        if eliminated_set.contains(&a.id) {
            continue;
        }
        out.annuli.insert(a.id, a.clone());
        out.annulus_permutation.set(a.id, graph.annulus_permutation.apply(a.id));
    }

    // period and branch data of merged orbits
    let new_orbits = out.orbits()?;
    for orbit in &new_orbits.pieces {
        let merged: Vec<PieceId> = orbit
            .members
            .iter()
            .filter(|p| groups[p].len() > 1)
            .copied()
            .collect();
        if merged.is_empty() {
            continue;
        }
        let originals: BTreeSet<PieceId> = orbit.members.iter().flat_map(|p| groups[p].iter().copied()).collect();
        let p_full = full_period(graph, &ell, *originals.iter().next().unwrap_or(&orbit.members[0]));
        let ell_new = orbit.len() as u64;
        let mut branch_points: Vec<BranchPoint> = Vec::new();
        for old in &orbits.pieces {
            if originals.contains(&old.representative()) {
                if let Some(fo) = graph.pieces[&old.representative()].data.as_finite_order() {
                    branch_points.extend(fo.branch_points.iter().cloned());
                }
            }
        }
        // a flipped annulus folded into a finite-order map contributes its two centers
        for old in &orbits.annuli {
            let a = &graph.annuli[&old.representative()];
            if a.flipped && eliminated_set.contains(&a.id) && originals.contains(&graph.circles[&a.sides[0]].owner) {
                let k = p_full / u64::from(a.return_time);
                if k >= 2 {
                    branch_points.push(BranchPoint::new(k as u32));
                    branch_points.push(BranchPoint::new(k as u32));
                }
            }
        }
        let data = ComponentData::FiniteOrder(FiniteOrderData {
            period: (p_full / ell_new) as u32,
            branch_points,
            condensed: None,
        });
        for p in &orbit.members {
            out.pieces.get_mut(p).expect("merged piece").data = data.clone();
        }
    }

    let merges = eliminated
        .iter()
        .map(|id| {
            let a = &graph.annuli[id];
            let pieces = [graph.circles[&a.sides[0]].owner, graph.circles[&a.sides[1]].owner];
            MergeEvent {
                annulus: *id,
                pieces,
                into: find(&mut parent, pieces[0]),
            }
        })
        .collect();
    Ok((out, merges))
}

impl AdjustedGraph {
    /// Orbit records of the adjusted (isometry) model up to `max_period`.
    pub fn inventory(&self, max_period: u64, census: Option<&Census>) -> Result<Inventory> {
        let structural = self.structural_records()?;
        Ok(super::assemble(&self.graph, &structural, max_period, census))
    }

    pub(crate) fn structural_records(&self) -> Result<Vec<OrbitRecord>> {
        let g = &self.graph;
        let orbits = g.orbits()?;
        let mut records = Vec::new();
        for orbit in &orbits.pieces {
            let rep = orbit.representative();
            let ComponentData::FiniteOrder(fo) = &g.pieces[&rep].data else { continue };
            let m = u64::from(fo.period);
            let p_full = orbit.len() as u64 * m;
            let mut regular = OrbitRecord::new(
                OrbitKind::FiniteOrderRegular,
                p_full,
                IndexValue::Undefined,
                m,
                Carrier::Piece { piece: rep },
            );
            regular.continuum = true;
            records.push(regular);
            for co in &orbits.circles {
                let c = co.representative();
                if g.circles[&c].owner_in(&orbit.members) && self.untwisted_attachment(c) {
                    let mut peripheral = OrbitRecord::new(
                        OrbitKind::FiniteOrderRegular,
                        p_full,
                        IndexValue::Undefined,
                        p_full / co.len() as u64,
                        Carrier::Circle { circle: c },
                    );
                    peripheral.continuum = true;
                    records.push(peripheral);
                }
            }
            for b in &fo.branch_points {
                let k = u64::from(b.local_order);
                // a branch point of an isometry is a local rotation
                records.push(OrbitRecord::new(
                    OrbitKind::FiniteOrderBranch,
                    p_full / k,
                    IndexValue::Integer(1),
                    m / k,
                    Carrier::Piece { piece: rep },
                ));
            }
        }
        for co in &orbits.circles {
            let c = co.representative();
            let Some(orbit) = self.collapses.get(&c) else { continue };
            let kind = match g.attachment(c) {
                Attachment::Free => OrbitKind::BoundaryPA,
                _ => OrbitKind::PeripheralPA,
            };
            records.push(OrbitRecord::new(
                kind,
                co.len() as u64 * orbit.period,
                IndexValue::NonzeroSymbolic,
                orbit.period,
                Carrier::Circle { circle: c },
            ));
        }
        for ao in &orbits.annuli {
            let a = ao.representative();
            if let Some(AnnulusInterior::TwoOrbits { period, indices } | AnnulusInterior::Pinched { period, indices }) =
                self.interiors.get(&a)
            {
                for (slot, i) in indices.iter().enumerate() {
                    records.push(OrbitRecord::new(
                        OrbitKind::FlipAnnulusInterior,
                        u64::from(*period),
                        IndexValue::Integer(*i),
                        1,
                        Carrier::Annulus { annulus: a, slot: slot as u8 },
                    ));
                }
            }
        }
        super::renumber(&mut records);
        Ok(records)
    }

    /// Whether the circle sits on an untwisted annulus.
    pub(crate) fn untwisted_attachment(&self, c: CircleId) -> bool {
        match self.graph.attachment(c) {
            Attachment::Annulus { annulus, .. } => {
                classify_annulus(&self.graph.annuli[&annulus]).is_ok_and(|t| !t.twisted)
            }
            Attachment::Junction { .. } => true,
            Attachment::Free => false,
        }
    }
}

impl crate::graph::BoundaryCircle {
    pub(crate) fn owner_in(&self, pieces: &[PieceId]) -> bool {
        pieces.contains(&self.owner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::AnnulusRecord;
    use crate::graph::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Two genus-1 finite-order pieces of period 2, each with one boundary
    /// circle and three branch points, joined by an untwisted annulus.
    fn two_fo() -> ComponentGraph {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 1, ComponentData::finite_order(2, vec![BranchPoint::new(2); 3]));
        g.add_piece(PieceId(1), 1, ComponentData::finite_order(2, vec![BranchPoint::new(2); 3]));
        g.add_circle(CircleId(0), PieceId(0), Some(r(1, 2)), None);
        g.add_circle(CircleId(1), PieceId(1), Some(r(1, 2)), None);
        g.add_annulus(AnnulusRecord::new(AnnulusId(0), [CircleId(0), CircleId(1)], 1, false).with_rotations(r(1, 2), r(1, 2)));
        g
    }

    #[test]
    fn finite_order_pieces_merge() {
        let g = two_fo();
        assert!(g.validate().is_valid(), "{}", g.validate());
        let adj = adjust(&g, &CollapseChoices::default()).unwrap();
        assert!(adj.graph.annuli.is_empty());
        assert_eq!(adj.graph.pieces.len(), 1);
        let p = &adj.graph.pieces[&PieceId(0)];
        assert_eq!(p.euler_characteristic(), -2);
        assert_eq!((p.genus, p.boundary.len()), (2, 0));
        let fo = p.data.as_finite_order().unwrap();
        assert_eq!(fo.period, 2);
        assert_eq!(fo.branch_points.len(), 6);
        assert_eq!(adj.merges, vec![MergeEvent { annulus: AnnulusId(0), pieces: [PieceId(0), PieceId(1)], into: PieceId(0) }]);
    }

    #[test]
    fn different_periods_leave_a_twisted_annulus() {
        // regular boundary points force equal periods across an untwisted annulus,
        // so pieces of different periods can only meet along a twisted one
        let mut g = two_fo();
        g.pieces.get_mut(&PieceId(1)).unwrap().data =
            ComponentData::finite_order(4, vec![BranchPoint::new(2), BranchPoint::new(4)]);
        g.circles.get_mut(&CircleId(1)).unwrap().rotation = Some(r(1, 4));
        g.annuli.get_mut(&AnnulusId(0)).unwrap().rotations = Some([r(1, 2), r(1, 4)]);
        let report = g.validate();
        assert!(report.is_valid(), "{report}");
        let adj = adjust(&g, &CollapseChoices::default()).unwrap();
        assert_eq!(adj.graph.pieces.len(), 2);
        assert!(adj.merges.is_empty());
    }

    #[test]
    fn indeterminate_twist_refused() {
        let mut g = two_fo();
        g.circles.get_mut(&CircleId(0)).unwrap().rotation = None;
        g.circles.get_mut(&CircleId(1)).unwrap().rotation = None;
        g.annuli.get_mut(&AnnulusId(0)).unwrap().rotations = None;
        assert!(matches!(
            adjust(&g, &CollapseChoices::default()),
            Err(Error::IndeterminateTwist(AnnulusId(0)))
        ));
    }

    #[test]
    fn no_annuli_means_identity_rewrite() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 2, ComponentData::pseudo_anosov(3.0));
        let adj = adjust(&g, &CollapseChoices::default()).unwrap();
        assert_eq!(adj.graph, g);
        assert!(adj.collapses.is_empty() && adj.interiors.is_empty() && adj.merges.is_empty());
    }

    #[test]
    fn flipped_annulus_gets_two_orbits() {
        // three handles permuted cyclically; after three steps each handle's
        // annulus comes back with its sides swapped
        let mut g = ComponentGraph::new();
        for i in 0..3 {
            g.add_piece(PieceId(i), 1, ComponentData::pseudo_anosov(2.0));
            g.add_circle(CircleId(2 * i), PieceId(i), None, Some(1));
            g.add_circle(CircleId(2 * i + 1), PieceId(i), None, Some(1));
            g.map_piece(PieceId(i), PieceId((i + 1) % 3));
            g.add_annulus(
                AnnulusRecord::new(AnnulusId(i), [CircleId(2 * i), CircleId(2 * i + 1)], 3, true)
                    .with_rotations(r(0, 1), r(0, 1)),
            );
            g.map_annulus(AnnulusId(i), AnnulusId((i + 1) % 3));
        }
        let cycle = [0, 2, 4, 1, 3, 5];
        for w in 0..6 {
            g.map_circle(CircleId(cycle[w]), CircleId(cycle[(w + 1) % 6]));
        }
        let report = g.validate();
        assert!(report.is_valid(), "{report}");
        let adj = adjust(&g, &CollapseChoices::default()).unwrap();
        assert_eq!(
            adj.interiors[&AnnulusId(0)],
            AnnulusInterior::TwoOrbits { period: 3, indices: [1, 1] }
        );
        let inv = adj.inventory(10, None).unwrap();
        let flips: Vec<_> = inv.records.iter().filter(|r| r.kind == OrbitKind::FlipAnnulusInterior).collect();
        assert_eq!(flips.len(), 2);
        assert!(flips.iter().all(|r| r.period == 3));
        // one circle orbit of length 6 with a fixed boundary point each: period 6
        let peripheral: Vec<_> = inv.records.iter().filter(|r| r.kind == OrbitKind::PeripheralPA).collect();
        assert_eq!(peripheral.len(), 1);
        assert_eq!(peripheral[0].period, 6);
    }
}
