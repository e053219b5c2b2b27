use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::adjust::{AdjustedGraph, AnnulusInterior};
use super::index::{branch_record_index, quotient_euler};
use super::inventory::{Absorbed, Carrier, Census, IndexValue, Inventory, OrbitKind, OrbitRecord};
use crate::annulus::{classify_annulus, BoundaryOrbit};
use crate::error::{Error, Result};
use crate::graph::{
    AnnulusId, Attachment, CircleId, ComponentData, ComponentGraph, FiniteOrderCase, Junction, JunctionKind,
    OrbitDecomposition, PieceId,
};

/// Which orbit of a condensed finite-order piece absorbs glued boundary orbits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "orbit", content = "slot")]
pub enum Onto {
    Regular,
    Branch(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum IdentificationEvent {
    /// A finite-order component replaced by its minimal model.
    Condensed { piece: PieceId, case: u8 },
    /// Annulus between two pseudo-Anosov circles removed, circles glued.
    DirectGlue { annulus: AnnulusId, circles: [CircleId; 2] },
    /// Annulus between a pseudo-Anosov circle and a finite-order piece removed;
    /// the boundary orbit is identified with the piece's central orbit.
    BouquetGlue {
        annulus: AnnulusId,
        pa_circle: CircleId,
        fo_circle: CircleId,
        piece: PieceId,
        onto: Onto,
    },
    /// Boundary orbits of a flipped untwisted annulus identified with the pinch point.
    Pinch { annulus: AnnulusId, period: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondensedGraph {
    pub graph: ComponentGraph,
    pub interiors: BTreeMap<AnnulusId, AnnulusInterior>,
    pub collapses: BTreeMap<CircleId, BoundaryOrbit>,
    pub merges: Vec<super::MergeEvent>,
    pub identification_log: Vec<IdentificationEvent>,
    pub orbit_inventory: Vec<OrbitRecord>,
}

impl CondensedGraph {
    /// Reads the condensed graph as an adjusted one, so it can be condensed again.
    pub fn as_adjusted(&self) -> AdjustedGraph {
        AdjustedGraph {
            graph: self.graph.clone(),
            interiors: self.interiors.clone(),
            collapses: self.collapses.clone(),
            merges: self.merges.clone(),
        }
    }

    pub fn inventory(&self, max_period: u64, census: Option<&Census>) -> Inventory {
        super::assemble(&self.graph, &self.orbit_inventory, max_period, census)
    }
}

/// Orbits of a condensed graph up to `max_period`, interior census included when known.
pub fn periodic_inventory(condensed: &CondensedGraph, max_period: u64, census: Option<&Census>) -> Inventory {
    condensed.inventory(max_period, census)
}

/// Minimal model of an adjusted graph.
pub fn condense(adjusted: &AdjustedGraph) -> Result<CondensedGraph> {
    let mut g = adjusted.graph.clone();
    let mut interiors = adjusted.interiors.clone();

    let annuli: Vec<_> = g.annuli.values().cloned().collect();
    for a in annuli {
        let class = classify_annulus(&a)?;
        if class.twisted {
            continue;
        }
        if class.flipped {
            let indices = match interiors.get(&a.id) {
                Some(AnnulusInterior::TwoOrbits { indices, .. } | AnnulusInterior::Pinched { indices, .. }) => *indices,
                _ => [1, 1],
            };
            interiors.insert(a.id, AnnulusInterior::Pinched { period: a.return_time, indices });
            continue;
        }
        let pa = |c: CircleId| g.owner_data(c).is_some_and(ComponentData::is_pseudo_anosov);
        let kind = match (pa(a.sides[0]), pa(a.sides[1])) {
            (true, true) => (a.sides, JunctionKind::Direct),
            (true, false) => (a.sides, bouquet(&g, a.sides[1])),
            (false, true) => ([a.sides[1], a.sides[0]], bouquet(&g, a.sides[0])),
            // adjustment merges these; an adjusted graph never has one
            (false, false) => continue,
        };
        g.annuli.remove(&a.id);
        g.annulus_permutation.0.remove(&a.id);
        g.annulus_permutation.0.retain(|_, v| *v != a.id);
        interiors.remove(&a.id);
        g.junctions.push(Junction {
            circles: kind.0,
            annulus: a.id,
            kind: kind.1,
        });
    }
    g.junctions.sort_by_key(|j| j.annulus);
    // annulus orbits were removed whole, so the permutation is still a bijection
    let orbits = g.orbits()?;

    let fo_reps: Vec<PieceId> = orbits
        .pieces
        .iter()
        .map(|o| o.representative())
        .filter(|p| !g.pieces[p].data.is_pseudo_anosov())
        .collect();
    for rep in fo_reps {
        let members = orbits.piece_orbit(rep).map(|o| o.members.clone()).unwrap_or_default();
        let has_untwisted = g
            .circles
            .values()
            .any(|c| members.contains(&c.owner) && matches!(g.attachment(c.id), Attachment::Junction { .. }));
        for m in &members {
            if let Some(ComponentData::FiniteOrder(fo)) = g.pieces.get_mut(m).map(|p| &mut p.data) {
                fo.condensed = Some(FiniteOrderCase::dispatch(!fo.branch_points.is_empty(), has_untwisted));
            }
        }
    }

    let report = g.validate();
    if !report.is_valid() {
        return Err(Error::Invalid(report));
    }
    let (identification_log, orbit_inventory) = describe(&g, &orbits, &interiors, &adjusted.collapses)?;
    Ok(CondensedGraph {
        graph: g,
        interiors,
        collapses: adjusted.collapses.clone(),
        merges: adjusted.merges.clone(),
        identification_log,
        orbit_inventory,
    })
}

fn bouquet(g: &ComponentGraph, fo_circle: CircleId) -> JunctionKind {
    let has_branch = g
        .owner_data(fo_circle)
        .and_then(ComponentData::as_finite_order)
        .is_some_and(|fo| !fo.branch_points.is_empty());
    JunctionKind::Bouquet {
        center: has_branch.then_some(0),
    }
}

/// Log and inventory of a condensed graph, read off its final structure.
fn describe(
    g: &ComponentGraph,
    orbits: &OrbitDecomposition,
    interiors: &BTreeMap<AnnulusId, AnnulusInterior>,
    collapses: &BTreeMap<CircleId, BoundaryOrbit>,
) -> Result<(Vec<IdentificationEvent>, Vec<OrbitRecord>)> {
    let mut log = Vec::new();
    let mut records: Vec<OrbitRecord> = Vec::new();
    // finite-order piece orbit representative -> (regular slot, branch slots)
    let mut fo_slots: BTreeMap<PieceId, (Option<usize>, Vec<usize>)> = BTreeMap::new();

    for orbit in &orbits.pieces {
        let rep = orbit.representative();
        let piece = &g.pieces[&rep];
        let ComponentData::FiniteOrder(fo) = &piece.data else { continue };
        let case = fo.condensed.unwrap_or(FiniteOrderCase::dispatch(!fo.branch_points.is_empty(), false));
        log.push(IdentificationEvent::Condensed { piece: rep, case: case.number() });
        let m = u64::from(fo.period);
        let p_full = orbit.len() as u64 * m;
        let chi = piece.euler_characteristic();
        let carrier = Carrier::Piece { piece: rep };
        let mut slots = (None, Vec::new());
        match case {
            FiniteOrderCase::NoBranchNoUntwisted => {
                let chi_star = quotient_euler(chi, fo.period, &[])?;
                slots.0 = Some(records.len());
                records.push(OrbitRecord::new(
                    OrbitKind::FiniteOrderRegular,
                    p_full,
                    IndexValue::Integer(chi_star),
                    m,
                    carrier,
                ));
            }
            FiniteOrderCase::NoBranchUntwisted => {
                slots.0 = Some(records.len());
                records.push(OrbitRecord::new(
                    OrbitKind::FiniteOrderRegular,
                    p_full,
                    IndexValue::NonzeroSymbolic,
                    m,
                    carrier,
                ));
            }
            FiniteOrderCase::BranchNoUntwisted | FiniteOrderCase::BranchUntwisted => {
                for b in &fo.branch_points {
                    let k = u64::from(b.local_order);
                    // at its own period the stabilizer generator still rotates
                    // the neighbourhood, so the lifted point has index 1
                    let index = IndexValue::Integer(branch_record_index(b)?.unwrap_or(1));
                    slots.1.push(records.len());
                    records.push(OrbitRecord::new(OrbitKind::FiniteOrderBranch, p_full / k, index, m / k, carrier));
                }
            }
        }
        fo_slots.insert(rep, slots);
    }

    let circle_rep = |c: CircleId| orbits.circle_orbit(c).map_or(c, |o| o.representative());
    let piece_rep = |p: PieceId| orbits.piece_orbit(p).map_or(p, |o| o.representative());
    let mut pinch_slots: BTreeMap<AnnulusId, usize> = BTreeMap::new();
    for ao in &orbits.annuli {
        let a = ao.representative();
        let (AnnulusInterior::TwoOrbits { period, indices } | AnnulusInterior::Pinched { period, indices }) =
            interiors.get(&a).copied().unwrap_or(AnnulusInterior::Empty)
        else {
            continue;
        };
        let pinched = matches!(interiors.get(&a), Some(AnnulusInterior::Pinched { .. }));
        if pinched {
            log.push(IdentificationEvent::Pinch { annulus: a, period });
            pinch_slots.insert(a, records.len());
        }
        for (slot, i) in indices.iter().enumerate() {
            let index = if pinched && slot == 0 {
                IndexValue::NonzeroSymbolic
            } else {
                IndexValue::Integer(*i)
            };
            records.push(OrbitRecord::new(
                OrbitKind::FlipAnnulusInterior,
                u64::from(period),
                index,
                1,
                Carrier::Annulus { annulus: a, slot: slot as u8 },
            ));
        }
    }

    for j in &g.junctions {
        match j.kind {
            JunctionKind::Direct => log.push(IdentificationEvent::DirectGlue {
                annulus: j.annulus,
                circles: j.circles,
            }),
            JunctionKind::Bouquet { center } => {
                let piece = piece_rep(g.circles[&j.circles[1]].owner);
                log.push(IdentificationEvent::BouquetGlue {
                    annulus: j.annulus,
                    pa_circle: j.circles[0],
                    fo_circle: j.circles[1],
                    piece,
                    onto: center.map_or(Onto::Regular, Onto::Branch),
                });
            }
        }
    }

    // boundary orbits of pseudo-Anosov circles, one per circle orbit
    let mut done: BTreeSet<CircleId> = BTreeSet::new();
    for co in &orbits.circles {
        let c = co.representative();
        let Some(collapse) = collapses.get(&c) else { continue };
        if done.contains(&c) {
            continue;
        }
        done.insert(c);
        let period = co.len() as u64 * collapse.period;
        let kind = match g.attachment(c) {
            Attachment::Free => OrbitKind::BoundaryPA,
            _ => OrbitKind::PeripheralPA,
        };
        let own = Absorbed {
            kind,
            period,
            carrier: Carrier::Circle { circle: c },
        };
        match g.attachment(c) {
            Attachment::Junction { index } => {
                let j = &g.junctions[index];
                match j.kind {
                    JunctionKind::Direct => {
                        let other = circle_rep(if j.circles[0] == c { j.circles[1] } else { j.circles[0] });
                        done.insert(other);
                        let other_period = orbits.circle_orbit(other).map_or(1, |o| o.len() as u64)
                            * collapses.get(&other).map_or(1, |b| b.period);
                        let mut rec = OrbitRecord::new(kind, period, IndexValue::NonzeroSymbolic, collapse.period, own.carrier);
                        rec.absorbed.push(Absorbed {
                            kind,
                            period: other_period,
                            carrier: Carrier::Circle { circle: other },
                        });
                        records.push(rec);
                    }
                    JunctionKind::Bouquet { center } => {
                        let piece = piece_rep(g.circles[&j.circles[1]].owner);
                        let (regular, branches) = &fo_slots[&piece];
                        let slot = match center {
                            Some(i) => branches.get(i).copied(),
                            None => *regular,
                        };
                        match slot {
                            Some(s) => records[s].absorbed.push(own),
                            None => records.push(OrbitRecord::new(kind, period, IndexValue::NonzeroSymbolic, collapse.period, own.carrier)),
                        }
                    }
                }
            }
            Attachment::Annulus { annulus, .. } => {
                let rep = orbits.annulus_orbit(annulus).map_or(annulus, |o| o.representative());
                match pinch_slots.get(&rep) {
                    Some(&s) => records[s].absorbed.push(own),
                    None => records.push(OrbitRecord::new(kind, period, IndexValue::NonzeroSymbolic, collapse.period, own.carrier)),
                }
            }
            Attachment::Free => {
                records.push(OrbitRecord::new(kind, period, IndexValue::NonzeroSymbolic, collapse.period, own.carrier));
            }
        }
    }
    super::renumber(&mut records);
    Ok((log, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::AnnulusRecord;
    use crate::canon::{adjust, CollapseChoices};
    use crate::graph::{BranchPoint, Rational};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn condensed(g: &ComponentGraph) -> CondensedGraph {
        let adj = adjust(g, &CollapseChoices::default()).unwrap();
        condense(&adj).unwrap()
    }

    #[test]
    fn case_one_has_one_regular_orbit() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 4, ComponentData::finite_order(3, vec![]));
        let c = condensed(&g);
        assert_eq!(c.orbit_inventory.len(), 1);
        let o = &c.orbit_inventory[0];
        assert_eq!((o.kind, o.period), (OrbitKind::FiniteOrderRegular, 3));
        // genus 4 closed: chi = -6, quotient chi = -2
        assert_eq!(o.index, IndexValue::Integer(-2));
    }

    #[test]
    fn case_three_single_branch_orbit() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 3, ComponentData::finite_order(2, vec![BranchPoint::new(2); 4]));
        let c = condensed(&g);
        assert_eq!(c.orbit_inventory.len(), 4);
        assert!(c.orbit_inventory.iter().all(|o| o.kind == OrbitKind::FiniteOrderBranch && o.period == 1));

        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 2, ComponentData::finite_order(3, vec![BranchPoint::new(3)]));
        let c = condensed(&g);
        assert_eq!(c.orbit_inventory.len(), 1);
        let o = &c.orbit_inventory[0];
        assert_eq!((o.kind, o.period), (OrbitKind::FiniteOrderBranch, 1));
        // the only fixed point carries the Lefschetz number of an order-3 map with one fixed point
        assert_eq!(o.index, IndexValue::Integer(1));
    }

    #[test]
    fn pa_pair_glued_directly() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 1, ComponentData::pseudo_anosov(2.0));
        g.add_piece(PieceId(1), 1, ComponentData::pseudo_anosov(3.0));
        g.add_circle(CircleId(0), PieceId(0), Some(r(1, 2)), Some(4));
        g.add_circle(CircleId(1), PieceId(1), Some(r(1, 2)), Some(2));
        g.add_annulus(AnnulusRecord::new(AnnulusId(0), [CircleId(0), CircleId(1)], 1, false).with_rotations(r(1, 2), r(1, 2)));
        let c = condensed(&g);
        assert!(c.graph.annuli.is_empty());
        assert_eq!(c.graph.junctions.len(), 1);
        assert_eq!(c.graph.total_euler_characteristic(), g.total_euler_characteristic());
        assert_eq!(c.orbit_inventory.len(), 1);
        assert_eq!(c.orbit_inventory[0].period, 2);
        assert_eq!(c.orbit_inventory[0].absorbed.len(), 1);
        assert_eq!(
            c.identification_log,
            vec![IdentificationEvent::DirectGlue { annulus: AnnulusId(0), circles: [CircleId(0), CircleId(1)] }]
        );
    }

    #[test]
    fn twisted_annulus_survives() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 1, ComponentData::pseudo_anosov(2.0));
        g.add_piece(PieceId(1), 1, ComponentData::pseudo_anosov(3.0));
        g.add_circle(CircleId(0), PieceId(0), None, Some(2));
        g.add_circle(CircleId(1), PieceId(1), None, Some(2));
        g.add_annulus(AnnulusRecord::new(AnnulusId(0), [CircleId(0), CircleId(1)], 1, false).with_rotations(r(0, 1), r(1, 2)));
        let c = condensed(&g);
        assert_eq!(c.graph.annuli.len(), 1);
        assert_eq!(c.interiors[&AnnulusId(0)], AnnulusInterior::Empty);
        assert_eq!(c.orbit_inventory.len(), 2);
    }

    #[test]
    fn condense_is_idempotent() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 1, ComponentData::finite_order(2, vec![BranchPoint::new(2); 3]));
        g.add_piece(PieceId(1), 1, ComponentData::pseudo_anosov(3.0));
        g.add_circle(CircleId(0), PieceId(0), Some(r(1, 2)), None);
        g.add_circle(CircleId(1), PieceId(1), None, Some(1));
        g.add_annulus(AnnulusRecord::new(AnnulusId(0), [CircleId(0), CircleId(1)], 1, false).with_rotations(r(1, 2), r(1, 2)));
        let once = condensed(&g);
        let twice = condense(&once.as_adjusted()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.orbit_inventory.len(), 3);
        assert!(once.orbit_inventory.iter().all(|o| o.kind == OrbitKind::FiniteOrderBranch));
        assert_eq!(once.orbit_inventory[0].absorbed.len(), 1);
    }
}
