//! Text and DOT renderings of Nielsen reports.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::annulus::BoundaryOrbit;
use crate::graph::{CircleId, ComponentData, ComponentGraph};
use crate::nielsen::NielsenReport;

fn yes_no(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "?",
    }
}

/// Plain-text tables: pieces, collapsed boundary points, orbits and classes.
pub fn text_report(
    graph: &ComponentGraph,
    collapses: &BTreeMap<CircleId, BoundaryOrbit>,
    report: &NielsenReport,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pieces");
    for p in graph.pieces.values() {
        let kind = match &p.data {
            ComponentData::FiniteOrder(d) => {
                let case = d.condensed.map(|c| format!(" case {}", c.number())).unwrap_or_default();
                format!("finite order, period {}, {} branch orbit(s){case}", d.period, d.branch_points.len())
            }
            ComponentData::PseudoAnosov(d) => format!("pseudo-Anosov, expansion {}", d.expansion),
        };
        let _ = writeln!(
            out,
            "  {:<5} genus {} boundary {} chi {:>3}  {kind}",
            p.id.to_string(),
            p.genus,
            p.boundary.len(),
            p.euler_characteristic()
        );
    }
    if !graph.junctions.is_empty() {
        let _ = writeln!(out, "junctions");
        for j in &graph.junctions {
            let _ = writeln!(out, "  {} -- {} (was {}, {:?})", j.circles[0], j.circles[1], j.annulus, j.kind);
        }
    }
    if !collapses.is_empty() {
        let _ = writeln!(out, "pinched boundary points");
        for (c, b) in collapses {
            let choice = b.choice.map(|c| format!(" {c:?}").to_lowercase()).unwrap_or_default();
            let _ = writeln!(
                out,
                "  p{:<4} period {} on circle, groups of {}{choice}",
                c.0, b.period, b.collapsed_group_size
            );
        }
    }
    let _ = writeln!(out, "orbits");
    let _ = writeln!(out, "  {:>4}  {:<14} {:>6} {:>9} {:>6}  carrier", "id", "type", "period", "index", "mult");
    for r in &report.inventory.records {
        let mut extra = String::new();
        if r.continuum {
            extra.push_str(" continuum");
        }
        for a in &r.absorbed {
            let _ = write!(extra, " +{}:{}@{}", a.kind, a.period, a.carrier);
        }
        let _ = writeln!(
            out,
            "  {:>4}  {:<14} {:>6} {:>9} {:>6}  {}{extra}",
            r.id,
            r.kind.to_string(),
            r.period,
            r.index.to_string(),
            r.multiplicity,
            r.carrier
        );
    }
    if !report.inventory.census_absent.is_empty() {
        let ids: Vec<String> = report.inventory.census_absent.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "  census absent for {}", ids.join(", "));
    }
    let _ = writeln!(out, "classes");
    let _ = writeln!(
        out,
        "  {:>4} {:>6}  {:<16} {:>9} {:>11} {:>9} {:>10}",
        "id", "period", "members", "index", "collapsible", "essential", "persistent"
    );
    for c in &report.classes {
        let members: Vec<String> = c.members.iter().map(u32::to_string).collect();
        let _ = writeln!(
            out,
            "  {:>4} {:>6}  {:<16} {:>9} {:>11} {:>9} {:>10}",
            c.id,
            c.period,
            members.join(","),
            c.index.to_string(),
            if c.collapsible { "yes" } else { "no" },
            yes_no(c.essential),
            yes_no(c.persistent)
        );
    }
    out
}

/// Orbit records as nodes labelled `type:period:index`; `pn` generators as
/// solid undirected edges and `⊢` generators as dashed arrows.
pub fn dot_report(report: &NielsenReport) -> String {
    let mut out = String::from("digraph orbits {\n  node [shape=box];\n");
    for r in &report.inventory.records {
        let _ = writeln!(out, "  o{} [label=\"{}\"];", r.id, r.label());
    }
    for &(a, b) in &report.generators.pn {
        let _ = writeln!(out, "  o{a} -> o{b} [dir=none, style=solid];");
    }
    for (&(x, y), mult) in &report.generators.collapse {
        let _ = writeln!(out, "  o{x} -> o{y} [style=dashed, label=\"x{mult}\"];");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::{adjust, CollapseChoices};
    use crate::annulus::AnnulusRecord;
    use crate::graph::{AnnulusId, BranchPoint, CircleId, PieceId, Rational};
    use crate::nielsen::analyze;

    #[test]
    fn dot_has_both_edge_styles() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 2, ComponentData::finite_order(2, vec![BranchPoint::new(2)]));
        g.add_piece(PieceId(1), 1, ComponentData::pseudo_anosov(2.0));
        let half = Rational::new(1, 2);
        g.add_circle(CircleId(0), PieceId(0), Some(half), None);
        g.add_circle(CircleId(1), PieceId(1), Some(half), Some(1));
        g.add_annulus(AnnulusRecord::new(AnnulusId(0), [CircleId(0), CircleId(1)], 1, false).with_rotations(half, half));
        let a = adjust(&g, &CollapseChoices::default()).unwrap();
        let report = analyze(&a, 4, None).unwrap();
        let dot = dot_report(&report);
        assert!(dot.contains("style=dashed"));
        assert!(dot.contains("dir=none"));
        assert!(dot.contains("fo_branch:1:1"));
        let text = text_report(&a.graph, &a.collapses, &report);
        assert!(text.contains("classes"));
    }
}
