//! JSON documents for component graphs and their rewritten stages.
//!
//! Identifiers are plain integers, rationals are strings like `"1/3"`, and
//! maps keyed by identifiers are JSON objects. Emitting sorts everything by
//! identifier and writes rationals in lowest terms, so a parse followed by an
//! emit is canonical.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::annulus::{AnnulusRecord, BoundaryOrbit};
use crate::canon::{AdjustedGraph, AnnulusInterior, Census, CondensedGraph, IdentificationEvent, MergeEvent, OrbitRecord};
use crate::graph::{
    Ambient, AnnulusId, BranchPoint, CircleId, ComponentData, ComponentGraph, FiniteOrderCase, FiniteOrderData,
    Junction, PieceId, PseudoAnosovData, Rational,
};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("duplicate {what} id {id}")]
    Duplicate { what: &'static str, id: u32 },

    #[error("census given for {0}, which is not a pseudo-Anosov piece")]
    CensusTarget(PieceId),

    #[error("{stage} document is missing `{field}`")]
    MissingField { stage: &'static str, field: &'static str },
}

impl From<serde_json::Error> for DocumentError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep only the description
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        Self::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.reduced().to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(n) => Ok(Rational::from_integer(n)),
            Repr::Str(s) => Rational::from_str(s.trim())
                .map_err(|_| serde::de::Error::custom(format!("`{s}` is not a rational of the form p/q"))),
        }
    }
}

mod opt_rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => rational_str::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "rational_str")] Rational);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

mod pair_rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<[Rational; 2]>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.collect_seq(r.iter().map(|x| x.reduced().to_string())),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[Rational; 2]>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "rational_str")] Rational);
        Ok(Option::<[Wrap; 2]>::deserialize(d)?.map(|[a, b]| [a.0, b.0]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleDoc {
    pub id: CircleId,
    #[serde(default, with = "opt_rational_str", skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prongs: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    FiniteOrder {
        period: u32,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        branch_points: Vec<BranchPoint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        case: Option<FiniteOrderCase>,
    },
    PseudoAnosov {
        expansion: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceDoc {
    pub id: PieceId,
    pub genus: u32,
    #[serde(default)]
    pub boundary: Vec<CircleDoc>,
    #[serde(flatten)]
    pub kind: PieceKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusDoc {
    pub id: AnnulusId,
    pub sides: [CircleId; 2],
    pub return_time: u32,
    #[serde(default)]
    pub flipped: bool,
    #[serde(default, with = "pair_rational_str", skip_serializing_if = "Option::is_none")]
    pub rotations: Option<[Rational; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutations {
    #[serde(default)]
    pub pieces: BTreeMap<PieceId, PieceId>,
    #[serde(default)]
    pub annuli: BTreeMap<AnnulusId, AnnulusId>,
    #[serde(default)]
    pub circles: BTreeMap<CircleId, CircleId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageTag {
    #[default]
    Input,
    Adjusted,
    Condensed,
}

impl StageTag {
    fn name(self) -> &'static str {
        match self {
            Self::Input => "input",
            Self::Adjusted => "adjusted",
            Self::Condensed => "condensed",
        }
    }

    fn is_input(&self) -> bool {
        *self == Self::Input
    }
}

/// Serialized form of a graph at any stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(default, skip_serializing_if = "StageTag::is_input")]
    pub stage: StageTag,
    pub pieces: Vec<PieceDoc>,
    #[serde(default)]
    pub annuli: Vec<AnnulusDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub junctions: Vec<Junction>,
    #[serde(default)]
    pub permutations: Permutations,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub census: Census,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<Ambient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interiors: Option<BTreeMap<AnnulusId, AnnulusInterior>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapses: Option<BTreeMap<CircleId, BoundaryOrbit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merges: Option<Vec<MergeEvent>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identification_log: Option<Vec<IdentificationEvent>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_inventory: Option<Vec<OrbitRecord>>,
}

/// A parsed document, at the stage it declares.
#[derive(Clone, Debug, PartialEq)]
pub enum Loaded {
    Input(ComponentGraph),
    Adjusted(AdjustedGraph),
    Condensed(CondensedGraph),
}

impl Loaded {
    pub fn graph(&self) -> &ComponentGraph {
        match self {
            Self::Input(g) => g,
            Self::Adjusted(a) => &a.graph,
            Self::Condensed(c) => &c.graph,
        }
    }
}

impl GraphDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_graph(g: &ComponentGraph) -> Self {
        let mut census = Census::new();
        let pieces = g
            .pieces
            .values()
            .map(|p| {
                let kind = match &p.data {
                    ComponentData::FiniteOrder(d) => PieceKind::FiniteOrder {
                        period: d.period,
                        branch_points: d.branch_points.clone(),
                        case: d.condensed,
                    },
                    ComponentData::PseudoAnosov(d) => {
                        if let Some(c) = &d.census {
                            census.insert(p.id, c.clone());
                        }
                        PieceKind::PseudoAnosov { expansion: d.expansion }
                    }
                };
                let mut boundary: Vec<CircleDoc> = p
                    .boundary
                    .iter()
                    .filter_map(|c| g.circles.get(c))
                    .map(|c| CircleDoc {
                        id: c.id,
                        rotation: c.rotation.map(|r| r.reduced()),
                        prongs: c.prongs,
                    })
                    .collect();
                boundary.sort_by_key(|c| c.id);
                PieceDoc {
                    id: p.id,
                    genus: p.genus,
                    boundary,
                    kind,
                }
            })
            .collect();
        let annuli = g
            .annuli
            .values()
            .map(|a| AnnulusDoc {
                id: a.id,
                sides: a.sides,
                return_time: a.return_time,
                flipped: a.flipped,
                rotations: a.rotations.map(|[x, y]| [x.reduced(), y.reduced()]),
            })
            .collect();
        let permutations = Permutations {
            pieces: g.pieces.keys().map(|&p| (p, g.piece_permutation.apply(p))).collect(),
            annuli: g.annuli.keys().map(|&a| (a, g.annulus_permutation.apply(a))).collect(),
            circles: g.circles.keys().map(|&c| (c, g.circle_permutation.apply(c))).collect(),
        };
        Self {
            stage: StageTag::Input,
            pieces,
            annuli,
            junctions: g.junctions.clone(),
            permutations,
            census,
            ambient: g.ambient,
            ..Self::default()
        }
    }

    pub fn from_adjusted(a: &AdjustedGraph) -> Self {
        Self {
            stage: StageTag::Adjusted,
            interiors: Some(a.interiors.clone()),
            collapses: Some(a.collapses.clone()),
            merges: Some(a.merges.clone()),
            ..Self::from_graph(&a.graph)
        }
    }

    pub fn from_condensed(c: &CondensedGraph) -> Self {
        Self {
            stage: StageTag::Condensed,
            interiors: Some(c.interiors.clone()),
            collapses: Some(c.collapses.clone()),
            merges: Some(c.merges.clone()),
            identification_log: Some(c.identification_log.clone()),
            orbit_inventory: Some(c.orbit_inventory.clone()),
            ..Self::from_graph(&c.graph)
        }
    }

    /// The combinatorial graph described, without validating it.
    pub fn to_graph(&self) -> Result<ComponentGraph, DocumentError> {
        let mut g = ComponentGraph::new();
        for p in &self.pieces {
            if g.pieces.contains_key(&p.id) {
                return Err(DocumentError::Duplicate { what: "piece", id: p.id.0 });
            }
            let data = match &p.kind {
                PieceKind::FiniteOrder {
                    period,
                    branch_points,
                    case,
                } => ComponentData::FiniteOrder(FiniteOrderData {
                    period: *period,
                    branch_points: branch_points.clone(),
                    condensed: *case,
                }),
                PieceKind::PseudoAnosov { expansion } => ComponentData::PseudoAnosov(PseudoAnosovData {
                    expansion: *expansion,
                    census: None,
                }),
            };
            g.add_piece(p.id, p.genus, data);
            for c in &p.boundary {
                if g.circles.contains_key(&c.id) {
                    return Err(DocumentError::Duplicate { what: "circle", id: c.id.0 });
                }
                g.add_circle(c.id, p.id, c.rotation, c.prongs);
            }
        }
        for (piece, table) in &self.census {
            match g.pieces.get_mut(piece).map(|p| &mut p.data) {
                Some(ComponentData::PseudoAnosov(d)) => d.census = Some(table.clone()),
                _ => return Err(DocumentError::CensusTarget(*piece)),
            }
        }
        for a in &self.annuli {
            if g.annuli.contains_key(&a.id) {
                return Err(DocumentError::Duplicate { what: "annulus", id: a.id.0 });
            }
            let mut rec = AnnulusRecord::new(a.id, a.sides, a.return_time, a.flipped);
            rec.rotations = a.rotations;
            g.add_annulus(rec);
        }
        g.junctions = self.junctions.clone();
        for (&from, &to) in &self.permutations.pieces {
            g.map_piece(from, to);
        }
        for (&from, &to) in &self.permutations.annuli {
            g.map_annulus(from, to);
        }
        for (&from, &to) in &self.permutations.circles {
            g.map_circle(from, to);
        }
        g.ambient = self.ambient;
        Ok(g)
    }

    /// The graph together with whatever stage data the document declares.
    pub fn load(&self) -> Result<Loaded, DocumentError> {
        let graph = self.to_graph()?;
        let stage = self.stage.name();
        let need = |field: &'static str| DocumentError::MissingField { stage, field };
        match self.stage {
            StageTag::Input => Ok(Loaded::Input(graph)),
            StageTag::Adjusted => Ok(Loaded::Adjusted(AdjustedGraph {
                graph,
                interiors: self.interiors.clone().ok_or_else(|| need("interiors"))?,
                collapses: self.collapses.clone().ok_or_else(|| need("collapses"))?,
                merges: self.merges.clone().unwrap_or_default(),
            })),
            StageTag::Condensed => Ok(Loaded::Condensed(CondensedGraph {
                graph,
                interiors: self.interiors.clone().ok_or_else(|| need("interiors"))?,
                collapses: self.collapses.clone().ok_or_else(|| need("collapses"))?,
                merges: self.merges.clone().unwrap_or_default(),
                identification_log: self.identification_log.clone().unwrap_or_default(),
                orbit_inventory: self.orbit_inventory.clone().ok_or_else(|| need("orbit_inventory"))?,
            })),
        }
    }
}

/// Parses a census file: `{piece: {period: count}}`.
pub fn parse_census(text: &str) -> Result<Census, DocumentError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "pieces": [
            {"id": 0, "genus": 1, "kind": "pseudo_anosov", "expansion": 2.5,
             "boundary": [{"id": 0, "rotation": "2/4", "prongs": 1}]},
            {"id": 1, "genus": 1, "kind": "pseudo_anosov", "expansion": 3.0,
             "boundary": [{"id": 1, "rotation": "1/2", "prongs": 1}]}
        ],
        "annuli": [{"id": 0, "sides": [0, 1], "return_time": 1, "rotations": ["1/2", "1/2"]}],
        "census": {"0": {"1": 3}}
    }"#;

    #[test]
    fn parse_and_canonical_emit() {
        let doc = GraphDocument::parse(SMALL).unwrap();
        let g = doc.to_graph().unwrap();
        assert!(g.validate().is_valid(), "{}", g.validate());
        let emitted = GraphDocument::from_graph(&g);
        let text = emitted.to_json();
        assert!(text.contains("\"1/2\""));
        assert!(!text.contains("2/4"));
        let again = GraphDocument::parse(&text).unwrap();
        assert_eq!(again.to_graph().unwrap(), g);
        assert_eq!(GraphDocument::from_graph(&again.to_graph().unwrap()).to_json(), text);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = GraphDocument::parse("{\n  \"pieces\": [,]\n}").unwrap_err();
        match err {
            DocumentError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 14)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn duplicates_rejected() {
        let text = SMALL.replace("\"id\": 1, \"genus\"", "\"id\": 0, \"genus\"");
        assert!(matches!(
            GraphDocument::parse(&text).unwrap().to_graph(),
            Err(DocumentError::Duplicate { what: "piece", .. })
        ));
    }

    #[test]
    fn bad_rational_rejected() {
        let text = SMALL.replace("\"2/4\"", "\"half\"");
        assert!(GraphDocument::parse(&text).is_err());
    }
}
