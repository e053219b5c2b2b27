//! Periodic orbit records and inventories.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::graph::{AnnulusId, CircleId, ComponentData, ComponentGraph, PieceId};

/// The six kinds of periodic orbits a condensed map can have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKind {
    InteriorPA,
    BoundaryPA,
    PeripheralPA,
    FiniteOrderRegular,
    FiniteOrderBranch,
    FlipAnnulusInterior,
}

impl OrbitKind {
    pub fn short(self) -> &'static str {
        match self {
            Self::InteriorPA => "interior_pa",
            Self::BoundaryPA => "boundary_pa",
            Self::PeripheralPA => "peripheral_pa",
            Self::FiniteOrderRegular => "fo_regular",
            Self::FiniteOrderBranch => "fo_branch",
            Self::FlipAnnulusInterior => "flip_interior",
        }
    }
}

impl fmt::Display for OrbitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// Fixed point index of a point of an orbit under its period.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexValue {
    Integer(i64),
    /// Known to be nonzero without a closed form.
    NonzeroSymbolic,
    /// Not an isolated fixed point (continua of a finite-order piece).
    Undefined,
}

impl IndexValue {
    pub fn is_nonzero(self) -> Option<bool> {
        match self {
            Self::Integer(i) => Some(i != 0),
            Self::NonzeroSymbolic => Some(true),
            Self::Undefined => None,
        }
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Integer(i) => write!(f, "{i}"),
            Self::NonzeroSymbolic => f.write_str("nonzero"),
            Self::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for IndexValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Integer(i) => s.serialize_i64(*i),
            Self::NonzeroSymbolic => s.serialize_str("nonzero"),
            Self::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for IndexValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(i) => Ok(Self::Integer(i)),
            Repr::Str(s) if s == "nonzero" => Ok(Self::NonzeroSymbolic),
            Repr::Str(s) if s == "undefined" => Ok(Self::Undefined),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("unknown index `{s}`"))),
        }
    }
}

/// Where an orbit lives, named by the least id of the relevant orbit of
/// pieces, circles or annuli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "on")]
pub enum Carrier {
    Piece { piece: PieceId },
    Circle { circle: CircleId },
    Annulus { annulus: AnnulusId, slot: u8 },
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Piece { piece } => write!(f, "{piece}"),
            Self::Circle { circle } => write!(f, "{circle}"),
            Self::Annulus { annulus, slot } => write!(f, "{annulus}#{slot}"),
        }
    }
}

/// An orbit that was identified into another during condensation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorbed {
    pub kind: OrbitKind,
    pub period: u64,
    pub carrier: Carrier,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub id: u32,
    pub kind: OrbitKind,
    pub period: u64,
    pub index: IndexValue,
    /// Points of the orbit on each piece, circle or annulus it meets.
    pub points_per_orbit: u64,
    /// Number of distinct orbits this record stands for (census entries).
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub multiplicity: u64,
    pub carrier: Carrier,
    /// A fixed continuum of the finite-order model rather than a single orbit.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub continuum: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub absorbed: Vec<Absorbed>,
}

fn one() -> u64 {
    1
}

fn is_one(n: &u64) -> bool {
    *n == 1
}

impl OrbitRecord {
    pub(crate) fn new(kind: OrbitKind, period: u64, index: IndexValue, points_per_orbit: u64, carrier: Carrier) -> Self {
        Self {
            id: 0,
            kind,
            period,
            index,
            points_per_orbit,
            multiplicity: 1,
            carrier,
            continuum: false,
            absorbed: Vec::new(),
        }
    }

    /// `type:period:index`, as used in graph labels.
    pub fn label(&self) -> String {
        format!("{}:{}:{}", self.kind, self.period, self.index)
    }
}

/// Interior orbit counts by piece and period, supplied from outside.
pub type Census = BTreeMap<PieceId, BTreeMap<u64, u64>>;

/// Orbits up to some period, with per-period counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Inventory {
    pub records: Vec<OrbitRecord>,
    /// Pseudo-Anosov piece orbits (by representative) whose interior orbits are unknown.
    pub census_absent: Vec<PieceId>,
    /// Number of orbits of each period, interior census included.
    pub counts: BTreeMap<u64, u64>,
}

impl Inventory {
    pub fn is_exact(&self) -> bool {
        self.census_absent.is_empty()
    }
}

/// Numbers records consecutively in order.
pub(crate) fn renumber(records: &mut [OrbitRecord]) {
    for (i, r) in records.iter_mut().enumerate() {
        r.id = i as u32;
    }
}

/// Cuts structural records at `max_period` and appends interior census records.
pub(crate) fn assemble(
    graph: &ComponentGraph,
    structural: &[OrbitRecord],
    max_period: u64,
    census: Option<&Census>,
) -> Inventory {
    let mut records: Vec<OrbitRecord> = structural
        .iter()
        .filter(|r| r.period <= max_period)
        .cloned()
        .collect();
    let mut census_absent = Vec::new();
    if let Ok(orbits) = graph.orbits() {
        for orbit in &orbits.pieces {
            let rep = orbit.representative();
            let ComponentData::PseudoAnosov(pa) = &graph.pieces[&rep].data else { continue };
            let supplied = census.and_then(|c| orbit.members.iter().find_map(|m| c.get(m)));
            let Some(table) = supplied.or(pa.census.as_ref()) else {
                census_absent.push(rep);
                continue;
            };
            let ell = orbit.len() as u64;
            for (&period, &count) in table.iter() {
                if count == 0 || period == 0 || period > max_period {
                    continue;
                }
                let mut rec = OrbitRecord::new(
                    OrbitKind::InteriorPA,
                    period,
                    IndexValue::NonzeroSymbolic,
                    if period % ell == 0 { period / ell } else { period },
                    Carrier::Piece { piece: rep },
                );
                rec.multiplicity = count;
                records.push(rec);
            }
        }
    }
    let mut counts = BTreeMap::new();
    for r in &records {
        *counts.entry(r.period).or_insert(0) += r.multiplicity;
    }
    // structural ids are kept; census records continue the numbering
    let next = structural.iter().map(|r| r.id + 1).max().unwrap_or(0);
    for (r, id) in records.iter_mut().filter(|r| r.kind == OrbitKind::InteriorPA).zip(next..) {
        r.id = id;
    }
    Inventory {
        records,
        census_absent,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_value_json() {
        let v: Vec<IndexValue> = serde_json::from_str(r#"[-3, "nonzero", "undefined"]"#).unwrap();
        assert_eq!(
            v,
            vec![IndexValue::Integer(-3), IndexValue::NonzeroSymbolic, IndexValue::Undefined]
        );
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[-3,"nonzero","undefined"]"#);
        assert!(serde_json::from_str::<IndexValue>(r#""zero""#).is_err());
    }

    #[test]
    fn labels() {
        let r = OrbitRecord::new(
            OrbitKind::FiniteOrderBranch,
            1,
            IndexValue::Integer(-3),
            1,
            Carrier::Piece { piece: PieceId(0) },
        );
        assert_eq!(r.label(), "fo_branch:1:-3");
    }
}
