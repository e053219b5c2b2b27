//! Thurston–Nielsen component graphs.
//!
//! A [`ComponentGraph`] records a reducible surface map combinatorially: the
//! pieces of the decomposition (genus, boundary circles, dynamical data), the
//! reducing annuli between boundary circles, and the permutations the map
//! induces on pieces, circles and annuli. Nothing here knows about embeddings;
//! everything is up to isotopy.
//!
//! Boundary circles of the ambient surface are circles with no annulus or
//! junction attached. Junctions only appear in condensed graphs, where an
//! annulus has been removed and its two boundary circles glued directly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::annulus::AnnulusRecord;
use crate::error::{Error, Result};

/// Exact rotation numbers and other rationals of the combinatorial layer.
pub type Rational = Ratio<i64>;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident, $label:literal) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($label, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Stable identifier of a surface piece.
    PieceId,
    "N"
);
id_type!(
    /// Stable identifier of a boundary circle.
    CircleId,
    "c"
);
id_type!(
    /// Stable identifier of a reducing annulus.
    AnnulusId,
    "A"
);

/// `2 - 2g - b`.
pub fn euler_characteristic(genus: u32, boundary_count: usize) -> i64 {
    2 - 2 * i64::from(genus) - boundary_count as i64
}

/// Sector decomposition of a fixed point of the quotient map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sectors {
    pub hyperbolic: u32,
    pub parabolic: u32,
}

/// One orbit of branch points of the return map of a finite-order piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchPoint {
    /// Order of the stabilizer; the orbit has `period / local_order` points per piece.
    pub local_order: u32,
    /// Whether the condensed lift rotates locally at this point.
    #[serde(default)]
    pub rotated: bool,
    /// Sectors of the corresponding fixed point downstairs, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sectors: Option<Sectors>,
}

impl BranchPoint {
    pub fn new(local_order: u32) -> Self {
        Self {
            local_order,
            rotated: false,
            sectors: None,
        }
    }
}

/// Which of the four finite-order condensation cases a piece went through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FiniteOrderCase {
    /// No branch points, no untwisted boundary circles.
    NoBranchNoUntwisted,
    /// No branch points, some untwisted boundary circles.
    NoBranchUntwisted,
    /// Branch points, no untwisted boundary circles.
    BranchNoUntwisted,
    /// Branch points and untwisted boundary circles.
    BranchUntwisted,
}

impl FiniteOrderCase {
    pub fn dispatch(has_branch: bool, has_untwisted: bool) -> Self {
        match (has_branch, has_untwisted) {
            (false, false) => Self::NoBranchNoUntwisted,
            (false, true) => Self::NoBranchUntwisted,
            (true, false) => Self::BranchNoUntwisted,
            (true, true) => Self::BranchUntwisted,
        }
    }

    /// Case number 1–4.
    pub fn number(self) -> u8 {
        match self {
            Self::NoBranchNoUntwisted => 1,
            Self::NoBranchUntwisted => 2,
            Self::BranchNoUntwisted => 3,
            Self::BranchUntwisted => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteOrderData {
    /// Order of the return map on the piece.
    pub period: u32,
    #[serde(default)]
    pub branch_points: Vec<BranchPoint>,
    /// Set once condensation has replaced the isometry by its minimal model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condensed: Option<FiniteOrderCase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoAnosovData {
    /// Expansion constant, > 1.
    pub expansion: f64,
    /// Interior periodic orbit counts by period, when known from elsewhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census: Option<BTreeMap<u64, u64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComponentData {
    FiniteOrder(FiniteOrderData),
    PseudoAnosov(PseudoAnosovData),
}

impl ComponentData {
    pub fn finite_order(period: u32, branch_points: Vec<BranchPoint>) -> Self {
        Self::FiniteOrder(FiniteOrderData {
            period,
            branch_points,
            condensed: None,
        })
    }

    pub fn pseudo_anosov(expansion: f64) -> Self {
        Self::PseudoAnosov(PseudoAnosovData {
            expansion,
            census: None,
        })
    }

    pub fn is_pseudo_anosov(&self) -> bool {
        matches!(self, Self::PseudoAnosov(_))
    }

    pub fn as_finite_order(&self) -> Option<&FiniteOrderData> {
        match self {
            Self::FiniteOrder(d) => Some(d),
            Self::PseudoAnosov(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePiece {
    pub id: PieceId,
    pub genus: u32,
    pub boundary: Vec<CircleId>,
    pub data: ComponentData,
}

impl SurfacePiece {
    pub fn euler_characteristic(&self) -> i64 {
        euler_characteristic(self.genus, self.boundary.len())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCircle {
    pub id: CircleId,
    pub owner: PieceId,
    /// Rotation number of the lifted return map; may be inherited from the annulus.
    pub rotation: Option<Rational>,
    /// Prong count of the blown-up singularity (pseudo-Anosov owners only).
    pub prongs: Option<u32>,
}

/// How a boundary circle is attached in the ambient surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attachment {
    Annulus { annulus: AnnulusId, side: usize },
    Junction { index: usize },
    Free,
}

/// Two boundary circles glued directly once the annulus between them is gone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Junction {
    pub circles: [CircleId; 2],
    /// The annulus whose elimination produced the junction.
    pub annulus: AnnulusId,
    pub kind: JunctionKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum JunctionKind {
    /// Two pseudo-Anosov boundaries glued to each other.
    Direct,
    /// A pseudo-Anosov boundary (`circles[0]`) glued onto the bouquet of a
    /// condensed finite-order piece; `center` names the branch orbit at the
    /// bouquet's center, if the piece has branch points.
    Bouquet { center: Option<usize> },
}

/// A permutation stored sparsely; ids without an entry are fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation<T: Ord + Copy>(pub BTreeMap<T, T>);

impl<T: Ord + Copy> Default for Permutation<T> {
    fn default() -> Self {
        Self(BTreeMap::new())
    }
}

impl<T: Ord + Copy> Permutation<T> {
    pub fn apply(&self, x: T) -> T {
        self.0.get(&x).copied().unwrap_or(x)
    }

    pub fn set(&mut self, from: T, to: T) {
        if from == to {
            self.0.remove(&from);
        } else {
            self.0.insert(from, to);
        }
    }

    /// `self` applied `n` times.
    pub fn power(&self, x: T, n: u64) -> T {
        (0..n).fold(x, |y, _| self.apply(y))
    }

    /// Checks bijectivity on `domain`.
    fn is_bijection_on(&self, domain: &BTreeSet<T>) -> bool {
        if !self.0.keys().all(|k| domain.contains(k)) {
            return false;
        }
        let mut seen = BTreeSet::new();
        domain
            .iter()
            .all(|&x| domain.contains(&self.apply(x)) && seen.insert(self.apply(x)))
    }

    fn cycles(&self, domain: &BTreeSet<T>, what: &'static str) -> Result<Vec<Vec<T>>> {
        if !self.is_bijection_on(domain) {
            return Err(Error::InconsistentPermutation { what });
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in domain {
            if seen.contains(&start) {
                continue;
            }
            let mut cycle = vec![start];
            seen.insert(start);
            let mut x = self.apply(start);
            while x != start {
                seen.insert(x);
                cycle.push(x);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        Ok(out)
    }
}

/// Genus and boundary count of the ambient surface, when the caller states them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ambient {
    pub genus: u32,
    pub boundary: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComponentGraph {
    pub pieces: BTreeMap<PieceId, SurfacePiece>,
    pub circles: BTreeMap<CircleId, BoundaryCircle>,
    pub annuli: BTreeMap<AnnulusId, AnnulusRecord>,
    pub junctions: Vec<Junction>,
    pub piece_permutation: Permutation<PieceId>,
    pub annulus_permutation: Permutation<AnnulusId>,
    pub circle_permutation: Permutation<CircleId>,
    pub ambient: Option<Ambient>,
}

/// One cycle of the piece permutation (a φ-component).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceOrbit {
    pub members: Vec<PieceId>,
}

impl PieceOrbit {
    pub fn representative(&self) -> PieceId {
        self.members[0]
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnulusOrbit {
    pub members: Vec<AnnulusId>,
}

impl AnnulusOrbit {
    pub fn representative(&self) -> AnnulusId {
        self.members[0]
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleOrbit {
    pub members: Vec<CircleId>,
}

impl CircleOrbit {
    pub fn representative(&self) -> CircleId {
        self.members[0]
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Cycles of all three permutations, each list ordered by least member id and
/// each cycle starting at its least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDecomposition {
    pub pieces: Vec<PieceOrbit>,
    pub annuli: Vec<AnnulusOrbit>,
    pub circles: Vec<CircleOrbit>,
}

impl OrbitDecomposition {
    pub fn piece_orbit(&self, id: PieceId) -> Option<&PieceOrbit> {
        self.pieces.iter().find(|o| o.members.contains(&id))
    }
    pub fn circle_orbit(&self, id: CircleId) -> Option<&CircleOrbit> {
        self.circles.iter().find(|o| o.members.contains(&id))
    }
    pub fn annulus_orbit(&self, id: AnnulusId) -> Option<&AnnulusOrbit> {
        self.annuli.iter().find(|o| o.members.contains(&id))
    }
}

pub fn orbit_decomposition(graph: &ComponentGraph) -> Result<OrbitDecomposition> {
    graph.orbits()
}

impl ComponentGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a piece with no boundary yet; circles are added with [`Self::add_circle`].
    pub fn add_piece(&mut self, id: PieceId, genus: u32, data: ComponentData) -> &mut Self {
        self.pieces.insert(
            id,
            SurfacePiece {
                id,
                genus,
                boundary: Vec::new(),
                data,
            },
        );
        self
    }

    pub fn add_circle(
        &mut self,
        id: CircleId,
        owner: PieceId,
        rotation: Option<Rational>,
        prongs: Option<u32>,
    ) -> &mut Self {
        self.circles.insert(
            id,
            BoundaryCircle {
                id,
                owner,
                rotation,
                prongs,
            },
        );
        if let Some(p) = self.pieces.get_mut(&owner) {
            if !p.boundary.contains(&id) {
                p.boundary.push(id);
            }
        }
        self
    }

    pub fn add_annulus(&mut self, annulus: AnnulusRecord) -> &mut Self {
        self.annuli.insert(annulus.id, annulus);
        self
    }

    pub fn map_piece(&mut self, from: PieceId, to: PieceId) -> &mut Self {
        self.piece_permutation.set(from, to);
        self
    }

    pub fn map_circle(&mut self, from: CircleId, to: CircleId) -> &mut Self {
        self.circle_permutation.set(from, to);
        self
    }

    pub fn map_annulus(&mut self, from: AnnulusId, to: AnnulusId) -> &mut Self {
        self.annulus_permutation.set(from, to);
        self
    }

    pub fn piece(&self, id: PieceId) -> Option<&SurfacePiece> {
        self.pieces.get(&id)
    }

    pub fn circle(&self, id: CircleId) -> Option<&BoundaryCircle> {
        self.circles.get(&id)
    }

    pub fn annulus(&self, id: AnnulusId) -> Option<&AnnulusRecord> {
        self.annuli.get(&id)
    }

    pub fn owner_data(&self, circle: CircleId) -> Option<&ComponentData> {
        self.circles
            .get(&circle)
            .and_then(|c| self.pieces.get(&c.owner))
            .map(|p| &p.data)
    }

    pub fn attachment(&self, circle: CircleId) -> Attachment {
        for a in self.annuli.values() {
            if let Some(side) = a.sides.iter().position(|&s| s == circle) {
                return Attachment::Annulus {
                    annulus: a.id,
                    side,
                };
            }
        }
        for (index, j) in self.junctions.iter().enumerate() {
            if j.circles.contains(&circle) {
                return Attachment::Junction { index };
            }
        }
        Attachment::Free
    }

    /// Rotation of the circle's return map: its own value, else the annulus side's.
    pub fn effective_rotation(&self, circle: CircleId) -> Option<Rational> {
        let own = self.circles.get(&circle)?.rotation;
        if own.is_some() {
            return own;
        }
        match self.attachment(circle) {
            Attachment::Annulus { annulus, side } => {
                self.annuli[&annulus].rotations.map(|r| r[side])
            }
            _ => None,
        }
    }

    /// Sum of piece Euler characteristics; annuli contribute nothing.
    pub fn total_euler_characteristic(&self) -> i64 {
        self.pieces.values().map(SurfacePiece::euler_characteristic).sum()
    }

    pub fn free_boundary_count(&self) -> usize {
        self.circles
            .keys()
            .filter(|&&c| self.attachment(c) == Attachment::Free)
            .count()
    }

    /// Genus of the glued surface, assuming it is connected.
    pub fn ambient_genus(&self) -> i64 {
        (2 - self.total_euler_characteristic() - self.free_boundary_count() as i64) / 2
    }

    pub fn orbits(&self) -> Result<OrbitDecomposition> {
        let pieces: BTreeSet<_> = self.pieces.keys().copied().collect();
        let annuli: BTreeSet<_> = self.annuli.keys().copied().collect();
        let circles: BTreeSet<_> = self.circles.keys().copied().collect();
        Ok(OrbitDecomposition {
            pieces: self
                .piece_permutation
                .cycles(&pieces, "pieces")?
                .into_iter()
                .map(|members| PieceOrbit { members })
                .collect(),
            annuli: self
                .annulus_permutation
                .cycles(&annuli, "annuli")?
                .into_iter()
                .map(|members| AnnulusOrbit { members })
                .collect(),
            circles: self
                .circle_permutation
                .cycles(&circles, "circles")?
                .into_iter()
                .map(|members| CircleOrbit { members })
                .collect(),
        })
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// What a validation entry is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "id")]
pub enum Subject {
    Graph,
    Piece(PieceId),
    Circle(CircleId),
    Annulus(AnnulusId),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Graph => f.write_str("graph"),
            Subject::Piece(p) => write!(f, "piece {p}"),
            Subject::Circle(c) => write!(f, "circle {c}"),
            Subject::Annulus(a) => write!(f, "annulus {a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub subject: Subject,
    /// Short stable tag, e.g. `euler_char < 0`.
    pub rule: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, subject: Subject, rule: &'static str, detail: impl Into<String>) {
        self.violations.push(Violation {
            subject,
            rule,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for v in &self.violations {
            writeln!(f, "{}: {} ({})", v.subject, v.rule, v.detail)?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of a component graph. Never fails;
/// problems become report entries.
pub fn validate(graph: &ComponentGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_pieces(graph, &mut report);
    check_circles(graph, &mut report);
    check_attachments(graph, &mut report);

    let orbits = match graph.orbits() {
        Ok(o) => Some(o),
        Err(Error::InconsistentPermutation { what }) => {
            report.push(Subject::Graph, "permutation", format!("{what} permutation is not a bijection"));
            None
        }
        Err(e) => {
            report.push(Subject::Graph, "permutation", e.to_string());
            None
        }
    };
    if let Some(orbits) = orbits {
        check_equivariance(graph, &orbits, &mut report);
        check_orbit_uniformity(graph, &orbits, &mut report);
        check_annuli(graph, &orbits, &mut report);
        check_rotations(graph, &orbits, &mut report);
        check_quotients(graph, &orbits, &mut report);
    }
    check_ambient(graph, &mut report);
    report
}

fn check_pieces(graph: &ComponentGraph, report: &mut ValidationReport) {
    for piece in graph.pieces.values() {
        let chi = piece.euler_characteristic();
        if chi >= 0 {
            report.push(
                Subject::Piece(piece.id),
                "euler_char < 0",
                format!("genus {} with {} boundary circles has Euler characteristic {chi}", piece.genus, piece.boundary.len()),
            );
        }
        match &piece.data {
            ComponentData::FiniteOrder(fo) => {
                if fo.period == 0 {
                    report.push(Subject::Piece(piece.id), "period >= 1", "finite-order period is 0");
                    continue;
                }
                for b in &fo.branch_points {
                    if b.local_order < 2 || fo.period % b.local_order != 0 {
                        report.push(
                            Subject::Piece(piece.id),
                            "branch order divides period",
                            format!("local order {} vs period {}", b.local_order, fo.period),
                        );
                    }
                    if let Some(s) = b.sectors {
                        if (s.hyperbolic + s.parabolic) % 2 != 0 {
                            report.push(Subject::Piece(piece.id), "sector parity", "h - p must be even");
                        }
                    }
                }
                if fo.branch_points.iter().all(|b| b.local_order >= 2 && fo.period % b.local_order == 0) {
                    if let Err(e) = crate::canon::quotient_euler(chi, fo.period, &fo.branch_points) {
                        report.push(Subject::Piece(piece.id), "riemann-hurwitz", e.to_string());
                    }
                }
            }
            ComponentData::PseudoAnosov(pa) => {
                if !(pa.expansion.is_finite() && pa.expansion > 1.0) {
                    report.push(
                        Subject::Piece(piece.id),
                        "expansion > 1",
                        format!("expansion constant {}", pa.expansion),
                    );
                }
                if let Some(census) = &pa.census {
                    if census.contains_key(&0) {
                        report.push(Subject::Piece(piece.id), "census periods >= 1", "census lists period 0");
                    }
                }
            }
        }
    }
}

fn check_circles(graph: &ComponentGraph, report: &mut ValidationReport) {
    for circle in graph.circles.values() {
        let Some(owner) = graph.pieces.get(&circle.owner) else {
            report.push(Subject::Circle(circle.id), "owner exists", format!("owner {} missing", circle.owner));
            continue;
        };
        if !owner.boundary.contains(&circle.id) {
            report.push(Subject::Circle(circle.id), "owner lists circle", format!("{} does not list it", owner.id));
        }
        match &owner.data {
            ComponentData::PseudoAnosov(_) => match circle.prongs {
                None | Some(0) => report.push(Subject::Circle(circle.id), "prongs >= 1", "pseudo-Anosov boundary needs a prong count"),
                Some(m) => {
                    if let Some(rho) = graph.effective_rotation(circle.id) {
                        if (2 * i64::from(m)) % rho.denom() != 0 {
                            report.push(
                                Subject::Circle(circle.id),
                                "rotation compatible with prongs",
                                format!("rotation {rho} on a {m}-prong boundary"),
                            );
                        }
                    }
                }
            },
            ComponentData::FiniteOrder(_) => {
                if circle.prongs.is_some() {
                    report.push(Subject::Circle(circle.id), "no prongs on finite-order", "finite-order boundary given a prong count");
                }
            }
        }
    }
    for piece in graph.pieces.values() {
        let mut seen = BTreeSet::new();
        for c in &piece.boundary {
            if !seen.insert(*c) {
                report.push(Subject::Piece(piece.id), "distinct boundary", format!("{c} listed twice"));
            }
            match graph.circles.get(c) {
                None => report.push(Subject::Piece(piece.id), "circle exists", format!("{c} missing")),
                Some(circle) if circle.owner != piece.id => {
                    report.push(Subject::Piece(piece.id), "owner lists circle", format!("{c} owned by {}", circle.owner))
                }
                _ => {}
            }
        }
    }
}

fn check_attachments(graph: &ComponentGraph, report: &mut ValidationReport) {
    let mut uses: BTreeMap<CircleId, usize> = BTreeMap::new();
    for a in graph.annuli.values() {
        if a.return_time == 0 {
            report.push(Subject::Annulus(a.id), "return_time >= 1", "return time 0");
        }
        if a.sides[0] == a.sides[1] {
            report.push(Subject::Annulus(a.id), "distinct sides", "both sides on one circle");
        }
        for s in a.sides {
            if !graph.circles.contains_key(&s) {
                report.push(Subject::Annulus(a.id), "side circle exists", format!("{s} missing"));
            }
            *uses.entry(s).or_default() += 1;
        }
    }
    for j in &graph.junctions {
        for s in j.circles {
            *uses.entry(s).or_default() += 1;
        }
    }
    for (c, n) in uses {
        if n > 1 {
            report.push(Subject::Circle(c), "single attachment", format!("attached {n} times"));
        }
    }
}

fn check_equivariance(graph: &ComponentGraph, orbits: &OrbitDecomposition, report: &mut ValidationReport) {
    for circle in graph.circles.values() {
        let image = graph.circle_permutation.apply(circle.id);
        let owner_image = graph.piece_permutation.apply(circle.owner);
        if let Some(img) = graph.circles.get(&image) {
            if img.owner != owner_image {
                report.push(
                    Subject::Circle(circle.id),
                    "permutations consistent",
                    format!("image {image} lies on {} but the owner maps to {owner_image}", img.owner),
                );
            }
        }
    }
    for a in graph.annuli.values() {
        let image = graph.annulus_permutation.apply(a.id);
        let Some(img) = graph.annuli.get(&image) else { continue };
        let mapped: BTreeSet<_> = a.sides.iter().map(|&s| graph.circle_permutation.apply(s)).collect();
        let target: BTreeSet<_> = img.sides.iter().copied().collect();
        if mapped != target {
            report.push(
                Subject::Annulus(a.id),
                "permutations consistent",
                format!("sides map to {mapped:?}, not to the sides of {image}"),
            );
            continue;
        }
        let len = orbits.annulus_orbit(a.id).map_or(0, AnnulusOrbit::len) as u64;
        if u64::from(a.return_time) != len {
            report.push(
                Subject::Annulus(a.id),
                "return time = orbit length",
                format!("return time {} but annulus orbit length {len}", a.return_time),
            );
            continue;
        }
        let back = graph.circle_permutation.power(a.sides[0], len);
        let flipped = back == a.sides[1];
        if back != a.sides[0] && !flipped {
            report.push(Subject::Annulus(a.id), "permutations consistent", "return map does not preserve the annulus sides");
        } else if flipped != a.flipped {
            report.push(
                Subject::Annulus(a.id),
                "flip flag",
                format!("recorded flipped={} but the return map {} the sides", a.flipped, if flipped { "swaps" } else { "fixes" }),
            );
        }
    }
    for j in &graph.junctions {
        let image = [
            graph.circle_permutation.apply(j.circles[0]),
            graph.circle_permutation.apply(j.circles[1]),
        ];
        let ok = graph
            .junctions
            .iter()
            .any(|k| k.circles == image || k.circles == [image[1], image[0]]);
        if !ok {
            report.push(Subject::Circle(j.circles[0]), "permutations consistent", "junction image is not a junction");
        }
    }
}

fn check_orbit_uniformity(graph: &ComponentGraph, orbits: &OrbitDecomposition, report: &mut ValidationReport) {
    for orbit in &orbits.pieces {
        let rep = &graph.pieces[&orbit.representative()];
        for id in &orbit.members[1..] {
            let p = &graph.pieces[id];
            let same = p.genus == rep.genus
                && p.boundary.len() == rep.boundary.len()
                && match (&p.data, &rep.data) {
                    (ComponentData::FiniteOrder(a), ComponentData::FiniteOrder(b)) => {
                        a.period == b.period && a.branch_points == b.branch_points
                    }
                    (ComponentData::PseudoAnosov(a), ComponentData::PseudoAnosov(b)) => {
                        (a.expansion - b.expansion).abs() <= 1e-9 * b.expansion.abs()
                    }
                    _ => false,
                };
            if !same {
                report.push(Subject::Piece(*id), "orbit uniform", format!("differs from {} in the same orbit", rep.id));
            }
        }
    }
    for orbit in &orbits.annuli {
        let rep = &graph.annuli[&orbit.representative()];
        for id in &orbit.members[1..] {
            let a = &graph.annuli[id];
            if a.flipped != rep.flipped || a.return_time != rep.return_time || a.rotations != rep.rotations {
                report.push(Subject::Annulus(*id), "orbit uniform", format!("differs from {} in the same orbit", rep.id));
            }
        }
    }
}

fn check_annuli(graph: &ComponentGraph, _orbits: &OrbitDecomposition, report: &mut ValidationReport) {
    for a in graph.annuli.values() {
        if let Some([r0, r1]) = a.rotations {
            if a.flipped && r1 != -r0 {
                report.push(
                    Subject::Annulus(a.id),
                    "flipped rotations negate",
                    format!("flipped annulus rotations ({r0}, {r1}) are not (ρ, -ρ)"),
                );
            }
            for (side, r) in a.sides.iter().zip([r0, r1]) {
                if let Some(own) = graph.circles.get(side).and_then(|c| c.rotation) {
                    if !(own - r).fract().is_zero() {
                        report.push(
                            Subject::Circle(*side),
                            "rotation agrees with annulus",
                            format!("circle says {own}, annulus side says {r}"),
                        );
                    }
                }
            }
        }
    }
}

fn check_rotations(graph: &ComponentGraph, orbits: &OrbitDecomposition, report: &mut ValidationReport) {
    for orbit in &orbits.circles {
        let r = orbit.len() as i64;
        for &c in &orbit.members {
            let Some(circle) = graph.circles.get(&c) else { continue };
            let Some(piece) = graph.pieces.get(&circle.owner) else { continue };
            let ComponentData::FiniteOrder(fo) = &piece.data else { continue };
            let Some(rho) = graph.effective_rotation(c) else { continue };
            let ell = orbits.piece_orbit(piece.id).map_or(1, PieceOrbit::len) as i64;
            let full = ell * i64::from(fo.period);
            // peripheral points of a finite-order piece are regular
            if full % r != 0 || *rho.denom() != full / r {
                report.push(
                    Subject::Circle(c),
                    "finite-order boundary is regular",
                    format!("rotation {rho} on a circle of orbit length {r} cannot give period {full}"),
                );
            }
        }
    }
}

/// The quotient of a finite-order piece by its return map must be a surface:
/// `χ* = 2 - 2g* - b*` with `g* ≥ 0`, where `b*` counts boundary circle orbits.
fn check_quotients(graph: &ComponentGraph, orbits: &OrbitDecomposition, report: &mut ValidationReport) {
    for piece in graph.pieces.values() {
        let ComponentData::FiniteOrder(fo) = &piece.data else { continue };
        let Ok(chi_star) = crate::canon::quotient_euler(piece.euler_characteristic(), fo.period, &fo.branch_points)
        else {
            continue;
        };
        let b_star = piece
            .boundary
            .iter()
            .map(|c| orbits.circle_orbit(*c).map_or(*c, CircleOrbit::representative))
            .collect::<BTreeSet<_>>()
            .len();
        let twice_genus = 2 - chi_star - b_star as i64;
        if twice_genus < 0 || twice_genus % 2 != 0 {
            report.push(
                Subject::Piece(piece.id),
                "quotient is a surface",
                format!("quotient Euler characteristic {chi_star} with {b_star} boundary orbits"),
            );
        }
    }
}

fn check_ambient(graph: &ComponentGraph, report: &mut ValidationReport) {
    if graph.pieces.is_empty() {
        return;
    }
    if let Some(amb) = graph.ambient {
        let expected = euler_characteristic(amb.genus, amb.boundary as usize);
        let chi = graph.total_euler_characteristic();
        if chi != expected {
            report.push(
                Subject::Graph,
                "euler additivity",
                format!("pieces sum to {chi}, ambient genus {} with {} boundary circles has {expected}", amb.genus, amb.boundary),
            );
        }
        if graph.free_boundary_count() != amb.boundary as usize {
            report.push(
                Subject::Graph,
                "ambient boundary",
                format!("{} free circles, ambient surface has {}", graph.free_boundary_count(), amb.boundary),
            );
        }
    }
}

/// Reduces a rational rotation modulo 1 into `[0, 1)`.
pub fn rotation_mod_one(r: Rational) -> Rational {
    let f = r - r.floor();
    Rational::new(*f.numer(), *f.denom())
}

/// Smallest positive `q` with `q * r` integral.
pub fn rotation_denominator(r: Rational) -> u64 {
    let reduced = Rational::new(*r.numer(), *r.denom());
    reduced.denom().unsigned_abs()
}

#[allow(dead_code)]
pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::AnnulusRecord;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn euler_characteristic_examples() {
        assert_eq!(euler_characteristic(0, 3), -1);
        assert_eq!(euler_characteristic(1, 0), 0);
        assert_eq!(euler_characteristic(5, 0), -8);
    }

    #[test]
    fn closed_genus_two_alone_is_valid() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 2, ComponentData::pseudo_anosov(2.5));
        let report = validate(&g);
        assert!(report.is_valid(), "{report}");
        assert_eq!(g.total_euler_characteristic(), -2);
    }

    #[test]
    fn annulus_shaped_component_is_rejected() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 0, ComponentData::pseudo_anosov(2.0));
        g.add_circle(CircleId(0), PieceId(0), Some(r(0, 1)), Some(1));
        g.add_circle(CircleId(1), PieceId(0), Some(r(0, 1)), Some(1));
        let report = validate(&g);
        assert!(report.mentions("euler_char < 0"), "{report}");
        assert!(report.violations.iter().any(|v| v.subject == Subject::Piece(PieceId(0))));
    }

    #[test]
    fn orbit_decomposition_of_identity_and_swap() {
        let mut g = ComponentGraph::new();
        for i in 0..3 {
            g.add_piece(PieceId(i), 2, ComponentData::pseudo_anosov(2.0));
        }
        let o = orbit_decomposition(&g).unwrap();
        assert_eq!(o.pieces.len(), 3);
        assert!(o.pieces.iter().all(|p| p.len() == 1));

        g.map_piece(PieceId(1), PieceId(2)).map_piece(PieceId(2), PieceId(1));
        let o = orbit_decomposition(&g).unwrap();
        assert_eq!(o.pieces.len(), 2);
        assert_eq!(o.pieces[1].members, vec![PieceId(1), PieceId(2)]);
    }

    #[test]
    fn non_bijective_permutation_is_structural_error() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 2, ComponentData::pseudo_anosov(2.0));
        g.add_piece(PieceId(1), 2, ComponentData::pseudo_anosov(2.0));
        g.map_piece(PieceId(0), PieceId(1));
        assert!(matches!(
            orbit_decomposition(&g),
            Err(Error::InconsistentPermutation { what: "pieces" })
        ));
        assert!(validate(&g).mentions("permutation"));
    }

    #[test]
    fn flip_flag_must_match_the_permutation() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 1, ComponentData::pseudo_anosov(3.0));
        g.add_circle(CircleId(0), PieceId(0), None, Some(2));
        g.add_circle(CircleId(1), PieceId(0), None, Some(2));
        g.map_circle(CircleId(0), CircleId(1)).map_circle(CircleId(1), CircleId(0));
        let mut a = AnnulusRecord::new(AnnulusId(0), [CircleId(0), CircleId(1)], 1, false);
        a.rotations = Some([r(0, 1), r(0, 1)]);
        g.add_annulus(a.clone());
        assert!(validate(&g).mentions("flip flag"));

        a.flipped = true;
        g.add_annulus(a);
        let report = validate(&g);
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn finite_order_peripheral_points_must_be_regular() {
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 2, ComponentData::finite_order(3, vec![]));
        g.add_circle(CircleId(0), PieceId(0), Some(r(1, 2)), None);
        assert!(validate(&g).mentions("finite-order boundary is regular"));
        g.circles.get_mut(&CircleId(0)).unwrap().rotation = Some(r(2, 3));
        // genus 2, one circle: chi = -3, quotient chi = -1
        let report = validate(&g);
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn quotient_must_be_a_surface() {
        // an involution of a one-holed torus fixes three points, not one
        let mut g = ComponentGraph::new();
        g.add_piece(PieceId(0), 1, ComponentData::finite_order(2, vec![BranchPoint::new(2)]));
        g.add_circle(CircleId(0), PieceId(0), Some(r(1, 2)), None);
        assert!(validate(&g).mentions("quotient is a surface"));
        g.pieces.get_mut(&PieceId(0)).unwrap().data = ComponentData::finite_order(2, vec![BranchPoint::new(2); 3]);
        let report = validate(&g);
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn rotation_helpers() {
        assert_eq!(rotation_mod_one(r(-1, 3)), r(2, 3));
        assert_eq!(rotation_denominator(r(4, 2)), 1);
        assert_eq!(rotation_denominator(r(3, 6)), 2);
    }
}
