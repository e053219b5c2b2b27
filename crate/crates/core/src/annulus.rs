//! Rotation-number calculus for reducing annuli and pseudo-Anosov boundary circles.
//!
//! Rotation numbers are exact rationals here. Both side rotations of an annulus
//! are measured with lifts that are equivariantly isotopic to one common lift of
//! the return map, so "equal rotations" is a meaningful exact test. For a
//! flipped annulus the stored pair refers to the square of the return map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, NumericError, Result};
use crate::graph::{AnnulusId, CircleId, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnulusRecord {
    pub id: AnnulusId,
    pub sides: [CircleId; 2],
    /// Least `n` with `φⁿ(A) = A`.
    pub return_time: u32,
    /// Whether the return map interchanges the two sides.
    pub flipped: bool,
    /// Side rotation numbers, `None` when not supplied.
    pub rotations: Option<[Rational; 2]>,
}

impl AnnulusRecord {
    pub fn new(id: AnnulusId, sides: [CircleId; 2], return_time: u32, flipped: bool) -> Self {
        Self {
            id,
            sides,
            return_time,
            flipped,
            rotations: None,
        }
    }

    pub fn with_rotations(mut self, a: Rational, b: Rational) -> Self {
        self.rotations = Some([a, b]);
        self
    }

    pub fn other_side(&self, circle: CircleId) -> Option<CircleId> {
        match self.sides {
            [a, b] if a == circle => Some(b),
            [a, b] if b == circle => Some(a),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistClass {
    pub flipped: bool,
    pub twisted: bool,
}

impl TwistClass {
    pub fn untwisted(self) -> bool {
        !self.twisted
    }
}

/// Twist/flip class of an annulus.
///
/// Unflipped annuli are untwisted when the two side rotations agree exactly.
/// Flipped annuli are untwisted when the squared return map fixes points on
/// both sides, i.e. its rotation is 0 there.
pub fn classify_annulus(a: &AnnulusRecord) -> Result<TwistClass> {
    let [r0, r1] = a.rotations.ok_or(Error::IndeterminateTwist(a.id))?;
    let twisted = if a.flipped {
        !(r0 == Rational::from_integer(0) && r1 == Rational::from_integer(0))
    } else {
        r0 != r1
    };
    Ok(TwistClass {
        flipped: a.flipped,
        twisted,
    })
}

/// Rotation of the other boundary of a flipped annulus: `-ρ` in lowest terms.
pub fn flip_square_rotation(rho: Rational) -> Rational {
    Rational::new(-*rho.numer(), *rho.denom())
}

/// The two non-conjugate ways of collapsing the degenerate leaves at a
/// boundary circle whose boundary orbit is a fixed point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseChoice {
    #[default]
    Left,
    Right,
}

impl std::str::FromStr for CollapseChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            other => Err(format!("unknown collapse choice `{other}` (expected left or right)")),
        }
    }
}

/// The single periodic orbit left on a boundary-adjusted pseudo-Anosov circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryOrbit {
    /// Period on the circle (reduced denominator of the rotation).
    pub period: u64,
    /// Degenerate leaves collapsed per group: `2m/q - 1`.
    pub collapsed_group_size: u64,
    /// For a fixed boundary point, the collapse that was taken.
    pub choice: Option<CollapseChoice>,
}

/// Boundary orbit of a circle blowing up an `prongs`-prong singularity whose
/// lifted return map has the given rotation number.
pub fn boundary_orbit_structure(prongs: u32, rotation: Rational) -> Result<BoundaryOrbit> {
    boundary_orbit_with_choice(prongs, rotation, CollapseChoice::default())
}

pub fn boundary_orbit_with_choice(
    prongs: u32,
    rotation: Rational,
    choice: CollapseChoice,
) -> Result<BoundaryOrbit> {
    let q = rotation.reduced().denom().unsigned_abs();
    let leaves = 2 * u64::from(prongs);
    if prongs == 0 || leaves % q != 0 {
        return Err(Error::IncompatibleRotation {
            prongs,
            rotation: rotation.to_string(),
        });
    }
    Ok(BoundaryOrbit {
        period: q,
        collapsed_group_size: leaves / q - 1,
        choice: (q == 1).then_some(choice),
    })
}

/// Result of [`rotation_number_numeric`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationEstimate {
    /// Smoothly weighted Birkhoff average of the displacement.
    pub value: f64,
    /// Plain `(Fᴺ(x) - x) / N`.
    pub plain: f64,
    /// `max(1/N, tol)`.
    pub error_bound: f64,
}

const LIFT_CHECK_SAMPLES: usize = 512;

/// Rotation number of a degree-one circle map given by a lift `F` of the line.
///
/// The lift is first sampled on `[0, 1]` to check monotonicity and
/// `F(x + 1) = F(x) + 1`. The returned value is the displacement average
/// weighted by the bump `exp(-1/(t(1-t)))`, which converges much faster than
/// the plain average on smooth maps; the plain average is kept alongside.
pub fn rotation_number_numeric<F>(
    lift: F,
    iterations: u64,
    tol: f64,
) -> Result<RotationEstimate, NumericError>
where
    F: Fn(f64) -> f64,
{
    check_lift(&lift)?;
    let n = iterations.max(1);
    let mut x = 0.0_f64;
    let mut weighted = 0.0;
    let mut weight_sum = 0.0;
    for t in 0..n {
        let y = lift(x);
        let s = (t as f64 + 0.5) / n as f64;
        let w = (-1.0 / (s * (1.0 - s))).exp();
        weighted += w * (y - x);
        weight_sum += w;
        x = y;
    }
    let plain = x / n as f64;
    let value = if weight_sum > 0.0 { weighted / weight_sum } else { plain };
    Ok(RotationEstimate {
        value,
        plain,
        error_bound: (1.0 / n as f64).max(tol),
    })
}

fn check_lift<F: Fn(f64) -> f64>(lift: &F) -> Result<(), NumericError> {
    let mut prev = lift(0.0);
    for i in 1..=LIFT_CHECK_SAMPLES {
        let x = i as f64 / LIFT_CHECK_SAMPLES as f64;
        let y = lift(x);
        if !y.is_finite() || y < prev - 1e-12 {
            return Err(NumericError::InvalidLift { x });
        }
        prev = y;
    }
    for i in 0..16 {
        let x = i as f64 / 16.0;
        if (lift(x + 1.0) - lift(x) - 1.0).abs() > 1e-9 {
            return Err(NumericError::InvalidLift { x });
        }
    }
    Ok(())
}
