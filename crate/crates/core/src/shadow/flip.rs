//! Maps of the closed annulus `S¹ × [-1, 1]` that interchange the two boundaries.
//!
//! The annulus is coordinatized by `x ∈ ℝ/ℤ` and `y ∈ [-1, 1]`, and
//! `S(x, y) = (-x, -y)` is the orientation-preserving involution swapping the
//! boundary circles `y = 1` and `y = -1`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::linear::Vec2;
use super::perturbed::solve2;
use super::winding::winding_index;
use crate::annulus::rotation_number_numeric;
use crate::error::NumericError;

/// A degree-one circle map lift `x + shift + Σ aⱼ sin(2πjx + φⱼ) / (2πj)`.
///
/// Monotone as long as `Σ |aⱼ| < 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleLift {
    pub shift: f64,
    /// `(aⱼ, φⱼ)` for `j = 1, 2, ...`.
    pub harmonics: Vec<(f64, f64)>,
}

impl CircleLift {
    pub fn rigid(shift: f64) -> Self {
        Self {
            shift,
            harmonics: Vec::new(),
        }
    }

    /// Random lift with `harmonics` terms whose amplitudes sum to at most `0.9`.
    pub fn random<R: Rng>(rng: &mut R, harmonics: usize) -> Self {
        let shift = rng.gen_range(-0.5..0.5);
        let mut terms: Vec<(f64, f64)> = (0..harmonics)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU)))
            .collect();
        let total: f64 = terms.iter().map(|t| t.0.abs()).sum();
        let budget = rng.gen_range(0.1..0.9);
        if total > 0.0 {
            for t in &mut terms {
                t.0 *= budget / total;
            }
        }
        Self { shift, harmonics: terms }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let wobble: f64 = self
            .harmonics
            .iter()
            .enumerate()
            .map(|(i, &(a, phase))| {
                let j = (i + 1) as f64;
                a * (TAU * j * x + phase).sin() / (TAU * j)
            })
            .sum();
        x + self.shift + wobble
    }

    pub fn derivative(&self, x: f64) -> f64 {
        1.0 + self
            .harmonics
            .iter()
            .enumerate()
            .map(|(i, &(a, phase))| a * (TAU * (i + 1) as f64 * x + phase).cos())
            .sum::<f64>()
    }
}

/// Boundary data of `f = S ∘ h`, where `h` preserves each boundary circle and
/// acts on `y = 1` by `upper` and on `y = -1` by `lower`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationProfile {
    pub upper: CircleLift,
    pub lower: CircleLift,
}

impl RotationProfile {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        Self {
            upper: CircleLift::random(&mut rng, n),
            lower: CircleLift::random(&mut rng, m),
        }
    }

    /// Lift of `f²` on `y = 1`: `x ↦ -lower(-upper(x))`.
    pub fn square_on_upper(&self, x: f64) -> f64 {
        -self.lower.apply(-self.upper.apply(x))
    }

    /// Lift of `f²` on `y = -1`: `x ↦ -upper(-lower(x))`.
    pub fn square_on_lower(&self, x: f64) -> f64 {
        -self.upper.apply(-self.lower.apply(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationPair {
    pub upper: f64,
    pub lower: f64,
    /// `|ρ(upper) + ρ(lower)|`.
    pub defect: f64,
}

/// Rotation numbers of `f²` on both boundaries.
pub fn boundary_rotations(profile: &RotationProfile, iterations: u64) -> Result<RotationPair, NumericError> {
    let upper = rotation_number_numeric(|x| profile.square_on_upper(x), iterations, 0.0)?.value;
    let lower = rotation_number_numeric(|x| profile.square_on_lower(x), iterations, 0.0)?.value;
    Ok(RotationPair {
        upper,
        lower,
        defect: (upper + lower).abs(),
    })
}

/// The vector field `(κ sin 2πx (1 - y²), -μ y (1 - y²))`, tangent to both boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowParams {
    pub kappa: f64,
    pub mu: f64,
    /// RK4 steps for the time-one map.
    pub steps: u32,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            kappa: 0.15,
            mu: 1.0,
            steps: 64,
        }
    }
}

impl FlowParams {
    fn field(&self, p: Vec2) -> Vec2 {
        let w = 1.0 - p[1] * p[1];
        [self.kappa * (TAU * p[0]).sin() * w, -self.mu * p[1] * w]
    }

    /// Time-one map of the flow.
    pub fn time_one(&self, mut p: Vec2) -> Vec2 {
        let h = 1.0 / f64::from(self.steps.max(1));
        let add = |a: Vec2, b: Vec2, s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
        for _ in 0..self.steps.max(1) {
            let k1 = self.field(p);
            let k2 = self.field(add(p, k1, h / 2.0));
            let k3 = self.field(add(p, k2, h / 2.0));
            let k4 = self.field(add(p, k3, h));
            p = [
                p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
        }
        p
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// `g = S ∘ ψ ∘ a`, where `ψ` is the time-one flow and `a(x, y) = (a_y(x), y)`
/// interpolates from the identity on `|y| ≤ 1/4` to the boundary lifts at `y = ±1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlipMap {
    pub flow: FlowParams,
    pub profile: RotationProfile,
}

impl FlipMap {
    fn interpolate(&self, p: Vec2) -> Vec2 {
        let y = p[1];
        let t = smoothstep((y.abs() - 0.25) / 0.75);
        if t == 0.0 {
            return p;
        }
        let boundary = if y > 0.0 { &self.profile.upper } else { &self.profile.lower };
        [(1.0 - t) * p[0] + t * boundary.apply(p[0]), y]
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        let q = self.flow.time_one(self.interpolate(p));
        [-q[0], -q[1]]
    }

    /// `g(p) - p` with the `x` difference reduced to `(-1/2, 1/2]`.
    fn displacement(&self, p: Vec2) -> Vec2 {
        let q = self.apply(p);
        let dx = q[0] - p[0];
        [dx - dx.round(), q[1] - p[1]]
    }

    fn newton(&self, mut p: Vec2) -> Option<Vec2> {
        const H: f64 = 1e-7;
        for _ in 0..50 {
            let r = self.displacement(p);
            if r[0].abs().max(r[1].abs()) < 1e-13 {
                let x = p[0].rem_euclid(1.0);
                return Some([if 1.0 - x < 1e-9 { 0.0 } else { x }, p[1]]);
            }
            let mut j = [[0.0; 2]; 2];
            for c in 0..2 {
                let mut e = p;
                e[c] += H;
                let re = self.displacement(e);
                let mut d = re[0] - r[0];
                d -= d.round();
                j[0][c] = d / H;
                j[1][c] = (re[1] - r[1]) / H;
            }
            let s = solve2(&j, r);
            if !(s[0].is_finite() && s[1].is_finite()) {
                return None;
            }
            p = [p[0] - s[0], p[1] - s[1]];
            if p[1].abs() >= 1.0 {
                return None;
            }
        }
        None
    }

    /// Distinct interior fixed points found from a `grid × grid` set of Newton seeds.
    pub fn interior_fixed_points(&self, grid: usize) -> Vec<Vec2> {
        let mut found: Vec<Vec2> = Vec::new();
        for i in 0..grid {
            for j in 0..grid {
                let seed = [(i as f64 + 0.5) / grid as f64, -1.0 + 2.0 * (j as f64 + 0.5) / grid as f64];
                if let Some(p) = self.newton(seed) {
                    let dup = found.iter().any(|q| {
                        let dx = p[0] - q[0];
                        (dx - dx.round()).abs() < 1e-8 && (p[1] - q[1]).abs() < 1e-8
                    });
                    if !dup {
                        found.push(p);
                    }
                }
            }
        }
        found.sort_by(|a, b| a[0].total_cmp(&b[0]));
        found
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointRecord {
    pub point: Vec2,
    pub index: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FixedPointCertificate {
    Certified {
        points: Vec<FixedPointRecord>,
        index_sum: i64,
    },
    /// Seed grids of different resolution disagree, or an index could not be read off.
    Inconclusive { found: Vec<Vec<Vec2>>, hint: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlipReport {
    pub rotations: RotationPair,
    pub fixed_points: FixedPointCertificate,
}

impl FlipReport {
    /// Exactly two interior fixed points, both of nonzero index, indices summing to 2.
    pub fn two_nonzero_fixed_points(&self) -> bool {
        match &self.fixed_points {
            FixedPointCertificate::Certified { points, index_sum } => {
                points.len() == 2 && points.iter().all(|p| p.index != 0) && *index_sum == 2
            }
            FixedPointCertificate::Inconclusive { .. } => false,
        }
    }
}

/// Locates the interior fixed points of `g` with two seed grids and reads off
/// their indices by winding numbers.
pub fn certify_fixed_points(g: &FlipMap, grid: usize) -> FixedPointCertificate {
    let coarse = g.interior_fixed_points(grid);
    let fine = g.interior_fixed_points(2 * grid);
    let same = coarse.len() == fine.len()
        && coarse
            .iter()
            .zip(&fine)
            .all(|(a, b)| {
                let dx = a[0] - b[0];
                (dx - dx.round()).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8
            });
    if !same {
        return FixedPointCertificate::Inconclusive {
            found: vec![coarse, fine],
            hint: format!("seed grids {grid} and {} disagree; retry with a finer grid", 2 * grid),
        };
    }
    let separation = closest_gap(&fine).min(0.5);
    let mut points = Vec::new();
    for p in fine {
        let mut radius = (separation / 4.0).min(1.0 - p[1].abs()).min(0.05);
        let index = loop {
            match winding_index(|z| unwrap_near(g.apply(z), z), p, radius, 1024) {
                Ok(w) => break Some(w),
                Err(NumericError::VanishingField) if radius > 1e-6 => radius /= 2.0,
                Err(_) => break None,
            }
        };
        let Some(index) = index else {
            return FixedPointCertificate::Inconclusive {
                found: vec![vec![p]],
                hint: "winding number unresolved; increase samples".into(),
            };
        };
        points.push(FixedPointRecord { point: p, index });
    }
    let index_sum = points.iter().map(|p| p.index).sum();
    FixedPointCertificate::Certified { points, index_sum }
}

fn unwrap_near(q: Vec2, z: Vec2) -> Vec2 {
    let dx = q[0] - z[0];
    [z[0] + dx - dx.round(), q[1]]
}

fn closest_gap(points: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let dx = a[0] - b[0];
            best = best.min((dx - dx.round()).hypot(a[1] - b[1]));
        }
    }
    best
}

pub const FLIP_ITERATIONS: u64 = 100_000;

/// Boundary rotation numbers of `f²` and the fixed points of `g`.
pub fn flip_annulus_experiment(flow: FlowParams, profile: RotationProfile) -> Result<FlipReport, NumericError> {
    if !(flow.mu > 0.0) || !flow.kappa.is_finite() {
        return Err(NumericError::Domain {
            what: "flow contraction mu",
            value: flow.mu,
        });
    }
    for lift in [&profile.upper, &profile.lower] {
        let total: f64 = lift.harmonics.iter().map(|h| h.0.abs()).sum();
        if total >= 1.0 {
            return Err(NumericError::InvalidLift { x: total });
        }
    }
    let rotations = boundary_rotations(&profile, FLIP_ITERATIONS)?;
    let g = FlipMap { flow, profile };
    Ok(FlipReport {
        rotations,
        fixed_points: certify_fixed_points(&g, 12),
    })
}
