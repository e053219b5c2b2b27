//! Fixed point indices by winding numbers.

use std::f64::consts::{PI, TAU};

use crate::canon::IndexSpec;
use crate::error::NumericError;

use super::linear::Vec2;

/// Winding number of `z ↦ map(z) - z` around the circle of `radius` about `point`.
///
/// Fails if the displacement vanishes on the circle or if consecutive samples
/// turn by more than a quarter turn, which would make the count ambiguous.
pub fn winding_index<F>(map: F, point: Vec2, radius: f64, samples: usize) -> Result<i64, NumericError>
where
    F: Fn(Vec2) -> Vec2,
{
    if samples < 8 {
        return Err(NumericError::Undersampled);
    }
    let field = |t: f64| {
        let z = [point[0] + radius * t.cos(), point[1] + radius * t.sin()];
        let w = map(z);
        [w[0] - z[0], w[1] - z[1]]
    };
    let first = field(0.0);
    let mut prev_angle = first[1].atan2(first[0]);
    let scale = radius.max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    for i in 1..=samples {
        let v = field(TAU * i as f64 / samples as f64);
        if v[0].hypot(v[1]) <= 1e-13 * scale {
            return Err(NumericError::VanishingField);
        }
        let angle = v[1].atan2(v[0]);
        let mut d = angle - prev_angle;
        while d > PI {
            d -= TAU;
        }
        while d <= -PI {
            d += TAU;
        }
        if d.abs() > PI / 2.0 {
            return Err(NumericError::Undersampled);
        }
        total += d;
        prev_angle = angle;
    }
    Ok((total / TAU).round() as i64)
}

/// A planar map with an isolated fixed point at the origin realizing given
/// sector data, lifted through `z ↦ z^k` when `k ≥ 2`.
///
/// Downstairs the displacement is `z^j` (`j ≥ 1`), `z̄^|j|` (`j ≤ -1`) or the
/// saddle-node `(x², -y)` (`j = 0`), with `j = 1 + p/2 - h/2`. The lift has
/// displacement `v(z^k) z̄^(k-1)`; a rotated lift composes with rotation by `2π/k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalModel {
    pub spec: IndexSpec,
    /// Size of the displacement relative to the circle it is sampled on.
    pub amplitude: f64,
}

fn cmul(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

fn cpow(z: Vec2, k: u32) -> Vec2 {
    (0..k).fold([1.0, 0.0], |acc, _| cmul(acc, z))
}

impl LocalModel {
    pub fn new(spec: IndexSpec) -> Self {
        Self { spec, amplitude: 0.01 }
    }

    fn base_index(&self) -> i64 {
        1 + (i64::from(self.spec.parabolic) - i64::from(self.spec.hyperbolic)) / 2
    }

    fn base_displacement(&self, w: Vec2) -> Vec2 {
        let j = self.base_index();
        if j >= 1 {
            cpow(w, j as u32)
        } else if j <= -1 {
            cpow([w[0], -w[1]], (-j) as u32)
        } else {
            [w[0] * w[0], -w[1]]
        }
    }

    pub fn map(&self, z: Vec2) -> Vec2 {
        let k = self.spec.local_order.max(1);
        let v = self.base_displacement(cpow(z, k));
        let u = cmul(v, cpow([z[0], -z[1]], k - 1));
        let moved = [z[0] + self.amplitude * u[0], z[1] + self.amplitude * u[1]];
        if self.spec.rotated && k >= 2 {
            let t = TAU / f64::from(k);
            cmul([t.cos(), t.sin()], moved)
        } else {
            moved
        }
    }
}
