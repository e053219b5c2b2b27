//! Smooth perturbations of linear torus maps.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::linear::{dot, LinearModel, ShadowingParams, Vec2};
use crate::error::NumericError;

/// One term `amplitude · sin(2π⟨k, x⟩ + phase)` of a displacement field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mode {
    pub wave: [i32; 2],
    pub amplitude: Vec2,
    pub phase: f64,
}

/// `f̃(x) = A x + ε g(x)` with `g` a doubly periodic trigonometric field.
///
/// `g` is normalized so that its derivative has operator norm at most 1; `ε`
/// is then a bound on the Lipschitz constant of the perturbation. For
/// `ε < 1/λ` the map is a diffeomorphism of the torus isotopic to `A`, and its
/// lift commutes with integer translations the same way `A` does.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbedMap {
    pub base: LinearModel,
    pub eps: f64,
    pub modes: Vec<Mode>,
    pub seed: u64,
}

/// Modes with `|k|∞ ≤ MAX_WAVE` are drawn.
const MAX_WAVE: i32 = 2;
const MODE_COUNT: usize = 6;

impl PerturbedMap {
    /// Random trigonometric field from `seed`, scaled to Lipschitz size `eps`.
    pub fn seeded(base: LinearModel, eps: f64, seed: u64) -> Result<Self, NumericError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = Vec::with_capacity(MODE_COUNT);
        while modes.len() < MODE_COUNT {
            let wave = [rng.gen_range(-MAX_WAVE..=MAX_WAVE), rng.gen_range(-MAX_WAVE..=MAX_WAVE)];
            if wave == [0, 0] {
                continue;
            }
            modes.push(Mode {
                wave,
                amplitude: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                phase: rng.gen_range(0.0..TAU),
            });
        }
        Self::from_modes(base, eps, modes, seed)
    }

    /// Uses the given modes after rescaling them to a field with derivative norm ≤ 1.
    pub fn from_modes(base: LinearModel, eps: f64, mut modes: Vec<Mode>, seed: u64) -> Result<Self, NumericError> {
        let limit = 1.0 / base.lambda;
        if !(eps >= 0.0) || eps >= limit {
            return Err(NumericError::PerturbationTooLarge { eps, limit });
        }
        let lip: f64 = modes
            .iter()
            .map(|m| {
                TAU * m.amplitude[0].hypot(m.amplitude[1]) * f64::from(m.wave[0]).hypot(f64::from(m.wave[1]))
            })
            .sum();
        if lip > 0.0 {
            for m in &mut modes {
                m.amplitude = [m.amplitude[0] / lip, m.amplitude[1] / lip];
            }
        }
        Ok(Self { base, eps, modes, seed })
    }

    pub fn unperturbed(base: LinearModel) -> Self {
        Self {
            base,
            eps: 0.0,
            modes: Vec::new(),
            seed: 0,
        }
    }

    /// The normalized field `g`.
    pub fn field(&self, x: Vec2) -> Vec2 {
        let mut out = [0.0, 0.0];
        for m in &self.modes {
            let s = (TAU * (f64::from(m.wave[0]) * x[0] + f64::from(m.wave[1]) * x[1]) + m.phase).sin();
            out[0] += m.amplitude[0] * s;
            out[1] += m.amplitude[1] * s;
        }
        out
    }

    fn field_jacobian(&self, x: Vec2) -> [[f64; 2]; 2] {
        let mut j = [[0.0; 2]; 2];
        for m in &self.modes {
            let c = TAU * (TAU * (f64::from(m.wave[0]) * x[0] + f64::from(m.wave[1]) * x[1]) + m.phase).cos();
            for r in 0..2 {
                for s in 0..2 {
                    j[r][s] += m.amplitude[r] * c * f64::from(m.wave[s]);
                }
            }
        }
        j
    }

    /// The lift `f̃`.
    pub fn apply(&self, x: Vec2) -> Vec2 {
        let a = self.base.apply(x);
        if self.eps == 0.0 {
            return a;
        }
        let g = self.field(x);
        [a[0] + self.eps * g[0], a[1] + self.eps * g[1]]
    }

    /// Derivative of `f̃` at `x`.
    pub fn jacobian(&self, x: Vec2) -> [[f64; 2]; 2] {
        let m = &self.base.matrix;
        let mut j = [[m[0][0] as f64, m[0][1] as f64], [m[1][0] as f64, m[1][1] as f64]];
        if self.eps != 0.0 {
            let dg = self.field_jacobian(x);
            for r in 0..2 {
                for s in 0..2 {
                    j[r][s] += self.eps * dg[r][s];
                }
            }
        }
        j
    }

    /// The lift `f̃⁻¹`, by Newton's method from `A⁻¹ z`.
    pub fn apply_inverse(&self, z: Vec2) -> Vec2 {
        let mut y = self.base.apply_inverse(z);
        if self.eps == 0.0 {
            return y;
        }
        for _ in 0..50 {
            let fy = self.apply(y);
            let r = [fy[0] - z[0], fy[1] - z[1]];
            if r[0].abs().max(r[1].abs()) < 1e-15 * (1.0 + z[0].abs().max(z[1].abs())) {
                break;
            }
            let step = solve2(&self.jacobian(y), r);
            y = [y[0] - step[0], y[1] - step[1]];
        }
        y
    }

    /// `f̃^m` for any integer `m`.
    pub fn iterate(&self, mut x: Vec2, m: i32) -> Vec2 {
        for _ in 0..m.unsigned_abs() {
            x = if m > 0 { self.apply(x) } else { self.apply_inverse(x) };
        }
        x
    }

    /// Upper bound for the `d_Φ` displacement of `f̃` from `A` and of `f̃⁻¹`
    /// from `A⁻¹`, from a `grid × grid` sample inflated by a Lipschitz bound
    /// for the gaps between samples.
    pub fn measure_displacement(&self, grid: usize) -> f64 {
        if self.eps == 0.0 || self.modes.is_empty() {
            return 0.0;
        }
        let lambda = self.base.lambda;
        let (wu, ws) = (self.base.unstable_covector, self.base.stable_covector);
        let mut sup = 0.0_f64;
        for i in 0..grid {
            for j in 0..grid {
                let x = [i as f64 / grid as f64, j as f64 / grid as f64];
                let g = self.field(x);
                let (gu, gs) = (dot(g, wu).abs(), dot(g, ws).abs());
                sup = sup.max(gu + gs).max(gu / lambda + lambda * gs);
            }
        }
        let norm = |v: Vec2| v[0].hypot(v[1]);
        let lipschitz = lambda.max(1.0) * (norm(wu) + norm(ws));
        let gap = std::f64::consts::FRAC_1_SQRT_2 / grid as f64;
        self.eps * (sup + lipschitz * gap)
    }

    /// `λ`, measured `R` and `C` for this map.
    pub fn shadowing_params(&self, grid: usize) -> Result<ShadowingParams, NumericError> {
        ShadowingParams::new(self.base.lambda, self.measure_displacement(grid))
    }
}

/// Solves `J s = r` for a 2×2 system.
pub fn solve2(j: &[[f64; 2]; 2], r: Vec2) -> Vec2 {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    [
        (j[1][1] * r[0] - j[0][1] * r[1]) / det,
        (-j[1][0] * r[0] + j[0][0] * r[1]) / det,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_undoes_forward() {
        let f = PerturbedMap::seeded(LinearModel::cat_map(), 0.2, 7).unwrap();
        for &x in &[[0.1, 0.7], [3.2, -1.4], [0.5, 0.5]] {
            let y = f.apply_inverse(f.apply(x));
            assert!((y[0] - x[0]).abs() < 1e-12 && (y[1] - x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn lift_is_equivariant() {
        let f = PerturbedMap::seeded(LinearModel::cat_map(), 0.1, 3).unwrap();
        let x = [0.31, 0.77];
        let shifted = f.apply([x[0] + 2.0, x[1] - 1.0]);
        let expected = f.base.apply([2.0, -1.0]);
        let base = f.apply(x);
        assert!((shifted[0] - base[0] - expected[0]).abs() < 1e-12);
        assert!((shifted[1] - base[1] - expected[1]).abs() < 1e-12);
    }

    #[test]
    fn too_large_perturbation_rejected() {
        let m = LinearModel::cat_map();
        assert!(matches!(
            PerturbedMap::seeded(m, 0.5, 1),
            Err(NumericError::PerturbationTooLarge { .. })
        ));
    }

    #[test]
    fn measured_displacement_bounds_samples() {
        let f = PerturbedMap::seeded(LinearModel::cat_map(), 0.05, 11).unwrap();
        let r = f.measure_displacement(64);
        let m = &f.base;
        for i in 0..200 {
            let x = [(i as f64 * 0.6180339887).fract(), (i as f64 * 0.3819660113).fract()];
            let fwd = m.separation_of({
                let (a, b) = (f.apply(x), m.apply(x));
                [a[0] - b[0], a[1] - b[1]]
            });
            let back = m.separation_of({
                let (a, b) = (f.apply_inverse(x), m.apply_inverse(x));
                [a[0] - b[0], a[1] - b[1]]
            });
            assert!(fwd.dphi <= r && back.dphi <= r, "{} {} {}", fwd.dphi, back.dphi, r);
        }
    }
}
