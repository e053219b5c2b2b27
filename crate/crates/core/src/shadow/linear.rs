//! Linear hyperbolic torus maps and their pseudo-metrics.

use num_integer::Integer;
use serde::Serialize;

use crate::error::NumericError;
use crate::graph::Rational;

pub type Vec2 = [f64; 2];
pub type IntMatrix = [[i64; 2]; 2];

/// A hyperbolic matrix in `SL(2, Z)` with its eigendata.
///
/// `unstable` and `stable` are unit eigenvectors; the covectors are the dual
/// basis, so `⟨unstable, unstable_covector⟩ = 1` and
/// `⟨stable, unstable_covector⟩ = 0`. For symmetric matrices the covectors are
/// the eigenvectors themselves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearModel {
    pub matrix: IntMatrix,
    /// Modulus of the leading eigenvalue, > 1.
    pub lambda: f64,
    /// Sign of the eigenvalues (`-1` when the trace is negative).
    pub sign: f64,
    pub unstable: Vec2,
    pub stable: Vec2,
    pub unstable_covector: Vec2,
    pub stable_covector: Vec2,
}

/// `d_u`, `d_s` and their sum `d_Φ` for a pair of points in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Separation {
    pub du: f64,
    pub ds: f64,
    pub dphi: f64,
}

fn unit(v: Vec2) -> Vec2 {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn eigenvector(m: &IntMatrix, mu: f64) -> Vec2 {
    let (a, b, c, d) = (m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64);
    let v1 = [b, mu - a];
    let v2 = [mu - d, c];
    if v1[0].hypot(v1[1]) >= v2[0].hypot(v2[1]) {
        unit(v1)
    } else {
        unit(v2)
    }
}

pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl LinearModel {
    pub fn new(matrix: IntMatrix) -> Result<Self, NumericError> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        let tr = matrix[0][0] + matrix[1][1];
        if det != 1 || tr.abs() <= 2 {
            return Err(NumericError::NotHyperbolic(matrix));
        }
        let t = tr as f64;
        let root = (t * t - 4.0).sqrt();
        let sign = t.signum();
        // larger-modulus root, computed without cancellation
        let mu_u = (t + sign * root) / 2.0;
        let mu_s = 1.0 / mu_u;
        let unstable = eigenvector(&matrix, mu_u);
        let stable = eigenvector(&matrix, mu_s);
        let det_v = unstable[0] * stable[1] - stable[0] * unstable[1];
        let unstable_covector = [stable[1] / det_v, -stable[0] / det_v];
        let stable_covector = [-unstable[1] / det_v, unstable[0] / det_v];
        Ok(Self {
            matrix,
            lambda: mu_u.abs(),
            sign,
            unstable,
            stable,
            unstable_covector,
            stable_covector,
        })
    }

    /// The cat map `[[2, 1], [1, 1]]`.
    pub fn cat_map() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn apply(&self, x: Vec2) -> Vec2 {
        let m = &self.matrix;
        [
            m[0][0] as f64 * x[0] + m[0][1] as f64 * x[1],
            m[1][0] as f64 * x[0] + m[1][1] as f64 * x[1],
        ]
    }

    pub fn apply_inverse(&self, x: Vec2) -> Vec2 {
        let m = &self.matrix;
        [
            m[1][1] as f64 * x[0] - m[0][1] as f64 * x[1],
            -(m[1][0] as f64) * x[0] + m[0][0] as f64 * x[1],
        ]
    }

    pub fn inverse_matrix(&self) -> IntMatrix {
        let m = &self.matrix;
        [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
    }

    /// Components of a displacement in the eigenbasis.
    pub fn eigen_coordinates(&self, v: Vec2) -> (f64, f64) {
        (dot(v, self.unstable_covector), dot(v, self.stable_covector))
    }

    pub fn separation_of(&self, v: Vec2) -> Separation {
        let (u, s) = self.eigen_coordinates(v);
        Separation {
            du: u.abs(),
            ds: s.abs(),
            dphi: u.abs() + s.abs(),
        }
    }
}

/// Pseudo-metrics between two points of the plane.
pub fn d_components(x: Vec2, y: Vec2, model: &LinearModel) -> Separation {
    model.separation_of([x[0] - y[0], x[1] - y[1]])
}

/// Worst deviation found by [`verify_expansion`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub samples: usize,
    pub lambda: f64,
    pub max_unstable_error: f64,
    pub max_stable_error: f64,
    pub worst_pair: Option<(Vec2, Vec2)>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Relative tolerance for the expansion identities.
pub const EXPANSION_TOLERANCE: f64 = 1e-12;

/// Checks `d_u(Ax, Ay) = λ d_u(x, y)` and `d_s(A⁻¹x, A⁻¹y) = λ d_s(x, y)`.
/// Pairs whose separation is below `1e-9` are compared absolutely.
pub fn verify_expansion(model: &LinearModel, pairs: &[(Vec2, Vec2)]) -> ExpansionReport {
    let rel = |got: f64, want: f64| {
        let diff = (got - want).abs();
        if want < 1e-9 {
            diff
        } else {
            diff / want
        }
    };
    let mut worst = (0.0_f64, 0.0_f64);
    let mut worst_pair = None;
    let mut worst_total = -1.0;
    for &(x, y) in pairs {
        let base = d_components(x, y, model);
        let fwd = d_components(model.apply(x), model.apply(y), model);
        let back = d_components(model.apply_inverse(x), model.apply_inverse(y), model);
        let eu = rel(fwd.du, model.lambda * base.du);
        let es = rel(back.ds, model.lambda * base.ds);
        worst.0 = worst.0.max(eu);
        worst.1 = worst.1.max(es);
        if eu.max(es) > worst_total {
            worst_total = eu.max(es);
            worst_pair = Some((x, y));
        }
    }
    ExpansionReport {
        samples: pairs.len(),
        lambda: model.lambda,
        max_unstable_error: worst.0,
        max_stable_error: worst.1,
        worst_pair,
        tolerance: EXPANSION_TOLERANCE,
        passed: worst.0 <= EXPANSION_TOLERANCE && worst.1 <= EXPANSION_TOLERANCE,
    }
}

/// `count` pairs of points drawn uniformly from `[-spread, spread]²`.
pub fn sample_pairs(seed: u64, count: usize, spread: f64) -> Vec<(Vec2, Vec2)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut point = || [rng.gen_range(-spread..spread), rng.gen_range(-spread..spread)];
    (0..count).map(|_| (point(), point())).collect()
}

/// `λ*`, the displacement bound `R` and the shadowing constant `C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShadowingParams {
    pub lambda: f64,
    pub r: f64,
    pub c: f64,
}

/// `C = 2(R + 1) / (λ* - 1)`.
pub fn shadowing_constant(r: f64, lambda: f64) -> Result<f64, NumericError> {
    if !(lambda > 1.0) {
        return Err(NumericError::Domain {
            what: "expansion constant (must exceed 1)",
            value: lambda,
        });
    }
    if !(r >= 0.0) {
        return Err(NumericError::Domain {
            what: "displacement bound (must be non-negative)",
            value: r,
        });
    }
    Ok(2.0 * (r + 1.0) / (lambda - 1.0))
}

impl ShadowingParams {
    pub fn new(lambda: f64, r: f64) -> Result<Self, NumericError> {
        Ok(Self {
            lambda,
            r,
            c: shadowing_constant(r, lambda)?,
        })
    }
}

fn mat_mul(a: &[[i128; 2]; 2], b: &[[i128; 2]; 2]) -> Option<[[i128; 2]; 2]> {
    let mut out = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0].checked_mul(b[0][j])?.checked_add(a[i][1].checked_mul(b[1][j])?)?;
        }
    }
    Some(out)
}

/// `A^n` exactly, or `None` on overflow of `i64`.
pub fn matrix_power(m: &IntMatrix, n: u32) -> Option<IntMatrix> {
    let a = [[m[0][0] as i128, m[0][1] as i128], [m[1][0] as i128, m[1][1] as i128]];
    let mut acc = [[1i128, 0], [0, 1]];
    for _ in 0..n {
        acc = mat_mul(&acc, &a)?;
    }
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = i64::try_from(acc[i][j]).ok()?;
        }
    }
    Some(out)
}

/// Fixed points of `Aⁿ` on the torus, as exact rationals in `[0, 1)²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicSet {
    pub n: u32,
    pub count: u64,
    #[serde(skip)]
    pub points: Vec<[Rational; 2]>,
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Solves `(Aⁿ - I) x ∈ Z²` on the fundamental domain.
///
/// With `B = Aⁿ - I` and `D = |det B|`, the solutions are `adj(B) k / det B`
/// for `k ∈ Z²`; they form the lattice spanned by the columns of `adj(B)` and
/// `D Z²`, divided by `D`. That lattice is put in triangular form and its
/// points are listed modulo `D`.
pub fn linear_periodic_points(model: &LinearModel, n: u32) -> Result<PeriodicSet, NumericError> {
    if n == 0 {
        return Err(NumericError::Singular(0));
    }
    let p = matrix_power(&model.matrix, n).ok_or(NumericError::Singular(n))?;
    let b = [[p[0][0] - 1, p[0][1]], [p[1][0], p[1][1] - 1]];
    let det = (b[0][0] as i128 * b[1][1] as i128) - (b[0][1] as i128 * b[1][0] as i128);
    if det == 0 {
        return Err(NumericError::Singular(n));
    }
    let d = i64::try_from(det.abs()).map_err(|_| NumericError::Singular(n))?;
    let adj = [[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]];
    let gens: [[i64; 2]; 4] = [[adj[0][0], adj[1][0]], [adj[0][1], adj[1][1]], [d, 0], [0, d]];

    // basis {(p1, q1), (0, r)} of the generated lattice
    let (mut p1, mut v) = (0i64, [0i64, 0i64]);
    for g in gens {
        let (gcd, s, t) = ext_gcd(p1, g[0]);
        if gcd == 0 {
            continue;
        }
        v = [gcd, s * v[1] + t * g[1]];
        p1 = gcd;
    }
    let p1 = p1.abs();
    let v = if v[0] < 0 { [-v[0], -v[1]] } else { v };
    let mut r = 0i64;
    for g in gens {
        let second = g[1] - (g[0] / p1) * v[1];
        r = r.gcd(&second);
    }
    let r = r.abs().max(1);
    let q1 = v[1].rem_euclid(r);

    let mut points = Vec::with_capacity(d as usize);
    for i in 0..d / p1 {
        let x = i * p1;
        let base = (i * q1).rem_euclid(d);
        let mut y = base % r;
        while y < d {
            points.push([Rational::new(x, d), Rational::new(y, d)]);
            y += r;
        }
    }
    points.sort();
    points.dedup();
    if points.len() as i64 != d {
        return Err(NumericError::Singular(n));
    }
    Ok(PeriodicSet {
        n,
        count: d as u64,
        points,
    })
}

/// `Aⁿ x` reduced into `[0, 1)²`, exactly.
pub fn apply_mod_one(m: &IntMatrix, x: &[Rational; 2]) -> [Rational; 2] {
    let image = [
        x[0] * m[0][0] + x[1] * m[0][1],
        x[0] * m[1][0] + x[1] * m[1][1],
    ];
    [image[0] - image[0].floor(), image[1] - image[1].floor()]
}

/// Least `d ≥ 1` with `A^d x ≡ x`, searching up to `limit`.
pub fn least_period(model: &LinearModel, x: &[Rational; 2], limit: u32) -> Option<u32> {
    let mut y = apply_mod_one(&model.matrix, x);
    for d in 1..=limit {
        if &y == x {
            return Some(d);
        }
        y = apply_mod_one(&model.matrix, &y);
    }
    None
}

pub fn to_f64(x: &[Rational; 2]) -> Vec2 {
    [
        *x[0].numer() as f64 / *x[0].denom() as f64,
        *x[1].numer() as f64 / *x[1].denom() as f64,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hyperbolic() {
        assert!(LinearModel::new([[1, 1], [0, 1]]).is_err());
        assert!(LinearModel::new([[2, 1], [1, 2]]).is_err());
        assert!(LinearModel::new([[-2, 1], [-1, 0]]).is_err());
        assert!(LinearModel::new([[-3, 1], [-1, 0]]).is_ok());
    }

    #[test]
    fn unstable_displacement_has_unit_du() {
        let m = LinearModel::cat_map();
        let s = d_components(m.unstable, [0.0, 0.0], &m);
        assert!((s.du - 1.0).abs() < 1e-15);
        assert!(s.ds.abs() < 1e-15);
        assert_eq!(d_components([0.3, 0.2], [0.3, 0.2], &m).dphi, 0.0);
    }

    #[test]
    fn constant_examples() {
        assert_eq!(shadowing_constant(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(shadowing_constant(1.0, 2.0).unwrap(), 4.0);
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((shadowing_constant(0.2, golden).unwrap() - 2.4 / (golden - 1.0)).abs() < 1e-15);
        assert!(shadowing_constant(0.0, 1.0).is_err());
        assert!(shadowing_constant(-1.0, 2.0).is_err());
    }

    #[test]
    fn small_periodic_sets() {
        let m = LinearModel::cat_map();
        let one = linear_periodic_points(&m, 1).unwrap();
        assert_eq!(one.points, vec![[Rational::from_integer(0), Rational::from_integer(0)]]);
        assert_eq!(linear_periodic_points(&m, 2).unwrap().count, 5);
        assert_eq!(linear_periodic_points(&m, 3).unwrap().count, 16);
    }
}
