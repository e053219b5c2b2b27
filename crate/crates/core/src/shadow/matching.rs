//! Matching periodic points of a perturbed map with those of its linear part.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::linear::{
    apply_mod_one, d_components, least_period, linear_periodic_points, matrix_power, to_f64, IntMatrix,
    Separation, ShadowingParams, Vec2,
};
use super::perturbed::{solve2, PerturbedMap};
use crate::error::NumericError;
use crate::graph::Rational;

const MAX_NEWTON: u32 = 60;

/// A linear period-`n` point and the perturbed point continued from it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchedPair {
    pub n: u32,
    pub least_period: u32,
    #[serde(serialize_with = "rational_pair")]
    pub linear: [Rational; 2],
    /// The lift `x̃` in the unit square.
    pub linear_lift: Vec2,
    /// The matching lift `ỹ`, with `f̃ⁿ(ỹ) = ỹ + translation`.
    pub perturbed_lift: Vec2,
    /// `(Aⁿ - I) x̃`, shared by both lifts.
    pub translation: [i64; 2],
    pub separation: Separation,
    pub residual: f64,
    pub iterations: u32,
    pub matched: bool,
    /// `d_Φ(x̃, ỹ) < C`.
    pub within_bound: bool,
}

fn rational_pair<S: Serializer>(x: &[Rational; 2], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|r| r.to_string()))
}

/// Newton continuation of every fixed point of `Aⁿ` to a fixed point of `fⁿ`.
pub fn match_periodic_points(
    f: &PerturbedMap,
    params: &ShadowingParams,
    n: u32,
    tol: f64,
) -> Result<Vec<MatchedPair>, NumericError> {
    let set = linear_periodic_points(&f.base, n)?;
    let power = matrix_power(&f.base.matrix, n).ok_or(NumericError::Singular(n))?;
    Ok(set
        .points
        .par_iter()
        .map(|x| continue_point(f, params, n, &power, x, tol))
        .collect())
}

fn continue_point(
    f: &PerturbedMap,
    params: &ShadowingParams,
    n: u32,
    power: &IntMatrix,
    x: &[Rational; 2],
    tol: f64,
) -> MatchedPair {
    let image = [
        x[0] * power[0][0] + x[1] * power[0][1] - x[0],
        x[0] * power[1][0] + x[1] * power[1][1] - x[1],
    ];
    debug_assert!(image[0].is_integer() && image[1].is_integer());
    let k = [image[0].to_integer(), image[1].to_integer()];
    let x0 = to_f64(x);
    let mut y = x0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut matched = false;
    while iterations < MAX_NEWTON {
        let mut z = y;
        let mut jac = [[1.0, 0.0], [0.0, 1.0]];
        for _ in 0..n {
            let d = f.jacobian(z);
            jac = [
                [
                    d[0][0] * jac[0][0] + d[0][1] * jac[1][0],
                    d[0][0] * jac[0][1] + d[0][1] * jac[1][1],
                ],
                [
                    d[1][0] * jac[0][0] + d[1][1] * jac[1][0],
                    d[1][0] * jac[0][1] + d[1][1] * jac[1][1],
                ],
            ];
            z = f.apply(z);
        }
        let r = [z[0] - y[0] - k[0] as f64, z[1] - y[1] - k[1] as f64];
        residual = r[0].abs().max(r[1].abs());
        if !residual.is_finite() {
            break;
        }
        if residual < tol {
            matched = true;
            break;
        }
        jac[0][0] -= 1.0;
        jac[1][1] -= 1.0;
        let step = solve2(&jac, r);
        y = [y[0] - step[0], y[1] - step[1]];
        iterations += 1;
        if (y[0] - x0[0]).abs().max((y[1] - x0[1]).abs()) > 1.0 + params.c {
            break;
        }
    }
    let separation = d_components(x0, y, &f.base);
    MatchedPair {
        n,
        least_period: least_period(&f.base, x, n).unwrap_or(n),
        linear: *x,
        linear_lift: x0,
        perturbed_lift: y,
        translation: k,
        separation,
        residual,
        iterations,
        matched,
        within_bound: matched && separation.dphi < params.c,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchReport {
    pub params: ShadowingParams,
    pub eps: f64,
    pub seed: u64,
    pub max_period: u32,
    pub tolerance: f64,
    /// Linear fixed points of `Aⁿ` per `n`.
    pub counts: BTreeMap<u32, u64>,
    pub unmatched: usize,
    pub violations: usize,
    pub max_dphi: f64,
    pub margin: f64,
    #[serde(skip)]
    pub pairs: Vec<MatchedPair>,
}

impl MatchReport {
    pub fn passed(&self) -> bool {
        self.unmatched == 0 && self.violations == 0
    }

    /// One pair per distinct linear point, at its least period.
    pub fn distinct_pairs(&self) -> Vec<MatchedPair> {
        let mut seen: BTreeMap<[Rational; 2], MatchedPair> = BTreeMap::new();
        for p in &self.pairs {
            seen.entry(p.linear).or_insert_with(|| p.clone());
        }
        let mut out: Vec<MatchedPair> = seen.into_values().filter(|p| p.n == p.least_period).collect();
        out.sort_by_key(|p| (p.n, p.linear));
        out
    }
}

/// Matches every period `n ≤ max_period` and summarizes against `C`.
pub fn run_matching(
    f: &PerturbedMap,
    params: &ShadowingParams,
    max_period: u32,
    tol: f64,
) -> Result<MatchReport, NumericError> {
    let mut pairs = Vec::new();
    let mut counts = BTreeMap::new();
    for n in 1..=max_period {
        let set = match_periodic_points(f, params, n, tol)?;
        counts.insert(n, set.len() as u64);
        pairs.extend(set);
    }
    let unmatched = pairs.iter().filter(|p| !p.matched).count();
    let violations = pairs.iter().filter(|p| p.matched && !p.within_bound).count();
    let max_dphi = pairs
        .iter()
        .filter(|p| p.matched)
        .map(|p| p.separation.dphi)
        .fold(0.0, f64::max);
    Ok(MatchReport {
        params: *params,
        eps: f.eps,
        seed: f.seed,
        max_period,
        tolerance: tol,
        counts,
        unmatched,
        violations,
        max_dphi,
        margin: params.c - max_dphi,
        pairs,
    })
}

/// Exact integer matrix–vector product in `i128`.
fn mul_vec(m: &[[i128; 2]; 2], v: [i128; 2]) -> [i128; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn mul_mat(a: &[[i128; 2]; 2], b: &[[i128; 2]; 2]) -> [[i128; 2]; 2] {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn widen(m: &IntMatrix) -> [[i128; 2]; 2] {
    [[m[0][0] as i128, m[0][1] as i128], [m[1][0] as i128, m[1][1] as i128]]
}

/// Eigencoordinates of `Φ̃^m x̃` and `f̃^m ỹ` for every `m` in the range.
///
/// Iterates are split as `m = qn + r`: both lifts return to themselves plus the
/// same integer vector after `n` steps, so only `r < n` steps are taken
/// numerically and the rest is an exact integer translation.
fn trajectories(f: &PerturbedMap, pair: &MatchedPair, range: &RangeInclusive<i32>) -> Vec<[f64; 4]> {
    let model = &f.base;
    let n = pair.n as i32;
    let a = widen(&model.matrix);
    let a_inv = widen(&model.inverse_matrix());
    let an = widen(&matrix_power(&model.matrix, pair.n).expect("checked when matching"));
    let an_inv = {
        let mut m = [[1i128, 0], [0, 1]];
        for _ in 0..pair.n {
            m = mul_mat(&m, &a_inv);
        }
        m
    };
    let k = [pair.translation[0] as i128, pair.translation[1] as i128];

    // partial orbits for 0 <= r < n
    let mut lin = vec![pair.linear_lift];
    let mut per = vec![pair.perturbed_lift];
    let mut powers = vec![[[1i128, 0], [0, 1]]];
    for r in 1..n as usize {
        lin.push(model.apply(lin[r - 1]));
        per.push(f.apply(per[r - 1]));
        powers.push(mul_mat(&powers[r - 1], &a));
    }

    range
        .clone()
        .map(|m| {
            let q = m.div_euclid(n);
            let r = m.rem_euclid(n) as usize;
            let mut shift = [0i128, 0];
            if q >= 0 {
                let mut term = k;
                for _ in 0..q {
                    shift = [shift[0] + term[0], shift[1] + term[1]];
                    term = mul_vec(&an, term);
                }
            } else {
                let mut term = mul_vec(&an_inv, k);
                for _ in 0..-q {
                    shift = [shift[0] - term[0], shift[1] - term[1]];
                    term = mul_vec(&an_inv, term);
                }
            }
            let t = mul_vec(&powers[r], shift);
            let t = [t[0] as f64, t[1] as f64];
            let u = [lin[r][0] + t[0], lin[r][1] + t[1]];
            let v = [per[r][0] + t[0], per[r][1] + t[1]];
            let (uu, us) = model.eigen_coordinates(u);
            let (vu, vs) = model.eigen_coordinates(v);
            [uu, us, vu, vs]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoSidedReport {
    pub pairs: usize,
    pub m_min: i32,
    pub m_max: i32,
    pub comparisons: u64,
    pub max_gap: f64,
    pub bound: f64,
    pub violations: u64,
    pub passed: bool,
}

/// `|d_Φ(Φ̃ᵐx̃₁, Φ̃ᵐx̃₂) - d_Φ(f̃ᵐỹ₁, f̃ᵐỹ₂)| ≤ 2C` over all pairs of pairs and all `m`.
pub fn two_sided_bound_check(
    f: &PerturbedMap,
    pairs: &[MatchedPair],
    m_range: RangeInclusive<i32>,
    c: f64,
) -> TwoSidedReport {
    let pairs: Vec<&MatchedPair> = pairs.iter().filter(|p| p.matched).collect();
    let traj: Vec<Vec<[f64; 4]>> = pairs.par_iter().map(|p| trajectories(f, p, &m_range)).collect();
    let bound = 2.0 * c;
    let (max_gap, violations) = (0..traj.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0_f64;
            let mut bad = 0u64;
            for j in i..traj.len() {
                for (a, b) in traj[i].iter().zip(&traj[j]) {
                    let lin = (a[0] - b[0]).abs() + (a[1] - b[1]).abs();
                    let per = (a[2] - b[2]).abs() + (a[3] - b[3]).abs();
                    let gap = (lin - per).abs();
                    worst = worst.max(gap);
                    if gap > bound {
                        bad += 1;
                    }
                }
            }
            (worst, bad)
        })
        .reduce(|| (0.0, 0), |x, y| (x.0.max(y.0), x.1 + y.1));
    let count = traj.len() as u64;
    TwoSidedReport {
        pairs: traj.len(),
        m_min: *m_range.start(),
        m_max: *m_range.end(),
        comparisons: count * (count + 1) / 2 * m_range.clone().count() as u64,
        max_gap,
        bound,
        violations,
        passed: violations == 0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemiconjugacyReport {
    pub pairs: usize,
    /// Largest `dist(α(f(y)), Φ(α(y)))` plus the lookup gap.
    pub max_defect: f64,
    /// Largest distance from `f(y)` to the matched point standing for it.
    pub max_lookup_gap: f64,
    /// Largest `d_Φ(x̃, ỹ)`: the lift of `α` stays this close to the inclusion.
    pub max_lift_deviation: f64,
    pub c: f64,
    pub within_bound: bool,
}

fn torus_distance(a: Vec2, b: Vec2) -> f64 {
    let wrap = |t: f64| {
        let t = t - t.round();
        t.abs()
    };
    wrap(a[0] - b[0]).hypot(wrap(a[1] - b[1]))
}

/// Checks `α ∘ f = Φ ∘ α` on the matched set, where `α` sends each matched
/// perturbed point to its linear partner.
pub fn semiconjugacy_check(
    f: &PerturbedMap,
    pairs: &[MatchedPair],
    c: f64,
) -> Result<SemiconjugacyReport, NumericError> {
    let pairs: Vec<&MatchedPair> = pairs.iter().filter(|p| p.matched).collect();
    let by_linear: BTreeMap<[Rational; 2], usize> = pairs.iter().enumerate().map(|(i, p)| (p.linear, i)).collect();
    let mut by_period: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        by_period.entry(p.least_period).or_default().push(i);
    }
    let results: Vec<Result<(f64, f64), NumericError>> = pairs
        .par_iter()
        .map(|p| {
            let fy = f.apply(p.perturbed_lift);
            let target = apply_mod_one(&f.base.matrix, &p.linear);
            let Some(&j) = by_linear.get(&target) else {
                return Err(NumericError::OrbitNotClosed {
                    period: p.least_period,
                    gap: f64::INFINITY,
                });
            };
            let gap = torus_distance(fy, pairs[j].perturbed_lift);
            // α(f(y)): the linear partner of the matched point nearest f(y)
            let nearest = by_period[&p.least_period]
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    torus_distance(fy, pairs[a].perturbed_lift).total_cmp(&torus_distance(fy, pairs[b].perturbed_lift))
                })
                .unwrap_or(j);
            let defect = torus_distance(pairs[nearest].linear_lift, to_f64(&target));
            Ok((defect + gap, gap))
        })
        .collect();
    let mut max_defect = 0.0_f64;
    let mut max_gap = 0.0_f64;
    for r in results {
        let (d, g) = r?;
        max_defect = max_defect.max(d);
        max_gap = max_gap.max(g);
    }
    let max_lift_deviation = pairs.iter().map(|p| p.separation.dphi).fold(0.0, f64::max);
    Ok(SemiconjugacyReport {
        pairs: pairs.len(),
        max_defect,
        max_lookup_gap: max_gap,
        max_lift_deviation,
        c,
        within_bound: max_lift_deviation < c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shadow::LinearModel;

    #[test]
    fn unperturbed_pairs_coincide() {
        let f = PerturbedMap::unperturbed(LinearModel::cat_map());
        let params = f.shadowing_params(16).unwrap();
        let pairs = match_periodic_points(&f, &params, 3, 1e-10).unwrap();
        assert_eq!(pairs.len(), 16);
        assert!(pairs.iter().all(|p| p.matched && p.separation.dphi == 0.0));
    }

    #[test]
    fn duplicated_pair_has_zero_gap() {
        let f = PerturbedMap::seeded(LinearModel::cat_map(), 0.05, 1).unwrap();
        let params = f.shadowing_params(32).unwrap();
        let pairs = match_periodic_points(&f, &params, 2, 1e-10).unwrap();
        let twice = vec![pairs[1].clone(), pairs[1].clone()];
        let report = two_sided_bound_check(&f, &twice, -5..=5, params.c);
        assert!(report.max_gap < 1e-9, "{}", report.max_gap);
    }

    #[test]
    fn periodic_split_matches_direct_iteration() {
        let f = PerturbedMap::seeded(LinearModel::cat_map(), 0.05, 4).unwrap();
        let params = f.shadowing_params(32).unwrap();
        let pairs = match_periodic_points(&f, &params, 3, 1e-12).unwrap();
        let p = &pairs[5];
        let traj = trajectories(&f, p, &(-4..=4));
        for (i, m) in (-4..=4).enumerate() {
            let direct = f.iterate(p.perturbed_lift, m);
            let (u, s) = f.base.eigen_coordinates(direct);
            assert!((u - traj[i][2]).abs() < 1e-6 && (s - traj[i][3]).abs() < 1e-6, "m={m}");
        }
    }
}
