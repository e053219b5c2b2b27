//! Fixed point indices from sector data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BranchPoint;

/// Local data of an isolated fixed point: `h` hyperbolic and `p` parabolic
/// sectors downstairs, lifted through a branch point of local order `k`
/// (`k = 1` when there is no branching).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSpec {
    pub hyperbolic: u32,
    pub parabolic: u32,
    pub local_order: u32,
    pub rotated: bool,
}

impl IndexSpec {
    pub fn sectors(hyperbolic: u32, parabolic: u32) -> Self {
        Self {
            hyperbolic,
            parabolic,
            local_order: 1,
            rotated: false,
        }
    }

    pub fn branched(hyperbolic: u32, parabolic: u32, local_order: u32, rotated: bool) -> Self {
        Self {
            hyperbolic,
            parabolic,
            local_order,
            rotated,
        }
    }

    /// `(p - h) / 2`, or a parity error.
    fn half_difference(&self) -> Result<i64> {
        let diff = i64::from(self.parabolic) - i64::from(self.hyperbolic);
        if diff % 2 != 0 {
            return Err(Error::SectorParity {
                hyperbolic: self.hyperbolic,
                parabolic: self.parabolic,
            });
        }
        Ok(diff / 2)
    }
}

/// `1 + p/2 - h/2`.
pub fn sector_index(spec: &IndexSpec) -> Result<i64> {
    Ok(1 + spec.half_difference()?)
}

/// Index of the lift through a branch point: 1 if the lift rotates locally,
/// otherwise `1 + k(p/2 - h/2)`.
pub fn branched_lift_index(spec: &IndexSpec) -> Result<i64> {
    if spec.local_order < 2 {
        return Err(Error::BranchOrder(spec.local_order));
    }
    let half = spec.half_difference()?;
    if spec.rotated {
        return Ok(1);
    }
    Ok(1 + i64::from(spec.local_order) * half)
}

/// Index a branch record carries by itself, if its data determines one.
pub fn branch_record_index(b: &BranchPoint) -> Result<Option<i64>> {
    if b.rotated {
        return Ok(Some(1));
    }
    match b.sectors {
        Some(s) => branched_lift_index(&IndexSpec::branched(s.hyperbolic, s.parabolic, b.local_order, false)).map(Some),
        None => Ok(None),
    }
}

/// Euler characteristic of the quotient of a finite-order piece by its return
/// map, from Riemann–Hurwitz. Each branch record is one orbit of cone points.
pub fn quotient_euler(chi: i64, period: u32, branch_points: &[BranchPoint]) -> Result<i64> {
    let m = i64::from(period);
    if m == 0 {
        return Err(Error::QuotientEuler { chi, period });
    }
    let mut total = chi;
    for b in branch_points {
        let k = i64::from(b.local_order);
        if k < 2 || m % k != 0 {
            return Err(Error::BranchOrder(b.local_order));
        }
        total += m - m / k;
    }
    if total % m != 0 {
        return Err(Error::QuotientEuler { chi, period });
    }
    Ok(total / m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_examples() {
        assert_eq!(sector_index(&IndexSpec::sectors(0, 0)).unwrap(), 1);
        assert_eq!(sector_index(&IndexSpec::sectors(4, 0)).unwrap(), -1);
        assert_eq!(sector_index(&IndexSpec::sectors(2, 2)).unwrap(), 1);
        assert!(matches!(
            sector_index(&IndexSpec::sectors(3, 0)),
            Err(Error::SectorParity { hyperbolic: 3, parabolic: 0 })
        ));
    }

    #[test]
    fn branched_examples() {
        assert_eq!(branched_lift_index(&IndexSpec::branched(4, 0, 2, false)).unwrap(), -3);
        assert_eq!(branched_lift_index(&IndexSpec::branched(2, 0, 3, false)).unwrap(), -2);
        for k in 2..8 {
            assert_eq!(branched_lift_index(&IndexSpec::branched(6, 0, k, true)).unwrap(), 1);
        }
        assert!(matches!(
            branched_lift_index(&IndexSpec::branched(2, 0, 1, false)),
            Err(Error::BranchOrder(1))
        ));
    }

    #[test]
    fn lift_index_never_vanishes() {
        for h in 0..=20u32 {
            for p in (h % 2..=20).step_by(2) {
                for k in 2..=12 {
                    let i = branched_lift_index(&IndexSpec::branched(h, p, k, false)).unwrap();
                    assert_ne!(i, 0, "h={h} p={p} k={k}");
                }
            }
        }
    }

    #[test]
    fn riemann_hurwitz() {
        // hyperelliptic involution of genus 2: six fixed points, quotient a sphere
        let six: Vec<_> = (0..6).map(|_| BranchPoint::new(2)).collect();
        assert_eq!(quotient_euler(-2, 2, &six).unwrap(), 2);
        assert_eq!(quotient_euler(-4, 2, &[]).unwrap(), -2);
        assert!(quotient_euler(-3, 2, &[]).is_err());
    }
}
