//! Phase-setting rules that extremise the two sides of the inequality.
//!
//! Both rules share one bookkeeping format: an integer vector `n_j`
//! determines every phase function through
//!
//! ```text
//! phi_1(j)    = 0
//! phi_2(j)    = n_j * pi / d
//! vphi_1(j)   = n_j * pi / (2d)
//! vphi_2(j)   = -n_j * pi / (2d)
//! ```
//!
//! The maximal-violation rule takes `n_j = j`. The minimal-violation
//! rule keeps `n_j = j (mod d)` but lifts the middle third of the
//! indices by `d` and the top third by `2d`, which flips the sign
//! pattern of the Bell matrix while preserving its magnitude profile.

use crate::error::{Error, Result};
use crate::types::{Dimension, PhaseSettings};

/// Which extreme of the inequality a rule (or a solve) targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Violation of the upper classical bound +2.
    Positive,
    /// Violation of the lower classical bound -2(d+1)/(d-1).
    Negative,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Positive => f.write_str("positive"),
            Side::Negative => f.write_str("negative"),
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" | "max" => Ok(Side::Positive),
            "negative" | "neg" | "-" | "min" => Ok(Side::Negative),
            other => Err(Error::InvalidArgument(format!(
                "unknown side {other:?}; expected \"positive\" or \"negative\""
            ))),
        }
    }
}

/// A concrete phase assignment in the `n_j` format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRule {
    side: Side,
    d: Dimension,
    n: Vec<i64>,
}

impl PhaseRule {
    #[inline]
    pub fn side(&self) -> Side {
        self.side
    }

    #[inline]
    pub fn dimension(&self) -> Dimension {
        self.d
    }

    /// The integer vector n_0..n_{d-1}.
    #[inline]
    pub fn indices(&self) -> &[i64] {
        &self.n
    }

    pub fn for_side(side: Side, d: Dimension) -> Self {
        match side {
            Side::Positive => positive_rule(d),
            Side::Negative => negative_rule(d),
        }
    }
}

/// Rule maximising the violation: n_j = j.
pub fn positive_rule(d: Dimension) -> PhaseRule {
    let n = (0..d.get() as i64).collect();
    PhaseRule {
        side: Side::Positive,
        d,
        n,
    }
}

/// Rule minimising the violation. With t = floor((d - 2) / 3) the index
/// range splits into three runs:
///
/// ```text
/// n_j = j           for 0         <= j <= t
/// n_j = d + j       for t + 1     <= j <= d - 2 - t
/// n_j = 2d + j      for d - 1 - t <= j <= d - 1
/// ```
///
/// The run lengths (t + 1, d - 2 - 2t, t + 1) always cover 0..d-1
/// exactly, for every d >= 2.
pub fn negative_rule(d: Dimension) -> PhaseRule {
    let du = d.get();
    let t = (du - 2) / 3;
    let n = (0..du)
        .map(|j| {
            let j_i = j as i64;
            if j <= t {
                j_i
            } else if j <= du - 2 - t {
                du as i64 + j_i
            } else {
                2 * du as i64 + j_i
            }
        })
        .collect();
    PhaseRule {
        side: Side::Negative,
        d,
        n,
    }
}

/// Expand a rule into explicit phase vectors.
pub fn phases_from_rule(rule: &PhaseRule) -> PhaseSettings {
    let d = rule.d.get() as f64;
    let full = std::f64::consts::PI / d;
    let half = full / 2.0;
    let phi1 = vec![0.0; rule.d.get()];
    let phi2 = rule.n.iter().map(|&n| n as f64 * full).collect();
    let vphi1: Vec<f64> = rule.n.iter().map(|&n| n as f64 * half).collect();
    let vphi2 = vphi1.iter().map(|&p| -p).collect();
    PhaseSettings {
        phi1,
        phi2,
        vphi1,
        vphi2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn side_round_trips_through_strings() {
        assert_eq!("positive".parse::<Side>().unwrap(), Side::Positive);
        assert_eq!("NEG".parse::<Side>().unwrap(), Side::Negative);
        assert_eq!(
            Side::Positive.to_string().parse::<Side>().unwrap(),
            Side::Positive
        );
        assert!("sideways".parse::<Side>().is_err());
    }

    #[test]
    fn positive_rule_counts_up() {
        assert_eq!(positive_rule(dim(7)).indices(), &[0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn negative_rule_small_d() {
        assert_eq!(negative_rule(dim(2)).indices(), &[0, 5]);
        assert_eq!(negative_rule(dim(3)).indices(), &[0, 4, 8]);
        assert_eq!(negative_rule(dim(4)).indices(), &[0, 5, 6, 11]);
    }

    #[test]
    fn negative_rule_d8() {
        // t = 2: runs are j = 0..2, 3..4 (+d), 5..7 (+2d).
        assert_eq!(
            negative_rule(dim(8)).indices(),
            &[0, 1, 2, 11, 12, 21, 22, 23]
        );
    }

    #[test]
    fn negative_rule_segments_partition_for_all_small_d() {
        for du in 2..200 {
            let d = dim(du);
            let rule = negative_rule(d);
            assert_eq!(rule.indices().len(), du);
            // Residues mod d must still be 0..d-1 in order.
            for (j, &n) in rule.indices().iter().enumerate() {
                assert_eq!(n.rem_euclid(du as i64) as usize, j, "d={du} j={j}");
                assert!(n >= 0 && n < 3 * du as i64);
            }
            // The lift pattern is nondecreasing in steps of 0, d, 2d.
            let t = (du - 2) / 3;
            for (j, &n) in rule.indices().iter().enumerate() {
                let lift = (n - j as i64) / du as i64;
                let expect = if j <= t {
                    0
                } else if j <= du - 2 - t {
                    1
                } else {
                    2
                };
                assert_eq!(lift, expect, "d={du} j={j}");
            }
        }
    }

    #[test]
    fn phases_follow_uniform_format() {
        let d = dim(5);
        let rule = positive_rule(d);
        let p = phases_from_rule(&rule);
        let pi = std::f64::consts::PI;
        for j in 0..5 {
            assert_eq!(p.phi1[j], 0.0);
            assert!((p.phi2[j] - j as f64 * pi / 5.0).abs() < 1e-15);
            assert!((p.vphi1[j] - j as f64 * pi / 10.0).abs() < 1e-15);
            assert_eq!(p.vphi2[j], -p.vphi1[j]);
        }
    }

    #[test]
    fn for_side_dispatches() {
        let d = dim(6);
        assert_eq!(PhaseRule::for_side(Side::Positive, d), positive_rule(d));
        assert_eq!(PhaseRule::for_side(Side::Negative, d), negative_rule(d));
    }
}
