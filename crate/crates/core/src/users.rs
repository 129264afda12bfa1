//! Scripted selection heuristics standing in for a human designer.
//!
//! Each user scores a behavior pair `(compactness, orthogonality)` and picks
//! the alternative with the highest score. U9 to U12 switch criterion after
//! their fifth selection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UserError {
    #[error("unknown user {0:?}, expected U1..U12")]
    Unknown(String),
    #[error("cannot choose from an empty list of alternatives")]
    NoAlternatives,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UserId {
    U1,
    U2,
    U3,
    U4,
    U5,
    U6,
    U7,
    U8,
    U9,
    U10,
    U11,
    U12,
}

/// Last selection index at which the shifting users apply their first criterion.
pub const SHIFT_AFTER: usize = 5;

impl UserId {
    pub const ALL: [UserId; 12] = [
        UserId::U1,
        UserId::U2,
        UserId::U3,
        UserId::U4,
        UserId::U5,
        UserId::U6,
        UserId::U7,
        UserId::U8,
        UserId::U9,
        UserId::U10,
        UserId::U11,
        UserId::U12,
    ];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    /// User selection criterion of `bc` at selection `s` (1-based).
    pub fn usc(self, bc: [f64; 2], s: usize) -> f64 {
        let [c, o] = bc;
        let early = s <= SHIFT_AFTER;
        match self {
            UserId::U1 => c,
            UserId::U2 => o,
            UserId::U3 => 0.5 * (c + o),
            UserId::U4 => c.max(o),
            UserId::U5 => 1.0 - c,
            UserId::U6 => 1.0 - o,
            UserId::U7 => 1.0 - 0.5 * (c + o),
            UserId::U8 => 1.0 - c.max(o),
            UserId::U9 => {
                if early {
                    c
                } else {
                    1.0 - c
                }
            }
            UserId::U10 => {
                if early {
                    o
                } else {
                    1.0 - o
                }
            }
            UserId::U11 => {
                if early {
                    c
                } else {
                    o
                }
            }
            UserId::U12 => {
                if early {
                    o
                } else {
                    c
                }
            }
        }
    }

    /// Index of the preferred alternative; ties go to the earliest.
    pub fn choose<I>(self, bcs: I, s: usize) -> Result<usize, UserError>
    where
        I: IntoIterator<Item = [f64; 2]>,
    {
        let mut best: Option<(usize, f64)> = None;
        for (i, bc) in bcs.into_iter().enumerate() {
            let score = self.usc(bc, s);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| i).ok_or(UserError::NoAlternatives)
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}", self.number())
    }
}

impl FromStr for UserId {
    type Err = UserError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n: usize = s
            .strip_prefix(['U', 'u'])
            .and_then(|rest| rest.parse().ok())
            .ok_or_else(|| UserError::Unknown(s.to_string()))?;
        UserId::ALL.get(n.wrapping_sub(1)).copied().ok_or_else(|| UserError::Unknown(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn heuristic_examples() {
        assert!((UserId::U3.usc([0.8, 0.6], 1) - 0.7).abs() < 1e-12);
        assert!((UserId::U3.usc([0.8, 0.6], 9) - 0.7).abs() < 1e-12);
        assert_eq!(UserId::U4.usc([0.8, 0.6], 1), 0.8);
        assert!((UserId::U9.usc([0.8, 0.3], 6) - 0.2).abs() < 1e-12);
        assert_eq!(UserId::U9.usc([0.8, 0.3], 5), 0.8);
        assert_eq!(UserId::U10.usc([0.8, 0.3], 6), 0.7);
        assert_eq!(UserId::U11.usc([0.8, 0.3], 6), 0.3);
        assert_eq!(UserId::U12.usc([0.8, 0.3], 6), 0.8);
        assert_eq!(UserId::U12.usc([0.8, 0.3], 2), 0.3);
    }

    #[test]
    fn choose_examples() {
        assert_eq!(UserId::U1.choose([[0.2, 0.9]], 1).unwrap(), 0);
        assert_eq!(UserId::U1.choose([[0.3, 0.0], [0.7, 0.0], [0.5, 0.0]], 1).unwrap(), 1);
        assert_eq!(UserId::U2.choose([[0.1, 0.5], [0.9, 0.5]], 1).unwrap(), 0);
        assert_eq!(UserId::U1.choose(Vec::<[f64; 2]>::new(), 1), Err(UserError::NoAlternatives));
    }

    #[test]
    fn parse_and_display() {
        for u in UserId::ALL {
            assert_eq!(u.to_string().parse::<UserId>().unwrap(), u);
        }
        assert!("U0".parse::<UserId>().is_err());
        assert!("U13".parse::<UserId>().is_err());
        assert!("baseline".parse::<UserId>().is_err());
        assert_eq!(serde_json::to_string(&UserId::U7).unwrap(), "\"U7\"");
    }

    proptest! {
        #[test]
        fn scores_stay_in_unit_interval(c in 0.0f64..=1.0, o in 0.0f64..=1.0, s in 1usize..60) {
            for u in UserId::ALL {
                let v = u.usc([c, o], s);
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn minimizers_mirror_maximizers(c in 0.0f64..=1.0, o in 0.0f64..=1.0, s in 1usize..60) {
            let bc = [c, o];
            prop_assert!((UserId::U5.usc(bc, s) - (1.0 - UserId::U1.usc(bc, s))).abs() < 1e-12);
            prop_assert!((UserId::U7.usc(bc, s) - (1.0 - UserId::U3.usc(bc, s))).abs() < 1e-12);
            prop_assert!((UserId::U8.usc(bc, s) - (1.0 - UserId::U4.usc(bc, s))).abs() < 1e-12);
        }

        #[test]
        fn choice_invariant_under_monotone_transform(
            bcs in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..8),
            s in 1usize..12,
        ) {
            let bcs: Vec<[f64; 2]> = bcs.into_iter().map(|(a, b)| [a, b]).collect();
            for u in UserId::ALL {
                let direct = u.choose(bcs.iter().copied(), s).unwrap();
                // argmax of exp(3x) + x must agree with argmax of x
                let scores: Vec<f64> = bcs.iter().map(|&bc| (3.0 * u.usc(bc, s)).exp() + u.usc(bc, s)).collect();
                let mut best = 0;
                for (i, v) in scores.iter().enumerate() {
                    if *v > scores[best] {
                        best = i;
                    }
                }
                prop_assert_eq!(direct, best);
            }
        }
    }
}
