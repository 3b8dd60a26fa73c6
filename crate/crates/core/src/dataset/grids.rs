//! Dataset splits and their candidate source azimuths.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }

    /// (first azimuth, spacing) in degrees.
    fn grid_params(self) -> (f64, f64) {
        match self {
            Split::Train => (0.0, 5.0),
            Split::Valid => (2.5, 5.0),
            Split::Test => (1.25, 2.5),
        }
    }

    /// Candidate azimuths in degrees, ascending in `[0, 360)`.
    pub fn angle_grid(self) -> Vec<f64> {
        let (start, step) = self.grid_params();
        let n = (360.0 / step).round() as usize;
        (0..n).map(|i| start + i as f64 * step).collect()
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidConfig(format!("unknown split {s:?} (train, valid, test)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn keys(s: Split) -> HashSet<i64> {
        // angles are multiples of 1.25 degrees, exact in quarter-degree units times 100
        s.angle_grid().iter().map(|a| (a * 100.0).round() as i64).collect()
    }

    #[test]
    fn grids_have_expected_shape() {
        let train = Split::Train.angle_grid();
        assert_eq!(train.len(), 72);
        assert_eq!((train[0], train[71]), (0.0, 355.0));
        let valid = Split::Valid.angle_grid();
        assert_eq!((valid.len(), valid[0], valid[71]), (72, 2.5, 357.5));
        let test = Split::Test.angle_grid();
        assert_eq!((test.len(), test[0], test[143]), (144, 1.25, 358.75));
        for (s, step) in [(Split::Train, 5.0), (Split::Valid, 5.0), (Split::Test, 2.5)] {
            let g = s.angle_grid();
            assert!(g.windows(2).all(|w| (w[1] - w[0] - step).abs() < 1e-12));
        }
    }

    #[test]
    fn grids_are_disjoint() {
        let (a, b, c) = (keys(Split::Train), keys(Split::Valid), keys(Split::Test));
        assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
    }

    #[test]
    fn names_round_trip() {
        for s in Split::ALL {
            assert_eq!(s.name().parse::<Split>().unwrap(), s);
        }
        assert!("dev".parse::<Split>().is_err());
    }
}
