//! Sampling ranges for random scenes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::KvConfig;

/// Closed interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRanges {
    pub length: Range,
    pub width: Range,
    pub height: Range,
    pub rt60: Range,
    pub distance: Range,
    /// Minimum distance from the array center to every wall.
    pub wall_margin: f64,
    /// Minimum distance from a source to every wall.
    pub source_margin: f64,
    pub duration_s: f64,
    /// Train and valid scenes hold 1 to `max_sources` sources.
    pub max_sources: usize,
    pub test_sources: usize,
    /// Reverberation times used for test scenes.
    pub test_rt60: Vec<f64>,
}

impl Default for SceneRanges {
    fn default() -> Self {
        Self {
            length: Range::new(6.0, 10.0),
            width: Range::new(4.0, 8.0),
            height: Range::new(3.0, 5.0),
            rt60: Range::new(0.2, 0.5),
            distance: Range::new(0.5, 2.5),
            wall_margin: 1.2,
            source_margin: 0.1,
            duration_s: 4.0,
            max_sources: 3,
            test_sources: 2,
            test_rt60: vec![0.2, 0.4, 0.6],
        }
    }
}

impl SceneRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
            ("rt60", self.rt60),
            ("distance", self.distance),
        ] {
            if !(r.min > 0.0 && r.min <= r.max && r.max.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} range {} - {} is invalid", r.min, r.max)));
            }
        }
        if self.wall_margin < 0.0 || self.source_margin < 0.0 {
            return Err(Error::InvalidConfig("margins must be non-negative".into()));
        }
        if self.source_margin + self.distance.min >= self.wall_margin {
            return Err(Error::InvalidConfig(
                "closest source distance plus source margin must stay below the array wall margin".into(),
            ));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidConfig("duration must be positive".into()));
        }
        if self.max_sources == 0 || self.test_sources == 0 {
            return Err(Error::InvalidConfig("source counts must be >= 1".into()));
        }
        if self.test_rt60.is_empty() || self.test_rt60.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidConfig("test_rt60 needs positive values".into()));
        }
        Ok(())
    }

    /// Applies `<name>_min`, `<name>_max` and the scalar keys, consuming them.
    pub fn apply(&mut self, cfg: &mut KvConfig) -> Result<()> {
        for (name, r) in [
            ("length", &mut self.length),
            ("width", &mut self.width),
            ("height", &mut self.height),
            ("rt60", &mut self.rt60),
            ("distance", &mut self.distance),
        ] {
            cfg.take_into(&format!("{name}_min"), &mut r.min)?;
            cfg.take_into(&format!("{name}_max"), &mut r.max)?;
        }
        cfg.take_into("wall_margin", &mut self.wall_margin)?;
        cfg.take_into("source_margin", &mut self.source_margin)?;
        cfg.take_into("duration_s", &mut self.duration_s)?;
        cfg.take_into("max_sources", &mut self.max_sources)?;
        cfg.take_into("test_sources", &mut self.test_sources)?;
        if let Some(v) = cfg.take_list("test_rt60")? {
            self.test_rt60 = v;
        }
        self.validate()
    }

    /// Key=value text equivalent to these ranges.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (name, r) in [
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
            ("rt60", self.rt60),
            ("distance", self.distance),
        ] {
            s += &format!("{name}_min = {}\n{name}_max = {}\n", r.min, r.max);
        }
        let list: Vec<String> = self.test_rt60.iter().map(f64::to_string).collect();
        s += &format!(
            "wall_margin = {}\nsource_margin = {}\nduration_s = {}\nmax_sources = {}\ntest_sources = {}\ntest_rt60 = {}\n",
            self.wall_margin,
            self.source_margin,
            self.duration_s,
            self.max_sources,
            self.test_sources,
            list.join(", ")
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut r = SceneRanges::default();
        r.rt60 = Range::new(0.25, 0.3);
        r.test_rt60 = vec![0.3];
        let mut cfg = KvConfig::parse(&r.to_kv()).unwrap();
        let mut back = SceneRanges::default();
        back.apply(&mut cfg).unwrap();
        cfg.finish().unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn rejects_inverted_range() {
        let mut cfg = KvConfig::parse("length_min = 9\nlength_max = 7").unwrap();
        assert!(SceneRanges::default().apply(&mut cfg).is_err());
    }
}
