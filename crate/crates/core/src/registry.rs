//! Named outlier filters selectable at run time.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::correspondence::CorrespondenceSet;
use crate::error::{Error, Result};
use crate::estimate::{fit_affine_ransac, DEFAULT_RANSAC_ITERATIONS, DEFAULT_RANSAC_TOL};
use crate::gor::remove_outliers;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    /// Indices into the input, ascending.
    pub kept: Vec<usize>,
    /// Too little left to fit a transform.
    pub degenerate: bool,
}

impl FilterOutcome {
    fn degenerate() -> Self {
        Self {
            kept: Vec::new(),
            degenerate: true,
        }
    }
}

pub trait OutlierFilter: Send + Sync {
    fn name(&self) -> &str;

    fn filter(&self, cs: &CorrespondenceSet, seed: u64) -> Result<FilterOutcome>;
}

impl fmt::Debug for dyn OutlierFilter + '_ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OutlierFilter({})", self.name())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GorFilter;

impl OutlierFilter for GorFilter {
    fn name(&self) -> &str {
        "gor"
    }

    fn filter(&self, cs: &CorrespondenceSet, _seed: u64) -> Result<FilterOutcome> {
        if cs.len() < 3 {
            return Ok(FilterOutcome::degenerate());
        }
        let out = remove_outliers(cs)?;
        Ok(FilterOutcome {
            kept: out.kept,
            degenerate: out.degenerate,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RansacFilter {
    pub inlier_tol: f64,
    pub iterations: usize,
}

impl Default for RansacFilter {
    fn default() -> Self {
        Self {
            inlier_tol: DEFAULT_RANSAC_TOL,
            iterations: DEFAULT_RANSAC_ITERATIONS,
        }
    }
}

impl OutlierFilter for RansacFilter {
    fn name(&self) -> &str {
        "ransac"
    }

    fn filter(&self, cs: &CorrespondenceSet, seed: u64) -> Result<FilterOutcome> {
        if cs.len() < 3 {
            return Ok(FilterOutcome::degenerate());
        }
        match fit_affine_ransac(cs, self.inlier_tol, self.iterations, seed) {
            Ok(r) => Ok(FilterOutcome {
                kept: r.inlier_indices(),
                degenerate: false,
            }),
            Err(Error::RansacFailed) => Ok(FilterOutcome::degenerate()),
            Err(e) => Err(e),
        }
    }
}

/// Filters keyed by name.
pub struct FilterRegistry {
    filters: BTreeMap<String, Box<dyn OutlierFilter>>,
}

impl FilterRegistry {
    pub fn empty() -> Self {
        Self {
            filters: BTreeMap::new(),
        }
    }

    /// Replaces any filter already registered under the same name.
    pub fn register(&mut self, filter: Box<dyn OutlierFilter>) {
        self.filters.insert(filter.name().to_string(), filter);
    }

    pub fn get(&self, name: &str) -> Result<&dyn OutlierFilter> {
        self.filters
            .get(name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::UnknownFilter(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.filters.keys().map(String::as_str)
    }
}

impl Default for FilterRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(GorFilter));
        r.register(Box::new(RansacFilter::default()));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::AffineTransform;

    struct KeepFirst;

    impl OutlierFilter for KeepFirst {
        fn name(&self) -> &str {
            "first"
        }

        fn filter(&self, _cs: &CorrespondenceSet, _seed: u64) -> Result<FilterOutcome> {
            Ok(FilterOutcome {
                kept: vec![0],
                degenerate: true,
            })
        }
    }

    fn sample() -> CorrespondenceSet {
        let t = AffineTransform::rotation(30.0);
        let mut cs = CorrespondenceSet::from_pairs(
            [
                [0.0, 0.0],
                [40.0, 5.0],
                [12.0, 33.0],
                [50.0, 47.0],
                [25.0, 18.0],
                [7.0, 60.0],
            ]
            .map(|p| (p, t.apply_point(p))),
        );
        cs.push([30.0, 30.0], [-80.0, 200.0]);
        cs
    }

    #[test]
    fn defaults_are_registered() {
        let r = FilterRegistry::default();
        assert_eq!(r.names().collect::<Vec<_>>(), ["gor", "ransac"]);
        assert!(matches!(r.get("lmeds"), Err(Error::UnknownFilter(_))));
    }

    #[test]
    fn both_filters_drop_the_planted_outlier() {
        let r = FilterRegistry::default();
        for name in ["gor", "ransac"] {
            let out = r.get(name).unwrap().filter(&sample(), 0).unwrap();
            assert_eq!(out.kept, vec![0, 1, 2, 3, 4, 5], "{name}");
            assert!(!out.degenerate);
        }
    }

    #[test]
    fn custom_filters_can_be_added() {
        let mut r = FilterRegistry::default();
        r.register(Box::new(KeepFirst));
        let f = r.get("first").unwrap();
        assert_eq!(format!("{f:?}"), "OutlierFilter(first)");
        assert_eq!(f.filter(&sample(), 0).unwrap().kept, vec![0]);
    }

    #[test]
    fn tiny_sets_are_degenerate() {
        let cs = CorrespondenceSet::from_pairs([([0.0, 0.0], [1.0, 1.0])]);
        let r = FilterRegistry::default();
        for name in ["gor", "ransac"] {
            assert!(r.get(name).unwrap().filter(&cs, 0).unwrap().degenerate);
        }
    }
}
