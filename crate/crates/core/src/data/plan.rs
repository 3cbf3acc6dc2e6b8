use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the feature space is cut into arriving groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupStrategy {
    /// Externally supplied grouping, used untouched.
    Natural,
    Half,
    Tenth,
    Hundredth,
    TwoHundredth,
    ExplicitSize(usize),
}

impl GroupStrategy {
    /// Group size `k` for `d` features, or an error when the strategy does
    /// not apply to `d`.
    pub fn group_size(self, d: usize) -> Result<usize> {
        let k = match self {
            Self::Natural => {
                return Err(Error::InvalidPlan(
                    "natural grouping must be supplied explicitly".into(),
                ))
            }
            Self::Half => d.div_ceil(2),
            Self::ExplicitSize(k) => k,
            Self::Tenth | Self::Hundredth | Self::TwoHundredth if d < 100 => {
                return Err(Error::InvalidPlan(format!(
                    "strategy {self} needs at least 100 features (got {d}); use half or an explicit size"
                )))
            }
            Self::Tenth => d.div_ceil(10),
            Self::Hundredth => d.div_ceil(100),
            Self::TwoHundredth => d.div_ceil(200),
        };
        if k == 0 {
            return Err(Error::InvalidPlan(format!(
                "strategy {self} gives empty groups for d={d}"
            )));
        }
        Ok(k)
    }
}

impl fmt::Display for GroupStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Natural => write!(f, "natural"),
            Self::Half => write!(f, "half"),
            Self::Tenth => write!(f, "tenth"),
            Self::Hundredth => write!(f, "hundredth"),
            Self::TwoHundredth => write!(f, "two-hundredth"),
            Self::ExplicitSize(k) => write!(f, "size:{k}"),
        }
    }
}

impl FromStr for GroupStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "natural" => Self::Natural,
            "half" => Self::Half,
            "tenth" => Self::Tenth,
            "hundredth" => Self::Hundredth,
            "two-hundredth" => Self::TwoHundredth,
            other => {
                let k = other
                    .strip_prefix("size:")
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown group strategy `{other}`")))?;
                Self::ExplicitSize(k)
            }
        })
    }
}

/// Ordered, pairwise disjoint feature groups (0-based feature indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPlan {
    pub seed: u64,
    pub strategy: GroupStrategy,
    groups: Vec<Vec<usize>>,
}

impl GroupPlan {
    fn validated(seed: u64, strategy: GroupStrategy, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::InvalidPlan(format!("group {g} is empty")));
            }
            for &idx in group {
                if !seen.insert(idx) {
                    return Err(Error::InvalidPlan(format!("feature {idx} appears twice")));
                }
            }
        }
        Ok(Self { seed, strategy, groups })
    }

    /// Wraps an externally given grouping.
    pub fn natural(groups: Vec<Vec<usize>>) -> Result<Self> {
        Self::validated(0, GroupStrategy::Natural, groups)
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Number of features covered by the plan.
    pub fn n_features(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Feature indices in arrival order.
    pub fn flattened(&self) -> Vec<usize> {
        self.groups.iter().flatten().copied().collect()
    }

    /// Same groups, arriving in the order given by `order` (a permutation of
    /// group positions).
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.groups.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidPlan("group order is not a permutation".into()));
        }
        Ok(Self {
            seed: self.seed,
            strategy: self.strategy,
            groups: order.iter().map(|&g| self.groups[g].clone()).collect(),
        })
    }

    /// Random group arrival order drawn from `seed`.
    pub fn shuffled_order(&self, seed: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.groups.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        order
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text)?;
        Self::validated(raw.seed, raw.strategy, raw.groups)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Permutes `0..d` with a seeded RNG and cuts it into consecutive groups of
/// the strategy's size; the last group takes the remainder.
pub fn make_group_plan(d: usize, strategy: GroupStrategy, seed: u64) -> Result<GroupPlan> {
    if d == 0 {
        return Err(Error::InvalidPlan("no features to group".into()));
    }
    let k = strategy.group_size(d)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let groups = order.chunks(k).map(<[usize]>::to_vec).collect();
    GroupPlan::validated(seed, strategy, groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(plan: &GroupPlan) -> Vec<usize> {
        plan.groups().iter().map(Vec::len).collect()
    }

    #[test]
    fn half_split() {
        let plan = make_group_plan(34, GroupStrategy::Half, 1).unwrap();
        assert_eq!(sizes(&plan), vec![17, 17]);
    }

    #[test]
    fn hundredth_split() {
        let plan = make_group_plan(1000, GroupStrategy::Hundredth, 1).unwrap();
        assert_eq!(plan.n_groups(), 100);
        assert!(plan.groups().iter().all(|g| g.len() == 10));
    }

    #[test]
    fn explicit_size_with_remainder() {
        let a = make_group_plan(5, GroupStrategy::ExplicitSize(2), 9).unwrap();
        let b = make_group_plan(5, GroupStrategy::ExplicitSize(2), 9).unwrap();
        assert_eq!(sizes(&a), vec![2, 2, 1]);
        assert_eq!(a, b);
        let mut all = a.flattened();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn small_d_rejects_fractional_strategies() {
        assert!(make_group_plan(34, GroupStrategy::Tenth, 0).is_err());
        assert!(make_group_plan(5, GroupStrategy::ExplicitSize(0), 0).is_err());
        assert!(make_group_plan(5, GroupStrategy::Natural, 0).is_err());
        assert!(make_group_plan(0, GroupStrategy::Half, 0).is_err());
    }

    #[test]
    fn json_shape() {
        let plan = GroupPlan::natural(vec![vec![0, 1], vec![2]]).unwrap();
        let json: serde_json::Value = serde_json::from_str(&plan.to_json().unwrap()).unwrap();
        assert_eq!(json["strategy"], "natural");
        assert_eq!(json["groups"], serde_json::json!([[0, 1], [2]]));
        let sized = make_group_plan(5, GroupStrategy::ExplicitSize(2), 3).unwrap();
        assert_eq!(GroupPlan::from_json(&sized.to_json().unwrap()).unwrap(), sized);
    }

    #[test]
    fn invalid_natural_plans() {
        assert!(GroupPlan::natural(vec![vec![0], vec![]]).is_err());
        assert!(GroupPlan::natural(vec![vec![0, 1], vec![1]]).is_err());
        assert!(GroupPlan::from_json(r#"{"seed":0,"strategy":"natural","groups":[[0],[0]]}"#).is_err());
    }

    #[test]
    fn reorder_groups() {
        let plan = GroupPlan::natural(vec![vec![0], vec![1, 2], vec![3]]).unwrap();
        let r = plan.reordered(&[2, 0, 1]).unwrap();
        assert_eq!(r.groups(), &[vec![3], vec![0], vec![1, 2]]);
        assert!(plan.reordered(&[0, 0, 1]).is_err());
    }
}
