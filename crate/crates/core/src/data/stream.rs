use super::dataset::Dataset;
use super::plan::GroupPlan;
use crate::error::{Error, Result};

/// One arriving group: its position in the plan and its features.
#[derive(Debug, Clone)]
pub struct FeatureGroup<'a> {
    pub id: usize,
    pub features: Vec<(usize, &'a [f64])>,
}

impl FeatureGroup<'_> {
    pub fn indices(&self) -> Vec<usize> {
        self.features.iter().map(|(i, _)| *i).collect()
    }
}

/// Simulated online arrival of feature groups over a fixed sample set.
/// Each group is yielded once, in plan order.
#[derive(Debug, Clone)]
pub struct FeatureStream<'a> {
    dataset: &'a Dataset,
    plan: &'a GroupPlan,
    cursor: usize,
}

impl<'a> FeatureStream<'a> {
    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn plan(&self) -> &'a GroupPlan {
        self.plan
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor >= self.plan.n_groups()
    }

    /// Flattens the remaining groups into single features, for the
    /// per-feature baselines.
    pub fn into_features(self) -> impl Iterator<Item = (usize, &'a [f64])> {
        self.flat_map(|g| g.features)
    }
}

impl<'a> Iterator for FeatureStream<'a> {
    type Item = FeatureGroup<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        let group = self.plan.groups().get(self.cursor)?;
        let id = self.cursor;
        self.cursor += 1;
        let features = group
            .iter()
            .map(|&j| (j, self.dataset.features()[j].as_slice()))
            .collect();
        Some(FeatureGroup { id, features })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.plan.n_groups() - self.cursor;
        (left, Some(left))
    }
}

/// Opens a stream over `plan`, checking every index against the dataset.
pub fn stream_groups<'a>(dataset: &'a Dataset, plan: &'a GroupPlan) -> Result<FeatureStream<'a>> {
    let d = dataset.n_features();
    if let Some(&index) = plan.groups().iter().flatten().find(|&&j| j >= d) {
        return Err(Error::IndexOutOfRange { index, len: d });
    }
    Ok(FeatureStream {
        dataset,
        plan,
        cursor: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Labels;

    fn ds() -> Dataset {
        let labels = Labels::new(vec![1, 2]).unwrap();
        Dataset::new(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]], labels, None).unwrap()
    }

    #[test]
    fn yields_groups_in_order_once() {
        let ds = ds();
        let plan = GroupPlan::natural(vec![vec![0, 1], vec![2]]).unwrap();
        let mut s = stream_groups(&ds, &plan).unwrap();
        let g0 = s.next().unwrap();
        assert_eq!((g0.id, g0.indices()), (0, vec![0, 1]));
        assert_eq!(g0.features[1].1, &[1.0, 0.0]);
        let g1 = s.next().unwrap();
        assert_eq!((g1.id, g1.indices()), (1, vec![2]));
        assert!(s.next().is_none());
        assert!(s.is_exhausted());
        assert!(s.next().is_none());
    }

    #[test]
    fn empty_plan_ends_immediately() {
        let ds = ds();
        let plan = GroupPlan::natural(vec![]).unwrap();
        let mut s = stream_groups(&ds, &plan).unwrap();
        assert!(s.next().is_none());
    }

    #[test]
    fn out_of_range_index() {
        let ds = ds();
        let plan = GroupPlan::natural(vec![vec![0], vec![3]]).unwrap();
        assert!(matches!(
            stream_groups(&ds, &plan),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }
}
