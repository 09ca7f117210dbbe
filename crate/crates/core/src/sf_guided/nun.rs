use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::euclidean;

/// Nearest unlike neighbour of a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Nun {
    pub index: usize,
    pub instance: Vec<f64>,
    pub distance: f64,
    pub class: usize,
}

/// Closest training instance labelled outside `query_class`, ties to the
/// lower index.
pub fn find_nun(q: &[f64], train: &Dataset, query_class: usize) -> Result<Nun> {
    let mut best: Option<(f64, usize)> = None;
    for (i, x) in train.instances.iter().enumerate() {
        if train.labels[i] == query_class {
            continue;
        }
        let d = euclidean(q, x);
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, i));
        }
    }
    let (distance, index) = best.ok_or_else(|| Error::input("no training instance outside the query class"))?;
    Ok(Nun { index, instance: train.instances[index].clone(), distance, class: train.labels[index] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSchema, Schema};

    pub(crate) fn plane(points: &[[f64; 2]], labels: &[usize]) -> Dataset {
        let schema = Schema::new(
            vec![FeatureSchema::continuous("a", true), FeatureSchema::continuous("b", true)],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        Dataset::new(points.iter().map(|p| p.to_vec()).collect(), labels.to_vec(), schema).unwrap()
    }

    #[test]
    fn nearest_other_class_point() {
        let ds = plane(&[[0.1, 0.0], [2.0, 0.0], [1.0, 0.0]], &[0, 1, 1]);
        let nun = find_nun(&[0.0, 0.0], &ds, 0).unwrap();
        assert_eq!(nun.instance, vec![1.0, 0.0]);
        assert_eq!(nun.class, 1);
        assert_eq!(nun.distance, 1.0);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let ds = plane(&[[0.0, 1.0], [1.0, 0.0], [0.0, -1.0]], &[1, 1, 1]);
        assert_eq!(find_nun(&[0.0, 0.0], &ds, 0).unwrap().index, 0);
    }

    #[test]
    fn single_class_is_an_error() {
        let ds = plane(&[[0.0, 1.0], [1.0, 0.0]], &[0, 0]);
        assert!(find_nun(&[0.0, 0.0], &ds, 0).is_err());
    }
}
