use serde::{Deserialize, Serialize};

use crate::label::{Label, NUM_CLASSES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct KnnPoint {
    pub label: Label,
    #[serde(with = "crate::numfmt::vec")]
    pub values: Vec<f64>,
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices and squared distances of the `k` nearest training points, nearest
/// first, equal distances ordered by training index.
pub(crate) fn nearest(train: &[KnnPoint], query: &[f64], k: usize) -> Vec<(f64, usize)> {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(&p.values, query), i))
        .collect();
    let k = k.min(d.len());
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() && k > 0 {
        d.select_nth_unstable_by(k - 1, cmp);
    }
    d.truncate(k);
    d.sort_unstable_by(cmp);
    d
}

/// Vote fractions over the neighbours and the decided label.
///
/// Equal vote counts go to the class with the smaller summed Euclidean
/// distance, then to the lower class index.
pub(crate) fn vote(train: &[KnnPoint], neighbours: &[(f64, usize)]) -> ([f64; NUM_CLASSES], Label) {
    let mut counts = [0usize; NUM_CLASSES];
    let mut dist = [0.0f64; NUM_CLASSES];
    for (d2, i) in neighbours {
        let c = train[*i].label.index();
        counts[c] += 1;
        dist[c] += d2.sqrt();
    }
    let mut best = None::<usize>;
    for c in 0..NUM_CLASSES {
        if counts[c] == 0 {
            continue;
        }
        best = match best {
            Some(b) if counts[b] > counts[c] || (counts[b] == counts[c] && dist[b] <= dist[c]) => Some(b),
            _ => Some(c),
        };
    }
    let k = neighbours.len() as f64;
    let mut scores = [0.0; NUM_CLASSES];
    for c in 0..NUM_CLASSES {
        scores[c] = counts[c] as f64 / k;
    }
    (scores, Label::from_index(best.expect("at least one neighbour")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(label: usize, values: &[f64]) -> KnnPoint {
        KnnPoint {
            label: Label::from_index(label),
            values: values.to_vec(),
        }
    }

    #[test]
    fn hand_counted_vote() {
        let train = vec![
            point(2, &[1.0]),
            point(2, &[2.0]),
            point(7, &[3.0]),
            point(2, &[4.0]),
            point(7, &[5.0]),
            point(0, &[50.0]),
        ];
        let n = nearest(&train, &[0.0], 5);
        assert_eq!(n.iter().map(|x| x.1).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        let (scores, label) = vote(&train, &n);
        assert_eq!(scores[2], 0.6);
        assert_eq!(scores[7], 0.4);
        assert_eq!(scores.iter().sum::<f64>(), 1.0);
        assert_eq!(label.index(), 2);
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let train = vec![point(1, &[1.0]), point(0, &[-1.0]), point(3, &[1.0])];
        let n = nearest(&train, &[0.0], 2);
        assert_eq!(n.iter().map(|x| x.1).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn vote_ties_use_distance_then_class() {
        // Two votes each; class 5 is closer in sum.
        let train = vec![
            point(1, &[1.0]),
            point(5, &[1.5]),
            point(5, &[-1.5]),
            point(1, &[3.0]),
        ];
        let (_, label) = vote(&train, &nearest(&train, &[0.0], 4));
        assert_eq!(label.index(), 5);
        // Equal counts and equal sums: lower class.
        let train = vec![point(4, &[1.0]), point(2, &[-1.0])];
        let (scores, label) = vote(&train, &nearest(&train, &[0.0], 2));
        assert_eq!(label.index(), 2);
        assert_eq!(scores[2], 0.5);
    }
}
