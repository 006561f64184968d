use rand::Rng;

use crate::error::{Error, Result};

/// Indices of the successful set: the first `⌈n/2⌉` entries after a stable
/// ascending sort by cost, ties broken by index.
pub fn successful_set(costs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    order.truncate(costs.len().div_ceil(2));
    order
}

/// Replaces every item outside the successful set by a copy of a member of
/// the set chosen uniformly at random. Output has the input's length and
/// order; members of the set stay where they were.
pub fn resample<T: Clone, R: Rng + ?Sized>(items: &[T], costs: &[f64], rng: &mut R) -> Result<Vec<T>> {
    if items.is_empty() {
        return Err(Error::invalid("cannot resample an empty clone set"));
    }
    if items.len() != costs.len() {
        return Err(Error::DimensionMismatch { expected: items.len(), got: costs.len() });
    }
    let keep = successful_set(costs);
    let mut survives = vec![false; items.len()];
    for &k in &keep {
        survives[k] = true;
    }
    Ok(items
        .iter()
        .zip(&survives)
        .map(|(item, &ok)| if ok { item.clone() } else { items[keep[rng.gen_range(0..keep.len())]].clone() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn worse_half_is_replaced() {
        let costs = [3.0, 1.0, 4.0, 2.0];
        let items = ["c", "a", "d", "b"];
        for seed in 0..20 {
            let out = resample(&items, &costs, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(out[1], "a");
            assert_eq!(out[3], "b");
            assert!(out.iter().all(|s| *s == "a" || *s == "b"));
        }
    }

    #[test]
    fn single_clone_unchanged() {
        let out = resample(&[7], &[9.0], &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out, vec![7]);
    }

    #[test]
    fn ties_keep_lowest_indices() {
        assert_eq!(successful_set(&[1.0; 5]), vec![0, 1, 2]);
        let out = resample(&[0, 1, 2, 3, 4], &[1.0; 5], &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(&out[..3], &[0, 1, 2]);
        assert!(out[3..].iter().all(|k| *k < 3));
    }

    #[test]
    fn empty_is_an_error() {
        assert!(resample::<u8, _>(&[], &[], &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn cardinality_and_provenance(costs in prop::collection::vec(0.0f64..10.0, 1..40), seed in any::<u64>()) {
            let items: Vec<usize> = (0..costs.len()).collect();
            let out = resample(&items, &costs, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let keep = successful_set(&costs);
            prop_assert_eq!(out.len(), items.len());
            prop_assert_eq!(keep.len(), costs.len().div_ceil(2));
            for &k in &keep {
                prop_assert_eq!(out[k], k);
            }
            for o in &out {
                prop_assert!(keep.contains(o));
            }
            let worst_kept = keep.iter().map(|&k| costs[k]).fold(f64::MIN, f64::max);
            for (k, c) in costs.iter().enumerate() {
                if !keep.contains(&k) {
                    prop_assert!(*c >= worst_kept);
                }
            }
        }
    }
}
