//! Two-sample KS distance on degree CDFs and its bootstrap significance.
//!
//! The significance of an observed distance `D` between a base window and
//! its successor is the fraction of bootstrap distances that `D` strictly
//! exceeds. Each bootstrap replicate resamples the base degrees with
//! replacement and records the KS distance between the resample and the base.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{fraction, DegreeSequence, EmpiricalCdf};
use crate::seed::{derived_rng, TAG_BOOTSTRAP};

/// Supremum distance between two CDFs, always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KsDistance(f64);

impl KsDistance {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "KS distance {value} outside [0, 1]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Outcome of comparing an observed distance against bootstrap distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub p_value: f64,
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<KsDistance>>,
}

/// Exact KS statistic between two step CDFs on integer support.
///
/// Both functions are constant between consecutive points of the merged
/// support, so walking the merged support visits every candidate supremum.
pub fn ks_statistic(a: &EmpiricalCdf, b: &EmpiricalCdf) -> Result<KsDistance> {
    if a.support().is_empty() || b.support().is_empty() {
        return Err(Error::EmptyDegreeSequence);
    }
    let (sa, ca) = (a.support(), a.cumulative());
    let (sb, cb) = (b.support(), b.cumulative());
    let (mut i, mut j) = (0usize, 0usize);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut sup = 0.0f64;
    while i < sa.len() || j < sb.len() {
        let x = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        if sa.get(i) == Some(&x) {
            fa = ca[i];
            i += 1;
        }
        if sb.get(j) == Some(&x) {
            fb = cb[j];
            j += 1;
        }
        sup = sup.max((fa - fb).abs());
    }
    Ok(KsDistance(sup))
}

/// Dense view of a base degree sequence, prepared once and shared by all
/// replicates.
struct Resampler<'a> {
    base: &'a [u32],
    min: u32,
    base_cumulative: Vec<usize>,
}

impl<'a> Resampler<'a> {
    fn new(base: &'a [u32]) -> Self {
        let min = *base.iter().min().expect("non-empty base");
        let max = *base.iter().max().expect("non-empty base");
        let mut counts = vec![0usize; (max - min) as usize + 1];
        for &d in base {
            counts[(d - min) as usize] += 1;
        }
        let base_cumulative = counts
            .iter()
            .scan(0usize, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        Self {
            base,
            min,
            base_cumulative,
        }
    }

    fn replicate_distance(&self, sample_size: usize, seed: u64, replicate: u64) -> KsDistance {
        let mut rng = derived_rng(seed, &[TAG_BOOTSTRAP, replicate]);
        let n = self.base.len();
        let mut counts = vec![0usize; self.base_cumulative.len()];
        for _ in 0..sample_size {
            let d = self.base[rng.random_range(0..n)];
            counts[(d - self.min) as usize] += 1;
        }
        // Resampled values are a subset of the base values, so every jump of
        // either CDF lies inside [min, max].
        let mut running = 0usize;
        let mut sup = 0.0f64;
        for (c, &bc) in counts.iter().zip(&self.base_cumulative) {
            running += c;
            let diff = (fraction(running, sample_size) - fraction(bc, n)).abs();
            sup = sup.max(diff);
        }
        KsDistance(sup)
    }
}

fn check_bootstrap_args(
    base: &DegreeSequence,
    replicates: usize,
    sample_size: usize,
) -> Result<()> {
    if base.is_empty() {
        return Err(Error::EmptyDegreeSequence);
    }
    if replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be >= 1".into()));
    }
    if sample_size == 0 {
        return Err(Error::InvalidParameter("sample_size must be >= 1".into()));
    }
    Ok(())
}

/// KS distances between `base` and `replicates` resamples of it, each of
/// `sample_size` draws with replacement.
///
/// Replicate `j` uses a stream derived from `(seed, j)`, so the output is
/// identical whether replicates run serially or on any number of threads.
pub fn bootstrap_distances(
    base: &DegreeSequence,
    replicates: usize,
    sample_size: usize,
    seed: u64,
) -> Result<Vec<KsDistance>> {
    check_bootstrap_args(base, replicates, sample_size)?;
    let resampler = Resampler::new(base.degrees());
    Ok((0..replicates as u64)
        .into_par_iter()
        .map(|j| resampler.replicate_distance(sample_size, seed, j))
        .collect())
}

/// Serial reference used to check the parallel path.
pub fn bootstrap_distances_serial(
    base: &DegreeSequence,
    replicates: usize,
    sample_size: usize,
    seed: u64,
) -> Result<Vec<KsDistance>> {
    check_bootstrap_args(base, replicates, sample_size)?;
    let resampler = Resampler::new(base.degrees());
    Ok((0..replicates as u64)
        .map(|j| resampler.replicate_distance(sample_size, seed, j))
        .collect())
}

/// Fraction of bootstrap distances strictly below `observed`.
pub fn bootstrap_pvalue(observed: KsDistance, distances: &[KsDistance]) -> Result<BootstrapResult> {
    if distances.is_empty() {
        return Err(Error::EmptyDistances);
    }
    let below = distances.iter().filter(|d| observed.0 > d.0).count();
    Ok(BootstrapResult {
        p_value: fraction(below, distances.len()),
        replicates: distances.len(),
        distances: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cdf(v: &[u32]) -> EmpiricalCdf {
        EmpiricalCdf::from_values(v).unwrap()
    }

    fn ks(a: &[u32], b: &[u32]) -> f64 {
        ks_statistic(&cdf(a), &cdf(b)).unwrap().value()
    }

    /// Evaluates both step functions at every integer in the joint range.
    fn brute_force_ks(a: &[u32], b: &[u32]) -> f64 {
        let lo = *a.iter().chain(b).min().unwrap() as i64;
        let hi = *a.iter().chain(b).max().unwrap() as i64;
        let at = |v: &[u32], x: i64| {
            v.iter().filter(|&&d| i64::from(d) <= x).count() as f64 / v.len() as f64
        };
        (lo..=hi)
            .map(|x| (at(a, x) - at(b, x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks(&[1, 2, 2, 5], &[5, 2, 1, 2]), 0.0);
        assert_eq!(ks(&[1, 1, 2, 2], &[1, 2, 2, 3]), 0.25);
        assert_eq!(ks(&[1, 1], &[5, 5]), 1.0);
    }

    #[test]
    fn degenerate_base_reproduces_itself() {
        let d = bootstrap_distances(&vec![3, 3, 3].into(), 50, 3, 9).unwrap();
        assert_eq!(d.len(), 50);
        assert!(d.iter().all(|d| d.value() == 0.0));
    }

    #[test]
    fn two_point_base_distances() {
        // Resamples of {1,2} with two draws: {1,1}/{2,2} give 0.5, mixed give 0.
        let d = bootstrap_distances(&vec![1, 2].into(), 200, 2, 3).unwrap();
        assert!(d.iter().all(|d| d.value() == 0.0 || d.value() == 0.5));
        assert!(d.iter().any(|d| d.value() == 0.5));
        assert!(d.iter().any(|d| d.value() == 0.0));
        // A resample of {1,1} against {1,2}: CDF(1) is 1.0 vs 0.5.
        assert_eq!(ks(&[1, 1], &[1, 2]), 0.5);
    }

    #[test]
    fn bootstrap_is_reproducible_and_schedule_free() {
        let base: Vec<u32> = (0..200).map(|i| (i * 7 % 23) as u32).collect();
        let base = DegreeSequence::new(base);
        let a = bootstrap_distances(&base, 1000, 200, 42).unwrap();
        let b = bootstrap_distances(&base, 1000, 200, 42).unwrap();
        let c = bootstrap_distances_serial(&base, 1000, 200, 42).unwrap();
        let bits = |v: &[KsDistance]| v.iter().map(|d| d.value().to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(bits(&a), bits(&c));
        assert_ne!(
            bits(&a),
            bits(&bootstrap_distances(&base, 1000, 200, 43).unwrap())
        );
    }

    #[test]
    fn bootstrap_rejects_bad_arguments() {
        assert!(bootstrap_distances(&DegreeSequence::default(), 1, 1, 0).is_err());
        assert!(bootstrap_distances(&vec![1].into(), 0, 1, 0).is_err());
        assert!(bootstrap_distances(&vec![1].into(), 1, 0, 0).is_err());
    }

    #[test]
    fn pvalue_examples() {
        let d: Vec<KsDistance> = (0..10).map(|i| KsDistance(i as f64 / 10.0)).collect();
        assert_eq!(bootstrap_pvalue(KsDistance(0.0), &d).unwrap().p_value, 0.0);

        let zeros = vec![KsDistance(0.0); 1000];
        let r = bootstrap_pvalue(KsDistance(0.1), &zeros).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.replicates, 1000);

        // 1000 distinct distances; observed sits between the 500th and 501st.
        let d: Vec<KsDistance> = (0..1000).map(|i| KsDistance(i as f64 / 1000.0)).collect();
        let r = bootstrap_pvalue(KsDistance(0.4995), &d).unwrap();
        assert_eq!(r.p_value, 0.5);
        // Ties do not count.
        let r = bootstrap_pvalue(KsDistance(0.5), &d).unwrap();
        assert_eq!(r.p_value, 0.5);

        assert!(matches!(
            bootstrap_pvalue(KsDistance(0.1), &[]),
            Err(Error::EmptyDistances)
        ));
    }

    proptest! {
        #[test]
        fn ks_matches_brute_force(
            a in prop::collection::vec(0u32..20, 1..60),
            b in prop::collection::vec(0u32..20, 1..60),
        ) {
            let fast = ks(&a, &b);
            prop_assert!((fast - brute_force_ks(&a, &b)).abs() <= 1e-12);
            prop_assert_eq!(fast, ks(&b, &a));
            prop_assert!((0.0..=1.0).contains(&fast));
        }

        #[test]
        fn replicate_distance_matches_generic_ks(
            base in prop::collection::vec(0u32..15, 1..80),
            sample_size in 1usize..100,
            seed in any::<u64>(),
        ) {
            // Rebuild each resample and push it through the generic path.
            let seq = DegreeSequence::new(base.clone());
            let resampler = Resampler::new(&base);
            for j in 0..4u64 {
                let mut rng = derived_rng(seed, &[TAG_BOOTSTRAP, j]);
                let sample: Vec<u32> = (0..sample_size).map(|_| base[rng.random_range(0..base.len())]).collect();
                let expected = ks_statistic(&cdf(&sample), &EmpiricalCdf::from_degrees(&seq).unwrap()).unwrap();
                prop_assert_eq!(resampler.replicate_distance(sample_size, seed, j).value().to_bits(), expected.value().to_bits());
            }
        }

        #[test]
        fn pvalue_monotone_in_observed(
            dist in prop::collection::vec(0.0f64..1.0, 1..100),
            x in 0.0f64..1.0,
            y in 0.0f64..1.0,
        ) {
            let d: Vec<KsDistance> = dist.into_iter().map(KsDistance).collect();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let plo = bootstrap_pvalue(KsDistance(lo), &d).unwrap().p_value;
            let phi = bootstrap_pvalue(KsDistance(hi), &d).unwrap().p_value;
            prop_assert!(plo <= phi);
        }
    }
}
