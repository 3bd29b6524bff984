//! Seedable generators for random rational kernels and distributions.
//!
//! Weights are small integers normalized to sum to one, so every generated
//! probability is an exact rational with a small denominator.

use rand::Rng;

use crate::mechanism::MechanismKernel;
use crate::ratio::{rat, Rational};
use crate::sem::{product_assignments, Dist, FiniteDomain, KernelTable};

/// Largest integer weight drawn for a single entry.
pub const MAX_WEIGHT: i64 = 4;

/// A probability vector of length `len`. With `full_support` every entry is
/// positive; otherwise entries may be zero but at least one is positive.
pub fn probability_vector<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    full_support: bool,
) -> Vec<Rational> {
    let low = if full_support { 1 } else { 0 };
    let mut weights: Vec<i64> = (0..len).map(|_| rng.gen_range(low..=MAX_WEIGHT)).collect();
    if weights.iter().all(|&w| w == 0) {
        let k = rng.gen_range(0..len);
        weights[k] = 1;
    }
    let total: i64 = weights.iter().sum();
    weights.into_iter().map(|w| rat(w, total)).collect()
}

fn labels(size: usize) -> FiniteDomain {
    FiniteDomain::new((0..size).map(|k| k.to_string())).expect("distinct labels")
}

/// A kernel over `{0..data_size-1}^n` with outputs `{0..output_size-1}`;
/// the null value is `"0"`.
pub fn random_kernel<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    data_size: usize,
    output_size: usize,
    full_support: bool,
) -> MechanismKernel {
    let rows: Vec<Vec<Rational>> = (0..data_size.pow(n as u32))
        .map(|_| probability_vector(rng, output_size, full_support))
        .collect();
    MechanismKernel::new(n, labels(data_size), "0", labels(output_size), rows)
        .expect("valid random kernel")
}

pub fn random_table<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    width: usize,
    full_support: bool,
) -> KernelTable {
    let dense = (0..rows)
        .map(|_| probability_vector(rng, width, full_support))
        .collect();
    KernelTable::from_dense(dense).expect("rows are distributions")
}

/// A joint distribution over `vars` with the given domain sizes.
pub fn random_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    vars: Vec<String>,
    sizes: &[usize],
    full_support: bool,
) -> Dist {
    let assignments = product_assignments(sizes);
    let weights = probability_vector(rng, assignments.len(), full_support);
    Dist::new(vars, assignments.into_iter().zip(weights)).expect("weights sum to one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vectors_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for len in 1..6 {
            for full in [true, false] {
                let v = probability_vector(&mut rng, len, full);
                assert_eq!(v.iter().sum::<Rational>(), Rational::one());
                if full {
                    assert!(v.iter().all(|p| !p.is_zero()));
                }
            }
        }
    }

    #[test]
    fn same_seed_same_kernel() {
        let a = random_kernel(&mut ChaCha8Rng::seed_from_u64(3), 2, 3, 2, true);
        let b = random_kernel(&mut ChaCha8Rng::seed_from_u64(3), 2, 3, 2, true);
        assert_eq!(a, b);
        assert_eq!(a.rows().len(), 9);
    }
}
