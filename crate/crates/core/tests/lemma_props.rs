//! The auxiliary inequalities, with constants taken from the analytic
//! constants module, on random error vectors and random matrices.

use gcs_core::groups::{enumerate_gks, GroupPartition};
use gcs_core::lemmas::{double_head_bound, head_bound, tail_sum, tail_sum_after_first, Split};
use gcs_core::norms::{pair_constants, ConstantsMode, NormSpec};
use gcs_core::sensing::{certify_family, gen_gaussian};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const TOL: f64 = 1e-12;

fn check(p: &GroupPartition, k: usize, approx: &NormSpec, m: usize, seed: u64) -> Result<(), TestCaseError> {
    let n = p.n();
    let fk = enumerate_gks(p, k).unwrap();
    let f2k = enumerate_gks(p, 2 * k).unwrap();
    let consts = pair_constants(approx, approx, &fk, ConstantsMode::Analytic).unwrap();
    let a = gen_gaussian(m, n, seed).unwrap();
    let (ck, c2k) = (certify_family(&a, &fk).unwrap(), certify_family(&a, &f2k).unwrap());
    if !c2k.injective() {
        // ρ̲ computed from a singular Gram matrix is round-off; the right
        // sides are then reported as +∞
        prop_assert_eq!(double_head_bound(&a, &Split::new(&vec![1.0; n], &fk.sets()[0], approx, &fk).unwrap(), 1.0, &c2k).rhs, f64::INFINITY);
    }
    prop_assume!(ck.rho_low > 1e-8 && c2k.rho_low > 1e-8);
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let h: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(StandardNormal) * r.random_range(0.0..3.0)).collect();
    let lambda0 = fk.sets()[r.random_range(0..fk.len())].clone();
    let split = Split::new(&h, &lambda0, approx, &fk).unwrap();
    prop_assert!(tail_sum(&split, consts.c).holds(TOL));
    prop_assert!(head_bound(&a, &split, consts.c, &ck, &c2k).unwrap().holds(TOL));
    if let Some(f) = consts.f {
        prop_assert!(tail_sum_after_first(&split, f).holds(TOL));
        prop_assert!(double_head_bound(&a, &split, f, &c2k).holds(TOL));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pure_sparsity(seed in 0u64..1_000_000, m in 4usize..30) {
        check(&GroupPartition::singletons(14).unwrap(), 3, &NormSpec::L1, m, seed)?;
    }

    #[test]
    fn uniform_groups(seed in 0u64..1_000_000, m in 4usize..40) {
        let p = GroupPartition::uniform(18, 3).unwrap();
        check(&p, 6, &NormSpec::group_l2(p.clone()), m, seed)?;
    }

    #[test]
    fn sparse_group(seed in 0u64..1_000_000, mu in 0.0f64..=1.0) {
        let p = GroupPartition::new(12, vec![vec![0, 1, 2], vec![3], vec![4, 5], vec![6, 7, 8, 9], vec![10, 11]]).unwrap();
        check(&p, 4, &NormSpec::sparse_group(p.clone(), mu).unwrap(), 10, seed)?;
    }
}
