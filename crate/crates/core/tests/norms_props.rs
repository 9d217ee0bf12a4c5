use gcs_core::groups::{enumerate_gks, GroupPartition};
use gcs_core::norms::{
    block_shrink, check_decomposability, gamma_of, prox, prox_sorted_l1, soft_threshold, DecompositionTest, NormSpec,
};
use proptest::prelude::*;

fn partition() -> GroupPartition {
    GroupPartition::new(9, vec![vec![0, 4], vec![1, 2, 3], vec![5], vec![6, 7, 8]]).unwrap()
}

fn norms() -> Vec<NormSpec> {
    vec![
        NormSpec::L1,
        NormSpec::group_l2(partition()),
        NormSpec::sparse_group(partition(), 0.25).unwrap(),
        NormSpec::sorted_l1(vec![2.0, 1.8, 1.5, 1.5, 1.0, 0.7, 0.5, 0.5, 0.2]).unwrap(),
    ]
}

fn vec9() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 9)
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Sorted-ℓ1 norm from its definition.
fn slope_value(lambda: &[f64], x: &[f64]) -> f64 {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags.iter().zip(lambda).map(|(m, l)| m * l).sum()
}

proptest! {
    #[test]
    fn norm_axioms(x in vec9(), y in vec9(), s in -3.0f64..3.0) {
        for n in norms() {
            let (nx, ny) = (n.eval(&x).unwrap(), n.eval(&y).unwrap());
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            prop_assert!(n.eval(&sum).unwrap() <= nx + ny + 1e-12);
            let scaled: Vec<f64> = x.iter().map(|v| s * v).collect();
            prop_assert!((n.eval(&scaled).unwrap() - s.abs() * nx).abs() <= 1e-12 * nx.max(1.0));
            // Hölder with the dual norm
            prop_assert!(dot(&x, &y) <= nx * n.dual(&y).unwrap() + 1e-10);
        }
    }

    #[test]
    fn prox_is_firmly_nonexpansive(u in vec9(), v in vec9(), t in 0.01f64..4.0) {
        for n in norms() {
            let pu = prox(&n, &u, t).unwrap();
            let pv = prox(&n, &v, t).unwrap();
            let d: Vec<f64> = pu.iter().zip(&pv).map(|(a, b)| a - b).collect();
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&d, &d) <= dot(&d, &w) + 1e-10);
        }
    }

    #[test]
    fn prox_minimizes_its_objective(v in vec9(), t in 0.01f64..4.0, probe in vec9()) {
        for n in norms() {
            let z = prox(&n, &v, t).unwrap();
            let obj = |p: &[f64]| 0.5 * p.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + t * n.eval(p).unwrap();
            let best = obj(&z);
            for step in [1e-3, 1e-1, 1.0] {
                let p: Vec<f64> = z.iter().zip(&probe).map(|(a, b)| a + step * b).collect();
                prop_assert!(best <= obj(&p) + 1e-10);
            }
        }
    }

    #[test]
    fn slope_value_and_gamma(x in vec9()) {
        let lambda = [2.0, 1.8, 1.5, 1.5, 1.0, 0.7, 0.5, 0.5, 0.2];
        let n = NormSpec::sorted_l1(lambda.to_vec()).unwrap();
        prop_assert!((n.eval(&x).unwrap() - slope_value(&lambda, &x)).abs() <= 1e-12);
        prop_assert_eq!(gamma_of(&n), 0.2 / 2.0);
    }
}

#[test]
fn closed_form_proxes() {
    let v = [3.0, -0.5, 1.0, -2.0];
    assert_eq!(soft_threshold(&v, 1.0), vec![2.0, 0.0, 0.0, -1.0]);
    let p = GroupPartition::uniform(4, 2).unwrap();
    // group norms √9.25 and √5; threshold 2.5 keeps the first and zeroes the second
    let z = block_shrink(&v, &p, 2.5);
    let scale = 1.0 - 2.5 / 9.25f64.sqrt();
    assert!((z[0] - 3.0 * scale).abs() < 1e-15 && (z[1] + 0.5 * scale).abs() < 1e-15);
    assert_eq!(&z[2..], &[0.0, 0.0]);
    // equal weights reduce sorted-ℓ1 to a scaled ℓ1
    assert_eq!(prox_sorted_l1(&v, &[0.5; 4], 2.0).unwrap(), soft_threshold(&v, 1.0));
}

#[test]
fn spec_parsing_reads_weight_and_tree_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("w.txt"), "# weights\n3\n2\n1\n").unwrap();
    std::fs::write(dir.path().join("t.txt"), "l2 1.0 0 1 2\nl1 0.5 1 2\nlinf 2 3\n").unwrap();
    let p = GroupPartition::uniform(4, 2).unwrap();
    let slope = NormSpec::parse_spec("slope:w.txt", None, Some(dir.path())).unwrap();
    assert_eq!(slope.eval(&[0.0, -1.0, 3.0]).unwrap(), 3.0 * 3.0 + 2.0);
    let tree = NormSpec::parse_spec("tree:t.txt", None, Some(dir.path())).unwrap();
    let x = [3.0, 0.0, -4.0, -2.0];
    assert_eq!(tree.eval(&x).unwrap(), 5.0 + 0.5 * 4.0 + 2.0 * 2.0);
    assert!(matches!(NormSpec::parse_spec("gl", Some(&p), None).unwrap(), NormSpec::GroupL2 { .. }));
    assert!(NormSpec::parse_spec("gl", None, None).is_err());
    assert!(NormSpec::parse_spec("sgl:abc", Some(&p), None).is_err());
    assert!(NormSpec::parse_spec("slope:missing.txt", None, Some(dir.path())).is_err());
    assert!(NormSpec::parse_spec("nuclear", None, None).is_err());
}

#[test]
fn tree_norm_decomposes_over_its_maximal_sets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.txt"), "l2 1 0 1 2 3\nl1 0.3 0 1\nlinf 1 2\nl2 2 4 5\nl1 1 4\n").unwrap();
    let tree = NormSpec::parse_spec("tree:t.txt", None, Some(dir.path())).unwrap();
    let NormSpec::Tree { tree: t } = &tree else { unreachable!() };
    let maximal = t.maximal_partition();
    assert_eq!(maximal.groups(), &[vec![0, 1, 2, 3], vec![4, 5]]);
    let fam = enumerate_gks(&maximal, 4).unwrap();
    let rep = check_decomposability(&tree, &fam, DecompositionTest::Strict, 2000, 4).unwrap();
    assert_eq!(rep.violations, 0);
}
