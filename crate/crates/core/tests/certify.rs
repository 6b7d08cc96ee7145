use num_traits::{One, Zero};
use perron_lattice::analysis::lambda_product_rational;
use perron_lattice::exact::to_f64;
use perron_lattice::{
    certify_constants, check_lipschitz_bound, check_nonexpansive, find_best, rat,
    verify_corollary, AffineMap, CertifyOptions, IntegerMap, LatticeVector, Rational,
    SphereSlice, ZigzagMap,
};
use proptest::prelude::*;

type Grid = Vec<Vec<(Vec<Vec<u64>>, Vec<u64>)>>;

fn zigzag_strategy() -> impl Strategy<Value = (usize, Grid)> {
    (2usize..=3).prop_flat_map(|d| {
        let piece = (
            prop::collection::vec(prop::collection::vec(0u64..=5, d), d),
            prop::collection::vec(1u64..=5, d),
        );
        let row = prop::collection::vec(piece, 1..=2);
        (Just(d), prop::collection::vec(row, 1..=2))
    })
}

fn build(grid: &Grid) -> IntegerMap {
    ZigzagMap::new(
        grid.iter()
            .map(|row| {
                row.iter()
                    .map(|(m, v)| AffineMap::new(m.clone(), v.clone()).unwrap())
                    .collect()
            })
            .collect(),
    )
    .unwrap()
    .into()
}

/// max over rows of min over pieces, computed from the raw matrices.
fn eval_oracle(grid: &Grid, x: &[u64]) -> Vec<u64> {
    let d = x.len();
    (0..d)
        .map(|i| {
            grid.iter()
                .map(|row| {
                    row.iter()
                        .map(|(m, v)| (0..d).map(|j| m[i][j] * x[j]).sum::<u64>() + v[i])
                        .min()
                        .unwrap()
                })
                .max()
                .unwrap()
        })
        .collect()
}

struct Oracle {
    lipschitz: f64,
    c: Rational,
    a: Rational,
    b: Rational,
}

fn constants_oracle(grid: &Grid, slice: &SphereSlice) -> Oracle {
    let pts = slice.points();
    let imgs: Vec<LatticeVector> = pts
        .iter()
        .map(|p| LatticeVector::new(eval_oracle(grid, p.entries())))
        .collect();
    let k = rat(slice.k() as i64, 1);
    let norm = |v: &LatticeVector| rat(v.l1() as i64, 1);
    let c = imgs
        .iter()
        .map(|v| rat(*v.entries().iter().min().unwrap() as i64, 1) / norm(v))
        .min()
        .unwrap();
    let a = imgs.iter().map(|v| norm(v) / &k).min().unwrap();
    let b = imgs.iter().map(|v| norm(v) / &k).max().unwrap();
    let mut lipschitz = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dx = lambda_product_rational(&pts[i], &pts[j]);
            if dx.is_zero() || dx.is_one() {
                continue;
            }
            let da = lambda_product_rational(&imgs[i], &imgs[j]);
            lipschitz = lipschitz.max(to_f64(&da).ln() / to_f64(&dx).ln());
        }
    }
    Oracle { lipschitz, c, a, b }
}

fn opts() -> CertifyOptions {
    CertifyOptions {
        threads: Some(2),
        ..CertifyOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn certificate_matches_oracle((d, grid) in zigzag_strategy(), k in 1u64..=8) {
        let map = build(&grid);
        let slice = SphereSlice::full(d, k).unwrap();
        for p in slice.iter() {
            prop_assert_eq!(map.evaluate(&p).unwrap().into_entries(), eval_oracle(&grid, p.entries()));
        }
        let cert = certify_constants(&map, &slice, &opts()).unwrap();
        let oracle = constants_oracle(&grid, &slice);
        prop_assert_eq!(&cert.c, &oracle.c);
        prop_assert_eq!(&cert.a, &oracle.a);
        prop_assert_eq!(&cert.b, &oracle.b);
        prop_assert!((cert.lipschitz - oracle.lipschitz).abs() <= 1e-12 * oracle.lipschitz.max(1.0));
        prop_assert!(cert.exhaustive);
    }

    #[test]
    fn zigzag_maps_are_nonexpansive((d, grid) in zigzag_strategy(), k in 1u64..=10) {
        let map = build(&grid);
        let slice = SphereSlice::full(d, k).unwrap();
        prop_assert!(check_nonexpansive(&map, &slice, &opts()).unwrap().passed());
        let cert = certify_constants(&map, &slice, &opts()).unwrap();
        prop_assert!(cert.lipschitz <= 1.0 + 1e-12);
    }

    #[test]
    fn best_point_is_the_residual_argmin_and_meets_the_bound((d, grid) in zigzag_strategy(), k in 2u64..=10) {
        let map = build(&grid);
        let cert = certify_constants(&map, &SphereSlice::full(d, k).unwrap(), &opts()).unwrap();
        let slice = SphereSlice::new(d, k, Some(cert.c.clone()));
        prop_assume!(slice.is_ok());
        let slice = slice.unwrap();
        prop_assume!(!slice.is_empty());
        let report = find_best(&map, &slice, &cert, Some(2)).unwrap();
        let kq = rat(k as i64, 1);
        let brute = slice
            .iter()
            .map(|y| {
                let ay = eval_oracle(&grid, y.entries());
                let s: u64 = ay.iter().sum();
                let r2: Rational = ay
                    .iter()
                    .zip(y.entries())
                    .map(|(&a, &yi)| {
                        let t = rat(a as i64, s as i64) - rat(yi as i64, 1) / &kq;
                        &t * &t
                    })
                    .sum();
                (r2, y)
            })
            .min()
            .unwrap();
        prop_assert_eq!(&report.residual_squared, &brute.0);
        prop_assert_eq!(&report.y_k, &brute.1);
        prop_assert_eq!(report.theorem_pass, Some(true));
        prop_assert!(report.residual <= report.bound.unwrap());
    }

    #[test]
    fn certified_lipschitz_passes_its_own_check((d, grid) in zigzag_strategy(), k in 2u64..=6) {
        let map = build(&grid);
        let slice = SphereSlice::full(d, k).unwrap();
        let cert = certify_constants(&map, &slice, &opts()).unwrap();
        let above = perron_lattice::exact::from_f64(cert.lipschitz) + rat(1, 1000);
        prop_assert!(check_lipschitz_bound(&map, &slice, &above, &opts()).unwrap().passed());
    }
}

#[test]
fn corollary_on_dominant_direction() {
    let map: IntegerMap = AffineMap::linear(vec![vec![2, 1], vec![1, 2]]).unwrap().into();
    for k in 4..=30u64 {
        let full = SphereSlice::full(2, k).unwrap();
        let cert = certify_constants(&map, &full, &opts()).unwrap();
        let slice = SphereSlice::new(2, k, Some(cert.c.clone())).unwrap();
        let report = find_best(&map, &slice, &cert, None).unwrap();
        let report = verify_corollary(report, Some(&cert.a), Some(&cert.b)).unwrap();
        let cor = report.corollary.unwrap();
        assert_eq!(cor.lower_pass, Some(true), "k = {k}");
        assert_eq!(cor.upper_pass, Some(true), "k = {k}");
    }
}

#[test]
fn sampled_certificate_never_exceeds_exhaustive() {
    let map: IntegerMap = AffineMap::new(vec![vec![3, 1, 0], vec![0, 2, 1], vec![1, 0, 4]], vec![1, 1, 1])
        .unwrap()
        .into();
    let slice = SphereSlice::full(3, 9).unwrap();
    let exact = certify_constants(&map, &slice, &opts()).unwrap();
    let sampled = certify_constants(
        &map,
        &slice,
        &CertifyOptions {
            sampling: Some(perron_lattice::Sampling { pairs: 200, seed: 7 }),
            ..opts()
        },
    )
    .unwrap();
    assert!(!sampled.exhaustive);
    assert!(sampled.lipschitz <= exact.lipschitz);
    assert_eq!(sampled.c, exact.c);
    let again = certify_constants(
        &map,
        &slice,
        &CertifyOptions {
            sampling: Some(perron_lattice::Sampling { pairs: 200, seed: 7 }),
            threads: Some(1),
            ..CertifyOptions::default()
        },
    )
    .unwrap();
    assert_eq!(again.lipschitz, sampled.lipschitz);
    assert!(find_best(&map, &slice, &sampled, None).is_err());
}

#[test]
fn thread_count_does_not_change_the_certificate() {
    let map: IntegerMap = AffineMap::new(vec![vec![1, 4, 2], vec![2, 1, 1], vec![3, 0, 1]], vec![2, 1, 1])
        .unwrap()
        .into();
    let slice = SphereSlice::full(3, 10).unwrap();
    let base = certify_constants(&map, &slice, &CertifyOptions { threads: Some(1), ..opts() }).unwrap();
    for t in [2, 8] {
        let other = certify_constants(&map, &slice, &CertifyOptions { threads: Some(t), ..opts() }).unwrap();
        assert_eq!(base, other);
    }
}
