use num_traits::{One, Zero};
use perron_lattice::{
    hilbert_distance, lambda_factor, rat, LatticeVector, Rational, RationalVector, SphereSlice,
};
use proptest::prelude::*;

fn rv(v: &[(i64, i64)]) -> RationalVector {
    RationalVector::new(v.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
}

/// λ(x, y) from the definition: the largest candidate ratio `t` with
/// `t·x ≤ y`.
fn lambda_oracle(x: &[Rational], y: &[Rational]) -> Rational {
    let candidates: Vec<Rational> = x
        .iter()
        .zip(y)
        .filter(|(a, _)| !a.is_zero())
        .map(|(a, b)| b / a)
        .collect();
    candidates
        .into_iter()
        .filter(|t| x.iter().zip(y).all(|(a, b)| t * a <= *b))
        .max()
        .unwrap()
}

fn nonzero_vec(d: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((0i64..40, 1i64..12), d)
        .prop_filter("nonzero", |v| v.iter().any(|&(p, _)| p > 0))
}

type Fractions = Vec<(i64, i64)>;

fn pair() -> impl Strategy<Value = (Fractions, Fractions)> {
    (1usize..6).prop_flat_map(|d| (nonzero_vec(d), nonzero_vec(d)))
}

proptest! {
    #[test]
    fn lambda_matches_definition((x, y) in pair()) {
        let (x, y) = (rv(&x), rv(&y));
        prop_assert_eq!(lambda_factor(&x, &y).unwrap(), lambda_oracle(x.entries(), y.entries()));
    }

    #[test]
    fn symmetric_and_dilation_invariant(
        (x, y) in pair(),
        (p, q) in (1i64..50, 1i64..50),
        (r, s) in (1i64..50, 1i64..50),
    ) {
        let (x, y) = (rv(&x), rv(&y));
        let base = hilbert_distance(&x, &y).unwrap();
        prop_assert_eq!(&base, &hilbert_distance(&y, &x).unwrap());
        let scaled = hilbert_distance(&x.scale(&rat(p, q)), &y.scale(&rat(r, s))).unwrap();
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn zero_exactly_on_proportional_vectors(x in (2usize..6).prop_flat_map(nonzero_vec), (p, q) in (1i64..30, 1i64..30)) {
        let x = rv(&x);
        let y = x.scale(&rat(p, q));
        prop_assert_eq!(hilbert_distance(&x, &y).unwrap().lambda_product().clone(), Rational::one());
        let mut bumped = y.entries().to_vec();
        let i = bumped.iter().position(|v| v.is_zero()).unwrap_or(0);
        bumped[i] += rat(1, 7);
        let z = RationalVector::new(bumped).unwrap();
        prop_assert!(hilbert_distance(&x, &z).unwrap().lambda_product() < &Rational::one());
    }

    #[test]
    fn triangle_inequality_on_positive_triples(
        v in (1usize..5).prop_flat_map(|d| prop::collection::vec(((1i64..40, 1i64..9), (1i64..40, 1i64..9), (1i64..40, 1i64..9)), d))
    ) {
        let x = rv(&v.iter().map(|t| t.0).collect::<Vec<_>>());
        let y = rv(&v.iter().map(|t| t.1).collect::<Vec<_>>());
        let z = rv(&v.iter().map(|t| t.2).collect::<Vec<_>>());
        let dxz = hilbert_distance(&x, &z).unwrap().value();
        let dxy = hilbert_distance(&x, &y).unwrap().value();
        let dyz = hilbert_distance(&y, &z).unwrap().value();
        prop_assert!(dxz <= dxy + dyz + 1e-12);
    }
}

#[test]
fn disjoint_supports_are_infinitely_far() {
    let d = hilbert_distance(&rv(&[(1, 1), (0, 1)]), &rv(&[(0, 1), (1, 1)])).unwrap();
    assert!(d.is_infinite());
    assert_eq!(d.value(), f64::INFINITY);
}

#[test]
fn zero_vector_is_rejected() {
    assert!(lambda_factor(&rv(&[(0, 1), (0, 1)]), &rv(&[(1, 1), (1, 1)])).is_err());
}

/// Norm-metric sandwich with the tightest α, β for each pair of positive
/// slice points, which covers every clipped simplex containing both.
#[test]
fn sandwich_holds_on_positive_slice_points() {
    for d in 1..=3usize {
        for k in d as u64..=12 {
            let pts: Vec<RationalVector> = SphereSlice::new(d, k, Some(rat(1, k as i64)))
                .unwrap()
                .iter()
                .map(|p: LatticeVector| p.normalized())
                .collect();
            for x in &pts {
                for y in &pts {
                    let dh = hilbert_distance(x, y).unwrap().value();
                    let both = || x.entries().iter().chain(y.entries());
                    let alpha = both().min().unwrap().clone();
                    let beta = both().max().unwrap().clone();
                    let (a, b) = (to_f64(&alpha), to_f64(&beta));
                    let diff = x.abs_diff(y);
                    let inf = to_f64(&diff.linf());
                    let l2 = to_f64(&diff.l2_squared()).sqrt();
                    let lower = a * a / (2.0 * b) * dh;
                    assert!(lower <= inf + 1e-12, "{x:?} {y:?}");
                    assert!(inf <= b * dh + 1e-12, "{x:?} {y:?}");
                    assert!(lower <= l2 + 1e-12);
                    assert!(l2 <= (d as f64).sqrt() * b * dh + 1e-12);
                }
            }
        }
    }
}

fn to_f64(r: &Rational) -> f64 {
    perron_lattice::exact::to_f64(r)
}
