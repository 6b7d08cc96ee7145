//! The nonnegative cone: lattice and rational vectors, the componentwise
//! order, norms, λ and the Hilbert projective metric.
//!
//! λ(x, y) is the largest λ with λx ≤ y, i.e. the minimum of `y_i / x_i`
//! over the support of `x`. The Hilbert distance is `-ln(λ(x,y)·λ(y,x))`,
//! infinite when the product vanishes. Every quantity here is exact; the
//! logarithm is only taken in [`HilbertDistance::value`].

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, neg_ln_unit, to_f64, IntRatio, Rational};

/// A point of `Z₊ᵈ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(Vec<u64>);

impl LatticeVector {
    pub fn new(entries: Vec<u64>) -> Self {
        LatticeVector(entries)
    }

    pub fn zeros(d: usize) -> Self {
        LatticeVector(vec![0; d])
    }

    /// The all-ones vector `e`.
    pub fn ones(d: usize) -> Self {
        LatticeVector(vec![1; d])
    }

    /// The basis vector `e_i`, scaled by `k`.
    pub fn basis(d: usize, i: usize, k: u64) -> Self {
        let mut v = vec![0; d];
        v[i] = k;
        LatticeVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<u64> {
        self.0
    }

    pub fn l1(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn to_rational(&self) -> RationalVector {
        RationalVector(self.0.iter().map(|&v| int(v)).collect())
    }

    /// `x / ‖x‖₁`; the caller guarantees `x ≠ 0`.
    pub fn normalized(&self) -> RationalVector {
        let n = BigInt::from(self.l1());
        RationalVector(
            self.0
                .iter()
                .map(|&v| Rational::new(BigInt::from(v), n.clone()))
                .collect(),
        )
    }

    pub fn checked_scale(&self, m: u64) -> Option<LatticeVector> {
        self.0
            .iter()
            .map(|&v| v.checked_mul(m))
            .collect::<Option<Vec<_>>>()
            .map(LatticeVector)
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &LatticeVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// λ-product `λ(x,y)·λ(y,x)` of two nonzero lattice vectors.
    pub fn lambda_product(&self, other: &LatticeVector) -> Result<IntRatio> {
        check_same_dim(self.dim(), other.dim())?;
        if self.is_zero() || other.is_zero() {
            return Err(Error::InvalidInput("λ is undefined at the zero vector".into()));
        }
        Ok(lattice_lambda_product(&self.0, &other.0))
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u64>> for LatticeVector {
    fn from(v: Vec<u64>) -> Self {
        LatticeVector(v)
    }
}

impl<const N: usize> From<[u64; N]> for LatticeVector {
    fn from(v: [u64; N]) -> Self {
        LatticeVector(v.to_vec())
    }
}

/// A point of `ℚ₊ᵈ`, stored exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalVector(Vec<Rational>);

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self> {
        if entries.iter().any(|v| v.is_negative()) {
            return Err(Error::InvalidInput("negative entry in a cone vector".into()));
        }
        Ok(RationalVector(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, alpha: &Rational) -> RationalVector {
        RationalVector(self.0.iter().map(|v| v * alpha).collect())
    }

    pub fn l1(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn linf(&self) -> Rational {
        self.0.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn l2_squared(&self) -> Rational {
        self.0.iter().map(|v| v * v).sum()
    }

    /// Componentwise `|self - other|`, as a cone vector.
    pub fn abs_diff(&self, other: &RationalVector) -> RationalVector {
        RationalVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a - b).abs())
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }
}

impl From<&LatticeVector> for RationalVector {
    fn from(v: &LatticeVector) -> Self {
        v.to_rational()
    }
}

/// Hilbert projective distance, carried as its exact λ-product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertDistance {
    lambda_product: Rational,
}

impl HilbertDistance {
    pub fn from_lambda_product(lambda_product: Rational) -> Self {
        HilbertDistance { lambda_product }
    }

    pub fn lambda_product(&self) -> &Rational {
        &self.lambda_product
    }

    pub fn is_infinite(&self) -> bool {
        self.lambda_product.is_zero()
    }

    /// Distance in natural-log units; `f64::INFINITY` on disjoint supports.
    pub fn value(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            neg_ln_unit(&self.lambda_product)
        }
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    if a == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    Ok(())
}

fn check_pair(x: &RationalVector, y: &RationalVector) -> Result<()> {
    check_same_dim(x.dim(), y.dim())?;
    if x.is_zero() || y.is_zero() {
        return Err(Error::InvalidInput("λ is undefined at the zero vector".into()));
    }
    Ok(())
}

/// `sup{λ ≥ 0 : λx ≤ y}`.
pub fn lambda_factor(x: &RationalVector, y: &RationalVector) -> Result<Rational> {
    check_pair(x, y)?;
    Ok(x.0
        .iter()
        .zip(&y.0)
        .filter(|(xi, _)| xi.is_positive())
        .map(|(xi, yi)| yi / xi)
        .min()
        .expect("x has a positive entry"))
}

pub fn hilbert_distance(x: &RationalVector, y: &RationalVector) -> Result<HilbertDistance> {
    let product = lambda_factor(x, y)? * lambda_factor(y, x)?;
    Ok(HilbertDistance::from_lambda_product(product))
}

/// λ(x, y) for nonzero integer vectors of equal length.
pub(crate) fn lattice_lambda(x: &[u64], y: &[u64]) -> IntRatio {
    let mut best: Option<(u64, u64)> = None;
    for (&xi, &yi) in x.iter().zip(y) {
        if xi == 0 {
            continue;
        }
        best = match best {
            Some((n, d)) if (n as u128) * (xi as u128) <= (yi as u128) * (d as u128) => {
                Some((n, d))
            }
            _ => Some((yi, xi)),
        };
    }
    let (n, d) = best.expect("x is nonzero");
    IntRatio::new(n as u128, d as u128)
}

pub(crate) fn lattice_lambda_product(x: &[u64], y: &[u64]) -> IntRatio {
    lattice_lambda(x, y).times(lattice_lambda(y, x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    Inf,
}

/// `‖x‖_p` as a real. For exact comparisons use [`RationalVector::l1`],
/// [`RationalVector::linf`] and [`RationalVector::l2_squared`].
pub fn norm(x: &RationalVector, p: Norm) -> f64 {
    match p {
        Norm::L1 => to_f64(&x.l1()),
        Norm::Inf => to_f64(&x.linf()),
        Norm::L2 => to_f64(&x.l2_squared()).sqrt(),
    }
}

/// Outcome of a componentwise comparison. Several flags may hold at once;
/// all flags false means the vectors are incomparable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConeOrder {
    pub le: bool,
    pub ge: bool,
    pub ll: bool,
    pub gg: bool,
    pub equal: bool,
}

impl ConeOrder {
    pub fn is_incomparable(&self) -> bool {
        !(self.le || self.ge)
    }
}

pub fn cone_compare(x: &RationalVector, y: &RationalVector) -> Result<ConeOrder> {
    check_same_dim(x.dim(), y.dim())?;
    let pairs = || x.0.iter().zip(&y.0);
    let le = pairs().all(|(a, b)| a <= b);
    let ge = pairs().all(|(a, b)| a >= b);
    Ok(ConeOrder {
        le,
        ge,
        ll: pairs().all(|(a, b)| a < b),
        gg: pairs().all(|(a, b)| a > b),
        equal: le && ge,
    })
}

pub fn componentwise_max(x: &RationalVector, y: &RationalVector) -> Result<RationalVector> {
    check_same_dim(x.dim(), y.dim())?;
    Ok(RationalVector(
        x.0.iter().zip(&y.0).map(|(a, b)| a.max(b).clone()).collect(),
    ))
}

pub fn componentwise_min(x: &RationalVector, y: &RationalVector) -> Result<RationalVector> {
    check_same_dim(x.dim(), y.dim())?;
    Ok(RationalVector(
        x.0.iter().zip(&y.0).map(|(a, b)| a.min(b).clone()).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn rv(v: &[i64]) -> RationalVector {
        RationalVector::new(v.iter().map(|&x| rat(x, 1)).collect()).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let x = rv(&[1, 2]);
        assert_eq!(lambda_factor(&x, &x).unwrap(), rat(1, 1));
        assert_eq!(lambda_factor(&x, &rv(&[2, 2])).unwrap(), rat(1, 1));
        assert_eq!(lambda_factor(&rv(&[1, 0]), &rv(&[0, 1])).unwrap(), rat(0, 1));
    }

    #[test]
    fn lambda_rejects_zero_and_mismatch() {
        assert!(matches!(
            lambda_factor(&rv(&[0, 0]), &rv(&[1, 1])),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            lambda_factor(&rv(&[1, 0]), &rv(&[1, 1, 1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hilbert_examples() {
        let h = hilbert_distance(&rv(&[1, 2]), &rv(&[2, 2])).unwrap();
        assert_eq!(h.lambda_product(), &rat(1, 2));
        assert!((h.value() - std::f64::consts::LN_2).abs() < 1e-15);

        let x = rv(&[3, 5, 7]);
        let h = hilbert_distance(&x, &x.scale(&rat(7, 3))).unwrap();
        assert_eq!(h.lambda_product(), &rat(1, 1));
        assert_eq!(h.value(), 0.0);

        let h = hilbert_distance(&rv(&[1, 0]), &rv(&[0, 1])).unwrap();
        assert!(h.is_infinite());
        assert_eq!(h.value(), f64::INFINITY);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&rv(&[3, 4]), Norm::L2), 5.0);
        assert_eq!(norm(&rv(&[1, 2, 4]), Norm::L1), 7.0);
        assert_eq!(norm(&rv(&[1, 2, 4]), Norm::Inf), 4.0);
    }

    #[test]
    fn compare_examples() {
        let o = cone_compare(&rv(&[1, 2]), &rv(&[1, 2])).unwrap();
        assert!(o.equal && o.le && o.ge && !o.ll);
        let o = cone_compare(&rv(&[1, 2]), &rv(&[2, 3])).unwrap();
        assert!(o.ll && o.le && !o.ge);
        let o = cone_compare(&rv(&[1, 3]), &rv(&[2, 2])).unwrap();
        assert!(o.is_incomparable());
        assert_eq!(
            componentwise_max(&rv(&[1, 3]), &rv(&[2, 2])).unwrap(),
            rv(&[2, 3])
        );
        assert_eq!(
            componentwise_min(&rv(&[1, 3]), &rv(&[2, 2])).unwrap(),
            rv(&[1, 2])
        );
    }

    #[test]
    fn lattice_fast_path_matches_rational_path() {
        let x = LatticeVector::from([3, 0, 5]);
        let y = LatticeVector::from([1, 0, 9]);
        let fast = x.lambda_product(&y).unwrap().to_rational();
        let slow = hilbert_distance(&x.to_rational(), &y.to_rational()).unwrap();
        assert_eq!(&fast, slow.lambda_product());
        assert_eq!(fast, rat(1, 3) * rat(5, 9));
    }

    fn positive_vec(d: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
        prop::collection::vec((1i64..50, 1i64..20), d)
    }

    fn to_rv(v: &[(i64, i64)]) -> RationalVector {
        RationalVector::new(v.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn norm_sandwich(v in prop::collection::vec((0i64..100, 1i64..10), 1..6)) {
            let x = to_rv(&v);
            let d = x.dim() as f64;
            let inf = norm(&x, Norm::Inf);
            let two = norm(&x, Norm::L2);
            prop_assert!(inf <= two * (1.0 + 1e-15));
            prop_assert!(two <= d.sqrt() * inf * (1.0 + 1e-15));
        }

        #[test]
        fn triangle_inequality(
            x in positive_vec(3), y in positive_vec(3), z in positive_vec(3)
        ) {
            let (x, y, z) = (to_rv(&x), to_rv(&y), to_rv(&z));
            let xz = hilbert_distance(&x, &z).unwrap().value();
            let xy = hilbert_distance(&x, &y).unwrap().value();
            let yz = hilbert_distance(&y, &z).unwrap().value();
            prop_assert!(xz <= xy + yz + 1e-12);
        }

        #[test]
        fn zero_distance_iff_proportional(x in positive_vec(3), y in positive_vec(3)) {
            let (x, y) = (to_rv(&x), to_rv(&y));
            let h = hilbert_distance(&x, &y).unwrap();
            let ratio = &y.entries()[0] / &x.entries()[0];
            let proportional = x.scale(&ratio) == y;
            prop_assert_eq!(h.lambda_product() == &rat(1, 1), proportional);
        }
    }
}
