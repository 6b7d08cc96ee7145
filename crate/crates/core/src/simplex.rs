//! The integer ℓ₁-sphere `{x ∈ Z₊ᵈ : ‖x‖₁ = k}`, optionally clipped to
//! `x ≥ c·k·e`, and nearest-point approximation of the clipped simplex by it.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::cone::{LatticeVector, RationalVector};
use crate::error::{Error, Result};
use crate::exact::{ceil_to_u64, format_rational, int, rat, Rational};

/// Slices whose point count is at most this are searched exhaustively by
/// [`nearest_slice_point`].
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u128 = 4096;

/// `{x ∈ Z₊ᵈ : ‖x‖₁ = k, x ≥ c·k·e}`; without `c` the whole sphere.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SphereSlice {
    d: usize,
    k: u64,
    c: Option<Rational>,
    lower: u64,
}

impl SphereSlice {
    pub fn new(d: usize, k: u64, c: Option<Rational>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSlice("dimension must be at least 1".into()));
        }
        if k == 0 {
            return Err(Error::InvalidSlice("radius k must be at least 1".into()));
        }
        let lower = match &c {
            None => 0,
            Some(c) => {
                if !c.is_positive() {
                    return Err(Error::InvalidSlice(format!(
                        "c = {} must be positive",
                        format_rational(c)
                    )));
                }
                if c > &rat(1, d as i64) {
                    return Err(Error::InvalidSlice(format!(
                        "c = {} exceeds 1/d = 1/{d}; the clipped simplex is empty",
                        format_rational(c)
                    )));
                }
                ceil_to_u64(&(c * int(k)))?
            }
        };
        Ok(SphereSlice { d, k, c, lower })
    }

    pub fn full(d: usize, k: u64) -> Result<Self> {
        SphereSlice::new(d, k, None)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn c(&self) -> Option<&Rational> {
        self.c.as_ref()
    }

    /// Smallest admissible coordinate, `⌈c·k⌉` (0 without `c`).
    pub fn lower_bound(&self) -> u64 {
        self.lower
    }

    pub fn is_empty(&self) -> bool {
        (self.d as u128) * (self.lower as u128) > self.k as u128
    }

    pub fn contains(&self, x: &LatticeVector) -> bool {
        x.dim() == self.d && x.l1() == self.k && x.entries().iter().all(|&v| v >= self.lower)
    }

    /// `binomial(k - d·lower + d - 1, d - 1)`.
    pub fn count(&self) -> u128 {
        if self.is_empty() {
            return 0;
        }
        let free = self.k - self.d as u64 * self.lower;
        binomial(free as u128 + self.d as u128 - 1, self.d as u128 - 1)
    }

    /// Number of unordered pairs of distinct points.
    pub fn pair_count(&self) -> u128 {
        let n = self.count();
        n * n.saturating_sub(1) / 2
    }

    /// Points in descending lexicographic order, `(k, 0, …)` first.
    pub fn iter(&self) -> SliceIter {
        let hi = self.k.saturating_sub((self.d as u64 - 1) * self.lower);
        SliceIter::new(self, hi, self.lower)
    }

    /// Points whose first coordinate lies in `[first_lo, first_hi]`, in the
    /// same order as [`iter`](Self::iter).
    pub fn iter_first_range(&self, first_hi: u64, first_lo: u64) -> SliceIter {
        SliceIter::new(self, first_hi, first_lo)
    }

    /// Values the first coordinate takes, in enumeration order.
    pub fn first_coordinates(&self) -> Vec<u64> {
        if self.is_empty() {
            return Vec::new();
        }
        if self.d == 1 {
            return vec![self.k];
        }
        let hi = self.k - (self.d as u64 - 1) * self.lower;
        (self.lower..=hi).rev().collect()
    }

    pub fn points(&self) -> Vec<LatticeVector> {
        self.iter().collect()
    }
}

pub fn binomial(n: u128, r: u128) -> u128 {
    let r = r.min(n - r.min(n));
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

pub fn enumerate_slice(slice: &SphereSlice) -> SliceIter {
    slice.iter()
}

/// Enumerates the slice on `threads` workers, partitioned by first
/// coordinate. The output equals the serial stream.
pub fn enumerate_slice_parallel(slice: &SphereSlice, threads: usize) -> Vec<LatticeVector> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    let firsts = slice.first_coordinates();
    let chunks: Vec<Vec<LatticeVector>> = pool.install(|| {
        firsts
            .par_iter()
            .map(|&f| slice.iter_first_range(f, f).collect())
            .collect()
    });
    chunks.into_iter().flatten().collect()
}

/// Streaming iterator over a [`SphereSlice`].
#[derive(Clone, Debug)]
pub struct SliceIter {
    current: Option<Vec<u64>>,
    lower: u64,
    first_lo: u64,
}

impl SliceIter {
    fn new(slice: &SphereSlice, first_hi: u64, first_lo: u64) -> Self {
        let d = slice.d;
        let lower = slice.lower;
        let first_lo = first_lo.max(lower);
        let max_first = slice.k.checked_sub((d as u64 - 1) * lower);
        let current = match max_first {
            _ if slice.is_empty() => None,
            None => None,
            Some(_) if d == 1 => (first_lo..=first_hi).contains(&slice.k).then(|| vec![slice.k]),
            Some(m) => {
                let first = first_hi.min(m);
                (first >= first_lo).then(|| {
                    let mut v = vec![lower; d];
                    v[0] = first;
                    v[1] = slice.k - first - (d as u64 - 2) * lower;
                    v
                })
            }
        };
        SliceIter {
            current,
            lower,
            first_lo,
        }
    }
}

impl Iterator for SliceIter {
    type Item = LatticeVector;

    fn next(&mut self) -> Option<LatticeVector> {
        let out = self.current.take()?;
        let d = out.len();
        if d > 1 {
            // decrement the rightmost non-final coordinate above the floor,
            // push the surplus into its successor
            if let Some(i) = (0..d - 1).rev().find(|&i| out[i] > self.lower) {
                if i > 0 || out[0] > self.first_lo {
                    let mut next = out.clone();
                    next[i] -= 1;
                    let prefix: u64 = next[..=i].iter().sum();
                    let total: u64 = out.iter().sum();
                    let tail = (d - i - 2) as u64 * self.lower;
                    next[i + 1] = total - prefix - tail;
                    for v in next.iter_mut().skip(i + 2) {
                        *v = self.lower;
                    }
                    self.current = Some(next);
                }
            }
        }
        Some(LatticeVector::new(out))
    }
}

/// A lattice point `y` of a slice together with `‖x - y/k‖_∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearestPoint {
    pub point: LatticeVector,
    pub distance: Rational,
}

fn validate_in_clipped_simplex(x: &RationalVector, slice: &SphereSlice) -> Result<()> {
    if x.dim() != slice.d {
        return Err(Error::DimensionMismatch {
            expected: slice.d,
            found: x.dim(),
        });
    }
    if x.l1() != Rational::one() {
        return Err(Error::InvalidInput(format!(
            "point has ℓ₁ norm {}, expected 1",
            format_rational(&x.l1())
        )));
    }
    if let Some(c) = &slice.c {
        if x.entries().iter().any(|v| v < c) {
            return Err(Error::InvalidInput(format!(
                "point has a coordinate below c = {}",
                format_rational(c)
            )));
        }
    }
    if slice.is_empty() {
        return Err(Error::InvalidSlice(format!(
            "slice d = {}, k = {} is empty under its clipping",
            slice.d, slice.k
        )));
    }
    Ok(())
}

fn linf_to_scaled(x: &RationalVector, y: &LatticeVector, k: &Rational) -> Rational {
    x.entries()
        .iter()
        .zip(y.entries())
        .map(|(xi, &yi)| (xi - int(yi) / k).abs())
        .max()
        .expect("nonempty")
}

fn check_two_over_k(found: NearestPoint, k: u64) -> Result<NearestPoint> {
    if found.distance > rat(2, k as i64) {
        return Err(Error::ApproximationBound {
            distance: format_rational(&found.distance),
            k,
        });
    }
    Ok(found)
}

/// Nearest point of the slice to `x` in ℓ_∞ after dividing by `k`, ties
/// broken to the lexicographically smallest point. `x` must lie in the
/// clipped simplex `{‖x‖₁ = 1, x ≥ c·e}`.
pub fn nearest_slice_point(x: &RationalVector, slice: &SphereSlice) -> Result<NearestPoint> {
    nearest_slice_point_with(x, slice, DEFAULT_EXHAUSTIVE_THRESHOLD)
}

pub fn nearest_slice_point_with(
    x: &RationalVector,
    slice: &SphereSlice,
    exhaustive_threshold: u128,
) -> Result<NearestPoint> {
    check_two_over_k(nearest_slice_argmin_with(x, slice, exhaustive_threshold)?, slice.k)
}

/// Same search as [`nearest_slice_point`] without the `2/k` check.
pub fn nearest_slice_argmin(x: &RationalVector, slice: &SphereSlice) -> Result<NearestPoint> {
    nearest_slice_argmin_with(x, slice, DEFAULT_EXHAUSTIVE_THRESHOLD)
}

/// Scans the slice when it has at most `exhaustive_threshold` points and
/// uses the interval search otherwise.
pub fn nearest_slice_argmin_with(
    x: &RationalVector,
    slice: &SphereSlice,
    exhaustive_threshold: u128,
) -> Result<NearestPoint> {
    validate_in_clipped_simplex(x, slice)?;
    if slice.count() <= exhaustive_threshold {
        exhaustive_argmin(x, slice)
    } else {
        interval_argmin(x, slice)
    }
}

/// Full scan of the slice.
pub fn nearest_slice_point_exhaustive(
    x: &RationalVector,
    slice: &SphereSlice,
) -> Result<NearestPoint> {
    validate_in_clipped_simplex(x, slice)?;
    check_two_over_k(exhaustive_argmin(x, slice)?, slice.k)
}

fn exhaustive_argmin(x: &RationalVector, slice: &SphereSlice) -> Result<NearestPoint> {
    let k = int(slice.k);
    let best = slice
        .iter()
        .map(|y| (linf_to_scaled(x, &y, &k), y))
        .min()
        .expect("nonempty slice");
    Ok(NearestPoint {
        point: best.1,
        distance: best.0,
    })
}

/// Exact search without enumerating the slice.
///
/// For a scaled radius `s = k·t`, the points within ℓ_∞ distance `t` are the
/// integer vectors in the box `[max(lo, ⌈kxᵢ - s⌉), min(k, ⌊kxᵢ + s⌋)]` with
/// coordinate sum `k`; that set is nonempty iff every interval is nonempty
/// and the interval sums bracket `k`. The optimal `s` is one of the
/// breakpoints `|kxᵢ - j|`, found by bisection; the lexicographically
/// smallest point of the final box is then built greedily.
pub fn nearest_slice_point_interval(
    x: &RationalVector,
    slice: &SphereSlice,
) -> Result<NearestPoint> {
    validate_in_clipped_simplex(x, slice)?;
    check_two_over_k(interval_argmin(x, slice)?, slice.k)
}

fn interval_argmin(x: &RationalVector, slice: &SphereSlice) -> Result<NearestPoint> {
    let k = slice.k;
    let lo = slice.lower;
    let kq = int(k);
    let kx: Vec<Rational> = x.entries().iter().map(|v| v * &kq).collect();

    let start = round_into_slice(&kx, k, lo);
    let s_ub = kx
        .iter()
        .zip(&start)
        .map(|(v, &y)| (v - int(y)).abs())
        .max()
        .expect("nonempty");

    let mut candidates = vec![s_ub.clone()];
    for v in &kx {
        let from = floor_i128(&(v - &s_ub)).max(lo as i128);
        let to = ceil_i128(&(v + &s_ub)).min(k as i128);
        for j in from..=to {
            let s = (v - Rational::from_integer(BigInt::from(j))).abs();
            if s <= s_ub {
                candidates.push(s);
            }
        }
    }
    candidates.sort();
    candidates.dedup();

    // first feasible breakpoint; the last one (s_ub) always is
    let idx = candidates.partition_point(|s| box_bounds(&kx, s, k, lo).is_none());
    let s_star = &candidates[idx];
    let (lower, upper) = box_bounds(&kx, s_star, k, lo).expect("feasible at optimum");

    let mut y = Vec::with_capacity(kx.len());
    let mut prefix = 0u64;
    for i in 0..kx.len() {
        let rest_upper: u64 = upper[i + 1..].iter().sum();
        let need = (k - prefix).saturating_sub(rest_upper);
        let yi = lower[i].max(need);
        y.push(yi);
        prefix += yi;
    }
    let point = LatticeVector::new(y);
    let distance = linf_to_scaled(x, &point, &kq);
    Ok(NearestPoint { point, distance })
}

fn floor_i128(r: &Rational) -> i128 {
    r.floor().to_integer().to_i128().expect("small")
}

fn ceil_i128(r: &Rational) -> i128 {
    r.ceil().to_integer().to_i128().expect("small")
}

fn box_bounds(kx: &[Rational], s: &Rational, k: u64, lo: u64) -> Option<(Vec<u64>, Vec<u64>)> {
    let mut lower = Vec::with_capacity(kx.len());
    let mut upper = Vec::with_capacity(kx.len());
    for v in kx {
        let l = ceil_i128(&(v - s)).max(lo as i128);
        let u = floor_i128(&(v + s)).min(k as i128);
        if l > u {
            return None;
        }
        lower.push(l as u64);
        upper.push(u as u64);
    }
    let sl: u64 = lower.iter().sum();
    let su: u64 = upper.iter().sum();
    (sl <= k && k <= su).then_some((lower, upper))
}

/// Some point of the slice near `kx`, used to bound the search radius.
fn round_into_slice(kx: &[Rational], k: u64, lo: u64) -> Vec<u64> {
    let mut y: Vec<u64> = kx
        .iter()
        .map(|v| (floor_i128(v).max(0) as u64).max(lo))
        .collect();
    let mut sum: u64 = y.iter().sum();
    while sum > k {
        let i = (0..y.len())
            .filter(|&i| y[i] > lo)
            .max_by(|&a, &b| (int(y[a]) - &kx[a]).cmp(&(int(y[b]) - &kx[b])))
            .expect("slice nonempty");
        y[i] -= 1;
        sum -= 1;
    }
    while sum < k {
        let i = (0..y.len())
            .max_by(|&a, &b| (&kx[a] - int(y[a])).cmp(&(&kx[b] - int(y[b]))))
            .expect("nonempty");
        y[i] += 1;
        sum += 1;
    }
    y
}
