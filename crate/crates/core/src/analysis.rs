//! Exhaustive certification of map hypotheses on a sphere slice: the
//! Hilbert-Lipschitz constant `L`, the positivity constant `c`, the growth
//! constants `a` and `b`, nonexpansiveness, discrete concavity, scalability
//! and the ceiling-composition bound.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cone::{lattice_lambda_product, LatticeVector};
use crate::error::{Error, Result};
use crate::exact::{format_rational, from_f64, int, rat, IntRatio, Rational};
use crate::map::{ConcaveRealMap, IntegerMap};
use crate::simplex::SphereSlice;

pub const DEFAULT_PAIR_CAP: u128 = 10_000_000;
pub const DEFAULT_MAX_PARTS: usize = 3;
pub const DEFAULT_MAX_WEIGHT: u64 = 4;

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub(crate) fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub pairs: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifyOptions {
    pub pair_cap: u128,
    /// Scan this many random pairs instead of all of them. The resulting `L`
    /// is only a lower estimate.
    pub sampling: Option<Sampling>,
    pub threads: Option<usize>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            pair_cap: DEFAULT_PAIR_CAP,
            sampling: None,
            threads: None,
        }
    }
}

/// A pair `x, y` with both λ-products, from which the ratio
/// `d_H(Ax,Ay)/d_H(x,y)` is recomputed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairWitness {
    pub x: LatticeVector,
    pub y: LatticeVector,
    pub domain_product: Rational,
    pub image_product: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsCertificate {
    pub slice: SphereSlice,
    /// `max d_H(Ax,Ay)/d_H(x,y)` over pairs with finite nonzero `d_H(x,y)`.
    pub lipschitz: f64,
    pub lipschitz_witness: Option<PairWitness>,
    pub c: Rational,
    pub c_witness: (LatticeVector, usize),
    pub a: Rational,
    pub a_witness: LatticeVector,
    pub b: Rational,
    pub b_witness: LatticeVector,
    pub exhaustive: bool,
    pub pairs_scanned: u128,
}

/// The slice in enumeration order together with its images.
#[derive(Clone, Debug)]
pub struct EvaluatedSlice {
    pub points: Vec<LatticeVector>,
    pub images: Vec<LatticeVector>,
}

impl EvaluatedSlice {
    /// Evaluates `map` on every slice point. The first point outside the
    /// domain, in enumeration order, is reported.
    pub fn new(map: &IntegerMap, slice: &SphereSlice, threads: Option<usize>) -> Result<Self> {
        if slice.d() != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                found: slice.d(),
            });
        }
        if slice.is_empty() {
            return Err(Error::InvalidSlice(format!(
                "no point of the sphere of radius {} satisfies the lower bound {}",
                slice.k(),
                slice.lower_bound()
            )));
        }
        let points = slice.points();
        let images = in_pool(threads, || {
            points
                .par_iter()
                .map(|x| map.evaluate(x))
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(EvaluatedSlice { points, images })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_cap(slice: &SphereSlice, cap: u128) -> Result<()> {
    let pairs = slice.pair_count();
    if pairs > cap {
        return Err(Error::TooLarge { pairs, cap });
    }
    Ok(())
}

/// Smallest ratio, ties to the lexicographically smallest point.
fn extreme_point<'a>(
    items: impl Iterator<Item = (IntRatio, &'a LatticeVector)>,
    take_max: bool,
) -> (IntRatio, LatticeVector) {
    let mut best: Option<(IntRatio, &LatticeVector)> = None;
    for (r, x) in items {
        let better = match &best {
            None => true,
            Some((br, bx)) => {
                let ord = if take_max { r.cmp(br) } else { br.cmp(&r) };
                ord.is_gt() || (ord.is_eq() && x < bx)
            }
        };
        if better {
            best = Some((r, x));
        }
    }
    let (r, x) = best.expect("nonempty slice");
    (r, x.clone())
}

/// Certifies `L`, `c`, `a` and `b` on `slice`.
pub fn certify_constants(
    map: &IntegerMap,
    slice: &SphereSlice,
    opts: &CertifyOptions,
) -> Result<ConstantsCertificate> {
    if opts.sampling.is_none() {
        check_cap(slice, opts.pair_cap)?;
    }
    let ev = EvaluatedSlice::new(map, slice, opts.threads)?;
    let k = slice.k() as u128;

    // c: positivity of every image, reported at the first failure
    for (x, ax) in ev.points.iter().zip(&ev.images) {
        if ax.is_zero() {
            return Err(Error::certification(
                format!("A{x} = 0, so no positive c exists"),
                vec![x.clone()],
            ));
        }
        if let Some(i) = ax.entries().iter().position(|&v| v == 0) {
            return Err(Error::certification(
                format!("A{x} = {ax} has a zero coordinate {}, so c = 0", i + 1),
                vec![x.clone()],
            ));
        }
    }
    let (c, c_point) = extreme_point(
        ev.points.iter().zip(&ev.images).map(|(x, ax)| {
            let low = *ax.entries().iter().min().expect("d ≥ 1");
            (IntRatio::new(low as u128, ax.l1() as u128), x)
        }),
        false,
    );
    let c_image = &ev.images[ev.points.iter().position(|p| p == &c_point).expect("present")];
    let c_index = c_image
        .entries()
        .iter()
        .position(|&v| IntRatio::new(v as u128, c_image.l1() as u128) == c)
        .expect("attained");

    let norms = || {
        ev.points
            .iter()
            .zip(&ev.images)
            .map(|(x, ax)| (IntRatio::new(ax.l1() as u128, k), x))
    };
    let (a, a_witness) = extreme_point(norms(), false);
    let (b, b_witness) = extreme_point(norms(), true);

    let (scan, exhaustive) = match &opts.sampling {
        None => (scan_all_pairs(&ev, opts.threads)?, true),
        Some(s) => (scan_sampled_pairs(&ev, s, opts.threads)?, false),
    };

    Ok(ConstantsCertificate {
        slice: slice.clone(),
        lipschitz: scan.best.as_ref().map_or(0.0, |b| b.ratio),
        lipschitz_witness: scan.best.map(|b| b.witness(&ev)),
        c: c.to_rational(),
        c_witness: (c_point, c_index),
        a: a.to_rational(),
        a_witness,
        b: b.to_rational(),
        b_witness,
        exhaustive,
        pairs_scanned: scan.pairs,
    })
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    ratio: f64,
    i: usize,
    j: usize,
    domain: IntRatio,
    image: IntRatio,
}

impl Candidate {
    fn witness(&self, ev: &EvaluatedSlice) -> PairWitness {
        let (x, y) = ordered(&ev.points[self.i], &ev.points[self.j]);
        PairWitness {
            x: x.clone(),
            y: y.clone(),
            domain_product: self.domain.to_rational(),
            image_product: self.image.to_rational(),
        }
    }

    /// Larger ratio wins; ties go to the lexicographically smaller pair.
    fn beats(&self, other: &Candidate, ev: &EvaluatedSlice) -> bool {
        match self.ratio.total_cmp(&other.ratio) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                ordered(&ev.points[self.i], &ev.points[self.j])
                    < ordered(&ev.points[other.i], &ev.points[other.j])
            }
        }
    }
}

fn ordered<'a>(x: &'a LatticeVector, y: &'a LatticeVector) -> (&'a LatticeVector, &'a LatticeVector) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

struct Scan {
    best: Option<Candidate>,
    pairs: u128,
}

enum PairOutcome {
    Skip,
    Ratio(Candidate),
    /// `d_H(x,y)` finite but `d_H(Ax,Ay)` infinite.
    Blowup,
}

fn pair_ratio(ev: &EvaluatedSlice, i: usize, j: usize) -> PairOutcome {
    let domain = lattice_lambda_product(ev.points[i].entries(), ev.points[j].entries());
    if domain.is_zero() || domain == IntRatio::ONE {
        return PairOutcome::Skip;
    }
    let image = lattice_lambda_product(ev.images[i].entries(), ev.images[j].entries());
    if image.is_zero() {
        return PairOutcome::Blowup;
    }
    PairOutcome::Ratio(Candidate {
        ratio: image.neg_ln() / domain.neg_ln(),
        i,
        j,
        domain,
        image,
    })
}

fn blowup_error(ev: &EvaluatedSlice, i: usize, j: usize) -> Error {
    let (x, y) = (&ev.points[i], &ev.points[j]);
    Error::certification(
        format!(
            "d_H({x}, {y}) is finite but the images {} and {} are at infinite distance",
            ev.images[i], ev.images[j]
        ),
        vec![x.clone(), y.clone()],
    )
}

fn merge(acc: Option<Candidate>, c: Candidate, ev: &EvaluatedSlice) -> Option<Candidate> {
    match acc {
        Some(b) if !c.beats(&b, ev) => Some(b),
        _ => Some(c),
    }
}

fn scan_all_pairs(ev: &EvaluatedSlice, threads: Option<usize>) -> Result<Scan> {
    let n = ev.len();
    let rows: Vec<std::result::Result<Option<Candidate>, usize>> = in_pool(threads, || {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = None;
                for j in i + 1..n {
                    match pair_ratio(ev, i, j) {
                        PairOutcome::Skip => {}
                        PairOutcome::Ratio(c) => best = merge(best, c, ev),
                        PairOutcome::Blowup => return Err(j),
                    }
                }
                Ok(best)
            })
            .collect()
    });
    let mut best = None;
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Err(j) => return Err(blowup_error(ev, i, j)),
            Ok(Some(c)) => best = merge(best, c, ev),
            Ok(None) => {}
        }
    }
    Ok(Scan {
        best,
        pairs: (n as u128) * (n as u128).saturating_sub(1) / 2,
    })
}

fn scan_sampled_pairs(ev: &EvaluatedSlice, s: &Sampling, threads: Option<usize>) -> Result<Scan> {
    let n = ev.len();
    if n < 2 {
        return Ok(Scan { best: None, pairs: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let pairs: Vec<(usize, usize)> = (0..s.pairs)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i.min(j), i.max(j))
        })
        .collect();
    let outcomes: Vec<PairOutcome> = in_pool(threads, || {
        pairs.par_iter().map(|&(i, j)| pair_ratio(ev, i, j)).collect()
    });
    let mut best = None;
    for (o, &(i, j)) in outcomes.into_iter().zip(&pairs) {
        match o {
            PairOutcome::Skip => {}
            PairOutcome::Ratio(c) => best = merge(best, c, ev),
            PairOutcome::Blowup => return Err(blowup_error(ev, i, j)),
        }
    }
    Ok(Scan {
        best,
        pairs: pairs.len() as u128,
    })
}

/// Outcome of an exhaustive pair check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairCheck {
    Pass { pairs: u128 },
    Counterexample(PairWitness),
}

impl PairCheck {
    pub fn passed(&self) -> bool {
        matches!(self, PairCheck::Pass { .. })
    }
}

/// Checks `pred(domain_product, image_product)` on every pair; the first
/// failing pair in enumeration order is returned.
fn check_all_pairs(
    map: &IntegerMap,
    slice: &SphereSlice,
    opts: &CertifyOptions,
    pred: impl Fn(IntRatio, IntRatio) -> Option<bool> + Sync,
) -> Result<PairCheck> {
    check_cap(slice, opts.pair_cap)?;
    let ev = EvaluatedSlice::new(map, slice, opts.threads)?;
    let n = ev.len();
    let found = in_pool(opts.threads, || {
        (0..n).into_par_iter().find_map_first(|i| {
            (i + 1..n).find_map(|j| {
                let domain = lattice_lambda_product(ev.points[i].entries(), ev.points[j].entries());
                let image = lattice_lambda_product(ev.images[i].entries(), ev.images[j].entries());
                let verdict = pred(domain, image);
                (verdict != Some(true)).then_some((i, j, domain, image, verdict.is_none()))
            })
        })
    });
    Ok(match found {
        None => PairCheck::Pass {
            pairs: (n as u128) * (n as u128).saturating_sub(1) / 2,
        },
        Some((.., true)) => return Err(Error::Overflow("Lipschitz exponent")),
        Some((i, j, domain, image, false)) => PairCheck::Counterexample(PairWitness {
            x: ev.points[i].clone(),
            y: ev.points[j].clone(),
            domain_product: domain.to_rational(),
            image_product: image.to_rational(),
        }),
    })
}

/// `d_H(Ax,Ay) ≤ d_H(x,y)` for every pair, decided as
/// `λ-product(Ax,Ay) ≥ λ-product(x,y)`.
pub fn check_nonexpansive(
    map: &IntegerMap,
    slice: &SphereSlice,
    opts: &CertifyOptions,
) -> Result<PairCheck> {
    check_all_pairs(map, slice, opts, |domain, image| Some(image >= domain))
}

/// `d_H(Ax,Ay) ≤ bound·d_H(x,y)` for every pair, decided without logarithms
/// as `λ-product(Ax,Ay) ≥ λ-product(x,y)^bound`.
pub fn check_lipschitz_bound(
    map: &IntegerMap,
    slice: &SphereSlice,
    bound: &Rational,
    opts: &CertifyOptions,
) -> Result<PairCheck> {
    if bound.is_negative() {
        return Err(Error::InvalidInput("Lipschitz bound must be ≥ 0".into()));
    }
    let exact = exponent(bound);
    // a coarser exponent below the bound; passing with it implies passing
    // with the exact one because λ-products are at most 1
    let coarse = exponent(&((bound * int(64)).floor() / int(64)));
    let bound_f = crate::exact::to_f64(bound);
    check_all_pairs(map, slice, opts, move |domain, image| {
        if domain.is_zero() || domain == IntRatio::ONE {
            return Some(true);
        }
        if image.is_zero() {
            return Some(false);
        }
        let lhs = image.neg_ln();
        let rhs = bound_f * domain.neg_ln();
        if lhs <= rhs * (1.0 - 1e-9) {
            return Some(true);
        }
        if lhs >= rhs * (1.0 + 1e-9) + f64::MIN_POSITIVE {
            return Some(false);
        }
        if coarse.is_some_and(|e| power_ge(image, e, domain)) {
            return Some(true);
        }
        exact.map(|e| power_ge(image, e, domain))
    })
}

/// Largest exponent numerator or denominator tried exactly.
const MAX_EXPONENT: u32 = 1 << 12;

/// `(p, q)` with `r = p/q`, if both are small enough to raise to.
fn exponent(r: &Rational) -> Option<(u32, u32)> {
    let p = r.numer().to_u32()?;
    let q = r.denom().to_u32()?;
    (p <= MAX_EXPONENT && q <= MAX_EXPONENT).then_some((p, q))
}

/// `image^q ≥ domain^p` for `(p, q)`.
fn power_ge(image: IntRatio, (p, q): (u32, u32), domain: IntRatio) -> bool {
    let big = |v: u128, e: u32| BigUint::from(v).pow(e);
    big(image.num, q) * big(domain.den, p) >= big(domain.num, p) * big(image.den, q)
}

/// `1 + 2/(a·c)`.
pub fn ceil_lipschitz_bound(a: &Rational, c: &Rational) -> Result<Rational> {
    if !a.is_positive() || !c.is_positive() {
        return Err(Error::InvalidInput(format!(
            "a = {} and c = {} must be positive",
            format_rational(a),
            format_rational(c)
        )));
    }
    Ok(rat(1, 1) + rat(2, 1) / (a * c))
}

/// Constants `a` and `c` of a concave real map `F` on a slice, measured at
/// its lattice points, and the resulting bound `1 + 2/(ac)` for `⌈F⌉`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CeilHypotheses {
    pub a: Rational,
    pub c: Rational,
    pub bound: Rational,
}

pub fn ceil_hypotheses(f: &ConcaveRealMap, slice: &SphereSlice) -> Result<CeilHypotheses> {
    if slice.d() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: slice.d(),
        });
    }
    if !f.is_nonnegative_on_cone() {
        return Err(Error::certification(
            "F has a piece with a negative coefficient, so it is not nonnegative on the cone",
            vec![],
        ));
    }
    let k = int(slice.k());
    let mut a: Option<Rational> = None;
    let mut c: Option<Rational> = None;
    for x in slice.iter() {
        let fx = f.eval_lattice(&x);
        let norm: Rational = fx.iter().sum();
        let low = fx.iter().min().expect("d ≥ 1");
        if !low.is_positive() {
            return Err(Error::certification(
                format!("F{x} has a zero coordinate"),
                vec![x],
            ));
        }
        let ratio = low / &norm;
        let growth = norm / &k;
        a = Some(a.map_or(growth.clone(), |v| v.min(growth)));
        c = Some(c.map_or(ratio.clone(), |v| v.min(ratio)));
    }
    let (a, c) = a.zip(c).ok_or_else(|| Error::InvalidSlice("empty slice".into()))?;
    let bound = ceil_lipschitz_bound(&a, &c)?;
    Ok(CeilHypotheses { a, c, bound })
}

/// The box `[0, w]ᵈ` in ascending lexicographic order.
pub fn window_points(d: usize, w: u64) -> Vec<LatticeVector> {
    let total = (w + 1).checked_pow(d as u32).expect("window too large") as usize;
    (0..total)
        .map(|mut idx| {
            let mut v = vec![0; d];
            for slot in v.iter_mut().rev() {
                *slot = (idx as u64) % (w + 1);
                idx /= (w + 1) as usize;
            }
            LatticeVector::new(v)
        })
        .collect()
}

fn window_index(x: &[u64], w: u64) -> usize {
    x.iter().fold(0, |acc, &v| acc * (w + 1) as usize + v as usize)
}

/// A violation of `m·A(x) ≥ Σ m_i·A(x_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcavityCounterexample {
    pub m: u64,
    pub weights: Vec<u64>,
    pub parts: Vec<LatticeVector>,
    pub x: LatticeVector,
    /// `m·A(x)`.
    pub lhs: Vec<u128>,
    /// `Σ m_i·A(x_i)`.
    pub rhs: Vec<u128>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcavityReport {
    pub checked: u64,
    /// Decompositions where the inequality held with equality.
    pub equalities: u64,
    pub counterexample: Option<ConcavityCounterexample>,
}

impl ConcavityReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Ordered compositions of `m` into `n` positive parts.
fn compositions(m: u64, n: usize) -> Vec<Vec<u64>> {
    if n == 1 {
        return vec![vec![m]];
    }
    (1..=m.saturating_sub(n as u64 - 1))
        .flat_map(|first| {
            compositions(m - first, n - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Strictly increasing index tuples of length `n` from `0..len`.
fn combinations(len: usize, n: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if n > len {
        return;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let Some(pos) = (0..n).rev().find(|&p| idx[p] < len - n + p) else {
            return;
        };
        idx[pos] += 1;
        for p in pos + 1..n {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// Bounded refutation of discrete concavity: every decomposition
/// `m·x = Σ m_i x_i` with `2 ≤ n ≤ max_parts` distinct parts from the window
/// `[0, w]ᵈ` and weights summing to `m ≤ max_weight` is checked. Parts
/// outside the map's domain are skipped.
pub fn verify_concavity(
    map: &IntegerMap,
    w: u64,
    max_parts: usize,
    max_weight: u64,
) -> Result<ConcavityReport> {
    let d = map.dim();
    let window = window_points(d, w);
    let images: Vec<Option<Vec<u128>>> = window
        .iter()
        .map(|x| {
            map.evaluate(x)
                .ok()
                .map(|v| v.entries().iter().map(|&e| e as u128).collect())
        })
        .collect();
    let mut report = ConcavityReport {
        checked: 0,
        equalities: 0,
        counterexample: None,
    };
    for m in 2..=max_weight {
        for n in 2..=max_parts.min(m as usize) {
            let weights_list = compositions(m, n);
            combinations(window.len(), n, |idx| {
                if idx.iter().any(|&i| images[i].is_none()) {
                    return true;
                }
                for weights in &weights_list {
                    let sum: Vec<u64> = (0..d)
                        .map(|c| {
                            idx.iter()
                                .zip(weights)
                                .map(|(&i, &mi)| mi * window[i].entries()[c])
                                .sum()
                        })
                        .collect();
                    if sum.iter().any(|&s| s % m != 0) {
                        continue;
                    }
                    let x: Vec<u64> = sum.iter().map(|&s| s / m).collect();
                    let Some(ax) = &images[window_index(&x, w)] else {
                        continue;
                    };
                    report.checked += 1;
                    let lhs: Vec<u128> = ax.iter().map(|&v| v * m as u128).collect();
                    let rhs: Vec<u128> = (0..d)
                        .map(|c| {
                            idx.iter()
                                .zip(weights)
                                .map(|(&i, &mi)| mi as u128 * images[i].as_ref().expect("checked")[c])
                                .sum()
                        })
                        .collect();
                    if lhs == rhs {
                        report.equalities += 1;
                    } else if lhs.iter().zip(&rhs).any(|(l, r)| l < r) {
                        report.counterexample = Some(ConcavityCounterexample {
                            m,
                            weights: weights.clone(),
                            parts: idx.iter().map(|&i| window[i].clone()).collect(),
                            x: LatticeVector::new(x),
                            lhs,
                            rhs,
                        });
                        return false;
                    }
                }
                true
            });
            if report.counterexample.is_some() {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// A violation of `A(m·x) ≤ m·A(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalabilityCounterexample {
    pub m: u64,
    pub x: LatticeVector,
    /// `A(m·x)`.
    pub image_of_scaled: LatticeVector,
    /// `m·A(x)`.
    pub scaled_image: Vec<u128>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalabilityReport {
    pub checked: u64,
    pub counterexample: Option<ScalabilityCounterexample>,
}

impl ScalabilityReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// `A(m·x) ≤ m·A(x)` for `x` in `[0, w]ᵈ` and `2 ≤ m ≤ max_m`, wherever
/// both sides are defined.
pub fn check_scalability(map: &IntegerMap, w: u64, max_m: u64) -> Result<ScalabilityReport> {
    let mut checked = 0;
    for x in window_points(map.dim(), w) {
        let Ok(ax) = map.evaluate(&x) else { continue };
        for m in 2..=max_m {
            let Some(mx) = x.checked_scale(m) else { continue };
            let Ok(amx) = map.evaluate(&mx) else { continue };
            checked += 1;
            let scaled: Vec<u128> = ax.entries().iter().map(|&v| v as u128 * m as u128).collect();
            if amx.entries().iter().zip(&scaled).any(|(&l, &r)| l as u128 > r) {
                return Ok(ScalabilityReport {
                    checked,
                    counterexample: Some(ScalabilityCounterexample {
                        m,
                        x,
                        image_of_scaled: amx,
                        scaled_image: scaled,
                    }),
                });
            }
        }
    }
    Ok(ScalabilityReport {
        checked,
        counterexample: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub k: u64,
    /// `max ‖Ax‖₁/‖x‖₁` over the slice.
    pub max_ratio: Rational,
    pub witness: LatticeVector,
}

/// Per-radius maxima of `‖Ax‖₁/‖x‖₁`. Empty slices are skipped.
pub fn growth_bound_estimate(
    map: &IntegerMap,
    ks: impl IntoIterator<Item = u64>,
    c: Option<&Rational>,
    threads: Option<usize>,
) -> Result<Vec<GrowthRow>> {
    let mut rows = Vec::new();
    for k in ks {
        let slice = SphereSlice::new(map.dim(), k, c.cloned())?;
        if slice.is_empty() {
            continue;
        }
        let ev = EvaluatedSlice::new(map, &slice, threads)?;
        let (r, witness) = extreme_point(
            ev.points
                .iter()
                .zip(&ev.images)
                .map(|(x, ax)| (IntRatio::new(ax.l1() as u128, k as u128), x)),
            true,
        );
        rows.push(GrowthRow {
            k,
            max_ratio: r.to_rational(),
            witness,
        });
    }
    Ok(rows)
}

/// `L` as an exact rational, for comparisons against rational bounds.
pub fn lipschitz_rational(cert: &ConstantsCertificate) -> Rational {
    from_f64(cert.lipschitz)
}

/// `λ-product` of two lattice vectors as an exact rational.
pub fn lambda_product_rational(x: &LatticeVector, y: &LatticeVector) -> Rational {
    let r = lattice_lambda_product(x.entries(), y.entries());
    Rational::new(BigInt::from(r.num), BigInt::from(r.den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::neg_ln_unit;
    use crate::map::{AffineMap, AffinePiece, TableMap, ZigzagMap};

    fn affine(m: Vec<Vec<u64>>, v: Vec<u64>) -> IntegerMap {
        AffineMap::new(m, v).unwrap().into()
    }

    fn opts() -> CertifyOptions {
        CertifyOptions::default()
    }

    /// Brute-force oracle: L, c, a, b straight from the definitions with
    /// rationals and logarithms of rationals.
    fn oracle(map: &IntegerMap, slice: &SphereSlice) -> (f64, Rational, Rational, Rational) {
        let pts = slice.points();
        let imgs: Vec<_> = pts.iter().map(|x| map.evaluate(x).unwrap()).collect();
        let k = int(slice.k());
        let mut l: f64 = 0.0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                let dx = crate::cone::hilbert_distance(&pts[i].to_rational(), &pts[j].to_rational()).unwrap();
                if dx.is_infinite() {
                    continue;
                }
                let da = crate::cone::hilbert_distance(&imgs[i].to_rational(), &imgs[j].to_rational()).unwrap();
                l = l.max(neg_ln_unit(da.lambda_product()) / neg_ln_unit(dx.lambda_product()));
            }
        }
        let c = imgs
            .iter()
            .flat_map(|ax| ax.entries().iter().map(move |&v| int(v) / int(ax.l1())))
            .min()
            .unwrap();
        let a = imgs.iter().map(|ax| int(ax.l1()) / &k).min().unwrap();
        let b = imgs.iter().map(|ax| int(ax.l1()) / &k).max().unwrap();
        (l, c, a, b)
    }

    #[test]
    fn constant_map() {
        let map = affine(vec![vec![0; 3]; 3], vec![1, 1, 1]);
        for k in [1, 4, 7] {
            let cert = certify_constants(&map, &SphereSlice::full(3, k).unwrap(), &opts()).unwrap();
            assert_eq!(cert.lipschitz, 0.0);
            assert_eq!(cert.c, rat(1, 3));
            assert_eq!(cert.a, rat(3, k as i64));
            assert_eq!(cert.b, rat(3, k as i64));
            assert!(cert.exhaustive);
        }
    }

    #[test]
    fn identity_fails_c_at_first_boundary_point() {
        let map: IntegerMap = AffineMap::identity(2).into();
        let err = certify_constants(&map, &SphereSlice::full(2, 5).unwrap(), &opts()).unwrap_err();
        match err {
            Error::CertificationFailed { witness, .. } => {
                assert_eq!(witness, vec![LatticeVector::from([5, 0])])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn affine_constants_match_oracle() {
        let map = affine(vec![vec![2, 1], vec![1, 2]], vec![1, 1]);
        let slice = SphereSlice::full(2, 4).unwrap();
        let cert = certify_constants(&map, &slice, &opts()).unwrap();
        let (l, c, a, b) = oracle(&map, &slice);
        assert_eq!(cert.a, rat(14, 4));
        assert_eq!(cert.b, rat(14, 4));
        assert_eq!((cert.c.clone(), cert.a.clone(), cert.b.clone()), (c, a, b));
        assert!((cert.lipschitz - l).abs() < 1e-12);
        assert!(cert.lipschitz <= 1.0);
    }

    #[test]
    fn witnesses_reproduce_extrema() {
        let map: IntegerMap = ZigzagMap::new(vec![
            vec![
                AffineMap::new(vec![vec![1, 2, 0], vec![0, 1, 3], vec![2, 0, 1]], vec![1, 2, 1]).unwrap(),
                AffineMap::new(vec![vec![3, 0, 1], vec![1, 1, 1], vec![0, 2, 2]], vec![2, 1, 3]).unwrap(),
            ],
            vec![AffineMap::new(vec![vec![1, 1, 1]; 3], vec![1, 1, 1]).unwrap()],
        ])
        .unwrap()
        .into();
        let slice = SphereSlice::full(3, 6).unwrap();
        let cert = certify_constants(&map, &slice, &opts()).unwrap();
        let (l, c, a, b) = oracle(&map, &slice);
        assert!((cert.lipschitz - l).abs() < 1e-12);
        assert_eq!((&cert.c, &cert.a, &cert.b), (&c, &a, &b));

        let w = cert.lipschitz_witness.clone().unwrap();
        let (ax, ay) = (map.evaluate(&w.x).unwrap(), map.evaluate(&w.y).unwrap());
        assert_eq!(lambda_product_rational(&w.x, &w.y), w.domain_product);
        assert_eq!(lambda_product_rational(&ax, &ay), w.image_product);
        assert_eq!(
            neg_ln_unit(&w.image_product) / neg_ln_unit(&w.domain_product),
            cert.lipschitz
        );
        let (cx, ci) = &cert.c_witness;
        let acx = map.evaluate(cx).unwrap();
        assert_eq!(int(acx.entries()[*ci]) / int(acx.l1()), cert.c);
        assert_eq!(int(map.evaluate(&cert.a_witness).unwrap().l1()) / int(6), cert.a);
        assert_eq!(int(map.evaluate(&cert.b_witness).unwrap().l1()) / int(6), cert.b);
    }

    #[test]
    fn parallel_certificates_are_identical() {
        let map = affine(vec![vec![3, 1, 0], vec![1, 2, 2], vec![0, 1, 4]], vec![1, 2, 3]);
        let slice = SphereSlice::full(3, 9).unwrap();
        let serial = certify_constants(&map, &slice, &CertifyOptions { threads: Some(1), ..opts() }).unwrap();
        for t in [2, 8] {
            let par = certify_constants(&map, &slice, &CertifyOptions { threads: Some(t), ..opts() }).unwrap();
            assert_eq!(serial, par);
        }
    }

    #[test]
    fn pair_cap_and_sampling() {
        let map = affine(vec![vec![1, 1], vec![1, 2]], vec![1, 1]);
        let slice = SphereSlice::full(2, 30).unwrap();
        let capped = CertifyOptions { pair_cap: 100, ..opts() };
        assert!(matches!(
            certify_constants(&map, &slice, &capped),
            Err(Error::TooLarge { pairs: 465, cap: 100 })
        ));
        let sampled = CertifyOptions {
            pair_cap: 100,
            sampling: Some(Sampling { pairs: 200, seed: 7 }),
            threads: None,
        };
        let s1 = certify_constants(&map, &slice, &sampled).unwrap();
        let s2 = certify_constants(&map, &slice, &sampled).unwrap();
        assert!(!s1.exhaustive);
        assert_eq!(s1, s2);
        let full = certify_constants(&map, &slice, &opts()).unwrap();
        assert!(s1.lipschitz <= full.lipschitz);
    }

    #[test]
    fn blowup_is_a_certification_failure() {
        // images of two interior points land on opposite axes
        let slice = SphereSlice::full(2, 3).unwrap();
        let table = TableMap::from_fn(2, slice.points(), |x| match x.entries() {
            [2, 1] => LatticeVector::from([1, 0]),
            [1, 2] => LatticeVector::from([0, 1]),
            _ => LatticeVector::from([1, 1]),
        })
        .unwrap();
        // c fails first; check the pair scan directly
        let ev = EvaluatedSlice::new(&table.into(), &slice, None).unwrap();
        assert!(matches!(scan_all_pairs(&ev, None), Err(Error::CertificationFailed { .. })));
    }

    #[test]
    fn nonexpansive_examples() {
        let slice = SphereSlice::full(2, 5).unwrap();
        let map = affine(vec![vec![2, 1], vec![1, 3]], vec![1, 1]);
        assert!(check_nonexpansive(&map, &slice, &opts()).unwrap().passed());

        let table: IntegerMap = TableMap::from_fn(2, slice.points(), |x| match x.entries() {
            [4, 1] => LatticeVector::from([1, 8]),
            [1, 4] => LatticeVector::from([8, 1]),
            _ => LatticeVector::from([4, 4]),
        })
        .unwrap()
        .into();
        match check_nonexpansive(&table, &slice, &opts()).unwrap() {
            PairCheck::Counterexample(w) => {
                assert!(w.image_product < w.domain_product);
                assert_eq!(lambda_product_rational(&w.x, &w.y), w.domain_product);
            }
            PairCheck::Pass { .. } => panic!("expansion not detected"),
        }
    }

    #[test]
    fn nonexpansive_agrees_with_measured_l() {
        let maps = [
            affine(vec![vec![2, 1], vec![1, 3]], vec![1, 1]),
            affine(vec![vec![0, 1], vec![1, 0]], vec![1, 1]),
        ];
        for map in maps {
            for k in 2..=8 {
                let slice = SphereSlice::full(2, k).unwrap();
                let cert = certify_constants(&map, &slice, &opts()).unwrap();
                let check = check_nonexpansive(&map, &slice, &opts()).unwrap();
                assert_eq!(check.passed(), cert.lipschitz <= 1.0, "k = {k}");
            }
        }
    }

    #[test]
    fn lipschitz_bound_check_is_tight() {
        let slice = SphereSlice::full(2, 5).unwrap();
        let table: IntegerMap = TableMap::from_fn(2, slice.points(), |x| match x.entries() {
            [4, 1] => LatticeVector::from([1, 8]),
            [1, 4] => LatticeVector::from([8, 1]),
            _ => LatticeVector::from([4, 4]),
        })
        .unwrap()
        .into();
        let cert = certify_constants(&table, &slice, &opts()).unwrap();
        let above = from_f64(cert.lipschitz) + rat(1, 1_000_000);
        let below = from_f64(cert.lipschitz) - rat(1, 1_000_000);
        assert!(check_lipschitz_bound(&table, &slice, &above, &opts()).unwrap().passed());
        assert!(!check_lipschitz_bound(&table, &slice, &below, &opts()).unwrap().passed());
    }

    #[test]
    fn power_comparison() {
        // (1/2)^1 ≥ (1/4)^(1/2) holds with equality
        assert!(power_ge(IntRatio::new(1, 2), (1, 2), IntRatio::new(1, 4)));
        assert!(!power_ge(IntRatio::new(1, 3), (1, 2), IntRatio::new(1, 4)));
    }

    #[test]
    fn ceil_bound_values() {
        assert_eq!(ceil_lipschitz_bound(&rat(1, 1), &rat(1, 1)).unwrap(), rat(3, 1));
        assert_eq!(ceil_lipschitz_bound(&rat(3, 4), &rat(1, 30)).unwrap(), rat(81, 1));
        assert!(ceil_lipschitz_bound(&rat(0, 1), &rat(1, 2)).is_err());
        let big = ceil_lipschitz_bound(&rat(1_000_000, 1), &rat(1, 2)).unwrap();
        assert_eq!(big, rat(250_001, 250_000));
    }

    #[test]
    fn ceil_hypotheses_of_a_concave_map() {
        let f = ConcaveRealMap::new(vec![
            vec![
                AffinePiece::new(vec![rat(1, 2), rat(1, 3)], rat(1, 1)),
                AffinePiece::new(vec![rat(1, 1), rat(1, 1)], rat(0, 1)),
            ],
            vec![AffinePiece::new(vec![rat(1, 4), rat(1, 1)], rat(1, 2))],
        ])
        .unwrap();
        let slice = SphereSlice::full(2, 6).unwrap();
        let h = ceil_hypotheses(&f, &slice).unwrap();
        let pts = slice.points();
        let a = pts
            .iter()
            .map(|x| f.eval_lattice(x).iter().sum::<Rational>() / int(6))
            .min()
            .unwrap();
        assert_eq!(h.a, a);
        let map: IntegerMap = f.into();
        let cert = certify_constants(&map, &slice, &opts()).unwrap();
        assert!(from_f64(cert.lipschitz) <= h.bound);
        assert!(check_lipschitz_bound(&map, &slice, &h.bound, &opts()).unwrap().passed());

        let neg = ConcaveRealMap::new(vec![vec![AffinePiece::new(vec![rat(-1, 1)], rat(10, 1))]]).unwrap();
        assert!(ceil_hypotheses(&neg, &SphereSlice::full(1, 3).unwrap()).is_err());
    }

    fn square_table(w: u64) -> IntegerMap {
        TableMap::from_fn(1, (0..=w).map(|x| LatticeVector::from([x])), |x| {
            LatticeVector::from([x.entries()[0] * x.entries()[0]])
        })
        .unwrap()
        .into()
    }

    #[test]
    fn square_is_not_concave() {
        let r = verify_concavity(&square_table(4), 4, DEFAULT_MAX_PARTS, DEFAULT_MAX_WEIGHT).unwrap();
        let ce = r.counterexample.unwrap();
        assert_eq!(ce.m, 2);
        assert_eq!(ce.weights, vec![1, 1]);
        assert_eq!(ce.parts, vec![LatticeVector::from([0]), LatticeVector::from([2])]);
        assert_eq!(ce.x, LatticeVector::from([1]));
        assert_eq!((ce.lhs, ce.rhs), (vec![2], vec![4]));
    }

    #[test]
    fn affine_maps_are_concave_with_equality() {
        let map = affine(vec![vec![2, 1], vec![0, 3]], vec![1, 4]);
        let r = verify_concavity(&map, 3, 3, 4).unwrap();
        assert!(r.passed());
        assert!(r.checked > 0);
        assert_eq!(r.checked, r.equalities);
    }

    #[test]
    fn min_of_affine_is_concave() {
        let map: IntegerMap = ZigzagMap::min_of(vec![
            AffineMap::new(vec![vec![2, 1], vec![0, 3]], vec![1, 0]).unwrap(),
            AffineMap::new(vec![vec![1, 2], vec![3, 0]], vec![0, 2]).unwrap(),
        ])
        .unwrap()
        .into();
        let r = verify_concavity(&map, 3, 3, 4).unwrap();
        assert!(r.passed());
        assert!(r.equalities < r.checked);
    }

    #[test]
    fn decomposition_enumeration_counts() {
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(compositions(4, 3).len(), 3);
        let mut n = 0;
        combinations(6, 3, |_| {
            n += 1;
            true
        });
        assert_eq!(n, 20);
        assert_eq!(window_points(2, 2).len(), 9);
        assert_eq!(window_points(2, 2)[5], LatticeVector::from([1, 2]));
        assert_eq!(window_index(&[1, 2], 2), 5);
    }

    #[test]
    fn scalability_examples() {
        let lin = affine(vec![vec![1, 2], vec![3, 1]], vec![0, 0]);
        assert!(check_scalability(&lin, 4, 4).unwrap().passed());
        let off = affine(vec![vec![1, 2], vec![3, 1]], vec![1, 1]);
        assert!(check_scalability(&off, 4, 4).unwrap().passed());
        let r = check_scalability(&square_table(4), 4, 4).unwrap();
        let ce = r.counterexample.unwrap();
        assert_eq!(ce.m, 2);
        let x = ce.x.entries()[0];
        assert!(ce.image_of_scaled.entries()[0] as u128 > ce.scaled_image[0]);
        assert_eq!(ce.image_of_scaled.entries()[0], 4 * x * x);
    }

    #[test]
    fn growth_of_offset_identity() {
        let map = affine(vec![vec![1, 0], vec![0, 1]], vec![2, 2]);
        let rows = growth_bound_estimate(&map, 1..=6, None, None).unwrap();
        for row in &rows {
            assert_eq!(row.max_ratio, rat(row.k as i64 + 4, row.k as i64));
        }
        assert!(rows.windows(2).all(|w| w[0].max_ratio > w[1].max_ratio));
        let lin = affine(vec![vec![2, 1], vec![1, 2]], vec![0, 0]);
        let rows = growth_bound_estimate(&lin, 1..=6, None, None).unwrap();
        assert!(rows.iter().all(|r| r.max_ratio == rat(3, 1)));
    }
}
