//! Approximate eigenvectors on a sphere slice and the residual and growth
//! bounds they satisfy.
//!
//! For `y` on the slice the residual is `‖Ay/‖Ay‖₁ − y/k‖₂`. With an
//! exhaustively certified `L` and `c` the best `y` has residual at most
//! `(4Ld/c² + 2√d)/k`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::analysis::{in_pool, ConstantsCertificate};
use crate::cone::{LatticeVector, RationalVector};
use crate::error::{Error, Result};
use crate::exact::{from_f64, int, le_plus_two_sqrt, rat, to_f64, Rational};
use crate::map::IntegerMap;
use crate::simplex::{nearest_slice_argmin, SphereSlice};

/// `4·L·d/c² + 2√d`.
pub fn theorem_numerator(lipschitz: f64, c: &Rational, d: u64) -> Result<f64> {
    check_bound_inputs(lipschitz, c, d)?;
    Ok(4.0 * lipschitz * d as f64 / to_f64(&(c * c)) + 2.0 * (d as f64).sqrt())
}

/// `(4·L·d/c² + 2√d)/k`.
pub fn theorem_bound(lipschitz: f64, c: &Rational, d: u64, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    Ok(theorem_numerator(lipschitz, c, d)? / k as f64)
}

fn check_bound_inputs(lipschitz: f64, c: &Rational, d: u64) -> Result<()> {
    if !(lipschitz.is_finite() && lipschitz >= 0.0) {
        return Err(Error::InvalidInput(format!("L = {lipschitz} must be finite and ≥ 0")));
    }
    if d == 0 {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    if !c.is_positive() || c > &rat(1, d as i64) {
        return Err(Error::InvalidInput("c must lie in (0, 1/d]".into()));
    }
    Ok(())
}

/// The rational part `4·L·d/c²` of the bound numerator, with `L` taken
/// exactly from its floating value.
fn rational_part(lipschitz: f64, c: &Rational, d: u64) -> Rational {
    rat(4, 1) * from_f64(lipschitz) * int(d) / (c * c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Heuristic,
}

impl SearchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Heuristic => "heuristic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorollaryCheck {
    pub a: Option<Rational>,
    pub b: Option<Rational>,
    /// `a(1 − ε)·y ≤ Ay`.
    pub lower_pass: Option<bool>,
    /// Set when `ε ≥ 1`, which makes the lower inequality trivial.
    pub lower_vacuous: bool,
    /// `Ay ≤ b(1 + ε)·y`.
    pub upper_pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub slice: SphereSlice,
    pub y_k: LatticeVector,
    pub image: LatticeVector,
    pub residual_squared: Rational,
    pub residual: f64,
    pub lipschitz: Option<f64>,
    /// The `c` entering the bound.
    pub c: Option<Rational>,
    pub bound: Option<f64>,
    /// `None` in heuristic mode.
    pub theorem_pass: Option<bool>,
    /// `(4Ld/c² + 2√d)/(ck)`.
    pub epsilon: Option<f64>,
    pub corollary: Option<CorollaryCheck>,
    pub search_mode: SearchMode,
    pub points_scanned: u128,
}

/// `Σ_i (Ay_i/‖Ay‖₁ − y_i/k)²`, exactly.
pub fn residual_squared(y: &LatticeVector, ay: &LatticeVector, k: u64) -> Result<Rational> {
    let s = ay.l1();
    if s == 0 {
        return Err(Error::certification(
            format!("A{y} = 0 has no direction"),
            vec![y.clone()],
        ));
    }
    let (k, s) = (BigInt::from(k), BigInt::from(s));
    let num: BigInt = y
        .entries()
        .iter()
        .zip(ay.entries())
        .map(|(&yi, &ai)| {
            let t = &k * BigInt::from(ai) - &s * BigInt::from(yi);
            &t * &t
        })
        .sum();
    let den = &k * &s;
    Ok(Rational::new(num, &den * &den))
}

/// `√r ≤ (P + 2√d)/k` with `P = 4Ld/c²`, decided exactly.
fn residual_within(r2: &Rational, p: &Rational, d: u64, k: u64) -> bool {
    // r²k² ≤ P² + 4P√d + 4d
    let q = r2 * int(k) * int(k) - p * p - int(4 * d);
    if !q.is_positive() {
        return true;
    }
    &q * &q <= rat(16, 1) * p * p * int(d)
}

/// Exhaustive argmin of the residual over `slice`, with the bound built
/// from `cert`. The certificate may cover a larger slice of the same sphere,
/// and its `c` must be at least the slice's.
pub fn find_best(
    map: &IntegerMap,
    slice: &SphereSlice,
    cert: &ConstantsCertificate,
    threads: Option<usize>,
) -> Result<ResidualReport> {
    if !cert.exhaustive {
        return Err(Error::InvalidInput(
            "the theorem bound needs an exhaustive certificate".into(),
        ));
    }
    let cs = &cert.slice;
    let covers = cs.d() == slice.d()
        && cs.k() == slice.k()
        && match (cs.c(), slice.c()) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a <= b,
        };
    if !covers {
        return Err(Error::InvalidInput(
            "certificate does not cover the requested slice".into(),
        ));
    }
    if let Some(sc) = slice.c() {
        if &cert.c < sc {
            return Err(Error::InvalidInput(format!(
                "certified c = {} is below the slice's c = {}",
                crate::exact::format_rational(&cert.c),
                crate::exact::format_rational(sc)
            )));
        }
    }
    if slice.is_empty() {
        return Err(Error::InvalidSlice("the slice has no points".into()));
    }
    let d = slice.d() as u64;
    let k = slice.k();
    let c = slice.c().cloned().unwrap_or_else(|| cert.c.clone());

    let (y_k, image, r2, scanned) = if d == 1 {
        let y = LatticeVector::new(vec![k]);
        let ay = map.evaluate(&y)?;
        (y, ay, Rational::zero(), 1)
    } else {
        let points = slice.points();
        let n = points.len() as u128;
        let scored = in_pool(threads, || {
            points
                .into_par_iter()
                .map(|y| {
                    let ay = map.evaluate(&y)?;
                    let r2 = residual_squared(&y, &ay, k)?;
                    Ok((r2, y, ay))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let (r2, y, ay) = scored
            .into_iter()
            .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
            .expect("nonempty slice");
        (y, ay, r2, n)
    };

    let p = rational_part(cert.lipschitz, &c, d);
    let bound = theorem_bound(cert.lipschitz, &c, d, k)?;
    Ok(ResidualReport {
        slice: slice.clone(),
        residual: to_f64(&r2).sqrt(),
        theorem_pass: Some(residual_within(&r2, &p, d, k)),
        y_k,
        image,
        residual_squared: r2,
        lipschitz: Some(cert.lipschitz),
        epsilon: Some(bound / to_f64(&c)),
        bound: Some(bound),
        c: Some(c),
        corollary: None,
        search_mode: SearchMode::Exhaustive,
        points_scanned: scanned,
    })
}

/// Checks `a(1 − ε)·y_k ≤ A y_k` and `A y_k ≤ b(1 + ε)·y_k` componentwise,
/// exactly, with `ε = (4Ld/c² + 2√d)/(ck)`.
pub fn verify_corollary(
    mut report: ResidualReport,
    a: Option<&Rational>,
    b: Option<&Rational>,
) -> Result<ResidualReport> {
    let (Some(l), Some(c)) = (report.lipschitz, report.c.clone()) else {
        return Err(Error::InvalidInput(
            "the corollary needs a report with certified L and c".into(),
        ));
    };
    for v in [a, b].into_iter().flatten() {
        if !v.is_positive() {
            return Err(Error::InvalidInput("a and b must be positive".into()));
        }
    }
    let d = report.slice.d() as u64;
    let ck = &c * int(report.slice.k());
    let p = rational_part(l, &c, d);
    let y = report.y_k.entries();
    let ay = report.image.entries();

    // ε ≥ 1 iff ck ≤ P + 2√d
    let vacuous = le_plus_two_sqrt(&ck, &p, d);
    let lower_pass = a.map(|a| {
        vacuous
            || y.iter().zip(ay).all(|(&yi, &ai)| {
                yi == 0 || {
                    let r = int(ai) / (a * int(yi));
                    le_plus_two_sqrt(&(&ck * (rat(1, 1) - r)), &p, d)
                }
            })
    });
    let upper_pass = b.map(|b| {
        y.iter().zip(ay).all(|(&yi, &ai)| {
            if yi == 0 {
                ai == 0
            } else {
                let s = int(ai) / (b * int(yi));
                le_plus_two_sqrt(&(&ck * (s - rat(1, 1))), &p, d)
            }
        })
    });
    report.corollary = Some(CorollaryCheck {
        a: a.cloned(),
        b: b.cloned(),
        lower_pass,
        lower_vacuous: a.is_some() && vacuous,
        upper_pass,
    });
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeuristicStop {
    FixedPoint,
    Cycle { period: usize },
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicRun {
    pub trajectory: Vec<LatticeVector>,
    pub stop: HeuristicStop,
    /// Steps where the normalized image had a coordinate below `c`.
    pub clamped_steps: usize,
    pub best: ResidualReport,
}

/// Raises coordinates below `c` to `c` and rescales the rest so the total
/// stays 1, repeating until every coordinate is at least `c`.
pub fn clamp_into_d(v: &[Rational], c: &Rational) -> Vec<Rational> {
    let d = v.len();
    let mut fixed = vec![false; d];
    let mut out = v.to_vec();
    loop {
        let newly: Vec<usize> = (0..d).filter(|&i| !fixed[i] && &out[i] < c).collect();
        if newly.is_empty() {
            return out;
        }
        for i in newly {
            fixed[i] = true;
        }
        let n_fixed = fixed.iter().filter(|&&f| f).count();
        let free_mass = rat(1, 1) - c * int(n_fixed as u64);
        let free_sum: Rational = (0..d).filter(|&i| !fixed[i]).map(|i| v[i].clone()).sum();
        let n_free = d - n_fixed;
        for i in 0..d {
            out[i] = if fixed[i] {
                c.clone()
            } else if free_sum.is_positive() {
                &v[i] * &free_mass / &free_sum
            } else {
                &free_mass / int(n_free as u64)
            };
        }
    }
}

/// Advisory search: `y ↦ nearest slice point to the clamped direction of
/// A(y)`, until a fixed point, a cycle or `max_steps`.
pub fn heuristic_iterate(
    map: &IntegerMap,
    slice: &SphereSlice,
    start: &LatticeVector,
    max_steps: usize,
    cert: Option<&ConstantsCertificate>,
) -> Result<HeuristicRun> {
    if slice.is_empty() {
        return Err(Error::InvalidSlice("the slice has no points".into()));
    }
    if !slice.contains(start) {
        return Err(Error::InvalidInput(format!("start {start} is not on the slice")));
    }
    let k = slice.k();
    let c = slice.c().cloned().unwrap_or_else(Rational::zero);
    let mut trajectory = vec![start.clone()];
    let mut seen: HashMap<LatticeVector, usize> = HashMap::from([(start.clone(), 0)]);
    let mut images = vec![map.evaluate(start)?];
    let mut clamped_steps = 0;
    let mut stop = HeuristicStop::MaxSteps;
    for _ in 0..max_steps {
        let ay = images.last().expect("nonempty");
        if ay.is_zero() {
            return Err(Error::certification(
                format!("A{} = 0 has no direction", trajectory.last().expect("nonempty")),
                vec![trajectory.last().expect("nonempty").clone()],
            ));
        }
        let dir = ay.normalized();
        let clamped = clamp_into_d(dir.entries(), &c);
        if &clamped[..] != dir.entries() {
            clamped_steps += 1;
        }
        let next = nearest_slice_argmin(&RationalVector::new(clamped)?, slice)?.point;
        let current = trajectory.last().expect("nonempty");
        if &next == current {
            stop = HeuristicStop::FixedPoint;
            break;
        }
        if let Some(&idx) = seen.get(&next) {
            stop = HeuristicStop::Cycle {
                period: trajectory.len() - idx,
            };
            break;
        }
        seen.insert(next.clone(), trajectory.len());
        images.push(map.evaluate(&next)?);
        trajectory.push(next);
    }

    let (r2, y, ay) = trajectory
        .iter()
        .zip(&images)
        .map(|(y, ay)| residual_squared(y, ay, k).map(|r| (r, y, ay)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        .expect("nonempty trajectory");
    let d = slice.d() as u64;
    let bound_c = slice.c().cloned().or_else(|| cert.map(|c| c.c.clone()));
    let bound = match (cert, &bound_c) {
        (Some(cert), Some(c)) => Some(theorem_bound(cert.lipschitz, c, d, k)?),
        _ => None,
    };
    let best = ResidualReport {
        slice: slice.clone(),
        y_k: y.clone(),
        image: ay.clone(),
        residual: to_f64(&r2).sqrt(),
        residual_squared: r2,
        lipschitz: cert.map(|c| c.lipschitz),
        epsilon: bound.zip(bound_c.as_ref()).map(|(b, c)| b / to_f64(c)),
        c: bound_c,
        bound,
        theorem_pass: None,
        corollary: None,
        search_mode: SearchMode::Heuristic,
        points_scanned: trajectory.len() as u128,
    };
    Ok(HeuristicRun {
        trajectory,
        stop,
        clamped_steps,
        best,
    })
}
