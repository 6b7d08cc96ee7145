//! Discrete AIMD (additive increase, multiplicative decrease).
//!
//! Each step the users back off to `A_i(x_i)` and then grow by `B_i(T)` for
//! the longest duration `T` that keeps `Σ ⌈A_i(x_i) + B_i(T)⌉` within the
//! capacity `k`.

use num_traits::{Signed, Zero};

use crate::cone::LatticeVector;
use crate::error::{Error, Result};
use crate::exact::{ceil_to_u64, int, rat, to_f64, Rational};

/// `f(t) = min_p (slope_p·t + intercept_p)` on `t ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarConcave {
    pieces: Vec<(Rational, Rational)>,
}

impl ScalarConcave {
    /// Slopes and intercepts must be nonnegative, which is exactly what keeps
    /// a minimum of affine functions nonnegative and nondecreasing on `t ≥ 0`.
    pub fn new(pieces: Vec<(Rational, Rational)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Config("scalar function needs at least one piece".into()));
        }
        if pieces
            .iter()
            .any(|(s, o)| s.is_negative() || o.is_negative())
        {
            return Err(Error::Config(
                "scalar pieces need nonnegative slope and intercept".into(),
            ));
        }
        Ok(ScalarConcave { pieces })
    }

    pub fn linear(slope: Rational) -> Self {
        ScalarConcave::new(vec![(slope, Rational::zero())]).expect("valid piece")
    }

    pub fn pieces(&self) -> &[(Rational, Rational)] {
        &self.pieces
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.pieces
            .iter()
            .map(|(s, o)| s * t + o)
            .min()
            .expect("nonempty")
    }

    /// `sup{t ≥ 0 : f(t) ≤ target}`, `None` when unbounded. Requires
    /// `f(0) ≤ target`.
    fn last_time_at_most(&self, target: &Rational) -> Option<Rational> {
        // f(t) ≤ target iff some piece is ≤ target at t
        let mut best: Option<Rational> = Some(Rational::zero());
        for (s, o) in &self.pieces {
            if s.is_zero() {
                if o <= target {
                    return None;
                }
            } else if o <= target {
                let t = (target - o) / s;
                if best.as_ref().is_some_and(|b| &t > b) {
                    best = Some(t);
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AimdModel {
    capacity: u64,
    decrease: Vec<ScalarConcave>,
    increase: Vec<ScalarConcave>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AimdStep {
    pub next: LatticeVector,
    /// The additive-increase duration.
    pub t: Rational,
}

impl AimdModel {
    pub fn new(
        capacity: u64,
        decrease: Vec<ScalarConcave>,
        increase: Vec<ScalarConcave>,
    ) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("AIMD capacity must be ≥ 1".into()));
        }
        if decrease.is_empty() || decrease.len() != increase.len() {
            return Err(Error::Config(format!(
                "AIMD needs one A and one B per user, got {} and {}",
                decrease.len(),
                increase.len()
            )));
        }
        Ok(AimdModel {
            capacity,
            decrease,
            increase,
        })
    }

    /// `A_i(x) = alpha_i·x`, `B_i(T) = beta_i·T`.
    pub fn linear(capacity: u64, alpha: Vec<Rational>, beta: Vec<Rational>) -> Result<Self> {
        AimdModel::new(
            capacity,
            alpha.into_iter().map(ScalarConcave::linear).collect(),
            beta.into_iter().map(ScalarConcave::linear).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.decrease.len()
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn decrease(&self) -> &[ScalarConcave] {
        &self.decrease
    }

    pub fn increase(&self) -> &[ScalarConcave] {
        &self.increase
    }

    pub fn in_domain(&self, x: &LatticeVector) -> bool {
        x.dim() == self.dim() && x.l1() <= self.capacity
    }

    /// `Σ_i ⌈A_i(x_i) + B_i(t)⌉`.
    pub fn load_at(&self, x: &LatticeVector, t: &Rational) -> Result<u128> {
        self.backed_off(x)?
            .iter()
            .zip(&self.increase)
            .map(|(base, b)| ceil_to_u64(&(base + b.eval(t))).map(u128::from))
            .sum()
    }

    fn backed_off(&self, x: &LatticeVector) -> Result<Vec<Rational>> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        if !self.in_domain(x) {
            return Err(Error::domain(
                x,
                format!("‖x‖₁ exceeds the capacity {}", self.capacity),
            ));
        }
        Ok(x.entries()
            .iter()
            .zip(&self.decrease)
            .map(|(&xi, a)| a.eval(&int(xi)))
            .collect())
    }

    /// One AIMD step. `T` is the supremum of durations keeping the rounded
    /// load within capacity; it is located by walking the ceiling events of
    /// the users in time order.
    pub fn step(&self, x: &LatticeVector) -> Result<AimdStep> {
        let base = self.backed_off(x)?;
        let k = self.capacity as u128;
        let zero = Rational::zero();
        let mut level = base
            .iter()
            .zip(&self.increase)
            .map(|(a, b)| ceil_to_u64(&(a + b.eval(&zero))))
            .collect::<Result<Vec<_>>>()?;
        let mut load: u128 = level.iter().map(|&n| n as u128).sum();
        if load > k {
            return Err(Error::InfeasibleStep {
                sum: load,
                capacity: self.capacity,
            });
        }
        let t = loop {
            // time at which each user's value first exceeds its current level
            let events: Vec<Option<Rational>> = (0..self.dim())
                .map(|i| self.increase[i].last_time_at_most(&(int(level[i]) - &base[i])))
                .collect();
            let Some(tau) = events.iter().flatten().min().cloned() else {
                return Err(Error::UnboundedStep {
                    capacity: self.capacity,
                });
            };
            let jumping: Vec<usize> = (0..self.dim())
                .filter(|&i| events[i].as_ref() == Some(&tau))
                .collect();
            if load + jumping.len() as u128 > k {
                break tau;
            }
            load += jumping.len() as u128;
            for i in jumping {
                level[i] += 1;
            }
        };
        let next = base
            .iter()
            .zip(&self.increase)
            .map(|(a, b)| ceil_to_u64(&(a + b.eval(&t))))
            .collect::<Result<Vec<_>>>()?;
        debug_assert_eq!(next, level);
        Ok(AimdStep {
            next: LatticeVector::new(next),
            t,
        })
    }
}

/// `(4(1 + 1/(ac))·d·c⁻² + 2√d)/k`.
pub fn aimd_residual_bound(a: &Rational, c: &Rational, d: u64, k: u64) -> Result<f64> {
    if !a.is_positive() || !c.is_positive() {
        return Err(Error::InvalidInput("a and c must be positive".into()));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let lipschitz = rat(1, 1) + (a * c).recip();
    let main = rat(4, 1) * lipschitz * int(d) / (c * c);
    Ok((to_f64(&main) + 2.0 * (d as f64).sqrt()) / k as f64)
}
