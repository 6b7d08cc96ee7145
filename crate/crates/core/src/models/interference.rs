//! Fixed-assignment interference map for uplink power control.
//!
//! User `j` talks to base `a_j`; its required power is
//! `I_j(x) = γ_j (Σ_{i≠j} h_{a_j,i} x_i + σ_{a_j}) / h_{a_j,j}`.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cone::LatticeVector;
use crate::error::{Error, Result};
use crate::exact::{ceil_to_u64, int, Rational};
use crate::map::AffineMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMode {
    /// Every `h_{a_j,j}` divides `γ_j`, so `I` is integer valued.
    #[default]
    Integral,
    /// `⌈I_j⌉`, flagged whenever the ceiling changes a value.
    Ceiling,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterferenceConfig {
    /// `gains[k][j]`: gain from user `j` to base `k`.
    pub gains: Vec<Vec<u64>>,
    pub noise: Vec<u64>,
    pub targets: Vec<u64>,
    /// Zero-based base index of each user.
    pub assignment: Vec<usize>,
    pub mode: RoundingMode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterferenceModel {
    cfg: InterferenceConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterferenceEval {
    pub value: LatticeVector,
    /// Set in ceiling mode when some `I_j(x)` was not an integer.
    pub ceiling_applied: bool,
}

/// `max_i I(x)_i / x_i` over the support of `x`, or infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Finite(Rational),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    pub factor: Factor,
}

impl InterferenceModel {
    pub fn new(cfg: InterferenceConfig) -> Result<Self> {
        let d = cfg.targets.len();
        let bases = cfg.gains.len();
        if d == 0 || bases == 0 {
            return Err(Error::Config("need at least one user and one base".into()));
        }
        if cfg.gains.iter().any(|row| row.len() != d) {
            return Err(Error::Config(format!("gain matrix must have {d} columns")));
        }
        if cfg.noise.len() != bases || cfg.assignment.len() != d {
            return Err(Error::Config(format!(
                "need {bases} noise values and {d} assignments"
            )));
        }
        if cfg.gains.iter().flatten().any(|&h| h == 0) || cfg.noise.contains(&0) {
            return Err(Error::Config("gains and noise must be ≥ 1".into()));
        }
        if let Some(j) = cfg.assignment.iter().position(|&a| a >= bases) {
            return Err(Error::Config(format!(
                "user {j} is assigned to base {} but there are only {bases}",
                cfg.assignment[j]
            )));
        }
        if cfg.mode == RoundingMode::Integral {
            for j in 0..d {
                let own = cfg.gains[cfg.assignment[j]][j];
                if cfg.targets[j] % own != 0 {
                    return Err(Error::Config(format!(
                        "integral mode needs h[{}][{j}] = {own} to divide γ_{j} = {}",
                        cfg.assignment[j], cfg.targets[j]
                    )));
                }
            }
        }
        Ok(InterferenceModel { cfg })
    }

    pub fn config(&self) -> &InterferenceConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.targets.len()
    }

    /// `I(x)` before rounding.
    pub fn evaluate_real(&self, x: &LatticeVector) -> Result<Vec<Rational>> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let c = &self.cfg;
        Ok((0..self.dim())
            .map(|j| {
                let base = c.assignment[j];
                let h = &c.gains[base];
                let interference: BigInt = (0..self.dim())
                    .filter(|&i| i != j)
                    .map(|i| BigInt::from(h[i]) * BigInt::from(x.entries()[i]))
                    .sum::<BigInt>()
                    + BigInt::from(c.noise[base]);
                Rational::new(interference * BigInt::from(c.targets[j]), BigInt::from(h[j]))
            })
            .collect())
    }

    pub fn evaluate(&self, x: &LatticeVector) -> Result<InterferenceEval> {
        let real = self.evaluate_real(x)?;
        let ceiling_applied = real.iter().any(|v| !v.is_integer());
        debug_assert!(!(ceiling_applied && self.cfg.mode == RoundingMode::Integral));
        let value = real.iter().map(ceil_to_u64).collect::<Result<Vec<_>>>()?;
        Ok(InterferenceEval {
            value: LatticeVector::new(value),
            ceiling_applied,
        })
    }

    /// The integral-mode map as `x ↦ Mx + v`. `None` in ceiling mode.
    pub fn as_affine(&self) -> Option<AffineMap> {
        if self.cfg.mode != RoundingMode::Integral {
            return None;
        }
        let c = &self.cfg;
        let d = self.dim();
        let mut matrix = vec![vec![0; d]; d];
        let mut offset = vec![0; d];
        for j in 0..d {
            let h = &c.gains[c.assignment[j]];
            let per = c.targets[j] / h[j];
            for i in (0..d).filter(|&i| i != j) {
                matrix[j][i] = per * h[i];
            }
            offset[j] = per * c.noise[c.assignment[j]];
        }
        Some(AffineMap::new(matrix, offset).expect("square by construction"))
    }

    pub fn feasibility_check(&self, x: &LatticeVector) -> Result<Feasibility> {
        let image = self.evaluate(x)?.value;
        let feasible = image.le(x);
        let mut factor = Rational::zero();
        for (&ix, &xv) in image.entries().iter().zip(x.entries()) {
            if xv == 0 {
                if ix > 0 {
                    return Ok(Feasibility {
                        feasible,
                        factor: Factor::Infinite,
                    });
                }
            } else {
                factor = factor.max(int(ix) / int(xv));
            }
        }
        Ok(Feasibility {
            feasible,
            factor: Factor::Finite(factor),
        })
    }
}

/// One base, two users, `h = (2, 1)`, `σ = 2`, `γ = (2, 2)`.
pub fn two_user_example() -> InterferenceModel {
    InterferenceModel::new(InterferenceConfig {
        gains: vec![vec![2, 1]],
        noise: vec![2],
        targets: vec![2, 2],
        assignment: vec![0, 0],
        mode: RoundingMode::Integral,
    })
    .expect("valid example")
}
