//! Discrete SIS epidemic map.
//!
//! With `M_i` the population at location `i`, the infected count evolves as
//! `A_i(x) = min{M_i, ⌈P_i(x)⌉}` where
//! `P_i(x) = δ'_i x_i + Σ_j b_ij (x_j / M_j)(M_i - x_i)`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cone::LatticeVector;
use crate::error::{Error, Result};
use crate::exact::{ceil_to_u64, format_rational, int, rat, round_sig, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SisConfig {
    pub populations: Vec<u64>,
    pub delta_prime: Vec<Rational>,
    pub infection: Vec<Vec<Rational>>,
}

/// A validated [`SisConfig`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SisModel {
    cfg: SisConfig,
}

impl SisModel {
    pub fn new(cfg: SisConfig) -> Result<Self> {
        let d = cfg.populations.len();
        if d == 0 {
            return Err(Error::Config("SIS model needs at least one location".into()));
        }
        if cfg.delta_prime.len() != d
            || cfg.infection.len() != d
            || cfg.infection.iter().any(|row| row.len() != d)
        {
            return Err(Error::Config(format!(
                "SIS model with {d} locations needs {d} δ' values and a {d}×{d} matrix B"
            )));
        }
        if cfg.populations.contains(&0) {
            return Err(Error::Config("populations M_i must be ≥ 1".into()));
        }
        if cfg
            .delta_prime
            .iter()
            .any(|v| v.is_negative() || v > &rat(1, 1))
        {
            return Err(Error::Config("δ'_i must lie in [0, 1]".into()));
        }
        if cfg.infection.iter().flatten().any(Signed::is_negative) {
            return Err(Error::Config("infection rates b_ij must be ≥ 0".into()));
        }
        Ok(SisModel { cfg })
    }

    pub fn config(&self) -> &SisConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.populations.len()
    }

    /// `P(x)`, exactly.
    pub fn infected_estimate(&self, x: &LatticeVector) -> Result<Vec<Rational>> {
        self.check_domain(x)?;
        let m = &self.cfg.populations;
        let xs = x.entries();
        Ok((0..self.dim())
            .map(|i| {
                let susceptible = int(m[i] - xs[i]);
                let pressure: Rational = (0..self.dim())
                    .map(|j| {
                        &self.cfg.infection[i][j]
                            * Rational::new(BigInt::from(xs[j]), BigInt::from(m[j]))
                    })
                    .sum();
                &self.cfg.delta_prime[i] * int(xs[i]) + pressure * susceptible
            })
            .collect())
    }

    pub fn evaluate(&self, x: &LatticeVector) -> Result<LatticeVector> {
        let p = self.infected_estimate(x)?;
        let out = p
            .iter()
            .zip(&self.cfg.populations)
            .map(|(pi, &mi)| ceil_to_u64(pi).map(|c| c.min(mi)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LatticeVector::new(out))
    }

    fn check_domain(&self, x: &LatticeVector) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        if let Some(i) = (0..self.dim()).find(|&i| x.entries()[i] > self.cfg.populations[i]) {
            return Err(Error::domain(
                x,
                format!("x_{} exceeds the population M_{} = {}", i + 1, i + 1, self.cfg.populations[i]),
            ));
        }
        Ok(())
    }

    pub fn bounds(&self) -> SisBounds {
        let c = &self.cfg;
        let minmax = |it: &mut dyn Iterator<Item = Rational>| {
            let v: Vec<Rational> = it.collect();
            (
                v.iter().min().cloned().expect("nonempty"),
                v.iter().max().cloned().expect("nonempty"),
            )
        };
        let (delta_lo, delta_hi) = minmax(&mut c.delta_prime.iter().cloned());
        let (b_lo, b_hi) = minmax(&mut c.infection.iter().flatten().cloned());
        let (r_lo, r_hi) = minmax(&mut c.populations.iter().flat_map(|&mi| {
            c.populations
                .iter()
                .map(move |&mj| Rational::new(BigInt::from(mi), BigInt::from(mj)))
        }));
        SisBounds {
            d: self.dim(),
            min_population: *c.populations.iter().min().expect("nonempty"),
            delta_lo,
            delta_hi,
            b_lo,
            b_hi,
            r_lo,
            r_hi,
        }
    }

    pub fn constants(&self, k: u64) -> Result<SisConstants> {
        self.bounds().constants(k)
    }
}

/// Extreme values of the SIS coefficients: `δ_* ≤ δ'_i ≤ δ*`,
/// `B_* ≤ b_ij ≤ B*`, `R_* ≤ M_i/M_j ≤ R*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SisBounds {
    pub d: usize,
    pub min_population: u64,
    pub delta_lo: Rational,
    pub delta_hi: Rational,
    pub b_lo: Rational,
    pub b_hi: Rational,
    pub r_lo: Rational,
    pub r_hi: Rational,
}

/// Closed-form constants for the SIS map on the sphere of radius `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SisConstants {
    pub k: u64,
    /// Largest radius for which the pointwise image bounds hold: `min M_i`.
    pub valid_k_bound_a: Rational,
    /// Largest radius for which the Lipschitz bound holds:
    /// `min M_i / (δ* + R*B* + 1)`.
    pub valid_k_bound_l: Rational,
    pub lipschitz: Rational,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    /// `½ min{δ_*, R_*B_*}`: lower image bound per unit radius.
    pub image_lower_per_k: Rational,
    /// `δ* + R*B* + 1`: upper image bound per unit radius.
    pub image_upper_per_k: Rational,
}

impl SisConstants {
    pub fn k_within_bound_a(&self) -> bool {
        int(self.k) <= self.valid_k_bound_a
    }

    pub fn k_within_bound_l(&self) -> bool {
        int(self.k) <= self.valid_k_bound_l
    }
}

impl SisBounds {
    pub fn constants(&self, k: u64) -> Result<SisConstants> {
        if !self.delta_lo.is_positive() || !self.b_lo.is_positive() {
            return Err(Error::InvalidInput(
                "SIS constants need δ_* > 0 and B_* > 0".into(),
            ));
        }
        let d = int(self.d as u64);
        let growth = &self.delta_hi + &self.r_hi * &self.b_hi + rat(1, 1);
        let low = (&self.delta_lo).min(&(&self.r_lo * &self.b_lo)).clone();
        let lipschitz = rat(4, 1)
            * &growth
            * (&self.delta_hi + &self.r_hi * &self.b_hi * &d + &self.b_hi * &d + rat(2, 1))
            / (&low * &low);
        Ok(SisConstants {
            k,
            valid_k_bound_a: int(self.min_population),
            valid_k_bound_l: int(self.min_population) / &growth,
            lipschitz,
            a: &low / rat(2, 1) * &d,
            b: &growth * &d,
            c: &low / (rat(2, 1) * &d * &growth),
            image_lower_per_k: &low / rat(2, 1),
            image_upper_per_k: growth,
        })
    }
}

/// Residual bound numerator `4·L·d·c⁻² + 2√d`.
pub fn bound_numerator(lipschitz: f64, c: &Rational, d: u64) -> f64 {
    4.0 * lipschitz * d as f64 / to_f64(&(c * c)) + 2.0 * (d as f64).sqrt()
}

/// The three-location example with equal populations, `δ_* = B_* = 1/2`,
/// `δ* = B* = 3/4`.
#[derive(Clone, Debug, Serialize)]
pub struct PaperExample {
    pub d: u64,
    #[serde(rename = "L")]
    pub lipschitz: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub numerator: f64,
    pub sqrt_d_numerator: f64,
    pub corollary_error: f64,
}

pub fn three_country_bounds() -> SisBounds {
    SisBounds {
        d: 3,
        min_population: 1_000_000_000,
        delta_lo: rat(1, 2),
        delta_hi: rat(3, 4),
        b_lo: rat(1, 2),
        b_hi: rat(3, 4),
        r_lo: rat(1, 1),
        r_hi: rat(1, 1),
    }
}

/// A concrete configuration whose coefficient extremes are
/// [`three_country_bounds`].
pub fn three_country_config(population: u64) -> SisConfig {
    SisConfig {
        populations: vec![population; 3],
        delta_prime: vec![rat(1, 2), rat(3, 4), rat(3, 4)],
        infection: vec![
            vec![rat(1, 2), rat(3, 4), rat(1, 2)],
            vec![rat(3, 4), rat(1, 2), rat(3, 4)],
            vec![rat(1, 2), rat(1, 2), rat(3, 4)],
        ],
    }
}

pub fn paper_example() -> PaperExample {
    let k = 1;
    let consts = three_country_bounds()
        .constants(k)
        .expect("positive coefficients");
    let d = 3u64;
    let lipschitz = to_f64(&consts.lipschitz);
    let numerator = bound_numerator(lipschitz, &consts.c, d);
    let sqrt_d_numerator = (d as f64).sqrt() * numerator;
    let corollary_error = numerator / to_f64(&consts.c);
    debug_assert!(!consts.c.is_zero());
    PaperExample {
        d,
        lipschitz: format_rational(&consts.lipschitz),
        a: format_rational(&consts.a),
        b: format_rational(&consts.b),
        c: format_rational(&consts.c),
        numerator: round_sig(numerator, 12),
        sqrt_d_numerator: round_sig(sqrt_d_numerator, 12),
        corollary_error: round_sig(corollary_error, 12),
    }
}
