//! Positivity, monotonicity and scalability of a map on a window.

use crate::analysis::{check_scalability, window_points, ScalabilityReport};
use crate::cone::LatticeVector;
use crate::error::Result;
use crate::map::IntegerMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointCheck {
    Pass { checked: u64 },
    Counterexample { points: Vec<LatticeVector> },
}

impl PointCheck {
    pub fn passed(&self) -> bool {
        matches!(self, PointCheck::Pass { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardReport {
    /// `A(x) ≫ 0` on the window.
    pub positivity: PointCheck,
    /// `x ≥ y ⇒ A(x) ≥ A(y)` on the window.
    pub monotonicity: PointCheck,
    /// `A(m·x) ≤ m·A(x)` for `2 ≤ m ≤ max_m`.
    pub scalability: ScalabilityReport,
}

impl StandardReport {
    pub fn passed(&self) -> bool {
        self.positivity.passed() && self.monotonicity.passed() && self.scalability.passed()
    }
}

/// Checks the three standard-map properties on `[0, w]ᵈ`; points outside
/// the map's domain are skipped.
pub fn standard_map_check(map: &IntegerMap, w: u64, max_m: u64) -> Result<StandardReport> {
    let evaluated: Vec<(LatticeVector, LatticeVector)> = window_points(map.dim(), w)
        .into_iter()
        .filter_map(|x| map.evaluate(&x).ok().map(|ax| (x, ax)))
        .collect();

    let positivity = match evaluated
        .iter()
        .find(|(_, ax)| ax.entries().contains(&0))
    {
        Some((x, _)) => PointCheck::Counterexample {
            points: vec![x.clone()],
        },
        None => PointCheck::Pass {
            checked: evaluated.len() as u64,
        },
    };

    let mut monotonicity = None;
    let mut pairs = 0u64;
    'outer: for (x, ax) in &evaluated {
        for (y, ay) in &evaluated {
            if x != y && y.le(x) {
                pairs += 1;
                if !ay.le(ax) {
                    monotonicity = Some(PointCheck::Counterexample {
                        points: vec![x.clone(), y.clone()],
                    });
                    break 'outer;
                }
            }
        }
    }

    Ok(StandardReport {
        positivity,
        monotonicity: monotonicity.unwrap_or(PointCheck::Pass { checked: pairs }),
        scalability: check_scalability(map, w, max_m)?,
    })
}
