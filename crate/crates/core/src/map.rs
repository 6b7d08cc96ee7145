//! Integer maps `A: Z₊ᵈ → Z₊ᵈ` and their evaluation.

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::cone::LatticeVector;
use crate::error::{Error, Result};
use crate::exact::{ceil_to_u64, format_rational, int, Rational};
use crate::models::{AimdModel, InterferenceModel, SisModel};

/// `x ↦ Mx + v` with nonnegative integer `M` and `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    matrix: Vec<Vec<u64>>,
    offset: Vec<u64>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<u64>>, offset: Vec<u64>) -> Result<Self> {
        let d = offset.len();
        if d == 0 {
            return Err(Error::Config("affine map needs dimension ≥ 1".into()));
        }
        if matrix.len() != d || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::Config(format!("affine matrix must be {d}×{d}")));
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn linear(matrix: Vec<Vec<u64>>) -> Result<Self> {
        let d = matrix.len();
        AffineMap::new(matrix, vec![0; d])
    }

    pub fn identity(d: usize) -> Self {
        let matrix = (0..d)
            .map(|i| (0..d).map(|j| u64::from(i == j)).collect())
            .collect();
        AffineMap {
            matrix,
            offset: vec![0; d],
        }
    }

    pub fn constant(value: Vec<u64>) -> Self {
        let d = value.len();
        AffineMap {
            matrix: vec![vec![0; d]; d],
            offset: value,
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[u64] {
        &self.offset
    }

    pub fn apply(&self, x: &[u64]) -> Result<Vec<u64>> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, &v)| {
                row.iter()
                    .zip(x)
                    .try_fold(v, |acc, (&m, &xi)| {
                        m.checked_mul(xi).and_then(|p| acc.checked_add(p))
                    })
                    .ok_or(Error::Overflow("affine map"))
            })
            .collect()
    }
}

/// `max_i min_j A_{i,j}`, componentwise, over a grid of affine maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigzagMap {
    pieces: Vec<Vec<AffineMap>>,
}

impl ZigzagMap {
    pub fn new(pieces: Vec<Vec<AffineMap>>) -> Result<Self> {
        let d = pieces
            .first()
            .and_then(|row| row.first())
            .map(AffineMap::dim)
            .ok_or_else(|| Error::Config("zigzag map needs at least one piece".into()))?;
        if pieces
            .iter()
            .any(|row| row.is_empty() || row.iter().any(|p| p.dim() != d))
        {
            return Err(Error::Config(
                "zigzag rows must be nonempty and share one dimension".into(),
            ));
        }
        Ok(ZigzagMap { pieces })
    }

    /// Componentwise minimum of the given affine maps.
    pub fn min_of(pieces: Vec<AffineMap>) -> Result<Self> {
        ZigzagMap::new(vec![pieces])
    }

    pub fn dim(&self) -> usize {
        self.pieces[0][0].dim()
    }

    pub fn pieces(&self) -> &[Vec<AffineMap>] {
        &self.pieces
    }

    fn apply(&self, x: &[u64]) -> Result<Vec<u64>> {
        let mut out: Option<Vec<u64>> = None;
        for row in &self.pieces {
            let mut low: Option<Vec<u64>> = None;
            for piece in row {
                let v = piece.apply(x)?;
                low = Some(match low {
                    None => v,
                    Some(l) => l.into_iter().zip(v).map(|(a, b)| a.min(b)).collect(),
                });
            }
            let low = low.expect("nonempty row");
            out = Some(match out {
                None => low,
                Some(o) => o.into_iter().zip(low).map(|(a, b)| a.max(b)).collect(),
            });
        }
        Ok(out.expect("nonempty grid"))
    }
}

/// One affine real function `x ↦ w·x + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub weights: Vec<Rational>,
    pub constant: Rational,
}

impl AffinePiece {
    pub fn new(weights: Vec<Rational>, constant: Rational) -> Self {
        AffinePiece { weights, constant }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.weights
            .iter()
            .zip(x)
            .fold(self.constant.clone(), |acc, (w, xi)| acc + w * xi)
    }
}

/// A concave real map whose components are minima of finitely many affine
/// functions with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcaveRealMap {
    components: Vec<Vec<AffinePiece>>,
}

impl ConcaveRealMap {
    pub fn new(components: Vec<Vec<AffinePiece>>) -> Result<Self> {
        let d = components.len();
        if d == 0 {
            return Err(Error::Config("concave map needs dimension ≥ 1".into()));
        }
        if components
            .iter()
            .any(|pieces| pieces.is_empty() || pieces.iter().any(|p| p.weights.len() != d))
        {
            return Err(Error::Config(format!(
                "each of the {d} components needs ≥ 1 piece with {d} weights"
            )));
        }
        Ok(ConcaveRealMap { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<AffinePiece>] {
        &self.components
    }

    /// Whether `F ≥ 0` on all of `ℝ₊ᵈ`. A minimum of affine functions is
    /// nonnegative on the cone exactly when every piece has nonnegative
    /// weights and constant.
    pub fn is_nonnegative_on_cone(&self) -> bool {
        self.components.iter().flatten().all(|p| {
            !p.constant.is_negative() && p.weights.iter().all(|w| !w.is_negative())
        })
    }

    /// `F(x)` exactly, at any rational point.
    pub fn eval_real(&self, x: &[Rational]) -> Vec<Rational> {
        self.components
            .iter()
            .map(|pieces| {
                pieces
                    .iter()
                    .map(|p| p.eval(x))
                    .min()
                    .expect("nonempty component")
            })
            .collect()
    }

    pub fn eval_lattice(&self, x: &LatticeVector) -> Vec<Rational> {
        let xr: Vec<Rational> = x.entries().iter().map(|&v| int(v)).collect();
        self.eval_real(&xr)
    }

    fn apply(&self, x: &LatticeVector) -> Result<Vec<u64>> {
        self.eval_lattice(x)
            .iter()
            .map(|v| {
                if v.is_negative() {
                    Err(Error::domain(
                        x,
                        format!("concave map takes the negative value {}", format_rational(v)),
                    ))
                } else {
                    ceil_to_u64(v)
                }
            })
            .collect()
    }
}

/// An explicit finite input → output table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableMap {
    d: usize,
    entries: BTreeMap<LatticeVector, LatticeVector>,
}

impl TableMap {
    pub fn new(
        d: usize,
        entries: impl IntoIterator<Item = (LatticeVector, LatticeVector)>,
    ) -> Result<Self> {
        let entries: BTreeMap<_, _> = entries.into_iter().collect();
        if entries.iter().any(|(k, v)| k.dim() != d || v.dim() != d) {
            return Err(Error::Config(format!("table entries must have dimension {d}")));
        }
        Ok(TableMap { d, entries })
    }

    /// Tabulates `f` over `points`.
    pub fn from_fn(
        d: usize,
        points: impl IntoIterator<Item = LatticeVector>,
        mut f: impl FnMut(&LatticeVector) -> LatticeVector,
    ) -> Result<Self> {
        TableMap::new(
            d,
            points.into_iter().map(|p| {
                let v = f(&p);
                (p, v)
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &BTreeMap<LatticeVector, LatticeVector> {
        &self.entries
    }
}

/// Evaluatable description of a map on `Z₊ᵈ`.
#[derive(Clone, Debug)]
pub enum IntegerMap {
    Affine(AffineMap),
    Zigzag(ZigzagMap),
    CeilingOfConcave(ConcaveRealMap),
    Sis(SisModel),
    Aimd(AimdModel),
    Interference(InterferenceModel),
    Table(TableMap),
}

impl IntegerMap {
    pub fn dim(&self) -> usize {
        match self {
            IntegerMap::Affine(m) => m.dim(),
            IntegerMap::Zigzag(m) => m.dim(),
            IntegerMap::CeilingOfConcave(m) => m.dim(),
            IntegerMap::Sis(m) => m.dim(),
            IntegerMap::Aimd(m) => m.dim(),
            IntegerMap::Interference(m) => m.dim(),
            IntegerMap::Table(m) => m.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            IntegerMap::Affine(_) => "affine",
            IntegerMap::Zigzag(_) => "zigzag",
            IntegerMap::CeilingOfConcave(_) => "ceiling_of_concave",
            IntegerMap::Sis(_) => "sis",
            IntegerMap::Aimd(_) => "aimd",
            IntegerMap::Interference(_) => "interference",
            IntegerMap::Table(_) => "table",
        }
    }

    /// `A(x)`.
    pub fn evaluate(&self, x: &LatticeVector) -> Result<LatticeVector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let out = match self {
            IntegerMap::Affine(m) => m.apply(x.entries())?,
            IntegerMap::Zigzag(m) => m.apply(x.entries())?,
            IntegerMap::CeilingOfConcave(m) => m.apply(x)?,
            IntegerMap::Sis(m) => return m.evaluate(x),
            IntegerMap::Aimd(m) => return m.step(x).map(|s| s.next),
            IntegerMap::Interference(m) => return m.evaluate(x).map(|e| e.value),
            IntegerMap::Table(t) => {
                return t
                    .entries
                    .get(x)
                    .cloned()
                    .ok_or_else(|| Error::domain(x, "not in the map's table"))
            }
        };
        Ok(LatticeVector::new(out))
    }

    pub fn in_domain(&self, x: &LatticeVector) -> bool {
        self.evaluate(x).is_ok()
    }
}

impl From<AffineMap> for IntegerMap {
    fn from(m: AffineMap) -> Self {
        IntegerMap::Affine(m)
    }
}

impl From<ZigzagMap> for IntegerMap {
    fn from(m: ZigzagMap) -> Self {
        IntegerMap::Zigzag(m)
    }
}

impl From<ConcaveRealMap> for IntegerMap {
    fn from(m: ConcaveRealMap) -> Self {
        IntegerMap::CeilingOfConcave(m)
    }
}

impl From<TableMap> for IntegerMap {
    fn from(m: TableMap) -> Self {
        IntegerMap::Table(m)
    }
}
