//! JSON map configurations and JSON renderings of the results.
//!
//! Rationals are written as `"p/q"` strings in lowest terms and reals as
//! numbers rounded to 12 significant digits.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::analysis::{
    ConcavityReport, ConstantsCertificate, GrowthRow, PairCheck, PairWitness, ScalabilityReport,
};
use crate::cone::LatticeVector;
use crate::error::{Error, Result};
use crate::exact::{format_rational, round_sig, Rational, Q};
use crate::finder::{HeuristicRun, HeuristicStop, ResidualReport};
use crate::map::{AffineMap, AffinePiece, ConcaveRealMap, IntegerMap, TableMap, ZigzagMap};
use crate::models::{
    AimdModel, InterferenceConfig, InterferenceModel, RoundingMode, ScalarConcave, SisConfig,
    SisModel,
};
use crate::simplex::SphereSlice;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum KindConfig {
    Affine(AffineConfig),
    Zigzag {
        pieces: Vec<Vec<AffineConfig>>,
    },
    CeilingOfConcave {
        components: Vec<Vec<PieceConfig>>,
    },
    Table {
        d: usize,
        entries: Vec<(Vec<u64>, Vec<u64>)>,
    },
}

#[derive(Debug, Deserialize)]
struct AffineConfig {
    matrix: Vec<Vec<u64>>,
    #[serde(default)]
    offset: Option<Vec<u64>>,
}

#[derive(Debug, Deserialize)]
struct PieceConfig {
    weights: Vec<Q>,
    #[serde(default)]
    constant: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum ModelConfig {
    Sis {
        #[serde(rename = "M")]
        populations: Vec<u64>,
        delta_prime: Vec<Q>,
        #[serde(rename = "B")]
        infection: Vec<Vec<Q>>,
    },
    Aimd {
        capacity: u64,
        #[serde(rename = "A")]
        decrease: Vec<Vec<(Q, Q)>>,
        #[serde(rename = "B")]
        increase: Vec<Vec<(Q, Q)>>,
    },
    Interference {
        h: Vec<Vec<u64>>,
        sigma: Vec<u64>,
        gamma: Vec<u64>,
        assignment: Vec<usize>,
        #[serde(default)]
        mode: RoundingMode,
    },
}

fn affine(cfg: AffineConfig) -> Result<AffineMap> {
    let d = cfg.matrix.len();
    AffineMap::new(cfg.matrix, cfg.offset.unwrap_or_else(|| vec![0; d]))
}

fn rationals(v: Vec<Q>) -> Vec<Rational> {
    v.into_iter().map(|q| q.0).collect()
}

fn scalars(users: Vec<Vec<(Q, Q)>>) -> Result<Vec<ScalarConcave>> {
    users
        .into_iter()
        .map(|pieces| ScalarConcave::new(pieces.into_iter().map(|(s, o)| (s.0, o.0)).collect()))
        .collect()
}

/// Parses a map configuration. Built-in models use a `"model"` key, the
/// generic kinds a `"kind"` key.
pub fn parse_map(text: &str) -> Result<IntegerMap> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
    map_from_value(value)
}

pub fn map_from_value(value: Value) -> Result<IntegerMap> {
    let bad = |e: serde_json::Error| Error::Config(e.to_string());
    if value.get("model").is_some() {
        let cfg: ModelConfig = serde_json::from_value(value).map_err(bad)?;
        return Ok(match cfg {
            ModelConfig::Sis {
                populations,
                delta_prime,
                infection,
            } => IntegerMap::Sis(SisModel::new(SisConfig {
                populations,
                delta_prime: rationals(delta_prime),
                infection: infection.into_iter().map(rationals).collect(),
            })?),
            ModelConfig::Aimd {
                capacity,
                decrease,
                increase,
            } => IntegerMap::Aimd(AimdModel::new(
                capacity,
                scalars(decrease)?,
                scalars(increase)?,
            )?),
            ModelConfig::Interference {
                h,
                sigma,
                gamma,
                assignment,
                mode,
            } => IntegerMap::Interference(InterferenceModel::new(InterferenceConfig {
                gains: h,
                noise: sigma,
                targets: gamma,
                assignment,
                mode,
            })?),
        });
    }
    if value.get("kind").is_none() {
        return Err(Error::Config(
            "map config needs a \"kind\" or a \"model\" key".into(),
        ));
    }
    let cfg: KindConfig = serde_json::from_value(value).map_err(bad)?;
    Ok(match cfg {
        KindConfig::Affine(a) => IntegerMap::Affine(affine(a)?),
        KindConfig::Zigzag { pieces } => IntegerMap::Zigzag(ZigzagMap::new(
            pieces
                .into_iter()
                .map(|row| row.into_iter().map(affine).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
        )?),
        KindConfig::CeilingOfConcave { components } => {
            IntegerMap::CeilingOfConcave(ConcaveRealMap::new(
                components
                    .into_iter()
                    .map(|pieces| {
                        pieces
                            .into_iter()
                            .map(|p| {
                                AffinePiece::new(
                                    rationals(p.weights),
                                    p.constant.map(|q| q.0).unwrap_or_default(),
                                )
                            })
                            .collect()
                    })
                    .collect(),
            )?)
        }
        KindConfig::Table { d, entries } => IntegerMap::Table(TableMap::new(
            d,
            entries
                .into_iter()
                .map(|(x, y)| (LatticeVector::new(x), LatticeVector::new(y))),
        )?),
    })
}

/// A real as a JSON number with 12 significant digits; non-finite values
/// become `null`.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(round_sig(x, 12))
    } else {
        Value::Null
    }
}

pub fn rational(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn opt_rational(r: Option<&Rational>) -> Value {
    r.map_or(Value::Null, rational)
}

fn slice_json(s: &SphereSlice) -> Value {
    json!({ "d": s.d(), "k": s.k(), "c": opt_rational(s.c()) })
}

fn pair_witness(w: &PairWitness) -> Value {
    json!({
        "x": w.x,
        "y": w.y,
        "lambda_product": rational(&w.domain_product),
        "image_lambda_product": rational(&w.image_product),
    })
}

pub fn certificate_json(cert: &ConstantsCertificate) -> Value {
    json!({
        "slice": slice_json(&cert.slice),
        "L": real(cert.lipschitz),
        "L_witness": cert.lipschitz_witness.as_ref().map_or(Value::Null, pair_witness),
        "c": rational(&cert.c),
        "c_witness": { "x": cert.c_witness.0, "index": cert.c_witness.1 },
        "a": rational(&cert.a),
        "a_witness": cert.a_witness,
        "b": rational(&cert.b),
        "b_witness": cert.b_witness,
        "exhaustive": cert.exhaustive,
        "pairs_scanned": cert.pairs_scanned as u64,
    })
}

pub fn report_json(r: &ResidualReport) -> Value {
    let corollary = r.corollary.as_ref().map_or(Value::Null, |c| {
        json!({
            "a": opt_rational(c.a.as_ref()),
            "b": opt_rational(c.b.as_ref()),
            "lower_pass": c.lower_pass,
            "lower_vacuous": c.lower_vacuous,
            "upper_pass": c.upper_pass,
        })
    });
    json!({
        "slice": slice_json(&r.slice),
        "y_k": r.y_k,
        "image": r.image,
        "residual": real(r.residual),
        "residual_squared": rational(&r.residual_squared),
        "L": r.lipschitz.map_or(Value::Null, real),
        "c": opt_rational(r.c.as_ref()),
        "bound": r.bound.map_or(Value::Null, real),
        "theorem_pass": r.theorem_pass,
        "corollary_epsilon": r.epsilon.map_or(Value::Null, real),
        "corollary": corollary,
        "search_mode": r.search_mode.as_str(),
        "points_scanned": r.points_scanned as u64,
    })
}

pub fn heuristic_json(run: &HeuristicRun) -> Value {
    let mut v = report_json(&run.best);
    let stop = match run.stop {
        HeuristicStop::FixedPoint => "fixed_point".to_string(),
        HeuristicStop::Cycle { period } => format!("cycle:{period}"),
        HeuristicStop::MaxSteps => "max_steps".to_string(),
    };
    v["trajectory"] = json!(run.trajectory);
    v["stop"] = json!(stop);
    v["clamped_steps"] = json!(run.clamped_steps);
    v
}

pub fn pair_check_json(check: &PairCheck) -> Value {
    match check {
        PairCheck::Pass { pairs } => json!({ "result": "pass", "pairs": *pairs as u64 }),
        PairCheck::Counterexample(w) => {
            json!({ "result": "counterexample", "witness": pair_witness(w) })
        }
    }
}

pub fn concavity_json(r: &ConcavityReport) -> Value {
    json!({
        "result": if r.passed() { "pass" } else { "counterexample" },
        "checked": r.checked,
        "equalities": r.equalities,
        "counterexample": r.counterexample.as_ref().map_or(Value::Null, |c| json!({
            "m": c.m,
            "weights": c.weights,
            "parts": c.parts,
            "x": c.x,
            "lhs": c.lhs.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "rhs": c.rhs.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })),
    })
}

pub fn scalability_json(r: &ScalabilityReport) -> Value {
    json!({
        "result": if r.passed() { "pass" } else { "counterexample" },
        "checked": r.checked,
        "counterexample": r.counterexample.as_ref().map_or(Value::Null, |c| json!({
            "m": c.m,
            "x": c.x,
            "image_of_scaled": c.image_of_scaled,
            "scaled_image": c.scaled_image.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })),
    })
}

pub fn growth_json(rows: &[GrowthRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| json!({ "k": r.k, "max_ratio": rational(&r.max_ratio), "witness": r.witness }))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_rational, rat};

    #[test]
    fn parses_every_kind() {
        let cases = [
            r#"{"kind":"affine","matrix":[[1,1],[1,1]],"offset":[0,0]}"#,
            r#"{"kind":"affine","matrix":[[1,1],[1,1]]}"#,
            r#"{"kind":"zigzag","pieces":[[{"matrix":[[1,0],[0,1]],"offset":[1,1]}]]}"#,
            r#"{"kind":"ceiling_of_concave","components":[[{"weights":["1/2","1/3"]}],[{"weights":[1,0],"constant":"0"}]]}"#,
            r#"{"kind":"table","d":1,"entries":[[[0],[0]],[[1],[1]]]}"#,
            r#"{"model":"sis","M":[10,10],"delta_prime":["1/2","1/2"],"B":[["1/2","1/2"],["1/2","1/2"]]}"#,
            r#"{"model":"aimd","capacity":10,"A":[[["1/2",0]],[["1/2",0]]],"B":[[[1,0]],[[1,0]]]}"#,
            r#"{"model":"interference","h":[[2,1]],"sigma":[2],"gamma":[2,2],"assignment":[0,0],"mode":"integral"}"#,
        ];
        let kinds = [
            "affine", "affine", "zigzag", "ceiling_of_concave", "table", "sis", "aimd", "interference",
        ];
        for (text, kind) in cases.iter().zip(kinds) {
            let map = parse_map(text).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert_eq!(map.kind(), kind);
        }
        let concave = parse_map(cases[3]).unwrap();
        assert_eq!(
            concave.evaluate(&LatticeVector::from([3, 4])).unwrap(),
            LatticeVector::from([3, 3])
        );
        let aimd = parse_map(cases[6]).unwrap();
        assert_eq!(
            aimd.evaluate(&LatticeVector::from([4, 6])).unwrap(),
            LatticeVector::from([4, 5])
        );
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "not json",
            r#"{"matrix":[[1]]}"#,
            r#"{"kind":"affine","matrix":[[1,1]]}"#,
            r#"{"kind":"spline"}"#,
            r#"{"model":"sis","M":[10],"delta_prime":["3/2"],"B":[["1/2"]]}"#,
            r#"{"model":"interference","h":[[3,1]],"sigma":[1],"gamma":[2,1],"assignment":[0,0]}"#,
        ] {
            assert!(matches!(parse_map(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn rationals_round_trip() {
        for r in [rat(3, 4), rat(30, 4), rat(290, 1), rat(0, 1), rat(-7, 3)] {
            let v = rational(&r);
            assert_eq!(parse_rational(v.as_str().unwrap()).unwrap(), r);
        }
        assert_eq!(real(3_132_003.464_101_615), json!(3_132_003.464_10));
        assert_eq!(real(f64::INFINITY), Value::Null);
    }
}
