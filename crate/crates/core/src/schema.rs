//! JSON body descriptions. The schema lives in `schema/body.schema.json`.

use serde::{Deserialize, Serialize};

use crate::body::{affine_image, polar, AffineMap, ConvexBody, Ellipsoid};
use crate::error::{GeomError, Result};
use crate::linalg::{Matrix, Vector};

/// The body JSON schema.
pub const BODY_SCHEMA: &str = include_str!("../schema/body.schema.json");

/// `p` as a number or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(String),
}

impl Exponent {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Exponent::Finite(p) => Ok(*p),
            Exponent::Named(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
            Exponent::Named(s) => Err(format!("unknown exponent {s:?}")),
        }
    }

    fn from_value(p: f64) -> Self {
        if p.is_infinite() {
            Exponent::Named("inf".into())
        } else {
            Exponent::Finite(p)
        }
    }
}

fn default_p() -> Exponent {
    Exponent::Finite(2.0)
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub offset: f64,
    pub body: BodySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Vpolytope {
        vertices: Vec<Vec<f64>>,
    },
    Ball {
        #[serde(default = "default_p")]
        p: Exponent,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Ellipsoid {
        center: Vec<f64>,
        shape: Vec<Vec<f64>>,
    },
    Hull {
        sections: Vec<SectionSpec>,
    },
    Affine {
        linear: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        translation: Option<Vec<f64>>,
        body: Box<BodySpec>,
    },
    Polar {
        body: Box<BodySpec>,
    },
    Conv {
        bodies: Vec<BodySpec>,
    },
}

/// Parse and validate a JSON body description. Errors carry a JSON path.
pub fn parse_body(json: &str) -> Result<ConvexBody> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let spec: BodySpec = serde_path_to_error::deserialize(de)
        .map_err(|e| GeomError::InvalidBody(format!("schema violation at {}: {}", e.path(), e.inner())))?;
    spec.build()
}

fn matrix(rows: &[Vec<f64>], path: &str) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(path, "matrix must be square and non-empty"));
    }
    finite(rows.iter().flatten().copied(), path)?;
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn vector(v: &[f64], path: &str) -> Result<Vector> {
    finite(v.iter().copied(), path)?;
    Ok(Vector::from_column_slice(v))
}

fn finite(mut it: impl Iterator<Item = f64>, path: &str) -> Result<()> {
    if it.all(f64::is_finite) {
        Ok(())
    } else {
        Err(invalid(path, "non-finite coordinate"))
    }
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> GeomError {
    GeomError::InvalidBody(format!("{path}: {msg}"))
}

fn at(path: &str, e: GeomError) -> GeomError {
    match e {
        GeomError::InvalidBody(m) if m.starts_with('$') => GeomError::InvalidBody(m),
        other => invalid(path, other),
    }
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        self.build_at("$", false)
    }

    fn build_at(&self, path: &str, section: bool) -> Result<ConvexBody> {
        match self {
            BodySpec::Vpolytope { vertices } => {
                let pts = vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| vector(v, &format!("{path}.vertices[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ConvexBody::Polytope(crate::body::Polytope::hull_of(pts).map_err(|e| at(path, e))?))
            }
            BodySpec::Ball { p, radius, center, dim } => {
                let p = p.value().map_err(|m| invalid(&format!("{path}.p"), m))?;
                let c = match (center, dim) {
                    (Some(c), Some(d)) if c.len() != *d => {
                        return Err(invalid(path, format!("center has {} coordinates but dim is {d}", c.len())))
                    }
                    (Some(c), _) => vector(c, &format!("{path}.center"))?,
                    (None, Some(d)) => Vector::zeros(*d),
                    (None, None) => Vector::zeros(2),
                };
                if *radius == 0.0 && section {
                    return ConvexBody::point_section(p, c).map_err(|e| at(path, e));
                }
                ConvexBody::ball(p, *radius, c).map_err(|e| at(path, e))
            }
            BodySpec::Ellipsoid { center, shape } => {
                let c = vector(center, &format!("{path}.center"))?;
                let a = matrix(shape, &format!("{path}.shape"))?;
                Ok(ConvexBody::Ellipsoid(Ellipsoid::new(c, a).map_err(|e| at(path, e))?))
            }
            BodySpec::Hull { sections } => {
                let parts = sections
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let p = format!("{path}.sections[{i}]");
                        Ok((s.offset, s.body.build_at(&format!("{p}.body"), true)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ConvexBody::hull(parts).map_err(|e| at(path, e))
            }
            BodySpec::Affine { linear, translation, body } => {
                let inner = body.build_at(&format!("{path}.body"), false)?;
                let l = matrix(linear, &format!("{path}.linear"))?;
                let b = match translation {
                    Some(t) => vector(t, &format!("{path}.translation"))?,
                    None => Vector::zeros(l.nrows()),
                };
                let t = AffineMap::new(l, b).map_err(|e| at(path, e))?;
                affine_image(&t, &inner).map_err(|e| at(path, e))
            }
            BodySpec::Polar { body } => {
                let inner = body.build_at(&format!("{path}.body"), false)?;
                polar(&inner).map_err(|e| at(path, e))
            }
            BodySpec::Conv { bodies } => {
                let parts = bodies
                    .iter()
                    .enumerate()
                    .map(|(i, b)| b.build_at(&format!("{path}.bodies[{i}]"), false))
                    .collect::<Result<Vec<_>>>()?;
                ConvexBody::conv(parts).map_err(|e| at(path, e))
            }
        }
    }

    /// Description of an existing body.
    pub fn of(body: &ConvexBody) -> BodySpec {
        let v = |x: &Vector| x.iter().copied().collect::<Vec<f64>>();
        let m = |a: &Matrix| (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
        match body {
            ConvexBody::Polytope(p) => BodySpec::Vpolytope { vertices: p.vertices().iter().map(v).collect() },
            ConvexBody::Ball(b) => BodySpec::Ball {
                p: Exponent::from_value(b.p()),
                radius: b.radius(),
                center: Some(v(b.center())),
                dim: None,
            },
            ConvexBody::Ellipsoid(e) => BodySpec::Ellipsoid { center: v(e.center()), shape: m(e.shape()) },
            ConvexBody::Hull(h) => BodySpec::Hull {
                sections: h
                    .sections()
                    .iter()
                    .map(|s| SectionSpec { offset: s.offset, body: BodySpec::of(&s.body) })
                    .collect(),
            },
            ConvexBody::Affine(a) => BodySpec::Affine {
                linear: m(a.map().linear_part()),
                translation: Some(v(a.map().translation_part())),
                body: Box::new(BodySpec::of(a.body())),
            },
            ConvexBody::Polar(p) => BodySpec::Polar { body: Box::new(BodySpec::of(p.inner())) },
            ConvexBody::Conv(parts) => BodySpec::Conv { bodies: parts.iter().map(|b| BodySpec::of(b)).collect() },
        }
    }
}

/// JSON text for a body.
pub fn body_to_json(body: &ConvexBody) -> String {
    serde_json::to_string_pretty(&BodySpec::of(body)).expect("body specs serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector as v;

    #[test]
    fn parses_examples() {
        let b = parse_body(r#"{"type":"ball","p":2,"radius":1}"#).unwrap();
        assert_eq!(b.dim(), 2);
        assert!((b.support(&v(&[0.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
        let t = parse_body(r#"{"type":"vpolytope","vertices":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!((t.support(&v(&[1.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
        let inf = parse_body(r#"{"type":"ball","p":"inf","dim":3}"#).unwrap();
        assert!((inf.support(&v(&[1.0, 1.0, 1.0])).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_paths() {
        let e = parse_body(r#"{"type":"hull","sections":[{"offset":0,"body":{"type":"ball","p":"x"}}]}"#)
            .unwrap_err()
            .to_string();
        assert!(e.contains("$.sections[0].body.p"), "{e}");
        let e = parse_body(r#"{"type":"vpolytope","vertex":[[0,0]]}"#).unwrap_err().to_string();
        assert!(e.contains("schema violation"), "{e}");
        let e = parse_body(r#"{"type":"ellipsoid","center":[0,0],"shape":[[1,0],[0,-1]]}"#)
            .unwrap_err()
            .to_string();
        assert!(e.contains("positive definite"), "{e}");
    }

    #[test]
    fn point_sections_only_inside_hulls() {
        assert!(parse_body(r#"{"type":"ball","radius":0}"#).is_err());
        let cone = r#"{"type":"hull","sections":[
            {"offset":0,"body":{"type":"ball","radius":0,"dim":2}},
            {"offset":1,"body":{"type":"ball","p":2,"radius":1,"dim":2}}]}"#;
        assert_eq!(parse_body(cone).unwrap().dim(), 3);
    }

    #[test]
    fn schema_is_json() {
        let s: serde_json::Value = serde_json::from_str(BODY_SCHEMA).unwrap();
        assert!(s.get("$defs").is_some());
    }
}
