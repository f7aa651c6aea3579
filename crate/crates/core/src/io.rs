//! JSON forms of curves and results.
//!
//! A curve is `{"space": …, "closed": bool, "vertices": [[x, y], …]}`; edges
//! are rebuilt canonically on load, so saving and reloading is bit-exact.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::decompose::{AtomicDecomposition, EdgeFlow};
use crate::error::{Error, Result};
use crate::space::{Point, Space};
use crate::surgery::{SurgeryCertificate, SurgeryResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveJson {
    pub space: Space,
    pub closed: bool,
    pub vertices: Vec<Point>,
}

impl From<Curve> for CurveJson {
    fn from(c: Curve) -> Self {
        CurveJson::from(&c)
    }
}

impl From<&Curve> for CurveJson {
    fn from(c: &Curve) -> Self {
        CurveJson {
            space: c.space().clone(),
            closed: c.is_closed(),
            vertices: c.vertices(),
        }
    }
}

impl TryFrom<CurveJson> for Curve {
    type Error = Error;

    fn try_from(j: CurveJson) -> Result<Curve> {
        if j.vertices.len() == 1 {
            return Curve::point(j.space, j.vertices[0].clone(), j.closed);
        }
        Curve::from_vertices(j.space, &j.vertices, j.closed)
    }
}

impl Serialize for Curve {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CurveJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Curve {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Curve, D::Error> {
        let j = CurveJson::deserialize(d)?;
        Curve::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Serialized surgery output: pieces in vertex form plus the certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurgeryJson {
    pub input: Curve,
    pub pieces: Vec<Curve>,
    pub certificate: SurgeryCertificate,
}

impl SurgeryJson {
    pub fn new(input: &Curve, res: &SurgeryResult) -> Self {
        SurgeryJson {
            input: input.clone(),
            pieces: res.pieces.clone(),
            certificate: res.certificate.clone(),
        }
    }
}

/// Serialized decomposition together with the flow it decomposes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomsJson {
    pub input: EdgeFlow,
    #[serde(flatten)]
    pub decomposition: AtomicDecomposition,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("malformed JSON: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_round_trip() {
        let c = crate::fixtures::random_walk(&Space::taxicab(), 40, 0.3, 7);
        let text = to_json(&c).unwrap();
        let back: Curve = from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn schema_shape() {
        let c = crate::fixtures::unit_square();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["space"]["type"], "euclidean");
        assert_eq!(v["closed"], true);
        assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
    }
}
