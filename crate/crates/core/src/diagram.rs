//! Persistence diagrams shared by the Rips and graph pipelines.
//!
//! JSON layout: `{"dimension": k, "pairs": [[b, d], ...]}` where an infinite
//! death is written as the string `"inf"`.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One (birth, death) pair. `death` may be `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn essential(birth: f64) -> Self {
        Self {
            birth,
            death: f64::INFINITY,
        }
    }

    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// Total order: birth, then death (infinite last).
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.birth
            .total_cmp(&other.birth)
            .then(self.death.total_cmp(&other.death))
    }
}

impl Serialize for PersistencePair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&self.birth)?;
        if self.death == f64::INFINITY {
            tup.serialize_element("inf")?;
        } else {
            tup.serialize_element(&self.death)?;
        }
        tup.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Number(f64),
    Text(String),
}

impl Endpoint {
    fn value<E: de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            Endpoint::Number(v) => Ok(v),
            Endpoint::Text(s) if s == "inf" => Ok(f64::INFINITY),
            Endpoint::Text(s) => Err(E::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

impl<'de> Deserialize<'de> for PersistencePair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PairVisitor;

        impl<'de> Visitor<'de> for PairVisitor {
            type Value = PersistencePair;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a [birth, death] array")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
                let birth: Endpoint = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let death: Endpoint = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(PersistencePair::new(birth.value()?, death.value()?))
            }
        }

        deserializer.deserialize_seq(PairVisitor)
    }
}

/// Multiset of persistence pairs in one homology dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub dimension: usize,
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(dimension: usize, pairs: Vec<PersistencePair>) -> Self {
        Self { dimension, pairs }
    }

    pub fn empty(dimension: usize) -> Self {
        Self::new(dimension, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn essential_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.is_essential()).count()
    }

    pub fn finite_pairs(&self) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(|p| !p.is_essential())
    }

    /// Largest finite coordinate, or 0 for diagrams without finite values.
    pub fn max_finite_value(&self) -> f64 {
        self.pairs
            .iter()
            .flat_map(|p| [p.birth, p.death])
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }

    /// Copy without pairs whose birth equals death.
    pub fn without_zero_persistence(&self) -> Self {
        Self::new(
            self.dimension,
            self.pairs.iter().copied().filter(|p| p.birth != p.death).collect(),
        )
    }

    /// Copy with pairs in canonical (birth, death) order.
    pub fn sorted(&self) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.sort_by(PersistencePair::total_cmp);
        Self::new(self.dimension, pairs)
    }

    /// Check `birth <= death` and that no coordinate is NaN.
    pub fn validate(&self) -> Result<()> {
        for p in &self.pairs {
            if p.birth.is_nan() || p.death.is_nan() || p.birth.is_infinite() || p.birth > p.death {
                return Err(Error::InvalidArgument(format!(
                    "invalid persistence pair ({}, {}) in H{}",
                    p.birth, p.death, self.dimension
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagram serialization cannot fail")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dgm = Self::from_json(&text).map_err(|e| Error::format(path, e))?;
        dgm.validate()?;
        Ok(dgm)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_death_serializes_as_inf_string() {
        let d = PersistenceDiagram::new(
            0,
            vec![PersistencePair::new(0.0, 1.5), PersistencePair::essential(0.0)],
        );
        assert_eq!(d.to_json(), r#"{"dimension":0,"pairs":[[0.0,1.5],[0.0,"inf"]]}"#);
        assert_eq!(PersistenceDiagram::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn rejects_unknown_text_endpoint() {
        assert!(PersistenceDiagram::from_json(r#"{"dimension":1,"pairs":[[0.0,"nan"]]}"#).is_err());
        assert!(PersistenceDiagram::from_json(r#"{"dimension":1,"pairs":[[0.0,1.0,2.0]]}"#).is_err());
    }

    #[test]
    fn validate_catches_inverted_pair() {
        let d = PersistenceDiagram::new(1, vec![PersistencePair::new(2.0, 1.0)]);
        assert!(d.validate().is_err());
    }

    #[test]
    fn zero_persistence_filter() {
        let d = PersistenceDiagram::new(
            0,
            vec![PersistencePair::new(0.1, 0.1), PersistencePair::new(0.1, 0.3)],
        );
        assert_eq!(d.without_zero_persistence().len(), 1);
    }
}
