//! Serde helpers that write `f64` values as JSON numbers with 17 significant
//! digits in scientific notation, so parameter dumps reload bit-identically.

use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serializer};
use serde_json::value::RawValue;

fn raw<E: serde::ser::Error>(x: f64) -> Result<Box<RawValue>, E> {
    if !x.is_finite() {
        return Err(E::custom(format!("cannot serialise non-finite value {x}")));
    }
    RawValue::from_string(format!("{x:.16e}")).map_err(E::custom)
}

pub(crate) mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&raw::<S::Error>(*x)?)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(d)
    }
}

pub(crate) mod nested {
    use super::*;

    struct Row<'a>(&'a [f64]);

    impl serde::Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::vec::serialize(self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for row in v {
            seq.serialize_element(&Row(row))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<Vec<f64>>::deserialize(d)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use serde::{Deserialize, Serialize};

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Probe {
        #[serde(with = "super::vec")]
        b: Vec<f64>,
        #[serde(with = "super::nested")]
        c: Vec<Vec<f64>>,
    }

    #[test]
    fn text_form() {
        let p = Probe {
            b: vec![0.1, -2.0],
            c: vec![vec![], vec![1e-300]],
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"b":[1.0000000000000001e-1,-2.0000000000000000e0],"c":[[],[1.0000000000000000e-300]]}"#
        );
        assert!(serde_json::to_string(&Probe { b: vec![f64::NAN], c: vec![] }).is_err());
    }

    proptest! {
        #[test]
        fn bit_exact_round_trip(a in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
                                b in proptest::collection::vec(proptest::num::f64::NORMAL, 0..8)) {
            let p = Probe { b: vec![a], c: vec![b] };
            let back: Probe = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
            prop_assert_eq!(back.b[0].to_bits(), a.to_bits());
            prop_assert_eq!(back, p);
        }
    }
}
