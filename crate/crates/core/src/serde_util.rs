//! Serialization helpers for exact rationals.

use num_rational::BigRational;
use serde::ser::SerializeSeq;
use serde::Serializer;

use crate::scalar::format_fraction;

pub fn rational<S: Serializer>(value: &BigRational, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&format_fraction(value))
}

pub fn rationals<S: Serializer>(values: &[BigRational], serializer: S) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(values.len()))?;
    for v in values {
        seq.serialize_element(&format_fraction(v))?;
    }
    seq.end()
}
