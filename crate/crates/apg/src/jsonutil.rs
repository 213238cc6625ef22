//! Helpers for emitting exact integers as JSON numbers.
//!
//! `serde_json` is compiled with `arbitrary_precision`, so a `Number` can hold
//! any integer literal. Everything funnels through [`json_int`] to keep the
//! encoding uniform (plain JSON numbers, never strings).

use num_bigint::BigInt;
use serde_json::{Number, Value};

/// Encode a `BigInt` as a JSON number, exactly.
pub fn json_int(x: &BigInt) -> Value {
    let n: Number = x.to_string().parse().expect("integer literal is a valid JSON number");
    Value::Number(n)
}

/// Encode a slice of `BigInt` as a JSON array of numbers.
pub fn json_int_array(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(json_int).collect())
}

/// Decode a JSON value produced by [`json_int`] back into a `BigInt`.
pub fn parse_json_int(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.to_string().parse().ok(),
        _ => None,
    }
}
