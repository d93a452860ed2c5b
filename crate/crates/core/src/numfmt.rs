//! Fixed 17-significant-digit formatting for reals in JSON and CSV output.
//!
//! Seventeen significant digits is enough to round-trip any `f64` exactly.

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0.0000000000000000e0"
        return "0.0000000000000000e0".to_string();
    }
    format!("{:.16e}", x)
}

fn raw(text: String) -> Result<Box<RawValue>, serde_json::Error> {
    RawValue::from_string(text)
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return Err(S::Error::custom(format!("non-finite real {x}")));
    }
    raw(fmt17(*x)).map_err(S::Error::custom)?.serialize(s)
}

pub fn ser_f64_array<S: Serializer>(v: &[f64; 3], s: S) -> Result<S::Ok, S::Error> {
    let text = format!("[{},{},{}]", fmt17(v[0]), fmt17(v[1]), fmt17(v[2]));
    raw(text).map_err(S::Error::custom)?.serialize(s)
}
