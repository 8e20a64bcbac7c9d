//! JSON numbers with a fixed count of decimals.
//!
//! `serde_json` prints floats in shortest round-trip form; the wire format
//! wants `0.800000` rather than `0.8`, so values go out as raw JSON text.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

/// Renders `value` with `decimals` digits after the point. Negative zero is
/// printed as zero so equal positions always serialize identically.
pub fn format_fixed(value: f64, decimals: usize) -> String {
    let text = format!("{value:.decimals$}");
    match text.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => text,
    }
}

pub(crate) fn fixed_number(value: f64, decimals: usize) -> Box<RawValue> {
    assert!(value.is_finite(), "non-finite value {value} cannot be serialized");
    RawValue::from_string(format_fixed(value, decimals)).expect("formatted float is valid JSON")
}

/// Rounds to the nearest multiple of `10^-decimals`, the value a reader
/// gets back after parsing the fixed-decimal text.
pub fn quantize(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let q = (value * scale).round() / scale;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

/// A 2-D point serialized as `[x, y]` with three decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
}

impl Point3 {
    pub fn quantized(x: f64, y: f64) -> Self {
        Self {
            x: quantize(x, 3),
            y: quantize(y, 3),
        }
    }
}

impl Serialize for Point3 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (fixed_number(self.x, 3), fixed_number(self.y, 3)).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point3 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (x, y) = <(f64, f64)>::deserialize(deserializer)?;
        Ok(Self { x, y })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(format_fixed(0.8, 6), "0.800000");
        assert_eq!(format_fixed(-0.0, 3), "0.000");
        assert_eq!(format_fixed(-0.0001, 3), "0.000");
        assert_eq!(format_fixed(-1.25, 3), "-1.250");
    }

    #[test]
    fn quantized_values_survive_text_round_trip() {
        for raw in [0.0, 1.0005, 123.4567, -98.7654, 999.9995, 1e-4, 707.10678118] {
            let q = Point3::quantized(raw, -raw);
            let text = serde_json::to_string(&q).unwrap();
            let back: Point3 = serde_json::from_str(&text).unwrap();
            assert_eq!(back, q, "{text}");
            assert_eq!(serde_json::to_string(&back).unwrap(), text);
        }
    }
}
