//! `<value>;<timestamp>` payload codec.

use super::TelemetryError;

/// Fractional digits rendered for both payload fields.
pub const PAYLOAD_DECIMALS: usize = 6;

/// Renders `<value>;<timestamp>` with six fractional digits on each field.
///
/// Inputs are assumed valid (see [`check_payload`]); non-finite values would
/// render as `NaN`/`inf`, which the decoder rejects.
pub fn encode_payload(value: f64, timestamp: f64) -> String {
    format!("{value:.6};{timestamp:.6}")
}

pub fn check_payload(value: f64, timestamp: f64) -> Result<(), TelemetryError> {
    if !value.is_finite() {
        return Err(TelemetryError::MalformedPayload(format!("non-finite value {value}")));
    }
    if !timestamp.is_finite() || timestamp <= 0.0 {
        return Err(TelemetryError::MalformedPayload(format!("invalid timestamp {timestamp}")));
    }
    Ok(())
}

fn parse_field(s: &str, field: &str, payload: &str) -> Result<f64, TelemetryError> {
    // f64::from_str accepts "inf", "NaN" and friends; only plain decimals are wire-legal.
    let plain = !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    if !plain {
        return Err(TelemetryError::MalformedPayload(format!(
            "{payload:?}: {field} field is not a decimal number"
        )));
    }
    s.parse::<f64>().map_err(|_| {
        TelemetryError::MalformedPayload(format!("{payload:?}: {field} field is not a decimal number"))
    })
}

/// Parses `<value>;<timestamp>`, returning `(value, timestamp)`.
pub fn decode_payload(s: &str) -> Result<(f64, f64), TelemetryError> {
    let mut fields = s.split(';');
    let (Some(v), Some(t), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(TelemetryError::MalformedPayload(format!(
            "{s:?}: expected exactly one ';' separator"
        )));
    };
    let value = parse_field(v, "value", s)?;
    let timestamp = parse_field(t, "timestamp", s)?;
    check_payload(value, timestamp)?;
    Ok((value, timestamp))
}

/// Rounds to the payload's rendered precision; values that survive a wire round-trip unchanged.
pub fn quantize(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_six_decimals() {
        assert_eq!(encode_payload(3075.0, 1650000000.5), "3075.000000;1650000000.500000");
    }

    #[test]
    fn decodes_short_forms() {
        assert_eq!(decode_payload("1206;1650000000.0").unwrap(), (1206.0, 1650000000.0));
        assert_eq!(decode_payload("-1.5;2").unwrap(), (-1.5, 2.0));
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            "abc;1", "1", "1;2;3", ";1", "1;", "NaN;1", "1;inf", "1;-5", "1;0", " 1;2", "1;2 ", "1,0;2",
            "infinity;1", "1e400;1",
        ] {
            assert!(
                matches!(decode_payload(s), Err(TelemetryError::MalformedPayload(_))),
                "accepted {s:?}"
            );
        }
    }

    #[test]
    fn quantized_values_roundtrip_exactly() {
        let t = quantize(1_650_000_123.000_001_3);
        let v = quantize(3075.123_456_7);
        assert_eq!(decode_payload(&encode_payload(v, t)).unwrap(), (v, t));
    }
}
