/// A CSV field, double-quoted when it contains a separator or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // "NaN", "inf", "-inf" all parse back through `str::parse::<f64>`
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::{csv_field, fmt17};
    use proptest::prelude::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("relu"), "relu");
        assert_eq!(csv_field("selu:lambda=1,alpha=2"), "\"selu:lambda=1,alpha=2\"");
        assert_eq!(csv_field("a\"b"), "\"a\"\"b\"");
    }

    #[test]
    fn known_values() {
        assert_eq!(fmt17(0.15625), "1.5625000000000000e-1");
        assert_eq!(fmt17(0.00140625), "1.4062499999999999e-3");
        assert_eq!(fmt17(-8.0), "-8.0000000000000000e0");
        assert_eq!(fmt17(f64::NAN), "NaN");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::ANY) {
            let back: f64 = fmt17(x).parse().unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), x.to_bits());
            }
        }
    }
}
