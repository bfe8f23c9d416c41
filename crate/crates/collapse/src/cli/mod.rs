//! Command-line plumbing: config ingestion, subcommand bodies, and the text
//! formats they emit.
//!
//! Everything here is built for scripted reproduction: the same config
//! document must yield byte-identical trace and report files on one
//! platform. That rules out locale-dependent formatting and hash-ordered
//! iteration, so the emitters below stick to hand-rolled CSV and `key =
//! value` documents with Rust's shortest round-trip float printing.

pub mod commands;
pub mod config;

pub use commands::{cmd_functional, cmd_greens, cmd_predict, cmd_riccati, cmd_simulate};
pub use config::{parse_config, RunConfig};

/// Shortest decimal representation that parses back to the same bits.
///
/// This is Rust's `Display` for `f64` with one adjustment: NaN prints as
/// lowercase `nan` so downstream parsers see the same token `str::parse`
/// accepts.
pub fn fmt_f64(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else {
        format!("{value}")
    }
}

/// Fixed significant-digit formatting for headline numbers.
///
/// Decimal notation scaled to `digits` significant figures; magnitudes
/// outside [1e-4, 1e12) fall back to scientific notation so the digit
/// budget survives.
pub fn fmt_sig(value: f64, digits: usize) -> String {
    if !value.is_finite() {
        return fmt_f64(value);
    }
    let mantissa = digits.saturating_sub(1);
    if value == 0.0 {
        return format!("{value:.mantissa$}");
    }
    let exponent = value.abs().log10().floor() as i32;
    if !(-4..12).contains(&exponent) {
        return format!("{value:.mantissa$e}");
    }
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{value:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_their_text_form() {
        for &v in &[
            0.1,
            -3.0,
            1e-300,
            std::f64::consts::PI,
            f64::MAX,
            5e-324,
            -0.0,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn significant_digit_formatting_keeps_twelve_figures() {
        assert_eq!(fmt_sig(0.4431134627263022, 12), "0.443113462726");
        assert_eq!(fmt_sig(1.0, 12), "1.00000000000");
        assert_eq!(fmt_sig(-2.5, 3), "-2.50");
        assert_eq!(fmt_sig(123456.789, 6), "123457");
        assert_eq!(fmt_sig(0.0, 3), "0.00");
        assert_eq!(fmt_sig(3.0e-7, 3), "3.00e-7");
    }
}
