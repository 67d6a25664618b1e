//! SPICE-style numbers with engineering suffixes.

/// Parses `1k`, `2.5meg`, `10pF`, `1e-4` and friends.
///
/// Recognized scale suffixes (case-insensitive): `f p n u m k meg g t`.
/// Alphabetic characters after the suffix are unit decoration and ignored,
/// as SPICE does (`10pF`, `1kohm`).
pub fn parse_value(text: &str) -> Option<f64> {
    let (mantissa, rest) = split_number(text)?;
    let value: f64 = mantissa.parse().ok()?;
    let lower = rest.to_ascii_lowercase();
    let (scale, tail) = if let Some(tail) = lower.strip_prefix("meg") {
        (1e6, tail)
    } else {
        let mut chars = lower.chars();
        let scale = match chars.next() {
            Some('f') => 1e-15,
            Some('p') => 1e-12,
            Some('n') => 1e-9,
            Some('u') => 1e-6,
            Some('m') => 1e-3,
            Some('k') => 1e3,
            Some('g') => 1e9,
            Some('t') => 1e12,
            _ => 1.0,
        };
        if scale == 1.0 {
            (1.0, lower.as_str())
        } else {
            (scale, chars.as_str())
        }
    };
    if !tail.chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    let scaled = value * scale;
    scaled.is_finite().then_some(scaled)
}

/// Splits the leading decimal literal off `text`.
fn split_number(text: &str) -> Option<(&str, &str)> {
    let bytes = text.as_bytes();
    let mut i = 0;
    if matches!(bytes.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let digits_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut ndigits = i - digits_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        ndigits += i - frac_start;
    }
    if ndigits == 0 {
        return None;
    }
    if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
        let mut j = i + 1;
        if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            i = j;
        }
    }
    Some((&text[..i], &text[i..]))
}

/// Formats a value so that [`parse_value`] recovers it exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        let cases = [
            ("1k", 1e3),
            ("1K", 1e3),
            ("2.5meg", 2.5e6),
            ("2.5MEG", 2.5e6),
            ("10p", 10e-12),
            ("10pF", 10e-12),
            ("3n", 3e-9),
            ("4u", 4e-6),
            ("5m", 5e-3),
            ("6g", 6e9),
            ("7f", 7e-15),
            ("1e-4", 1e-4),
            ("-1.5E+3", -1500.0),
            (".5", 0.5),
            ("5.", 5.0),
            ("1kohm", 1e3),
            ("0", 0.0),
        ];
        for (text, want) in cases {
            let got = parse_value(text).unwrap_or_else(|| panic!("{text}"));
            assert!((got - want).abs() <= 1e-15 * want.abs(), "{text}: {got} vs {want}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for text in ["", "k", "abc", "1k5", "--1", "1e", ".", "1.2.3", "nan", "inf"] {
            if text == "1e" {
                // `1e` reads as 1 with a trailing unit letter, like SPICE.
                assert_eq!(parse_value(text), Some(1.0));
                continue;
            }
            assert_eq!(parse_value(text), None, "{text}");
        }
        assert_eq!(parse_value("1e400"), None);
    }

    #[test]
    fn format_round_trips() {
        for v in [1e-12, 0.1 + 0.2, 1.43e-8, -3.0, 0.0172, 123456.789] {
            assert_eq!(parse_value(&format_value(v)), Some(v));
        }
    }
}
