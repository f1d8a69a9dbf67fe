//! Exact hexadecimal text form for `f64`, in the style of C's `%a`.

/// Formats a finite float as `[-]0x1.<hex>p<exp>` (or `0x0.<hex>p-1022` for
/// subnormals). Trailing zero digits of the fraction are dropped.
pub fn format_hex(x: f64) -> String {
    assert!(x.is_finite(), "cannot hex-format {x}");
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 {
        (0, -1022)
    } else {
        (1, exp_bits - 1023)
    };
    let digits = format!("{frac:013x}");
    let digits = digits.trim_end_matches('0');
    let exp_sign = if exp >= 0 { "+" } else { "" };
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp_sign}{exp}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp_sign}{exp}")
    }
}

/// Parses the output of [`format_hex`]. Returns `None` for anything else.
pub fn parse_hex(s: &str) -> Option<f64> {
    let s = s.trim();
    let (negative, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let rest = rest
        .strip_prefix("0x")
        .or_else(|| rest.strip_prefix("0X"))?;
    let (mantissa, exp) = rest.split_once(['p', 'P'])?;
    let exp: i64 = exp.parse().ok()?;
    let (lead, digits) = match mantissa.split_once('.') {
        Some((l, d)) => (l, d),
        None => (mantissa, ""),
    };
    if digits.len() > 13 || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let frac = if digits.is_empty() {
        0
    } else {
        u64::from_str_radix(digits, 16).ok()? << (4 * (13 - digits.len()))
    };
    let magnitude_bits = match lead {
        "1" => {
            let biased = exp + 1023;
            if !(1..=2046).contains(&biased) {
                return None;
            }
            ((biased as u64) << 52) | frac
        }
        "0" if frac == 0 => 0,
        "0" if exp == -1022 => frac,
        _ => return None,
    };
    let bits = magnitude_bits | if negative { 1u64 << 63 } else { 0 };
    Some(f64::from_bits(bits))
}
