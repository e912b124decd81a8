//! Small parsers and formatters shared by the subcommands.

/// Parses a byte count with an optional decimal suffix: `K` = 1e3, `M` = 1e6,
/// `G` = 1e9, `T` = 1e12, optionally followed by `B`. Fractions are allowed
/// when the result is a whole number of bytes.
pub fn parse_bytes(text: &str) -> Result<u64, String> {
    let s = text.trim();
    let upper = s.to_ascii_uppercase();
    let body = upper.strip_suffix('B').unwrap_or(&upper);
    let (number, scale) = match body.chars().last() {
        Some('K') => (&body[..body.len() - 1], 1e3),
        Some('M') => (&body[..body.len() - 1], 1e6),
        Some('G') => (&body[..body.len() - 1], 1e9),
        Some('T') => (&body[..body.len() - 1], 1e12),
        _ => (body, 1.0),
    };
    let bad = || format!("invalid byte count {text:?} (examples: 1500, 500K, 500M, 1.5G)");
    if scale == 1.0 {
        return number.trim().parse::<u64>().map_err(|_| bad());
    }
    let value: f64 = number.trim().parse().map_err(|_| bad())?;
    let bytes = value * scale;
    if !(bytes.is_finite() && bytes >= 0.0 && bytes.fract() == 0.0 && bytes < 1.8e19) {
        return Err(bad());
    }
    Ok(bytes as u64)
}

/// Civil date from days since 1970-01-01 (proleptic Gregorian).
fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let year = yoe + era * 400 + i64::from(month <= 2);
    (year, month, day)
}

/// `YYYYMMDDTHHMMSS` for a Unix timestamp in seconds.
pub fn format_timestamp(unix_s: u64) -> String {
    let days = (unix_s / 86_400) as i64;
    let rem = unix_s % 86_400;
    let (y, m, d) = civil_from_days(days);
    format!("{y:04}{m:02}{d:02}T{:02}{:02}{:02}", rem / 3600, rem % 3600 / 60, rem % 60)
}

/// Start of the synthetic capture schedule: 2024-01-01 00:00:00 UTC.
pub const SCHEDULE_START_UNIX: u64 = 1_704_067_200;

/// Flow `index` of a protocol starts in its own 5-minute slot; the four
/// protocols are staggered within the slot. Keeps file names stable and
/// unique without reading the clock.
pub fn flow_timestamp(protocol_index: usize, index: u64) -> String {
    format_timestamp(SCHEDULE_START_UNIX + index * 300 + protocol_index as u64 * 75)
}
