//! Human-unit parsing and formatting at the I/O boundary.
//!
//! Everything internal runs on base units: bytes, bytes/second, seconds.
//! Strings such as "10 Gbps", "32MB", or "40 ms" are converted exactly once,
//! on the way in, and formatters are verified to round-trip.

use crate::error::{Error, Result};

const BYTE_UNITS: &[(&str, f64)] = &[
    ("TiB", 1024.0 * 1024.0 * 1024.0 * 1024.0),
    ("GiB", 1024.0 * 1024.0 * 1024.0),
    ("MiB", 1024.0 * 1024.0),
    ("KiB", 1024.0),
    ("TB", 1e12),
    ("GB", 1e9),
    ("MB", 1e6),
    ("kB", 1e3),
    ("KB", 1e3),
    ("B", 1.0),
];

// Rates accept bit units (divided by 8) and byte units with a "/s" suffix.
const BIT_RATE_UNITS: &[(&str, f64)] = &[
    ("Tbps", 1e12 / 8.0),
    ("Gbps", 1e9 / 8.0),
    ("Mbps", 1e6 / 8.0),
    ("Kbps", 1e3 / 8.0),
    ("kbps", 1e3 / 8.0),
    ("bps", 1.0 / 8.0),
];

const DURATION_UNITS: &[(&str, f64)] = &[
    ("us", 1e-6),
    ("ms", 1e-3),
    ("min", 60.0),
    ("h", 3600.0),
    ("s", 1.0),
];

fn split_number_unit(input: &str) -> Option<(f64, &str)> {
    let s = input.trim();
    let split = s.find(|c: char| c.is_ascii_alphabetic())?;
    let (num, unit) = s.split_at(split);
    let value: f64 = num.trim().parse().ok()?;
    Some((value, unit.trim()))
}

/// Parse a size string like "32MB", "62.5 MB", or "750000000" (plain bytes).
pub fn parse_bytes(input: &str) -> Result<u64> {
    let err = || Error::UnitParse {
        input: input.to_string(),
        expected: "size (e.g. 32MB, 1.5GiB, 4096B)",
    };
    if let Ok(plain) = input.trim().parse::<u64>() {
        return Ok(plain);
    }
    let (value, unit) = split_number_unit(input).ok_or_else(err)?;
    let mult = BYTE_UNITS
        .iter()
        .find(|(name, _)| *name == unit)
        .map(|(_, m)| *m)
        .ok_or_else(err)?;
    let bytes = value * mult;
    if !(bytes >= 0.0 && bytes.is_finite()) {
        return Err(err());
    }
    Ok(bytes.round() as u64)
}

/// Parse a rate string like "10Gbps", "800 MB/s", or "1.25e9" (bytes/second).
pub fn parse_rate(input: &str) -> Result<f64> {
    let err = || Error::UnitParse {
        input: input.to_string(),
        expected: "rate (e.g. 10Gbps, 800MB/s)",
    };
    if let Ok(plain) = input.trim().parse::<f64>() {
        if plain.is_finite() && plain >= 0.0 {
            return Ok(plain);
        }
    }
    let s = input.trim();
    if let Some(byte_part) = s.strip_suffix("/s") {
        return Ok(parse_bytes(byte_part)? as f64);
    }
    let (value, unit) = split_number_unit(s).ok_or_else(err)?;
    let mult = BIT_RATE_UNITS
        .iter()
        .find(|(name, _)| *name == unit)
        .map(|(_, m)| *m)
        .ok_or_else(err)?;
    let rate = value * mult;
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(err());
    }
    Ok(rate)
}

/// Parse a duration string like "40ms", "5 s", or "0.2" (seconds).
pub fn parse_duration(input: &str) -> Result<f64> {
    let err = || Error::UnitParse {
        input: input.to_string(),
        expected: "duration (e.g. 40ms, 5s)",
    };
    if let Ok(plain) = input.trim().parse::<f64>() {
        if plain.is_finite() && plain >= 0.0 {
            return Ok(plain);
        }
    }
    let (value, unit) = split_number_unit(input).ok_or_else(err)?;
    let mult = DURATION_UNITS
        .iter()
        .find(|(name, _)| *name == unit)
        .map(|(_, m)| *m)
        .ok_or_else(err)?;
    let secs = value * mult;
    if !(secs >= 0.0 && secs.is_finite()) {
        return Err(err());
    }
    Ok(secs)
}

/// Format bytes with the largest decimal unit that stays exact
/// (at most three decimal places). Falls back to plain bytes.
pub fn format_bytes(bytes: u64) -> String {
    for (name, mult) in [("TB", 1_000_000_000_000u64), ("GB", 1_000_000_000), ("MB", 1_000_000), ("kB", 1_000)] {
        let thousandth = mult / 1000;
        if bytes >= mult && bytes.is_multiple_of(thousandth) {
            let whole = bytes / mult;
            let frac = (bytes % mult) / thousandth;
            let s = if frac == 0 {
                format!("{whole} {name}")
            } else {
                format!("{whole}.{:03} {name}", frac)
                    .trim_end_matches('0')
                    .to_string()
            };
            return s;
        }
    }
    format!("{bytes} B")
}

/// Human-friendly size for tables and summaries: largest unit, two
/// decimals, not guaranteed to round-trip.
pub fn format_bytes_approx(bytes: u64) -> String {
    let b = bytes as f64;
    for (name, div) in [("TB", 1e12), ("GB", 1e9), ("MB", 1e6), ("kB", 1e3)] {
        if b >= div {
            return format!("{:.2} {name}", b / div);
        }
    }
    format!("{bytes} B")
}

/// Format a rate, preferring bit units (the convention of link speeds).
pub fn format_rate(rate: f64) -> String {
    let bits = rate * 8.0;
    for (name, div) in [("Gbps", 1e9), ("Mbps", 1e6), ("Kbps", 1e3)] {
        if bits >= div {
            let value = bits / div;
            let candidate = format!("{value} {name}");
            if parse_rate(&candidate).map(|r| r == rate).unwrap_or(false) {
                return candidate;
            }
        }
    }
    format!("{rate} B/s")
}

/// Format a duration, preferring the largest sub-second unit that round-trips.
pub fn format_duration(secs: f64) -> String {
    if secs >= 1.0 {
        return format!("{secs} s");
    }
    for (name, mult) in [("ms", 1e-3), ("us", 1e-6)] {
        if secs >= mult {
            let value = secs / mult;
            let candidate = format!("{value} {name}");
            if parse_duration(&candidate).map(|d| d == secs).unwrap_or(false) {
                return candidate;
            }
        }
    }
    format!("{secs} s")
}
