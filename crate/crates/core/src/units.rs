//! Clock and bandwidth conversions, and display rounding.
//!
//! GB/s and GHz are decimal units (1 GB = 10^9 B). Cycle values are kept at
//! full precision everywhere; rounding happens only when rendering.

/// Cycles to move `bytes` at `bandwidth_gbs` when the core runs at `clock_ghz`.
pub fn gbs_to_cycles(bytes: f64, clock_ghz: f64, bandwidth_gbs: f64) -> f64 {
    bytes * clock_ghz / bandwidth_gbs
}

/// Bytes per core cycle equivalent of a GB/s figure.
pub fn gbs_to_bytes_per_cycle(clock_ghz: f64, bandwidth_gbs: f64) -> f64 {
    bandwidth_gbs / clock_ghz
}

/// One decimal place, halves rounded away from zero.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Render a cycle count the way the shorthand notation does: one decimal,
/// trailing `.0` dropped.
pub fn fmt_cycles(x: f64) -> String {
    let r = round1(x);
    if r.fract() == 0.0 {
        format!("{}", r as i64)
    } else {
        format!("{r:.1}")
    }
}
