//! Small shared helpers.

/// Derive an independent stream seed from a base seed and a stream tag
/// (splitmix64 finalizer). Keeps parameter draws, target phases and
/// perturbation directions on disjoint deterministic streams.
pub fn derived_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Format a float with 17 significant digits for CSV emission.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.16e}")
    }
}

/// Format a frequency that may sit on the half-integer lattice: integers
/// print without a decimal part, halves as `x.5`.
pub fn fmt_omega(omega: f64) -> String {
    if omega.fract() == 0.0 && omega.abs() < 1e15 {
        format!("{}", omega as i64)
    } else {
        format!("{omega}")
    }
}
