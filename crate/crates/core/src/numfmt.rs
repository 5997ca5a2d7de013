//! Reproducible decimal output: every float is rounded to 12 significant digits.

/// Significant digits kept in serialized output.
pub const SIG_DIGITS: usize = 12;

/// Rounds to [`SIG_DIGITS`] significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIG_DIGITS - 1, x);
    let r: f64 = s.parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest decimal text of the rounded value, e.g. `0.5`, `-2`, `1e-15`.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// `(a, b, ...)`
pub fn fmt_tuple(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|v| fmt_sig(*v)).collect();
    format!("({})", parts.join(", "))
}

/// Rounds every number inside a JSON value in place.
pub fn round_json(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                        *n = r;
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_json),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Pretty JSON with sorted keys and rounded numbers, newline terminated.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}
