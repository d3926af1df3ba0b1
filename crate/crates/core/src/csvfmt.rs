/// Shortest round-trip decimal form; exponent notation for very small or large magnitudes.
pub(crate) fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn round_trips() {
        for v in [0.0, 1.0, -0.1, 1e-30, 123456.789, 6.02e23, f64::MIN_POSITIVE, 0.0078122] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1e-30), "1e-30");
        assert_eq!(num(0.25), "0.25");
    }
}
