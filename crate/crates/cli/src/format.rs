/// `v` to 15 significant digits with trailing zeros dropped, switching to
/// scientific notation outside `[1e-5, 1e15)` (like C's `%.15g`).
pub fn g15(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        let m = trim(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (14 - exp).max(0) as usize;
    trim(&format!("{v:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn g15_list(v: &[f64]) -> String {
    v.iter().map(|&x| g15(x)).collect::<Vec<_>>().join(" ")
}
