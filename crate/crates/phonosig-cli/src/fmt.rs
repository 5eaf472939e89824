//! Number formatting for result CSVs: 6 significant digits, `%g`-style
//! (fixed notation in a sane range, scientific outside it, trailing zeros
//! trimmed). Character matrices are *not* formatted this way; they keep
//! full round-trip precision.

pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        trim_fixed(&format!("{v:.decimals$}"))
    } else {
        let s = format!("{v:.5e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        format!("{}e{}", trim_fixed(mantissa), exp)
    }
}

fn trim_fixed(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
