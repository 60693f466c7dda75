//! Truncated real power series in one variable. All operands share the length
//! of the left argument.

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn recip(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    out[0] = 1.0 / a[0];
    for k in 1..n {
        let acc: f64 = (1..=k).map(|j| a[j] * out[k - j]).sum();
        out[k] = -acc * out[0];
    }
    out
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn shift_const(a: &[f64], c: f64) -> Vec<f64> {
    let mut out = a.to_vec();
    out[0] += c;
    out
}

/// `exp(s)` for `s[0] = 0`.
pub fn exp(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    for k in 1..n {
        let acc: f64 = (1..=k).map(|j| j as f64 * s[j] * e[k - j]).sum();
        e[k] = acc / k as f64;
    }
    e
}

/// `ln(1 + t/d)`.
pub fn log1p_scaled(d: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut pow = 1.0;
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        pow /= d;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        *slot = sign * pow / k as f64;
    }
    out
}
