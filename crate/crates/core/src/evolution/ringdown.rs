//! Matrix-pencil extraction of damped exponentials `Σ a_j e^{-iω_j (t - t₀)}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::EvolutionError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// singular values below this fraction of the largest are noise
    pub sv_threshold: f64,
    /// pencil parameter as a fraction of the sample count
    pub pencil_fraction: f64,
    pub max_order: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { sv_threshold: 1e-8, pencil_fraction: 1.0 / 3.0, max_order: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedMode {
    pub omega: Complex64,
    /// amplitude at the first sample time
    pub amplitude: Complex64,
}

/// Fits `y(t_k)` on a uniform grid. Modes come back sorted by `|Im ω|`.
pub fn ringdown_fit(t: &[f64], y: &[Complex64], cfg: &FitConfig) -> Result<Vec<FittedMode>, EvolutionError> {
    let n = t.len();
    if n != y.len() {
        return Err(EvolutionError::IllConditioned(format!("{} times for {} samples", n, y.len())));
    }
    if n < 8 {
        return Err(EvolutionError::IllConditioned(format!("window holds only {n} samples")));
    }
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(EvolutionError::IllConditioned("samples are not uniformly spaced".into()));
    }
    if y.iter().all(|c| c.norm() == 0.0) {
        return Ok(Vec::new());
    }
    let lp = ((n as f64 * cfg.pencil_fraction).round() as usize).clamp(2, n - 2);
    let rows = n - lp;
    let hankel = DMatrix::from_fn(rows, lp + 1, |i, j| y[i + j]);
    let svd = hankel.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let top = sigma[order[0]];
    let m = order.iter().filter(|&&k| sigma[k] > cfg.sv_threshold * top).count();
    if m == 0 {
        return Ok(Vec::new());
    }
    if m > cfg.max_order || m + 1 > lp || 2 * m > rows {
        return Err(EvolutionError::IllConditioned(format!("model order {m} for {n} samples (pencil {lp})")));
    }
    // rows of V^H spanning the signal space: B₂ B₁⁺ is similar to diag(λ)
    let b = DMatrix::from_fn(m, lp + 1, |i, j| v_t[(order[i], j)]);
    let b1 = b.columns(0, lp).into_owned();
    let b2 = b.columns(1, lp).into_owned();
    let pinv = b1
        .pseudo_inverse(1e-14)
        .map_err(|e| EvolutionError::IllConditioned(format!("pencil pseudo-inverse: {e}")))?;
    let a = b2 * pinv;
    let (_, tri) = a.schur().unpack();
    let lambdas: Vec<Complex64> = (0..m).map(|k| tri[(k, k)]).collect();
    if lambdas.iter().any(|l| l.norm() == 0.0 || !l.re.is_finite() || !l.im.is_finite()) {
        return Err(EvolutionError::IllConditioned("degenerate pencil eigenvalue".into()));
    }
    // amplitudes by least squares on the Vandermonde system
    let vander = DMatrix::from_fn(n, m, |k, j| lambdas[j].powu(k as u32));
    let rhs = DMatrix::from_fn(n, 1, |k, _| y[k]);
    let amps = vander
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| EvolutionError::IllConditioned(format!("amplitude solve: {e}")))?;
    let i = Complex64::i();
    let mut modes: Vec<FittedMode> = lambdas
        .iter()
        .enumerate()
        .map(|(j, l)| FittedMode { omega: i * l.ln() / dt, amplitude: amps[(j, 0)] })
        .collect();
    modes.sort_by(|a, b| a.omega.im.abs().total_cmp(&b.omega.im.abs()).then(a.omega.re.total_cmp(&b.omega.re)));
    Ok(modes)
}

/// Mode carrying the largest share of the signal at `t_ref` (time since the first sample).
pub fn dominant_mode(modes: &[FittedMode], t_ref: f64) -> Option<FittedMode> {
    modes
        .iter()
        .copied()
        .max_by(|a, b| {
            let wa = a.amplitude.norm() * (a.omega.im * t_ref).exp();
            let wb = b.amplitude.norm() * (b.omega.im * t_ref).exp();
            wa.total_cmp(&wb)
        })
}
