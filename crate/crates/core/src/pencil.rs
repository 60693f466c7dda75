//! The harmonic quadratic pencil `p_ℓ(z, s) = P_ℓ - (z - sṼ)²` on the
//! Regge-Wheeler line, its Jost solutions and their Wronskian.
//!
//! Jost solutions are written `e_± = e^{±iω_± x} y_±` with `ω_+ = z` and
//! `ω_- = z - sṼ(-∞)`, so that
//!
//! ```text
//! y'' ± 2iω y' = Q y,   Q = W̃_ℓ + s v (2ω - s v),   v = Ṽ - Ṽ(±∞).
//! ```
//!
//! Near each end `Q` is a power series in `ζ = e^{2κ_± x}`, and so is `y`; the
//! seed is that convergent series evaluated where `|ζ|` is small, after which
//! the equation is integrated to the matching points. Keeping the plane-wave
//! factor outside the integration means no rescaling is ever required. The
//! `z`-derivative is carried along by the variational equation.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ode::{integrate_through, OdeError, OdeOptions, OdeStats};
use crate::regge_wheeler::{ChartError, HorizonExpansion, RWChart, Side};
use crate::series;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PencilError {
    #[error("StripViolation: Im z = {im} is below the admissible floor {floor}")]
    StripViolation { im: f64, floor: f64 },
    #[error(transparent)]
    Integrator(#[from] OdeError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("AtResonance: |W(z)| = {0} is below the resonance threshold")]
    AtResonance(f64),
}

/// How the Jost solutions are started at the ends of the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// Convergent expansion in `e^{2κ_± x}`.
    Series,
    /// Bare plane wave at the asymptotic cut.
    PlaneWave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeConfig {
    pub ode_tol: f64,
    pub seed: SeedMode,
    /// Strip margin as a fraction of `κ`.
    pub margin_fraction: f64,
    /// Order of the horizon expansions used for the series seed.
    pub series_order: usize,
    /// `|ζ|` at which the series seed is evaluated.
    pub seed_zeta: f64,
    /// Plane-wave seed only: `|W̃| + |s v|` at the start point, `None` for `1e-12·max(ℓ(ℓ+1), 1)`.
    pub asymptotic_cut: Option<f64>,
    pub x_inf_cap: f64,
    /// Reference point for the Wronskian.
    pub x_ref: f64,
}

impl Default for ModeConfig {
    fn default() -> Self {
        Self {
            ode_tol: 1e-11,
            seed: SeedMode::Series,
            margin_fraction: 0.05,
            series_order: 40,
            seed_zeta: 0.02,
            asymptotic_cut: None,
            x_inf_cap: 200.0,
            x_ref: 0.0,
        }
    }
}

/// Anything with an analytic Wronskian-like function whose zeros are sought.
pub trait WaveProblem: Sync {
    /// `(W(z), W'(z))`
    fn wronskian_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64), PencilError>;

    fn wronskian(&self, z: Complex64) -> Result<Complex64, PencilError> {
        self.wronskian_and_derivative(z).map(|w| w.0)
    }

    /// Lowest admissible `Im z`.
    fn im_floor(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

/// Zero potential, `s = 0`: `e_± = e^{±izx}` and `W = -2iz`.
///
/// The Jost solutions are seeded as plane waves at `±seed_distance` and carried
/// to the evaluation points by the same integrator as [`ModeProblem`], together
/// with their `z`-derivatives.
#[derive(Debug, Clone, Copy)]
pub struct FreeHarness {
    pub seed_distance: f64,
    pub ode_tol: f64,
}

impl Default for FreeHarness {
    fn default() -> Self {
        Self { seed_distance: 3.0, ode_tol: 1e-12 }
    }
}

impl FreeHarness {
    pub fn jost(&self, z: Complex64, side: Side, xs: &[f64]) -> Result<JostSolution, PencilError> {
        let sigma = side_sigma(side);
        let x0 = sigma * self.seed_distance;
        let e = (sigma * I * z * x0).exp();
        let seed = [e, sigma * I * z * e, sigma * I * x0 * e, sigma * I * (1.0 + sigma * I * z * x0) * e];
        // e'' = -z²e, (∂_z e)'' = -z²∂_z e - 2ze
        let rhs = |_x: f64, y: &[Complex64; 4]| [y[1], -z * z * y[0], y[3], -z * z * y[2] - 2.0 * z * y[0]];
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| (sigma * xs[b]).total_cmp(&(sigma * xs[a])));
        let stops: Vec<f64> = order.iter().map(|&k| xs[k]).collect();
        let (states, stats) = integrate_through(rhs, x0, seed, &stops, &OdeOptions::with_tol(self.ode_tol))?;
        let zero = Complex64::new(0.0, 0.0);
        let mut sol = JostSolution {
            side,
            z,
            asymptotic_frequency: z,
            x: xs.to_vec(),
            value: vec![zero; xs.len()],
            derivative: vec![zero; xs.len()],
            dvalue_dz: vec![zero; xs.len()],
            dderivative_dz: vec![zero; xs.len()],
            stats,
        };
        for (k, st) in order.into_iter().zip(states) {
            sol.value[k] = st[0];
            sol.derivative[k] = st[1];
            sol.dvalue_dz[k] = st[2];
            sol.dderivative_dz[k] = st[3];
        }
        Ok(sol)
    }
}

impl WaveProblem for FreeHarness {
    fn wronskian_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64), PencilError> {
        let xs = [0.0];
        let plus = self.jost(z, Side::Plus, &xs)?;
        let minus = self.jost(z, Side::Minus, &xs)?;
        Ok(ModeProblem::wronskian_from(&plus, &minus, 0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JostSolution {
    pub side: Side,
    pub z: Complex64,
    /// `z` on the plus side, `z - sṼ(-∞)` on the minus side.
    pub asymptotic_frequency: Complex64,
    pub x: Vec<f64>,
    pub value: Vec<Complex64>,
    pub derivative: Vec<Complex64>,
    pub dvalue_dz: Vec<Complex64>,
    pub dderivative_dz: Vec<Complex64>,
    pub stats: OdeStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WronskianReport {
    pub value: Complex64,
    pub derivative: Complex64,
    /// `max |W(x_i) - W(x_ref)| / |W(x_ref)|` over the diagnostic points.
    pub spread: f64,
}

/// Per-side data fixed by `(ℓ, s, chart)`.
#[derive(Debug, Clone)]
struct SideData {
    side: Side,
    rate: f64,
    /// coefficients of `W̃_ℓ`, `v` and `v²` in `ζ`
    wt: Vec<f64>,
    v: Vec<f64>,
    v2: Vec<f64>,
    x_start: f64,
}

#[derive(Debug, Clone)]
pub struct ModeProblem {
    pub ell: u32,
    pub s: f64,
    pub chart: Arc<RWChart>,
    pub config: ModeConfig,
    minus: SideData,
    plus: SideData,
}

fn side_sigma(side: Side) -> f64 {
    match side {
        Side::Minus => -1.0,
        Side::Plus => 1.0,
    }
}

impl ModeProblem {
    pub fn new(chart: Arc<RWChart>, ell: u32, config: ModeConfig) -> Result<Self, PencilError> {
        let s = chart.params.s;
        let em = chart.horizon_expansion(Side::Minus, config.series_order);
        let ep = chart.horizon_expansion(Side::Plus, config.series_order);
        let mut out = Self {
            ell,
            s,
            config,
            minus: Self::side_data(&em, ell, 0.0),
            plus: Self::side_data(&ep, ell, 0.0),
            chart,
        };
        for (exp, side) in [(&em, Side::Minus), (&ep, Side::Plus)] {
            let x_start = match config.seed {
                SeedMode::Series => {
                    let zeta = config.seed_zeta.min(0.05 * exp.radius_estimate());
                    zeta.ln() / exp.rate
                }
                SeedMode::PlaneWave => out.plane_wave_start(side)?,
            };
            match side {
                Side::Minus => out.minus.x_start = x_start,
                Side::Plus => out.plus.x_start = x_start,
            }
        }
        Ok(out)
    }

    /// Same geometry and mode with another charge product `s = qQ`.
    pub fn with_charge_product(&self, s: f64) -> Self {
        Self { s, ..self.clone() }
    }

    fn side_data(e: &HorizonExpansion, ell: u32, x_start: f64) -> SideData {
        let l = (ell as f64) * (ell as f64 + 1.0);
        let wt = series::add(&series::scale(&e.w0, l), &e.w1);
        SideData { side: e.side, rate: e.rate, wt, v: e.v_rel.clone(), v2: series::mul(&e.v_rel, &e.v_rel), x_start }
    }

    fn data(&self, side: Side) -> &SideData {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    pub fn l_factor(&self) -> f64 {
        let l = self.ell as f64;
        l * (l + 1.0)
    }

    pub fn asymptotic_cut(&self) -> f64 {
        self.config.asymptotic_cut.unwrap_or(1e-12 * self.l_factor().max(1.0))
    }

    /// `x` at which the Jost solution of each side is seeded, `(minus, plus)`.
    pub fn x_start(&self) -> (f64, f64) {
        (self.minus.x_start, self.plus.x_start)
    }

    /// `Ṽ(-∞) = 1/r_- - 1/r_+`
    pub fn v_minus(&self) -> f64 {
        let h = &self.chart.horizons;
        1.0 / h.r_minus - 1.0 / h.r_plus
    }

    pub fn asymptotic_frequency(&self, z: Complex64, side: Side) -> Complex64 {
        match side {
            Side::Plus => z,
            Side::Minus => z - self.s * self.v_minus(),
        }
    }

    pub fn strip_floor(&self) -> f64 {
        -(1.0 - self.config.margin_fraction) * self.chart.horizons.kappa
    }

    fn plane_wave_start(&self, side: Side) -> Result<f64, PencilError> {
        let sigma = side_sigma(side);
        let cut = self.asymptotic_cut();
        let mut x = 1.0;
        while x < self.config.x_inf_cap {
            let (wt, v) = self.potentials(sigma * x, side)?;
            if wt.abs() + (self.s * v).abs() < cut {
                break;
            }
            x += 0.5;
        }
        Ok(sigma * x.min(self.config.x_inf_cap))
    }

    /// `(W̃_ℓ(x), Ṽ(x) - Ṽ(±∞))` for the given side's gauge offset.
    fn potentials(&self, x: f64, side: Side) -> Result<(f64, f64), PencilError> {
        let p = self.chart.point_of_x(x)?;
        let w = self.chart.potentials_at_point(&p);
        let v = match side {
            Side::Plus => w.v_tilde,
            Side::Minus => w.v_tilde_from_minus,
        };
        Ok((self.l_factor() * w.w0 + w.w1, v))
    }

    /// `W̃_ℓ(x) = ℓ(ℓ+1)W₀(x) + W₁(x)`
    pub fn effective_potential(&self, x: f64) -> Result<f64, PencilError> {
        Ok(self.potentials(x, Side::Plus)?.0)
    }

    fn check_strip(&self, z: Complex64) -> Result<(), PencilError> {
        let floor = self.strip_floor();
        if z.im <= floor || !z.re.is_finite() || !z.im.is_finite() {
            return Err(PencilError::StripViolation { im: z.im, floor });
        }
        Ok(())
    }

    /// Series seed `[y, y', ∂_z y, ∂_z y']` at `ζ`.
    fn series_seed(&self, d: &SideData, omega: Complex64, zeta: f64) -> [Complex64; 4] {
        let sigma = side_sigma(d.side);
        let s = self.s;
        let n = d.wt.len();
        let q: Vec<Complex64> = (0..n).map(|m| d.wt[m] + s * d.v[m] * 2.0 * omega - s * s * d.v2[m]).collect();
        let dq: Vec<f64> = d.v.iter().map(|v| 2.0 * s * v).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        let mut db = vec![Complex64::new(0.0, 0.0); n];
        b[0] = Complex64::new(1.0, 0.0);
        let mut out = [Complex64::new(0.0, 0.0); 4];
        out[0] = b[0];
        let mut pow = 1.0;
        for k in 1..n {
            let rk = d.rate * k as f64;
            let denom = rk * rk + 2.0 * sigma * I * omega * rk;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut dacc = Complex64::new(0.0, 0.0);
            for m in 1..=k {
                acc += q[m] * b[k - m];
                dacc += dq[m] * b[k - m] + q[m] * db[k - m];
            }
            b[k] = acc / denom;
            db[k] = (dacc - 2.0 * sigma * I * rk * b[k]) / denom;
            pow *= zeta;
            out[0] += b[k] * pow;
            out[1] += b[k] * rk * pow;
            out[2] += db[k] * pow;
            out[3] += db[k] * rk * pow;
        }
        out
    }

    /// Factored state `[y, y', η, η']` at the requested points.
    fn factored(&self, z: Complex64, side: Side, xs: &[f64]) -> Result<(Vec<[Complex64; 4]>, OdeStats), PencilError> {
        let d = self.data(side);
        let sigma = side_sigma(side);
        let omega = self.asymptotic_frequency(z, side);
        let s = self.s;
        let x0 = d.x_start;
        let seed = match self.config.seed {
            SeedMode::Series => self.series_seed(d, omega, (d.rate * x0).exp()),
            SeedMode::PlaneWave => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        };
        // inward points are integrated, outward ones read off the series
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| (sigma * xs[b]).total_cmp(&(sigma * xs[a])));
        let mut result = vec![[Complex64::new(0.0, 0.0); 4]; xs.len()];
        let mut stops = Vec::new();
        let mut stop_index = Vec::new();
        for &i in &order {
            let x = xs[i];
            if sigma * x >= sigma * x0 {
                result[i] = match self.config.seed {
                    SeedMode::Series => self.series_seed(d, omega, (d.rate * x).exp()),
                    SeedMode::PlaneWave => seed,
                };
            } else {
                stops.push(x);
                stop_index.push(i);
            }
        }
        // Away from the horizons r is a good independent variable and needs no chart inversion.
        let chart = &self.chart;
        let params = &chart.params;
        let h = &chart.horizons;
        let l = self.l_factor();
        let m2 = params.field_mass * params.field_mass;
        let rhs = |r: f64, y: &[Complex64; 4]| -> [Complex64; 4] {
            let f = h.metric_from_offsets(params, r, r - h.r_minus, h.r_plus - r);
            let fp = params.metric_derivative(r);
            let wt = l * f / (r * r) + f * fp / r + m2 * f;
            let v = match side {
                Side::Plus => (h.r_plus - r) / (r * h.r_plus),
                Side::Minus => -(r - h.r_minus) / (r * h.r_minus),
            };
            let q = wt + s * v * (2.0 * omega - s * v);
            let k = 2.0 * sigma * I * omega;
            let inv_f = 1.0 / f;
            [
                y[1] * inv_f,
                (-k * y[1] + q * y[0]) * inv_f,
                y[3] * inv_f,
                (-k * y[3] - 2.0 * sigma * I * y[1] + q * y[2] + 2.0 * s * v * y[0]) * inv_f,
            ]
        };
        let r0 = chart.r_of_x(x0)?;
        let r_stops: Vec<f64> = stops.iter().map(|&x| chart.r_of_x(x)).collect::<Result<_, _>>()?;
        let mut opts = OdeOptions::with_tol(self.config.ode_tol);
        opts.initial_step = 1e-3;
        opts.max_step = 0.25;
        let (states, stats) = integrate_through(rhs, r0, seed, &r_stops, &opts)?;
        for (state, i) in states.into_iter().zip(stop_index) {
            result[i] = state;
        }
        Ok((result, stats))
    }

    pub fn jost(&self, z: Complex64, side: Side, xs: &[f64]) -> Result<JostSolution, PencilError> {
        self.check_strip(z)?;
        let (states, stats) = self.factored(z, side, xs)?;
        let sigma = side_sigma(side);
        let omega = self.asymptotic_frequency(z, side);
        let mut sol = JostSolution {
            side,
            z,
            asymptotic_frequency: omega,
            x: xs.to_vec(),
            value: Vec::with_capacity(xs.len()),
            derivative: Vec::with_capacity(xs.len()),
            dvalue_dz: Vec::with_capacity(xs.len()),
            dderivative_dz: Vec::with_capacity(xs.len()),
            stats,
        };
        for (&x, st) in xs.iter().zip(&states) {
            let [y, yp, eta, etap] = *st;
            let ph = (sigma * I * omega * x).exp();
            let a = sigma * I * omega;
            let e = ph * y;
            let ep = ph * (a * y + yp);
            sol.value.push(e);
            sol.derivative.push(ep);
            sol.dvalue_dz.push(ph * (sigma * I * x * y + eta));
            sol.dderivative_dz.push(ph * (sigma * I * x * (a * y + yp) + sigma * I * y + a * eta + etap));
        }
        Ok(sol)
    }

    fn wronskian_from(plus: &JostSolution, minus: &JostSolution, i: usize) -> (Complex64, Complex64) {
        let (ep, epp) = (plus.value[i], plus.derivative[i]);
        let (em, emp) = (minus.value[i], minus.derivative[i]);
        let w = ep * emp - epp * em;
        let dw = plus.dvalue_dz[i] * emp + ep * minus.dderivative_dz[i] - plus.dderivative_dz[i] * em - epp * minus.dvalue_dz[i];
        (w, dw)
    }

    /// Wronskian at the reference point with its `z`-derivative and the
    /// x-independence spread over `x_ref + {-5, 0, 5}`.
    pub fn wronskian_report(&self, z: Complex64) -> Result<WronskianReport, PencilError> {
        let x0 = self.config.x_ref;
        let xs = [x0 - 5.0, x0, x0 + 5.0];
        let plus = self.jost(z, Side::Plus, &xs)?;
        let minus = self.jost(z, Side::Minus, &xs)?;
        let (w, dw) = Self::wronskian_from(&plus, &minus, 1);
        let spread = [0, 2]
            .iter()
            .map(|&i| (Self::wronskian_from(&plus, &minus, i).0 - w).norm() / w.norm())
            .fold(0.0, f64::max);
        Ok(WronskianReport { value: w, derivative: dw, spread })
    }

    /// `K(z; x, y)`
    pub fn resolvent_kernel(&self, z: Complex64, x: f64, y: f64) -> Result<Complex64, PencilError> {
        let x0 = self.config.x_ref;
        let xs = [x0, x, y];
        let plus = self.jost(z, Side::Plus, &xs)?;
        let minus = self.jost(z, Side::Minus, &xs)?;
        let (w, _) = Self::wronskian_from(&plus, &minus, 0);
        if w.norm() < RESONANCE_THRESHOLD * z.norm().max(1.0) {
            return Err(PencilError::AtResonance(w.norm()));
        }
        let (ex, ey) = ((plus.value[1], minus.value[1]), (plus.value[2], minus.value[2]));
        let k = if x >= y { ex.0 * ey.1 } else { ey.0 * ex.1 };
        Ok(k / w)
    }

    /// `(W̃_ℓ(x), Ṽ(x))`
    pub fn potential_sample(&self, x: f64) -> Result<(f64, f64), PencilError> {
        let p = self.chart.point_of_x(x)?;
        let w = self.chart.potentials_at_point(&p);
        Ok((self.l_factor() * w.w0 + w.w1, w.v_tilde))
    }
}

/// `|W|` below `RESONANCE_THRESHOLD · max(|z|, 1)` counts as a resonance.
pub const RESONANCE_THRESHOLD: f64 = 1e-12;

impl WaveProblem for ModeProblem {
    fn wronskian_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64), PencilError> {
        let xs = [self.config.x_ref];
        let plus = self.jost(z, Side::Plus, &xs)?;
        let minus = self.jost(z, Side::Minus, &xs)?;
        Ok(Self::wronskian_from(&plus, &minus, 0))
    }

    fn im_floor(&self) -> f64 {
        self.strip_floor()
    }
}

/// Samples of `W` on a grid as CSV (`re_z,im_z,re_w,im_w,abs_w`), row-major in `Im z`.
pub fn wronskian_grid_csv<P: WaveProblem>(
    problem: &P,
    re: (f64, f64, usize),
    im: (f64, f64, usize),
) -> Result<String, PencilError> {
    let axis = |(lo, hi, n): (f64, f64, usize), i: usize| if n <= 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    let points: Vec<Complex64> = (0..im.2)
        .flat_map(|j| (0..re.2).map(move |i| Complex64::new(axis(re, i), axis(im, j))))
        .collect();
    let values: Result<Vec<Complex64>, PencilError> = points.par_iter().map(|&z| problem.wronskian(z)).collect();
    let mut out = String::from("re_z,im_z,re_w,im_w,abs_w\n");
    for (z, w) in points.iter().zip(values?) {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n", z.re, z.im, w.re, w.im, w.norm()));
    }
    Ok(out)
}

/// `K(z; x, y)` from Jost data already evaluated at `x` (index 0) and `y` (index 1).
pub fn kernel_from(plus: &JostSolution, minus: &JostSolution, w: Complex64, x: f64, y: f64) -> Complex64 {
    if x >= y {
        plus.value[0] * minus.value[1] / w
    } else {
        plus.value[1] * minus.value[0] / w
    }
}
