//! Regge-Wheeler (tortoise) coordinate `x(r)` with `dx/dr = 1/F`, its inverse,
//! and the mode potentials on the `x`-line.
//!
//! Close to either horizon `r` is exponentially close to `r_±`, so a bare `f64`
//! radius cannot carry the information needed for `F`, `W₀`, `W₁` there. The
//! chart therefore works with [`ChartPoint`]s holding both horizon offsets
//! `d_- = r - r_-` and `d_+ = r_+ - r` to full relative precision. Inside
//! `[-A_-, A_+]` the inverse is a safeguarded Newton solve in the logarithm of
//! the nearer offset; beyond it the Lagrange inversion series in
//! `z = exp(2κ_± x)` is summed.

use serde::Serialize;
use thiserror::Error;

use crate::series;
use crate::spacetime::{Horizons, SpacetimeParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("OutOfExterior: r = {0} is not inside (r_-, r_+)")]
    OutOfExterior(f64),
    #[error("ConvergenceFailure: inverse chart did not converge at x = {0}")]
    ConvergenceFailure(f64),
    #[error("TruncationUnstable: {side:?} series coefficients diverge at order {order}")]
    TruncationUnstable { side: Side, order: usize },
    #[error("series order must be >= 1")]
    ZeroOrder,
}

/// Which horizon an asymptotic quantity refers to; `Minus` is `x → -∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

/// A point of the exterior, with both horizon offsets kept separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub x: f64,
    pub r: f64,
    /// `r - r_-`
    pub d_minus: f64,
    /// `r_+ - r`
    pub d_plus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSample {
    pub f: f64,
    #[serde(rename = "W0")]
    pub w0: f64,
    #[serde(rename = "W1")]
    pub w1: f64,
    #[serde(rename = "V")]
    pub v: f64,
    /// `1/r - 1/r_+`
    #[serde(rename = "V_tilde")]
    pub v_tilde: f64,
    /// `Ṽ - Ṽ(-∞) = 1/r - 1/r_-`, computed from `d_-` so it stays accurate near the event horizon.
    pub v_tilde_from_minus: f64,
    /// `Ṽ(-∞) = 1/r_- - 1/r_+`
    #[serde(rename = "V_minus_shifted")]
    pub v_minus_shifted: f64,
}

/// Truncated Lagrange inversion `r = r_± + Σ_{k=1}^{N} c_k z^k`, `z = e^{2κ_± x}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagrangeSeries {
    pub side: Side,
    pub horizon: f64,
    /// `2κ_±`
    pub rate: f64,
    pub coefficients: Vec<f64>,
    /// `|x|` beyond which the truncated series reproduces the offset to ~1e-15 relative.
    pub validity_threshold: f64,
    /// `|x|` of the factorial-majorant convergence bound, `-ln(K̃)/(2κ_±)` (may be negative).
    pub majorant_bound: f64,
    /// Root-test estimate of the convergence radius in `z`.
    pub radius_estimate: f64,
}

impl LagrangeSeries {
    /// Signed offset `r - r_±` at `z`.
    pub fn offset_at_z(&self, z: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| (acc + c) * z)
    }

    pub fn offset_at(&self, x: f64) -> f64 {
        self.offset_at_z((self.rate * x).exp())
    }

    pub fn r_at(&self, x: f64) -> f64 {
        self.horizon + self.offset_at(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartConfig {
    pub series_order: usize,
    /// Nodes per side of the Newton starting-guess table.
    pub table_points: usize,
    /// Relative truncation error accepted when placing the series threshold.
    pub series_tolerance: f64,
    pub max_newton_iterations: usize,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self { series_order: 12, table_points: 2048, series_tolerance: 1e-15, max_newton_iterations: 60 }
    }
}

/// Monotone `(x, ln d)` samples used only to seed Newton.
#[derive(Debug, Clone)]
struct GuessTable {
    xs: Vec<f64>,
    us: Vec<f64>,
    dudx: Vec<f64>,
}

impl GuessTable {
    fn guess(&self, x: f64) -> f64 {
        let n = self.xs.len();
        // xs ascending
        let i = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return self.us[i],
            Err(i) => i.clamp(1, n - 1),
        };
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let h = x1 - x0;
        let t = ((x - x0) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        h00 * self.us[i - 1] + h10 * h * self.dudx[i - 1] + h01 * self.us[i] + h11 * h * self.dudx[i]
    }
}

#[derive(Debug, Clone)]
pub struct RWChart {
    pub params: SpacetimeParams,
    pub horizons: Horizons,
    pub config: ChartConfig,
    /// `-(3/Λ) A_α r_α²` for α = n, c, -, +.
    log_weights: [f64; 4],
    /// `|𝔯 - r_α|`
    anchors: [f64; 4],
    pub series_minus: LagrangeSeries,
    pub series_plus: LagrangeSeries,
    table_minus: GuessTable,
    table_plus: GuessTable,
}

impl RWChart {
    pub fn build(params: &SpacetimeParams, horizons: &Horizons) -> Result<Self, ChartError> {
        Self::build_with(params, horizons, ChartConfig::default())
    }

    pub fn build_with(params: &SpacetimeParams, horizons: &Horizons, config: ChartConfig) -> Result<Self, ChartError> {
        let roots = horizons.roots();
        let weights = horizons.a.as_array();
        let frak = horizons.frak_r;
        let mut log_weights = [0.0; 4];
        let mut anchors = [0.0; 4];
        for i in 0..4 {
            log_weights[i] = -3.0 / params.lambda * weights[i] * roots[i] * roots[i];
            anchors[i] = (frak - roots[i]).abs();
        }
        let placeholder = LagrangeSeries {
            side: Side::Plus,
            horizon: 0.0,
            rate: 0.0,
            coefficients: vec![],
            validity_threshold: 0.0,
            majorant_bound: 0.0,
            radius_estimate: 0.0,
        };
        let empty = GuessTable { xs: vec![], us: vec![], dudx: vec![] };
        let mut chart = Self {
            params: *params,
            horizons: *horizons,
            config,
            log_weights,
            anchors,
            series_minus: placeholder.clone(),
            series_plus: placeholder,
            table_minus: empty.clone(),
            table_plus: empty,
        };
        chart.series_minus = chart.lagrange_coefficients(Side::Minus, config.series_order)?;
        chart.series_plus = chart.lagrange_coefficients(Side::Plus, config.series_order)?;
        chart.table_minus = chart.build_table(Side::Minus);
        chart.table_plus = chart.build_table(Side::Plus);
        Ok(chart)
    }

    pub fn threshold(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.series_minus.validity_threshold,
            Side::Plus => self.series_plus.validity_threshold,
        }
    }

    /// `(A_-, A_+)`: the `|x|` beyond which each side switches to the series.
    pub fn thresholds(&self) -> (f64, f64) {
        (self.threshold(Side::Minus), self.threshold(Side::Plus))
    }

    fn x_from_offsets(&self, r: f64, d_minus: f64, d_plus: f64) -> f64 {
        let h = &self.horizons;
        let lw = &self.log_weights;
        let an = &self.anchors;
        let mut x = lw[2] * (d_minus / an[2]).ln() + lw[3] * (d_plus / an[3]).ln();
        if lw[0] != 0.0 {
            x += lw[0] * ((r - h.r_n).abs() / an[0]).ln();
        }
        if lw[1] != 0.0 {
            x += lw[1] * ((r - h.r_c).abs() / an[1]).ln();
        }
        x
    }

    pub fn x_of_r(&self, r: f64) -> Result<f64, ChartError> {
        let h = &self.horizons;
        if !(r > h.r_minus && r < h.r_plus) {
            return Err(ChartError::OutOfExterior(r));
        }
        Ok(self.x_from_offsets(r, r - h.r_minus, h.r_plus - r))
    }

    fn point_from_log_offset(&self, side: Side, u: f64) -> ChartPoint {
        let h = &self.horizons;
        let width = h.r_plus - h.r_minus;
        let d = u.exp();
        let (r, d_minus, d_plus) = match side {
            Side::Plus => (h.r_plus - d, width - d, d),
            Side::Minus => (h.r_minus + d, d, width - d),
        };
        ChartPoint { x: self.x_from_offsets(r, d_minus, d_plus), r, d_minus, d_plus }
    }

    /// `dx/du` for `u = ln d_±`: `d_±/F`, positive on the minus side and negative on the plus side.
    fn dx_du(&self, side: Side, p: &ChartPoint) -> f64 {
        let f = self.horizons.metric_from_offsets(&self.params, p.r, p.d_minus, p.d_plus);
        match side {
            Side::Plus => -p.d_plus / f,
            Side::Minus => p.d_minus / f,
        }
    }

    fn build_table(&self, side: Side) -> GuessTable {
        let h = &self.horizons;
        let series = self.series(side);
        let far = series.offset_at(match side {
            Side::Plus => series.validity_threshold + 20.0,
            Side::Minus => -(series.validity_threshold + 20.0),
        });
        let u_far = far.abs().ln();
        let u_near = match side {
            Side::Plus => (h.r_plus - h.frak_r).ln(),
            Side::Minus => (h.frak_r - h.r_minus).ln(),
        };
        let n = self.config.table_points.max(8);
        let mut rows: Vec<(f64, f64, f64)> = (0..n)
            .map(|i| {
                let u = u_near + (u_far - u_near) * i as f64 / (n - 1) as f64;
                let p = self.point_from_log_offset(side, u);
                (p.x, u, 1.0 / self.dx_du(side, &p))
            })
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        GuessTable {
            xs: rows.iter().map(|r| r.0).collect(),
            us: rows.iter().map(|r| r.1).collect(),
            dudx: rows.iter().map(|r| r.2).collect(),
        }
    }

    fn series(&self, side: Side) -> &LagrangeSeries {
        match side {
            Side::Minus => &self.series_minus,
            Side::Plus => &self.series_plus,
        }
    }

    fn newton_point(&self, x: f64) -> Result<ChartPoint, ChartError> {
        let h = &self.horizons;
        let side = if x >= 0.0 { Side::Plus } else { Side::Minus };
        let table = match side {
            Side::Plus => &self.table_plus,
            Side::Minus => &self.table_minus,
        };
        let width = h.r_plus - h.r_minus;
        let mut u_hi = width.ln();
        let mut u_lo = -745.0;
        let mut u = table.guess(x).clamp(u_lo, u_hi - 1e-12);
        for _ in 0..self.config.max_newton_iterations {
            let p = self.point_from_log_offset(side, u);
            let g = p.x - x;
            if g == 0.0 {
                return Ok(p);
            }
            // x increases with u on the minus side and decreases on the plus side.
            let increasing = side == Side::Minus;
            if (g > 0.0) == increasing {
                u_hi = u_hi.min(u);
            } else {
                u_lo = u_lo.max(u);
            }
            let mut next = u - g / self.dx_du(side, &p);
            if !(next > u_lo && next < u_hi) || !next.is_finite() {
                next = 0.5 * (u_lo + u_hi);
            }
            let step = next - u;
            u = next;
            // quadratic convergence: once the step is this small the next one is at roundoff
            if step.abs() <= 1e-9 * u.abs().max(1.0) {
                let p = self.point_from_log_offset(side, u);
                let last = u - (p.x - x) / self.dx_du(side, &p);
                let u_final = if last > u_lo && last < u_hi { last } else { u };
                return Ok(self.point_from_log_offset(side, u_final));
            }
        }
        Err(ChartError::ConvergenceFailure(x))
    }

    fn series_point(&self, x: f64) -> ChartPoint {
        let h = &self.horizons;
        let width = h.r_plus - h.r_minus;
        if x > 0.0 {
            let d_plus = -self.series_plus.offset_at(x);
            ChartPoint { x, r: h.r_plus - d_plus, d_minus: width - d_plus, d_plus }
        } else {
            let d_minus = self.series_minus.offset_at(x);
            ChartPoint { x, r: h.r_minus + d_minus, d_minus, d_plus: width - d_minus }
        }
    }

    /// Inverse chart by Newton only, ignoring the series branch.
    pub fn point_of_x_newton(&self, x: f64) -> Result<ChartPoint, ChartError> {
        if !x.is_finite() {
            return Err(ChartError::ConvergenceFailure(x));
        }
        self.newton_point(x)
    }

    pub fn point_of_x(&self, x: f64) -> Result<ChartPoint, ChartError> {
        if !x.is_finite() {
            return Err(ChartError::ConvergenceFailure(x));
        }
        let (a_minus, a_plus) = self.thresholds();
        if x > a_plus || x < -a_minus {
            Ok(self.series_point(x))
        } else {
            self.newton_point(x)
        }
    }

    pub fn r_of_x(&self, x: f64) -> Result<f64, ChartError> {
        self.point_of_x(x).map(|p| p.r)
    }

    pub fn potentials_at_point(&self, p: &ChartPoint) -> PotentialSample {
        let h = &self.horizons;
        let r = p.r;
        let f = h.metric_from_offsets(&self.params, r, p.d_minus, p.d_plus);
        let fp = self.params.metric_derivative(r);
        let m2 = self.params.field_mass * self.params.field_mass;
        PotentialSample {
            f,
            w0: f / (r * r),
            w1: f * fp / r + m2 * f,
            v: 1.0 / r,
            v_tilde: p.d_plus / (r * h.r_plus),
            v_tilde_from_minus: -p.d_minus / (r * h.r_minus),
            v_minus_shifted: 1.0 / h.r_minus - 1.0 / h.r_plus,
        }
    }

    pub fn potentials_at(&self, x: f64) -> Result<PotentialSample, ChartError> {
        Ok(self.potentials_at_point(&self.point_of_x(x)?))
    }

    /// Lagrange inversion coefficients of `r(z)` at one horizon.
    ///
    /// With `z = g_±(r) = Π_α |(r - r_α)/(𝔯 - r_α)|^{w_α}`, `w_α = A_α r_α²/(A_± r_±²)`,
    /// and `φ(t) = t/g_±(r_± + t)`, the coefficients are `c_k = [t^{k-1}] φ(t)^k / k`.
    /// The powers of `φ` are formed by truncated power-series arithmetic, which
    /// is exact differentiation at `r_±`.
    pub fn lagrange_coefficients(&self, side: Side, order: usize) -> Result<LagrangeSeries, ChartError> {
        if order == 0 {
            return Err(ChartError::ZeroOrder);
        }
        let h = &self.horizons;
        let roots = h.roots();
        let weights = h.a.as_array();
        let own = match side {
            Side::Minus => 2,
            Side::Plus => 3,
        };
        let r0 = roots[own];
        let norm = weights[own] * r0 * r0;
        let rate = 2.0
            * match side {
                Side::Minus => h.kappa_minus,
                Side::Plus => h.kappa_plus,
            };
        let others: Vec<(f64, f64)> = (0..4)
            .filter(|&i| i != own)
            .map(|i| (roots[i], weights[i] * roots[i] * roots[i] / norm))
            .collect();

        // φ(0) = ±|𝔯 - r_±| Π_{α≠±} |(r_± - r_α)/(𝔯 - r_α)|^{-w_α}
        let sign = match side {
            Side::Minus => 1.0,
            Side::Plus => -1.0,
        };
        let mut ln_phi0 = (h.frak_r - r0).abs().ln();
        for &(ra, w) in &others {
            if w != 0.0 {
                ln_phi0 -= w * ((r0 - ra).abs() / (h.frak_r - ra).abs()).ln();
            }
        }
        let phi0 = sign * ln_phi0.exp();

        // L(t) = -Σ w_α ln(1 + t/(r_± - r_α))
        let n = order;
        let mut log_series = vec![0.0; n];
        for &(ra, w) in &others {
            if w == 0.0 {
                continue;
            }
            for (slot, c) in log_series.iter_mut().zip(series::log1p_scaled(r0 - ra, n)) {
                *slot -= w * c;
            }
        }
        let mut coefficients = Vec::with_capacity(n);
        for k in 1..=n {
            let scaled: Vec<f64> = log_series.iter().map(|c| c * k as f64).collect();
            let e = series::exp(&scaled);
            let c = phi0.powi(k as i32) * e[k - 1] / k as f64;
            if !c.is_finite() {
                return Err(ChartError::TruncationUnstable { side, order: k });
            }
            coefficients.push(c);
        }

        // Root test |c_k|^{1/k}; factorial growth shows up as a runaway tail.
        let roots_k: Vec<f64> = coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs().powf(1.0 / (i + 1) as f64))
            .collect();
        let head = roots_k[..n.div_ceil(2)].iter().cloned().fold(0.0, f64::max);
        let tail = roots_k.last().copied().unwrap_or(0.0);
        if n > 2 && tail > 10.0 * head.max(1e-300) {
            return Err(ChartError::TruncationUnstable { side, order: n });
        }
        let radius_estimate = if tail > 0.0 { 1.0 / tail } else { f64::INFINITY };

        // Smallest |z| threshold at which the last retained term drops below tolerance.
        let c1 = coefficients[0].abs();
        let cn = coefficients[n - 1].abs();
        let z_max = if n == 1 || cn == 0.0 {
            // single term: place the threshold where z² stays below tolerance
            self.config.series_tolerance.sqrt()
        } else {
            (self.config.series_tolerance * c1 / cn).powf(1.0 / (n - 1) as f64)
        };
        let z_max = z_max.min(0.5 * radius_estimate);
        let series_threshold = z_max.ln() / rate;

        // Factorial majorant (K̃|z|ℓ)^ℓ/ℓ! converges once eK̃|z| < 1.
        let b_max = others.iter().map(|o| o.1.abs()).fold(0.0, f64::max);
        let mut k_const = 1.0;
        let mut prod = 1.0;
        let mut inv_sum = 0.0;
        for &(ra, w) in &others {
            k_const *= (h.frak_r - ra).abs().powf(w);
            prod *= (r0 - ra).abs().powf(-w);
            inv_sum += 1.0 / (r0 - ra).abs();
        }
        let k_tilde = k_const * (b_max + 1.0) * prod * inv_sum;
        // signed |x|: negative means the majorant already converges at x = 0
        let majorant_bound = side_sign(side) * (-(k_tilde * std::f64::consts::E).ln() / rate);

        Ok(LagrangeSeries {
            side,
            horizon: r0,
            rate,
            coefficients,
            validity_threshold: series_threshold.abs().max(majorant_bound),
            majorant_bound,
            radius_estimate,
        })
    }
}

fn side_sign(side: Side) -> f64 {
    match side {
        Side::Minus => -1.0,
        Side::Plus => 1.0,
    }
}

impl RWChart {
    /// Uniform samples of `(x, r, W0, W1, V_tilde)` on `[x_min, x_max]` as CSV.
    pub fn dump_csv(&self, x_min: f64, x_max: f64, points: usize) -> Result<String, ChartError> {
        let mut out = String::from("x,r,W0,W1,V_tilde\n");
        let n = points.max(2);
        for i in 0..n {
            let x = x_min + (x_max - x_min) * i as f64 / (n - 1) as f64;
            let p = self.point_of_x(x)?;
            let w = self.potentials_at_point(&p);
            out.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n", x, p.r, w.w0, w.w1, w.v_tilde));
        }
        Ok(out)
    }
}

/// Expansions of `r` and the potentials in `ζ = e^{2κ_± x}` at one horizon.
///
/// The coefficients of `r - r_±` follow from `dr/dx = F(r)`:
/// `2κ_±(k-1) c_k = [ζ^k] F(r_± + Σ_{j<k} c_j ζ^j)`, with `c_1` fixed by the
/// anchor of the chart. Potentials are obtained by series arithmetic from the
/// factored form of `F`, so each has an exactly vanishing constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonExpansion {
    pub side: Side,
    pub horizon: f64,
    /// `2κ_±`
    pub rate: f64,
    /// coefficients of `r`, constant term included
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    /// `1/r - 1/r_±`
    pub v_rel: Vec<f64>,
}

impl HorizonExpansion {
    pub fn order(&self) -> usize {
        self.r.len() - 1
    }

    /// Root-test radius estimate from the tail of the `r` coefficients.
    pub fn radius_estimate(&self) -> f64 {
        let n = self.order();
        let tail = self.r[n / 2..=n]
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs().powf(1.0 / (n / 2 + i).max(1) as f64))
            .fold(0.0, f64::max);
        if tail > 0.0 {
            1.0 / tail
        } else {
            f64::INFINITY
        }
    }
}

pub fn eval_series(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * z + v)
}

impl RWChart {
    /// Factored `F` as a series given the offset series `d = r - r_±`.
    fn metric_series(&self, side: Side, d: &[f64]) -> Vec<f64> {
        let h = &self.horizons;
        let rh = match side {
            Side::Minus => h.r_minus,
            Side::Plus => h.r_plus,
        };
        let r = series::shift_const(d, rh);
        let lin = |root: f64, sign: f64| series::scale(&series::shift_const(d, rh - root), sign);
        let (d_minus, d_plus) = match side {
            Side::Minus => (d.to_vec(), lin(h.r_plus, -1.0)),
            Side::Plus => (lin(h.r_minus, 1.0), series::scale(d, -1.0)),
        };
        let inv_r = series::recip(&r);
        let inv_r2 = series::mul(&inv_r, &inv_r);
        let mut f = series::mul(&lin(h.r_n, 1.0), &lin(h.r_c, 1.0));
        f = series::mul(&f, &d_minus);
        f = series::mul(&f, &d_plus);
        f = series::mul(&f, &inv_r2);
        series::scale(&f, self.params.lambda / 3.0)
    }

    pub fn horizon_expansion(&self, side: Side, order: usize) -> HorizonExpansion {
        let h = &self.horizons;
        let (rh, rate) = match side {
            Side::Minus => (h.r_minus, 2.0 * h.kappa_minus),
            Side::Plus => (h.r_plus, 2.0 * h.kappa_plus),
        };
        let n = order.max(1) + 1;
        let mut d = vec![0.0; n];
        d[1] = self.series(side).coefficients[0];
        for k in 2..n {
            let f = self.metric_series(side, &d);
            d[k] = f[k] / (rate * (k - 1) as f64);
        }
        let f = self.metric_series(side, &d);
        let r = series::shift_const(&d, rh);
        let inv_r = series::recip(&r);
        let inv_r2 = series::mul(&inv_r, &inv_r);
        let p = &self.params;
        // F' = 2M/r² - 2Q²/r³ - 2Λr/3
        let fp = series::add(
            &series::scale(&inv_r2, 2.0 * p.mass),
            &series::add(
                &series::scale(&series::mul(&inv_r2, &inv_r), -2.0 * p.bh_charge * p.bh_charge),
                &series::scale(&r, -2.0 * p.lambda / 3.0),
            ),
        );
        let w0 = series::mul(&f, &inv_r2);
        let w1 = series::add(
            &series::mul(&series::mul(&f, &fp), &inv_r),
            &series::scale(&f, p.field_mass * p.field_mass),
        );
        let mut v_rel = series::shift_const(&inv_r, -1.0 / rh);
        v_rel[0] = 0.0;
        HorizonExpansion { side, horizon: rh, rate, r, f, w0, w1, v_rel }
    }
}
