//! Time-domain evolution of one angular mode,
//! `(∂t - isṼ)²u + P_ℓ u = 0`, `P_ℓ = -∂ₓ² + W̃_ℓ`,
//! on a uniform grid in the Regge-Wheeler coordinate.

mod ringdown;

pub use ringdown::{dominant_mode, ringdown_fit, FitConfig, FittedMode};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::pencil::{ModeProblem, PencilError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("SupportTooWide: bump center {center}, width {width} does not fit inside [-{limit}, {limit}]")]
    SupportTooWide { center: f64, width: f64, limit: f64 },
    #[error("NaNDetected: non-finite field at t = {t}")]
    NaNDetected { t: f64 },
    #[error("CflViolation: dt = {dt} exceeds cfl * dx = {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("BadGrid: {0}")]
    BadGrid(String),
    #[error("BadWindow: [{lo}, {hi}] is not strictly inside the grid")]
    BadWindow { lo: f64, hi: f64 },
    #[error("IllConditioned: {0}")]
    IllConditioned(String),
    #[error(transparent)]
    Pencil(#[from] PencilError),
}

/// Which electric potential drives the charge coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PotentialGauge {
    /// `Ṽ = 1/r - 1/r_+`, vanishing at the cosmological horizon.
    #[default]
    Shifted,
    /// `V = 1/r`
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub half_width: f64,
    /// Explicit spacing; when absent the resolution bound is used.
    pub dx: Option<f64>,
    pub resolve_factor: f64,
    pub cfl: f64,
    pub gauge: PotentialGauge,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_width: 200.0, dx: None, resolve_factor: 0.2, cfl: 0.5, gauge: PotentialGauge::Shifted }
    }
}

/// Potentials sampled on the grid, plus everything `step` needs.
#[derive(Debug, Clone)]
pub struct EvolutionProblem {
    pub ell: u32,
    pub s: f64,
    pub half_width: f64,
    pub dx: f64,
    pub cfl: f64,
    pub x: Vec<f64>,
    /// `W̃_ℓ` at the nodes
    pub w: Vec<f64>,
    /// electric potential at the nodes, in the chosen gauge
    pub v: Vec<f64>,
}

/// `dx ≤ resolve_factor / √(ℓ(ℓ+1)·max W₀)`; `W₀ = F/r²` peaks at the photon sphere.
pub fn max_dx(mode: &ModeProblem, resolve_factor: f64) -> Result<f64, EvolutionError> {
    let w0 = mode.chart.potentials_at(0.0).map_err(PencilError::from)?.w0;
    let l = mode.l_factor().max(1.0);
    Ok(resolve_factor / (l * w0).sqrt())
}

impl EvolutionProblem {
    pub fn new(mode: &ModeProblem, cfg: &GridConfig) -> Result<Self, EvolutionError> {
        let bound = max_dx(mode, cfg.resolve_factor)?;
        let dx = cfg.dx.unwrap_or(bound);
        if dx > bound * (1.0 + 1e-12) {
            return Err(EvolutionError::BadGrid(format!("dx = {dx} does not resolve the potential (bound {bound})")));
        }
        let r_plus = mode.chart.horizons.r_plus;
        let gauge = cfg.gauge;
        Self::from_potentials(mode.ell, mode.s, cfg.half_width, dx, cfg.cfl, |x| {
            let (w, vt) = mode.potential_sample(x)?;
            let v = match gauge {
                PotentialGauge::Shifted => vt,
                PotentialGauge::Original => vt + 1.0 / r_plus,
            };
            Ok((w, v))
        })
    }

    /// Zero potentials, no charge coupling.
    pub fn free(half_width: f64, dx: f64, cfl: f64) -> Result<Self, EvolutionError> {
        Self::from_potentials(0, 0.0, half_width, dx, cfl, |_| Ok((0.0, 0.0)))
    }

    /// Grid on `[-L, L]` with spacing as close to `dx` as an integer node count allows.
    pub fn from_potentials<F>(ell: u32, s: f64, half_width: f64, dx: f64, cfl: f64, mut pot: F) -> Result<Self, EvolutionError>
    where
        F: FnMut(f64) -> Result<(f64, f64), PencilError>,
    {
        if !(half_width > 0.0 && dx > 0.0 && cfl > 0.0) || !half_width.is_finite() {
            return Err(EvolutionError::BadGrid(format!("L = {half_width}, dx = {dx}, cfl = {cfl}")));
        }
        let cells = (2.0 * half_width / dx).ceil() as usize;
        if cells < 16 {
            return Err(EvolutionError::BadGrid(format!("only {cells} cells")));
        }
        let dx = 2.0 * half_width / cells as f64;
        let x: Vec<f64> = (0..=cells).map(|i| -half_width + i as f64 * dx).collect();
        let mut w = Vec::with_capacity(x.len());
        let mut v = Vec::with_capacity(x.len());
        for &xi in &x {
            let (a, b) = pot(xi)?;
            w.push(a);
            v.push(b);
        }
        Ok(Self { ell, s, half_width, dx, cfl, x, w, v })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.cfl * self.dx
    }

    pub fn index_of(&self, x: f64) -> usize {
        (((x + self.half_width) / self.dx).round().max(0.0) as usize).min(self.len() - 1)
    }

    /// Fourth-order second difference; six-point one-sided rows at and next to the ends.
    fn d2(&self, u: &[Complex64], i: usize) -> Complex64 {
        const END: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
        const NEXT: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
        let n = u.len();
        let h2 = 12.0 * self.dx * self.dx;
        let one_sided = |c: &[f64; 6], from_right: bool| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                acc += *ck * if from_right { u[n - 1 - k] } else { u[k] };
            }
            acc / h2
        };
        if i >= 2 && i + 2 < n {
            (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2]) / h2
        } else if i == 0 {
            one_sided(&END, false)
        } else if i == 1 {
            one_sided(&NEXT, false)
        } else if i == n - 1 {
            one_sided(&END, true)
        } else {
            one_sided(&NEXT, true)
        }
    }

    /// Fourth-order first difference (one-sided at the ends).
    fn d1(&self, u: &[Complex64], i: usize) -> Complex64 {
        let n = u.len();
        let h = 12.0 * self.dx;
        if i >= 2 && i + 2 < n {
            (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / h
        } else if i == 0 {
            (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / h
        } else if i == 1 {
            (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]) / h
        } else if i == n - 1 {
            (25.0 * u[n - 1] - 48.0 * u[n - 2] + 36.0 * u[n - 3] - 16.0 * u[n - 4] + 3.0 * u[n - 5]) / h
        } else {
            (3.0 * u[n - 1] + 10.0 * u[n - 2] - 18.0 * u[n - 3] + 6.0 * u[n - 4] - u[n - 5]) / h
        }
    }

    /// `P_h u = -D₂u + W̃u` at every node.
    pub fn apply_p(&self, u: &[Complex64]) -> Vec<Complex64> {
        (0..u.len()).map(|i| -self.d2(u, i) + self.w[i] * u[i]).collect()
    }

    fn rhs(&self, u: &[Complex64], ut: &[Complex64], du: &mut [Complex64], dut: &mut [Complex64]) {
        let n = u.len();
        let is = Complex64::new(0.0, self.s);
        for i in 1..n - 1 {
            let isv = is * self.v[i];
            du[i] = ut[i];
            dut[i] = 2.0 * isv * ut[i] - isv * isv * u[i] + self.d2(u, i) - self.w[i] * u[i];
        }
        // (∂t ∓ ∂x - isṼ(∓L)) = 0, applied to u and to ∂t u alike
        let (l, r) = (0, n - 1);
        let (vl, vr) = (is * self.v[l], is * self.v[r]);
        du[l] = self.d1(u, l) + vl * u[l];
        dut[l] = self.d1(ut, l) + vl * ut[l];
        du[r] = -self.d1(u, r) + vr * u[r];
        dut[r] = -self.d1(ut, r) + vr * ut[r];
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub t: f64,
    pub ell: u32,
    pub u: Vec<Complex64>,
    pub ut: Vec<Complex64>,
}

impl FieldState {
    pub fn zeros(problem: &EvolutionProblem) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); problem.len()];
        Self { t: 0.0, ell: problem.ell, u: z.clone(), ut: z }
    }

    /// The first-order vector `(u, -i∂t u - sVu)` in the gauge of the problem.
    pub fn first_order(&self, problem: &EvolutionProblem) -> (Vec<Complex64>, Vec<Complex64>) {
        let i = Complex64::i();
        let second = self.ut.iter().zip(&self.u).zip(&problem.v).map(|((ut, u), v)| -i * ut - problem.s * v * u).collect();
        (self.u.clone(), second)
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Launch {
    /// `∂t u = 0`
    #[default]
    AtRest,
    /// `∂t u = -∂x u`
    Rightward,
    /// `∂t u = ∂x u`
    Leftward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
    pub amplitude: f64,
    pub launch: Launch,
}

impl GaussianPulse {
    pub fn new(center: f64, width: f64, momentum: f64) -> Self {
        Self { center, width, momentum, amplitude: 1.0, launch: Launch::AtRest }
    }

    /// Half-length of the numerical support, where the envelope falls below `e^{-16}`.
    pub fn support_radius(&self) -> f64 {
        4.0 * self.width
    }
}

/// `u = A exp(-(x-c)²/w²) e^{ikx}`, with `∂t u` set by the launch mode.
pub fn init_gaussian(problem: &EvolutionProblem, pulse: &GaussianPulse) -> Result<FieldState, EvolutionError> {
    let limit = problem.half_width - 5.0;
    let r = pulse.support_radius();
    if !(pulse.width > 0.0) || pulse.center - r < -limit || pulse.center + r > limit {
        return Err(EvolutionError::SupportTooWide { center: pulse.center, width: pulse.width, limit });
    }
    let mut st = FieldState::zeros(problem);
    for (k, &x) in problem.x.iter().enumerate() {
        let y = (x - pulse.center) / pulse.width;
        let u = pulse.amplitude * (-y * y).exp() * Complex64::from_polar(1.0, pulse.momentum * x);
        let ux = u * Complex64::new(-2.0 * y / pulse.width, pulse.momentum);
        st.u[k] = u;
        st.ut[k] = match pulse.launch {
            Launch::AtRest => Complex64::new(0.0, 0.0),
            Launch::Rightward => -ux,
            Launch::Leftward => ux,
        };
    }
    Ok(st)
}

/// One classical RK4 step. Negative `dt` steps backwards.
pub fn step(problem: &EvolutionProblem, state: &FieldState, dt: f64) -> Result<FieldState, EvolutionError> {
    let limit = problem.dt();
    if dt.abs() > limit * (1.0 + 1e-12) {
        return Err(EvolutionError::CflViolation { dt, limit });
    }
    let n = problem.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut k = [[vec![zero; n], vec![zero; n]], [vec![zero; n], vec![zero; n]], [vec![zero; n], vec![zero; n]], [vec![zero; n], vec![zero; n]]];
    let mut tu = vec![zero; n];
    let mut tut = vec![zero; n];
    let (u, ut) = (&state.u, &state.ut);
    {
        let [a, b] = &mut k[0];
        problem.rhs(u, ut, a, b);
    }
    for stage in 1..4 {
        let c = if stage == 3 { dt } else { 0.5 * dt };
        for i in 0..n {
            tu[i] = u[i] + c * k[stage - 1][0][i];
            tut[i] = ut[i] + c * k[stage - 1][1][i];
        }
        let [a, b] = &mut k[stage];
        problem.rhs(&tu, &tut, a, b);
    }
    let mut next = FieldState { t: state.t + dt, ell: state.ell, u: vec![zero; n], ut: vec![zero; n] };
    let w = dt / 6.0;
    for i in 0..n {
        next.u[i] = u[i] + w * (k[0][0][i] + 2.0 * k[1][0][i] + 2.0 * k[2][0][i] + k[3][0][i]);
        next.ut[i] = ut[i] + w * (k[0][1][i] + 2.0 * k[1][1][i] + 2.0 * k[2][1][i] + k[3][1][i]);
        if !(next.u[i].re.is_finite() && next.u[i].im.is_finite() && next.ut[i].re.is_finite() && next.ut[i].im.is_finite()) {
            return Err(EvolutionError::NaNDetected { t: next.t });
        }
    }
    Ok(next)
}

/// Smooth cutoff `χ = exp(1 - 1/(1-y²))` on `[x_lo, x_hi]` with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyWindow {
    pub x_lo: f64,
    pub x_hi: f64,
    /// first node carrying weight
    pub start: usize,
    pub chi: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EnergyWindow {
    pub fn new(problem: &EvolutionProblem, x_lo: f64, x_hi: f64) -> Result<Self, EvolutionError> {
        let margin = 3.0 * problem.dx;
        if !(x_lo < x_hi) || x_lo < -problem.half_width + margin || x_hi > problem.half_width - margin {
            return Err(EvolutionError::BadWindow { lo: x_lo, hi: x_hi });
        }
        let (c, h) = (0.5 * (x_lo + x_hi), 0.5 * (x_hi - x_lo));
        let start = problem.index_of(x_lo);
        let end = problem.index_of(x_hi);
        let mut chi = Vec::with_capacity(end - start + 1);
        for i in start..=end {
            let y = (problem.x[i] - c) / h;
            chi.push(if y.abs() < 1.0 { (1.0 - 1.0 / (1.0 - y * y)).exp() } else { 0.0 });
        }
        // χ vanishes to all orders at the ends, so plain dx weights are the trapezoid rule
        let weights = vec![problem.dx; chi.len()];
        Ok(Self { x_lo, x_hi, start, chi, weights })
    }
}

/// `∫ χ²(|∂ₓu|² + W̃|u|² + |∂t u|²) dx`
pub fn local_energy(problem: &EvolutionProblem, state: &FieldState, window: &EnergyWindow) -> f64 {
    let mut e = 0.0;
    for (j, (chi, w)) in window.chi.iter().zip(&window.weights).enumerate() {
        if *chi == 0.0 {
            continue;
        }
        let i = window.start + j;
        let ux = problem.d1(&state.u, i);
        e += w * chi * chi * (ux.norm_sqr() + problem.w[i] * state.u[i].norm_sqr() + state.ut[i].norm_sqr());
    }
    e.max(0.0)
}

/// `‖∂t u‖² + ⟨P_h u, u⟩` over the whole grid, conserved by the semi-discrete `s = 0` flow
/// while the field is negligible at the ends.
pub fn natural_energy(problem: &EvolutionProblem, state: &FieldState) -> f64 {
    let pu = problem.apply_p(&state.u);
    let mut e = 0.0;
    for i in 0..problem.len() {
        e += state.ut[i].norm_sqr() + (pu[i] * state.u[i].conj()).re;
    }
    e * problem.dx
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub t_end: f64,
    pub dt: Option<f64>,
    pub probes: Vec<f64>,
    /// record every this many steps
    pub sample_every: usize,
    pub window: Option<EnergyWindow>,
    /// snapshot every this many steps, 0 for none
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    /// probe positions actually used (nearest nodes)
    pub probes: Vec<f64>,
    /// `samples[p][k]`: field at probe `p`, record `k`
    pub samples: Vec<Vec<Complex64>>,
    pub energy: Vec<f64>,
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
}

impl TimeSeries {
    /// `t,re_u_0,im_u_0,...,local_energy`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for p in 0..self.probes.len() {
            out.push_str(&format!(",re_u_{p},im_u_{p}"));
        }
        out.push_str(",local_energy\n");
        for k in 0..self.t.len() {
            out.push_str(&format!("{:.10e}", self.t[k]));
            for p in &self.samples {
                out.push_str(&format!(",{:.17e},{:.17e}", p[k].re, p[k].im));
            }
            out.push_str(&format!(",{:.17e}\n", self.energy.get(k).copied().unwrap_or(f64::NAN)));
        }
        out
    }
}

/// Steps to `t_end` and records probe samples and local energy.
pub fn evolve(problem: &EvolutionProblem, mut state: FieldState, spec: &RunSpec) -> Result<(FieldState, TimeSeries), EvolutionError> {
    let dt = spec.dt.unwrap_or(problem.dt());
    let idx: Vec<usize> = spec.probes.iter().map(|&x| problem.index_of(x)).collect();
    let mut ts = TimeSeries {
        probes: idx.iter().map(|&i| problem.x[i]).collect(),
        samples: vec![Vec::new(); idx.len()],
        ..Default::default()
    };
    let every = spec.sample_every.max(1);
    let steps = ((spec.t_end - state.t) / dt).round().max(0.0) as usize;
    let t0 = state.t;
    for n in 0..=steps {
        if n % every == 0 {
            ts.t.push(state.t);
            for (p, &i) in idx.iter().enumerate() {
                ts.samples[p].push(state.u[i]);
            }
            if let Some(w) = &spec.window {
                ts.energy.push(local_energy(problem, &state, w));
            }
        }
        if spec.snapshot_every > 0 && n % spec.snapshot_every == 0 {
            ts.snapshots.push((state.t, state.u.clone()));
        }
        if n < steps {
            state = step(problem, &state, dt)?;
            // keep the clock free of accumulated rounding
            state.t = t0 + (n + 1) as f64 * dt;
        }
    }
    Ok((state, ts))
}

/// `[t_direct + L, t_direct + 0.8·t_return]` for a probe at `x_p` and a pulse launched at `x_0`:
/// the direct signal arrives at `|x_p - x_0|`, the first boundary echo after `2L - |x_0| - |x_p|`.
pub fn default_fit_window(half_width: f64, x0: f64, xp: f64) -> (f64, f64) {
    let t_direct = (xp - x0).abs();
    let t_return = 2.0 * half_width - x0.abs() - xp.abs();
    (t_direct + half_width, t_direct + 0.8 * t_return)
}

/// Ordinary least-squares slope and intercept.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
