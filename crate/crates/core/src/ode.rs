//! Adaptive Dormand-Prince 5(4) for small complex systems `y' = f(x, y)`.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("IntegratorFailure: step size underflow at x = {0}")]
    StepUnderflow(f64),
    #[error("IntegratorFailure: step budget exhausted at x = {0}")]
    TooManySteps(f64),
    #[error("IntegratorFailure: non-finite state at x = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, initial_step: 1e-2, max_step: 1.0, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error weights b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const N: usize> = [Complex64; N];

fn lin<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Integrates from `x0` through each of `stops` in order (all on the same side
/// of `x0`, monotone), returning the state at every stop.
pub fn integrate_through<const N: usize, F>(
    mut f: F,
    x0: f64,
    y0: State<N>,
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<State<N>>, OdeStats), OdeError>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(stops.len());
    let Some(&last) = stops.last() else {
        return Ok((out, stats));
    };
    let dir = if last >= x0 { 1.0 } else { -1.0 };
    let mut x = x0;
    let mut y = y0;
    let mut h = opts.initial_step.min(opts.max_step);
    let mut k1 = f(x, &y);
    stats.evaluations += 1;
    for &stop in stops {
        while (stop - x) * dir > 0.0 {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(OdeError::TooManySteps(x));
            }
            let remaining = (stop - x).abs();
            let clipped = h >= remaining;
            let hh = dir * if clipped { remaining } else { h };
            if hh.abs() < 1e-14 * x.abs().max(1.0) && !clipped {
                return Err(OdeError::StepUnderflow(x));
            }
            let k2 = f(x + C2 * hh, &lin(&y, hh, &[(A21, &k1)]));
            let k3 = f(x + C3 * hh, &lin(&y, hh, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * hh, &lin(&y, hh, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(x + C5 * hh, &lin(&y, hh, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(x + hh, &lin(&y, hh, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = lin(&y, hh, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let x_new = if clipped { stop } else { x + hh };
            let k7 = f(x_new, &y_new);
            stats.evaluations += 6;
            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = hh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                let r = e.norm() / scale;
                err = if r.is_nan() { f64::NAN } else { err.max(r) };
            }
            if !err.is_finite() {
                if hh.abs() < 1e-10 * x.abs().max(1.0) {
                    return Err(OdeError::NonFinite(x));
                }
                h = hh.abs() * 0.2;
                stats.rejected += 1;
                continue;
            }
            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                stats.accepted += 1;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // a clipped step says nothing about the natural step length
                if !clipped || grow < 1.0 {
                    h = (hh.abs() * grow).min(opts.max_step);
                }
            } else {
                stats.rejected += 1;
                h = hh.abs() * (0.9 * err.powf(-0.2)).max(0.2);
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}
