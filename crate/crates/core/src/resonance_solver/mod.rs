//! Zeros of the Wronskian in a rectangle: argument-principle counts, Newton
//! refinement and per-root winding certificates.

mod lattice;

pub use lattice::{gamma0, match_to_lattice, pseudo_poles, pseudo_poles_with, Gauge, LatticePoint, MatchPair, MatchReport, PseudoPoleLattice};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::pencil::{PencilError, WaveProblem};

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("BoundaryZero: |W| = {value:e} at z = {z} on the contour")]
    BoundaryZero { z: Complex64, value: f64 },
    #[error("NonIntegerWinding: winding number {0} is not close to an integer")]
    NonIntegerWinding(f64),
    #[error("CountMismatch: argument principle gives {expected}, certified roots total {found}")]
    CountMismatch { expected: u32, found: u32 },
    #[error("StripViolation: rectangle reaches Im z = {im}, below the admissible floor {floor}")]
    RectangleOutsideStrip { im: f64, floor: f64 },
    #[error("empty or inverted rectangle")]
    BadRectangle,
    #[error(transparent)]
    Pencil(#[from] PencilError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Split across the longer side at `frac`.
    fn split(&self, frac: f64) -> [Rect; 2] {
        if self.re_max - self.re_min >= self.im_max - self.im_min {
            let m = self.re_min + frac * (self.re_max - self.re_min);
            [Rect { re_max: m, ..*self }, Rect { re_min: m, ..*self }]
        } else {
            let m = self.im_min + frac * (self.im_max - self.im_min);
            [Rect { im_max: m, ..*self }, Rect { im_min: m, ..*self }]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Largest accepted change of `arg W` between neighbouring contour nodes.
    pub max_phase_step: f64,
    /// Allowed gap between that change and its trapezoidal estimate.
    pub phase_consistency: f64,
    /// Evaluation budget per edge before the edge is declared to pass through a zero.
    pub max_evaluations: usize,
    /// Newton stops when `|W/W'| < newton_tol·(1 + |z|)`.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Relative cluster radius, `cluster_radius·(1 + |z|)`.
    pub cluster_radius: f64,
    /// Certificate circle radius in units of the cluster radius.
    pub cert_factor: f64,
    pub cert_nodes: usize,
    pub max_depth: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_phase_step: 0.5,
            phase_consistency: 0.05,
            max_evaluations: 4000,
            newton_tol: 1e-12,
            max_newton: 60,
            cluster_radius: 1e-6,
            cert_factor: 10.0,
            cert_nodes: 32,
            max_depth: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub z: Complex64,
    pub ell: u32,
    pub multiplicity: u32,
    /// Last Newton correction `|W/W'|`, a scale-free distance to the root.
    pub residual: f64,
    pub winding_certificate: i64,
}

#[derive(Clone, Copy)]
struct Node {
    z: Complex64,
    w: Complex64,
    /// `W'/W`
    g: Complex64,
}

fn eval_nodes<P: WaveProblem>(p: &P, zs: &[Complex64]) -> Result<Vec<Node>, SolverError> {
    zs.par_iter()
        .map(|&z| {
            let (w, dw) = p.wronskian_and_derivative(z)?;
            Ok(Node { z, w, g: dw / w })
        })
        .collect()
}

/// Change of `arg W` along a segment. The segment is refined until each
/// piece's principal-branch increment agrees with the trapezoidal value of
/// `Im ∫ W'/W dz`, which excludes any hidden multiple of 2π.
fn edge_phase<P: WaveProblem>(p: &P, a: Complex64, b: Complex64, cfg: &SolverConfig) -> Result<(f64, Node), SolverError> {
    let n0 = 16;
    let zs: Vec<Complex64> = (0..=n0).map(|i| a + (b - a) * (i as f64 / n0 as f64)).collect();
    let nodes = eval_nodes(p, &zs)?;
    let mut segs: Vec<(Node, Node)> = nodes.windows(2).map(|w| (w[0], w[1])).collect();
    let mut total = 0.0;
    let mut smallest = nodes[0];
    for n in &nodes {
        if n.w.norm() < smallest.w.norm() {
            smallest = *n;
        }
    }
    let min_len = 1e-13 * (1.0 + a.norm().max(b.norm()));
    let mut evaluations = nodes.len();
    while !segs.is_empty() {
        let mut refine = Vec::new();
        for (u, v) in segs {
            let dphi = (v.w / u.w).arg();
            let pred = (0.5 * (u.g + v.g) * (v.z - u.z)).im;
            if dphi.abs() <= cfg.max_phase_step && (dphi - pred).abs() <= cfg.phase_consistency {
                total += dphi;
            } else {
                if (v.z - u.z).norm() < min_len {
                    return Err(SolverError::BoundaryZero { z: 0.5 * (u.z + v.z), value: u.w.norm().min(v.w.norm()) });
                }
                refine.push((u, v));
            }
        }
        evaluations += refine.len();
        if evaluations > cfg.max_evaluations {
            return Err(SolverError::BoundaryZero { z: smallest.z, value: smallest.w.norm() });
        }
        let mids: Vec<Complex64> = refine.iter().map(|(u, v)| 0.5 * (u.z + v.z)).collect();
        let mid_nodes = eval_nodes(p, &mids)?;
        segs = Vec::with_capacity(2 * refine.len());
        for ((u, v), m) in refine.into_iter().zip(mid_nodes) {
            if m.w.norm() < smallest.w.norm() {
                smallest = m;
            }
            segs.push((u, m));
            segs.push((m, v));
        }
    }
    Ok((total, smallest))
}

fn check_rect<P: WaveProblem>(p: &P, rect: &Rect) -> Result<(), SolverError> {
    if !(rect.re_max > rect.re_min && rect.im_max > rect.im_min) {
        return Err(SolverError::BadRectangle);
    }
    let floor = p.im_floor();
    if rect.im_min <= floor {
        return Err(SolverError::RectangleOutsideStrip { im: rect.im_min, floor });
    }
    Ok(())
}

/// Winding number of `W` around the rectangle, `(1/2π)∮ d arg W`.
pub fn winding_number<P: WaveProblem>(p: &P, rect: &Rect, cfg: &SolverConfig) -> Result<f64, SolverError> {
    check_rect(p, rect)?;
    let c = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        let (phase, smallest) = edge_phase(p, c[i], c[(i + 1) % 4], cfg)?;
        if smallest.w.norm() == 0.0 {
            return Err(SolverError::BoundaryZero { z: smallest.z, value: 0.0 });
        }
        total += phase;
    }
    Ok(total / TAU)
}

/// Argument-principle zero count in `rect`.
pub fn count_zeros<P: WaveProblem>(p: &P, rect: &Rect, cfg: &SolverConfig) -> Result<u32, SolverError> {
    let w = winding_number(p, rect, cfg)?;
    let n = w.round();
    if (w - n).abs() > 0.25 || n < 0.0 {
        return Err(SolverError::NonIntegerWinding(w));
    }
    Ok(n as u32)
}

/// Winding number on a circle by the periodic trapezoidal rule.
pub fn circle_winding<P: WaveProblem>(p: &P, center: Complex64, radius: f64, nodes: usize) -> Result<f64, SolverError> {
    let pts: Vec<Complex64> = (0..nodes).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / nodes as f64)).collect();
    let vals: Vec<(Complex64, Complex64)> = pts.par_iter().map(|&u| p.wronskian_and_derivative(center + radius * u)).collect::<Result<_, _>>()?;
    let sum: Complex64 = pts.iter().zip(&vals).map(|(u, (w, dw))| dw / w * radius * u).sum();
    Ok((sum / nodes as f64).re)
}

/// Newton iteration for `W(z) = 0`, confined to `Im z` above the problem's floor.
pub fn newton<P: WaveProblem>(p: &P, z0: Complex64, cfg: &SolverConfig) -> Result<Option<(Complex64, f64)>, SolverError> {
    let floor = p.im_floor();
    let mut z = z0;
    for _ in 0..cfg.max_newton {
        let (w, dw) = p.wronskian_and_derivative(z)?;
        if w == Complex64::new(0.0, 0.0) {
            return Ok(Some((z, 0.0)));
        }
        let mut step = w / dw;
        if !step.re.is_finite() || !step.im.is_finite() {
            return Ok(None);
        }
        // stay in the admissible strip
        let mut tries = 0;
        while (z - step).im <= floor && tries < 30 {
            step *= 0.5;
            tries += 1;
        }
        if (z - step).im <= floor {
            return Ok(None);
        }
        z -= step;
        if step.norm() < cfg.newton_tol * (1.0 + z.norm()) {
            return Ok(Some((z, step.norm())));
        }
    }
    Ok(None)
}

fn sort_resonances(v: &mut [Resonance]) {
    v.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
}

/// All zeros in `rect`, each certified by a winding number, with the total
/// checked against the argument-principle count.
pub fn find_resonances<P: WaveProblem>(
    p: &P,
    ell: u32,
    rect: &Rect,
    seeds_per_axis: usize,
    cfg: &SolverConfig,
) -> Result<Vec<Resonance>, SolverError> {
    let mut out = find_in(p, ell, rect, seeds_per_axis.max(1), cfg, 0)?;
    sort_resonances(&mut out);
    Ok(out)
}

fn find_in<P: WaveProblem>(
    p: &P,
    ell: u32,
    rect: &Rect,
    seeds: usize,
    cfg: &SolverConfig,
    depth: u32,
) -> Result<Vec<Resonance>, SolverError> {
    let expected = count_zeros(p, rect, cfg)?;
    if expected == 0 {
        return Ok(Vec::new());
    }
    let starts: Vec<Complex64> = (0..seeds)
        .flat_map(|i| {
            (0..seeds).map(move |j| {
                Complex64::new(
                    rect.re_min + (i as f64 + 0.5) / seeds as f64 * (rect.re_max - rect.re_min),
                    rect.im_min + (j as f64 + 0.5) / seeds as f64 * (rect.im_max - rect.im_min),
                )
            })
        })
        .collect();
    let roots: Vec<Option<(Complex64, f64)>> = starts.par_iter().map(|&z| newton(p, z, cfg)).collect::<Result<_, _>>()?;
    let mut found: Vec<Resonance> = Vec::new();
    for (z, residual) in roots.into_iter().flatten() {
        if !rect.contains(z) {
            continue;
        }
        let radius = cfg.cluster_radius * (1.0 + z.norm());
        if found.iter().any(|r| (r.z - z).norm() < radius) {
            continue;
        }
        let winding = circle_winding(p, z, cfg.cert_factor * radius, cfg.cert_nodes)?;
        let m = winding.round();
        if m < 1.0 || (winding - m).abs() > 0.25 {
            continue;
        }
        found.push(Resonance { z, ell, multiplicity: m as u32, residual, winding_certificate: m as i64 });
    }
    let total: u32 = found.iter().map(|r| r.multiplicity).sum();
    if total == expected {
        return Ok(found);
    }
    if depth >= cfg.max_depth {
        return Err(SolverError::CountMismatch { expected, found: total });
    }
    // subdivide, nudging the cut off any zero sitting on it
    for frac in [0.5, 0.4637, 0.5371] {
        let halves = rect.split(frac);
        let mut merged = Vec::new();
        let mut ok = true;
        for h in &halves {
            match find_in(p, ell, h, seeds, cfg, depth + 1) {
                Ok(v) => merged.extend(v),
                Err(SolverError::BoundaryZero { .. }) | Err(SolverError::NonIntegerWinding(_)) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            let total: u32 = merged.iter().map(|r| r.multiplicity).sum();
            if total != expected {
                return Err(SolverError::CountMismatch { expected, found: total });
            }
            return Ok(merged);
        }
    }
    Err(SolverError::CountMismatch { expected, found: total })
}

/// Heuristic box where high-frequency zeros are localised: `Re z` over
/// `prefactor·[1/2, n_max + 1]` and `Im z` from just above the strip floor to 0.
pub fn default_search_region(lattice: &PseudoPoleLattice, n_max: u32, im_floor: f64) -> Rect {
    let depth = (3.0 * lattice.damping_step * lattice.prefactor).min(-im_floor);
    let bottom = (-depth).max(im_floor * 0.999);
    Rect::new(0.5 * lattice.prefactor, lattice.prefactor * (n_max as f64 + 1.0), bottom, 0.0)
}
