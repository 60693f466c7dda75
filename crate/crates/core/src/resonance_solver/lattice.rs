//! Pseudo-pole lattices approximating high-frequency resonances, and pairing
//! of computed resonances with lattice points.

use num_complex::Complex64;
use serde::Serialize;

use crate::regge_wheeler::RWChart;
use crate::spacetime::SpacetimeParams;

/// Which electric gauge the lattice is expressed in. The pencil is solved with
/// `Ṽ = V - 1/r_+`, whose resonances are those of the unshifted potential
/// moved by `-s/r_+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    Original,
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticePoint {
    /// sign of the real branch
    pub sign: i8,
    pub n: u32,
    pub k: u32,
    pub z: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoPoleLattice {
    /// `√F(𝔯)/𝔯`
    pub prefactor: f64,
    /// `qQ/√F(𝔯)`
    pub charge_shift: f64,
    /// `½√|3 - 12M/𝔯 + 10Q²/𝔯²|`
    pub damping_step: f64,
    pub gauge: Gauge,
    /// `s/r_+`, subtracted from every entry in the shifted gauge
    pub gauge_offset: f64,
    pub entries: Vec<LatticePoint>,
}

impl PseudoPoleLattice {
    pub fn points(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.z).collect()
    }

    /// `min |Im μ|` over the entries.
    pub fn min_damping(&self) -> f64 {
        self.entries.iter().map(|e| e.z.im.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn nearest(&self, z: Complex64) -> Option<&LatticePoint> {
        self.entries.iter().min_by(|a, b| (a.z - z).norm().total_cmp(&(b.z - z).norm()))
    }
}

/// `Γ = (√F(𝔯)/𝔯)(±(n + ½) + qQ/√F(𝔯) - i·d·(k + ½))` in the original gauge.
///
/// The two real branches `±(n + ½)`, `n ≥ 0`, exhaust `±ℕ* ± ½`; the charge
/// shift has one sign for both, as the map `z ↦ -z̄`, `s ↦ -s` requires.
pub fn pseudo_poles(params: &SpacetimeParams, n_range: std::ops::RangeInclusive<u32>, k_range: std::ops::RangeInclusive<u32>) -> PseudoPoleLattice {
    pseudo_poles_with(params, n_range, k_range, Gauge::Original, 1.0)
}

/// As [`pseudo_poles`], in a chosen gauge and with the damping step scaled.
///
/// A scale of 2 gives the damping `(k + ½)√(2|W₀''(0)|)/(2√W₀(0))` of the
/// inverted harmonic oscillator at the barrier top.
pub fn pseudo_poles_with(
    params: &SpacetimeParams,
    n_range: std::ops::RangeInclusive<u32>,
    k_range: std::ops::RangeInclusive<u32>,
    gauge: Gauge,
    damping_scale: f64,
) -> PseudoPoleLattice {
    let frak = params.photon_sphere();
    let f = params.metric_function(frak);
    let q2 = params.bh_charge * params.bh_charge;
    let prefactor = f.sqrt() / frak;
    let charge_shift = params.s / f.sqrt();
    let damping_step = 0.5 * (3.0 - 12.0 * params.mass / frak + 10.0 * q2 / (frak * frak)).abs().sqrt();
    let r_plus = crate::spacetime::Horizons::compute(params).map(|h| h.r_plus).unwrap_or(f64::INFINITY);
    let gauge_offset = match gauge {
        Gauge::Original => 0.0,
        Gauge::Shifted => params.s / r_plus,
    };
    let mut entries = Vec::new();
    for sign in [-1i8, 1] {
        for n in n_range.clone() {
            for k in k_range.clone() {
                let re = prefactor * (sign as f64 * (n as f64 + 0.5) + charge_shift) - gauge_offset;
                let im = -prefactor * damping_scale * damping_step * (k as f64 + 0.5);
                entries.push(LatticePoint { sign, n, k, z: Complex64::new(re, im) });
            }
        }
    }
    PseudoPoleLattice { prefactor, charge_shift, damping_step, gauge, gauge_offset, entries }
}

/// `W₀''(0)` by a sixth-order centred difference on the chart.
pub fn w0_second_derivative(chart: &RWChart) -> f64 {
    let h = 1e-2;
    let w = |x: f64| chart.potentials_at(x).map(|p| p.w0).unwrap_or(f64::NAN);
    let c = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
    let mut acc = c[0] * w(0.0);
    for (j, cj) in c.iter().enumerate().skip(1) {
        let t = j as f64 * h;
        acc += cj * (w(t) + w(-t));
    }
    acc / (h * h)
}

/// `Γ₀(h) = {W₀(0) + h(2√W₀(0)·s·V(0) - i√(|W₀''(0)|/2)(k + ½))}`, `h = (ℓ(ℓ+1))^{-1/2}`,
/// with `V(0) = 1/𝔯`.
pub fn gamma0(chart: &RWChart, s: f64, ell: u32, k_range: std::ops::RangeInclusive<u32>) -> Vec<Complex64> {
    let l = ell as f64;
    let h = 1.0 / (l * (l + 1.0)).sqrt();
    let w0 = chart.potentials_at(0.0).map(|p| p.w0).unwrap_or(f64::NAN);
    let w0pp = w0_second_derivative(chart);
    let v0 = 1.0 / chart.horizons.frak_r;
    k_range
        .map(|k| {
            Complex64::new(
                w0 + h * 2.0 * w0.sqrt() * s * v0,
                -h * (w0pp.abs() / 2.0).sqrt() * (k as f64 + 0.5),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchPair {
    pub resonance: Complex64,
    pub lattice: Complex64,
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub pairs: Vec<MatchPair>,
    pub max_drift: f64,
    pub mean_drift: f64,
    pub unmatched_resonances: Vec<Complex64>,
    pub unmatched_lattice: Vec<Complex64>,
}

/// Greedy nearest-neighbour pairing, globally smallest distances first.
pub fn match_to_lattice(resonances: &[Complex64], lattice: &[Complex64]) -> MatchReport {
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(resonances.len() * lattice.len());
    for (i, r) in resonances.iter().enumerate() {
        for (j, l) in lattice.iter().enumerate() {
            cand.push(((r - l).norm(), i, j));
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_r = vec![false; resonances.len()];
    let mut used_l = vec![false; lattice.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in cand {
        if !used_r[i] && !used_l[j] {
            used_r[i] = true;
            used_l[j] = true;
            pairs.push(MatchPair { resonance: resonances[i], lattice: lattice[j], drift: d });
        }
    }
    pairs.sort_by(|a, b| a.resonance.re.total_cmp(&b.resonance.re).then(a.resonance.im.total_cmp(&b.resonance.im)));
    let max_drift = pairs.iter().map(|p| p.drift).fold(0.0, f64::max);
    let mean_drift = if pairs.is_empty() { 0.0 } else { pairs.iter().map(|p| p.drift).sum::<f64>() / pairs.len() as f64 };
    MatchReport {
        pairs,
        max_drift,
        mean_drift,
        unmatched_resonances: resonances.iter().zip(&used_r).filter(|(_, u)| !**u).map(|(r, _)| *r).collect(),
        unmatched_lattice: lattice.iter().zip(&used_l).filter(|(_, u)| !**u).map(|(l, _)| *l).collect(),
    }
}
