//! Exterior De Sitter-Reissner-Nordström geometry.
//!
//! The metric function is `F(r) = 1 - 2M/r + Q²/r² - Λr²/3`. Its four real
//! zeros `r_n < 0 ≤ r_c < r_- < r_+` bound the exterior `(r_-, r_+)`; everything
//! downstream (tortoise coordinate, potentials, surface gravities) is expressed
//! through them and the partial-fraction weights `A_α = Π_{β≠α} (r_α - r_β)^{-1}`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("NonPositive: `{name}` must be > 0 (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("DeltaViolation: 4ΛQ² = {value} must be < 1")]
    DeltaViolation { value: f64 },
    #[error("NariaiViolation: 9ΛM² = {value} must be < 1")]
    NariaiViolation { value: f64 },
    #[error("MassWindowViolation: M = {mass} must lie in ({lower}, {upper})")]
    MassWindowViolation { mass: f64, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HorizonError {
    #[error("DegenerateRoots: roots {0} and {1} coincide within tolerance")]
    DegenerateRoots(f64, f64),
    #[error("horizon polynomial has a non-real root (imaginary part {0})")]
    ComplexRoot(f64),
    #[error("root polishing stalled: |F(r)| = {residual} at r = {root}")]
    PolishFailed { root: f64, residual: f64 },
}

/// The raw parameter tuple as read from a config file or the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub mass: f64,
    pub bh_charge: f64,
    pub lambda: f64,
    pub field_charge: f64,
    pub field_mass: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            bh_charge: 0.0,
            lambda: 0.04,
            field_charge: 0.0,
            field_mass: 1.0,
        }
    }
}

/// Validated black-hole and field parameters.
///
/// Only obtainable through [`validate_params`], so every instance satisfies
/// `4ΛQ² < 1`, `M₁ < M < M₂` and `9ΛM² < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacetimeParams {
    pub mass: f64,
    pub bh_charge: f64,
    pub lambda: f64,
    pub field_charge: f64,
    pub field_mass: f64,
    /// Charge product `s = qQ`.
    pub s: f64,
    pub delta: f64,
    pub m_k: [f64; 2],
    pub mass_window: [f64; 2],
}

/// Boundary values of the admissible mass window for given `(Λ, Q)`.
///
/// Returns `(Δ, [m₁, m₂], [M₁, M₂])` or `None` when `Δ = 1 - 4ΛQ² ≤ 0`.
pub fn mass_window(lambda: f64, bh_charge: f64) -> Option<(f64, [f64; 2], [f64; 2])> {
    let delta = 1.0 - 4.0 * lambda * bh_charge * bh_charge;
    if delta <= 0.0 {
        return None;
    }
    let sd = delta.sqrt();
    // k = 1 takes the minus sign, k = 2 the plus sign.
    let m1 = ((1.0 - sd) / (2.0 * lambda)).max(0.0).sqrt();
    let m2 = ((1.0 + sd) / (2.0 * lambda)).sqrt();
    let big = |m: f64| m - 2.0 / 3.0 * lambda * m * m * m;
    Some((delta, [m1, m2], [big(m1), big(m2)]))
}

pub fn validate_params(raw: RawParams) -> Result<SpacetimeParams, ParamError> {
    let fields = [
        ("mass", raw.mass),
        ("bh_charge", raw.bh_charge),
        ("lambda", raw.lambda),
        ("field_charge", raw.field_charge),
        ("field_mass", raw.field_mass),
    ];
    for (name, v) in fields {
        if !v.is_finite() {
            return Err(ParamError::NonFinite(name));
        }
    }
    for (name, v) in [("mass", raw.mass), ("lambda", raw.lambda), ("field_mass", raw.field_mass)] {
        if v <= 0.0 {
            return Err(ParamError::NonPositive { name, value: v });
        }
    }
    let four_lq2 = 4.0 * raw.lambda * raw.bh_charge * raw.bh_charge;
    let Some((delta, m_k, window)) = mass_window(raw.lambda, raw.bh_charge) else {
        return Err(ParamError::DeltaViolation { value: four_lq2 });
    };
    let nariai = 9.0 * raw.lambda * raw.mass * raw.mass;
    if nariai >= 1.0 {
        return Err(ParamError::NariaiViolation { value: nariai });
    }
    if !(window[0] < raw.mass && raw.mass < window[1]) {
        return Err(ParamError::MassWindowViolation {
            mass: raw.mass,
            lower: window[0],
            upper: window[1],
        });
    }
    Ok(SpacetimeParams {
        mass: raw.mass,
        bh_charge: raw.bh_charge,
        lambda: raw.lambda,
        field_charge: raw.field_charge,
        field_mass: raw.field_mass,
        s: raw.field_charge * raw.bh_charge,
        delta,
        m_k,
        mass_window: window,
    })
}

impl SpacetimeParams {
    pub fn raw(&self) -> RawParams {
        RawParams {
            mass: self.mass,
            bh_charge: self.bh_charge,
            lambda: self.lambda,
            field_charge: self.field_charge,
            field_mass: self.field_mass,
        }
    }

    /// Same geometry with a different field charge `q`.
    pub fn with_field_charge(&self, q: f64) -> Self {
        Self { field_charge: q, s: q * self.bh_charge, ..*self }
    }

    /// `F(r)`; total on `r ≠ 0`.
    pub fn metric_function(&self, r: f64) -> f64 {
        let (m, q, l) = (self.mass, self.bh_charge, self.lambda);
        1.0 - 2.0 * m / r + q * q / (r * r) - l * r * r / 3.0
    }

    pub fn metric_derivative(&self, r: f64) -> f64 {
        let (m, q, l) = (self.mass, self.bh_charge, self.lambda);
        2.0 * m / (r * r) - 2.0 * q * q / (r * r * r) - 2.0 * l * r / 3.0
    }

    /// `r²F(r) = -(Λ/3)r⁴ + r² - 2Mr + Q²`.
    pub fn horizon_polynomial(&self, r: f64) -> f64 {
        let (m, q, l) = (self.mass, self.bh_charge, self.lambda);
        ((-l / 3.0 * r * r + 1.0) * r - 2.0 * m) * r + q * q
    }

    fn horizon_polynomial_derivative(&self, r: f64) -> f64 {
        -4.0 * self.lambda / 3.0 * r * r * r + 2.0 * r - 2.0 * self.mass
    }

    /// Photon-sphere radius `(3M + √(9M² - 8Q²))/2`, the maximum of `F/r²`.
    pub fn photon_sphere(&self) -> f64 {
        let (m, q) = (self.mass, self.bh_charge);
        0.5 * (3.0 * m + (9.0 * m * m - 8.0 * q * q).sqrt())
    }
}

/// Root and identity tolerances used while building [`Horizons`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryTolerances {
    /// Target `|r²F(r)|` after Newton polishing, relative to the polynomial's term scale.
    pub root_residual: f64,
    /// Agreement required between algebraically equivalent formulas.
    pub identity: f64,
    /// Relative separation below which two roots count as coincident.
    pub root_separation: f64,
}

impl Default for GeometryTolerances {
    fn default() -> Self {
        Self { root_residual: 1e-13, identity: 1e-10, root_separation: 1e-8 }
    }
}

/// Partial-fraction weights, one per root label `n, c, -, +`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootWeights {
    pub n: f64,
    pub c: f64,
    pub minus: f64,
    pub plus: f64,
}

impl RootWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.n, self.c, self.minus, self.plus]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Horizons {
    pub r_n: f64,
    pub r_c: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    #[serde(rename = "A")]
    pub a: RootWeights,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub kappa: f64,
    pub frak_r: f64,
    /// Set when `Q = 0`: then `r_c = 0` exactly and the quartic is deflated to a cubic.
    pub degenerate_q0: bool,
}

/// Uncharged horizons from the trigonometric solution of the cubic
/// `r³ - (3/Λ)r + 6M/Λ = 0`, written as
/// `r_± = (2/√Λ) Im((∓√(1-α²) + iα)^{1/3})` with `α = 3√Λ M`.
pub fn uncharged_horizons_closed_form(mass: f64, lambda: f64) -> (f64, f64) {
    let alpha = 3.0 * lambda.sqrt() * mass;
    let c = (1.0 - alpha * alpha).sqrt();
    let cube_root_im = |re: f64| {
        let arg = alpha.atan2(re);
        (arg / 3.0).sin()
    };
    let scale = 2.0 / lambda.sqrt();
    (scale * cube_root_im(c), scale * cube_root_im(-c))
}

impl Horizons {
    pub fn compute(params: &SpacetimeParams) -> Result<Self, HorizonError> {
        horizon_roots(params, &GeometryTolerances::default())
    }

    pub fn roots(&self) -> [f64; 4] {
        [self.r_n, self.r_c, self.r_minus, self.r_plus]
    }

    /// `|F(r_α)|` for each root; for the degenerate `r_c = 0` root the
    /// polynomial residual `|r²F|` is reported instead.
    pub fn residuals(&self, params: &SpacetimeParams) -> [f64; 4] {
        self.roots().map(|r| {
            if r == 0.0 {
                params.horizon_polynomial(r).abs()
            } else {
                params.metric_function(r).abs()
            }
        })
    }

    /// Surface gravity from the partial-fraction weight, `-Λ/(6A±r±²)`.
    pub fn kappa_from_weights(&self, params: &SpacetimeParams) -> (f64, f64) {
        let l = params.lambda;
        (
            -l / (6.0 * self.a.minus * self.r_minus * self.r_minus),
            -l / (6.0 * self.a.plus * self.r_plus * self.r_plus),
        )
    }

    /// Right-hand side of `1/F(r) = -(3r²/Λ) Σ_α A_α/(r - r_α)`.
    pub fn inverse_metric_partial_fractions(&self, params: &SpacetimeParams, r: f64) -> f64 {
        let sum: f64 = self
            .roots()
            .iter()
            .zip(self.a.as_array())
            .map(|(ra, a)| a / (r - ra))
            .sum();
        -3.0 * r * r / params.lambda * sum
    }

    /// `F(r)` written as `-(Λ/3r²) Π (r - r_α)` with the two horizon
    /// factors supplied as offsets `d_- = r - r_-`, `d_+ = r_+ - r`.
    pub fn metric_from_offsets(&self, params: &SpacetimeParams, r: f64, d_minus: f64, d_plus: f64) -> f64 {
        params.lambda / (3.0 * r * r) * (r - self.r_n) * (r - self.r_c) * d_minus * d_plus
    }
}

fn polish(params: &SpacetimeParams, mut r: f64) -> f64 {
    for _ in 0..60 {
        let p = params.horizon_polynomial(r);
        let dp = params.horizon_polynomial_derivative(r);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        r -= step;
        if step.abs() <= 4.0 * f64::EPSILON * r.abs().max(1e-300) {
            break;
        }
    }
    r
}

fn term_scale(params: &SpacetimeParams, r: f64) -> f64 {
    let l = params.lambda;
    (l / 3.0 * r.powi(4)).abs() + r * r + (2.0 * params.mass * r).abs() + params.bh_charge.powi(2)
}

/// Solves `r²F(r) = 0` and derives weights, surface gravities and the photon sphere.
pub fn horizon_roots(params: &SpacetimeParams, tol: &GeometryTolerances) -> Result<Horizons, HorizonError> {
    let degenerate_q0 = params.bh_charge == 0.0;
    let mut roots = if degenerate_q0 {
        let (rm, rp) = uncharged_horizons_closed_form(params.mass, params.lambda);
        [-(rm + rp), 0.0, rm, rp]
    } else {
        // Companion matrix of the monic quartic r⁴ - (3/Λ)r² + (6M/Λ)r - 3Q²/Λ.
        let l = params.lambda;
        let c = [-3.0 * params.bh_charge.powi(2) / l, 6.0 * params.mass / l, -3.0 / l, 0.0];
        let companion = Matrix4::new(
            0.0, 0.0, 0.0, -c[0], //
            1.0, 0.0, 0.0, -c[1], //
            0.0, 1.0, 0.0, -c[2], //
            0.0, 0.0, 1.0, -c[3],
        );
        let eig = companion.complex_eigenvalues();
        let mut out = [0.0; 4];
        for (slot, z) in out.iter_mut().zip(eig.iter()) {
            if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
                return Err(HorizonError::ComplexRoot(z.im));
            }
            *slot = z.re;
        }
        out
    };
    for r in roots.iter_mut() {
        if *r != 0.0 || !degenerate_q0 {
            *r = polish(params, *r);
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));

    for r in roots {
        let residual = params.horizon_polynomial(r).abs();
        if residual > tol.root_residual * term_scale(params, r) {
            return Err(HorizonError::PolishFailed { root: r, residual });
        }
    }
    let scale = roots[3].abs();
    for w in roots.windows(2) {
        if (w[1] - w[0]).abs() < tol.root_separation * scale {
            return Err(HorizonError::DegenerateRoots(w[0], w[1]));
        }
    }

    let weight = |i: usize| -> f64 {
        (0..4).filter(|&j| j != i).map(|j| 1.0 / (roots[i] - roots[j])).product()
    };
    let a = RootWeights { n: weight(0), c: weight(1), minus: weight(2), plus: weight(3) };
    let [r_n, r_c, r_minus, r_plus] = roots;
    let kappa_minus = 0.5 * params.metric_derivative(r_minus);
    let kappa_plus = 0.5 * params.metric_derivative(r_plus);
    Ok(Horizons {
        r_n,
        r_c,
        r_minus,
        r_plus,
        a,
        kappa_minus,
        kappa_plus,
        kappa: kappa_minus.min(kappa_plus.abs()),
        frak_r: params.photon_sphere(),
        degenerate_q0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(mass: f64, q: f64, lambda: f64) -> RawParams {
        RawParams { mass, bh_charge: q, lambda, field_charge: 0.0, field_mass: 1.0 }
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn mass_window_uncharged() {
        let p = validate_params(raw(1.0, 0.0, 0.04)).unwrap();
        // M₂ = m₂ - (2/3)Λm₂³ with m₂ = 1/√Λ = 5.
        assert!((p.mass_window[1] - 5.0 / 3.0).abs() < 1e-14);
        assert_eq!(p.mass_window[0], 0.0);
    }

    #[test]
    fn rejects_each_violation() {
        assert!(matches!(
            validate_params(raw(1.0, 0.0, 1.0 / 9.0)),
            Err(ParamError::NariaiViolation { .. })
        ));
        match validate_params(raw(1.0, 3.0, 0.04)) {
            Err(ParamError::DeltaViolation { value }) => assert!((value - 1.44).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(validate_params(raw(0.0, 0.0, 0.04)), Err(ParamError::NonPositive { .. })));
        assert!(matches!(validate_params(raw(1.0, 0.0, -0.1)), Err(ParamError::NonPositive { .. })));
        assert!(matches!(validate_params(raw(f64::NAN, 0.0, 0.04)), Err(ParamError::NonFinite(_))));
        // Q large enough that M drops below M₁.
        assert!(matches!(
            validate_params(raw(0.2, 0.5, 0.04)),
            Err(ParamError::MassWindowViolation { .. })
        ));
    }

    #[test]
    fn metric_function_direct_arithmetic() {
        let p = validate_params(raw(1.0, 0.0, 0.04)).unwrap();
        let expected = 1.0 - 2.0 / 3.0 - 0.04 * 9.0 / 3.0;
        assert!((p.metric_function(3.0) - expected).abs() < 1e-15);
        assert!((p.metric_function(3.0) - 0.213_333_333_333_333_3).abs() < 1e-15);
        // F(3M) = (1 - 9ΛM²)/3 for Q = 0.
        assert!((p.metric_function(p.photon_sphere()) - (1.0 - 0.36) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uncharged_roots_match_bisection() {
        let p = validate_params(raw(1.0, 0.0, 0.04)).unwrap();
        let h = Horizons::compute(&p).unwrap();
        let (rm, rp) = uncharged_horizons_closed_form(1.0, 0.04);
        let f = |r: f64| p.metric_function(r);
        let top = (3.0f64 / 0.04).sqrt();
        let peak = p.photon_sphere();
        let rm_b = bisect(f, 1e-3, peak);
        let rp_b = bisect(f, peak, top);
        assert!((rm - rm_b).abs() < 1e-12, "{rm} {rm_b}");
        assert!((rp - rp_b).abs() < 1e-12, "{rp} {rp_b}");
        assert!((h.r_minus - rm_b).abs() < 1e-12);
        assert!((h.r_plus - rp_b).abs() < 1e-12);
        assert!(f(h.r_plus).abs() < 1e-12 && f(h.r_minus).abs() < 1e-12);
        assert_eq!(h.r_c, 0.0);
        assert!(h.degenerate_q0);
        assert_eq!(h.frak_r, 3.0);
    }

    #[test]
    fn charged_roots_ordered_and_consistent() {
        let p = validate_params(raw(1.0, 0.3, 0.04)).unwrap();
        let h = Horizons::compute(&p).unwrap();
        assert!(h.r_n < 0.0 && 0.0 < h.r_c && h.r_c < h.r_minus && h.r_minus < h.r_plus);
        for res in h.residuals(&p) {
            assert!(res < 1e-12, "{res}");
        }
        let (km, kp) = h.kappa_from_weights(&p);
        assert!(((km - h.kappa_minus) / h.kappa_minus).abs() < 1e-10);
        assert!(((kp - h.kappa_plus) / h.kappa_plus).abs() < 1e-10);
        assert!(h.kappa_minus > 0.0 && h.kappa_plus < 0.0);
        assert!(-h.a.minus > 0.0 && h.a.plus > 0.0);
        assert!(h.r_minus < h.frak_r && h.frak_r < h.r_plus);
    }

    #[test]
    fn photon_sphere_is_stationary_point_of_w0() {
        for q in [0.0, 0.3, 0.6] {
            let p = validate_params(raw(1.0, q, 0.04)).unwrap();
            let rr = p.photon_sphere();
            let w0 = |r: f64| p.metric_function(r) / (r * r);
            let h = 1e-4;
            let d = (w0(rr + h) - w0(rr - h)) / (2.0 * h);
            assert!(d.abs() < 1e-8, "q={q} d={d}");
            assert!((3.0 * p.mass * rr - 2.0 * q * q - rr * rr).abs() < 1e-12);
        }
    }

    #[test]
    fn exterior_is_positive() {
        let p = validate_params(raw(1.0, 0.3, 0.04)).unwrap();
        let h = Horizons::compute(&p).unwrap();
        for i in 1..1000 {
            let r = h.r_minus + (h.r_plus - h.r_minus) * i as f64 / 1000.0;
            assert!(p.metric_function(r) > 0.0);
        }
    }
}
