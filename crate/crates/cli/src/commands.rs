//! The subcommands. Each one writes into the configured output directory and
//! prints a short summary on stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use dsrn::evolution::{default_fit_window, dominant_mode, ringdown_fit, FitConfig, FittedMode, evolve, init_gaussian, linear_fit, PotentialGauge, RunSpec};
use dsrn::resonance_solver::{find_resonances, gamma0, match_to_lattice, pseudo_poles_with, Gauge, Rect, Resonance, SolverConfig, SolverError};
use dsrn::{validate_params, EnergyWindow, EvolutionProblem, FreeHarness, GaussianPulse, GridConfig, Horizons, ModeConfig, ModeProblem, RWChart, RawParams, SpacetimeParams, WaveProblem};

use crate::config::{GaugeChoice, RunConfig};
use crate::CliError;

fn numerical(module: &str) -> impl Fn(&dyn std::fmt::Display) -> CliError + '_ {
    move |e| CliError::Numerical(format!("{module}: {e}"))
}

/// Validated parameters with the charge-product override folded in.
pub fn spacetime(cfg: &RunConfig) -> Result<SpacetimeParams, CliError> {
    let mut raw: RawParams = cfg.params.into();
    if let Some(s) = cfg.resonances.charge_product {
        if raw.bh_charge == 0.0 {
            if s != 0.0 {
                return Err(CliError::Validation(format!("charge product s = {s} needs a charged black hole (bh_charge = 0)")));
            }
            raw.field_charge = 0.0;
        } else {
            raw.field_charge = s / raw.bh_charge;
        }
    }
    validate_params(raw).map_err(|e| CliError::Validation(format!("spacetime: {e}")))
}

fn chart(p: &SpacetimeParams) -> Result<Arc<RWChart>, CliError> {
    let h = Horizons::compute(p).map_err(|e| numerical("spacetime")(&e))?;
    let c = RWChart::build(p, &h).map_err(|e| numerical("regge_wheeler")(&e))?;
    Ok(Arc::new(c))
}

fn mode(p: &SpacetimeParams, chart: &Arc<RWChart>, ell: u32) -> Result<ModeProblem, CliError> {
    let mp = ModeProblem::new(chart.clone(), ell, ModeConfig::default()).map_err(|e| numerical("pencil")(&e))?;
    Ok(mp.with_charge_product(p.s))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(&cfg.output_dir)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), body)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(format!("json: {e}")))?;
    s.push('\n');
    write(dir, name, &s)
}

fn params_json(p: &SpacetimeParams) -> serde_json::Value {
    json!({
        "mass": p.mass,
        "bh_charge": p.bh_charge,
        "lambda": p.lambda,
        "field_charge": p.field_charge,
        "field_mass": p.field_mass,
        "charge_product": p.s,
    })
}

fn gauge(g: GaugeChoice) -> Gauge {
    match g {
        GaugeChoice::Original => Gauge::Original,
        GaugeChoice::Shifted => Gauge::Shifted,
    }
}

pub fn geometry(cfg: &RunConfig) -> Result<(), CliError> {
    let p = spacetime(cfg)?;
    let c = chart(&p)?;
    let h = c.horizons;
    let dir = out_dir(cfg)?;
    let doc = json!({
        "params": params_json(&p),
        "horizons": h,
        "residuals": h.residuals(&p),
        "degenerate_case": if h.degenerate_q0 { Some("Q = 0: r_c = 0 exactly, the horizon quartic deflates to a cubic") } else { None },
    });
    write_json(dir, "horizons.json", &doc)?;
    let g = &cfg.geometry;
    let csv = c.dump_csv(g.x_min, g.x_max, g.points).map_err(|e| numerical("regge_wheeler")(&e))?;
    write(dir, "chart.csv", &csv)?;
    println!("r_c = {:.15e}  r_- = {:.15e}  r_+ = {:.15e}  r_n = {:.15e}", h.r_c, h.r_minus, h.r_plus, h.r_n);
    println!("kappa_- = {:.15e}  kappa_+ = {:.15e}  photon sphere = {:.15e}", h.kappa_minus, h.kappa_plus, h.frak_r);
    Ok(())
}

/// Boxes for one `ℓ`: the configured one, else both real branches around `±(ℓ + ½)`.
fn search_boxes(cfg: &RunConfig, lat: &dsrn::resonance_solver::PseudoPoleLattice, ell: u32, floor: f64) -> Vec<Rect> {
    let r = &cfg.resonances;
    let pr = lat.prefactor;
    let shift = pr * lat.charge_shift - lat.gauge_offset;
    let l = ell as f64;
    let (lo, hi) = (pr * (l - 0.5), pr * (l + 2.5));
    let im_min = r.im_min.unwrap_or(floor * 0.999);
    let im_max = r.im_max.unwrap_or(0.0);
    if r.re_min.is_some() || r.re_max.is_some() {
        return vec![Rect::new(r.re_min.unwrap_or(lo + shift), r.re_max.unwrap_or(hi + shift), im_min, im_max)];
    }
    vec![Rect::new(shift - hi, shift - lo, im_min, im_max), Rect::new(shift + lo, shift + hi, im_min, im_max)]
}

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::RectangleOutsideStrip { .. } | SolverError::BadRectangle => CliError::Validation(format!("resonance_solver: {e}")),
        e => CliError::Numerical(format!("resonance_solver: {e}")),
    }
}

fn g(x: f64) -> String {
    format!("{x:.15e}")
}

fn with_timing(cfg: &RunConfig, mut doc: serde_json::Value, started: Instant) -> serde_json::Value {
    if !cfg.deterministic {
        doc["elapsed_seconds"] = json!(started.elapsed().as_secs_f64());
    }
    doc
}

pub fn resonances(cfg: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let p = spacetime(cfg)?;
    let c = chart(&p)?;
    let dir = out_dir(cfg)?;
    let solver = SolverConfig::default();
    let mut trend = String::from("ell,re_z,im_z,lattice_re,lattice_im,drift\n");
    let mut summary = Vec::new();
    for &ell in &cfg.resonances.ells {
        let mp = mode(&p, &c, ell)?;
        let lat = pseudo_poles_with(&p, 0..=ell + 4, 0..=3, Gauge::Shifted, 1.0);
        let mut found: Vec<Resonance> = Vec::new();
        let boxes = search_boxes(cfg, &lat, ell, mp.strip_floor());
        for rect in &boxes {
            found.extend(find_resonances(&mp, ell, rect, cfg.resonances.seeds_per_axis, &solver).map_err(solver_error)?);
        }
        found.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
        let zs: Vec<Complex64> = found.iter().map(|r| r.z).collect();
        let report = match_to_lattice(&zs, &lat.points());
        let mut csv = String::from("ell,re_z,im_z,multiplicity,residual,matched_lattice_re,matched_lattice_im,drift\n");
        for r in &found {
            let pair = report.pairs.iter().find(|m| m.resonance == r.z);
            let (lr, li, d) = match pair {
                Some(m) => (g(m.lattice.re), g(m.lattice.im), g(m.drift)),
                None => (String::new(), String::new(), String::new()),
            };
            writeln!(csv, "{ell},{},{},{},{:.3e},{lr},{li},{d}", g(r.z.re), g(r.z.im), r.multiplicity, r.residual).expect("string write");
        }
        write(dir, &format!("resonances_l{ell}.csv"), &csv)?;
        // least-damped resonance on the positive branch against the lattice point n = ℓ, k = 0
        let top = found.iter().filter(|r| r.z.re > lat.prefactor * lat.charge_shift - lat.gauge_offset).max_by(|a, b| a.z.im.total_cmp(&b.z.im));
        let target = lat.entries.iter().find(|e| e.sign == 1 && e.n == ell && e.k == 0).map(|e| e.z);
        if let (Some(r), Some(t)) = (top, target) {
            writeln!(trend, "{ell},{},{},{},{},{}", g(r.z.re), g(r.z.im), g(t.re), g(t.im), g((r.z - t).norm())).expect("string write");
        }
        println!("ell = {ell}: {} resonances, max drift {:.3e}", found.len(), if found.is_empty() { 0.0 } else { report.max_drift });
        summary.push(json!({
            "ell": ell,
            "boxes": boxes,
            "count": found.iter().map(|r| r.multiplicity).sum::<u32>(),
            "strip_floor": mp.strip_floor(),
            "max_drift": if found.is_empty() { None } else { Some(report.max_drift) },
            "mean_drift": if found.is_empty() { None } else { Some(report.mean_drift) },
        }));
    }
    write(dir, "drift_trend.csv", &trend)?;
    let doc = json!({ "params": params_json(&p), "gauge": "shifted", "per_ell": summary });
    write_json(dir, "resonances.json", &with_timing(cfg, doc, started))?;
    Ok(())
}

pub fn pseudopoles(cfg: &RunConfig) -> Result<(), CliError> {
    let p = spacetime(cfg)?;
    let b = &cfg.pseudopoles;
    let lat = pseudo_poles_with(&p, 0..=b.n_max, 0..=b.k_max, gauge(b.gauge), b.damping_scale);
    let dir = out_dir(cfg)?;
    let mut csv = String::from("sign,n,k,re,im\n");
    for e in &lat.entries {
        writeln!(csv, "{},{},{},{},{}", e.sign, e.n, e.k, g(e.z.re), g(e.z.im)).expect("string write");
    }
    write(dir, "pseudopoles.csv", &csv)?;
    let c = chart(&p)?;
    let mut g0 = String::from("ell,k,re,im\n");
    for &ell in &b.gamma0_ells {
        for (k, z) in gamma0(&c, p.s, ell, 0..=b.k_max).into_iter().enumerate() {
            writeln!(g0, "{ell},{k},{},{}", g(z.re), g(z.im)).expect("string write");
        }
    }
    write(dir, "gamma0.csv", &g0)?;
    write_json(
        dir,
        "lattice.json",
        &json!({
            "params": params_json(&p),
            "prefactor": lat.prefactor,
            "charge_shift": lat.charge_shift,
            "damping_step": lat.damping_step,
            "damping_scale": b.damping_scale,
            "gauge": lat.gauge,
            "gauge_offset": lat.gauge_offset,
            "min_damping": lat.min_damping(),
        }),
    )?;
    println!("{} lattice points, min |Im| = {:.6e}", lat.entries.len(), lat.min_damping());
    Ok(())
}

fn fit_window_samples(t: &[f64], y: &[Complex64], a: f64, b: f64) -> (Vec<f64>, Vec<Complex64>) {
    let idx: Vec<usize> = (0..t.len()).filter(|&k| t[k] >= a - 1e-9 && t[k] <= b + 1e-9).collect();
    (idx.iter().map(|&k| t[k]).collect(), idx.iter().map(|&k| y[k]).collect())
}

/// Least-damped resonance on the positive branch from a table written by `resonances`.
fn read_table(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            continue;
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())));
        out.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
    }
    Ok(out)
}

pub fn ringdown(cfg: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let p = spacetime(cfg)?;
    let c = chart(&p)?;
    let d = &cfg.ringdown;
    let mp = mode(&p, &c, d.ell)?;
    let grid = GridConfig {
        half_width: d.half_width,
        dx: d.dx,
        resolve_factor: d.resolve_factor,
        cfl: d.cfl,
        gauge: match d.gauge {
            GaugeChoice::Shifted => PotentialGauge::Shifted,
            GaugeChoice::Original => PotentialGauge::Original,
        },
    };
    let ev = numerical("evolution");
    let ep = EvolutionProblem::new(&mp, &grid).map_err(|e| ev(&e))?;
    let st = init_gaussian(&ep, &GaussianPulse::new(d.center, d.width, d.momentum)).map_err(|e| ev(&e))?;
    let window = EnergyWindow::new(&ep, d.energy_window[0], d.energy_window[1]).map_err(|e| ev(&e))?;
    let (fa, fb) = match d.fit_window {
        Some([a, b]) => (a, b),
        None => default_fit_window(d.half_width, d.center, d.probe),
    };
    let t_end = d.t_end.unwrap_or(fb);
    let dt = ep.dt();
    let every = ((d.sample_interval / dt).round() as usize).max(1);
    let snap = if d.snapshot_interval > 0.0 { ((d.snapshot_interval / dt).round() as usize).max(1) } else { 0 };
    let spec = RunSpec { t_end, dt: None, probes: vec![d.probe], sample_every: every, window: Some(window), snapshot_every: snap };
    let (_, ts) = evolve(&ep, st, &spec).map_err(|e| ev(&e))?;
    let dir = out_dir(cfg)?;
    write(dir, "timeseries.csv", &ts.to_csv())?;
    if !ts.snapshots.is_empty() {
        let mut s = String::from("t,x,re_u,im_u\n");
        for (t, u) in &ts.snapshots {
            for (x, v) in ep.x.iter().zip(u) {
                writeln!(s, "{},{},{},{}", g(*t), g(*x), g(v.re), g(v.im)).expect("string write");
            }
        }
        write(dir, "snapshots.csv", &s)?;
    }

    let (tw, yw) = fit_window_samples(&ts.t, &ts.samples[0], fa, fb);
    let fit_cfg = FitConfig { sv_threshold: d.sv_threshold, ..FitConfig::default() };
    let modes = ringdown_fit(&tw, &yw, &fit_cfg).map_err(|e| ev(&e))?;
    let mut csv = String::from("re_omega,im_omega,re_amplitude,im_amplitude\n");
    for m in &modes {
        writeln!(csv, "{},{},{},{}", g(m.omega.re), g(m.omega.im), g(m.amplitude.re), g(m.amplitude.im)).expect("string write");
    }
    write(dir, "modes.csv", &csv)?;
    // a real field rings at a ±Re pair; prefer the positive branch
    let positive: Vec<FittedMode> = modes.iter().copied().filter(|m| m.omega.re > 0.0).collect();
    let dominant = dominant_mode(if positive.is_empty() { &modes } else { &positive }, tw.first().copied().unwrap_or(0.0));

    let late: Vec<(f64, f64)> = ts.t.iter().zip(&ts.energy).filter(|(t, e)| **t >= fa && **t <= fb && **e > 0.0).map(|(t, e)| (*t, e.ln())).collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = late.iter().copied().unzip();
    let energy_slope = if lx.len() >= 2 { Some(linear_fit(&lx, &ly).0) } else { None };
    let after: Vec<f64> = ts.t.iter().zip(&ts.energy).filter(|(t, _)| **t >= fa).map(|(_, e)| *e).collect();
    let non_increasing = after.windows(2).all(|w| w[1] <= w[0]);

    // Time-domain modes behave like e^{-iωt}; the pencil's resonance for the same
    // outgoing solution is -ω̄, expressed in the shifted gauge.
    let r_plus = c.horizons.r_plus;
    let as_resonance = |w: Complex64| {
        let w = match d.gauge {
            GaugeChoice::Shifted => w,
            GaugeChoice::Original => w + p.s / r_plus,
        };
        if p.s == 0.0 {
            w
        } else {
            -w.conj()
        }
    };
    let table = dir.join(format!("resonances_l{}.csv", d.ell));
    let mut comparison = None;
    if let Some(m) = dominant {
        let z_fit = as_resonance(m.omega);
        if table.exists() {
            let zs = read_table(&table)?;
            if let Some(z) = zs.iter().copied().min_by(|a, b| (a - z_fit).norm().total_cmp(&(b - z_fit).norm())) {
                let re_err = (z_fit.re - z.re).abs() / z.re.abs();
                let im_err = (z_fit.im - z.im).abs() / z.im.abs();
                let body = format!("ell,fit_re,fit_im,resonance_re,resonance_im,rel_err_re,rel_err_im\n{},{},{},{},{},{:.6e},{:.6e}\n", d.ell, g(z_fit.re), g(z_fit.im), g(z.re), g(z.im), re_err, im_err);
                write(dir, "comparison.csv", &body)?;
                println!("fit {z_fit:.6} vs resonance {z:.6}: relative error Re {re_err:.3e}, Im {im_err:.3e}");
                comparison = Some(json!({ "resonance": [z.re, z.im], "rel_err_re": re_err, "rel_err_im": im_err }));
            } else {
                eprintln!("warning: {} lists no resonances; no comparison written", table.display());
            }
        } else {
            eprintln!("warning: {} not found; run `dsrn resonances` first to compare with certified resonances", table.display());
        }
    } else {
        eprintln!("warning: no oscillating mode in the fit window");
    }
    if let Some(s) = energy_slope {
        println!("local energy slope {s:.6e} on [{fa}, {fb}]");
    }
    let doc = json!({
        "params": params_json(&p),
        "ell": d.ell,
        "dx": ep.dx,
        "dt": dt,
        "cells": ep.len() - 1,
        "fit_window": [fa, fb],
        "dominant": dominant.map(|m| [m.omega.re, m.omega.im]),
        "dominant_as_resonance": dominant.map(|m| { let z = as_resonance(m.omega); [z.re, z.im] }),
        "energy_log_slope": energy_slope,
        "energy_non_increasing_after_fit_start": non_increasing,
        "comparison": comparison,
    });
    write_json(dir, "ringdown.json", &with_timing(cfg, doc, started))?;
    Ok(())
}

pub fn selftest(cfg: &RunConfig) -> Result<(), CliError> {
    let p = spacetime(cfg)?;
    let mut failures = Vec::new();
    let mut check = |name: &str, pass: bool, detail: String| {
        println!("selftest {name}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failures.push(name.to_string());
        }
    };

    let c = chart(&p)?;
    let worst = c.horizons.residuals(&p).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    check("horizon residuals", worst < 1e-10, format!("{worst:.2e}"));

    let mut trip = 0.0f64;
    for k in 0..21 {
        let x = -40.0 + 4.0 * k as f64;
        let r = c.r_of_x(x).map_err(|e| numerical("regge_wheeler")(&e))?;
        trip = trip.max((c.x_of_r(r).map_err(|e| numerical("regge_wheeler")(&e))? - x).abs());
    }
    check("chart round trip", trip < 1e-9, format!("{trip:.2e}"));

    let free = FreeHarness::default();
    let mut werr = 0.0f64;
    for z in [Complex64::new(0.7, 0.3), Complex64::new(-1.3, -0.2), Complex64::new(2.0, 1.0)] {
        let (w, _) = free.wronskian_and_derivative(z).map_err(|e| numerical("pencil")(&e))?;
        werr = werr.max((w + 2.0 * Complex64::i() * z).norm() / z.norm());
    }
    check("free wronskian", werr < 1e-8, format!("{werr:.2e}"));

    let ep = EvolutionProblem::free(40.0, 0.1, 0.5).map_err(|e| numerical("evolution")(&e))?;
    let st = init_gaussian(&ep, &GaussianPulse::new(0.0, 2.0, 0.0)).map_err(|e| numerical("evolution")(&e))?;
    let e0 = dsrn::evolution::natural_energy(&ep, &st);
    let spec = RunSpec { t_end: 5.0, dt: None, probes: vec![0.0], sample_every: 1000, window: None, snapshot_every: 0 };
    let (end, _) = evolve(&ep, st, &spec).map_err(|e| numerical("evolution")(&e))?;
    let drift = (dsrn::evolution::natural_energy(&ep, &end) - e0).abs() / e0;
    check("free energy conservation", drift < 1e-6, format!("{drift:.2e}"));

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("selftest: failed {}", failures.join(", "))))
    }
}
