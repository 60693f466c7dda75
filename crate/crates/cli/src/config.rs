//! Run configuration: TOML file, then `DSRN_*` environment overrides, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dsrn::RawParams;

use crate::CliError;

pub const ENV_PREFIX: &str = "DSRN_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsBlock,
    pub output_dir: PathBuf,
    /// Outputs never depend on the thread count; when false the JSON reports
    /// also carry wall-clock timings, which breaks byte-for-byte reruns.
    pub deterministic: bool,
    pub threads: Option<usize>,
    pub geometry: GeometryBlock,
    pub resonances: ResonanceBlock,
    pub pseudopoles: PseudoPoleBlock,
    pub ringdown: RingdownBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ParamsBlock::default(),
            output_dir: PathBuf::from("dsrn-out"),
            deterministic: true,
            threads: None,
            geometry: GeometryBlock::default(),
            resonances: ResonanceBlock::default(),
            pseudopoles: PseudoPoleBlock::default(),
            ringdown: RingdownBlock::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsBlock {
    pub mass: f64,
    pub bh_charge: f64,
    pub lambda: f64,
    pub field_charge: f64,
    pub field_mass: f64,
}

impl Default for ParamsBlock {
    fn default() -> Self {
        let r = RawParams::default();
        Self { mass: r.mass, bh_charge: r.bh_charge, lambda: r.lambda, field_charge: r.field_charge, field_mass: r.field_mass }
    }
}

impl From<ParamsBlock> for RawParams {
    fn from(p: ParamsBlock) -> Self {
        RawParams { mass: p.mass, bh_charge: p.bh_charge, lambda: p.lambda, field_charge: p.field_charge, field_mass: p.field_mass }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for GeometryBlock {
    fn default() -> Self {
        Self { x_min: -60.0, x_max: 60.0, points: 1201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceBlock {
    pub ells: Vec<u32>,
    /// Explicit box; when absent, `±prefactor·[ℓ - ½, ℓ + 5/2]` (plus the charge shift) over the strip.
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub im_min: Option<f64>,
    pub im_max: Option<f64>,
    pub seeds_per_axis: usize,
    /// Overrides `q·Q`.
    pub charge_product: Option<f64>,
}

impl Default for ResonanceBlock {
    fn default() -> Self {
        Self { ells: vec![5, 10, 20], re_min: None, re_max: None, im_min: None, im_max: None, seeds_per_axis: 3, charge_product: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeChoice {
    Original,
    Shifted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PseudoPoleBlock {
    pub n_max: u32,
    pub k_max: u32,
    pub gauge: GaugeChoice,
    pub damping_scale: f64,
    /// `ℓ` values for the barrier-top set `Γ₀`.
    pub gamma0_ells: Vec<u32>,
}

impl Default for PseudoPoleBlock {
    fn default() -> Self {
        Self { n_max: 30, k_max: 3, gauge: GaugeChoice::Original, damping_scale: 1.0, gamma0_ells: vec![5, 10, 20] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingdownBlock {
    pub ell: u32,
    pub half_width: f64,
    pub dx: Option<f64>,
    pub resolve_factor: f64,
    pub cfl: f64,
    pub gauge: GaugeChoice,
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
    pub probe: f64,
    /// time between recorded samples
    pub sample_interval: f64,
    pub energy_window: [f64; 2],
    /// defaults to the window set by the direct signal and the first boundary echo
    pub fit_window: Option<[f64; 2]>,
    pub t_end: Option<f64>,
    /// time between field snapshots, 0 for none
    pub snapshot_interval: f64,
    pub sv_threshold: f64,
}

impl Default for RingdownBlock {
    fn default() -> Self {
        Self {
            ell: 2,
            half_width: 200.0,
            dx: None,
            resolve_factor: 0.2,
            cfl: 0.5,
            gauge: GaugeChoice::Shifted,
            center: 0.0,
            width: 3.0,
            momentum: 0.0,
            probe: 20.0,
            sample_interval: 0.5,
            energy_window: [-15.0, 15.0],
            fit_window: None,
            t_end: None,
            snapshot_interval: 0.0,
            sv_threshold: 1e-8,
        }
    }
}

/// `DSRN_A__B=v` sets `a.b = v`; `v` is read as a TOML value, else as a string.
pub fn apply_env<I>(table: &mut toml::Table, vars: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key[ENV_PREFIX.len()..].split("__").map(|s| s.to_ascii_lowercase()).collect();
        if path.iter().any(|s| s.is_empty()) {
            return Err(CliError::Validation(format!("malformed override variable {key}")));
        }
        let value = match format!("v = {raw}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(raw.clone()),
        };
        let mut node = &mut *table;
        for seg in &path[..path.len() - 1] {
            let entry = node.entry(seg.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            node = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Validation(format!("{key}: `{seg}` is not a table")))?;
        }
        node.insert(path[path.len() - 1].clone(), value);
    }
    Ok(())
}

pub fn load(path: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<RunConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(|e| CliError::Validation(format!("config {}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    apply_env(&mut table, env)?;
    RunConfig::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Validation(format!("config: {e}")))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("`{name}` must be positive and finite (got {v})")))
    }
}

impl RunConfig {
    /// Checks the command blocks; spacetime parameters are checked by the core validator.
    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.geometry;
        if !(g.x_min < g.x_max) || g.points < 2 {
            return Err(CliError::Validation(format!("geometry: need x_min < x_max and points ≥ 2 (got {}, {}, {})", g.x_min, g.x_max, g.points)));
        }
        let r = &self.resonances;
        if r.seeds_per_axis == 0 {
            return Err(CliError::Validation("resonances.seeds_per_axis must be ≥ 1".into()));
        }
        if let (Some(a), Some(b)) = (r.re_min, r.re_max) {
            if !(a < b) {
                return Err(CliError::Validation(format!("resonances: re_min {a} must be below re_max {b}")));
            }
        }
        if let (Some(a), Some(b)) = (r.im_min, r.im_max) {
            if !(a < b) {
                return Err(CliError::Validation(format!("resonances: im_min {a} must be below im_max {b}")));
            }
        }
        positive("pseudopoles.damping_scale", self.pseudopoles.damping_scale)?;
        let d = &self.ringdown;
        positive("ringdown.half_width", d.half_width)?;
        positive("ringdown.resolve_factor", d.resolve_factor)?;
        positive("ringdown.width", d.width)?;
        positive("ringdown.sample_interval", d.sample_interval)?;
        if let Some(dx) = d.dx {
            positive("ringdown.dx", dx)?;
        }
        if !(d.cfl > 0.0 && d.cfl <= 1.0) {
            return Err(CliError::Validation(format!("`ringdown.cfl` must lie in (0, 1] (got {})", d.cfl)));
        }
        if d.probe.abs() >= d.half_width {
            return Err(CliError::Validation(format!("`ringdown.probe` {} lies outside the grid", d.probe)));
        }
        if let Some([a, b]) = d.fit_window {
            if !(a < b) {
                return Err(CliError::Validation(format!("`ringdown.fit_window` [{a}, {b}] is empty")));
            }
        }
        if d.snapshot_interval < 0.0 {
            return Err(CliError::Validation("`ringdown.snapshot_interval` must be ≥ 0".into()));
        }
        if let Some(0) = self.threads {
            return Err(CliError::Validation("`threads` must be ≥ 1".into()));
        }
        Ok(())
    }
}
