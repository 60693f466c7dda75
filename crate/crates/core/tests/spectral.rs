use std::sync::Arc;

use num_complex::Complex64;

use dsrn::resonance_solver::{count_zeros, default_search_region, find_resonances, match_to_lattice, pseudo_poles, Rect, SolverConfig};
use dsrn::{validate_params, Horizons, ModeConfig, ModeProblem, RWChart, RawParams, WaveProblem};

fn problem(ell: u32) -> ModeProblem {
    let p = validate_params(RawParams::default()).unwrap();
    let h = Horizons::compute(&p).unwrap();
    ModeProblem::new(Arc::new(RWChart::build(&p, &h).unwrap()), ell, ModeConfig::default()).unwrap()
}

#[test]
fn fundamental_l2_resonance() {
    let mp = problem(2);
    let rect = Rect::new(0.5, 0.75, mp.strip_floor() * 0.999, 0.0);
    let res = find_resonances(&mp, 2, &rect, 3, &SolverConfig::default()).unwrap();
    assert_eq!(res.len(), 1);
    let r = res[0];
    assert_eq!((r.ell, r.multiplicity, r.winding_certificate), (2, 1, 1));
    assert!(r.residual < 1e-10);
    assert!((r.z - Complex64::new(0.6326, -0.0542)).norm() < 2e-4, "{}", r.z);
    assert!(mp.wronskian(r.z).unwrap().norm() < 1e-8 * mp.wronskian(r.z + 0.01).unwrap().norm());
    // the kernel grows like 1/(z - z_0) on approach
    let near = mp.resolvent_kernel(r.z + 1e-3, 0.0, 1.0).unwrap().norm();
    let nearer = mp.resolvent_kernel(r.z + 1e-4, 0.0, 1.0).unwrap().norm();
    assert!((nearer / near - 10.0).abs() < 0.5, "{}", nearer / near);
}

#[test]
fn search_region_and_lattice_matching() {
    let p = validate_params(RawParams::default()).unwrap();
    let lat = pseudo_poles(&p, 0..=12, 0..=0);
    let mp = problem(5);
    let region = default_search_region(&lat, 7, mp.strip_floor());
    assert!(region.im_min > mp.strip_floor() && region.im_max == 0.0);
    let rect = Rect::new(lat.prefactor * 4.5, lat.prefactor * 6.5, region.im_min, 0.0);
    let cfg = SolverConfig::default();
    let n = count_zeros(&mp, &rect, &cfg).unwrap();
    let res = find_resonances(&mp, 5, &rect, 3, &cfg).unwrap();
    assert_eq!(n, res.iter().map(|r| r.multiplicity).sum::<u32>());
    let zs: Vec<Complex64> = res.iter().map(|r| r.z).collect();
    let report = match_to_lattice(&zs, &lat.points());
    assert_eq!(report.pairs.len(), zs.len());
    assert!(report.unmatched_resonances.is_empty());
    assert!(report.max_drift < 0.2 && report.max_drift >= report.mean_drift);
}

#[test]
fn upper_half_plane_is_free() {
    let mp = problem(1);
    let n = count_zeros(&mp, &Rect::new(-2.0, 2.0, 0.0, 1.0), &SolverConfig::default()).unwrap();
    assert_eq!(n, 0);
}
