//! Per-task computations for the sweep experiments.

use crate::config::{Experiment, SweepConfig};
use crate::record::task_seed;
use nci_core::dirac::{build_clifford, build_dirac, fredholm_index, geometric_identity_continuum, geometric_identity_delone};
use nci_core::invariants::{chern_pairing, winding_pairing, DerivationKernel, KernelMode};
use nci_core::linalg::CMat;
use nci_core::localization::{level_statistics, lyapunov_analytic, lyapunov_birkhoff, synthetic};
use nci_core::manybody::{build_fock_basis, mb_chern_pairing, slater_sector_projection};
use nci_core::models::{
    build_amorphous_magnetic, build_chiral_wire, build_haldane, DisorderCoupling, SiteBasis,
};
use nci_core::pattern::{
    build_amorphous, build_chain, build_honeycomb, build_square_offset, cut_disk,
    sample_disorder, shared, AmorphousGeometry, PointPattern,
};
use nci_core::spectral::{chiral_flatten, diagonalize, fermi_projection, EigenDecomposition};
use nci_core::Complex64;
use serde_json::json;
use std::collections::BTreeMap;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

pub struct TaskOutput {
    pub value: Complex64,
    pub quantized: i64,
    pub deviation: f64,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
}

/// Per-sweep shared state: heavy per-seed objects (amorphous patterns and
/// their eigendecompositions) are computed once and shared across the grid.
#[derive(Default)]
pub struct Caches {
    amorphous: Mutex<HashMap<u64, Arc<(Arc<PointPattern>, EigenDecomposition)>>>,
}

fn kernel_of(config: &SweepConfig) -> Result<DerivationKernel, String> {
    match config.option("kernel", "minimal_image") {
        "minimal_image" => Ok(DerivationKernel { mode: KernelMode::MinimalImage }),
        "roots_of_unity" => Ok(DerivationKernel { mode: KernelMode::RootsOfUnity }),
        other => Err(format!("unknown kernel mode {other}")),
    }
}

fn grid_value(grid: &[(String, f64)], name: &str) -> Option<f64> {
    grid.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
}

pub fn run_task(
    config: &SweepConfig,
    grid: &[(String, f64)],
    grid_index: usize,
    seed_index: usize,
    caches: &Caches,
) -> Result<TaskOutput, String> {
    let master = config.seeds[seed_index];
    let tseed = task_seed(master, grid_index as u64, seed_index as u64);
    match config.experiment {
        Experiment::HaldaneChern => {
            let n1 = config.param("n1", 12.0) as usize;
            let n2 = config.param("n2", 12.0) as usize;
            let t2 = config.param("t2", 0.6);
            let w = grid_value(grid, "w").unwrap_or(config.param("w", 0.0));
            let ef = grid_value(grid, "fermi_energy").unwrap_or(0.0);
            let kernel = kernel_of(config)?;
            let pattern = shared(build_honeycomb(n1, n2).map_err(|e| e.to_string())?);
            let xi = sample_disorder(&pattern, tseed);
            let h = build_haldane(&pattern, t2, w, &xi).map_err(|e| e.to_string())?;
            let eig = diagonalize(&h).map_err(|e| e.to_string())?;
            let p = fermi_projection(&eig, ef);
            let basis = SiteBasis::new(pattern.clone(), 1);
            let res = chern_pairing(&p, &basis, &[0, 1], &kernel, None)
                .map_err(|e| e.to_string())?;
            let min_abs = eig.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
            let mut diag = BTreeMap::new();
            diag.insert("rank".into(), json!(p.rank));
            diag.insert("min_abs_eigenvalue".into(), json!(min_abs));
            diag.insert("degenerate_at_fermi".into(), json!(res.degenerate_at_fermi));
            Ok(TaskOutput {
                value: res.value,
                quantized: res.quantized_value,
                deviation: res.deviation,
                diagnostics: diag,
            })
        }
        Experiment::WindingMap => {
            let n = config.param("n", 200.0) as usize;
            let w = grid_value(grid, "w").unwrap_or(0.0);
            let m = grid_value(grid, "m").unwrap_or(config.param("m", 0.5));
            let w1 = w * config.param("w1_factor", 0.5);
            let w2 = w * config.param("w2_factor", 1.0);
            let kernel = kernel_of(config)?;
            let pattern = shared(build_chain(n).map_err(|e| e.to_string())?);
            let xi = sample_disorder(&pattern, tseed);
            let h = build_chiral_wire(&pattern, m, w1, w2, &xi, DisorderCoupling::Shared)
                .map_err(|e| e.to_string())?;
            let dim = h.entries.nrows();
            let mut sigma = CMat::zeros((dim, dim));
            for i in 0..dim {
                sigma[[i, i]] =
                    Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
            }
            let u = chiral_flatten(&h, &sigma).map_err(|e| e.to_string())?;
            let res = winding_pairing(&u, &kernel).map_err(|e| e.to_string())?;
            let mut diag = BTreeMap::new();
            diag.insert("unitarity_residual".into(), json!(u.unitarity_residual));
            diag.insert("disorder_coupling".into(), json!("shared"));
            Ok(TaskOutput {
                value: res.value,
                quantized: res.quantized_value,
                deviation: res.deviation,
                diagnostics: diag,
            })
        }
        Experiment::Lyapunov => {
            let m = grid_value(grid, "m").unwrap_or(config.param("m", 0.5));
            let w1 = grid_value(grid, "w1")
                .or(grid_value(grid, "w").map(|w| w * config.param("w1_factor", 0.5)))
                .unwrap_or(config.param("w1", 0.5));
            let w2 = grid_value(grid, "w2").unwrap_or(w1 * config.param("w2_over_w1", 2.0));
            let steps = config.param("steps", 1e6) as usize;
            let analytic = lyapunov_analytic(m, w1, w2);
            let est = lyapunov_birkhoff(m, w1, w2, steps, tseed).map_err(|e| e.to_string())?;
            let mut diag = BTreeMap::new();
            diag.insert("analytic".into(), json!(analytic.value));
            diag.insert("analytic_singular".into(), json!(analytic.singular));
            diag.insert("sigma".into(), json!(est.estimator_sigma));
            diag.insert("resampled".into(), json!(est.resampled));
            diag.insert("w1".into(), json!(w1));
            diag.insert("w2".into(), json!(w2));
            Ok(TaskOutput {
                value: Complex64::new(est.value, 0.0),
                quantized: est.value.round() as i64,
                deviation: (est.value - analytic.value).abs(),
                diagnostics: diag,
            })
        }
        Experiment::AmorphousChern => {
            let count = config.param("count", 1000.0) as usize;
            let r_min = config.param("r_min", 0.5);
            let theta = config.param("theta", 1.5);
            let decay = config.param("decay", 3.0);
            let frac = grid_value(grid, "fermi_fraction").unwrap_or(0.5);
            let entry = {
                let mut cache = caches.amorphous.lock().unwrap();
                if let Some(hit) = cache.get(&master) {
                    hit.clone()
                } else {
                    let pattern = shared(
                        build_amorphous(count, r_min, master, AmorphousGeometry::Open)
                            .map_err(|e| e.to_string())?,
                    );
                    let h = build_amorphous_magnetic(&pattern, theta, decay)
                        .map_err(|e| e.to_string())?;
                    let eig = diagonalize(&h).map_err(|e| e.to_string())?;
                    let arc = Arc::new((pattern, eig));
                    cache.insert(master, arc.clone());
                    arc
                }
            };
            let (pattern, eig) = (&entry.0, &entry.1);
            let n = pattern.len();
            let idx = ((n as f64 * frac) as usize).min(n - 1);
            let ef = eig.eigenvalues[idx];
            let p = fermi_projection(eig, ef);
            let basis = SiteBasis::new(pattern.clone(), 1);
            let half_width = pattern.geometry.volume().sqrt() / 2.0;
            let collar = config.param("collar", 0.2) * half_width;
            let kernel = DerivationKernel { mode: KernelMode::MinimalImage };
            let res = chern_pairing(&p, &basis, &[0, 1], &kernel, Some(collar))
                .map_err(|e| e.to_string())?;
            let mut diag = BTreeMap::new();
            diag.insert("fermi_energy".into(), json!(ef));
            diag.insert("rank".into(), json!(p.rank));
            if let Some(w) = &res.window {
                diag.insert("window_sites".into(), json!(w.sites_in_window));
            }
            Ok(TaskOutput {
                value: res.value,
                quantized: res.quantized_value,
                deviation: res.deviation,
                diagnostics: diag,
            })
        }
        Experiment::IndexCheck => {
            let radius = config.param("radius", 12.0);
            let t2 = config.param("t2", 0.6);
            let torus_n = config.param("torus_n", 2.0 * radius / 1.5) as usize;
            let big = build_honeycomb(torus_n, torus_n).map_err(|e| e.to_string())?;
            let half = big.geometry.volume().sqrt() / 2.0;
            let disk = shared(cut_disk(&big, &[half, half], radius).map_err(|e| e.to_string())?);
            let xi = sample_disorder(&disk, tseed);
            let w_dis = config.param("w", 0.0);
            let h = build_haldane(&disk, t2, w_dis, &xi).map_err(|e| e.to_string())?;
            let eig = diagonalize(&h).map_err(|e| e.to_string())?;
            let p = fermi_projection(&eig, config.param("fermi_energy", 0.0));
            let cl = build_clifford(2).map_err(|e| e.to_string())?;
            // one random acceptable shift per task, drawn near the center
            let mut rng = nci_core::pattern::sample_disorder(&disk, tseed ^ 0x5151).values
                .clone();
            let shift = [rng.pop().unwrap_or(0.13) * 2.0, rng.pop().unwrap_or(0.21) * 2.0];
            let dir = build_dirac(&disk, 1, &cl, &shift).map_err(|e| e.to_string())?;
            let collar = config.param("collar", 0.2) * radius;
            let res = fredholm_index(&p, &eig, &dir, collar).map_err(|e| e.to_string())?;
            let mut diag = BTreeMap::new();
            diag.insert("cc_trace_re".into(), json!(res.cc_trace.re));
            diag.insert("sv_min".into(), json!(res.singular_values.first().copied()));
            diag.insert("sv_count_below_tau".into(), json!(res.count_below_tau));
            diag.insert("kernel_side_index".into(), json!(res.kernel_side_index));
            diag.insert("shift".into(), json!(shift.to_vec()));
            Ok(TaskOutput {
                value: Complex64::new(res.index as f64, 0.0),
                quantized: res.index,
                deviation: res.deviation,
                diagnostics: diag,
            })
        }
        Experiment::Geomid => {
            let parse_vec = |s: &str| -> Vec<f64> {
                s.split(',').filter_map(|t| t.trim().parse().ok()).collect()
            };
            let y1 = parse_vec(config.option("y1", "1,0"));
            let y2 = parse_vec(config.option("y2", "0,1"));
            let ys = vec![y1, y2];
            let cl = build_clifford(2).map_err(|e| e.to_string())?;
            let samples = config.param("samples", 2e6) as usize;
            let est = match config.option("ensemble", "continuum") {
                "continuum" => geometric_identity_continuum(
                    &cl,
                    &ys,
                    samples,
                    config.param("box_half", 40.0),
                    tseed,
                    config.param("tail_tol", 0.8),
                )
                .map_err(|e| e.to_string())?,
                "square" => {
                    let n = config.param("lattice_n", 40.0) as usize;
                    let reps = config.param("realizations", 200.0) as usize;
                    let seeds: Vec<u64> =
                        (0..reps).map(|k| task_seed(tseed, k as u64, 0)).collect();
                    geometric_identity_delone(
                        &cl,
                        &ys,
                        |s| build_square_offset(n, s).unwrap(),
                        &seeds,
                    )
                }
                "rsa" => {
                    let count = config.param("count", 900.0) as usize;
                    let reps = config.param("realizations", 120.0) as usize;
                    let seeds: Vec<u64> =
                        (0..reps).map(|k| task_seed(tseed, k as u64, 1)).collect();
                    geometric_identity_delone(
                        &cl,
                        &ys,
                        |s| {
                            build_amorphous(count, 0.5, s, AmorphousGeometry::Torus).unwrap()
                        },
                        &seeds,
                    )
                }
                other => return Err(format!("unknown ensemble {other}")),
            };
            let ratio = est.lhs / est.rhs;
            let mut diag = BTreeMap::new();
            diag.insert("lhs_re".into(), json!(est.lhs.re));
            diag.insert("lhs_im".into(), json!(est.lhs.im));
            diag.insert("rhs_im".into(), json!(est.rhs.im));
            diag.insert("sigma".into(), json!(est.sigma));
            diag.insert("tail_bound".into(), json!(est.tail_bound));
            Ok(TaskOutput {
                value: ratio,
                quantized: ratio.re.round() as i64,
                deviation: (est.lhs - est.rhs).norm(),
                diagnostics: diag,
            })
        }
        Experiment::ManybodyPairing => {
            let radius = config.param("disk_radius", 2.6);
            let torus_n = config.param("torus_n", 8.0) as usize;
            let t2 = config.param("t2", 0.6);
            let w = config.param("w", 0.0);
            let big = build_honeycomb(torus_n, torus_n).map_err(|e| e.to_string())?;
            let half = big.geometry.volume().sqrt() / 2.0;
            let disk = shared(cut_disk(&big, &[half, half], radius).map_err(|e| e.to_string())?);
            let xi = sample_disorder(&disk, tseed);
            let h = build_haldane(&disk, t2, w, &xi).map_err(|e| e.to_string())?;
            let eig = diagonalize(&h).map_err(|e| e.to_string())?;
            let filled = (config.param("filled_fraction", 0.5) * disk.len() as f64) as usize;
            let basis = Arc::new(build_fock_basis(&disk, 2).map_err(|e| e.to_string())?);
            let proj = slater_sector_projection(&eig, &basis, filled);
            let collar = config.param("collar", 0.6);
            let res = mb_chern_pairing(&proj, &[0, 1], Some(collar)).map_err(|e| e.to_string())?;
            let mut diag = BTreeMap::new();
            diag.insert("sites".into(), json!(disk.len()));
            diag.insert("sector_dim".into(), json!(basis.len()));
            diag.insert("filled".into(), json!(filled));
            // two-body sector pairings are the open exploratory regime
            diag.insert("exploratory".into(), json!(w != 0.0));
            Ok(TaskOutput {
                value: res.value,
                quantized: res.quantized_value,
                deviation: res.deviation,
                diagnostics: diag,
            })
        }
        Experiment::LevelStats => {
            let source = config.option("source", "poisson").to_string();
            let stats = match source.as_str() {
                "poisson" => {
                    let n = config.param("levels", 1e4) as usize;
                    let levels = synthetic::poisson_levels(n, tseed);
                    level_statistics(&levels, (0.0, 1.0)).map_err(|e| e.to_string())?
                }
                "gue" => {
                    let dim = config.param("dim", 500.0) as usize;
                    let h = synthetic::gue_matrix(dim, tseed);
                    let eig = nci_core::spectral::diagonalize_matrix(&h)
                        .map_err(|e| e.to_string())?;
                    let levels: Vec<f64> = eig.eigenvalues.to_vec();
                    let edge = levels[(dim as f64 * 0.2) as usize];
                    let top = levels[(dim as f64 * 0.8) as usize];
                    level_statistics(&levels, (edge, top)).map_err(|e| e.to_string())?
                }
                "haldane" => {
                    let n = config.param("n1", 12.0) as usize;
                    let pattern = shared(build_honeycomb(n, n).map_err(|e| e.to_string())?);
                    let xi = sample_disorder(&pattern, tseed);
                    let h = build_haldane(&pattern, config.param("t2", 0.6), config.param("w", 4.0), &xi)
                        .map_err(|e| e.to_string())?;
                    let eig = diagonalize(&h).map_err(|e| e.to_string())?;
                    let levels: Vec<f64> = eig.eigenvalues.to_vec();
                    let lo = config.param("window_min", -1.5);
                    let hi = config.param("window_max", 1.5);
                    level_statistics(&levels, (lo, hi)).map_err(|e| e.to_string())?
                }
                other => return Err(format!("unknown source {other}")),
            };
            let mut diag = BTreeMap::new();
            diag.insert("mean_gap_ratio".into(), json!(stats.mean_gap_ratio));
            diag.insert("levels_used".into(), json!(stats.levels_used));
            diag.insert("source".into(), json!(source));
            Ok(TaskOutput {
                value: Complex64::new(stats.spacing_variance, 0.0),
                quantized: stats.spacing_variance.round() as i64,
                deviation: 0.0,
                diagnostics: diag,
            })
        }
    }
}
