//! Finite Delone point patterns and their geometries.
//!
//! A pattern is a finite set of points together with either a periodic torus
//! geometry (spanned by explicit lattice vectors) or an open patch with a
//! known extent (disk or box). Patterns carry the `(r, R)` Delone constants,
//! a density normalized to one point per unit volume, and, for periodic
//! lattices, integer cell coordinates used by the roots-of-unity derivation.

use ndarray::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("packing infeasible: {0}")]
    PackingInfeasible(String),
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
}

/// Extent of an open patch, centered at the origin for disks and anchored at
/// the origin corner for boxes.
#[derive(Clone, Debug, PartialEq)]
pub enum Extent {
    Disk { radius: f64 },
    Box { lengths: Vec<f64> },
}

impl Extent {
    pub fn volume(&self) -> f64 {
        match self {
            Extent::Disk { radius } => std::f64::consts::PI * radius * radius,
            Extent::Box { lengths } => lengths.iter().product(),
        }
    }

    /// Distance from `x` to the patch boundary (negative outside).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Extent::Disk { radius } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                radius - r
            }
            Extent::Box { lengths } => {
                let mut d = f64::INFINITY;
                for (xi, li) in x.iter().zip(lengths) {
                    d = d.min(*xi).min(li - xi);
                }
                d
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Geometry {
    /// Periodic torus spanned by the columns of `basis` (d x d).
    Torus { basis: Array2<f64> },
    /// Open patch with an explicit extent.
    Open { extent: Extent },
}

impl Geometry {
    pub fn dimension(&self) -> usize {
        match self {
            Geometry::Torus { basis } => basis.nrows(),
            Geometry::Open { extent } => match extent {
                Extent::Disk { .. } => 2,
                Extent::Box { lengths } => lengths.len(),
            },
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Geometry::Torus { .. })
    }

    pub fn volume(&self) -> f64 {
        match self {
            Geometry::Torus { basis } => det_abs(basis),
            Geometry::Open { extent } => extent.volume(),
        }
    }

    /// Rectangular torus with the given side lengths.
    pub fn rectangular_torus(cell_lengths: &[f64]) -> Self {
        let d = cell_lengths.len();
        let mut basis = Array2::<f64>::zeros((d, d));
        for j in 0..d {
            basis[[j, j]] = cell_lengths[j];
        }
        Geometry::Torus { basis }
    }
}

fn det_abs(b: &Array2<f64>) -> f64 {
    match b.nrows() {
        1 => b[[0, 0]].abs(),
        2 => (b[[0, 0]] * b[[1, 1]] - b[[0, 1]] * b[[1, 0]]).abs(),
        n => panic!("unsupported torus dimension {n}"),
    }
}

/// Precomputed minimal-image reducer for a geometry.
///
/// On a torus the displacement is the shortest representative of
/// `to - from` modulo the lattice; for rectangular tori each component is
/// reduced independently into `[-C_j/2, C_j/2)`, for oblique tori the basis
/// is Lagrange-reduced first and the nearest lattice point is found among the
/// rounded candidates. Open geometry returns the plain difference.
#[derive(Clone, Debug)]
pub struct MinImage {
    mode: MinImageMode,
}

#[derive(Clone, Debug)]
enum MinImageMode {
    Open,
    Rect { lengths: Vec<f64> },
    Oblique { reduced: Array2<f64>, inv: Array2<f64> },
}

impl MinImage {
    pub fn new(geometry: &Geometry) -> Self {
        match geometry {
            Geometry::Open { .. } => MinImage { mode: MinImageMode::Open },
            Geometry::Torus { basis } => {
                let d = basis.nrows();
                let mut rectangular = true;
                for i in 0..d {
                    for j in 0..d {
                        if i != j && basis[[i, j]] != 0.0 {
                            rectangular = false;
                        }
                    }
                }
                if rectangular {
                    let lengths = (0..d).map(|j| basis[[j, j]].abs()).collect();
                    MinImage { mode: MinImageMode::Rect { lengths } }
                } else {
                    assert_eq!(d, 2, "oblique tori implemented for d = 2");
                    let reduced = gauss_reduce(basis);
                    let inv = inv2(&reduced);
                    MinImage { mode: MinImageMode::Oblique { reduced, inv } }
                }
            }
        }
    }

    pub fn displacement(&self, from: &[f64], to: &[f64], out: &mut [f64]) {
        for ((o, f), t) in out.iter_mut().zip(from).zip(to) {
            *o = t - f;
        }
        match &self.mode {
            MinImageMode::Open => {}
            MinImageMode::Rect { lengths } => {
                for (o, l) in out.iter_mut().zip(lengths) {
                    // reduce into [-l/2, l/2)
                    *o -= l * (*o / l + 0.5).floor();
                }
            }
            MinImageMode::Oblique { reduced, inv } => {
                let f0 = inv[[0, 0]] * out[0] + inv[[0, 1]] * out[1];
                let f1 = inv[[1, 0]] * out[0] + inv[[1, 1]] * out[1];
                let g0 = f0 - f0.round();
                let g1 = f1 - f1.round();
                let v0 = [
                    reduced[[0, 0]] * g0 + reduced[[0, 1]] * g1,
                    reduced[[1, 0]] * g0 + reduced[[1, 1]] * g1,
                ];
                let mut best = [f64::INFINITY, 0.0];
                let mut best_n = f64::INFINITY;
                for ki in -1i32..=1 {
                    for kj in -1i32..=1 {
                        let c = [
                            v0[0] + ki as f64 * reduced[[0, 0]] + kj as f64 * reduced[[0, 1]],
                            v0[1] + ki as f64 * reduced[[1, 0]] + kj as f64 * reduced[[1, 1]],
                        ];
                        let n = c[0] * c[0] + c[1] * c[1];
                        // deterministic tie-break on exact float ordering
                        if n < best_n
                            || (n == best_n && (c[0], c[1]) < (best[0], best[1]))
                        {
                            best_n = n;
                            best = c;
                        }
                    }
                }
                out[0] = best[0];
                out[1] = best[1];
            }
        }
    }

    pub fn distance(&self, from: &[f64], to: &[f64]) -> f64 {
        let mut buf = [0.0f64; 4];
        let d = from.len();
        self.displacement(from, to, &mut buf[..d]);
        buf[..d].iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Lagrange-Gauss reduction of a 2D lattice basis (columns). Stops when the
/// size-reduction step no longer shrinks the longer vector, which also
/// covers the boundary case `|u·v| = |u|²/2` (e.g. hexagonal bases).
fn gauss_reduce(basis: &Array2<f64>) -> Array2<f64> {
    let mut u = [basis[[0, 0]], basis[[1, 0]]];
    let mut v = [basis[[0, 1]], basis[[1, 1]]];
    loop {
        let nu = u[0] * u[0] + u[1] * u[1];
        let nv = v[0] * v[0] + v[1] * v[1];
        if nu > nv {
            std::mem::swap(&mut u, &mut v);
            continue;
        }
        let mu = ((u[0] * v[0] + u[1] * v[1]) / nu).round();
        if mu == 0.0 {
            break;
        }
        let w = [v[0] - mu * u[0], v[1] - mu * u[1]];
        if w[0] * w[0] + w[1] * w[1] >= nv {
            break;
        }
        v = w;
    }
    array![[u[0], v[0]], [u[1], v[1]]]
}

fn inv2(b: &Array2<f64>) -> Array2<f64> {
    let det = b[[0, 0]] * b[[1, 1]] - b[[0, 1]] * b[[1, 0]];
    array![
        [b[[1, 1]] / det, -b[[0, 1]] / det],
        [-b[[1, 0]] / det, b[[0, 0]] / det]
    ]
}

/// A finite Delone patch.
#[derive(Clone, Debug)]
pub struct PointPattern {
    pub geometry: Geometry,
    /// n x d site positions.
    pub positions: Array2<f64>,
    /// Packing radius: all pairwise distances are >= r.
    pub r: f64,
    /// Covering radius: every point of the domain has a site within R.
    pub covering_radius: f64,
    /// Points per unit volume (normalized to 1 by the builders).
    pub density: f64,
    pub seed: Option<u64>,
    /// Integer lattice coordinates per site (periodic lattices only).
    pub cells: Option<Array2<i64>>,
    /// Periods of the integer coordinates, e.g. (n1, n2).
    pub cell_periods: Option<Vec<usize>>,
    /// Two-site unit-cell tag (honeycomb only): 0 = A, 1 = B.
    pub sublattice: Option<Vec<u8>>,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.positions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.geometry.dimension()
    }

    pub fn min_image(&self) -> MinImage {
        MinImage::new(&self.geometry)
    }

    pub fn position(&self, i: usize) -> Vec<f64> {
        self.positions.row(i).to_vec()
    }

    /// Minimal-image displacement from site `i` to site `j`.
    pub fn minimal_displacement(&self, i: usize, j: usize) -> Vec<f64> {
        let mi = self.min_image();
        let mut out = vec![0.0; self.dim()];
        mi.displacement(
            self.positions.row(i).as_slice().unwrap(),
            self.positions.row(j).as_slice().unwrap(),
            &mut out,
        );
        out
    }

    /// Sites whose distance to the patch boundary exceeds `collar`.
    /// On a torus every site qualifies.
    pub fn window_sites(&self, collar: f64) -> Vec<usize> {
        match &self.geometry {
            Geometry::Torus { .. } => (0..self.len()).collect(),
            Geometry::Open { extent } => (0..self.len())
                .filter(|&i| {
                    extent.boundary_distance(self.positions.row(i).as_slice().unwrap()) > collar
                })
                .collect(),
        }
    }

    /// All-pairs minimal-image distance scan; returns the smallest distance.
    pub fn min_pair_distance(&self) -> f64 {
        let mi = self.min_image();
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = mi.distance(
                    self.positions.row(i).as_slice().unwrap(),
                    self.positions.row(j).as_slice().unwrap(),
                );
                best = best.min(d);
            }
        }
        best
    }

    /// Largest probe-to-nearest-site distance over a grid of the stated
    /// spacing. With spacing `<= R/4` this certifies `R`-relative density;
    /// builders store this value plus half a grid-cell diagonal as a
    /// rigorous upper bound on the true covering radius.
    pub fn covering_radius_scan(&self, spacing: f64) -> f64 {
        let mi = self.min_image();
        let probes = self.probe_grid(spacing);
        let mut worst = 0.0f64;
        for p in probes.rows() {
            let mut nearest = f64::INFINITY;
            for x in self.positions.rows() {
                let dist = mi.distance(p.as_slice().unwrap(), x.as_slice().unwrap());
                nearest = nearest.min(dist);
                if nearest < worst {
                    break;
                }
            }
            worst = worst.max(nearest);
        }
        worst
    }

    fn probe_grid(&self, spacing: f64) -> Array2<f64> {
        let d = self.dim();
        match &self.geometry {
            Geometry::Torus { basis } => {
                let counts: Vec<usize> = (0..d)
                    .map(|j| {
                        let len = basis.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
                        ((len / spacing).ceil() as usize).max(1)
                    })
                    .collect();
                let mut rows = Vec::new();
                let mut idx = vec![0usize; d];
                loop {
                    let frac: Vec<f64> =
                        (0..d).map(|j| idx[j] as f64 / counts[j] as f64).collect();
                    let mut x = vec![0.0; d];
                    for (i, xi) in x.iter_mut().enumerate() {
                        for j in 0..d {
                            *xi += basis[[i, j]] * frac[j];
                        }
                    }
                    rows.extend_from_slice(&x);
                    // odometer increment
                    let mut k = 0;
                    loop {
                        idx[k] += 1;
                        if idx[k] < counts[k] {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                        if k == d {
                            let n = rows.len() / d;
                            return Array2::from_shape_vec((n, d), rows).unwrap();
                        }
                    }
                }
            }
            Geometry::Open { extent } => match extent {
                Extent::Box { lengths } => {
                    let counts: Vec<usize> = lengths
                        .iter()
                        .map(|l| ((l / spacing).ceil() as usize).max(1))
                        .collect();
                    let mut rows = Vec::new();
                    let mut idx = vec![0usize; d];
                    loop {
                        for (j, l) in lengths.iter().enumerate() {
                            rows.push((idx[j] as f64 + 0.5) / counts[j] as f64 * l);
                        }
                        let mut k = 0;
                        loop {
                            idx[k] += 1;
                            if idx[k] < counts[k] {
                                break;
                            }
                            idx[k] = 0;
                            k += 1;
                            if k == d {
                                let n = rows.len() / d;
                                return Array2::from_shape_vec((n, d), rows).unwrap();
                            }
                        }
                    }
                }
                Extent::Disk { radius } => {
                    let m = ((2.0 * radius / spacing).ceil() as usize).max(1);
                    let mut rows = Vec::new();
                    for i in 0..m {
                        for j in 0..m {
                            let x = -radius + (i as f64 + 0.5) / m as f64 * 2.0 * radius;
                            let y = -radius + (j as f64 + 0.5) / m as f64 * 2.0 * radius;
                            if x * x + y * y <= radius * radius {
                                rows.push(x);
                                rows.push(y);
                            }
                        }
                    }
                    let n = rows.len() / 2;
                    Array2::from_shape_vec((n, 2), rows).unwrap()
                }
            },
        }
    }

    /// Plain-text serialization: `#`-prefixed header lines carrying the
    /// geometry, (r, R), density and seed, then one row per site:
    /// `site_index x1 ... xd [cell_1 cell_2 sublattice]`.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let d = self.dim();
        s.push_str("# nci-pattern v1\n");
        match &self.geometry {
            Geometry::Torus { basis } => {
                s.push_str("# geometry torus\n");
                write!(s, "# dimension {d}\n# basis").unwrap();
                for j in 0..d {
                    for i in 0..d {
                        write!(s, " {:.17e}", basis[[i, j]]).unwrap();
                    }
                }
                s.push('\n');
            }
            Geometry::Open { extent } => {
                s.push_str("# geometry open\n");
                writeln!(s, "# dimension {d}").unwrap();
                match extent {
                    Extent::Disk { radius } => writeln!(s, "# extent disk {radius:.17e}").unwrap(),
                    Extent::Box { lengths } => {
                        write!(s, "# extent box").unwrap();
                        for l in lengths {
                            write!(s, " {l:.17e}").unwrap();
                        }
                        s.push('\n');
                    }
                }
            }
        }
        writeln!(s, "# r {:.17e}", self.r).unwrap();
        writeln!(s, "# R {:.17e}", self.covering_radius).unwrap();
        writeln!(s, "# density {:.17e}", self.density).unwrap();
        if let Some(seed) = self.seed {
            writeln!(s, "# seed {seed}").unwrap();
        }
        if let Some(p) = &self.cell_periods {
            write!(s, "# periods").unwrap();
            for v in p {
                write!(s, " {v}").unwrap();
            }
            s.push('\n');
        }
        let with_cells = self.cells.is_some();
        let with_sub = self.sublattice.is_some();
        for i in 0..self.len() {
            write!(s, "{i}").unwrap();
            for j in 0..d {
                write!(s, " {:.17e}", self.positions[[i, j]]).unwrap();
            }
            if with_cells {
                let c = self.cells.as_ref().unwrap();
                for j in 0..d {
                    write!(s, " {}", c[[i, j]]).unwrap();
                }
            }
            if with_sub {
                write!(s, " {}", self.sublattice.as_ref().unwrap()[i]).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_table(text: &str) -> Result<PointPattern, PatternError> {
        let mut dim = 0usize;
        let mut kind = String::new();
        let mut basis: Option<Vec<f64>> = None;
        let mut extent: Option<Extent> = None;
        let mut r = 0.0;
        let mut cov = 0.0;
        let mut density = 1.0;
        let mut seed = None;
        let mut periods: Option<Vec<usize>> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| PatternError::ParseError { line: ln + 1, msg: msg.into() };
            if let Some(rest) = line.strip_prefix('#') {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                match toks.first().copied() {
                    Some("geometry") => kind = toks[1].to_string(),
                    Some("dimension") => {
                        dim = toks[1].parse().map_err(|_| err("bad dimension"))?
                    }
                    Some("basis") => {
                        basis = Some(
                            toks[1..]
                                .iter()
                                .map(|t| t.parse::<f64>())
                                .collect::<Result<_, _>>()
                                .map_err(|_| err("bad basis"))?,
                        )
                    }
                    Some("extent") => {
                        extent = Some(match toks[1] {
                            "disk" => Extent::Disk {
                                radius: toks[2].parse().map_err(|_| err("bad radius"))?,
                            },
                            "box" => Extent::Box {
                                lengths: toks[2..]
                                    .iter()
                                    .map(|t| t.parse::<f64>())
                                    .collect::<Result<_, _>>()
                                    .map_err(|_| err("bad box"))?,
                            },
                            other => return Err(err(&format!("unknown extent {other}"))),
                        })
                    }
                    Some("r") => r = toks[1].parse().map_err(|_| err("bad r"))?,
                    Some("R") => cov = toks[1].parse().map_err(|_| err("bad R"))?,
                    Some("density") => {
                        density = toks[1].parse().map_err(|_| err("bad density"))?
                    }
                    Some("seed") => seed = Some(toks[1].parse().map_err(|_| err("bad seed"))?),
                    Some("periods") => {
                        periods = Some(
                            toks[1..]
                                .iter()
                                .map(|t| t.parse::<usize>())
                                .collect::<Result<_, _>>()
                                .map_err(|_| err("bad periods"))?,
                        )
                    }
                    _ => {}
                }
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| err("bad data row"))?;
            rows.push(vals);
        }
        if dim == 0 {
            return Err(PatternError::ParseError { line: 0, msg: "missing dimension".into() });
        }
        let geometry = match kind.as_str() {
            "torus" => {
                let b = basis.ok_or(PatternError::ParseError {
                    line: 0,
                    msg: "missing basis".into(),
                })?;
                let mut m = Array2::<f64>::zeros((dim, dim));
                for j in 0..dim {
                    for i in 0..dim {
                        m[[i, j]] = b[j * dim + i];
                    }
                }
                Geometry::Torus { basis: m }
            }
            "open" => Geometry::Open {
                extent: extent.ok_or(PatternError::ParseError {
                    line: 0,
                    msg: "missing extent".into(),
                })?,
            },
            other => {
                return Err(PatternError::ParseError {
                    line: 0,
                    msg: format!("unknown geometry {other}"),
                })
            }
        };
        let n = rows.len();
        let ncols = rows.first().map(|r| r.len()).unwrap_or(dim + 1);
        let with_cells = ncols >= 1 + dim + dim;
        let with_sub = ncols == 1 + dim + dim + 1 || ncols == 1 + dim + 1;
        let mut positions = Array2::<f64>::zeros((n, dim));
        let mut cells = if with_cells { Some(Array2::<i64>::zeros((n, dim))) } else { None };
        let mut sub = if with_sub { Some(vec![0u8; n]) } else { None };
        for row in &rows {
            let i = row[0] as usize;
            for j in 0..dim {
                positions[[i, j]] = row[1 + j];
            }
            if with_cells {
                for j in 0..dim {
                    cells.as_mut().unwrap()[[i, j]] = row[1 + dim + j] as i64;
                }
            }
            if with_sub {
                sub.as_mut().unwrap()[i] = *row.last().unwrap() as u8;
            }
        }
        Ok(PointPattern {
            geometry,
            positions,
            r,
            covering_radius: cov,
            density,
            seed,
            cells,
            cell_periods: periods,
            sublattice: sub,
        })
    }
}

/// Uniform on-site disorder, one value in [-1/2, 1/2) per site.
/// Regeneration from the same seed is bit-exact.
#[derive(Clone, Debug)]
pub struct DisorderField {
    pub values: Vec<f64>,
    pub seed: u64,
}

pub fn sample_disorder(pattern: &PointPattern, seed: u64) -> DisorderField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..pattern.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
    DisorderField { values, seed }
}

/// Nearest-neighbor distance of the unit-density honeycomb lattice:
/// the two-site cell has area `(3√3/2) t² = 2`.
pub fn honeycomb_spacing() -> f64 {
    (4.0 / (3.0 * 3.0f64.sqrt())).sqrt()
}

/// Bravais vectors `(a1, a2)` and the B-sublattice offset of the
/// unit-density honeycomb.
pub fn honeycomb_vectors() -> ([f64; 2], [f64; 2], [f64; 2]) {
    let t = honeycomb_spacing();
    let a1 = [3.0f64.sqrt() * t, 0.0];
    let a2 = [3.0f64.sqrt() * t / 2.0, 1.5 * t];
    let delta_b = [(a1[0] + a2[0]) / 3.0, (a1[1] + a2[1]) / 3.0];
    (a1, a2, delta_b)
}

/// Periodic honeycomb patch with `n1 x n2` two-site cells on the torus
/// spanned by `n1 a1, n2 a2`. Sites are ordered cell-major with the A
/// sublattice first inside each cell, so `site = 2 (c1 n2 + c2) + s`.
pub fn build_honeycomb(n1: usize, n2: usize) -> Result<PointPattern, PatternError> {
    if n1 < 2 || n2 < 2 {
        return Err(PatternError::InvalidParameter("honeycomb needs n1, n2 >= 2".into()));
    }
    let t = honeycomb_spacing();
    let (a1, a2, delta_b) = honeycomb_vectors();
    let n = 2 * n1 * n2;
    let mut positions = Array2::<f64>::zeros((n, 2));
    let mut cells = Array2::<i64>::zeros((n, 2));
    let mut sub = vec![0u8; n];
    for c1 in 0..n1 {
        for c2 in 0..n2 {
            let base = [
                c1 as f64 * a1[0] + c2 as f64 * a2[0],
                c1 as f64 * a1[1] + c2 as f64 * a2[1],
            ];
            for s in 0..2usize {
                let i = 2 * (c1 * n2 + c2) + s;
                positions[[i, 0]] = base[0] + if s == 1 { delta_b[0] } else { 0.0 };
                positions[[i, 1]] = base[1] + if s == 1 { delta_b[1] } else { 0.0 };
                cells[[i, 0]] = c1 as i64;
                cells[[i, 1]] = c2 as i64;
                sub[i] = s as u8;
            }
        }
    }
    let basis = array![
        [n1 as f64 * a1[0], n2 as f64 * a2[0]],
        [n1 as f64 * a1[1], n2 as f64 * a2[1]]
    ];
    let geometry = Geometry::Torus { basis };
    let volume = geometry.volume();
    Ok(PointPattern {
        geometry,
        positions,
        r: t,
        // the hexagon center sits exactly one bond length from its vertices
        covering_radius: t * (1.0 + 1e-12),
        density: n as f64 / volume,
        seed: None,
        cells: Some(cells),
        cell_periods: Some(vec![n1, n2]),
        sublattice: Some(sub),
    })
}

/// Periodic chain of `n` points with spacing 1.
pub fn build_chain(n: usize) -> Result<PointPattern, PatternError> {
    if n < 2 {
        return Err(PatternError::InvalidParameter("chain needs n >= 2".into()));
    }
    let positions = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
    let cells = Array2::from_shape_fn((n, 1), |(i, _)| i as i64);
    Ok(PointPattern {
        geometry: Geometry::Torus { basis: array![[n as f64]] },
        positions,
        r: 1.0,
        covering_radius: 0.5 * (1.0 + 1e-12),
        density: 1.0,
        seed: None,
        cells: Some(cells),
        cell_periods: Some(vec![n]),
        sublattice: None,
    })
}

/// Square lattice with spacing 1 and a uniform random offset, on the torus.
/// Used by the ensemble averages of the geometric identity.
pub fn build_square_offset(n: usize, seed: u64) -> Result<PointPattern, PatternError> {
    if n < 2 {
        return Err(PatternError::InvalidParameter("square lattice needs n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let off = [rng.gen::<f64>(), rng.gen::<f64>()];
    let mut positions = Array2::<f64>::zeros((n * n, 2));
    let mut cells = Array2::<i64>::zeros((n * n, 2));
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            positions[[k, 0]] = i as f64 + off[0];
            positions[[k, 1]] = j as f64 + off[1];
            cells[[k, 0]] = i as i64;
            cells[[k, 1]] = j as i64;
        }
    }
    Ok(PointPattern {
        geometry: Geometry::rectangular_torus(&[n as f64, n as f64]),
        positions,
        r: 1.0,
        covering_radius: 0.5 * 2.0f64.sqrt() * (1.0 + 1e-12),
        density: 1.0,
        seed: Some(seed),
        cells: Some(cells),
        cell_periods: Some(vec![n, n]),
        sublattice: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmorphousGeometry {
    Torus,
    Open,
}

/// Amorphous Delone patch by random sequential adsorption at unit density:
/// uniform proposals in a square box of area `target_count`, accepted when at
/// least `r_min` away from every accepted point. Deterministic in `seed`.
pub fn build_amorphous(
    target_count: usize,
    r_min: f64,
    seed: u64,
    kind: AmorphousGeometry,
) -> Result<PointPattern, PatternError> {
    if r_min <= 0.0 {
        return Err(PatternError::InvalidParameter("r_min must be positive".into()));
    }
    if target_count == 0 {
        return Err(PatternError::InvalidParameter("target_count must be positive".into()));
    }
    // hard-disk RSA saturates near packing fraction 0.547; refuse anything
    // close to it up front
    let packing_fraction = std::f64::consts::PI * r_min * r_min / 4.0;
    if packing_fraction > 0.52 {
        return Err(PatternError::PackingInfeasible(format!(
            "requested packing fraction {packing_fraction:.3} exceeds the RSA limit"
        )));
    }
    let side = (target_count as f64).sqrt();
    let geometry = match kind {
        AmorphousGeometry::Torus => Geometry::rectangular_torus(&[side, side]),
        AmorphousGeometry::Open => Geometry::Open { extent: Extent::Box { lengths: vec![side, side] } },
    };
    let mi = MinImage::new(&geometry);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted: Vec<[f64; 2]> = Vec::with_capacity(target_count);
    let mut rejections = 0usize;
    while accepted.len() < target_count {
        let p = [rng.gen::<f64>() * side, rng.gen::<f64>() * side];
        let ok = accepted.iter().all(|q| mi.distance(q, &p) >= r_min);
        if ok {
            accepted.push(p);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections > 1_000_000 {
                return Err(PatternError::PackingInfeasible(format!(
                    "acceptance stalled after {} points",
                    accepted.len()
                )));
            }
        }
    }
    let mut positions = Array2::<f64>::zeros((target_count, 2));
    for (i, p) in accepted.iter().enumerate() {
        positions[[i, 0]] = p[0];
        positions[[i, 1]] = p[1];
    }
    let mut pattern = PointPattern {
        geometry,
        positions,
        r: r_min,
        covering_radius: 0.0,
        density: 1.0,
        seed: Some(seed),
        cells: None,
        cell_periods: None,
        sublattice: None,
    };
    // empirical covering radius: coarse scan, then refine to spacing <= R/4
    // and pad by the final half grid diagonal for a rigorous upper bound
    let coarse = pattern.covering_radius_scan(side / 32.0).max(1e-3);
    let spacing = coarse / 4.0;
    let fine = pattern.covering_radius_scan(spacing);
    pattern.covering_radius = fine + 0.5 * spacing * 2.0f64.sqrt();
    Ok(pattern)
}

/// Open disk patch cut out of a torus pattern around `center`; positions are
/// re-centered so the disk sits at the origin. Cell coordinates and
/// sublattice tags survive the cut, periods do not.
pub fn cut_disk(
    pattern: &PointPattern,
    center: &[f64],
    radius: f64,
) -> Result<PointPattern, PatternError> {
    if radius <= 0.0 {
        return Err(PatternError::InvalidParameter("radius must be positive".into()));
    }
    let mi = pattern.min_image();
    let d = pattern.dim();
    let mut keep = Vec::new();
    let mut disp = vec![0.0; d];
    for i in 0..pattern.len() {
        mi.displacement(center, pattern.positions.row(i).as_slice().unwrap(), &mut disp);
        let dist = disp.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dist <= radius {
            keep.push((i, disp.clone()));
        }
    }
    if keep.is_empty() {
        return Err(PatternError::InvalidParameter("disk contains no sites".into()));
    }
    let n = keep.len();
    let mut positions = Array2::<f64>::zeros((n, d));
    let mut cells = pattern.cells.as_ref().map(|_| Array2::<i64>::zeros((n, d)));
    let mut sub = pattern.sublattice.as_ref().map(|_| vec![0u8; n]);
    for (new_i, (old_i, dvec)) in keep.iter().enumerate() {
        for j in 0..d {
            positions[[new_i, j]] = dvec[j];
        }
        if let (Some(c_new), Some(c_old)) = (&mut cells, &pattern.cells) {
            for j in 0..d {
                c_new[[new_i, j]] = c_old[[*old_i, j]];
            }
        }
        if let (Some(s_new), Some(s_old)) = (&mut sub, &pattern.sublattice) {
            s_new[new_i] = s_old[*old_i];
        }
    }
    let mut out = PointPattern {
        geometry: Geometry::Open { extent: Extent::Disk { radius } },
        positions,
        r: pattern.r,
        covering_radius: 0.0,
        density: n as f64 / (std::f64::consts::PI * radius * radius),
        seed: pattern.seed,
        cells,
        cell_periods: None,
        sublattice: sub,
    };
    let est = out
        .covering_radius_scan(pattern.covering_radius.max(pattern.r) / 2.0)
        .max(1e-3);
    let spacing = est / 4.0;
    out.covering_radius =
        out.covering_radius_scan(spacing) + 0.5 * spacing * 2.0f64.sqrt();
    Ok(out)
}

/// Convenience: an `Arc`-wrapped pattern, the form consumed by model builders.
pub fn shared(pattern: PointPattern) -> Arc<PointPattern> {
    Arc::new(pattern)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honeycomb_counts_and_coordination() {
        let p = build_honeycomb(2, 2).unwrap();
        assert_eq!(p.len(), 8);
        let mi = p.min_image();
        let t = honeycomb_spacing();
        for i in 0..p.len() {
            let mut nn = 0;
            for j in 0..p.len() {
                if i == j {
                    continue;
                }
                let d = mi.distance(
                    p.positions.row(i).as_slice().unwrap(),
                    p.positions.row(j).as_slice().unwrap(),
                );
                if (d - t).abs() < 1e-9 {
                    nn += 1;
                }
            }
            assert_eq!(nn, 3, "site {i} has {nn} nearest neighbors");
        }
    }

    #[test]
    fn honeycomb_min_distance_is_bond_length() {
        let p = build_honeycomb(4, 4).unwrap();
        assert_eq!(p.len(), 32);
        let t = honeycomb_spacing();
        assert!((p.min_pair_distance() - t).abs() < 1e-12);
    }

    #[test]
    fn honeycomb_delone_constants_via_scans() {
        let p = build_honeycomb(6, 6).unwrap();
        let dmin = p.min_pair_distance();
        assert!(dmin >= p.r - 1e-12);
        let cov = p.covering_radius_scan(p.covering_radius / 4.0);
        assert!(
            cov <= p.covering_radius + 1e-9,
            "measured covering {cov} vs stored {}",
            p.covering_radius
        );
    }

    #[test]
    fn honeycomb_density_is_one() {
        for (n1, n2) in [(2, 2), (4, 4), (5, 3)] {
            let p = build_honeycomb(n1, n2).unwrap();
            let density = p.len() as f64 / p.geometry.volume();
            assert!((density - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_positions_and_wrap() {
        let p = build_chain(4).unwrap();
        assert_eq!(p.position(3), vec![3.0]);
        // 0 -> 3 wraps to +... the minimal image of +3 on a ring of 4 is -1,
        // so 3 -> 0 is +1
        assert_eq!(p.minimal_displacement(3, 0), vec![1.0]);
        assert_eq!(p.minimal_displacement(0, 3), vec![-1.0]);
        let p2 = build_chain(2).unwrap();
        let d = p2.minimal_displacement(0, 1)[0];
        assert!((d.abs() - 1.0).abs() < 1e-15);
        let p100 = build_chain(100).unwrap();
        assert!((p100.density - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minimal_displacement_zero_and_open() {
        let p = build_chain(5).unwrap();
        assert_eq!(p.minimal_displacement(2, 2), vec![0.0]);
        let open = PointPattern {
            geometry: Geometry::Open { extent: Extent::Box { lengths: vec![3.0, 2.0] } },
            positions: array![[2.0, 0.0], [0.0, 1.0]],
            r: 1.0,
            covering_radius: 2.0,
            density: 2.0 / 6.0,
            seed: None,
            cells: None,
            cell_periods: None,
            sublattice: None,
        };
        assert_eq!(open.minimal_displacement(1, 0), vec![2.0, -1.0]);
    }

    #[test]
    fn disorder_bounds_and_determinism() {
        let p = build_chain(64).unwrap();
        let f1 = sample_disorder(&p, 7);
        let f2 = sample_disorder(&p, 7);
        assert_eq!(f1.values, f2.values);
        assert!(f1.values.iter().all(|v| (-0.5..0.5).contains(v)));
        let f3 = sample_disorder(&p, 8);
        assert_ne!(f1.values, f3.values);
    }

    #[test]
    fn disorder_mean_matches_uniform_moments() {
        let p = build_chain(1000).unwrap();
        let mut sum = 0.0;
        for seed in 0..1000u64 {
            sum += sample_disorder(&p, seed).values.iter().sum::<f64>();
        }
        let mean = sum / 1e6;
        let bound = 3.0 * (1.0 / 12.0f64.sqrt()) / 1e3;
        assert!(mean.abs() < bound, "mean {mean} exceeds 3 sigma {bound}");
    }

    #[test]
    fn rsa_is_delone_and_deterministic() {
        let a = build_amorphous(200, 0.5, 11, AmorphousGeometry::Torus).unwrap();
        let b = build_amorphous(200, 0.5, 11, AmorphousGeometry::Torus).unwrap();
        assert_eq!(a.positions, b.positions);
        assert!(a.min_pair_distance() >= 0.5);
        assert!((a.len() as f64 / a.geometry.volume() - 1.0).abs() < 1e-12);
        let cov = a.covering_radius_scan(a.covering_radius / 4.0);
        assert!(cov <= a.covering_radius + 1e-9);
        let c = build_amorphous(200, 0.5, 12, AmorphousGeometry::Torus).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn rsa_single_point_covering_is_half_diagonal() {
        let p = build_amorphous(1, 0.3, 3, AmorphousGeometry::Torus).unwrap();
        assert_eq!(p.len(), 1);
        let half_diag = 0.5 * 2.0f64.sqrt(); // box side 1
        let cov = p.covering_radius_scan(0.02);
        assert!(cov <= half_diag + 1e-12, "covering {cov} vs half diagonal {half_diag}");
        assert!(cov > half_diag - 0.05);
        // stored R is a valid upper bound
        assert!(p.covering_radius >= cov && p.covering_radius < half_diag + 0.2);
    }

    #[test]
    fn rsa_rejects_infeasible_packing() {
        match build_amorphous(100, 1.4, 1, AmorphousGeometry::Torus) {
            Err(PatternError::PackingInfeasible(_)) => {}
            other => panic!("expected PackingInfeasible, got {other:?}"),
        }
    }

    #[test]
    fn table_round_trip() {
        let p = build_honeycomb(3, 2).unwrap();
        let text = p.to_table();
        let q = PointPattern::from_table(&text).unwrap();
        assert_eq!(p.len(), q.len());
        assert_eq!(p.cells, q.cells);
        assert_eq!(p.sublattice, q.sublattice);
        assert_eq!(p.cell_periods, q.cell_periods);
        for i in 0..p.len() {
            for j in 0..2 {
                assert!((p.positions[[i, j]] - q.positions[[i, j]]).abs() < 1e-15);
            }
        }
        let a = build_amorphous(50, 0.5, 5, AmorphousGeometry::Open).unwrap();
        let q = PointPattern::from_table(&a.to_table()).unwrap();
        assert!(matches!(q.geometry, Geometry::Open { .. }));
        assert_eq!(q.len(), 50);
    }

    #[test]
    fn cut_disk_keeps_tags_and_recenters() {
        let p = build_honeycomb(8, 8).unwrap();
        let center = [p.geometry.volume().sqrt() / 2.0, p.geometry.volume().sqrt() / 3.0];
        let disk = cut_disk(&p, &center, 3.0).unwrap();
        assert!(disk.len() > 10);
        assert!(disk.sublattice.is_some());
        for i in 0..disk.len() {
            let x = disk.position(i);
            assert!(x[0] * x[0] + x[1] * x[1] <= 9.0 + 1e-9);
        }
        // interior window shrinks with the collar
        let w0 = disk.window_sites(0.0).len();
        let w1 = disk.window_sites(1.0).len();
        assert!(w1 < w0);
    }

    #[test]
    fn oblique_min_image_agrees_with_brute_force() {
        let p = build_honeycomb(5, 3).unwrap();
        let mi = p.min_image();
        let basis = match &p.geometry {
            Geometry::Torus { basis } => basis.clone(),
            _ => unreachable!(),
        };
        let mut out = [0.0f64; 2];
        for i in (0..p.len()).step_by(3) {
            for j in (0..p.len()).step_by(5) {
                let a = p.position(i);
                let b = p.position(j);
                mi.displacement(&a, &b, &mut out);
                let got = (out[0] * out[0] + out[1] * out[1]).sqrt();
                let mut want = f64::INFINITY;
                for ki in -3i32..=3 {
                    for kj in -3i32..=3 {
                        let dx = b[0] - a[0] + ki as f64 * basis[[0, 0]] + kj as f64 * basis[[0, 1]];
                        let dy = b[1] - a[1] + ki as f64 * basis[[1, 0]] + kj as f64 * basis[[1, 1]];
                        want = want.min((dx * dx + dy * dy).sqrt());
                    }
                }
                assert!((got - want).abs() < 1e-10, "site pair ({i},{j})");
            }
        }
    }
}
