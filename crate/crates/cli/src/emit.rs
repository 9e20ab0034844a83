//! CSV emission: 17 significant digits, comma separator, LF line endings,
//! deterministic row order.

use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use serde::Deserialize;

use potint::matcore::CMat;
use potint::mvf::Mvf;

/// Full double precision: one digit before the point, sixteen after.
pub fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut buf = String::new();
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(buf.as_bytes())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    std::fs::write(path, text)
}

/// Polar evaluation grid. Defaults cover radii up to 0.9 and a full turn.
#[derive(Clone, Debug, Deserialize)]
pub struct GridSpec {
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_num_angles")]
    pub num_angles: usize,
}

fn default_radii() -> Vec<f64> {
    (1..=9).map(|j| 0.1 * j as f64).collect()
}

fn default_num_angles() -> usize {
    16
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            radii: default_radii(),
            num_angles: default_num_angles(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), potint::Error> {
        if self.radii.is_empty() || self.num_angles == 0 {
            return Err(potint::Error::MalformedSpec("empty evaluation grid".into()));
        }
        if self.radii.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(potint::Error::MalformedSpec(
                "grid radii must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let tau = 2.0 * std::f64::consts::PI;
        let mut pts = Vec::with_capacity(self.radii.len() * self.num_angles);
        for &r in &self.radii {
            for m in 0..self.num_angles {
                pts.push((r, tau * m as f64 / self.num_angles as f64));
            }
        }
        pts
    }
}

fn max_threads() -> usize {
    std::env::var("TOOL_MAX_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn grid_row(r: f64, phi: f64, value: &CMat) -> Vec<String> {
    let n = value.dim();
    let mut row = vec![fmt(r), fmt(phi)];
    for i in 0..n {
        for j in 0..n {
            let e = value.entry(i, j);
            row.push(fmt(e.re));
            row.push(fmt(e.im));
        }
    }
    let gram_defect = value
        .mul(&value.adjoint())
        .sub(&CMat::identity(n))
        .spectral_norm();
    row.push(fmt(value.spectral_norm()));
    row.push(fmt(gram_defect));
    row.push(fmt(value.det().norm()));
    row
}

/// One row per grid point: r, φ, entries (re/im interleaved), ‖A‖,
/// ‖AA* − I‖, |det|. Rows are computed in parallel (capped by
/// `TOOL_MAX_THREADS`) but always written in grid order.
pub fn emit_grid(a: &Mvf, grid: &GridSpec, path: &Path) -> std::io::Result<()> {
    let n = a.dim();
    let mut header: Vec<String> = vec!["r".into(), "phi".into()];
    for i in 0..n {
        for j in 0..n {
            header.push(format!("a{i}{j}_re"));
            header.push(format!("a{i}{j}_im"));
        }
    }
    header.extend(["norm".into(), "gram_defect".into(), "abs_det".into()]);

    let pts = grid.points();
    let threads = max_threads().min(pts.len()).max(1);
    let rows: Vec<Vec<String>> = if threads == 1 {
        pts.iter()
            .map(|&(r, phi)| grid_row(r, phi, &a.eval(Complex::from_polar(r, phi))))
            .collect()
    } else {
        let mut rows: Vec<Option<Vec<String>>> = vec![None; pts.len()];
        let chunk = pts.len().div_ceil(threads);
        std::thread::scope(|s| {
            for (slot, coords) in rows.chunks_mut(chunk).zip(pts.chunks(chunk)) {
                s.spawn(move || {
                    for (out, &(r, phi)) in slot.iter_mut().zip(coords) {
                        *out = Some(grid_row(r, phi, &a.eval(Complex::from_polar(r, phi))));
                    }
                });
            }
        });
        rows.into_iter().map(|r| r.expect("row computed")).collect()
    };

    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(path, &header_refs, &rows)
}
