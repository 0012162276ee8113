//! File formats.
//!
//! - `TestFn`: CSV `t,re,im` plus a `<stem>.meta.json` sidecar with the grid.
//! - `Distribution`: JSON `{atoms: [{a, m, re, im}], density, truncated_mass}`
//!   where `density` is `null`, the name of one CSV holding a density
//!   starting at 0, or a list `[{offset, csv}]`.
//! - `PolyTest` / `PolyDist`: JSON manifests referencing factor files.
//! - `FreqFn`: CSV `xi,re,im`.
//! - `FockState`: one CSV per component (`xi1[,xi2[,xi3]],re,im`) and a JSON
//!   manifest `{N, L, nodes_per_axis, y0, components}`.
//!
//! Referenced files are resolved relative to the referencing file. Floats are
//! written in shortest round-trip form, so a write/read cycle is lossless.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::{Atom, Density, Distribution};
use crate::error::{Error, Result};
use crate::fock::{PolyDist, PolyTest};
use crate::halfline::{build_grid, DecayTag, QuadratureRule, TestFn};
use crate::opcalc::{FockLayout, FockState};
use crate::transforms::{FreqFn, FreqGrid};

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.display().to_string(), reason: reason.into() }
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().map(|p| p.join(name)).unwrap_or_else(|| PathBuf::from(name))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| format_err(path, e.to_string()))
}

/// Writes rows of floats under `header`.
pub(crate) fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format_err(path, e.to_string()))?;
    w.write_record(header).map_err(|e| format_err(path, e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string())).map_err(|e| format_err(path, e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a float table, checking the header.
fn read_rows(path: &Path, header: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format_err(path, e.to_string()))?;
    let got: Vec<String> =
        r.headers().map_err(|e| format_err(path, e.to_string()))?.iter().map(|s| s.trim().to_string()).collect();
    if got != header {
        return Err(format_err(path, format!("expected header {}, got {}", header.join(","), got.join(","))));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| format_err(path, format!("row {}: {e}", line + 2)))?;
        if row.len() != header.len() {
            return Err(format_err(path, format!("row {} has {} fields", line + 2, row.len())));
        }
        out.push(row);
    }
    Ok(out)
}

pub(crate) fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestFnMeta {
    n_points: usize,
    t_max: f64,
    rule: QuadratureRule,
    #[serde(default)]
    decay_tag: DecayTag,
    #[serde(default)]
    truncation_bound: f64,
}

fn meta_path(csv_path: &Path) -> PathBuf {
    sibling(csv_path, &format!("{}.meta.json", stem(csv_path)))
}

pub fn write_test_fn(path: &Path, phi: &TestFn) -> Result<()> {
    let g = phi.grid();
    write_rows(
        path,
        &header(&["t", "re", "im"]),
        g.nodes().iter().zip(phi.values()).map(|(&t, v)| vec![t, v.re, v.im]),
    )?;
    let meta = TestFnMeta {
        n_points: g.n_points(),
        t_max: g.t_max(),
        rule: g.rule(),
        decay_tag: phi.decay_tag(),
        truncation_bound: phi.truncation_bound(),
    };
    write_json(&meta_path(path), &meta)
}

pub fn read_test_fn(path: &Path) -> Result<TestFn> {
    let meta: TestFnMeta = read_json(&meta_path(path))?;
    let grid = build_grid(meta.n_points, meta.t_max, meta.rule)?;
    let rows = read_rows(path, &header(&["t", "re", "im"]))?;
    if rows.len() != grid.n_points() {
        return Err(format_err(path, format!("{} rows for a grid of {} nodes", rows.len(), grid.n_points())));
    }
    for (row, &t) in rows.iter().zip(grid.nodes()) {
        if (row[0] - t).abs() > 1e-9 * grid.t_max().max(1.0) {
            return Err(format_err(path, format!("node {} does not match the grid ({t})", row[0])));
        }
    }
    let values = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    Ok(TestFn::from_values(grid, values)
        .with_decay_tag(meta.decay_tag)
        .with_truncation_bound(meta.truncation_bound))
}

pub fn write_freq_fn(path: &Path, f: &FreqFn) -> Result<()> {
    write_rows(
        path,
        &header(&["xi", "re", "im"]),
        f.grid().nodes().iter().zip(f.values()).map(|(&x, v)| vec![x, v.re, v.im]),
    )
}

pub fn read_freq_fn(path: &Path) -> Result<FreqFn> {
    let rows = read_rows(path, &header(&["xi", "re", "im"]))?;
    let n = rows.len();
    let xi_max = rows.last().map(|r| r[0]).unwrap_or(0.0);
    let grid = FreqGrid::new(xi_max, n).map_err(|e| format_err(path, e.to_string()))?;
    for (row, &x) in rows.iter().zip(grid.nodes()) {
        if (row[0] - x).abs() > 1e-9 * xi_max {
            return Err(format_err(path, "frequency nodes are not a symmetric uniform grid"));
        }
    }
    FreqFn::from_values(grid, rows.iter().map(|r| Complex64::new(r[1], r[2])).collect())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRecord {
    a: f64,
    m: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityRecord {
    offset: f64,
    csv: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DensityField {
    Single(String),
    List(Vec<DensityRecord>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    atoms: Vec<AtomRecord>,
    density: Option<DensityField>,
    #[serde(default)]
    truncated_mass: f64,
}

pub fn write_distribution(path: &Path, f: &Distribution) -> Result<()> {
    let base = stem(path);
    let atoms = f
        .atoms()
        .iter()
        .map(|a| AtomRecord { a: a.location, m: a.order, re: a.weight.re, im: a.weight.im })
        .collect();
    let dens = f.densities();
    let density = match dens {
        [] => None,
        [d] if d.offset == 0.0 => {
            let name = format!("{base}.density.csv");
            write_test_fn(&sibling(path, &name), &d.profile)?;
            Some(DensityField::Single(name))
        }
        _ => {
            let mut list = Vec::new();
            for (k, d) in dens.iter().enumerate() {
                let name = format!("{base}.density{k}.csv");
                write_test_fn(&sibling(path, &name), &d.profile)?;
                list.push(DensityRecord { offset: d.offset, csv: name });
            }
            Some(DensityField::List(list))
        }
    };
    write_json(path, &DistributionFile { atoms, density, truncated_mass: f.truncated_mass() })
}

pub fn read_distribution(path: &Path) -> Result<Distribution> {
    let file: DistributionFile = read_json(path)?;
    let atoms = file
        .atoms
        .iter()
        .map(|a| Atom { location: a.a, order: a.m, weight: Complex64::new(a.re, a.im) })
        .collect();
    let densities = match file.density {
        None => Vec::new(),
        Some(DensityField::Single(name)) => {
            vec![Density { offset: 0.0, profile: read_test_fn(&sibling(path, &name))? }]
        }
        Some(DensityField::List(list)) => list
            .iter()
            .map(|d| Ok(Density { offset: d.offset, profile: read_test_fn(&sibling(path, &d.csv))? }))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(Distribution::from_parts(atoms, densities)?.with_truncated_mass(file.truncated_mass))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    degree: usize,
    re: f64,
    im: f64,
    factors: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyTestFile {
    max_degree: usize,
    terms: Vec<TermRecord>,
}

/// Assigns file names to distinct items in order of first appearance.
struct Namer {
    hashes: Vec<u64>,
}

impl Namer {
    fn index(&mut self, hash: u64) -> (usize, bool) {
        match self.hashes.iter().position(|&h| h == hash) {
            Some(k) => (k, false),
            None => {
                self.hashes.push(hash);
                (self.hashes.len() - 1, true)
            }
        }
    }
}

pub fn write_poly_test(path: &Path, p: &PolyTest) -> Result<()> {
    let base = stem(path);
    let mut namer = Namer { hashes: Vec::new() };
    let mut terms = Vec::new();
    for n in 0..=p.max_degree() {
        for t in p.terms(n) {
            let mut factors = Vec::new();
            for phi in t.factors() {
                let (k, fresh) = namer.index(phi.content_hash());
                let name = format!("{base}.factor{k}.csv");
                if fresh {
                    write_test_fn(&sibling(path, &name), phi)?;
                }
                factors.push(name);
            }
            terms.push(TermRecord { degree: n, re: t.coeff().re, im: t.coeff().im, factors });
        }
    }
    write_json(path, &PolyTestFile { max_degree: p.max_degree(), terms })
}

pub fn read_poly_test(path: &Path) -> Result<PolyTest> {
    let file: PolyTestFile = read_json(path)?;
    let mut p = PolyTest::zero(file.max_degree);
    for t in file.terms {
        if t.factors.len() != t.degree {
            return Err(format_err(path, format!("degree {} term lists {} factors", t.degree, t.factors.len())));
        }
        let factors = t.factors.iter().map(|name| read_test_fn(&sibling(path, name))).collect::<Result<Vec<_>>>()?;
        p.push_term(Complex64::new(t.re, t.im), factors)?;
    }
    Ok(p)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagRecord {
    degree: usize,
    re: f64,
    im: f64,
    base: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyDistFile {
    max_degree: usize,
    diagonal: Vec<DiagRecord>,
    #[serde(default)]
    general: Vec<TermRecord>,
}

pub fn write_poly_dist(path: &Path, f: &PolyDist) -> Result<()> {
    let base = stem(path);
    let mut namer = Namer { hashes: Vec::new() };
    let mut name_of = |d: &Distribution| -> Result<String> {
        let (k, fresh) = namer.index(d.content_hash());
        let name = format!("{base}.dist{k}.json");
        if fresh {
            write_distribution(&sibling(path, &name), d)?;
        }
        Ok(name)
    };
    let mut diagonal = Vec::new();
    let mut general = Vec::new();
    for n in 0..=f.max_degree() {
        for t in f.diag_terms(n) {
            diagonal.push(DiagRecord { degree: n, re: t.coeff().re, im: t.coeff().im, base: name_of(t.base())? });
        }
        for t in f.general_terms(n) {
            let factors = t.factors().iter().map(&mut name_of).collect::<Result<Vec<_>>>()?;
            general.push(TermRecord { degree: n, re: t.coeff().re, im: t.coeff().im, factors });
        }
    }
    write_json(path, &PolyDistFile { max_degree: f.max_degree(), diagonal, general })
}

pub fn read_poly_dist(path: &Path) -> Result<PolyDist> {
    let file: PolyDistFile = read_json(path)?;
    let mut f = PolyDist::zero(file.max_degree);
    for t in file.diagonal {
        f.push_diag(t.degree, Complex64::new(t.re, t.im), read_distribution(&sibling(path, &t.base))?)?;
    }
    for t in file.general {
        if t.factors.len() != t.degree {
            return Err(format_err(path, format!("degree {} term lists {} factors", t.degree, t.factors.len())));
        }
        let factors =
            t.factors.iter().map(|name| read_distribution(&sibling(path, name))).collect::<Result<Vec<_>>>()?;
        f.push_general(Complex64::new(t.re, t.im), factors)?;
    }
    Ok(f)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexRecord {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FockManifest {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    l: f64,
    nodes_per_axis: Vec<usize>,
    y0: ComplexRecord,
    components: Vec<String>,
}

fn fock_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|j| format!("xi{j}")).collect();
    h.push("re".into());
    h.push("im".into());
    h
}

/// Writes the manifest at `path` and the component CSVs next to it.
pub fn write_fock_state(path: &Path, y: &FockState) -> Result<()> {
    let layout = y.layout();
    let base = stem(path);
    let mut components = Vec::new();
    for n in 1..=layout.max_degree() {
        let name = format!("{base}.y{n}.csv");
        let coords = layout.coords(n);
        let m = coords.len();
        let rows = y.component(n).iter().enumerate().map(|(idx, v)| {
            let mut row = vec![0.0; n + 2];
            let mut r = idx;
            for j in (0..n).rev() {
                row[j] = coords[r % m];
                r /= m;
            }
            row[n] = v.re;
            row[n + 1] = v.im;
            row
        });
        write_rows(&sibling(path, &name), &fock_header(n), rows)?;
        components.push(name);
    }
    let manifest = FockManifest {
        n: layout.max_degree(),
        l: layout.half_width(),
        nodes_per_axis: layout.nodes_per_axis().to_vec(),
        y0: ComplexRecord { re: y.y0().re, im: y.y0().im },
        components,
    };
    write_json(path, &manifest)
}

pub fn read_fock_state(path: &Path) -> Result<FockState> {
    let m: FockManifest = read_json(path)?;
    if m.nodes_per_axis.len() != m.n || m.components.len() != m.n {
        return Err(format_err(path, "N must match nodes_per_axis and components"));
    }
    let layout: Arc<FockLayout> = FockLayout::new(m.l, m.nodes_per_axis)?;
    let mut comps = Vec::new();
    for (k, name) in m.components.iter().enumerate() {
        let n = k + 1;
        let csv_path = sibling(path, name);
        let rows = read_rows(&csv_path, &fock_header(n))?;
        if rows.len() != layout.len(n) {
            return Err(format_err(&csv_path, format!("{} rows, expected {}", rows.len(), layout.len(n))));
        }
        comps.push(rows.iter().map(|r| Complex64::new(r[n], r[n + 1])).collect());
    }
    FockState::from_parts(&layout, Complex64::new(m.y0.re, m.y0.im), comps)
}
