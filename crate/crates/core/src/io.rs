//! Files: a small binary container for fields, CSV exports, timeseries
//! directories and trajectory tables.
//!
//! The container is `QPHF`, a little-endian `u32` version, a little-endian
//! `u64` header length, a JSON header describing the grid, physical
//! parameters and component names, then every component as little-endian
//! `f64` in grid order. Masked samples are stored as NaN.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::propagate::Timeseries;
use crate::dynamics::trajectories::TrajectoryEnsemble;
use crate::error::{Error, Result};
use crate::fermi::SurfacePoint;
use crate::field::{ScalarField, VectorField, WaveField};
use crate::grid::{Grid, PhysicsParams};

const MAGIC: &[u8; 4] = b"QPHF";
const VERSION: u32 = 1;
const AXES: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Wave,
    Scalar,
    Vector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub kind: FieldKind,
    pub dim: usize,
    pub grid: Grid,
    pub params: PhysicsParams,
    pub components: Vec<String>,
}

/// Decoded container contents.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldData {
    pub header: FieldHeader,
    pub components: Vec<Vec<f64>>,
}

/// Writes a container to any sink.
pub fn write_container<W: Write>(mut w: W, header: &FieldHeader, components: &[&[f64]]) -> Result<()> {
    let json = serde_json::to_vec(header)?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for c in components {
        for v in c.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_container<R: Read>(mut r: R) -> Result<FieldData> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a field container".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let header: FieldHeader = serde_json::from_slice(&json)?;
    if header.dim != header.grid.dim() {
        return Err(Error::Format("header dimension disagrees with the grid".into()));
    }
    let n = header.grid.len();
    let mut components = Vec::with_capacity(header.components.len());
    let mut buf = vec![0u8; 8 * n];
    for _ in &header.components {
        r.read_exact(&mut buf)?;
        components.push(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect());
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    Ok(FieldData { header, components })
}

fn header(kind: FieldKind, grid: &Grid, params: PhysicsParams, components: Vec<String>) -> FieldHeader {
    FieldHeader { kind, dim: grid.dim(), grid: grid.clone(), params, components }
}

fn expect_kind(data: &FieldData, kind: FieldKind) -> Result<()> {
    if data.header.kind != kind {
        return Err(Error::Format(format!("expected a {kind:?} field, found {:?}", data.header.kind)));
    }
    Ok(())
}

pub fn save_wavefield(path: &Path, wf: &WaveField) -> Result<()> {
    let re: Vec<f64> = wf.psi().iter().map(|z| z.re).collect();
    let im: Vec<f64> = wf.psi().iter().map(|z| z.im).collect();
    let h = header(FieldKind::Wave, wf.grid(), wf.params(), vec!["re".into(), "im".into()]);
    write_container(BufWriter::new(File::create(path)?), &h, &[&re, &im])
}

pub fn load_wavefield(path: &Path) -> Result<WaveField> {
    let d = read_container(BufReader::new(File::open(path)?))?;
    expect_kind(&d, FieldKind::Wave)?;
    let [re, im] = <[Vec<f64>; 2]>::try_from(d.components)
        .map_err(|_| Error::Format("a wave field has two components".into()))?;
    let psi = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
    WaveField::new(d.header.grid, psi, d.header.params)
}

pub fn save_scalar(path: &Path, f: &ScalarField, params: PhysicsParams) -> Result<()> {
    let h = header(FieldKind::Scalar, f.grid(), params, vec!["value".into()]);
    write_container(BufWriter::new(File::create(path)?), &h, &[f.values()])
}

pub fn load_scalar(path: &Path) -> Result<ScalarField> {
    let d = read_container(BufReader::new(File::open(path)?))?;
    expect_kind(&d, FieldKind::Scalar)?;
    let values = d.components.into_iter().next().ok_or_else(|| Error::Format("missing values".into()))?;
    let mask = values.iter().map(|v| v.is_nan()).collect();
    Ok(ScalarField::with_mask(d.header.grid, values, mask))
}

pub fn save_vector(path: &Path, f: &VectorField, params: PhysicsParams) -> Result<()> {
    let names = AXES[..f.grid().dim()].iter().map(|a| format!("v_{a}")).collect();
    let h = header(FieldKind::Vector, f.grid(), params, names);
    let comps: Vec<&[f64]> = f.components().iter().map(|c| c.as_slice()).collect();
    write_container(BufWriter::new(File::create(path)?), &h, &comps)
}

pub fn load_vector(path: &Path) -> Result<VectorField> {
    let d = read_container(BufReader::new(File::open(path)?))?;
    expect_kind(&d, FieldKind::Vector)?;
    if d.components.len() != d.header.grid.dim() {
        return Err(Error::Format("vector field needs one component per axis".into()));
    }
    let mask = d.components[0].iter().map(|v| v.is_nan()).collect();
    Ok(VectorField::with_mask(d.header.grid, d.components, mask))
}

/// Fixed-format float used in every CSV, so equal numbers give equal bytes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn coord_header(dim: usize) -> Vec<String> {
    AXES[..dim].iter().map(|s| s.to_string()).collect()
}

/// Columns: coordinates, then one column per named component.
pub fn fields_csv<W: Write>(w: W, grid: &Grid, names: &[&str], comps: &[&[f64]]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut head = coord_header(grid.dim());
    head.extend(names.iter().map(|s| s.to_string()));
    out.write_record(&head)?;
    for i in 0..grid.len() {
        let r = grid.point(i);
        let mut row: Vec<String> = r[..grid.dim()].iter().map(|&x| fmt_f64(x)).collect();
        row.extend(comps.iter().map(|c| fmt_f64(c[i])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns: coordinates, then `re`, `im`.
pub fn wavefield_csv<W: Write>(w: W, wf: &WaveField) -> Result<()> {
    let re: Vec<f64> = wf.psi().iter().map(|z| z.re).collect();
    let im: Vec<f64> = wf.psi().iter().map(|z| z.im).collect();
    fields_csv(w, wf.grid(), &["re", "im"], &[&re, &im])
}

pub fn scalar_csv<W: Write>(w: W, f: &ScalarField, name: &str) -> Result<()> {
    fields_csv(w, f.grid(), &[name], &[f.values()])
}

pub fn vector_csv<W: Write>(w: W, f: &VectorField, name: &str) -> Result<()> {
    let names: Vec<String> = AXES[..f.grid().dim()].iter().map(|a| format!("{name}_{a}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let comps: Vec<&[f64]> = f.components().iter().map(|c| c.as_slice()).collect();
    fields_csv(w, f.grid(), &refs, &comps)
}

/// Columns: `seed_id, t`, then one column per axis.
pub fn trajectories_csv<W: Write>(w: W, ens: &TrajectoryEnsemble) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut head = vec!["seed_id".to_string(), "t".to_string()];
    head.extend(coord_header(ens.dim));
    out.write_record(&head)?;
    for (id, path) in ens.paths.iter().enumerate() {
        for (t, r) in &path.samples {
            let mut row = vec![id.to_string(), fmt_f64(*t)];
            row.extend(r[..ens.dim].iter().map(|&x| fmt_f64(x)));
            out.write_record(&row)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Columns: positions, momenta, then `h_f`.
pub fn surface_csv<W: Write>(w: W, points: &[SurfacePoint], dim: usize) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut head = coord_header(dim);
    head.extend(AXES[..dim].iter().map(|a| format!("p_{a}")));
    head.push("h_f".into());
    out.write_record(&head)?;
    for s in points {
        let mut row: Vec<String> = s.r[..dim].iter().map(|&x| fmt_f64(x)).collect();
        row.extend(s.p[..dim].iter().map(|&x| fmt_f64(x)));
        row.push(fmt_f64(s.h));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Hex SHA-256 of the compact JSON encoding of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let value = serde_json::to_value(config)?;
    let bytes = serde_json::to_vec(&value)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub times: Vec<f64>,
    pub frames: Vec<String>,
    pub config_hash: String,
    pub config: serde_json::Value,
}

/// Writes one container per frame plus `manifest.json` into `dir`.
pub fn save_timeseries<T: Serialize>(dir: &Path, ts: &Timeseries, config: &T) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let width = ts.len().to_string().len().max(4);
    let mut frames = Vec::with_capacity(ts.len());
    for (k, f) in ts.frames.iter().enumerate() {
        let name = format!("frame_{k:0width$}.qphf");
        save_wavefield(&dir.join(&name), f)?;
        frames.push(name);
    }
    let manifest = Manifest {
        times: ts.times.clone(),
        frames,
        config_hash: config_hash(config)?,
        config: serde_json::to_value(config)?,
    };
    let file = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(file, &manifest)?;
    Ok(manifest)
}

pub fn load_timeseries(dir: &Path) -> Result<(Timeseries, Manifest)> {
    let manifest: Manifest = serde_json::from_reader(BufReader::new(File::open(dir.join("manifest.json"))?))?;
    if manifest.times.len() != manifest.frames.len() {
        return Err(Error::Format("manifest lists different numbers of times and frames".into()));
    }
    if manifest.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Format("manifest times are not strictly increasing".into()));
    }
    if config_hash(&manifest.config)? != manifest.config_hash {
        return Err(Error::Format("manifest config does not match its hash".into()));
    }
    let frames = manifest.frames.iter().map(|f| load_wavefield(&dir.join(f))).collect::<Result<Vec<_>>>()?;
    if frames.windows(2).any(|w| w[0].grid() != w[1].grid()) {
        return Err(Error::GridMismatch);
    }
    Ok((Timeseries { times: manifest.times.clone(), frames }, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::trajectories::{Path as TrajPath, PathStatus};

    fn sample_wave() -> WaveField {
        let g = Grid::new(vec![8, 10], vec![-1.0, 0.0], vec![1.0, 2.0], true).unwrap();
        WaveField::from_fn(g, PhysicsParams::new(2.0, 0.5).unwrap(), |r| Complex64::new(r[0], r[1] * r[1])).unwrap()
    }

    #[test]
    fn wavefield_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("psi.qphf");
        let wf = sample_wave();
        save_wavefield(&p, &wf).unwrap();
        assert_eq!(load_wavefield(&p).unwrap(), wf);
    }

    #[test]
    fn masks_survive_as_nan() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.qphf");
        let g = Grid::cube(1, 8, 0.0, 1.0, false).unwrap();
        let mut mask = vec![false; 8];
        mask[3] = true;
        let f = ScalarField::with_mask(g, (0..8).map(|i| i as f64).collect(), mask.clone());
        save_scalar(&p, &f, PhysicsParams::default()).unwrap();
        let back = load_scalar(&p).unwrap();
        assert_eq!(back.mask(), &mask[..]);
        assert_eq!(back.values()[4], 4.0);
    }

    #[test]
    fn rejects_wrong_kind_and_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("psi.qphf");
        save_wavefield(&p, &sample_wave()).unwrap();
        assert!(matches!(load_scalar(&p), Err(Error::Format(_))));
        let mut bytes = fs::read(&p).unwrap();
        bytes[0] = b'X';
        assert!(matches!(read_container(&bytes[..]), Err(Error::Format(_))));
        let bytes = fs::read(&p).unwrap();
        assert!(read_container(&bytes[..bytes.len() - 3]).is_err());
    }

    #[test]
    fn csv_has_header_and_fixed_format() {
        let mut buf = Vec::new();
        wavefield_csv(&mut buf, &sample_wave()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,re,im");
        assert_eq!(lines.next().unwrap().split(',').next().unwrap(), "-1.0000000000000000e0");
        assert_eq!(text.lines().count(), 81);
    }

    #[test]
    fn trajectory_columns() {
        let ens = TrajectoryEnsemble {
            dim: 1,
            seeds: vec![[0.5, 0.0, 0.0]],
            paths: vec![TrajPath { samples: vec![(0.0, [0.5, 0.0, 0.0]), (0.1, [0.6, 0.0, 0.0])], status: PathStatus::Active }],
        };
        let mut buf = Vec::new();
        trajectories_csv(&mut buf, &ens).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "seed_id,t,x");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn timeseries_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let wf = sample_wave();
        let ts = Timeseries { times: vec![0.0, 0.5], frames: vec![wf.clone(), wf.scaled(Complex64::i())] };
        let cfg = serde_json::json!({"dt": 0.5, "n_steps": 1});
        let m = save_timeseries(dir.path(), &ts, &cfg).unwrap();
        assert_eq!(m.config_hash.len(), 64);
        let (back, _) = load_timeseries(dir.path()).unwrap();
        assert_eq!(back.times, ts.times);
        assert_eq!(back.frames, ts.frames);
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&serde_json::json!({"b": 1, "a": [1.5, 2]})).unwrap();
        let b = config_hash(&serde_json::json!({"a": [1.5, 2], "b": 1})).unwrap();
        assert_eq!(a, b);
    }
}
