use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConservationLog, Field2D, FieldError, Grid2D, SimOptions, SimState};

const MAGIC: &[u8; 4] = b"EULF";
const HEADER: usize = 4 + 4 + 4 + 8 * 3;

/// Binary dump: `EULF`, `u32 nx`, `u32 ny`, `f64 lx`, `f64 ly`, `f64 t`,
/// then the node values, all little-endian, row-major.
pub fn write_eulf(field: &Field2D, t: f64) -> Vec<u8> {
    let g = field.grid;
    let mut out = Vec::with_capacity(HEADER + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.nx as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny as u32).to_le_bytes());
    for v in [g.lx, g.ly, t] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_eulf(bytes: &[u8]) -> Result<(Field2D, f64), FieldError> {
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(FieldError::Format("missing EULF header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let grid = Grid2D::new(u32_at(4), u32_at(8), f64_at(12), f64_at(20))?;
    let t = f64_at(28);
    if bytes.len() != HEADER + 8 * grid.len() {
        return Err(FieldError::Format(format!(
            "expected {} bytes of data, found {}",
            8 * grid.len(),
            bytes.len() - HEADER
        )));
    }
    let values = (0..grid.len()).map(|k| f64_at(HEADER + 8 * k)).collect();
    Ok((Field2D::new(grid, values)?, t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub step: usize,
    pub t: f64,
    pub gp: String,
    pub gm: String,
}

/// Index of a stored run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceManifest {
    pub grid: Grid2D,
    pub options: SimOptions,
    pub dt: f64,
    pub steps: usize,
    pub every: usize,
    pub conservation: String,
    pub snapshots: Vec<SnapshotEntry>,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub manifest: TraceManifest,
    pub states: Vec<SimState>,
    pub log: ConservationLog,
}

/// Writes `manifest.json`, `conservation.csv` and one `G±` pair of EULF
/// files per snapshot into `dir`.
pub fn write_trace(
    dir: &Path,
    dt: f64,
    steps: usize,
    every: usize,
    snapshots: &[SimState],
    log: &ConservationLog,
) -> Result<TraceManifest, FieldError> {
    let first = snapshots
        .first()
        .ok_or_else(|| FieldError::Trajectory("no snapshots to write".into()))?;
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let gp = format!("gp_{:06}.eulf", s.steps);
        let gm = format!("gm_{:06}.eulf", s.steps);
        fs::write(dir.join(&gp), write_eulf(&s.gp, s.t))?;
        fs::write(dir.join(&gm), write_eulf(&s.gm, s.t))?;
        entries.push(SnapshotEntry {
            step: s.steps,
            t: s.t,
            gp,
            gm,
        });
    }
    fs::write(dir.join("conservation.csv"), log.to_csv())?;
    let manifest = TraceManifest {
        grid: first.grid(),
        options: first.options,
        dt,
        steps,
        every,
        conservation: "conservation.csv".into(),
        snapshots: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| FieldError::Format(e.to_string()))?;
    fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}

pub fn read_trace(dir: &Path) -> Result<Trace, FieldError> {
    let text = fs::read_to_string(dir.join("manifest.json"))?;
    let manifest: TraceManifest = serde_json::from_str(&text).map_err(|e| FieldError::Format(e.to_string()))?;
    let mut states = Vec::with_capacity(manifest.snapshots.len());
    for e in &manifest.snapshots {
        let (gp, t) = read_eulf(&fs::read(dir.join(&e.gp))?)?;
        let (gm, _) = read_eulf(&fs::read(dir.join(&e.gm))?)?;
        if gp.grid != manifest.grid || gm.grid != manifest.grid {
            return Err(FieldError::GridMismatch);
        }
        let mut s = SimState::from_g(gp, gm, t, manifest.options)?;
        s.steps = e.step;
        states.push(s);
    }
    let log = ConservationLog::from_csv(
        &fs::read_to_string(dir.join(&manifest.conservation))?,
        manifest.grid.area(),
    )?;
    Ok(Trace { manifest, states, log })
}
