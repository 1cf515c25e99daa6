//! Orbit tables on disk, keyed by a hash of every parameter that determines them.
//!
//! Each table is a CSV `word,distance,proj_angle,point_re,point_im,pot_integral`
//! with a JSON sidecar holding the parameters, the point count and the SHA-256
//! of the CSV bytes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gibbslab_core::group::{OrbitPoint, OrbitTable, Word};
use gibbslab_core::{BoundaryPoint, DiskPoint};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::GroupConfig;

/// Environment variable overriding the cache root.
pub const CACHE_ENV: &str = "GIBBSLAB_CACHE_DIR";

const DEFAULT_ROOT: &str = ".gibbslab-cache";
const HEADER: [&str; 6] = ["word", "distance", "proj_angle", "point_re", "point_im", "pot_integral"];
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheParameters {
    pub format: u32,
    pub group: GroupConfig,
    pub radius: f64,
    pub prune_margin: f64,
    pub basepoint: [f64; 2],
    pub orbit_point: [f64; 2],
    /// Shape label of the potential whose integrals are stored.
    pub potential: String,
    pub step: f64,
}

impl CacheParameters {
    pub fn new(
        group: GroupConfig,
        radius: f64,
        prune_margin: f64,
        basepoint: [f64; 2],
        orbit_point: [f64; 2],
        potential: String,
        step: f64,
    ) -> Self {
        Self {
            format: FORMAT_VERSION,
            group,
            radius,
            prune_margin,
            basepoint,
            orbit_point,
            potential,
            step,
        }
    }

    pub fn key(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("parameters serialize").as_bytes())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    key: String,
    parameters: CacheParameters,
    points: usize,
    csv_sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Hit,
    Built,
}

pub struct OrbitCache {
    root: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OrbitCache {
    pub fn new(root: PathBuf) -> Self {
        Self { root }
    }

    /// The root named by `GIBBSLAB_CACHE_DIR`, else `.gibbslab-cache` in the working directory.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_ENV).map_or_else(|| PathBuf::from(DEFAULT_ROOT), PathBuf::from))
    }

    fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        let stem = format!("orbit-{}", &key[..16]);
        (self.root.join(format!("{stem}.csv")), self.root.join(format!("{stem}.json")))
    }

    pub fn csv_path(&self, params: &CacheParameters) -> PathBuf {
        self.paths(&params.key()).0
    }

    /// Loads the table for `params`, or builds and stores it.
    ///
    /// A sidecar under the same file name with different parameters is refused,
    /// as is a CSV whose checksum no longer matches its sidecar.
    pub fn load_or_build(
        &self,
        params: &CacheParameters,
        build: impl FnOnce() -> Result<OrbitTable>,
    ) -> Result<(OrbitTable, String, CacheStatus)> {
        let key = params.key();
        let (csv_path, meta_path) = self.paths(&key);
        if meta_path.exists() {
            let sidecar: Sidecar = serde_json::from_slice(&fs::read(&meta_path)?)
                .with_context(|| format!("reading cache sidecar {}", meta_path.display()))?;
            if sidecar.key != key || &sidecar.parameters != params {
                bail!(
                    "cache key collision at {}: stored parameters differ, refusing to reuse",
                    meta_path.display()
                );
            }
            let bytes = fs::read(&csv_path).with_context(|| format!("reading cache {}", csv_path.display()))?;
            let digest = sha256_hex(&bytes);
            if digest != sidecar.csv_sha256 {
                bail!(
                    "cache checksum mismatch for {}: expected {}, found {digest}",
                    csv_path.display(),
                    sidecar.csv_sha256
                );
            }
            let table = parse_table(&bytes, params)?;
            if table.len() != sidecar.points {
                bail!("cache {} holds {} points, sidecar says {}", csv_path.display(), table.len(), sidecar.points);
            }
            return Ok((table, key, CacheStatus::Hit));
        }
        if csv_path.exists() {
            bail!("cache file {} has no sidecar; remove it to rebuild", csv_path.display());
        }
        let table = build()?;
        let bytes = render_table(&table)?;
        fs::create_dir_all(&self.root).with_context(|| format!("creating cache root {}", self.root.display()))?;
        write_atomic(&csv_path, &bytes)?;
        let sidecar = Sidecar {
            key: key.clone(),
            parameters: params.clone(),
            points: table.len(),
            csv_sha256: sha256_hex(&bytes),
        };
        write_atomic(&meta_path, &serde_json::to_vec_pretty(&sidecar)?)?;
        Ok((table, key, CacheStatus::Built))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// Shortest round-trip decimal form, so that parsing restores the exact bits.
fn render_table(table: &OrbitTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for p in table.points() {
        w.write_record([
            p.word.to_string(),
            p.distance.to_string(),
            p.projection.map_or_else(String::new, |b| b.angle().to_string()),
            p.point.re().to_string(),
            p.point.im().to_string(),
            p.potential_integral.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

fn parse_table(bytes: &[u8], params: &CacheParameters) -> Result<OrbitTable> {
    let mut r = csv::Reader::from_reader(bytes);
    if r.headers()?.iter().ne(HEADER) {
        bail!("unexpected cache header {:?}", r.headers()?);
    }
    let mut points = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.with_context(|| format!("cache row {}", i + 1))?;
        let field = |j: usize| -> Result<f64> {
            record[j]
                .parse()
                .with_context(|| format!("cache row {}, column {}", i + 1, HEADER[j]))
        };
        let word: Word = record[0].parse()?;
        let projection = if record[2].is_empty() {
            None
        } else {
            Some(BoundaryPoint::new(field(2)?))
        };
        points.push(OrbitPoint {
            word,
            point: DiskPoint::new(field(3)?, field(4)?)?,
            distance: field(1)?,
            potential_integral: field(5)?,
            projection,
        });
    }
    let x = DiskPoint::new(params.basepoint[0], params.basepoint[1])?;
    let y = DiskPoint::new(params.orbit_point[0], params.orbit_point[1])?;
    Ok(OrbitTable::from_points(
        x,
        y,
        params.radius,
        params.prune_margin,
        points,
        Some(params.potential.clone()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gibbslab_core::group::{build_octagon, enumerate_orbit, EnumerationOptions};
    use gibbslab_core::potential::{fill_potential_integrals, Potential};

    fn params() -> CacheParameters {
        CacheParameters::new(GroupConfig::default(), 5.0, 3.0, [0.0, 0.0], [0.1, 0.0], "constant".into(), 0.01)
    }

    fn build() -> Result<OrbitTable> {
        let p = params();
        let mut t = enumerate_orbit(
            &build_octagon(),
            DiskPoint::ORIGIN,
            DiskPoint::new(0.1, 0.0)?,
            p.radius,
            EnumerationOptions {
                prune_margin: p.prune_margin,
                ..Default::default()
            },
        )?;
        fill_potential_integrals(&mut t, &Potential::constant(0.0), p.step)?;
        Ok(t)
    }

    #[test]
    fn round_trip_is_exact_and_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let cache = OrbitCache::new(dir.path().to_path_buf());
        let p = params();
        let (built, key, status) = cache.load_or_build(&p, build).unwrap();
        assert_eq!(status, CacheStatus::Built);
        let first = fs::read(cache.csv_path(&p)).unwrap();
        let (loaded, key2, status) = cache.load_or_build(&p, || panic!("must not rebuild")).unwrap();
        assert_eq!(status, CacheStatus::Hit);
        assert_eq!(key, key2);
        assert_eq!(fs::read(cache.csv_path(&p)).unwrap(), first);
        assert_eq!(built.points(), loaded.points());
        assert_eq!(loaded.potential_label(), Some("constant"));
    }

    #[test]
    fn truncation_and_collisions_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let cache = OrbitCache::new(dir.path().to_path_buf());
        let p = params();
        cache.load_or_build(&p, build).unwrap();
        let path = cache.csv_path(&p);
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        let err = cache.load_or_build(&p, build).unwrap_err();
        assert!(err.to_string().contains("checksum"), "{err}");

        fs::write(&path, &bytes).unwrap();
        let meta = path.with_extension("json");
        let mut sidecar: Sidecar = serde_json::from_slice(&fs::read(&meta).unwrap()).unwrap();
        sidecar.parameters.radius = 6.0;
        fs::write(&meta, serde_json::to_vec(&sidecar).unwrap()).unwrap();
        let err = cache.load_or_build(&p, build).unwrap_err();
        assert!(err.to_string().contains("collision"), "{err}");
    }
}
