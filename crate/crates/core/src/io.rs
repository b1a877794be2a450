//! Point-set files: a CSV with header `x,y` and a JSON sidecar at
//! `<path>.json` holding the window, model and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Configuration, Model, Point, Rect};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub window: Rect,
    pub model: Model,
    pub seed: u64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_points(path: &Path, config: &Configuration) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in &config.points {
        w.serialize(p)?;
    }
    w.flush()?;
    let meta = Metadata { window: config.window, model: config.model, seed: config.seed };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Reads a point set. The window comes from the sidecar when present,
/// otherwise from `window`.
pub fn read_points(path: &Path, window: Option<Rect>) -> Result<Configuration> {
    let mut r = csv::Reader::from_path(path)?;
    let points = r.deserialize::<Point>().collect::<std::result::Result<Vec<_>, _>>()?;
    let side = sidecar_path(path);
    let meta: Option<Metadata> =
        if side.exists() { Some(serde_json::from_str(&fs::read_to_string(side)?)?) } else { None };
    let window = match (&meta, window) {
        (_, Some(w)) => w,
        (Some(m), None) => m.window,
        (None, None) => return Err(Error::Invalid("no window: missing sidecar and none given".into())),
    };
    let mut config = Configuration::from_points(points, window)?;
    if let Some(m) = meta {
        if m.window == window {
            config.model = m.model;
            config.seed = m.seed;
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::sample_binomial;

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        let c = sample_binomial(&Rect::new(2.0, 30.0).unwrap(), 30, 4).unwrap();
        write_points(&path, &c).unwrap();
        assert!(fs::read_to_string(&path).unwrap().starts_with("x,y\n"));
        assert_eq!(read_points(&path, None).unwrap(), c);
    }

    #[test]
    fn missing_window() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        fs::write(&path, "x,y\n0.1,0.2\n").unwrap();
        assert!(read_points(&path, None).is_err());
        let c = read_points(&path, Some(Rect::unit_square())).unwrap();
        assert_eq!(c.points, vec![Point::new(0.1, 0.2)]);
        assert_eq!(c.model, Model::Fixed);
    }
}
