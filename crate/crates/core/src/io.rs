//! JSON file formats. Rectangles travel as `x:level/index,y:level/index`,
//! rationals as `"p/q"` strings.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bigrid::{DyadicRect, Geometry};
use crate::constructions::{ExampleKind, Instance, Params};
use crate::error::{Error, Result};
use crate::measure::{Atom, BoundarySet, Measure, StepFunction};
use crate::weight::{Weight, WeightRecord};

pub fn measure_to_json(mu: &Measure) -> Result<String> {
    Ok(serde_json::to_string_pretty(mu.atoms())?)
}

/// Without an explicit geometry the depth is the finest level among the atoms.
pub fn measure_from_json(text: &str, geometry: Option<Geometry>) -> Result<Measure> {
    let atoms: Vec<Atom> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let g = geometry.unwrap_or_else(|| Geometry::new(atoms.iter().map(|a| a.support.x.level().max(a.support.y.level())).max().unwrap_or(0)));
    Measure::new(g, atoms)
}

pub fn weight_to_json(alpha: &Weight) -> Result<String> {
    Ok(serde_json::to_string_pretty(&alpha.records())?)
}

pub fn weight_from_json(text: &str) -> Result<Weight> {
    let recs: Vec<WeightRecord> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut seen = BTreeMap::new();
    for r in recs {
        if seen.insert(r.rect.clone(), r.value).is_some() {
            return Err(Error::DuplicateRect(r.rect.to_string()));
        }
    }
    Weight::from_entries(seen)
}

pub fn rects_to_json(rects: &[DyadicRect]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rects)?)
}

pub fn rects_from_json(text: &str) -> Result<Vec<DyadicRect>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn set_from_json(text: &str) -> Result<BoundarySet> {
    Ok(BoundarySet::from_rects(rects_from_json(text)?))
}

pub fn step_function_from_json(text: &str) -> Result<StepFunction> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::from)
}

/// Index written next to the instance files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Manifest {
    pub example: String,
    pub depth: u32,
    pub params: serde_json::Value,
    pub measure: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub test_measure: Option<String>,
    pub weight: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generators: Option<String>,
    pub sets: BTreeMap<String, String>,
}

fn set_file_name(name: &str) -> String {
    let safe: String = name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    format!("set_{safe}.json")
}

fn kind_name(kind: ExampleKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Writes the instance into `dir` and returns the manifest path.
pub fn write_instance(inst: &Instance, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest {
        example: kind_name(inst.kind),
        depth: inst.geometry.depth,
        params: serde_json::to_value(&inst.params)?,
        measure: "measure.json".into(),
        test_measure: None,
        weight: "weight.json".into(),
        generators: None,
        sets: BTreeMap::new(),
    };
    fs::write(dir.join(&manifest.measure), measure_to_json(&inst.mu)?)?;
    if let Some(nu) = &inst.nu {
        manifest.test_measure = Some("test_measure.json".into());
        fs::write(dir.join("test_measure.json"), measure_to_json(nu)?)?;
    }
    fs::write(dir.join(&manifest.weight), weight_to_json(&inst.alpha)?)?;
    if let Some(gens) = inst.alpha.generators() {
        manifest.generators = Some("generators.json".into());
        fs::write(dir.join("generators.json"), rects_to_json(gens)?)?;
    }
    for (name, set) in &inst.sets {
        let file = set_file_name(name);
        fs::write(dir.join(&file), rects_to_json(set.members())?)?;
        manifest.sets.insert(name.clone(), file);
    }
    let path = dir.join("instance.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Instance data read back from a manifest.
#[derive(Clone, Debug)]
pub struct LoadedInstance {
    pub manifest: Manifest,
    pub geometry: Geometry,
    pub mu: Measure,
    pub nu: Option<Measure>,
    pub alpha: Weight,
    pub sets: BTreeMap<String, BoundarySet>,
}

impl LoadedInstance {
    pub fn test_measure(&self) -> &Measure {
        self.nu.as_ref().unwrap_or(&self.mu)
    }
}

pub fn read_instance(manifest_path: &Path) -> Result<LoadedInstance> {
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let manifest: Manifest = serde_json::from_str(&read(manifest_path)?).map_err(|e| Error::Parse(e.to_string()))?;
    let geometry = Geometry::new(manifest.depth);
    let mu = measure_from_json(&read(&dir.join(&manifest.measure))?, Some(geometry))?;
    let nu = match &manifest.test_measure {
        Some(f) => Some(measure_from_json(&read(&dir.join(f))?, Some(geometry))?),
        None => None,
    };
    let alpha = weight_from_json(&read(&dir.join(&manifest.weight))?)?;
    let mut sets = BTreeMap::new();
    for (name, f) in &manifest.sets {
        sets.insert(name.clone(), set_from_json(&read(&dir.join(f))?)?);
    }
    Ok(LoadedInstance { manifest, geometry, mu, nu, alpha, sets })
}

/// Parameters of an instance as a JSON value, for reports.
pub fn params_value(params: &Params) -> serde_json::Value {
    serde_json::to_value(params).unwrap_or(serde_json::Value::Null)
}
