//! Time-series tables, network atlases, subject manifests and synthetic cohorts.

mod atlas;
mod manifest;
mod synth;
mod table;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

pub use atlas::{slice_network, NetworkAtlas, DOSENBACH_NETWORKS};
pub use manifest::{load_manifest, manifest_to_csv, parse_manifest, Manifest};
pub use synth::{
    generate_synthetic_cohort, generate_synthetic_cohort_with_atlas, SyntheticRecipe, GROUP_A,
    GROUP_B,
};
pub use table::{load_timeseries, zscore, TableFormat, TimeSeriesTable, MIN_TIMEPOINTS};

use crate::error::{Error, Result};

/// A set of subjects sharing one atlas.
#[derive(Debug, Clone)]
pub struct Cohort {
    pub subjects: Vec<TimeSeriesTable>,
    pub atlas: NetworkAtlas,
}

impl Cohort {
    pub fn new(subjects: Vec<TimeSeriesTable>, atlas: NetworkAtlas) -> Result<Self> {
        let mut ids = HashSet::new();
        for s in &subjects {
            if !ids.insert(s.subject_id()) {
                return Err(Error::Schema(format!("duplicate subject id {:?}", s.subject_id())));
            }
            atlas.check_table(s)?;
        }
        Ok(Self { subjects, atlas })
    }

    pub fn manifest(&self) -> Manifest {
        self.subjects
            .iter()
            .filter_map(|s| s.group_label().map(|g| (s.subject_id().to_string(), g.to_string())))
            .collect()
    }

    /// Load `<dir>/<subject_id>.csv` for every subject of the manifest.
    pub fn load(dir: &Path, manifest: &Manifest, atlas: NetworkAtlas) -> Result<Self> {
        let subjects = manifest
            .iter()
            .map(|(id, group)| {
                load_timeseries(&dir.join(format!("{id}.csv")), TableFormat::Csv)
                    .map(|t| t.with_group(group.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(subjects, atlas)
    }

    /// Write one CSV per subject plus `manifest.csv` and `atlas.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for s in &self.subjects {
            s.write_csv(&dir.join(format!("{}.csv", s.subject_id())))?;
        }
        let manifest_path = dir.join("manifest.csv");
        fs::write(&manifest_path, manifest_to_csv(&self.manifest()))
            .map_err(|e| Error::io(&manifest_path, e))?;
        self.atlas.write(&dir.join("atlas.json"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_load_reproduces_values() {
        let dir = tempfile::tempdir().unwrap();
        let cohort = generate_synthetic_cohort(2, 30, 11, SyntheticRecipe::LoopVsNoise).unwrap();
        cohort.write(dir.path()).unwrap();
        let manifest = load_manifest(&dir.path().join("manifest.csv")).unwrap();
        let atlas = NetworkAtlas::read(&dir.path().join("atlas.json")).unwrap();
        let back = Cohort::load(dir.path(), &manifest, atlas).unwrap();
        assert_eq!(back.subjects, cohort.subjects);
    }
}
