//! End-to-end Rips and graph pipelines with deterministic output trees.
//!
//! Per-subject artifacts go to `<out>/<subject>/<network>/<stage>.<ext>`;
//! cohort-level matrices, tests and reports go to `<out>/cohort/<network>/`.
//! The resolved configuration is echoed to `<out>/config.toml` and a digest of
//! every test and classification to `<out>/summary.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    group_distance_test, inter_roi_matrix, inter_subject_matrix, lifespans_to_csv, DistanceMatrix,
    Extraction, FiltrationKind, LifespanFeatures, TestResult,
};
use crate::barcode::emit_barcode_svg;
use crate::classify::{evaluate, make_dataset_lifespans, make_dataset_wd, EvalReport, ModelKind, ModelSpec, Protocol};
use crate::diagram::PersistenceDiagram;
use crate::distances::{EssentialPolicy, WassersteinParams};
use crate::embedding::{sliding_window_embed, EmbeddingParams, PointCloud};
use crate::error::{Error, Result};
use crate::graph::{
    build_positive_graph, cap_diagram, graph_persistence, graph_sublevel_filtration,
    partial_correlation_with_fallback, pearson_correlation_matrix, Direction, WeightSource,
    WeightTransform, WeightedGraph,
};
use crate::ingest::{load_manifest, slice_network, Cohort, Manifest, NetworkAtlas};
use crate::rips::{rips_diagrams, DistanceSpec, DEFAULT_MAX_SIMPLICES};

/// Every knob of a pipeline run. Read from a flat `key = value` TOML file;
/// missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Cohort directory holding `<subject>.csv` files.
    pub input: Option<PathBuf>,
    /// Defaults to `<input>/manifest.csv`.
    pub manifest: Option<PathBuf>,
    /// Defaults to `<input>/atlas.json` if present, else the 160-ROI atlas.
    pub atlas: Option<PathBuf>,
    pub out: PathBuf,
    /// Networks to process; empty means all.
    pub networks: Vec<String>,
    pub m: usize,
    pub tau: usize,
    pub maxdim: usize,
    pub max_simplices: usize,
    pub p: f64,
    pub q: f64,
    /// `drop` or `cap=V`.
    pub essential: String,
    pub weight_source: WeightSource,
    pub transform: WeightTransform,
    pub direction: Direction,
    pub shrinkage: f64,
    pub topk: usize,
    /// Stand-in death for infinite graph bars when computing lifespans.
    pub lifespan_cap: f64,
    /// `knn` or `logistic`.
    pub model: String,
    pub knn_k: usize,
    pub l2: f64,
    pub max_iter: usize,
    pub select_top: Option<usize>,
    /// K-fold cross-validation; absent means a stratified 80/20 hold-out.
    pub folds: Option<usize>,
    pub seed: u64,
    /// Worker threads; absent means one per logical CPU.
    pub jobs: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            manifest: None,
            atlas: None,
            out: PathBuf::from("out"),
            networks: Vec::new(),
            m: 2,
            tau: 1,
            maxdim: 1,
            max_simplices: DEFAULT_MAX_SIMPLICES,
            p: 2.0,
            q: f64::INFINITY,
            essential: "drop".into(),
            weight_source: WeightSource::Marginal,
            transform: WeightTransform::OneMinusW,
            direction: Direction::Sublevel,
            shrinkage: 0.0,
            topk: 10,
            lifespan_cap: 1.0,
            model: "knn".into(),
            knn_k: 5,
            l2: 1.0,
            max_iter: 500,
            select_top: None,
            folds: None,
            seed: 0,
            jobs: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format(path, e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn embedding(&self) -> Result<EmbeddingParams> {
        EmbeddingParams::new(self.m, self.tau)
    }

    pub fn rips_spec(&self) -> DistanceSpec {
        DistanceSpec {
            max_simplices: self.max_simplices,
            ..DistanceSpec::default()
        }
    }

    pub fn wasserstein(&self) -> Result<WassersteinParams> {
        WassersteinParams::new(self.p, self.q, self.essential.parse::<EssentialPolicy>()?)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let kind = match self.model.parse::<ModelKind>()? {
            ModelKind::Knn { .. } => ModelKind::Knn { k: self.knn_k },
            ModelKind::Logistic { .. } => ModelKind::Logistic {
                l2: self.l2,
                max_iter: self.max_iter,
            },
        };
        Ok(ModelSpec {
            kind,
            select_top: self.select_top,
        })
    }

    pub fn protocol(&self) -> Protocol {
        match self.folds {
            Some(folds) => Protocol::KFold { folds },
            None => Protocol::Holdout80_20,
        }
    }

    pub fn manifest_path(&self) -> Option<PathBuf> {
        self.manifest
            .clone()
            .or_else(|| self.input.as_ref().map(|d| d.join("manifest.csv")))
    }

    /// Check parameters and that every referenced path exists.
    pub fn validate(&self) -> Result<()> {
        self.embedding()?;
        self.wasserstein()?;
        self.model_spec()?;
        if self.maxdim > 3 {
            return Err(Error::InvalidArgument(format!("maxdim must be at most 3, got {}", self.maxdim)));
        }
        if self.topk == 0 {
            return Err(Error::InvalidArgument("topk must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.shrinkage) {
            return Err(Error::InvalidArgument(format!("shrinkage must lie in [0, 1], got {}", self.shrinkage)));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidArgument("jobs must be positive".into()));
        }
        let input = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("no input directory configured".into()))?;
        for path in [Some(input.clone()), self.manifest_path(), self.atlas.clone()].into_iter().flatten() {
            if !path.exists() {
                return Err(Error::InvalidArgument(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    /// Load the atlas, manifest and subject tables.
    pub fn load_cohort(&self) -> Result<Cohort> {
        let input = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("no input directory configured".into()))?;
        let atlas = match &self.atlas {
            Some(p) => NetworkAtlas::read(p)?,
            None if input.join("atlas.json").exists() => NetworkAtlas::read(&input.join("atlas.json"))?,
            None => NetworkAtlas::dosenbach(),
        };
        let manifest = load_manifest(&self.manifest_path().expect("input is set"))?;
        Cohort::load(input, &manifest, atlas)
    }

    pub fn network_names(&self, atlas: &NetworkAtlas) -> Result<Vec<String>> {
        if self.networks.is_empty() {
            return Ok(atlas.network_names().map(String::from).collect());
        }
        for n in &self.networks {
            atlas.network(n)?;
        }
        Ok(self.networks.clone())
    }
}

/// Rips diagrams of every channel of one subject's network.
#[derive(Debug, Clone)]
pub struct RipsUnit {
    pub subject: String,
    pub network: String,
    pub channels: Vec<String>,
    pub clouds: Vec<PointCloud>,
    /// `diagrams[c][d]` is the H`d` diagram of channel `c`.
    pub diagrams: Vec<Vec<PersistenceDiagram>>,
}

/// Graph of one subject's network and its H0/H1 diagrams.
#[derive(Debug, Clone)]
pub struct GraphUnit {
    pub subject: String,
    pub network: String,
    pub graph: WeightedGraph,
    pub shrinkage_used: f64,
    pub diagrams: [PersistenceDiagram; 2],
}

pub fn embed_network(
    table: &crate::ingest::TimeSeriesTable,
    params: EmbeddingParams,
) -> Result<Vec<PointCloud>> {
    (0..table.channels())
        .map(|c| sliding_window_embed(&table.channel_names()[c], &table.column(c), params))
        .collect()
}

/// Embed and run Rips persistence for every (subject, network, channel).
pub fn rips_stage(cohort: &Cohort, networks: &[String], cfg: &PipelineConfig) -> Result<Vec<RipsUnit>> {
    let params = cfg.embedding()?;
    let spec = cfg.rips_spec();
    let mut units = Vec::new();
    for s in &cohort.subjects {
        for n in networks {
            let table = slice_network(s, &cohort.atlas, n)?;
            units.push(RipsUnit {
                subject: s.subject_id().to_string(),
                network: n.clone(),
                channels: table.channel_names().to_vec(),
                clouds: embed_network(&table, params)?,
                diagrams: Vec::new(),
            });
        }
    }
    let jobs: Vec<(usize, usize)> = units
        .iter()
        .enumerate()
        .flat_map(|(u, unit)| (0..unit.clouds.len()).map(move |c| (u, c)))
        .collect();
    let results: Vec<Vec<PersistenceDiagram>> = jobs
        .par_iter()
        .map(|&(u, c)| rips_diagrams(&units[u].clouds[c], &spec, cfg.maxdim))
        .collect::<Result<_>>()?;
    for (&(u, _), d) in jobs.iter().zip(results) {
        units[u].diagrams.push(d);
    }
    Ok(units)
}

/// Correlation graph and graph persistence for every (subject, network).
pub fn graph_stage(cohort: &Cohort, networks: &[String], cfg: &PipelineConfig) -> Result<Vec<GraphUnit>> {
    let work: Vec<(usize, &String)> = (0..cohort.subjects.len())
        .flat_map(|s| networks.iter().map(move |n| (s, n)))
        .collect();
    work.par_iter()
        .map(|&(s, n)| {
            let subject = &cohort.subjects[s];
            let table = slice_network(subject, &cohort.atlas, n)?;
            let corr = pearson_correlation_matrix(&table)?;
            let (partial, shrinkage_used) = partial_correlation_with_fallback(&corr, cfg.shrinkage)?;
            let graph = build_positive_graph(table.channel_names().to_vec(), &corr, &partial, cfg.weight_source)?;
            let filt = graph_sublevel_filtration(&graph, cfg.transform, cfg.direction)?;
            let (h0, h1) = graph_persistence(&filt);
            Ok(GraphUnit {
                subject: subject.subject_id().to_string(),
                network: n.clone(),
                graph,
                shrinkage_used,
                diagrams: [h0, h1],
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTestEntry {
    pub filtration: FiltrationKind,
    pub network: String,
    /// Channel for per-ROI Rips matrices.
    pub roi: Option<String>,
    pub dimension: usize,
    pub group_a: String,
    pub group_b: String,
    pub result: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationEntry {
    /// `rips_wd_roi` or `graph_lifespans`.
    pub features: String,
    pub network: String,
    pub dimension: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub subjects: usize,
    pub networks: Vec<String>,
    pub group_tests: Vec<GroupTestEntry>,
    pub classification: Vec<ClassificationEntry>,
}

impl PipelineSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn classification_for(&self, features: &str, network: &str, dimension: usize) -> Option<&EvalReport> {
        self.classification
            .iter()
            .find(|c| c.features == features && c.network == network && c.dimension == dimension)
            .map(|c| &c.report)
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn group_pairs(manifest: &Manifest) -> Vec<(String, String)> {
    let mut groups: Vec<&String> = manifest.values().collect();
    groups.sort();
    groups.dedup();
    let mut pairs = Vec::new();
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            pairs.push(((*a).clone(), (*b).clone()));
        }
    }
    pairs
}

/// Run a closure on a pool of `jobs` threads (all CPUs if `None`).
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Load the cohort, run both pipelines, and write the full output tree.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary> {
    cfg.validate()?;
    with_pool(cfg.jobs, || run_pipeline_inner(cfg))?
}

fn run_pipeline_inner(cfg: &PipelineConfig) -> Result<PipelineSummary> {
    let cohort = cfg.load_cohort()?;
    let networks = cfg.network_names(&cohort.atlas)?;
    let manifest = cohort.manifest();
    let wparams = cfg.wasserstein()?;
    let model = cfg.model_spec()?;
    let protocol = cfg.protocol();
    let out = &cfg.out;
    let pairs = group_pairs(&manifest);
    write_file(&out.join("config.toml"), cfg.to_toml())?;

    info!("rips stage: {} subjects x {} networks", cohort.subjects.len(), networks.len());
    let rips = rips_stage(&cohort, &networks, cfg)?;
    info!("graph stage");
    let graphs = graph_stage(&cohort, &networks, cfg)?;

    let mut tests = Vec::new();
    let mut classification = Vec::new();

    // Per-subject artifacts.
    for u in &rips {
        let dir = out.join(&u.subject).join(&u.network);
        for (c, ch) in u.channels.iter().enumerate() {
            write_file(&dir.join(format!("pointcloud_{ch}.json")), u.clouds[c].to_json())?;
            for d in &u.diagrams[c] {
                write_file(&dir.join(format!("rips_{ch}_H{}.json", d.dimension)), d.to_json())?;
            }
        }
        let cap = u
            .diagrams
            .iter()
            .flatten()
            .map(|d| d.max_finite_value())
            .fold(0.0, f64::max);
        write_file(&dir.join("rips_barcode.svg"), emit_barcode_svg(&u.diagrams[0], cap))?;
    }
    for g in &graphs {
        let dir = out.join(&g.subject).join(&g.network);
        write_file(&dir.join("graph.json"), g.graph.to_json())?;
        for d in &g.diagrams {
            write_file(&dir.join(format!("graph_H{}.json", d.dimension)), d.to_json())?;
        }
        write_file(&dir.join("graph_barcode.svg"), emit_barcode_svg(&g.diagrams, cfg.lifespan_cap))?;
    }

    // Inter-ROI matrices, computed in parallel over (subject, network, dimension).
    let roi_work: Vec<(usize, usize)> = (0..rips.len())
        .flat_map(|u| (0..=cfg.maxdim).map(move |d| (u, d)))
        .collect();
    let roi_mats: Vec<DistanceMatrix> = roi_work
        .par_iter()
        .map(|&(u, d)| {
            let unit = &rips[u];
            let items: Vec<_> = unit
                .channels
                .iter()
                .cloned()
                .zip(unit.diagrams.iter().map(|ds| ds[d].clone()))
                .collect();
            let mut m = inter_roi_matrix(&items, &wparams)?;
            m.meta.network = Some(unit.network.clone());
            m.meta.subject = Some(unit.subject.clone());
            Ok(m)
        })
        .collect::<Result<_>>()?;
    for (&(u, d), m) in roi_work.iter().zip(&roi_mats) {
        let unit = &rips[u];
        m.write(&out.join(&unit.subject).join(&unit.network).join(format!("wd_roi_H{d}.csv")))?;
    }

    for n in &networks {
        let cohort_dir = out.join("cohort").join(n);
        fs::create_dir_all(&cohort_dir).map_err(|e| Error::io(&cohort_dir, e))?;
        let net_rips: Vec<&RipsUnit> = rips.iter().filter(|u| &u.network == n).collect();
        let net_graphs: Vec<&GraphUnit> = graphs.iter().filter(|g| &g.network == n).collect();

        // Rips: inter-subject matrix per ROI and dimension.
        let channels = &net_rips[0].channels;
        for (c, ch) in channels.iter().enumerate() {
            for d in 0..=cfg.maxdim {
                let items: Vec<_> = net_rips
                    .iter()
                    .map(|u| (u.subject.clone(), u.diagrams[c][d].clone()))
                    .collect();
                let mut m = inter_subject_matrix(&items, &wparams)?;
                m.meta.filtration = FiltrationKind::Rips;
                m.meta.network = Some(n.clone());
                m.write(&cohort_dir.join(format!("rips_wd_s_{ch}_H{d}.csv")))?;
                for (a, b) in &pairs {
                    tests.push(GroupTestEntry {
                        filtration: FiltrationKind::Rips,
                        network: n.clone(),
                        roi: Some(ch.clone()),
                        dimension: d,
                        group_a: a.clone(),
                        group_b: b.clone(),
                        result: group_distance_test(&m, &manifest, a, b, Extraction::WithinBlocks)?,
                    });
                }
            }
        }

        // Graph: inter-subject matrices and lifespans per dimension.
        for d in 0..2 {
            let items: Vec<_> = net_graphs
                .iter()
                .map(|g| (g.subject.clone(), g.diagrams[d].clone()))
                .collect();
            let mut m = inter_subject_matrix(&items, &wparams)?;
            m.meta.network = Some(n.clone());
            m.write(&cohort_dir.join(format!("graph_wd_s_H{d}.csv")))?;
            for (a, b) in &pairs {
                tests.push(GroupTestEntry {
                    filtration: FiltrationKind::Graph,
                    network: n.clone(),
                    roi: None,
                    dimension: d,
                    group_a: a.clone(),
                    group_b: b.clone(),
                    result: group_distance_test(&m, &manifest, a, b, Extraction::WithinBlocks)?,
                });
            }
            let feats: Vec<LifespanFeatures> = net_graphs
                .iter()
                .map(|g| {
                    let capped = cap_diagram(&g.diagrams[d], cfg.lifespan_cap);
                    LifespanFeatures::from_diagram(&g.subject, n, &capped, cfg.topk, cfg.lifespan_cap)
                })
                .collect();
            write_file(&cohort_dir.join(format!("graph_lifespans_H{d}.csv")), lifespans_to_csv(&feats))?;
            let ds = make_dataset_lifespans(&feats, &manifest)?;
            let report = evaluate(&ds, protocol, &model, cfg.seed)?;
            write_file(&cohort_dir.join(format!("classify_graph_lifespans_H{d}.json")), report.to_json())?;
            classification.push(ClassificationEntry {
                features: "graph_lifespans".into(),
                network: n.clone(),
                dimension: d,
                report,
            });
        }

        // Rips: classification on flattened inter-ROI matrices.
        for d in 0..=cfg.maxdim {
            let mats: Vec<(String, DistanceMatrix)> = roi_work
                .iter()
                .zip(&roi_mats)
                .filter(|((u, dd), _)| *dd == d && &rips[*u].network == n)
                .map(|((u, _), m)| (rips[*u].subject.clone(), m.clone()))
                .collect();
            let ds = make_dataset_wd(&mats, &manifest)?;
            let report = evaluate(&ds, protocol, &model, cfg.seed)?;
            write_file(&cohort_dir.join(format!("classify_rips_wd_roi_H{d}.json")), report.to_json())?;
            classification.push(ClassificationEntry {
                features: "rips_wd_roi".into(),
                network: n.clone(),
                dimension: d,
                report,
            });
        }
    }

    let stats: BTreeMap<String, Vec<&GroupTestEntry>> = tests.iter().fold(BTreeMap::new(), |mut acc, t| {
        acc.entry(t.network.clone()).or_default().push(t);
        acc
    });
    for (n, entries) in stats {
        write_file(
            &out.join("cohort").join(&n).join("group_tests.json"),
            serde_json::to_string_pretty(&entries).expect("tests serialize"),
        )?;
    }
    let summary = PipelineSummary {
        subjects: cohort.subjects.len(),
        networks,
        group_tests: tests,
        classification,
    };
    write_file(&out.join("summary.json"), summary.to_json())?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_synthetic_cohort, SyntheticRecipe};

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg = PipelineConfig::from_toml("seed = 7\nq = inf\nessential = \"cap=2.5\"\nfolds = 5\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert!(cfg.q.is_infinite());
        assert_eq!(cfg.wasserstein().unwrap().essential_policy, EssentialPolicy::Cap(2.5));
        assert_eq!(cfg.protocol(), Protocol::KFold { folds: 5 });
        assert_eq!(cfg.topk, 10);
        let back = PipelineConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(PipelineConfig::from_toml("sed = 1\n").is_err());
    }

    #[test]
    fn missing_input_rejected() {
        let cfg = PipelineConfig {
            input: Some(PathBuf::from("/nonexistent/cohort")),
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn small_run_writes_tree() {
        let dir = tempfile::tempdir().unwrap();
        let cohort_dir = dir.path().join("cohort");
        generate_synthetic_cohort(5, 40, 3, SyntheticRecipe::LoopVsNoise)
            .unwrap()
            .write(&cohort_dir)
            .unwrap();
        let cfg = PipelineConfig {
            input: Some(cohort_dir),
            out: dir.path().join("out"),
            maxdim: 1,
            jobs: Some(2),
            ..PipelineConfig::default()
        };
        let summary = run_pipeline(&cfg).unwrap();
        assert_eq!(summary.subjects, 10);
        let out = dir.path().join("out");
        assert!(out.join("A_001/N1/rips_N1_01_H1.json").exists());
        assert!(out.join("A_001/N1/wd_roi_H1.csv").exists());
        assert!(out.join("B_005/N2/graph_H0.json").exists());
        assert!(out.join("cohort/N1/classify_rips_wd_roi_H1.json").exists());
        assert!(out.join("summary.json").exists());
        assert!(summary.classification_for("graph_lifespans", "N2", 0).is_some());
    }
}
