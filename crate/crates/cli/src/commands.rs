use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use ph_connect::analytics::{group_distance_test, inter_subject_matrix, DistanceMatrix, Extraction, FiltrationKind};
use ph_connect::barcode::emit_barcode_svg;
use ph_connect::classify::{evaluate, make_dataset_wd, read_feature_table, Dataset, FeatureKind};
use ph_connect::distances::parse_exponent;
use ph_connect::embedding::PointCloud;
use ph_connect::graph::{
    build_positive_graph, graph_persistence, graph_sublevel_filtration, partial_correlation_with_fallback,
    pearson_correlation_matrix,
};
use ph_connect::ingest::{
    generate_synthetic_cohort_with_atlas, load_manifest, load_timeseries, slice_network, NetworkAtlas,
    SyntheticRecipe, TableFormat, TimeSeriesTable,
};
use ph_connect::pipeline::{embed_network, run_pipeline, with_pool, PipelineConfig};
use ph_connect::rips::rips_diagrams;
use ph_connect::PersistenceDiagram;

use crate::{Command, CommonArgs};

pub const SYNTH_TIMEPOINTS: usize = 100;

/// Defaults, then the config file, then flags.
fn resolve(common: &CommonArgs, input: Option<&Path>) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let c = common.clone();
    if let Some(v) = input {
        cfg.input = Some(v.to_path_buf());
    }
    if c.manifest.is_some() {
        cfg.manifest = c.manifest;
    }
    if c.atlas.is_some() {
        cfg.atlas = c.atlas;
    }
    if !c.network.is_empty() {
        cfg.networks = c.network;
    }
    if let Some(v) = c.out {
        cfg.out = v;
    }
    cfg.m = c.m.unwrap_or(cfg.m);
    cfg.tau = c.tau.unwrap_or(cfg.tau);
    cfg.maxdim = c.maxdim.unwrap_or(cfg.maxdim);
    cfg.max_simplices = c.max_simplices.unwrap_or(cfg.max_simplices);
    if let Some(p) = &c.p {
        cfg.p = parse_exponent(p).context("--p")?;
    }
    if let Some(q) = &c.q {
        cfg.q = parse_exponent(q).context("--q")?;
    }
    if let Some(e) = c.essential {
        cfg.essential = e;
    }
    if let Some(v) = c.weight_source {
        cfg.weight_source = v.into();
    }
    if let Some(v) = c.transform {
        cfg.transform = v.into();
    }
    if let Some(v) = c.direction {
        cfg.direction = v.into();
    }
    cfg.shrinkage = c.shrinkage.unwrap_or(cfg.shrinkage);
    cfg.topk = c.topk.unwrap_or(cfg.topk);
    if let Some(m) = c.model {
        cfg.model = match m {
            crate::ModelArg::Knn => "knn".into(),
            crate::ModelArg::Logistic => "logistic".into(),
        };
    }
    if c.folds.is_some() {
        cfg.folds = c.folds;
    }
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    if c.jobs.is_some() {
        cfg.jobs = c.jobs;
    }
    cfg.wasserstein().context("distance parameters")?;
    cfg.embedding().context("embedding parameters")?;
    cfg.model_spec().context("--model")?;
    if cfg.maxdim > 3 {
        bail!("--maxdim must be at most 3, got {}", cfg.maxdim);
    }
    if cfg.jobs == Some(0) {
        bail!("--jobs must be positive");
    }
    Ok(cfg)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Explicit atlas, else `atlas.json` next to the input, else the 160-ROI atlas.
fn atlas_for(cfg: &PipelineConfig, input: &Path) -> Result<NetworkAtlas> {
    if let Some(p) = &cfg.atlas {
        return Ok(NetworkAtlas::read(p)?);
    }
    let sibling = input.parent().unwrap_or(Path::new(".")).join("atlas.json");
    if sibling.exists() {
        return Ok(NetworkAtlas::read(&sibling)?);
    }
    Ok(NetworkAtlas::dosenbach())
}

fn load_table(cfg: &PipelineConfig, input: &Path) -> Result<(TimeSeriesTable, NetworkAtlas, Vec<String>)> {
    let table = load_timeseries(input, TableFormat::Csv)?;
    let atlas = atlas_for(cfg, input)?;
    let networks = cfg.network_names(&atlas)?;
    Ok((table, atlas, networks))
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            recipe,
            n,
            timepoints,
            common,
        } => synth(&recipe, n, timepoints, &resolve(&common, None)?),
        Command::Embed { input, common } => {
            let cfg = resolve(&common, None)?;
            with_pool(cfg.jobs, || embed(&input, &cfg))?
        }
        Command::Rips { input, common } => {
            let cfg = resolve(&common, None)?;
            with_pool(cfg.jobs, || rips(&input, &cfg))?
        }
        Command::Graphph { input, common } => {
            let cfg = resolve(&common, None)?;
            with_pool(cfg.jobs, || graphph(&input, &cfg))?
        }
        Command::Wdist { input, common } => {
            let cfg = resolve(&common, None)?;
            with_pool(cfg.jobs, || wdist(&input, &cfg))?
        }
        Command::Stats { input, common } => stats(&input, &resolve(&common, None)?),
        Command::Classify { input, common } => {
            let cfg = resolve(&common, None)?;
            with_pool(cfg.jobs, || classify(&input, &cfg))?
        }
        Command::Run { input, common } => run(&resolve(&common, input.as_deref())?),
    }
}

fn synth(recipe: &str, n: usize, timepoints: usize, cfg: &PipelineConfig) -> Result<()> {
    let recipe: SyntheticRecipe = recipe.parse().context("--recipe")?;
    let atlas = match &cfg.atlas {
        Some(p) => NetworkAtlas::read(p)?,
        None => NetworkAtlas::synthetic(),
    };
    let cohort = generate_synthetic_cohort_with_atlas(n, timepoints, cfg.seed, recipe, &atlas)?;
    cohort.write(&cfg.out)?;
    println!("wrote {} subjects to {}", cohort.subjects.len(), cfg.out.display());
    Ok(())
}

fn embed(input: &Path, cfg: &PipelineConfig) -> Result<()> {
    let (table, atlas, networks) = load_table(cfg, input)?;
    let params = cfg.embedding()?;
    for n in &networks {
        let sliced = slice_network(&table, &atlas, n)?;
        let dir = cfg.out.join(table.subject_id()).join(n);
        for cloud in embed_network(&sliced, params)? {
            write(&dir.join(format!("pointcloud_{}.json", cloud.source_channel)), cloud.to_json())?;
        }
        info!("embedded {} channels of {n}", sliced.channels());
    }
    Ok(())
}

fn rips(input: &Path, cfg: &PipelineConfig) -> Result<()> {
    let cloud = PointCloud::read(input)?;
    let diagrams = rips_diagrams(&cloud, &cfg.rips_spec(), cfg.maxdim)
        .with_context(|| format!("Rips persistence of {}", input.display()))?;
    for d in &diagrams {
        let path = cfg.out.join(format!("rips_{}_H{}.json", cloud.source_channel, d.dimension));
        write(&path, d.to_json())?;
        println!("H{}: {} pairs -> {}", d.dimension, d.len(), path.display());
    }
    let cap = diagrams.iter().map(|d| d.max_finite_value()).fold(0.0, f64::max);
    write(&cfg.out.join(format!("rips_{}_barcode.svg", cloud.source_channel)), emit_barcode_svg(&diagrams, cap))?;
    Ok(())
}

fn graphph(input: &Path, cfg: &PipelineConfig) -> Result<()> {
    let (table, atlas, networks) = load_table(cfg, input)?;
    for n in &networks {
        let sliced = slice_network(&table, &atlas, n)?;
        let corr = pearson_correlation_matrix(&sliced).with_context(|| format!("network {n}"))?;
        let (partial, lambda) = partial_correlation_with_fallback(&corr, cfg.shrinkage)?;
        let graph = build_positive_graph(sliced.channel_names().to_vec(), &corr, &partial, cfg.weight_source)?;
        let filt = graph_sublevel_filtration(&graph, cfg.transform, cfg.direction)?;
        let (h0, h1) = graph_persistence(&filt);
        let dir = cfg.out.join(table.subject_id()).join(n);
        write(&dir.join("graph.json"), graph.to_json())?;
        write(&dir.join("graph_H0.json"), h0.to_json())?;
        write(&dir.join("graph_H1.json"), h1.to_json())?;
        let diagrams = [h0, h1];
        write(&dir.join("graph_barcode.svg"), emit_barcode_svg(&diagrams, cfg.lifespan_cap))?;
        println!(
            "{n}: {} edges (shrinkage {lambda}), H0 {} pairs, H1 {} pairs",
            graph.edges.len(),
            diagrams[0].len(),
            diagrams[1].len()
        );
    }
    Ok(())
}

/// File stems if they are unique, else the paths without extension.
fn labels_for(paths: &[PathBuf]) -> Vec<String> {
    let stems: Vec<String> = paths
        .iter()
        .map(|p| p.file_stem().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    let mut sorted = stems.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() == stems.len() {
        stems
    } else {
        paths
            .iter()
            .map(|p| p.with_extension("").to_string_lossy().into_owned())
            .collect()
    }
}

fn wdist(inputs: &[PathBuf], cfg: &PipelineConfig) -> Result<()> {
    if inputs.len() < 2 {
        bail!("wdist needs at least two diagrams");
    }
    let params = cfg.wasserstein()?;
    let labels = labels_for(inputs);
    let items: Vec<(String, PersistenceDiagram)> = inputs
        .iter()
        .zip(labels)
        .map(|(p, l)| Ok((l, PersistenceDiagram::read(p)?)))
        .collect::<Result<_>>()?;
    let mut m = inter_subject_matrix(&items, &params)?;
    if items.iter().all(|(l, _)| l.rsplit('/').next().unwrap_or(l).starts_with("rips")) {
        m.meta.filtration = FiltrationKind::Rips;
    }
    let path = cfg.out.join(format!("wdist_H{}.csv", m.meta.dimension));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    m.write(&path)?;
    if items.len() == 2 {
        println!("{}", ph_connect::fmt_f64(m.get(0, 1)));
    } else {
        println!("{}x{} matrix -> {}", m.size(), m.size(), path.display());
    }
    Ok(())
}

fn manifest(cfg: &PipelineConfig) -> Result<BTreeMap<String, String>> {
    let path = cfg.manifest_path().context("--manifest is required")?;
    Ok(load_manifest(&path)?)
}

fn stats(input: &Path, cfg: &PipelineConfig) -> Result<()> {
    let matrix = DistanceMatrix::read(input)?;
    let groups = manifest(cfg)?;
    let mut names: Vec<&String> = groups.values().collect();
    names.sort();
    names.dedup();
    let mut results = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let r = group_distance_test(&matrix, &groups, a, b, Extraction::WithinBlocks)?;
            println!("{a} vs {b}: W = {}, p = {:.6} ({:?})", r.statistic, r.p_value, r.method);
            results.push(serde_json::json!({ "group_a": a, "group_b": b, "result": r }));
        }
    }
    write(&cfg.out.join("group_tests.json"), serde_json::to_string_pretty(&results)?)?;
    Ok(())
}

fn classify(inputs: &[PathBuf], cfg: &PipelineConfig) -> Result<()> {
    let labels = manifest(cfg)?;
    let is_table = inputs.len() == 1
        && fs::read_to_string(&inputs[0])
            .with_context(|| format!("reading {}", inputs[0].display()))?
            .starts_with("subject_id");
    let dataset = if is_table {
        let rows = read_feature_table(&inputs[0])?;
        Dataset::from_rows(rows, &labels, FeatureKind::Lifespans)?
    } else {
        let mats: Vec<(String, DistanceMatrix)> = inputs
            .iter()
            .map(|p| {
                let m = DistanceMatrix::read(p)?;
                let subject = m
                    .meta
                    .subject
                    .clone()
                    .with_context(|| format!("{} has no subject in its sidecar", p.display()))?;
                Ok((subject, m))
            })
            .collect::<Result<_>>()?;
        make_dataset_wd(&mats, &labels)?
    };
    let report = evaluate(&dataset, cfg.protocol(), &cfg.model_spec()?, cfg.seed)?;
    let path = cfg.out.join("classify_report.json");
    write(&path, report.to_json())?;
    println!(
        "accuracy {:.4} over {} subjects ({}) -> {}",
        report.accuracy,
        dataset.len(),
        cfg.protocol(),
        path.display()
    );
    Ok(())
}

fn run(cfg: &PipelineConfig) -> Result<()> {
    let summary = run_pipeline(cfg)?;
    for c in &summary.classification {
        println!(
            "{:<16} {:<6} H{}  accuracy {:.4}",
            c.features, c.network, c.dimension, c.report.accuracy
        );
    }
    println!("outputs in {}", cfg.out.display());
    Ok(())
}
