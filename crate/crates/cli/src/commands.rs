use fuzzyseg::affinity::{select_scale, AffinityConfig, AffinityKind, AffinityModel, ScaleMode};
use fuzzyseg::autoseed::{auto_segment, AutoseedError};
use fuzzyseg::bench::{format_table, Batch};
use fuzzyseg::eval::{encode_rgb_png, palette, render_connectedness};
use fuzzyseg::image::{load_image, GrayImage, Spel};
use fuzzyseg::mofs::{segment_image, SeedSpec, SeedsFile, Semisegmentation, TieRule};
use fuzzyseg_service::ServiceConfig;
use serde_json::json;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{AffinityFlags, AutoseedFlags, RunConfig};
use crate::error::CliError;

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// `config.json`, `segmentation.fzs`, `object_<m>.png`, `labels.png` and `render.png`.
fn write_outputs(dir: &Path, config: &RunConfig, seg: &Semisegmentation) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    write_json(&dir.join("config.json"), config)?;
    seg.save(dir.join("segmentation.fzs")).map_err(CliError::runtime)?;
    seg.save_object_pngs(dir).map_err(CliError::runtime)?;
    let labels = seg.crisp_labels_lenient(TieRule::LowestId);
    write_file(&dir.join("labels.png"), &labels.encode_png())?;
    let render = render_connectedness(seg, &palette(seg.objects())).map_err(CliError::runtime)?;
    write_file(&dir.join("render.png"), &encode_rgb_png(&render))
}

fn print_scales(scales: &[usize]) {
    for (i, s) in scales.iter().enumerate() {
        println!("object {}: scale {s}x{s}", i + 1);
    }
}

fn load_inputs(c: &RunConfig) -> Result<(GrayImage, SeedSpec), CliError> {
    let img = load_image(c.require_image()?).map_err(CliError::config)?;
    let seeds = SeedsFile::load(c.require_seeds()?)
        .and_then(|f| f.seed_spec(img.width(), img.height()))
        .map_err(CliError::config)?;
    Ok((img, seeds))
}

fn resolve_affinity(c: &mut AffinityConfig, flags: &AffinityFlags) -> Result<(), CliError> {
    flags.apply(c);
    c.validate().map_err(CliError::config)
}

pub fn segment(
    image: Option<PathBuf>,
    seeds: Option<PathBuf>,
    output: Option<PathBuf>,
    config: Option<PathBuf>,
    flags: &AffinityFlags,
) -> Result<(), CliError> {
    let mut c = RunConfig::base(config.as_deref(), "segment")?;
    if c.autoseed.is_some() {
        return Err(CliError::Config("autoseed settings do not apply to segment; use autoseg".into()));
    }
    c.image = image.or(c.image);
    c.seeds = seeds.or(c.seeds);
    c.output = output.or(c.output);
    resolve_affinity(&mut c.affinity, flags)?;
    let out = c.require_output()?.to_path_buf();
    let (img, seeds) = load_inputs(&c)?;

    let start = Instant::now();
    let model = AffinityModel::fit(&img, &seeds.objects, &c.affinity).map_err(CliError::runtime)?;
    let seg = segment_image(&img, &seeds, &model).map_err(CliError::runtime)?;
    let seconds = start.elapsed().as_secs_f64();

    write_outputs(&out, &c, &seg)?;
    print_scales(&model.scales());
    println!("segmented {} objects in {seconds:.2}s; outputs in {}", seg.objects(), out.display());
    Ok(())
}

pub fn autoseg(
    image: Option<PathBuf>,
    output: Option<PathBuf>,
    config: Option<PathBuf>,
    auto_flags: &AutoseedFlags,
    flags: &AffinityFlags,
) -> Result<(), CliError> {
    let mut c = RunConfig::base(config.as_deref(), "autoseg")?;
    if c.seeds.is_some() {
        return Err(CliError::Config("a seeds file does not apply to autoseg; use segment".into()));
    }
    c.image = image.or(c.image);
    c.output = output.or(c.output);
    resolve_affinity(&mut c.affinity, flags)?;
    let mut auto = c.autoseed.take().unwrap_or_default();
    auto_flags.apply(&mut auto);
    auto.validate().map_err(CliError::config)?;
    c.autoseed = Some(auto.clone());
    let out = c.require_output()?.to_path_buf();
    let img = load_image(c.require_image()?).map_err(CliError::config)?;

    let start = Instant::now();
    let r = auto_segment(&img, &auto, &c.affinity).map_err(|e| match e {
        AutoseedError::BadK { .. } | AutoseedError::InvalidConfig(_) | AutoseedError::Image(_) => {
            CliError::config(e)
        }
        other => CliError::runtime(other),
    })?;
    let seconds = start.elapsed().as_secs_f64();

    let clicks: Vec<Vec<Spel>> =
        r.diagnostics.seeds.iter().map(|v| v.iter().map(|&(x, y)| Spel::new(x, y)).collect()).collect();
    write_outputs(&out, &c, &r.segmentation)?;
    write_json(&out.join("diagnostics.json"), &r.diagnostics)?;
    write_json(&out.join("seeds.json"), &SeedsFile::from_clicks(&clicks))?;
    let total: usize = r.diagnostics.seeds.iter().map(Vec::len).sum();
    println!("{} classes, {total} seeds", r.diagnostics.k);
    print_scales(&r.diagnostics.scales);
    println!("segmented in {seconds:.2}s; outputs in {}", out.display());
    Ok(())
}

pub fn scale(
    image: Option<PathBuf>,
    seeds: Option<PathBuf>,
    config: Option<PathBuf>,
    as_json: bool,
    flags: &AffinityFlags,
) -> Result<(), CliError> {
    let mut c = RunConfig::base(config.as_deref(), "scale")?;
    c.image = image.or(c.image);
    c.seeds = seeds.or(c.seeds);
    resolve_affinity(&mut c.affinity, flags)?;
    let (img, seeds) = load_inputs(&c)?;
    let mode = match c.affinity.affinity {
        AffinityKind::Skew => ScaleMode::Skew,
        AffinityKind::Gaussian | AffinityKind::GaussianAdaptive => ScaleMode::Gaussian,
    };
    let searched = c.affinity.affinity != AffinityKind::Gaussian && c.affinity.fixed_scale.is_none();
    let mut results = Vec::new();
    for (i, set) in seeds.objects.iter().enumerate() {
        let object = i + 1;
        if !searched {
            let side = c.affinity.fixed_scale.unwrap_or(3);
            results.push(json!({ "object": object, "side": side, "fixed": true, "trace": [] }));
            if !as_json {
                println!("object {object}: fixed scale {side}x{side}");
            }
            continue;
        }
        let sel = select_scale(&img, set, mode, &c.affinity.thresholds()).map_err(CliError::runtime)?;
        if !as_json {
            println!("object {object}: scale {}x{} ({mode:?} search)", sel.side, sel.side);
            println!("  {:>4}  {:>9}  {:>9}  {:>10}", "side", "mean", "std", "divergence");
            for step in &sel.trace {
                let d = step.divergence_to_next.map_or("-".to_string(), |d| format!("{d:.5}"));
                println!("  {:>4}  {:>9.5}  {:>9.5}  {:>10}", step.side, step.mean_pairs, step.std_pairs, d);
            }
        }
        results.push(json!({ "object": object, "side": sel.side, "fixed": false, "trace": sel.trace }));
    }
    if as_json {
        println!("{}", serde_json::to_string_pretty(&results).expect("serializable traces"));
    }
    Ok(())
}

pub fn bench(spec: &Path, jobs: usize) -> Result<(), CliError> {
    let batch = Batch::load(spec).map_err(CliError::config)?;
    let reports = batch.run(jobs).map_err(CliError::runtime)?;
    print!("{}", format_table(&reports));
    Ok(())
}

pub fn serve(
    bind: IpAddr,
    port: u16,
    allow_origin: Option<String>,
    static_dir: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut config = ServiceConfig::from_env().map_err(CliError::Config)?;
    config.allow_origin = allow_origin;
    config.static_dir = static_dir;
    config.validate().map_err(CliError::Config)?;
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::runtime)?;
    runtime.block_on(fuzzyseg_service::serve(SocketAddr::new(bind, port), config)).map_err(CliError::runtime)
}
