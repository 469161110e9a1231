//! The `saliency`, `batch` and `eval` subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;

use dmdsal::eval::{curves_csv, evaluate_dataset, EvalConfig, EvalPair, MetricsReport};
use dmdsal::pipeline::{segment, PipelineConfig};
use dmdsal::{detect, BinaryMask, DetectorConfig, Error, SaliencyMap};

use crate::config::{ConfigArgs, RunConfig};
use crate::io::{images_by_stem, load_map, load_mask, load_rgb, write_atomic, write_map, write_mask};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Clone, Args)]
pub struct SaliencyArgs {
    /// Input image (PNG, JPEG or PPM)
    pub input: PathBuf,
    /// Output map PNG
    #[arg(long)]
    pub out: PathBuf,
    /// Output segmentation mask PNG
    #[arg(long)]
    pub seg: Option<PathBuf>,
    /// Write the decomposition summaries as JSON
    #[arg(long = "dump-dmd", value_name = "JSON")]
    pub dump_dmd: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    /// Directory of input images
    pub input_dir: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth masks, matched by file stem
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, env = "DMDSAL_JOBS")]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Directory of grayscale saliency maps
    pub maps_dir: PathBuf,
    /// Directory of ground-truth masks
    pub gt_dir: PathBuf,
    /// Output directory for report.json and curves/
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Map as stored on disk: quantized to 8 bits, with the mask recomputed from
/// the quantized values so both files agree.
fn quantize(map: &SaliencyMap, cfg: &PipelineConfig) -> (SaliencyMap, BinaryMask) {
    let q = SaliencyMap::from_u8(map.width(), map.height(), &map.to_u8()).expect("quantized map is valid");
    let mask = segment(&q, cfg);
    (q, mask)
}

fn detect_file(path: &Path, cfg: &DetectorConfig) -> Result<dmdsal::Detection, (i32, String)> {
    let img = load_rgb(path).map_err(|e| (EXIT_INPUT, e))?;
    detect(&img, cfg).map_err(|e| {
        let code = match e {
            Error::InvalidImage(_) => EXIT_INPUT,
            Error::InvalidConfig(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        (code, format!("{}: {e}", path.display()))
    })
}

fn resolve(args: &ConfigArgs) -> Result<RunConfig, i32> {
    args.resolve().map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}

pub fn cmd_saliency(args: &SaliencyArgs) -> i32 {
    let cfg = match resolve(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let det = match detect_file(&args.input, &cfg.detector()) {
        Ok(d) => d,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let (map, mask) = quantize(&det.map, &cfg.pipeline);
    let mut result = write_map(&args.out, &map);
    if let Some(seg) = &args.seg {
        result = result.and_then(|_| write_mask(seg, &mask));
    }
    if let Some(dump) = &args.dump_dmd {
        let json = serde_json::json!({
            "working_size": det.working_size,
            "color": det.color_decompositions,
            "luminance": det.luminance_decompositions,
        });
        let text = serde_json::to_string_pretty(&json).expect("summaries serialize");
        result = result.and_then(|_| write_atomic(dump, text.as_bytes()));
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

/// Pairs maps with ground truth by stem; unmatched stems are reported.
fn match_pairs(
    maps: &BTreeMap<String, SaliencyMap>,
    gt_files: &BTreeMap<String, PathBuf>,
) -> (Vec<EvalPair>, usize) {
    let mut pairs = Vec::new();
    let mut failures = 0;
    for (stem, map) in maps {
        let Some(gt_path) = gt_files.get(stem) else {
            eprintln!("warning: no ground truth for {stem}");
            continue;
        };
        match load_mask(gt_path) {
            Ok(gt) if gt.dims() == map.dims() => pairs.push(EvalPair {
                id: stem.clone(),
                map: map.clone(),
                gt,
            }),
            Ok(gt) => {
                eprintln!(
                    "error: {stem}: map is {:?} but ground truth is {:?} (height, width)",
                    map.dims(),
                    gt.dims()
                );
                failures += 1;
            }
            Err(e) => {
                eprintln!("error: {e}");
                failures += 1;
            }
        }
    }
    for stem in gt_files.keys().filter(|s| !maps.contains_key(*s)) {
        eprintln!("warning: no map for ground truth {stem}");
    }
    (pairs, failures)
}

/// Writes `report.json` and `curves/<id>.csv` under `out`.
pub fn write_report(out: &Path, pairs: &[EvalPair], cfg: &EvalConfig) -> Result<MetricsReport, String> {
    let report = evaluate_dataset(pairs, cfg).map_err(|e| e.to_string())?;
    let curves = out.join("curves");
    fs::create_dir_all(&curves).map_err(|e| format!("cannot create {}: {e}", curves.display()))?;
    for pair in pairs {
        let csv = curves_csv(&pair.map, &pair.gt).map_err(|e| format!("{}: {e}", pair.id))?;
        write_atomic(&curves.join(format!("{}.csv", pair.id)), csv.as_bytes())?;
    }
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    json.push('\n');
    write_atomic(&out.join("report.json"), json.as_bytes())?;
    Ok(report)
}

pub fn cmd_batch(args: &BatchArgs) -> i32 {
    let cfg = match resolve(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let inputs = match images_by_stem(&args.input_dir) {
        Ok(m) if m.is_empty() => {
            eprintln!("error: no images in {}", args.input_dir.display());
            return EXIT_INPUT;
        }
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let gt_files = match args.gt.as_deref().map(images_by_stem).transpose() {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let (maps_dir, masks_dir) = (args.out.join("maps"), args.out.join("masks"));
    for dir in [&maps_dir, &masks_dir] {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return EXIT_FAILURE;
        }
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_FAILURE;
        }
    };

    let detector = cfg.detector();
    let items: Vec<(&String, &PathBuf)> = inputs.iter().collect();
    let results: Vec<Result<SaliencyMap, String>> = pool.install(|| {
        items
            .par_iter()
            .map(|(stem, path)| {
                let det = detect_file(path, &detector).map_err(|(_, msg)| msg)?;
                let (map, mask) = quantize(&det.map, &cfg.pipeline);
                write_map(&maps_dir.join(format!("{stem}.png")), &map)?;
                write_mask(&masks_dir.join(format!("{stem}.png")), &mask)?;
                Ok(map)
            })
            .collect()
    });

    let total = results.len();
    let mut maps = BTreeMap::new();
    for ((stem, _), result) in items.iter().zip(results) {
        match result {
            Ok(map) => {
                maps.insert((*stem).clone(), map);
            }
            Err(e) => eprintln!("error: {e}"),
        }
    }
    let mut failures = total - maps.len();

    if let Some(gt_files) = &gt_files {
        let (pairs, gt_failures) = match_pairs(&maps, gt_files);
        failures += gt_failures;
        if pairs.is_empty() {
            eprintln!("warning: no map/ground-truth pairs to evaluate");
        } else if let Err(e) = write_report(&args.out, &pairs, &cfg.eval()) {
            eprintln!("error: {e}");
            failures += 1;
        }
    }

    println!("{}/{} succeeded", maps.len(), total);
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn cmd_eval(args: &EvalArgs) -> i32 {
    let cfg = match resolve(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (map_files, gt_files) = match (images_by_stem(&args.maps_dir), images_by_stem(&args.gt_dir)) {
        (Ok(m), Ok(g)) => (m, g),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let mut failures = 0;
    let mut maps = BTreeMap::new();
    for (stem, path) in &map_files {
        if !gt_files.contains_key(stem) {
            continue;
        }
        match load_map(path) {
            Ok(m) => {
                maps.insert(stem.clone(), m);
            }
            Err(e) => {
                eprintln!("error: {e}");
                failures += 1;
            }
        }
    }
    for stem in map_files.keys().filter(|s| !gt_files.contains_key(*s)) {
        eprintln!("warning: no ground truth for {stem}");
    }
    let (pairs, gt_failures) = match_pairs(&maps, &gt_files);
    failures += gt_failures;
    if pairs.is_empty() {
        eprintln!("error: no matched map/ground-truth pairs");
        return EXIT_INPUT;
    }
    if let Err(e) = fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return EXIT_FAILURE;
    }
    match write_report(&args.out, &pairs, &cfg.eval()) {
        Ok(report) => {
            let agg = &report.aggregate;
            let auc = agg.auc.map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"));
            println!(
                "{} images: auc {auc}, max F {:.4}, adaptive F {:.4}",
                agg.images, agg.max_f, agg.f_at_adaptive
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    }
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}
