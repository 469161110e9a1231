use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::{GrayImage, RgbImage as ImgRgb};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dmdsal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("DMDSAL_JOBS").output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn disk_png(path: &Path, w: u32, h: u32, r: f64, color: [u8; 3]) {
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let img = ImgRgb::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        if dx * dx + dy * dy <= r * r {
            image::Rgb(color)
        } else {
            image::Rgb([120, 120, 120])
        }
    });
    img.save(path).unwrap();
}

fn disk_mask_png(path: &Path, w: u32, h: u32, r: f64) {
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    GrayImage::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        image::Luma([if dx * dx + dy * dy <= r * r { 255 } else { 0 }])
    })
    .save(path)
    .unwrap();
}

fn dataset(dir: &Path) -> (PathBuf, PathBuf) {
    let (imgs, gt) = (dir.join("imgs"), dir.join("gt"));
    fs::create_dir_all(&imgs).unwrap();
    fs::create_dir_all(&gt).unwrap();
    let specs = [("a", 48, 40, 10.0, [230, 30, 30]), ("b", 40, 40, 8.0, [30, 40, 220]), ("c", 56, 44, 12.0, [40, 200, 60])];
    for (name, w, h, r, color) in specs {
        disk_png(&imgs.join(format!("{name}.png")), w, h, r, color);
        disk_mask_png(&gt.join(format!("{name}.png")), w, h, r);
    }
    (imgs, gt)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn saliency_writes_map_mask_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flower.png");
    disk_png(&input, 50, 30, 8.0, [220, 40, 40]);
    let (map, seg, dump) = (dir.path().join("map.png"), dir.path().join("seg.png"), dir.path().join("dmd.json"));
    let out = run(&["saliency", p(&input), "--out", p(&map), "--seg", p(&seg), "--dump-dmd", p(&dump)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = image::open(&map).unwrap();
    assert_eq!((m.width(), m.height()), (50, 30));
    assert!(matches!(m.color(), image::ColorType::L8));
    let s = image::open(&seg).unwrap().to_luma8();
    assert!(s.pixels().all(|px| px.0[0] == 0 || px.0[0] == 255));
    let json = read_json(&dump);
    assert_eq!(json["color"].as_array().unwrap().len(), 2);
    assert_eq!(json["luminance"].as_array().unwrap().len(), 2);
}

#[test]
fn grayscale_input_gives_black_map() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gray.png");
    GrayImage::from_pixel(20, 16, image::Luma([77])).save(&input).unwrap();
    let map = dir.path().join("map.png");
    let out = run(&["saliency", p(&input), "--out", p(&map)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(image::open(&map).unwrap().to_luma8().pixels().all(|px| px.0[0] == 0));
}

#[test]
fn saliency_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    disk_png(&input, 20, 20, 5.0, [200, 0, 0]);
    let map = dir.path().join("map.png");

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"pipeline": {"color_weight": 0, "luminance_weight": 0}}"#).unwrap();
    let out = run(&["saliency", p(&input), "--out", p(&map), "--config", p(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("color_weight + pipeline.luminance_weight"));

    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"pipline": {}}"#).unwrap();
    let out = run(&["saliency", p(&input), "--out", p(&map), "--config", p(&unknown)]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&["saliency", p(&input), "--out", p(&map), "--weights", "0,0"]);
    assert_eq!(out.status.code(), Some(3));

    let corrupt = dir.path().join("corrupt.png");
    fs::write(&corrupt, b"not an image").unwrap();
    assert_eq!(run(&["saliency", p(&corrupt), "--out", p(&map)]).status.code(), Some(2));
    let missing = dir.path().join("missing.png");
    assert_eq!(run(&["saliency", p(&missing), "--out", p(&map)]).status.code(), Some(2));
}

#[test]
fn batch_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (imgs, _) = dataset(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&["batch", p(&imgs), "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_dir(out_dir.join("maps")).unwrap().count(), 3);

    fs::write(imgs.join("c.png"), b"garbage").unwrap();
    let out_dir = dir.path().join("out2");
    let out = run(&["batch", p(&imgs), "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("2/3 succeeded"));
    assert_eq!(fs::read_dir(out_dir.join("maps")).unwrap().count(), 2);

    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    assert_eq!(run(&["batch", p(&empty), "--out", p(&out_dir)]).status.code(), Some(2));
}

#[test]
fn batch_report_aggregates_per_image_values() {
    let dir = tempfile::tempdir().unwrap();
    let (imgs, gt) = dataset(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&["batch", p(&imgs), "--out", p(&out_dir), "--gt", p(&gt)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&out_dir.join("report.json"));
    let per = report["per_image"].as_array().unwrap();
    assert_eq!(per.len(), 3);
    for key in ["auc", "max_f", "f_at_adaptive"] {
        let mean = per.iter().map(|m| m[key].as_f64().unwrap()).sum::<f64>() / 3.0;
        assert!((report["aggregate"][key].as_f64().unwrap() - mean).abs() <= 1e-12);
    }
    let csv = fs::read_to_string(out_dir.join("curves/a.csv")).unwrap();
    assert!(csv.starts_with("threshold,precision,recall,fpr,tpr\n"));
    assert_eq!(csv.lines().count(), 257);
}

#[test]
fn batch_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (imgs, _) = dataset(dir.path());
    GrayImage::from_pixel(12, 12, image::Luma([100])).save(imgs.join("flat.png")).unwrap();
    let out_dir = dir.path().join("out");
    assert_eq!(run(&["batch", p(&imgs), "--out", p(&out_dir)]).status.code(), Some(0));
    let eval_dir = dir.path().join("eval");
    let out = run(&["eval", p(&out_dir.join("maps")), p(&out_dir.join("masks")), "--out", p(&eval_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&eval_dir.join("report.json"));
    for m in report["per_image"].as_array().unwrap() {
        assert_eq!(m["max_f"].as_f64().unwrap(), 1.0, "{}", m["id"]);
    }
    assert_eq!(report["excluded_from_auc"], serde_json::json!(["flat"]));
}

#[test]
fn eval_self_and_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (_, gt) = dataset(dir.path());
    let out_dir = dir.path().join("self");
    let out = run(&["eval", p(&gt), p(&gt), "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["aggregate"]["max_f"].as_f64(), Some(1.0));
    assert_eq!(report["aggregate"]["auc"].as_f64(), Some(1.0));

    let (maps, masks) = (dir.path().join("fmaps"), dir.path().join("fgt"));
    fs::create_dir_all(&maps).unwrap();
    fs::create_dir_all(&masks).unwrap();
    GrayImage::from_raw(4, 1, vec![255, 204, 51, 0]).unwrap().save(maps.join("px.png")).unwrap();
    GrayImage::from_raw(4, 1, vec![255, 255, 0, 0]).unwrap().save(masks.join("px.png")).unwrap();
    let out_dir = dir.path().join("fixture");
    assert_eq!(run(&["eval", p(&maps), p(&masks), "--out", p(&out_dir)]).status.code(), Some(0));
    let report = read_json(&out_dir.join("report.json"));
    let m = &report["per_image"][0];
    assert_eq!(m["auc"].as_f64(), Some(1.0));
    assert_eq!(m["max_f"].as_f64(), Some(1.0));
    // Mean 0.5, threshold min(1.0, 0.95): only the first pixel, P = 1, R = 1/2.
    assert!((m["f_at_adaptive"].as_f64().unwrap() - 0.65 / 0.8).abs() <= 1e-12);

    let other = dir.path().join("other");
    fs::create_dir_all(&other).unwrap();
    GrayImage::from_raw(4, 1, vec![0; 4]).unwrap().save(other.join("zz.png")).unwrap();
    assert_eq!(run(&["eval", p(&maps), p(&other), "--out", p(&out_dir)]).status.code(), Some(2));
}
