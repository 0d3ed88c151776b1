//! End-to-end CLI behavior: the fit → cluster pipeline, exit codes, and
//! file contracts.

mod common;

use std::process::{Command, Output};

use kentmix::simulate::generate_mixture_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kentmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kentmix"))
        .args(args)
        .output()
        .expect("spawn kentmix")
}

fn write_dataset(path: &std::path::Path, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (points, _) = generate_mixture_sample(&common::s1_truth(), n, &mut rng).unwrap();
    kentmix::io::write_points_csv(path, &points).unwrap();
}

#[test]
fn fit_then_cluster_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let model = dir.path().join("model.json");
    let labels = dir.path().join("labels.csv");
    write_dataset(&data, 90, 4);

    let out = kentmix(&[
        "fit",
        "--input",
        data.to_str().unwrap(),
        "--g",
        "3",
        "--seed",
        "1",
        "--restarts",
        "2",
        "--max-iter",
        "25",
        "--output",
        model.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // emitted model passes the validating reader
    let parsed =
        kentmix::MixtureModel::from_json(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(parsed.g(), 3);

    let out = kentmix(&[
        "cluster",
        "--model",
        model.to_str().unwrap(),
        "--input",
        data.to_str().unwrap(),
        "--output",
        labels.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&labels).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,label");
    assert_eq!(lines.len(), 91, "header plus one row per observation");
    for (i, line) in lines.iter().skip(1).enumerate() {
        let (idx, label) = line.split_once(',').unwrap();
        assert_eq!(idx.parse::<usize>().unwrap(), i);
        let l: usize = label.parse().unwrap();
        assert!((1..=3).contains(&l));
    }
}

#[test]
fn select_reports_table_and_validates_range() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let table = dir.path().join("table.csv");
    write_dataset(&data, 60, 9);

    // inverted range is a usage error (exit 2)
    let out = kentmix(&[
        "select",
        "--input",
        data.to_str().unwrap(),
        "--gmin",
        "3",
        "--gmax",
        "2",
        "--output",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = kentmix(&[
        "select",
        "--input",
        data.to_str().unwrap(),
        "--gmin",
        "1",
        "--gmax",
        "2",
        "--seed",
        "3",
        "--restarts",
        "2",
        "--max-iter",
        "15",
        "--output",
        table.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&table).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "g,loglik,penalty,criterion,selected");
    assert_eq!(lines.len(), 3);
    assert_eq!(text.matches("true").count(), 1, "exactly one selected row");
}

#[test]
fn usage_errors_exit_2_and_domain_errors_exit_1() {
    // unknown flag
    let out = kentmix(&["fit", "--whatever", "x"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown subcommand
    let out = kentmix(&["transmogrify"]);
    assert_eq!(out.status.code(), Some(2));
    // missing input file is a runtime error, not usage
    let out = kentmix(&[
        "fit", "--input", "/nonexistent.csv", "--g", "2", "--output", "/tmp/x.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // malformed CSV
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,c\n1,2\n").unwrap();
    let out = kentmix(&[
        "fit",
        "--input",
        bad.to_str().unwrap(),
        "--g",
        "1",
        "--output",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr was: {err}");
    // help works and exits 0
    let out = kentmix(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let help = String::from_utf8_lossy(&out.stdout);
    for sub in ["fit", "select", "cluster", "simulate", "segment"] {
        assert!(help.contains(sub));
    }
    // subcommand help prints defaults
    let out = kentmix(&["fit", "--help"]);
    let help = String::from_utf8_lossy(&out.stdout);
    assert!(help.contains("default"));
}

#[test]
fn normalize_flag_projects_raw_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("raw.csv");
    // rows with arbitrary magnitudes
    std::fs::write(&data, "x,y,z\n3,4,0\n0,5,0\n-2,0,0\n0,0,9\n").unwrap();
    let model = dir.path().join("m.json");
    // strict mode rejects them
    let out = kentmix(&[
        "fit",
        "--input",
        data.to_str().unwrap(),
        "--g",
        "1",
        "--output",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("normalize"), "stderr was: {err}");
    // --normalize accepts them
    let out = kentmix(&[
        "fit",
        "--input",
        data.to_str().unwrap(),
        "--g",
        "1",
        "--normalize",
        "--restarts",
        "1",
        "--max-iter",
        "5",
        "--output",
        model.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_smoke_writes_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("result.json");
    let out = kentmix(&[
        "simulate",
        "--study",
        "s4",
        "--n",
        "150",
        "--reps",
        "2",
        "--seed",
        "5",
        "--restarts",
        "2",
        "--max-iter",
        "15",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["study"], "s4");
    assert!(json["ari_mean"].as_f64().unwrap() > 0.0);
    assert_eq!(json["per_rep"].as_array().unwrap().len(), 2);
}

#[test]
fn segment_labels_cover_every_pixel() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = dir.path().join("img.ppm");
    // 4x2 image with one black pixel and two color populations
    let pixels: Vec<u8> = vec![
        250, 10, 10, 250, 12, 9, 0, 0, 0, 10, 10, 250, //
        250, 9, 11, 10, 12, 250, 9, 10, 251, 11, 9, 250,
    ];
    let img = kentmix::io::ImageGrid::new(4, 2, pixels).unwrap();
    kentmix::io::save_ppm(&img_path, &img).unwrap();
    let labels_path = dir.path().join("labels.csv");
    let out = kentmix(&[
        "segment",
        "--image",
        img_path.to_str().unwrap(),
        "--g",
        "2",
        "--seed",
        "2",
        "--restarts",
        "2",
        "--max-iter",
        "15",
        "--labels",
        labels_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&labels_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9, "header plus width*height rows");
    // the black pixel keeps the reserved label 0
    assert_eq!(lines[3], "2,0");
}
