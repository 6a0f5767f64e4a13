use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rrq::pgm;
use rrq::ImageGray;

fn rrq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrq"))
        .args(args)
        .output()
        .expect("spawn rrq")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, n_train: &str, side: &str) {
    let out = rrq(&[
        "synth",
        "--output",
        p(dir),
        "--n-train",
        n_train,
        "--n-test",
        "6",
        "--height",
        side,
        "--width",
        side,
        "--seed",
        "9",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn train(input: &Path, model: &Path, m: &str, l: &str, k: &str) -> Output {
    rrq(&[
        "train",
        "--input",
        p(input),
        "--output",
        p(model),
        "--M",
        m,
        "--L",
        l,
        "--K",
        k,
        "--model-seed",
        "3",
        "--no-split",
    ])
}

#[test]
fn train_compress_decompress_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth(&corpus, "24", "8");
    let model = tmp.path().join("m.rrqm");
    let out = train(&corpus.join("train"), &model, "2", "6", "8");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.starts_with("layer\tK\tgamma\tactive\tdistortion\n"));
    assert_eq!(summary.lines().count(), 2 + 6);
    assert!(tmp.path().join("m.rrqm.manifest.json").exists());

    let stream = tmp.path().join("s.rrq");
    let out = rrq(&[
        "compress",
        "--model",
        p(&model),
        "--input",
        p(&corpus.join("test")),
        "--output",
        p(&stream),
        "--layers",
        "4",
    ]);
    assert!(out.status.success());
    // 16-byte header, then per image a u16 depth and 4 x 3 bits padded to 2 bytes
    assert_eq!(fs::metadata(&stream).unwrap().len(), 16 + 6 * 4);

    let decoded = tmp.path().join("decoded");
    let out = rrq(&[
        "decompress",
        "--model",
        p(&model),
        "--input",
        p(&stream),
        "--output",
        p(&decoded),
    ]);
    assert!(out.status.success());
    let first = pgm::read(decoded.join("0000.pgm")).unwrap();
    assert_eq!((first.height(), first.width()), (8, 8));
    assert_eq!(fs::read_dir(&decoded).unwrap().count(), 6);
}

#[test]
fn training_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth(&corpus, "16", "8");
    let (a, b) = (tmp.path().join("a.rrqm"), tmp.path().join("b.rrqm"));
    assert!(train(&corpus.join("train"), &a, "1", "5", "4")
        .status
        .success());
    assert!(train(&corpus.join("train"), &b, "1", "5", "4")
        .status
        .success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(tmp.path().join("a.rrqm.manifest.json"))
            .unwrap()
            .len(),
        fs::read(tmp.path().join("b.rrqm.manifest.json"))
            .unwrap()
            .len()
    );
}

#[test]
fn minimal_model_from_four_images() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("tiny");
    fs::create_dir(&dir).unwrap();
    for i in 0..4 {
        let px = (0..16)
            .map(|j| ((i * 7 + j * 3) % 16) as f64 / 15.0)
            .collect();
        pgm::write(
            dir.join(format!("{i}.pgm")),
            &ImageGray::new(4, 4, px).unwrap(),
        )
        .unwrap();
    }
    let model = tmp.path().join("m.rrqm");
    let out = train(&dir, &model, "1", "1", "2");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bundle = rrq::codec::load_model(&model).unwrap();
    assert_eq!(rrq::ResidualQuantizer::depth(bundle.quantizer()), 1);
}

#[test]
fn input_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("mixed");
    fs::create_dir(&dir).unwrap();
    for (i, side) in [4, 4, 5].iter().enumerate() {
        pgm::write(
            dir.join(format!("{i}.pgm")),
            &ImageGray::filled(*side, *side, 0.5).unwrap(),
        )
        .unwrap();
    }
    let model = tmp.path().join("m.rrqm");
    let out = train(&dir, &model, "1", "1", "2");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2.pgm"));
    assert!(!model.exists());

    let corpus = tmp.path().join("corpus");
    synth(&corpus, "8", "8");
    assert_eq!(
        train(&corpus.join("train"), &model, "5", "1", "2")
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        train(&tmp.path().join("missing"), &model, "1", "1", "2")
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rrq(&["train", "--input", "x"]).status.code(), Some(2));
}

#[test]
fn foreign_stream_exits_three_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth(&corpus, "16", "8");
    let (a, b) = (tmp.path().join("a.rrqm"), tmp.path().join("b.rrqm"));
    assert!(train(&corpus.join("train"), &a, "1", "3", "4")
        .status
        .success());
    assert!(train(&corpus.join("train"), &b, "2", "3", "4")
        .status
        .success());
    let stream = tmp.path().join("s.rrq");
    assert!(rrq(&[
        "compress",
        "--model",
        p(&a),
        "--input",
        p(&corpus.join("test")),
        "--output",
        p(&stream)
    ])
    .status
    .success());
    let out_dir = tmp.path().join("out");
    let out = rrq(&[
        "decompress",
        "--model",
        p(&b),
        "--input",
        p(&stream),
        "--output",
        p(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out_dir.exists());

    let mut bytes = fs::read(&a).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    fs::write(&b, bytes).unwrap();
    let out = rrq(&[
        "decompress",
        "--model",
        p(&b),
        "--input",
        p(&stream),
        "--output",
        p(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn experiments_write_csv_and_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth(&corpus, "24", "8");
    let model = tmp.path().join("m.rrqm");
    assert!(train(&corpus.join("train"), &model, "2", "8", "16")
        .status
        .success());

    let dr = tmp.path().join("dr");
    let out = rrq(&[
        "eval-dr",
        "--model",
        p(&model),
        "--input",
        p(&corpus.join("train")),
        "--no-split",
        "--test-input",
        p(&corpus.join("test")),
        "--sample",
        "5",
        "--output",
        p(&dr),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dr.join("dr_curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("split,layers,bpp,mse,psnr_db"));
    // geometric grid 1, 2, 4, 8 for both splits
    assert_eq!(lines.count(), 8);
    assert!(csv.contains("\ntest,8,0.5,"));
    assert!(dr.join("dr_curve.csv.manifest.json").exists());

    let dn = tmp.path().join("dn");
    let test_dir = corpus.join("test");
    let args = [
        "denoise",
        "--model",
        p(&model),
        "--input",
        p(&test_dir),
        "--sigma2",
        "0.3",
        "--sigma2",
        "0.15",
        "--noise-seed",
        "4",
        "--dense",
        "--output",
        p(&dn),
    ];
    assert!(rrq(&args).status.success());
    let first = fs::read(dn.join("denoise.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("sigma2,layers,psnr_db,is_best,is_heuristic\n"));
    for s in ["0.3", "0.15"] {
        let rows: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with(&format!("{s},")))
            .collect();
        assert_eq!(
            rows.iter().filter(|r| r.contains(",true,")).count(),
            1,
            "{s}"
        );
        assert_eq!(
            rows.iter().filter(|r| r.ends_with(",true")).count(),
            1,
            "{s}"
        );
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dn.join("denoise.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["noise_seed"], 4);
    assert_eq!(manifest["sigma2"][0], 0.3);

    // rerunning from the same configuration reproduces the CSV
    assert!(rrq(&args).status.success());
    assert_eq!(fs::read(dn.join("denoise.csv")).unwrap(), first);
}

#[test]
fn denoise_noisy_inputs_writes_images() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth(&corpus, "16", "8");
    let model = tmp.path().join("m.rrqm");
    assert!(train(&corpus.join("train"), &model, "1", "4", "4")
        .status
        .success());
    let out_dir = tmp.path().join("clean");
    let out = rrq(&[
        "denoise",
        "--model",
        p(&model),
        "--input",
        p(&corpus.join("test")),
        "--sigma2",
        "0.01",
        "--noisy-input",
        "--output",
        p(&out_dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("0000.pgm").exists());
    let out = rrq(&[
        "denoise",
        "--model",
        p(&model),
        "--input",
        p(&corpus.join("test")),
        "--sigma2",
        "0.01",
        "--sigma2",
        "0.1",
        "--noisy-input",
        "--output",
        p(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
