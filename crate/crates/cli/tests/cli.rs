use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use strokeforge::image_io::{load_gray, load_mask, GrayImage};
use strokeforge::pipeline::{restore, RestoreConfig, SamplePoint, SamplePointSet};
use strokeforge::spline::SplineCurve;

fn strokeforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strokeforge")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
    image: PathBuf,
    points: PathBuf,
}

impl Fixture {
    /// Dark horizontal band on white, with two points on its axis.
    fn band() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let image = dir.path().join("band.png");
        GrayImage::from_fn(96, 96, |_, y| if (y as f64 - 48.5).abs() < 6.0 { 0.0 } else { 1.0 })
            .unwrap()
            .save_png(&image)
            .unwrap();
        let points = dir.path().join("points.json");
        let set = SamplePointSet::new(vec![SamplePoint::new(10.0, 48.5), SamplePoint::new(85.0, 48.5)]);
        std::fs::write(&points, set.to_json().unwrap()).unwrap();
        Fixture { dir, image, points }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn restore_writes_outputs_matching_the_library() {
    let f = Fixture::band();
    let (spline, mask, trace) = (f.path("s.json"), f.path("m.png"), f.path("t.csv"));
    let out = strokeforge(&[
        "restore",
        "--image",
        arg(&f.image),
        "--points",
        arg(&f.points),
        "--out-spline",
        arg(&spline),
        "--out-mask",
        arg(&mask),
        "--out-trace",
        arg(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let img = load_gray(&f.image, false).unwrap().histogram_stretch(Default::default());
    let points = SamplePointSet::from_json(&std::fs::read_to_string(&f.points).unwrap()).unwrap();
    let expected = restore(&img, &points, &RestoreConfig::default()).unwrap();
    assert_eq!(std::fs::read_to_string(&spline).unwrap(), expected.curve.to_json().unwrap());
    assert_eq!(std::fs::read_to_string(&trace).unwrap(), expected.trace_csv().unwrap());
    assert_eq!(load_mask(&mask).unwrap(), expected.mask);
    let curve = SplineCurve::from_json(&std::fs::read_to_string(&spline).unwrap()).unwrap();
    assert_eq!(curve.node_count(), expected.curve.node_count());
}

#[test]
fn restore_flags_reach_the_optimizer() {
    let f = Fixture::band();
    let trace = f.path("t.csv");
    let out = strokeforge(&[
        "restore",
        "--image",
        arg(&f.image),
        "--points",
        arg(&f.points),
        "--iters",
        "3",
        "--rmin",
        "4",
        "--step-rule",
        "gradient",
        "--out-trace",
        arg(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = std::fs::read_to_string(&trace).unwrap().lines().count();
    assert_eq!(rows, 1 + 4);
}

#[test]
fn input_errors_exit_with_2() {
    let f = Fixture::band();
    let missing = f.path("missing.png");
    let bad_points = f.path("bad.json");
    std::fs::write(&bad_points, r#"{"points":[{"x":10,"y":48.5}]}"#).unwrap();
    let outside = f.path("outside.json");
    std::fs::write(&outside, r#"{"points":[{"x":10,"y":48.5},{"x":500,"y":1}]}"#).unwrap();
    let rgb = f.path("rgb.ppm");
    std::fs::write(&rgb, b"P6\n1 1\n255\n\x00\x00\x00").unwrap();

    let cases: Vec<Vec<&str>> = vec![
        vec!["restore", "--image", arg(&missing), "--points", arg(&f.points)],
        vec!["restore", "--image", arg(&f.image), "--points", arg(&bad_points)],
        vec!["restore", "--image", arg(&f.image), "--points", arg(&outside)],
        vec!["restore", "--image", arg(&rgb), "--points", arg(&f.points)],
        vec!["restore", "--image", arg(&f.image), "--points", arg(&f.points), "--stretch", "60,40"],
        vec!["restore", "--image", arg(&f.image), "--points", arg(&f.points), "--rmin", "0"],
        vec!["restore", "--image", arg(&f.image)],
        vec!["profile", "--R", "-1", "--c1", "1", "--c2", "1", "--alpha", "1"],
        vec!["bench", "run", "--suite", "nope", "--out", "x.csv"],
    ];
    for args in cases {
        let out = strokeforge(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn numeric_failure_exits_with_3() {
    let f = Fixture::band();
    let out = strokeforge(&["restore", "--image", arg(&f.image), "--points", arg(&f.points), "--c1", "1e308"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn inverted_input_matches_dark_ink() {
    let f = Fixture::band();
    let bright = f.path("bright.png");
    load_gray(&f.image, true).unwrap().save_png(&bright).unwrap();
    let (a, b) = (f.path("a.json"), f.path("b.json"));
    let run = |img: &Path, invert: bool, out: &Path| {
        let mut args = vec!["restore", "--image", arg(img), "--points", arg(&f.points), "--out-spline", arg(out)];
        if invert {
            args.push("--invert");
        }
        assert_eq!(code(&strokeforge(&args)), 0);
    };
    run(&f.image, false, &a);
    run(&bright, true, &b);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn overlay_is_the_union() {
    let dir = tempfile::tempdir().unwrap();
    let left = GrayImage::from_fn(8, 4, |x, _| if x < 3 { 0.0 } else { 1.0 }).unwrap();
    let right = GrayImage::from_fn(8, 4, |x, _| if x >= 6 { 0.0 } else { 1.0 }).unwrap();
    let (m1, m2, out) = (dir.path().join("1.png"), dir.path().join("2.png"), dir.path().join("o.png"));
    left.save_png(&m1).unwrap();
    right.save_png(&m2).unwrap();
    let status = strokeforge(&["overlay", arg(&m1), arg(&m2), "-o", arg(&out)]);
    assert_eq!(code(&status), 0, "{}", String::from_utf8_lossy(&status.stderr));
    let union = load_mask(&out).unwrap();
    for x in 0..8 {
        assert_eq!(union.get(x, 2), !(3..6).contains(&x), "column {x}");
    }

    let small = dir.path().join("small.png");
    GrayImage::filled(4, 4, 0.0).unwrap().save_png(&small).unwrap();
    assert_eq!(code(&strokeforge(&["overlay", arg(&m1), arg(&small), "-o", arg(&out)])), 2);
}

#[test]
fn profile_csv_has_the_closed_form_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profile.csv");
    let status = strokeforge(&[
        "profile", "--R", "10", "--c1", "1", "--c2", "1", "--alpha", "1", "--r-lo", "5", "--r-hi", "40", "--samples", "8",
        "-o", arg(&out),
    ]);
    assert_eq!(code(&status), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,f_e,df_e_dr"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let (r, f) = (row[0], row[1]);
        let expected = if r <= 10.0 {
            1.0 / r
        } else {
            let theta = 2.0 * (10.0 / r).acos();
            1.0 / r + theta - theta.sin()
        };
        assert!((f - expected).abs() <= 1e-12 * expected.abs().max(1.0), "r {r}: {f} vs {expected}");
    }
}

#[test]
fn bench_run_writes_scores_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (results, timings, artifacts) = (dir.path().join("r.csv"), dir.path().join("t.csv"), dir.path().join("art"));
    let out = strokeforge(&[
        "bench",
        "run",
        "--suite",
        "recovery",
        "--out",
        arg(&results),
        "--timings",
        arg(&timings),
        "--artifacts",
        arg(&artifacts),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&results).unwrap();
    assert!(text.starts_with("case,shape,degradation,iou,hausdorff,"), "{text}");
    assert_eq!(text.lines().count(), 3);
    assert_eq!(std::fs::read_to_string(&timings).unwrap().lines().count(), 3);
    assert_eq!(std::fs::read_to_string(artifacts.join("results.csv")).unwrap(), text);
    for case in ["recovery-line-clean", "recovery-s-curve-erase0.2-sigma0.05-blotch0"] {
        for file in ["input.png", "mask.png", "spline.json", "trace.csv"] {
            assert!(artifacts.join(case).join(file).is_file(), "{case}/{file}");
        }
    }
}
