//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `cargo test -p strokeforge --test acceptance`. Exits non-zero if
//! any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strokeforge::bench::{
    degrade, default_suite, generate, recovery_suite, run_case, run_suite, write_artifacts, BenchCase, Degradation,
    RadiusProfile, Shape, ShapeSpec,
};
use strokeforge::image_io::{GrayImage, StretchRange};
use strokeforge::optimizer::{descent_step, DescentConfig, DescentState, StepRule};
use strokeforge::pipeline::{interpolate_nodes, restore_with, RestoreConfig};
use strokeforge::profile::BandModel;
use strokeforge::spline::{ConstraintSet, SparseVector, SplineCurve};
use strokeforge::stroke::{gray_mass, Disc};

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(name: &str, limit: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    let pass = v.pass && took <= limit;
    println!(
        "{} {name}: {} [{:.2}s, limit {}s]",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn interpolation_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let config = RestoreConfig::default();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for job in 0..20 {
        let shape = Shape::ALL[rng.random_range(0..Shape::ALL.len())];
        let spec = ShapeSpec {
            shape,
            span: rng.random_range(80.0..170.0),
        };
        let profile = RadiusProfile::Constant {
            r: rng.random_range(4.0..9.0),
        };
        let truth = match generate(spec, profile, 256, 256) {
            Ok(t) => t,
            Err(e) => return check(false, format!("job {job}: {e}")),
        };
        let mut fractions = vec![0.0, 1.0];
        for _ in 0..rng.random_range(0..4) {
            fractions.push(rng.random_range(0.05..0.95));
        }
        fractions.sort_by(f64::total_cmp);
        fractions.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        let degradation = Degradation {
            erase_frac: rng.random_range(0.0..0.25),
            noise_sigma: rng.random_range(0.0..0.1),
            blotches: rng.random_range(0..4),
        };
        let img = degrade(&truth, &degradation, job)
            .unwrap()
            .histogram_stretch(StretchRange::default());
        let points = truth.samples(&fractions).unwrap();
        let result = restore_with(&img, &points, &config, |state, _| {
            checked += 1;
            worst = worst.max(max_sample_residual(&state.curve, &points_xy(&points)));
        });
        if let Err(e) = result {
            return check(false, format!("job {job}: {e}"));
        }
    }
    check(
        worst <= 1e-9 && checked == 20 * 15,
        format!("20 jobs, {checked} curves, worst residual {worst:.2e} (<= 1e-9)"),
    )
}

fn points_xy(points: &strokeforge::pipeline::SamplePointSet) -> Vec<[f64; 2]> {
    points.points.iter().map(|p| [p.x, p.y]).collect()
}

/// Sample k sits at node 2k.
fn max_sample_residual(curve: &SplineCurve, xy: &[[f64; 2]]) -> f64 {
    xy.iter()
        .enumerate()
        .map(|(k, p)| {
            let v = curve.eval(2.0 * k as f64).unwrap();
            (v[0] - p[0]).abs().max((v[1] - p[1]).abs())
        })
        .fold(0.0, f64::max)
}

fn closed_form_profile() -> Verdict {
    let m = BandModel::new(10.0, 1.0, 1.0, 1.0).unwrap();
    let expected = 400.0 / 1599f64.sqrt();
    let got = m.grid_minimizer();
    let min_err = ((got - expected) / expected).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut deriv_err = 0.0f64;
    for _ in 0..50 {
        let r = m.r_true * rng.random_range(1.05..20.0);
        let h = 1e-5 * r;
        let fd = (m.energy_profile(r + h) - m.energy_profile(r - h)) / (2.0 * h);
        let an = 4.0 * m.c1 * m.r_true * (1.0 - (m.r_true / r).powi(2)).sqrt() / (r * r)
            - m.c2 * m.alpha * r.powf(-m.alpha - 1.0);
        deriv_err = deriv_err.max(((fd - an) / an.abs().max(1e-12)).abs());
        deriv_err = deriv_err.max(((m.profile_derivative(r) - an) / an.abs().max(1e-12)).abs());
    }

    let edge = -m.c2 * m.alpha * m.r_true.powf(-m.alpha - 1.0);
    let below = m.profile_derivative(m.r_true);
    let above = m.derivative_above(m.r_true);
    let cont = (below - above).abs().max((below - edge).abs()) / edge.abs();

    check(
        min_err <= 1e-3 && deriv_err <= 1e-6 && cont <= 1e-9,
        format!(
            "minimizer {got:.6} vs {expected:.6} (rel {min_err:.1e} <= 1e-3), derivative rel {deriv_err:.1e} (<= 1e-6), edge continuity {cont:.1e} (<= 1e-9)"
        ),
    )
}

fn raster_vs_analytic() -> Verdict {
    let img = GrayImage::from_fn(101, 101, |_, y| {
        if (y as f64 - 50.5).abs() < 8.0 {
            0.0
        } else {
            1.0
        }
    })
    .unwrap();
    let r = 12.0;
    let theta = 2.0 * (8.0f64 / r).acos();
    let analytic = (theta - theta.sin()) * r * r;
    let raster = gray_mass(&img, Disc::new(50.0, 50.5, r));
    let rel = (raster - analytic).abs() / analytic;
    check(
        rel <= 0.1,
        format!("gray_mass {raster} vs {analytic:.2} (rel {rel:.3} <= 0.10)"),
    )
}

fn synthetic_recovery() -> Verdict {
    let config = RestoreConfig::default();
    let cases = recovery_suite();
    let thresholds = [0.90, 0.85];
    let mut pass = true;
    let mut parts = Vec::new();
    for (case, min) in cases.iter().zip(thresholds) {
        match run_case(case, &config) {
            Ok(o) => {
                let ok = o.score.iou >= min;
                pass &= ok;
                parts.push(format!(
                    "{} ({} samples) IoU {:.3} {} {min}",
                    case.name,
                    case.fractions().len(),
                    o.score.iou,
                    if ok { ">=" } else { "<" }
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", case.name));
            }
        }
    }
    check(pass, parts.join("; "))
}

fn trend(first: f64, last: f64) -> &'static str {
    if last < first {
        "down"
    } else if last > first {
        "up"
    } else {
        "flat"
    }
}

fn energy_trend() -> Verdict {
    let config = RestoreConfig::default();
    let mut cases: Vec<BenchCase> = default_suite();
    cases.extend(recovery_suite());
    let mut pass = true;
    let mut rising = Vec::new();
    let mut shape = String::from("missing");
    for case in &cases {
        let o = match run_case(case, &config) {
            Ok(o) => o,
            Err(e) => return check(false, format!("{}: {e}", case.name)),
        };
        let t = &o.restoration.trace;
        let (a, b) = (t[0], t[t.len() - 1]);
        if t.len() != 15 || b.f_total > a.f_total {
            pass = false;
            rising.push(case.name.clone());
        }
        // The damaged S-curve stands in for a damaged handwritten character.
        if case.name == "s-curve-erase0.2-sigma0.05-blotch3" {
            let terms = [
                ("fid_s", a.f_fidelity_s, b.f_fidelity_s),
                ("fid_r", a.f_fidelity_r, b.f_fidelity_r),
                ("curv", a.f_curvature, b.f_curvature),
            ];
            let all_down = terms.iter().all(|(_, x, y)| y < x);
            let r_grew = mean_radius(&o.restoration.curve) > initial_mean_radius(&o);
            pass &= all_down && r_grew;
            shape = terms
                .iter()
                .map(|(n, x, y)| format!("{n} {}", trend(*x, *y)))
                .collect::<Vec<_>>()
                .join(", ");
            shape.push_str(if r_grew { ", radii grew" } else { ", radii shrank" });
        }
    }
    check(
        pass,
        format!(
            "f_total(14) <= f_total(0) on {}/{} fixtures{}; damaged s-curve terms: {shape}",
            cases.len() - rising.len(),
            cases.len(),
            if rising.is_empty() {
                String::new()
            } else {
                format!(" (rose: {})", rising.join(", "))
            }
        ),
    )
}

fn mean_radius(curve: &SplineCurve) -> f64 {
    let n = curve.last_node();
    let k = 64 * n;
    (0..=k).map(|i| curve.eval(n as f64 * i as f64 / k as f64).unwrap()[2]).sum::<f64>() / (k + 1) as f64
}

fn initial_mean_radius(o: &strokeforge::bench::CaseOutcome) -> f64 {
    let input = o.degraded.histogram_stretch(StretchRange::default());
    let truth = generate(o.case.spec, o.case.profile, o.case.width, o.case.height).unwrap();
    let points = o.case.sample_points(&truth).unwrap();
    let (curve, _) = strokeforge::pipeline::initial_spline(
        &input,
        &points,
        &o.restoration.config.descent,
        &o.restoration.config.probe,
    )
    .unwrap();
    mean_radius(&curve)
}

fn step_decay_law() -> Verdict {
    let mut flips_total = 0;
    for rule in [StepRule::Sign, StepRule::Gradient] {
        let cfg = DescentConfig {
            initial_step: 3.0,
            fd_step: 1e-3,
            step_rule: rule,
            ..DescentConfig::default()
        };
        let f = |c: &[f64]| -> strokeforge::Result<f64> { Ok(c[0] * c[0]) };
        let dirs = vec![SparseVector {
            entries: vec![(0, 1.0)],
        }];
        let mut curve = SplineCurve::constant(2, [0.0, 0.0, 10.0]).unwrap();
        curve.control_points_mut()[0][0] = 5.0;
        let mut state = DescentState::new(curve, 1, cfg.initial_step);
        let mut prev: Option<f64> = None;
        let mut flips = 0;
        for i in 0..12 {
            let y = state.curve.control_points()[0][0];
            let h = cfg.fd_step;
            let d = ((y + h) * (y + h) - y * y) / h;
            let before = state.step_sizes[0];
            state = descent_step(&state, &f, &dirs, &ConstraintSet::empty(), &cfg).unwrap();
            let after = state.step_sizes[0];
            let flip = prev.is_some_and(|p| d * p < 0.0);
            let expected = if flip { before * cfg.decay } else { before };
            if after.to_bits() != expected.to_bits() {
                return check(false, format!("{rule:?} step {i}: {after} != {expected}"));
            }
            flips += flip as usize;
            prev = Some(d);
        }
        if flips < 3 {
            return check(false, format!("{rule:?}: only {flips} sign flips"));
        }
        flips_total += flips;
    }
    check(
        true,
        format!("{flips_total} sign flips over both step rules, each scaled the step by exactly T"),
    )
}

/// Cardinal cubic B-spline centred at 0.
fn cardinal(s: f64) -> f64 {
    let a = s.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        2.0 / 3.0 - a * a + a.powi(3) / 2.0
    }
}

fn lcg_curve(seed: u64, nodes: usize) -> SplineCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SplineCurve::new(
        (0..nodes + 2)
            .map(|_| {
                [
                    rng.random_range(0.0..200.0),
                    rng.random_range(0.0..200.0),
                    rng.random_range(3.0..20.0),
                ]
            })
            .collect(),
    )
    .unwrap()
}

fn spline_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let nodes = 7;
    let last = (nodes - 1) as f64;

    // Partition of unity against the cardinal basis.
    let mut pou = 0.0f64;
    for _ in 0..200 {
        let t = rng.random_range(0.0..=last);
        let mut sum = 0.0;
        for k in 0..nodes + 2 {
            let mut cps = vec![[0.0; 3]; nodes + 2];
            cps[k] = [1.0, 1.0, 1.0];
            let v = SplineCurve::new(cps).unwrap().eval(t).unwrap()[0];
            let oracle = cardinal(t - (k as f64 - 1.0));
            pou = pou.max((v - oracle).abs());
            sum += v;
        }
        pou = pou.max((sum - 1.0).abs());
    }

    // Node relation.
    let curve = lcg_curve(3, nodes);
    let cps = curve.control_points();
    let mut node_err = 0.0f64;
    for i in 0..nodes {
        let v = curve.eval(i as f64).unwrap();
        for ch in 0..3 {
            let rel = cps[i][ch] / 6.0 + 2.0 * cps[i + 1][ch] / 3.0 + cps[i + 2][ch] / 6.0;
            node_err = node_err.max((v[ch] - rel).abs() / rel.abs().max(1.0));
        }
    }

    // Derivatives against finite differences. Within one interval the curve
    // is a cubic, so these stencils carry no truncation error there.
    let mut deriv_err = 0.0f64;
    let h = 1e-3;
    for _ in 0..200 {
        let t = rng.random_range(0.01..last - 0.01);
        if (t - t.round()).abs() < 2.5 * h {
            continue;
        }
        let d = curve.eval_derivatives(t).unwrap();
        let at = |dt: f64| curve.eval(t + dt).unwrap();
        let (p2, p1, c, m1, m2) = (at(2.0 * h), at(h), at(0.0), at(-h), at(-2.0 * h));
        let fd1 = [0, 1, 2].map(|ch| (-p2[ch] + 8.0 * p1[ch] - 8.0 * m1[ch] + m2[ch]) / (12.0 * h));
        let fd2 = [0, 1].map(|ch| (p1[ch] - 2.0 * c[ch] + m1[ch]) / (h * h));
        let pairs = [
            (d.dx, fd1[0]),
            (d.dy, fd1[1]),
            (d.dr, fd1[2]),
            (d.ddx, fd2[0]),
            (d.ddy, fd2[1]),
        ];
        for (an, fd) in pairs {
            deriv_err = deriv_err.max((an - fd).abs() / an.abs().max(1.0));
        }
    }

    // Circle of radius 40 through 25 nodes over a full turn.
    let rho = 40.0;
    let n = 24;
    let xs: Vec<f64> = (0..=n)
        .map(|k| 100.0 + rho * (std::f64::consts::TAU * k as f64 / n as f64).cos())
        .collect();
    let ys: Vec<f64> = (0..=n)
        .map(|k| 100.0 + rho * (std::f64::consts::TAU * k as f64 / n as f64).sin())
        .collect();
    let cx = interpolate_nodes(&xs).unwrap();
    let cy = interpolate_nodes(&ys).unwrap();
    let circle = SplineCurve::new(cx.iter().zip(&cy).map(|(&x, &y)| [x, y, 5.0]).collect()).unwrap();
    let mut curv_err = 0.0f64;
    for k in 0..=400 {
        let t = n as f64 * (0.25 + 0.5 * k as f64 / 400.0);
        let kappa = circle.curvature(t).unwrap();
        curv_err = curv_err.max((kappa * rho - 1.0).abs());
    }

    check(
        pou <= 1e-12 && node_err <= 1e-12 && deriv_err <= 1e-6 && curv_err <= 0.05,
        format!(
            "unity/basis {pou:.1e}, node relation {node_err:.1e}, derivative rel {deriv_err:.1e} (<= 1e-6), circle curvature rel {curv_err:.4} (<= 0.05)"
        ),
    )
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn determinism() -> Verdict {
    let config = RestoreConfig::default();
    let cases = default_suite();
    let mut trees = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let outcomes = match run_suite(&cases, &config) {
            Ok(o) => o,
            Err(e) => return check(false, e.to_string()),
        };
        write_artifacts(&outcomes, dir.path()).unwrap();
        let mut tree = read_tree(dir.path());
        tree.remove("timings.csv");
        trees.push(tree);
    }
    let (a, b) = (&trees[0], &trees[1]);
    let differing: Vec<_> = a
        .keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .cloned()
        .collect();
    check(
        differing.is_empty() && a.len() == 1 + 4 * cases.len(),
        format!(
            "{} CSV/JSON/PNG files compared across two runs, {} differ",
            a.len(),
            differing.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Verdict); 8] = [
        ("interpolation invariance", 300, interpolation_invariance),
        ("closed-form band profile", 10, closed_form_profile),
        ("raster vs analytic fidelity", 5, raster_vs_analytic),
        ("synthetic recovery", 180, synthetic_recovery),
        ("energy trend", 300, energy_trend),
        ("step-decay law", 5, step_decay_law),
        ("spline oracle suite", 30, spline_oracles),
        ("determinism", 300, determinism),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        if !timed(name, Duration::from_secs(limit), f) {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
