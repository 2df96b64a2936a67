//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::f64::consts::{PI, TAU};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use natcalib::alignment::{brute_force_oracle, calibrate, evaluate_objective, ObjectiveSpec, OptimizerConfig};
use natcalib::group::{arc_difference, compose, identity, inverse, Factor, FactorKind, GaugeGroupSpec, GroupElement};
use natcalib::kernel::{compute_kernel_analytic, compute_kernel_default, misaligned_line_kernel_demo};
use natcalib::metrics::{distance_k, natural_distance, norm_k, DistanceForm, MetricSpec, WeightVector};
use natcalib::plan::{generate_ring_plan, random_spot_plan, RingBand};
use natcalib::scenario::{build_plan, default_search_bounds, ScenarioConfig, Tolerances};
use natcalib::{action_defect, apply, ActionBinding, DetectorGeometry, Image};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

/// Relative bound on geometric composition and round-trip defects of the
/// pixel action on smooth 64×64 plans.
const INTERP_BOUND: f64 = 0.02;

fn linac() -> Arc<GaugeGroupSpec> {
    Arc::new(GaugeGroupSpec::linac())
}

fn cylinder64() -> DetectorGeometry {
    DetectorGeometry::cylinder(64, 64, 1.0)
}

fn el(spec: &Arc<GaugeGroupSpec>, coords: Vec<f64>) -> GroupElement {
    GroupElement::new(Arc::clone(spec), coords).expect("valid element")
}

fn chart_gap(spec: &GaugeGroupSpec, a: &[f64], b: &[f64]) -> f64 {
    spec.factors()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(f, (x, y))| if f.kind.is_periodic() { arc_difference(*x, *y).abs() } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

fn rel_l2(a: &Image, b: &Image) -> f64 {
    let d: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    let n: f64 = b.values().iter().map(|y| y * y).sum();
    (d / n).sqrt()
}

fn group_axioms() -> Outcome {
    let mixes: Vec<(&str, Vec<FactorKind>)> = vec![
        ("linac", vec![FactorKind::Circle, FactorKind::Line, FactorKind::PositiveScale, FactorKind::Intensity]),
        ("circles", vec![FactorKind::Circle; 3]),
        ("lines", vec![FactorKind::Line, FactorKind::Line]),
        ("multiplicative", vec![FactorKind::PositiveScale, FactorKind::Intensity]),
        ("circle+scale", vec![FactorKind::Circle, FactorKind::PositiveScale]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for (label, kinds) in &mixes {
        let spec = Arc::new(
            GaugeGroupSpec::new(kinds.iter().enumerate().map(|(j, k)| Factor::new(format!("f{j}"), *k)).collect()).unwrap(),
        );
        let e = identity(&spec);
        let draw = |rng: &mut ChaCha8Rng| {
            let coords = kinds
                .iter()
                .map(|k| match k {
                    FactorKind::Circle => rng.random_range(-20.0..20.0),
                    FactorKind::Line => rng.random_range(-1e3..1e3),
                    _ => rng.random_range(-5.0..5.0),
                })
                .collect();
            el(&spec, coords)
        };
        for _ in 0..1000 {
            let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
            let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
            let assoc = chart_gap(&spec, left.coords(), right.coords());
            let scale = 1.0 + a.coords().iter().chain(b.coords()).chain(c.coords()).fold(0.0f64, |m, x| m.max(x.abs()));
            ensure!(assoc <= 4.0 * f64::EPSILON * scale, "{label}: associativity gap {assoc:e}");
            ensure!(compose(&a, &b).unwrap() == compose(&b, &a).unwrap(), "{label}: ab != ba");
            ensure!(compose(&a, &e).unwrap() == a && compose(&e, &a).unwrap() == a, "{label}: identity law");
            let back = compose(&a, &inverse(&a).unwrap()).unwrap();
            let gap = chart_gap(&spec, back.coords(), e.coords());
            ensure!(gap <= 4.0 * f64::EPSILON * scale, "{label}: inverse gap {gap:e}");
            worst = worst.max(assoc.max(gap) / scale);
        }
    }
    Ok(format!("{} mixes x 1000 triples, worst relative rounding {worst:.1e}", mixes.len()))
}

fn action_laws() -> Outcome {
    let spec = linac();
    let b = ActionBinding::linac();
    let geos = [
        cylinder64(),
        DetectorGeometry::Plane { n_x: 48, n_y: 40, width: 1.0, height: 1.0 },
        DetectorGeometry::line(64, 1.0),
        DetectorGeometry::Point,
    ];
    for geo in &geos {
        let img = random_spot_plan(geo, 11, 5).unwrap();
        let out = apply(&identity(&spec), &img, &b).unwrap();
        ensure!(out.values() == img.values(), "identity not bit-exact on {geo:?}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut exact_worst: f64 = 0.0;
    let mut comp_worst: f64 = 0.0;
    let mut trip_worst: f64 = 0.0;
    for seed in 0..20 {
        let img = random_spot_plan(&cylinder64(), 100 + seed, 6).unwrap();
        let (li, lj): (f64, f64) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let d = action_defect(&el(&spec, vec![0.0, 0.0, 0.0, li]), &el(&spec, vec![0.0, 0.0, 0.0, lj]), &img, &b).unwrap();
        exact_worst = exact_worst.max(d);
        let (k, l) = (rng.random_range(0..64) as f64, rng.random_range(0..64) as f64);
        let g = el(&spec, vec![TAU * k / 64.0, 0.0, 0.0, li]);
        let h = el(&spec, vec![TAU * l / 64.0, 0.0, 0.0, lj]);
        exact_worst = exact_worst.max(action_defect(&g, &h, &img, &b).unwrap());

        let mut draw = || {
            el(
                &spec,
                vec![
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.05..0.05),
                    rng.random_range(-0.03..0.03),
                    rng.random_range(-0.2..0.2),
                ],
            )
        };
        let (g, h) = (draw(), draw());
        comp_worst = comp_worst.max(action_defect(&g, &h, &img, &b).unwrap());
        let back = apply(&inverse(&g).unwrap(), &apply(&g, &img, &b).unwrap(), &b).unwrap();
        trip_worst = trip_worst.max(rel_l2(&back, &img));
    }
    ensure!(exact_worst <= 1e-12, "intensity/integer-shift defect {exact_worst:e}");
    ensure!(comp_worst < INTERP_BOUND, "composition defect {comp_worst:.4} over bound {INTERP_BOUND}");
    ensure!(trip_worst < INTERP_BOUND, "round-trip defect {trip_worst:.4} over bound {INTERP_BOUND}");
    Ok(format!(
        "exact defects <= {exact_worst:.1e}; composition {comp_worst:.4}, round trip {trip_worst:.4} (bound {INTERP_BOUND})"
    ))
}

fn direct_norm(v: &[f64], k: f64) -> f64 {
    if k.is_infinite() {
        v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(k)).sum::<f64>().powf(1.0 / k)
    }
}

fn norm_axioms() -> Outcome {
    let geo = DetectorGeometry::cylinder(16, 12, 1.0);
    let n = geo.pixel_count();
    let ks = [1.0, 2.0, 4.0, f64::INFINITY];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let image = |rng: &mut ChaCha8Rng| {
        let sparse = rng.random_bool(0.3);
        let v: Vec<f64> = (0..n).map(|_| if sparse && rng.random_bool(0.8) { 0.0 } else { rng.random_range(0.0..10.0) }).collect();
        Image::new(geo.clone(), v).unwrap()
    };
    let zero = Image::zeros(geo.clone()).unwrap();
    for _ in 0..500 {
        let (a, b, c) = (image(&mut rng), image(&mut rng), image(&mut rng));
        let lambda: f64 = rng.random_range(0.0..7.0);
        let scaled = Image::new(geo.clone(), a.values().iter().map(|x| lambda * x).collect()).unwrap();
        let mut prev = f64::INFINITY;
        for &k in &ks {
            let m = MetricSpec::new(k).unwrap();
            let na = norm_k(&a, m).unwrap();
            let oracle = direct_norm(a.values(), k);
            ensure!((na - oracle).abs() <= 1e-12 * oracle, "k={k}: norm {na} vs direct {oracle}");
            ensure!(norm_k(&zero, m).unwrap() == 0.0 && distance_k(&a, &a, m).unwrap() == 0.0, "k={k}: definiteness at 0");
            ensure!(na > 0.0 || a.is_zero(), "k={k}: nonzero image with zero norm");
            let ns = norm_k(&scaled, m).unwrap();
            ensure!((ns - lambda * na).abs() <= 1e-12 * (lambda * na).max(f64::MIN_POSITIVE), "k={k}: homogeneity {ns} vs {}", lambda * na);
            let (ab, bc, ac) = (distance_k(&a, &b, m).unwrap(), distance_k(&b, &c, m).unwrap(), distance_k(&a, &c, m).unwrap());
            ensure!(ac <= (ab + bc) * (1.0 + 1e-12), "k={k}: triangle {ac} > {ab} + {bc}");
            ensure!(ab > 0.0 || a == b, "k={k}: distinct images at distance 0");
            ensure!(ab <= prev * (1.0 + 1e-12), "k-monotonicity broken at k={k}");
            prev = ab;
        }
    }
    Ok("500 pairs x k in {1, 2, 4, inf}".into())
}

fn kernel_table() -> Outcome {
    let spec = linac();
    let b = ActionBinding::linac();
    let check = |geo: &DetectorGeometry, kernel: &[&str], groups: &[&[&str]]| -> Result<(), String> {
        let numeric = compute_kernel_default(&spec, &b, geo).map_err(|e| e.to_string())?;
        let analytic = compute_kernel_analytic(&spec, &b, geo).map_err(|e| e.to_string())?;
        for r in [&numeric, &analytic] {
            ensure!(r.kernel_factors == kernel, "{geo:?} {:?}: kernel {:?}, expected {kernel:?}", r.method, r.kernel_factors);
            let want: Vec<Vec<String>> = groups.iter().map(|g| g.iter().map(|s| s.to_string()).collect()).collect();
            ensure!(r.indistinguishable_groups == want, "{geo:?} {:?}: groups {:?}", r.method, r.indistinguishable_groups);
        }
        Ok(())
    };
    check(&cylinder64(), &[], &[])?;
    check(&DetectorGeometry::line(64, 1.0), &["phi"], &[])?;
    check(&DetectorGeometry::Point, &["phi", "z"], &[&["c", "i"]])?;

    let tilt = 0.1;
    let report = misaligned_line_kernel_demo(tilt, &spec, &DetectorGeometry::line(64, 1.0), &b, None).map_err(|e| e.to_string())?;
    ensure!(report.kernel.rank == 1, "tilted line: numeric kernel rank {}", report.kernel.rank);
    let slope = report.fitted_slope.ok_or("tilted line: no fitted slope")?;
    ensure!((slope - tilt).abs() <= 0.1 * tilt, "tilted line: slope {slope} vs tilt {tilt}");
    Ok(format!("cylinder {{}}, line {{phi}}, point {{phi,z}} + [c,i]; tilted slope {slope:.5} for {tilt}"))
}

fn scenario_problem(g: &[f64]) -> (ObjectiveSpec, GroupElement) {
    let cfg = ScenarioConfig::default();
    let plan = build_plan(&cfg).unwrap();
    let spec = linac();
    let g = el(&spec, g.to_vec());
    let measured = apply(&g, &plan, &ActionBinding::linac()).unwrap();
    let obj = ObjectiveSpec::new(plan, measured, spec, ActionBinding::linac(), MetricSpec::l2(), default_search_bounds()).unwrap();
    (obj, g)
}

fn round_trip() -> Outcome {
    let tol = Tolerances::for_geometry(&cylinder64());
    let bounds = default_search_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = [0.0f64; 4];
    let mut floors = Vec::new();
    for run in 0..20 {
        // interior: 90% of each search interval
        let g: Vec<f64> = bounds.iter().map(|[lo, hi]| rng.random_range(0.9 * lo..0.9 * hi)).collect();
        let (obj, g) = scenario_problem(&g);
        let r = calibrate(&obj, &OptimizerConfig::default(), &WeightVector::uniform(4), DistanceForm::Quadratic).unwrap();
        let want = inverse(&g).unwrap().signed_coords();
        let floor = evaluate_objective(&want, &obj).unwrap();
        floors.push(floor);
        let err = [
            arc_difference(want[0], r.natural_coords[0]).abs(),
            (r.natural_coords[1] - want[1]).abs(),
            (r.natural_coords[2] - want[2]).abs(),
            (r.natural_coords[3] - want[3]).abs(),
        ];
        let limits = [tol.phi, tol.z, tol.c, tol.log_i];
        for j in 0..4 {
            ensure!(err[j] <= limits[j], "run {run}: g = {:?}, factor {j} error {:.5} > {:.5}", g.coords(), err[j], limits[j]);
            worst[j] = worst[j].max(err[j] / limits[j]);
        }
        ensure!(r.residual <= floor + 1e-9, "run {run}: residual {} above interpolation floor {floor}", r.residual);
    }
    let max_floor = floors.iter().copied().fold(0.0, f64::max);
    Ok(format!(
        "20 runs; worst error / tolerance phi {:.2} z {:.2} c {:.2} i {:.2}; floors up to {max_floor:.3}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn oracle_equivalence() -> Outcome {
    let cfg = ScenarioConfig::default();
    let plan = build_plan(&cfg).unwrap();
    let full = linac();
    let names = ["phi", "z", "c", "i"];
    let injected = [0.9, -0.06, 0.035, 0.12];
    let all_bounds = default_search_bounds();
    let mut lines = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            let spec = Arc::new(full.restrict(&[names[a], names[b]]).unwrap());
            let g = el(&spec, vec![injected[a], injected[b]]);
            let binding = ActionBinding::linac();
            let measured = apply(&g, &plan, &binding).unwrap();
            let bounds = vec![all_bounds[a], all_bounds[b]];
            let obj = ObjectiveSpec::new(plan.clone(), measured, Arc::clone(&spec), binding, MetricSpec::l2(), bounds.clone()).unwrap();
            let r = calibrate(&obj, &OptimizerConfig::default(), &WeightVector::uniform(2), DistanceForm::Quadratic).unwrap();
            let (oracle_y, oracle_f) = brute_force_oracle(&obj, 101).unwrap();
            ensure!(
                r.residual <= oracle_f + 1e-9,
                "({}, {}): calibrate F {} > oracle F {oracle_f}",
                names[a],
                names[b],
                r.residual
            );
            for (q, [lo, hi]) in bounds.iter().enumerate() {
                let cell = (hi - lo) / 100.0;
                let gap = if spec.factors()[q].kind.is_periodic() {
                    arc_difference(oracle_y[q], r.natural_coords[q]).abs()
                } else {
                    (oracle_y[q] - r.natural_coords[q]).abs()
                };
                ensure!(gap <= cell, "({}, {}): coordinate {q} differs by {gap} > cell {cell}", names[a], names[b]);
            }
            lines.push(format!("{}{}", names[a], names[b]));
        }
    }
    Ok(format!("pairs {} within one oracle cell", lines.join(",")))
}

fn degenerate_minima() -> Outcome {
    let geo = cylinder64();
    let plan = generate_ring_plan(
        &geo,
        &[
            RingBand { z: 0.4, amplitude: 1.0, width: 0.06 },
            RingBand { z: 0.62, amplitude: 0.6, width: 0.09 },
        ],
    )
    .unwrap();
    let spec = linac();
    let binding = ActionBinding::linac();
    let g = el(&spec, vec![1.1, 0.04, 0.0, 0.08]);
    let measured = apply(&g, &plan, &binding).unwrap();
    let obj = ObjectiveSpec::new(plan, measured, spec, binding, MetricSpec::l2(), default_search_bounds()).unwrap();
    let cfg = OptimizerConfig::default();
    let r = calibrate(&obj, &cfg, &WeightVector::uniform(4), DistanceForm::Quadratic).unwrap();
    ensure!(r.degenerate_directions.iter().any(|d| d == "phi"), "phi not flagged: {:?}", r.degenerate_directions);
    let mut phis: Vec<f64> = Vec::new();
    for m in &r.minima_set {
        if phis.iter().all(|p| arc_difference(*p, m.coords[0]).abs() > cfg.coordinate_cluster_tol) {
            phis.push(m.coords[0]);
        }
    }
    ensure!(phis.len() >= 3, "minima set spans only {} distinct phi values", phis.len());
    let fs: Vec<f64> = r.minima_set.iter().map(|m| m.residual).collect();
    let (lo, hi) = (fs.iter().copied().fold(f64::INFINITY, f64::min), fs.iter().copied().fold(0.0, f64::max));
    let spread = (hi - lo) / lo.max(f64::MIN_POSITIVE);
    ensure!(hi == lo || spread < 1e-6, "F spread {spread:e} over the minima set");
    let cell = TAU / cfg.coarse_grid as f64;
    ensure!(r.natural_coords[0].abs() <= cell, "natural phi {} further than one cell {cell}", r.natural_coords[0]);
    Ok(format!(
        "{} minima over {} phi values, relative F spread {spread:.1e}, natural phi {:.4}",
        r.minima_set.len(),
        phis.len(),
        r.natural_coords[0]
    ))
}

fn distance_formulas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..7);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w_hand: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let w = WeightVector::new(raw).unwrap();
        let quad: f64 = y.iter().zip(&w_hand).map(|(y, w)| w * y * y).sum();
        let gen: f64 = y.iter().zip(&w_hand).map(|(y, w)| (w * y) * (w * y)).sum::<f64>().sqrt();
        let lin: f64 = y.iter().zip(&w_hand).map(|(y, w)| w * y).sum();
        let got = [
            natural_distance(&y, &w, DistanceForm::Quadratic).unwrap(),
            natural_distance(&y, &w, DistanceForm::GeneralNorm { metric: MetricSpec::l2() }).unwrap(),
            natural_distance(&y, &w, DistanceForm::LinearExample).unwrap(),
        ];
        for (g, h) in got.iter().zip([quad, gen, lin]) {
            let e = (g - h).abs();
            ensure!(e <= 1e-12, "form disagreement {g} vs {h}");
            worst = worst.max(e);
        }
    }
    let w = WeightVector::new(vec![0.1, 0.2, 0.2, 0.5]).unwrap();
    let worked = natural_distance(&[0.2, -0.1, 0.05, 0.3], &w, DistanceForm::LinearExample).unwrap();
    ensure!((worked - 0.16).abs() <= 1e-12, "worked value {worked}");
    Ok(format!("100 vectors, worst gap {worst:.1e}; worked value {worked}"))
}

fn run_cli(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_natcalib")).args(args).current_dir(dir).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).expect("schema compiles")
}

fn validate(name: &str, bytes: &[u8]) -> Result<(), String> {
    let v: Value = serde_json::from_slice(bytes).map_err(|e| format!("{name}: not JSON: {e}"))?;
    let errs: Vec<String> = schema(name).iter_errors(&v).map(|e| e.to_string()).collect();
    ensure!(errs.is_empty(), "{name}: {}", errs.join("; "));
    Ok(())
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (c1, first) = run_cli(&["demo-linac", "--seed", "7"], d);
    let (c2, second) = run_cli(&["demo-linac", "--seed", "7"], d);
    ensure!(c1 == 0 && c2 == 0, "demo-linac exit codes {c1}, {c2}");
    ensure!(first == second, "demo-linac --seed 7 output differs between runs");
    validate("scenario_report", &first)?;

    std::fs::write(d.join("point.json"), r#"{"geometry":{"shape":"point"}}"#).unwrap();
    std::fs::write(d.join("line.json"), r#"{"geometry":{"shape":"line","n":64,"length":1.0}}"#).unwrap();
    for cfg in [None, Some("point.json"), Some("line.json")] {
        let mut args = vec!["analyze-kernel"];
        if let Some(c) = cfg {
            args.extend(["--config", c]);
        }
        let (code, out) = run_cli(&args, d);
        ensure!(code == 0, "analyze-kernel {cfg:?} exit {code}");
        validate("kernel_analysis", &out)?;
    }
    let (code, out) = run_cli(&["enumerate-detectors"], d);
    ensure!(code == 0, "enumerate-detectors exit {code}");
    validate("detector_catalog", &out)?;

    std::fs::write(d.join("coords.json"), r#"{"coords":[0.2,-0.1,0.05,0.3],"weights":[0.1,0.2,0.2,0.5]}"#).unwrap();
    let (code, out) = run_cli(&["distance", "--config", "coords.json"], d);
    ensure!(code == 0, "distance exit {code}");
    validate("distance_report", &out)?;

    let (code, _) = run_cli(&["simulate", "--seed", "7", "--out", "sim"], d);
    ensure!(code == 0, "simulate exit {code}");
    std::fs::write(d.join("cal.json"), r#"{"reference":"sim/plan.json","measured":"sim/measured.json"}"#).unwrap();
    let (code, out) = run_cli(&["calibrate", "--config", "cal.json"], d);
    ensure!(code == 0, "calibrate exit {code}");
    validate("alignment_result", &out)?;
    Ok(format!("{} byte report identical across runs; 7 reports schema-valid", first.len()))
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "group axioms", budget: Duration::from_secs(1), run: group_axioms },
        Criterion { id: 2, name: "action laws", budget: Duration::from_secs(10), run: action_laws },
        Criterion { id: 3, name: "norm axioms", budget: Duration::from_secs(5), run: norm_axioms },
        Criterion { id: 4, name: "kernel table", budget: Duration::from_secs(30), run: kernel_table },
        Criterion { id: 5, name: "round-trip recovery", budget: Duration::from_secs(300), run: round_trip },
        Criterion { id: 6, name: "oracle equivalence", budget: Duration::from_secs(300), run: oracle_equivalence },
        Criterion { id: 7, name: "degenerate minima", budget: Duration::from_secs(120), run: degenerate_minima },
        Criterion { id: 8, name: "distance formulas", budget: Duration::from_secs(1), run: distance_formulas },
        Criterion { id: 9, name: "cli determinism and schema", budget: Duration::from_secs(60), run: cli_determinism },
    ];
    let only: Option<u8> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_none_or(|id| id == c.id)) {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.budget => Err(format!("over time budget {:?}", c.budget)),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("criterion {} {:<28} {tag} {:>8.2}s  {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
