//! Acceptance criteria 1–11, one printed pass/fail line each.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the report.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dilative::partition::dominance_ratio;
use dilative::pathstats::{
    default_kappa_grid, estimate_alpha, estimate_holder_exponent, probe_times, DichotomyRule, GeometricGrid,
    HolderCentering,
};
use dilative::seed::derive_seed;
use dilative::simulate::{
    sample_batch, DeterministicPath, DeterministicSampler, FbmSampler, FlpSimulator, PathSampler, SimGrid,
};
use dilative::verify::{
    discrimination_experiment, start_at_zero_with, verify_covariance, verify_cumulant_scaling, verify_start_at_zero,
    DiscriminationCriteria, Family, McConfig, ShiftedStart,
};
use dilative::{
    enumerate_partitions, moment_from_cumulants, CumulantVector, DilativeParams, LevySpec, ProcessSpec, SamplePath,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const DRIVER: &str = "cpois:rate=5,jumps=cexp:mu=1";

fn bell_triangle(p: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..p {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    *row.last().unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let expected = [1u64, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
    let mut ok = true;
    for (i, &bell) in expected.iter().enumerate() {
        let p = i + 1;
        let mut seen = HashSet::new();
        let mut count = 0u64;
        for part in enumerate_partitions(p, false).unwrap() {
            count += 1;
            let mut key: Vec<Vec<usize>> = part.blocks().to_vec();
            key.iter_mut().for_each(|b| b.sort_unstable());
            key.sort();
            ok &= seen.insert(key);
        }
        ok &= count == bell && count == bell_triangle(p);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ok && secs < 10.0,
        format!("Bell counts p=1..10, no duplicates, {secs:.2}s"),
    )
}

/// Raw moment by recursive enumeration of set partitions.
fn brute_force_moment(cumulants: &[f64], p: usize) -> f64 {
    fn go(next: usize, p: usize, blocks: &mut Vec<usize>, c: &[f64]) -> f64 {
        if next == p {
            return blocks.iter().map(|&s| c[s - 1]).product();
        }
        let mut total = 0.0;
        for i in 0..blocks.len() {
            blocks[i] += 1;
            total += go(next + 1, p, blocks, c);
            blocks[i] -= 1;
        }
        blocks.push(1);
        total += go(next + 1, p, blocks, c);
        blocks.pop();
        total
    }
    go(0, p, &mut Vec::new(), cumulants)
}

fn criterion_2() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let sigma2 = 1.7f64;
    let gauss = CumulantVector::gaussian(sigma2, 8).unwrap();
    let mut worst = 0.0f64;
    for p in [2usize, 4, 6, 8] {
        let double_factorial: f64 = (1..p).step_by(2).map(|k| k as f64).product();
        worst = worst.max(rel(
            moment_from_cumulants(&gauss, p).unwrap(),
            double_factorial * sigma2.powi(p as i32 / 2),
        ));
    }
    let entries = vec![0.0, 1.3, 0.7, 2.1, -0.4, 0.9];
    let general = CumulantVector::new(entries.clone()).unwrap();
    worst = worst.max(rel(moment_from_cumulants(&general, 4).unwrap(), 2.1 + 3.0 * 1.3 * 1.3));
    worst = worst.max(rel(
        moment_from_cumulants(&general, 6).unwrap(),
        brute_force_moment(&entries, 6),
    ));
    outcome(worst <= 1e-12, format!("max relative error {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let lags: Vec<f64> = (1..=999).map(|k| k as f64 / 1000.0).collect();
    let levy: LevySpec = DRIVER.parse().unwrap();
    let vectors = [
        levy.cumulants(6).unwrap(),
        CumulantVector::new(vec![0.0, 1.0, 0.0, 0.5, 0.0, 2.0]).unwrap(),
        CumulantVector::new(vec![0.0, 0.2, 1.5, 3.0, 0.7, 9.0]).unwrap(),
    ];
    let mut worst = 0.0f64;
    for delta in [1.0, -0.5] {
        let params = DilativeParams::stationary(0.75, delta);
        for c in &vectors {
            for p in [2usize, 4, 6] {
                worst = worst.max(dominance_ratio(&params, c, p, &lags).unwrap());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1.0 + 1e-12 && secs < 5.0,
        format!("max moment/bound {worst:.15}, {secs:.2}s"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let pairs = [
        (0.25, 0.25),
        (0.5, 0.5),
        (1.0, 1.0),
        (0.25, 0.5),
        (0.5, 1.0),
        (0.25, 1.0),
    ];
    let mut worst = 0.0f64;
    let mut ok = true;
    for (i, h) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        let spec = ProcessSpec::fbm(h, 1.0).unwrap();
        let mc = McConfig::new(5000, SimGrid::new(1.0, 256, 400 + i as u64).unwrap()).unwrap();
        let report = verify_covariance(&spec, &pairs, &mc).unwrap();
        worst = worst.max(report.statistic);
        ok &= report.pass;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ok && secs < 120.0,
        format!("largest |z| {worst:.2} of 18 probes (limit 4), {secs:.1}s"),
    )
}

/// `∫ f(1,s)² ds` restricted to `s ≥ −window`, by adaptive Simpson after
/// splitting at the kernel singularities.
fn kernel_square_integral(hurst: f64, window: f64) -> f64 {
    let a = hurst - 0.5;
    let gamma = statrs::function::gamma::gamma(hurst + 0.5);
    let f = move |s: f64| {
        let pos = |x: f64| if x > 0.0 { x.powf(a) } else { 0.0 };
        ((pos(1.0 - s) - pos(-s)) / gamma).powi(2)
    };
    #[allow(clippy::too_many_arguments)]
    fn simpson<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        simpson(f, a, m, fa, lm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, rm, fb, right, tol / 2.0, depth - 1)
    }
    let integrate = |lo: f64, hi: f64| {
        let m = 0.5 * (lo + hi);
        let (fa, fm, fb) = (f(lo), f(m), f(hi));
        simpson(
            &f,
            lo,
            hi,
            fa,
            fm,
            fb,
            (hi - lo) / 6.0 * (fa + 4.0 * fm + fb),
            1e-13,
            30,
        )
    };
    // geometric panels away from the endpoints 0 and 1, where f has power singularities
    let mut total = 0.0;
    let mut edges = vec![0.0];
    let mut e = 1e-12;
    while e < 0.5 {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(0.5);
    for w in edges.windows(2) {
        total += integrate(w[0], w[1]) + integrate(1.0 - w[1], 1.0 - w[0]);
    }
    let mut lo = 0.0;
    let mut width = 1e-12;
    while lo > -window {
        let next = (lo - width).max(-window);
        total += integrate(next, lo);
        lo = next;
        width *= 2.0;
    }
    total
}

struct FlpRun {
    order2: Vec<(f64, f64, f64)>,
    slope2: f64,
    slope4: f64,
    secs: f64,
}

fn flp_run() -> FlpRun {
    let start = Instant::now();
    let levy: LevySpec = DRIVER.parse().unwrap();
    let spec = ProcessSpec::flp(0.75, levy).unwrap();
    let mc = McConfig::new(20_000, SimGrid::new(2.0, 256, 500).unwrap()).unwrap();
    let report = verify_cumulant_scaling(&spec, &[2, 4], &[0.25, 0.5, 1.0, 2.0], &mc).unwrap();
    let orders = report.details["orders"].as_array().unwrap();
    let slope = |i: usize| orders[i]["slope"].as_f64().unwrap();
    let order2 = orders[0]["cumulants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c["t"].as_f64().unwrap(),
                c["value"].as_f64().unwrap(),
                c["std_error"].as_f64().unwrap(),
            )
        })
        .collect();
    FlpRun {
        order2,
        slope2: slope(0),
        slope4: slope(1),
        secs: start.elapsed().as_secs_f64(),
    }
}

fn criterion_5(run: &FlpRun) -> Outcome {
    let ok = (run.slope2 - 1.5).abs() <= 0.10 && (run.slope4 - 2.0).abs() <= 0.40 && run.secs < 600.0;
    outcome(
        ok,
        format!(
            "variance slope {:.3} (1.5±0.10), 4th cumulant slope {:.3} (2.0±0.40), {:.0}s",
            run.slope2, run.slope4, run.secs
        ),
    )
}

fn criterion_6(run: &FlpRun) -> Outcome {
    let (_, var, se) = *run.order2.iter().find(|(t, _, _)| *t == 1.0).unwrap();
    let hurst = 0.75;
    let levy_variance = 5.0 * 2.0;
    let full = kernel_square_integral(hurst, 1e12);
    let truncated = kernel_square_integral(hurst, 400.0 * 2.0);
    let expected = levy_variance * full;
    let deficit = 1.0 - truncated / full;
    let z = (var - expected).abs() / se;
    outcome(
        z <= 4.0 && deficit < 0.01,
        format!(
            "Var X(1) {var:.4} vs {expected:.4} (z {z:.2}), window deficit {:.3}%",
            100.0 * deficit
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let steps = 1usize << 14;
    let mut ok = true;
    let mut parts = Vec::new();
    for h in [0.3, 0.6, 0.9] {
        let grid = SimGrid::new(1.0, steps, 700).unwrap();
        let sampler = FbmSampler::on_grid(h, 1.0, &grid).unwrap();
        let paths = sample_batch(&sampler, 20, derive_seed(700, (h * 10.0) as u64)).unwrap();
        let estimates: Vec<f64> = paths
            .into_iter()
            .map(|v| {
                let path = SamplePath::new(grid.times(), v).unwrap();
                estimate_holder_exponent(&path, 6, 14, HolderCentering::Gaussian)
                    .unwrap()
                    .value()
                    .unwrap()
            })
            .collect();
        let m = median(estimates);
        ok &= (m - h).abs() <= 0.05;
        parts.push(format!("H={h}: {m:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 300.0, format!("medians {}, {secs:.1}s", parts.join(", ")))
}

fn criterion_8() -> Outcome {
    let rule = DichotomyRule::default();
    let kappas = default_kappa_grid();
    let step = kappas[1] - kappas[0];
    let zero = vec![GeometricGrid::to_zero(0.7, 60).unwrap()];
    let times = probe_times(&zero);
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.3, 0.6, 0.8, 1.0] {
        let path = DeterministicSampler::new(DeterministicPath::power(beta).unwrap(), &times)
            .sample_path(0)
            .unwrap();
        let est = estimate_alpha(&path, &zero, &kappas, &rule).unwrap();
        ok &= (est.estimate - beta).abs() <= step + 1e-12 && est.lower < beta + 1e-12 && est.upper > beta - 1e-12;
        parts.push(format!("{beta}->{:.3}", est.estimate));
    }
    let family = GeometricGrid::anchored_family(1.0, 1 << 14, 0.7, 32).unwrap();
    let times = probe_times(&family);
    let sampler = FbmSampler::new(0.6, 1.0, &times).unwrap();
    let estimates: Vec<f64> = sample_batch(&sampler, 51, 800)
        .unwrap()
        .into_iter()
        .filter_map(|v| {
            let path = SamplePath::new(times.clone(), v).unwrap();
            estimate_alpha(&path, &family, &kappas, &rule).ok().map(|e| e.estimate)
        })
        .collect();
    let failures = 51 - estimates.len();
    let m = median(estimates);
    ok &= (m - 0.6).abs() <= 0.1;
    outcome(
        ok,
        format!(
            "powers {}; FBM 0.6 median {m:.3} ({failures} bracket failures of 51)",
            parts.join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let family = GeometricGrid::anchored_family(1.0, 1 << 14, 0.7, 32).unwrap();
    let rule = DichotomyRule::default();
    let criteria = DiscriminationCriteria::default();
    let fbm = Family::Fbm { var1: 1.0 };
    let mc = McConfig::new(200, SimGrid::new(1.0, 1 << 14, 900).unwrap()).unwrap();
    let main = discrimination_experiment(0.6, 0.8, fbm, &mc, &family, &rule, &criteria).unwrap();
    let null = discrimination_experiment(0.7, 0.7, fbm, &mc.with_seed(901), &family, &rule, &criteria).unwrap();
    let ok = main.accuracy >= 0.90
        && main.undecided_rate <= 0.20
        && (null.accuracy - 0.5).abs() <= 0.10
        && null.reports.iter().all(|r| r.pass);
    outcome(
        ok,
        format!(
            "accuracy {:.3}, undecided {:.3}; null accuracy {:.3}, {:.0}s",
            main.accuracy,
            main.undecided_rate,
            null.accuracy,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let small = McConfig::new(50, SimGrid::new(1.0, 64, 1000).unwrap()).unwrap();
    let levy: LevySpec = DRIVER.parse().unwrap();
    let gauss_levy: LevySpec = "gauss:sigma=1".parse().unwrap();
    let mixed: LevySpec = format!("{DRIVER};gauss:sigma=0.5").parse().unwrap();
    let specs = [
        ("fbm", ProcessSpec::fbm(0.3, 1.0).unwrap()),
        ("flp", ProcessSpec::flp(0.75, levy).unwrap()),
        ("flp+gauss", ProcessSpec::flp(0.75, mixed).unwrap()),
        (
            "power",
            ProcessSpec::deterministic(DeterministicPath::power(0.5).unwrap()),
        ),
        ("identity", ProcessSpec::deterministic(DeterministicPath::Identity)),
    ];
    for (name, spec) in &specs {
        let pass = verify_start_at_zero(spec, &small).unwrap().pass;
        ok &= pass;
        parts.push(format!("{name} {}", if pass { "ok" } else { "nonzero" }));
    }
    let big = SimGrid::new(1.0, 1 << 13, 1001).unwrap();
    let circulant = FbmSampler::on_grid(0.7, 1.0, &big).unwrap();
    let pass = circulant.sample_path(3).unwrap().values()[0] == 0.0;
    ok &= pass;
    parts.push(format!("fbm-circulant {}", if pass { "ok" } else { "nonzero" }));
    let flp_gauss = FlpSimulator::new(0.75, gauss_levy.clone(), &small.grid, 50.0);
    parts.push(format!("gaussian-only flp rejected: {}", flp_gauss.is_err()));
    let inner = Box::new(FbmSampler::new(0.5, 1.0, &small.grid.times()).unwrap());
    let control = start_at_zero_with(&ShiftedStart::new(inner, 1e-3), &small).unwrap();
    ok &= !control.pass;
    parts.push(format!("shifted control fails: {}", !control.pass));
    outcome(ok, parts.join(", "))
}

/// Exit code, stdout and the sorted output files of one run.
type CliRun = (Option<i32>, Vec<u8>, Vec<(String, Vec<u8>)>);

fn run_cli(out: &Path, args: &[&str], threads: &str) -> CliRun {
    let output = Command::new(env!("CARGO_BIN_EXE_dilative"))
        .arg("--out")
        .arg(out)
        .args(["--no-timestamp", "--seed", "2024"])
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .env_remove("DILATIVE_OUT_DIR")
        .output()
        .unwrap();
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    (output.status.code(), output.stdout, files)
}

fn criterion_11() -> Outcome {
    let commands: [&[&str]; 6] = [
        &["simulate", "--process", "fbm", "--steps", "128", "--paths", "4"],
        &[
            "simulate",
            "--process",
            "flp",
            "--steps",
            "64",
            "--paths",
            "4",
            "--window-factor",
            "8",
        ],
        &["moments", "--process", "flp", "--p", "2,4,6", "--h", "0.1,0.5"],
        &["estimate", "--steps", "2048", "--paths", "4"],
        &["verify", "--paths", "200", "--steps", "32"],
        &["discriminate", "--paths", "16", "--steps", "2048"],
    ];
    let mut ok = true;
    let mut mismatched = Vec::new();
    for args in commands {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let one = run_cli(a.path(), args, "1");
        let four = run_cli(b.path(), args, "4");
        let same = one == four && !one.1.is_empty() && matches!(one.0, Some(0 | 1));
        if !same {
            mismatched.push(args[0]);
        }
        ok &= same;
    }
    outcome(
        ok,
        format!(
            "{} commands byte-identical across 1 and 4 workers; mismatches: {mismatched:?}",
            commands.len()
        ),
    )
}

#[test]
fn acceptance() {
    let flp = flp_run();
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(&flp),
        criterion_6(&flp),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ];
    // written to the process stdout so the lines appear without --nocapture
    let mut out = std::io::stdout().lock();
    for (i, r) in results.iter().enumerate() {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {:>2}: {verdict}  {}", i + 1, r.detail).unwrap();
    }
    drop(out);
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.pass)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
