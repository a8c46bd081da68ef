//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! process exits non-zero when any check fails. Pass check numbers as
//! arguments to run a subset.

mod data;
mod oracle;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use tabeval_core::attack_privacy::{inference_risk, linkability_risk, singling_out_risk, AuxSplit, SinglingOutMode};
use tabeval_core::distance_privacy::{self, nnaa, DistanceCaps};
use tabeval_core::generators::{fit_gaussian_copula, fit_gmm, generate, sample_gaussian_copula, GeneratorKind, GmmOptions};
use tabeval_core::ml_utility::{logistic_gradient, logistic_loss, tstr_compare, utility_split, Learner, SizeMatching};
use tabeval_core::outcome::Outcome;
use tabeval_core::report::{format_trimmed, render_markdown, run_on_datasets, EvalConfig};
use tabeval_core::rng::{derive_seed, rng_from_seed};
use tabeval_core::similarity::{self, sinkhorn, sinkhorn_distance, SimilarityConfig, SinkhornParams, WassersteinMode};
use tabeval_core::tabular::{write_csv, CsvOptions};
use tabeval_core::{Column, Dataset};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn value<T: Clone>(o: &Outcome<T>, what: &str) -> Result<T, String> {
    match o {
        Outcome::Ok { value } => Ok(value.clone()),
        Outcome::Skipped { reason, detail } => Err(format!("{what} skipped: {reason:?} {detail}")),
    }
}

fn config_json(keys: &[&str], target: &str, extra: &str) -> EvalConfig {
    let keys = serde_json::to_string(keys).unwrap();
    EvalConfig::from_json_str(&format!(
        r#"{{"original_path": "original.csv", "synthetic_paths": {{"model": "model.csv"}},
            "keys": {keys}, "target": "{target}", "seed": 20240501 {extra}}}"#
    ))
    .unwrap()
}

fn random_copy_fixed_point() -> Check {
    let original = data::unique_key_table(1_000, 1);
    let cfg = config_json(&["age", "zip"], "condition", r#", "wasserstein_mode": "exact_1d""#);
    let start = Instant::now();
    let models = BTreeMap::from([("random".to_string(), original.clone())]);
    let report = run_on_datasets(&cfg, &original, &models).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let m = &report.models["random"];
    let d = value(&m.distance_privacy, "distance privacy")?;
    ensure!(format!("{:.2}", d.disco) == "100.00", "DiSCO {}", d.disco);
    ensure!(format!("{:.2}", d.rep_u) == "100.00", "repU {}", d.rep_u);
    for (name, v) in [("NNDR", d.nndr), ("DCR", d.dcr), ("NNAA", d.nnaa)] {
        ensure!(v.abs() <= 1e-9, "{name} {v}");
    }
    let s = value(&m.similarity, "similarity")?;
    ensure!(s.wasserstein_mode == WassersteinMode::Exact1d, "mode {:?}", s.wasserstein_mode);
    let ws = value(&s.wasserstein, "WS")?;
    ensure!(format!("{ws:.4}") == "0.0000", "WS {ws}");
    for (name, o) in [
        ("KS", &s.ks),
        ("NMI", &s.nmi),
        ("JS", &s.js),
        ("Pearson", &s.corr_pearson),
        ("Spearman", &s.corr_spearman),
    ] {
        let v = value(o, name)?;
        ensure!(format!("{v:.4}") == "1.0000", "{name} {v}");
    }
    let st = value(&s.stats_diff, "stats")?;
    ensure!(
        st.mean_diff == 0.0 && st.median_diff == 0.0 && st.var_diff == 0.0,
        "stats diff {st:?}"
    );
    let md = render_markdown(&report);
    ensure!(
        md.contains("| random | 100.00 | 100.00 | 0.00 | 0.00 | 0.00 |"),
        "markdown row missing"
    );
    ensure!(secs < 10.0, "took {secs:.1} s");
    Ok(format!("1,000 rows in {secs:.2} s"))
}

fn attack_bounds() -> Check {
    let original = data::diabetes_like(7);
    let unique = original.unique_row_fraction();
    let cols: Vec<String> = original.schema().names().map(str::to_string).collect();
    let secret = "diagnosis";
    let others: Vec<String> = cols.iter().filter(|c| *c != secret).cloned().collect();
    let half = others.len() / 2;
    let aux = AuxSplit {
        side_a: others[..half].to_vec(),
        side_b: others[half..].to_vec(),
    };
    let run = |synthetic: &Dataset, seed: u64| -> Result<[tabeval_core::attack_privacy::RiskEstimate; 3], String> {
        let e = |e: tabeval_core::Error| e.to_string();
        Ok([
            singling_out_risk(&original, synthetic, 500, SinglingOutMode::Multivariate, seed).map_err(e)?,
            linkability_risk(&original, synthetic, &aux, 500, 1, seed).map_err(e)?,
            inference_risk(&original, synthetic, &others, secret, 500, 0.05, seed).map_err(e)?,
        ])
    };
    let names = ["singling out", "linkability", "inference"];
    let copy = run(&original, 1)?;
    for (name, r) in names.iter().zip(&copy) {
        ensure!(r.risk >= 0.90, "copy {name} risk {}", r.risk);
        ensure!(format_trimmed(r.ci_high) == "1.0", "copy {name} CI high {}", r.ci_high);
    }
    let mut sums = [0.0; 3];
    for seed in 0..20u64 {
        let shuffled = data::shuffle_columns(&original, 1_000 + seed);
        let r = run(&shuffled, seed)?;
        for (s, x) in sums.iter_mut().zip(&r) {
            *s += x.risk / 20.0;
        }
    }
    for (name, m) in names.iter().zip(&sums) {
        ensure!(*m <= 0.10, "shuffled {name} mean risk {m:.4}");
    }
    Ok(format!(
        "{:.1}% unique rows; copy {:.4}/{:.4}/{:.4}; shuffled mean {:.4}/{:.4}/{:.4}",
        100.0 * unique,
        copy[0].risk,
        copy[1].risk,
        copy[2].risk,
        sums[0],
        sums[1],
        sums[2]
    ))
}

fn gaussian_cloud(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let std = Normal::<f64>::new(0.0, 1.0).unwrap();
    Dataset::from_columns((0..d).map(|j| {
        (format!("x{j}"), Column::Numeric((0..n).map(|_| std.sample(&mut rng)).collect()))
    }))
    .unwrap()
}

fn nnaa_calibration() -> Check {
    let start = Instant::now();
    let mut total = 0.0;
    for seed in 0..20u64 {
        let a = gaussian_cloud(1_000, 5, derive_seed(seed, 1));
        let b = gaussian_cloud(1_000, 5, derive_seed(seed, 2));
        total += nnaa(&a, &b, seed).map_err(|e| e.to_string())?;
    }
    let mean = total / 20.0;
    let secs = start.elapsed().as_secs_f64();
    ensure!((mean - 0.5).abs() <= 0.05, "mean NNAA {mean:.4}");
    ensure!(secs < 30.0, "took {secs:.1} s");
    Ok(format!("mean NNAA {mean:.4} in {secs:.2} s"))
}

/// Small random table; integer grids force ties and repeated keys.
fn random_instance(rng: &mut impl Rng, n: usize, gridded: bool, wide: bool, numeric_target: bool) -> Dataset {
    let (lo, hi) = if wide { (-2.0, 12.0) } else { (0.0, 10.0) };
    let num = |rng: &mut dyn rand::RngCore| -> Vec<f64> {
        (0..n)
            .map(|_| {
                if gridded {
                    rng.random_range(0..5) as f64 * 2.5
                } else {
                    rng.random_range(lo..hi)
                }
            })
            .collect()
    };
    let x0 = num(rng);
    let x1 = num(rng);
    let x2 = num(rng);
    let labels = ["a", "b", "c"];
    let c0: Vec<String> = (0..n).map(|_| labels[rng.random_range(0..3)].to_string()).collect();
    let target = if numeric_target {
        Column::Numeric((0..n).map(|_| rng.random_range(0..3) as f64).collect())
    } else {
        Column::Categorical((0..n).map(|_| ["u", "v"][rng.random_range(0..2)].to_string()).collect())
    };
    Dataset::from_columns([
        ("x0", Column::Numeric(x0)),
        ("c0", Column::Categorical(c0)),
        ("x1", Column::Numeric(x1)),
        ("x2", Column::Numeric(x2)),
        ("t", target),
    ])
    .unwrap()
}

fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        (None, None) => true,
        _ => false,
    }
}

fn oracle_equivalence() -> Check {
    let mut rng = rng_from_seed(4);
    let mut nnaa_checked = 0;
    for case in 0..200u64 {
        let n_o = rng.random_range(2..=30);
        let n_s = if case % 2 == 0 { n_o } else { rng.random_range(2..=30) };
        let gridded = case % 3 == 0;
        let numeric_target = case % 4 == 1;
        let original = random_instance(&mut rng, n_o, gridded, false, numeric_target);
        let synthetic = random_instance(&mut rng, n_s, gridded, case % 5 == 2, numeric_target);
        let bins = [2, 5, 20][(case % 3) as usize];
        let keys = ["x0", "c0"];
        let ctx = |what: &str| format!("case {case} (n_o {n_o}, n_s {n_s}, bins {bins}): {what}");

        let report = distance_privacy::evaluate(&original, &synthetic, &keys, "t", bins, case, DistanceCaps { nnaa_rows: None })
            .map_err(|e| ctx(&e.to_string()))?;
        let (o, s) = oracle::scaled_pair(&original, &synthetic);
        ensure!(report.disco == oracle::disco(&o, &s, &keys, "t", bins), "{}", ctx("DiSCO"));
        ensure!(report.rep_u == oracle::rep_u(&o, &s, &keys, bins), "{}", ctx("repU"));
        ensure!((report.nndr - oracle::nndr(&o, &s)).abs() <= 1e-9, "{}", ctx("NNDR"));
        ensure!((report.dcr - oracle::dcr(&o, &s)).abs() <= 1e-9, "{}", ctx("DCR"));
        if n_o == n_s {
            ensure!(report.nnaa == oracle::nnaa(&o, &s), "{}", ctx(&format!("NNAA {} vs {}", report.nnaa, oracle::nnaa(&o, &s))));
            nnaa_checked += 1;
        }

        let mut order = BTreeMap::new();
        if case % 2 == 1 {
            order.insert("c0".to_string(), vec!["c".to_string(), "a".into(), "b".into()]);
        }
        let cfg = SimilarityConfig {
            bins,
            wasserstein_mode: WassersteinMode::Exact1d,
            compare_wasserstein_modes: false,
            category_order: order.clone(),
            ..Default::default()
        };
        let sim = similarity::evaluate(&original, &synthetic, &cfg).map_err(|e| ctx(&e.to_string()))?;
        let pairs = oracle::numeric_pairs(&o, &s);
        let ws: Vec<f64> = pairs.iter().map(|(a, b)| oracle::ws_1d(a, b)).collect();
        ensure!(close(sim.wasserstein.value().copied(), Some(oracle::average(&ws)), 1e-9), "{}", ctx("WS"));

        let mut ks = Vec::new();
        for (name, (a, b)) in o.names.iter().zip(o.cols.iter().zip(&s.cols)) {
            ks.push(
                1.0 - match (a, b) {
                    (oracle::Cells::Num(a), oracle::Cells::Num(b)) => oracle::ks_num(a, b),
                    (oracle::Cells::Cat(a), oracle::Cells::Cat(b)) => {
                        let order = original.schema().column(name).unwrap().categories().unwrap().to_vec();
                        oracle::ks_cat(a, b, &order)
                    }
                    _ => unreachable!(),
                },
            );
        }
        ensure!(close(sim.ks.value().copied(), Some(oracle::average(&ks)), 1e-9), "{}", ctx("KS"));

        let pear = oracle::corr_similarity(&oracle::corr_columns(&o, &order, false), &oracle::corr_columns(&s, &order, false), false);
        ensure!(close(sim.corr_pearson.value().copied(), pear, 1e-9), "{}", ctx(&format!("Pearson {:?} vs {pear:?}", sim.corr_pearson)));
        let spear = oracle::corr_similarity(&oracle::corr_columns(&o, &order, true), &oracle::corr_columns(&s, &order, true), true);
        ensure!(close(sim.corr_spearman.value().copied(), spear, 1e-9), "{}", ctx(&format!("Spearman {:?} vs {spear:?}", sim.corr_spearman)));

        let (d_o, ds) = (oracle::discrete(&o, bins), oracle::discrete(&s, bins));
        ensure!(close(sim.nmi.value().copied(), oracle::nmi_similarity(&d_o, &ds), 1e-9), "{}", ctx("NMI"));
        let js: Vec<f64> = d_o.iter().zip(&ds).map(|(a, b)| 1.0 - oracle::jsd(a, b)).collect();
        ensure!(close(sim.js.value().copied(), Some(oracle::average(&js)), 1e-9), "{}", ctx("JS"));

        let st = value(&sim.stats_diff, "stats").map_err(|e| ctx(&e))?;
        let diff = |f: fn(&[f64]) -> f64| oracle::average(&pairs.iter().map(|(a, b)| (f(a) - f(b)).abs()).collect::<Vec<_>>());
        ensure!((st.mean_diff - diff(oracle::average)).abs() <= 1e-9, "{}", ctx("mean diff"));
        ensure!((st.median_diff - diff(oracle::median)).abs() <= 1e-9, "{}", ctx("median diff"));
        ensure!((st.var_diff - diff(oracle::pop_variance)).abs() <= 1e-9, "{}", ctx("variance diff"));
    }
    Ok(format!("200 instances, NNAA compared on {nnaa_checked} equal-size pairs"))
}

fn sinkhorn_convergence() -> Check {
    let mut rng = rng_from_seed(5);
    let params = SinkhornParams {
        epsilon: 1e-3,
        max_iter: 200_000,
        tol: 1e-6,
        ..Default::default()
    };
    let mut worst_gap: f64 = 0.0;
    let mut worst_violation: f64 = 0.0;
    for trial in 0..20 {
        let pts = |rng: &mut dyn rand::RngCore| -> Vec<[f64; 2]> {
            (0..5).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
        };
        let (a, b) = (pts(&mut rng), pts(&mut rng));
        let cost: Vec<Vec<f64>> = a
            .iter()
            .map(|p| b.iter().map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()).collect())
            .collect();
        let flat: Vec<f64> = cost.iter().flatten().copied().collect();
        let sol = sinkhorn(&flat, &[0.2; 5], &[0.2; 5], &params, false).map_err(|e| e.to_string())?;
        let best = oracle::best_assignment(&cost);
        ensure!(sol.converged, "trial {trial}: not converged after {} iterations", sol.iterations);
        ensure!(sol.violation < 1e-6, "trial {trial}: violation {:e}", sol.violation);
        ensure!((sol.cost - best).abs() <= 1e-3, "trial {trial}: cost {} vs assignment {best}", sol.cost);
        worst_gap = worst_gap.max((sol.cost - best).abs());
        worst_violation = worst_violation.max(sol.violation);
    }
    let cloud = gaussian_cloud(5, 2, 99);
    let self_cost = sinkhorn_distance(&cloud, &cloud, &SinkhornParams::default(), 1).map_err(|e| e.to_string())?;
    ensure!(self_cost > 0.0, "identical-input cost {self_cost}");
    Ok(format!(
        "20 clouds, max |cost - optimum| {worst_gap:.2e}, max violation {worst_violation:.3e}; identical-input cost at eps 0.05 {self_cost:.3e}"
    ))
}

fn em_monotonicity() -> Check {
    let mut rng = rng_from_seed(6);
    let mut steps = 0;
    let mut worst: f64 = 0.0;
    for case in 0..50u64 {
        let n = rng.random_range(40..300);
        let d = rng.random_range(1..=4);
        let k = rng.random_range(1..=5);
        let centers: Vec<Vec<f64>> = (0..3).map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        let std = Normal::<f64>::new(0.0, 1.0).unwrap();
        let mut cols = vec![Vec::with_capacity(n); d];
        for _ in 0..n {
            let c = &centers[rng.random_range(0..3)];
            for (j, col) in cols.iter_mut().enumerate() {
                col.push(c[j] + std.sample(&mut rng));
            }
        }
        let data = Dataset::from_columns(cols.into_iter().enumerate().map(|(j, c)| (format!("x{j}"), Column::Numeric(c)))).unwrap();
        let model = fit_gmm(&data, &GmmOptions { k, seed: case, tol: 0.0, max_iter: 100, ..Default::default() })
            .map_err(|e| format!("case {case}: {e}"))?;
        for (t, w) in model.log_likelihood_trace.windows(2).enumerate() {
            worst = worst.max(w[0] - w[1]);
            ensure!(
                w[1] >= w[0] - 1e-8,
                "case {case} (n {n}, d {d}, k {k}) iteration {t}: {} -> {}",
                w[0],
                w[1]
            );
            steps += 1;
        }
    }
    Ok(format!("50 datasets, {steps} EM steps, largest decrease {:.1e}", worst.max(0.0)))
}

fn copula_fidelity() -> Check {
    let mut rng = rng_from_seed(7);
    let std = Normal::<f64>::new(0.0, 1.0).unwrap();
    let n = 2_000;
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let z0: f64 = std.sample(&mut rng);
        let z1 = 0.7 * z0 + 0.714_142_842_854_285 * std.sample(&mut rng);
        let z2 = -0.4 * z0 + 0.916_515_138_991_168 * std.sample(&mut rng);
        a.push(z0.exp());
        b.push(10.0 + 3.0 * z1);
        c.push(z2.powi(3));
    }
    let toy = Dataset::from_columns([
        ("a", Column::Numeric(a)),
        ("b", Column::Numeric(b)),
        ("c", Column::Numeric(c)),
    ])
    .unwrap();
    let model = fit_gaussian_copula(&toy).map_err(|e| e.to_string())?;
    let sample = sample_gaussian_copula(&model, n, 11).map_err(|e| e.to_string())?;
    let names = ["a", "b", "c"];
    let col = |d: &Dataset, name: &str| d.numeric(name).unwrap().to_vec();
    let mut worst_rho: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            let ro = oracle::spearman(&col(&toy, names[i]), &col(&toy, names[j])).unwrap();
            let rs = oracle::spearman(&col(&sample, names[i]), &col(&sample, names[j])).unwrap();
            ensure!((ro - rs).abs() <= 0.1, "Spearman ({}, {}) {ro:.3} vs {rs:.3}", names[i], names[j]);
            worst_rho = worst_rho.max((ro - rs).abs());
        }
    }
    let mut worst_ks: f64 = 1.0;
    for name in names {
        let score = 1.0 - oracle::ks_num(&col(&toy, name), &col(&sample, name));
        ensure!(score >= 0.95, "KS similarity of {name}: {score:.4}");
        worst_ks = worst_ks.min(score);
    }
    Ok(format!("max Spearman gap {worst_rho:.4}, min KS similarity {worst_ks:.4}"))
}

fn tstr_consistency() -> Check {
    let original = data::diabetes_like(3);
    for learner in [Learner::default(), Learner::knn(5)] {
        for seed in [1u64, 2, 3] {
            let split = utility_split(&original, "Outcome", seed).map_err(|e| e.to_string())?;
            let r = tstr_compare(&original, &split.train, "Outcome", &learner, seed).map_err(|e| e.to_string())?;
            ensure!(r.size_matching == SizeMatching::AsIs, "size matching {:?}", r.size_matching);
            ensure!(r.tstr == r.trtr, "{:?} seed {seed}: TSTR {:?} vs TRTR {:?}", learner.kind, r.tstr, r.trtr);
        }
    }
    let mut rng = rng_from_seed(8);
    let (n, dim, l2) = (60, 6, 0.01);
    let x: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..2) as f64).collect();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let (gw, gb) = logistic_gradient(&x, dim, &y, &w, b, l2);
        for j in 0..=dim {
            let shifted = |delta: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if j < dim {
                    w2[j] += delta;
                } else {
                    b2 += delta;
                }
                logistic_loss(&x, dim, &y, &w2, b2, l2)
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let g = if j < dim { gw[j] } else { gb };
            worst = worst.max((fd - g).abs());
            ensure!((fd - g).abs() <= 1e-5, "coordinate {j}: analytic {g} vs central difference {fd}");
        }
    }
    Ok(format!("TSTR == TRTR for 2 learners x 3 seeds; max gradient error {worst:.1e}"))
}

fn write(path: &std::path::Path, d: &Dataset) {
    write_csv(d, std::fs::File::create(path).unwrap(), &CsvOptions::default()).unwrap();
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let original = data::diabetes_like(9);
    write(&dir.path().join("original.csv"), &original);
    let copula = generate(GeneratorKind::Copula, &original, 768, 2).map_err(|e| e.to_string())?;
    write(&dir.path().join("copula.csv"), &copula);
    write(&dir.path().join("random.csv"), &data::shuffle_columns(&original, 3));
    std::fs::write(
        dir.path().join("config.json"),
        r#"{
  "original_path": "original.csv",
  "synthetic_paths": {"copula": "copula.csv", "shuffled": "random.csv"},
  "keys": ["Age", "BMI", "Glucose"],
  "target": "Outcome",
  "secret": "diagnosis",
  "learners": [{"kind": "logistic_regression"}, {"kind": "k_nearest_neighbors", "k": 5}],
  "seed": 17
}
"#,
    )
    .map_err(|e| e.to_string())?;
    let run = |out: &str| -> Result<Vec<u8>, String> {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_tabeval"))
            .args(["evaluate", "--config"])
            .arg(dir.path().join("config.json"))
            .args(["--format", "json", "--output"])
            .arg(dir.path().join(out))
            .env("RUST_LOG", "error")
            .status()
            .map_err(|e| e.to_string())?;
        ensure!(status.success(), "evaluate exited with {status}");
        std::fs::read(dir.path().join(out).join("report.json")).map_err(|e| e.to_string())
    };
    let (a, b) = (run("out")?, run("out")?);
    ensure!(a == b, "report.json differs between runs");
    Ok(format!("two CLI runs, {} identical bytes", a.len()))
}

fn scale_check() -> Check {
    let start = Instant::now();
    let original = data::cardio_like(70_000, 10);
    let mut models = BTreeMap::new();
    for (name, kind) in [("gmm", GeneratorKind::Gmm), ("copula", GeneratorKind::Copula), ("random", GeneratorKind::Random)] {
        let t = Instant::now();
        models.insert(name.to_string(), generate(kind, &original, 70_000, 12).map_err(|e| e.to_string())?);
        println!("    generated {name} in {:.1} s", t.elapsed().as_secs_f64());
    }
    let cfg = config_json(
        &["age", "gender", "height", "weight", "cholesterol", "gluc"],
        "cardio",
        r#", "n_neighbors": 10, "n_attacks": 500"#,
    );
    let report = run_on_datasets(&cfg, &original, &models).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure!(report.metadata.caps.large_data, "large-data caps were not applied");
    for (name, m) in &report.models {
        for (stage, t) in &report.timings.models[name] {
            println!("    {name} {stage}: {t:.1} s");
        }
        value(&m.distance_privacy, "distance privacy")?;
        value(&m.similarity, "similarity")?;
    }
    ensure!(secs < 600.0, "took {secs:.0} s");
    let threads = rayon::current_num_threads();
    Ok(format!("70,000 x 12, 3 models, {secs:.0} s on {threads} thread(s)"))
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let checks: [(&str, fn() -> Check); 10] = [
        ("random-copy fixed point", random_copy_fixed_point),
        ("attack copy and null bounds", attack_bounds),
        ("NNAA calibration", nnaa_calibration),
        ("oracle equivalence", oracle_equivalence),
        ("Sinkhorn convergence", sinkhorn_convergence),
        ("EM monotonicity", em_monotonicity),
        ("copula fidelity", copula_fidelity),
        ("TSTR consistency", tstr_consistency),
        ("determinism", determinism),
        ("scale check", scale_check),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[{id:02}] {name}: PASS ({detail}) [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("[{id:02}] {name}: FAIL ({why}) [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
