//! Toy tables shaped like the public benchmark datasets.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use tabeval_core::rng::rng_from_seed;
use tabeval_core::{Column, Dataset};

fn clip_round(x: f64, lo: f64, hi: f64, digits: i32) -> f64 {
    let p = 10f64.powi(digits);
    (x.clamp(lo, hi) * p).round() / p
}

/// 768 diabetes-like records with a 30-level categorical `diagnosis` code
/// and a binary `Outcome`; a handful of rows are exact duplicates.
pub fn diabetes_like(seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let n = 768;
    let std = Normal::<f64>::new(0.0, 1.0).unwrap();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 8];
    let mut diagnosis = Vec::with_capacity(n);
    let mut outcome = Vec::with_capacity(n);
    for _ in 0..n {
        let (zg, zb, za) = (std.sample(&mut rng), std.sample(&mut rng), std.sample(&mut rng));
        let age = clip_round(21.0 + 12.0 * za.abs() + 2.0 * std.sample(&mut rng).abs(), 21.0, 81.0, 0);
        let pregnancies = clip_round((age - 21.0) / 4.0 + 2.5 * std.sample(&mut rng), 0.0, 17.0, 0);
        let glucose = clip_round(120.0 + 30.0 * zg, 44.0, 199.0, 0);
        let bmi = clip_round(32.0 + 7.0 * (0.3 * zg + 0.95 * zb), 18.0, 67.0, 1);
        let pressure = clip_round(72.0 + 12.0 * (0.3 * za + 0.25 * zb + 0.9 * std.sample(&mut rng)), 24.0, 122.0, 0);
        let skin = clip_round(29.0 + 10.0 * (0.6 * zb + 0.8 * std.sample(&mut rng)), 7.0, 99.0, 0);
        let insulin = clip_round(150.0 + 100.0 * (0.5 * zg + 0.3 * zb + 0.8 * std.sample(&mut rng)), 14.0, 846.0, 0);
        let pedigree = clip_round(0.47 + 0.33 * std.sample(&mut rng).abs(), 0.078, 2.42, 3);
        let vals = [pregnancies, glucose, pressure, skin, insulin, bmi, pedigree, age];
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v);
        }
        diagnosis.push(format!("D{:02}", rng.random_range(0..30)));
        let risk = 0.045 * (glucose - 120.0) + 0.06 * (bmi - 32.0) + 0.03 * (age - 33.0);
        outcome.push(if risk + std.sample(&mut rng) > 0.6 { "1" } else { "0" }.to_string());
    }
    // a few verbatim duplicates keep the table mostly, not fully, unique
    for k in 0..12 {
        let (src, dst) = (k, n - 1 - k);
        for c in cols.iter_mut() {
            c[dst] = c[src];
        }
        diagnosis[dst] = diagnosis[src].clone();
        outcome[dst] = outcome[src].clone();
    }
    let names = [
        "Pregnancies",
        "Glucose",
        "BloodPressure",
        "SkinThickness",
        "Insulin",
        "BMI",
        "DiabetesPedigreeFunction",
        "Age",
    ];
    let mut all: Vec<(String, Column)> = names
        .iter()
        .zip(cols)
        .map(|(n, c)| (n.to_string(), Column::Numeric(c)))
        .collect();
    all.push(("diagnosis".into(), Column::Categorical(diagnosis)));
    all.push(("Outcome".into(), Column::Categorical(outcome)));
    Dataset::from_columns(all).unwrap()
}

/// Each column permuted independently: same marginals, no joint structure.
pub fn shuffle_columns(data: &Dataset, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let cols: Vec<(String, Column)> = data
        .schema()
        .names()
        .zip(data.columns())
        .map(|(name, col)| {
            let mut idx: Vec<usize> = (0..data.n_rows()).collect();
            idx.shuffle(&mut rng);
            let c = match col {
                Column::Numeric(v) => Column::Numeric(idx.iter().map(|&i| v[i]).collect()),
                Column::Categorical(v) => Column::Categorical(idx.iter().map(|&i| v[i].clone()).collect()),
            };
            (name.to_string(), c)
        })
        .collect();
    Dataset::new(data.schema().clone(), cols.into_iter().map(|c| c.1).collect()).unwrap()
}

/// Cardiovascular-screening shaped table: 12 integer-coded columns as they
/// appear in the raw CSV.
pub fn cardio_like(n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let std = Normal::<f64>::new(0.0, 1.0).unwrap();
    let names = [
        "age", "gender", "height", "weight", "ap_hi", "ap_lo", "cholesterol", "gluc", "smoke", "alco", "active",
        "cardio",
    ];
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); names.len()];
    for _ in 0..n {
        let age = (rng.random_range(39.0..65.0f64) * 365.25).round();
        let gender = if rng.random_bool(0.35) { 2.0 } else { 1.0 };
        let height = (if gender == 2.0 { 170.0 } else { 161.0 } + 7.5 * std.sample(&mut rng)).round();
        let weight = (74.0 + 14.0 * std.sample(&mut rng) + 0.3 * (height - 164.0)).round().max(30.0);
        let ap_hi = (127.0 + 17.0 * std.sample(&mut rng) + 0.2 * (weight - 74.0)).round();
        let ap_lo = (0.55 * ap_hi + 12.0 + 8.0 * std.sample(&mut rng)).round();
        let chol = [1.0, 1.0, 1.0, 2.0, 3.0][rng.random_range(0..5)];
        let gluc = if rng.random_bool(0.15) { rng.random_range(2..=3) as f64 } else { 1.0 };
        let smoke = rng.random_bool(0.09) as u8 as f64;
        let alco = rng.random_bool(0.05) as u8 as f64;
        let active = rng.random_bool(0.8) as u8 as f64;
        let score = 0.04 * (ap_hi - 127.0) + 0.00015 * (age - 19_500.0) + 0.4 * (chol - 1.0) - 0.2 * active;
        let cardio = (score + std.sample(&mut rng) > 0.0) as u8 as f64;
        let row = [age, gender, height, weight, ap_hi, ap_lo, chol, gluc, smoke, alco, active, cardio];
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    Dataset::from_columns(names.iter().zip(cols).map(|(n, c)| (*n, Column::Numeric(c)))).unwrap()
}

/// `n` rows of 1-based ids; every (age bin, zip) key is distinct because
/// `zip` alone is.
pub fn unique_key_table(n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let std = Normal::<f64>::new(0.0, 1.0).unwrap();
    let mut age = Vec::new();
    let mut zip = Vec::new();
    let mut income = Vec::new();
    let mut sex = Vec::new();
    let mut cond = Vec::new();
    for i in 0..n {
        let a = rng.random_range(18.0..90.0f64).round();
        age.push(a);
        zip.push(format!("Z{:05}", 10_000 + i * 7));
        income.push((40_000.0 + 400.0 * a + 9_000.0 * std.sample(&mut rng)).round());
        sex.push(if rng.random_bool(0.5) { "f" } else { "m" }.to_string());
        cond.push(if rng.random_bool(0.3) { "yes" } else { "no" }.to_string());
    }
    Dataset::from_columns([
        ("age", Column::Numeric(age)),
        ("zip", Column::Categorical(zip)),
        ("income", Column::Numeric(income)),
        ("sex", Column::Categorical(sex)),
        ("condition", Column::Categorical(cond)),
    ])
    .unwrap()
}
