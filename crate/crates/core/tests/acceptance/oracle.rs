//! Brute-force reference implementations written straight from the metric
//! definitions, sharing no code with the library.

use std::collections::{BTreeMap, BTreeSet};

use tabeval_core::{Column, Dataset};

/// Column values after min-max scaling on the original's observed range;
/// categorical cells stay labels.
#[derive(Clone, Debug)]
pub enum Cells {
    Num(Vec<f64>),
    Cat(Vec<String>),
}

pub struct Table {
    pub names: Vec<String>,
    pub cols: Vec<Cells>,
    pub n: usize,
}

impl Table {
    pub fn col(&self, name: &str) -> &Cells {
        &self.cols[self.names.iter().position(|n| n == name).unwrap()]
    }
}

/// Scales both datasets with the original's `[min, max]`, clamping.
pub fn scaled_pair(original: &Dataset, synthetic: &Dataset) -> (Table, Table) {
    let names: Vec<String> = original.schema().names().map(str::to_string).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for name in &names {
        match (original.column(name).unwrap(), synthetic.column(name).unwrap()) {
            (Column::Numeric(x), Column::Numeric(y)) => {
                let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let f = |v: &f64| if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
                a.push(Cells::Num(x.iter().map(f).collect()));
                b.push(Cells::Num(y.iter().map(f).collect()));
            }
            (Column::Categorical(x), Column::Categorical(y)) => {
                a.push(Cells::Cat(x.clone()));
                b.push(Cells::Cat(y.clone()));
            }
            _ => panic!("kind mismatch"),
        }
    }
    (
        Table { names: names.clone(), cols: a, n: original.n_rows() },
        Table { names, cols: b, n: synthetic.n_rows() },
    )
}

pub fn bin_of(t: f64, bins: usize) -> usize {
    if t <= 0.0 {
        return 0;
    }
    let b = (t * bins as f64).floor() as usize;
    b.min(bins - 1)
}

fn label(c: &Cells, i: usize, bins: usize) -> String {
    match c {
        Cells::Num(v) => format!("b{}", bin_of(v[i], bins)),
        Cells::Cat(v) => v[i].clone(),
    }
}

fn key(t: &Table, cols: &[&str], i: usize, bins: usize) -> Vec<String> {
    cols.iter().map(|c| label(t.col(c), i, bins)).collect()
}

pub fn disco(o: &Table, s: &Table, keys: &[&str], target: &str, bins: usize) -> f64 {
    let mut hits = 0;
    for i in 0..o.n {
        let k = key(o, keys, i, bins);
        let t = label(o.col(target), i, bins);
        let orig_ok = (0..o.n)
            .filter(|&j| key(o, keys, j, bins) == k)
            .all(|j| label(o.col(target), j, bins) == t);
        let syn: Vec<usize> = (0..s.n).filter(|&j| key(s, keys, j, bins) == k).collect();
        let syn_ok = !syn.is_empty() && syn.iter().all(|&j| label(s.col(target), j, bins) == t);
        if orig_ok && syn_ok {
            hits += 1;
        }
    }
    100.0 * hits as f64 / o.n as f64
}

pub fn rep_u(o: &Table, s: &Table, keys: &[&str], bins: usize) -> f64 {
    let mut hits = 0;
    for i in 0..o.n {
        let k = key(o, keys, i, bins);
        let in_o = (0..o.n).filter(|&j| key(o, keys, j, bins) == k).count();
        let in_s = (0..s.n).filter(|&j| key(s, keys, j, bins) == k).count();
        if in_o == 1 && in_s == 1 {
            hits += 1;
        }
    }
    100.0 * hits as f64 / o.n as f64
}

pub fn dist(a: &Table, i: usize, b: &Table, j: usize) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.cols.iter().zip(&b.cols) {
        match (x, y) {
            (Cells::Num(x), Cells::Num(y)) => acc += (x[i] - y[j]) * (x[i] - y[j]),
            (Cells::Cat(x), Cells::Cat(y)) => {
                if x[i] != y[j] {
                    acc += 1.0;
                }
            }
            _ => unreachable!(),
        }
    }
    acc.sqrt()
}

fn sorted_dists(from: &Table, i: usize, to: &Table) -> Vec<f64> {
    let mut d: Vec<f64> = (0..to.n).map(|j| dist(from, i, to, j)).collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d
}

pub fn nndr(o: &Table, s: &Table) -> f64 {
    (0..s.n)
        .map(|i| {
            let d = sorted_dists(s, i, o);
            if d[0] == 0.0 {
                0.0
            } else {
                d[0] / d[1]
            }
        })
        .sum::<f64>()
        / s.n as f64
}

pub fn dcr(o: &Table, s: &Table) -> f64 {
    (0..s.n).map(|i| sorted_dists(s, i, o)[0]).sum::<f64>() / s.n as f64
}

/// Equal-sized samples only.
pub fn nnaa(t: &Table, s: &Table) -> f64 {
    let n = t.n;
    let within = |a: &Table, i: usize| {
        (0..a.n)
            .filter(|&j| j != i)
            .map(|j| dist(a, i, a, j))
            .fold(f64::INFINITY, f64::min)
    };
    let cross = |a: &Table, i: usize, b: &Table| (0..b.n).map(|j| dist(a, i, b, j)).fold(f64::INFINITY, f64::min);
    let a = (0..n).filter(|&i| cross(t, i, s) > within(t, i)).count() as f64 / n as f64;
    let b = (0..n).filter(|&i| cross(s, i, t) > within(s, i)).count() as f64 / n as f64;
    0.5 * (a + b)
}

fn ecdf(v: &[f64], t: f64) -> f64 {
    v.iter().filter(|&&x| x <= t).count() as f64 / v.len() as f64
}

pub fn ws_1d(a: &[f64], b: &[f64]) -> f64 {
    let mut z: Vec<f64> = a.iter().chain(b).cloned().collect();
    z.sort_by(|x, y| x.partial_cmp(y).unwrap());
    z.dedup();
    z.windows(2)
        .map(|w| (w[1] - w[0]) * (ecdf(a, w[0]) - ecdf(b, w[0])).abs())
        .sum()
}

pub fn ks_num(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .chain(b)
        .map(|&t| (ecdf(a, t) - ecdf(b, t)).abs())
        .fold(0.0, f64::max)
}

pub fn ks_cat(a: &[String], b: &[String], order: &[String]) -> f64 {
    let extra: BTreeSet<&String> = a.iter().chain(b).filter(|l| !order.contains(l)).collect();
    let levels: Vec<&String> = order.iter().chain(extra).collect();
    let mut worst: f64 = 0.0;
    for k in 0..levels.len() {
        let below = |v: &[String]| {
            v.iter().filter(|l| levels[..=k].contains(l)).count() as f64 / v.len() as f64
        };
        worst = worst.max((below(a) - below(b)).abs());
    }
    worst
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    Some(sxy / (sxx * syy).sqrt())
}

pub fn ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&ranks(x), &ranks(y))
}

/// Mean of `1 - |s - o| / 2` over column pairs defined on both sides.
pub fn corr_similarity(o: &[Vec<f64>], s: &[Vec<f64>], rank: bool) -> Option<f64> {
    let f = if rank { spearman } else { pearson };
    let mut acc = Vec::new();
    for i in 0..o.len() {
        for j in i + 1..o.len() {
            if let (Some(a), Some(b)) = (f(&o[i], &o[j]), f(&s[i], &s[j])) {
                acc.push(1.0 - (b - a).abs() / 2.0);
            }
        }
    }
    (!acc.is_empty()).then(|| mean(&acc))
}

/// Numeric columns, plus ordered categorical ones (as positions) when
/// `with_ordered` is set.
pub fn corr_columns(t: &Table, order: &BTreeMap<String, Vec<String>>, with_ordered: bool) -> Vec<Vec<f64>> {
    t.names
        .iter()
        .zip(&t.cols)
        .filter_map(|(name, c)| match c {
            Cells::Num(v) => Some(v.clone()),
            Cells::Cat(v) if with_ordered => order
                .get(name)
                .map(|o| v.iter().map(|l| o.iter().position(|x| x == l).unwrap() as f64).collect()),
            Cells::Cat(_) => None,
        })
        .collect()
}

fn entropy<K: Ord>(labels: impl Iterator<Item = K>) -> f64 {
    let mut counts: BTreeMap<K, usize> = BTreeMap::new();
    let mut n = 0usize;
    for l in labels {
        *counts.entry(l).or_default() += 1;
        n += 1;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

pub fn nmi(x: &[String], y: &[String]) -> f64 {
    let hx = entropy(x.iter());
    let hy = entropy(y.iter());
    if hx + hy == 0.0 {
        return 0.0;
    }
    let hxy = entropy(x.iter().zip(y));
    2.0 * (hx + hy - hxy) / (hx + hy)
}

pub fn discrete(t: &Table, bins: usize) -> Vec<Vec<String>> {
    t.cols
        .iter()
        .map(|c| (0..t.n).map(|i| label(c, i, bins)).collect())
        .collect()
}

pub fn nmi_similarity(o: &[Vec<String>], s: &[Vec<String>]) -> Option<f64> {
    let mut acc = Vec::new();
    for i in 0..o.len() {
        for j in i + 1..o.len() {
            acc.push(1.0 - (nmi(&s[i], &s[j]) - nmi(&o[i], &o[j])).abs());
        }
    }
    (!acc.is_empty()).then(|| mean(&acc))
}

/// Base-2 Jensen-Shannon divergence via `H(m) - (H(p) + H(q)) / 2`.
pub fn jsd(a: &[String], b: &[String]) -> f64 {
    let support: BTreeSet<&String> = a.iter().chain(b).collect();
    let freq = |v: &[String], l: &String| v.iter().filter(|x| *x == l).count() as f64 / v.len() as f64;
    let h = |p: &[f64]| -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.log2()).sum::<f64>();
    let p: Vec<f64> = support.iter().map(|l| freq(a, l)).collect();
    let q: Vec<f64> = support.iter().map(|l| freq(b, l)).collect();
    let m: Vec<f64> = p.iter().zip(&q).map(|(x, y)| 0.5 * (x + y)).collect();
    h(&m) - 0.5 * (h(&p) + h(&q))
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn pop_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

pub fn numeric_pairs<'a>(o: &'a Table, s: &'a Table) -> Vec<(&'a [f64], &'a [f64])> {
    o.cols
        .iter()
        .zip(&s.cols)
        .filter_map(|(a, b)| match (a, b) {
            (Cells::Num(a), Cells::Num(b)) => Some((a.as_slice(), b.as_slice())),
            _ => None,
        })
        .collect()
}

pub fn average(v: &[f64]) -> f64 {
    mean(v)
}

/// Minimum over all permutations of the mean matched cost.
pub fn best_assignment(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..cost.len() {
            if !used[j] {
                used[j] = true;
                go(cost, row + 1, used, acc + cost[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
    best / cost.len() as f64
}
