//! Random corpora and brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the code under test except to
//! build inputs.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use attrib_core::data::{CategoryId, LabelMap, PredictionMatrix};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One scored submission: probability rows plus the true column per row.
#[derive(Debug, Clone)]
pub struct Case {
    pub rows: Vec<Vec<f64>>,
    pub truth: Vec<usize>,
    pub matrix: PredictionMatrix,
    pub labels: LabelMap,
}

impl Case {
    pub fn new(rows: Vec<Vec<f64>>, truth: Vec<usize>) -> Case {
        let k = rows[0].len();
        let seqs: Vec<String> = (0..rows.len()).map(|i| format!("seq{i}")).collect();
        let cats: Vec<CategoryId> = (0..k).map(|j| CategoryId::new(format!("cat{j}"))).collect();
        let labels = seqs
            .iter()
            .zip(&truth)
            .map(|(s, &t)| (s.clone(), cats[t].clone()))
            .collect();
        let matrix = PredictionMatrix::from_rows(seqs, cats, rows.clone()).unwrap();
        Case {
            rows,
            truth,
            matrix,
            labels,
        }
    }

    pub fn k(&self) -> usize {
        self.rows[0].len()
    }
}

fn normalise(mut row: Vec<f64>) -> Vec<f64> {
    let total: f64 = row.iter().sum();
    if total == 0.0 {
        let k = row.len() as f64;
        return vec![1.0 / k; row.len()];
    }
    row.iter_mut().for_each(|v| *v /= total);
    row
}

fn random_row(rng: &mut ChaCha8Rng, k: usize, style: u8) -> Vec<f64> {
    match style {
        // continuous
        0 => normalise((0..k).map(|_| rng.gen::<f64>()).collect()),
        // small integers: many ties and zeros
        1 => normalise((0..k).map(|_| rng.gen_range(0..4) as f64).collect()),
        // continuous with copied entries forming tie groups
        2 => {
            let mut raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            for _ in 0..rng.gen_range(1..=k) {
                let (a, b) = (rng.gen_range(0..k), rng.gen_range(0..k));
                raw[b] = raw[a];
            }
            normalise(raw)
        }
        // one-hot, uniform, or values on 1/15 bin edges
        _ => match rng.gen_range(0..3) {
            0 => {
                let mut row = vec![0.0; k];
                row[rng.gen_range(0..k)] = 1.0;
                row
            }
            1 => vec![1.0 / k as f64; k],
            _ => normalise(
                (0..k)
                    .map(|_| rng.gen_range(0..=15) as f64 / 15.0)
                    .collect(),
            ),
        },
    }
}

/// A matrix with `1..=max_j` rows and `2..=max_k` columns mixing row styles.
pub fn random_case(rng: &mut ChaCha8Rng, max_j: usize, max_k: usize) -> Case {
    let j = rng.gen_range(1..=max_j);
    let k = rng.gen_range(2..=max_k);
    let bias: u8 = rng.gen_range(0..4);
    let rows = (0..j)
        .map(|_| {
            let style = if rng.gen_bool(0.5) {
                bias
            } else {
                rng.gen_range(0..4)
            };
            random_row(rng, k, style)
        })
        .collect();
    let truth = (0..j).map(|_| rng.gen_range(0..k)).collect();
    Case::new(rows, truth)
}

pub fn fuzz_corpus(rng: &mut ChaCha8Rng, n: usize) -> Vec<Case> {
    (0..n).map(|_| random_case(rng, 100, 30)).collect()
}

/// Max-position rank by counting: values strictly above plus values equal
/// (the cell itself included).
pub fn brute_rank(row: &[f64], j: usize) -> usize {
    let v = row[j];
    row.iter().filter(|&&x| x > v).count() + row.iter().filter(|&&x| x == v).count()
}

/// Rows whose true category ranks at most `n`.
pub fn brute_top_n_hits(case: &Case, n: usize) -> usize {
    case.rows
        .iter()
        .zip(&case.truth)
        .filter(|(row, &t)| brute_rank(row, t) <= n)
        .count()
}

/// First column holding the row maximum.
pub fn first_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    best
}

/// ECE and MCE from the textbook definitions: bin m holds confidences in
/// ((m-1)/M, m/M], zero goes to the first bin.
pub fn literal_calibration(rows: &[Vec<f64>], truth: &[usize], m: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let conf: Vec<f64> = rows.iter().map(|r| r[first_argmax(r)]).collect();
    let correct: Vec<bool> = rows
        .iter()
        .zip(truth)
        .map(|(r, &t)| first_argmax(r) == t)
        .collect();
    let (mut ece, mut mce) = (0.0f64, 0.0f64);
    for bin in 1..=m {
        let lo = (bin - 1) as f64 / m as f64;
        let hi = bin as f64 / m as f64;
        let members: Vec<usize> = (0..rows.len())
            .filter(|&i| (conf[i] > lo && conf[i] <= hi) || (bin == 1 && conf[i] == 0.0))
            .collect();
        if members.is_empty() {
            continue;
        }
        let size = members.len() as f64;
        let acc = members.iter().filter(|&&i| correct[i]).count() as f64 / size;
        let mean_conf = members.iter().map(|&i| conf[i]).sum::<f64>() / size;
        let gap = (acc - mean_conf).abs();
        ece += size / n * gap;
        mce = mce.max(gap);
    }
    (ece, mce)
}

/// Element-wise mean accumulated in reverse member order.
pub fn reverse_mean(members: &[&Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let (j, k) = (members[0].len(), members[0][0].len());
    let mut out = vec![vec![0.0; k]; j];
    for m in members.iter().rev() {
        for (o, r) in out.iter_mut().zip(m.iter()) {
            for (a, b) in o.iter_mut().zip(r) {
                *a += b;
            }
        }
    }
    let n = members.len() as f64;
    for row in &mut out {
        row.iter_mut().for_each(|v| *v /= n);
    }
    out
}

/// `(tp, fp, fn)` per category with rank-1 prediction; a tied maximum
/// predicts nothing.
pub fn brute_counts(case: &Case) -> Vec<(usize, usize, usize)> {
    let mut out = vec![(0, 0, 0); case.k()];
    for (row, &t) in case.rows.iter().zip(&case.truth) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let winners: Vec<usize> = (0..row.len()).filter(|&j| row[j] == max).collect();
        let predicted = (winners.len() == 1).then(|| winners[0]);
        match predicted {
            Some(p) if p == t => out[t].0 += 1,
            Some(p) => {
                out[p].1 += 1;
                out[t].2 += 1;
            }
            None => out[t].2 += 1,
        }
    }
    out
}

pub fn ratio_or_zero(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Connected components by breadth-first search, as sorted id sets.
pub fn bfs_components(ids: &[String], edges: &[(String, String)]) -> Vec<Vec<String>> {
    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen: HashMap<&str, bool> = ids.iter().map(|i| (i.as_str(), false)).collect();
    let mut out = Vec::new();
    for id in ids {
        if seen[id.as_str()] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([id.as_str()]);
        seen.insert(id, true);
        while let Some(v) = queue.pop_front() {
            comp.push(v.to_string());
            for &w in adj.get(v).map(Vec::as_slice).unwrap_or(&[]) {
                if !seen[w] {
                    seen.insert(w, true);
                    queue.push_back(w);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out.sort();
    out
}

/// Average ranks from an explicit comparison table.
pub fn brute_fractional_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn brute_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let (rx, ry) = (brute_fractional_ranks(x), brute_fractional_ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}

pub fn random_dna(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len)
        .map(|_| *b"ACGT".choose(rng).unwrap() as char)
        .collect()
}
