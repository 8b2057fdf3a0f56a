//! Dataset loading, splitting and scaling.
//!
//! Two text formats are accepted: the sparse LIBSVM format
//! (`<label> <index>:<value> ...`, 1-based strictly increasing indices)
//! and a plain numeric CSV subset (no quoting, optional header row).
//! Features are stored dense; the benchmark dimensions this crate targets
//! are small enough that Gram computation dominates everything else.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// A dense sample matrix with optional ±1 labels.
#[derive(Clone, Debug)]
pub struct Dataset {
    features: Vec<f64>,
    n_samples: usize,
    n_features: usize,
    labels: Option<Vec<f64>>,
}

impl Dataset {
    /// Build from row-major features. Labels, when given, must be ±1.
    pub fn new(features: Vec<f64>, n_features: usize, labels: Option<Vec<f64>>) -> Result<Self> {
        if n_features == 0 && !features.is_empty() {
            return Err(Error::input("n_features is 0 but features are non-empty"));
        }
        let n_samples = if n_features == 0 {
            labels.as_ref().map_or(0, |l| l.len())
        } else {
            if features.len() % n_features != 0 {
                return Err(Error::input("feature buffer is not a multiple of n_features"));
            }
            features.len() / n_features
        };
        if let Some(ls) = &labels {
            if ls.len() != n_samples {
                return Err(Error::input("label count does not match sample count"));
            }
            if ls.iter().any(|&y| y != 1.0 && y != -1.0) {
                return Err(Error::input("labels must be +1 or -1"));
            }
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("features contain NaN or infinity"));
        }
        Ok(Dataset { features, n_samples, n_features, labels })
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<f64> {
        self.labels.as_ref().map(|l| l[i])
    }

    /// Drop the label column (used when training one-class models on labeled data).
    pub fn without_labels(&self) -> Dataset {
        Dataset { labels: None, ..self.clone() }
    }

    /// Keep only the samples at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(idx.len() * self.n_features);
        for &i in idx {
            features.extend_from_slice(self.row(i));
        }
        let labels = self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect());
        Dataset { features, n_samples: idx.len(), n_features: self.n_features, labels }
    }

    /// FNV-1a over the raw feature and label bits. Stable across runs and
    /// platforms, used to tie serialized models back to their training data.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        eat(self.n_samples as u64);
        eat(self.n_features as u64);
        for v in &self.features {
            eat(v.to_bits());
        }
        if let Some(ls) = &self.labels {
            for v in ls {
                eat(v.to_bits());
            }
        }
        h
    }

    /// Serialize in LIBSVM text format (sparse: zeros omitted). Requires labels.
    pub fn to_libsvm(&self) -> Result<String> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::input("libsvm serialization requires labels"))?;
        let mut out = String::new();
        for i in 0..self.n_samples {
            out.push_str(if labels[i] > 0.0 { "+1" } else { "-1" });
            for (j, &v) in self.row(i).iter().enumerate() {
                if v != 0.0 {
                    out.push_str(&format!(" {}:{}", j + 1, v));
                }
            }
            out.push('\n');
        }
        Ok(out)
    }
}

fn map_label(raw: f64, line: usize, zero_as_negative: bool) -> Result<f64> {
    if raw == 1.0 {
        Ok(1.0)
    } else if raw == -1.0 {
        Ok(-1.0)
    } else if raw == 0.0 && zero_as_negative {
        Ok(-1.0)
    } else {
        Err(Error::parse(line, format!("label {raw} is not in {{+1,-1}} (pass zero_as_negative for 0/1 data)")))
    }
}

/// Parse LIBSVM sparse text. Indices are 1-based and must be strictly
/// increasing within a line; unmentioned indices are zero. The feature
/// count is the maximum index seen anywhere in the stream.
pub fn parse_libsvm(text: &str, zero_as_negative: bool) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in text.lines().enumerate() {
        let line_display = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let raw: f64 = label_tok
            .parse()
            .map_err(|_| Error::parse(line_display, format!("bad label token '{label_tok}'")))?;
        labels.push(map_label(raw, line_display, zero_as_negative)?);

        let mut row = Vec::new();
        let mut prev_index = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(line_display, format!("expected index:value, got '{tok}'")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| Error::parse(line_display, format!("bad feature index '{idx_s}'")))?;
            let val: f64 = val_s
                .parse()
                .map_err(|_| Error::parse(line_display, format!("bad feature value '{val_s}'")))?;
            if idx == 0 {
                return Err(Error::parse(line_display, "feature indices are 1-based"));
            }
            if idx <= prev_index {
                return Err(Error::parse(line_display, format!("feature index {idx} is not strictly increasing")));
            }
            if !val.is_finite() {
                return Err(Error::parse(line_display, "non-finite feature value"));
            }
            prev_index = idx;
            max_index = max_index.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
    }

    let n_features = max_index;
    let mut features = vec![0.0; rows.len() * n_features];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            features[i * n_features + j] = v;
        }
    }
    Dataset::new(features, n_features, Some(labels))
}

fn is_numeric_row(fields: &[&str]) -> bool {
    fields.iter().all(|f| f.trim().parse::<f64>().is_ok())
}

/// Parse numeric CSV. A non-numeric first row is treated as a header.
/// When `label_column` is given, that column is extracted and mapped to ±1:
/// exactly two distinct values are required and the larger becomes +1.
pub fn parse_csv(text: &str, label_column: Option<usize>) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    // header detection
    if let Some((_, first)) = lines.peek() {
        let fields: Vec<&str> = first.split(',').collect();
        if !is_numeric_row(&fields) {
            lines.next();
        }
    }

    let mut width = None;
    let mut values: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines {
        let line_display = lineno + 1;
        let fields: Vec<&str> = line.split(',').collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::parse(line_display, format!("ragged row: {} fields, expected {w}", fields.len())));
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(fields.len());
        for f in &fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_display, format!("bad numeric field '{}'", f.trim())))?;
            row.push(v);
        }
        values.push(row);
    }

    let width = width.unwrap_or(0);
    let Some(label_col) = label_column else {
        let features: Vec<f64> = values.into_iter().flatten().collect();
        return Dataset::new(features, width, None);
    };

    if label_col >= width {
        return Err(Error::input(format!("label column {label_col} out of range for {width} columns")));
    }
    let mut distinct: Vec<f64> = Vec::new();
    for row in &values {
        let v = row[label_col];
        if !distinct.contains(&v) {
            distinct.push(v);
        }
        if distinct.len() > 2 {
            return Err(Error::input("label column has more than 2 distinct values"));
        }
    }
    if distinct.len() != 2 {
        return Err(Error::input("label column needs exactly 2 distinct values"));
    }
    let positive = distinct[0].max(distinct[1]);
    let mut features = Vec::with_capacity(values.len() * (width - 1));
    let mut labels = Vec::with_capacity(values.len());
    for row in &values {
        for (j, &v) in row.iter().enumerate() {
            if j != label_col {
                features.push(v);
            }
        }
        labels.push(if row[label_col] == positive { 1.0 } else { -1.0 });
    }
    Dataset::new(features, width - 1, Some(labels))
}

/// Deterministic shuffled split: SplitMix64-seeded Fisher-Yates, then a
/// prefix of floor(fraction * l) samples for the train side.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(Error::input("train_fraction must be in (0,1)"));
    }
    let l = data.len();
    let n_train = (train_fraction * l as f64).floor() as usize;
    if n_train == 0 || n_train == l {
        return Err(Error::input(format!("split of {l} samples at {train_fraction} leaves one side empty")));
    }
    let mut idx: Vec<usize> = (0..l).collect();
    SplitMix64::new(seed).shuffle(&mut idx);
    let train = data.select(&idx[..n_train]);
    let test = data.select(&idx[n_train..]);
    Ok((train, test))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleMethod {
    Minmax01,
    Zscore,
}

/// Per-feature statistics fitted on a training set and applied to any set
/// with the same width. Zero-variance features pass through unchanged.
#[derive(Clone, Debug)]
pub struct Scaler {
    method: ScaleMethod,
    a: Vec<f64>, // offset: min or mean
    b: Vec<f64>, // scale: max-min or std
}

impl Scaler {
    pub fn fit(method: ScaleMethod, train: &Dataset) -> Scaler {
        let p = train.n_features();
        let l = train.len().max(1);
        let mut a = vec![0.0; p];
        let mut b = vec![0.0; p];
        match method {
            ScaleMethod::Minmax01 => {
                for j in 0..p {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for i in 0..train.len() {
                        let v = train.row(i)[j];
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                    a[j] = lo;
                    b[j] = hi - lo;
                }
            }
            ScaleMethod::Zscore => {
                for j in 0..p {
                    let mean = (0..train.len()).map(|i| train.row(i)[j]).sum::<f64>() / l as f64;
                    let var = (0..train.len())
                        .map(|i| {
                            let d = train.row(i)[j] - mean;
                            d * d
                        })
                        .sum::<f64>()
                        / l as f64;
                    a[j] = mean;
                    b[j] = var.sqrt();
                }
            }
        }
        Scaler { method, a, b }
    }

    pub fn method(&self) -> ScaleMethod {
        self.method
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.n_features() != self.a.len() {
            return Err(Error::input("scaler was fitted on a different feature count"));
        }
        let p = data.n_features();
        let mut features = Vec::with_capacity(data.len() * p);
        for i in 0..data.len() {
            for (j, &v) in data.row(i).iter().enumerate() {
                if self.b[j] <= 0.0 {
                    features.push(v);
                } else {
                    features.push((v - self.a[j]) / self.b[j]);
                }
            }
        }
        Dataset::new(features, p, data.labels().map(|l| l.to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn libsvm_basic_line() {
        let d = parse_libsvm("+1 1:0.5 3:2\n", false).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.n_features(), 3);
        assert_eq!(d.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(d.labels().unwrap(), &[1.0]);
    }

    #[test]
    fn libsvm_label_only_line() {
        let d = parse_libsvm("-1\n", false).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.n_features(), 0);
        assert_eq!(d.labels().unwrap(), &[-1.0]);
    }

    #[test]
    fn libsvm_decreasing_indices_rejected() {
        let err = parse_libsvm("1 3:1 2:1\n", false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn libsvm_zero_label_needs_flag() {
        assert!(parse_libsvm("0 1:1\n", false).is_err());
        let d = parse_libsvm("0 1:1\n", true).unwrap();
        assert_eq!(d.labels().unwrap(), &[-1.0]);
    }

    #[test]
    fn libsvm_round_trip_exact() {
        let text = "+1 1:0.1234567890123457 2:-3.5\n-1 3:1e-12\n+1\n";
        let d = parse_libsvm(text, false).unwrap();
        let d2 = parse_libsvm(&d.to_libsvm().unwrap(), false).unwrap();
        assert_eq!(d.n_features(), d2.n_features());
        for i in 0..d.len() {
            assert_eq!(d.row(i), d2.row(i));
            assert_eq!(d.label(i), d2.label(i));
        }
    }

    #[test]
    fn csv_with_label_column() {
        let d = parse_csv("1,2,+1\n3,4,-1\n", Some(2)).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.row(0), &[1.0, 2.0]);
        assert_eq!(d.labels().unwrap(), &[1.0, -1.0]);
    }

    #[test]
    fn csv_header_autodetected() {
        let d = parse_csv("x,y,label\n1,2,5\n3,4,7\n", Some(2)).unwrap();
        assert_eq!(d.len(), 2);
        // larger raw value (7) maps to +1
        assert_eq!(d.labels().unwrap(), &[-1.0, 1.0]);
    }

    #[test]
    fn csv_three_label_values_rejected() {
        assert!(parse_csv("1,0\n2,1\n3,2\n", Some(1)).is_err());
    }

    #[test]
    fn csv_ragged_rejected() {
        assert!(parse_csv("1,2\n3\n", None).is_err());
    }

    #[test]
    fn split_sizes_and_partition() {
        let features: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let labels = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let d = Dataset::new(features, 1, Some(labels)).unwrap();
        let (tr, te) = split(&d, 0.8, 9).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));

        // same seed -> identical split
        let (tr2, _) = split(&d, 0.8, 9).unwrap();
        for i in 0..tr.len() {
            assert_eq!(tr.row(i), tr2.row(i));
        }

        // union is the original multiset
        let mut seen: Vec<f64> = (0..tr.len())
            .map(|i| tr.row(i)[0])
            .chain((0..te.len()).map(|i| te.row(i)[0]))
            .collect();
        seen.sort_by(f64::total_cmp);
        assert_eq!(seen, (0..10).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn minmax_scaling() {
        let d = Dataset::new(vec![0.0, 2.0, 1.0], 1, None).unwrap();
        let s = Scaler::fit(ScaleMethod::Minmax01, &d);
        let out = s.apply(&d).unwrap();
        assert_eq!(out.row(0), &[0.0]);
        assert_eq!(out.row(1), &[1.0]);
        assert_eq!(out.row(2), &[0.5]);
    }

    #[test]
    fn zero_variance_feature_unchanged() {
        let d = Dataset::new(vec![3.0, 3.0, 3.0], 1, None).unwrap();
        for m in [ScaleMethod::Minmax01, ScaleMethod::Zscore] {
            let out = Scaler::fit(m, &d).apply(&d).unwrap();
            assert_eq!(out.row(1), &[3.0]);
        }
    }

    #[test]
    fn zscore_normalizes_train() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 1, None).unwrap();
        let out = Scaler::fit(ScaleMethod::Zscore, &d).apply(&d).unwrap();
        let mean: f64 = (0..4).map(|i| out.row(i)[0]).sum::<f64>() / 4.0;
        let var: f64 = (0..4).map(|i| out.row(i)[0].powi(2)).sum::<f64>() / 4.0 - mean * mean;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn checksum_tracks_content() {
        let d1 = Dataset::new(vec![1.0, 2.0], 1, None).unwrap();
        let d2 = Dataset::new(vec![1.0, 2.5], 1, None).unwrap();
        assert_ne!(d1.checksum(), d2.checksum());
        assert_eq!(d1.checksum(), d1.clone().checksum());
    }
}
