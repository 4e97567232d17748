use std::io::BufRead;

use crate::error::{Error, Result};
use crate::numerics::{Rng, Vector};
use crate::Scalar;

/// Dense row-major feature matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    features: Vec<T>,
    labels: Vec<T>,
    rows: usize,
    cols: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(features: Vec<T>, labels: Vec<T>, rows: usize, cols: usize) -> Result<Self> {
        if features.len() != rows * cols {
            return Err(Error::Dimension { expected: rows * cols, got: features.len() });
        }
        if labels.len() != rows {
            return Err(Error::Dimension { expected: rows, got: labels.len() });
        }
        Ok(Self { features, labels, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.cols..(i + 1) * self.cols]
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    /// Row indices split into a validation set of `ceil(frac * rows)` rows
    /// chosen by `rng`, and the remaining training rows (both ascending).
    pub fn split_indices(&self, frac: f64, rng: &mut Rng) -> (Vec<usize>, Vec<usize>) {
        let k = ((frac.clamp(0.0, 1.0) * self.rows as f64).ceil() as usize).min(self.rows);
        let val = rng.sample_without_replacement(self.rows, k);
        let mut mask = vec![false; self.rows];
        for &i in &val {
            mask[i] = true;
        }
        let train = (0..self.rows).filter(|&i| !mask[i]).collect();
        (train, val)
    }

    /// Sub-dataset keeping `indices` in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.cols);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self { features, labels, rows: indices.len(), cols: self.cols }
    }
}

/// Parses LibSVM text (`label idx:val idx:val ...`, 1-based ascending indices)
/// into a dense dataset whose width is the largest index seen.
pub fn parse_libsvm<T: Scalar, R: BufRead>(reader: R) -> Result<Dataset<T>> {
    let mut sparse_rows: Vec<Vec<(usize, T)>> = Vec::new();
    let mut labels = Vec::new();
    let mut width = 0usize;
    let mut last_line = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label = parse_real::<T>(label_tok, lineno, "label")?;
        let mut entries = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: lineno, msg: format!("expected idx:val, got '{tok}'") })?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad index '{idx_s}'") })?;
            if idx == 0 {
                return Err(Error::Parse { line: lineno, msg: "indices are 1-based".into() });
            }
            if idx <= prev {
                return Err(Error::Parse { line: lineno, msg: format!("index {idx} not ascending after {prev}") });
            }
            prev = idx;
            let val = parse_real::<T>(val_s, lineno, "value")?;
            entries.push((idx, val));
        }
        width = width.max(prev);
        labels.push(label);
        sparse_rows.push(entries);
    }

    if sparse_rows.is_empty() {
        return Err(Error::Parse { line: last_line.max(1), msg: "no samples".into() });
    }
    if width == 0 {
        return Err(Error::Parse { line: 1, msg: "no feature indices in file".into() });
    }

    let rows = sparse_rows.len();
    let mut features = vec![T::zero(); rows * width];
    for (i, entries) in sparse_rows.iter().enumerate() {
        for &(idx, val) in entries {
            features[i * width + idx - 1] = val;
        }
    }
    Dataset::new(features, labels, rows, width)
}

pub fn parse_libsvm_str<T: Scalar>(text: &str) -> Result<Dataset<T>> {
    parse_libsvm(text.as_bytes())
}

fn parse_real<T: Scalar>(s: &str, line: usize, what: &str) -> Result<T> {
    let v: f64 = s.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} '{s}'") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("non-finite {what} '{s}'") });
    }
    Ok(T::of(v))
}

/// Serializes to LibSVM text. Zero entries are omitted except the last column
/// of the first row, which is always written so the width survives a re-parse.
pub fn write_libsvm<T: Scalar>(data: &Dataset<T>) -> String {
    let mut out = String::new();
    for i in 0..data.rows() {
        out.push_str(&data.labels()[i].to_string());
        let row = data.row(i);
        for (j, &v) in row.iter().enumerate() {
            let force = i == 0 && j + 1 == data.cols();
            if v != T::zero() || force {
                out.push_str(&format!(" {}:{}", j + 1, v));
            }
        }
        out.push('\n');
    }
    out
}

/// Subsamples the majority class (seeded, without replacement, order
/// preserving) down to the minority size, then appends a constant-1 column.
pub fn balance_and_bias<T: Scalar>(data: &Dataset<T>, rng: &mut Rng) -> Result<Dataset<T>> {
    let mut classes: Vec<T> = Vec::new();
    for &y in data.labels() {
        if !classes.contains(&y) {
            classes.push(y);
        }
    }
    match classes.len() {
        2 => {}
        1 => return Err(Error::InvalidDataset("only one class present".into())),
        n => return Err(Error::InvalidDataset(format!("expected binary labels, found {n} classes"))),
    }
    let members = |c: T| -> Vec<usize> { (0..data.rows()).filter(|&i| data.labels()[i] == c).collect() };
    let (a, b) = (members(classes[0]), members(classes[1]));
    let (majority, minority) = if a.len() >= b.len() { (a, b) } else { (b, a) };

    let picked = rng.sample_without_replacement(majority.len(), minority.len());
    let mut keep: Vec<usize> = picked.into_iter().map(|k| majority[k]).chain(minority).collect();
    keep.sort_unstable();

    let cols = data.cols() + 1;
    let mut features = Vec::with_capacity(keep.len() * cols);
    let mut labels = Vec::with_capacity(keep.len());
    for &i in &keep {
        features.extend_from_slice(data.row(i));
        features.push(T::one());
        labels.push(data.labels()[i]);
    }
    Dataset::new(features, labels, keep.len(), cols)
}

/// Gaussian rows labelled by `sign(aᵀw* + noise·ξ)` for a hidden gaussian
/// `w*`; redrawn until the classes are balanced within 10%.
pub fn synth_classification<T: Scalar>(n: usize, d: usize, noise: f64, rng: &mut Rng) -> Result<Dataset<T>> {
    synth_classification_with_truth(n, d, noise, rng).map(|(data, _)| data)
}

pub fn synth_classification_with_truth<T: Scalar>(
    n: usize,
    d: usize,
    noise: f64,
    rng: &mut Rng,
) -> Result<(Dataset<T>, Vector<T>)> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("synthetic dataset needs n, d >= 1 (got {n}, {d})")));
    }
    if !(noise >= 0.0) {
        return Err(Error::InvalidParameter(format!("label noise must be >= 0, got {noise}")));
    }
    let allowed = ((0.1 * n as f64).ceil() as usize).max(1);
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..d).map(|_| rng.std_gauss()).collect();
        let mut features = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        let mut positives = 0usize;
        for _ in 0..n {
            let row: Vec<f64> = (0..d).map(|_| rng.std_gauss()).collect();
            let margin: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.gauss(0.0, noise);
            let y = if margin >= 0.0 { 1.0 } else { -1.0 };
            positives += (y > 0.0) as usize;
            features.extend(row.into_iter().map(T::of));
            labels.push(T::of(y));
        }
        if positives.abs_diff(n - positives) <= allowed {
            let truth = Vector::new(w.into_iter().map(T::of).collect())?;
            return Ok((Dataset::new(features, labels, n, d)?, truth));
        }
    }
    Err(Error::InvalidParameter("could not draw a balanced synthetic dataset".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use proptest::prelude::*;

    #[test]
    fn parse_single_row() {
        let d: Dataset<f64> = parse_libsvm_str("1 1:0.5 3:2\n").unwrap();
        assert_eq!((d.rows(), d.cols()), (1, 3));
        assert_eq!(d.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(d.labels(), &[1.0]);
    }

    #[test]
    fn parse_signed_labels() {
        let d: Dataset<f64> = parse_libsvm_str("-1 2:1\n+1 1:1\n").unwrap();
        assert_eq!((d.rows(), d.cols()), (2, 2));
        assert_eq!(d.labels(), &[-1.0, 1.0]);
        assert_eq!(d.row(0), &[0.0, 1.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_libsvm_str::<f64>("1 3:a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_libsvm_str::<f64>("1 1:1\n1 2:1 1:3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_libsvm_str::<f64>("1 1:1\n\nx 1:1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(matches!(parse_libsvm_str::<f64>(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_libsvm_str::<f64>("1 0:1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_libsvm_str::<f64>("1 1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn balance_already_balanced() {
        let d: Dataset<f64> = parse_libsvm_str("1 1:1\n-1 1:2\n1 1:3\n-1 1:4\n").unwrap();
        let b = balance_and_bias(&d, &mut Rng::new(0)).unwrap();
        assert_eq!((b.rows(), b.cols()), (4, 2));
        assert_eq!(b.row(2), &[3.0, 1.0]);
    }

    #[test]
    fn balance_subsamples_majority_in_order() {
        let d: Dataset<f64> = parse_libsvm_str("-1 1:1\n-1 1:2\n1 1:3\n-1 1:4\n1 1:5\n-1 1:6\n").unwrap();
        let b = balance_and_bias(&d, &mut Rng::new(4)).unwrap();
        assert_eq!(b.rows(), 4);
        let pos = b.labels().iter().filter(|&&y| y > 0.0).count();
        assert_eq!(pos, 2);
        let firsts: Vec<f64> = (0..4).map(|i| b.row(i)[0]).collect();
        assert!(firsts.windows(2).all(|w| w[0] < w[1]), "order not preserved: {firsts:?}");
        assert!((0..4).all(|i| b.row(i)[1] == 1.0));
        let again = balance_and_bias(&d, &mut Rng::new(4)).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn balance_rejects_single_class() {
        let d: Dataset<f64> = parse_libsvm_str("1 1:1\n1 1:2\n").unwrap();
        assert!(matches!(balance_and_bias(&d, &mut Rng::new(0)), Err(Error::InvalidDataset(_))));
    }

    /// Same class counts and width as the adult (a9a) training file.
    #[test]
    fn balance_a9a_shaped_counts() {
        let (neg, pos, d) = (24_720usize, 7_841usize, 123usize);
        let rows = neg + pos;
        let mut labels = vec![-1.0f64; neg];
        labels.extend(std::iter::repeat(1.0).take(pos));
        let data = Dataset::new(vec![0.0; rows * d], labels, rows, d).unwrap();
        let b = balance_and_bias(&data, &mut Rng::new(1)).unwrap();
        assert_eq!((b.rows(), b.cols()), (15_682, 124));
    }

    /// Set `ADAPTIX_A9A=/path/to/a9a` to check ingestion of the real file.
    #[test]
    #[ignore]
    fn a9a_end_to_end() {
        let path = std::env::var("ADAPTIX_A9A").expect("ADAPTIX_A9A not set");
        let file = std::io::BufReader::new(std::fs::File::open(path).unwrap());
        let d: Dataset<f64> = parse_libsvm(file).unwrap();
        let b = balance_and_bias(&d, &mut Rng::new(0)).unwrap();
        assert_eq!(b.rows(), 15_682);
        assert_eq!(b.cols(), 124);
    }

    #[test]
    fn synthetic_is_deterministic_and_separable() {
        let (a, w) = synth_classification_with_truth::<f64>(100, 5, 0.0, &mut Rng::new(10)).unwrap();
        let (b, _) = synth_classification_with_truth::<f64>(100, 5, 0.0, &mut Rng::new(10)).unwrap();
        assert_eq!(a, b);
        for i in 0..a.rows() {
            let margin: f64 = a.row(i).iter().zip(w.iter()).map(|(x, y)| x * y).sum();
            assert!(margin * a.labels()[i] >= 0.0);
        }
        let pos = a.labels().iter().filter(|&&y| y > 0.0).count();
        assert!(pos.abs_diff(100 - pos) <= 10);
    }

    #[test]
    fn split_partitions_rows() {
        let d = synth_classification::<f64>(50, 2, 0.1, &mut Rng::new(3)).unwrap();
        let (train, val) = d.split_indices(0.1, &mut Rng::new(9));
        assert_eq!(val.len(), 5);
        assert_eq!(train.len() + val.len(), 50);
        assert!(val.iter().all(|i| !train.contains(i)));
        assert_eq!(d.select(&val).rows(), 5);
    }

    proptest! {
        #[test]
        fn libsvm_round_trip(
            rows in 1usize..8,
            cols in 1usize..6,
            seed in any::<u64>(),
        ) {
            let mut rng = Rng::new(seed);
            let features: Vec<f64> = (0..rows * cols)
                .map(|_| if rng.next_f64() < 0.4 { 0.0 } else { rng.uniform(-100.0, 100.0) })
                .collect();
            let labels: Vec<f64> = (0..rows).map(|_| if rng.next_f64() < 0.5 { -1.0 } else { 1.0 }).collect();
            let d = Dataset::new(features, labels, rows, cols).unwrap();
            let text = write_libsvm(&d);
            let back: Dataset<f64> = parse_libsvm_str(&text).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
