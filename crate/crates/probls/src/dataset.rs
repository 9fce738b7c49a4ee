//! Labeled datasets for the classification objectives: CSV ingestion,
//! seeded mixture-of-Gaussians synthesis, and feature standardization.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Dense labeled dataset: an `M x D` feature matrix (row-major) and integer
/// class labels in `[0, num_classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    num_features: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn from_parts(
        features: Vec<f64>,
        labels: Vec<usize>,
        num_features: usize,
    ) -> Result<Self, DataError> {
        if labels.is_empty() {
            return Err(DataError::Invalid("dataset must contain at least one row".into()));
        }
        if features.len() != labels.len() * num_features {
            return Err(DataError::Invalid(format!(
                "feature matrix has {} entries, expected {} x {}",
                features.len(),
                labels.len(),
                num_features
            )));
        }
        let num_classes = labels.iter().copied().max().unwrap_or(0) + 1;
        Ok(Self { features, labels, num_features, num_classes })
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.num_features..(i + 1) * self.num_features]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Splits off the first `n` rows; the remainder becomes the second part.
    pub fn split_at(&self, n: usize) -> (Dataset, Dataset) {
        assert!(n > 0 && n < self.rows(), "split point must be interior");
        let d = self.num_features;
        let head = Dataset {
            features: self.features[..n * d].to_vec(),
            labels: self.labels[..n].to_vec(),
            num_features: d,
            num_classes: self.num_classes,
        };
        let tail = Dataset {
            features: self.features[n * d..].to_vec(),
            labels: self.labels[n..].to_vec(),
            num_features: d,
            num_classes: self.num_classes,
        };
        (head, tail)
    }

    /// Returns a copy with each feature shifted to zero mean and scaled to
    /// unit variance, together with the applied parameters. Constant
    /// features keep their value and get scale 1.
    pub fn standardized(&self) -> (Dataset, Standardization) {
        let d = self.num_features;
        let m = self.rows() as f64;
        let mut mean = vec![0.0; d];
        let mut var = vec![0.0; d];
        for i in 0..self.rows() {
            for (j, &x) in self.feature_row(i).iter().enumerate() {
                mean[j] += x;
            }
        }
        for mj in mean.iter_mut() {
            *mj /= m;
        }
        for i in 0..self.rows() {
            for (j, &x) in self.feature_row(i).iter().enumerate() {
                var[j] += (x - mean[j]) * (x - mean[j]);
            }
        }
        let std: Vec<f64> =
            var.iter().map(|&v| if v > 0.0 { (v / m).sqrt() } else { 1.0 }).collect();
        let mut features = self.features.clone();
        for i in 0..self.rows() {
            for j in 0..d {
                features[i * d + j] = (features[i * d + j] - mean[j]) / std[j];
            }
        }
        let out = Dataset {
            features,
            labels: self.labels.clone(),
            num_features: d,
            num_classes: self.num_classes,
        };
        (out, Standardization { mean, std })
    }
}

/// Per-feature shift/scale recorded when standardizing.
#[derive(Debug, Clone)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Reads rows of the form `label,feat1,...,featD`. The feature count is
/// taken from the first row and enforced on all others.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut num_features: Option<usize> = None;
    let mut line_no = 0usize;
    for line in reader.lines() {
        line_no += 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label_field = fields.next().unwrap_or("");
        let label: usize = label_field.trim().parse().map_err(|_| DataError::Parse {
            line: line_no,
            msg: format!("label {label_field:?} is not a nonnegative integer"),
        })?;
        let mut row = Vec::new();
        for field in fields {
            let v: f64 = field.trim().parse().map_err(|_| DataError::Parse {
                line: line_no,
                msg: format!("feature {field:?} is not numeric"),
            })?;
            row.push(v);
        }
        match num_features {
            None => {
                if row.is_empty() {
                    return Err(DataError::Parse {
                        line: line_no,
                        msg: "row has no feature columns".into(),
                    });
                }
                num_features = Some(row.len());
            }
            Some(d) if d != row.len() => {
                return Err(DataError::Parse {
                    line: line_no,
                    msg: format!("row has {} features, expected {d}", row.len()),
                });
            }
            Some(_) => {}
        }
        labels.push(label);
        features.extend_from_slice(&row);
    }
    let num_features = num_features
        .ok_or_else(|| DataError::Parse { line: 0, msg: "file contains no data rows".into() })?;
    Dataset::from_parts(features, labels, num_features)
}

/// Writes the dataset in the same `label,feat...` layout, with shortest
/// round-trip float formatting.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut out = String::new();
    for i in 0..dataset.rows() {
        out.push_str(&dataset.label(i).to_string());
        for &x in dataset.feature_row(i) {
            out.push(',');
            out.push_str(&format!("{x}"));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Mixture-of-Gaussians classification data, deterministic in `seed`.
///
/// Class means sit at `separation` times a seeded unit direction; features
/// add unit-variance isotropic noise. `separation = 0` makes all classes
/// identically distributed.
pub fn gen_synth(
    num_classes: usize,
    rows: usize,
    dims: usize,
    separation: f64,
    seed: u64,
) -> Dataset {
    assert!(num_classes >= 1 && rows >= 1 && dims >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = vec![0.0; num_classes * dims];
    for c in 0..num_classes {
        let dir: Vec<f64> = (0..dims).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        for j in 0..dims {
            means[c * dims + j] = separation * dir[j] / norm;
        }
    }
    let mut features = Vec::with_capacity(rows * dims);
    let mut labels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let c = rng.gen_range(0..num_classes);
        labels.push(c);
        for j in 0..dims {
            let noise: f64 = rng.sample(StandardNormal);
            features.push(means[c * dims + j] + noise);
        }
    }
    Dataset { features, labels, num_features: dims, num_classes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_rows() {
        let dir = std::env::temp_dir().join("probls_csv_parse");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("two_rows.csv");
        std::fs::write(&path, "1,0.5,0.25\n0,-1,2\n").unwrap();
        let ds = load_csv(&path).unwrap();
        assert_eq!(ds.rows(), 2);
        assert_eq!(ds.num_features(), 2);
        assert_eq!(ds.label(0), 1);
        assert_eq!(ds.feature_row(1), &[-1.0, 2.0]);
    }

    #[test]
    fn ragged_row_names_the_line() {
        let dir = std::env::temp_dir().join("probls_csv_ragged");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ragged.csv");
        std::fs::write(&path, "1,0.5,0.25\n0,-1\n").unwrap();
        match load_csv(&path) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_empty_inputs_fail() {
        let dir = std::env::temp_dir().join("probls_csv_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let bad = dir.join("bad.csv");
        std::fs::write(&bad, "1,abc\n").unwrap();
        assert!(matches!(load_csv(&bad), Err(DataError::Parse { line: 1, .. })));
        let empty = dir.join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(matches!(load_csv(&empty), Err(DataError::Parse { .. })));
    }

    #[test]
    fn synth_is_deterministic_in_seed() {
        let a = gen_synth(3, 50, 4, 2.0, 7);
        let b = gen_synth(3, 50, 4, 2.0, 7);
        assert_eq!(a, b);
        let c = gen_synth(3, 50, 4, 2.0, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_separation_centers_all_classes() {
        let ds = gen_synth(2, 400, 3, 0.0, 3);
        // all rows are N(0, I) draws regardless of label
        let mean: f64 = ds.features.iter().sum::<f64>() / ds.features.len() as f64;
        assert!(mean.abs() < 0.2, "grand mean {mean}");
    }

    #[test]
    fn standardization_centers_and_scales() {
        let ds = gen_synth(2, 500, 3, 2.0, 11);
        let (std_ds, params) = ds.standardized();
        for j in 0..3 {
            let col_mean: f64 =
                (0..std_ds.rows()).map(|i| std_ds.feature_row(i)[j]).sum::<f64>() / 500.0;
            assert!(col_mean.abs() < 1e-10);
            assert!(params.std[j] > 0.0);
        }
    }
}
