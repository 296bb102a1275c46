//! The dataset type passed between every module: a feature matrix plus a
//! crash-count vector, optionally carrying the true Poisson means of
//! simulated data and a per-row synthetic flag.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    /// Row-major, `rows x feature_names.len()`.
    pub features: Vec<Vec<f64>>,
    /// Observed crash counts, one per row.
    pub counts: Vec<u32>,
    /// True Poisson means, present only for simulated data.
    pub true_means: Option<Vec<f64>>,
    /// True when the row was produced by a generator rather than observed.
    pub synthetic: Vec<bool>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, features: Vec<Vec<f64>>, counts: Vec<u32>) -> Result<Self> {
        let fs = feature_names.len();
        for (i, row) in features.iter().enumerate() {
            if row.len() != fs {
                return Err(Error::DimensionMismatch {
                    location: format!("feature row {i}"),
                    expected: fs,
                    got: row.len(),
                });
            }
        }
        if counts.len() != features.len() {
            return Err(Error::DimensionMismatch {
                location: "counts".into(),
                expected: features.len(),
                got: counts.len(),
            });
        }
        let n = features.len();
        Ok(Dataset {
            feature_names,
            features,
            counts,
            true_means: None,
            synthetic: vec![false; n],
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Number of features (FS).
    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    /// Values of one feature column.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.features.iter().map(|row| row[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Appends the rows of `other`. Feature names must agree. True means are
    /// kept only when both sides carry them.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if other.feature_names != self.feature_names {
            return Err(Error::InvalidParameter(format!(
                "cannot concatenate datasets with different features: {:?} vs {:?}",
                self.feature_names, other.feature_names
            )));
        }
        let mut out = self.clone();
        out.features.extend(other.features.iter().cloned());
        out.counts.extend(other.counts.iter().copied());
        out.synthetic.extend(other.synthetic.iter().copied());
        out.true_means = match (&self.true_means, &other.true_means) {
            (Some(a), Some(b)) => {
                let mut v = a.clone();
                v.extend(b.iter().copied());
                Some(v)
            }
            _ => None,
        };
        Ok(out)
    }

    /// Row subset by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            counts: indices.iter().map(|&i| self.counts[i]).collect(),
            true_means: self
                .true_means
                .as_ref()
                .map(|m| indices.iter().map(|&i| m[i]).collect()),
            synthetic: indices.iter().map(|&i| self.synthetic[i]).collect(),
        }
    }

    /// Serializes to CSV: `name1,...,nameFS,count[,lambda][,synthetic]`.
    ///
    /// The `lambda` column is written only when true means are present; the
    /// `synthetic` column only when some row is flagged. Floats use the
    /// shortest representation that round-trips exactly, `.` decimal
    /// separator, no thousands separators.
    pub fn to_csv(&self) -> String {
        let with_lambda = self.true_means.is_some();
        let with_flag = self.synthetic.iter().any(|&s| s);
        let mut out = String::new();
        for name in &self.feature_names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str("count");
        if with_lambda {
            out.push_str(",lambda");
        }
        if with_flag {
            out.push_str(",synthetic");
        }
        out.push('\n');
        for i in 0..self.len() {
            for v in &self.features[i] {
                let _ = write!(out, "{v},");
            }
            let _ = write!(out, "{}", self.counts[i]);
            if with_lambda {
                let _ = write!(out, ",{}", self.true_means.as_ref().unwrap()[i]);
            }
            if with_flag {
                let _ = write!(out, ",{}", u8::from(self.synthetic[i]));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form written by [`Dataset::to_csv`]. Every column
    /// before `count` is a feature; `lambda` and `synthetic` are optional.
    pub fn from_csv(text: &str) -> Result<Dataset> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::EmptyInput("csv has no header".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let count_idx = cols.iter().position(|c| *c == "count").ok_or(Error::Parse {
            line: 1,
            message: "missing `count` column".into(),
        })?;
        let lambda_idx = cols.iter().position(|c| *c == "lambda");
        let flag_idx = cols.iter().position(|c| *c == "synthetic");
        let feature_names: Vec<String> = cols[..count_idx].iter().map(|s| s.to_string()).collect();

        let mut features = Vec::new();
        let mut counts = Vec::new();
        let mut lambdas = Vec::new();
        let mut flags = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {} fields, found {}", cols.len(), fields.len()),
                });
            }
            let parse_f = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("not a number: {s:?}"),
                })
            };
            let row: Vec<f64> = fields[..count_idx]
                .iter()
                .map(|s| parse_f(s))
                .collect::<Result<_>>()?;
            let count: u32 = fields[count_idx].parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("not a count: {:?}", fields[count_idx]),
            })?;
            features.push(row);
            counts.push(count);
            if let Some(li) = lambda_idx {
                lambdas.push(parse_f(fields[li])?);
            }
            if let Some(fi) = flag_idx {
                flags.push(fields[fi] == "1" || fields[fi] == "true");
            }
        }
        let n = features.len();
        let mut ds = Dataset::new(feature_names, features, counts)?;
        if lambda_idx.is_some() {
            ds.true_means = Some(lambdas);
        }
        if flag_idx.is_some() {
            ds.synthetic = flags;
        } else {
            ds.synthetic = vec![false; n];
        }
        Ok(ds)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(path)?;
        Dataset::from_csv(&text)
    }
}
