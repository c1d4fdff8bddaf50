use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{DataError, Dataset, Result};
use crate::canon::short_hash;
use crate::graph::SparseGraph;
use crate::scalar::Scalar;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn fingerprint_inputs(parts: &[(&str, &[u8])]) -> String {
    let mut buf = Vec::new();
    for (tag, bytes) in parts {
        buf.extend_from_slice(tag.as_bytes());
        buf.push(0);
        buf.extend_from_slice(&(bytes.len() as u64).to_le_bytes());
        buf.extend_from_slice(bytes);
    }
    short_hash(&buf)
}

fn parse_finite(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// CSV with a header row; every column except `label_column` must be
/// numeric. Labels are encoded in order of first appearance.
pub fn load_tabular_csv<T: Scalar>(path: &Path, label_column: &str) -> Result<Dataset<T>> {
    let bytes = read(path)?;
    let csv_err = |e: csv::Error| DataError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes.as_slice());
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::MissingColumn {
            path: path.to_path_buf(),
            column: label_column.to_string(),
        })?;
    let d = header.len() - 1;
    let mut values: Vec<T> = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = row + 2;
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                let name = cell.trim();
                let id = match class_names.iter().position(|n| n == name) {
                    Some(id) => id,
                    None => {
                        class_names.push(name.to_string());
                        class_names.len() - 1
                    }
                };
                labels.push(id);
            } else {
                let v = parse_finite(cell).ok_or_else(|| DataError::NonNumeric {
                    path: path.to_path_buf(),
                    line,
                    column: header[c].clone(),
                    value: cell.to_string(),
                })?;
                values.push(T::of(v));
            }
        }
    }
    if class_names.len() < 2 {
        return Err(DataError::TooFewClasses(class_names.len()));
    }
    let n = labels.len();
    let features = Array2::from_shape_vec((n, d), values).expect("rectangular CSV");
    let mut tag = b"label_column=".to_vec();
    tag.extend_from_slice(label_column.as_bytes());
    let fp = fingerprint_inputs(&[("csv", &bytes), ("label_column", &tag)]);
    Dataset::new(Some(features), labels, class_names, None, fp)
}

/// Headerless numeric CSV, one sample per row.
fn parse_matrix<T: Scalar>(path: &Path, bytes: &[u8]) -> Result<Array2<T>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut values = Vec::new();
    let mut rows = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DataError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        for (c, cell) in record.iter().enumerate() {
            let v = parse_finite(cell).ok_or_else(|| DataError::NonNumeric {
                path: path.to_path_buf(),
                line: row + 1,
                column: c.to_string(),
                value: cell.to_string(),
            })?;
            values.push(T::of(v));
        }
        rows += 1;
    }
    let d = values.len().checked_div(rows).unwrap_or(0);
    Ok(Array2::from_shape_vec((rows, d), values).expect("rectangular matrix"))
}

/// One non-negative integer per non-blank line. Returns labels and `k`.
fn parse_labels(path: &Path, bytes: &[u8]) -> Result<(Vec<usize>, usize)> {
    let text = String::from_utf8_lossy(bytes);
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let y = line.parse::<usize>().map_err(|_| DataError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("`{line}` is not a non-negative integer label"),
        })?;
        labels.push(y);
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    Ok((labels, k))
}

fn numeric_class_names(k: usize) -> Vec<String> {
    (0..k).map(|c| c.to_string()).collect()
}

/// Feature matrix file plus separate labels file.
pub fn load_matrix<T: Scalar>(features_path: &Path, labels_path: &Path) -> Result<Dataset<T>> {
    let fbytes = read(features_path)?;
    let lbytes = read(labels_path)?;
    let x = parse_matrix(features_path, &fbytes)?;
    let (labels, k) = parse_labels(labels_path, &lbytes)?;
    if labels.len() != x.nrows() {
        return Err(DataError::LabelCount {
            labels: labels.len(),
            samples: x.nrows(),
        });
    }
    let fp = fingerprint_inputs(&[("features", &fbytes), ("labels", &lbytes)]);
    Dataset::new(Some(x), labels, numeric_class_names(k), None, fp)
}

/// Native graph from `src dst [weight]` lines (0-based ids, weight 1 by
/// default, `#` starts a comment). The node count is the number of labels.
pub fn load_edge_list<T: Scalar>(
    edges_path: &Path,
    features_path: Option<&Path>,
    labels_path: &Path,
) -> Result<Dataset<T>> {
    let ebytes = read(edges_path)?;
    let lbytes = read(labels_path)?;
    let (labels, k) = parse_labels(labels_path, &lbytes)?;
    let n = labels.len();
    let text = String::from_utf8_lossy(&ebytes);
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| DataError::Parse {
            path: edges_path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(parse_err(format!("expected `src dst [weight]`, got `{line}`")));
        }
        let id = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(format!("`{s}` is not a node id")))
        };
        let (src, dst) = (id(fields[0])?, id(fields[1])?);
        let weight = match fields.get(2) {
            Some(w) => w
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(format!("`{w}` is not a weight")))?,
            None => 1.0,
        };
        for node in [src, dst] {
            if node >= n {
                return Err(DataError::NodeOutOfRange { node, n });
            }
        }
        if weight < 0.0 {
            return Err(DataError::NegativeWeight { src, dst, weight });
        }
        if weight == 0.0 {
            // A zero-weight edge carries no similarity; treat as absent.
            continue;
        }
        edges.push((src, dst, T::of(weight)));
    }
    let graph = SparseGraph::from_undirected_edges(n, edges).map_err(|e| DataError::Spec(e.to_string()))?;
    let mut parts: Vec<(&str, &[u8])> = vec![("edges", &ebytes), ("labels", &lbytes)];
    let fbytes;
    let features = match features_path {
        Some(p) => {
            fbytes = read(p)?;
            parts.push(("features", &fbytes));
            let x = parse_matrix(p, &fbytes)?;
            if x.nrows() != n {
                return Err(DataError::LabelCount {
                    labels: n,
                    samples: x.nrows(),
                });
            }
            Some(x)
        }
        None => None,
    };
    let fp = fingerprint_inputs(&parts);
    Dataset::new(features, labels, numeric_class_names(k), Some(graph), fp)
}
