//! Binary graph cache.
//!
//! Layout (little-endian): magic `MSSCGRPH`, version `u32 = 1`, `n: u64`,
//! `nnz: u64`, `row_offsets: (n+1) × u64`, `col_indices: nnz × u32`,
//! `weights: nnz × f64`.

use std::fs;
use std::path::Path;

use super::{GraphError, GraphSpec, Result, SparseGraph};
use crate::canon::{short_hash, to_canonical_bytes};
use crate::scalar::Scalar;

pub const CACHE_MAGIC: &[u8; 8] = b"MSSCGRPH";
pub const CACHE_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 8;

/// SHA-256/16-hex over the dataset fingerprint followed by the canonical
/// graph spec bytes.
pub fn graph_cache_key(dataset_fingerprint: &str, spec: &GraphSpec) -> String {
    let mut bytes = dataset_fingerprint.as_bytes().to_vec();
    bytes.extend(to_canonical_bytes(spec));
    short_hash(&bytes)
}

pub fn encode_graph<T: Scalar>(g: &SparseGraph<T>) -> Vec<u8> {
    let n = g.n();
    let nnz = g.nnz();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (n + 1) + 12 * nnz);
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(nnz as u64).to_le_bytes());
    for &o in g.row_offsets() {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for &c in g.col_indices() {
        let c = u32::try_from(c).expect("node ids fit in u32");
        out.extend_from_slice(&c.to_le_bytes());
    }
    for &w in g.weights() {
        out.extend_from_slice(&w.as_f64().to_le_bytes());
    }
    out
}

/// Writes `g` to `path` via a temporary file and rename, so readers never
/// observe a partial file.
pub fn save_graph<T: Scalar>(g: &SparseGraph<T>, path: &Path) -> Result<()> {
    let io = |source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, encode_graph(g)).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn load_graph<T: Scalar>(path: &Path) -> Result<SparseGraph<T>> {
    let bytes = fs::read(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_graph(&bytes).map_err(|reason| GraphError::Corrupt {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn decode_graph<T: Scalar>(bytes: &[u8]) -> std::result::Result<SparseGraph<T>, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("file is {} bytes, shorter than the header", bytes.len()));
    }
    if &bytes[..8] != CACHE_MAGIC {
        return Err("bad magic".into());
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CACHE_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let n = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let nnz = u64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes"));
    let expected = (n as u128 + 1) * 8 + nnz as u128 * 12 + HEADER_LEN as u128;
    if bytes.len() as u128 != expected {
        return Err(format!(
            "length mismatch: {} bytes, header implies {expected}",
            bytes.len()
        ));
    }
    let (n, nnz) = (n as usize, nnz as usize);
    let mut pos = HEADER_LEN;
    let mut take = |len: usize| {
        let s = &bytes[pos..pos + len];
        pos += len;
        s
    };
    let row_offsets = take(8 * (n + 1))
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")) as usize)
        .collect();
    let col_indices = take(4 * nnz)
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")) as usize)
        .collect();
    let weights = take(8 * nnz)
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect();
    SparseGraph::from_csr(n, row_offsets, col_indices, weights).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Builder;

    fn sample() -> SparseGraph<f64> {
        SparseGraph::from_undirected_edges(4, vec![(0, 1, 0.25), (1, 2, 1.5), (3, 0, 1e-300)]).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        let g = sample();
        save_graph(&g, &path).unwrap();
        let back: SparseGraph<f64> = load_graph(&path).unwrap();
        assert_eq!(back, g);
        assert_eq!(fs::read(&path).unwrap(), encode_graph(&back));
    }

    #[test]
    fn header_layout() {
        let bytes = encode_graph(&sample());
        assert_eq!(&bytes[..8], b"MSSCGRPH");
        assert_eq!(&bytes[8..12], &1u32.to_le_bytes());
        assert_eq!(&bytes[12..20], &4u64.to_le_bytes());
        assert_eq!(&bytes[20..28], &6u64.to_le_bytes());
        assert_eq!(bytes.len(), 28 + 5 * 8 + 6 * 12);
    }

    #[test]
    fn truncated_and_tampered_files_are_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        let bytes = encode_graph(&sample());
        for cut in [0, 5, 27, bytes.len() - 1] {
            fs::write(&path, &bytes[..cut]).unwrap();
            assert!(matches!(load_graph::<f64>(&path), Err(GraphError::Corrupt { .. })));
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        fs::write(&path, &bad).unwrap();
        assert!(matches!(load_graph::<f64>(&path), Err(GraphError::Corrupt { .. })));
        let mut bad = bytes.clone();
        bad[8] = 2;
        fs::write(&path, &bad).unwrap();
        assert!(matches!(load_graph::<f64>(&path), Err(GraphError::Corrupt { .. })));
    }

    #[test]
    fn cache_key_tracks_spec() {
        let spec = GraphSpec::default();
        let a = graph_cache_key("0123456789abcdef", &spec);
        assert_eq!(a.len(), 16);
        assert!(a.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
        let b = graph_cache_key("0123456789abcdef", &GraphSpec { k: 11, ..spec.clone() });
        assert_ne!(a, b);
        let c = graph_cache_key("0123456789abcdee", &spec);
        assert_ne!(a, c);
        let d = graph_cache_key(
            "0123456789abcdef",
            &GraphSpec {
                builder: Builder::Epsilon,
                ..spec
            },
        );
        assert_ne!(a, d);
    }
}
