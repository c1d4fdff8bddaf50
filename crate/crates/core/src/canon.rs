//! Canonical byte serialization and short content hashes.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Serializes `value` to compact JSON with object keys sorted at every level.
///
/// Integers print in decimal and floats in shortest round-trip form, so two
/// logically equal values always produce the same bytes.
pub fn to_canonical_bytes<S: Serialize + ?Sized>(value: &S) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("config types serialize to JSON");
    let mut out = Vec::new();
    write_value(&v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut Vec<u8>) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push(b'{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                serde_json::to_writer(&mut *out, k).expect("string key");
                out.push(b':');
                write_value(&map[k.as_str()], out);
            }
            out.push(b'}');
        }
        Value::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_value(item, out);
            }
            out.push(b']');
        }
        leaf => serde_json::to_writer(&mut *out, leaf).expect("json leaf"),
    }
}

/// First 16 lowercase hex characters of SHA-256 over `bytes`.
pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..8])
}
