//! Binary shard files: `FLDG`, u16 version, u32 record count, then packed
//! records of 486 f32 features, an f32 label (km) and a u32 spec index, all
//! little-endian.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::records::WINDOW_LEN;

pub const SHARD_MAGIC: [u8; 4] = *b"FLDG";
pub const SHARD_VERSION: u16 = 1;
/// Records per shard file.
pub const SHARD_SIZE: usize = 4096;

const RECORD_BYTES: usize = 4 * WINDOW_LEN + 8;

/// One stored window with its label and generating-spec index.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardRecord {
    /// Row-major 81x6 window in physical units.
    pub features: Vec<f32>,
    pub label_km: f32,
    pub spec_index: u32,
}

pub fn write_shard(mut w: impl Write, records: &[ShardRecord]) -> Result<()> {
    let count = u32::try_from(records.len())
        .map_err(|_| Error::Format(format!("too many records: {}", records.len())))?;
    let mut buf = Vec::with_capacity(10 + records.len() * RECORD_BYTES);
    buf.extend_from_slice(&SHARD_MAGIC);
    buf.extend_from_slice(&SHARD_VERSION.to_le_bytes());
    buf.extend_from_slice(&count.to_le_bytes());
    for r in records {
        if r.features.len() != WINDOW_LEN {
            return Err(Error::Dimension(format!(
                "shard record has {} features, expected {WINDOW_LEN}",
                r.features.len()
            )));
        }
        for x in &r.features {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        buf.extend_from_slice(&r.label_km.to_le_bytes());
        buf.extend_from_slice(&r.spec_index.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_shard(mut r: impl Read) -> Result<Vec<ShardRecord>> {
    let mut head = [0u8; 10];
    r.read_exact(&mut head)
        .map_err(|e| Error::Format(format!("shard header: {e}")))?;
    if head[..4] != SHARD_MAGIC {
        return Err(Error::Format("not a shard file (bad magic)".into()));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != SHARD_VERSION {
        return Err(Error::Format(format!(
            "unsupported shard version {version}"
        )));
    }
    let count = u32::from_le_bytes([head[6], head[7], head[8], head[9]]) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != count * RECORD_BYTES {
        return Err(Error::Format(format!(
            "shard body has {} bytes, header promises {count} records ({} bytes)",
            body.len(),
            count * RECORD_BYTES
        )));
    }
    let f32_at = |b: &[u8], k: usize| f32::from_le_bytes([b[k], b[k + 1], b[k + 2], b[k + 3]]);
    Ok(body
        .chunks_exact(RECORD_BYTES)
        .map(|rec| {
            let features = (0..WINDOW_LEN).map(|k| f32_at(rec, 4 * k)).collect();
            let tail = 4 * WINDOW_LEN;
            ShardRecord {
                features,
                label_km: f32_at(rec, tail),
                spec_index: u32::from_le_bytes([
                    rec[tail + 4],
                    rec[tail + 5],
                    rec[tail + 6],
                    rec[tail + 7],
                ]),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let recs: Vec<ShardRecord> = (0..3)
            .map(|k| ShardRecord {
                features: (0..WINDOW_LEN)
                    .map(|j| (j as f32 * 0.37 - k as f32).sin() * 1e5)
                    .collect(),
                label_km: 12.5 + k as f32,
                spec_index: 1000 + k,
            })
            .collect();
        let mut buf = Vec::new();
        write_shard(&mut buf, &recs).unwrap();
        let back = read_shard(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in recs.iter().zip(&back) {
            assert!(a
                .features
                .iter()
                .zip(&b.features)
                .all(|(x, y)| x.to_bits() == y.to_bits()));
            assert_eq!(a.spec_index, b.spec_index);
        }
        buf.truncate(buf.len() - 1);
        assert!(read_shard(buf.as_slice()).is_err());
    }
}
