//! Golden-dump format for encoded observations: a row-major little-endian
//! `f32` binary (channel 0 then channel 1) plus a JSON sidecar describing
//! the grid and the parameters it was produced with. Bit-exact across runs
//! when sensor noise is disabled.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IntentParams, PstoError, PstoTensor};

/// Sidecar metadata stored next to the binary payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpMeta {
    pub v_d: usize,
    pub h_d: usize,
    pub r_max: f64,
    pub params: IntentParams,
}

/// Write `tensor` as `<bin_path>` plus `<json_path>`.
pub fn write_dump(
    tensor: &PstoTensor,
    meta: &DumpMeta,
    bin_path: impl AsRef<Path>,
    json_path: impl AsRef<Path>,
) -> Result<(), PstoError> {
    std::fs::write(bin_path, tensor.to_f32_bytes())?;
    std::fs::write(json_path, serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

/// Read a dump pair back. The sidecar dictates the expected shape.
pub fn read_dump(
    bin_path: impl AsRef<Path>,
    json_path: impl AsRef<Path>,
) -> Result<(PstoTensor, DumpMeta), PstoError> {
    let meta: DumpMeta = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
    let bytes = std::fs::read(bin_path)?;
    let tensor = PstoTensor::from_f32_bytes(meta.v_d, meta.h_d, &bytes)?;
    Ok((tensor, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psto::Grid;

    #[test]
    fn dump_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("golden.bin");
        let json = dir.path().join("golden.json");

        let mut lidar = Grid::zeros(6, 120);
        let mut intent = Grid::zeros(6, 120);
        lidar.set(0, 0, 9.5);
        lidar.set(5, 119, 0.125);
        intent.set(2, 60, 0.45);
        intent.set(3, 61, -0.3);
        let tensor = PstoTensor { lidar, intent };
        let meta = DumpMeta {
            v_d: 6,
            h_d: 120,
            r_max: 10.0,
            params: IntentParams::default(),
        };

        write_dump(&tensor, &meta, &bin, &json).unwrap();
        let (back, back_meta) = read_dump(&bin, &json).unwrap();
        assert_eq!(back_meta, meta);
        assert_eq!(back.to_f32_bytes(), tensor.to_f32_bytes());

        // Second write produces identical bytes.
        let first = std::fs::read(&bin).unwrap();
        write_dump(&tensor, &meta, &bin, &json).unwrap();
        assert_eq!(std::fs::read(&bin).unwrap(), first);
    }

    #[test]
    fn read_rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("bad.bin");
        let json = dir.path().join("bad.json");
        let meta = DumpMeta {
            v_d: 6,
            h_d: 120,
            r_max: 10.0,
            params: IntentParams::default(),
        };
        std::fs::write(&bin, [0u8; 16]).unwrap();
        std::fs::write(&json, serde_json::to_string(&meta).unwrap()).unwrap();
        assert!(matches!(
            read_dump(&bin, &json),
            Err(PstoError::DumpLength { .. })
        ));
    }
}
