//! Bit-exact binary persistence for solver states and force tables.
//!
//! Layout shared by checkpoints (`SLVC1`), final-state snapshots (`SLVF1`)
//! and force tables (`SLVT1`): a magic line, a UTF-8 header of `key = value`
//! lines terminated by a blank line, then little-endian 64-bit floats.
//! State payloads hold all `u` coefficients then all `v` coefficients in
//! canonical mode order (component-major; per canonical mode the cosine
//! then sine coefficient; canonical modes enumerate the `[-m, m]^d` box
//! row-major keeping wavevectors whose first nonzero component is
//! positive). Floats in the header are printed with the shortest
//! representation that parses back to the same bits.

use crate::constitutive::{ConstitutiveParams, Regularisation};
use crate::solver::{ForceTable, SolverState};
use crate::spectral::{SpectralConfig, SpectralField};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use thiserror::Error;

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"SLVC1\n";
pub const SNAPSHOT_MAGIC: &[u8; 6] = b"SLVF1\n";
pub const FORCE_TABLE_MAGIC: &[u8; 6] = b"SLVT1\n";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected a SLVC1/SLVF1/SLVT1 stream")]
    BadMagic,
    #[error("header key {0} missing")]
    MissingKey(&'static str),
    #[error("header value for {key} unparsable: {value}")]
    BadValue { key: &'static str, value: String },
    #[error("payload truncated")]
    Truncated,
    #[error("inconsistent header: {0}")]
    Inconsistent(String),
}

fn write_header(w: &mut dyn Write, entries: &[(&str, String)]) -> std::io::Result<()> {
    for (k, v) in entries {
        writeln!(w, "{} = {}", k, v)?;
    }
    writeln!(w)?;
    Ok(())
}

fn state_header(state: &SolverState) -> Vec<(&'static str, String)> {
    let config = state.config();
    let shape: Vec<String> = config.grid_shape().iter().map(|n| n.to_string()).collect();
    vec![
        ("dim", config.dim().to_string()),
        ("m", config.degree().to_string()),
        ("grid_shape", shape.join(" ")),
        ("a", format!("{}", state.params.a)),
        ("alpha", format!("{}", state.params.alpha)),
        ("n", state.params.n.to_string()),
        ("t", format!("{}", state.t)),
        ("step_index", state.step_index.to_string()),
    ]
}

fn write_floats(w: &mut dyn Write, values: &[f64]) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

fn write_state(w: &mut dyn Write, state: &SolverState, magic: &[u8; 6]) -> std::io::Result<()> {
    w.write_all(magic)?;
    write_header(w, &state_header(state))?;
    write_floats(w, state.u.coeffs())?;
    write_floats(w, state.v.coeffs())
}

pub fn write_checkpoint(w: &mut dyn Write, state: &SolverState) -> std::io::Result<()> {
    write_state(w, state, CHECKPOINT_MAGIC)
}

pub fn write_snapshot(w: &mut dyn Write, state: &SolverState) -> std::io::Result<()> {
    write_state(w, state, SNAPSHOT_MAGIC)
}

struct Header {
    map: BTreeMap<String, String>,
}

impl Header {
    fn get(&self, key: &'static str) -> Result<&str, CheckpointError> {
        self.map.get(key).map(|s| s.as_str()).ok_or(CheckpointError::MissingKey(key))
    }

    fn parse<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, CheckpointError> {
        let raw = self.get(key)?;
        raw.parse().map_err(|_| CheckpointError::BadValue { key, value: raw.to_string() })
    }

    fn parse_n(&self) -> Result<Regularisation, CheckpointError> {
        let raw = self.get("n")?;
        if raw == "inf" || raw == "infinity" {
            Ok(Regularisation::Unregularised)
        } else {
            raw.parse::<u32>()
                .map(Regularisation::Finite)
                .map_err(|_| CheckpointError::BadValue { key: "n", value: raw.to_string() })
        }
    }
}

fn read_magic(r: &mut dyn Read) -> Result<[u8; 6], CheckpointError> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic).map_err(|_| CheckpointError::BadMagic)?;
    Ok(magic)
}

fn read_header(r: &mut dyn Read) -> Result<Header, CheckpointError> {
    // read byte-wise lines until the blank separator; payload follows
    let mut map = BTreeMap::new();
    loop {
        let mut line = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            r.read_exact(&mut byte).map_err(|_| CheckpointError::Truncated)?;
            if byte[0] == b'\n' {
                break;
            }
            line.push(byte[0]);
        }
        if line.is_empty() {
            break;
        }
        let text = String::from_utf8(line)
            .map_err(|e| CheckpointError::Inconsistent(format!("non-utf8 header: {e}")))?;
        if let Some((k, v)) = text.split_once('=') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            return Err(CheckpointError::Inconsistent(format!("not a key = value line: {text}")));
        }
    }
    Ok(Header { map })
}

fn read_floats(r: &mut dyn Read, count: usize) -> Result<Vec<f64>, CheckpointError> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf).map_err(|_| CheckpointError::Truncated)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn config_from_header(header: &Header) -> Result<SpectralConfig, CheckpointError> {
    let dim: usize = header.parse("dim")?;
    let m: usize = header.parse("m")?;
    let raw_shape = header.get("grid_shape")?;
    let shape: Vec<usize> = raw_shape
        .split_whitespace()
        .map(|tok| tok.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CheckpointError::BadValue { key: "grid_shape", value: raw_shape.to_string() })?;
    SpectralConfig::new(dim, m, &shape).map_err(|e| CheckpointError::Inconsistent(e.to_string()))
}

/// Reads a checkpoint or snapshot stream back into a state.
pub fn read_state(r: &mut dyn Read) -> Result<SolverState, CheckpointError> {
    let magic = read_magic(r)?;
    if &magic != CHECKPOINT_MAGIC && &magic != SNAPSHOT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let header = read_header(r)?;
    let config = config_from_header(&header)?;
    let params = ConstitutiveParams::new(header.parse("a")?, header.parse("alpha")?, header.parse_n()?)
        .map_err(|e| CheckpointError::Inconsistent(e.to_string()))?;
    let t: f64 = header.parse("t")?;
    let step_index: u64 = header.parse("step_index")?;
    let len = config.coeff_len();
    let mut u = SpectralField::zeros(config);
    u.coeffs_mut().copy_from_slice(&read_floats(r, len)?);
    let mut v = SpectralField::zeros(config);
    v.coeffs_mut().copy_from_slice(&read_floats(r, len)?);
    let mut state = SolverState::new(u, v, params);
    state.t = t;
    state.step_index = step_index;
    Ok(state)
}

/// Writes a force table: the state header fields describing the space, a
/// `count`, then the times and the per-time coefficient blocks.
pub fn write_force_table(w: &mut dyn Write, table: &ForceTable) -> std::io::Result<()> {
    let config = table.fields()[0].config();
    w.write_all(FORCE_TABLE_MAGIC)?;
    let shape: Vec<String> = config.grid_shape().iter().map(|n| n.to_string()).collect();
    write_header(
        w,
        &[
            ("dim", config.dim().to_string()),
            ("m", config.degree().to_string()),
            ("grid_shape", shape.join(" ")),
            ("count", table.times().len().to_string()),
        ],
    )?;
    write_floats(w, table.times())?;
    for f in table.fields() {
        write_floats(w, f.coeffs())?;
    }
    Ok(())
}

pub fn read_force_table(r: &mut dyn Read) -> Result<ForceTable, CheckpointError> {
    let magic = read_magic(r)?;
    if &magic != FORCE_TABLE_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let header = read_header(r)?;
    let config = config_from_header(&header)?;
    let count: usize = header.parse("count")?;
    if count == 0 {
        return Err(CheckpointError::Inconsistent("empty force table".into()));
    }
    let times = read_floats(r, count)?;
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let mut f = SpectralField::zeros(config);
        f.coeffs_mut().copy_from_slice(&read_floats(r, config.coeff_len())?);
        fields.push(f);
    }
    Ok(ForceTable::new(times, fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(seed: u64) -> SolverState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = SpectralConfig::with_default_grid(2, 3).unwrap();
        let mut u = SpectralField::zeros(config);
        let mut v = SpectralField::zeros(config);
        for c in u.coeffs_mut().iter_mut().chain(v.coeffs_mut().iter_mut()) {
            *c = rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-8..2));
        }
        let params = ConstitutiveParams::regularised(1.25, 0.75, 16).unwrap();
        let mut s = SolverState::new(u, v, params);
        s.t = 0.1 + 0.2; // deliberately not representable exactly in decimal
        s.step_index = 12345;
        s
    }

    #[test]
    fn checkpoint_roundtrip_is_bitwise_exact() {
        let state = random_state(41);
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &state).unwrap();
        assert_eq!(&bytes[..6], CHECKPOINT_MAGIC);
        let back = read_state(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.t.to_bits(), state.t.to_bits());
        assert_eq!(back.step_index, state.step_index);
        assert_eq!(back.params, state.params);
        for (a, b) in back.u.coeffs().iter().zip(state.u.coeffs()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in back.v.coeffs().iter().zip(state.v.coeffs()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // and the rewritten stream is byte-identical
        let mut again = Vec::new();
        write_checkpoint(&mut again, &back).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn snapshot_uses_its_own_magic() {
        let state = random_state(42);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &state).unwrap();
        assert_eq!(&bytes[..6], SNAPSHOT_MAGIC);
        assert!(read_state(&mut bytes.as_slice()).is_ok());
    }

    #[test]
    fn rejects_foreign_streams() {
        let mut bytes = b"SLVX1\nrest".to_vec();
        assert!(matches!(read_state(&mut bytes.as_slice()), Err(CheckpointError::BadMagic)));
        bytes.truncate(3);
        assert!(read_state(&mut bytes.as_slice()).is_err());
    }

    #[test]
    fn unregularised_n_roundtrips() {
        let mut state = random_state(43);
        state.params = ConstitutiveParams::new(1.0, 1.0, Regularisation::Unregularised).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &state).unwrap();
        let back = read_state(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.params.n, Regularisation::Unregularised);
    }

    #[test]
    fn force_table_roundtrip() {
        let config = SpectralConfig::with_default_grid(2, 2).unwrap();
        let mut f0 = SpectralField::zeros(config);
        f0.set_mode(0, [1, 0, 0], 0.5, -0.25);
        let mut f1 = SpectralField::zeros(config);
        f1.set_mode(1, [2, 1, 0], 0.0, 1.5);
        let table = ForceTable::new(vec![0.0, 0.5], vec![f0, f1]);
        let mut bytes = Vec::new();
        write_force_table(&mut bytes, &table).unwrap();
        let back = read_force_table(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.times(), table.times());
        assert_eq!(back.fields()[1].coeffs(), table.fields()[1].coeffs());
    }
}
