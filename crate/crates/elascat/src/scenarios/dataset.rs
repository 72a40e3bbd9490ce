//! Near-field dataset container.
//!
//! File layout: magic `EWNF`, a little-endian u32 header length, a JSON
//! header, then raw little-endian f64 payload. Complex records store
//! `[Re u₁, Im u₁, Re u₂, Im u₂] × P` per (frequency, direction) in
//! schedule order; phaseless records store `P` doubles.

use crate::dtn::BackgroundMedium;
use crate::fem::WaveKind;
use crate::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};

type C = Complex64;

const MAGIC: &[u8; 4] = b"EWNF";

/// One measurement record: the boundary trace for one (ω, θ) pair.
#[derive(Debug, Clone, PartialEq)]
pub enum RecordData {
    Complex(Vec<[C; 2]>),
    Phaseless(Vec<f64>),
}

/// Multi-frequency, multi-direction near-field measurements on the
/// uniform boundary grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldDataset {
    pub medium: BackgroundMedium,
    pub frequencies: Vec<f64>,
    pub directions: Vec<f64>,
    pub incidence_kind: WaveKind,
    pub boundary_points: usize,
    pub phaseless: bool,
    pub noise_level: f64,
    pub noise_seed: u64,
    /// Mesh level the data was synthesized on (inverse-crime guard).
    pub provenance_mesh_level: u32,
    /// Records indexed by i·M + j.
    pub records: Vec<RecordData>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct Header {
    format_version: u32,
    medium: BackgroundMedium,
    frequencies: Vec<f64>,
    directions: Vec<f64>,
    incidence_kind: WaveKind,
    boundary_points: usize,
    phaseless: bool,
    noise_level: f64,
    noise_seed: u64,
    provenance_mesh_level: u32,
}

impl NearFieldDataset {
    pub fn record(&self, i: usize, j: usize) -> Result<&RecordData> {
        let m = self.directions.len();
        if i >= self.frequencies.len() || j >= m {
            return Err(Error::ScheduleMismatch(format!(
                "record ({i}, {j}) outside the {}×{} schedule",
                self.frequencies.len(),
                m
            )));
        }
        Ok(&self.records[i * m + j])
    }

    pub fn is_phaseless(&self) -> bool {
        self.phaseless
    }

    /// Verifies that the dataset schedule matches the requested one.
    pub fn check_covers(&self, frequencies: &[f64], directions: &[f64]) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
        if self.frequencies.len() != frequencies.len()
            || self.directions.len() != directions.len()
            || !self
                .frequencies
                .iter()
                .zip(frequencies)
                .all(|(a, b)| close(*a, *b))
            || !self
                .directions
                .iter()
                .zip(directions)
                .all(|(a, b)| close(*a, *b))
        {
            return Err(Error::ScheduleMismatch(
                "dataset schedule does not match the requested sweep".into(),
            ));
        }
        if self.records.len() != self.frequencies.len() * self.directions.len() {
            return Err(Error::ScheduleMismatch(format!(
                "dataset holds {} records for a {}×{} schedule",
                self.records.len(),
                self.frequencies.len(),
                self.directions.len()
            )));
        }
        Ok(())
    }

    /// Squares all complex records in place semantics (returns a new set).
    pub fn to_phaseless(&self) -> NearFieldDataset {
        let records = self
            .records
            .iter()
            .map(|r| match r {
                RecordData::Complex(v) => RecordData::Phaseless(
                    v.iter().map(|z| z[0].norm_sqr() + z[1].norm_sqr()).collect(),
                ),
                RecordData::Phaseless(v) => RecordData::Phaseless(v.clone()),
            })
            .collect();
        NearFieldDataset {
            phaseless: true,
            records,
            ..self.clone()
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Header {
            format_version: 1,
            medium: self.medium,
            frequencies: self.frequencies.clone(),
            directions: self.directions.clone(),
            incidence_kind: self.incidence_kind,
            boundary_points: self.boundary_points,
            phaseless: self.phaseless,
            noise_level: self.noise_level,
            noise_seed: self.noise_seed,
            provenance_mesh_level: self.provenance_mesh_level,
        };
        let hjson = serde_json::to_vec(&header)
            .map_err(|e| Error::DatasetFormat(format!("header serialization: {e}")))?;
        out.write_all(MAGIC)?;
        out.write_all(&(hjson.len() as u32).to_le_bytes())?;
        out.write_all(&hjson)?;
        let mut buf = Vec::new();
        for r in &self.records {
            match r {
                RecordData::Complex(v) => {
                    for z in v {
                        buf.extend_from_slice(&z[0].re.to_le_bytes());
                        buf.extend_from_slice(&z[0].im.to_le_bytes());
                        buf.extend_from_slice(&z[1].re.to_le_bytes());
                        buf.extend_from_slice(&z[1].im.to_le_bytes());
                    }
                }
                RecordData::Phaseless(v) => {
                    for x in v {
                        buf.extend_from_slice(&x.to_le_bytes());
                    }
                }
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(f))
    }

    /// Parses only the JSON header (for `dataset info`).
    pub fn read_header_json<R: Read>(mut input: R) -> Result<String> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::DatasetFormat("bad magic".into()));
        }
        let mut len = [0u8; 4];
        input.read_exact(&mut len)?;
        let n = u32::from_le_bytes(len) as usize;
        let mut hjson = vec![0u8; n];
        input.read_exact(&mut hjson)?;
        String::from_utf8(hjson).map_err(|e| Error::DatasetFormat(format!("header utf8: {e}")))
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::DatasetFormat("bad magic".into()));
        }
        let mut len = [0u8; 4];
        input.read_exact(&mut len)?;
        let n = u32::from_le_bytes(len) as usize;
        let mut hjson = vec![0u8; n];
        input.read_exact(&mut hjson)?;
        let header: Header = serde_json::from_slice(&hjson)
            .map_err(|e| Error::DatasetFormat(format!("header parse: {e}")))?;
        let nrec = header.frequencies.len() * header.directions.len();
        let p = header.boundary_points;
        let per_record = if header.phaseless { p } else { 4 * p };
        let mut payload = Vec::new();
        input.read_to_end(&mut payload)?;
        if payload.len() != nrec * per_record * 8 {
            return Err(Error::DatasetFormat(format!(
                "payload holds {} bytes, expected {}",
                payload.len(),
                nrec * per_record * 8
            )));
        }
        let mut records = Vec::with_capacity(nrec);
        let mut pos = 0usize;
        let mut next = || {
            let v = f64::from_le_bytes(payload[pos..pos + 8].try_into().unwrap());
            pos += 8;
            v
        };
        for _ in 0..nrec {
            if header.phaseless {
                records.push(RecordData::Phaseless((0..p).map(|_| next()).collect()));
            } else {
                records.push(RecordData::Complex(
                    (0..p)
                        .map(|_| {
                            [
                                C::new(next(), next()),
                                C::new(next(), next()),
                            ]
                        })
                        .collect(),
                ));
            }
        }
        Ok(NearFieldDataset {
            medium: header.medium,
            frequencies: header.frequencies,
            directions: header.directions,
            incidence_kind: header.incidence_kind,
            boundary_points: header.boundary_points,
            phaseless: header.phaseless,
            noise_level: header.noise_level,
            noise_seed: header.noise_seed,
            provenance_mesh_level: header.provenance_mesh_level,
            records,
        })
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f))
    }
}
