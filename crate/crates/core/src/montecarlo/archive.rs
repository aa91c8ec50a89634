//! Flat binary sample archive: a little-endian header followed by
//! `draws * N` little-endian `f64` eigenvalues, draw-major.

use super::sampler::SpectrumSample;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const ARCHIVE_MAGIC: [u8; 4] = *b"WRMT";
pub const ARCHIVE_VERSION: u32 = 1;
const HEADER_BYTES: usize = 4 + 4 + 4 + 4 + 8 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchiveHeader {
    pub n: u32,
    pub nu: u32,
    pub a: f64,
    pub m: f64,
    pub draws: u64,
}

impl ArchiveHeader {
    pub fn new(p: &ModelParams, draws: u64) -> Result<Self> {
        let cast = |v: usize| u32::try_from(v).map_err(|_| Error::Archive(format!("{v} does not fit in u32")));
        Ok(ArchiveHeader {
            n: cast(p.n)?,
            nu: cast(p.nu)?,
            a: p.a,
            m: p.m,
            draws,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n as usize + self.nu as usize
    }

    fn to_bytes(self) -> [u8; HEADER_BYTES] {
        let mut b = [0u8; HEADER_BYTES];
        b[0..4].copy_from_slice(&ARCHIVE_MAGIC);
        b[4..8].copy_from_slice(&ARCHIVE_VERSION.to_le_bytes());
        b[8..12].copy_from_slice(&self.n.to_le_bytes());
        b[12..16].copy_from_slice(&self.nu.to_le_bytes());
        b[16..24].copy_from_slice(&self.a.to_le_bytes());
        b[24..32].copy_from_slice(&self.m.to_le_bytes());
        b[32..40].copy_from_slice(&self.draws.to_le_bytes());
        b
    }

    fn from_bytes(b: &[u8; HEADER_BYTES]) -> Result<Self> {
        if b[0..4] != ARCHIVE_MAGIC {
            return Err(Error::Archive("bad magic".into()));
        }
        let u32_at = |k: usize| u32::from_le_bytes(b[k..k + 4].try_into().unwrap());
        let f64_at = |k: usize| f64::from_le_bytes(b[k..k + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != ARCHIVE_VERSION {
            return Err(Error::Archive(format!("unsupported version {version}")));
        }
        Ok(ArchiveHeader {
            n: u32_at(8),
            nu: u32_at(12),
            a: f64_at(16),
            m: f64_at(24),
            draws: u64::from_le_bytes(b[32..40].try_into().unwrap()),
        })
    }
}

pub fn write_archive(path: &Path, header: &ArchiveHeader, samples: &[SpectrumSample]) -> Result<()> {
    if samples.len() as u64 != header.draws {
        return Err(Error::Archive(format!(
            "header announces {} draws, got {}",
            header.draws,
            samples.len()
        )));
    }
    let dim = header.dim();
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    out.write_all(&header.to_bytes())?;
    for s in samples {
        if s.eigenvalues.len() != dim {
            return Err(Error::Dimension(format!("spectrum of length {}, expected {dim}", s.eigenvalues.len())));
        }
        for v in &s.eigenvalues {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads an archive back; stream ids are not stored, so every sample reports stream 0.
pub fn read_archive(path: &Path) -> Result<(ArchiveHeader, Vec<SpectrumSample>)> {
    let mut input = BufReader::new(std::fs::File::open(path)?);
    let mut hb = [0u8; HEADER_BYTES];
    input
        .read_exact(&mut hb)
        .map_err(|_| Error::Archive("truncated header".into()))?;
    let header = ArchiveHeader::from_bytes(&hb)?;
    let dim = header.dim();
    let mut samples = Vec::new();
    let mut buf = [0u8; 8];
    for draw in 0..header.draws {
        let mut eigenvalues = Vec::with_capacity(dim);
        for _ in 0..dim {
            input
                .read_exact(&mut buf)
                .map_err(|_| Error::Archive(format!("truncated at draw {draw}")))?;
            eigenvalues.push(f64::from_le_bytes(buf));
        }
        samples.push(SpectrumSample {
            eigenvalues,
            stream: 0,
            draw,
        });
    }
    if input.read(&mut buf)? != 0 {
        return Err(Error::Archive("trailing bytes".into()));
    }
    Ok((header, samples))
}
