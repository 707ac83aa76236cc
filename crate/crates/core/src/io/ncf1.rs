//! The `NCF1` little-endian table format.
//!
//! ```text
//! 0   "NCF1"
//! 4   u64   N
//! 12  u8    value tag   1 = i8, 2 = u32 prime-power base, 3 = f64,
//!                       4 = (f64 re, f64 im), 5 = 5 × u32 τ residues
//! 13  u8    kind code   see `kind_code`
//! 14  values for n = 1..=N
//!     optional trailer "PROV", u32 length, JSON provenance
//! ```

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::provenance::Provenance;
use super::write_atomic;
use crate::error::{Error, Result};
use crate::multfunc::{Kind, MultFuncTable, Normalization, TauTable, Values};

pub const MAGIC: &[u8; 4] = b"NCF1";
const TRAILER: &[u8; 4] = b"PROV";
const HEADER_LEN: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Tag {
    I8 = 1,
    PrimePower = 2,
    F64 = 3,
    Complex = 4,
    TauResidues = 5,
}

impl Tag {
    fn from_u8(b: u8) -> Result<Tag> {
        Ok(match b {
            1 => Tag::I8,
            2 => Tag::PrimePower,
            3 => Tag::F64,
            4 => Tag::Complex,
            5 => Tag::TauResidues,
            _ => return Err(Error::SchemaError(format!("unknown NCF1 value tag {b}"))),
        })
    }

    fn width(self) -> usize {
        match self {
            Tag::I8 => 1,
            Tag::PrimePower => 4,
            Tag::F64 => 8,
            Tag::Complex => 16,
            Tag::TauResidues => 20,
        }
    }
}

fn kind_code(k: Kind) -> u8 {
    match k {
        Kind::Custom => 0,
        Kind::Mobius => 1,
        Kind::Liouville => 2,
        Kind::VonMangoldt => 3,
        Kind::LambdaPiGl2 => 5,
        Kind::MobiusTimesLambda => 6,
        Kind::LambdaPiImported => 7,
    }
}

/// Kind code 4 marks a τ residue table.
const TAU_CODE: u8 = 4;

fn kind_from_code(c: u8) -> Result<Kind> {
    Ok(match c {
        0 => Kind::Custom,
        1 => Kind::Mobius,
        2 => Kind::Liouville,
        3 => Kind::VonMangoldt,
        5 => Kind::LambdaPiGl2,
        6 => Kind::MobiusTimesLambda,
        7 => Kind::LambdaPiImported,
        _ => return Err(Error::SchemaError(format!("unknown NCF1 kind code {c}"))),
    })
}

/// Contents of an `NCF1` file.
#[derive(Clone, Debug)]
pub enum Payload {
    Table(MultFuncTable),
    Tau(TauTable),
}

fn header(w: &mut impl Write, n: u64, tag: Tag, kind: u8) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&[tag as u8, kind])
}

fn trailer(w: &mut impl Write, prov: Option<&Provenance>) -> std::io::Result<()> {
    if let Some(p) = prov {
        let json = serde_json::to_vec(p).expect("provenance serializes");
        w.write_all(TRAILER)?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
    }
    Ok(())
}

pub fn write_table<W: Write>(mut w: W, t: &MultFuncTable, prov: Option<&Provenance>) -> std::io::Result<()> {
    let n = t.len();
    let k = kind_code(t.kind);
    match t.values() {
        Values::Small(v) => {
            header(&mut w, n, Tag::I8, k)?;
            let bytes: Vec<u8> = v[1..].iter().map(|&x| x as u8).collect();
            w.write_all(&bytes)?;
        }
        Values::PrimePowers(v) => {
            header(&mut w, n, Tag::PrimePower, k)?;
            for x in &v[1..] {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Values::Real(v) => {
            header(&mut w, n, Tag::F64, k)?;
            for x in &v[1..] {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Values::Complex(v) => {
            header(&mut w, n, Tag::Complex, k)?;
            for x in &v[1..] {
                w.write_all(&x.re.to_le_bytes())?;
                w.write_all(&x.im.to_le_bytes())?;
            }
        }
    }
    trailer(&mut w, prov)
}

pub fn write_tau<W: Write>(mut w: W, t: &TauTable, prov: Option<&Provenance>) -> std::io::Result<()> {
    header(&mut w, t.len(), Tag::TauResidues, TAU_CODE)?;
    for r in &t.residues()[1..] {
        for x in r {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    trailer(&mut w, prov)
}

pub fn save_table(path: &Path, t: &MultFuncTable, prov: Option<&Provenance>) -> Result<()> {
    write_atomic(path, |w| write_table(w, t, prov))
}

pub fn save_tau(path: &Path, t: &TauTable, prov: Option<&Provenance>) -> Result<()> {
    write_atomic(path, |w| write_tau(w, t, prov))
}

/// Parses an `NCF1` image, returning the payload and the provenance trailer if present.
pub fn decode(bytes: &[u8]) -> Result<(Payload, Option<Provenance>)> {
    let bad = |m: &str| Error::SchemaError(format!("NCF1: {m}"));
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("missing magic"));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let tag = Tag::from_u8(bytes[12])?;
    let kind = bytes[13];
    let body_len = (n as usize)
        .checked_mul(tag.width())
        .ok_or_else(|| bad("length overflows"))?;
    let end = HEADER_LEN + body_len;
    if bytes.len() < end {
        return Err(bad("truncated body"));
    }
    let body = &bytes[HEADER_LEN..end];
    let payload = match tag {
        Tag::TauResidues => {
            let mut res = Vec::with_capacity(n as usize + 1);
            res.push([0u32; 5]);
            res.extend(body.chunks_exact(20).map(|c| {
                std::array::from_fn(|i| u32::from_le_bytes(c[4 * i..4 * i + 4].try_into().unwrap()))
            }));
            Payload::Tau(TauTable::from_residues(res))
        }
        _ => {
            let values = match tag {
                Tag::I8 => Values::Small(std::iter::once(0).chain(body.iter().map(|&b| b as i8)).collect()),
                Tag::PrimePower => Values::PrimePowers(
                    std::iter::once(0)
                        .chain(body.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())))
                        .collect(),
                ),
                Tag::F64 => Values::Real(
                    std::iter::once(0.0)
                        .chain(body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())))
                        .collect(),
                ),
                Tag::Complex => Values::Complex(
                    std::iter::once(Complex64::new(0.0, 0.0))
                        .chain(body.chunks_exact(16).map(|c| {
                            Complex64::new(
                                f64::from_le_bytes(c[..8].try_into().unwrap()),
                                f64::from_le_bytes(c[8..].try_into().unwrap()),
                            )
                        }))
                        .collect(),
                ),
                Tag::TauResidues => unreachable!(),
            };
            let kind = kind_from_code(kind)?;
            let norm = match kind {
                Kind::LambdaPiGl2 | Kind::LambdaPiImported | Kind::MobiusTimesLambda => Normalization::Analytic,
                _ => Normalization::Arithmetic,
            };
            Payload::Table(MultFuncTable::new(kind, norm, format!("{kind:?}").to_lowercase(), values))
        }
    };
    let rest = &bytes[end..];
    let prov = if rest.len() >= 8 && &rest[..4] == TRAILER {
        let len = u32::from_le_bytes(rest[4..8].try_into().unwrap()) as usize;
        let json = rest.get(8..8 + len).ok_or_else(|| bad("truncated trailer"))?;
        Some(serde_json::from_slice(json).map_err(|e| bad(&e.to_string()))?)
    } else {
        None
    };
    Ok((payload, prov))
}

pub fn load(path: &Path) -> Result<(Payload, Option<Provenance>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}
