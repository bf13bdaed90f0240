//! File formats: sequences, correlation profiles, coefficients, BER tables
//! and simulation config files.
//!
//! Floats are written as shortest round-trip decimals. Infinite Eb/N0
//! (noiseless) is written as the string `inf`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::correlation::cross_correlation;
use crate::decomposition::{CoefficientKind, CoefficientVector};
use crate::error::{Error, Result};
use crate::sequences::{Family, SpreadingSequence};
use crate::simulator::{BerPoint, BerResult, OffsetsMode, PhaseMode, SimConfig};

#[derive(Debug, Serialize, Deserialize)]
struct ChipRow {
    index: usize,
    re: f64,
    im: f64,
}

/// CSV with header `index,re,im`, one chip per row, `index` from 1.
pub fn write_sequence_csv<W: Write>(seq: &SpreadingSequence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, c) in seq.chips().iter().enumerate() {
        w.serialize(ChipRow {
            index: i + 1,
            re: c.re,
            im: c.im,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sequence_csv<R: Read>(input: R) -> Result<SpreadingSequence> {
    let mut chips = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize::<ChipRow>() {
        let row = row?;
        if row.index != chips.len() + 1 {
            return Err(Error::Format(format!(
                "expected index {}, found {}",
                chips.len() + 1,
                row.index
            )));
        }
        chips.push(Complex64::new(row.re, row.im));
    }
    SpreadingSequence::new(chips)
}

/// JSON array of `[re, im]` pairs.
pub fn write_sequence_json<W: Write>(seq: &SpreadingSequence, out: W) -> Result<()> {
    let pairs: Vec<[f64; 2]> = seq.chips().iter().map(|c| [c.re, c.im]).collect();
    serde_json::to_writer(out, &pairs)?;
    Ok(())
}

pub fn read_sequence_json<R: Read>(input: R) -> Result<SpreadingSequence> {
    let pairs: Vec<[f64; 2]> = serde_json::from_reader(input)?;
    SpreadingSequence::new(
        pairs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect(),
    )
}

/// Parses a sequence from text, sniffing JSON (leading `[`) versus CSV.
pub fn parse_sequence(text: &str) -> Result<SpreadingSequence> {
    if text.trim_start().starts_with('[') {
        read_sequence_json(text.as_bytes())
    } else {
        read_sequence_csv(text.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub l: usize,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl ProfileRow {
    pub fn new(l: usize, value: Complex64) -> Self {
        Self {
            l,
            re: value.re,
            im: value.im,
            abs: value.norm(),
        }
    }
}

/// `C(l)` for `l = 0..=N`.
pub fn correlation_profile(
    seq1: &SpreadingSequence,
    seq2: &SpreadingSequence,
    b: i8,
) -> Result<Vec<ProfileRow>> {
    (0..=seq1.len())
        .map(|l| Ok(ProfileRow::new(l, cross_correlation(seq1, seq2, l, b)?)))
        .collect()
}

/// CSV with header `l,re,im,abs`.
pub fn write_profile_csv<W: Write>(rows: &[ProfileRow], out: W) -> Result<()> {
    write_rows(rows, out)
}

pub fn read_profile_csv<R: Read>(input: R) -> Result<Vec<ProfileRow>> {
    read_rows(input)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub m: usize,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

/// CSV with header `m,re,im,abs`, `m` from 1.
pub fn write_coefficients_csv<W: Write>(coeffs: &CoefficientVector, out: W) -> Result<()> {
    let rows: Vec<_> = coeffs
        .values()
        .iter()
        .enumerate()
        .map(|(i, c)| CoefficientRow {
            m: i + 1,
            re: c.re,
            im: c.im,
            abs: c.norm(),
        })
        .collect();
    write_rows(&rows, out)
}

pub fn read_coefficients_csv<R: Read>(
    input: R,
    kind: CoefficientKind,
) -> Result<CoefficientVector> {
    let rows: Vec<CoefficientRow> = read_rows(input)?;
    for (i, r) in rows.iter().enumerate() {
        if r.m != i + 1 {
            return Err(Error::Format(format!(
                "expected m = {}, found {}",
                i + 1,
                r.m
            )));
        }
    }
    Ok(CoefficientVector::new(
        kind,
        rows.iter().map(|r| Complex64::new(r.re, r.im)).collect(),
    ))
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Eb/N0 in dB where `+∞` is carried as the string `inf`.
mod ebn0_serde {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            Err(serde::ser::Error::custom(format!("invalid Eb/N0 {v}")))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        let v = match Repr::deserialize(d)? {
            Repr::Number(v) => v,
            Repr::Text(t) => t
                .trim()
                .parse::<f64>()
                .map_err(|_| serde::de::Error::custom(format!("invalid Eb/N0 `{t}`")))?,
        };
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(serde::de::Error::custom(format!("invalid Eb/N0 {v}")));
        }
        Ok(v)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BerRow {
    family: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    users: usize,
    #[serde(with = "ebn0_serde")]
    ebn0_db: f64,
    bits: u64,
    errors: u64,
    ber: f64,
    ci95: f64,
}

impl From<&BerPoint> for BerRow {
    fn from(p: &BerPoint) -> Self {
        Self {
            family: p.family.clone(),
            n: p.n,
            users: p.users,
            ebn0_db: p.ebn0_db,
            bits: p.bits,
            errors: p.errors,
            ber: p.ber,
            ci95: p.ci95,
        }
    }
}

impl BerRow {
    fn into_point(self) -> Result<BerPoint> {
        if self.errors > self.bits {
            return Err(Error::Format(format!(
                "{} errors exceed {} bits",
                self.errors, self.bits
            )));
        }
        if !(0.0..=1.0).contains(&self.ber) {
            return Err(Error::Format(format!("BER {} is outside [0, 1]", self.ber)));
        }
        Ok(BerPoint {
            family: self.family,
            n: self.n,
            users: self.users,
            ebn0_db: self.ebn0_db,
            bits: self.bits,
            errors: self.errors,
            ber: self.ber,
            ci95: self.ci95,
        })
    }
}

/// CSV with header `family,N,K,ebn0_db,bits,errors,ber,ci95`.
pub fn write_ber_csv<W: Write>(result: &BerResult, out: W) -> Result<()> {
    let rows: Vec<BerRow> = result.points.iter().map(BerRow::from).collect();
    write_rows(&rows, out)
}

pub fn read_ber_csv<R: Read>(input: R) -> Result<BerResult> {
    let rows: Vec<BerRow> = read_rows(input)?;
    Ok(BerResult {
        points: rows
            .into_iter()
            .map(BerRow::into_point)
            .collect::<Result<_>>()?,
    })
}

/// JSON array of objects with the CSV column names as keys.
pub fn write_ber_json<W: Write>(result: &BerResult, out: W) -> Result<()> {
    let rows: Vec<BerRow> = result.points.iter().map(BerRow::from).collect();
    serde_json::to_writer_pretty(out, &rows)?;
    Ok(())
}

pub fn read_ber_json<R: Read>(input: R) -> Result<BerResult> {
    let rows: Vec<BerRow> = serde_json::from_reader(input)?;
    Ok(BerResult {
        points: rows
            .into_iter()
            .map(BerRow::into_point)
            .collect::<Result<_>>()?,
    })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FamilyName {
    Weyl,
    Gold,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OffsetsRepr {
    Mode(String),
    Fixed(Vec<usize>),
}

#[derive(Debug, Deserialize)]
struct EbN0(#[serde(with = "ebn0_serde")] f64);

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    family: FamilyName,
    #[serde(default)]
    sigma: f64,
    n: usize,
    users: OneOrMany<usize>,
    ebn0_db: OneOrMany<EbN0>,
    symbols_per_user: u64,
    #[serde(default)]
    rng_seed: u64,
    #[serde(default)]
    phase_mode: PhaseMode,
    offsets_mode: Option<OffsetsRepr>,
}

/// A parsed simulation config: one template plus the `K` values to sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub template: SimConfig,
    pub users: Vec<usize>,
}

impl SweepSpec {
    pub fn ebn0_db(&self) -> &[f64] {
        &self.template.ebn0_db
    }
}

/// Parses a TOML config whose keys mirror [`SimConfig`]:
///
/// ```toml
/// family = "weyl"          # or "gold"
/// sigma = 0.0              # weyl only
/// n = 63
/// users = [10, 30, 60]     # K, one value or a list
/// ebn0_db = [4.0, 8.0]     # `inf` for noiseless
/// symbols_per_user = 1000000
/// rng_seed = 1
/// phase_mode = "zero"      # or "uniform"
/// offsets_mode = "uniform" # or a fixed list of gaps for users 2..=K
/// ```
pub fn parse_sim_config(text: &str) -> Result<SweepSpec> {
    let file: ConfigFile = toml::from_str(text)?;
    let family = match file.family {
        FamilyName::Weyl => Family::Weyl { sigma: file.sigma },
        FamilyName::Gold => Family::Gold,
    };
    let offsets_mode = match file.offsets_mode {
        None => OffsetsMode::Uniform,
        Some(OffsetsRepr::Mode(m)) if m == "uniform" => OffsetsMode::Uniform,
        Some(OffsetsRepr::Mode(m)) => {
            return Err(Error::Format(format!("unknown offsets_mode `{m}`")))
        }
        Some(OffsetsRepr::Fixed(v)) => OffsetsMode::Fixed(v),
    };
    let users = file.users.into_vec();
    let ebn0_db: Vec<f64> = file.ebn0_db.into_vec().into_iter().map(|e| e.0).collect();
    if users.is_empty() || ebn0_db.is_empty() {
        return Err(Error::Format("users and ebn0_db must be nonempty".into()));
    }
    let template = SimConfig {
        n: file.n,
        users: users[0],
        family,
        ebn0_db,
        symbols_per_user: file.symbols_per_user,
        rng_seed: file.rng_seed,
        phase_mode: file.phase_mode,
        offsets_mode,
    };
    for &k in &users {
        SimConfig {
            users: k,
            ..template.clone()
        }
        .validate()?;
    }
    Ok(SweepSpec { template, users })
}
