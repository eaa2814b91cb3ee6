//! Versioned JSON archive of Gram/Weingarten tables.
//!
//! Every float is stored twice: as a decimal for reading and as the
//! IEEE-754 bit pattern (`0x` + 16 hex digits) for exact round trips. Readers
//! use the hex form.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::commutant::monomial::PauliMonomial;
use crate::commutant::weingarten::WeingartenTable;
use crate::error::{Error, Result};

pub const ARCHIVE_FORMAT: &str = "dilute-commutant-table";
pub const ARCHIVE_SCHEMA_VERSION: u32 = 1;
pub const NORMALIZATION: &str =
    "G[a][b] = tr(A^dagger B) / d^k with d = 2^n; W = inverse (or pseudoinverse) of G";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialEntry {
    pub index: usize,
    pub m: usize,
    /// Columns of `V` as bit strings over the copies.
    pub columns: Vec<String>,
    /// Strict upper triangle of `M`, row by row.
    pub phases_upper: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableArchive {
    pub format: String,
    pub schema_version: u32,
    pub normalization: String,
    pub k: usize,
    pub n: usize,
    pub d: u64,
    pub pseudo_flag: bool,
    pub min_singular_value: String,
    pub monomials: Vec<MonomialEntry>,
    pub alpha: Vec<Vec<u32>>,
    pub gram_hex: Vec<Vec<String>>,
    pub weingarten_hex: Vec<Vec<String>>,
    pub gram: Vec<Vec<f64>>,
    pub weingarten: Vec<Vec<f64>>,
}

pub fn f64_to_hex(x: f64) -> String {
    format!("0x{:016x}", x.to_bits())
}

pub fn hex_to_f64(s: &str) -> Result<f64> {
    let digits = s
        .strip_prefix("0x")
        .ok_or_else(|| Error::invalid(format!("hex float {s:?} lacks 0x prefix")))?;
    u64::from_str_radix(digits, 16)
        .map(f64::from_bits)
        .map_err(|e| Error::invalid(format!("bad hex float {s:?}: {e}")))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn hex_rows(m: &DMatrix<f64>) -> Vec<Vec<String>> {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|&x| f64_to_hex(x)).collect()).collect()
}

fn from_hex_rows(rows: &[Vec<String>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let mut out = DMatrix::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(Error::invalid("ragged matrix in archive"));
        }
        for (j, s) in row.iter().enumerate() {
            out[(i, j)] = hex_to_f64(s)?;
        }
    }
    Ok(out)
}

fn entry(index: usize, m: &PauliMonomial) -> MonomialEntry {
    let mut upper = String::new();
    for i in 0..m.m() {
        for j in i + 1..m.m() {
            upper.push(if m.phases().get(i, j) { '1' } else { '0' });
        }
    }
    MonomialEntry {
        index,
        m: m.m(),
        columns: m.columns().iter().map(|c| c.to_string()).collect(),
        phases_upper: upper,
    }
}

impl TableArchive {
    pub fn from_table(t: &WeingartenTable) -> Self {
        TableArchive {
            format: ARCHIVE_FORMAT.into(),
            schema_version: ARCHIVE_SCHEMA_VERSION,
            normalization: NORMALIZATION.into(),
            k: t.k,
            n: t.n,
            d: 1u64 << t.n,
            pseudo_flag: t.pseudo,
            min_singular_value: f64_to_hex(t.min_singular_value),
            monomials: t.monomials.iter().enumerate().map(|(i, m)| entry(i, m)).collect(),
            alpha: t.alpha.clone(),
            gram_hex: hex_rows(&t.gram),
            weingarten_hex: hex_rows(&t.weingarten),
            gram: to_rows(&t.gram),
            weingarten: to_rows(&t.weingarten),
        }
    }

    /// Bit-exact Gram and Weingarten matrices.
    pub fn matrices(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        Ok((from_hex_rows(&self.gram_hex)?, from_hex_rows(&self.weingarten_hex)?))
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let a: TableArchive = serde_json::from_reader(r)?;
        if a.format != ARCHIVE_FORMAT {
            return Err(Error::invalid(format!("unknown archive format {:?}", a.format)));
        }
        if a.schema_version != ARCHIVE_SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported archive schema version {}",
                a.schema_version
            )));
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutant::weingarten::weingarten_table;

    #[test]
    fn hex_roundtrip() {
        for x in [0.0, -0.0, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -2.5] {
            assert_eq!(hex_to_f64(&f64_to_hex(x)).unwrap().to_bits(), x.to_bits());
        }
        assert!(hex_to_f64("3ff").is_err());
    }

    #[test]
    fn archive_roundtrip_is_bit_exact() {
        let t = weingarten_table(3, 2).unwrap();
        let a = TableArchive::from_table(&t);
        let mut buf = Vec::new();
        a.write(&mut buf).unwrap();
        let back = TableArchive::read(buf.as_slice()).unwrap();
        assert_eq!(back.gram_hex, a.gram_hex);
        assert_eq!(back.weingarten_hex, a.weingarten_hex);
        assert_eq!(back.alpha, a.alpha);
        assert_eq!(back.monomials, a.monomials);
        let (g, w) = back.matrices().unwrap();
        assert_eq!(g, t.gram);
        assert_eq!(w, t.weingarten);
        assert_eq!(back.monomials.len(), 6);
    }

    #[test]
    fn rejects_foreign_format() {
        let t = weingarten_table(2, 1).unwrap();
        let mut a = TableArchive::from_table(&t);
        a.format = "other".into();
        let mut buf = Vec::new();
        a.write(&mut buf).unwrap();
        assert!(TableArchive::read(buf.as_slice()).is_err());
    }
}
