//! CSV ingestion of summary-data tables.
//!
//! Headers are fixed (`study,y,var_y,n` for one-arm tables and
//! `study,y_t,n_t,se_t,y_c,n_c,se_c` for two-arm tables); column order is
//! free but unknown or missing columns are rejected. Numbers use `.` as the
//! decimal separator and must be finite; sample sizes must be plain
//! integers. Row numbers in errors count data rows from 1.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{MetaDataset, OneArmStudy, TwoArmStudy};

pub const ONE_ARM_HEADER: &str = "study,y,var_y,n";
pub const TWO_ARM_HEADER: &str = "study,y_t,n_t,se_t,y_c,n_c,se_c";

const JEONG2014: &str = include_str!("../../data/jeong2014.csv");
const AVERY2022: &str = include_str!("../../data/avery2022.csv");

/// Datasets shipped inside the binary, by file name.
pub const BUNDLED: [(&str, &str); 2] = [("jeong2014.csv", JEONG2014), ("avery2022.csv", AVERY2022)];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Raw input bytes plus where they came from.
#[derive(Debug, Clone)]
pub struct InputFile {
    pub source: String,
    pub bytes: Vec<u8>,
}

impl InputFile {
    /// Reads `path`; a missing file whose name matches a bundled dataset
    /// resolves to the bundled copy.
    pub fn load(path: &Path) -> Result<InputFile> {
        match std::fs::read(path) {
            Ok(bytes) => Ok(InputFile {
                source: path.display().to_string(),
                bytes,
            }),
            Err(e) => {
                let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
                match bundled(name) {
                    Some(text) if e.kind() == std::io::ErrorKind::NotFound => Ok(InputFile {
                        source: format!("bundled:{name}"),
                        bytes: text.as_bytes().to_vec(),
                    }),
                    _ => Err(Error::Io {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    }),
                }
            }
        }
    }

    pub fn bundled(name: &str) -> Option<InputFile> {
        bundled(name).map(|text| InputFile {
            source: format!("bundled:{name}"),
            bytes: text.as_bytes().to_vec(),
        })
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(&self.bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneArmTable {
    pub labels: Vec<String>,
    pub studies: Vec<OneArmStudy>,
}

impl OneArmTable {
    pub fn dataset(&self) -> Result<MetaDataset> {
        MetaDataset::from_one_arm(&self.studies)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoArmTable {
    pub labels: Vec<String>,
    pub studies: Vec<TwoArmStudy>,
}

struct Columns {
    index: Vec<usize>,
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, expected: &'static str) -> Result<Columns> {
        let wanted: Vec<&str> = expected.split(',').collect();
        let index = wanted
            .iter()
            .map(|w| {
                headers
                    .iter()
                    .position(|h| h == *w)
                    .ok_or_else(|| Error::MissingColumn {
                        column: (*w).to_string(),
                        expected,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(h) = headers.iter().find(|h| !wanted.contains(h)) {
            return Err(Error::UnexpectedColumn {
                column: h.to_string(),
                expected,
            });
        }
        Ok(Columns { index })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, i: usize) -> &'r str {
        record.get(self.index[i]).unwrap_or("")
    }
}

fn real(cell: &str, column: &str) -> Result<f64> {
    let bad = || Error::Parse {
        message: format!("column `{column}`: `{cell}` is not a finite decimal number"),
    };
    // Rust's float parser also accepts `inf`/`nan` spellings; only plain
    // decimal notation is allowed here.
    if cell.is_empty()
        || !cell
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        return Err(bad());
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)
}

fn count(cell: &str, column: &str) -> Result<u32> {
    if cell.is_empty() || !cell.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse {
            message: format!("column `{column}`: `{cell}` is not a non-negative integer"),
        });
    }
    cell.parse::<u32>().map_err(|_| Error::Parse {
        message: format!("column `{column}`: `{cell}` is out of range"),
    })
}

fn records(bytes: &[u8], expected: &'static str) -> Result<(Columns, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            message: format!("header: {e}"),
        })?
        .clone();
    let columns = Columns::resolve(&headers, expected)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            Error::Parse {
                message: e.to_string(),
            }
            .at_row(i + 1)
        })?;
        rows.push(rec);
    }
    if rows.len() < 2 {
        return Err(Error::InsufficientStudies { found: rows.len() });
    }
    Ok((columns, rows))
}

pub fn read_one_arm(bytes: &[u8]) -> Result<OneArmTable> {
    let (cols, rows) = records(bytes, ONE_ARM_HEADER)?;
    let mut labels = Vec::with_capacity(rows.len());
    let mut studies = Vec::with_capacity(rows.len());
    for (i, rec) in rows.iter().enumerate() {
        let parse = || -> Result<OneArmStudy> {
            let y = real(cols.get(rec, 1), "y")?;
            let var_y = real(cols.get(rec, 2), "var_y")?;
            let n = count(cols.get(rec, 3), "n")?;
            OneArmStudy::new(y, var_y, n)
        };
        studies.push(parse().map_err(|e| e.at_row(i + 1))?);
        labels.push(cols.get(rec, 0).to_string());
    }
    Ok(OneArmTable { labels, studies })
}

pub fn read_two_arm(bytes: &[u8]) -> Result<TwoArmTable> {
    let (cols, rows) = records(bytes, TWO_ARM_HEADER)?;
    let mut labels = Vec::with_capacity(rows.len());
    let mut studies = Vec::with_capacity(rows.len());
    for (i, rec) in rows.iter().enumerate() {
        let parse = || -> Result<TwoArmStudy> {
            TwoArmStudy::new(
                real(cols.get(rec, 1), "y_t")?,
                real(cols.get(rec, 3), "se_t")?,
                count(cols.get(rec, 2), "n_t")?,
                real(cols.get(rec, 4), "y_c")?,
                real(cols.get(rec, 6), "se_c")?,
                count(cols.get(rec, 5), "n_c")?,
            )
        };
        studies.push(parse().map_err(|e| e.at_row(i + 1))?);
        labels.push(cols.get(rec, 0).to_string());
    }
    Ok(TwoArmTable { labels, studies })
}

/// Parses a one-arm table and validates it as a dataset of means.
pub fn parse_one_arm_csv(path: &Path) -> Result<MetaDataset> {
    read_one_arm(&InputFile::load(path)?.bytes)?.dataset()
}

pub fn parse_two_arm_csv(path: &Path) -> Result<Vec<TwoArmStudy>> {
    Ok(read_two_arm(&InputFile::load(path)?.bytes)?.studies)
}
