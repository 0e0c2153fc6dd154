//! Delimited text genotype files.
//!
//! One header row of column names, then one row per subject. The delimiter is
//! a tab if the header contains one, otherwise a comma. Genotype cells are
//! `0`, `1`, `2` or the missing token. The phenotype is either a named column
//! of the same file or a separate file with one `0`/`1` per line.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use wtest_core::{GenotypeDataset, MISSING};

use crate::error::{Error, Result};

/// Default name of the phenotype column.
pub const PHENOTYPE_COLUMN: &str = "phenotype";
pub const DEFAULT_MISSING: &str = "NA";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhenotypeSource {
    Column(String),
    File(PathBuf),
}

impl Default for PhenotypeSource {
    fn default() -> Self {
        PhenotypeSource::Column(PHENOTYPE_COLUMN.into())
    }
}

pub fn load_text(path: &Path, phenotype: &PhenotypeSource, missing_token: &str) -> Result<GenotypeDataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let external = match phenotype {
        PhenotypeSource::File(p) => Some(read_phenotype_file(p)?),
        PhenotypeSource::Column(_) => None,
    };
    let column = match phenotype {
        PhenotypeSource::Column(name) => Some(name.as_str()),
        PhenotypeSource::File(_) => None,
    };
    parse_text(BufReader::new(file), column, external, missing_token)
        .map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub fn read_phenotype_file(path: &Path) -> Result<Vec<u8>> {
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(parse_phenotype(t).ok_or_else(|| {
            Error::Format(format!("{}: line {}: phenotype {t:?} is not 0 or 1", path.display(), i + 1))
        })?);
    }
    Ok(out)
}

fn parse_phenotype(token: &str) -> Option<u8> {
    match token {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

/// Parses a text genotype table. `phenotype_column` names the phenotype
/// column; otherwise `external` supplies the phenotype in subject order.
pub fn parse_text<R: BufRead>(
    reader: R,
    phenotype_column: Option<&str>,
    external: Option<Vec<u8>>,
    missing_token: &str,
) -> Result<GenotypeDataset> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(|e| Error::Format(format!("unreadable header: {e}")))?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::Format("empty genotype file".into())),
        }
    };
    let delim = if header.contains('\t') { '\t' } else { ',' };
    let names: Vec<&str> = header.split(delim).map(str::trim).collect();
    let pheno_idx = match phenotype_column {
        Some(col) => Some(
            names
                .iter()
                .position(|n| *n == col)
                .ok_or_else(|| Error::Format(format!("line 1: no phenotype column named {col:?}")))?,
        ),
        None => None,
    };
    let marker_cols: Vec<usize> = (0..names.len()).filter(|&i| Some(i) != pheno_idx).collect();
    let mut columns: Vec<Vec<u8>> = vec![Vec::new(); marker_cols.len()];
    let mut phenotype = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Format(format!("line {lineno}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(delim).map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(Error::Format(format!(
                "line {lineno}: expected {} fields, found {}",
                names.len(),
                fields.len()
            )));
        }
        if let Some(p) = pheno_idx {
            phenotype.push(parse_phenotype(fields[p]).ok_or_else(|| {
                Error::Format(format!("line {lineno}: phenotype {:?} is not 0 or 1", fields[p]))
            })?);
        }
        for (slot, &c) in marker_cols.iter().enumerate() {
            let code = match fields[c] {
                "0" => 0,
                "1" => 1,
                "2" => 2,
                t if t == missing_token => MISSING,
                t => {
                    return Err(Error::Format(format!(
                        "line {lineno}, column {:?}: unknown genotype token {t:?}",
                        names[c]
                    )))
                }
            };
            columns[slot].push(code);
        }
    }
    if let Some(ext) = external {
        let n = columns.first().map_or(0, Vec::len);
        if ext.len() != n {
            return Err(Error::Format(format!(
                "phenotype file has {} values for {} subjects",
                ext.len(),
                n
            )));
        }
        phenotype = ext;
    }
    let marker_names = marker_cols.iter().map(|&c| names[c].to_string()).collect();
    Ok(GenotypeDataset::new(marker_names, columns, phenotype)?)
}

/// Writes the dataset as a tab-separated file with a trailing phenotype column.
pub fn write_text(dataset: &GenotypeDataset, path: &Path, missing_token: &str) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_text_to(dataset, &mut w, missing_token).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_text_to<W: Write>(dataset: &GenotypeDataset, w: &mut W, missing_token: &str) -> std::io::Result<()> {
    let mut header: Vec<&str> = dataset.marker_names().iter().map(String::as_str).collect();
    header.push(PHENOTYPE_COLUMN);
    writeln!(w, "{}", header.join("\t"))?;
    let mut row = String::new();
    for s in 0..dataset.n_subjects() {
        row.clear();
        for m in 0..dataset.n_markers() {
            match dataset.genotype(s, m) {
                MISSING => row.push_str(missing_token),
                g => row.push(char::from(b'0' + g)),
            }
            row.push('\t');
        }
        row.push(char::from(b'0' + dataset.phenotype()[s]));
        writeln!(w, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<GenotypeDataset> {
        parse_text(Cursor::new(text), Some(PHENOTYPE_COLUMN), None, DEFAULT_MISSING)
    }

    #[test]
    fn smallest_valid_file() {
        let d = parse("a,phenotype\n0,1\n2,0\n").unwrap();
        assert_eq!(d.n_subjects(), 2);
        assert_eq!((d.n_cases(), d.n_controls()), (1, 1));
        assert_eq!(d.column(0), &[0, 2]);
    }

    #[test]
    fn tab_delimited_with_missing() {
        let d = parse("x\tphenotype\ty\n0\t1\tNA\n1\t0\t2\n").unwrap();
        assert_eq!(d.marker_names(), &["x".to_string(), "y".to_string()]);
        assert_eq!(d.column(1), &[MISSING, 2]);
    }

    #[test]
    fn all_case_phenotype_rejected() {
        let err = parse("a,phenotype\n0,1\n2,1\n").unwrap_err();
        assert!(matches!(err, Error::Core(wtest_core::Error::Validation(_))));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = parse("a,b,phenotype\n0,1,1\n0,1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_token_rejected() {
        let err = parse("a,phenotype\n0,1\n3,0\n").unwrap_err();
        assert!(err.to_string().contains("unknown genotype token"));
        let err = parse("a,phenotype\n0,1\n1,2\n").unwrap_err();
        assert!(err.to_string().contains("not 0 or 1"));
    }

    #[test]
    fn external_phenotype() {
        let d = parse_text(Cursor::new("a,b\n0,1\n1,1\n2,0\n"), None, Some(vec![1, 0, 0]), "NA").unwrap();
        assert_eq!(d.n_markers(), 2);
        assert_eq!(d.phenotype(), &[1, 0, 0]);
        assert!(parse_text(Cursor::new("a\n0\n1\n"), None, Some(vec![1]), "NA").is_err());
    }

    #[test]
    fn write_then_parse() {
        let d = parse("A,B,phenotype\n0,2,1\n0,2,1\n1,1,1\n2,0,1\n0,0,0\n1,NA,0\n1,1,0\n2,1,0\n").unwrap();
        let mut buf = Vec::new();
        write_text_to(&d, &mut buf, "NA").unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), d);
    }
}
