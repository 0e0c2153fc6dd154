//! HfTable TSV: `order  k  h  f  provenance`.
//!
//! The provenance column is `default`, or `estimated;B=…;n_sample=…;seed=…`
//! (`fallback;…` for k values estimation could not fill). Reals are written in
//! shortest round-trip form, so a table reads back bit-identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use wtest_core::{EntrySource, HfEntry, HfTable, Order, Provenance};

use crate::error::{Error, Result};

pub const HEADER: &str = "order\tk\th\tf\tprovenance";

pub fn format_hf(table: &HfTable) -> String {
    let params = match table.provenance() {
        Provenance::Default => String::new(),
        Provenance::Estimated { replicates, n_sample, seed } => {
            format!(";B={replicates};n_sample={n_sample};seed={seed}")
        }
    };
    let mut out = String::from(HEADER);
    out.push('\n');
    for (k, e) in table.entries() {
        let tag = match e.source {
            EntrySource::Default => "default".to_string(),
            EntrySource::Estimated => format!("estimated{params}"),
            EntrySource::Fallback => format!("fallback{params}"),
        };
        writeln!(out, "{}\t{k}\t{}\t{}\t{tag}", table.order().number(), e.h, e.f).unwrap();
    }
    out
}

pub fn write_hf(table: &HfTable, path: &Path) -> Result<()> {
    fs::write(path, format_hf(table)).map_err(|e| Error::io(path, e))
}

pub fn read_hf(path: &Path) -> Result<HfTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_hf(&text).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn parse_provenance(tag: &str, lineno: usize) -> Result<(EntrySource, Option<Provenance>)> {
    let bad = || Error::Format(format!("line {lineno}: bad provenance {tag:?}"));
    let mut parts = tag.split(';');
    let source = match parts.next() {
        Some("default") => EntrySource::Default,
        Some("estimated") => EntrySource::Estimated,
        Some("fallback") => EntrySource::Fallback,
        _ => return Err(bad()),
    };
    let mut fields = BTreeMap::new();
    for p in parts {
        let (key, value) = p.split_once('=').ok_or_else(bad)?;
        fields.insert(key, value.parse::<u64>().map_err(|_| bad())?);
    }
    let provenance = match (fields.get("B"), fields.get("n_sample"), fields.get("seed")) {
        (Some(&replicates), Some(&n_sample), Some(&seed)) => {
            Some(Provenance::Estimated { replicates, n_sample, seed })
        }
        (None, None, None) => None,
        _ => return Err(bad()),
    };
    Ok((source, provenance))
}

pub fn parse_hf(text: &str) -> Result<HfTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(Error::Format(format!("line 1: expected header {HEADER:?}"))),
    }
    let mut order = None;
    let mut provenance = Provenance::Default;
    let mut entries = BTreeMap::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::Format(format!("line {lineno}: expected 5 fields, found {}", fields.len())));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Format(format!("line {lineno}: bad {what} {s:?}")))
        };
        let row_order = fields[0]
            .parse::<u8>()
            .ok()
            .and_then(Order::from_number)
            .ok_or_else(|| Error::Format(format!("line {lineno}: order must be 1 or 2")))?;
        if *order.get_or_insert(row_order) != row_order {
            return Err(Error::Format(format!("line {lineno}: mixed orders in one table")));
        }
        let k: usize =
            fields[1].parse().map_err(|_| Error::Format(format!("line {lineno}: bad k {:?}", fields[1])))?;
        let (h, f) = (num(fields[2], "h")?, num(fields[3], "f")?);
        let (source, prov) = parse_provenance(fields[4], lineno)?;
        if let Some(p) = prov {
            provenance = p;
        }
        if entries.insert(k, HfEntry { h, f, source }).is_some() {
            return Err(Error::Format(format!("line {lineno}: duplicate k = {k}")));
        }
    }
    let order = order.ok_or_else(|| Error::Format("h/f table has no rows".into()))?;
    HfTable::from_entries(order, entries, provenance).map_err(|e| Error::Format(e.to_string()))
}
