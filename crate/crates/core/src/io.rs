//! Table files and record emission.
//!
//! A table file is JSON:
//!
//! ```text
//! {"n": 2, "labels": ["a", "b"], "entries": [
//!   {"mask": 0, "value": 0.0},
//!   ...
//! ]}
//! ```
//!
//! or a `mask,value` CSV next to a sidecar `<stem>.header.json` holding
//! `{"n": .., "labels": [..]}`. Loading checks that all `2^n` masks are present.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{InteractionTable, PlayerSet, ValueTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub n: usize,
    #[serde(default)]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub mask: u64,
    pub value: f64,
}

#[derive(Debug, Deserialize)]
struct TableFile {
    n: usize,
    #[serde(default)]
    labels: Vec<String>,
    entries: Vec<TableEntry>,
}

/// A validated table as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTable {
    pub header: TableHeader,
    pub data: Vec<f64>,
}

impl LoadedTable {
    fn from_parts(header: TableHeader, entries: Vec<TableEntry>) -> Result<Self> {
        if !header.labels.is_empty() && header.labels.len() != header.n {
            return Err(Error::Format(format!(
                "{} labels for n = {}",
                header.labels.len(),
                header.n
            )));
        }
        let table =
            ValueTable::from_entries(header.n, entries.into_iter().map(|e| (e.mask, e.value)))?;
        Ok(Self {
            header,
            data: table.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.header.n
    }

    /// Labelled players, or `x1..xn` when the file carries no labels.
    pub fn players(&self) -> Result<PlayerSet> {
        if self.header.labels.is_empty() {
            PlayerSet::anonymous(self.header.n)
        } else {
            PlayerSet::new(self.header.labels.clone())
        }
    }

    pub fn values(&self) -> Result<ValueTable> {
        ValueTable::new(self.header.n, self.data.clone())
    }

    pub fn interactions(&self) -> Result<InteractionTable> {
        InteractionTable::new(self.header.n, self.data.clone())
    }
}

/// Output format for tables and records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!("unknown format {other:?}"))),
        }
    }
}

/// `values.csv` -> `values.header.json`
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("header.json")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("create {}", path.display()), e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(format!("open {}", path.display()), e))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Format(e.to_string())
}

/// Writes a table in the JSON layout, one entry per line.
pub fn write_table_json<W: Write>(mut w: W, labels: &[String], data: &[f64]) -> Result<()> {
    let n = data.len().trailing_zeros() as usize;
    if data.len() != 1 << n {
        return Err(Error::invalid(format!(
            "{} entries is not a power of two",
            data.len()
        )));
    }
    let io = |e| Error::io("write table", e);
    write!(w, "{{\"n\":{n},\"labels\":").map_err(io)?;
    serde_json::to_writer(&mut w, labels).map_err(json_err)?;
    w.write_all(b",\"entries\":[").map_err(io)?;
    for (mask, &value) in data.iter().enumerate() {
        let sep = if mask == 0 { "\n" } else { ",\n" };
        w.write_all(sep.as_bytes()).map_err(io)?;
        serde_json::to_writer(
            &mut w,
            &TableEntry {
                mask: mask as u64,
                value,
            },
        )
        .map_err(json_err)?;
    }
    w.write_all(b"\n]}\n").map_err(io)?;
    w.flush().map_err(io)
}

pub fn read_table_json<R: Read>(r: R) -> Result<LoadedTable> {
    let file: TableFile = serde_json::from_reader(r).map_err(json_err)?;
    LoadedTable::from_parts(
        TableHeader {
            n: file.n,
            labels: file.labels,
        },
        file.entries,
    )
}

pub fn write_table_csv<W: Write>(w: W, data: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (mask, &value) in data.iter().enumerate() {
        out.serialize(TableEntry {
            mask: mask as u64,
            value,
        })
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    out.flush().map_err(|e| Error::io("write table", e))
}

pub fn read_table_csv<R: Read>(r: R, header: TableHeader) -> Result<LoadedTable> {
    let mut rdr = csv::Reader::from_reader(r);
    let entries = rdr
        .deserialize::<TableEntry>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Format(e.to_string()))?;
    LoadedTable::from_parts(header, entries)
}

/// Saves a table; `.csv` paths also get the sidecar header.
pub fn save_table(path: &Path, labels: &[String], data: &[f64]) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        let header = TableHeader {
            n: data.len().trailing_zeros() as usize,
            labels: labels.to_vec(),
        };
        write_table_csv(create(path)?, data)?;
        let mut side = create(&sidecar_path(path))?;
        serde_json::to_writer(&mut side, &header).map_err(json_err)?;
        side.write_all(b"\n")
            .and_then(|_| side.flush())
            .map_err(|e| Error::io("write header", e))
    } else {
        write_table_json(create(path)?, labels, data)
    }
}

/// Loads a table, dispatching on the `.csv` extension.
pub fn load_table(path: &Path) -> Result<LoadedTable> {
    if path.extension().is_some_and(|e| e == "csv") {
        let side = sidecar_path(path);
        let header: TableHeader = serde_json::from_reader(open(&side)?).map_err(json_err)?;
        read_table_csv(open(path)?, header)
    } else {
        read_table_json(open(path)?)
    }
}

/// Writes flat records as CSV (header row) or as a pretty JSON array.
pub fn write_records<T: Serialize>(path: &Path, format: Format, records: &[T]) -> Result<()> {
    let mut w = create(path)?;
    match format {
        Format::Csv => {
            let mut out = csv::Writer::from_writer(&mut w);
            for r in records {
                out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
            }
            out.flush().map_err(|e| Error::io("write records", e))?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, records).map_err(json_err)?;
            w.write_all(b"\n")
                .map_err(|e| Error::io("write records", e))?;
        }
    }
    w.flush().map_err(|e| Error::io("write records", e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(json_err)?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(format!("write {}", path.display()), e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(json_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        write_table_json(&mut buf, &["a".into(), "b".into()], &[0.0, 1.0, 2.0, 5.5]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "{\"n\":2,\"labels\":[\"a\",\"b\"],\"entries\":[\n{\"mask\":0,\"value\":0.0},\n\
             {\"mask\":1,\"value\":1.0},\n{\"mask\":2,\"value\":2.0},\n{\"mask\":3,\"value\":5.5}\n]}\n"
        );
        let back = read_table_json(buf.as_slice()).unwrap();
        assert_eq!(back.data, vec![0.0, 1.0, 2.0, 5.5]);
        assert_eq!(back.players().unwrap().labels(), &["a", "b"]);
    }

    #[test]
    fn incomplete_and_inconsistent_files_are_rejected() {
        let missing = r#"{"n":2,"labels":[],"entries":[{"mask":0,"value":1},{"mask":1,"value":1},{"mask":3,"value":1}]}"#;
        assert!(matches!(
            read_table_json(missing.as_bytes()),
            Err(Error::IncompleteTable { found: 3, .. })
        ));
        let out_of_range = r#"{"n":1,"entries":[{"mask":0,"value":1},{"mask":2,"value":1}]}"#;
        assert!(matches!(
            read_table_json(out_of_range.as_bytes()),
            Err(Error::MaskOutOfRange { mask: 2, n: 1 })
        ));
        let labels =
            r#"{"n":1,"labels":["a","b"],"entries":[{"mask":0,"value":1},{"mask":1,"value":1}]}"#;
        assert!(matches!(
            read_table_json(labels.as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(read_table_json(&b"{"[..]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_with_sidecar_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("values.csv");
        let labels = vec!["x".to_string()];
        save_table(&path, &labels, &[0.25, -3.0]).unwrap();
        assert!(dir.path().join("values.header.json").exists());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "mask,value\n0,0.25\n1,-3.0\n");
        let back = load_table(&path).unwrap();
        assert_eq!(back.header, TableHeader { n: 1, labels });
        assert_eq!(back.data, vec![0.25, -3.0]);
    }

    #[test]
    fn csv_rows_may_come_in_any_order() {
        let header = TableHeader {
            n: 1,
            labels: vec![],
        };
        let t = read_table_csv("mask,value\n1,2.5\n0,1\n".as_bytes(), header).unwrap();
        assert_eq!(t.data, vec![1.0, 2.5]);
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(
            data in (0usize..7).prop_flat_map(|n| prop::collection::vec(-1e6..1e6f64, 1 << n)),
        ) {
            let mut buf = Vec::new();
            write_table_json(&mut buf, &[], &data).unwrap();
            prop_assert_eq!(read_table_json(buf.as_slice()).unwrap().data, data);
        }
    }
}
