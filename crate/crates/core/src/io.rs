//! Dataset files and plain-text table output.
//!
//! CSV datasets have a `population,value` header and one observation per
//! row; rows of a population must be contiguous. JSON datasets look like
//! `{"schema": "mpme/1", "populations": [{"id": "p1", "values": [..]}]}`,
//! with `schema` and `metadata` optional on input.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::PopulationSample;

pub const SCHEMA: &str = "mpme/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Json,
}

impl DatasetFormat {
    /// Picks the format from the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => DatasetFormat::Json,
            _ => DatasetFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetFile {
    pub populations: Vec<PopulationSample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, String>>,
}

impl DatasetFile {
    pub fn new(populations: Vec<PopulationSample>) -> Self {
        Self {
            populations,
            metadata: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.populations.is_empty() {
            return Err(Error::Empty("dataset has no populations"));
        }
        let mut seen = HashSet::new();
        for p in &self.populations {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::DuplicatePopulation(p.id.clone()));
            }
            p.validate()?;
            if p.values.len() < 2 {
                return Err(Error::InsufficientSample {
                    population: p.id.clone(),
                    count: p.values.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct JsonDataset {
    schema: Option<String>,
    #[serde(flatten)]
    data: DatasetFile,
}

#[derive(Serialize)]
struct JsonDatasetOut<'a> {
    schema: &'static str,
    #[serde(flatten)]
    data: &'a DatasetFile,
}

fn parse_error(path: &Path, message: impl ToString) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<DatasetFile> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let data = match format {
        DatasetFormat::Csv => read_csv(BufReader::new(file), path)?,
        DatasetFormat::Json => {
            let raw: JsonDataset =
                serde_json::from_reader(BufReader::new(file)).map_err(|e| parse_error(path, e))?;
            if let Some(s) = raw.schema.as_deref().filter(|s| *s != SCHEMA) {
                return Err(parse_error(
                    path,
                    format!("unsupported schema `{s}`, expected `{SCHEMA}`"),
                ));
            }
            raw.data
        }
    };
    data.validate()?;
    Ok(data)
}

fn read_csv<R: std::io::Read>(reader: R, path: &Path) -> Result<DatasetFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_error(path, e))?.clone();
    if headers.len() != 2 || &headers[0] != "population" || &headers[1] != "value" {
        return Err(parse_error(path, "expected header `population,value`"));
    }
    let mut populations: Vec<PopulationSample> = Vec::new();
    let mut closed = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::InvalidRecord {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let id = &record[0];
        let value: f64 = record[1].parse().map_err(|_| Error::InvalidRecord {
            line,
            message: format!("`{}` is not a number", &record[1]),
        })?;
        if !value.is_finite() {
            return Err(Error::InvalidRecord {
                line,
                message: format!("non-finite value `{}`", &record[1]),
            });
        }
        match populations.last_mut() {
            Some(p) if p.id == id => p.values.push(value),
            _ => {
                if closed.contains(id) {
                    return Err(Error::DuplicatePopulation(id.to_string()));
                }
                if let Some(prev) = populations.last() {
                    closed.insert(prev.id.clone());
                }
                populations.push(PopulationSample {
                    id: id.to_string(),
                    values: vec![value],
                });
            }
        }
    }
    Ok(DatasetFile::new(populations))
}

pub fn write_dataset(path: &Path, data: &DatasetFile, format: DatasetFormat) -> Result<()> {
    data.validate()?;
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    match format {
        DatasetFormat::Csv => {
            writeln!(out, "population,value")?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for p in &data.populations {
                for v in &p.values {
                    // `Display` for f64 is the shortest string that parses back exactly.
                    w.write_record([p.id.as_str(), &v.to_string()])
                        .map_err(|e| Error::Io(e.to_string()))?;
                }
            }
            out.write_all(&w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
        }
        DatasetFormat::Json => {
            write_json(
                &mut out,
                &JsonDatasetOut {
                    schema: SCHEMA,
                    data,
                },
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn path_with(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn csv_two_populations() {
        let dir = tempfile::tempdir().unwrap();
        let p = path_with(
            &dir,
            "d.csv",
            "population,value\np1,1.0\np1,2.0\np2,3.0\np2,4.0\n",
        );
        let d = load_dataset(&p, DatasetFormat::Csv).unwrap();
        assert_eq!(d.populations.len(), 2);
        assert_eq!(d.populations[1].values, vec![3.0, 4.0]);
    }

    #[test]
    fn json_single_population() {
        let dir = tempfile::tempdir().unwrap();
        let p = path_with(
            &dir,
            "d.json",
            r#"{"populations":[{"id":"p1","values":[1,2]}]}"#,
        );
        let d = load_dataset(&p, DatasetFormat::from_path(&p)).unwrap();
        assert_eq!(d.populations.len(), 1);
        let bad = path_with(&dir, "e.json", r#"{"schema":"mpme/2","populations":[]}"#);
        assert!(matches!(
            load_dataset(&bad, DatasetFormat::Json),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn csv_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = path_with(&dir, "a.csv", "population,value\np1,1.0\np1,abc\n");
        let e = load_dataset(&p, DatasetFormat::Csv).unwrap_err();
        assert_eq!(
            e,
            Error::InvalidRecord {
                line: 3,
                message: String::from("`abc` is not a number")
            }
        );
        assert!(e.to_string().starts_with("invalid datum at line 3"));

        let p = path_with(
            &dir,
            "b.csv",
            "population,value\np1,1\np1,2\np2,3\np2,4\np1,5\n",
        );
        assert_eq!(
            load_dataset(&p, DatasetFormat::Csv),
            Err(Error::DuplicatePopulation(String::from("p1")))
        );

        let p = path_with(&dir, "c.csv", "population,value\np1,1\np1,2\nlonely,3\n");
        match load_dataset(&p, DatasetFormat::Csv) {
            Err(Error::InsufficientSample { population, count }) => {
                assert_eq!((population.as_str(), count), ("lonely", 1))
            }
            other => panic!("{other:?}"),
        }

        let p = path_with(&dir, "d.csv", "id,x\np1,1\n");
        assert!(matches!(
            load_dataset(&p, DatasetFormat::Csv),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn round_trip_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let mut data = DatasetFile::new(vec![
            PopulationSample::new("a", vec![0.1, 1.0 / 3.0, -2.5e-300]).unwrap(),
            PopulationSample::new("b,c", vec![1e17, 2.0]).unwrap(),
        ]);
        for (name, format) in [
            ("r.csv", DatasetFormat::Csv),
            ("r.json", DatasetFormat::Json),
        ] {
            let p = dir.path().join(name);
            if format == DatasetFormat::Json {
                data.metadata = Some(BTreeMap::from([(
                    String::from("units"),
                    String::from("ps"),
                )]));
            }
            write_dataset(&p, &data, format).unwrap();
            assert_eq!(load_dataset(&p, format).unwrap(), data);
        }
    }
}
