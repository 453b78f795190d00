//! CSV and JSON persistence. Every CSV starts with a `#` comment line
//! carrying the artifact version and config hash; floats are written in
//! shortest round-trip form and missing values as empty fields.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::bbob::ProblemInstance;
use crate::config::{ExperimentConfig, VERSION};
use crate::error::{Error, Result};
use crate::experiments::{Confusion, EvaluationReport, ImportanceRow};
use crate::features::RunKey;
use crate::optimizers::{Algorithm, PopulationSnapshot, RunSpec, Trajectory};
use crate::table::FeatureTable;

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:?}")
    }
}

pub fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| malformed(path, format!("not a number: {s:?}")))
}

fn malformed(path: &Path, message: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Write through a temporary sibling and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV document buffered in memory with the comment header already written.
pub struct CsvDoc {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvDoc {
    pub fn new(header_line: &str, columns: &[String]) -> Result<Self> {
        let mut buf = Vec::new();
        writeln!(buf, "{header_line}")?;
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(columns)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> Result<Vec<u8>> {
        self.writer
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))
    }

    pub fn save(self, path: &Path) -> Result<()> {
        write_atomic(path, &self.into_bytes()?)
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?)
}

/// The leading comment line of a file, if any.
pub fn read_header_line(path: &Path) -> Result<Option<String>> {
    let mut line = String::new();
    BufReader::new(fs::File::open(path)?).read_line(&mut line)?;
    let line = line.trim_end();
    Ok(line.starts_with('#').then(|| line.to_string()))
}

fn key_columns() -> Vec<String> {
    ["algorithm", "problem_id", "instance_id", "seed"]
        .map(String::from)
        .to_vec()
}

fn key_fields(key: &RunKey) -> [String; 4] {
    [
        key.algorithm.to_string(),
        key.problem_id.to_string(),
        key.instance_id.to_string(),
        key.seed.to_string(),
    ]
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str, path: &Path) -> Result<T> {
    s.parse()
        .map_err(|_| malformed(path, format!("bad {what} {s:?}")))
}

fn parse_key(record: &csv::StringRecord, path: &Path) -> Result<RunKey> {
    Ok(RunKey {
        algorithm: record[0].parse::<Algorithm>().map_err(|e| malformed(path, e.to_string()))?,
        problem_id: parse_field(&record[1], "problem_id", path)?,
        instance_id: parse_field(&record[2], "instance_id", path)?,
        seed: parse_field(&record[3], "seed", path)?,
    })
}

// ---------------------------------------------------------------- trajectories

pub fn trajectory_path(root: &Path, key: &RunKey) -> PathBuf {
    root.join("trajectories").join(key.algorithm.as_str()).join(format!(
        "f{:02}_i{:04}_s{}.csv",
        key.problem_id, key.instance_id, key.seed
    ))
}

pub fn trajectory_csv(trajectory: &Trajectory, header_line: &str) -> Result<Vec<u8>> {
    let spec = &trajectory.spec;
    let d = spec.dimension;
    let mut columns = key_columns();
    columns.extend(["iteration", "individual"].map(String::from));
    columns.extend((0..d).map(|i| format!("x{i}")));
    columns.push("y".into());
    let mut doc = CsvDoc::new(header_line, &columns)?;
    let key = key_fields(&RunKey::from(spec));
    for snap in &trajectory.snapshots {
        for (i, (row, &y)) in snap.rows().zip(&snap.fitness).enumerate() {
            let mut fields: Vec<String> = key.to_vec();
            fields.push(snap.iteration.to_string());
            fields.push(i.to_string());
            fields.extend(row.iter().map(|&v| format_f64(v)));
            fields.push(format_f64(y));
            doc.row(&fields)?;
        }
    }
    doc.into_bytes()
}

pub fn write_trajectory(path: &Path, trajectory: &Trajectory, header_line: &str) -> Result<()> {
    write_atomic(path, &trajectory_csv(trajectory, header_line)?)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() < 8 || &headers[headers.len() - 1] != "y" {
        return Err(malformed(path, "unexpected trajectory header"));
    }
    let d = headers.len() - 7;
    let mut key = None;
    let mut snapshots: Vec<PopulationSnapshot> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let k = parse_key(&record, path)?;
        if *key.get_or_insert(k) != k {
            return Err(malformed(path, "rows from more than one run"));
        }
        let t: usize = parse_field(&record[4], "iteration", path)?;
        if snapshots.last().map(|s| s.iteration) != Some(t) {
            if t != snapshots.len() {
                return Err(malformed(path, format!("iteration {t} out of order")));
            }
            snapshots.push(PopulationSnapshot {
                iteration: t,
                dimension: d,
                points: Vec::new(),
                fitness: Vec::new(),
            });
        }
        let snap = snapshots.last_mut().expect("pushed above");
        for j in 0..d {
            snap.points.push(parse_f64(&record[6 + j], path)?);
        }
        snap.fitness.push(parse_f64(&record[6 + d], path)?);
    }
    let key = key.ok_or_else(|| malformed(path, "no rows"))?;
    let lambda = snapshots[0].len();
    if snapshots.iter().any(|s| s.len() != lambda) {
        return Err(malformed(path, "iterations differ in population size"));
    }
    Ok(Trajectory {
        spec: RunSpec {
            algorithm: key.algorithm,
            problem_id: key.problem_id,
            instance_id: key.instance_id,
            seed: key.seed,
            population_size: lambda,
            iterations: snapshots.len(),
            dimension: d,
        },
        snapshots,
    })
}

/// True when `path` holds a finished trajectory written under the same
/// config: matching header line and exactly `expected_rows` data rows.
pub fn trajectory_complete(path: &Path, header_line: &str, expected_rows: usize) -> bool {
    let Ok(Some(line)) = read_header_line(path) else {
        return false;
    };
    if line != header_line {
        return false;
    }
    let Ok(mut rdr) = reader(path) else {
        return false;
    };
    let mut rows = 0;
    for record in rdr.records() {
        if record.is_err() {
            return false;
        }
        rows += 1;
    }
    rows == expected_rows
}

// ---------------------------------------------------------------- feature tables

pub fn write_table(path: &Path, table: &FeatureTable, header_line: &str) -> Result<()> {
    let mut columns = key_columns();
    columns.extend(table.names.iter().cloned());
    let mut doc = CsvDoc::new(header_line, &columns)?;
    for i in 0..table.n_rows() {
        let mut fields: Vec<String> = key_fields(&table.keys[i]).to_vec();
        fields.extend(table.row(i).iter().map(|&v| format_f64(v)));
        doc.row(&fields)?;
    }
    doc.save(path)
}

pub fn read_table(path: &Path) -> Result<FeatureTable> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() < 5 || headers.iter().take(4).ne(key_columns().iter().map(String::as_str)) {
        return Err(malformed(path, "unexpected feature table header"));
    }
    let mut table = FeatureTable::new(headers.iter().skip(4).map(String::from).collect());
    let mut row = Vec::with_capacity(table.n_cols());
    for record in rdr.records() {
        let record = record?;
        row.clear();
        for field in record.iter().skip(4) {
            row.push(parse_f64(field, path)?);
        }
        table.push(parse_key(&record, path)?, &row)?;
    }
    Ok(table)
}

// ---------------------------------------------------------------- instances

pub fn write_instances<'a>(
    path: &Path,
    instances: impl IntoIterator<Item = &'a ProblemInstance>,
    dimension: usize,
    header_line: &str,
) -> Result<()> {
    let mut columns: Vec<String> = ["problem_id", "instance_id", "dimension", "f_opt"]
        .map(String::from)
        .to_vec();
    columns.extend((0..dimension).map(|i| format!("x_opt_{i}")));
    let mut doc = CsvDoc::new(header_line, &columns)?;
    for inst in instances {
        let mut fields = vec![
            inst.problem_id.to_string(),
            inst.instance_id.to_string(),
            inst.dimension.to_string(),
            format_f64(inst.f_opt),
        ];
        fields.extend(inst.x_opt.iter().map(|&v| format_f64(v)));
        doc.row(&fields)?;
    }
    doc.save(path)
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub config: String,
}

impl Meta {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            version: VERSION.to_string(),
            config: config.hash(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub meta: Meta,
    #[serde(flatten)]
    pub report: EvaluationReport,
}

pub fn write_report(path: &Path, report: &EvaluationReport, meta: &Meta) -> Result<()> {
    let file = ReportFile {
        meta: meta.clone(),
        report: report.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&file)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_report(path: &Path) -> Result<ReportFile> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e.to_string()))
}

/// Deserialize `null` (how JSON stores NaN) back into NaN.
pub(crate) fn nan_from_null<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// 24x24 matrix with row labels; rows are true classes, columns predictions.
pub fn write_confusion(path: &Path, confusion: &Confusion, header_line: &str) -> Result<()> {
    let n = confusion.counts.len();
    let mut columns = vec!["true".to_string()];
    columns.extend((1..=n).map(|c| c.to_string()));
    let mut doc = CsvDoc::new(header_line, &columns)?;
    for (i, row) in confusion.counts.iter().enumerate() {
        let mut fields = vec![(i + 1).to_string()];
        fields.extend(row.iter().map(u64::to_string));
        doc.row(&fields)?;
    }
    doc.save(path)
}

pub fn write_importances(path: &Path, rows: &[ImportanceRow], header_line: &str) -> Result<()> {
    let columns = ["rank", "feature", "median", "q25", "q75"].map(String::from);
    let mut doc = CsvDoc::new(header_line, &columns)?;
    for (r, row) in rows.iter().enumerate() {
        doc.row([
            (r + 1).to_string(),
            row.feature.clone(),
            format_f64(row.median),
            format_f64(row.q25),
            format_f64(row.q75),
        ])?;
    }
    doc.save(path)
}
