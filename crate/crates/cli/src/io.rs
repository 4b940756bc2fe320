//! Prediction tables as CSV: a header `y[,yhat],o1,...,oN`, then one row of
//! non-negative integer labels per instance.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use ensemble_info::{Label, PredictionTable};

/// Raw CSV contents before the label space is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub truth: Vec<Label>,
    pub combined: Option<Vec<Label>>,
    pub models: Vec<Vec<Label>>,
}

impl RawTable {
    /// Builds the table with `classes` labels, or `1 + max(y)` if absent.
    pub fn into_table(self, classes: Option<u32>) -> Result<PredictionTable> {
        let inferred = self.truth.iter().max().map_or(1, |&m| m + 1);
        let ymax = classes.unwrap_or(inferred);
        if let Some(bad) = self
            .models
            .iter()
            .flatten()
            .chain(self.combined.iter().flatten())
            .find(|&&l| l >= ymax)
        {
            bail!("label {bad} is outside the {ymax} classes (pass --classes to widen)");
        }
        Ok(PredictionTable::new(self.models, self.truth, self.combined, ymax)?)
    }
}

fn check_header(header: &csv::StringRecord) -> Result<bool> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.first() != Some(&"y") {
        bail!("header must start with `y`");
    }
    let has_combined = names.get(1) == Some(&"yhat");
    let first_model = 1 + has_combined as usize;
    if names.len() <= first_model {
        bail!("header names no model columns");
    }
    for (i, name) in names[first_model..].iter().enumerate() {
        if *name != format!("o{}", i + 1) {
            bail!("expected column `o{}`, found `{name}`", i + 1);
        }
    }
    Ok(has_combined)
}

pub fn read_raw<R: Read>(reader: R) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let has_combined = check_header(rdr.headers()?)?;
    let width = rdr.headers()?.len();
    let n_models = width - 1 - has_combined as usize;
    let mut raw = RawTable {
        truth: Vec::new(),
        combined: has_combined.then(Vec::new),
        models: vec![Vec::new(); n_models],
    };
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let labels = record
            .iter()
            .map(|f| f.parse::<Label>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("row {}: labels must be non-negative integers", line + 1))?;
        let mut it = labels.into_iter();
        raw.truth.push(it.next().unwrap());
        if let Some(c) = raw.combined.as_mut() {
            c.push(it.next().unwrap());
        }
        for col in raw.models.iter_mut() {
            col.push(it.next().unwrap());
        }
    }
    if raw.truth.is_empty() {
        bail!("table has no rows");
    }
    Ok(raw)
}

pub fn read_table(path: &Path, classes: Option<u32>) -> Result<PredictionTable> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_raw(bytes.as_slice())?.into_table(classes)
}

pub fn write_table<W: Write>(table: &PredictionTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["y".to_string()];
    if table.combined().is_some() {
        header.push("yhat".into());
    }
    header.extend((1..=table.n_models()).map(|i| format!("o{i}")));
    w.write_record(&header)?;
    let mut fields = Vec::with_capacity(header.len());
    for j in 0..table.n_instances() {
        fields.clear();
        fields.push(table.truth()[j].to_string());
        if let Some(c) = table.combined() {
            fields.push(c[j].to_string());
        }
        fields.extend(table.row(j).iter().map(u32::to_string));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_combined() {
        let raw = read_raw("y,yhat,o1,o2\n1,1,1,0\n0, 0 ,0,0\n".as_bytes()).unwrap();
        assert_eq!(raw.combined, Some(vec![1, 0]));
        assert_eq!(raw.models, vec![vec![1, 0], vec![0, 0]]);
        let raw = read_raw("y,o1\n2,1\n".as_bytes()).unwrap();
        assert!(raw.combined.is_none());
        assert_eq!(raw.into_table(None).unwrap().ymax(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["x,o1\n0,0\n", "y,o2\n0,0\n", "y,yhat\n0,0\n", "y,o1\n0,-1\n", "y,o1\n0,a\n", "y,o1\n", "y,o1\n0,0,1\n"] {
            assert!(read_raw(bad.as_bytes()).is_err(), "{bad:?}");
        }
        let raw = read_raw("y,o1\n1,2\n".as_bytes()).unwrap();
        assert!(raw.clone().into_table(None).is_err());
        assert!(raw.clone().into_table(Some(2)).is_err());
        assert_eq!(raw.into_table(Some(3)).unwrap().ymax(), 3);
    }

    #[test]
    fn round_trip() {
        let raw = read_raw("y,yhat,o1,o2,o3\n1,1,1,0,1\n0,1,0,1,1\n2,2,2,2,0\n".as_bytes()).unwrap();
        let t = raw.into_table(None).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "y,yhat,o1,o2,o3\n1,1,1,0,1\n0,1,0,1,1\n2,2,2,2,0\n");
        assert_eq!(read_raw(buf.as_slice()).unwrap().into_table(None).unwrap(), t);
    }
}
