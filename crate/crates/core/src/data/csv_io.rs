//! `label,f1,...,fD` CSV files: UTF-8, no quoting, optional single header row.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numkit::Matrix2D;

use super::LabeledDataset;

pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, has_header)
}

pub fn read_csv(reader: impl std::io::Read, has_header: bool) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(reader);

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut dim: Option<usize> = None;

    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(i + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 && has_header {
            continue;
        }
        let mut fields = record.iter();
        let label_field = fields.next().unwrap_or("").trim();
        let label: usize = label_field.parse().map_err(|_| Error::Parse {
            line,
            message: format!("label {label_field:?} is not a non-negative integer"),
        })?;
        let start = data.len();
        for (col, cell) in fields.enumerate() {
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("feature {} value {cell:?} is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("feature {} value {cell:?} is not finite", col + 1),
                });
            }
            data.push(v);
        }
        let row_dim = data.len() - start;
        match dim {
            None if row_dim == 0 => {
                return Err(Error::Parse {
                    line,
                    message: "row has no features".into(),
                })
            }
            None => dim = Some(row_dim),
            Some(d) if d != row_dim => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {d} features, found {row_dim}"),
                })
            }
            _ => {}
        }
        labels.push(label);
    }

    let dim = dim.unwrap_or(0);
    LabeledDataset::new(Matrix2D::from_vec(labels.len(), dim, data)?, labels)
}

pub fn write_csv(dataset: &LabeledDataset, path: impl AsRef<Path>, header: bool) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut wtr = csv::Writer::from_path(path).map_err(io_err)?;
    if header {
        let mut names = vec!["label".to_string()];
        names.extend((1..=dataset.dim()).map(|i| format!("f{i}")));
        wtr.write_record(&names).map_err(io_err)?;
    }
    for (x, y) in dataset.iter() {
        let mut row = Vec::with_capacity(x.len() + 1);
        row.push(y.to_string());
        // `{:?}` prints the shortest representation that parses back exactly.
        row.extend(x.iter().map(|v| format!("{v:?}")));
        wtr.write_record(&row).map_err(io_err)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}
