//! Plain-text ingestion and emission: numeric CSV point clouds, embedding
//! CSV, and long-format demand series. Floats are printed with Rust's
//! shortest round-trip formatting.

use std::io::{BufRead, Write};

use crate::cloud::{Coordinates, Embedding, PointCloud};
use crate::error::{Error, Result};

/// Read a point cloud: one row per point, numeric columns, optional leading
/// `id` column and header (both auto-detected).
pub fn read_points_csv<R: BufRead>(reader: R) -> Result<PointCloud> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    let mut has_id_column: Option<bool> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 {
            // Header detection: a non-numeric field beyond the first, or a
            // literal leading "id". A lone non-numeric first field is a row
            // identifier, not a header.
            let tail_numeric = fields[1..].iter().all(|f| f.parse::<f64>().is_ok());
            let leading_id = fields
                .first()
                .map(|f| f.eq_ignore_ascii_case("id"))
                .unwrap_or(false);
            if !tail_numeric || leading_id {
                has_id_column = Some(leading_id);
                continue;
            }
        }
        let id_col = *has_id_column.get_or_insert_with(|| {
            fields.first().map(|f| f.parse::<f64>().is_err()).unwrap_or(false)
        });
        let (id, values) = if id_col {
            (Some(fields[0].to_string()), &fields[1..])
        } else {
            (None, &fields[..])
        };
        let parsed: Vec<f64> = values
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::Format(format!("line {}: '{f}' is not numeric", lineno + 1))
                })
            })
            .collect::<Result<_>>()?;
        if let Some(id) = id {
            ids.push(id);
        }
        rows.push(parsed);
    }

    if rows.is_empty() {
        return Err(Error::Format("no data rows in CSV".into()));
    }
    let cloud = PointCloud::from_rows(&rows)?;
    if ids.len() == rows.len() {
        cloud.with_ids(ids)
    } else {
        Ok(cloud)
    }
}

/// Write `id,y1..yd` rows for an embedding; ids fall back to row indices.
pub fn write_embedding_csv<W: Write>(
    writer: &mut W,
    emb: &Embedding,
    ids: Option<&[String]>,
) -> Result<()> {
    let header: Vec<String> = std::iter::once("id".to_string())
        .chain((1..=emb.dim()).map(|j| format!("y{j}")))
        .collect();
    writeln!(writer, "{}", header.join(","))?;
    for (i, row) in emb.rows().enumerate() {
        let id = ids.map_or_else(|| i.to_string(), |ids| ids[i].clone());
        let coords: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(writer, "{id},{}", coords.join(","))?;
    }
    Ok(())
}

/// Read an embedding written by [`write_embedding_csv`]; returns the ids
/// alongside the coordinates.
pub fn read_embedding_csv<R: BufRead>(reader: R) -> Result<(Embedding, Vec<String>)> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("id")) {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        ids.push(
            fields
                .next()
                .ok_or_else(|| Error::Format(format!("line {}: empty row", lineno + 1)))?
                .to_string(),
        );
        rows.push(
            fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        Error::Format(format!("line {}: '{f}' is not numeric", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?,
        );
    }
    if rows.is_empty() {
        return Err(Error::Format("no data rows in embedding CSV".into()));
    }
    Ok((Embedding::from_rows(&rows)?, ids))
}

/// One half-hourly demand reading in long format.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandRecord {
    pub id: String,
    pub period: usize,
    /// NaN encodes a missing reading (empty value field).
    pub value: f64,
}

/// Read long-format demand: `id,period,value` with an optional header; an
/// empty value field means missing.
pub fn read_demand_csv<R: BufRead>(reader: R) -> Result<Vec<DemandRecord>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!(
                "line {}: expected id,period,value",
                lineno + 1
            )));
        }
        if lineno == 0 && fields[1].parse::<usize>().is_err() {
            continue; // header
        }
        let period: usize = fields[1].parse().map_err(|_| {
            Error::Format(format!("line {}: bad period '{}'", lineno + 1, fields[1]))
        })?;
        let value = if fields[2].is_empty() {
            f64::NAN
        } else {
            fields[2].parse::<f64>().map_err(|_| {
                Error::Format(format!("line {}: bad value '{}'", lineno + 1, fields[2]))
            })?
        };
        out.push(DemandRecord { id: fields[0].to_string(), period, value });
    }
    if out.is_empty() {
        return Err(Error::Format("no records in demand CSV".into()));
    }
    Ok(out)
}

/// Write long-format demand records.
pub fn write_demand_csv<W: Write>(writer: &mut W, records: &[DemandRecord]) -> Result<()> {
    writeln!(writer, "id,period,value")?;
    for r in records {
        if r.value.is_nan() {
            writeln!(writer, "{},{},", r.id, r.period)?;
        } else {
            writeln!(writer, "{},{},{}", r.id, r.period, r.value)?;
        }
    }
    Ok(())
}

/// Write a point cloud as numeric CSV (with ids when present).
pub fn write_points_csv<W: Write>(writer: &mut W, cloud: &PointCloud) -> Result<()> {
    let with_ids = cloud.ids().is_some();
    let mut header: Vec<String> = Vec::new();
    if with_ids {
        header.push("id".to_string());
    }
    header.extend((1..=cloud.dim()).map(|j| format!("x{j}")));
    writeln!(writer, "{}", header.join(","))?;
    for (i, row) in cloud.rows().enumerate() {
        let coords: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if with_ids {
            writeln!(writer, "{},{}", cloud.id_of(i), coords.join(","))?;
        } else {
            writeln!(writer, "{}", coords.join(","))?;
        }
    }
    Ok(())
}
