//! Table writers. Floats use the shortest decimal that round-trips.

use std::io::Write;

use serde_json::{json, Value};

use crate::sweep::{Cell, Reason, SweepResult};

/// Shortest round-trip decimal; `inf`, `-inf` and `NaN` for non-finite values.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        ryu::Buffer::new().format_finite(v).to_owned()
    }
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        Cell::Value(v) => format_float(*v),
        Cell::Sentinel(Reason::InfiniteSir) => "inf".into(),
        Cell::Sentinel(_) => String::new(),
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    let mut header: Vec<&str> = result.columns.clone();
    if result.reason_column {
        header.push("sentinel_reason");
    }
    w.write_record(&header)?;
    for row in &result.rows {
        let mut record: Vec<String> = row.cells.iter().map(csv_cell).collect();
        if result.reason_column {
            record.push(row.reason.map(Reason::code).unwrap_or_default().to_owned());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn json_cell(cell: &Cell) -> Value {
    match cell {
        Cell::Value(v) if v.is_finite() => json!(v),
        _ => Value::Null,
    }
}

pub fn to_json(result: &SweepResult) -> Value {
    let mut columns: Vec<&str> = result.columns.clone();
    if result.reason_column {
        columns.push("sentinel_reason");
    }
    let rows: Vec<Value> = result
        .rows
        .iter()
        .map(|row| {
            let mut cells: Vec<Value> = row.cells.iter().map(json_cell).collect();
            if result.reason_column {
                cells.push(row.reason.map_or(Value::Null, |r| json!(r.code())));
            }
            Value::Array(cells)
        })
        .collect();
    json!({
        "provenance": result.provenance,
        "spec": result.spec,
        "columns": columns,
        "rows": rows,
    })
}

/// A two-column quantity report (used by `analyze`).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Quantity {
    pub quantity: &'static str,
    pub value: Option<f64>,
    pub unit: &'static str,
    pub note: String,
}

pub fn write_report_csv<W: Write>(rows: &[Quantity], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(["quantity", "value", "unit", "note"])?;
    for q in rows {
        let value = q.value.map(format_float).unwrap_or_default();
        w.write_record([q.quantity, value.as_str(), q.unit, q.note.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_roundtrip_shortest() {
        for v in [0.1, 4004001.0, 1e-300, 2.0f64.sqrt(), -3.5e22, 5e-324] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn report_quotes_fields() {
        let rows = [Quantity { quantity: "beamwidth", value: None, unit: "rad", note: "main lobe fills half-space, \"saturated\"".into() }];
        let mut buf = Vec::new();
        write_report_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "quantity,value,unit,note\r\nbeamwidth,,rad,\"main lobe fills half-space, \"\"saturated\"\"\"\r\n");
    }
}
