//! CSV and JSON serialization of result tables.
//!
//! Floats are written as `{:.16e}` (17 significant digits, `.` separator),
//! which round-trips every finite `f64`. Non-finite floats and empty cells
//! become an empty CSV field and JSON `null`.

use covfn::experiments::{Cell, ResultTable};

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn format_float(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x).unwrap_or_default(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn meta_token(key: &str, value: &str) -> String {
    if value.is_empty() || value.chars().any(char::is_whitespace) {
        format!("{key}={value:?}")
    } else {
        format!("{key}={value}")
    }
}

/// Line 1: `# covfn <version> seed=<seed>` followed by the remaining
/// metadata as `key=value` tokens; line 2: column headers; then rows.
pub fn render_csv(table: &ResultTable, seed: u64) -> CliResult<String> {
    let mut first = format!("# covfn {} seed={seed}", covfn::VERSION);
    for (k, v) in table.meta() {
        if k != "version" && k != "seed" {
            first.push(' ');
            first.push_str(&meta_token(k, v));
        }
    }
    first.push('\n');

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(first.into_bytes());
    writer.write_record(table.columns()).map_err(into_io)?;
    for row in table.rows() {
        writer
            .write_record(row.iter().map(cell_text))
            .map_err(into_io)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| into_io(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn into_io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn json_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x).unwrap_or_else(|| "null".into()),
        Cell::Text(s) => json_string(s),
        Cell::Empty => "null".into(),
    }
}

/// `{"meta": {...}, "columns": [...], "rows": [[...], ...]}` with metadata
/// in insertion order, `version` and `seed` first.
pub fn render_json(table: &ResultTable, seed: u64) -> String {
    let mut meta = vec![
        (json_string("version"), json_string(covfn::VERSION)),
        (json_string("seed"), json_string(&seed.to_string())),
    ];
    for (k, v) in table.meta() {
        if k != "version" && k != "seed" {
            meta.push((json_string(k), json_string(v)));
        }
    }
    let meta: Vec<String> = meta.into_iter().map(|(k, v)| format!("{k}: {v}")).collect();
    let columns: Vec<String> = table.columns().iter().map(|c| json_string(c)).collect();
    let rows: Vec<String> = table
        .rows()
        .iter()
        .map(|r| {
            format!(
                "[{}]",
                r.iter().map(json_cell).collect::<Vec<_>>().join(", ")
            )
        })
        .collect();
    format!(
        "{{\n  \"meta\": {{{}}},\n  \"columns\": [{}],\n  \"rows\": [\n    {}\n  ]\n}}\n",
        meta.join(", "),
        columns.join(", "),
        rows.join(",\n    ")
    )
}

pub fn render(table: &ResultTable, seed: u64, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => render_csv(table, seed),
        Format::Json => Ok(render_json(table, seed)),
    }
}
