use std::fs::File;
use std::path::Path;

use covfn::linalg::Mat;
use covfn::sampling::DataMatrix;

use crate::error::{CliError, CliResult};

/// Reads a numeric table: one observation per row, comma separated.
///
/// Line and column numbers in errors are 1-based and count the header line.
pub fn load_data_csv(path: &Path, has_header: bool) -> CliResult<DataMatrix<f64>> {
    let (rows, cols, values) = load_numeric(path, has_header)?;
    let m = Mat::from_row_major(rows, cols, values)?;
    Ok(DataMatrix::new(m)?)
}

/// Row count, column count and row-major values of a numeric CSV file.
pub fn load_numeric(path: &Path, has_header: bool) -> CliResult<(usize, usize, Vec<f64>)> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if has_header && idx == 0 {
            continue;
        }
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::RaggedRows {
                path: path.to_path_buf(),
                line,
                expected,
                got: record.len(),
            });
        }
        for (col, text) in record.iter().enumerate() {
            match text.parse::<f64>() {
                Ok(x) if x.is_finite() => values.push(x),
                _ => {
                    return Err(CliError::Parse {
                        path: path.to_path_buf(),
                        line,
                        column: col + 1,
                        text: text.to_string(),
                    })
                }
            }
        }
        rows += 1;
    }
    match width {
        Some(cols) if rows > 0 => Ok((rows, cols, values)),
        _ => Err(CliError::Empty {
            path: path.to_path_buf(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file_with(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn identity_rows() {
        let f = file_with("1,0\n0,1\n");
        let x = load_data_csv(f.path(), false).unwrap();
        assert_eq!((x.n(), x.d()), (2, 2));
        assert_eq!(x.row(0), &[1.0, 0.0]);
        assert_eq!(x.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn header_is_skipped() {
        let f = file_with("x1,x2\n1,2\n");
        let x = load_data_csv(f.path(), true).unwrap();
        assert_eq!((x.n(), x.d()), (1, 2));
        assert_eq!(x.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn ragged_rows_report_line() {
        let f = file_with("1,2\n3\n");
        match load_data_csv(f.path(), false) {
            Err(CliError::RaggedRows { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_report_location() {
        let f = file_with("a,b\n1,2\n3,x\n");
        match load_data_csv(f.path(), true) {
            Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let f = file_with("1,inf\n");
        assert!(matches!(
            load_data_csv(f.path(), false),
            Err(CliError::Parse { .. })
        ));
    }

    #[test]
    fn missing_and_empty_files() {
        assert!(matches!(
            load_data_csv(Path::new("/nonexistent/data.csv"), false),
            Err(CliError::Io { .. })
        ));
        let f = file_with("x1,x2\n");
        assert!(matches!(
            load_data_csv(f.path(), true),
            Err(CliError::Empty { .. })
        ));
    }
}
