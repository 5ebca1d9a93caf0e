//! Text trace format: one record per line,
//! `<cycle-decimal> <ip-hex> <addr-hex> <R|W>`, e.g.
//! `1042 0x400f3a 0x7fe4c0 W`. Lines starting with `#` are comments.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::engine::{AccessKind, AccessRecord};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_hex(field: &str) -> Result<u64, String> {
    let digits = field
        .strip_prefix("0x")
        .or_else(|| field.strip_prefix("0X"))
        .unwrap_or(field);
    u64::from_str_radix(digits, 16).map_err(|_| format!("bad hex value '{field}'"))
}

/// Parse one line; comments and blank lines yield `None`.
pub fn parse_record(line: &str) -> Result<Option<AccessRecord>, String> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut fields = trimmed.split_whitespace();
    let cycle = fields
        .next()
        .ok_or("missing cycle")?
        .parse::<u64>()
        .map_err(|_| "bad cycle value".to_string())?;
    let ip = parse_hex(fields.next().ok_or("missing ip")?)?;
    let addr = parse_hex(fields.next().ok_or("missing address")?)?;
    let kind = match fields.next().ok_or("missing access kind")? {
        "R" => AccessKind::Read,
        "W" => AccessKind::Write,
        other => return Err(format!("bad access kind '{other}' (expected R or W)")),
    };
    if let Some(extra) = fields.next() {
        return Err(format!("unexpected trailing field '{extra}'"));
    }
    Ok(Some(AccessRecord { cycle, ip, addr, kind }))
}

pub fn format_record(rec: &AccessRecord) -> String {
    let kind = match rec.kind {
        AccessKind::Read => 'R',
        AccessKind::Write => 'W',
    };
    format!("{} {:#x} {:#x} {}", rec.cycle, rec.ip, rec.addr, kind)
}

/// Read every record from a reader, reporting parse failures with their
/// 1-based line number.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<AccessRecord>, TraceError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        match parse_record(&line) {
            Ok(Some(rec)) => records.push(rec),
            Ok(None) => {}
            Err(msg) => return Err(TraceError::Parse { line: idx + 1, msg }),
        }
    }
    Ok(records)
}

pub fn read_records_from_path(path: &Path) -> Result<Vec<AccessRecord>, TraceError> {
    let file = File::open(path)?;
    read_records(BufReader::new(file))
}

/// Write records in trace text format; returns the record count.
pub fn write_records<W, I>(mut writer: W, records: I) -> io::Result<u64>
where
    W: Write,
    I: IntoIterator<Item = AccessRecord>,
{
    let mut count = 0;
    for rec in records {
        writeln!(writer, "{}", format_record(&rec))?;
        count += 1;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let rec = parse_record("1042 0x400f3a 0x7fe4c0 W").unwrap().unwrap();
        assert_eq!(
            rec,
            AccessRecord {
                cycle: 1042,
                ip: 0x400f3a,
                addr: 0x7fe4c0,
                kind: AccessKind::Write
            }
        );
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        assert_eq!(parse_record("# header").unwrap(), None);
        assert_eq!(parse_record("   ").unwrap(), None);
        assert_eq!(parse_record("").unwrap(), None);
    }

    #[test]
    fn accepts_bare_hex_and_rejects_garbage() {
        assert!(parse_record("1 400f3a 7fe4c0 R").unwrap().is_some());
        assert!(parse_record("x 0x1 0x2 W").is_err());
        assert!(parse_record("1 0xZZ 0x2 W").is_err());
        assert!(parse_record("1 0x1 0x2 X").is_err());
        assert!(parse_record("1 0x1 0x2 W extra").is_err());
        assert!(parse_record("1 0x1").is_err());
    }

    #[test]
    fn read_reports_line_numbers() {
        let text = "# comment\n1 0x1 0x40 W\n\nbogus line\n";
        let err = read_records(text.as_bytes()).unwrap_err();
        match err {
            TraceError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn format_parse_round_trip() {
        let rec = AccessRecord {
            cycle: 7,
            ip: 0xabc,
            addr: 0x1f40,
            kind: AccessKind::Read,
        };
        let line = format_record(&rec);
        assert_eq!(line, "7 0xabc 0x1f40 R");
        assert_eq!(parse_record(&line).unwrap(), Some(rec));
    }

    #[test]
    fn write_records_counts_lines() {
        let recs = vec![
            AccessRecord { cycle: 1, ip: 1, addr: 64, kind: AccessKind::Write },
            AccessRecord { cycle: 2, ip: 2, addr: 128, kind: AccessKind::Read },
        ];
        let mut buf = Vec::new();
        let n = write_records(&mut buf, recs.iter().copied()).unwrap();
        assert_eq!(n, 2);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(read_records(text.as_bytes()).unwrap(), recs);
    }
}
