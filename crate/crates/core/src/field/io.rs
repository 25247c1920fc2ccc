//! Text format for coefficient files.
//!
//! ```text
//! m,2
//! n,1
//! kind,constant
//! h,i,j,re,im
//! 1,1,1,1,0
//! ...
//! ```
//!
//! Grid files use `kind,grid`, add a `shape,c_1,...,c_n` row and carry the
//! 0-based grid multi-index before the value: `h,i,j,k1,..,kn,re,im`. Matrix
//! indices `h, i, j` are 1-based. Entries that are not listed are zero.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{CoefficientField, FieldKind};
use crate::linalg::{CMat, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Constant,
    Grid,
}

struct Cursor<'a> {
    rec: &'a csv::StringRecord,
    line: usize,
}

impl Cursor<'_> {
    fn err(&self, field: usize, msg: impl Into<String>) -> Error {
        let column = self.rec.range(field).map(|r| r.start + field + 1).unwrap_or(1);
        Error::Parse {
            line: self.line,
            column,
            msg: msg.into(),
        }
    }

    fn get(&self, field: usize) -> Result<&str> {
        self.rec
            .get(field)
            .map(str::trim)
            .ok_or_else(|| self.err(self.rec.len().saturating_sub(1), format!("missing column {}", field + 1)))
    }

    fn usize(&self, field: usize) -> Result<usize> {
        let s = self.get(field)?;
        s.parse().map_err(|_| self.err(field, format!("expected a non-negative integer, found {s:?}")))
    }

    fn f64(&self, field: usize) -> Result<f64> {
        let s = self.get(field)?;
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(field, format!("malformed number {s:?}")))?;
        if !v.is_finite() {
            return Err(self.err(field, format!("non-finite value {s:?}")));
        }
        Ok(v)
    }
}

/// Parses a field file from any reader.
pub fn read_field(reader: impl Read) -> Result<CoefficientField> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut m = None;
    let mut n = None;
    let mut kind = None;
    let mut shape: Option<Vec<usize>> = None;
    let mut in_body = false;
    let mut entries: Vec<(usize, Vec<usize>, usize, usize, C64)> = Vec::new();
    let mut rec = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut rec).map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            column: 1,
            msg: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let c = Cursor { rec: &rec, line };
        let key = c.get(0)?;
        if !in_body {
            match key {
                "m" => m = Some(c.usize(1)?),
                "n" => n = Some(c.usize(1)?),
                "kind" => {
                    kind = Some(match c.get(1)? {
                        "constant" => Kind::Constant,
                        "grid" => Kind::Grid,
                        other => return Err(c.err(1, format!("unknown kind {other:?}"))),
                    })
                }
                "shape" => shape = Some((1..rec.len()).map(|i| c.usize(i)).collect::<Result<_>>()?),
                "h" => in_body = true,
                other => return Err(c.err(0, format!("unknown header key {other:?}"))),
            }
            continue;
        }
        let (Some(m), Some(n), Some(kind)) = (m, n, kind) else {
            return Err(c.err(0, "header must define m, n and kind before the body"));
        };
        let nk = if kind == Kind::Grid { n } else { 0 };
        let want = 5 + nk;
        if rec.len() != want {
            return Err(c.err(0, format!("expected {want} columns, found {}", rec.len())));
        }
        let h = c.usize(0)?;
        let i = c.usize(1)?;
        let j = c.usize(2)?;
        if h == 0 || h > n {
            return Err(c.err(0, format!("h = {h} outside 1..={n}")));
        }
        if i == 0 || j == 0 || i > m || j > m {
            return Err(Error::Schema(format!(
                "line {line}: entry ({i}, {j}) of A^{h} does not fit the declared m = {m}"
            )));
        }
        let k: Vec<usize> = (0..nk).map(|a| c.usize(3 + a)).collect::<Result<_>>()?;
        if let Some(sh) = &shape {
            for (a, (&ka, &ca)) in k.iter().zip(sh).enumerate() {
                if ka >= ca {
                    return Err(c.err(3 + a, format!("grid index {ka} outside 0..{ca}")));
                }
            }
        }
        let re = c.f64(3 + nk)?;
        let im = c.f64(4 + nk)?;
        entries.push((h - 1, k, i - 1, j - 1, C64::new(re, im)));
    }
    let m = m.ok_or_else(|| Error::Schema("missing header row m".into()))?;
    let n = n.ok_or_else(|| Error::Schema("missing header row n".into()))?;
    let kind = kind.ok_or_else(|| Error::Schema("missing header row kind".into()))?;
    if m == 0 || n == 0 {
        return Err(Error::Schema("m and n must be positive".into()));
    }
    match kind {
        Kind::Constant => {
            let mut mats = vec![CMat::zeros(m, m); n];
            for (h, _, i, j, z) in entries {
                mats[h][(i, j)] = z;
            }
            CoefficientField::constant_per_h(mats)
        }
        Kind::Grid => {
            let shape = shape.ok_or_else(|| Error::Schema("grid file without a shape row".into()))?;
            if shape.len() != n {
                return Err(Error::Schema(format!("shape has {} axes for n = {n}", shape.len())));
            }
            let total: usize = shape.iter().product();
            let mut values = vec![vec![CMat::zeros(m, m); n]; total];
            for (h, k, i, j, z) in entries {
                let flat = k.iter().zip(&shape).fold(0, |acc, (i, c)| acc * c + i);
                values[flat][h][(i, j)] = z;
            }
            CoefficientField::grid_per_h(shape, values)
        }
    }
}

pub fn load_field(path: &Path) -> Result<CoefficientField> {
    read_field(std::fs::File::open(path)?)
}

/// Writes the canonical form: every entry listed, points in row-major order.
pub fn write_field(field: &CoefficientField, writer: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let (m, n) = (field.m(), field.n());
    w.write_record(["m", &m.to_string()]).map_err(csv_err)?;
    w.write_record(["n", &n.to_string()]).map_err(csv_err)?;
    let entry = |h: usize, i: usize, j: usize, k: &[usize], z: C64| -> Vec<String> {
        let mut row = vec![(h + 1).to_string(), (i + 1).to_string(), (j + 1).to_string()];
        row.extend(k.iter().map(usize::to_string));
        row.push(format!("{}", z.re));
        row.push(format!("{}", z.im));
        row
    };
    match field.kind() {
        FieldKind::ConstantPerH(mats) => {
            w.write_record(["kind", "constant"]).map_err(csv_err)?;
            w.write_record(["h", "i", "j", "re", "im"]).map_err(csv_err)?;
            for (h, a) in mats.iter().enumerate() {
                for i in 0..m {
                    for j in 0..m {
                        w.write_record(entry(h, i, j, &[], a[(i, j)])).map_err(csv_err)?;
                    }
                }
            }
        }
        FieldKind::GridPerH { shape, values } => {
            w.write_record(["kind", "grid"]).map_err(csv_err)?;
            let mut row = vec!["shape".to_string()];
            row.extend(shape.iter().map(usize::to_string));
            w.write_record(&row).map_err(csv_err)?;
            let mut head: Vec<String> = ["h", "i", "j"].iter().map(|s| s.to_string()).collect();
            head.extend((1..=n).map(|a| format!("k{a}")));
            head.push("re".into());
            head.push("im".into());
            w.write_record(&head).map_err(csv_err)?;
            for (p, mats) in values.iter().enumerate() {
                let mut k = vec![0; n];
                let mut rest = p;
                for a in (0..n).rev() {
                    k[a] = rest % shape[a];
                    rest /= shape[a];
                }
                for (h, a) in mats.iter().enumerate() {
                    for i in 0..m {
                        for j in 0..m {
                            w.write_record(entry(h, i, j, &k, a[(i, j)])).map_err(csv_err)?;
                        }
                    }
                }
            }
        }
        FieldKind::ConstantTensor(_) | FieldKind::Callback { .. } => {
            return Err(Error::Schema(
                "only constant and grid per-h fields have a file representation".into(),
            ));
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_field(field: &CoefficientField, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_field(field, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONSTANT: &str = "m,2\nn,1\nkind,constant\nh,i,j,re,im\n1,1,1,1,0\n1,1,2,0,0\n1,2,1,0,0\n1,2,2,16,0\n";

    fn roundtrip(text: &str) -> String {
        let f = read_field(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_field(&f, &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn constant_file_reads_entries_as_written() {
        let f = read_field(CONSTANT.as_bytes()).unwrap();
        let FieldKind::ConstantPerH(mats) = f.kind() else { panic!() };
        assert_eq!(mats[0][(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(mats[0][(1, 1)], C64::new(16.0, 0.0));
        assert_eq!(roundtrip(CONSTANT), CONSTANT);
    }

    #[test]
    fn grid_file_shape() {
        let mut text = String::from("m,2\nn,1\nkind,grid\nshape,4\nh,i,j,k1,re,im\n");
        for p in 0..4 {
            for i in 1..=2 {
                for j in 1..=2 {
                    let v = if i == j { 1.0 + 0.1 * p as f64 } else { 0.0 };
                    text.push_str(&format!("1,{i},{j},{p},{v},-0.5\n"));
                }
            }
        }
        let f = read_field(text.as_bytes()).unwrap();
        assert_eq!(f.shape(), vec![4, 1, 2, 2]);
        assert_eq!(roundtrip(&text), text);
    }

    #[test]
    fn malformed_complex_literal_has_location() {
        let text = "m,1\nn,1\nkind,constant\nh,i,j,re,im\n1,1,1,1.0x,0\n";
        match read_field(text.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 5);
                assert_eq!(column, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_m_is_a_schema_error() {
        let text = "m,1\nn,2\nkind,constant\nh,i,j,re,im\n1,1,1,1,0\n2,2,1,1,0\n";
        assert!(matches!(read_field(text.as_bytes()), Err(Error::Schema(_))));
    }
}
