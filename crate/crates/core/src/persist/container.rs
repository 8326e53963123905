//! Manifest + blob container shared by every file format.
//!
//! Each artifact is a pair of files: `<stem>.manifest`, a line-oriented
//! text header, and `<stem>.bin`, a single blob the manifest indexes into
//! by byte offset. Manifest grammar:
//!
//! ```text
//! format = mclab/v1
//! kind = <artifact kind>
//! meta.<key> = <value>
//! section = <name> <u8|f64> <byte offset> <byte len> [shape=AxBx..]
//! ```
//!
//! f64 sections are little-endian. Writers emit sections in insertion
//! order and meta keys sorted, so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

const FORMAT_LINE: &str = "mclab/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    U8,
    F64,
}

impl Dtype {
    fn token(&self) -> &'static str {
        match self {
            Dtype::U8 => "u8",
            Dtype::F64 => "f64",
        }
    }

    fn parse(token: &str) -> Option<Dtype> {
        match token {
            "u8" => Some(Dtype::U8),
            "f64" => Some(Dtype::F64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub dtype: Dtype,
    pub offset: usize,
    pub byte_len: usize,
    pub shape: Option<Vec<usize>>,
}

/// In-memory artifact being written.
pub struct Writer {
    kind: String,
    meta: BTreeMap<String, String>,
    sections: Vec<Section>,
    blob: Vec<u8>,
}

impl Writer {
    pub fn new(kind: &str) -> Self {
        Writer { kind: kind.to_string(), meta: BTreeMap::new(), sections: Vec::new(), blob: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn section_u8(&mut self, name: &str, data: &[u8]) -> &mut Self {
        self.push_section(name, Dtype::U8, data, None)
    }

    pub fn section_f64(&mut self, name: &str, data: &[f64], shape: Option<Vec<usize>>) -> &mut Self {
        let mut bytes = Vec::with_capacity(data.len() * 8);
        for v in data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        self.push_section(name, Dtype::F64, &bytes, shape)
    }

    fn push_section(&mut self, name: &str, dtype: Dtype, bytes: &[u8], shape: Option<Vec<usize>>) -> &mut Self {
        self.sections.push(Section {
            name: name.to_string(),
            dtype,
            offset: self.blob.len(),
            byte_len: bytes.len(),
            shape,
        });
        self.blob.extend_from_slice(bytes);
        self
    }

    /// Write `<stem>.manifest` and `<stem>.bin`.
    pub fn write(&self, stem: &Path) -> Result<()> {
        let mut manifest = String::new();
        let _ = writeln!(manifest, "format = {FORMAT_LINE}");
        let _ = writeln!(manifest, "kind = {}", self.kind);
        for (key, value) in &self.meta {
            let _ = writeln!(manifest, "meta.{key} = {value}");
        }
        for s in &self.sections {
            let shape = s
                .shape
                .as_ref()
                .map(|dims| {
                    let joined: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                    format!(" shape={}", joined.join("x"))
                })
                .unwrap_or_default();
            let _ = writeln!(
                manifest,
                "section = {} {} {} {}{shape}",
                s.name,
                s.dtype.token(),
                s.offset,
                s.byte_len
            );
        }
        let manifest_path = manifest_path(stem);
        std::fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
        let blob_path = blob_path(stem);
        std::fs::write(&blob_path, &self.blob).map_err(|e| Error::io(&blob_path, e))?;
        Ok(())
    }
}

fn manifest_path(stem: &Path) -> PathBuf {
    let mut p = stem.as_os_str().to_owned();
    p.push(".manifest");
    PathBuf::from(p)
}

fn blob_path(stem: &Path) -> PathBuf {
    let mut p = stem.as_os_str().to_owned();
    p.push(".bin");
    PathBuf::from(p)
}

/// A parsed artifact.
pub struct Container {
    pub kind: String,
    meta: BTreeMap<String, String>,
    sections: Vec<Section>,
    blob: Vec<u8>,
    stem: PathBuf,
}

pub fn read(stem: &Path) -> Result<Container> {
    let manifest_path = manifest_path(stem);
    let text =
        std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut kind = None;
    let mut meta = BTreeMap::new();
    let mut sections: Vec<Section> = Vec::new();

    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Format(format!("{}:{}: expected 'key = value'", manifest_path.display(), line_no + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "format" => {
                if value != FORMAT_LINE {
                    return Err(Error::Format(format!(
                        "{}: unsupported format '{value}'",
                        manifest_path.display()
                    )));
                }
            }
            "kind" => kind = Some(value.to_string()),
            "section" => {
                let mut tokens = value.split_whitespace();
                let parse_err = || {
                    Error::Format(format!(
                        "{}:{}: malformed section line",
                        manifest_path.display(),
                        line_no + 1
                    ))
                };
                let name = tokens.next().ok_or_else(parse_err)?.to_string();
                let dtype = tokens.next().and_then(Dtype::parse).ok_or_else(parse_err)?;
                let offset: usize =
                    tokens.next().and_then(|t| t.parse().ok()).ok_or_else(parse_err)?;
                let byte_len: usize =
                    tokens.next().and_then(|t| t.parse().ok()).ok_or_else(parse_err)?;
                let shape = match tokens.next() {
                    Some(tok) => {
                        let dims = tok.strip_prefix("shape=").ok_or_else(parse_err)?;
                        Some(
                            dims.split('x')
                                .map(|d| d.parse::<usize>().map_err(|_| parse_err()))
                                .collect::<Result<Vec<usize>>>()?,
                        )
                    }
                    None => None,
                };
                sections.push(Section { name, dtype, offset, byte_len, shape });
            }
            _ if key.starts_with("meta.") => {
                meta.insert(key["meta.".len()..].to_string(), value.to_string());
            }
            other => {
                return Err(Error::Format(format!(
                    "{}:{}: unknown key '{other}'",
                    manifest_path.display(),
                    line_no + 1
                )));
            }
        }
    }

    let kind = kind.ok_or_else(|| {
        Error::Format(format!("{}: missing 'kind' line", manifest_path.display()))
    })?;
    let blob_path = blob_path(stem);
    let blob = std::fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
    for s in &sections {
        if s.offset + s.byte_len > blob.len() {
            return Err(Error::Format(format!(
                "{}: blob truncated: section '{}' needs bytes {}..{} but the file has {}",
                blob_path.display(),
                s.name,
                s.offset,
                s.offset + s.byte_len,
                blob.len()
            )));
        }
    }
    Ok(Container { kind, meta, sections, blob, stem: stem.to_path_buf() })
}

impl Container {
    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Format(format!(
                "{}: expected kind '{kind}', found '{}'",
                self.stem.display(),
                self.kind
            )));
        }
        Ok(())
    }

    pub fn meta_str(&self, key: &str) -> Result<&str> {
        self.meta
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Format(format!("{}: missing meta.{key}", self.stem.display())))
    }

    pub fn meta_parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.meta_str(key)?;
        raw.parse().map_err(|_| {
            Error::Format(format!("{}: meta.{key} = '{raw}' failed to parse", self.stem.display()))
        })
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.iter().any(|s| s.name == name)
    }

    fn section(&self, name: &str) -> Result<&Section> {
        self.sections.iter().find(|s| s.name == name).ok_or_else(|| {
            Error::Format(format!("{}: missing section '{name}'", self.stem.display()))
        })
    }

    pub fn section_shape(&self, name: &str) -> Result<Option<&[usize]>> {
        Ok(self.section(name)?.shape.as_deref())
    }

    pub fn u8_section(&self, name: &str) -> Result<&[u8]> {
        let s = self.section(name)?;
        if s.dtype != Dtype::U8 {
            return Err(Error::Format(format!(
                "{}: section '{name}' is not u8",
                self.stem.display()
            )));
        }
        Ok(&self.blob[s.offset..s.offset + s.byte_len])
    }

    pub fn f64_section(&self, name: &str) -> Result<Vec<f64>> {
        let s = self.section(name)?;
        if s.dtype != Dtype::F64 {
            return Err(Error::Format(format!(
                "{}: section '{name}' is not f64",
                self.stem.display()
            )));
        }
        if s.byte_len % 8 != 0 {
            return Err(Error::Format(format!(
                "{}: f64 section '{name}' has byte length {} (offset {}), not a multiple of 8",
                self.stem.display(),
                s.byte_len,
                s.offset
            )));
        }
        let bytes = &self.blob[s.offset..s.offset + s.byte_len];
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("artifact");
        let mut w = Writer::new("test");
        w.meta("answer", 42);
        w.meta("label", "hello");
        w.section_u8("codes", &[1, 2, 3, 255]);
        w.section_f64("values", &[0.5, -1.25, f64::MIN_POSITIVE], Some(vec![3, 1]));
        w.write(&stem).unwrap();

        let c = read(&stem).unwrap();
        c.expect_kind("test").unwrap();
        assert_eq!(c.meta_parse::<u64>("answer").unwrap(), 42);
        assert_eq!(c.meta_str("label").unwrap(), "hello");
        assert_eq!(c.u8_section("codes").unwrap(), &[1, 2, 3, 255]);
        assert_eq!(c.f64_section("values").unwrap(), vec![0.5, -1.25, f64::MIN_POSITIVE]);
        assert_eq!(c.section_shape("values").unwrap(), Some(&[3usize, 1][..]));
    }

    #[test]
    fn writes_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let write = |stem: &Path| {
            let mut w = Writer::new("test");
            w.meta("b", 2).meta("a", 1);
            w.section_f64("x", &[1.0, 2.0], None);
            w.write(stem).unwrap();
        };
        let s1 = dir.path().join("one");
        let s2 = dir.path().join("two");
        write(&s1);
        write(&s2);
        assert_eq!(
            std::fs::read(manifest_path(&s1)).unwrap(),
            std::fs::read(manifest_path(&s2)).unwrap()
        );
        assert_eq!(std::fs::read(blob_path(&s1)).unwrap(), std::fs::read(blob_path(&s2)).unwrap());
    }

    #[test]
    fn truncated_blob_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("broken");
        let mut w = Writer::new("test");
        w.section_f64("x", &[1.0, 2.0, 3.0], None);
        w.write(&stem).unwrap();
        // Cut the blob short.
        std::fs::write(blob_path(&stem), [0u8; 7]).unwrap();
        let err = read(&stem).unwrap_err().to_string();
        assert!(err.contains("bytes 0..24"), "{err}");
        assert!(err.contains("broken.bin"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("odd");
        std::fs::write(manifest_path(&stem), "format = mclab/v1\nkind = x\nbogus = 1\n").unwrap();
        std::fs::write(blob_path(&stem), []).unwrap();
        assert!(read(&stem).is_err());
    }
}
