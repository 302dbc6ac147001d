use std::io::Write;

use crate::error::{Error, Result};

pub const VERSION_LINE: &str = concat!("gdls ", env!("CARGO_PKG_VERSION"));

/// Ordered `key = value` pairs. Blank lines and `#` comments are ignored;
/// a later duplicate key overrides an earlier one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut kv = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(file, i + 1, format!("expected `key = value`, found `{line}`")));
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(file, i + 1, "empty key"));
            }
            kv.set(k, v.trim());
        }
        Ok(kv)
    }

    /// `# key = value` lines of a table header; other comments are skipped.
    pub fn from_header(text: &str) -> Self {
        let mut kv = Self::default();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix('#') else {
                continue;
            };
            if let Some((k, v)) = rest.split_once('=') {
                kv.set(k.trim(), v.trim());
            }
        }
        kv
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.retain(|(k, _)| k != key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parsed value of `key`, `None` when absent.
    pub fn parse_opt<T: std::str::FromStr>(&self, key: &str, file: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("{file}: invalid value `{v}` for `{key}`"))),
        }
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str, file: &str) -> Result<T> {
        self.parse_opt(key, file)?
            .ok_or_else(|| Error::Config(format!("{file}: missing `{key}`")))
    }

    /// Comma-separated list value.
    pub fn parse_list<T: std::str::FromStr>(&self, key: &str, file: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{file}: invalid list entry `{s}` for `{key}`")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn write_plain<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Header block stamped on every output: tool version, the command, the
/// seed and the effective configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub config: KeyValues,
}

impl Provenance {
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("command".to_string(), self.command.clone()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        out.extend(
            self.config
                .entries()
                .iter()
                .map(|(k, v)| (format!("config.{k}"), v.clone())),
        );
        out
    }

    /// `# gdls <version>` followed by `# key = value` lines.
    pub fn write_header<W: Write + ?Sized>(&self, w: &mut W, prefix: &str) -> std::io::Result<()> {
        writeln!(w, "{prefix} {VERSION_LINE}")?;
        for (k, v) in self.entries() {
            writeln!(w, "{prefix} {k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let kv = KeyValues::parse("# c\n a = 1 \n\nb=x y\na = 2\n", "f").unwrap();
        assert_eq!(kv.get("a"), Some("2"));
        assert_eq!(kv.get("b"), Some("x y"));
        assert_eq!(kv.entries().len(), 2);
    }

    #[test]
    fn malformed_line_names_file_and_line() {
        let err = KeyValues::parse("a = 1\noops\n", "cfg.txt").unwrap_err();
        assert_eq!(err.to_string(), "cfg.txt:2: expected `key = value`, found `oops`");
    }

    #[test]
    fn typed_access() {
        let kv = KeyValues::parse("n = 16\nf = 0.1, 0.2\nbad = x", "f").unwrap();
        assert_eq!(kv.require::<usize>("n", "f").unwrap(), 16);
        assert_eq!(kv.parse_list::<f64>("f", "f").unwrap(), Some(vec![0.1, 0.2]));
        assert!(kv.require::<f64>("bad", "f").is_err());
        assert!(kv.require::<f64>("missing", "f").is_err());
    }

    #[test]
    fn header_round_trip() {
        let mut config = KeyValues::default();
        config.set("snr_db", "25");
        let p = Provenance {
            command: "bench runtime".into(),
            seed: 9,
            config,
        };
        let mut buf = Vec::new();
        p.write_header(&mut buf, "#").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# gdls 0.1.0\n"));
        let kv = KeyValues::from_header(&text);
        assert_eq!(kv.get("seed"), Some("9"));
        assert_eq!(kv.get("config.snr_db"), Some("25"));
    }
}
