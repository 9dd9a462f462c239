//! Flat `name = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, blank lines are
//! ignored. Consumers take the keys they understand; whatever is left
//! when [`KvConfig::finish`] runs is reported as an error with its line
//! number.

use crate::error::{QssError, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl KvConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                QssError::config(line_no, format!("expected `name = value`, got `{line}`"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(QssError::config(line_no, "empty key"));
            }
            if value.is_empty() {
                return Err(QssError::config(line_no, format!("empty value for `{key}`")));
            }
            if let Some((_, first)) = entries.insert(key.clone(), (value, line_no)) {
                return Err(QssError::config(
                    line_no,
                    format!("duplicate key `{key}` (first set on line {first})"),
                ));
            }
        }
        Ok(KvConfig { entries })
    }

    pub fn parse_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    /// Remove and return a raw value.
    pub fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(v, _)| v)
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take_parsed(key, "number")
    }

    pub fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        // accept scientific notation for large counts (e.g. 1e12)
        match self.take_with_line(key) {
            None => Ok(None),
            Some((v, line)) => {
                if let Ok(n) = v.parse::<u64>() {
                    return Ok(Some(n));
                }
                let as_float: f64 = v.parse().map_err(|_| {
                    QssError::config(line, format!("`{key}` expects an integer, got `{v}`"))
                })?;
                if as_float < 0.0 || as_float.fract() != 0.0 || as_float > u64::MAX as f64 {
                    return Err(QssError::config(
                        line,
                        format!("`{key}` expects a nonnegative integer, got `{v}`"),
                    ));
                }
                Ok(Some(as_float as u64))
            }
        }
    }

    pub fn take_u32(&mut self, key: &str) -> Result<Option<u32>> {
        self.take_parsed(key, "integer")
    }

    /// Comma-separated list of values.
    pub fn take_list_f64(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take_with_line(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|item| {
                    item.trim().parse::<f64>().map_err(|_| {
                        QssError::config(line, format!("`{key}`: cannot parse `{item}` as number"))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    pub fn take_list_u32(&mut self, key: &str) -> Result<Option<Vec<u32>>> {
        match self.take_with_line(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|item| {
                    item.trim().parse::<u32>().map_err(|_| {
                        QssError::config(line, format!("`{key}`: cannot parse `{item}` as integer"))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    /// Distance grid: either `start:stop:step` (inclusive) or a comma list.
    pub fn take_grid(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take_with_line(key) {
            None => Ok(None),
            Some((v, line)) => {
                if v.contains(':') {
                    let parts: Vec<&str> = v.split(':').collect();
                    if parts.len() != 3 {
                        return Err(QssError::config(
                            line,
                            format!("`{key}`: grid must be `start:stop:step`, got `{v}`"),
                        ));
                    }
                    let nums: Vec<f64> = parts
                        .iter()
                        .map(|s| {
                            s.trim().parse::<f64>().map_err(|_| {
                                QssError::config(
                                    line,
                                    format!("`{key}`: cannot parse `{s}` as number"),
                                )
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let (start, stop, step) = (nums[0], nums[1], nums[2]);
                    if step <= 0.0 || stop < start {
                        return Err(QssError::config(
                            line,
                            format!("`{key}`: need step > 0 and stop >= start"),
                        ));
                    }
                    let count = ((stop - start) / step).floor() as usize + 1;
                    Ok(Some((0..count).map(|i| start + step * i as f64).collect()))
                } else {
                    let items = v
                        .split(',')
                        .map(|item| {
                            item.trim().parse::<f64>().map_err(|_| {
                                QssError::config(
                                    line,
                                    format!("`{key}`: cannot parse `{item}` as number"),
                                )
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Some(items))
                }
            }
        }
    }

    /// Error out on any key nobody consumed.
    pub fn finish(self) -> Result<()> {
        if let Some((key, (_, line))) = self.entries.into_iter().next() {
            return Err(QssError::config(line, format!("unknown key `{key}`")));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn take_with_line(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str, kind: &str) -> Result<Option<T>> {
        match self.take_with_line(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| {
                QssError::config(line, format!("`{key}` expects a {kind}, got `{v}`"))
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_values() {
        let mut kv = KvConfig::parse_str("# header\n a = 1.5 \nb = 2 # trailing\n\nc = x,y\n")
            .unwrap();
        assert_eq!(kv.take_f64("a").unwrap(), Some(1.5));
        assert_eq!(kv.take_u64("b").unwrap(), Some(2));
        assert_eq!(kv.take("c").unwrap(), "x,y");
        kv.finish().unwrap();
    }

    #[test]
    fn unknown_key_reports_line() {
        let mut kv = KvConfig::parse_str("known = 1\nmystery = 2\n").unwrap();
        kv.take("known").unwrap();
        let err = kv.finish().unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.to_string().contains("mystery"), "{err}");
    }

    #[test]
    fn malformed_line_reports_line() {
        let err = KvConfig::parse_str("a = 1\nnot an assignment\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = KvConfig::parse_str("a = 1\na = 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn grid_expansion() {
        let mut kv = KvConfig::parse_str("g = 1:5:2\nh = 10, 25\n").unwrap();
        assert_eq!(kv.take_grid("g").unwrap().unwrap(), vec![1.0, 3.0, 5.0]);
        assert_eq!(kv.take_grid("h").unwrap().unwrap(), vec![10.0, 25.0]);
    }

    #[test]
    fn scientific_u64() {
        let mut kv = KvConfig::parse_str("n = 1e12\n").unwrap();
        assert_eq!(kv.take_u64("n").unwrap(), Some(1_000_000_000_000));
    }
}
