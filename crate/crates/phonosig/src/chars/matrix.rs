//! Character matrices: doculect x character grids of real values with
//! explicit missing entries.

use std::fmt;
use std::io;

use super::CharsError;

/// What a matrix's values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharKind {
    /// Presence/absence; values in {0, 1, NA}.
    Binary,
    /// Forward transition probabilities; values in [0, 1] or NA.
    FwdFreq,
    /// Backward transition probabilities; values in [0, 1] or NA.
    BwdFreq,
}

impl CharKind {
    pub fn is_frequency(self) -> bool {
        matches!(self, CharKind::FwdFreq | CharKind::BwdFreq)
    }
}

/// A character's identity: an ordered token pair, optionally under a
/// class scheme. Rendered as `x>y` or `scheme:x>y`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharKey {
    pub scheme: Option<String>,
    pub first: String,
    pub second: String,
}

impl CharKey {
    pub fn segment(first: impl Into<String>, second: impl Into<String>) -> Self {
        CharKey {
            scheme: None,
            first: first.into(),
            second: second.into(),
        }
    }

    pub fn class(
        scheme: impl Into<String>,
        first: impl Into<String>,
        second: impl Into<String>,
    ) -> Self {
        CharKey {
            scheme: Some(scheme.into()),
            first: first.into(),
            second: second.into(),
        }
    }

    pub fn parse(text: &str) -> Result<CharKey, CharsError> {
        let (scheme, pair) = match text.split_once(':') {
            Some((s, rest)) => (Some(s.to_string()), rest),
            None => (None, text),
        };
        let (first, second) = pair.split_once('>').ok_or_else(|| CharsError::Format {
            line: 0,
            msg: format!("bad character key {text:?}: expected `x>y`"),
        })?;
        if first.is_empty() || second.is_empty() {
            return Err(CharsError::Format {
                line: 0,
                msg: format!("bad character key {text:?}: empty token"),
            });
        }
        Ok(CharKey {
            scheme,
            first: first.to_string(),
            second: second.to_string(),
        })
    }
}

impl fmt::Display for CharKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.scheme {
            Some(s) => write!(f, "{s}:{}>{}", self.first, self.second),
            None => write!(f, "{}>{}", self.first, self.second),
        }
    }
}

/// Doculect x character grid with explicit missing values.
#[derive(Debug, Clone)]
pub struct CharacterMatrix {
    kind: CharKind,
    doculects: Vec<String>,
    keys: Vec<CharKey>,
    /// Row-major: `values[d * keys.len() + c]`.
    values: Vec<Option<f64>>,
}

/// Filtering knobs; see [`CharacterMatrix::filter_characters`].
#[derive(Debug, Clone, Copy)]
pub struct FilterOptions {
    /// Characters with fewer usable values than this are dropped.
    pub min_non_na: usize,
    /// Drop characters whose usable values are all identical.
    pub require_variation: bool,
    /// Rewrite zeros to NA first (frequency matrices only).
    pub drop_zeros_as_na: bool,
}

/// Where the characters went during filtering.
#[derive(Debug, Clone, Copy, Default)]
pub struct FilterReport {
    pub input: usize,
    pub dropped_low_n: usize,
    pub dropped_no_variation: usize,
    pub kept: usize,
}

impl CharacterMatrix {
    pub fn new(
        kind: CharKind,
        doculects: Vec<String>,
        keys: Vec<CharKey>,
        values: Vec<Option<f64>>,
    ) -> Self {
        assert_eq!(values.len(), doculects.len() * keys.len());
        CharacterMatrix {
            kind,
            doculects,
            keys,
            values,
        }
    }

    pub fn kind(&self) -> CharKind {
        self.kind
    }

    pub fn doculects(&self) -> &[String] {
        &self.doculects
    }

    pub fn keys(&self) -> &[CharKey] {
        &self.keys
    }

    pub fn n_doculects(&self) -> usize {
        self.doculects.len()
    }

    pub fn n_characters(&self) -> usize {
        self.keys.len()
    }

    pub fn get(&self, doculect: usize, character: usize) -> Option<f64> {
        self.values[doculect * self.keys.len() + character]
    }

    /// One character's values across all doculects.
    pub fn column(&self, character: usize) -> Vec<Option<f64>> {
        (0..self.doculects.len())
            .map(|d| self.get(d, character))
            .collect()
    }

    pub fn column_by_key(&self, key: &CharKey) -> Result<Vec<Option<f64>>, CharsError> {
        let idx = self
            .keys
            .iter()
            .position(|k| k == key)
            .ok_or_else(|| CharsError::UnknownCharacter(key.to_string()))?;
        Ok(self.column(idx))
    }

    /// Replace a character's column (used by normalization).
    pub fn set_column(&mut self, character: usize, column: &[Option<f64>]) {
        assert_eq!(column.len(), self.doculects.len());
        for (d, v) in column.iter().enumerate() {
            self.values[d * self.keys.len() + character] = *v;
        }
    }

    /// Apply the usability filters, returning the surviving matrix and an
    /// account of what was dropped.
    pub fn filter_characters(&self, opts: FilterOptions) -> (CharacterMatrix, FilterReport) {
        let mut report = FilterReport {
            input: self.keys.len(),
            ..Default::default()
        };
        let zap_zero = opts.drop_zeros_as_na && self.kind.is_frequency();
        let mut kept_cols: Vec<(usize, Vec<Option<f64>>)> = Vec::new();
        for c in 0..self.keys.len() {
            let col: Vec<Option<f64>> = self
                .column(c)
                .into_iter()
                .map(|v| match v {
                    Some(x) if zap_zero && x == 0.0 => None,
                    other => other,
                })
                .collect();
            let usable: Vec<f64> = col.iter().filter_map(|v| *v).collect();
            if usable.len() < opts.min_non_na {
                report.dropped_low_n += 1;
                continue;
            }
            if opts.require_variation && usable.windows(2).all(|w| w[0] == w[1]) {
                report.dropped_no_variation += 1;
                continue;
            }
            kept_cols.push((c, col));
        }
        report.kept = kept_cols.len();

        let keys: Vec<CharKey> = kept_cols.iter().map(|(c, _)| self.keys[*c].clone()).collect();
        let mut values = vec![None; self.doculects.len() * keys.len()];
        for (new_c, (_, col)) in kept_cols.iter().enumerate() {
            for (d, v) in col.iter().enumerate() {
                values[d * keys.len() + new_c] = *v;
            }
        }
        (
            CharacterMatrix::new(self.kind, self.doculects.clone(), keys, values),
            report,
        )
    }

    /// Write the CSV form: first column `doculect`, one column per character
    /// key, `NA` for missing. Floats use the shortest decimal that
    /// round-trips, so a written matrix reloads to identical values.
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), CharsError> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["doculect".to_string()];
        header.extend(self.keys.iter().map(|k| k.to_string()));
        wtr.write_record(&header)?;
        for (d, id) in self.doculects.iter().enumerate() {
            let mut row = vec![id.clone()];
            for c in 0..self.keys.len() {
                row.push(match self.get(d, c) {
                    Some(v) => format!("{v}"),
                    None => "NA".to_string(),
                });
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Read a matrix written by [`CharacterMatrix::write_csv`]. The kind is
    /// inferred: a matrix whose values are all 0/1/NA is binary, anything
    /// else is treated as frequencies.
    pub fn read_csv<R: io::Read>(r: R) -> Result<CharacterMatrix, CharsError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = rdr.headers()?.clone();
        if header.is_empty() || &header[0] != "doculect" {
            return Err(CharsError::Format {
                line: 1,
                msg: "first CSV column must be `doculect`".into(),
            });
        }
        let keys: Vec<CharKey> = header
            .iter()
            .skip(1)
            .map(CharKey::parse)
            .collect::<Result<_, _>>()?;
        let mut doculects = Vec::new();
        let mut values: Vec<Option<f64>> = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let lineno = i + 2;
            if record.len() != keys.len() + 1 {
                return Err(CharsError::Format {
                    line: lineno,
                    msg: format!(
                        "expected {} columns, found {}",
                        keys.len() + 1,
                        record.len()
                    ),
                });
            }
            doculects.push(record[0].to_string());
            for cell in record.iter().skip(1) {
                if cell == "NA" {
                    values.push(None);
                } else {
                    let v: f64 = cell.parse().map_err(|_| CharsError::Format {
                        line: lineno,
                        msg: format!("bad numeric value {cell:?}"),
                    })?;
                    if !v.is_finite() {
                        return Err(CharsError::Format {
                            line: lineno,
                            msg: format!("non-finite value {cell:?}"),
                        });
                    }
                    values.push(Some(v));
                }
            }
        }
        let binary = values
            .iter()
            .all(|v| matches!(v, None | Some(0.0) | Some(1.0)));
        let kind = if binary {
            CharKind::Binary
        } else {
            CharKind::FwdFreq
        };
        Ok(CharacterMatrix::new(kind, doculects, keys, values))
    }
}

/// How lopsided a binary column is: max(count of 1s, count of 0s) over the
/// usable total, in [0.5, 1].
pub fn skew(column: &[Option<f64>]) -> Result<f64, CharsError> {
    let mut ones = 0usize;
    let mut zeros = 0usize;
    for v in column.iter().flatten() {
        if *v == 1.0 {
            ones += 1;
        } else if *v == 0.0 {
            zeros += 1;
        } else {
            return Err(CharsError::NonBinaryValue(*v));
        }
    }
    let total = ones + zeros;
    if total == 0 {
        return Err(CharsError::AllMissing);
    }
    Ok(ones.max(zeros) as f64 / total as f64)
}
