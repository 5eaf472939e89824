//! Wordlist TSV: header `doculect<TAB>form`, one row per word, forms as
//! space-separated segment tokens.

use std::collections::HashSet;
use std::path::Path;

use super::{CharsError, Doculect, SegmentedForm, BOUNDARY};

/// Parsed wordlist file. Exact duplicate rows (same doculect, same form)
/// are dropped so that a form contributes its biphones once, and the drops
/// are reported here rather than silently discarded.
#[derive(Debug)]
pub struct WordlistData {
    pub doculects: Vec<Doculect>,
    pub duplicate_rows_dropped: usize,
}

pub fn read_wordlists(path: &Path) -> Result<WordlistData, CharsError> {
    let text = std::fs::read_to_string(path)?;
    parse_wordlists(&text)
}

pub fn parse_wordlists(text: &str) -> Result<WordlistData, CharsError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => break (i, l),
            None => {
                return Err(CharsError::Format {
                    line: 1,
                    msg: "empty file: expected header `doculect\\tform`".into(),
                })
            }
        }
    };
    if header.1.trim_end() != "doculect\tform" {
        return Err(CharsError::Format {
            line: header.0 + 1,
            msg: format!("bad header {:?}: expected `doculect\\tform`", header.1),
        });
    }

    let mut order: Vec<String> = Vec::new();
    let mut docs: std::collections::HashMap<String, Vec<SegmentedForm>> =
        std::collections::HashMap::new();
    let mut seen_rows: HashSet<(String, String)> = HashSet::new();
    let mut duplicate_rows_dropped = 0usize;

    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if line.trim_end() == "doculect\tform" {
            return Err(CharsError::Format {
                line: lineno,
                msg: "duplicate header row".into(),
            });
        }
        let mut cols = line.splitn(2, '\t');
        let id = cols.next().unwrap_or("").trim();
        let form = cols.next().map(str::trim).unwrap_or("");
        if id.is_empty() {
            return Err(CharsError::Format {
                line: lineno,
                msg: "empty doculect id".into(),
            });
        }
        if form.is_empty() {
            return Err(CharsError::Format {
                line: lineno,
                msg: format!("empty form for doculect {id:?}"),
            });
        }
        let segments: Vec<String> = form.split_whitespace().map(str::to_string).collect();
        if segments.iter().any(|s| s == BOUNDARY) {
            return Err(CharsError::Format {
                line: lineno,
                msg: format!("reserved boundary token `#` inside form {form:?}"),
            });
        }
        if !seen_rows.insert((id.to_string(), form.to_string())) {
            duplicate_rows_dropped += 1;
            continue;
        }
        if !docs.contains_key(id) {
            order.push(id.to_string());
        }
        docs.entry(id.to_string())
            .or_default()
            .push(SegmentedForm::new(segments));
    }

    if order.is_empty() {
        return Err(CharsError::Format {
            line: header.0 + 2,
            msg: "no data rows".into(),
        });
    }

    let doculects = order
        .into_iter()
        .map(|id| {
            let forms = docs.remove(&id).unwrap_or_default();
            if forms.is_empty() {
                return Err(CharsError::EmptyWordlist { doculect: id });
            }
            Ok(Doculect { id, forms })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(WordlistData {
        doculects,
        duplicate_rows_dropped,
    })
}

/// Render doculects back to the TSV format accepted by [`parse_wordlists`].
pub fn write_wordlists_tsv(doculects: &[Doculect]) -> String {
    let mut out = String::from("doculect\tform\n");
    for d in doculects {
        for f in &d.forms {
            out.push_str(&d.id);
            out.push('\t');
            out.push_str(&f.segments.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows_one_doculect() {
        let data = parse_wordlists("doculect\tform\nL1\tp a\nL1\ta p\n").unwrap();
        assert_eq!(data.doculects.len(), 1);
        assert_eq!(data.doculects[0].id, "L1");
        assert_eq!(data.doculects[0].forms.len(), 2);
        assert_eq!(data.doculects[0].forms[0].segments, vec!["p", "a"]);
    }

    #[test]
    fn reserved_token_rejected() {
        let err = parse_wordlists("doculect\tform\nL1\tp # a\n").unwrap_err();
        assert!(matches!(err, CharsError::Format { line: 2, .. }));
    }

    #[test]
    fn empty_form_rejected() {
        assert!(parse_wordlists("doculect\tform\nL1\t\n").is_err());
        assert!(parse_wordlists("doculect\tform\nL1\t   \n").is_err());
    }

    #[test]
    fn duplicate_header_rejected() {
        let err = parse_wordlists("doculect\tform\nL1\tp a\ndoculect\tform\n").unwrap_err();
        assert!(matches!(err, CharsError::Format { line: 3, .. }));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse_wordlists("lect\tform\nL1\tp a\n").is_err());
    }

    #[test]
    fn exact_duplicate_rows_dropped() {
        let data =
            parse_wordlists("doculect\tform\nL1\tp a\nL1\tp a\nL2\tp a\n").unwrap();
        assert_eq!(data.duplicate_rows_dropped, 1);
        assert_eq!(data.doculects[0].forms.len(), 1);
        assert_eq!(data.doculects[1].forms.len(), 1);
    }

    #[test]
    fn round_trips_through_tsv() {
        let text = "doculect\tform\nL1\tp a\nL1\ta p\nL2\tk u ny\n";
        let data = parse_wordlists(text).unwrap();
        assert_eq!(write_wordlists_tsv(&data.doculects), text);
    }
}
