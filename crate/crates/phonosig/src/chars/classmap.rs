//! Natural-class assignments for segments.
//!
//! A single TSV with header `segment<TAB>place<TAB>major_place<TAB>manner`
//! carries all three schemes; each scheme draws its class tokens from a
//! fixed inventory. The boundary token `#` is implicit in every scheme and
//! may not appear as a segment row.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use super::{CharsError, BOUNDARY};

/// The three classification schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Place,
    MajorPlace,
    Manner,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Place, Scheme::MajorPlace, Scheme::Manner];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Place => "place",
            Scheme::MajorPlace => "major_place",
            Scheme::Manner => "manner",
        }
    }

    pub fn parse(s: &str) -> Result<Scheme, CharsError> {
        match s {
            "place" => Ok(Scheme::Place),
            "major_place" => Ok(Scheme::MajorPlace),
            "manner" => Ok(Scheme::Manner),
            other => Err(CharsError::UnknownScheme(other.to_string())),
        }
    }

    /// Class tokens a segment may map to (the boundary is implicit).
    pub fn inventory(self) -> &'static [&'static str] {
        match self {
            Scheme::Place => &[
                "labial", "dental", "alveolar", "retroflex", "palatal", "velar", "glottal",
                "vowel",
            ],
            Scheme::MajorPlace => &["labial", "apical", "laminal", "velar", "vowel"],
            Scheme::Manner => &[
                "obstruent",
                "nasal",
                "vibrant",
                "lateral",
                "glide",
                "rhotic glide",
                "vowel",
            ],
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// segment -> class assignment for one scheme.
#[derive(Debug, Clone)]
pub struct ClassMap {
    scheme: Scheme,
    map: BTreeMap<String, String>,
}

impl ClassMap {
    pub fn new(scheme: Scheme, map: BTreeMap<String, String>) -> Result<Self, CharsError> {
        for class in map.values() {
            if !scheme.inventory().contains(&class.as_str()) {
                return Err(CharsError::InvalidClass {
                    class: class.clone(),
                    scheme: scheme.name().to_string(),
                });
            }
        }
        Ok(ClassMap { scheme, map })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Class of a token; the boundary projects to itself. Unmapped segments
    /// are an error because the map must be total over the dataset.
    pub fn project<'a>(&'a self, token: &'a str) -> Result<&'a str, CharsError> {
        if token == BOUNDARY {
            return Ok(BOUNDARY);
        }
        self.map
            .get(token)
            .map(|s| s.as_str())
            .ok_or_else(|| CharsError::UnmappedSegment {
                segment: token.to_string(),
                scheme: self.scheme.name().to_string(),
            })
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }
}

/// All three class maps from one file.
#[derive(Debug, Clone)]
pub struct ClassMapSet {
    pub place: ClassMap,
    pub major_place: ClassMap,
    pub manner: ClassMap,
}

impl ClassMapSet {
    pub fn get(&self, scheme: Scheme) -> &ClassMap {
        match scheme {
            Scheme::Place => &self.place,
            Scheme::MajorPlace => &self.major_place,
            Scheme::Manner => &self.manner,
        }
    }
}

pub fn read_class_maps(path: &Path) -> Result<ClassMapSet, CharsError> {
    let text = std::fs::read_to_string(path)?;
    parse_class_maps(&text)
}

pub fn parse_class_maps(text: &str) -> Result<ClassMapSet, CharsError> {
    let mut lines = text.lines().enumerate();
    let (hline, header) = lines.next().ok_or_else(|| CharsError::Format {
        line: 1,
        msg: "empty class map file".into(),
    })?;
    if header.trim_end() != "segment\tplace\tmajor_place\tmanner" {
        return Err(CharsError::Format {
            line: hline + 1,
            msg: format!(
                "bad header {header:?}: expected `segment\\tplace\\tmajor_place\\tmanner`"
            ),
        });
    }

    let mut maps: [BTreeMap<String, String>; 3] = Default::default();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(CharsError::Format {
                line: lineno,
                msg: format!("expected 4 tab-separated columns, found {}", cols.len()),
            });
        }
        let segment = cols[0];
        if segment.is_empty() {
            return Err(CharsError::Format {
                line: lineno,
                msg: "empty segment".into(),
            });
        }
        if segment == BOUNDARY {
            return Err(CharsError::Format {
                line: lineno,
                msg: "the boundary token `#` may not be mapped".into(),
            });
        }
        if maps[0].contains_key(segment) {
            return Err(CharsError::Format {
                line: lineno,
                msg: format!("duplicate segment {segment:?}"),
            });
        }
        for (m, class) in maps.iter_mut().zip(&cols[1..]) {
            m.insert(segment.to_string(), class.to_string());
        }
    }

    let [place, major_place, manner] = maps;
    Ok(ClassMapSet {
        place: ClassMap::new(Scheme::Place, place)?,
        major_place: ClassMap::new(Scheme::MajorPlace, major_place)?,
        manner: ClassMap::new(Scheme::Manner, manner)?,
    })
}
