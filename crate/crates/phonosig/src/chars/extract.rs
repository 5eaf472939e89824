//! Biphone and class-transition character extraction.
//!
//! Every form is scanned as `#, s1, ..., sn, #`; each adjacent pair is one
//! biphone occurrence. A character exists for every pair attested in at
//! least one doculect. A doculect's value is missing (NA) exactly when one
//! of the pair's non-boundary tokens is absent from its inventory; the
//! boundary counts as universally present.

use std::collections::{BTreeMap, BTreeSet};

use super::{CharKey, CharKind, CharacterMatrix, CharsError, ClassMap, Doculect, BOUNDARY};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// All segment tokens attested in a doculect's forms.
pub fn inventory(d: &Doculect) -> BTreeSet<String> {
    let mut inv = BTreeSet::new();
    for form in &d.forms {
        for s in &form.segments {
            inv.insert(s.clone());
        }
    }
    inv
}

/// Per-doculect biphone tallies over boundary-padded forms.
struct Tallies {
    inventory: BTreeSet<String>,
    pairs: BTreeMap<(String, String), u64>,
    as_first: BTreeMap<String, u64>,
    as_second: BTreeMap<String, u64>,
}

fn tally(d: &Doculect, map: Option<&ClassMap>) -> Result<Tallies, CharsError> {
    let mut t = Tallies {
        inventory: BTreeSet::new(),
        pairs: BTreeMap::new(),
        as_first: BTreeMap::new(),
        as_second: BTreeMap::new(),
    };
    for form in &d.forms {
        let mut padded: Vec<&str> = Vec::with_capacity(form.segments.len() + 2);
        padded.push(BOUNDARY);
        for s in &form.segments {
            let token = match map {
                Some(m) => m.project(s)?,
                None => s.as_str(),
            };
            padded.push(token);
            if token != BOUNDARY {
                t.inventory.insert(token.to_string());
            }
        }
        padded.push(BOUNDARY);
        for w in padded.windows(2) {
            let (x, y) = (w[0], w[1]);
            *t.pairs.entry((x.to_string(), y.to_string())).or_insert(0) += 1;
            *t.as_first.entry(x.to_string()).or_insert(0) += 1;
            *t.as_second.entry(y.to_string()).or_insert(0) += 1;
        }
    }
    Ok(t)
}

fn token_present(t: &Tallies, token: &str) -> bool {
    token == BOUNDARY || t.inventory.contains(token)
}

/// The union of attested pairs across doculects, in lexicographic key order.
fn character_universe(tallies: &[Tallies]) -> Vec<(String, String)> {
    let mut universe: BTreeSet<(String, String)> = BTreeSet::new();
    for t in tallies {
        universe.extend(t.pairs.keys().cloned());
    }
    universe.into_iter().collect()
}

fn build(
    ds: &[Doculect],
    map: Option<&ClassMap>,
    kind: CharKind,
) -> Result<CharacterMatrix, CharsError> {
    let tallies: Vec<Tallies> = ds
        .iter()
        .map(|d| tally(d, map))
        .collect::<Result<_, _>>()?;
    let universe = character_universe(&tallies);
    let keys: Vec<CharKey> = universe
        .iter()
        .map(|(x, y)| match map {
            Some(m) => CharKey::class(m.scheme().name(), x, y),
            None => CharKey::segment(x, y),
        })
        .collect();

    let mut values: Vec<Option<f64>> = Vec::with_capacity(ds.len() * keys.len());
    for t in &tallies {
        for (x, y) in &universe {
            if !token_present(t, x) || !token_present(t, y) {
                values.push(None);
                continue;
            }
            let count = t.pairs.get(&(x.clone(), y.clone())).copied().unwrap_or(0);
            let v = match kind {
                CharKind::Binary => {
                    if count > 0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                CharKind::FwdFreq => {
                    let denom = t.as_first.get(x).copied().unwrap_or(0);
                    if denom == 0 {
                        values.push(None);
                        continue;
                    }
                    count as f64 / denom as f64
                }
                CharKind::BwdFreq => {
                    let denom = t.as_second.get(y).copied().unwrap_or(0);
                    if denom == 0 {
                        values.push(None);
                        continue;
                    }
                    count as f64 / denom as f64
                }
            };
            values.push(Some(v));
        }
    }

    let doculects = ds.iter().map(|d| d.id.clone()).collect();
    Ok(CharacterMatrix::new(kind, doculects, keys, values))
}

/// Binary presence/absence of each attested biphone.
pub fn binary_biphone_matrix(ds: &[Doculect]) -> CharacterMatrix {
    build(ds, None, CharKind::Binary).expect("segment-level extraction cannot fail")
}

/// Forward transition probabilities: count(x,y) / count(x in first position).
pub fn forward_transition_matrix(ds: &[Doculect]) -> CharacterMatrix {
    build(ds, None, CharKind::FwdFreq).expect("segment-level extraction cannot fail")
}

/// Backward transition probabilities: count(x,y) / count(y in second position).
pub fn backward_transition_matrix(ds: &[Doculect]) -> CharacterMatrix {
    build(ds, None, CharKind::BwdFreq).expect("segment-level extraction cannot fail")
}

/// Transition probabilities between natural classes: forms are projected
/// token-by-token through the class map, then counted exactly as segments.
pub fn class_transition_matrix(
    ds: &[Doculect],
    map: &ClassMap,
    direction: Direction,
) -> Result<CharacterMatrix, CharsError> {
    let kind = match direction {
        Direction::Forward => CharKind::FwdFreq,
        Direction::Backward => CharKind::BwdFreq,
    };
    build(ds, Some(map), kind)
}
