//! Monophonic note sequences and the music graph built from them.
//!
//! Nodes are distinct `(pitch, duration)` pairs, ordered by first
//! appearance. Two nodes are adjacent when they occur consecutively (in
//! either direction) and the edge weight is the reciprocal of the number of
//! such occurrences.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::io::Read;

use num_rational::BigRational;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{edge_key, WeightedGraph};
use crate::scalar::{is_strictly_positive_big, parse_big_rational, Scalar};

/// Reserved pitch token marking a rest (case-insensitive).
pub const REST_TOKEN: &str = "rest";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pitch {
    Midi(i64),
    Token(String),
}

impl Pitch {
    pub fn is_rest(&self) -> bool {
        matches!(self, Pitch::Token(t) if t.eq_ignore_ascii_case(REST_TOKEN))
    }

    fn parse(raw: &str) -> Option<Pitch> {
        let t = raw.trim();
        if t.is_empty() {
            return None;
        }
        Some(match t.parse::<i64>() {
            Ok(m) => Pitch::Midi(m),
            Err(_) => Pitch::Token(t.to_owned()),
        })
    }
}

impl fmt::Display for Pitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pitch::Midi(m) => write!(f, "{m}"),
            Pitch::Token(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoteEvent {
    pub pitch: Pitch,
    /// Fraction of a whole note, always positive.
    pub duration: BigRational,
}

impl NoteEvent {
    pub fn new(pitch: Pitch, duration: BigRational) -> Result<Self> {
        if !is_strictly_positive_big(&duration) {
            return Err(Error::parse(
                0,
                Some("duration".into()),
                "duration must be positive",
            ));
        }
        Ok(Self { pitch, duration })
    }

    /// Node label, e.g. `(60,1/4)`.
    pub fn label(&self) -> String {
        format!("({},{})", self.pitch, self.duration)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteSequence {
    events: Vec<NoteEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoteFormat {
    Csv,
    Json,
}

impl NoteFormat {
    /// Guess from a file extension; anything other than `.json` is CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => NoteFormat::Json,
            _ => NoteFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Remove rest events; no edge is drawn across a removed rest.
    pub drop_rests: bool,
    /// Keep only the largest connected component instead of failing.
    pub largest_component: bool,
}

impl NoteSequence {
    /// Requires at least two distinct notes.
    pub fn new(events: Vec<NoteEvent>) -> Result<Self> {
        let first = events.first().ok_or(Error::EmptySequence)?;
        if events.iter().all(|e| e == first) {
            return Err(Error::EmptySequence);
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[NoteEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut events = self.events.clone();
        events.reverse();
        Self { events }
    }

    pub fn parse<R: Read>(reader: R, format: NoteFormat) -> Result<Self> {
        match format {
            NoteFormat::Csv => Self::parse_csv(reader),
            NoteFormat::Json => Self::parse_json(reader),
        }
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(file), NoteFormat::from_path(path))
    }

    /// `pitch,duration` rows; `#` lines are comments; an optional
    /// `pitch,duration` header row is skipped.
    pub fn parse_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut events = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let line = record
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(i + 1);
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            if record.len() != 2 {
                return Err(Error::parse(
                    line,
                    None,
                    format!("expected 2 fields, found {}", record.len()),
                ));
            }
            if i == 0 && record[0].eq_ignore_ascii_case("pitch") {
                continue;
            }
            let pitch = Pitch::parse(&record[0])
                .ok_or_else(|| Error::parse(line, Some("pitch".into()), "empty pitch"))?;
            let duration = parse_duration(&record[1])
                .map_err(|msg| Error::parse(line, Some("duration".into()), msg))?;
            events.push(NoteEvent { pitch, duration });
        }
        Self::new(events)
    }

    /// A JSON array of `{"pitch": 60 | "C4", "duration": "1/4" | 0.25}`.
    pub fn parse_json<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum RawPitch {
            Int(i64),
            Text(String),
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum RawDuration {
            Text(String),
            Number(serde_json::Number),
        }
        #[derive(Deserialize)]
        struct RawEvent {
            pitch: RawPitch,
            duration: RawDuration,
        }

        let raw: Vec<RawEvent> = serde_json::from_reader(reader)?;
        let mut events = Vec::with_capacity(raw.len());
        for (i, ev) in raw.into_iter().enumerate() {
            let pitch = match ev.pitch {
                RawPitch::Int(m) => Pitch::Midi(m),
                RawPitch::Text(t) => Pitch::parse(&t)
                    .ok_or_else(|| Error::parse(i + 1, Some("pitch".into()), "empty pitch"))?,
            };
            let text = match ev.duration {
                RawDuration::Text(t) => t,
                RawDuration::Number(n) => n.to_string(),
            };
            let duration = parse_duration(&text)
                .map_err(|msg| Error::parse(i + 1, Some("duration".into()), msg))?;
            events.push(NoteEvent { pitch, duration });
        }
        Self::new(events)
    }

    /// Build the weighted music graph.
    pub fn build_graph<T: Scalar>(&self, opts: IngestOptions) -> Result<WeightedGraph<T>> {
        // Segments of consecutive events; rests split segments when dropped.
        let mut segments: Vec<Vec<&NoteEvent>> = vec![Vec::new()];
        for ev in &self.events {
            if opts.drop_rests && ev.pitch.is_rest() {
                if !segments.last().is_some_and(Vec::is_empty) {
                    segments.push(Vec::new());
                }
            } else {
                segments.last_mut().expect("non-empty").push(ev);
            }
        }

        let mut index: HashMap<&NoteEvent, usize> = HashMap::new();
        let mut nodes: Vec<&NoteEvent> = Vec::new();
        for ev in segments.iter().flatten() {
            index.entry(ev).or_insert_with(|| {
                nodes.push(ev);
                nodes.len() - 1
            });
        }
        if nodes.len() < 2 {
            return Err(Error::EmptySequence);
        }

        let mut counts: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for seg in &segments {
            for pair in seg.windows(2) {
                let (a, b) = (index[pair[0]], index[pair[1]]);
                if a != b {
                    *counts.entry(edge_key(a, b)).or_default() += 1;
                }
            }
        }

        let keep = select_component(nodes.len(), &counts, opts.largest_component)?;
        let mut new_index = vec![usize::MAX; nodes.len()];
        for (i, &old) in keep.iter().enumerate() {
            new_index[old] = i;
        }
        let labels = keep.iter().map(|&old| Some(nodes[old].label())).collect();
        let edges = counts
            .into_iter()
            .filter(|((a, _), _)| new_index[*a] != usize::MAX)
            .map(|((a, b), k)| (new_index[a], new_index[b], T::from_ratio(1, k)));
        WeightedGraph::with_labels(labels, edges)
    }
}

fn parse_duration(raw: &str) -> std::result::Result<BigRational, String> {
    let d = parse_big_rational(raw).map_err(|e| e.to_string())?;
    if !is_strictly_positive_big(&d) {
        return Err(format!("duration {raw:?} must be positive"));
    }
    Ok(d)
}

/// Vertices (in first-appearance order) of the component to keep.
fn select_component(
    n: usize,
    counts: &BTreeMap<(usize, usize), i64>,
    largest: bool,
) -> Result<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in counts.keys() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if comp_of[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        comp_of[s] = id;
        let mut members = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &x in &adj[u] {
                if comp_of[x] == usize::MAX {
                    comp_of[x] = id;
                    members.push(x);
                    queue.push_back(x);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    if comps.len() == 1 {
        return Ok(comps.pop().expect("one component"));
    }
    if !largest {
        return Err(Error::NotConnected {
            components: comps.len(),
        });
    }
    // First maximal component wins ties.
    let mut best = 0;
    for (i, c) in comps.iter().enumerate() {
        if c.len() > comps[best].len() {
            best = i;
        }
    }
    let keep = comps.swap_remove(best);
    if keep.len() < 2 {
        return Err(Error::EmptySequence);
    }
    Ok(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn seq(tokens: &[&str]) -> NoteSequence {
        let events = tokens
            .iter()
            .map(|t| NoteEvent::new(Pitch::parse(t).unwrap(), q(1, 4)).unwrap())
            .collect();
        NoteSequence::new(events).unwrap()
    }

    #[test]
    fn csv_basic() {
        let s = NoteSequence::parse_csv("60,1/4\n62,1/4".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.events()[1].pitch, Pitch::Midi(62));
        assert_eq!(s.events()[1].duration, q(1, 4));
    }

    #[test]
    fn csv_comments_header_tokens_and_decimals() {
        let text = "pitch,duration\n# intro\n\"C4\",0.5\nrest,1/8\n62,1/4\n";
        let s = NoteSequence::parse_csv(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.events()[0].pitch, Pitch::Token("C4".into()));
        assert_eq!(s.events()[0].duration, q(1, 2));
        assert!(s.events()[1].pitch.is_rest());
    }

    #[test]
    fn csv_zero_duration_is_parse_error() {
        let err = NoteSequence::parse_csv("60,1/4\n62,0".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field.as_deref(), Some("duration"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_empty_or_single_note_rejected() {
        assert!(matches!(
            NoteSequence::parse_csv("# nothing\n".as_bytes()),
            Err(Error::EmptySequence)
        ));
        assert!(matches!(
            NoteSequence::parse_csv("60,1/4\n60,1/4\n".as_bytes()),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn json_fourteen_events() {
        let items: Vec<String> = (0..14)
            .map(|i| format!(r#"{{"pitch":{},"duration":"1/8"}}"#, 60 + i % 5))
            .collect();
        let text = format!("[{}]", items.join(","));
        let s = NoteSequence::parse_json(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 14);
        let mixed = r#"[{"pitch":"G4","duration":0.25},{"pitch":67,"duration":"1/4"}]"#;
        let s = NoteSequence::parse_json(mixed.as_bytes()).unwrap();
        assert_eq!(s.events()[0].duration, q(1, 4));
    }

    #[test]
    fn abab_gives_weight_one_third() {
        let g: WeightedGraph<Rational> = seq(&["A", "B", "A", "B"])
            .build_graph(IngestOptions::default())
            .unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.weight(0, 1), Some(&q(1, 3)));
        assert_eq!(g.label(0), Some("(A,1/4)"));
    }

    #[test]
    fn repeated_note_adds_no_edge() {
        let g: WeightedGraph<Rational> = seq(&["A", "A", "B"])
            .build_graph(IngestOptions::default())
            .unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), Some(&q(1, 1)));
    }

    #[test]
    fn triangle_sequence() {
        let g: WeightedGraph<Rational> = seq(&["A", "B", "C", "A"])
            .build_graph(IngestOptions::default())
            .unwrap();
        assert_eq!(g.edge_count(), 3);
        for (_, _, w) in g.edges() {
            assert_eq!(w, &q(1, 1));
        }
    }

    #[test]
    fn same_pitch_different_duration_are_distinct() {
        let events = vec![
            NoteEvent::new(Pitch::Midi(60), q(1, 4)).unwrap(),
            NoteEvent::new(Pitch::Midi(60), q(1, 2)).unwrap(),
        ];
        let g: WeightedGraph<Rational> = NoteSequence::new(events)
            .unwrap()
            .build_graph(IngestOptions::default())
            .unwrap();
        assert_eq!(g.vertex_count(), 2);
    }

    #[test]
    fn rests_kept_or_dropped() {
        let s = seq(&["A", "rest", "B", "A"]);
        let kept: WeightedGraph<Rational> = s.build_graph(IngestOptions::default()).unwrap();
        assert_eq!(kept.vertex_count(), 3);
        let dropped: WeightedGraph<Rational> = s
            .build_graph(IngestOptions {
                drop_rests: true,
                ..Default::default()
            })
            .unwrap();
        // A-B only via (B, A); nothing across the rest.
        assert_eq!(dropped.vertex_count(), 2);
        assert_eq!(dropped.weight(0, 1), Some(&q(1, 1)));
    }

    #[test]
    fn disconnected_after_rest_split() {
        let s = seq(&["A", "B", "rest", "C", "D", "C", "E"]);
        let opts = IngestOptions {
            drop_rests: true,
            largest_component: false,
        };
        assert!(matches!(
            s.build_graph::<Rational>(opts),
            Err(Error::NotConnected { components: 2 })
        ));
        let g: WeightedGraph<Rational> = s
            .build_graph(IngestOptions {
                largest_component: true,
                ..opts
            })
            .unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.label(0), Some("(C,1/4)"));
        assert_eq!(g.weight(0, 1), Some(&q(1, 2)));
    }
}
