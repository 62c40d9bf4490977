//! Text and file formats: the process-tree grammar, CSV/XES event logs and
//! the JSON result document.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use quick_xml::events::{BytesStart, Event};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{self, Move, Trace};
use crate::model::{BlockId, Model, ModelError, Operator, Tree};
use crate::rewrite;

// --- process-tree text -----------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    /// 1-based character position of the offending input (`len + 1` at end of input).
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseModelError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parses `T ::= label | tau | ->(T,...) | X(T,...) | +(T,...) | *(T,T)`.
pub fn parse_tree_text(text: &str) -> Result<Tree, SyntaxError> {
    let mut p = TreeParser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let tree = p.tree()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(tree)
}

pub fn parse_model(text: &str) -> Result<Model, ParseModelError> {
    Ok(Model::new(&parse_tree_text(text)?)?)
}

struct TreeParser {
    chars: Vec<char>,
    pos: usize,
}

impl TreeParser {
    fn error(&self, message: &str) -> SyntaxError {
        let message = match self.chars.get(self.pos) {
            Some(c) => format!("{message} (found `{c}`)"),
            None => format!("{message} (found end of input)"),
        };
        SyntaxError {
            offset: self.pos + 1,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn tree(&mut self) -> Result<Tree, SyntaxError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                if self.chars.get(self.pos) != Some(&'>') {
                    return Err(self.error("expected `->`"));
                }
                self.pos += 1;
                self.operator(Operator::Seq)
            }
            Some('+') => {
                self.pos += 1;
                self.operator(Operator::And)
            }
            Some('*') => {
                self.pos += 1;
                self.operator(Operator::Loop)
            }
            Some('\'') => Ok(Tree::Activity(self.quoted()?)),
            Some(c) if is_label_char(c) => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|&c| is_label_char(c)) {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                if word == "X" && self.peek() == Some('(') {
                    return self.operator(Operator::Xor);
                }
                if word == "tau" {
                    Ok(Tree::Tau)
                } else {
                    Ok(Tree::Activity(word))
                }
            }
            _ => Err(self.error("expected a label, `tau` or an operator")),
        }
    }

    fn operator(&mut self, op: Operator) -> Result<Tree, SyntaxError> {
        self.expect('(')?;
        let mut children = vec![self.tree()?];
        loop {
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                    children.push(self.tree()?);
                }
                Some(')') => {
                    self.pos += 1;
                    return Ok(Tree::Node(op, children));
                }
                _ => return Err(self.error("expected `,` or `)`")),
            }
        }
    }

    fn quoted(&mut self) -> Result<String, SyntaxError> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.chars.get(self.pos) {
                None => return Err(self.error("unterminated quoted label")),
                Some('\'') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    match self.chars.get(self.pos + 1) {
                        Some(&c @ ('\'' | '\\')) => out.push(c),
                        _ => {
                            self.pos += 1;
                            return Err(self.error("invalid escape in quoted label"));
                        }
                    }
                    self.pos += 2;
                }
                Some(&c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }
}

fn is_label_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn write_label(out: &mut String, label: &str) {
    if !label.is_empty() && label != "tau" && label.chars().all(is_label_char) {
        out.push_str(label);
    } else {
        out.push('\'');
        for c in label.chars() {
            if c == '\'' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('\'');
    }
}

fn write_tree(out: &mut String, tree: &Tree) {
    match tree {
        Tree::Activity(label) => write_label(out, label),
        Tree::Tau => out.push_str("tau"),
        Tree::Node(op, children) => {
            out.push_str(op.symbol());
            out.push('(');
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_tree(out, child);
            }
            out.push(')');
        }
    }
}

pub fn tree_to_text(tree: &Tree) -> String {
    let mut out = String::new();
    write_tree(&mut out, tree);
    out
}

impl std::fmt::Display for Tree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&tree_to_text(self))
    }
}

// --- event logs --------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogFormat {
    Xes,
    Csv,
}

impl FromStr for LogFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "xes" => Ok(LogFormat::Xes),
            "csv" => Ok(LogFormat::Csv),
            other => Err(format!("unknown log format `{other}`")),
        }
    }
}

impl LogFormat {
    pub fn from_path(path: &Path) -> Option<LogFormat> {
        path.extension()?.to_str()?.parse().ok()
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("cannot read log: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed log: {0}")]
    Format(String),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
}

/// One event of a log, before grouping into traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogRecord {
    pub case_id: String,
    pub activity: String,
    pub timestamp: Option<i64>,
}

/// A case with its ordered trace.
pub type Case = (String, Trace);

pub fn parse_log(path: &Path, format: LogFormat) -> Result<Vec<Case>, LogError> {
    let text = std::fs::read_to_string(path)?;
    parse_log_str(&text, format)
}

pub fn parse_log_str(text: &str, format: LogFormat) -> Result<Vec<Case>, LogError> {
    match format {
        LogFormat::Csv => parse_csv(text),
        LogFormat::Xes => parse_xes(text),
    }
}

/// Groups records by case in order of first appearance. Within a case,
/// events are ordered by timestamp when present, file order otherwise.
pub fn group_cases(records: Vec<LogRecord>) -> Vec<Case> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<(String, Vec<LogRecord>)> = Vec::new();
    for rec in records {
        let i = *index.entry(rec.case_id.clone()).or_insert_with(|| {
            groups.push((rec.case_id.clone(), Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(rec);
    }
    groups
        .into_iter()
        .map(|(id, mut events)| {
            // stable: ties and missing timestamps keep file order
            if events.iter().all(|e| e.timestamp.is_some()) {
                events.sort_by_key(|e| e.timestamp);
            }
            (id, events.into_iter().map(|e| e.activity).collect())
        })
        .collect()
}

fn parse_timestamp(raw: &str) -> Result<i64, LogError> {
    let raw = raw.trim();
    if let Ok(t) = chrono::DateTime::parse_from_rfc3339(raw) {
        return Ok(t.timestamp_millis());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(t) = chrono::NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(t.and_utc().timestamp_millis());
        }
    }
    raw.parse::<i64>()
        .map_err(|_| LogError::Format(format!("unrecognized timestamp `{raw}`")))
}

fn parse_csv(text: &str) -> Result<Vec<Case>, LogError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| LogError::Format(e.to_string()))?.clone();
    let column = |name| headers.iter().position(|h| h == name);
    let case_col = column("case_id").ok_or(LogError::MissingColumn("case_id"))?;
    let act_col = column("activity").ok_or(LogError::MissingColumn("activity"))?;
    let ts_col = column("timestamp");

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| LogError::Format(e.to_string()))?;
        let field = |i: usize| {
            row.get(i)
                .ok_or_else(|| LogError::Format(format!("short row at line {}", line_of(&row))))
        };
        let activity = field(act_col)?;
        if activity.is_empty() {
            return Err(LogError::Format(format!("empty activity at line {}", line_of(&row))));
        }
        let timestamp = match ts_col.map(|i| row.get(i).unwrap_or("")) {
            Some(raw) if !raw.is_empty() => Some(parse_timestamp(raw)?),
            _ => None,
        };
        records.push(LogRecord {
            case_id: field(case_col)?.to_owned(),
            activity: activity.to_owned(),
            timestamp,
        });
    }
    Ok(group_cases(records))
}

fn line_of(row: &csv::StringRecord) -> u64 {
    row.position().map_or(0, |p| p.line())
}

fn key_value(e: &BytesStart<'_>) -> Result<(Option<String>, Option<String>), LogError> {
    let mut key = None;
    let mut value = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| LogError::Format(err.to_string()))?;
        let v = attr
            .unescape_value()
            .map_err(|err| LogError::Format(err.to_string()))?
            .into_owned();
        match attr.key.as_ref() {
            b"key" => key = Some(v),
            b"value" => value = Some(v),
            _ => {}
        }
    }
    Ok((key, value))
}

#[derive(PartialEq)]
enum Scope {
    Log,
    Trace,
    Event,
    Other,
}

fn parse_xes(text: &str) -> Result<Vec<Case>, LogError> {
    let mut reader = quick_xml::Reader::from_str(text);
    let mut stack: Vec<Scope> = Vec::new();
    let mut cases = Vec::new();
    let mut case_id: Option<String> = None;
    let mut events: Vec<String> = Vec::new();
    let mut activity: Option<String> = None;
    let mut ignored = std::collections::BTreeSet::new();
    let mut seen_log = false;

    loop {
        let ev = reader
            .read_event()
            .map_err(|e| LogError::Format(format!("at byte {}: {e}", reader.buffer_position())))?;
        let (start, empty) = match &ev {
            Event::Start(e) => (Some(e.clone()), false),
            Event::Empty(e) => (Some(e.clone()), true),
            _ => (None, false),
        };
        if let Some(e) = start {
            let name = e.name().as_ref().to_vec();
            let parent = stack.last();
            let scope = match (parent, name.as_slice()) {
                (None, b"log") => {
                    seen_log = true;
                    Scope::Log
                }
                (Some(Scope::Log), b"trace") => {
                    case_id = None;
                    events.clear();
                    Scope::Trace
                }
                (Some(Scope::Trace), b"event") => {
                    activity = None;
                    Scope::Event
                }
                (Some(s @ (Scope::Trace | Scope::Event)), _) => {
                    let (key, value) = key_value(&e)?;
                    if key.as_deref() == Some("concept:name") {
                        let value =
                            value.ok_or_else(|| LogError::Format("concept:name attribute without value".into()))?;
                        if *s == Scope::Trace {
                            case_id = Some(value);
                        } else {
                            activity = Some(value);
                        }
                    } else {
                        ignored.insert(key.unwrap_or_else(|| String::from_utf8_lossy(&name).into_owned()));
                    }
                    Scope::Other
                }
                (None, other) => {
                    return Err(LogError::Format(format!(
                        "expected <log> root element, found <{}>",
                        String::from_utf8_lossy(other)
                    )))
                }
                _ => Scope::Other,
            };
            if empty {
                close_scope(scope, &mut cases, &mut case_id, &mut events, &mut activity)?;
            } else {
                stack.push(scope);
            }
            continue;
        }
        match ev {
            Event::End(_) => {
                let scope = stack
                    .pop()
                    .ok_or_else(|| LogError::Format("unbalanced closing tag".into()))?;
                close_scope(scope, &mut cases, &mut case_id, &mut events, &mut activity)?;
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !seen_log {
        return Err(LogError::Format("no <log> element".into()));
    }
    if !stack.is_empty() {
        return Err(LogError::Format("unexpected end of document".into()));
    }
    if !ignored.is_empty() {
        log::warn!(
            "ignored XES attributes: {}",
            ignored.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    Ok(cases)
}

fn close_scope(
    scope: Scope,
    cases: &mut Vec<Case>,
    case_id: &mut Option<String>,
    events: &mut Vec<String>,
    activity: &mut Option<String>,
) -> Result<(), LogError> {
    match scope {
        Scope::Trace => {
            let id = case_id.take().unwrap_or_else(|| format!("trace-{}", cases.len()));
            cases.push((id, std::mem::take(events)));
        }
        Scope::Event => {
            let a = activity
                .take()
                .ok_or_else(|| LogError::Format("event without concept:name".into()))?;
            events.push(a);
        }
        Scope::Log | Scope::Other => {}
    }
    Ok(())
}

/// A group of identical traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variant {
    pub trace: Trace,
    pub case_ids: Vec<String>,
}

/// Deduplicates traces, keeping the order of first appearance.
pub fn group_variants(cases: &[Case]) -> Vec<Variant> {
    let mut index: HashMap<&Trace, usize> = HashMap::new();
    let mut out: Vec<Variant> = Vec::new();
    for (id, trace) in cases {
        match index.get(trace) {
            Some(&i) => out[i].case_ids.push(id.clone()),
            None => {
                index.insert(trace, out.len());
                out.push(Variant {
                    trace: trace.clone(),
                    case_ids: vec![id.clone()],
                });
            }
        }
    }
    out
}

// --- result documents --------------------------------------------------------

pub const SCHEMA: &str = "skipalign-results/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: String,
    pub traces: Vec<TraceResult>,
}

impl Default for ResultDocument {
    fn default() -> Self {
        ResultDocument {
            schema: SCHEMA.to_owned(),
            traces: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceResult {
    pub trace_id: String,
    pub cases: Vec<String>,
    pub multiplicity: usize,
    pub events: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<u32>,
    #[serde(default)]
    pub alignments: Vec<AlignmentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentRecord {
    pub cost: u32,
    pub moves: Vec<MoveRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Log,
    Sync,
    Model,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub kind: MoveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    pub cost: u32,
}

impl MoveRecord {
    pub fn from_move(model: &Model, mv: &Move) -> MoveRecord {
        let cost = alignment::move_cost(model, mv);
        let (kind, label, block) = match mv {
            Move::Log(l) => (MoveKind::Log, Some(l.clone()), None),
            Move::Sync { label, leaf } => (MoveKind::Sync, Some(label.clone()), Some(leaf.to_string())),
            Move::Model(b) => (MoveKind::Model, model.label(*b).map(str::to_owned), Some(b.to_string())),
            Move::Skip(b) => (MoveKind::Skip, None, Some(b.to_string())),
        };
        MoveRecord {
            kind,
            label,
            block,
            cost,
        }
    }

    pub fn to_move(&self) -> Result<Move, DocumentError> {
        let block = || -> Result<BlockId, DocumentError> {
            let raw = self.block.as_deref().ok_or(DocumentError::Malformed("missing block"))?;
            raw.parse().map_err(|_| DocumentError::Malformed("invalid block id"))
        };
        let label = || self.label.clone().ok_or(DocumentError::Malformed("missing label"));
        Ok(match self.kind {
            MoveKind::Log => Move::Log(label()?),
            MoveKind::Sync => Move::Sync {
                label: label()?,
                leaf: block()?,
            },
            MoveKind::Model => Move::Model(block()?),
            MoveKind::Skip => Move::Skip(block()?),
        })
    }
}

impl AlignmentRecord {
    pub fn from_moves(model: &Model, moves: &[Move]) -> AlignmentRecord {
        AlignmentRecord {
            cost: alignment::total_cost(model, moves),
            moves: moves.iter().map(|m| MoveRecord::from_move(model, m)).collect(),
        }
    }

    pub fn to_moves(&self) -> Result<Vec<Move>, DocumentError> {
        self.moves.iter().map(MoveRecord::to_move).collect()
    }
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema `{0}`")]
    Schema(String),
    #[error("malformed move: {0}")]
    Malformed(&'static str),
    #[error("trace `{trace}`: {reason}")]
    Invalid { trace: String, reason: String },
}

/// Serializes a result document. Field order is fixed, so identical inputs
/// give identical bytes.
pub fn write_results(doc: &ResultDocument) -> String {
    serde_json::to_string(doc).expect("result documents always serialize")
}

pub fn write_results_pretty(doc: &ResultDocument) -> String {
    serde_json::to_string_pretty(doc).expect("result documents always serialize")
}

pub fn read_results(text: &str) -> Result<ResultDocument, DocumentError> {
    let doc: ResultDocument = serde_json::from_str(text)?;
    if doc.schema != SCHEMA {
        return Err(DocumentError::Schema(doc.schema));
    }
    Ok(doc)
}

/// Checks every alignment of `doc` against `model`: valid skip alignment of
/// the stored events, normal form, consistent per-move and total costs, and a
/// common optimal cost per trace.
pub fn validate_document(model: &Model, doc: &ResultDocument) -> Result<(), DocumentError> {
    if doc.schema != SCHEMA {
        return Err(DocumentError::Schema(doc.schema.clone()));
    }
    for tr in &doc.traces {
        let invalid = |reason: String| DocumentError::Invalid {
            trace: tr.trace_id.clone(),
            reason,
        };
        if tr.multiplicity != tr.cases.len() {
            return Err(invalid("multiplicity does not match case list".into()));
        }
        if tr.error.is_some() {
            continue;
        }
        let cost = tr.cost.ok_or_else(|| invalid("missing cost".into()))?;
        if tr.alignments.is_empty() {
            return Err(invalid("no alignments".into()));
        }
        for rec in &tr.alignments {
            let moves = rec.to_moves()?;
            for (m, r) in moves.iter().zip(&rec.moves) {
                if alignment::move_cost(model, m) != r.cost {
                    return Err(invalid(format!("wrong cost on move {m}")));
                }
            }
            let shown = alignment::MovesDisplay(&moves);
            if alignment::total_cost(model, &moves) != rec.cost || rec.cost != cost {
                return Err(invalid(format!("cost mismatch for {shown}")));
            }
            if !alignment::validate_skip_alignment(model, &tr.events, &moves) {
                return Err(invalid(format!("{shown} is not a skip alignment")));
            }
            if !rewrite::is_normal_form(model, &moves) {
                return Err(invalid(format!("{shown} is not in normal form")));
            }
        }
    }
    Ok(())
}

/// Renders a short human-readable form of a trace.
pub fn trace_to_text(trace: &[String]) -> String {
    let mut out = String::from("<");
    for (i, e) in trace.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{e}");
    }
    out.push('>');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_running_example() {
        let tree = parse_tree_text("->(a, X(b,c), d)").unwrap();
        assert_eq!(tree.size(), 6);
        assert_eq!(tree_to_text(&tree), "->(a,X(b,c),d)");
        let tree = parse_tree_text("*(a,b)").unwrap();
        assert!(matches!(tree, Tree::Node(Operator::Loop, ref c) if c.len() == 2));
    }

    #[test]
    fn syntax_error_offset() {
        let err = parse_tree_text("->(a,").unwrap_err();
        assert_eq!(err.offset, 6);
        assert!(parse_tree_text("").is_err());
        assert_eq!(parse_tree_text("a b").unwrap_err().offset, 3);
        assert!(parse_tree_text("->a").is_err());
        assert!(parse_tree_text("'abc").is_err());
    }

    #[test]
    fn loop_arity_is_a_model_error() {
        assert!(parse_tree_text("*(a)").is_ok());
        assert!(matches!(
            parse_model("*(a)"),
            Err(ParseModelError::Model(ModelError::ArityViolation { .. }))
        ));
    }

    #[test]
    fn labels_and_tau() {
        let tree = parse_tree_text("X(tau, 'tau', 'a b', X, 'it\\'s')").unwrap();
        let Tree::Node(Operator::Xor, children) = &tree else {
            panic!()
        };
        assert_eq!(children[0], Tree::Tau);
        assert_eq!(children[1], Tree::activity("tau"));
        assert_eq!(children[2], Tree::activity("a b"));
        assert_eq!(children[3], Tree::activity("X"));
        assert_eq!(children[4], Tree::activity("it's"));
        assert_eq!(parse_tree_text(&tree_to_text(&tree)).unwrap(), tree);
    }

    #[test]
    fn csv_grouping() {
        let cases = parse_log_str("case_id,activity\nc1,a\nc1,d\n", LogFormat::Csv).unwrap();
        assert_eq!(cases, vec![("c1".to_string(), vec!["a".to_string(), "d".to_string()])]);

        let err = parse_log_str("case_id,act\nc1,a\n", LogFormat::Csv).unwrap_err();
        assert!(matches!(err, LogError::MissingColumn("activity")));
    }

    #[test]
    fn csv_timestamps_order_events() {
        let text = "case_id,activity,timestamp\n\
                    c2,x,2024-01-01T10:00:00Z\n\
                    c1,b,2024-01-01T10:05:00Z\n\
                    c1,a,2024-01-01T10:01:00Z\n\
                    c2,y,2024-01-01T09:00:00Z\n";
        let cases = parse_log_str(text, LogFormat::Csv).unwrap();
        assert_eq!(cases[0], ("c2".into(), vec!["y".into(), "x".into()]));
        assert_eq!(cases[1], ("c1".into(), vec!["a".into(), "b".into()]));
        assert!(parse_log_str("case_id,activity,timestamp\nc,a,yesterday\n", LogFormat::Csv).is_err());
    }

    #[test]
    fn xes_subset() {
        let text = r#"<?xml version="1.0" encoding="UTF-8"?>
            <log xes.version="1.0">
              <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
              <trace>
                <string key="concept:name" value="case-1"/>
                <event><string key="concept:name" value="a"/><date key="time:timestamp" value="2024-01-01T00:00:00Z"/></event>
                <event><string key="concept:name" value="b"/></event>
                <event><string key="concept:name" value="d"/></event>
              </trace>
              <trace><event><string key="concept:name" value="x"/></event></trace>
            </log>"#;
        let cases = parse_log_str(text, LogFormat::Xes).unwrap();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0], ("case-1".into(), vec!["a".into(), "b".into(), "d".into()]));
        assert_eq!(cases[1].0, "trace-1");

        assert!(parse_log_str("<log><trace><event/></trace></log>", LogFormat::Xes).is_err());
        assert!(parse_log_str("<foo/>", LogFormat::Xes).is_err());
    }

    #[test]
    fn variants_keep_first_appearance() {
        let t = |s: &str| s.chars().map(|c| c.to_string()).collect::<Trace>();
        let cases = vec![
            ("1".to_string(), t("ab")),
            ("2".to_string(), t("ba")),
            ("3".to_string(), t("ab")),
        ];
        let v = group_variants(&cases);
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].case_ids, vec!["1", "3"]);
        assert_eq!(v[1].trace, t("ba"));
    }

    #[test]
    fn empty_document() {
        assert_eq!(
            write_results(&ResultDocument::default()),
            r#"{"schema":"skipalign-results/1","traces":[]}"#
        );
        assert!(read_results(r#"{"schema":"other/2","traces":[]}"#).is_err());
    }
}
