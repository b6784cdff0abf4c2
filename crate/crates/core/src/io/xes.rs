//! Minimal XES 1.0 subset: `concept:name` for traces and events,
//! `time:timestamp` for events, typed attributes, and event-scope globals.
//!
//! Missing attribute values are not written. Every attribute key seen on
//! any event is declared as an event-scope global, and on read an event
//! lacking a declared key gets it back as [`AttributeValue::Missing`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use chrono::{DateTime, NaiveDate};
use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;
use thiserror::Error;

use crate::model::{AttributeValue, Event, EventLog};

const CONCEPT_NAME: &str = "concept:name";
const TIME_TIMESTAMP: &str = "time:timestamp";

#[derive(Debug, Error)]
pub enum XesError {
    #[error("malformed XML at byte {position}: {message}")]
    Xml { position: u64, message: String },
    #[error("{what} at byte {position} has no concept:name")]
    MissingName { what: &'static str, position: u64 },
    #[error("event at byte {position} has no time:timestamp")]
    MissingTimestamp { position: u64 },
    #[error("invalid {kind} value '{value}' for key '{key}' at byte {position}")]
    InvalidValue {
        kind: String,
        key: String,
        value: String,
        position: u64,
    },
    #[error("document has no <log> element")]
    NoLog,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_date(d: NaiveDate) -> String {
    format!("{}T00:00:00.000+00:00", d.format("%Y-%m-%d"))
}

fn type_tag(v: &AttributeValue) -> Option<&'static str> {
    match v {
        AttributeValue::Integer(_) => Some("int"),
        AttributeValue::Real(_) => Some("float"),
        AttributeValue::Boolean(_) => Some("boolean"),
        AttributeValue::Text(_) => Some("string"),
        AttributeValue::Timestamp(_) => Some("date"),
        AttributeValue::Missing => None,
    }
}

fn default_for(tag: &str) -> &'static str {
    match tag {
        "int" => "0",
        "float" => "0.0",
        "boolean" => "false",
        "date" => "1970-01-01T00:00:00.000+00:00",
        _ => "__INVALID__",
    }
}

fn write_attr(out: &mut String, indent: &str, tag: &str, key: &str, value: &str) {
    let _ = writeln!(
        out,
        "{indent}<{tag} key=\"{}\" value=\"{}\"/>",
        escape(key),
        escape(value)
    );
}

fn value_text(v: &AttributeValue) -> String {
    match v {
        AttributeValue::Integer(i) => i.to_string(),
        AttributeValue::Real(r) => {
            let s = r.to_string();
            if s.contains(['.', 'e', 'E', 'i', 'N']) {
                s
            } else {
                format!("{s}.0")
            }
        }
        AttributeValue::Boolean(b) => b.to_string(),
        AttributeValue::Text(s) => s.clone(),
        AttributeValue::Timestamp(d) => format_date(*d),
        AttributeValue::Missing => String::new(),
    }
}

/// Serializes the log with traces in case order and events in trace order.
pub fn write_xes<W: Write>(log: &EventLog, mut out: W) -> Result<(), XesError> {
    // Global type per key: first non-missing value's type, string otherwise.
    let mut globals: BTreeMap<&str, &'static str> = BTreeMap::new();
    let mut keys: BTreeSet<&str> = BTreeSet::new();
    for e in &log.events {
        for (k, v) in &e.attributes {
            keys.insert(k);
            if let Some(tag) = type_tag(v) {
                globals.entry(k).or_insert(tag);
            }
        }
    }

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<log xes.version=\"1.0\" xes.features=\"\" xmlns=\"http://www.xes-standard.org/\">\n");
    s.push_str("  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n");
    s.push_str("  <extension name=\"Time\" prefix=\"time\" uri=\"http://www.xes-standard.org/time.xesext\"/>\n");
    s.push_str("  <global scope=\"trace\">\n");
    write_attr(&mut s, "    ", "string", CONCEPT_NAME, "__INVALID__");
    s.push_str("  </global>\n");
    s.push_str("  <global scope=\"event\">\n");
    write_attr(&mut s, "    ", "string", CONCEPT_NAME, "__INVALID__");
    write_attr(&mut s, "    ", "date", TIME_TIMESTAMP, default_for("date"));
    for k in &keys {
        let tag = globals.get(k).copied().unwrap_or("string");
        write_attr(&mut s, "    ", tag, k, default_for(tag));
    }
    s.push_str("  </global>\n");

    for trace in log.traces() {
        s.push_str("  <trace>\n");
        write_attr(&mut s, "    ", "string", CONCEPT_NAME, trace.case_id);
        for e in trace.events {
            s.push_str("    <event>\n");
            write_attr(&mut s, "      ", "string", CONCEPT_NAME, &e.activity);
            write_attr(&mut s, "      ", "date", TIME_TIMESTAMP, &format_date(e.timestamp));
            for (k, v) in &e.attributes {
                if let Some(tag) = type_tag(v) {
                    write_attr(&mut s, "      ", tag, k, &value_text(v));
                }
            }
            s.push_str("    </event>\n");
        }
        s.push_str("  </trace>\n");
    }
    s.push_str("</log>\n");
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_xes_string(log: &EventLog) -> String {
    let mut buf = Vec::new();
    write_xes(log, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("XES output is UTF-8")
}

#[derive(Default)]
struct PendingEvent {
    name: Option<String>,
    timestamp: Option<NaiveDate>,
    attributes: BTreeMap<String, AttributeValue>,
    position: u64,
}

enum Scope {
    Log,
    GlobalEvent,
    GlobalOther,
    Trace,
    Event,
}

fn parse_date(raw: &str) -> Option<NaiveDate> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.naive_utc().date());
    }
    NaiveDate::parse_from_str(raw.get(..10)?, "%Y-%m-%d").ok()
}

fn parse_value(tag: &str, raw: &str) -> Option<AttributeValue> {
    Some(match tag {
        "int" => AttributeValue::Integer(raw.parse().ok()?),
        "float" => AttributeValue::Real(raw.parse().ok()?),
        "boolean" => AttributeValue::Boolean(match raw.to_ascii_lowercase().as_str() {
            "true" => true,
            "false" => false,
            _ => return None,
        }),
        "date" => AttributeValue::Timestamp(parse_date(raw)?),
        "string" | "id" => AttributeValue::Text(raw.to_string()),
        _ => return None,
    })
}

fn key_value(start: &BytesStart<'_>, position: u64) -> Result<(String, String), XesError> {
    let mut key = None;
    let mut value = None;
    for attr in start.attributes() {
        let attr = attr.map_err(|e| XesError::Xml {
            position,
            message: e.to_string(),
        })?;
        let v = attr
            .unescape_value()
            .map_err(|e| XesError::Xml {
                position,
                message: e.to_string(),
            })?
            .into_owned();
        match attr.key.as_ref() {
            b"key" => key = Some(v),
            b"value" => value = Some(v),
            _ => {}
        }
    }
    match (key, value) {
        (Some(k), Some(v)) => Ok((k, v)),
        _ => Err(XesError::Xml {
            position,
            message: "attribute element needs key and value".into(),
        }),
    }
}

fn scope_of(start: &BytesStart<'_>) -> Option<String> {
    start
        .attributes()
        .flatten()
        .find(|a| a.key.as_ref() == b"scope")
        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()))
}

/// Parses a document written by [`write_xes`] or any XES file using the
/// same subset. Nested attribute lists are ignored.
pub fn read_xes(bytes: &[u8]) -> Result<EventLog, XesError> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(true);

    let mut stack: Vec<Scope> = Vec::new();
    let mut seen_log = false;
    let mut global_event_keys: BTreeSet<String> = BTreeSet::new();
    let mut trace_name: Option<String> = None;
    let mut trace_pos = 0u64;
    let mut trace_events: Vec<PendingEvent> = Vec::new();
    let mut current: Option<PendingEvent> = None;
    let mut events: Vec<Event> = Vec::new();
    // depth of ignored nested attribute content
    let mut skip_depth = 0usize;
    let mut buf = Vec::new();

    loop {
        let position = reader.buffer_position();
        let ev = reader.read_event_into(&mut buf).map_err(|e| XesError::Xml {
            position: reader.error_position(),
            message: e.to_string(),
        })?;
        let (start, is_empty) = match &ev {
            XmlEvent::Start(s) => (Some(s.to_owned()), false),
            XmlEvent::Empty(s) => (Some(s.to_owned()), true),
            XmlEvent::End(_) => (None, false),
            XmlEvent::Eof => break,
            _ => {
                buf.clear();
                continue;
            }
        };

        if let Some(start) = start {
            if skip_depth > 0 {
                if !is_empty {
                    skip_depth += 1;
                }
                buf.clear();
                continue;
            }
            let name = start.name().as_ref().to_vec();
            match name.as_slice() {
                b"log" => {
                    seen_log = true;
                    if !is_empty {
                        stack.push(Scope::Log);
                    }
                }
                b"global" => {
                    if !is_empty {
                        let scope = if scope_of(&start).as_deref() == Some("event") {
                            Scope::GlobalEvent
                        } else {
                            Scope::GlobalOther
                        };
                        stack.push(scope);
                    }
                }
                b"trace" => {
                    trace_name = None;
                    trace_pos = position;
                    trace_events.clear();
                    if is_empty {
                        return Err(XesError::MissingName {
                            what: "trace",
                            position,
                        });
                    }
                    stack.push(Scope::Trace);
                }
                b"event" => {
                    current = Some(PendingEvent {
                        position,
                        ..Default::default()
                    });
                    if is_empty {
                        return Err(XesError::MissingName {
                            what: "event",
                            position,
                        });
                    }
                    stack.push(Scope::Event);
                }
                b"string" | b"date" | b"int" | b"float" | b"boolean" | b"id" => {
                    let tag = String::from_utf8_lossy(&name).into_owned();
                    let (key, raw) = key_value(&start, position)?;
                    match stack.last() {
                        Some(Scope::GlobalEvent) => {
                            global_event_keys.insert(key);
                        }
                        Some(Scope::Trace) if key == CONCEPT_NAME => trace_name = Some(raw),
                        Some(Scope::Event) => {
                            let pending = current.as_mut().expect("event scope has pending event");
                            if key == CONCEPT_NAME {
                                pending.name = Some(raw);
                            } else if key == TIME_TIMESTAMP {
                                pending.timestamp = Some(parse_date(&raw).ok_or_else(|| {
                                    XesError::InvalidValue {
                                        kind: tag.clone(),
                                        key: key.clone(),
                                        value: raw.clone(),
                                        position,
                                    }
                                })?);
                            } else {
                                let value = parse_value(&tag, &raw).ok_or_else(|| {
                                    XesError::InvalidValue {
                                        kind: tag.clone(),
                                        key: key.clone(),
                                        value: raw.clone(),
                                        position,
                                    }
                                })?;
                                pending.attributes.insert(key, value);
                            }
                        }
                        _ => {}
                    }
                    if !is_empty {
                        skip_depth = 1;
                    }
                }
                _ => {
                    if !is_empty {
                        skip_depth = 1;
                    }
                }
            }
        } else {
            // End tag
            if skip_depth > 0 {
                skip_depth -= 1;
                buf.clear();
                continue;
            }
            match stack.pop() {
                Some(Scope::Event) => {
                    let pending = current.take().expect("closing event has pending event");
                    if pending.name.is_none() {
                        return Err(XesError::MissingName {
                            what: "event",
                            position: pending.position,
                        });
                    }
                    if pending.timestamp.is_none() {
                        return Err(XesError::MissingTimestamp {
                            position: pending.position,
                        });
                    }
                    trace_events.push(pending);
                }
                Some(Scope::Trace) => {
                    let case_id = trace_name.take().ok_or(XesError::MissingName {
                        what: "trace",
                        position: trace_pos,
                    })?;
                    for pending in trace_events.drain(..) {
                        let mut attributes = pending.attributes;
                        for k in &global_event_keys {
                            if k != CONCEPT_NAME && k != TIME_TIMESTAMP {
                                attributes
                                    .entry(k.clone())
                                    .or_insert(AttributeValue::Missing);
                            }
                        }
                        events.push(Event {
                            case_id: case_id.clone(),
                            activity: pending.name.expect("checked above"),
                            timestamp: pending.timestamp.expect("checked above"),
                            attributes,
                        });
                    }
                }
                _ => {}
            }
        }
        buf.clear();
    }
    if !seen_log {
        return Err(XesError::NoLog);
    }
    if !stack.is_empty() {
        return Err(XesError::Xml {
            position: bytes.len() as u64,
            message: "document ended inside an open element".into(),
        });
    }
    Ok(EventLog::new(events))
}
