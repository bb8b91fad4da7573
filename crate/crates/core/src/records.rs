//! JSON-lines output records.

use serde::{Deserialize, Serialize};

use crate::tasks::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Mono,
    Multi,
    Spans,
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mono" => Ok(Task::Mono),
            "multi" => Ok(Task::Multi),
            "spans" => Ok(Task::Spans),
            other => Err(format!("unknown task `{other}` (expected mono, multi or spans)")),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Mono => "mono",
            Task::Multi => "multi",
            Task::Spans => "spans",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguageShare {
    pub tag: String,
    pub fraction: f64,
}

/// One output line per input document. Exactly one of the payload fields
/// (`tag`, `languages`, `spans`, `error`) is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    /// Zero-based position of the document in the input.
    pub id: usize,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    /// Detected languages; `fraction` is the share of characters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub languages: Option<Vec<LanguageShare>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spans: Option<Vec<Span>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    fn empty(id: usize, task: Task) -> Self {
        PredictionRecord {
            id,
            task,
            tag: None,
            languages: None,
            spans: None,
            error: None,
        }
    }

    pub fn mono(id: usize, tag: String) -> Self {
        PredictionRecord {
            tag: Some(tag),
            ..Self::empty(id, Task::Mono)
        }
    }

    pub fn multi(id: usize, languages: Vec<LanguageShare>) -> Self {
        PredictionRecord {
            languages: Some(languages),
            ..Self::empty(id, Task::Multi)
        }
    }

    pub fn spans(id: usize, spans: Vec<Span>) -> Self {
        PredictionRecord {
            spans: Some(spans),
            ..Self::empty(id, Task::Spans)
        }
    }

    pub fn error(id: usize, task: Task, message: String) -> Self {
        PredictionRecord {
            error: Some(message),
            ..Self::empty(id, task)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema() {
        assert_eq!(
            PredictionRecord::mono(0, "eng".into()).to_json(),
            r#"{"id":0,"task":"mono","tag":"eng"}"#
        );
        let r = PredictionRecord::multi(
            3,
            vec![LanguageShare {
                tag: "deu".into(),
                fraction: 0.5,
            }],
        );
        assert_eq!(r.to_json(), r#"{"id":3,"task":"multi","languages":[{"tag":"deu","fraction":0.5}]}"#);
        let s = PredictionRecord::spans(
            1,
            vec![Span {
                start: 0,
                end: 4,
                tag: "fra".into(),
            }],
        );
        assert_eq!(s.to_json(), r#"{"id":1,"task":"spans","spans":[{"start":0,"end":4,"tag":"fra"}]}"#);
        let e = PredictionRecord::error(2, Task::Mono, "empty document".into());
        assert_eq!(e.to_json(), r#"{"id":2,"task":"mono","error":"empty document"}"#);
        let back: PredictionRecord = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
