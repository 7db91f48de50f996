//! Line-oriented `key: value` reports followed by a JSON block.

use std::fmt::Write as _;

use serde_json::Value;

pub const JSON_MARKER: &str = "--- json";

#[derive(Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self, json: &Value) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k}: {v}");
        }
        let _ = writeln!(s, "{JSON_MARKER}");
        let _ = writeln!(s, "{}", serde_json::to_string_pretty(json).expect("json values serialize"));
        s
    }
}
