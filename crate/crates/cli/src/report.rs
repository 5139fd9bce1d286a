use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde_json::Value;

/// Prints each record as a text line and, when asked, mirrors it as one JSON
/// object per line in a separate file.
pub struct Reporter {
    jsonl: Option<BufWriter<File>>,
    failures: usize,
}

impl Reporter {
    pub fn new(jsonl: Option<&Path>) -> anyhow::Result<Self> {
        let jsonl = match jsonl {
            Some(p) => {
                Some(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
            }
            None => None,
        };
        Ok(Reporter { jsonl, failures: 0 })
    }

    pub fn record(&mut self, text: impl AsRef<str>, mut json: Value) -> anyhow::Result<()> {
        println!("{}", text.as_ref());
        if let Some(w) = &mut self.jsonl {
            if let Value::Object(map) = &mut json {
                map.entry("text").or_insert_with(|| Value::String(text.as_ref().to_string()));
            }
            serde_json::to_writer(&mut *w, &json)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Records a named check and remembers whether it failed.
    pub fn check(&mut self, name: &str, ok: bool, detail: impl AsRef<str>) -> anyhow::Result<()> {
        if !ok {
            self.failures += 1;
        }
        let status = if ok { "ok" } else { "FAIL" };
        let text = match detail.as_ref() {
            "" => format!("{status} {name}"),
            d => format!("{status} {name} {d}"),
        };
        self.record(text, serde_json::json!({ "check": name, "ok": ok, "detail": detail.as_ref() }))
    }

    pub fn finish(mut self) -> anyhow::Result<usize> {
        if let Some(w) = &mut self.jsonl {
            w.flush()?;
        }
        Ok(self.failures)
    }
}
