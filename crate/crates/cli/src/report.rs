use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const TOOL: &str = "apportion";

#[derive(Serialize)]
pub struct Timings {
    pub wall_ms: f64,
}

/// The JSON document every command can emit. Only `timings` depends on
/// anything but the inputs.
#[derive(Serialize)]
pub struct ReportFile {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: Value,
    pub arithmetic: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    pub results: Value,
    pub timings: Timings,
}

impl ReportFile {
    pub fn new(command: &'static str, input: Value, arithmetic: String, rule: Option<String>, results: Value, start: Instant) -> Self {
        ReportFile {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command,
            input,
            arithmetic,
            rule,
            results,
            timings: Timings {
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json())
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("value serializes")
}
