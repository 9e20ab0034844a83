//! Job-spec wire format (schema version 1).

use serde::Deserialize;
use serde_json::Value;

use potint::Error;

pub use potint::wire::FunctionSpecJson;

pub const SCHEMA: u64 = 1;

/// Top-level job document. The command on the command line must agree with
/// the optional `command` field when both are present.
#[derive(Debug, Deserialize)]
pub struct JobFile {
    pub schema: u64,
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub inputs: Value,
}

impl JobFile {
    pub fn parse(text: &str, cli_command: &str) -> Result<Self, Error> {
        let job: JobFile =
            serde_json::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))?;
        if job.schema != SCHEMA {
            return Err(Error::MalformedSpec(format!(
                "unsupported schema version {} (this build reads {})",
                job.schema, SCHEMA
            )));
        }
        if let Some(c) = &job.command {
            if c != cli_command {
                return Err(Error::MalformedSpec(format!(
                    "spec file is for command `{c}`, invoked as `{cli_command}`"
                )));
            }
        }
        if let Some(t) = job.tol {
            if !(t > 0.0) {
                return Err(Error::MalformedSpec(format!(
                    "tol must be positive, got {t}"
                )));
            }
        }
        Ok(job)
    }

    pub fn decode_inputs<T: serde::de::DeserializeOwned>(&self) -> Result<T, Error> {
        serde_json::from_value(self.inputs.clone())
            .map_err(|e| Error::MalformedSpec(format!("inputs: {e}")))
    }
}
