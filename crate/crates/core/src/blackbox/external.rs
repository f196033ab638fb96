//! Runs an external process as a black-box program.
//!
//! Wire protocol: one JSON object per line on the child's stdin,
//! `{"id": <int>, "inputs": [<value>...]}`, answered by one line on its
//! stdout, either `{"id": <int>, "output": <value>}` or
//! `{"id": <int>, "error": <string>}`. Values use the encoding of
//! [`encode_value`](super::encode_value).
//!
//! Requests are serialized: at most one is in flight. Responses are memoized
//! per input tuple for the lifetime of the adapter. A child that dies, times
//! out, or violates the protocol is killed and restarted on the next request.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{decode_value, encode_value, Program, ProgramError, ProgramResult};
use crate::mapping::{SetValue, StructuralMapping};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
}

fn default_timeout_secs() -> f64 {
    DEFAULT_TIMEOUT.as_secs_f64()
}

impl ProcessSpec {
    pub fn new(command: impl Into<String>, args: &[&str]) -> Self {
        ProcessSpec {
            command: command.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
            timeout_secs: default_timeout_secs(),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout_secs = timeout.as_secs_f64();
        self
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs.max(0.0))
    }
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Drop for Running {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Default)]
struct State {
    running: Option<Running>,
    next_id: u64,
    memo: HashMap<String, ProgramResult>,
    round_trips: u64,
}

pub struct ExternalAdapter {
    spec: ProcessSpec,
    inputs: Vec<StructuralMapping>,
    output: StructuralMapping,
    state: Mutex<State>,
}

impl ExternalAdapter {
    pub fn new(spec: ProcessSpec, inputs: Vec<StructuralMapping>, output: StructuralMapping) -> Self {
        ExternalAdapter {
            spec,
            inputs,
            output,
            state: Mutex::new(State::default()),
        }
    }

    /// Requests that actually reached the child process.
    pub fn round_trips(&self) -> u64 {
        self.lock().round_trips
    }

    pub fn into_program(self: Arc<Self>, name: impl Into<String>) -> Program {
        let inputs = self.inputs.clone();
        let output = self.output.clone();
        Program::new(name, inputs, output, move |xs: &[SetValue]| self.call(xs))
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn spawn(&self) -> Result<Running, ProgramError> {
        let mut child = Command::new(&self.spec.command)
            .args(&self.spec.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ProgramError::external(format!("spawning {}: {e}", self.spec.command)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Running {
            child,
            stdin,
            lines: rx,
        })
    }

    pub fn call(&self, inputs: &[SetValue]) -> ProgramResult {
        let encoded = self
            .inputs
            .iter()
            .zip(inputs)
            .map(|(m, v)| encode_value(m, v))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ProgramError::invalid_input("inputs cannot be encoded"))?;
        let key = Value::Array(encoded.clone()).to_string();

        let mut state = self.lock();
        if let Some(hit) = state.memo.get(&key) {
            return hit.clone();
        }
        let id = state.next_id;
        state.next_id += 1;
        state.round_trips += 1;
        let result = self.round_trip(&mut state, id, encoded);
        match &result {
            // transport failures are not memoized so a restarted child can retry
            Err(e) if e.kind == super::ProgramErrorKind::ExternalFailure && state.running.is_none() => {}
            _ => {
                state.memo.insert(key, result.clone());
            }
        }
        result
    }

    fn round_trip(&self, state: &mut State, id: u64, inputs: Vec<Value>) -> ProgramResult {
        if state.running.is_none() {
            state.running = Some(self.spawn()?);
        }
        let outcome = self.exchange(state.running.as_mut().expect("spawned"), id, inputs);
        match outcome {
            Ok(r) => r,
            Err(transport) => {
                state.running = None;
                Err(transport)
            }
        }
    }

    /// Outer error: the child is unusable. Inner error: the program reported one.
    fn exchange(
        &self,
        running: &mut Running,
        id: u64,
        inputs: Vec<Value>,
    ) -> Result<ProgramResult, ProgramError> {
        let request = json!({ "id": id, "inputs": inputs });
        writeln!(running.stdin, "{request}")
            .and_then(|_| running.stdin.flush())
            .map_err(|e| ProgramError::external(format!("writing request: {e}")))?;
        let line = match running.lines.recv_timeout(self.spec.timeout()) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(ProgramError::external(format!("reading response: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(ProgramError::external(format!(
                    "timeout after {:.1} s",
                    self.spec.timeout_secs
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(ProgramError::external("process exited"))
            }
        };
        let response: Value = serde_json::from_str(&line)
            .map_err(|e| ProgramError::external(format!("protocol violation: {e}: {line:?}")))?;
        if response.get("id").and_then(Value::as_u64) != Some(id) {
            return Err(ProgramError::external(format!(
                "protocol violation: expected id {id} in {line:?}"
            )));
        }
        if let Some(msg) = response.get("error") {
            let msg = msg.as_str().map(str::to_string).unwrap_or_else(|| msg.to_string());
            return Ok(Err(ProgramError::invalid_input(msg)));
        }
        let output = response
            .get("output")
            .ok_or_else(|| ProgramError::external(format!("protocol violation: {line:?}")))?;
        decode_value(&self.output, output)
            .map(Ok)
            .ok_or_else(|| {
                ProgramError::external(format!(
                    "protocol violation: output {output} is not a {}",
                    self.output
                ))
            })
    }
}

/// Wraps an external process as a [`Program`].
pub fn external_program(
    spec: ProcessSpec,
    input_mappings: Vec<StructuralMapping>,
    output_mapping: StructuralMapping,
) -> Program {
    let name = format!("external:{}", spec.command);
    Arc::new(ExternalAdapter::new(spec, input_mappings, output_mapping)).into_program(name)
}
