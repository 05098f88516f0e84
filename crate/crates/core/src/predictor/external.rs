use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use super::{Label, Predictor};
use crate::error::{Error, Result};
use crate::schema::{write_instances_csv, FeatureSchema, Instance};

/// A predictor backed by a long-running child process.
///
/// Each batch is written to the process's stdin as CSV (header row
/// included) followed by one blank line. The process answers with exactly
/// one `0` or `1` line per data row, in order. Batches are serialized: one
/// conversation with the process at a time, so concurrent callers queue on
/// an internal lock. The process is started on the first batch and
/// restarted after a failure. The process must answer each batch as soon
/// as it has read it and flush its output; programs that buffer stdin until
/// end of stream will stall.
pub struct ExternalPredictor {
    command: String,
    schema: FeatureSchema,
    session: Mutex<Option<Session>>,
}

struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    stderr: Arc<Mutex<Vec<u8>>>,
    drain: Option<JoinHandle<()>>,
}

impl Session {
    fn start(command: &str) -> std::io::Result<Session> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut err_pipe = child.stderr.take().expect("piped stderr");
        let stderr = Arc::new(Mutex::new(Vec::new()));
        let sink = Arc::clone(&stderr);
        let drain = std::thread::spawn(move || {
            let mut buf = [0u8; 4096];
            while let Ok(n) = err_pipe.read(&mut buf) {
                if n == 0 {
                    break;
                }
                sink.lock().unwrap().extend_from_slice(&buf[..n]);
            }
        });
        Ok(Session {
            child,
            stdin,
            stdout,
            stderr,
            drain: Some(drain),
        })
    }

    /// Waits for the process to finish and describes how it ended.
    fn post_mortem(mut self) -> String {
        drop(self.stdin.take());
        let status = self.child.wait();
        if let Some(handle) = self.drain.take() {
            let _ = handle.join();
        }
        let stderr = String::from_utf8_lossy(&self.stderr.lock().unwrap()).trim().to_string();
        let status = match status {
            Ok(s) => s.to_string(),
            Err(e) => format!("unknown status ({e})"),
        };
        if stderr.is_empty() {
            status
        } else {
            format!("{status}; stderr: {stderr}")
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if self.drain.is_some() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

impl ExternalPredictor {
    pub fn new(command: &str, schema: &FeatureSchema) -> Self {
        ExternalPredictor {
            command: command.to_string(),
            schema: schema.clone(),
            session: Mutex::new(None),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn fail(&self, message: String) -> Error {
        Error::predictor(format!("external `{}`", self.command), message)
    }

    fn converse(&self, session: &mut Session, batch: &[Instance]) -> std::result::Result<Vec<Label>, String> {
        let mut request = Vec::new();
        write_instances_csv(&self.schema, batch, None, &mut request).map_err(|e| e.to_string())?;
        request.push(b'\n');
        let stdin = session.stdin.as_mut().expect("stdin open while the session lives");
        stdin
            .write_all(&request)
            .and_then(|_| stdin.flush())
            .map_err(|e| format!("writing batch: {e}"))?;

        let mut labels = Vec::with_capacity(batch.len());
        let mut line = String::new();
        while labels.len() < batch.len() {
            line.clear();
            let read = session
                .stdout
                .read_line(&mut line)
                .map_err(|e| format!("reading labels: {e}"))?;
            if read == 0 {
                return Err(format!(
                    "expected {} labels, got {} before end of output",
                    batch.len(),
                    labels.len()
                ));
            }
            match line.trim() {
                "0" => labels.push(0),
                "1" => labels.push(1),
                "" => {
                    return Err(format!(
                        "expected {} labels, got {} before a blank line",
                        batch.len(),
                        labels.len()
                    ))
                }
                other => return Err(format!("label must be 0 or 1, got '{other}'")),
            }
        }
        Ok(labels)
    }
}

impl Predictor for ExternalPredictor {
    fn name(&self) -> &str {
        &self.command
    }

    fn predict_batch(&self, batch: &[Instance]) -> Result<Vec<Label>> {
        if batch.is_empty() {
            return Ok(Vec::new());
        }
        let mut guard = self.session.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
        if guard.is_none() {
            *guard = Some(Session::start(&self.command).map_err(|e| self.fail(format!("cannot start: {e}")))?);
        }
        let session = guard.as_mut().expect("session started");
        match self.converse(session, batch) {
            Ok(labels) => Ok(labels),
            Err(message) => {
                let session = guard.take().expect("session present");
                let ending = session.post_mortem();
                Err(self.fail(format!("{message} (process: {ending})")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FeatureSpec, Value};

    fn schema() -> FeatureSchema {
        FeatureSchema::new(vec![FeatureSpec::numeric("x", 4)]).unwrap()
    }

    fn rows(n: usize) -> Vec<Instance> {
        (0..n).map(|i| vec![Value::Numeric(i as f64)]).collect()
    }

    /// Answers `f(line)` for every data row, skipping each batch's header.
    fn responder(f: &str) -> String {
        format!(r#"h=1; while IFS= read -r l; do if [ -z "$l" ]; then h=1; elif [ $h = 1 ]; then h=0; else {f}; fi; done"#)
    }

    #[test]
    fn constant_zero_process() {
        let p = ExternalPredictor::new(&responder("echo 0"), &schema());
        assert_eq!(p.predict_batch(&rows(3)).unwrap(), vec![0, 0, 0]);
        // the same process serves later batches
        assert_eq!(p.predict_batch(&rows(5)).unwrap(), vec![0; 5]);
    }

    #[test]
    fn order_is_preserved() {
        let p = ExternalPredictor::new(&responder("echo $((l % 2))"), &schema());
        assert_eq!(p.predict_batch(&rows(3)).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn failing_process_reports_stderr() {
        let p = ExternalPredictor::new("echo boom >&2; exit 1", &schema());
        let err = p.predict_batch(&rows(2)).unwrap_err().to_string();
        assert!(err.contains("boom"), "{err}");
        assert!(err.contains("exit status: 1"), "{err}");
    }

    #[test]
    fn short_output_is_an_error() {
        let p = ExternalPredictor::new("read h; echo 0; exit 0", &schema());
        let err = p.predict_batch(&rows(3)).unwrap_err().to_string();
        assert!(err.contains("expected 3 labels, got 1"), "{err}");
    }

    #[test]
    fn bad_token_is_an_error() {
        let p = ExternalPredictor::new("while read l; do echo yes; done", &schema());
        let err = p.predict_batch(&rows(1)).unwrap_err().to_string();
        assert!(err.contains("got 'yes'"), "{err}");
    }
}
