//! Line-protocol adapter for engines running as separate programs.
//!
//! Each request is one JSON object on the program's stdin (amounts in cents,
//! booleans, filing status as a string); each reply is one decimal dollar
//! amount on stdout. A failed call kills the program; the next call starts a
//! fresh one.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use mm1040_core::{Money, Sut, SutError, TaxReturnInput};

pub const DEFAULT_CALL_TIMEOUT: Duration = Duration::from_secs(5);

struct Running {
    child: Child,
    stdin: ChildStdin,
    replies: Receiver<std::io::Result<String>>,
}

pub struct ExternalSut {
    program: PathBuf,
    args: Vec<String>,
    timeout: Duration,
    running: Option<Running>,
}

/// Checks that `path` names an executable regular file.
pub fn check_executable(path: &Path) -> Result<(), String> {
    let meta = std::fs::metadata(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if !meta.is_file() {
        return Err(format!("{} is not a file", path.display()));
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        if meta.permissions().mode() & 0o111 == 0 {
            return Err(format!("{} is not executable", path.display()));
        }
    }
    Ok(())
}

impl ExternalSut {
    pub fn new(program: impl Into<PathBuf>) -> ExternalSut {
        ExternalSut { program: program.into(), args: Vec::new(), timeout: DEFAULT_CALL_TIMEOUT, running: None }
    }

    pub fn args(mut self, args: impl IntoIterator<Item = impl Into<String>>) -> ExternalSut {
        self.args = args.into_iter().map(Into::into).collect();
        self
    }

    pub fn timeout(mut self, t: Duration) -> ExternalSut {
        self.timeout = t;
        self
    }

    /// Starts the program now instead of on the first call.
    pub fn start(&mut self) -> Result<(), SutError> {
        self.running()?;
        Ok(())
    }

    fn running(&mut self) -> Result<&mut Running, SutError> {
        if self.running.is_none() {
            let mut child = Command::new(&self.program)
                .args(&self.args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()
                .map_err(|e| SutError::Io(format!("cannot start {}: {e}", self.program.display())))?;
            let stdin = child.stdin.take().expect("piped stdin");
            let stdout = child.stdout.take().expect("piped stdout");
            let (tx, rx) = mpsc::channel();
            std::thread::spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    if tx.send(line).is_err() {
                        break;
                    }
                }
            });
            self.running = Some(Running { child, stdin, replies: rx });
        }
        Ok(self.running.as_mut().expect("just started"))
    }

    fn call(&mut self, r: &TaxReturnInput) -> Result<Money, SutError> {
        let timeout = self.timeout;
        let run = self.running()?;
        let mut request = serde_json::to_string(r).map_err(|e| SutError::Io(e.to_string()))?;
        request.push('\n');
        run.stdin
            .write_all(request.as_bytes())
            .and_then(|_| run.stdin.flush())
            .map_err(|e| SutError::Exited(format!("write failed: {e}")))?;
        match run.replies.recv_timeout(timeout) {
            Ok(Ok(line)) => line.trim().parse::<Money>().map_err(|_| SutError::BadReply(line)),
            Ok(Err(e)) => Err(SutError::Io(e.to_string())),
            Err(RecvTimeoutError::Timeout) => Err(SutError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                let status = run.child.wait().map(|s| s.to_string()).unwrap_or_else(|e| e.to_string());
                Err(SutError::Exited(status))
            }
        }
    }

    fn stop(&mut self) {
        if let Some(mut run) = self.running.take() {
            let _ = run.child.kill();
            let _ = run.child.wait();
        }
    }
}

impl Sut for ExternalSut {
    fn federal_tax_return(&mut self, r: &TaxReturnInput) -> Result<Money, SutError> {
        let out = self.call(r);
        if out.is_err() {
            self.stop();
        }
        out
    }
}

impl Drop for ExternalSut {
    fn drop(&mut self) {
        self.stop();
    }
}
