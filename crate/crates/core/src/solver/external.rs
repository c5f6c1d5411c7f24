//! Driving an external grounder/solver pipeline as child processes.
//!
//! A pipeline is written like a shell pipe, `gringo | clasp`, or as a
//! single command (`clingo`). Every `|` separates stages, quoted or not;
//! within a stage, words follow shell quoting rules. The program text goes to the first stage's
//! standard input; the last stage's standard output is parsed. An optional
//! `smodels:` or `clasp:` prefix fixes the output dialect; otherwise it is
//! smodels-classic when the last stage mentions `smodels` and clasp-style
//! otherwise.
//!
//! Accepted exit codes: 0 for every stage in the smodels dialect; 0, 10,
//! 20 or 30 for the last stage in the clasp dialect (clasp encodes the
//! verdict in its exit status), 0 for earlier stages.
//!
//! ```text
//! QSM_SOLVER="clingo --outf=0"
//! QSM_SOLVER="gringo | clasp"
//! QSM_SOLVER="smodels:gringo --output=smodels | smodels"
//! ```

use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use thiserror::Error;
use wait_timeout::ChildExt;

use super::output::{parse_answer_set, SolverOutput};
use super::SolveResult;
use crate::encoder::LogicProgramText;

/// Environment variable holding a pipeline that overrides the configured one.
pub const SOLVER_ENV: &str = "QSM_SOLVER";

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(8);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Smodels,
    Clasp,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("empty pipeline")]
    Empty,
    #[error("empty stage {0}")]
    EmptyStage(usize),
    #[error("unbalanced quotes in `{0}`")]
    Quoting(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalConfig {
    /// Each stage is a program followed by its arguments.
    pub stages: Vec<Vec<String>>,
    pub dialect: Dialect,
    pub timeout: Duration,
}

impl Default for ExternalConfig {
    fn default() -> Self {
        ExternalConfig::parse("clingo").expect("literal pipeline")
    }
}

impl ExternalConfig {
    pub fn parse(spec: &str) -> Result<Self, PipelineError> {
        let (forced, rest) = match spec.trim().split_once(':') {
            Some(("smodels", r)) => (Some(Dialect::Smodels), r),
            Some(("clasp", r)) => (Some(Dialect::Clasp), r),
            _ => (None, spec),
        };
        if rest.trim().is_empty() {
            return Err(PipelineError::Empty);
        }
        let mut stages = Vec::new();
        for (i, part) in rest.split('|').enumerate() {
            let words =
                shlex::split(part).ok_or_else(|| PipelineError::Quoting(part.trim().to_owned()))?;
            if words.is_empty() {
                return Err(PipelineError::EmptyStage(i));
            }
            stages.push(words);
        }
        let last = &stages[stages.len() - 1][0];
        let dialect = forced.unwrap_or(if last.contains("smodels") {
            Dialect::Smodels
        } else {
            Dialect::Clasp
        });
        Ok(ExternalConfig {
            stages,
            dialect,
            timeout: DEFAULT_TIMEOUT,
        })
    }

    /// The pipeline from `QSM_SOLVER` if set, otherwise `fallback`.
    pub fn from_env_or(fallback: ExternalConfig) -> Result<Self, PipelineError> {
        match std::env::var(SOLVER_ENV) {
            Ok(spec) if !spec.trim().is_empty() => {
                let mut cfg = ExternalConfig::parse(&spec)?;
                cfg.timeout = fallback.timeout;
                Ok(cfg)
            }
            _ => Ok(fallback),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Whether every stage's program can be found (on `PATH` or as a path).
    pub fn is_installed(&self) -> bool {
        self.stages.iter().all(|s| find_program(&s[0]))
    }

    fn exit_ok(&self, stage: usize, code: Option<i32>) -> bool {
        let last = stage + 1 == self.stages.len();
        matches!(
            (self.dialect, last, code),
            (Dialect::Clasp, true, Some(0 | 10 | 20 | 30)) | (_, _, Some(0))
        )
    }
}

fn find_program(name: &str) -> bool {
    if name.contains('/') {
        return std::path::Path::new(name).is_file();
    }
    std::env::var_os("PATH")
        .is_some_and(|paths| std::env::split_paths(&paths).any(|dir| dir.join(name).is_file()))
}

fn read_all<R: Read + Send + 'static>(mut r: R) -> JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        buf
    })
}

/// Kills and waits on every child so none outlives the call. Each stage
/// leads its own process group, so helpers a stage forked die with it.
fn reap(children: &mut [Child]) {
    for c in children.iter_mut() {
        #[cfg(unix)]
        if let Ok(pid) = libc::pid_t::try_from(c.id()) {
            // SAFETY: plain syscall; the group id is the still-unreaped child's pid.
            unsafe {
                libc::kill(-pid, libc::SIGKILL);
            }
        }
        let _ = c.kill();
        let _ = c.wait();
    }
}

fn command(stage: &[String]) -> Command {
    let mut cmd = Command::new(&stage[0]);
    cmd.args(&stage[1..]);
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    cmd
}

/// Pipes `program` through the configured stages and parses the first model.
/// Every failure, including a timeout, becomes [`SolveResult::SolverFailure`].
pub fn solve_external(program: &LogicProgramText, config: &ExternalConfig) -> SolveResult {
    match run_pipeline(program.as_str(), config) {
        Ok(out) => out,
        Err(diagnostic) => SolveResult::SolverFailure(diagnostic),
    }
}

fn run_pipeline(program: &str, config: &ExternalConfig) -> Result<SolveResult, String> {
    if config.stages.is_empty() {
        return Err(PipelineError::Empty.to_string());
    }
    let started = Instant::now();
    let mut children: Vec<Child> = Vec::new();
    let mut stderr_readers = Vec::new();
    let mut upstream: Option<Stdio> = None;
    for stage in &config.stages {
        let stdin = upstream.take().unwrap_or_else(Stdio::piped);
        let spawned = command(stage)
            .stdin(stdin)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn();
        let mut child = match spawned {
            Ok(c) => c,
            Err(e) => {
                reap(&mut children);
                return Err(format!("spawn failed: {}: {e}", stage[0]));
            }
        };
        if let Some(err) = child.stderr.take() {
            stderr_readers.push(read_all(err));
        }
        children.push(child);
        let last = children.len() == config.stages.len();
        if !last {
            let out = children
                .last_mut()
                .and_then(|c| c.stdout.take())
                .expect("piped stdout");
            upstream = Some(Stdio::from(out));
        }
    }

    let stdin = children[0].stdin.take().expect("piped stdin");
    let text = program.to_owned();
    let writer = thread::spawn(move || {
        let mut stdin = stdin;
        // A stage that exits early closes its input; that shows up in its
        // exit status, not here.
        let _ = stdin.write_all(text.as_bytes());
    });
    let stdout = children
        .last_mut()
        .and_then(|c| c.stdout.take())
        .expect("piped stdout");
    let stdout_reader = read_all(stdout);

    let mut codes = Vec::with_capacity(children.len());
    for i in 0..children.len() {
        let remaining = config.timeout.saturating_sub(started.elapsed());
        match children[i].wait_timeout(remaining) {
            Ok(Some(status)) => codes.push(status.code()),
            Ok(None) => {
                reap(&mut children);
                return Err(format!(
                    "timeout after {:.1} s",
                    config.timeout.as_secs_f64()
                ));
            }
            Err(e) => {
                reap(&mut children);
                return Err(format!("wait failed: {e}"));
            }
        }
    }
    let _ = writer.join();
    let stdout = stdout_reader.join().unwrap_or_default();
    let stderrs: Vec<Vec<u8>> = stderr_readers
        .into_iter()
        .map(|h| h.join().unwrap_or_default())
        .collect();

    for (i, code) in codes.iter().enumerate() {
        if !config.exit_ok(i, *code) {
            let err = String::from_utf8_lossy(&stderrs[i]);
            let first = err
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("")
                .trim();
            let status = code.map_or_else(
                || "killed by signal".to_owned(),
                |c| format!("exit code {c}"),
            );
            return Err(format!(
                "{} failed with {status}: {first}",
                config.stages[i][0]
            ));
        }
    }
    let text = String::from_utf8_lossy(&stdout);
    match parse_answer_set(&text) {
        Ok(SolverOutput::Model(m)) => Ok(SolveResult::Sat(m)),
        Ok(SolverOutput::Unsat) => Ok(SolveResult::Unsat),
        Err(e) => Err(format!("unparseable output: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipeline_specs() {
        let c = ExternalConfig::parse("gringo | clasp --verbose=0").unwrap();
        assert_eq!(
            c.stages,
            vec![
                vec!["gringo".to_owned()],
                vec!["clasp".into(), "--verbose=0".into()]
            ]
        );
        assert_eq!(c.dialect, Dialect::Clasp);
        assert_eq!(c.timeout, DEFAULT_TIMEOUT);
        let c = ExternalConfig::parse("gringo --output=smodels | smodels").unwrap();
        assert_eq!(c.dialect, Dialect::Smodels);
        let c = ExternalConfig::parse("clasp:/opt/bin/my-smodels").unwrap();
        assert_eq!(c.dialect, Dialect::Clasp);
        assert_eq!(ExternalConfig::parse(" "), Err(PipelineError::Empty));
        assert_eq!(
            ExternalConfig::parse("a | | b"),
            Err(PipelineError::EmptyStage(1))
        );
        assert!(matches!(
            ExternalConfig::parse("a 'b"),
            Err(PipelineError::Quoting(_))
        ));
    }

    #[test]
    fn exit_codes() {
        let c = ExternalConfig::parse("gringo | clasp").unwrap();
        assert!(c.exit_ok(1, Some(10)));
        assert!(c.exit_ok(1, Some(20)));
        assert!(!c.exit_ok(0, Some(10)));
        assert!(!c.exit_ok(1, Some(1)));
        assert!(!c.exit_ok(1, None));
        let s = ExternalConfig::parse("lparse | smodels").unwrap();
        assert!(!s.exit_ok(1, Some(10)));
    }

    #[test]
    fn missing_binary() {
        let c = ExternalConfig::parse("/nonexistent/qsm-solver").unwrap();
        assert!(!c.is_installed());
        match solve_external(&LogicProgramText("a.".into()), &c) {
            SolveResult::SolverFailure(d) => assert!(d.starts_with("spawn failed: "), "{d}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
