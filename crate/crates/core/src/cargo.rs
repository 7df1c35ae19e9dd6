//! Driving cargo and libtest executables of a subject project.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::instrument::emitter::{MODE_VAR, SINK_VAR, TEST_ID_VAR};

/// A command running in `root` with a private target directory and no
/// capture variables inherited from the caller.
pub fn command(program: &str, root: &Path) -> Command {
    let mut cmd = Command::new(program);
    cmd.current_dir(root)
        .env("CARGO_TARGET_DIR", root.join("target"))
        .env("CARGO_INCREMENTAL", "0")
        .env_remove(SINK_VAR)
        .env_remove(MODE_VAR)
        .env_remove(TEST_ID_VAR);
    cmd
}

fn describe(cmd: &Command) -> String {
    let mut parts = vec![cmd.get_program().to_string_lossy().into_owned()];
    parts.extend(cmd.get_args().map(|a| a.to_string_lossy().into_owned()));
    parts.join(" ")
}

fn output(mut cmd: Command, what: &str) -> Result<std::process::Output> {
    let line = describe(&cmd);
    let out = cmd.output().map_err(|e| Error::Command {
        command: line.clone(),
        source: e,
    })?;
    if !out.status.success() {
        return Err(Error::Build {
            what: what.to_owned(),
            log: format!(
                "$ {line}\n{}{}",
                String::from_utf8_lossy(&out.stdout),
                String::from_utf8_lossy(&out.stderr)
            ),
        });
    }
    Ok(out)
}

/// Builds every target of the project.
pub fn build_all(root: &Path, what: &str) -> Result<()> {
    let mut cmd = command("cargo", root);
    cmd.args(["build", "--all-targets", "--quiet"]);
    output(cmd, what).map(|_| ())
}

/// A compiled libtest executable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestBinary {
    /// Cargo target name, e.g. `radio` for `tests/radio.rs`.
    pub target: String,
    /// Crate name used as the test-id prefix.
    pub crate_name: String,
    pub path: PathBuf,
}

#[derive(Deserialize)]
struct Message {
    reason: String,
    target: Option<MessageTarget>,
    profile: Option<Profile>,
    executable: Option<PathBuf>,
}

#[derive(Deserialize)]
struct MessageTarget {
    name: String,
}

#[derive(Deserialize)]
struct Profile {
    test: bool,
}

/// Compiles test executables (all of them, or only the integration test
/// `only`) and returns their paths.
pub fn build_tests(root: &Path, only: Option<&str>, what: &str) -> Result<Vec<TestBinary>> {
    let mut cmd = command("cargo", root);
    cmd.args(["test", "--no-run", "--message-format=json", "--quiet"]);
    if let Some(name) = only {
        cmd.args(["--test", name]);
    }
    let out = output(cmd, what)?;
    let mut binaries = Vec::new();
    for line in String::from_utf8_lossy(&out.stdout).lines() {
        let Ok(msg) = serde_json::from_str::<Message>(line) else {
            continue;
        };
        if msg.reason != "compiler-artifact" || !msg.profile.is_some_and(|p| p.test) {
            continue;
        }
        if let (Some(target), Some(path)) = (msg.target, msg.executable) {
            binaries.push(TestBinary {
                crate_name: target.name.replace('-', "_"),
                target: target.name,
                path,
            });
        }
    }
    binaries.sort_by(|a, b| a.target.cmp(&b.target));
    Ok(binaries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Status(ExitStatus),
    TimedOut,
}

/// Runs `cmd` with stdout and stderr sent to files, killing it after `timeout`.
pub fn run_bounded(mut cmd: Command, timeout: Duration, stdout: &Path, stderr: &Path) -> Result<Exit> {
    let line = describe(&cmd);
    let fail = |e| Error::Command {
        command: line.clone(),
        source: e,
    };
    let out = File::create(stdout).map_err(|e| Error::io(stdout, e))?;
    let err = File::create(stderr).map_err(|e| Error::io(stderr, e))?;
    let mut child = cmd
        .stdin(Stdio::null())
        .stdout(out)
        .stderr(err)
        .spawn()
        .map_err(fail)?;
    let start = Instant::now();
    let mut pause = Duration::from_millis(2);
    loop {
        if let Some(status) = child.try_wait().map_err(fail)? {
            return Ok(Exit::Status(status));
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(Exit::TimedOut);
        }
        std::thread::sleep(pause);
        pause = (pause * 2).min(Duration::from_millis(50));
    }
}

/// Result of one test as printed by libtest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TestStatus {
    Ok,
    Failed,
    Ignored,
}

/// `(name, status)` for every `test <name> ... <status>` line.
pub fn parse_libtest(stdout: &str) -> Vec<(String, TestStatus)> {
    stdout
        .lines()
        .filter_map(|line| {
            let rest = line.strip_prefix("test ")?;
            let (name, status) = rest.rsplit_once(" ... ")?;
            let status = match status.trim() {
                "ok" => TestStatus::Ok,
                "FAILED" => TestStatus::Failed,
                s if s.starts_with("ignored") => TestStatus::Ignored,
                _ => return None,
            };
            Some((name.to_owned(), status))
        })
        .collect()
}

/// Verdict of every test of the project, keyed `<crate>::<test path>`, as
/// produced by running each test executable from the project root.
pub fn suite_verdicts(
    root: &Path,
    env: &[(&str, &std::ffi::OsStr)],
) -> Result<std::collections::BTreeMap<String, TestStatus>> {
    let mut verdicts = std::collections::BTreeMap::new();
    for binary in build_tests(root, None, "test suite")? {
        let mut cmd = command(binary.path.to_str().unwrap_or_default(), root);
        cmd.envs(env.iter().copied());
        let line = describe(&cmd);
        let out = cmd.output().map_err(|e| Error::Command {
            command: line,
            source: e,
        })?;
        for (name, status) in parse_libtest(&String::from_utf8_lossy(&out.stdout)) {
            verdicts.insert(format!("{}::{}", binary.crate_name, name), status);
        }
    }
    Ok(verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn libtest_lines() {
        let out = "running 3 tests\ntest a::b ... ok\ntest c ... FAILED\ntest d ... ignored, slow\n\ntest result: FAILED. 1 passed; 1 failed; 1 ignored\n";
        assert_eq!(
            parse_libtest(out),
            vec![
                ("a::b".to_owned(), TestStatus::Ok),
                ("c".to_owned(), TestStatus::Failed),
                ("d".to_owned(), TestStatus::Ignored)
            ]
        );
    }

    #[test]
    fn bounded_run_times_out() {
        let dir = tempfile::tempdir().unwrap();
        let mut cmd = Command::new("sh");
        cmd.args(["-c", "sleep 5"]);
        let exit = run_bounded(cmd, Duration::from_millis(200), &dir.path().join("o"), &dir.path().join("e")).unwrap();
        assert_eq!(exit, Exit::TimedOut);
    }
}
