#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use beliefbench::{CommitRecord, FileChange};

pub fn git(dir: &Path, args: &[&str]) -> String {
    let out = Command::new("git")
        .args(args)
        .current_dir(dir)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("HOME", dir)
        .output()
        .expect("git runs");
    assert!(
        out.status.success(),
        "git {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn init_repo(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    git(dir, &["init", "-q", "-b", "main"]);
    git(dir, &["config", "user.email", "Tester@Example.COM"]);
    git(dir, &["config", "user.name", "Tester"]);
    git(dir, &["config", "commit.gpgsign", "false"]);
}

/// Commit everything in the work tree with fixed author and committer dates.
pub fn commit_at(dir: &Path, msg: &str, ts: i64) {
    git(dir, &["add", "-A"]);
    let date = format!("@{ts} +0000");
    let out = Command::new("git")
        .args(["commit", "-q", "--allow-empty", "-m", msg])
        .current_dir(dir)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("HOME", dir)
        .env("GIT_AUTHOR_DATE", &date)
        .env("GIT_COMMITTER_DATE", &date)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Build a real repository whose first-parent history reproduces `records`.
///
/// Each change deletes lines from the top of the file and appends fresh,
/// unique lines, so `git diff --numstat` reports exactly those counts.
/// Deletions are clamped to the file's length and zero-delta text changes
/// vanish (git sees no change); the returned records reflect both
/// adjustments and carry the real commit ids.
pub fn materialize(records: &[CommitRecord], dir: &Path) -> Vec<CommitRecord> {
    init_repo(dir);
    let mut files: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut binaries: BTreeMap<String, u32> = BTreeMap::new();
    let mut stream: Vec<u8> = Vec::new();
    let mut expected = Vec::with_capacity(records.len());
    let mut serial = 0u64;

    for (k, r) in records.iter().enumerate() {
        let mut changes = Vec::new();
        let mut body: Vec<u8> = Vec::new();
        for c in &r.changes {
            if c.is_binary {
                let v = binaries.entry(c.path.clone()).or_insert(0);
                *v += 1;
                let bytes = [0u8, 1, 2, (*v % 251) as u8, (*v / 251) as u8, 0];
                write!(body, "M 100644 inline {}\ndata {}\n", c.path, bytes.len()).unwrap();
                body.extend_from_slice(&bytes);
                body.push(b'\n');
                changes.push(FileChange::binary(c.path.clone()));
                continue;
            }
            let lines = files.entry(c.path.clone()).or_default();
            let del = (c.lines_deleted as usize).min(lines.len());
            lines.drain(..del);
            for _ in 0..c.lines_added {
                serial += 1;
                lines.push(format!("line {serial} of {}", c.path));
            }
            if del == 0 && c.lines_added == 0 {
                continue;
            }
            let content: String = lines.iter().map(|l| format!("{l}\n")).collect();
            write!(
                body,
                "M 100644 inline {}\ndata {}\n{}\n",
                c.path,
                content.len(),
                content
            )
            .unwrap();
            changes.push(FileChange::text(c.path.clone(), c.lines_added, del as u64));
        }
        let msg = format!("{}\n", r.message);
        write!(stream, "commit refs/heads/main\nmark :{}\n", k + 1).unwrap();
        writeln!(stream, "author Dev <{}> {} +0000", r.author_id, r.timestamp).unwrap();
        writeln!(
            stream,
            "committer Dev <{}> {} +0000",
            r.author_id, r.timestamp
        )
        .unwrap();
        write!(stream, "data {}\n{}", msg.len(), msg).unwrap();
        if k > 0 {
            writeln!(stream, "from :{}", k).unwrap();
        }
        stream.extend_from_slice(&body);
        stream.push(b'\n');
        changes.sort_by(|a, b| a.path.cmp(&b.path));
        expected.push(CommitRecord {
            changes,
            ..r.clone()
        });
    }
    stream.extend_from_slice(b"done\n");

    let mut child = Command::new("git")
        .args(["fast-import", "--quiet", "--done"])
        .current_dir(dir)
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&stream).unwrap();
    assert!(child.wait().unwrap().success(), "fast-import failed");

    // real ids, oldest first along the chain
    let ids = git(dir, &["rev-list", "--reverse", "refs/heads/main"]);
    for (rec, id) in expected.iter_mut().zip(ids.lines()) {
        rec.commit_id = id.to_string();
    }
    expected
}

/// Records with changes sorted by path, then sorted as the extractor sorts.
pub fn canonical(records: &[CommitRecord]) -> Vec<CommitRecord> {
    let mut v: Vec<CommitRecord> = records
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.changes.sort_by(|a, b| a.path.cmp(&b.path));
            r
        })
        .collect();
    beliefbench::gitlog::sort_records(&mut v);
    v
}
