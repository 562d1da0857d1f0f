#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const MEDICAL_POLICY: &str = r#"format = "pbcap/1"

[[policy]]
id = "1"
keywords = ["RecordedBy(Test, Nurse)", "DiagnosedBy(Report, Doctor)"]
priority = 10
category = "Medical Documents"
storage_unit = "Hospital"
"#;

pub const WARD_GRAPH: &str = "\
node test    artifact Test
node nurse   agent    Nurse
node report  artifact Report
node doctor  agent    Doctor
node lab     process  Lab Run
edge RecordedBy  test   nurse
edge DiagnosedBy report doctor
edge Used        lab    test
";

pub const UNRELATED_GRAPH: &str = "\
node invoice artifact Invoice
node clerk   agent    Clerk
edge ApprovedBy invoice clerk
";

/// A scratch directory plus helpers for driving the `pbcap` binary.
pub struct Sandbox {
    pub dir: tempfile::TempDir,
    pub suite: &'static str,
    pub seed: Option<u64>,
}

impl Sandbox {
    pub fn new(suite: &'static str) -> Self {
        Self { dir: tempfile::tempdir().unwrap(), suite, seed: None }
    }

    pub fn seeded(suite: &'static str, seed: u64) -> Self {
        Self { dir: tempfile::tempdir().unwrap(), suite, seed: Some(seed) }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> PathBuf {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).unwrap();
        }
        fs::write(&p, contents).unwrap();
        p
    }

    pub fn run(&self, args: &[&str]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pbcap"));
        cmd.current_dir(self.dir.path()).env_remove("PBCAP_STORAGE_ROOT").args(["--suite", self.suite]);
        if let Some(seed) = self.seed {
            cmd.args(["--seed", &seed.to_string()]);
        }
        cmd.args(args).output().unwrap()
    }

    /// Runs and asserts success.
    pub fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "pbcap {args:?} failed with {:?}\n{}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    /// Generates admin and user keys, compiles `policies`, and prepares an
    /// empty storage root.
    pub fn setup(&self, policies: &str) {
        self.write("policies.toml", policies);
        self.ok(&["pap", "keygen", "--out", "admin"]);
        self.ok(&["pap", "compile", "policies.toml", "--admin-secret-key", "admin.secret.json", "--out", "compiled.json"]);
        self.ok(&["user", "keygen", "--out", "alice"]);
        fs::create_dir_all(self.path("store")).unwrap();
    }

    pub fn tag(&self, graph: &str, payload: &str, file_id: &str, out: &str, user: &str) {
        let g = self.write(&format!("{out}.prov"), graph);
        let p = self.write(&format!("{out}.payload"), payload);
        self.ok(&[
            "user",
            "tag",
            "--graph",
            g.to_str().unwrap(),
            "--admin-public-key",
            "admin.public.json",
            "--user-secret-key",
            &format!("{user}.secret.json"),
            "--payload",
            p.to_str().unwrap(),
            "--file-id",
            file_id,
            "--out",
            out,
        ]);
    }

    pub fn classify(&self, submissions: &[&str], users: &[&str], extra: &[&str]) -> Output {
        let mut args = vec!["pdp", "classify"];
        args.extend_from_slice(submissions);
        args.extend_from_slice(&["--compiled", "compiled.json", "--admin-public-key", "admin.public.json"]);
        let keys: Vec<String> = users.iter().map(|u| format!("{u}.public.json")).collect();
        for k in &keys {
            args.extend_from_slice(&["--user-public-key", k]);
        }
        args.extend_from_slice(&["--storage-root", "store"]);
        args.extend_from_slice(extra);
        self.run(&args)
    }

    /// Relative paths of every payload under the storage root.
    pub fn stored(&self) -> Vec<String> {
        let root = self.path("store");
        let mut out = Vec::new();
        for unit in fs::read_dir(&root).unwrap() {
            let unit = unit.unwrap().path();
            if unit.is_dir() {
                for f in fs::read_dir(&unit).unwrap() {
                    let f = f.unwrap().path();
                    out.push(f.strip_prefix(&root).unwrap().to_string_lossy().into_owned());
                }
            }
        }
        out.sort();
        out
    }

    pub fn log(&self) -> Vec<serde_json::Value> {
        match fs::read_to_string(self.path("store/decisions.jsonl")) {
            Ok(t) => t.lines().map(|l| serde_json::from_str(l).unwrap()).collect(),
            Err(_) => Vec::new(),
        }
    }
}

pub fn contains_subslice(haystack: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

pub fn read(p: &Path) -> Vec<u8> {
    fs::read(p).unwrap()
}
