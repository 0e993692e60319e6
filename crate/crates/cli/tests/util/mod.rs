//! Shared helpers for CLI integration tests: spawning the binary, building
//! small on-disk fixtures, and comparing output trees byte for byte.

// Each test target compiles this module independently, so a helper used by
// only one of them would otherwise warn in the others.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

/// Path to the compiled `detkit` binary under test.
pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_detkit")
}

pub struct CmdResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CmdResult {
    pub fn assert_ok(&self) -> &Self {
        assert_eq!(
            self.code, 0,
            "expected exit 0\nstdout:\n{}\nstderr:\n{}",
            self.stdout, self.stderr
        );
        self
    }

    pub fn assert_code(&self, want: i32) -> &Self {
        assert_eq!(
            self.code, want,
            "expected exit {want}\nstdout:\n{}\nstderr:\n{}",
            self.stdout, self.stderr
        );
        self
    }
}

/// Run `detkit` with `dir` as the working directory so relative paths in the
/// arguments (and therefore in echoed configs and manifests) are reproducible.
pub fn run_in(dir: &Path, args: &[&str]) -> CmdResult {
    run_with_env(dir, args, &[])
}

pub fn run_with_env(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> CmdResult {
    let mut cmd = Command::new(bin());
    cmd.args(args).current_dir(dir);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    let out = cmd.output().expect("failed to spawn detkit");
    CmdResult {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn write(path: &Path, text: &str) {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).unwrap();
    }
    std::fs::write(path, text).unwrap();
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Deterministic test image: a gradient salted per image so distinct fixture
/// images have distinct pixels.
pub fn write_png(path: &Path, w: u32, h: u32, salt: u32) {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).unwrap();
    }
    let img = image::RgbImage::from_fn(w, h, |x, y| {
        let r = (x.wrapping_mul(7).wrapping_add(salt.wrapping_mul(31)) % 256) as u8;
        let g = (y.wrapping_mul(11).wrapping_add(salt.wrapping_mul(17)) % 256) as u8;
        let b = ((x ^ y ^ salt) % 256) as u8;
        image::Rgb([r, g, b])
    });
    img.save(path).unwrap();
}

/// Lay down `n` labeled images under `dir`: img00.png .. with two boxes each
/// spanning two categories, every file parseable and safely inside bounds.
pub fn make_dataset(dir: &Path, n: usize) {
    for i in 0..n {
        let stem = format!("img{i:02}");
        write_png(&dir.join(format!("{stem}.png")), 64, 48, i as u32);
        write(
            &dir.join(format!("{stem}.txt")),
            "0 0.300000 0.300000 0.200000 0.200000\n\
             1 0.700000 0.600000 0.250000 0.300000\n",
        );
    }
}

/// Manifest file listing the images of `make_dataset` relative to the
/// manifest's own directory.
pub fn make_manifest(path: &Path, data_rel: &str, n: usize) {
    let mut text = String::from("# seed=0\n# split=none\n");
    for i in 0..n {
        text.push_str(&format!(
            "{data_rel}/img{i:02}.png\t{data_rel}/img{i:02}.txt\n"
        ));
    }
    write(path, &text);
}

/// Entry lines of a manifest (comments and headers stripped).
pub fn manifest_entries(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .collect()
}

/// Every regular file under `root`, keyed by its relative path, with raw bytes.
pub fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Assert two output trees contain the same files with the same bytes.
pub fn assert_trees_equal(a: &Path, b: &Path) {
    let sa = snapshot(a);
    let sb = snapshot(b);
    let names_a: Vec<_> = sa.keys().collect();
    let names_b: Vec<_> = sb.keys().collect();
    assert_eq!(names_a, names_b, "file sets differ between {a:?} and {b:?}");
    for (name, bytes) in &sa {
        assert_eq!(
            Some(bytes),
            sb.get(name),
            "file {name} differs between {a:?} and {b:?}"
        );
    }
}

/// Parse `key=value` lines (losscheck/eval output) into a map.
pub fn parse_kv(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

pub fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}
