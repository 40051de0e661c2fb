//! The seed is the only entropy source: library code must not read clocks, OS randomness or the environment.

use std::fs;
use std::path::{Path, PathBuf};

const FORBIDDEN: [&str; 9] = ["Instant", "SystemTime", "UNIX_EPOCH", "thread_rng", "rand::rng()", "from_entropy", "from_os_rng", "OsRng", "env::var"];

fn sources(dir: &Path, out: &mut Vec<PathBuf>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            sources(&p, out);
        } else if p.extension().is_some_and(|x| x == "rs") {
            out.push(p);
        }
    }
}

#[test]
fn library_source_has_no_clock_or_os_entropy() {
    let mut files = Vec::new();
    sources(&Path::new(env!("CARGO_MANIFEST_DIR")).join("src"), &mut files);
    assert!(files.len() > 20);
    let mut hits = Vec::new();
    for f in &files {
        for (i, line) in fs::read_to_string(f).unwrap().lines().enumerate() {
            for pat in FORBIDDEN {
                if line.contains(pat) {
                    hits.push(format!("{}:{}: {pat}", f.display(), i + 1));
                }
            }
        }
    }
    assert!(hits.is_empty(), "{hits:#?}");
}
