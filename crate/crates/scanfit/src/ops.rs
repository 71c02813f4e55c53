//! Small operational utilities shared across the engine: atomic file
//! writes, canonical JSON output, and scoped thread-pool control.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// Writes a file atomically: the content lands in a temporary sibling first
/// and is renamed over the target, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Serializes a value as pretty JSON (with a trailing newline) and writes it
/// atomically. serde_json prints floats in shortest round-trip form, so
/// identical values always produce identical bytes.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Runs `f` under a dedicated rayon pool of `threads` workers, or on the
/// global pool when `threads` is `None`. The engine's parallel reductions
/// are ordered, so results do not depend on the worker count — this exists
/// for resource control and for demonstrating that invariance.
pub fn run_with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("failed to build thread pool");
            pool.install(f)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_creates_parent_dirs_and_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/deep/file.txt");
        write_atomic(&path, b"one").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"one");
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        // No temp litter left behind.
        let entries: Vec<_> = std::fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn json_output_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        let value = serde_json::json!({"x": 0.1, "y": [1.0, 2.5e-3], "s": "text"});
        write_json_atomic(&a, &value).unwrap();
        write_json_atomic(&b, &value).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn scoped_pool_runs_closure() {
        let out = run_with_threads(Some(2), || {
            use rayon::prelude::*;
            (0..100).into_par_iter().map(|i| i * 2).sum::<i32>()
        });
        assert_eq!(out, 9900);
        assert_eq!(run_with_threads(None, || 7), 7);
    }
}
