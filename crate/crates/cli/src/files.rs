use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::failure::{code, CmdResult, Failure};

/// Files in `dir` with extension `ext`, keyed by file stem.
pub fn list_by_stem(dir: &Path, ext: &str) -> CmdResult<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir)
        .map_err(|e| Failure::new(code::UNREADABLE_INPUT, format!("{}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Failure::new(code::UNREADABLE_INPUT, format!("{}: {e}", dir.display())))?
            .path();
        if !path.is_file() || path.extension().and_then(|e| e.to_str()) != Some(ext) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.insert(stem.to_owned(), path);
        }
    }
    Ok(out)
}

/// Joins two stem listings. Any stem present on one side only is an error.
pub fn pair_by_stem(
    left: BTreeMap<String, PathBuf>,
    left_dir: &Path,
    mut right: BTreeMap<String, PathBuf>,
    right_dir: &Path,
) -> CmdResult<Vec<(String, PathBuf, PathBuf)>> {
    let mut pairs = Vec::with_capacity(left.len());
    for (stem, l) in left {
        let Some(r) = right.remove(&stem) else {
            return Err(Failure::new(
                code::MISSING_PAIR,
                format!("{} has no counterpart for `{stem}` in {}", l.display(), right_dir.display()),
            ));
        };
        pairs.push((stem, l, r));
    }
    if let Some((stem, r)) = right.into_iter().next() {
        return Err(Failure::new(
            code::MISSING_PAIR,
            format!("{} has no counterpart for `{stem}` in {}", r.display(), left_dir.display()),
        ));
    }
    Ok(pairs)
}

/// Runs `f` over `items` in parallel and returns results in input order.
/// The first failure in input order wins, so errors are thread-independent.
pub fn for_each_ordered<T, R, F>(items: &[T], f: F) -> CmdResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> CmdResult<R> + Sync + Send,
{
    items.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

/// Overlays the keys of a JSON object file onto `args`.
pub fn apply_config<T: Serialize + DeserializeOwned>(args: T, config: Option<&Path>) -> CmdResult<T> {
    let Some(path) = config else {
        return Ok(args);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(code::UNREADABLE_INPUT, format!("{}: {e}", path.display())))?;
    let overrides: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::new(code::MALFORMED_INPUT, format!("{}: {e}", path.display())))?;
    let Value::Object(overrides) = overrides else {
        return Err(Failure::new(
            code::MALFORMED_INPUT,
            format!("{}: expected a JSON object", path.display()),
        ));
    };
    let mut merged = serde_json::to_value(args).expect("arguments serialize");
    let fields = merged.as_object_mut().expect("arguments are a struct");
    for (key, value) in overrides {
        if !fields.contains_key(&key) {
            return Err(Failure::new(
                code::FAILURE,
                format!("{}: unknown option `{key}`", path.display()),
            ));
        }
        fields.insert(key, value);
    }
    serde_json::from_value(merged).map_err(|e| Failure::new(code::FAILURE, format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut bytes = serde_json::to_vec_pretty(value).expect("value serializes");
    bytes.push(b'\n');
    topogland::io::write_atomic(path, &bytes).map_err(|e| Failure::writing(path, e))
}

/// Writes the effective options of a run beside its outputs.
pub fn write_config_echo<T: Serialize>(path: &Path, command: &str, args: &T) -> CmdResult {
    write_json(
        path,
        &serde_json::json!({ "command": command, "options": args }),
    )
}
