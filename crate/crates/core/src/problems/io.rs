use std::path::Path;

use super::{tsplib, ProblemError, ProblemInstance};

/// Parses a JSON instance document. `default_name` is used when the document
/// carries no `"name"`.
pub fn parse_instance(text: &str, default_name: &str) -> Result<ProblemInstance, ProblemError> {
    let mut inst: ProblemInstance =
        serde_json::from_str(text).map_err(|e| ProblemError::Parse(e.to_string()))?;
    if inst.name().is_empty() {
        inst.set_name(default_name);
    }
    inst.validate()?;
    Ok(inst)
}

/// Loads an instance file: `.json` documents, anything else is read as TSPLIB.
pub fn load_instance(path: &Path) -> Result<ProblemInstance, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        parse_instance(&text, &stem)
    } else {
        let mut inst = tsplib::parse(&text)?;
        if inst.name().is_empty() {
            inst.set_name(stem);
        }
        Ok(inst)
    }
}
