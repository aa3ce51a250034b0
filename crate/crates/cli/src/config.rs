//! Layered run configuration: built-in defaults, then a JSON file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Bad input from the user; maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Everything needed to reproduce a run. Written as `run_config.json` into the
/// output directory; passing that file back via `--config` repeats the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub params: Value,
}

/// Contents of a `--config` file: either a full [`RunConfig`] echo or a bare
/// parameter object.
#[derive(Debug, Default)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub params: Value,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| usage(format!("malformed config {}: {e}", path.display())))?;
        let Value::Object(map) = value else {
            return Err(usage(format!("config {} must hold a JSON object", path.display())));
        };
        if map.contains_key("params") {
            let rc: RunConfig = serde_json::from_value(Value::Object(map))
                .map_err(|e| usage(format!("malformed run config {}: {e}", path.display())))?;
            return Ok(Self {
                command: Some(rc.command),
                out: Some(rc.out),
                threads: rc.threads,
                params: rc.params,
            });
        }
        Ok(Self {
            params: Value::Object(map),
            ..Self::default()
        })
    }
}

/// Recursive object merge, `over` winning. An object carrying a `kind` tag
/// replaces rather than merges, so switching a tagged enum variant does not
/// leave stale fields behind.
pub fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) if !o.contains_key("kind") => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, o) => *slot = o,
    }
}

/// Defaults of `P`, overlaid by the config file's parameters, overlaid by the
/// flags that were actually given.
pub fn resolve<P>(file: &Value, flags: Value) -> anyhow::Result<P>
where
    P: Default + Serialize + DeserializeOwned,
{
    let mut v = serde_json::to_value(P::default())?;
    if !file.is_null() {
        merge(&mut v, file.clone());
    }
    merge(&mut v, flags);
    serde_json::from_value(v).map_err(|e| usage(format!("invalid parameters: {e}")))
}

/// Object of the given `(key, value)` pairs, skipping unset flags.
pub fn flag_object<const N: usize>(pairs: [(&str, Option<Value>); N]) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    }
    Value::Object(m)
}
