//! Run provenance: which config produced which files, and how each grid task
//! fared.

use serde::Serialize;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct TaskRecord {
    pub id: String,
    pub ok: bool,
    /// "ok" or the error message.
    pub status: String,
    pub seconds: f64,
    pub outputs: Vec<String>,
}

impl TaskRecord {
    pub fn start(id: impl Into<String>) -> RunningTask {
        RunningTask {
            id: id.into(),
            t0: Instant::now(),
        }
    }
}

pub struct RunningTask {
    id: String,
    t0: Instant,
}

impl RunningTask {
    pub fn ok(self, outputs: Vec<String>) -> TaskRecord {
        TaskRecord {
            id: self.id,
            ok: true,
            status: "ok".into(),
            seconds: self.t0.elapsed().as_secs_f64(),
            outputs,
        }
    }

    pub fn fail(self, message: impl Into<String>) -> TaskRecord {
        TaskRecord {
            id: self.id,
            ok: false,
            status: message.into(),
            seconds: self.t0.elapsed().as_secs_f64(),
            outputs: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub tasks: Vec<TaskRecord>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, seed: u64, tasks: Vec<TaskRecord>) -> Self {
        let mut outputs: Vec<String> = tasks
            .iter()
            .flat_map(|t| t.outputs.iter().cloned())
            .collect();
        outputs.sort();
        outputs.dedup();
        Self {
            command: command.into(),
            config_hash,
            code_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            tasks,
            outputs,
        }
    }

    /// Demote any successful task whose declared outputs are missing or empty.
    pub fn verify_outputs(&mut self, out_dir: &Path) {
        for task in &mut self.tasks {
            if !task.ok {
                continue;
            }
            for rel in &task.outputs {
                let path = out_dir.join(rel);
                let ok = std::fs::metadata(&path).map(|m| m.len() > 0).unwrap_or(false);
                if !ok {
                    task.ok = false;
                    task.status = format!("declared output {rel} is missing or empty");
                    break;
                }
            }
        }
        self.outputs = self
            .tasks
            .iter()
            .filter(|t| t.ok)
            .flat_map(|t| t.outputs.iter().cloned())
            .collect();
        self.outputs.sort();
        self.outputs.dedup();
    }

    pub fn all_ok(&self) -> bool {
        self.tasks.iter().all(|t| t.ok)
    }

    pub fn write(&self, out_dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(out_dir.join("manifest.json"), text)
    }
}
