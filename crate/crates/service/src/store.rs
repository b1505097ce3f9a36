use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use zenoflip_core::game::RoundLog;

use crate::error::PlayError;
use crate::session::{RoundUpdate, Role, Session, SessionConfig, SessionView};

/// In-memory sessions, each behind its own lock, with an optional
/// append-only JSON-lines journal per session.
#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
    journal_dir: Option<PathBuf>,
}

impl SessionStore {
    pub fn new(journal_dir: Option<PathBuf>) -> Self {
        Self { journal_dir, ..Self::default() }
    }

    pub fn journal_path(&self, id: &str) -> Option<PathBuf> {
        self.journal_dir.as_ref().map(|d| d.join(format!("{id}.jsonl")))
    }

    pub fn create(&self, config: SessionConfig) -> Result<SessionView, PlayError> {
        let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("s{n:06}");
        let session = Session::new(id.clone(), config)?;
        let view = session.view();
        self.sessions.write().expect("session map poisoned").insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, PlayError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| PlayError::NotFound(format!("no session {id:?}")))
    }

    pub fn view(&self, id: &str) -> Result<SessionView, PlayError> {
        Ok(self.get(id)?.lock().expect("session poisoned").view())
    }

    pub fn submit(&self, id: &str, role: Role, time: f64) -> Result<RoundUpdate, PlayError> {
        let session = self.get(id)?;
        let mut session = session.lock().expect("session poisoned");
        let update = session.submit(role, time)?;
        if let Some(result) = &update.result {
            self.append_journal(id, result)?;
        }
        Ok(update)
    }

    fn append_journal(&self, id: &str, log: &RoundLog<f64>) -> Result<(), PlayError> {
        let Some(path) = self.journal_path(id) else {
            return Ok(());
        };
        let line = serde_json::to_string(log).expect("round log serializes");
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .and_then(|mut f| writeln!(f, "{line}"))
            .map_err(|e| PlayError::Conflict(format!("journal write to {} failed: {e}", path.display())))
    }
}

/// Parses a journal written by [`SessionStore`].
pub fn read_journal(text: &str) -> Result<Vec<RoundLog<f64>>, PlayError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| PlayError::BadRequest(format!("bad journal line: {e}"))))
        .collect()
}
