use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::{Mutex, RwLock};

use crate::error::ApiError;
use crate::session::{Backends, CreateSessionRequest, Session, SessionSnapshot, SessionView};

pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 60);

/// In-memory sessions. Each session has its own mutex, so mutations of one
/// session are serialized while other sessions proceed independently.
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    backends: Backends,
    ttl: Duration,
}

impl SessionStore {
    pub fn new(backends: Backends, ttl: Duration) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            backends,
            ttl,
        }
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn create(&self, request: CreateSessionRequest) -> Result<SessionView, ApiError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::create(id.clone(), request, &self.backends)?;
        let view = session.view();
        self.sessions.write().insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    /// Runs `f` with the session locked; idle-expired sessions are dropped
    /// and reported as missing.
    fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let handle = self.get(id)?;
        let mut session = handle.lock();
        if session.last_active().elapsed() > self.ttl {
            drop(session);
            self.sessions.write().remove(id);
            return Err(ApiError::NotFound(id.to_string()));
        }
        session.touch();
        f(&mut session)
    }

    pub fn choose(&self, id: &str, choice: usize) -> Result<SessionView, ApiError> {
        self.with_session(id, |s| {
            s.choose(choice)?;
            Ok(s.view())
        })
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ApiError> {
        self.with_session(id, |s| Ok(s.view()))
    }

    /// Drops sessions idle for longer than the TTL as of `now`. Sessions busy
    /// with a request are skipped. Returns how many were removed.
    pub fn sweep(&self, now: Instant) -> usize {
        let mut sessions = self.sessions.write();
        let before = sessions.len();
        sessions.retain(|_, s| match s.try_lock() {
            Some(s) => now.saturating_duration_since(s.last_active()) <= self.ttl,
            None => true,
        });
        before - sessions.len()
    }

    pub fn snapshot(&self) -> Vec<SessionSnapshot> {
        let mut out: Vec<SessionSnapshot> = self.sessions.read().values().map(|s| s.lock().snapshot()).collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    /// Replays snapshots into live sessions; returns the ids that failed.
    pub fn restore(&self, snapshots: Vec<SessionSnapshot>) -> Vec<(String, ApiError)> {
        let mut failed = Vec::new();
        for snap in snapshots {
            let id = snap.id.clone();
            match Session::restore(snap, &self.backends) {
                Ok(s) => {
                    self.sessions.write().insert(id, Arc::new(Mutex::new(s)));
                }
                Err(e) => failed.push((id, e)),
            }
        }
        failed
    }
}
