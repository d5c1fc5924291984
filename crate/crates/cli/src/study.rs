//! Human prediction study: sessions, the append-only event log and summaries.
//!
//! Every session sees all groups in its own seeded order. Predictions are
//! written to a newline-delimited JSON log before they are applied, so the
//! state of every session can be rebuilt from the log alone.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use groupchoice::evalharness::AugmentationKind;
use groupchoice::seeds::{derive_seed, rng_for};
use groupchoice::{Dataset, EvalReport, StrategyKind, VariantSpec};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean accuracy of the human participants reported for the original study.
pub const HUMAN_PAPER_MEAN: f64 = 0.37;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown group {0}")]
    UnknownGroup(String),
    #[error("group {group} is not a task of session {session}")]
    NotATask { session: String, group: String },
    #[error("group {0} was already answered in this session")]
    AlreadyAnswered(String),
    #[error("option index {index} out of range for {n_options} options")]
    BadOption { index: usize, n_options: usize },
    #[error("session log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        tasks: Vec<String>,
        at_ms: u64,
    },
    Prediction {
        session_id: String,
        group_id: String,
        option_index: usize,
        at_ms: u64,
    },
}

#[derive(Debug, Clone)]
struct Session {
    tasks: Vec<String>,
    predictions: BTreeMap<String, usize>,
    created_ms: u64,
    last_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub tasks: Vec<String>,
    /// Groups already answered, in task order.
    pub answered: Vec<String>,
    /// Index in `tasks` of the first unanswered group, or `tasks.len()` when done.
    pub next_task: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub lcp_ave: Option<f64>,
    pub pacp_ave: Option<f64>,
    pub human_paper_mean: f64,
}

impl Reference {
    pub fn none() -> Self {
        Self {
            lcp_ave: None,
            pacp_ave: None,
            human_paper_mean: HUMAN_PAPER_MEAN,
        }
    }

    /// Takes the LCP-AVE and PACP-AVE accuracies from an evaluation report.
    pub fn from_report(report: &EvalReport) -> Self {
        let acc = |spec| report.variant(&spec).map(|v| v.mean_accuracy);
        Self {
            lcp_ave: acc(VariantSpec::lcp(StrategyKind::Ave, AugmentationKind::None)),
            pacp_ave: acc(VariantSpec::pacp(StrategyKind::Ave)),
            human_paper_mean: HUMAN_PAPER_MEAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub answered: usize,
    pub correct: usize,
    /// `correct / answered`; null before the first answer.
    pub accuracy: Option<f64>,
    pub elapsed_seconds: f64,
    pub reference: Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRow {
    pub label: String,
    pub ratings: Vec<Option<f64>>,
}

/// What a participant sees for one group: ratings only, never the choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupView {
    pub group_id: String,
    pub members: Vec<MemberRow>,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submitted {
    pub group_id: String,
    pub option_index: usize,
    pub answered: usize,
    pub remaining: usize,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub struct Study {
    dataset: Arc<Dataset>,
    reference: Reference,
    seed: u64,
    log: Option<Mutex<File>>,
    log_path: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    created: Mutex<u64>,
}

impl Study {
    /// A study without persistence.
    pub fn in_memory(dataset: Arc<Dataset>, reference: Reference, seed: u64) -> Self {
        Self {
            dataset,
            reference,
            seed,
            log: None,
            log_path: None,
            sessions: RwLock::new(HashMap::new()),
            created: Mutex::new(0),
        }
    }

    /// Opens (or creates) the session log at `path` and replays it.
    pub fn with_log(dataset: Arc<Dataset>, reference: Reference, seed: u64, path: &Path) -> Result<Self, StudyError> {
        let mut study = Self::in_memory(dataset, reference, seed);
        if path.exists() {
            for event in read_log(path)? {
                study.apply(event)?;
            }
        } else if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        study.log = Some(Mutex::new(file));
        study.log_path = Some(path.to_path_buf());
        Ok(study)
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.log_path.as_deref()
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    fn record(&self, event: &Event) -> Result<(), StudyError> {
        if let Some(log) = &self.log {
            let mut line = serde_json::to_string(event).expect("events serialize");
            line.push('\n');
            let mut f = log.lock().expect("log lock");
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        Ok(())
    }

    /// Applies a logged event to the in-memory state.
    fn apply(&mut self, event: Event) -> Result<(), StudyError> {
        match event {
            Event::SessionCreated {
                session_id,
                tasks,
                at_ms,
            } => {
                *self.created.get_mut().expect("counter lock") += 1;
                self.sessions.get_mut().expect("sessions lock").insert(
                    session_id,
                    Arc::new(Mutex::new(Session {
                        tasks,
                        predictions: BTreeMap::new(),
                        created_ms: at_ms,
                        last_ms: at_ms,
                    })),
                );
            }
            Event::Prediction {
                session_id,
                group_id,
                option_index,
                at_ms,
            } => {
                let sessions = self.sessions.get_mut().expect("sessions lock");
                let session = sessions
                    .get(&session_id)
                    .ok_or_else(|| StudyError::UnknownSession(session_id.clone()))?;
                let mut s = session.lock().expect("session lock");
                s.predictions.insert(group_id, option_index);
                s.last_ms = s.last_ms.max(at_ms);
            }
        }
        Ok(())
    }

    pub fn create_session(&self) -> Result<SessionView, StudyError> {
        let n = {
            let mut c = self.created.lock().expect("counter lock");
            *c += 1;
            *c - 1
        };
        let mut tasks: Vec<String> = self.dataset.groups().iter().map(|g| g.id.clone()).collect();
        tasks.shuffle(&mut rng_for(derive_seed(self.seed, &[n]), &[]));
        let session_id = uuid::Uuid::new_v4().to_string();
        let at_ms = now_ms();
        self.record(&Event::SessionCreated {
            session_id: session_id.clone(),
            tasks: tasks.clone(),
            at_ms,
        })?;
        let session = Session {
            tasks: tasks.clone(),
            predictions: BTreeMap::new(),
            created_ms: at_ms,
            last_ms: at_ms,
        };
        self.sessions
            .write()
            .expect("sessions lock")
            .insert(session_id.clone(), Arc::new(Mutex::new(session)));
        tracing::info!(session = %session_id, tasks = tasks.len(), "session created");
        Ok(SessionView {
            session_id,
            next_task: 0,
            answered: Vec::new(),
            tasks,
        })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, StudyError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| StudyError::UnknownSession(id.to_owned()))
    }

    pub fn session_view(&self, id: &str) -> Result<SessionView, StudyError> {
        let session = self.session(id)?;
        let s = session.lock().expect("session lock");
        let answered: Vec<String> = s
            .tasks
            .iter()
            .filter(|t| s.predictions.contains_key(*t))
            .cloned()
            .collect();
        let next_task = s
            .tasks
            .iter()
            .position(|t| !s.predictions.contains_key(t))
            .unwrap_or(s.tasks.len());
        Ok(SessionView {
            session_id: id.to_owned(),
            tasks: s.tasks.clone(),
            answered,
            next_task,
        })
    }

    pub fn group_view(&self, group_id: &str) -> Result<GroupView, StudyError> {
        let idx = self
            .dataset
            .group_index(group_id)
            .ok_or_else(|| StudyError::UnknownGroup(group_id.to_owned()))?;
        let group = &self.dataset.groups()[idx];
        let members = group
            .members()
            .iter()
            .enumerate()
            .map(|(i, &u)| MemberRow {
                label: format!("Member {}", i + 1),
                ratings: self.dataset.ratings().row(u).to_vec(),
            })
            .collect();
        let options = (1..=self.dataset.n_options()).map(|j| format!("D{j}")).collect();
        Ok(GroupView {
            group_id: group_id.to_owned(),
            members,
            options,
        })
    }

    pub fn submit(&self, session_id: &str, group_id: &str, option_index: usize) -> Result<Submitted, StudyError> {
        let session = self.session(session_id)?;
        let mut s = session.lock().expect("session lock");
        if !s.tasks.iter().any(|t| t == group_id) {
            return Err(StudyError::NotATask {
                session: session_id.to_owned(),
                group: group_id.to_owned(),
            });
        }
        if s.predictions.contains_key(group_id) {
            return Err(StudyError::AlreadyAnswered(group_id.to_owned()));
        }
        let n_options = self.dataset.n_options();
        if option_index >= n_options {
            return Err(StudyError::BadOption {
                index: option_index,
                n_options,
            });
        }
        let at_ms = now_ms();
        self.record(&Event::Prediction {
            session_id: session_id.to_owned(),
            group_id: group_id.to_owned(),
            option_index,
            at_ms,
        })?;
        s.predictions.insert(group_id.to_owned(), option_index);
        s.last_ms = s.last_ms.max(at_ms);
        Ok(Submitted {
            group_id: group_id.to_owned(),
            option_index,
            answered: s.predictions.len(),
            remaining: s.tasks.len() - s.predictions.len(),
        })
    }

    pub fn summary(&self, session_id: &str) -> Result<Summary, StudyError> {
        let session = self.session(session_id)?;
        let s = session.lock().expect("session lock");
        let (answered, correct) = score(&self.dataset, &s.predictions);
        Ok(Summary {
            answered,
            correct,
            accuracy: (answered > 0).then(|| correct as f64 / answered as f64),
            elapsed_seconds: (s.last_ms - s.created_ms) as f64 / 1000.0,
            reference: self.reference,
        })
    }
}

fn score(dataset: &Dataset, predictions: &BTreeMap<String, usize>) -> (usize, usize) {
    let correct = predictions
        .iter()
        .filter(|(g, &p)| dataset.choice_of(g) == Some(p))
        .count();
    (predictions.len(), correct)
}

pub fn read_log(path: &Path) -> Result<Vec<Event>, StudyError> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| StudyError::Log {
            line: i + 1,
            message: e.to_string(),
        })?;
        events.push(event);
    }
    Ok(events)
}

/// `(answered, correct)` per session, recomputed from the log alone.
pub fn replay_scores(dataset: &Dataset, events: &[Event]) -> BTreeMap<String, (usize, usize)> {
    let mut predictions: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for e in events {
        match e {
            Event::SessionCreated { session_id, .. } => {
                predictions.entry(session_id.clone()).or_default();
            }
            Event::Prediction {
                session_id,
                group_id,
                option_index,
                ..
            } => {
                predictions
                    .entry(session_id.clone())
                    .or_default()
                    .entry(group_id.clone())
                    .or_insert(*option_index);
            }
        }
    }
    predictions
        .into_iter()
        .map(|(id, p)| (id, score(dataset, &p)))
        .collect()
}
