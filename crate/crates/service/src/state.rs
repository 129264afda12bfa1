use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use serde::{Deserialize, Serialize};
use ucme_core::engine::{DasMethod, EngineError, SelectionWindow, Session, SessionConfig};
use ucme_core::floorplan::LayoutGeometry;
use ucme_core::metrics::{
    local_spread, snapshot, AlternativeLog, ArchiveDump, Driver, ExperimentConfig, RunLog, SelectionLog, Snapshot,
};
use ucme_core::{Elite, Evaluation, FloorplanDomain, GridCell, LayoutGenome};
use uuid::Uuid;

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Initializing,
    AwaitingSelection,
    Evolving,
    Failed,
}

/// One design alternative as shown to the designer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Alternative {
    pub alt_id: usize,
    pub cell: GridCell,
    pub bc: [f64; 2],
    pub fitness: f64,
    pub geometry: LayoutGeometry,
}

/// Archive state as of the last completed evolution step.
#[derive(Debug, Clone)]
pub struct View {
    pub feasible: ArchiveDump,
    pub infeasible: ArchiveDump,
    pub window: SelectionWindow,
    pub evaluations: u64,
    pub warmup_evaluations: u64,
}

/// A session and its bookkeeping. While evolution runs in the background the
/// session itself is checked out and `session` is `None`.
pub struct Slot {
    pub status: Status,
    pub reason: Option<String>,
    pub das: DasMethod,
    pub config: SessionConfig,
    pub batch: Vec<Alternative>,
    pub view: Option<View>,
    pub snapshots: Vec<Snapshot>,
    pub selections: Vec<SelectionLog>,
    session: Option<Session<FloorplanDomain>>,
}

impl Slot {
    pub fn new(config: SessionConfig, das: DasMethod) -> Self {
        Self {
            status: Status::Initializing,
            reason: None,
            das,
            config,
            batch: Vec::new(),
            view: None,
            snapshots: Vec::new(),
            selections: Vec::new(),
            session: None,
        }
    }

    /// Stores the outcome of warm-up or of an evolution step and, on success,
    /// offers the next batch.
    pub fn settle(&mut self, result: Result<Session<FloorplanDomain>, EngineError>) {
        let mut session = match result {
            Ok(s) => s,
            Err(e) => return self.fail(e),
        };
        if let Err(e) = self.offer(&mut session, self.das) {
            return self.fail(e);
        }
        let evals = session.evaluations() - session.warmup_evaluations();
        self.snapshots.push(snapshot(&session, evals, self.selections.len(), &[]));
        self.view = Some(View {
            feasible: ArchiveDump::of(session.feasible()),
            infeasible: ArchiveDump::of(session.infeasible()),
            window: session.window(),
            evaluations: session.evaluations(),
            warmup_evaluations: session.warmup_evaluations(),
        });
        self.session = Some(session);
        self.status = Status::AwaitingSelection;
    }

    fn fail(&mut self, error: EngineError) {
        self.abort(error.to_string());
    }

    /// Moves to the terminal failed state.
    pub fn abort(&mut self, reason: String) {
        self.status = Status::Failed;
        self.reason = Some(reason);
        self.batch.clear();
    }

    fn offer(&mut self, session: &mut Session<FloorplanDomain>, das: DasMethod) -> Result<(), EngineError> {
        let shown = session.sample_alternatives(das)?;
        let domain = Arc::clone(session.domain());
        self.batch = shown
            .iter()
            .enumerate()
            .map(|(alt_id, elite)| describe(&domain, alt_id, elite))
            .collect::<Result<_, _>>()?;
        self.das = das;
        Ok(())
    }

    fn require(&self, wanted: Status) -> Result<(), ApiError> {
        if self.status == wanted {
            Ok(())
        } else {
            Err(ApiError::Conflict(format!("session is {:?}, not {:?}", self.status, wanted)))
        }
    }

    /// Current batch, resampled first when `das` is given.
    pub fn alternatives(&mut self, das: Option<DasMethod>) -> Result<Vec<Alternative>, ApiError> {
        self.require(Status::AwaitingSelection)?;
        if let Some(das) = das {
            let mut session = self.session.take().expect("an idle session is checked in");
            let result = self.offer(&mut session, das);
            self.session = Some(session);
            result.map_err(|e| ApiError::Internal(e.to_string()))?;
        }
        Ok(self.batch.clone())
    }

    /// Records the choice and checks the session out for evolution.
    pub fn begin_selection(&mut self, alt_id: usize) -> Result<Session<FloorplanDomain>, ApiError> {
        self.require(Status::AwaitingSelection)?;
        if alt_id >= self.batch.len() {
            return Err(ApiError::NotFound(format!(
                "alternative {alt_id} is not on offer; {} were shown",
                self.batch.len()
            )));
        }
        let session = self.session.take().expect("an idle session is checked in");
        let shown: Vec<Evaluation> = self
            .batch
            .iter()
            .map(|a| Evaluation::simple(true, a.fitness, 1.0, a.bc))
            .collect();
        self.selections.push(SelectionLog {
            index: self.selections.len() + 1,
            method: self.das,
            evals: session.evaluations() - session.warmup_evaluations(),
            alternatives: self
                .batch
                .iter()
                .map(|a| AlternativeLog { cell: a.cell, bc: a.bc, fitness: a.fitness, usc: None })
                .collect(),
            chosen: alt_id,
            local: local_spread(&shown).map_err(|e| ApiError::Internal(e.to_string()))?,
        });
        self.batch.clear();
        self.status = Status::Evolving;
        Ok(session)
    }

    /// Log of the session in the same format as scripted runs.
    pub fn export(&self) -> Result<RunLog, ApiError> {
        let view = self.view.as_ref().ok_or_else(|| ApiError::Conflict("warm-up has not finished".into()))?;
        Ok(RunLog {
            config: ExperimentConfig {
                driver: Driver::Human,
                das: self.das,
                runs: 1,
                selections: self.selections.len(),
                session: self.config.clone(),
                snapshot_every: self.config.evals_per_selection,
                observed_users: Vec::new(),
            },
            run: 0,
            stream: 0,
            warmup_evaluations: view.warmup_evaluations,
            snapshots: self.snapshots.clone(),
            selections: self.selections.clone(),
            feasible: view.feasible.clone(),
            infeasible: view.infeasible.clone(),
        })
    }
}

fn describe(domain: &FloorplanDomain, alt_id: usize, elite: &Elite<LayoutGenome>) -> Result<Alternative, EngineError> {
    Ok(Alternative {
        alt_id,
        cell: elite.cell,
        bc: elite.evaluation.bc,
        fitness: elite.evaluation.fitness,
        geometry: domain.geometry(&elite.genome)?,
    })
}

/// All live sessions.
#[derive(Default)]
pub struct Registry {
    sessions: RwLock<HashMap<Uuid, Arc<Mutex<Slot>>>>,
}

impl Registry {
    pub fn insert(&self, slot: Slot) -> (Uuid, Arc<Mutex<Slot>>) {
        let id = Uuid::new_v4();
        let slot = Arc::new(Mutex::new(slot));
        self.sessions.write().expect("registry lock").insert(id, Arc::clone(&slot));
        (id, slot)
    }

    pub fn get(&self, id: Uuid) -> Result<Arc<Mutex<Slot>>, ApiError> {
        self.sessions
            .read()
            .expect("registry lock")
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
    }
}

pub fn lock(slot: &Mutex<Slot>) -> MutexGuard<'_, Slot> {
    // a panicking evolution task leaves a usable slot behind
    slot.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}
