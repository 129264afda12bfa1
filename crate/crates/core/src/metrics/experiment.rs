use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::measures::{local_metrics, usc_efficiency, usc_metrics, LocalMetrics, UscMetrics};
use super::MetricsError;
use crate::archive::{EliteArchive, GridCell, QualityRole};
use crate::domain::{Domain, Evaluation};
use crate::engine::{DasMethod, ParentSelection, Session, SessionConfig};
use crate::users::{UserError, UserId};

/// What picks the alternatives in a run: an artificial user, a person using
/// an interactive session, or nobody (unguided search over the whole archive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Driver {
    User(UserId),
    Human,
    Baseline,
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Driver::User(u) => u.fmt(f),
            Driver::Human => f.write_str("human"),
            Driver::Baseline => f.write_str("baseline"),
        }
    }
}

impl FromStr for Driver {
    type Err = UserError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("baseline") {
            Ok(Driver::Baseline)
        } else if s.eq_ignore_ascii_case("human") {
            Ok(Driver::Human)
        } else {
            s.parse().map(Driver::User)
        }
    }
}

impl TryFrom<String> for Driver {
    type Error = UserError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Driver> for String {
    fn from(d: Driver) -> String {
        d.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub driver: Driver,
    pub das: DasMethod,
    pub runs: usize,
    pub selections: usize,
    /// Warm-up and per-selection budget; `seed` picks the shared warm-up.
    pub session: SessionConfig,
    pub snapshot_every: u64,
    /// Users whose preference metrics are recorded besides the driver.
    pub observed_users: Vec<UserId>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            driver: Driver::Baseline,
            das: DasMethod::Corners,
            runs: 10,
            selections: 10,
            session: SessionConfig::default(),
            snapshot_every: 1_000,
            observed_users: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    /// Users scored in every snapshot: the driver first, then the observed
    /// users, without repeats.
    pub fn scored_users(&self) -> Vec<UserId> {
        let mut users = Vec::new();
        if let Driver::User(u) = self.driver {
            users.push(u);
        }
        for &u in &self.observed_users {
            if !users.contains(&u) {
                users.push(u);
            }
        }
        users
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserScore {
    pub user: UserId,
    #[serde(flatten)]
    pub metrics: UscMetrics,
}

/// State of the feasible archive at one point of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Evaluations since the end of warm-up.
    pub evals: u64,
    /// Selections completed so far.
    pub selection: usize,
    pub coverage: f64,
    pub max_fitness: f64,
    pub qd_score: f64,
    pub usc: Vec<UserScore>,
}

impl Snapshot {
    pub fn usc_of(&self, user: UserId) -> Option<&UscMetrics> {
        self.usc.iter().find(|s| s.user == user).map(|s| &s.metrics)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeLog {
    pub cell: GridCell,
    pub bc: [f64; 2],
    pub fitness: f64,
    /// Score under the driving user's criterion, when there is one.
    pub usc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionLog {
    pub index: usize,
    pub method: DasMethod,
    /// Evaluations since warm-up when the alternatives were shown.
    pub evals: u64,
    pub alternatives: Vec<AlternativeLog>,
    pub chosen: usize,
    pub local: LocalMetrics,
}

impl SelectionLog {
    pub fn chosen(&self) -> &AlternativeLog {
        &self.alternatives[self.chosen]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDump {
    pub cell: GridCell,
    pub quality: f64,
    pub fitness: f64,
    pub feasibility_score: f64,
    pub bc: [f64; 2],
}

/// Occupied cells of an archive, in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveDump {
    pub resolution: usize,
    pub role: QualityRole,
    pub cells: Vec<CellDump>,
}

impl ArchiveDump {
    pub fn of<G>(archive: &EliteArchive<G>) -> Self {
        let mut cells: Vec<CellDump> = archive
            .iter()
            .map(|e| CellDump {
                cell: e.cell,
                quality: archive.quality(e),
                fitness: e.evaluation.fitness,
                feasibility_score: e.evaluation.feasibility_score,
                bc: e.evaluation.bc,
            })
            .collect();
        cells.sort_by_key(|c| (c.cell.row, c.cell.col));
        Self { resolution: archive.resolution(), role: archive.role(), cells }
    }

    /// Row-major quality matrix, `None` for empty cells.
    pub fn matrix(&self) -> Vec<Vec<Option<f64>>> {
        let mut m = vec![vec![None; self.resolution]; self.resolution];
        for c in &self.cells {
            m[c.cell.row][c.cell.col] = Some(c.quality);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub config: ExperimentConfig,
    pub run: usize,
    /// Random stream the run continued on after the shared warm-up.
    pub stream: u64,
    pub warmup_evaluations: u64,
    pub snapshots: Vec<Snapshot>,
    pub selections: Vec<SelectionLog>,
    pub feasible: ArchiveDump,
    pub infeasible: ArchiveDump,
}

impl RunLog {
    /// Efficiency of the driver's consecutive choices, scored by `user`.
    pub fn usc_efficiency(&self, user: UserId) -> Result<f64, MetricsError> {
        let scores: Vec<f64> =
            self.selections.iter().map(|s| user.usc(s.chosen().bc, s.index)).collect();
        usc_efficiency(&scores)
    }

    pub fn snapshot_at_selection(&self, selection: usize) -> Option<&Snapshot> {
        self.snapshots.iter().rev().find(|s| s.selection == selection)
    }
}

/// Runs warm-up once; every run of an experiment continues from a clone.
pub fn warm_up<D: Domain>(domain: Arc<D>, config: &ExperimentConfig) -> Result<Session<D>, MetricsError> {
    Ok(Session::init(domain, config.session.clone())?)
}

pub fn run_experiment<D: Domain>(domain: Arc<D>, config: &ExperimentConfig) -> Result<Vec<RunLog>, MetricsError> {
    let warm = warm_up(domain, config)?;
    run_from(&warm, config)
}

/// Runs `config.runs` runs from one warmed-up session, each on its own
/// thread. Run `i` continues on random stream `i + 1`, so runs with the same
/// index but different drivers start from identical states.
pub fn run_from<D: Domain>(warm: &Session<D>, config: &ExperimentConfig) -> Result<Vec<RunLog>, MetricsError> {
    if config.driver == Driver::Human {
        return Err(MetricsError::InvalidConfig("interactive sessions cannot be scripted".into()));
    }
    if config.snapshot_every == 0 {
        return Err(MetricsError::InvalidConfig("snapshot interval must be positive".into()));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut logs = Vec::with_capacity(config.runs);
    let runs: Vec<usize> = (0..config.runs).collect();
    for batch in runs.chunks(workers) {
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|&run| {
                    let mut session = warm.clone();
                    let stream = run as u64 + 1;
                    session.reseed(stream);
                    scope.spawn(move || run_one(session, config, run, stream))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
        });
        for result in results {
            logs.push(result?);
        }
    }
    Ok(logs)
}

/// Metrics of the feasible archive. Users whose criterion shifts are scored
/// as of `selection` (the first criterion before any selection).
pub fn snapshot<D: Domain>(session: &Session<D>, evals: u64, selection: usize, users: &[UserId]) -> Snapshot {
    let feasible = session.feasible();
    let s = selection.max(1);
    Snapshot {
        evals,
        selection,
        coverage: feasible.coverage(),
        max_fitness: feasible.max_fitness().unwrap_or(0.0),
        qd_score: feasible.qd_score(),
        usc: users.iter().map(|&user| UserScore { user, metrics: usc_metrics(feasible, user, s) }).collect(),
    }
}

fn run_one<D: Domain>(
    mut session: Session<D>,
    config: &ExperimentConfig,
    run: usize,
    stream: u64,
) -> Result<RunLog, MetricsError> {
    let users = config.scored_users();
    let start = session.evaluations();
    let every = config.snapshot_every;
    let mut snapshots = vec![snapshot(&session, 0, 0, &users)];
    let mut selections = Vec::with_capacity(config.selections);
    for k in 1..=config.selections {
        let mode = match config.driver {
            Driver::User(user) => {
                let shown = session.sample_alternatives(config.das)?;
                let evaluations: Vec<Evaluation> = shown.iter().map(|e| e.evaluation.clone()).collect();
                let chosen = user.choose(evaluations.iter().map(|e| e.bc), k)?;
                selections.push(SelectionLog {
                    index: k,
                    method: config.das,
                    evals: session.evaluations() - start,
                    alternatives: shown
                        .iter()
                        .map(|e| AlternativeLog {
                            cell: e.cell,
                            bc: e.evaluation.bc,
                            fitness: e.evaluation.fitness,
                            usc: Some(user.usc(e.evaluation.bc, k)),
                        })
                        .collect(),
                    chosen,
                    local: local_metrics(&evaluations, user, k)?,
                });
                session.commit_selection(chosen)?;
                ParentSelection::Windowed
            }
            Driver::Human | Driver::Baseline => ParentSelection::Global,
        };
        session.evolve(config.session.evals_per_selection, mode, &mut |s| {
            let evals = s.evaluations() - start;
            if evals.is_multiple_of(every) {
                snapshots.push(snapshot(s, evals, k, &users));
            }
        })?;
        let evals = session.evaluations() - start;
        if snapshots.last().is_none_or(|s| s.evals != evals) {
            snapshots.push(snapshot(&session, evals, k, &users));
        }
    }
    Ok(RunLog {
        config: config.clone(),
        run,
        stream,
        warmup_evaluations: session.warmup_evaluations(),
        snapshots,
        selections,
        feasible: ArchiveDump::of(session.feasible()),
        infeasible: ArchiveDump::of(session.infeasible()),
    })
}

/// One run log per line.
pub fn write_jsonl(path: &Path, logs: &[RunLog]) -> Result<(), MetricsError> {
    let mut out = BufWriter::new(File::create(path)?);
    for log in logs {
        serde_json::to_writer(&mut out, log)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RunLog>, MetricsError> {
    let mut logs = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            logs.push(serde_json::from_str(&line)?);
        }
    }
    Ok(logs)
}
