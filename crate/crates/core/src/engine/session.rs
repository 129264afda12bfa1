use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::das::{sample, DasMethod};
use super::window::{initial_window, SelectionWindow};
use super::EngineError;
use crate::archive::{ArchiveConfig, CellRect, Elite, EliteArchive, GridCell, QualityRole};
use crate::domain::{Domain, Evaluation};

/// Defaults are tuned for the bundled floorplan domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub window_size: usize,
    /// Alternatives shown per selection.
    pub alternatives: usize,
    /// Evaluations between two selections.
    pub evals_per_selection: u64,
    pub initial_population: usize,
    /// Feasible coverage at which warm-up stops.
    pub warmup_coverage: f64,
    /// Warm-up fails once it has spent this many evaluations.
    pub warmup_eval_cap: u64,
    pub archive: ArchiveConfig,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            window_size: 9,
            alternatives: 4,
            evals_per_selection: 10_000,
            initial_population: 100,
            warmup_coverage: 0.01,
            warmup_eval_cap: 500_000,
            archive: ArchiveConfig::floorplan(),
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.archive.validate()?;
        SelectionWindow::validate_size(self.window_size, self.archive.resolution)?;
        if self.alternatives == 0 {
            return Err(EngineError::InvalidConfig("at least one alternative must be shown".into()));
        }
        if self.initial_population == 0 {
            return Err(EngineError::InvalidConfig("initial population must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.warmup_coverage) {
            return Err(EngineError::InvalidConfig(format!(
                "warm-up coverage {} is outside [0, 1]",
                self.warmup_coverage
            )));
        }
        Ok(())
    }
}

/// Where parents are drawn from during evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParentSelection {
    /// Occupied cells inside the selection window.
    Windowed,
    /// Any occupied cell.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord<G> {
    /// 1-based selection index.
    pub index: usize,
    pub elite: Elite<G>,
    pub method: DasMethod,
}

#[derive(Debug, Clone)]
struct Pending {
    method: DasMethod,
    cells: Vec<GridCell>,
}

/// State of one interactive search: both archives, the selection window and
/// the random stream. Every operation is deterministic given the seed and the
/// sequence of calls.
pub struct Session<D: Domain> {
    domain: Arc<D>,
    config: SessionConfig,
    feasible: EliteArchive<D::Genome>,
    infeasible: EliteArchive<D::Genome>,
    window: SelectionWindow,
    history: Vec<SelectionRecord<D::Genome>>,
    pending: Option<Pending>,
    rng: ChaCha8Rng,
    evaluations: u64,
    warmup_evaluations: u64,
    failed_evaluations: u64,
}

impl<D: Domain> Clone for Session<D> {
    fn clone(&self) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            config: self.config.clone(),
            feasible: self.feasible.clone(),
            infeasible: self.infeasible.clone(),
            window: self.window,
            history: self.history.clone(),
            pending: self.pending.clone(),
            rng: self.rng.clone(),
            evaluations: self.evaluations,
            warmup_evaluations: self.warmup_evaluations,
            failed_evaluations: self.failed_evaluations,
        }
    }
}

impl<D: Domain> Session<D> {
    /// Seeds both archives with a random population, runs unwindowed search
    /// until the feasible coverage target is met, then places the window.
    pub fn init(domain: Arc<D>, config: SessionConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let mut session = Self {
            domain,
            feasible: EliteArchive::new(config.archive, QualityRole::Fitness)?,
            infeasible: EliteArchive::new(config.archive, QualityRole::FeasibilityScore)?,
            window: SelectionWindow { origin: GridCell::new(0, 0), size: config.window_size },
            history: Vec::new(),
            pending: None,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            evaluations: 0,
            warmup_evaluations: 0,
            failed_evaluations: 0,
            config,
        };
        for _ in 0..session.config.initial_population {
            let genome = session.domain.random_genome(&mut session.rng);
            session.evaluate_and_insert(genome)?;
        }
        while session.feasible.coverage() < session.config.warmup_coverage {
            if session.evaluations >= session.config.warmup_eval_cap {
                return Err(EngineError::WarmupExhausted {
                    evaluations: session.evaluations,
                    coverage: session.feasible.coverage(),
                });
            }
            let chunk = (session.config.warmup_eval_cap - session.evaluations).min(100);
            session.evolve_until(chunk, ParentSelection::Global, |s| {
                s.feasible.coverage() >= s.config.warmup_coverage
            })?;
        }
        session.warmup_evaluations = session.evaluations;
        session.window = initial_window(&session.feasible, session.config.window_size)?;
        Ok(session)
    }

    /// Switches the random stream, so that clones of one warmed-up session
    /// continue independently.
    pub fn reseed(&mut self, stream: u64) {
        self.rng.set_stream(stream);
        self.rng.set_word_pos(0);
    }

    pub fn domain(&self) -> &Arc<D> {
        &self.domain
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn feasible(&self) -> &EliteArchive<D::Genome> {
        &self.feasible
    }

    pub fn infeasible(&self) -> &EliteArchive<D::Genome> {
        &self.infeasible
    }

    pub fn window(&self) -> SelectionWindow {
        self.window
    }

    pub fn history(&self) -> &[SelectionRecord<D::Genome>] {
        &self.history
    }

    /// Index of the next selection, starting at 1.
    pub fn next_selection(&self) -> usize {
        self.history.len() + 1
    }

    /// All evaluations, warm-up included.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn warmup_evaluations(&self) -> u64 {
        self.warmup_evaluations
    }

    /// Evaluations whose result could not be archived.
    pub fn failed_evaluations(&self) -> u64 {
        self.failed_evaluations
    }

    /// Draws alternatives from the feasible archive inside the window. They
    /// stay on offer until the next selection or sampling call.
    pub fn sample_alternatives(&mut self, method: DasMethod) -> Result<Vec<Elite<D::Genome>>, EngineError> {
        let cells = sample(method, &self.feasible, &self.window, self.config.alternatives, &mut self.rng)?;
        let elites = cells.iter().map(|&c| self.feasible.get(c).expect("sampled cells are occupied").clone()).collect();
        self.pending = Some(Pending { method, cells });
        Ok(elites)
    }

    /// Elites currently on offer, if any.
    pub fn alternatives(&self) -> Option<(DasMethod, Vec<&Elite<D::Genome>>)> {
        let pending = self.pending.as_ref()?;
        Some((pending.method, pending.cells.iter().filter_map(|&c| self.feasible.get(c)).collect()))
    }

    /// Records the choice of alternative `index` and moves the window onto it.
    pub fn commit_selection(&mut self, index: usize) -> Result<&SelectionRecord<D::Genome>, EngineError> {
        let pending = self.pending.as_ref().ok_or(EngineError::NoAlternatives)?;
        let available = pending.cells.len();
        let cell = *pending.cells.get(index).ok_or(EngineError::InvalidChoice { index, available })?;
        let elite = self.feasible.get(cell).ok_or(EngineError::EmptyWindow)?.clone();
        let method = pending.method;
        self.pending = None;
        self.window = self.window.recenter(cell, self.feasible.resolution());
        self.history.push(SelectionRecord { index: self.history.len() + 1, elite, method });
        Ok(self.history.last().expect("just pushed"))
    }

    /// Commits the choice, then spends the per-selection evaluation budget
    /// inside the new window.
    pub fn apply_selection(&mut self, index: usize) -> Result<(), EngineError> {
        self.commit_selection(index)?;
        self.expand_window(self.config.evals_per_selection)
    }

    pub fn expand_window(&mut self, evaluations: u64) -> Result<(), EngineError> {
        self.evolve(evaluations, ParentSelection::Windowed, &mut |_| {})
    }

    /// Unguided search: parents from anywhere in either archive.
    pub fn baseline_step(&mut self, evaluations: u64) -> Result<(), EngineError> {
        self.evolve(evaluations, ParentSelection::Global, &mut |_| {})
    }

    /// Runs `evaluations` mutate-evaluate-insert steps. Odd steps draw the
    /// parent from the feasible archive, even steps from the infeasible one,
    /// falling back to the other archive when the chosen one has no
    /// candidate. Offspring go to their own cell wherever it lies.
    /// `observer` runs after every step.
    pub fn evolve(
        &mut self,
        evaluations: u64,
        selection: ParentSelection,
        observer: &mut dyn FnMut(&Self),
    ) -> Result<(), EngineError> {
        for i in 1..=evaluations {
            self.step(i % 2 == 1, selection)?;
            observer(self);
        }
        Ok(())
    }

    fn evolve_until(
        &mut self,
        evaluations: u64,
        selection: ParentSelection,
        done: impl Fn(&Self) -> bool,
    ) -> Result<(), EngineError> {
        for i in 1..=evaluations {
            self.step(i % 2 == 1, selection)?;
            if done(self) {
                break;
            }
        }
        Ok(())
    }

    fn step(&mut self, feasible_first: bool, selection: ParentSelection) -> Result<(), EngineError> {
        let region = self.window.rect();
        let (first, second) =
            if feasible_first { (&self.feasible, &self.infeasible) } else { (&self.infeasible, &self.feasible) };
        let parent = draw(first, selection, region, &mut self.rng)
            .or_else(|| draw(second, selection, region, &mut self.rng))
            .ok_or(match selection {
                ParentSelection::Windowed => EngineError::EmptyWindow,
                ParentSelection::Global => EngineError::EmptyArchive,
            })?;
        let child = self.domain.mutate(&parent.genome, &mut self.rng);
        self.evaluate_and_insert(child)
    }

    fn evaluate_and_insert(&mut self, genome: D::Genome) -> Result<(), EngineError> {
        self.evaluations += 1;
        let evaluation: Evaluation = match self.domain.evaluate(&genome) {
            Ok(e) => e,
            Err(_) => {
                self.failed_evaluations += 1;
                return Ok(());
            }
        };
        let archive = if evaluation.feasible { &mut self.feasible } else { &mut self.infeasible };
        if archive.insert(genome, evaluation).is_err() {
            self.failed_evaluations += 1;
        }
        Ok(())
    }
}

fn draw<'a, G>(
    archive: &'a EliteArchive<G>,
    selection: ParentSelection,
    region: CellRect,
    rng: &mut ChaCha8Rng,
) -> Option<&'a Elite<G>> {
    match selection {
        ParentSelection::Windowed => archive.random_elite_in(region, rng),
        ParentSelection::Global => archive.random_elite(rng),
    }
}
