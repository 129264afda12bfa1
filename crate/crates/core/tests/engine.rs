//! Session behavior on a small synthetic domain whose genome is its own
//! behavior pair.

use std::sync::{Arc, Mutex};

use rand::{Rng, RngCore};
use ucme_core::engine::{EngineError, ParentSelection};
use ucme_core::{ArchiveConfig, DasMethod, Domain, DomainError, Evaluation, GridCell, Session, SessionConfig};

/// Feasible when the coordinates sum to at least `threshold`. Records every
/// parent handed to `mutate`.
struct Plane {
    threshold: f64,
    step: f64,
    parents: Mutex<Vec<[f64; 2]>>,
}

impl Plane {
    fn new(threshold: f64, step: f64) -> Arc<Self> {
        Arc::new(Self { threshold, step, parents: Mutex::new(Vec::new()) })
    }

    fn feasible(&self, g: &[f64; 2]) -> bool {
        g[0] + g[1] >= self.threshold
    }

    fn take_parents(&self) -> Vec<[f64; 2]> {
        std::mem::take(&mut *self.parents.lock().unwrap())
    }
}

impl Domain for Plane {
    type Genome = [f64; 2];

    fn random_genome(&self, rng: &mut dyn RngCore) -> [f64; 2] {
        [rng.random_range(0.0..0.6), rng.random_range(0.0..0.6)]
    }

    fn mutate(&self, parent: &[f64; 2], rng: &mut dyn RngCore) -> [f64; 2] {
        self.parents.lock().unwrap().push(*parent);
        parent.map(|v| (v + rng.random_range(-self.step..self.step)).clamp(0.0, 1.0))
    }

    fn evaluate(&self, g: &[f64; 2]) -> Result<Evaluation, DomainError> {
        let score = ((g[0] + g[1]) / self.threshold).min(1.0);
        Ok(Evaluation::simple(self.feasible(g), 1.0 - (g[0] - g[1]).abs(), score, *g))
    }
}

fn config(seed: u64) -> SessionConfig {
    SessionConfig { initial_population: 50, warmup_coverage: 0.01, evals_per_selection: 400,
        archive: ArchiveConfig::default(),
        seed,
        ..SessionConfig::default()
    }
}

fn cell(bc: [f64; 2]) -> GridCell {
    GridCell::new((bc[0] * 64.0).min(63.0) as usize, (bc[1] * 64.0).min(63.0) as usize)
}

#[test]
fn warm_up_reaches_the_target_then_places_the_window() {
    let domain = Plane::new(0.9, 0.08);
    let session = Session::init(Arc::clone(&domain), config(1)).unwrap();
    assert!(session.feasible().coverage() >= 0.01);
    assert_eq!(session.evaluations(), session.warmup_evaluations());
    let window = session.window();
    assert_eq!(window.size, 9);
    assert!(session.feasible().iter().any(|e| window.contains(e.cell)));
}

#[test]
fn warm_up_gives_up_at_the_cap() {
    let domain = Plane::new(5.0, 0.05);
    let cfg = SessionConfig { warmup_eval_cap: 2_000, ..config(1) };
    match Session::init(domain, cfg) {
        Err(EngineError::WarmupExhausted { evaluations, coverage }) => {
            assert_eq!(evaluations, 2_000);
            assert_eq!(coverage, 0.0);
        }
        other => panic!("expected exhaustion, got {:?}", other.err()),
    }
}

#[test]
fn parents_alternate_between_archives_inside_the_window() {
    let domain = Plane::new(0.9, 0.08);
    let mut session = Session::init(Arc::clone(&domain), config(2)).unwrap();
    let window = session.window();
    let both = session.infeasible().iter().any(|e| window.contains(e.cell))
        && session.feasible().iter().any(|e| window.contains(e.cell));
    assert!(both, "fixture needs both archives in the window");
    domain.take_parents();
    let before = session.evaluations();
    let mut outside = 0;
    session
        .evolve(300, ParentSelection::Windowed, &mut |s| {
            outside = s.feasible().iter().chain(s.infeasible().iter()).filter(|e| !window.contains(e.cell)).count();
        })
        .unwrap();
    assert_eq!(session.evaluations() - before, 300);
    let parents = domain.take_parents();
    assert_eq!(parents.len(), 300);
    for (i, p) in parents.iter().enumerate() {
        assert!(window.contains(cell(*p)), "parent {i} outside the window");
        assert_eq!(domain.feasible(p), i % 2 == 0, "step {} drew from the wrong archive", i + 1);
    }
    assert!(outside > 0, "offspring may land anywhere");
}

#[test]
fn empty_archive_falls_back_to_the_other() {
    // everything is feasible, so the infeasible archive stays empty
    let domain = Plane::new(0.0, 0.05);
    let mut session = Session::init(Arc::clone(&domain), config(3)).unwrap();
    assert!(session.infeasible().is_empty());
    domain.take_parents();
    session.evolve(50, ParentSelection::Windowed, &mut |_| {}).unwrap();
    assert_eq!(domain.take_parents().len(), 50);
    assert!(session.infeasible().is_empty());
}

#[test]
fn global_search_draws_from_everywhere() {
    let domain = Plane::new(0.9, 0.08);
    let mut session = Session::init(Arc::clone(&domain), config(4)).unwrap();
    session.baseline_step(2_000).unwrap();
    let window = session.window();
    domain.take_parents();
    session.baseline_step(400).unwrap();
    let parents = domain.take_parents();
    assert!(parents.iter().any(|p| !window.contains(cell(*p))));
    assert_eq!(session.window(), window, "unguided search leaves the window alone");
}

#[test]
fn selections_move_the_window_and_are_recorded() {
    let domain = Plane::new(0.9, 0.08);
    let mut session = Session::init(domain, config(5)).unwrap();
    assert!(matches!(session.commit_selection(0), Err(EngineError::NoAlternatives)));
    let shown = session.sample_alternatives(DasMethod::Edges).unwrap();
    assert!(!shown.is_empty() && shown.len() <= 4);
    assert!(matches!(session.commit_selection(9), Err(EngineError::InvalidChoice { index: 9, .. })));
    let target = shown[0].cell;
    let before = session.evaluations();
    session.apply_selection(0).unwrap();
    assert_eq!(session.evaluations() - before, 400);
    assert_eq!(session.history().len(), 1);
    assert_eq!(session.history()[0].elite.cell, target);
    assert_eq!(session.history()[0].method, DasMethod::Edges);
    assert!(session.window().contains(target));
    assert_eq!(session.next_selection(), 2);
    assert!(session.alternatives().is_none());
}

#[test]
fn identical_seeds_and_choices_give_identical_sessions() {
    let play = |seed: u64| {
        let mut s = Session::init(Plane::new(0.9, 0.08), config(seed)).unwrap();
        for k in 0..4 {
            let shown = s.sample_alternatives(DasMethod::ALL[k % 6]).unwrap();
            s.apply_selection(shown.len() - 1).unwrap();
        }
        let cells: Vec<(GridCell, [f64; 2])> = s.feasible().iter().map(|e| (e.cell, e.genome)).collect();
        (cells, s.window(), s.evaluations())
    };
    assert_eq!(play(8), play(8));
    assert_ne!(play(8).0, play(9).0);
}

#[test]
fn reseeded_clones_diverge_from_a_shared_start() {
    let warm = Session::init(Plane::new(0.9, 0.08), config(6)).unwrap();
    let run = |stream: u64| {
        let mut s = warm.clone();
        s.reseed(stream);
        s.expand_window(500).unwrap();
        s.feasible().iter().map(|e| e.genome).collect::<Vec<_>>()
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
}
