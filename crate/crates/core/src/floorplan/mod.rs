//! Constrained apartment layouts on a Voronoi tessellation of the plot.

mod evaluate;
mod genome;
pub mod geometry;
mod operators;
mod outline;
mod plan;
mod spec;
pub mod voronoi;

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use evaluate::{bc_vector, mean_area_precision, mean_orthogonality, CONSTRAINTS};
pub use genome::{LayoutGenome, Opening, OpeningKind};
pub use geometry::{area_precision, compactness, orthogonality, Bounds, Point};
pub use operators::Destruction;
pub use outline::RoomOutline;
pub use spec::{DesignSpec, SpaceUnit, SpecError, UnitId, UnitKind};

use crate::domain::{Domain, DomainError, Evaluation};
use operators::Draft;
use plan::Plan;

/// Geometric and operator parameters of the layout problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainConfig {
    pub sites: usize,
    /// Minimum edge length for doors and entrances, in meters.
    pub door_width: f64,
    pub window_width: f64,
    pub pathway_width: f64,
    /// Area precision below which a layout is infeasible.
    pub area_threshold: f64,
    pub shift_magnitude: [f64; 2],
    pub jitter_fraction: [f64; 2],
    pub expand_rings: [usize; 2],
    pub erode_fraction: f64,
    pub opening_deletion_probability: f64,
    /// Cells a unit may gain per missing adjacency during repair.
    pub adjacency_growth_limit: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            sites: 300,
            door_width: 0.8,
            window_width: 0.6,
            pathway_width: 0.5,
            area_threshold: 0.6,
            shift_magnitude: [0.1, 1.0],
            jitter_fraction: [0.01, 0.10],
            expand_rings: [1, 3],
            erode_fraction: 0.3,
            opening_deletion_probability: 0.3,
            adjacency_growth_limit: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FloorplanDomain {
    spec: Arc<DesignSpec>,
    config: DomainConfig,
}

impl FloorplanDomain {
    pub fn new(spec: DesignSpec, config: DomainConfig) -> Self {
        Self { spec: Arc::new(spec), config }
    }

    pub fn apartment() -> Self {
        Self::new(DesignSpec::apartment(), DomainConfig::default())
    }

    pub fn spec(&self) -> &DesignSpec {
        &self.spec
    }

    pub fn config(&self) -> &DomainConfig {
        &self.config
    }

    pub fn generate_initial(&self, rng: &mut dyn RngCore) -> LayoutGenome {
        operators::generate(&self.spec, &self.config, rng)
    }

    /// Applies a single destruction operator without repairing.
    pub fn destroy(
        &self,
        genome: &LayoutGenome,
        op: Destruction,
        rng: &mut dyn RngCore,
    ) -> Result<LayoutGenome, DomainError> {
        let mut draft = Draft::from_genome(genome)?;
        operators::destroy(&mut draft, op, &self.spec, &self.config, rng);
        Ok(draft.into_genome())
    }

    pub fn repair(&self, genome: &LayoutGenome, rng: &mut dyn RngCore) -> Result<LayoutGenome, DomainError> {
        let mut draft = Draft::from_genome(genome)?;
        draft.with_plan(&self.spec, &self.config, |plan| operators::repair(plan, rng));
        Ok(draft.into_genome())
    }

    pub fn place_openings(&self, genome: &LayoutGenome, rng: &mut dyn RngCore) -> Result<LayoutGenome, DomainError> {
        let mut draft = Draft::from_genome(genome)?;
        draft.with_plan(&self.spec, &self.config, |plan| plan.place_openings(rng));
        Ok(draft.into_genome())
    }

    /// Boundary of every placed unit, in spec order.
    pub fn outlines(&self, genome: &LayoutGenome) -> Result<Vec<(UnitId, RoomOutline)>, DomainError> {
        let tess = genome.tessellation()?;
        let plan = Plan::new(&tess, &self.spec, &self.config, genome.assignment().to_vec(), Vec::new());
        Ok(plan
            .placed_units()
            .into_iter()
            .map(|id| (id, RoomOutline::trace(&tess, genome.assignment(), id)))
            .collect())
    }

    /// Drawable form of a layout.
    pub fn geometry(&self, genome: &LayoutGenome) -> Result<LayoutGeometry, DomainError> {
        let tess = genome.tessellation()?;
        let rooms = self
            .outlines(genome)?
            .into_iter()
            .map(|(id, outline)| {
                let unit = self.spec.unit(id);
                RoomGeometry {
                    id,
                    name: unit.map_or_else(String::new, |u| u.name.clone()),
                    kind: unit.map_or(UnitKind::Interior, |u| u.kind),
                    target_area: unit.map_or(0.0, |u| u.target_area),
                    area: outline.area,
                    rings: outline.rings,
                }
            })
            .collect();
        let openings = genome
            .openings()
            .iter()
            .filter_map(|op| {
                tess.edge(&op.edge).map(|e| OpeningGeometry { kind: op.kind, start: e.start, end: e.end, rooms: op.rooms })
            })
            .collect();
        Ok(LayoutGeometry { bounds: genome.bounds(), rooms, openings })
    }
}

impl Domain for FloorplanDomain {
    type Genome = LayoutGenome;

    fn random_genome(&self, rng: &mut dyn RngCore) -> LayoutGenome {
        self.generate_initial(rng)
    }

    fn mutate(&self, parent: &LayoutGenome, rng: &mut dyn RngCore) -> LayoutGenome {
        // a parent whose sites cannot be tessellated has no valid offspring
        operators::mutate(parent, &self.spec, &self.config, rng).unwrap_or_else(|_| parent.clone())
    }

    fn evaluate(&self, genome: &LayoutGenome) -> Result<Evaluation, DomainError> {
        let tess = genome.tessellation()?;
        let plan = Plan::new(&tess, &self.spec, &self.config, genome.assignment().to_vec(), genome.openings().to_vec());
        evaluate::evaluate_plan(&plan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutGeometry {
    pub bounds: Bounds,
    pub rooms: Vec<RoomGeometry>,
    pub openings: Vec<OpeningGeometry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomGeometry {
    pub id: UnitId,
    pub name: String,
    pub kind: UnitKind,
    pub target_area: f64,
    pub area: f64,
    pub rings: Vec<Vec<Point>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningGeometry {
    pub kind: OpeningKind,
    pub start: Point,
    pub end: Point,
    pub rooms: (UnitId, Option<UnitId>),
}
