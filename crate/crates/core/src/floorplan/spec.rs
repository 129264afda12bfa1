//! Design specification: the space units a layout must contain and which of
//! them must connect through a door.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geometry::Bounds;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("malformed design spec: {0}")]
    Syntax(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl SpecError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError::Invalid { field: field.into(), message: message.into() }
    }

    /// Offending field path, when known.
    pub fn field(&self) -> Option<&str> {
        match self {
            SpecError::Invalid { field, .. } => Some(field),
            SpecError::Syntax(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitId(pub u32);

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    #[serde(alias = "Interior")]
    Interior,
    #[serde(alias = "Exterior")]
    Exterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceUnit {
    pub id: UnitId,
    pub name: String,
    pub kind: UnitKind,
    /// Target area in square meters.
    #[serde(rename = "area")]
    pub target_area: f64,
    #[serde(default)]
    pub entrances: u32,
    #[serde(default)]
    pub windows: u32,
}

#[derive(Debug, Clone, Deserialize)]
struct RawSpec {
    #[serde(default)]
    bounds: Option<Bounds>,
    units: Vec<SpaceUnit>,
    #[serde(default)]
    adjacencies: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSpec {
    pub bounds: Bounds,
    pub units: Vec<SpaceUnit>,
    pub adjacencies: Vec<(UnitId, UnitId)>,
}

const APARTMENT: &str = include_str!("../../specs/apartment.json");

impl DesignSpec {
    pub fn parse(document: &str) -> Result<Self, SpecError> {
        let raw: RawSpec = serde_json::from_str(document).map_err(|e| SpecError::Syntax(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, SpecError> {
        let raw: RawSpec = serde_json::from_value(value).map_err(|e| SpecError::Syntax(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// The ten-unit Mediterranean apartment used throughout the experiments.
    pub fn apartment() -> Self {
        Self::parse(APARTMENT).expect("bundled apartment spec is valid")
    }

    fn from_raw(raw: RawSpec) -> Result<Self, SpecError> {
        let bounds = raw.bounds.unwrap_or_default();
        if !(bounds.width > 0.0 && bounds.height > 0.0 && bounds.width.is_finite() && bounds.height.is_finite()) {
            return Err(SpecError::invalid("bounds", "width and height must be positive"));
        }
        if raw.units.is_empty() {
            return Err(SpecError::invalid("units", "at least one unit is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, unit) in raw.units.iter().enumerate() {
            if !seen.insert(unit.id) {
                return Err(SpecError::invalid(format!("units[{i}].id"), format!("duplicate id {}", unit.id)));
            }
            if !(unit.target_area > 0.0 && unit.target_area.is_finite()) {
                return Err(SpecError::invalid(
                    format!("units[{i}].area"),
                    format!("area of unit {} must be positive, got {}", unit.id, unit.target_area),
                ));
            }
            if unit.name.trim().is_empty() {
                return Err(SpecError::invalid(format!("units[{i}].name"), "name must not be empty"));
            }
        }
        let total: f64 = raw.units.iter().map(|u| u.target_area).sum();
        if total >= bounds.area() {
            return Err(SpecError::invalid(
                "bounds",
                format!("plot area {} must exceed the total unit area {total}", bounds.area()),
            ));
        }
        let mut adjacencies = Vec::with_capacity(raw.adjacencies.len());
        let mut pairs = BTreeSet::new();
        for (i, [a, b]) in raw.adjacencies.iter().copied().enumerate() {
            for (slot, id) in [(0, a), (1, b)] {
                if !seen.contains(&UnitId(id)) {
                    return Err(SpecError::invalid(format!("adjacencies[{i}][{slot}]"), format!("unknown unit id {id}")));
                }
            }
            if a == b {
                return Err(SpecError::invalid(format!("adjacencies[{i}]"), format!("unit {a} cannot connect to itself")));
            }
            if !pairs.insert((a.min(b), a.max(b))) {
                return Err(SpecError::invalid(format!("adjacencies[{i}]"), format!("duplicate connection {a}-{b}")));
            }
            adjacencies.push((UnitId(a), UnitId(b)));
        }
        Ok(Self { bounds, units: raw.units, adjacencies })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bounds": self.bounds,
            "units": self.units,
            "adjacencies": self.adjacencies.iter().map(|(a, b)| [a.0, b.0]).collect::<Vec<_>>(),
        })
    }

    pub fn unit(&self, id: UnitId) -> Option<&SpaceUnit> {
        self.units.iter().find(|u| u.id == id)
    }

    pub fn contains(&self, id: UnitId) -> bool {
        self.unit(id).is_some()
    }

    pub fn total_area(&self) -> f64 {
        self.units.iter().map(|u| u.target_area).sum()
    }

    pub fn degree(&self, id: UnitId) -> usize {
        self.adjacencies.iter().filter(|(a, b)| *a == id || *b == id).count()
    }

    pub fn neighbours(&self, id: UnitId) -> impl Iterator<Item = UnitId> + '_ {
        self.adjacencies.iter().filter_map(move |&(a, b)| {
            if a == id {
                Some(b)
            } else if b == id {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn requires_door(&self, a: UnitId, b: UnitId) -> bool {
        self.adjacencies.iter().any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    /// Units by descending number of connections, ties by id.
    pub fn placement_order(&self) -> Vec<UnitId> {
        let mut ids: Vec<UnitId> = self.units.iter().map(|u| u.id).collect();
        ids.sort_by(|a, b| self.degree(*b).cmp(&self.degree(*a)).then(a.cmp(b)));
        ids
    }

    /// Windows a unit needs; exterior units never need any.
    pub fn required_windows(&self, id: UnitId) -> u32 {
        self.unit(id).filter(|u| u.kind == UnitKind::Interior).map_or(0, |u| u.windows)
    }

    pub fn required_entrances(&self, id: UnitId) -> u32 {
        self.unit(id).map_or(0, |u| u.entrances)
    }

    /// Doors, entrances and windows the layout must contain.
    pub fn prescribed_openings(&self) -> usize {
        self.adjacencies.len()
            + self
                .units
                .iter()
                .map(|u| (self.required_entrances(u.id) + self.required_windows(u.id)) as usize)
                .sum::<usize>()
    }
}
