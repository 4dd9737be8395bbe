//! Rooms, placed instances, cells, and openings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{Category, ModelCatalog, ModelId, RoomType};
use crate::error::CoreError;
use crate::geom::{self, normalize_yaw};
use crate::{Rect, Vec2};

/// One of the nine placement cells of a rectangular region: four corners,
/// four wall edges, and the interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellId {
    Nw,
    N,
    Ne,
    E,
    Se,
    S,
    Sw,
    W,
    Interior,
}

impl CellId {
    pub const ALL: [CellId; 9] = [
        CellId::Nw,
        CellId::N,
        CellId::Ne,
        CellId::E,
        CellId::Se,
        CellId::S,
        CellId::Sw,
        CellId::W,
        CellId::Interior,
    ];

    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|c| c == self).unwrap()
    }

    pub fn is_corner(&self) -> bool {
        matches!(self, CellId::Nw | CellId::Ne | CellId::Se | CellId::Sw)
    }

    pub fn is_edge(&self) -> bool {
        matches!(self, CellId::N | CellId::E | CellId::S | CellId::W)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CellId::Nw => "nw",
            CellId::N => "n",
            CellId::Ne => "ne",
            CellId::E => "e",
            CellId::Se => "se",
            CellId::S => "s",
            CellId::Sw => "sw",
            CellId::W => "w",
            CellId::Interior => "interior",
        }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Door or window cut into a wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpeningKind {
    Door,
    Window,
}

/// An opening occupies a sub-segment of a wall. `segment` is the occupied
/// span; `width` equals the segment length; `sill_height` is the bottom
/// elevation (0 for doors).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Opening {
    pub kind: OpeningKind,
    pub segment: (Vec2, Vec2),
    pub width: f64,
    pub sill_height: f64,
}

impl Opening {
    pub fn midpoint(&self) -> Vec2 {
        self.segment.0.add(self.segment.1).scale(0.5)
    }
}

/// A placed object: model reference, footprint-center position (`pos[1]` is
/// the elevation of the footprint plane above the floor), yaw in `[0, 2π)`,
/// the cell it was assigned to (none for embellishments), and the per-side
/// clearance reserved around it at placement time (front, back, left,
/// right; none for embellishments and pattern members).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacedInstance {
    pub model: ModelId,
    pub pos: [f64; 3],
    pub yaw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<[f64; 4]>,
}

impl PlacedInstance {
    pub fn new(model: ModelId, pos: [f64; 3], yaw: f64) -> Self {
        PlacedInstance {
            model,
            pos,
            yaw: normalize_yaw(yaw),
            cell: None,
            padding: None,
        }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.pos[0], self.pos[2])
    }
}

/// A complete room: type, rectilinear boundary, openings, and instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub room_type: RoomType,
    pub boundary: Vec<Vec2>,
    #[serde(default)]
    pub openings: Vec<Opening>,
    pub instances: Vec<PlacedInstance>,
}

impl Layout {
    /// Width and depth of the boundary bounding box.
    pub fn dims(&self) -> (f64, f64) {
        let (lo, hi) = geom::polygon_bbox(&self.boundary);
        (hi.x - lo.x, hi.z - lo.z)
    }

    /// Furniture instances only.
    pub fn furniture<'a>(
        &'a self,
        catalog: &'a ModelCatalog,
    ) -> impl Iterator<Item = &'a PlacedInstance> {
        self.instances.iter().filter(move |i| {
            catalog
                .get(&i.model)
                .map(|s| s.category == Category::Furniture)
                .unwrap_or(false)
        })
    }

    /// Boundary walls as segments.
    pub fn walls(&self) -> Vec<(Vec2, Vec2)> {
        let n = self.boundary.len();
        (0..n)
            .map(|i| (self.boundary[i], self.boundary[(i + 1) % n]))
            .collect()
    }
}

/// World-space footprint of an instance, from catalog dimensions rotated by
/// yaw around the footprint center.
pub fn footprint(instance: &PlacedInstance, catalog: &ModelCatalog) -> Result<Rect, CoreError> {
    let spec = catalog.get(&instance.model)?;
    Ok(Rect::new(
        instance.center(),
        Vec2::new(spec.depth_m / 2.0, spec.width_m / 2.0),
        instance.yaw,
    ))
}

/// Footprint grown by the instance's recorded per-side padding (front,
/// back, left, right). Instances without padding gain nothing.
pub fn padded_footprint(
    instance: &PlacedInstance,
    catalog: &ModelCatalog,
) -> Result<Rect, CoreError> {
    let spec = catalog.get(&instance.model)?;
    let p = instance.padding.unwrap_or([0.0; 4]);
    let half = Vec2::new(
        (spec.depth_m + p[0] + p[1]) / 2.0,
        (spec.width_m + p[2] + p[3]) / 2.0,
    );
    // Asymmetric padding shifts the envelope center off the object center.
    let local_off = Vec2::new((p[0] - p[1]) / 2.0, (p[2] - p[3]) / 2.0);
    let center = instance.center().add(local_off.rotate(instance.yaw));
    Ok(Rect::new(center, half, instance.yaw))
}
