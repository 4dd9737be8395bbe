//! Corpus file format: load, validate, save.
//!
//! A corpus is a single JSON document embedding its catalog, so a file is
//! self-contained:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "catalog": { "format_version": 1, "models": { ... } },
//!   "rooms": [
//!     { "room_type": "bedroom",
//!       "polygon": [[0,0],[4,0],[4,3],[0,3]],
//!       "openings": [],
//!       "objects": [ { "model": "bed", "pos": [2,0,1], "yaw": 0 } ] }
//!   ]
//! }
//! ```
//!
//! Rooms without a `room_type` label are dropped at load and counted.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{ModelCatalog, RoomType};
use crate::error::CoreError;
use crate::geom;
use crate::scene::{Opening, PlacedInstance};
use crate::Vec2;

pub const CORPUS_FORMAT_VERSION: u32 = 1;

/// One training room.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRoom {
    pub room_type: Option<RoomType>,
    pub polygon: Vec<Vec2>,
    #[serde(default)]
    pub openings: Vec<Opening>,
    pub objects: Vec<PlacedInstance>,
}

/// A validated corpus: every object's model resolves in the catalog, every
/// kept room is labeled and has a simple rectilinear boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingCorpus {
    pub format_version: u32,
    pub catalog: ModelCatalog,
    pub rooms: Vec<CorpusRoom>,
}

/// Load-time statistics worth reporting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub kept_rooms: usize,
    pub dropped_unlabeled: usize,
}

impl TrainingCorpus {
    pub fn new(catalog: ModelCatalog) -> Self {
        TrainingCorpus {
            format_version: CORPUS_FORMAT_VERSION,
            catalog,
            rooms: Vec::new(),
        }
    }

    /// Validate catalog references and room boundaries. Unlabeled rooms are
    /// dropped and counted; structural problems are errors.
    pub fn validate(mut self) -> Result<(TrainingCorpus, LoadReport), CoreError> {
        self.catalog.validate()?;
        let mut report = LoadReport::default();
        let mut kept = Vec::with_capacity(self.rooms.len());
        for (idx, room) in self.rooms.into_iter().enumerate() {
            if room.room_type.is_none() {
                report.dropped_unlabeled += 1;
                continue;
            }
            if room.polygon.len() < 4
                || !geom::is_rectilinear(&room.polygon)
                || !geom::is_simple(&room.polygon)
            {
                return Err(CoreError::BadPolygon(format!("room {idx}")));
            }
            for obj in &room.objects {
                if !self.catalog.contains(&obj.model) {
                    return Err(CoreError::UnknownModel(obj.model.0.clone()));
                }
            }
            kept.push(room);
        }
        report.kept_rooms = kept.len();
        self.rooms = kept;
        Ok((self, report))
    }
}

/// Load and validate a corpus file.
pub fn load_corpus(path: &Path) -> Result<(TrainingCorpus, LoadReport), CoreError> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    let corpus: TrainingCorpus = serde_json::from_str(&text).map_err(|e| CoreError::Parse {
        path: path.display().to_string(),
        detail: format!("line {}, column {}: {e}", e.line(), e.column()),
    })?;
    if corpus.format_version != CORPUS_FORMAT_VERSION {
        return Err(CoreError::Parse {
            path: path.display().to_string(),
            detail: format!("unsupported format_version {}", corpus.format_version),
        });
    }
    corpus.validate()
}

/// Save a corpus; `load_corpus` round-trips the result structurally.
pub fn save_corpus(corpus: &TrainingCorpus, path: &Path) -> Result<(), CoreError> {
    let text = serde_json::to_string_pretty(corpus)
        .map_err(|e| CoreError::InvalidCorpus(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| CoreError::io(path, e))
}
