//! Model catalog: the vocabulary of everything placeable.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Identifier of a CAD model.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelId(pub String);

impl ModelId {
    pub fn new(s: impl Into<String>) -> Self {
        ModelId(s.into())
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifier of an object class ("double_bed", "chair", ...). Every model
/// maps to exactly one class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub String);

impl ClassId {
    pub fn new(s: impl Into<String>) -> Self {
        ClassId(s.into())
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Coarse category that decides how a model is sampled and placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Furniture,
    SmallObject,
    WallObject,
    CeilingObject,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Furniture => "furniture",
            Category::SmallObject => "small_object",
            Category::WallObject => "wall_object",
            Category::CeilingObject => "ceiling_object",
        };
        f.write_str(s)
    }
}

/// One catalog record. Footprint is `depth_m` along the facing axis and
/// `width_m` across it; `height_m` is the vertical extent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub class: ClassId,
    pub category: Category,
    pub depth_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

/// Catalog of CAD models keyed by id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelCatalog {
    pub format_version: u32,
    pub models: BTreeMap<ModelId, ModelSpec>,
}

impl ModelCatalog {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn new() -> Self {
        ModelCatalog {
            format_version: Self::FORMAT_VERSION,
            models: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, id: ModelId, spec: ModelSpec) {
        self.models.insert(id, spec);
    }

    pub fn get(&self, id: &ModelId) -> Result<&ModelSpec, CoreError> {
        self.models
            .get(id)
            .ok_or_else(|| CoreError::UnknownModel(id.0.clone()))
    }

    pub fn contains(&self, id: &ModelId) -> bool {
        self.models.contains_key(id)
    }

    pub fn class_of(&self, id: &ModelId) -> Result<&ClassId, CoreError> {
        Ok(&self.get(id)?.class)
    }

    /// Distinct classes in sorted order.
    pub fn classes(&self) -> Vec<ClassId> {
        let mut cs: Vec<ClassId> = self.models.values().map(|m| m.class.clone()).collect();
        cs.sort();
        cs.dedup();
        cs
    }

    /// True if any model carries this class.
    pub fn has_class(&self, class: &ClassId) -> bool {
        self.models.values().any(|m| &m.class == class)
    }

    /// Models of a given category in sorted id order.
    pub fn models_of_category(&self, cat: Category) -> Vec<&ModelId> {
        self.models
            .iter()
            .filter(|(_, s)| s.category == cat)
            .map(|(id, _)| id)
            .collect()
    }

    /// Models of a given class in sorted id order.
    pub fn models_of_class(&self, class: &ClassId) -> Vec<&ModelId> {
        self.models
            .iter()
            .filter(|(_, s)| &s.class == class)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        for (id, spec) in &self.models {
            if spec.depth_m <= 0.0 || spec.width_m <= 0.0 || spec.height_m <= 0.0 {
                return Err(CoreError::InvalidCatalog(format!(
                    "model `{id}` has non-positive dimensions"
                )));
            }
        }
        Ok(())
    }
}

/// The nine room types a corpus room may be labeled with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomType {
    Bedroom,
    LivingRoom,
    Kitchen,
    Bathroom,
    Office,
    DiningRoom,
    Hallway,
    Storage,
    Other,
}

impl RoomType {
    pub const ALL: [RoomType; 9] = [
        RoomType::Bedroom,
        RoomType::LivingRoom,
        RoomType::Kitchen,
        RoomType::Bathroom,
        RoomType::Office,
        RoomType::DiningRoom,
        RoomType::Hallway,
        RoomType::Storage,
        RoomType::Other,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RoomType::Bedroom => "bedroom",
            RoomType::LivingRoom => "living_room",
            RoomType::Kitchen => "kitchen",
            RoomType::Bathroom => "bathroom",
            RoomType::Office => "office",
            RoomType::DiningRoom => "dining_room",
            RoomType::Hallway => "hallway",
            RoomType::Storage => "storage",
            RoomType::Other => "other",
        }
    }
}

impl fmt::Display for RoomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_nine_room_types() {
        assert_eq!(RoomType::ALL.len(), 9);
    }

    #[test]
    fn unknown_model_is_an_error() {
        let cat = ModelCatalog::new();
        let err = cat.get(&ModelId::new("ghost")).unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn bad_dimensions_rejected() {
        let mut cat = ModelCatalog::new();
        cat.insert(
            ModelId::new("flat"),
            ModelSpec {
                class: ClassId::new("flat"),
                category: Category::Furniture,
                depth_m: 0.0,
                width_m: 1.0,
                height_m: 1.0,
            },
        );
        assert!(cat.validate().is_err());
    }
}
