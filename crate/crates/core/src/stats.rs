//! Learning occurrence and placement statistics from a corpus: room-type
//! pmf, per-(model, room-type) count models, per-model cell/orientation
//! pmfs, per-side clearance Normals, and embellishment models. `train`
//! bundles everything, including the mined pattern libraries, into an
//! immutable, serializable parameter set.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{Category, ClassId, ModelCatalog, ModelId, RoomType};
use crate::corpus::TrainingCorpus;
use crate::error::CoreError;
use crate::geom::directional_clearance;
use crate::mining::{
    mine_abutments, mine_motifs, AbutmentLibrary, MineConfig, MotifLibrary, PatternOccurrence,
};
use crate::scene::{footprint, CellId, PlacedInstance};
use crate::{Rect, Vec2};

pub const PARAMS_FORMAT_VERSION: u32 = 1;

/// Training thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Wall adjacency threshold for cell classification (m).
    pub tau_wall: f64,
    /// Yaw tolerance for counting an instance as axis-aligned (rad).
    pub align_tol: f64,
    /// Clearance measurements are capped at this distance (m).
    pub padding_cap: f64,
    /// Variance floor for all fitted Normals (m^2).
    pub var_floor: f64,
    /// At most this many small-object configurations are stored per
    /// (parent model, room type) key.
    pub small_store_cap: usize,
    pub mine: MineConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            tau_wall: 0.4,
            align_tol: 2.0_f64.to_radians(),
            padding_cap: 1.5,
            var_floor: 1e-4,
            small_store_cap: 1000,
            mine: MineConfig::default(),
        }
    }
}

/// Bucketed count of same-class instances already sampled, the
/// conditioning context for count models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CountBucket {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2+")]
    TwoPlus,
}

impl CountBucket {
    pub fn of(n_c: u32) -> Self {
        match n_c {
            0 => CountBucket::Zero,
            1 => CountBucket::One,
            _ => CountBucket::TwoPlus,
        }
    }
}

/// Instance-count distribution over the bins {0,1,2,3,4,>4}, with a
/// Poisson rate for the open bin fitted to the observed counts above 4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountModel {
    pub bins: [f64; 6],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl CountModel {
    pub fn zero() -> Self {
        CountModel {
            bins: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            lambda: None,
        }
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.bins.iter().sum::<f64>() - 1.0).abs() <= tol
    }
}

/// Pmf over the nine cells, indexed by [`CellId::index`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPmf {
    pub probs: [f64; 9],
}

impl CellPmf {
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.probs.iter().sum::<f64>() - 1.0).abs() <= tol
    }

    pub fn prob(&self, cell: CellId) -> f64 {
        self.probs[cell.index()]
    }
}

/// Probability of axis alignment plus a pmf over the four aligned yaws
/// {0, π/2, π, 3π/2}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationModel {
    pub p_aligned: f64,
    pub aligned_pmf: [f64; 4],
}

impl Default for OrientationModel {
    fn default() -> Self {
        OrientationModel {
            p_aligned: 1.0,
            aligned_pmf: [0.25; 4],
        }
    }
}

/// Diagonal 4D Normal over per-side clearances (front, back, left, right).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaddingModel {
    pub mean: [f64; 4],
    pub var: [f64; 4],
}

impl Default for PaddingModel {
    fn default() -> Self {
        PaddingModel {
            mean: [0.0; 4],
            var: [1e-4; 4],
        }
    }
}

/// Mean/variance pair for a 1D Normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian1 {
    pub mean: f64,
    pub var: f64,
}

/// One small object placed relative to its parent's frame. `dy` is the
/// elevation above the parent's top surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallPlacement {
    pub model: ModelId,
    pub offset: Vec2,
    pub dy: f64,
    pub yaw: f64,
}

/// Everything the embellishment passes need.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbellishmentModels {
    /// Per room type: pmf over ceiling-object models.
    pub ceiling_pmf: BTreeMap<RoomType, BTreeMap<ModelId, f64>>,
    /// Per wall-object model: Normal over mounting height (center, m).
    pub wall_height: BTreeMap<ModelId, Gaussian1>,
    /// (parent furniture model, room type) -> observed configurations.
    /// Empty configurations are real observations and stay stored.
    pub small_configs: BTreeMap<ModelId, BTreeMap<RoomType, Vec<Vec<SmallPlacement>>>>,
}

/// Group-level placement statistics for a mined pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPlacement {
    pub cell: CellPmf,
    pub orientation: OrientationModel,
    pub padding: PaddingModel,
}

type CountTable = BTreeMap<RoomType, BTreeMap<CountBucket, CountModel>>;

/// The complete learned parameter bundle. Immutable after training;
/// serialized as a human-readable JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnedParams {
    pub format_version: u32,
    pub catalog: ModelCatalog,
    pub room_type_pmf: BTreeMap<RoomType, f64>,
    pub counts: BTreeMap<ModelId, CountTable>,
    pub cells: BTreeMap<ModelId, CellPmf>,
    pub orientations: BTreeMap<ModelId, OrientationModel>,
    pub paddings: BTreeMap<ModelId, PaddingModel>,
    pub embellishments: EmbellishmentModels,
    pub motifs: MotifLibrary,
    pub abutments: AbutmentLibrary,
    pub motif_counts: BTreeMap<String, CountTable>,
    pub abutment_counts: BTreeMap<String, CountTable>,
    pub motif_placement: BTreeMap<String, GroupPlacement>,
    pub abutment_placement: BTreeMap<String, GroupPlacement>,
    pub train_config: TrainConfig,
}

impl LearnedParams {
    /// Count model lookup; absent entries mean a point mass at zero.
    pub fn model_count(
        &self,
        model: &ModelId,
        rt: RoomType,
        bucket: CountBucket,
    ) -> Option<&CountModel> {
        lookup_count(&self.counts, model, rt, bucket)
    }

    pub fn motif_count(
        &self,
        id: &str,
        rt: RoomType,
        bucket: CountBucket,
    ) -> Option<&CountModel> {
        lookup_count(&self.motif_counts, &id.to_string(), rt, bucket)
    }

    pub fn abutment_count(
        &self,
        id: &str,
        rt: RoomType,
        bucket: CountBucket,
    ) -> Option<&CountModel> {
        lookup_count(&self.abutment_counts, &id.to_string(), rt, bucket)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn save(&self, path: &Path) -> Result<(), CoreError> {
        std::fs::write(path, self.to_json()).map_err(|e| CoreError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<LearnedParams, CoreError> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CoreError::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }

    /// Hash of the canonical serialization, recorded in scene provenance.
    pub fn sha256(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_json().as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn lookup_count<'a, K: Ord>(
    table: &'a BTreeMap<K, CountTable>,
    key: &K,
    rt: RoomType,
    bucket: CountBucket,
) -> Option<&'a CountModel> {
    let by_rt = table.get(key)?.get(&rt)?;
    // Fall back to denser buckets before giving up: sparse corpora may
    // never observe the exact conditioning context.
    by_rt
        .get(&bucket)
        .or_else(|| by_rt.get(&CountBucket::Zero))
        .or_else(|| by_rt.values().next())
}

// ---------------------------------------------------------------------------
// Cell classification.
// ---------------------------------------------------------------------------

/// Distances from the footprint's bounding box to the nearest wall in each
/// compass direction: (north, east, south, west).
fn wall_distances(fp: &Rect, boundary: &[Vec2]) -> [f64; 4] {
    let (lo, hi) = fp.aabb();
    let walls: Vec<(Vec2, Vec2)> = boundary
        .iter()
        .zip(boundary.iter().cycle().skip(1))
        .map(|(a, b)| (*a, *b))
        .collect();
    let cap = 1e6;
    let north = directional_clearance(
        (Vec2::new(lo.x, hi.z), Vec2::new(hi.x, hi.z)),
        Vec2::new(0.0, 1.0),
        &[],
        &walls,
        cap,
    );
    let east = directional_clearance(
        (Vec2::new(hi.x, lo.z), Vec2::new(hi.x, hi.z)),
        Vec2::new(1.0, 0.0),
        &[],
        &walls,
        cap,
    );
    let south = directional_clearance(
        (Vec2::new(lo.x, lo.z), Vec2::new(hi.x, lo.z)),
        Vec2::new(0.0, -1.0),
        &[],
        &walls,
        cap,
    );
    let west = directional_clearance(
        (Vec2::new(lo.x, lo.z), Vec2::new(lo.x, hi.z)),
        Vec2::new(-1.0, 0.0),
        &[],
        &walls,
        cap,
    );
    [north, east, south, west]
}

/// Classify a footprint into one of the nine cells: corner when within
/// `tau_wall` of two adjacent walls, edge for one wall, interior otherwise.
pub fn classify_cell_rect(fp: &Rect, boundary: &[Vec2], tau_wall: f64) -> CellId {
    let [n, e, s, w] = wall_distances(fp, boundary);
    let ns = if n <= tau_wall && (s > tau_wall || n <= s) {
        Some(true) // north
    } else if s <= tau_wall {
        Some(false)
    } else {
        None
    };
    let ew = if e <= tau_wall && (w > tau_wall || e <= w) {
        Some(true) // east
    } else if w <= tau_wall {
        Some(false)
    } else {
        None
    };
    match (ns, ew) {
        (Some(true), Some(true)) => CellId::Ne,
        (Some(true), Some(false)) => CellId::Nw,
        (Some(false), Some(true)) => CellId::Se,
        (Some(false), Some(false)) => CellId::Sw,
        (Some(true), None) => CellId::N,
        (Some(false), None) => CellId::S,
        (None, Some(true)) => CellId::E,
        (None, Some(false)) => CellId::W,
        (None, None) => CellId::Interior,
    }
}

/// Classify an instance via its catalog footprint.
pub fn classify_cell(
    instance: &PlacedInstance,
    catalog: &ModelCatalog,
    boundary: &[Vec2],
    tau_wall: f64,
) -> Result<CellId, CoreError> {
    Ok(classify_cell_rect(
        &footprint(instance, catalog)?,
        boundary,
        tau_wall,
    ))
}

// ---------------------------------------------------------------------------
// Learners.
// ---------------------------------------------------------------------------

fn normalize_hist(hist: &mut [f64]) {
    let total: f64 = hist.iter().sum();
    if total > 0.0 {
        for h in hist.iter_mut() {
            *h /= total;
        }
    }
}

/// Per-room same-class counts accumulated over models sorted before `model`
/// (matching the order the sampler visits models in).
fn n_c_before(
    room_counts: &BTreeMap<ModelId, u32>,
    catalog: &ModelCatalog,
    model: &ModelId,
    class: &ClassId,
    category: Category,
) -> u32 {
    room_counts
        .iter()
        .filter(|(m, _)| {
            *m < model
                && catalog
                    .get(m)
                    .map(|s| &s.class == class && s.category == category)
                    .unwrap_or(false)
        })
        .map(|(_, n)| *n)
        .sum()
}

/// Count model for a (model, room type) pair, bucketed by the same-class
/// count context. `None` when the model never appears in that room type.
pub fn learn_count_model(
    corpus: &TrainingCorpus,
    model: &ModelId,
    room_type: RoomType,
) -> Option<BTreeMap<CountBucket, CountModel>> {
    let spec = corpus.catalog.get(model).ok()?;
    let mut seen = false;
    let mut hists: BTreeMap<CountBucket, [f64; 6]> = BTreeMap::new();
    let mut high: Vec<f64> = Vec::new();
    for room in &corpus.rooms {
        if room.room_type != Some(room_type) {
            continue;
        }
        let mut counts: BTreeMap<ModelId, u32> = BTreeMap::new();
        for obj in &room.objects {
            *counts.entry(obj.model.clone()).or_default() += 1;
        }
        let n_m = counts.get(model).copied().unwrap_or(0);
        if n_m > 0 {
            seen = true;
        }
        let n_c = n_c_before(&counts, &corpus.catalog, model, &spec.class, spec.category);
        let hist = hists.entry(CountBucket::of(n_c)).or_insert([0.0; 6]);
        let bin = (n_m as usize).min(5);
        hist[bin] += 1.0;
        if n_m > 4 {
            high.push(n_m as f64);
        }
    }
    if !seen {
        return None;
    }
    let lambda = if high.is_empty() {
        None
    } else {
        Some(high.iter().sum::<f64>() / high.len() as f64)
    };
    Some(
        hists
            .into_iter()
            .map(|(bucket, mut hist)| {
                normalize_hist(&mut hist);
                (bucket, CountModel { bins: hist, lambda })
            })
            .collect(),
    )
}

/// Cell pmf over all instances of a model, or `None` when absent.
pub fn learn_cell_pmf(
    corpus: &TrainingCorpus,
    model: &ModelId,
    config: &TrainConfig,
) -> Option<CellPmf> {
    let mut hist = [0.0; 9];
    let mut seen = false;
    for room in &corpus.rooms {
        for obj in &room.objects {
            if &obj.model != model {
                continue;
            }
            if let Ok(cell) = classify_cell(obj, &corpus.catalog, &room.polygon, config.tau_wall) {
                hist[cell.index()] += 1.0;
                seen = true;
            }
        }
    }
    if !seen {
        return None;
    }
    normalize_hist(&mut hist);
    Some(CellPmf { probs: hist })
}

fn aligned_slot(yaw: f64, tol: f64) -> Option<usize> {
    let quarter = std::f64::consts::FRAC_PI_2;
    let k = (yaw / quarter).round();
    let delta = (yaw - k * quarter).abs();
    if delta <= tol {
        Some((k as i64).rem_euclid(4) as usize)
    } else {
        None
    }
}

/// Orientation model over interior-cell instances of a model.
pub fn learn_orientation(
    corpus: &TrainingCorpus,
    model: &ModelId,
    config: &TrainConfig,
) -> Option<OrientationModel> {
    let mut total = 0usize;
    let mut aligned_hist = [0.0; 4];
    let mut aligned = 0usize;
    for room in &corpus.rooms {
        for obj in &room.objects {
            if &obj.model != model {
                continue;
            }
            let Ok(cell) = classify_cell(obj, &corpus.catalog, &room.polygon, config.tau_wall)
            else {
                continue;
            };
            if cell != CellId::Interior {
                continue;
            }
            total += 1;
            if let Some(slot) = aligned_slot(obj.yaw, config.align_tol) {
                aligned += 1;
                aligned_hist[slot] += 1.0;
            }
        }
    }
    if total == 0 {
        return None;
    }
    if aligned == 0 {
        return Some(OrientationModel {
            p_aligned: 0.0,
            aligned_pmf: [0.25; 4],
        });
    }
    normalize_hist(&mut aligned_hist);
    Some(OrientationModel {
        p_aligned: aligned as f64 / total as f64,
        aligned_pmf: aligned_hist,
    })
}

/// Measure the four per-side clearances of a footprint against the other
/// obstacles and walls, capped at `cap`. Order: front, back, left, right.
pub fn measure_padding(fp: &Rect, obstacles: &[Rect], walls: &[(Vec2, Vec2)], cap: f64) -> [f64; 4] {
    let edges = fp.edges();
    let mut out = [0.0; 4];
    for (k, (a, b, dir)) in edges.iter().enumerate() {
        out[k] = directional_clearance((*a, *b), *dir, obstacles, walls, cap);
    }
    out
}

/// Per-side clearance Normal for a model, or `None` when absent.
pub fn learn_padding(
    corpus: &TrainingCorpus,
    model: &ModelId,
    config: &TrainConfig,
) -> Option<PaddingModel> {
    let mut samples: Vec<[f64; 4]> = Vec::new();
    for room in &corpus.rooms {
        let footprints: Vec<(usize, Rect)> = room
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| {
                corpus
                    .catalog
                    .get(&o.model)
                    .map(|s| s.category == Category::Furniture)
                    .unwrap_or(false)
            })
            .filter_map(|(i, o)| footprint(o, &corpus.catalog).ok().map(|f| (i, f)))
            .collect();
        let walls: Vec<(Vec2, Vec2)> = room
            .polygon
            .iter()
            .zip(room.polygon.iter().cycle().skip(1))
            .map(|(a, b)| (*a, *b))
            .collect();
        for (i, fp) in &footprints {
            if &room.objects[*i].model != model {
                continue;
            }
            let obstacles: Vec<Rect> = footprints
                .iter()
                .filter(|(j, _)| j != i)
                .map(|(_, f)| *f)
                .collect();
            samples.push(measure_padding(fp, &obstacles, &walls, config.padding_cap));
        }
    }
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mut mean = [0.0; 4];
    let mut var = [0.0; 4];
    for s in &samples {
        for k in 0..4 {
            mean[k] += s[k];
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    for s in &samples {
        for k in 0..4 {
            let d = s[k] - mean[k];
            var[k] += d * d;
        }
    }
    for v in var.iter_mut() {
        *v = (*v / n).max(config.var_floor);
    }
    Some(PaddingModel { mean, var })
}

/// Ceiling pmfs, wall-height Normals, and the small-object config store.
pub fn learn_embellishments(corpus: &TrainingCorpus, config: &TrainConfig) -> EmbellishmentModels {
    let mut out = EmbellishmentModels::default();

    // Ceiling: each room votes once per distinct ceiling model present.
    let mut ceiling_hist: BTreeMap<RoomType, BTreeMap<ModelId, f64>> = BTreeMap::new();
    // Wall heights.
    let mut wall_samples: BTreeMap<ModelId, Vec<f64>> = BTreeMap::new();

    for room in &corpus.rooms {
        let rt = room.room_type.expect("validated corpus");
        let mut ceiling_models: Vec<ModelId> = Vec::new();
        for obj in &room.objects {
            let Ok(spec) = corpus.catalog.get(&obj.model) else {
                continue;
            };
            match spec.category {
                Category::CeilingObject => {
                    if !ceiling_models.contains(&obj.model) {
                        ceiling_models.push(obj.model.clone());
                    }
                }
                Category::WallObject => {
                    wall_samples
                        .entry(obj.model.clone())
                        .or_default()
                        .push(obj.pos[1]);
                }
                _ => {}
            }
        }
        for m in ceiling_models {
            *ceiling_hist.entry(rt).or_default().entry(m).or_default() += 1.0;
        }

        // Small objects attach to the furniture whose top surface holds
        // their footprint center.
        let furniture: Vec<(usize, Rect, f64)> = room
            .objects
            .iter()
            .enumerate()
            .filter_map(|(i, o)| {
                let spec = corpus.catalog.get(&o.model).ok()?;
                (spec.category == Category::Furniture)
                    .then(|| footprint(o, &corpus.catalog).ok().map(|f| (i, f, spec.height_m)))
                    .flatten()
            })
            .collect();
        let mut configs: BTreeMap<usize, Vec<SmallPlacement>> =
            furniture.iter().map(|(i, _, _)| (*i, Vec::new())).collect();
        for obj in &room.objects {
            let Ok(spec) = corpus.catalog.get(&obj.model) else {
                continue;
            };
            if spec.category != Category::SmallObject {
                continue;
            }
            let c = obj.center();
            let parent = furniture.iter().find(|(_, fp, h)| {
                fp.contains(c) && obj.pos[1] >= h - 0.05 && obj.pos[1] <= h + 1.0
            });
            if let Some((pi, _, ph)) = parent {
                let parent_obj = &room.objects[*pi];
                let local = c.sub(parent_obj.center()).rotate(-parent_obj.yaw);
                configs.entry(*pi).or_default().push(SmallPlacement {
                    model: obj.model.clone(),
                    offset: local,
                    dy: obj.pos[1] - ph,
                    yaw: crate::geom::normalize_yaw(obj.yaw - parent_obj.yaw),
                });
            }
        }
        for (pi, placements) in configs {
            let parent_model = room.objects[pi].model.clone();
            let store = out
                .small_configs
                .entry(parent_model)
                .or_default()
                .entry(rt)
                .or_default();
            if store.len() < config.small_store_cap {
                store.push(placements);
            }
        }
    }

    for (rt, mut hist) in ceiling_hist {
        let total: f64 = hist.values().sum();
        for v in hist.values_mut() {
            *v /= total;
        }
        out.ceiling_pmf.insert(rt, hist);
    }
    for (model, ys) in wall_samples {
        let n = ys.len() as f64;
        let mean = ys.iter().sum::<f64>() / n;
        let var = (ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n)
            .max(config.var_floor);
        out.wall_height.insert(model, Gaussian1 { mean, var });
    }
    out
}

// ---------------------------------------------------------------------------
// Pattern statistics.
// ---------------------------------------------------------------------------

/// Count models, cell pmf, orientation, and padding for a pattern, derived
/// from its occurrences treated as pseudo-instances.
fn pattern_stats(
    corpus: &TrainingCorpus,
    base_class: &ClassId,
    occurrences: &[&PatternOccurrence],
    config: &TrainConfig,
) -> (CountTable, GroupPlacement) {
    // Occurrences per room.
    let mut per_room: BTreeMap<usize, u32> = BTreeMap::new();
    let mut types_seen: Vec<RoomType> = Vec::new();
    for occ in occurrences {
        *per_room.entry(occ.room).or_default() += 1;
        if !types_seen.contains(&occ.room_type) {
            types_seen.push(occ.room_type);
        }
    }

    let mut counts: CountTable = BTreeMap::new();
    for rt in types_seen {
        let mut hists: BTreeMap<CountBucket, [f64; 6]> = BTreeMap::new();
        let mut high: Vec<f64> = Vec::new();
        for (ri, room) in corpus.rooms.iter().enumerate() {
            if room.room_type != Some(rt) {
                continue;
            }
            let n = per_room.get(&ri).copied().unwrap_or(0);
            // Conditioning context: base-class instances not in this
            // pattern's occurrences.
            let members: Vec<usize> = occurrences
                .iter()
                .filter(|o| o.room == ri)
                .flat_map(|o| o.member_indices.iter().copied())
                .collect();
            let n_c = room
                .objects
                .iter()
                .enumerate()
                .filter(|(oi, o)| {
                    !members.contains(oi)
                        && corpus
                            .catalog
                            .get(&o.model)
                            .map(|s| &s.class == base_class)
                            .unwrap_or(false)
                })
                .count() as u32;
            let hist = hists.entry(CountBucket::of(n_c)).or_insert([0.0; 6]);
            hist[(n as usize).min(5)] += 1.0;
            if n > 4 {
                high.push(n as f64);
            }
        }
        let lambda = if high.is_empty() {
            None
        } else {
            Some(high.iter().sum::<f64>() / high.len() as f64)
        };
        let table: BTreeMap<CountBucket, CountModel> = hists
            .into_iter()
            .map(|(b, mut h)| {
                normalize_hist(&mut h);
                (b, CountModel { bins: h, lambda })
            })
            .collect();
        counts.insert(rt, table);
    }

    // Placement stats from the bounding rect pseudo-instance.
    let mut cell_hist = [0.0; 9];
    let mut aligned_hist = [0.0; 4];
    let mut aligned = 0usize;
    let mut pad_samples: Vec<[f64; 4]> = Vec::new();
    for occ in occurrences {
        let room = &corpus.rooms[occ.room];
        let cell = classify_cell_rect(&occ.bounds, &room.polygon, config.tau_wall);
        cell_hist[cell.index()] += 1.0;
        if let Some(slot) = aligned_slot(occ.bounds.yaw, config.align_tol) {
            aligned += 1;
            aligned_hist[slot] += 1.0;
        }
        let walls: Vec<(Vec2, Vec2)> = room
            .polygon
            .iter()
            .zip(room.polygon.iter().cycle().skip(1))
            .map(|(a, b)| (*a, *b))
            .collect();
        let obstacles: Vec<Rect> = room
            .objects
            .iter()
            .enumerate()
            .filter(|(oi, o)| {
                !occ.member_indices.contains(oi)
                    && corpus
                        .catalog
                        .get(&o.model)
                        .map(|s| s.category == Category::Furniture)
                        .unwrap_or(false)
            })
            .filter_map(|(_, o)| footprint(o, &corpus.catalog).ok())
            .collect();
        pad_samples.push(measure_padding(
            &occ.bounds,
            &obstacles,
            &walls,
            config.padding_cap,
        ));
    }
    normalize_hist(&mut cell_hist);
    let orientation = if aligned == 0 {
        OrientationModel {
            p_aligned: 0.0,
            aligned_pmf: [0.25; 4],
        }
    } else {
        normalize_hist(&mut aligned_hist);
        OrientationModel {
            p_aligned: aligned as f64 / occurrences.len() as f64,
            aligned_pmf: aligned_hist,
        }
    };
    let n = pad_samples.len() as f64;
    let mut mean = [0.0; 4];
    let mut var = [0.0; 4];
    for s in &pad_samples {
        for k in 0..4 {
            mean[k] += s[k] / n;
        }
    }
    for s in &pad_samples {
        for k in 0..4 {
            let d = s[k] - mean[k];
            var[k] += d * d / n;
        }
    }
    for v in var.iter_mut() {
        *v = v.max(config.var_floor);
    }

    (
        counts,
        GroupPlacement {
            cell: CellPmf { probs: cell_hist },
            orientation,
            padding: PaddingModel { mean, var },
        },
    )
}

// ---------------------------------------------------------------------------
// Orchestration.
// ---------------------------------------------------------------------------

/// Learn the full parameter bundle from a corpus. Pure: two runs over the
/// same corpus produce identical serialized parameters.
pub fn train(corpus: &TrainingCorpus, config: &TrainConfig) -> Result<LearnedParams, CoreError> {
    if corpus.rooms.is_empty() {
        return Err(CoreError::EmptyCorpus);
    }

    let mut room_type_pmf: BTreeMap<RoomType, f64> = BTreeMap::new();
    for room in &corpus.rooms {
        *room_type_pmf
            .entry(room.room_type.expect("validated corpus"))
            .or_default() += 1.0;
    }
    let total = corpus.rooms.len() as f64;
    for v in room_type_pmf.values_mut() {
        *v /= total;
    }
    let room_types: Vec<RoomType> = room_type_pmf.keys().copied().collect();

    let mut counts: BTreeMap<ModelId, CountTable> = BTreeMap::new();
    let mut cells = BTreeMap::new();
    let mut orientations = BTreeMap::new();
    let mut paddings = BTreeMap::new();
    for (model, spec) in &corpus.catalog.models {
        if spec.category == Category::SmallObject {
            continue; // replicated non-parametrically
        }
        let mut table: CountTable = BTreeMap::new();
        for &rt in &room_types {
            if let Some(t) = learn_count_model(corpus, model, rt) {
                table.insert(rt, t);
            }
        }
        if !table.is_empty() {
            counts.insert(model.clone(), table);
        }
        if spec.category == Category::Furniture {
            if let Some(pmf) = learn_cell_pmf(corpus, model, config) {
                cells.insert(model.clone(), pmf);
            }
            if let Some(om) = learn_orientation(corpus, model, config) {
                orientations.insert(model.clone(), om);
            }
            if let Some(pm) = learn_padding(corpus, model, config) {
                paddings.insert(model.clone(), pm);
            }
        }
    }

    let embellishments = learn_embellishments(corpus, config);

    let motifs = mine_motifs(corpus, &config.mine);
    let abutments = mine_abutments(corpus, &config.mine);

    let mut motif_counts = BTreeMap::new();
    let mut motif_placement = BTreeMap::new();
    for motif in &motifs.motifs {
        let occs: Vec<&PatternOccurrence> = motif.occurrences.iter().map(|o| &o.at).collect();
        let (table, placement) = pattern_stats(corpus, &motif.classes[0], &occs, config);
        motif_counts.insert(motif.id.clone(), table);
        motif_placement.insert(motif.id.clone(), placement);
    }
    let mut abutment_counts = BTreeMap::new();
    let mut abutment_placement = BTreeMap::new();
    for pattern in &abutments.patterns {
        let base_class = corpus.catalog.get(&pattern.models[0])?.class.clone();
        let occs: Vec<&PatternOccurrence> =
            pattern.occurrences.iter().map(|o| &o.at).collect();
        let (table, placement) = pattern_stats(corpus, &base_class, &occs, config);
        abutment_counts.insert(pattern.id.clone(), table);
        abutment_placement.insert(pattern.id.clone(), placement);
    }

    Ok(LearnedParams {
        format_version: PARAMS_FORMAT_VERSION,
        catalog: corpus.catalog.clone(),
        room_type_pmf,
        counts,
        cells,
        orientations,
        paddings,
        embellishments,
        motifs,
        abutments,
        motif_counts,
        abutment_counts,
        motif_placement,
        abutment_placement,
        train_config: config.clone(),
    })
}

/// Interpretability report: per-class probability of sitting at the room
/// edge and of being axis-aligned, averaged over the class's models.
pub fn stats_report(params: &LearnedParams) -> String {
    let mut edge: BTreeMap<ClassId, Vec<f64>> = BTreeMap::new();
    let mut aligned: BTreeMap<ClassId, Vec<f64>> = BTreeMap::new();
    for (model, pmf) in &params.cells {
        if let Ok(spec) = params.catalog.get(model) {
            let p_edge: f64 = CellId::ALL
                .iter()
                .filter(|c| **c != CellId::Interior)
                .map(|c| pmf.prob(*c))
                .sum();
            edge.entry(spec.class.clone()).or_default().push(p_edge);
        }
    }
    for (model, om) in &params.orientations {
        if let Ok(spec) = params.catalog.get(model) {
            aligned
                .entry(spec.class.clone())
                .or_default()
                .push(om.p_aligned);
        }
    }
    let avg = |m: BTreeMap<ClassId, Vec<f64>>| -> Vec<(ClassId, f64)> {
        let mut rows: Vec<(ClassId, f64)> = m
            .into_iter()
            .map(|(c, v)| {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                (c, mean)
            })
            .collect();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        rows
    };

    let mut out = String::new();
    out.push_str("furniture            p_edge\n");
    out.push_str("---------            ------\n");
    for (c, p) in avg(edge) {
        out.push_str(&format!("{:<20} {:.2}\n", c.to_string(), p));
    }
    out.push_str("\nfurniture            p_pi/2\n");
    out.push_str("---------            ------\n");
    for (c, p) in avg(aligned) {
        out.push_str(&format!("{:<20} {:.2}\n", c.to_string(), p));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ModelSpec;
    use crate::corpus::CorpusRoom;
    use crate::geom::rect_polygon;

    fn catalog() -> ModelCatalog {
        let mut cat = ModelCatalog::new();
        for (id, class, cat_kind, d, w, h) in [
            ("bed_a", "double_bed", Category::Furniture, 2.0, 1.6, 0.6),
            ("desk_a", "desk", Category::Furniture, 0.7, 1.4, 0.75),
            ("lamp_a", "ceiling_lamp", Category::CeilingObject, 0.3, 0.3, 0.4),
            ("pic_a", "picture", Category::WallObject, 0.05, 0.6, 0.5),
            ("book_a", "book", Category::SmallObject, 0.2, 0.15, 0.05),
        ] {
            cat.insert(
                ModelId::new(id),
                ModelSpec {
                    class: ClassId::new(class),
                    category: cat_kind,
                    depth_m: d,
                    width_m: w,
                    height_m: h,
                },
            );
        }
        cat
    }

    fn room(objs: Vec<PlacedInstance>) -> CorpusRoom {
        CorpusRoom {
            room_type: Some(RoomType::Bedroom),
            polygon: rect_polygon(Vec2::new(0.0, 0.0), Vec2::new(6.0, 6.0)),
            openings: vec![],
            objects: objs,
        }
    }

    #[test]
    fn corner_edge_interior_classification() {
        let cat = catalog();
        let boundary = rect_polygon(Vec2::new(0.0, 0.0), Vec2::new(6.0, 6.0));
        // Touching north and west walls: at yaw 0 the desk spans 0.7 on x
        // (depth) and 1.4 on z (width).
        let nw = PlacedInstance::new(ModelId::new("desk_a"), [0.36, 0.0, 5.29], 0.0);
        assert_eq!(
            classify_cell(&nw, &cat, &boundary, 0.4).unwrap(),
            CellId::Nw
        );
        // Room centroid.
        let mid = PlacedInstance::new(ModelId::new("desk_a"), [3.0, 0.0, 3.0], 0.0);
        assert_eq!(
            classify_cell(&mid, &cat, &boundary, 0.4).unwrap(),
            CellId::Interior
        );
        // 0.39 m from the east wall only: desk at yaw 0 has depth 0.7 on x,
        // so east face at x + 0.35; 6.0 - 0.39 - 0.35 = 5.26.
        let east = PlacedInstance::new(ModelId::new("desk_a"), [5.26, 0.0, 3.0], 0.0);
        assert_eq!(
            classify_cell(&east, &cat, &boundary, 0.4).unwrap(),
            CellId::E
        );
    }

    #[test]
    fn absent_model_has_no_count_table() {
        let mut corpus = TrainingCorpus::new(catalog());
        corpus.rooms.push(room(vec![]));
        assert!(learn_count_model(&corpus, &ModelId::new("bed_a"), RoomType::Bedroom).is_none());
    }

    #[test]
    fn count_histogram_matches_hand_count() {
        let mut corpus = TrainingCorpus::new(catalog());
        // Three rooms: 1 bed, 2 beds, 0 beds.
        corpus.rooms.push(room(vec![PlacedInstance::new(
            ModelId::new("bed_a"),
            [2.0, 0.0, 2.0],
            0.0,
        )]));
        corpus.rooms.push(room(vec![
            PlacedInstance::new(ModelId::new("bed_a"), [1.5, 0.0, 1.5], 0.0),
            PlacedInstance::new(ModelId::new("bed_a"), [4.5, 0.0, 4.5], 0.0),
        ]));
        corpus.rooms.push(room(vec![]));
        let table = learn_count_model(&corpus, &ModelId::new("bed_a"), RoomType::Bedroom).unwrap();
        let cm = &table[&CountBucket::Zero];
        assert!((cm.bins[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((cm.bins[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((cm.bins[2] - 1.0 / 3.0).abs() < 1e-12);
        assert!(cm.is_normalized(1e-9));
        assert!(cm.lambda.is_none());
    }

    #[test]
    fn padding_measured_against_wall() {
        let mut corpus = TrainingCorpus::new(catalog());
        // Desk facing east (+x), front face at x = 3.35, east wall at 6.0:
        // front clearance 2.65 m capped at 1.5.
        corpus.rooms.push(room(vec![PlacedInstance::new(
            ModelId::new("desk_a"),
            [3.0, 0.0, 3.0],
            0.0,
        )]));
        let pm = learn_padding(&corpus, &ModelId::new("desk_a"), &TrainConfig::default()).unwrap();
        assert!((pm.mean[0] - 1.5).abs() < 1e-9);
        assert!(pm.var.iter().all(|&v| v >= 1e-4));
    }

    #[test]
    fn embellishments_learned() {
        let mut corpus = TrainingCorpus::new(catalog());
        let mut r = room(vec![
            PlacedInstance::new(ModelId::new("desk_a"), [3.0, 0.0, 3.0], 0.0),
            PlacedInstance::new(ModelId::new("lamp_a"), [3.0, 2.5, 3.0], 0.0),
            PlacedInstance::new(ModelId::new("pic_a"), [0.0, 1.5, 2.0], 0.0),
        ]);
        // Book on the desk at local offset (0.1, 0.2).
        let book_world = Vec2::new(3.0 + 0.1, 3.0 + 0.2);
        r.objects.push(PlacedInstance::new(
            ModelId::new("book_a"),
            [book_world.x, 0.75, book_world.z],
            0.0,
        ));
        corpus.rooms.push(r);
        let em = learn_embellishments(&corpus, &TrainConfig::default());
        assert_eq!(
            em.ceiling_pmf[&RoomType::Bedroom][&ModelId::new("lamp_a")],
            1.0
        );
        assert!((em.wall_height[&ModelId::new("pic_a")].mean - 1.5).abs() < 1e-9);
        let configs = &em.small_configs[&ModelId::new("desk_a")][&RoomType::Bedroom];
        assert_eq!(configs.len(), 1);
        assert_eq!(configs[0].len(), 1);
        assert!((configs[0][0].offset.x - 0.1).abs() < 1e-9);
        assert!((configs[0][0].offset.z - 0.2).abs() < 1e-9);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let corpus = TrainingCorpus::new(catalog());
        assert!(matches!(
            train(&corpus, &TrainConfig::default()),
            Err(CoreError::EmptyCorpus)
        ));
    }

    #[test]
    fn train_room_type_pmf_matches_counts() {
        let mut corpus = TrainingCorpus::new(catalog());
        corpus.rooms.push(room(vec![]));
        corpus.rooms.push(room(vec![]));
        let mut office = room(vec![]);
        office.room_type = Some(RoomType::Office);
        corpus.rooms.push(office);
        let params = train(&corpus, &TrainConfig::default()).unwrap();
        assert!((params.room_type_pmf[&RoomType::Bedroom] - 2.0 / 3.0).abs() < 1e-12);
        assert!((params.room_type_pmf[&RoomType::Office] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn train_is_deterministic() {
        let mut corpus = TrainingCorpus::new(catalog());
        for i in 0..5 {
            corpus.rooms.push(room(vec![PlacedInstance::new(
                ModelId::new("bed_a"),
                [1.5 + i as f64 * 0.5, 0.0, 2.0],
                0.0,
            )]));
        }
        let a = train(&corpus, &TrainConfig::default()).unwrap();
        let b = train(&corpus, &TrainConfig::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
