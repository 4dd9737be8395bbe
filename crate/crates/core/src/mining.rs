//! Pattern discovery: motifs (clusters of K-tuple displacements) and
//! abutments (flush rows turned into Markov chains with a terminal state).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{Category, ClassId, ModelId, RoomType};
use crate::corpus::TrainingCorpus;
use crate::dpmm::{dpmm_fit, DpmmConfig};
use crate::geom::{abutting, normalize_yaw, rects_intersect};
use crate::markov::{markov_mle, TransitionMatrix};
use crate::scene::footprint;
use crate::{Rect, Vec2};

/// Mining thresholds. Everything the discovery passes depend on lives here
/// so runs are reproducible from the serialized parameter bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MineConfig {
    /// Minimum joint occurrences before a class tuple is clustered, and the
    /// minimum cluster membership for an accepted motif.
    pub n_min: usize,
    /// Largest class-tuple size considered.
    pub k_max: usize,
    /// Maximum area (m^2) of the 2-sigma ellipse of every motif element.
    pub tau_area: f64,
    /// Edge separation tolerance when detecting abutting pairs.
    pub gap_tol: f64,
    /// Minimum fractional edge overlap when detecting abutting pairs.
    pub min_overlap: f64,
    /// Edge parallelism tolerance in radians.
    pub parallel_tol: f64,
    /// DP concentration, truncation, and convergence controls.
    pub dpmm_alpha: f64,
    pub dpmm_truncation: usize,
    pub dpmm_max_iters: usize,
    pub dpmm_tol: f64,
    pub dpmm_seed: u64,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            n_min: 30,
            k_max: 4,
            tau_area: 0.25,
            gap_tol: 0.02,
            min_overlap: 0.5,
            parallel_tol: 2.0_f64.to_radians(),
            dpmm_alpha: 1.0,
            dpmm_truncation: 20,
            dpmm_max_iters: 120,
            dpmm_tol: 1e-5,
            dpmm_seed: 0,
        }
    }
}

impl MineConfig {
    fn dpmm(&self) -> DpmmConfig<f64> {
        DpmmConfig {
            alpha: self.dpmm_alpha,
            truncation: self.dpmm_truncation,
            max_iters: self.dpmm_max_iters,
            tol: self.dpmm_tol,
            min_members: self.n_min,
            var_floor: 1e-6,
        }
    }
}

/// One recorded occurrence of a pattern in the corpus. `member_indices`
/// point into the room's object list; `bounds` is the oriented bounding
/// rectangle of the member footprints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternOccurrence {
    pub room: usize,
    pub room_type: RoomType,
    pub member_indices: Vec<usize>,
    pub bounds: Rect,
}

/// A motif: a class tuple whose relative displacements form a tight
/// cluster. Offsets and yaws are relative to the base object's frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Motif {
    pub id: String,
    /// Sorted class tuple; the first class is the base.
    pub classes: Vec<ClassId>,
    /// Cluster mean in the 2(K-1)-dimensional displacement space.
    pub mean: Vec<f64>,
    /// Diagonal cluster variance.
    pub var: Vec<f64>,
    pub occurrences: Vec<MotifOccurrence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifOccurrence {
    pub at: PatternOccurrence,
    /// Base model followed by member models.
    pub models: Vec<ModelId>,
    /// Member offsets in the base object's frame.
    pub offsets: Vec<Vec2>,
    /// Member yaws relative to the base yaw.
    pub yaws: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MotifLibrary {
    pub motifs: Vec<Motif>,
}

/// An abutment pattern: a set of models that appear in flush rows, with a
/// Markov chain over row sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbutmentPattern {
    pub id: String,
    pub models: Vec<ModelId>,
    pub transitions: TransitionMatrix,
    pub occurrences: Vec<AbutmentOccurrence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbutmentOccurrence {
    pub at: PatternOccurrence,
    pub sequence: Vec<ModelId>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AbutmentLibrary {
    pub patterns: Vec<AbutmentPattern>,
}

impl AbutmentLibrary {
    /// No model may appear in two patterns.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.patterns {
            for m in &p.models {
                if !seen.insert(m.clone()) {
                    return false;
                }
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Motif mining.
// ---------------------------------------------------------------------------

pub(crate) struct RoomView {
    pub room: usize,
    pub room_type: RoomType,
    /// Furniture instances: (object index, model, class, center, yaw, rect).
    pub furniture: Vec<(usize, ModelId, ClassId, Vec2, f64, Rect)>,
}

pub(crate) fn room_views(corpus: &TrainingCorpus) -> Vec<RoomView> {
    corpus
        .rooms
        .iter()
        .enumerate()
        .map(|(ri, room)| {
            let furniture = room
                .objects
                .iter()
                .enumerate()
                .filter_map(|(oi, obj)| {
                    let spec = corpus.catalog.get(&obj.model).ok()?;
                    if spec.category != Category::Furniture {
                        return None;
                    }
                    let fp = footprint(obj, &corpus.catalog).ok()?;
                    Some((
                        oi,
                        obj.model.clone(),
                        spec.class.clone(),
                        obj.center(),
                        obj.yaw,
                        fp,
                    ))
                })
                .collect();
            RoomView {
                room: ri,
                room_type: room.room_type.expect("validated corpus"),
                furniture,
            }
        })
        .collect()
}

/// Discover motifs: for each class tuple with enough joint occurrences,
/// cluster base-relative displacements and accept tight clusters.
pub fn mine_motifs(corpus: &TrainingCorpus, config: &MineConfig) -> MotifLibrary {
    let views = room_views(corpus);

    // Per-room class index.
    let by_class: Vec<BTreeMap<ClassId, Vec<usize>>> = views
        .iter()
        .map(|v| {
            let mut m: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
            for (slot, (_, _, class, _, _, _)) in v.furniture.iter().enumerate() {
                m.entry(class.clone()).or_default().push(slot);
            }
            m
        })
        .collect();

    // Pairwise joint-occurrence counts used to prune tuple enumeration.
    let mut pair_counts: BTreeMap<(ClassId, ClassId), usize> = BTreeMap::new();
    for idx in &by_class {
        let classes: Vec<&ClassId> = idx.keys().collect();
        for (i, &a) in classes.iter().enumerate() {
            let na = idx[a].len();
            if na >= 2 {
                *pair_counts.entry((a.clone(), a.clone())).or_default() += na;
            }
            for &b in &classes[i + 1..] {
                *pair_counts.entry((a.clone(), b.clone())).or_default() += na;
            }
        }
    }
    let pair_ok = |a: &ClassId, b: &ClassId| {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        pair_counts.get(&key).copied().unwrap_or(0) >= config.n_min
    };

    // Enumerate sorted class multisets of size 2..=k_max, expanding only
    // tuples whose pairwise co-occurrence clears n_min.
    let mut all_classes: Vec<ClassId> = pair_counts
        .keys()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    all_classes.sort();
    all_classes.dedup();

    let mut tuples: Vec<Vec<ClassId>> = Vec::new();
    let mut frontier: Vec<Vec<ClassId>> = Vec::new();
    for (i, a) in all_classes.iter().enumerate() {
        for b in &all_classes[i..] {
            if pair_ok(a, b) {
                frontier.push(vec![a.clone(), b.clone()]);
            }
        }
    }
    tuples.extend(frontier.iter().cloned());
    for _ in 3..=config.k_max {
        let mut next = Vec::new();
        for t in &frontier {
            let last = t.last().unwrap().clone();
            for c in all_classes.iter().filter(|c| **c >= last) {
                if t.iter().all(|e| pair_ok(e, c)) {
                    let mut ext = t.clone();
                    ext.push(c.clone());
                    next.push(ext);
                }
            }
        }
        tuples.extend(next.iter().cloned());
        frontier = next;
    }

    let mut motifs = Vec::new();
    for tuple in tuples {
        motifs.extend(mine_tuple(&views, &by_class, &tuple, config));
    }
    motifs.sort_by(|a, b| a.id.cmp(&b.id));
    MotifLibrary { motifs }
}

struct RawOccurrence {
    room: usize,
    room_type: RoomType,
    member_indices: Vec<usize>,
    models: Vec<ModelId>,
    offsets: Vec<Vec2>,
    yaws: Vec<f64>,
    rects: Vec<Rect>,
}

fn mine_tuple(
    views: &[RoomView],
    by_class: &[BTreeMap<ClassId, Vec<usize>>],
    tuple: &[ClassId],
    config: &MineConfig,
) -> Vec<Motif> {
    let base_class = &tuple[0];
    let mut raw: Vec<RawOccurrence> = Vec::new();

    for (view, idx) in views.iter().zip(by_class.iter()) {
        let Some(base_slots) = idx.get(base_class) else {
            continue;
        };
        // Required member multiplicities beyond the base instance.
        let mut need: BTreeMap<&ClassId, usize> = BTreeMap::new();
        for c in &tuple[1..] {
            *need.entry(c).or_default() += 1;
        }
        for &b in base_slots {
            let (bi, bmodel, _, bcenter, byaw, brect) = &view.furniture[b];
            let mut member_slots: Vec<usize> = Vec::new();
            let mut feasible = true;
            for (c, &count) in &need {
                let mut candidates: Vec<usize> = idx
                    .get(*c)
                    .map(|s| s.iter().copied().filter(|&s| s != b).collect())
                    .unwrap_or_default();
                candidates.retain(|s| !member_slots.contains(s));
                if candidates.len() < count {
                    feasible = false;
                    break;
                }
                // Nearest members are the natural motif candidates.
                candidates.sort_by(|&p, &q| {
                    let dp = view.furniture[p].3.sub(*bcenter).norm();
                    let dq = view.furniture[q].3.sub(*bcenter).norm();
                    dp.partial_cmp(&dq).unwrap().then(p.cmp(&q))
                });
                member_slots.extend(candidates.into_iter().take(count));
            }
            if !feasible {
                continue;
            }
            // Canonical member order: class-sorted, then by angle in the
            // base frame (stable under jitter), then distance.
            let mut ordered: Vec<(usize, Vec2, f64)> = member_slots
                .iter()
                .map(|&s| {
                    let (_, _, _, c, y, _) = &view.furniture[s];
                    let local = c.sub(*bcenter).rotate(-byaw);
                    (s, local, normalize_yaw(y - byaw))
                })
                .collect();
            ordered.sort_by(|a, b| {
                let ca = &view.furniture[a.0].2;
                let cb = &view.furniture[b.0].2;
                ca.cmp(cb)
                    .then(
                        a.1.z
                            .atan2(a.1.x)
                            .partial_cmp(&b.1.z.atan2(b.1.x))
                            .unwrap(),
                    )
                    .then(a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            });

            let mut member_indices = vec![*bi];
            let mut models = vec![bmodel.clone()];
            let mut offsets = Vec::new();
            let mut yaws = Vec::new();
            let mut rects = vec![*brect];
            for (s, local, ry) in &ordered {
                let (oi, model, _, _, _, rect) = &view.furniture[*s];
                member_indices.push(*oi);
                models.push(model.clone());
                offsets.push(*local);
                yaws.push(*ry);
                rects.push(*rect);
            }
            raw.push(RawOccurrence {
                room: view.room,
                room_type: view.room_type,
                member_indices,
                models,
                offsets,
                yaws,
                rects,
            });
        }
    }

    if raw.len() < config.n_min {
        return Vec::new();
    }

    let points: Vec<Vec<f64>> = raw
        .iter()
        .map(|o| o.offsets.iter().flat_map(|v| [v.x, v.z]).collect())
        .collect();
    let fit = dpmm_fit(&points, &config.dpmm(), config.dpmm_seed);

    // Accept clusters whose every element stays inside the area threshold.
    let mut accepted: Vec<usize> = (0..fit.clusters.len())
        .filter(|&ci| {
            let c = &fit.clusters[ci];
            (0..c.mean.len() / 2).all(|e| {
                let area =
                    4.0 * std::f64::consts::PI * c.var[2 * e].sqrt() * c.var[2 * e + 1].sqrt();
                area <= config.tau_area
            })
        })
        .collect();
    accepted.sort_by(|&a, &b| {
        fit.clusters[a]
            .mean
            .iter()
            .zip(fit.clusters[b].mean.iter())
            .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let tuple_key = tuple
        .iter()
        .map(|c| c.0.as_str())
        .collect::<Vec<_>>()
        .join("+");
    let mut motifs = Vec::new();
    for (slot, &ci) in accepted.iter().enumerate() {
        let cluster = &fit.clusters[ci];
        let occurrences: Vec<MotifOccurrence> = cluster
            .members
            .iter()
            .filter_map(|&pi| {
                let o = &raw[pi];
                // Member footprints must not mutually intersect, or the
                // occurrence would replay an invalid arrangement.
                for i in 0..o.rects.len() {
                    for j in (i + 1)..o.rects.len() {
                        if rects_intersect(&o.rects[i], &o.rects[j]) {
                            return None;
                        }
                    }
                }
                Some(MotifOccurrence {
                    at: PatternOccurrence {
                        room: o.room,
                        room_type: o.room_type,
                        member_indices: o.member_indices.clone(),
                        bounds: group_bounds(&o.rects, o.rects[0].yaw),
                    },
                    models: o.models.clone(),
                    offsets: o.offsets.clone(),
                    yaws: o.yaws.clone(),
                })
            })
            .collect();
        if occurrences.len() < config.n_min {
            continue;
        }
        motifs.push(Motif {
            id: format!("motif/{tuple_key}/{slot}"),
            classes: tuple.to_vec(),
            mean: cluster.mean.clone(),
            var: cluster.var.clone(),
            occurrences,
        });
    }
    motifs
}

/// Oriented bounding rectangle of a set of rects, at the given yaw.
pub fn group_bounds(rects: &[Rect], yaw: f64) -> Rect {
    let u = Vec2::new(1.0, 0.0).rotate(yaw);
    let v = u.perp();
    let mut ulo = f64::INFINITY;
    let mut uhi = f64::NEG_INFINITY;
    let mut vlo = f64::INFINITY;
    let mut vhi = f64::NEG_INFINITY;
    for r in rects {
        for c in r.corners() {
            let cu = c.dot(u);
            let cv = c.dot(v);
            ulo = ulo.min(cu);
            uhi = uhi.max(cu);
            vlo = vlo.min(cv);
            vhi = vhi.max(cv);
        }
    }
    let center = u.scale((ulo + uhi) / 2.0).add(v.scale((vlo + vhi) / 2.0));
    Rect::new(
        center,
        Vec2::new((uhi - ulo) / 2.0, (vhi - vlo) / 2.0),
        normalize_yaw(yaw),
    )
}

// ---------------------------------------------------------------------------
// Abutment mining.
// ---------------------------------------------------------------------------

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            self.parent[x] = self.find(self.parent[x]);
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so grouping is order-independent.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Discover abutment patterns: flush rows of length >= 3, grouped into
/// model-disjoint sets, each with an MLE transition matrix.
pub fn mine_abutments(corpus: &TrainingCorpus, config: &MineConfig) -> AbutmentLibrary {
    let views = room_views(corpus);
    let mut rows: Vec<AbutmentOccurrence> = Vec::new();

    for view in &views {
        let n = view.furniture.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if abutting(
                    &view.furniture[i].5,
                    &view.furniture[j].5,
                    config.gap_tol,
                    config.min_overlap,
                    config.parallel_tol,
                ) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        // Connected components that form simple paths of length >= 3.
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] || adj[start].is_empty() {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(c) = stack.pop() {
                for &nb in &adj[c] {
                    if !seen[nb] {
                        seen[nb] = true;
                        comp.push(nb);
                        stack.push(nb);
                    }
                }
            }
            if comp.len() < 3 {
                continue;
            }
            let degrees_ok = comp.iter().all(|&c| adj[c].len() <= 2);
            let endpoints: Vec<usize> =
                comp.iter().copied().filter(|&c| adj[c].len() == 1).collect();
            if !degrees_ok || endpoints.len() != 2 {
                continue; // branching or cyclic arrangements are not rows
            }
            // Walk the path from one endpoint.
            let mut path = vec![endpoints[0]];
            let mut prev = usize::MAX;
            let mut cur = endpoints[0];
            while path.len() < comp.len() {
                let next = *adj[cur].iter().find(|&&x| x != prev).unwrap();
                path.push(next);
                prev = cur;
                cur = next;
            }
            // Canonical direction: lexicographically smaller model sequence.
            let seq: Vec<ModelId> = path.iter().map(|&s| view.furniture[s].1.clone()).collect();
            let rev: Vec<ModelId> = seq.iter().rev().cloned().collect();
            let (seq, path) = if rev < seq {
                (rev, path.into_iter().rev().collect::<Vec<_>>())
            } else {
                (seq, path)
            };

            let first = view.furniture[path[0]].3;
            let last = view.furniture[*path.last().unwrap()].3;
            let dir = last.sub(first);
            let yaw = if dir.norm() > 1e-9 {
                dir.z.atan2(dir.x)
            } else {
                0.0
            };
            let rects: Vec<Rect> = path.iter().map(|&s| view.furniture[s].5).collect();
            rows.push(AbutmentOccurrence {
                at: PatternOccurrence {
                    room: view.room,
                    room_type: view.room_type,
                    member_indices: path.iter().map(|&s| view.furniture[s].0).collect(),
                    bounds: group_bounds(&rects, yaw),
                },
                sequence: seq,
            });
        }
    }

    if rows.is_empty() {
        return AbutmentLibrary::default();
    }

    // Group rows transitively by shared models.
    let mut model_ids: Vec<ModelId> = rows
        .iter()
        .flat_map(|r| r.sequence.iter().cloned())
        .collect();
    model_ids.sort();
    model_ids.dedup();
    let index_of: BTreeMap<&ModelId, usize> =
        model_ids.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut uf = UnionFind::new(model_ids.len());
    for row in &rows {
        let first = index_of[&row.sequence[0]];
        for m in &row.sequence[1..] {
            uf.union(first, index_of[m]);
        }
    }

    let mut groups: BTreeMap<usize, Vec<AbutmentOccurrence>> = BTreeMap::new();
    for row in rows {
        let root = uf.find(index_of[&row.sequence[0]]);
        groups.entry(root).or_default().push(row);
    }

    let mut patterns = Vec::new();
    for occurrences in groups.into_values() {
        let sequences: Vec<Vec<ModelId>> =
            occurrences.iter().map(|o| o.sequence.clone()).collect();
        let transitions = markov_mle(&sequences);
        let models = transitions.models();
        let id = format!("abut/{}", models[0]);
        patterns.push(AbutmentPattern {
            id,
            models,
            transitions,
            occurrences,
        });
    }
    patterns.sort_by(|a, b| a.id.cmp(&b.id));
    AbutmentLibrary { patterns }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ModelCatalog, ModelSpec};
    use crate::corpus::CorpusRoom;
    use crate::geom::rect_polygon;
    use crate::scene::PlacedInstance;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};

    fn catalog() -> ModelCatalog {
        let mut cat = ModelCatalog::new();
        for (id, class, d, w) in [
            ("table_a", "table", 1.2, 1.2),
            ("chair_a", "chair", 0.5, 0.5),
            ("cab_a", "cabinet", 0.6, 0.8),
            ("fridge_a", "fridge", 0.6, 0.8),
        ] {
            cat.insert(
                ModelId::new(id),
                ModelSpec {
                    class: ClassId::new(class),
                    category: Category::Furniture,
                    depth_m: d,
                    width_m: w,
                    height_m: 1.0,
                },
            );
        }
        cat
    }

    fn empty_room(objs: Vec<PlacedInstance>) -> CorpusRoom {
        CorpusRoom {
            room_type: Some(RoomType::DiningRoom),
            polygon: rect_polygon(Vec2::new(0.0, 0.0), Vec2::new(20.0, 20.0)),
            openings: vec![],
            objects: objs,
        }
    }

    #[test]
    fn no_cooccurrence_yields_empty_library() {
        let mut corpus = TrainingCorpus::new(catalog());
        for _ in 0..50 {
            corpus.rooms.push(empty_room(vec![PlacedInstance::new(
                ModelId::new("table_a"),
                [10.0, 0.0, 10.0],
                0.0,
            )]));
        }
        let lib = mine_motifs(&corpus, &MineConfig::default());
        assert!(lib.motifs.is_empty());
    }

    #[test]
    fn planted_table_and_chairs_recovered() {
        let mut corpus = TrainingCorpus::new(catalog());
        let mut rng = StdRng::seed_from_u64(5);
        let jitter = Normal::new(0.0, 0.05).unwrap();
        for _ in 0..200 {
            let bx = rng.random_range(5.0..15.0);
            let bz = rng.random_range(5.0..15.0);
            let objs = vec![
                PlacedInstance::new(ModelId::new("table_a"), [bx, 0.0, bz], 0.0),
                PlacedInstance::new(
                    ModelId::new("chair_a"),
                    [
                        bx + 1.2 + jitter.sample(&mut rng),
                        0.0,
                        bz + jitter.sample(&mut rng),
                    ],
                    std::f64::consts::PI,
                ),
                PlacedInstance::new(
                    ModelId::new("chair_a"),
                    [
                        bx - 1.2 + jitter.sample(&mut rng),
                        0.0,
                        bz + jitter.sample(&mut rng),
                    ],
                    0.0,
                ),
            ];
            corpus.rooms.push(empty_room(objs));
        }
        let lib = mine_motifs(&corpus, &MineConfig::default());
        let triple: Vec<&Motif> = lib
            .motifs
            .iter()
            .filter(|m| m.classes.len() == 3)
            .collect();
        assert_eq!(triple.len(), 1, "expected one chair+chair+table motif");
        assert!(
            triple[0].occurrences.len() >= 190,
            "captured {} of 200 planted occurrences",
            triple[0].occurrences.len()
        );
    }

    #[test]
    fn scattered_satellites_rejected() {
        let mut corpus = TrainingCorpus::new(catalog());
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..200 {
            let bx = rng.random_range(6.0..14.0);
            let bz = rng.random_range(6.0..14.0);
            let objs = vec![
                PlacedInstance::new(ModelId::new("table_a"), [bx, 0.0, bz], 0.0),
                PlacedInstance::new(
                    ModelId::new("chair_a"),
                    [
                        bx + rng.random_range(-2.5..2.5),
                        0.0,
                        bz + rng.random_range(-2.5..2.5),
                    ],
                    0.0,
                ),
            ];
            corpus.rooms.push(empty_room(objs));
        }
        let lib = mine_motifs(&corpus, &MineConfig::default());
        assert!(
            lib.motifs.is_empty(),
            "uniform scatter must not form motifs: {:?}",
            lib.motifs.iter().map(|m| &m.id).collect::<Vec<_>>()
        );
    }

    fn flush_row(models: &[&str], z: f64, cat: &ModelCatalog) -> Vec<PlacedInstance> {
        // Row along +x with everything facing south, so widths span x and
        // side edges touch flush.
        let yaw = 3.0 * std::f64::consts::FRAC_PI_2;
        let mut out = Vec::new();
        let mut x = 2.0;
        for m in models {
            let id = ModelId::new(*m);
            let w = cat.get(&id).unwrap().width_m;
            x += w / 2.0;
            out.push(PlacedInstance::new(id, [x, 0.0, z], yaw));
            x += w / 2.0;
        }
        out
    }

    #[test]
    fn rows_become_patterns_and_merge_on_shared_models() {
        let cat = catalog();
        let mut corpus = TrainingCorpus::new(cat.clone());
        for i in 0..40 {
            let mut objs = flush_row(&["cab_a", "cab_a", "cab_a"], 2.0, &cat);
            if i % 2 == 0 {
                objs.extend(flush_row(&["cab_a", "fridge_a", "cab_a"], 8.0, &cat));
            }
            corpus.rooms.push(empty_room(objs));
        }
        let lib = mine_abutments(&corpus, &MineConfig::default());
        // cab and fridge share rows, so they merge into one pattern.
        assert_eq!(lib.patterns.len(), 1);
        assert!(lib.is_disjoint());
        let p = &lib.patterns[0];
        assert!(p.models.contains(&ModelId::new("cab_a")));
        assert!(p.models.contains(&ModelId::new("fridge_a")));
        assert!(p.transitions.rows_stochastic(1e-9));
    }

    #[test]
    fn pairs_alone_do_not_form_patterns() {
        let cat = catalog();
        let mut corpus = TrainingCorpus::new(cat.clone());
        for _ in 0..30 {
            corpus
                .rooms
                .push(empty_room(flush_row(&["cab_a", "cab_a"], 2.0, &cat)));
        }
        let lib = mine_abutments(&corpus, &MineConfig::default());
        assert!(lib.patterns.is_empty());
    }

    #[test]
    fn motif_occurrence_footprints_stay_disjoint_when_replayed() {
        let cat = catalog();
        let mut corpus = TrainingCorpus::new(cat.clone());
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..100 {
            let bx = rng.random_range(5.0..15.0);
            let bz = rng.random_range(5.0..15.0);
            corpus.rooms.push(empty_room(vec![
                PlacedInstance::new(ModelId::new("table_a"), [bx, 0.0, bz], 0.0),
                PlacedInstance::new(ModelId::new("chair_a"), [bx + 1.0, 0.0, bz], 0.0),
            ]));
        }
        let lib = mine_motifs(&corpus, &MineConfig::default());
        assert!(!lib.motifs.is_empty());
        for motif in &lib.motifs {
            for occ in &motif.occurrences {
                let rects: Vec<Rect> = occ
                    .models
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let spec = cat.get(m).unwrap();
                        let (center, yaw) = if k == 0 {
                            (Vec2::zero(), 0.0)
                        } else {
                            (occ.offsets[k - 1], occ.yaws[k - 1])
                        };
                        Rect::new(
                            center,
                            Vec2::new(spec.depth_m / 2.0, spec.width_m / 2.0),
                            yaw,
                        )
                    })
                    .collect();
                for i in 0..rects.len() {
                    for j in (i + 1)..rects.len() {
                        assert!(!rects_intersect(&rects[i], &rects[j]));
                    }
                }
            }
        }
    }
}

