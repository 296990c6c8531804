//! Tracked point trajectories: loading, per-clip collectiveness, score and
//! voting categories, and the category-pair AUC protocol.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_knn_graph, clamp_weights, csv_error, Metric, Vec2};
use crate::metrics::{roc_auc, AucRow, AucTable};
use crate::ncl::{measure, NclConfig};

/// Points of one frame with a nonzero velocity each.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFrame {
    pub frame: u64,
    pub ids: Vec<u64>,
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
}

impl TrajectoryFrame {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryClip {
    pub frames: Vec<TrajectoryFrame>,
}

/// Where point velocities come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocitySource {
    /// The `vx,vy` columns; derived by finite differences when absent.
    #[default]
    Columns,
    /// Forward differences of matched ids between consecutive frames.
    FiniteDifference,
}

struct Row {
    frame: u64,
    id: u64,
    pos: Vec2,
    vel: Option<Vec2>,
}

/// Loads a `frame,id,x,y,vx,vy` trajectory file.
///
/// Points with zero velocity are dropped, then frames left with fewer than
/// two points.
pub fn load_trajectory_csv(path: &Path) -> Result<TrajectoryClip> {
    load_trajectory_csv_with(path, VelocitySource::Columns)
}

pub fn load_trajectory_csv_with(path: &Path, source: VelocitySource) -> Result<TrajectoryClip> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let has_velocity = match names.as_slice() {
        ["frame", "id", "x", "y", "vx", "vy"] => true,
        ["frame", "id", "x", "y"] => false,
        _ => {
            return Err(Error::parse(
                path,
                1,
                "expected header `frame,id,x,y,vx,vy` (or `frame,id,x,y`)",
            ))
        }
    };

    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let int = |k: usize| -> Result<u64> {
            rec[k]
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad {} {:?}", names[k], &rec[k])))
        };
        let real = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(path, line, format!("bad {} {:?}", names[k], &rec[k])))
        };
        let row = Row {
            frame: int(0)?,
            id: int(1)?,
            pos: [real(2)?, real(3)?],
            vel: if has_velocity { Some([real(4)?, real(5)?]) } else { None },
        };
        if let Some(prev) = rows.last().map(|r: &(u64, Row)| r.1.frame) {
            if row.frame < prev {
                return Err(Error::parse(path, line, "frames must be sorted ascending"));
            }
        }
        rows.push((line, row));
    }

    let mut frames: Vec<TrajectoryFrame> = Vec::new();
    let mut seen_ids = HashSet::new();
    for (line, row) in rows {
        if frames.last().map(|f| f.frame) != Some(row.frame) {
            seen_ids.clear();
            frames.push(TrajectoryFrame {
                frame: row.frame,
                ids: Vec::new(),
                positions: Vec::new(),
                velocities: Vec::new(),
            });
        }
        if !seen_ids.insert(row.id) {
            return Err(Error::parse(
                path,
                line,
                format!("point {} repeated in frame {}", row.id, row.frame),
            ));
        }
        let f = frames.last_mut().expect("frame pushed above");
        f.ids.push(row.id);
        f.positions.push(row.pos);
        f.velocities.push(row.vel.unwrap_or([0.0, 0.0]));
    }

    if source == VelocitySource::FiniteDifference || !has_velocity {
        derive_velocities(&mut frames);
    }
    let clip = TrajectoryClip { frames }.preprocessed();
    if clip.frames.is_empty() {
        return Err(Error::EmptyClip);
    }
    Ok(clip)
}

/// Replaces velocities by forward differences per frame step. Points absent
/// from the next frame, and the whole last frame, end up with zero velocity.
fn derive_velocities(frames: &mut [TrajectoryFrame]) {
    for k in 0..frames.len() {
        let next: BTreeMap<u64, Vec2> = match frames.get(k + 1) {
            Some(n) => n.ids.iter().copied().zip(n.positions.iter().copied()).collect(),
            None => BTreeMap::new(),
        };
        let gap = frames.get(k + 1).map_or(1.0, |n| (n.frame - frames[k].frame) as f64);
        let f = &mut frames[k];
        for (idx, id) in f.ids.iter().enumerate() {
            f.velocities[idx] = match next.get(id) {
                Some(p) => [
                    (p[0] - f.positions[idx][0]) / gap,
                    (p[1] - f.positions[idx][1]) / gap,
                ],
                None => [0.0, 0.0],
            };
        }
    }
}

impl TrajectoryClip {
    /// Drops zero-velocity points, then frames with fewer than two points.
    pub fn preprocessed(self) -> Self {
        let frames = self
            .frames
            .into_iter()
            .map(|f| {
                let keep: Vec<usize> = (0..f.len())
                    .filter(|&i| f.velocities[i] != [0.0, 0.0])
                    .collect();
                TrajectoryFrame {
                    frame: f.frame,
                    ids: keep.iter().map(|&i| f.ids[i]).collect(),
                    positions: keep.iter().map(|&i| f.positions[i]).collect(),
                    velocities: keep.iter().map(|&i| f.velocities[i]).collect(),
                }
            })
            .filter(|f| f.len() >= 2)
            .collect();
        Self { frames }
    }
}

/// Graph collectiveness of each frame: Euclidean K-NN graph (K capped at
/// points - 1) with clamped velocity-cosine weights.
pub fn frame_collectiveness(clip: &TrajectoryClip, cfg: &NclConfig, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::param("K must be at least 1"));
    }
    if clip.frames.is_empty() {
        return Err(Error::EmptyClip);
    }
    clip.frames
        .iter()
        .map(|f| {
            let g = build_knn_graph(&f.positions, &f.velocities, k.min(f.len() - 1), Metric::Euclidean)?;
            Ok(measure(&clamp_weights(&g), cfg)?.capital_phi)
        })
        .collect()
}

/// Mean graph collectiveness over the clip's frames.
pub fn clip_collectiveness(clip: &TrajectoryClip, cfg: &NclConfig, k: usize) -> Result<f64> {
    let per_frame = frame_collectiveness(clip, cfg, k)?;
    Ok(per_frame.iter().sum::<f64>() / per_frame.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Low,
    Medium,
    High,
}

impl FromStr for Category {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Category::Low),
            "medium" => Ok(Category::Medium),
            "high" => Ok(Category::High),
            _ => Err(Error::InvalidInput(format!("unknown category {s:?}"))),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Low => "low",
            Category::Medium => "medium",
            Category::High => "high",
        })
    }
}

/// Score bands: `[0, 5]` low, `(5, 15)` medium, `[15, 20]` high.
pub fn categorize_by_score(score: f64) -> Result<Category> {
    if !(0.0..=20.0).contains(&score) {
        return Err(Error::param(format!("score {score} outside [0, 20]")));
    }
    Ok(if score <= 5.0 {
        Category::Low
    } else if score < 15.0 {
        Category::Medium
    } else {
        Category::High
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipMeta {
    pub clip: String,
    pub score: f64,
    pub voting: Option<Category>,
}

/// Loads `clip,score,voting` metadata; `voting` may be empty.
pub fn load_clip_meta_csv(path: &Path) -> Result<Vec<ClipMeta>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if !matches!(header.iter().collect::<Vec<_>>().as_slice(), ["clip", "score", "voting"] | ["clip", "score"]) {
        return Err(Error::parse(path, 1, "expected header `clip,score,voting`"));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() < 2 || rec.len() > 3 {
            return Err(Error::parse(path, line, format!("expected 2 or 3 fields, found {}", rec.len())));
        }
        let score: f64 = rec[1]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad score {:?}", &rec[1])))?;
        if !(0.0..=20.0).contains(&score) {
            return Err(Error::parse(path, line, format!("score {score} outside [0, 20]")));
        }
        let voting = match rec.get(2) {
            None | Some("") => None,
            Some(v) => Some(v.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?),
        };
        out.push(ClipMeta {
            clip: rec[0].to_string(),
            score,
            voting,
        });
    }
    Ok(out)
}

pub fn write_clip_meta_csv(meta: &[ClipMeta], path: &Path) -> Result<()> {
    let mut body = String::from("clip,score,voting\n");
    for m in meta {
        let voting = m.voting.map(|c| c.to_string()).unwrap_or_default();
        body.push_str(&format!("{},{},{}\n", m.clip, m.score, voting));
    }
    crate::ncl::write_file(path, &body)
}

pub fn write_trajectory_csv(clip: &TrajectoryClip, path: &Path) -> Result<()> {
    let mut body = String::from("frame,id,x,y,vx,vy\n");
    for f in &clip.frames {
        for i in 0..f.len() {
            let [x, y] = f.positions[i];
            let [vx, vy] = f.velocities[i];
            body.push_str(&format!(
                "{},{},{},{},{},{}\n",
                f.frame,
                f.ids[i],
                crate::fmt::sig(x, 10),
                crate::fmt::sig(y, 10),
                crate::fmt::sig(vx, 10),
                crate::fmt::sig(vy, 10)
            ));
        }
    }
    crate::ncl::write_file(path, &body)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    Scores,
    Voting,
}

fn category_of(meta: &ClipMeta, mode: LabelMode) -> Result<Option<Category>> {
    match mode {
        LabelMode::Scores => categorize_by_score(meta.score).map(Some),
        LabelMode::Voting => Ok(meta.voting),
    }
}

/// AUC separating each category pair, using clip collectiveness as the
/// score and the higher category as the positive class.
pub fn auc_row(clips: &[(f64, ClipMeta)], mode: LabelMode) -> Result<AucRow> {
    let mut labelled = Vec::with_capacity(clips.len());
    for (c, meta) in clips {
        if let Some(cat) = category_of(meta, mode)? {
            labelled.push((*c, cat));
        }
    }
    let pair = |pos: Category, neg: Category| -> Option<f64> {
        let (scores, labels): (Vec<f64>, Vec<bool>) = labelled
            .iter()
            .filter(|(_, cat)| *cat == pos || *cat == neg)
            .map(|&(s, cat)| (s, cat == pos))
            .unzip();
        roc_auc(&scores, &labels).ok()
    };
    Ok(AucRow {
        high_low: pair(Category::High, Category::Low),
        high_medium: pair(Category::High, Category::Medium),
        medium_low: pair(Category::Medium, Category::Low),
    })
}

/// The 3x2 table of category-pair AUCs under both labeling modes.
pub fn auc_report(clips: &[(f64, ClipMeta)]) -> Result<AucTable> {
    Ok(AucTable {
        scores: auc_row(clips, LabelMode::Scores)?,
        voting: auc_row(clips, LabelMode::Voting)?,
    })
}

/// Synthetic clips standing in for tracked crowd footage.
pub mod fixtures {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum FixtureKind {
        /// Every point heads the same way with a little jitter.
        Coherent,
        /// Coherent points on the left half, random headings on the right.
        Mixed,
        /// Independent uniform headings.
        Random,
    }

    impl FixtureKind {
        pub fn score(self) -> f64 {
            match self {
                FixtureKind::Coherent => 18.0,
                FixtureKind::Mixed => 10.0,
                FixtureKind::Random => 2.0,
            }
        }

        pub fn category(self) -> Category {
            match self {
                FixtureKind::Coherent => Category::High,
                FixtureKind::Mixed => Category::Medium,
                FixtureKind::Random => Category::Low,
            }
        }

        pub fn name(self) -> &'static str {
            match self {
                FixtureKind::Coherent => "coherent",
                FixtureKind::Mixed => "mixed",
                FixtureKind::Random => "random",
            }
        }
    }

    const SIDE: f64 = 100.0;
    const JITTER: f64 = 0.05;

    /// A clip of `n_points` points in a 100x100 pixel field over
    /// `n_frames` frames.
    pub fn synthetic_clip(kind: FixtureKind, n_points: usize, n_frames: usize, rng: &mut impl Rng) -> TrajectoryClip {
        let drift = rng.random::<f64>() * TAU;
        let mut positions: Vec<Vec2> = (0..n_points)
            .map(|_| [rng.random::<f64>() * SIDE, rng.random::<f64>() * SIDE])
            .collect();
        let mut frames = Vec::with_capacity(n_frames);
        for t in 0..n_frames {
            let velocities: Vec<Vec2> = positions
                .iter()
                .map(|p| {
                    let coherent = match kind {
                        FixtureKind::Coherent => true,
                        FixtureKind::Mixed => p[0] < SIDE / 2.0,
                        FixtureKind::Random => false,
                    };
                    let heading = if coherent {
                        drift + (2.0 * rng.random::<f64>() - 1.0) * JITTER * PI
                    } else {
                        rng.random::<f64>() * TAU
                    };
                    let speed = 1.0 + rng.random::<f64>();
                    [speed * heading.cos(), speed * heading.sin()]
                })
                .collect();
            frames.push(TrajectoryFrame {
                frame: t as u64,
                ids: (0..n_points as u64).collect(),
                positions: positions.clone(),
                velocities: velocities.clone(),
            });
            for (p, v) in positions.iter_mut().zip(&velocities) {
                p[0] += v[0];
                p[1] += v[1];
            }
        }
        TrajectoryClip { frames }
    }

    /// Writes `per_kind` clips of each kind as `clips/<kind>_<i>.csv` under
    /// `dir`, plus `dir/meta.csv`, all drawn from one generator seeded with
    /// `seed`.
    pub fn write_fixture_set(
        dir: &Path,
        per_kind: usize,
        n_points: usize,
        n_frames: usize,
        seed: u64,
    ) -> Result<Vec<ClipMeta>> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let clips = dir.join("clips");
        std::fs::create_dir_all(&clips).map_err(|e| Error::io(&clips, e))?;
        let mut meta = Vec::new();
        for kind in [FixtureKind::Coherent, FixtureKind::Mixed, FixtureKind::Random] {
            for i in 0..per_kind {
                let name = format!("{}_{i:03}", kind.name());
                let clip = synthetic_clip(kind, n_points, n_frames, &mut rng);
                write_trajectory_csv(&clip, &clips.join(format!("{name}.csv")))?;
                meta.push(ClipMeta {
                    clip: name,
                    score: kind.score(),
                    voting: Some(kind.category()),
                });
            }
        }
        write_clip_meta_csv(&meta, &dir.join("meta.csv"))?;
        Ok(meta)
    }
}
