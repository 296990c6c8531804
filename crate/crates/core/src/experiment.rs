//! Reproducible experiment drivers that write CSV/JSON artifacts. Each run
//! `r` of an experiment seeded with `s` uses seed `s + r`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::cluster::{cluster_stats, threshold_cluster, write_labels_csv, ClusterStats};
use crate::error::{Error, Result};
use crate::graph::{clamp_weights, read_edge_list};
use crate::metrics::{aggregate, evaluate_run, write_json, AucTable, MetricsReport};
use crate::ncl::{measure, write_clique_csv, write_coherence_csv, write_file, NclConfig, Variant};
use crate::sdp::{write_frames_csv, FrameRecord, SdpParams, SdpTrace};
use crate::trajectory::{
    auc_report, clip_collectiveness, load_clip_meta_csv, load_trajectory_csv, ClipMeta,
};

fn run_seed(seed: u64, run: usize) -> u64 {
    seed.wrapping_add(run as u64)
}

fn check_runs(runs: usize) -> Result<()> {
    if runs == 0 {
        Err(Error::param("runs must be at least 1"))
    } else {
        Ok(())
    }
}

pub struct SdpOutcome {
    pub runs: Vec<Vec<FrameRecord>>,
    pub metrics: MetricsReport,
}

/// Simulates `runs` SDP runs and aggregates RC/PCA/SD for one NCL variant.
pub fn sdp_experiment(params: &SdpParams, cfg: &NclConfig, runs: usize, seed: u64) -> Result<SdpOutcome> {
    params.validate()?;
    cfg.validate()?;
    check_runs(runs)?;
    let records: Vec<Vec<FrameRecord>> = (0..runs)
        .into_par_iter()
        .map(|r| crate::sdp::run(params, cfg, run_seed(seed, r)))
        .collect::<Result<_>>()?;
    let per_run: Vec<_> = records
        .iter()
        .map(|rec| {
            let m: Vec<f64> = rec.iter().map(|r| r.measured_phi).collect();
            let t: Vec<f64> = rec.iter().map(|r| r.ground_truth).collect();
            evaluate_run(&m, &t).ok()
        })
        .collect();
    let metrics = aggregate(&per_run)?;
    Ok(SdpOutcome {
        runs: records,
        metrics,
    })
}

/// Writes `frames.csv` and `metrics.json` into `out_dir`.
pub fn write_sdp_outputs(outcome: &SdpOutcome, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_frames_csv(&outcome.runs, &out_dir.join("frames.csv"))?;
    write_json(&outcome.metrics, &out_dir.join("metrics.json"))
}

/// One (K, lambda) measurement setting and the variants wanted there.
#[derive(Debug, Clone)]
pub struct MeasurePoint {
    pub k: usize,
    pub lambda: f64,
    pub variants: Vec<Variant>,
}

/// Per-variant reports at each point, indexed like [`Variant::ALL`];
/// unrequested variants are `None`.
pub type VariantReports = [Option<MetricsReport>; 4];

/// Simulates `runs` runs once and evaluates every requested variant at every
/// measurement point against the same trajectories.
pub fn variant_reports(
    params: &SdpParams,
    runs: usize,
    seed: u64,
    points: &[MeasurePoint],
) -> Result<Vec<VariantReports>> {
    params.validate()?;
    check_runs(runs)?;
    for p in points {
        NclConfig::new(p.lambda, crate::ncl::Strategy::Avg, crate::ncl::Scheme::Ncl1)?;
        if p.k == 0 || p.k >= params.n_particles {
            return Err(Error::param(format!("K = {} outside 1..={}", p.k, params.n_particles - 1)));
        }
    }
    // per_run[run][point][variant]
    let per_run: Vec<Vec<[Option<crate::metrics::RunMetrics>; 4]>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let trace = SdpTrace::simulate(params, run_seed(seed, r))?;
            points
                .iter()
                .map(|p| {
                    let series = trace.measure_selected(p.k, p.lambda, &p.variants)?;
                    let mut out = [None; 4];
                    for (idx, s) in series.iter().enumerate() {
                        if !s.is_empty() {
                            out[idx] = evaluate_run(s, &trace.ground_truth).ok();
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    points
        .iter()
        .enumerate()
        .map(|(pi, p)| {
            let mut reports: VariantReports = Default::default();
            for (idx, v) in Variant::ALL.iter().enumerate() {
                if p.variants.contains(v) {
                    let runs: Vec<_> = per_run.iter().map(|r| r[pi][idx]).collect();
                    reports[idx] = Some(aggregate(&runs)?);
                }
            }
            Ok(reports)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Lambda,
    K,
    NoiseRatio,
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepAxis::Lambda),
            "K" | "k" => Ok(SweepAxis::K),
            "noise_ratio" | "noise-ratio" => Ok(SweepAxis::NoiseRatio),
            _ => Err(Error::param(format!("unknown sweep axis {s:?}"))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::K => "K",
            SweepAxis::NoiseRatio => "noise_ratio",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub variant: Variant,
    pub report: MetricsReport,
}

/// Metrics of all four variants at each grid value of `axis`; the other
/// settings come from `params` and `lambda`.
pub fn sweep(
    axis: SweepAxis,
    grid: &[f64],
    params: &SdpParams,
    lambda: f64,
    runs: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::param("sweep grid is empty"));
    }
    let all = Variant::ALL.to_vec();
    let reports: Vec<VariantReports> = match axis {
        SweepAxis::Lambda | SweepAxis::K => {
            let points = grid
                .iter()
                .map(|&v| {
                    Ok(match axis {
                        SweepAxis::Lambda => MeasurePoint {
                            k: params.k_neighbors,
                            lambda: v,
                            variants: all.clone(),
                        },
                        _ => MeasurePoint {
                            k: as_count(v)?,
                            lambda,
                            variants: all.clone(),
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            variant_reports(params, runs, seed, &points)?
        }
        SweepAxis::NoiseRatio => grid
            .iter()
            .map(|&ratio| {
                let p = SdpParams {
                    noise_ratio: ratio,
                    ..params.clone()
                };
                let point = MeasurePoint {
                    k: params.k_neighbors,
                    lambda,
                    variants: all.clone(),
                };
                Ok(variant_reports(&p, runs, seed, &[point])?.remove(0))
            })
            .collect::<Result<_>>()?,
    };
    let mut rows = Vec::new();
    for (&value, rep) in grid.iter().zip(reports) {
        for (v, r) in Variant::ALL.iter().zip(rep) {
            rows.push(SweepRow {
                value,
                variant: *v,
                report: r.expect("all variants requested"),
            });
        }
    }
    Ok(rows)
}

fn as_count(v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(Error::param(format!("K = {v} is not a positive integer")))
    }
}

/// Writes `sweep.csv`: `axis,value,variant,rc,pca,sd,n_runs,n_skipped`.
pub fn write_sweep_csv(axis: SweepAxis, rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut body = String::from("axis,value,variant,rc,pca,sd,n_runs,n_skipped\n");
    for r in rows {
        body.push_str(&format!(
            "{axis},{},{},{},{},{},{},{}\n",
            r.value,
            r.variant,
            crate::fmt::sig(r.report.rc, 10),
            crate::fmt::sig(r.report.pca, 10),
            crate::fmt::sig(r.report.sd, 10),
            r.report.n_runs,
            r.report.n_skipped
        ));
    }
    write_file(path, &body)
}

pub struct GraphOutcome {
    pub capital_phi: f64,
    pub clusters: Option<ClusterStats>,
}

/// Measures an edge-list graph (weights clamped into `[0, 1]`) and writes
/// `phi.csv`, `coherence.csv`, `cliques.csv` and, with a threshold,
/// `labels.csv`.
pub fn graph_command(input: &Path, cfg: &NclConfig, c_thre: Option<f64>, out_dir: &Path) -> Result<GraphOutcome> {
    cfg.validate()?;
    let g = clamp_weights(&read_edge_list(input)?);
    let report = measure(&g, cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut phi = String::from("node,phi\n");
    for (i, v) in report.phi.iter().enumerate() {
        phi.push_str(&format!("{i},{}\n", crate::fmt::sig(*v, 12)));
    }
    write_file(&out_dir.join("phi.csv"), &phi)?;
    write_coherence_csv(&report.coherence, &out_dir.join("coherence.csv"))?;
    write_clique_csv(&report.cliques, &out_dir.join("cliques.csv"))?;
    let clusters = match c_thre {
        Some(t) => {
            let labels = threshold_cluster(&report.coherence, t)?;
            write_labels_csv(&labels, &out_dir.join("labels.csv"))?;
            Some(cluster_stats(&labels))
        }
        None => None,
    };
    Ok(GraphOutcome {
        capital_phi: report.capital_phi,
        clusters,
    })
}

pub struct ClipOutcome {
    /// (clip id, collectiveness, usable frames)
    pub clips: Vec<(String, f64, usize)>,
    pub auc: Option<AucTable>,
    /// Clips listed in neither direction of the metadata join.
    pub unmatched: Vec<String>,
}

/// Clip id of a trajectory file: its file stem.
pub fn clip_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Trajectory CSV files given directly or found (sorted) in directories.
pub fn collect_trajectory_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

/// Per-clip collectiveness (`clips.csv`) and, with metadata, the category
/// AUC table (`auc.json`).
pub fn clip_command(
    trajectories: &[PathBuf],
    meta: Option<&Path>,
    cfg: &NclConfig,
    k: usize,
    out_dir: &Path,
) -> Result<ClipOutcome> {
    cfg.validate()?;
    let files = collect_trajectory_files(trajectories)?;
    if files.is_empty() {
        return Err(Error::param("no trajectory files given"));
    }
    let clips: Vec<(String, f64, usize)> = files
        .par_iter()
        .map(|f| {
            let clip = load_trajectory_csv(f)?;
            let c = clip_collectiveness(&clip, cfg, k)?;
            Ok((clip_id(f), c, clip.frames.len()))
        })
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut body = String::from("clip,collectiveness,frames\n");
    for (id, c, n) in &clips {
        body.push_str(&format!("{id},{},{n}\n", crate::fmt::sig(*c, 10)));
    }
    write_file(&out_dir.join("clips.csv"), &body)?;

    let mut unmatched = Vec::new();
    let auc = match meta {
        Some(path) => {
            let metas = load_clip_meta_csv(path)?;
            let mut joined: Vec<(f64, ClipMeta)> = Vec::new();
            for (id, c, _) in &clips {
                match metas.iter().find(|m| &m.clip == id) {
                    Some(m) => joined.push((*c, m.clone())),
                    None => unmatched.push(id.clone()),
                }
            }
            let table = auc_report(&joined)?;
            write_json(&table, &out_dir.join("auc.json"))?;
            Some(table)
        }
        None => None,
    };
    Ok(ClipOutcome { clips, auc, unmatched })
}
