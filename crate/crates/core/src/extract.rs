//! Locating jumps and sharp transitions in gridded data, and masking the
//! cells a numerical solver has smeared.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{Domain, SolutionField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscontinuityKind {
    Jump,
    SharpTransition,
}

/// Discontinuity geometry of one sample: `dis_n` sorted locations per slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuitySet {
    pub kind: DiscontinuityKind,
    pub per_slice: Vec<Vec<f64>>,
    /// Size of each jump (empty for sharp transitions).
    pub jump_gaps: Vec<Vec<f64>>,
}

impl DiscontinuitySet {
    pub fn dis_n(&self) -> usize {
        self.per_slice.first().map_or(0, Vec::len)
    }
}

/// What to do when a slice shows fewer fronts than expected, e.g. while a
/// pulse edge is still outside the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingFronts {
    #[default]
    Error,
    /// Place the missing fronts on the lower end of the axis.
    PadLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpConfig {
    pub dis_n: usize,
    /// Interfaces steeper than this fraction of the slice maximum are candidates.
    pub rel_threshold: f64,
    /// Candidates at most this many cells apart belong to one cluster.
    pub cluster_gap: usize,
    pub missing: MissingFronts,
}

impl JumpConfig {
    pub fn new(dis_n: usize) -> Self {
        Self {
            dis_n,
            rel_threshold: 0.5,
            cluster_gap: 2,
            missing: MissingFronts::Error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionConfig {
    /// Slopes below this (value units per time unit) count as stable.
    pub slope_floor: f64,
    /// Consecutive stable samples that end the transition.
    pub stable_samples: usize,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        Self {
            slope_floor: 1.0,
            stable_samples: 5,
        }
    }
}

/// Grid points excluded from operator training (`true` = dropped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmearMask {
    pub mask: Vec<bool>,
}

impl SmearMask {
    pub fn none(len: usize) -> Self {
        Self {
            mask: vec![false; len],
        }
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

struct Cluster {
    weight: f64,
    centroid: f64,
}

/// Fronts of one slice: clusters of steep interfaces, strongest `dis_n` kept.
fn slice_fronts(slice: &[f64], lo: f64, dx: f64, cfg: &JumpConfig) -> Vec<Cluster> {
    let gaps: Vec<f64> = slice.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let max = gaps.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return vec![];
    }
    let cut = cfg.rel_threshold * max;
    let mut clusters: Vec<(usize, Cluster, f64)> = vec![];
    for (k, &g) in gaps.iter().enumerate() {
        if g <= cut {
            continue;
        }
        let x = lo + (k as f64 + 0.5) * dx;
        match clusters.last_mut() {
            Some((last_k, c, moment)) if k - *last_k <= cfg.cluster_gap => {
                c.weight += g;
                *moment += g * x;
                *last_k = k;
            }
            _ => clusters.push((
                k,
                Cluster {
                    weight: g,
                    centroid: 0.0,
                },
                g * x,
            )),
        }
    }
    let mut out: Vec<Cluster> = clusters
        .into_iter()
        .map(|(_, mut c, moment)| {
            c.centroid = moment / c.weight;
            c
        })
        .collect();
    out.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    out.truncate(cfg.dis_n);
    out.sort_by(|a, b| a.centroid.total_cmp(&b.centroid));
    out
}

/// Finds `dis_n` jumps per time slice from peaks of the discrete derivative.
/// Each location is the gap-weighted centroid of a cluster of steep interfaces.
pub fn extract_jumps(field: &SolutionField, cfg: &JumpConfig) -> Result<DiscontinuitySet> {
    let Domain::SpaceTime { x, .. } = field.domain else {
        return Err(Error::Usage("jump extraction needs a space-time field".into()));
    };
    if cfg.dis_n == 0 || !(cfg.rel_threshold > 0.0 && cfg.rel_threshold < 1.0) {
        return Err(Error::Config(format!(
            "need dis_n >= 1 and 0 < rel_threshold < 1, got {cfg:?}"
        )));
    }
    let dx = x.step();
    let mut per_slice = Vec::with_capacity(field.domain.n_slices());
    let mut jump_gaps = Vec::with_capacity(field.domain.n_slices());
    for (j, slice) in field.slices().enumerate() {
        let clusters = slice_fronts(slice, x.lo, dx, cfg);
        let found = clusters.len();
        let mut locs: Vec<f64> = clusters.iter().map(|c| c.centroid.clamp(x.lo, x.hi)).collect();
        let mut gaps: Vec<f64> = clusters.iter().map(|c| c.weight).collect();
        if found < cfg.dis_n {
            match cfg.missing {
                MissingFronts::PadLower if found > 0 => {
                    let pad = cfg.dis_n - found;
                    locs.splice(0..0, std::iter::repeat(x.lo).take(pad));
                    gaps.splice(0..0, std::iter::repeat(0.0).take(pad));
                }
                _ => {
                    return Err(Error::Extraction {
                        slice: j,
                        reason: format!("found {found} of {} fronts", cfg.dis_n),
                    })
                }
            }
        }
        per_slice.push(locs);
        jump_gaps.push(gaps);
    }
    Ok(DiscontinuitySet {
        kind: DiscontinuityKind::Jump,
        per_slice,
        jump_gaps,
    })
}

/// Start and end of the steepest transition of a time trace: from the
/// maximum slope, extend both ways until the slope stays below the floor for
/// `stable_samples` consecutive samples. Slopes are backward differences, so
/// sample `i` carries the slope of `[t[i-1], t[i]]`.
pub fn extract_sharp_transition(
    trace: &SolutionField,
    cfg: &TransitionConfig,
) -> Result<DiscontinuitySet> {
    let Domain::Time { t } = trace.domain else {
        return Err(Error::Usage("sharp-transition extraction needs a time trace".into()));
    };
    if !(cfg.slope_floor > 0.0) || cfg.stable_samples == 0 {
        return Err(Error::Config(format!("invalid transition config {cfg:?}")));
    }
    let v = &trace.values;
    let dt = t.step();
    let mut slope: Vec<f64> = Vec::with_capacity(v.len());
    slope.push(0.0);
    slope.extend(v.windows(2).map(|w| ((w[1] - w[0]) / dt).abs()));
    slope[0] = slope[1];
    let (peak, max_slope) = slope
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, s)| if s > best.1 { (i, s) } else { best });
    if max_slope < cfg.slope_floor {
        return Err(Error::NoTransition {
            max_slope,
            floor: cfg.slope_floor,
        });
    }
    let w = cfg.stable_samples;
    let low = |i: usize| slope[i] < cfg.slope_floor;

    let mut start = 0;
    let mut run = 0;
    for i in (0..peak).rev() {
        run = if low(i) { run + 1 } else { 0 };
        if run == w {
            start = i + w;
            break;
        }
    }
    let mut end = slope.len() - 1;
    run = 0;
    for i in peak + 1..slope.len() {
        run = if low(i) { run + 1 } else { 0 };
        if run == w {
            end = i - w;
            break;
        }
    }
    Ok(DiscontinuitySet {
        kind: DiscontinuityKind::SharpTransition,
        per_slice: vec![vec![t.point(start), t.point(end)]],
        jump_gaps: vec![],
    })
}

/// Masks every point within `band_cells` cells of a jump in its slice. Sharp
/// transitions are never masked: their interior is a region of its own.
pub fn filter_smeared(field: &SolutionField, disc: &DiscontinuitySet, band_cells: usize) -> SmearMask {
    let mut mask = SmearMask::none(field.values.len());
    if band_cells == 0 || disc.kind == DiscontinuityKind::SharpTransition {
        return mask;
    }
    let axis = field.domain.front_axis();
    let n = axis.n;
    let dx = axis.step();
    let reach = band_cells as f64 * dx * (1.0 + 1e-9);
    for (j, fronts) in disc.per_slice.iter().enumerate() {
        let row = &mut mask.mask[j * n..(j + 1) * n];
        for &f in fronts {
            let centre = ((f - axis.lo) / dx).round() as isize;
            let span = band_cells as isize + 1;
            for i in (centre - span).max(0)..=(centre + span).min(n as isize - 1) {
                let i = i as usize;
                if (axis.point(i) - f).abs() <= reach {
                    row[i] = true;
                }
            }
        }
    }
    mask
}
