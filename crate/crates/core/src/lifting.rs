//! Region labels and the two training sets derived from extracted
//! discontinuities: lifted points for the operator, front locations for the
//! cutting network.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extract::{DiscontinuitySet, SmearMask};
use crate::problems::{Domain, SolutionField};

/// Numeric value of region label `j` is `j * ENCODE_SCALE`.
pub const ENCODE_SCALE: f64 = 1.0;

/// Number of fronts at or left of `y`; a point on a front belongs to the
/// region to its right. `fronts` must be sorted.
pub fn region_label(y: f64, fronts: &[f64]) -> usize {
    fronts.partition_point(|&f| f <= y)
}

/// One training point in lifted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint<'a> {
    pub sensors: &'a [f64],
    pub coord: Vec<f64>,
    pub label: f64,
    pub target: f64,
}

/// Kept points of one sample. Coordinates are recovered from `domain` and
/// the flat grid index, which keeps large space-time sets compact.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSample {
    pub sensors: Vec<f64>,
    pub domain: Domain,
    pub index: Vec<u32>,
    pub label: Vec<u8>,
    pub target: Vec<f64>,
}

impl LiftedSample {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// `(slice, position)` of point `k`.
    pub fn grid_position(&self, k: usize) -> (usize, usize) {
        let n = self.domain.slice_len();
        let flat = self.index[k] as usize;
        (flat / n, flat % n)
    }

    /// Writes the query of point `k` into `out`: coordinates, then the
    /// encoded label when `with_label` is set.
    pub fn write_query(&self, k: usize, with_label: bool, out: &mut [f64]) {
        let (j, i) = self.grid_position(k);
        match self.domain {
            Domain::SpaceTime { x, t } => {
                out[0] = x.point(i);
                out[1] = t.point(j);
            }
            Domain::Time { t } => out[0] = t.point(i),
        }
        if with_label {
            out[self.domain.coord_dims()] = self.label[k] as f64 * ENCODE_SCALE;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedDataset {
    /// Number of regions `M`; 1 for unlabelled (baseline) data.
    pub region_count: usize,
    /// Whether queries carry a label coordinate.
    pub labelled: bool,
    pub samples: Vec<LiftedSample>,
}

impl LiftedDataset {
    pub fn coord_dims(&self) -> usize {
        self.samples.first().map_or(0, |s| s.domain.coord_dims())
    }

    /// Width of a trunk query.
    pub fn query_width(&self) -> usize {
        self.coord_dims() + usize::from(self.labelled)
    }

    pub fn sensor_count(&self) -> usize {
        self.samples.first().map_or(0, |s| s.sensors.len())
    }

    pub fn total_points(&self) -> usize {
        self.samples.iter().map(LiftedSample::len).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = LiftedPoint<'_>> {
        let dims = self.coord_dims();
        self.samples.iter().flat_map(move |s| {
            (0..s.len()).map(move |k| {
                let mut q = vec![0.0; dims + 1];
                s.write_query(k, true, &mut q);
                let label = q.pop().unwrap_or(0.0);
                LiftedPoint {
                    sensors: &s.sensors,
                    coord: q,
                    label,
                    target: s.target[k],
                }
            })
        })
    }
}

fn check_sensors(fields: &[&SolutionField]) -> Result<()> {
    let m = fields.first().map_or(0, |f| f.sensors.len());
    if let Some((k, f)) = fields.iter().enumerate().find(|(_, f)| f.sensors.len() != m) {
        return Err(Error::Usage(format!(
            "sample {k} has {} sensors, expected {m}",
            f.sensors.len()
        )));
    }
    Ok(())
}

/// Labels every unmasked grid point by its region and keeps its value unchanged.
pub fn build_lifted_dataset(
    fields: &[&SolutionField],
    discs: &[DiscontinuitySet],
    masks: &[SmearMask],
) -> Result<LiftedDataset> {
    if fields.len() != discs.len() || fields.len() != masks.len() {
        return Err(Error::Usage(format!(
            "{} fields, {} discontinuity sets, {} masks",
            fields.len(),
            discs.len(),
            masks.len()
        )));
    }
    check_sensors(fields)?;
    let dis_n = discs.first().map_or(0, DiscontinuitySet::dis_n);
    let samples = fields
        .par_iter()
        .zip(discs)
        .zip(masks)
        .enumerate()
        .map(|(k, ((field, disc), mask))| lift_sample(k, field, disc, mask, dis_n))
        .collect::<Result<Vec<_>>>()?;
    Ok(LiftedDataset {
        region_count: dis_n + 1,
        labelled: true,
        samples,
    })
}

fn lift_sample(
    k: usize,
    field: &SolutionField,
    disc: &DiscontinuitySet,
    mask: &SmearMask,
    dis_n: usize,
) -> Result<LiftedSample> {
    let domain = field.domain;
    if mask.mask.len() != field.values.len()
        || disc.per_slice.len() != domain.n_slices()
        || disc.per_slice.iter().any(|f| f.len() != dis_n)
    {
        return Err(Error::Usage(format!(
            "sample {k}: field, mask and discontinuities are not congruent"
        )));
    }
    if field.values.len() > u32::MAX as usize || dis_n >= u8::MAX as usize {
        return Err(Error::Usage(format!("sample {k} is too large to lift")));
    }
    let axis = domain.front_axis();
    let n = axis.n;
    let mut out = LiftedSample {
        sensors: field.sensors.clone(),
        domain,
        index: vec![],
        label: vec![],
        target: vec![],
    };
    for (j, fronts) in disc.per_slice.iter().enumerate() {
        for i in 0..n {
            let flat = j * n + i;
            if mask.mask[flat] {
                continue;
            }
            out.index.push(flat as u32);
            out.label.push(region_label(axis.point(i), fronts) as u8);
            out.target.push(field.values[flat]);
        }
    }
    Ok(out)
}

/// Every grid point with no label, for the baseline operator.
pub fn build_plain_dataset(fields: &[&SolutionField]) -> Result<LiftedDataset> {
    check_sensors(fields)?;
    let samples = fields
        .iter()
        .map(|f| LiftedSample {
            sensors: f.sensors.clone(),
            domain: f.domain,
            index: (0..f.values.len() as u32).collect(),
            label: vec![0; f.values.len()],
            target: f.values.clone(),
        })
        .collect();
    Ok(LiftedDataset {
        region_count: 1,
        labelled: false,
        samples,
    })
}

/// One cutting-net example: a sample's fronts at one time (or its
/// transition times when `time` is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscRow {
    pub sample: usize,
    pub time: Option<f64>,
    pub fronts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscDataset {
    pub dis_n: usize,
    pub sensors: Vec<Vec<f64>>,
    pub rows: Vec<DiscRow>,
}

impl DiscDataset {
    pub fn with_time(&self) -> bool {
        self.rows.first().is_some_and(|r| r.time.is_some())
    }

    pub fn input_width(&self) -> usize {
        self.sensors.first().map_or(0, Vec::len) + usize::from(self.with_time())
    }

    /// Writes the network input of row `r` (sensors, then time if present).
    pub fn write_input(&self, r: usize, out: &mut [f64]) {
        let row = &self.rows[r];
        let s = &self.sensors[row.sample];
        out[..s.len()].copy_from_slice(s);
        if let Some(t) = row.time {
            out[s.len()] = t;
        }
    }
}

/// Pairs each sample's sensors with its per-slice fronts (space-time) or its
/// transition times (time series).
pub fn build_disc_dataset(fields: &[&SolutionField], discs: &[DiscontinuitySet]) -> Result<DiscDataset> {
    if fields.len() != discs.len() {
        return Err(Error::Usage(format!(
            "{} fields vs {} discontinuity sets",
            fields.len(),
            discs.len()
        )));
    }
    check_sensors(fields)?;
    let dis_n = discs.first().map_or(0, DiscontinuitySet::dis_n);
    let mut rows = vec![];
    for (k, (field, disc)) in fields.iter().zip(discs).enumerate() {
        if disc.per_slice.len() != field.domain.n_slices() || disc.per_slice.iter().any(|f| f.len() != dis_n) {
            return Err(Error::Usage(format!("sample {k}: discontinuities do not match the field")));
        }
        for (j, fronts) in disc.per_slice.iter().enumerate() {
            rows.push(DiscRow {
                sample: k,
                time: field.domain.slice_time(j),
                fronts: fronts.clone(),
            });
        }
    }
    Ok(DiscDataset {
        dis_n,
        sensors: fields.iter().map(|f| f.sensors.clone()).collect(),
        rows,
    })
}
