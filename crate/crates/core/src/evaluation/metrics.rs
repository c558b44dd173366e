use crate::error::{Error, Result};
use crate::problems::UniformGrid;

/// Mean absolute difference over congruent grids (uniform-grid quadrature of
/// the normalized L1 norm).
pub fn l1_error(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Usage(format!(
            "prediction has {} points, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Usage("empty grids".into()));
    }
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

/// Merged `[lo, hi]` windows around `fronts`, each of width
/// `window_frac * extent / fronts.len()`, so the total is `window_frac` of the axis.
pub fn cut_windows(fronts: &[f64], axis: &UniformGrid, window_frac: f64) -> Vec<(f64, f64)> {
    if fronts.is_empty() {
        return vec![];
    }
    let half = 0.5 * window_frac * axis.extent() / fronts.len() as f64;
    let mut iv: Vec<(f64, f64)> = fronts.iter().map(|&f| (f - half, f + half)).collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (lo, hi) in iv {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// Per-point membership of one slice in the cut region around `fronts`.
pub fn cut_mask(fronts: &[f64], axis: &UniformGrid, window_frac: f64) -> Vec<bool> {
    let windows = cut_windows(fronts, axis, window_frac);
    (0..axis.n)
        .map(|i| {
            let y = axis.point(i);
            windows.iter().any(|&(lo, hi)| y >= lo && y <= hi)
        })
        .collect()
}

/// Mean absolute error restricted to windows around the true fronts of each
/// slice. `pred` and `truth` are slice-major with `axis.n` points per slice;
/// `fronts[j]` holds the true front locations of slice `j`.
pub fn dis_error(
    pred: &[f64],
    truth: &[f64],
    fronts: &[Vec<f64>],
    axis: &UniformGrid,
    window_frac: f64,
) -> Result<f64> {
    if !(window_frac > 0.0 && window_frac < 1.0) {
        return Err(Error::Usage(format!("window fraction {window_frac} outside (0, 1)")));
    }
    if pred.len() != truth.len() || pred.len() != fronts.len() * axis.n {
        return Err(Error::Usage(format!(
            "{} predicted / {} true points for {} slices of {}",
            pred.len(),
            truth.len(),
            fronts.len(),
            axis.n
        )));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for (j, slice_fronts) in fronts.iter().enumerate() {
        let mask = cut_mask(slice_fronts, axis, window_frac);
        let off = j * axis.n;
        for (i, inside) in mask.into_iter().enumerate() {
            if inside {
                sum += (pred[off + i] - truth[off + i]).abs();
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::Usage("cut region contains no grid points".into()));
    }
    Ok(sum / count as f64)
}
