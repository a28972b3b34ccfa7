//! Peak detection and ensemble statistics.

use serde::{Deserialize, Serialize};

/// Samples at or below this value never count as a maximum.
pub const PEAK_FLOOR: f64 = 1e-4;
/// Relative fluctuations are reported only above this mean peak height.
pub const FLUCTUATION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub time: f64,
    pub value: f64,
    /// Index of the sample that forms the maximum.
    pub index: usize,
}

/// First strict local maximum after t = 0 that exceeds [`PEAK_FLOOR`],
/// refined by a parabola through the three samples around it.
///
/// Assumes a uniform time grid.
pub fn first_maximum(times: &[f64], values: &[f64]) -> Option<Peak> {
    debug_assert_eq!(times.len(), values.len());
    (1..values.len().saturating_sub(1)).find_map(|k| {
        let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
        if !(y1 > y0 && y1 > y2 && y1 > PEAK_FLOOR) {
            return None;
        }
        let h = times[k + 1] - times[k];
        let curv = y0 - 2.0 * y1 + y2;
        let p = 0.5 * (y0 - y2) / curv;
        Some(Peak { time: times[k] + p * h, value: y1 - 0.25 * (y0 - y2) * p, index: k })
    })
}

/// Sample mean and (n − 1)-normalised standard deviation; the deviation is
/// zero for a single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Statistics of the first maxima of one observable across an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstMaxStats {
    /// Members in which a first maximum was found.
    pub found: usize,
    pub members: usize,
    pub mean_value: f64,
    pub std_value: f64,
    pub mean_time: f64,
    /// std / mean of the peak height; `None` when the mean is at or below
    /// [`FLUCTUATION_FLOOR`] or fewer than two peaks were found.
    pub relative_fluctuation: Option<f64>,
    pub peaks: Vec<Option<Peak>>,
}

impl FirstMaxStats {
    pub fn from_peaks(peaks: Vec<Option<Peak>>) -> Self {
        let values: Vec<f64> = peaks.iter().flatten().map(|p| p.value).collect();
        let times: Vec<f64> = peaks.iter().flatten().map(|p| p.time).collect();
        let (mean_value, std_value) = mean_std(&values);
        let (mean_time, _) = mean_std(&times);
        let relative_fluctuation =
            (values.len() >= 2 && mean_value > FLUCTUATION_FLOOR).then(|| std_value / mean_value);
        FirstMaxStats { found: values.len(), members: peaks.len(), mean_value, std_value, mean_time, relative_fluctuation, peaks }
    }
}

/// Pointwise mean and standard deviation of equally sampled series.
pub fn pointwise(series: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let len = series.first().map_or(0, |s| s.len());
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    let mut column = Vec::with_capacity(series.len());
    for k in 0..len {
        column.clear();
        column.extend(series.iter().map(|s| s[k]));
        let (m, s) = mean_std(&column);
        mean.push(m);
        std.push(s);
    }
    (mean, std)
}
