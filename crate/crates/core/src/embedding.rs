//! Sliding-window (delay) embedding of a scalar signal into `R^(M+1)`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    /// Embedding dimension; points have `m + 1` coordinates.
    pub m: usize,
    /// Lag between consecutive coordinates, in samples.
    pub tau: usize,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        Self { m: 2, tau: 1 }
    }
}

impl EmbeddingParams {
    pub fn new(m: usize, tau: usize) -> Result<Self> {
        let p = Self { m, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.tau == 0 {
            return Err(Error::InvalidArgument(format!(
                "embedding needs M >= 1 and tau >= 1, got M={} tau={}",
                self.m, self.tau
            )));
        }
        Ok(())
    }

    /// Samples covered by one window.
    pub fn window_len(&self) -> usize {
        self.m * self.tau + 1
    }
}

/// Finite point set produced by an embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    #[serde(rename = "channel")]
    pub source_channel: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub tau: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointCloud {
    /// Cloud from raw coordinates; every point must have the same length.
    pub fn from_points(source_channel: impl Into<String>, points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::ShapeMismatch("points of unequal dimension".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self {
            source_channel: source_channel.into(),
            m: dim.saturating_sub(1),
            tau: 1,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("point cloud serialization cannot fail")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cloud: Self = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
        let checked = Self::from_points(cloud.source_channel.clone(), cloud.points.clone())
            .map_err(|e| Error::format(path, e))?;
        Ok(Self { m: cloud.m, tau: cloud.tau, ..checked })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Point `k` is `(signal[k], signal[k + tau], ..., signal[k + M*tau])`.
pub fn sliding_window_embed(
    channel: &str,
    signal: &[f64],
    params: EmbeddingParams,
) -> Result<PointCloud> {
    params.validate()?;
    let span = params.m * params.tau;
    if signal.len() <= span {
        return Err(Error::InsufficientData(format!(
            "channel {channel:?}: {} samples, window of M={} tau={} needs at least {}",
            signal.len(),
            params.m,
            params.tau,
            span + 1
        )));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("channel {channel:?}: non-finite sample")));
    }
    let points = (0..signal.len() - span)
        .map(|k| (0..=params.m).map(|i| signal[k + i * params.tau]).collect())
        .collect();
    Ok(PointCloud {
        source_channel: channel.to_string(),
        m: params.m,
        tau: params.tau,
        points,
    })
}
