//! Building footprints from map-view rasters.
//!
//! Map-view tiles draw every building in one flat color, so the pipeline is
//! color mask, Canny edges, Hough lines, then chain tracing with the lines
//! used to straighten traced walls. Heights are not recovered.

mod canny;
mod hough;
mod raster;
mod score;
mod trace;

use serde::{Deserialize, Serialize};

pub use canny::{canny_edges, canny_edges_relative, max_gradient, EdgeMap};
pub use hough::{hough_lines, HoughLine};
pub use raster::{color_mask, Georef, GrayImage, Mask, RasterImage};
pub use score::{score_extraction, BuildingScore, ExtractionScore};
pub use trace::{trace_polygons, DiscardReason, Fragment, TraceConfig, Traced};

use crate::error::{Error, Result};
use crate::geometry::Polygon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Building fill color.
    pub color: [u8; 3],
    /// Per-channel tolerance around `color`.
    pub tolerance: u8,
    /// Gaussian pre-blur; 0 disables it.
    pub blur_sigma: f64,
    /// Hysteresis thresholds as fractions of the largest gradient.
    pub low_ratio: f64,
    pub high_ratio: f64,
    pub rho_res_px: f64,
    pub theta_res_deg: f64,
    pub vote_threshold: usize,
    pub trace: TraceConfig,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            color: [217, 208, 201],
            tolerance: 12,
            blur_sigma: 0.0,
            low_ratio: 0.1,
            high_ratio: 0.3,
            rho_res_px: 1.0,
            theta_res_deg: 1.0,
            vote_threshold: 20,
            trace: TraceConfig::default(),
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.blur_sigma >= 0.0) {
            return Err(Error::Config("blur_sigma must be >= 0".into()));
        }
        if !(0.0 <= self.low_ratio && self.low_ratio <= self.high_ratio) {
            return Err(Error::Config("need 0 <= low_ratio <= high_ratio".into()));
        }
        if !(self.rho_res_px > 0.0 && self.theta_res_deg > 0.0 && self.theta_res_deg < 180.0) {
            return Err(Error::Config("hough resolutions must be positive".into()));
        }
        self.trace
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub polygons: Vec<Polygon>,
    pub discarded: Vec<Fragment>,
    pub lines: Vec<HoughLine>,
    pub edge_pixels: usize,
}

/// Runs the full pipeline on one georeferenced raster.
pub fn extract_footprints(image: &RasterImage, cfg: &ExtractionConfig) -> Result<Extraction> {
    cfg.validate()?;
    let mask = color_mask(image, cfg.color, cfg.tolerance);
    let gray = mask.to_gray().blurred(cfg.blur_sigma);
    let edges = canny_edges_relative(&gray, cfg.low_ratio, cfg.high_ratio)?;
    let lines = hough_lines(
        &edges,
        cfg.rho_res_px,
        cfg.theta_res_deg.to_radians(),
        cfg.vote_threshold,
    )?;
    let traced = trace_polygons(&edges, &lines, &image.georef, &cfg.trace)?;
    Ok(Extraction {
        polygons: traced.polygons,
        discarded: traced.discarded,
        lines,
        edge_pixels: edges.count(),
    })
}
