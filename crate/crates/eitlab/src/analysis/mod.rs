//! Analysis pipeline: optical-depth images, equal-atom binning, centroid
//! tracking, and the Gaussian / exponential / linear least-squares fits
//! that turn records into derived quantities.

mod binning;
mod fit;
mod image;
mod track;

pub use binning::{equal_atom_binning, BinningTransform};
pub use fit::{
    decay_fit, gaussian_profile_fit, linear_fit, FitFlag, FitKind, FitParam, FitResult,
    FWHM_PER_SIGMA,
};
pub use image::{optical_depth_image, IntensityImage, OpticalDepthImage, RATIO_FLOOR};
pub use track::{
    centroid_track, fwhm_series, group_velocity_fit, normalize_record, CentroidTrack, FwhmSeries,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("image shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("reference image is identically zero")]
    ZeroReference,
    #[error("image contains negative or non-finite pixels")]
    BadPixels,
    #[error("degenerate density: profile is identically zero")]
    DegenerateDensity,
    #[error("requested {requested} bins for {available} pixels")]
    TooManyBins { requested: usize, available: usize },
    #[error("need at least {needed} valid frames in the fit window, found {found}")]
    InsufficientFrames { needed: usize, found: usize },
    #[error("non-positive amplitude in the fit window at t = {0} µs")]
    NonPositiveAmplitude(f64),
    #[error("fit window is empty")]
    EmptyWindow,
}
