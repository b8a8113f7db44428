//! Data ingestion and synthesis: feature matrices, grouping into kernel
//! layers, multilayer SBM graphs, image features and label sampling.

mod features;
mod grouping;
mod image;
mod labels;
mod sbm;

pub use features::{load_class_csv, load_features_csv, write_matrix_csv, FeatureMatrix};
pub use grouping::{
    feature_group, scale_for_fastsum, FeatureGroup, GroupScaling, GroupedGraph, GroupingSpec,
    ScaledGroup,
};
pub use image::{image_to_features, images_to_features, load_rgb_png, ImageFeatures, ImageShape};
pub use labels::{sample_label_mask, sample_labels, LabelFraction};
pub use sbm::{sbm_generate, SbmLayer, SbmSpec};
