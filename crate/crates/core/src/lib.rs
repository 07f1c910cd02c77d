//! Depth-based person re-identification.
//!
//! The pipeline turns a depth frame into identity evidence in three stages:
//!
//! 1. [`geometry`] converts depth images to point clouds, estimates surface
//!    normals, keeps the torso and head, and partitions them into voxel
//!    grids.
//! 2. [`covdesc`] summarizes each voxel (and each 8-adjacent voxel pair) by
//!    a 6x6 covariance of point-plus-normal features. The stacked matrices
//!    form the DVCov descriptor, matched by the SPD geodesic metric in
//!    [`spdmanifold`]; their log-spectra form the rotation-invariant
//!    Eigen-depth feature. [`skeleton`] adds a 13-element physique vector.
//! 3. [`recognition`] fuses the features (DVCov+SKL by distance sum, ED+SKL
//!    by concatenation with PCA/LDA) and evaluates CMC curves under
//!    single- and multi-shot protocols.
//!
//! When only RGB data is available, [`transfer`] estimates depth features
//! from visual features through a kernelized latent subspace learned on an
//! auxiliary RGB-D set, and fuses the resulting distances with RGB ones.
//! [`synthbench`] generates deterministic synthetic bodies and paired
//! feature sets so every stage can be exercised without external data.

// `!(x > 0.0)`-style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covdesc;
pub mod error;
pub mod geometry;
pub mod io;
mod linalg;
pub mod recognition;
pub mod skeleton;
pub mod spdmanifold;
pub mod synthbench;
pub mod transfer;
pub mod verify;

pub use covdesc::{DVCovDescriptor, EigenDepthFeature};
pub use error::{Error, Result};
pub use geometry::{DepthImage, Intrinsics, PointCloud, RigidMotion, SkeletonJoints, VoxelGrid};
pub use recognition::{CmcCurve, Dataset, DescriptorChoice, FrameDescriptor, Protocol};
pub use skeleton::SkeletonFeature;
pub use transfer::{AuxiliaryDataset, KernelConfig, TransferHyperParams, TransferModel};
