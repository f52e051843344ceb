//! Dataset generation, storage and digit-image ingestion.

pub mod container;
pub mod generate;
pub mod idx;

pub use container::{
    sample_id, sample_index, Container, ContainerHeader, Family, FieldKind, SampleEntry, Split,
    FLAG_CLEAN, FLAG_NOISY, FLAG_TENSORS,
};
pub use generate::{
    clean_records, draw_scene, gen_dataset, generate_sample, noise_seed, noisy_records,
    sample_seed, training_scale_constant, DatasetManifest, GenParams, SplitCounts,
    DEFAULT_TRAINING_NOISE,
};
pub use idx::{load_idx, parse_idx};
