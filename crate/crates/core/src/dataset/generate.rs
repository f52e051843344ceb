//! Seeded dataset generation: scene, forward solves, noise, index tensors.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::container::{
    sample_id, Container, ContainerHeader, Family, SampleEntry, Split, FLAG_CLEAN, FLAG_NOISY,
    FLAG_TENSORS,
};
use crate::dsm::{compute_tensor_with, dataset_scale_constant, IndexTensor, SamplingKernel};
use crate::error::{Error, Result};
use crate::forward::{
    add_noise, scattered_at_receivers, ExperimentConfig, FieldRecord, MomSystem, SolverOptions,
};
use crate::geometry::Point;
use crate::rng::{mix_seed, Rng};
use crate::scene::{digit_to_grid, rasterize_circles, CircleSpec, ContrastGrid, DigitImage};

/// Circle centers are drawn from `[-CENTER_RANGE, CENTER_RANGE]^2`.
pub const CENTER_RANGE: f64 = 0.6;
pub const CIRCLE_COUNT: (u64, u64) = (1, 3);
pub const CIRCLE_RADIUS: (f64, f64) = (0.15, 0.4);
pub const CIRCLE_PERMITTIVITY: (f64, f64) = (1.5, 2.0);
pub const HIGH_CONTRAST_PERMITTIVITY: (f64, f64) = (3.5, 4.0);
pub const DIGIT_PERMITTIVITY: (f64, f64) = (1.5, 2.5);
pub const DIGIT_CIRCLE_RADIUS: (f64, f64) = (0.1, 0.3);
pub const DIGIT_CIRCLE_PROBABILITY: f64 = 0.5;
pub const DEFAULT_TRAINING_NOISE: f64 = 0.05;

const NOISE_SALT: u64 = 0x4e4f_4953_4531_5f76;

/// Seed of the scene drawn for `sample_id`.
pub fn sample_seed(master_seed: u64, sample_id: u64) -> u64 {
    mix_seed(&[master_seed, sample_id])
}

/// Seed of the noise added to incidence `p` of `sample_id` at level `delta`.
///
/// Depends only on the sample id, the bit pattern of `delta` and the
/// incidence, so any consumer of a container can regenerate the same noisy
/// fields from the stored clean ones.
pub fn noise_seed(sample_id: u64, delta: f64, p: usize) -> u64 {
    mix_seed(&[sample_id, delta.to_bits(), p as u64, NOISE_SALT])
}

/// Noisy copies of `clean` at level `delta`.
pub fn noisy_records(
    clean: &[FieldRecord],
    delta: f64,
    sample_id: u64,
) -> Result<Vec<FieldRecord>> {
    clean
        .iter()
        .map(|rec| add_noise(rec, delta, noise_seed(sample_id, delta, rec.incidence)))
        .collect()
}

/// Circle scene drawn with the family's distributions.
pub fn draw_circles(rng: &mut Rng, family: Family) -> Result<Vec<CircleSpec>> {
    let (lo, hi) = match family {
        Family::Circles => CIRCLE_PERMITTIVITY,
        Family::CirclesHighContrast => HIGH_CONTRAST_PERMITTIVITY,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "{family:?} is not a circle family"
            )))
        }
    };
    let count = rng.int_in(CIRCLE_COUNT.0, CIRCLE_COUNT.1);
    (0..count)
        .map(|_| {
            let cx = rng.uniform_in(-CENTER_RANGE, CENTER_RANGE);
            let cy = rng.uniform_in(-CENTER_RANGE, CENTER_RANGE);
            let r = rng.uniform_in(CIRCLE_RADIUS.0, CIRCLE_RADIUS.1);
            let eps = rng.uniform_in(lo, hi);
            CircleSpec::new(Point::new(cx, cy), r, eps)
        })
        .collect()
}

/// Scene for one sample, fully determined by `seed`.
pub fn draw_scene(
    family: Family,
    seed: u64,
    n: usize,
    digits: Option<&[DigitImage]>,
) -> Result<ContrastGrid> {
    let mut rng = Rng::new(seed);
    match family {
        Family::Circles | Family::CirclesHighContrast => {
            rasterize_circles(&draw_circles(&mut rng, family)?, n)
        }
        Family::Digits => {
            let images = digits
                .filter(|d| !d.is_empty())
                .ok_or_else(|| Error::InvalidArgument("digit family needs IDX images".into()))?;
            let img = &images[rng.int_in(0, images.len() as u64 - 1) as usize];
            let rot = rng.uniform_in(0.0, TAU);
            let eps_digit = rng.uniform_in(DIGIT_PERMITTIVITY.0, DIGIT_PERMITTIVITY.1);
            let circle = if rng.uniform() < DIGIT_CIRCLE_PROBABILITY {
                let cx = rng.uniform_in(-CENTER_RANGE, CENTER_RANGE);
                let cy = rng.uniform_in(-CENTER_RANGE, CENTER_RANGE);
                let r = rng.uniform_in(DIGIT_CIRCLE_RADIUS.0, DIGIT_CIRCLE_RADIUS.1);
                let eps = rng.uniform_in(DIGIT_PERMITTIVITY.0, DIGIT_PERMITTIVITY.1);
                Some(CircleSpec::new(Point::new(cx, cy), r, eps)?)
            } else {
                None
            };
            digit_to_grid(img, n, rot, circle.as_ref(), eps_digit)
        }
        Family::Custom => Err(Error::InvalidArgument(
            "custom scenes are supplied by the caller, not drawn".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: u64,
    pub val: u64,
    pub test: u64,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> u64 {
        match split {
            Split::Train => self.train,
            Split::Val => self.val,
            Split::Test => self.test,
        }
    }

    pub fn total(&self) -> u64 {
        self.train + self.val + self.test
    }

    /// Sample ids in container order: train, then validation, then test.
    pub fn sample_ids(&self) -> Vec<u64> {
        Split::ALL
            .iter()
            .flat_map(|&s| (0..self.get(s)).map(move |i| sample_id(s, i)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub family: Family,
    pub counts: SplitCounts,
    pub config: ExperimentConfig,
    pub n: usize,
    pub delta_train: f64,
    pub master_seed: u64,
}

/// Summary of a generated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: ExperimentConfig,
    pub family: Family,
    pub n: usize,
    pub counts: SplitCounts,
    pub delta_train: f64,
    pub scale_c: f64,
}

impl DatasetManifest {
    pub fn of(container: &Container) -> Self {
        let mut counts = SplitCounts::default();
        for s in &container.samples {
            match Split::of(s.sample_id) {
                Some(Split::Train) => counts.train += 1,
                Some(Split::Val) => counts.val += 1,
                Some(Split::Test) => counts.test += 1,
                None => {}
            }
        }
        Self {
            config: container.config(),
            family: container.header.family,
            n: container.header.n,
            counts,
            delta_train: container.header.delta_train,
            scale_c: container.header.scale_c,
        }
    }
}

/// Solves every incidence of `cfg` for `grid` with one factorization.
pub fn clean_records(grid: &ContrastGrid, cfg: &ExperimentConfig) -> Result<Vec<FieldRecord>> {
    cfg.validate()?;
    let system = MomSystem::assemble(grid, cfg.k, SolverOptions::default())?;
    (0..cfg.n_inc)
        .map(|p| scattered_at_receivers(&system.solve_incidence(cfg, p)?, grid, cfg))
        .collect()
}

fn flatten(records: &[FieldRecord]) -> Vec<num_complex::Complex64> {
    records.iter().flat_map(|r| r.us.iter().copied()).collect()
}

/// Builds one sample: scene, clean and noisy fields, unscaled tensor from
/// the noisy fields.
pub fn generate_sample(
    params: &GenParams,
    kernel: &SamplingKernel,
    digits: Option<&[DigitImage]>,
    sample_id: u64,
) -> Result<SampleEntry> {
    let seed = sample_seed(params.master_seed, sample_id);
    let grid = draw_scene(params.family, seed, params.n, digits)?;
    let clean = clean_records(&grid, &params.config)?;
    let noisy = noisy_records(&clean, params.delta_train, sample_id)?;
    let tensor = compute_tensor_with(kernel, &noisy, &params.config, params.n)?;
    Ok(SampleEntry {
        sample_id,
        seed,
        eps: grid.into_eps(),
        clean: Some(flatten(&clean)),
        noisy: Some(flatten(&noisy)),
        tensor: Some(tensor.data),
    })
}

/// Generates a complete dataset. Samples are produced in parallel and
/// stored in sample-id order; `scale_c` is the largest training tensor entry.
pub fn gen_dataset(params: &GenParams, digits: Option<&[DigitImage]>) -> Result<Container> {
    params.config.validate()?;
    if !(params.delta_train >= 0.0) || !params.delta_train.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "training noise level must be >= 0, got {}",
            params.delta_train
        )));
    }
    if params.family == Family::Digits && digits.is_none_or(|d| d.is_empty()) {
        return Err(Error::InvalidArgument(
            "digit family needs IDX images".into(),
        ));
    }
    if params.family == Family::Custom {
        return Err(Error::InvalidArgument(
            "custom family cannot be generated".into(),
        ));
    }
    let kernel = SamplingKernel::for_config(&params.config, params.n);
    let samples = params
        .counts
        .sample_ids()
        .into_par_iter()
        .map(|id| generate_sample(params, &kernel, digits, id))
        .collect::<Result<Vec<_>>>()?;

    let mut header = ContainerHeader::from_config(
        params.family,
        &params.config,
        params.n,
        FLAG_CLEAN | FLAG_NOISY | FLAG_TENSORS,
    );
    header.delta_train = params.delta_train;
    let mut container = Container { header, samples };
    container.header.scale_c = training_scale_constant(&container)?;
    Ok(container)
}

/// Largest stored tensor entry over the training split.
pub fn training_scale_constant(container: &Container) -> Result<f64> {
    let tensors = container
        .samples
        .iter()
        .filter(|s| Split::of(s.sample_id) == Some(Split::Train))
        .map(|s| container.tensor(s))
        .collect::<Result<Vec<IndexTensor>>>()?;
    Ok(dataset_scale_constant(&tensors))
}
