use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use scatter_dsm::augment::AugmentOp;
use scatter_dsm::dataset::{
    clean_records, gen_dataset, load_idx, noisy_records, sample_id, training_scale_constant,
    Container, ContainerHeader, DatasetManifest, Family, FieldKind, GenParams, SampleEntry, Split,
    SplitCounts, FLAG_CLEAN, FLAG_NOISY, FLAG_TENSORS,
};
use scatter_dsm::dsm::{compute_tensor_with, SamplingKernel};
use scatter_dsm::forward::{Aperture, ExperimentConfig, FieldRecord, LIMITED_APERTURE_RECEIVERS};
use scatter_dsm::metrics::EvalRecord;
use scatter_dsm::scene::{
    make_austria, make_letters, AustriaVariant, ContrastGrid, DEFAULT_RESOLUTION,
};
use serde::Serialize;

use crate::{
    pgm, DsmArgs, EvalArgs, ExportArgs, ExportWhat, FieldsArg, GenArgs, SceneArg, SolveArgs,
};

fn experiment(
    base: ExperimentConfig,
    ni: Option<usize>,
    limited: bool,
) -> Result<ExperimentConfig> {
    let mut cfg = base;
    if limited {
        cfg.n_rec = LIMITED_APERTURE_RECEIVERS;
        cfg.aperture = Aperture::UPPER_HALF;
    }
    if let Some(ni) = ni {
        cfg.n_inc = ni;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() {
        bail!("noise level must be a finite number >= 0, got {delta}");
    }
    Ok(())
}

fn flatten(records: &[FieldRecord]) -> Vec<Complex64> {
    records.iter().flat_map(|r| r.us.iter().copied()).collect()
}

fn load(path: &Path) -> Result<Container> {
    Container::load(path).with_context(|| format!("reading {}", path.display()))
}

fn save(container: &Container, path: &Path) -> Result<()> {
    container
        .save(path)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn gen(a: GenArgs, seed: u64, config: Option<ExperimentConfig>) -> Result<()> {
    check_delta(a.delta)?;
    let family = Family::from(a.family);
    let config = experiment(config.unwrap_or_default(), a.ni, a.limited_aperture)?;
    let digits = match (&a.idx, family) {
        (Some(path), Family::Digits) => {
            Some(load_idx(path).with_context(|| format!("reading {}", path.display()))?)
        }
        (None, Family::Digits) => bail!("the digits family needs --idx"),
        _ => None,
    };
    let params = GenParams {
        family,
        counts: SplitCounts {
            train: a.n_train,
            val: a.n_val,
            test: a.n_test,
        },
        config,
        n: a.n,
        delta_train: a.delta,
        master_seed: seed,
    };
    let container = gen_dataset(&params, digits.as_deref())?;
    save(&container, &a.out)?;
    println!(
        "{}",
        serde_json::to_string(&DatasetManifest::of(&container))?
    );
    Ok(())
}

pub fn solve(a: SolveArgs, seed: u64, config: Option<ExperimentConfig>) -> Result<()> {
    if let Some(d) = a.delta {
        check_delta(d)?;
    }
    let (family, n, base, scenes): (
        Family,
        usize,
        ExperimentConfig,
        Vec<(u64, u64, ContrastGrid)>,
    ) = match (&a.input, a.scene) {
        (Some(path), _) => {
            let c = load(path)?;
            let scenes = c
                .samples
                .iter()
                .map(|s| Ok((s.sample_id, s.seed, c.grid(s)?)))
                .collect::<Result<_>>()?;
            (
                c.header.family,
                c.header.n,
                config.unwrap_or_else(|| c.config()),
                scenes,
            )
        }
        (None, Some(scene)) => {
            let grids = match scene {
                SceneArg::Austria => vec![make_austria(AustriaVariant::CircleDataset)],
                SceneArg::AustriaMnist1 => vec![make_austria(AustriaVariant::Mnist1)],
                SceneArg::AustriaMnist2 => vec![make_austria(AustriaVariant::Mnist2)],
                SceneArg::Letters => make_letters(),
            };
            let scenes = grids
                .into_iter()
                .enumerate()
                .map(|(i, g)| (sample_id(Split::Test, i as u64), seed, g))
                .collect();
            (
                Family::Custom,
                DEFAULT_RESOLUTION,
                config.unwrap_or_default(),
                scenes,
            )
        }
        (None, None) => bail!("solve needs --in or --scene"),
    };
    let cfg = experiment(base, a.ni, a.limited_aperture)?;
    let samples = scenes
        .into_par_iter()
        .map(|(id, seed, grid)| {
            let clean = clean_records(&grid, &cfg)?;
            let noisy = a.delta.map(|d| noisy_records(&clean, d, id)).transpose()?;
            Ok(SampleEntry {
                sample_id: id,
                seed,
                eps: grid.into_eps(),
                clean: Some(flatten(&clean)),
                noisy: noisy.as_deref().map(flatten),
                tensor: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let flags = if a.delta.is_some() {
        FLAG_CLEAN | FLAG_NOISY
    } else {
        FLAG_CLEAN
    };
    let mut header = ContainerHeader::from_config(family, &cfg, n, flags);
    header.delta_train = a.delta.unwrap_or(0.0);
    let container = Container { header, samples };
    save(&container, &a.out)
}

pub fn dsm(a: DsmArgs) -> Result<()> {
    let mut c = load(&a.input)?;
    if let Some(split) = a.split {
        let split = Split::from(split);
        c.samples.retain(|s| Split::of(s.sample_id) == Some(split));
    }
    let cfg = c.config();
    let n = c.header.n;
    let kind = match (a.delta, a.fields) {
        (Some(d), _) => {
            check_delta(d)?;
            FieldKind::Clean
        }
        (None, Some(FieldsArg::Clean)) => FieldKind::Clean,
        (None, Some(FieldsArg::Noisy)) => FieldKind::Noisy,
        (None, None) if c.header.has(FLAG_NOISY) => FieldKind::Noisy,
        (None, None) => FieldKind::Clean,
    };
    let kernel = SamplingKernel::for_config(&cfg, n);
    let c_ref = &c;
    let samples = c
        .samples
        .par_iter()
        .map(|s| {
            let mut records = c_ref.records(s, kind)?;
            let mut entry = s.clone();
            if let Some(d) = a.delta {
                records = noisy_records(&records, d, s.sample_id)?;
                entry.noisy = Some(flatten(&records));
            }
            entry.tensor = Some(compute_tensor_with(&kernel, &records, &cfg, n)?.data);
            Ok(entry)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = c.header.clone();
    header.flags |= FLAG_TENSORS;
    if let Some(d) = a.delta {
        header.flags |= FLAG_NOISY;
        header.delta_train = d;
    }
    let mut out = Container { header, samples };
    if out
        .samples
        .iter()
        .any(|s| Split::of(s.sample_id) == Some(Split::Train))
    {
        out.header.scale_c = training_scale_constant(&out)?;
    }
    save(&out, &a.out)
}

pub fn augment(input: &Path, output: &Path, op: AugmentOp) -> Result<()> {
    let c = load(input)?;
    if !c.header.has(FLAG_TENSORS) {
        bail!("{} holds no tensors to augment", input.display());
    }
    let samples = c
        .samples
        .par_iter()
        .map(|s| {
            let (grid, tensor) = op.apply(&c.grid(s)?, &c.tensor(s)?)?;
            Ok(SampleEntry {
                sample_id: s.sample_id,
                seed: s.seed,
                eps: grid.into_eps(),
                clean: None,
                noisy: None,
                tensor: Some(tensor.data),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = c.header.clone();
    header.flags = FLAG_TENSORS;
    save(&Container { header, samples }, output)
}

#[derive(Serialize)]
struct EvalSummary {
    samples: usize,
    mean_rel_l2: f64,
    mean_ssim: f64,
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let recon = load(&a.recon)?;
    let truth = load(&a.truth)?;
    if recon.header.n != truth.header.n {
        bail!(
            "reconstructions are {0} x {0}, ground truth is {1} x {1}",
            recon.header.n,
            truth.header.n
        );
    }
    if !recon.header.has(FLAG_TENSORS) || recon.header.n_inc != 1 {
        bail!("reconstruction container must hold one-channel tensors");
    }
    let delta = a.delta.unwrap_or(recon.header.delta_train);
    let n_inc = truth.header.n_inc;
    let records = recon
        .samples
        .par_iter()
        .map(|s| {
            let t = truth.find(s.sample_id).with_context(|| {
                format!("sample {:#x} is missing from the ground truth", s.sample_id)
            })?;
            let estimate = s.tensor.as_deref().unwrap_or_default();
            Ok(EvalRecord::score(
                s.sample_id,
                delta,
                n_inc,
                estimate,
                &t.eps,
                a.range,
            )?)
        })
        .collect::<Result<Vec<_>>>()?;

    let file =
        File::create(&a.report).with_context(|| format!("creating {}", a.report.display()))?;
    let mut w = BufWriter::new(file);
    for r in &records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;

    let count = records.len().max(1) as f64;
    let summary = EvalSummary {
        samples: records.len(),
        mean_rel_l2: records.iter().map(|r| r.rel_l2).sum::<f64>() / count,
        mean_ssim: records.iter().map(|r| r.ssim).sum::<f64>() / count,
    };
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

pub fn export(a: ExportArgs) -> Result<()> {
    let c = load(&a.input)?;
    let s = match a.sample {
        Some(id) => c.find(id).with_context(|| format!("no sample {id:#x}"))?,
        None => c.samples.first().context("container holds no samples")?,
    };
    let n = c.header.n;
    let values = match a.what {
        ExportWhat::Eps => s.eps.as_slice(),
        ExportWhat::Tensor => {
            if a.channel >= c.header.n_inc {
                bail!(
                    "channel {} out of range for {} incidences",
                    a.channel,
                    c.header.n_inc
                );
            }
            let t = s.tensor.as_deref().context("sample holds no tensor")?;
            &t[a.channel * n * n..(a.channel + 1) * n * n]
        }
    };
    let (lo, hi) = pgm::value_range(values);
    let bytes = pgm::encode(values, n, a.min.unwrap_or(lo), a.max.unwrap_or(hi))?;
    std::fs::write(&a.out, bytes).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}
