//! Dataset generation and container invariants.

use std::collections::HashSet;

use scatter_dsm::dataset::generate::{draw_circles, CENTER_RANGE};
use scatter_dsm::dataset::idx::encode_idx;
use scatter_dsm::dataset::{
    draw_scene, gen_dataset, load_idx, noisy_records, Container, ContainerHeader, Family,
    FieldKind, GenParams, Split, SplitCounts, FLAG_CLEAN, FLAG_NOISY, FLAG_TENSORS,
};
use scatter_dsm::dsm::{compute_tensor, scale_tensor};
use scatter_dsm::forward::ExperimentConfig;
use scatter_dsm::rng::Rng;
use scatter_dsm::scene::DigitImage;
use scatter_dsm::Error;
use tempfile::TempDir;

fn params(family: Family, counts: SplitCounts) -> GenParams {
    GenParams {
        family,
        counts,
        config: ExperimentConfig::with_incidences(2),
        n: 24,
        delta_train: 0.05,
        master_seed: 11,
    }
}

fn small_counts() -> SplitCounts {
    SplitCounts {
        train: 4,
        val: 2,
        test: 2,
    }
}

#[test]
fn circle_count_is_uniform() {
    let mut rng = Rng::new(2024);
    let mut hist = [0u32; 3];
    let mut xs = [0u32; 4];
    for _ in 0..3000 {
        let circles = draw_circles(&mut rng, Family::Circles).unwrap();
        hist[circles.len() - 1] += 1;
        for c in &circles {
            let bin = ((c.center.x + CENTER_RANGE) / (2.0 * CENTER_RANGE) * 4.0) as usize;
            xs[bin.min(3)] += 1;
        }
    }
    let chi2 = |obs: &[u32]| {
        let expected = obs.iter().sum::<u32>() as f64 / obs.len() as f64;
        obs.iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum::<f64>()
    };
    // 0.1% critical values for 2 and 3 degrees of freedom
    assert!(chi2(&hist) < 13.82, "count histogram {hist:?}");
    assert!(chi2(&xs) < 16.27, "center histogram {xs:?}");
}

#[test]
fn generated_dataset_invariants() {
    let c = gen_dataset(&params(Family::Circles, small_counts()), None).unwrap();
    assert_eq!(c.header.flags, FLAG_CLEAN | FLAG_NOISY | FLAG_TENSORS);
    assert_eq!(c.samples.len(), 8);

    let ids: HashSet<u64> = c.samples.iter().map(|s| s.sample_id).collect();
    assert_eq!(ids.len(), 8);
    for split in Split::ALL {
        let n = c
            .samples
            .iter()
            .filter(|s| Split::of(s.sample_id) == Some(split))
            .count() as u64;
        assert_eq!(n, small_counts().get(split));
    }

    let cfg = c.config();
    for s in &c.samples {
        let clean = c.records(s, FieldKind::Clean).unwrap();
        let noisy = c.records(s, FieldKind::Noisy).unwrap();
        assert_eq!(noisy_records(&clean, 0.05, s.sample_id).unwrap(), noisy);
        let fresh = compute_tensor(&noisy, &cfg, c.header.n).unwrap();
        let stored = c.tensor(s).unwrap();
        for (a, b) in fresh.data.iter().zip(&stored.data) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    let train: Vec<_> = c
        .samples
        .iter()
        .filter(|s| Split::of(s.sample_id) == Some(Split::Train))
        .map(|s| c.tensor(s).unwrap())
        .collect();
    let max = train
        .iter()
        .map(|t| scale_tensor(t, c.header.scale_c).unwrap().max_value())
        .fold(0.0, f64::max);
    assert_eq!(max, 2.0);
}

#[test]
fn regeneration_is_deterministic() {
    let p = params(Family::CirclesHighContrast, small_counts());
    let a = gen_dataset(&p, None).unwrap().to_bytes().unwrap();
    let b = gen_dataset(&p, None).unwrap().to_bytes().unwrap();
    assert_eq!(a, b);
    let other = GenParams {
        master_seed: 12,
        ..p
    };
    assert_ne!(a, gen_dataset(&other, None).unwrap().to_bytes().unwrap());
}

#[test]
fn save_load_and_corruption() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("d.scat");
    let c = gen_dataset(&params(Family::Circles, small_counts()), None).unwrap();
    c.save(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let back = Container::load(&path).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.to_bytes().unwrap(), bytes);

    let mut bad = bytes.clone();
    let at = bad.len() / 2;
    bad[at] ^= 0x80;
    std::fs::write(&path, &bad).unwrap();
    assert!(matches!(
        Container::load(&path),
        Err(Error::Checksum { .. })
    ));

    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(Container::load(&path).is_err());
}

#[test]
fn empty_dataset_round_trips() {
    let header = ContainerHeader::from_config(Family::Circles, &ExperimentConfig::default(), 64, 7);
    let c = Container::new(header);
    let bytes = c.to_bytes().unwrap();
    assert_eq!(bytes.len(), 88);
    assert_eq!(Container::from_bytes(&bytes).unwrap(), c);
}

fn digit_fixture() -> Vec<DigitImage> {
    let bar = |r0: usize, r1: usize, c0: usize, c1: usize| {
        let mut px = vec![0.0; 784];
        for r in r0..r1 {
            for c in c0..c1 {
                px[r * 28 + c] = 1.0;
            }
        }
        DigitImage::new(px).unwrap()
    };
    vec![bar(4, 24, 12, 16), bar(6, 10, 4, 24), bar(4, 24, 6, 22)]
}

#[test]
fn digits_from_idx_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("digits.idx");
    std::fs::write(&path, encode_idx(&digit_fixture())).unwrap();
    let digits = load_idx(&path).unwrap();
    assert_eq!(digits.len(), 3);

    let counts = SplitCounts {
        train: 3,
        val: 0,
        test: 1,
    };
    let p = params(Family::Digits, counts);
    assert!(gen_dataset(&p, None).is_err());
    let c = gen_dataset(&p, Some(&digits)).unwrap();
    assert_eq!(c.header.family, Family::Digits);
    assert_eq!(c.samples.len(), 4);
    for s in &c.samples {
        assert!(s.eps.iter().all(|e| (1.0..=2.5).contains(e)));
        assert!(s.eps.iter().any(|e| *e > 1.0));
        let again = draw_scene(Family::Digits, s.seed, 24, Some(&digits)).unwrap();
        assert_eq!(again.eps(), s.eps.as_slice());
    }
}
